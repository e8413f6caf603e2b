//! Experiment configuration and up-front validation.

use std::path::{Path, PathBuf};

use lidskii_core::evolution::Backend;
use lidskii_core::exponent::{ModulusSequence, SequenceModel};
use lidskii_core::families;
use lidskii_core::linalg::{C64, CVector};
use lidskii_core::operator::{OperatorSpec, load_operator};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    #[serde(alias = "analyze-exponent")]
    ExponentAnalysis,
    Decompose,
    Sum,
    ContourVerify,
    Evolve,
    FullVerify,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::ExponentAnalysis => "exponent-analysis",
            Task::Decompose => "decompose",
            Task::Sum => "sum",
            Task::ContourVerify => "contour-verify",
            Task::Evolve => "evolve",
            Task::FullVerify => "full-verify",
        }
    }
}

/// Where an operator comes from. Seeded families need an explicit seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorRef {
    File { path: PathBuf },
    Inline { matrix: serde_json::Value },
    Structured { seed: u64, dim: usize, max_chain: usize },
    Sectorial { seed: u64, dim: usize, s: f64 },
    Diagonal { seed: u64, dim: usize, lo: f64, hi: f64, max_angle: f64 },
    Jordan { seed: u64, mu: [f64; 2], size: usize },
    Normal { seed: u64, values: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceRef {
    Power { exponent: f64 },
    Geometric { ratio: f64 },
    E1 { rho: f64 },
    E2 { kappa: f64, q: f64 },
    Values { moduli: Vec<f64> },
    /// One modulus (or `re,im` pair) per line; `tail_exponent` marks it as a prefix.
    Csv { path: PathBuf, tail_exponent: Option<f64> },
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct Params {
    pub alpha: Option<f64>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub t_values: Vec<f64>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    pub tau: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub tolerance: Option<f64>,
    pub rank_tolerance: Option<f64>,
    pub h: Option<Vec<[f64; 2]>>,
    pub backend: Option<String>,
    pub horizon: Option<usize>,
    pub p: Option<u32>,
    pub rho1: Option<f64>,
    #[serde(default)]
    pub r_grid: Vec<f64>,
    pub probes: Option<usize>,
}

/// Top-level keys; serde cannot deny unknown fields through `flatten`, so they are checked by hand.
const KNOWN_KEYS: &[&str] = &[
    "name", "task", "operators", "W", "sequence", "seed", "output", "alpha", "alphas", "t_values", "t_grid", "tau",
    "K", "tolerance", "rank_tolerance", "h", "backend", "horizon", "p", "rho1", "r_grid", "probes",
];

#[derive(Debug, Clone, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub task: Option<Task>,
    #[serde(default)]
    pub operators: Vec<OperatorRef>,
    /// Evolution operator; an alias for a single entry of `operators`.
    #[serde(rename = "W")]
    pub w: Option<OperatorRef>,
    pub sequence: Option<SequenceRef>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    #[serde(default, flatten)]
    pub params: Params,
}

impl ExperimentConfig {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            task: None,
            operators: Vec::new(),
            w: None,
            sequence: None,
            seed: None,
            output: None,
            params: Params::default(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }

    pub fn from_json_str(text: &str) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let obj = value.as_object().ok_or("config must be a JSON object")?;
        if let Some(k) = obj.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(format!("unknown key `{k}`"));
        }
        serde_json::from_value(value).map_err(|e| e.to_string())
    }
}

/// Everything a task needs, loaded and checked before any output is written.
#[derive(Debug)]
pub struct Resolved {
    pub name: String,
    pub task: Task,
    pub seed: Option<u64>,
    pub operators: Vec<OperatorSpec>,
    pub sequence: Option<ModulusSequence>,
    pub h: Option<CVector>,
    pub params: Params,
}

fn input<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{what}: {e}"))
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
}

fn load_ref(r: &OperatorRef, base: &Path, at: usize) -> Result<OperatorSpec, CliError> {
    let what = format!("operator {at}");
    match r {
        OperatorRef::File { path } => load_operator(resolve_path(base, path)).map_err(input(&what)),
        OperatorRef::Inline { matrix } => OperatorSpec::from_json_str(&matrix.to_string()).map_err(input(&what)),
        OperatorRef::Structured { seed, dim, max_chain } => {
            if *dim == 0 || *max_chain == 0 {
                return Err(CliError::Input(format!("{what}: dim and max_chain must be positive")));
            }
            families::structured_operator(*seed, *dim, *max_chain).map_err(input(&what))
        }
        OperatorRef::Sectorial { seed, dim, s } => {
            if *dim == 0 || !(*s >= 0.0) {
                return Err(CliError::Input(format!("{what}: need dim > 0 and s >= 0")));
            }
            families::sectorial_operator(*seed, *dim, *s).map_err(input(&what))
        }
        OperatorRef::Diagonal { seed, dim, lo, hi, max_angle } => {
            if *dim == 0 || !(*lo > 0.0 && lo <= hi) || !(*max_angle >= 0.0) {
                return Err(CliError::Input(format!("{what}: need dim > 0, 0 < lo <= hi, max_angle >= 0")));
            }
            families::diagonal_family(*seed, *dim, *lo, *hi, *max_angle).map_err(input(&what))
        }
        OperatorRef::Jordan { seed, mu, size } => {
            if *size == 0 {
                return Err(CliError::Input(format!("{what}: size must be positive")));
            }
            families::jordan_block_operator(*seed, C64::new(mu[0], mu[1]), *size).map_err(input(&what))
        }
        OperatorRef::Normal { seed, values } => {
            if values.is_empty() {
                return Err(CliError::Input(format!("{what}: no eigenvalues")));
            }
            let v: Vec<C64> = values.iter().map(|p| C64::new(p[0], p[1])).collect();
            families::normal_operator(*seed, &v).map_err(input(&what))
        }
    }
}

fn load_sequence(r: &SequenceRef, base: &Path) -> Result<ModulusSequence, CliError> {
    let model = |m: SequenceModel| {
        m.validate().map_err(input("sequence"))?;
        Ok(ModulusSequence::Model(m))
    };
    match r {
        SequenceRef::Power { exponent } => model(SequenceModel::Power { exponent: *exponent }),
        SequenceRef::Geometric { ratio } => model(SequenceModel::Geometric { ratio: *ratio }),
        SequenceRef::E1 { rho } => model(SequenceModel::E1 { rho: *rho }),
        SequenceRef::E2 { kappa, q } => model(SequenceModel::E2 { kappa: *kappa, q: *q }),
        SequenceRef::Values { moduli } => ModulusSequence::finite(moduli.clone()).map_err(input("sequence")),
        SequenceRef::Csv { path, tail_exponent } => {
            let path = resolve_path(base, path);
            let text = std::fs::read_to_string(&path).map_err(input(&format!("sequence {}", path.display())))?;
            let seq = ModulusSequence::from_csv(&text).map_err(input("sequence"))?;
            match (tail_exponent, seq) {
                (Some(e), ModulusSequence::Finite(m)) => {
                    ModulusSequence::prefix(m, Some(*e)).map_err(input("sequence"))
                }
                (_, s) => Ok(s),
            }
        }
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<(), CliError> {
    match v {
        Some(x) if !(x > 0.0) || !x.is_finite() => Err(CliError::Input(format!("{name} must be positive and finite"))),
        _ => Ok(()),
    }
}

fn increasing_positive(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Input(format!("{name} must be positive and strictly increasing")));
    }
    Ok(())
}

/// Loads every referenced file and checks parameters; nothing is computed or written here.
pub fn validate(config: &ExperimentConfig, task: Task, base: &Path, seed_override: Option<u64>) -> Result<Resolved, CliError> {
    if let Some(t) = config.task
        && t != task
    {
        return Err(CliError::Input(format!("config is for task {}, not {}", t.name(), task.name())));
    }
    if config.name.trim().is_empty() {
        return Err(CliError::Input("config name is empty".into()));
    }
    let p = &config.params;
    let seed = seed_override.or(config.seed);

    let mut refs: Vec<&OperatorRef> = config.operators.iter().collect();
    if let Some(w) = &config.w {
        refs.push(w);
    }
    let operators = refs.iter().enumerate().map(|(i, r)| load_ref(r, base, i)).collect::<Result<Vec<_>, _>>()?;
    let sequence = config.sequence.as_ref().map(|s| load_sequence(s, base)).transpose()?;

    positive("alpha", p.alpha)?;
    positive("tau", p.tau)?;
    positive("K", p.k)?;
    positive("tolerance", p.tolerance)?;
    positive("rank_tolerance", p.rank_tolerance)?;
    positive("rho1", p.rho1)?;
    if p.alpha.is_some_and(|a| a <= 1.0) && matches!(task, Task::Evolve) {
        return Err(CliError::Input("alpha must exceed 1 for the Cauchy problem".into()));
    }
    if p.alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(CliError::Input("alphas must be positive".into()));
    }
    if p.t_values.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(CliError::Input("t_values must be positive".into()));
    }
    increasing_positive("t_grid", &p.t_grid)?;
    increasing_positive("r_grid", &p.r_grid)?;
    if p.probes == Some(0) {
        return Err(CliError::Input("probes must be positive".into()));
    }
    if let Some(b) = &p.backend {
        Backend::parse(b).map_err(input("backend"))?;
    }

    let needs_ops = matches!(task, Task::Decompose | Task::Sum | Task::ContourVerify | Task::Evolve);
    if needs_ops && operators.is_empty() {
        return Err(CliError::Input(format!("task {} needs at least one operator", task.name())));
    }
    if task == Task::ExponentAnalysis && sequence.is_none() {
        return Err(CliError::Input("exponent-analysis needs a sequence".into()));
    }
    if task == Task::Evolve && operators.len() != 1 {
        return Err(CliError::Input("evolve takes exactly one operator W".into()));
    }

    let h = match &p.h {
        Some(v) => {
            let h = CVector::from_iterator(v.len(), v.iter().map(|p| C64::new(p[0], p[1])));
            if let Some(op) = operators.iter().find(|op| op.dimension != h.len()) {
                return Err(CliError::Input(format!("h has length {}, operator {} has dimension {}", h.len(), op.label, op.dimension)));
            }
            Some(h)
        }
        None => None,
    };
    let random_h = matches!(task, Task::Sum | Task::ContourVerify | Task::Evolve) && h.is_none();
    if (random_h || task == Task::FullVerify) && seed.is_none() {
        return Err(CliError::Input(format!("task {} draws random data and needs a seed", task.name())));
    }

    Ok(Resolved { name: config.name.clone(), task, seed, operators, sequence, h, params: p.clone() })
}
