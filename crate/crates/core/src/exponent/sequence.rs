//! Modulus sequences `|a_1| <= |a_2| <= ...`, materialized or generated by a model.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceModel {
    /// `a_n = n^exponent`.
    Power { exponent: f64 },
    /// `a_n = ratio^n`.
    Geometric { ratio: f64 },
    /// Counting function `n(r) ~ r^rho / (ln r lnln r)`, zero density.
    E1 { rho: f64 },
    /// `a_i = i^kappa ln^kappa(i+q) lnln^kappa(i+q)`.
    E2 { kappa: f64, q: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModulusSequence {
    /// The whole sequence.
    Finite(Vec<f64>),
    /// A prefix of an infinite sequence, optionally with `n(r) ~ C r^tail_exponent` beyond it.
    Prefix { moduli: Vec<f64>, tail_exponent: Option<f64> },
    Model(SequenceModel),
}

fn validate_moduli(moduli: &[f64]) -> Result<()> {
    if let Some(i) = moduli.iter().position(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidParameter(format!("modulus {i} is not a positive finite number")));
    }
    if let Some(i) = moduli.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(format!("moduli decrease at index {}", i + 1)));
    }
    Ok(())
}

impl SequenceModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SequenceModel::Power { exponent } => exponent > 0.0 && exponent.is_finite(),
            SequenceModel::Geometric { ratio } => ratio > 1.0 && ratio.is_finite(),
            SequenceModel::E1 { rho } => rho > 0.0 && rho.is_finite(),
            SequenceModel::E2 { kappa, q } => kappa > 0.0 && kappa <= 1.0 && q > E.powf(E) - 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("model parameters out of domain: {self:?}")))
        }
    }

    /// Convergence exponent implied by the model.
    pub fn exponent(&self) -> f64 {
        match *self {
            SequenceModel::Power { exponent } => 1.0 / exponent,
            SequenceModel::Geometric { .. } => 0.0,
            SequenceModel::E1 { rho } => rho,
            SequenceModel::E2 { kappa, .. } => 1.0 / kappa,
        }
    }

    /// Smooth counting function, within one of the step count `n(r)`.
    pub fn smooth_count(&self, r: f64) -> f64 {
        match *self {
            SequenceModel::Power { exponent } => r.powf(1.0 / exponent),
            SequenceModel::Geometric { ratio } => (r.ln() / ratio.ln()).max(0.0),
            SequenceModel::E1 { rho } => {
                let r0 = e1_start(rho);
                if r < r0 { 0.0 } else { e1_count(rho, r) }
            }
            SequenceModel::E2 { kappa, q } => {
                if r <= e2_term(kappa, q, 0.0) {
                    return 0.0;
                }
                // Continuous inverse of i -> a_i.
                let (mut lo, mut hi) = (0.0, 1.0);
                while e2_term(kappa, q, hi) < r {
                    hi *= 2.0;
                }
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if e2_term(kappa, q, mid) < r {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }

    /// `a_n` for `n >= 1`.
    pub fn term(&self, n: usize) -> f64 {
        let x = n as f64;
        match *self {
            SequenceModel::Power { exponent } => x.powf(exponent),
            SequenceModel::Geometric { ratio } => ratio.powf(x),
            SequenceModel::E1 { rho } => e1_term(rho, x),
            SequenceModel::E2 { kappa, q } => e2_term(kappa, q, x),
        }
    }
}

fn e1_count(rho: f64, r: f64) -> f64 {
    let l = r.ln();
    r.powf(rho) / (l * l.ln())
}

/// `max(e^e, point where r^rho/(ln r lnln r) starts increasing)`.
fn e1_start(rho: f64) -> f64 {
    let increasing = |r: f64| {
        let l = r.ln();
        rho > 1.0 / l + 1.0 / (l * l.ln())
    };
    let mut r = E.powf(E);
    if increasing(r) {
        return r;
    }
    while !increasing(r) {
        r *= 2.0;
    }
    let (mut lo, mut hi) = (0.5 * r, r);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if increasing(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Inverse of the E1 counting function on the integer grid.
fn e1_term(rho: f64, n: f64) -> f64 {
    let r0 = e1_start(rho);
    if n <= e1_count(rho, r0) {
        return r0;
    }
    let mut hi = 2.0 * r0;
    while e1_count(rho, hi) < n {
        hi *= 2.0;
    }
    let mut lo = 0.5 * hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if e1_count(rho, mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn e2_term(kappa: f64, q: f64, i: f64) -> f64 {
    let l = (i + q).ln();
    (i * l * l.ln()).powf(kappa)
}

impl ModulusSequence {
    pub fn finite(moduli: Vec<f64>) -> Result<Self> {
        validate_moduli(&moduli)?;
        Ok(ModulusSequence::Finite(moduli))
    }

    pub fn prefix(moduli: Vec<f64>, tail_exponent: Option<f64>) -> Result<Self> {
        validate_moduli(&moduli)?;
        if let Some(e) = tail_exponent {
            if !(e >= 0.0) {
                return Err(Error::InvalidParameter("tail exponent must be nonnegative".into()));
            }
        }
        Ok(ModulusSequence::Prefix { moduli, tail_exponent })
    }

    /// Sequence CSV: one modulus, or one `re,im` pair (taken by modulus), per line.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut moduli = parse_csv_values(text)?.into_iter().map(|z| z.norm()).collect::<Vec<_>>();
        moduli.sort_by(f64::total_cmp);
        Self::finite(moduli)
    }

    /// Number of terms, `None` for an unbounded model.
    pub fn len(&self) -> Option<usize> {
        match self {
            ModulusSequence::Finite(m) | ModulusSequence::Prefix { moduli: m, .. } => Some(m.len()),
            ModulusSequence::Model(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// `a_n`, `n >= 1`.
    pub fn term(&self, n: usize) -> Option<f64> {
        match self {
            ModulusSequence::Finite(m) | ModulusSequence::Prefix { moduli: m, .. } => {
                n.checked_sub(1).and_then(|i| m.get(i)).copied()
            }
            ModulusSequence::Model(model) => (n >= 1).then(|| model.term(n)),
        }
    }

    /// First `count` moduli (fewer if the sequence is shorter or overflows).
    pub fn take(&self, count: usize) -> Vec<f64> {
        match self {
            ModulusSequence::Finite(m) | ModulusSequence::Prefix { moduli: m, .. } => {
                m[..count.min(m.len())].to_vec()
            }
            ModulusSequence::Model(model) => {
                let v: Vec<f64> = (1..=count).into_par_iter().map(|n| model.term(n)).collect();
                let end = v.iter().position(|a| !a.is_finite()).unwrap_or(v.len());
                v[..end].to_vec()
            }
        }
    }

    /// `n(r) = #{n : |a_n| < r}`.
    pub fn count_below(&self, r: f64) -> usize {
        match self {
            ModulusSequence::Finite(m) | ModulusSequence::Prefix { moduli: m, .. } => m.partition_point(|&a| a < r),
            ModulusSequence::Model(model) => {
                let guess = model.smooth_count(r);
                if !guess.is_finite() {
                    return usize::MAX;
                }
                // Adjust the estimate so that a_k < r <= a_{k+1}.
                let mut k = guess.max(0.0).floor() as usize;
                while k > 0 && model.term(k) >= r {
                    k -= 1;
                }
                while model.term(k + 1) < r {
                    k += 1;
                }
                k
            }
        }
    }

    pub fn model(&self) -> Option<&SequenceModel> {
        match self {
            ModulusSequence::Model(m) => Some(m),
            _ => None,
        }
    }
}

/// Parses `re` or `re,im` lines; blank lines and `#` comments are skipped.
pub fn parse_csv_values(text: &str) -> Result<Vec<num_complex::Complex64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Malformed(format!("line {}: cannot parse {s:?}", lineno + 1)))
        };
        let z = match fields.as_slice() {
            [re] => num_complex::Complex64::new(parse(re)?, 0.0),
            [re, im] => num_complex::Complex64::new(parse(re)?, parse(im)?),
            _ => return Err(Error::Malformed(format!("line {}: expected 1 or 2 fields", lineno + 1))),
        };
        out.push(z);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    E1,
    E2,
}

/// E1 takes `[rho]`, E2 takes `[kappa, q]`.
pub fn generate_model_sequence(kind: ModelKind, params: &[f64]) -> Result<ModulusSequence> {
    let model = match (kind, params) {
        (ModelKind::E1, [rho]) => SequenceModel::E1 { rho: *rho },
        (ModelKind::E2, [kappa, q]) => SequenceModel::E2 { kappa: *kappa, q: *q },
        _ => return Err(Error::InvalidParameter(format!("wrong parameter count for {kind:?}"))),
    };
    model.validate()?;
    Ok(ModulusSequence::Model(model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_examples() {
        let s = ModulusSequence::finite(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.count_below(2.5), 2);
        assert_eq!(s.count_below(1.0), 0);
        assert_eq!(s.count_below(0.5), 0);
        let sq = ModulusSequence::Model(SequenceModel::Power { exponent: 2.0 });
        assert_eq!(sq.count_below(1e4), 99);
        assert_eq!(sq.count_below(1e4 + 1e-9), 100);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(ModulusSequence::finite(vec![2.0, 1.0]).is_err());
        assert!(ModulusSequence::finite(vec![0.0, 1.0]).is_err());
        assert!(generate_model_sequence(ModelKind::E2, &[1.5, 15.0]).is_err());
        assert!(generate_model_sequence(ModelKind::E2, &[1.0, 10.0]).is_err());
        assert!(generate_model_sequence(ModelKind::E1, &[0.0]).is_err());
    }

    #[test]
    fn e2_first_term() {
        let s = generate_model_sequence(ModelKind::E2, &[1.0, 15.0]).unwrap();
        let a1 = s.term(1).unwrap();
        let expected = 16f64.ln() * 16f64.ln().ln();
        assert!((a1 - expected).abs() < 1e-12);
        assert!((a1 - 2.827435).abs() < 1e-6);
    }

    #[test]
    fn e1_counting_matches_formula() {
        let s = generate_model_sequence(ModelKind::E1, &[1.0]).unwrap();
        for r in [1e2, 1e3, 1e4, 1e5] {
            let n = s.count_below(r) as f64;
            let formula = r / (r.ln() * r.ln().ln());
            assert!((n - formula).abs() <= 1.0, "r = {r}: {n} vs {formula}");
        }
    }

    #[test]
    fn csv_pairs_are_taken_by_modulus() {
        let s = ModulusSequence::from_csv("# zeros\n3,4\n1\n\n2,0\n").unwrap();
        assert_eq!(s, ModulusSequence::Finite(vec![1.0, 2.0, 5.0]));
        assert!(ModulusSequence::from_csv("1,2,3").is_err());
    }
}
