//! Counting functions, convergence exponents and related entire-function quantities.

pub mod beta;
pub mod estimate;
pub mod circles;
pub mod sequence;

pub use beta::{BetaProfile, beta_profile, canonical_product, primary_factor};
pub use estimate::{ExponentReport, GenusTest, convergence_exponent, singular_decay_exponent, upper_density};
pub use circles::{CircleBound, growth_bound, circle_bound, circle_bound_with};
pub use sequence::{ModelKind, ModulusSequence, SequenceModel, generate_model_sequence};

/// `n(r) = #{n : |a_n| < r}`.
pub fn counting_function(seq: &ModulusSequence, r: f64) -> usize {
    seq.count_below(r)
}
