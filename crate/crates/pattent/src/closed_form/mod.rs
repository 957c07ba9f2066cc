//! Per-family bound formulas: non-asymptotic evaluations driven by each
//! family's proof recipe, plus the displayed asymptotic forms.
//!
//! Finite-n results are rigorous at the given block length; asymptotic
//! results evaluate the theorems' leading terms (dropping their vanishing
//! corrections) and are labeled non-rigorous at finite n.

mod geometric;
mod linear;
mod slow_integer;
mod uniform;
mod zipf;

pub use geometric::geometric_bounds;
pub use linear::linear_bounds;
pub use slow_integer::slow_integer_bounds;
pub use uniform::{uniform_bounds, UniformKind};
pub use zipf::zipf_bounds;

use crate::numerics::EntropyInterval;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Leading-term theorem forms; not a rigorous bound at finite n.
    Asymptotic,
    /// Full finite-n recipe with swept epsilon parameters.
    FiniteN,
}

/// Chosen lower-bound terms (populated by finite-n recipes).
#[derive(Debug, Clone, Copy, Default)]
pub struct LbTerms {
    pub eps: f64,
    pub eps0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
}

/// Chosen upper-bound terms (populated by finite-n recipes).
#[derive(Debug, Clone, Copy, Default)]
pub struct UbTerms {
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub u: f64,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    pub r01: Option<f64>,
}

/// Family-specific auxiliary outputs.
#[derive(Debug, Clone, Default)]
pub struct Aux {
    /// Optimal code parameter of the uniform middle-regime upper bound.
    pub alpha: Option<f64>,
    /// Geometric second-order constants.
    pub c_l1: Option<f64>,
    pub c_l2: Option<f64>,
    pub b_g_max: Option<f64>,
    /// Linear regime-3 coefficient bracket (never a point value).
    pub c_lambda: Option<(f64, f64)>,
    /// Looser middle-regime alternative (uniform: the corollary constants).
    pub alt_asymptotic: Option<(f64, f64)>,
    /// Middle-regime code-parameter asymptotics (uniform), kept even when
    /// the reported regime is small-probability.
    pub mid_asymptotic: Option<(f64, f64)>,
}

/// One family evaluation.
#[derive(Debug, Clone)]
pub struct ClosedFormResult {
    pub n: u64,
    /// Rigorous finite-n bounds when `rigorous` is set; otherwise copies of
    /// the asymptotic evaluations.
    pub lb: f64,
    pub ub: f64,
    pub asymptotic_lb: f64,
    pub asymptotic_ub: f64,
    /// Whether `lb`/`ub` are valid finite-n bounds.
    pub rigorous: bool,
    /// Regime label (uniform: large-prob/middle/small-prob; linear: 1/2/3).
    pub regime: String,
    /// Per-symbol i.i.d. entropy bracket (infinite endpoints possible).
    pub iid_entropy: EntropyInterval,
    pub lb_terms: Option<LbTerms>,
    pub ub_terms: Option<UbTerms>,
    pub aux: Aux,
}

impl ClosedFormResult {
    pub fn gap_lb(&self) -> f64 {
        self.n as f64 * self.iid_entropy.hi - self.lb
    }
    pub fn gap_ub(&self) -> f64 {
        self.n as f64 * self.iid_entropy.lo - self.ub
    }
}

pub(crate) fn lb_terms_from(b: &crate::general_bounds::LowerBoundBreakdown) -> LbTerms {
    LbTerms {
        eps: b.eps,
        eps0: b.eps0,
        s1: b.s1,
        s2: b.s2,
        s3: b.s3,
        s4: b.s4,
    }
}

pub(crate) fn ub_terms_from(b: &crate::general_bounds::UpperBoundBreakdown) -> UbTerms {
    UbTerms {
        eps0: b.eps0,
        eps1: b.eps1,
        eps2: b.eps2,
        u: b.u,
        r0: b.r_named("0"),
        r1: b.r_named("1"),
        r01: b.r_named("01"),
    }
}

/// Epsilon coefficient grid `from..=to` in the given step, scaled by
/// `(ln ln n)/(ln n)` at use sites.
pub(crate) fn coeff_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = from;
    while x <= to + 1e-12 {
        v.push(x);
        x += step;
    }
    v
}
