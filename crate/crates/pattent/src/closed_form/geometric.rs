//! Geometric distribution `theta_j = p (1-p)^(j-1)`.
//!
//! The gap between `n H(X)` and the pattern block entropy shrinks very
//! slowly here, so the finite-n recipe keeps every second-order term: exact
//! bin masses `(1-p)^(j-1)`, the occupancy summand folded into the
//! re-occurrence sum, the packing loss of bin 1 evaluated at the exact
//! expected-distinct count, and the first-occurrence gain `U`.

use super::{coeff_grid, lb_terms_from, ub_terms_from, Aux, ClosedFormResult, Mode};
use crate::distributions::DistributionModel;
use crate::general_bounds::{
    lnln_ratio, lnlnln_ratio, optimize_lower, optimize_upper, Packing, ParamSearchSpec,
    THETA_DEFAULT,
};
use crate::numerics::{h2, log_binomial, log_factorial, LOG2_E};
use crate::{Error, Result};

/// `C_L1(p)`: the first-order coefficient of the asymptotic lower bound.
pub fn c_l1(p: f64) -> f64 {
    p.log2() / (1.0 - p).log2() + (5.0 + 2.0 * p - 2.5 * p * p) / (3.0 * p * (2.0 - p))
}

/// Largest bin index whose overlap counter can still reach 2.
pub fn b_g_max(p: f64) -> f64 {
    let r = 1.0 / (1.0 - p).sqrt();
    (2.0 + r) / (r - 1.0)
}

/// `C_L2(p)`: the constant term of the asymptotic lower bound, including the
/// overlap-factorial sum capped at `b_g_max` and the separation binomial at
/// the displayed count caps.
pub fn c_l2(p: f64) -> f64 {
    let q = 1.0 - p;
    let d = (1.0 / q).log2();
    let mut v = (5.0 + 5.0 * p - 4.0 * p * p) / (3.0 * p * (2.0 - p)) * (1.0 / p).log2();
    v += (q * q / (p * p))
        * (1.0 / q - 2.0 * (p * p - 2.0 * p + 0.5) / (3.0 * (2.0 - p) * (2.0 - p)))
        * d;
    let fl = |x: f64| -> f64 {
        let m = x.floor().max(0.0);
        log_factorial(m).map(|iv| iv.hi).unwrap_or(0.0)
    };
    v += fl(2.0 * (3.0 / q.sqrt()).log2() / d);
    let bmax = b_g_max(p).floor() as i64;
    for b in 2..=bmax {
        let b = b as f64;
        v += fl(2.0 * ((b + 2.0) / ((b - 1.0) * q.sqrt())).log2() / d);
    }
    let a_cap = (6.9 * LOG2_E / d + 1.0).floor();
    let b_cap = (1.4 * LOG2_E / d + 1.0).floor().min(a_cap);
    v += log_binomial(a_cap, b_cap).map(|iv| iv.hi).unwrap_or(0.0);
    v
}

pub fn geometric_bounds(p: f64, n: u64, mode: Mode) -> Result<ClosedFormResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidDistribution("p must lie in (0, 1)".into()));
    }
    let dist = DistributionModel::geometric(p)?;
    let hx = dist.iid_entropy();
    let nf = n as f64;
    let d = (1.0 / (1.0 - p)).log2();
    let nh = nf * hx.midpoint();

    // asymptotic forms
    let ll = nf.log2().log2();
    let lll = if nf.log2().log2() > 1.0 {
        nf.log2().log2().log2().max(0.0)
    } else {
        0.0
    };
    let delta = (20f64.ln() / nf.ln().ln()).max(0.0);
    let c1 = c_l1(p);
    let c2 = c_l2(p);
    let log_ln_n = nf.ln().log2();
    let asym_lb = nh
        - (1.0 + delta).powi(2) * log_ln_n * log_ln_n / (2.0 * d)
        - c1 * (1.0 + delta) * log_ln_n
        - c2;
    let asym_ub = nh
        - ((1.0 - p) * h2(p) / (p * p) - 1.0 / (2.0 * (2.0 - p) * p) * (1.0 + lll / ll)) / ll
        + 1.0 / (2.0 * (2.0 - p) * p)
            * (2.0 * std::f64::consts::E * (2.0 - p) / ((1.0 - p) * d)).log2()
            / (ll * ll);

    if mode == Mode::Asymptotic {
        return Ok(ClosedFormResult {
            n,
            lb: asym_lb,
            ub: asym_ub,
            asymptotic_lb: asym_lb,
            asymptotic_ub: asym_ub,
            rigorous: false,
            regime: "geometric".into(),
            iid_entropy: hx,
            lb_terms: None,
            ub_terms: None,
            aux: Aux {
                c_l1: Some(c1),
                c_l2: Some(c2),
                b_g_max: Some(b_g_max(p)),
                ..Aux::default()
            },
        });
    }

    // finite-n recipe: eps roughly follows 1.5 (ln ln n)/(ln n); eps0 is
    // optimized jointly. The upper bound uses nonnegative eps1 (multiples of
    // (ln ln ln n)/(ln n)) to keep the bin-0 loss negligible.
    let mut search = ParamSearchSpec::default_for(&dist, n);
    search.eps_coeffs = coeff_grid(0.5, 2.5, 0.1);
    search.eps0_values = coeff_grid(0.0, 1.0, 0.05);
    let l3 = lnlnln_ratio(n);
    search.eps1_values = if l3 > 0.0 {
        vec![0.0, l3, 2.0 * l3, 3.0 * l3]
    } else {
        vec![0.0, 0.5 * lnln_ratio(n)]
    };
    search.eps2_coeffs = vec![0.5, 1.0, 1.5, 2.0, 3.0];
    search.ub_eps0_values = coeff_grid(0.05, 1.0, 0.05);
    search.theta_minus = THETA_DEFAULT.0;
    search.theta_plus = THETA_DEFAULT.1;
    search.packings = vec![Packing::SeparateBins];
    let lb = optimize_lower(&dist, n, &search)?;
    let ub = optimize_upper(&dist, n, &search)?;

    Ok(ClosedFormResult {
        n,
        lb: lb.lb,
        ub: ub.ub,
        asymptotic_lb: asym_lb,
        asymptotic_ub: asym_ub,
        rigorous: true,
        regime: "geometric".into(),
        iid_entropy: hx,
        lb_terms: Some(lb_terms_from(&lb)),
        ub_terms: Some(ub_terms_from(&ub)),
        aux: Aux {
            c_l1: Some(c1),
            c_l2: Some(c2),
            b_g_max: Some(b_g_max(p)),
            ..Aux::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_at_half() {
        assert!((c_l1(0.5) - (1.0 + 5.375 / 2.25)).abs() < 1e-12);
        assert!((c_l1(0.5) - 3.3889).abs() < 1e-4);
        assert!((b_g_max(0.5) - 8.2426).abs() < 1e-4);
    }

    #[test]
    fn small_n_small_p_rows() {
        // Table rows p = 0.01, n = 10: nH = 80.8, UB 2.28, LB 1.64
        let r = geometric_bounds(0.01, 10, Mode::FiniteN).unwrap();
        let nh = 10.0 * r.iid_entropy.midpoint();
        assert!((nh - 80.79).abs() < 0.05, "nh = {nh}");
        assert!(r.lb <= r.ub);
        // gap tolerance: 20% relative or 2 bits
        let (gap_ub, gap_lb) = (nh - r.ub, nh - r.lb);
        assert!((gap_ub - 78.52).abs() <= 2.0f64.max(0.2 * 78.52), "gap_ub = {gap_ub}");
        assert!((gap_lb - 79.16).abs() <= 2.0f64.max(0.2 * 79.16), "gap_lb = {gap_lb}");
    }

    #[test]
    fn large_p_row() {
        // Table row p = 0.8, n = 1000: UB 902.34, LB 893.15
        let r = geometric_bounds(0.8, 1000, Mode::FiniteN).unwrap();
        let nh = 1000.0 * r.iid_entropy.midpoint();
        assert!((nh - 902.410).abs() < 0.005);
        let (gap_ub, gap_lb) = (nh - r.ub, nh - r.lb);
        assert!((gap_ub - 0.07).abs() <= 2.0, "gap_ub = {gap_ub}");
        assert!((gap_lb - 9.26).abs() <= 2.0, "gap_lb = {gap_lb}");
    }

    #[test]
    fn huge_n_row() {
        // p = 0.8, n = 1e10: gap_UB 0.07, gap_LB 18.66
        let r = geometric_bounds(0.8, 10_000_000_000, Mode::FiniteN).unwrap();
        let gap_ub = r.gap_ub();
        let gap_lb = r.gap_lb();
        assert!((gap_ub - 0.07).abs() <= 2.0, "gap_ub = {gap_ub}");
        assert!((gap_lb - 18.66).abs() <= 2.0f64.max(0.2 * 18.66), "gap_lb = {gap_lb}");
    }
}
