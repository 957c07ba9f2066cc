//! Slowly decaying distribution over the integers:
//! `theta_j = alpha / (j (log2 j)^(1+gamma))`, `j >= 2`.
//!
//! The i.i.d. entropy is infinite for `gamma <= 1`, yet the per-symbol
//! pattern entropy stays finite; the finite-n recipe packs the heavy tail
//! into a point mass, sums the dominant head components exactly and brackets
//! the rest by integrals.

use super::{coeff_grid, lb_terms_from, ub_terms_from, Aux, ClosedFormResult, Mode};
use crate::distributions::DistributionModel;
use crate::general_bounds::{
    lnln_ratio, optimize_lower, optimize_upper, Packing, ParamSearchSpec, THETA_DEFAULT,
};
use crate::numerics::LN_2;
use crate::{Error, Result};

pub fn slow_integer_bounds(gamma: f64, n: u64, mode: Mode) -> Result<ClosedFormResult> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidDistribution("gamma must be positive".into()));
    }
    let dist = DistributionModel::slow_integer(gamma)?;
    let hx = dist.iid_entropy();
    let nf = n as f64;
    let alpha = dist.normalizer();

    // asymptotic per-symbol branches
    let branch = |a: f64| -> f64 {
        let l3 = 3f64.log2();
        let ln_ = nf.log2();
        if (gamma - 1.0).abs() < 1e-9 {
            a * LN_2 * ln_.ln()
                + 2.0 * a * ((1.0 + l3.ln()) / l3 - (1.0 + ln_.ln()) / ln_)
        } else if gamma < 1.0 {
            a * LN_2 / (1.0 - gamma) * (nf / 2.0).log2().powf(1.0 - gamma)
                + a * (1.0 + gamma) / (gamma * gamma)
                    * ((1.0 + gamma * l3.ln()) / l3.powf(gamma)
                        - (1.0 + gamma * ln_.ln()) / ln_.powf(gamma))
        } else {
            // decrease from H(X) dominates: returned as the gap coefficient
            a * LN_2 / ((gamma - 1.0) * ln_.powf(gamma - 1.0))
        }
    };
    let (asym_lb, asym_ub) = if gamma > 1.0 {
        (
            nf * (hx.lo - branch(alpha.hi)),
            nf * (hx.hi - branch(alpha.lo)),
        )
    } else {
        (nf * branch(alpha.lo), nf * branch(alpha.hi))
    };

    if mode == Mode::Asymptotic {
        return Ok(ClosedFormResult {
            n,
            lb: asym_lb,
            ub: asym_ub,
            asymptotic_lb: asym_lb,
            asymptotic_ub: asym_ub,
            rigorous: false,
            regime: regime_label(gamma),
            iid_entropy: hx,
            lb_terms: None,
            ub_terms: None,
            aux: Aux::default(),
        });
    }

    // finite-n recipe: eps swept around 1.7 (ln ln n)/(ln n) with eps0 = 0
    // for the lower bound; the upper bound keeps eps1 = 0 and optimizes
    // eps0 (and the quantization scale eps2) over the same ratio
    let mut search = ParamSearchSpec::default_for(&dist, n);
    search.eps_coeffs = coeff_grid(0.7, 2.7, 0.1);
    search.eps0_values = vec![0.0];
    search.eps1_values = vec![0.0];
    search.eps2_coeffs = vec![0.5, 1.0, 2.0, 3.0];
    search.ub_eps0_values = {
        let base = lnln_ratio(n);
        coeff_grid(0.5, 3.0, 0.5).iter().map(|c| c * base).collect()
    };
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
        regime: regime_label(gamma),
        iid_entropy: hx,
        lb_terms: Some(lb_terms_from(&lb)),
        ub_terms: Some(ub_terms_from(&ub)),
        aux: Aux::default(),
    })
}

fn regime_label(gamma: f64) -> String {
    if gamma > 1.0 {
        "finite-rate".into()
    } else if (gamma - 1.0).abs() < 1e-9 {
        "log-log-rate".into()
    } else {
        "infinite-rate".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_two_asymptotic_gap() {
        // per-symbol gap = alpha ln2 / ((gamma-1) (log n)^(gamma-1))
        let n = 1_000_000u64;
        let dist = DistributionModel::slow_integer(2.0).unwrap();
        let alpha = dist.normalizer().midpoint();
        let r = slow_integer_bounds(2.0, n, Mode::Asymptotic).unwrap();
        let gap = r.iid_entropy.midpoint() - r.asymptotic_ub / n as f64;
        let want = alpha * LN_2 / (n as f64).log2();
        assert!((gap / alpha - 0.0348).abs() < 2e-4, "gap/alpha = {}", gap / alpha);
        assert!((gap - want).abs() < 1e-6 * want.abs() + 1e-9);
    }

    #[test]
    fn infinite_entropy_finite_pattern_bounds() {
        let r = slow_integer_bounds(0.5, 1000, Mode::FiniteN).unwrap();
        assert!(r.iid_entropy.is_infinite());
        assert!(r.lb.is_finite() && r.ub.is_finite());
        assert!(r.lb > 0.0, "lb = {}", r.lb);
        assert!(r.lb <= r.ub);
    }

    #[test]
    fn gamma_one_finite_positive() {
        let r = slow_integer_bounds(1.0, 1000, Mode::FiniteN).unwrap();
        assert!(r.lb > 0.0 && r.lb <= r.ub, "lb {} ub {}", r.lb, r.ub);
    }
}
