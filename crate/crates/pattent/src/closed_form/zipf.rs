//! Zipf (zeta) distribution `theta_j = 1/(zeta(1+gamma) j^(1+gamma))`.

use super::{coeff_grid, lb_terms_from, ub_terms_from, Aux, ClosedFormResult, Mode};
use crate::distributions::DistributionModel;
use crate::general_bounds::{
    lnln_ratio, optimize_lower, optimize_upper, Packing, ParamSearchSpec, THETA_ZIPF,
};
use crate::{Error, Result};

pub fn zipf_bounds(gamma: f64, n: u64, mode: Mode) -> Result<ClosedFormResult> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidDistribution("gamma must be positive".into()));
    }
    let dist = DistributionModel::zipf(gamma)?;
    let hx = dist.iid_entropy();
    let nf = n as f64;
    let zeta = dist.normalizer();

    // asymptotic gap coefficients: the block entropy trails n H(X) by
    // Theta(n^(1/(1+gamma)) log n), with displayed constants
    let scale = nf.powf(1.0 / (1.0 + gamma)) * nf.log2();
    let denom = |z: f64| (1.0 + gamma) * z.powf(1.0 / (1.0 + gamma));
    let c_lb = (1.0 + 1.0 / gamma - 1.0 / (3.0 * (1.0 + 2.0 * gamma))) / denom(zeta.lo);
    let c_ub = (1.0 - 1.0 / std::f64::consts::E + 1.0 / gamma - 1.0 / (2.0 * (1.0 + 2.0 * gamma)))
        / denom(zeta.hi);
    let asym_lb = nf * hx.lo - c_lb * scale;
    let asym_ub = nf * hx.hi - c_ub * scale;

    if mode == Mode::Asymptotic {
        return Ok(ClosedFormResult {
            n,
            lb: asym_lb,
            ub: asym_ub,
            asymptotic_lb: asym_lb,
            asymptotic_ub: asym_ub,
            rigorous: false,
            regime: "zipf".into(),
            iid_entropy: hx,
            lb_terms: None,
            ub_terms: None,
            aux: Aux::default(),
        });
    }

    // finite-n recipe: eps around 1.75..2 times (ln ln n)/(ln n) with the
    // narrow separation constants; the upper bound keeps eps1 = 0 and sweeps
    // eps0, eps2 along the same ratio
    let mut search = ParamSearchSpec::default_for(&dist, n);
    search.eps_coeffs = coeff_grid(0.75, 3.0, 0.125);
    search.eps0_values = vec![0.0, 0.1, 0.2];
    search.eps1_values = vec![0.0];
    search.eps2_coeffs = vec![0.5, 1.0, 2.0, 3.0];
    search.ub_eps0_values = {
        let base = lnln_ratio(n);
        coeff_grid(0.25, 3.0, 0.25).iter().map(|c| c * base).collect()
    };
    search.theta_minus = THETA_ZIPF.0;
    search.theta_plus = THETA_ZIPF.1;
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
        regime: "zipf".into(),
        iid_entropy: hx,
        lb_terms: Some(lb_terms_from(&lb)),
        ub_terms: Some(ub_terms_from(&ub)),
        aux: Aux::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::zeta_bracket;

    #[test]
    fn asymptotic_lb_coefficient_gamma_one() {
        // (1 + 1/gamma - 1/(3(1+2gamma))) / ((1+gamma) zeta(2)^(1/2)) ~ 0.7365
        let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        let c = (2.0 - 1.0 / 9.0) / (2.0 * zeta2.sqrt());
        assert!((c - 0.7365).abs() < 5e-4, "c = {c}");
        let n = 1000u64;
        let r = zipf_bounds(1.0, n, Mode::Asymptotic).unwrap();
        let nf = n as f64;
        let inferred = (nf * r.iid_entropy.midpoint() - r.asymptotic_lb)
            / (nf.sqrt() * nf.log2());
        assert!((inferred - c).abs() < 1e-6, "{inferred} vs {c}");
    }

    #[test]
    fn normalizer_sanity() {
        let z = zeta_bracket(2.0);
        assert!(1.5 <= z.lo && z.hi <= 1.75);
        assert!(z.contains(std::f64::consts::PI * std::f64::consts::PI / 6.0));
    }

    #[test]
    fn finite_gap_ordering() {
        let r = zipf_bounds(1.0, 1000, Mode::FiniteN).unwrap();
        assert!(r.gap_lb() >= r.gap_ub(), "{} vs {}", r.gap_lb(), r.gap_ub());
        assert!(r.gap_ub() > 0.0);
        assert!(r.lb <= r.ub);
    }
}
