//! Linearly increasing distribution `theta_i = 2 (i - 1/2) lambda^2 / n^2`
//! over `k = n/lambda` symbols.

use super::{Aux, ClosedFormResult, Mode};
use crate::distributions::DistributionModel;
use crate::general_bounds::{
    lnln_ratio, optimize_lower, optimize_upper, r_band_upper, ParamSearchSpec,
};
use crate::Result;

/// Regime margin around `n^(2/3)`; parameters inside the margin fall back to
/// the general bounds.
const DELTA: f64 = 0.05;

pub fn linear_bounds(lambda: f64, n: u64, mode: Mode) -> Result<ClosedFormResult> {
    let dist = DistributionModel::linear(lambda, n)?;
    let hx = dist.iid_entropy();
    let nf = n as f64;
    let e = std::f64::consts::E;
    let c_lambda = ((1.0 - 2.0 * lambda / 3.0) * 2.0 / 3.0, 2.0 / 3.0);

    let (regime, asym_lb, asym_ub): (&str, f64, f64) = if lambda >= nf.powf(2.0 / 3.0 + DELTA) {
        ("1", nf * hx.lo, nf * hx.hi)
    } else if lambda >= nf.powf(DELTA) / 2.0 && lambda <= nf.powf(2.0 / 3.0 - DELTA) {
        let gap = nf / lambda * (nf / lambda.powf(1.5)).log2();
        ("2", nf * hx.lo - gap, nf * hx.hi)
    } else if lambda <= 0.5 {
        let lead = lambda * nf * (nf / lambda).log2();
        ("3", c_lambda.0 * lead, c_lambda.1 * lead)
    } else {
        ("boundary", f64::NAN, f64::NAN)
    };

    if mode == Mode::Asymptotic && regime != "boundary" {
        return Ok(ClosedFormResult {
            n,
            lb: asym_lb,
            ub: asym_ub,
            asymptotic_lb: asym_lb,
            asymptotic_ub: asym_ub,
            rigorous: false,
            regime: regime.into(),
            iid_entropy: hx,
            lb_terms: None,
            ub_terms: None,
            aux: Aux {
                c_lambda: Some(c_lambda),
                ..Aux::default()
            },
        });
    }

    let eps = lnln_ratio(n).min(DELTA / 4.0).max(1e-3);
    let (lb, ub, rigorous) = match regime {
        "1" => {
            // at most one symbol per bin: only the first-occurrence
            // indistinguishability term survives, computed via the general
            // machinery at a small eps
            let mut search = ParamSearchSpec::default_for(&dist, n);
            search.eps_coeffs = vec![0.25, 0.5, 1.0, 2.0];
            search.eps0_values = vec![0.0];
            let lb = optimize_lower(&dist, n, &search)?;
            (lb.lb, nf * hx.hi, true)
        }
        "2" => {
            // first occurrences of large-probability symbols dominate
            let gap_lb =
                nf / lambda * (3.0 * 2f64.sqrt() * nf.powf(1.0 + eps / 2.0)
                    / (lambda.powf(1.5) * e.powf(1.5)))
                .log2();
            let lb = nf * hx.lo - gap_lb;
            let eps2 = eps;
            let u = (nf / lambda
                * (2f64.sqrt() * nf.powf(1.0 - eps2 / 2.0) / (lambda.powf(1.5) * e.powf(1.5)))
                    .log2())
            .max(0.0);
            let eta2 = 1.0 / nf; // eps1 = 0
            let (r01, _) = r_band_upper(&dist, n, 0.0, eta2, true, 0.0);
            let ub = (nf * hx.hi - u + r01).min(nf * hx.hi);
            (lb, ub, false)
        }
        "3" => {
            // quadratic re-occurrence term and merged packing loss
            let lb = c_lambda.0 * lambda * nf * (e.powf(1.0 / 3.0) * nf / (2.0 * lambda)).log2();
            let ub = (2.0 / 3.0) * lambda * nf * (3.0 * e * nf / (2.0 * lambda)).log2();
            (lb.max(0.0), ub.min(nf * hx.hi), false)
        }
        _ => {
            // boundary: evaluate the general bounds directly
            let search = ParamSearchSpec::default_for(&dist, n);
            let lb = optimize_lower(&dist, n, &search)?;
            let ub = optimize_upper(&dist, n, &search)?;
            (lb.lb, ub.ub, true)
        }
    };

    let (asym_lb, asym_ub) = if regime == "boundary" {
        (lb, ub)
    } else {
        (asym_lb, asym_ub)
    };
    Ok(ClosedFormResult {
        n,
        lb,
        ub,
        asymptotic_lb: asym_lb,
        asymptotic_ub: asym_ub,
        rigorous,
        regime: regime.into(),
        iid_entropy: hx,
        lb_terms: None,
        ub_terms: None,
        aux: Aux {
            c_lambda: Some(c_lambda),
            ..Aux::default()
        },
    })
}
