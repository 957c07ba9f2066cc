//! Uniform distributions: the three-regime corollary bounds and the tighter
//! middle-regime bound whose repetition code carries a tunable parameter
//! `alpha`.

use super::{Aux, ClosedFormResult, LbTerms, Mode, UbTerms};
use crate::distributions::DistributionModel;
use crate::numerics::{h2, log_factorial, EntropyInterval, LOG2_E};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UniformKind {
    FixedK(u64),
    Rate(f64),
}

/// Search range of the repetition-code parameter; the smaller lambda is, the
/// larger the optimum, and 20 comfortably covers lambda down to ~0.05.
const ALPHA_LO: f64 = 1.0 + 1e-6;
const ALPHA_HI: f64 = 20.0;
const ALPHA_STEP: f64 = 1e-3;

pub fn uniform_bounds(kind: UniformKind, n: u64, _mode: Mode) -> Result<ClosedFormResult> {
    let (k, lambda) = match kind {
        UniformKind::FixedK(k) => {
            if k == 0 {
                return Err(Error::InvalidDistribution("k must be >= 1".into()));
            }
            (k, n as f64 / k as f64)
        }
        UniformKind::Rate(lambda) => {
            let d = DistributionModel::uniform_rate(lambda, n)?;
            (d.support_size().unwrap(), lambda)
        }
    };
    let nf = n as f64;
    let kf = k as f64;
    let hx = EntropyInterval::point(kf.log2());
    let nh = nf * kf.log2();

    if k == 1 {
        return Ok(ClosedFormResult {
            n,
            lb: 0.0,
            ub: 0.0,
            asymptotic_lb: 0.0,
            asymptotic_ub: 0.0,
            rigorous: true,
            regime: "large-prob".into(),
            iid_entropy: EntropyInterval::point(0.0),
            lb_terms: None,
            ub_terms: None,
            aux: Aux::default(),
        });
    }

    // occupancy bracket pieces (exp_m1 keeps precision for tiny lambda)
    let miss_lo = (-lambda - lambda * lambda / nf).exp(); // e^{-lam-lam^2/n}
    let l1_lo = kf * (-f64::exp_m1(-lambda)); // k (1 - e^-lam)

    // ---- lower-bound candidates ----
    let mut lb_candidates: Vec<(f64, &str)> = Vec::new();
    // data-processing baseline: n log k - log (k!/(k-n)!)
    let perm = if kf > nf {
        log_factorial(kf)?.hi - log_factorial(kf - nf)?.lo
    } else {
        log_factorial(kf)?.hi
    };
    lb_candidates.push((nh - perm, "large-prob"));
    // middle/small: all symbols packed (phi01 = 1), re-occurrence cost plus
    // the worst-case first-occurrence penalty
    let mut mid_terms = None;
    if lambda < nf {
        let s2 = (nf / lambda) * (lambda + f64::exp_m1(-lambda - lambda * lambda / nf))
            * (nf / lambda).log2();
        let s3 = LOG2_E * (lambda / nf) * (l1_lo * l1_lo - l1_lo).max(0.0) / 2.0;
        lb_candidates.push((s2 + s3, "middle"));
        mid_terms = Some(LbTerms {
            eps: 0.0,
            eps0: 0.0,
            s1: 0.0,
            s2,
            s3,
            s4: 0.0,
        });
    }
    // occupancy-code bound: n log(n/lambda) + log [k e^{-lam-lam^2/n}]! - log k!
    if (kf * miss_lo) >= 0.0 {
        let lb3 = nf * kf.log2() + log_factorial(kf * miss_lo)?.lo - log_factorial(kf)?.hi;
        lb_candidates.push((lb3, "middle-code"));
    }
    let (lb, lb_regime) = lb_candidates
        .iter()
        .cloned()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();

    // ---- upper-bound candidates ----
    let mut ub_candidates: Vec<(f64, &str)> = vec![(nh, "trivial")];
    // large-prob: first-occurrence gain of the single populated bin
    if kf <= nf / 2.0 {
        let u = (1.0 - (kf * (-nf / kf).exp()).min(1.0)).max(0.0) * log_factorial(kf)?.lo;
        ub_candidates.push((nh - u, "large-prob"));
    }
    // corollary middle form (bin-1 packing loss at the low occupancy endpoint)
    if lambda <= 1.0 || kf >= 1.5 * nf.sqrt() {
        let cap = kf.min(nf).log2();
        let ub_mid = (nf - l1_lo) * cap + nf * h2((l1_lo / nf).clamp(0.0, 1.0));
        ub_candidates.push((ub_mid, "middle"));
    }
    // quadratic packing loss when every symbol sits at or below 1/n
    if lambda <= 1.0 {
        let sq = kf * (lambda / nf).powi(2); // sum theta^2 = lambda/n
        let val = nf * nf / 2.0 * sq
            * (2.0 * std::f64::consts::E * 1.0 * kf.min(nf) / (nf * sq)).log2();
        ub_candidates.push((val, "small-prob"));
    }
    // repetition-code bound with optimized alpha
    let lambda_p = lambda.max(1.0);
    let kp = nf / lambda_p;
    let mut best_alpha = None;
    {
        let mut alpha = ALPHA_LO;
        let mut best = f64::INFINITY;
        while alpha <= ALPHA_HI {
            let m = kp * (alpha - 1.0);
            let v = nf * (alpha * nf / lambda_p).log2() - log_factorial(m + l1_lo)?.lo
                + log_factorial(m)?.hi;
            if v < best {
                best = v;
                best_alpha = Some(alpha);
            }
            alpha += ALPHA_STEP;
        }
        if best.is_finite() {
            ub_candidates.push((best, "middle-code"));
        }
    }
    let (ub, ub_regime) = ub_candidates
        .iter()
        .cloned()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();

    // ---- asymptotic forms ----
    // middle-regime pair (valid for any fixed lambda) plus the corollary
    // alternative; the reported pair switches to the small-probability form
    // when the alphabet outgrows the block
    let frac = -f64::exp_m1(-lambda) / lambda; // (1-e^-lam)/lam
    let lead = (1.0 - frac) * nf * (nf / lambda).log2();
    let mid_lb = lead + ((lambda.exp() - lambda - 1.0) * LOG2_E / (lambda * lambda.exp())) * nf;
    let lead_ub = (1.0 - frac) * nf * (nf / lambda_p).log2();
    let mut mid_ub = f64::INFINITY;
    {
        let mut alpha = ALPHA_LO;
        while alpha <= ALPHA_HI {
            let brace = alpha.log2()
                + (alpha - 1.0) / lambda_p * (alpha - 1.0).log2()
                - ((alpha - 1.0) / lambda_p + frac)
                    * ((alpha - 1.0) + lambda_p / lambda * -f64::exp_m1(-lambda)).log2();
            let v = lead_ub + frac * LOG2_E * nf + brace * nf;
            mid_ub = mid_ub.min(v);
            alpha += ALPHA_STEP;
        }
    }
    let cor1_lb = lead + LOG2_E / 2.0 * (-f64::exp_m1(-lambda)).powi(2) / lambda * nf;
    let cor1_ub = lead_ub + nf * h2(frac.clamp(0.0, 1.0));
    let (asym_lb, asym_ub) = if kf > nf {
        (
            lambda * nf / 2.0 * (std::f64::consts::E * kf).log2(),
            lambda * nf / 2.0 * (2.0 * std::f64::consts::E * kf).log2(),
        )
    } else {
        (mid_lb, mid_ub)
    };
    let alt = Some((cor1_lb, cor1_ub));

    let regime = if kf >= nf {
        "small-prob"
    } else if lb_regime == "large-prob" && ub_regime == "large-prob" {
        "large-prob"
    } else {
        "middle"
    };
    Ok(ClosedFormResult {
        n,
        lb,
        ub,
        asymptotic_lb: asym_lb,
        asymptotic_ub: asym_ub,
        rigorous: true,
        regime: regime.into(),
        iid_entropy: hx,
        lb_terms: mid_terms,
        ub_terms: Some(UbTerms::default()),
        aux: Aux {
            alpha: best_alpha,
            alt_asymptotic: alt,
            mid_asymptotic: Some((mid_lb, mid_ub)),
            ..Aux::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_uniform_pattern_entropy;

    #[test]
    fn lambda_one_constants() {
        // best alpha ~ 1.93; (bound - (n/e) log n)/n near 0.38 and 0.76
        let n = 100_000_000u64;
        let r = uniform_bounds(UniformKind::Rate(1.0), n, Mode::FiniteN).unwrap();
        let nf = n as f64;
        let lead = nf / std::f64::consts::E * nf.log2();
        let alpha = r.aux.alpha.unwrap();
        assert!((1.8..=2.1).contains(&alpha), "alpha = {alpha}");
        let c_lb = (r.lb - lead) / nf;
        let c_ub = (r.ub - lead) / nf;
        assert!((c_lb - 0.38).abs() <= 0.03, "c_lb = {c_lb}");
        assert!((c_ub - 0.76).abs() <= 0.03, "c_ub = {c_ub}");
        // corollary variant: 0.29 / 0.95
        let (cor_lb, cor_ub) = r.aux.alt_asymptotic.unwrap();
        let a_lb = (cor_lb - lead) / nf;
        let a_ub = (cor_ub - lead) / nf;
        assert!((a_lb - 0.29).abs() <= 0.02, "cor lb const = {a_lb}");
        assert!((a_ub - 0.95).abs() <= 0.02, "cor ub const = {a_ub}");
    }

    #[test]
    fn single_symbol() {
        let r = uniform_bounds(UniformKind::FixedK(1), 100, Mode::FiniteN).unwrap();
        assert_eq!((r.lb, r.ub), (0.0, 0.0));
    }

    #[test]
    fn sandwich_middle_regime() {
        // k = 50, n = 100 (lambda = 2): exact value within [LB, UB]
        let exact = exact_uniform_pattern_entropy(50, 100).unwrap();
        let r = uniform_bounds(UniformKind::FixedK(50), 100, Mode::FiniteN).unwrap();
        assert!(
            r.lb <= exact + 1e-9 && exact <= r.ub + 1e-9,
            "lb {} exact {exact} ub {}",
            r.lb,
            r.ub
        );
    }

    #[test]
    fn theorem3_tighter_than_corollary() {
        for lambda in [0.5, 1.0, 2.0] {
            let r = uniform_bounds(UniformKind::Rate(lambda), 1000, Mode::FiniteN).unwrap();
            let (cor_lb, cor_ub) = r.aux.alt_asymptotic.unwrap();
            let (mid_lb, mid_ub) = r.aux.mid_asymptotic.unwrap();
            assert!(mid_lb >= cor_lb - 1e-9, "lambda={lambda}: {mid_lb} < {cor_lb}");
            assert!(mid_ub <= cor_ub + 1e-9, "lambda={lambda}: {mid_ub} > {cor_ub}");
        }
    }

    #[test]
    fn sandwich_small_k() {
        for k in [2u64, 3, 5, 10, 25, 50] {
            let exact = exact_uniform_pattern_entropy(k, 100).unwrap();
            let r = uniform_bounds(UniformKind::FixedK(k), 100, Mode::FiniteN).unwrap();
            assert!(r.lb <= exact + 1e-9, "k={k}: lb {} vs {exact}", r.lb);
            assert!(r.ub + 1e-9 >= exact, "k={k}: ub {} vs {exact}", r.ub);
        }
    }
}
