//! General finite-n lower and upper bounds on the pattern block entropy,
//! assembled term by term with variant selection.
//!
//! The lower bound packs all probabilities at or below `1/n^(1-eps)` into a
//! single point mass and corrects with four terms: `S1` (first-occurrence
//! indistinguishability inside xi-grid bins), `S2` (re-occurrence cost of
//! small-probability symbols), `S3` (first-occurrence penalty beyond a single
//! point mass), and `S4` (separation between small and large probabilities).
//! The upper bound packs the low probabilities into one or two point masses
//! and corrects with `U` (first-occurrence gain in large-probability bins)
//! and `R'` terms (packing losses).
//!
//! Every term is evaluated at the interval endpoint that keeps the assembled
//! inequality valid: the lower bound consumes pessimistic endpoints, the
//! upper bound optimistic ones.

use crate::distributions::DistributionModel;
use crate::grids::{bin_stats, build_eta_grid, build_xi_grid, GridRef};
use crate::numerics::{
    h2, h2_max_over, log_binomial, log_factorial, neg_xlogx_interval, EntropyInterval, StableSum,
    LOG2_E,
};
use crate::{Error, Result};

const ENUM_CAP: u64 = 4_000_000;

/// Default separation constants: `f(e^-5.5, e^1.4) > 0.5`.
pub const THETA_DEFAULT: (f64, f64) = (0.004_086_771_438_464_067, 4.055_199_966_844_675);
/// Preset used by the Zipf recipes: `f(e^-1.97, e^0.98) > 0.2`.
pub const THETA_ZIPF: (f64, f64) = (0.139_206_505_827_862_4, 2.664_456_241_929_417);

/// `f(theta-, theta+) = min over both constants of
/// ((t-1)/ln t) ln((t-1)/(e ln t)) + 1`.
pub fn f_separation(theta_minus: f64, theta_plus: f64) -> f64 {
    let side = |t: f64| -> f64 {
        let r = (t - 1.0) / t.ln();
        r * (r / std::f64::consts::E).ln() + 1.0
    };
    side(theta_minus).min(side(theta_plus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S1Variant {
    /// `log (k - k01)!`
    B0,
    /// kappa-based with the `(k - k01) log 3` surcharge
    B1,
    /// overlapping kappa'-based
    B2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S2Variant {
    /// exact expectation form (explicit finite distributions only)
    ExactMean,
    /// per-symbol `n theta - 1 + e^{-n(theta+theta^2)}` form
    B1,
    /// bin-0 quadratic form plus the bin-1 per-symbol form
    B2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S4Variant {
    /// `n h2(phi01)`
    EntropyCap,
    /// binomial separation form with `eps'_n`
    Binomial,
}

/// Theorem-style lower bound, fully decomposed.
#[derive(Debug, Clone)]
pub struct LowerBoundBreakdown {
    pub n: u64,
    pub eps: f64,
    pub eps0: f64,
    pub theta_minus: f64,
    pub theta_plus: f64,
    /// Packed per-symbol entropy `H^(01)(X)` in bits.
    pub h01: EntropyInterval,
    pub s1: f64,
    pub s1_variant: S1Variant,
    pub s2: f64,
    pub s2_variant: S2Variant,
    pub s3: f64,
    pub s4: f64,
    pub s4_variant: S4Variant,
    pub eps_n: f64,
    pub eps_prime_n: f64,
    pub f_value: f64,
    /// All computed variant values (diagnostics; the reported terms are the
    /// min/max over these).
    pub s1_candidates: Vec<(S1Variant, f64)>,
    pub s2_candidates: Vec<(S2Variant, f64)>,
    pub s4_candidates: Vec<(S4Variant, f64)>,
    /// `LB = n h01.lo - s1 + s2 + s3 - s4`.
    pub lb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Packing {
    /// two separate low-probability point masses (`H^(0,1)`, `R'_0 + R'_1`)
    SeparateBins,
    /// one merged point mass (`H^(01)`, `R'_01`)
    MergedBin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RVariant {
    /// occupancy form `(n phi - L) log min(k, n) + n phi h2(L/(n phi))`
    Rb,
    /// quadratic form `(n^2/2 sum theta^2) log(2e phi min(k,n)/(n sum theta^2))`
    R0,
}

/// Theorem-style upper bound, fully decomposed.
#[derive(Debug, Clone)]
pub struct UpperBoundBreakdown {
    pub n: u64,
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub packing: Packing,
    /// Packed per-symbol entropy (`H^(0,1)` or `H^(01)`).
    pub h_packed: EntropyInterval,
    pub u: f64,
    /// `(bin label, value, variant)`: bins "0"/"1" for separate packing,
    /// "01" for merged.
    pub r_terms: Vec<(&'static str, f64, RVariant)>,
    /// `UB = n h_packed.hi - u + sum r`.
    pub ub: f64,
}

impl UpperBoundBreakdown {
    pub fn r_total(&self) -> f64 {
        self.r_terms.iter().map(|(_, v, _)| v).sum()
    }
    pub fn r_named(&self, name: &str) -> Option<f64> {
        self.r_terms
            .iter()
            .find(|(label, _, _)| *label == name)
            .map(|(_, v, _)| *v)
    }
}

/// Maximum of `(1-e)a + e*b + h2(min(e, 1/2))` over `e` in `[e_lo, e_hi]`.
/// Linear part maximized at an endpoint; the entropy part is bounded by its
/// maximum over the interval.
fn eps_mix_max(a: f64, b: f64, e_lo: f64, e_hi: f64) -> f64 {
    let lin = |e: f64| (1.0 - e) * a + e * b;
    let cap = |e: f64| e.min(0.5);
    lin(e_lo).max(lin(e_hi)) + h2_max_over(cap(e_lo), cap(e_hi))
}

/// Theorem-1-style lower bound at fixed parameters.
///
/// `eps > 0` places the packing boundary at `1/n^(1-eps)`; `eps0 >= 0` sets
/// the inner split used by the quadratic `S2` variant; `theta_minus < 1 <
/// theta_plus` control the separation term `S4`.
pub fn lower_bound_general(
    dist: &DistributionModel,
    n: u64,
    eps: f64,
    eps0: f64,
    theta_minus: f64,
    theta_plus: f64,
) -> Result<LowerBoundBreakdown> {
    if !(eps > 0.0) || !(eps0 >= 0.0) {
        return Err(Error::Infeasible(format!(
            "lower bound needs eps > 0 (got {eps}) and eps0 >= 0 (got {eps0})"
        )));
    }
    if !(theta_plus > 1.0 && theta_minus < 1.0 && theta_minus > 0.0) {
        return Err(Error::Infeasible(
            "need theta_plus > 1 > theta_minus > 0".into(),
        ));
    }
    let nf = n as f64;
    let xi = build_xi_grid(n, eps)?;
    let xi1 = xi.point(1);
    if !(xi1 < 1.0) {
        return Err(Error::Infeasible(format!("xi_1 = {xi1} >= 1 (eps too large)")));
    }
    let t0 = nf.powf(-(1.0 + eps0));

    let small = dist.range_stats(0.0, xi1);
    let phi01 = small.mass.clamp(0.0, 1.0);
    let k01 = small.count;
    let big = dist.range_stats(xi1, 1.0);
    let k_big = big.count;
    if !k_big.hi.is_finite() {
        return Err(Error::Infeasible(
            "infinite count above the packing boundary".into(),
        ));
    }

    // H^(01): merged point mass plus the high-probability head
    let h01 = neg_xlogx_interval(&phi01).add(&big.neg_entropy_mass);
    if !h01.lo.is_finite() {
        return Err(Error::Infeasible("H01".into()));
    }

    // eps_n = min(n (k - k01) e^{-0.1 n^eps}, 1), as an interval via k_big
    let decay = (-0.1 * nf.powf(eps)).exp();
    let eps_n_lo = (nf * k_big.lo * decay).min(1.0);
    let eps_n_hi = (nf * k_big.hi * decay).min(1.0);

    // ---- S1 (upper-directed, min over variants) ----
    let s1_b0 = log_factorial(k_big.hi)?.hi;
    let xistats = bin_stats(dist, GridRef::Xi(&xi), n)?;
    let mut kappa_sum = 0.0f64; // sum over b = 1..A of log kappa_b!
    let mut kappa_prime_sum = 0.0f64;
    for pb in &xistats.bins {
        if pb.bin == 0 || pb.bin > xi.a_max {
            continue;
        }
        kappa_sum += log_factorial(pb.count.hi)?.hi;
        if let Some(kp) = pb.overlap_count {
            kappa_prime_sum += log_factorial(kp.hi)?.hi;
        }
    }
    let s1_b1 = eps_mix_max(
        kappa_sum + k_big.hi * 3f64.log2(),
        s1_b0,
        eps_n_lo,
        eps_n_hi,
    );
    let s1_b2 = eps_mix_max(kappa_prime_sum, s1_b0, eps_n_lo, eps_n_hi);
    let s1_candidates = vec![
        (S1Variant::B0, s1_b0),
        (S1Variant::B1, s1_b1),
        (S1Variant::B2, s1_b2),
    ];
    let (s1_variant, s1) = s1_candidates
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();

    // ---- S2 (lower-directed, max over variants) ----
    let mut s2_candidates: Vec<(S2Variant, f64)> = Vec::new();
    // lower bound on sum theta^2 log2(phi01/theta) over a band
    let quad_w_lower = |a: f64, b: f64| -> f64 {
        let sq = dist.range_stats(a, b).sq_mass;
        let sqlog = dist.band_sq_log_inv(a, b);
        (phi01.lo.max(f64::MIN_POSITIVE).log2() * sq.hi + sqlog.lo).max(0.0)
    };
    // per-symbol sum of (n theta - 1 + e^{-n(theta+theta^2)}) log2(phi01/theta):
    // exact head over symbols with n theta >= 0.01, then tiered quadratic
    // minorants (n theta - 1 + e^{-n(theta+theta^2)} >= (n theta)^2/2 *
    // (1 - 2/n - 8 n theta / 3)) whose band sums have closed tails
    let s2_sum_lower = |a: f64, b: f64, exact_mean: bool| -> f64 {
        let mut acc = StableSum::new();
        let mut stop_theta: Option<f64> = None;
        let descending = dist.support_size().is_none();
        let outcome = dist.for_each_in_band(a, b, ENUM_CAP, |_j, th| {
            if descending && nf * th.hi < 0.01 {
                stop_theta = Some(th.hi);
                return false;
            }
            let g = if exact_mean {
                nf * th.lo + f64::exp_m1(nf * f64::ln_1p(-th.lo))
            } else {
                nf * th.lo + f64::exp_m1(-nf * th.lo * (1.0 + th.lo))
            };
            let l = (phi01.lo / th.hi).log2().max(0.0);
            acc.add(g.max(0.0) * l);
            true
        });
        // remaining low-probability stretch (a, cut]: a single quadratic
        // minorant with the worst in-stretch factor (the loop stops at
        // n theta < 0.01, so the factor costs at most ~2.7%)
        let cut = match (stop_theta, outcome) {
            (Some(t), _) => t,
            (None, crate::distributions::BandLoop::Truncated { next_index })
            | (None, crate::distributions::BandLoop::Infinite { next_index }) => {
                dist.pmf(next_index).map(|iv| iv.hi).unwrap_or(a)
            }
            _ => a,
        };
        if cut > a {
            let factor = 1.0 - 2.0 / nf - 8.0 * nf * cut / 3.0;
            if factor > 0.0 {
                acc.add(factor * (nf * nf / 2.0) * quad_w_lower(a, cut));
            }
        }
        acc.value().max(0.0)
    };
    let s2_b1 = s2_sum_lower(0.0, xi1, false);
    s2_candidates.push((S2Variant::B1, s2_b1));
    // quadratic bin-0 variant
    let coef = 1.0 - 1.0 / (3.0 * nf.powf(eps0)) - 2.0 / nf;
    if coef > 0.0 && t0 < xi1 {
        let s2_b2 = coef * (nf * nf / 2.0) * quad_w_lower(0.0, t0) + s2_sum_lower(t0, xi1, false);
        s2_candidates.push((S2Variant::B2, s2_b2));
    }
    if matches!(dist.family(), crate::distributions::Family::Explicit { .. }) {
        s2_candidates.push((S2Variant::ExactMean, s2_sum_lower(0.0, xi1, true)));
    }
    let (s2_variant, s2) = s2_candidates
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();

    // ---- S3 (lower-directed) ----
    let l01 = dist.expected_distinct(0.0, xi1, n);
    let s3 = {
        let m = (l01.lo.floor() - 1.0).max(0.0) as usize;
        if m == 0 || phi01.hi <= 0.0 || k01.hi <= 0.0 {
            0.0
        } else {
            match dist.smallest_in_band_ascending(xi1, m) {
                None => 0.0, // infinite tails: the m smallest are arbitrarily small
                Some(thetas) => {
                    let mut acc = 0.0;
                    for (i, th) in thetas.iter().enumerate() {
                        acc += (l01.lo - (i as f64 + 1.0)) * th;
                    }
                    LOG2_E * (acc / phi01.hi).max(0.0)
                }
            }
        }
    };

    // ---- S4 (upper-directed, min over variants) ----
    let f_value = f_separation(theta_minus, theta_plus);
    let k_minus = dist.band_count(theta_minus * xi1, xi1);
    let k_plus = dist.band_count(xi1, (theta_plus * xi1).min(1.0));
    let k_n3 = dist.band_count(nf.powi(-3), 1.0);
    let eps_prime_n = nf * k_n3.hi * (-f_value * nf.powf(eps)).exp()
        + theta_minus.ln() / (2.0 * (theta_minus - 1.0) * nf.powf(1.0 + eps));
    let s4_cap = nf * h2_max_over(phi01.lo, phi01.hi);
    let mut s4_candidates = vec![(S4Variant::EntropyCap, s4_cap)];
    if eps_prime_n < 1.0 && k_minus.hi.is_finite() && k_plus.hi.is_finite() {
        let binom = log_binomial(k_minus.hi + k_plus.hi, k_plus.hi)?.hi;
        let s4_binom =
            (1.0 - eps_prime_n) * binom + eps_prime_n * nf + h2(eps_prime_n.min(0.5));
        s4_candidates.push((S4Variant::Binomial, s4_binom));
    }
    let (s4_variant, s4) = s4_candidates
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();

    let lb = nf * h01.lo - s1 + s2 + s3 - s4;
    if !lb.is_finite() {
        return Err(Error::Infeasible(
            "assembled lower bound is not finite".into(),
        ));
    }
    Ok(LowerBoundBreakdown {
        n,
        eps,
        eps0,
        theta_minus,
        theta_plus,
        h01,
        s1,
        s1_variant,
        s2,
        s2_variant,
        s3,
        s4,
        s4_variant,
        eps_n: eps_n_hi,
        eps_prime_n,
        f_value,
        s1_candidates,
        s2_candidates,
        s4_candidates,
        lb,
    })
}

/// Theorem-2-style upper bound at fixed eta-grid parameters.
pub fn upper_bound_general(
    dist: &DistributionModel,
    n: u64,
    eps0: f64,
    eps1: f64,
    eps2: f64,
    packing: Packing,
) -> Result<UpperBoundBreakdown> {
    let nf = n as f64;
    let eta = build_eta_grid(n, eps0, eps1, eps2)?;
    let eps = -eps1;
    let stats = bin_stats(dist, GridRef::Eta(&eta), n)?;
    let eta1 = eta.point(1);
    let eta2 = eta.point(2);

    let head_entropy = dist.range_stats(eta2, 1.0).neg_entropy_mass;
    let h_packed = match packing {
        Packing::SeparateBins => neg_xlogx_interval(&stats.phi0)
            .add(&neg_xlogx_interval(&stats.phi1))
            .add(&head_entropy),
        Packing::MergedBin => neg_xlogx_interval(&stats.phi01).add(&head_entropy),
    };
    if !h_packed.hi.is_finite() {
        return Err(Error::Infeasible("packed entropy".into()));
    }

    // ---- U ----
    let mut gain = 0.0f64;
    let mut quant = 0.0f64;
    for pb in &stats.bins {
        let b = pb.bin;
        if b < 2 {
            continue;
        }
        if pb.count.hi > 1.0 {
            quant +=
                (2.0 + 1.0 / eta.b_prime(b)).powi(2) * LOG2_E * pb.count.hi / nf.powf(eps2);
        }
        if b > eta.a_max {
            continue;
        }
        let l_lo = pb.expected_distinct.lo;
        let occupancy_term = if l_lo > 0.0 {
            (l_lo * (l_lo / std::f64::consts::E).log2()).max(0.0)
        } else {
            0.0
        };
        // evaluate the factorial branch at every plausible integer count and
        // keep the smallest (counts are almost always exact)
        let mut fact_term = f64::INFINITY;
        let k_lo = pb.count.lo.max(0.0);
        let k_hi = pb.count.hi;
        if (k_hi - k_lo) <= 4.0 {
            let mut k = k_lo;
            loop {
                let lf = log_factorial(k)?.lo;
                let miss = (k * (-nf * eta.point(b)).exp()).min(1.0);
                fact_term = fact_term.min(((1.0 - miss) * lf).max(0.0));
                if k >= k_hi {
                    break;
                }
                k += 1.0;
            }
        } else {
            fact_term = 0.0;
        }
        gain += occupancy_term.max(fact_term).max(0.0);
    }
    let u = (gain - quant).max(0.0);

    // ---- R' terms ----
    let r_terms = match packing {
        Packing::SeparateBins => {
            let (r0, v0) = r_band_upper(dist, n, 0.0, eta1, true, eps);
            let (r1, v1) = r_band_upper(dist, n, eta1, eta2, eps <= 0.0, eps);
            vec![("0", r0, v0), ("1", r1, v1)]
        }
        Packing::MergedBin => {
            let (r01, v01) = r_band_upper(dist, n, 0.0, eta2, eps <= 0.0, eps);
            vec![("01", r01, v01)]
        }
    };

    let mut ub = nf * h_packed.hi - u + r_terms.iter().map(|(_, v, _)| v).sum::<f64>();
    // the data-processing cap H(Psi^n) <= n H(X) always applies
    let hx = dist.iid_entropy();
    if hx.hi.is_finite() {
        ub = ub.min(nf * hx.hi);
    }
    if !ub.is_finite() {
        return Err(Error::Infeasible(
            "assembled upper bound is not finite".into(),
        ));
    }
    Ok(UpperBoundBreakdown {
        n,
        eps0,
        eps1,
        eps2,
        packing,
        h_packed,
        u,
        r_terms,
        ub,
    })
}

/// Packing-loss bound for one low-probability band: the smaller of the
/// occupancy form and (where its applicability condition holds) the
/// quadratic form, never negative.
pub(crate) fn r_band_upper(
    dist: &DistributionModel,
    n: u64,
    lo: f64,
    hi: f64,
    allow_r0: bool,
    eps: f64,
) -> (f64, RVariant) {
    let nf = n as f64;
    let band = dist.range_stats(lo, hi);
    if band.count.hi <= 0.0 || band.mass.hi <= 0.0 {
        return (0.0, RVariant::Rb);
    }
    let l = dist.expected_distinct(lo, hi, n);
    let phi = band.mass;
    let kcap = band.count.hi.min(nf);
    let log_kcap = kcap.max(1.0).log2();
    // the occupancy form decreases in L for bin 0 and, when eps <= 0 or the
    // count is large enough, for bins 1/01; else maximize both pieces
    let monotone_ok = lo == 0.0 || eps <= 0.0 || band.count.lo >= 1.5 * nf.powf(0.5);
    let rb = if monotone_ok {
        let ratio = (l.lo / (nf * phi.hi)).clamp(0.0, 1.0);
        (nf * phi.hi - l.lo).max(0.0) * log_kcap + nf * phi.hi * h2(ratio)
    } else {
        let r_lo = (l.lo / (nf * phi.hi)).clamp(0.0, 1.0);
        let r_hi = (l.hi / (nf * phi.lo.max(f64::MIN_POSITIVE))).clamp(0.0, 1.0);
        (nf * phi.hi - l.lo).max(0.0) * log_kcap + nf * phi.hi * h2_max_over(r_lo, r_hi)
    };
    let mut best = (rb, RVariant::Rb);
    if allow_r0 && band.sq_mass.lo > 0.0 {
        let a_hi = nf * nf / 2.0 * band.sq_mass.hi;
        let a_lo = nf * nf / 2.0 * band.sq_mass.lo;
        let log_max = (2.0 * std::f64::consts::E * phi.hi * kcap / (nf * band.sq_mass.lo)).log2();
        let r0 = if log_max >= 0.0 {
            a_hi * log_max
        } else {
            a_lo * log_max
        };
        if r0 < best.0 {
            best = (r0, RVariant::R0);
        }
    }
    (best.0.max(0.0), best.1)
}

/// Search grid for the bound optimizers; every epsilon list is explicit so
/// sweeps stay deterministic.
#[derive(Debug, Clone)]
pub struct ParamSearchSpec {
    /// Lower bound: `eps = c (ln ln n)/(ln n)` for each coefficient.
    pub eps_coeffs: Vec<f64>,
    /// Lower bound: absolute `eps0` values.
    pub eps0_values: Vec<f64>,
    /// Upper bound: absolute `eps1` values (>= 0 tightens bin 0).
    pub eps1_values: Vec<f64>,
    /// Upper bound: `eps2 = c (ln ln n)/(ln n)` coefficients.
    pub eps2_coeffs: Vec<f64>,
    /// Upper bound: `eps0` values.
    pub ub_eps0_values: Vec<f64>,
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub packings: Vec<Packing>,
}

/// `(ln ln n)/(ln n)`, floored to a small positive value for tiny n.
pub fn lnln_ratio(n: u64) -> f64 {
    let l = (n as f64).ln();
    if l <= 1.0 {
        return 0.25;
    }
    let ll = l.ln();
    if ll > 0.0 {
        ll / l
    } else {
        0.25
    }
}

/// `(ln ln ln n)/(ln n)` clamped at zero (upper-bound `eps1` scale).
pub fn lnlnln_ratio(n: u64) -> f64 {
    let l = (n as f64).ln();
    if l <= 1.0 {
        return 0.0;
    }
    let ll = l.ln();
    if ll <= 1.0 {
        return 0.0;
    }
    (ll.ln() / l).max(0.0)
}

fn steps(from: f64, to: f64, step: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = from;
    while x <= to + 1e-12 {
        v.push(x);
        x += step;
    }
    v
}

impl ParamSearchSpec {
    /// Defaults: the lower bound sweeps `c in {0.25, 0.5, ..., 4.0}` and
    /// `eps0 in {0, 0.05, ..., 1.0}`; the upper bound sweeps `eps1` over
    /// multiples of `(ln ln ln n)/(ln n)`, `eps0` constants and `eps2`
    /// coefficients like `eps`. Zipf models get the narrower separation
    /// constants.
    pub fn default_for(dist: &DistributionModel, n: u64) -> Self {
        let (theta_minus, theta_plus) =
            if matches!(dist.family(), crate::distributions::Family::Zipf { .. }) {
                THETA_ZIPF
            } else {
                THETA_DEFAULT
            };
        let l3 = lnlnln_ratio(n);
        let mut eps1 = vec![0.0];
        if l3 > 0.0 {
            eps1.push(l3);
            eps1.push(2.0 * l3);
        }
        ParamSearchSpec {
            eps_coeffs: steps(0.25, 4.0, 0.25),
            eps0_values: steps(0.0, 1.0, 0.05),
            eps1_values: eps1,
            eps2_coeffs: steps(0.25, 4.0, 0.25),
            ub_eps0_values: steps(0.05, 1.0, 0.05),
            theta_minus,
            theta_plus,
            packings: vec![Packing::SeparateBins],
        }
    }

    /// Parse `key=value` / `key=from:to:step` overrides separated by
    /// semicolons or commas, e.g. `eps=0.5:2.5:0.25;eps0=0`.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<()> {
        for item in spec.split(';') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (key, val) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value in '{item}'")))?;
            let parse_list = |v: &str| -> Result<Vec<f64>> {
                let parts: Vec<&str> = v.split(':').collect();
                let num = |s: &str| -> Result<f64> {
                    s.parse()
                        .map_err(|e| Error::InvalidSpec(format!("bad number '{s}': {e}")))
                };
                match parts.len() {
                    1 => Ok(vec![num(parts[0])?]),
                    3 => {
                        let (f, t, s) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
                        if !(s > 0.0) || t < f {
                            return Err(Error::InvalidSpec(format!("bad range '{v}'")));
                        }
                        Ok(steps(f, t, s))
                    }
                    _ => Err(Error::InvalidSpec(format!("expected a:b:step in '{v}'"))),
                }
            };
            match key {
                "eps" => self.eps_coeffs = parse_list(val)?,
                "eps0" => {
                    let l = parse_list(val)?;
                    self.eps0_values = l.clone();
                    self.ub_eps0_values = l;
                }
                "eps1" => self.eps1_values = parse_list(val)?,
                "eps2" => self.eps2_coeffs = parse_list(val)?,
                "theta_minus" => self.theta_minus = parse_list(val)?[0],
                "theta_plus" => self.theta_plus = parse_list(val)?[0],
                _ => {
                    return Err(Error::InvalidSpec(format!("unknown search key '{key}'")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MaximizeLb,
    MinimizeUb,
}

#[derive(Debug, Clone)]
pub enum OptimizedBound {
    Lower(LowerBoundBreakdown),
    Upper(UpperBoundBreakdown),
}

/// Evaluate `eval` over `points` on all available cores and keep the best
/// result under `better` (a strict total preference, so the reduction is
/// deterministic regardless of scheduling).
fn parallel_best<P, T, E, B>(points: Vec<P>, eval: E, better: B) -> Option<T>
where
    P: Send + Sync,
    T: Send,
    E: Fn(&P) -> Option<T> + Sync,
    B: Fn(&T, &T) -> bool + Sync,
{
    let jobs = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(points.len().max(1));
    let pick = |acc: Option<T>, cand: T| -> Option<T> {
        match acc {
            None => Some(cand),
            Some(b) => {
                if better(&cand, &b) {
                    Some(cand)
                } else {
                    Some(b)
                }
            }
        }
    };
    if jobs <= 1 {
        return points.iter().filter_map(&eval).fold(None, pick);
    }
    let chunk = points.len().div_ceil(jobs);
    let locals: Vec<Option<T>> = std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().filter_map(&eval).fold(None, &pick)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    locals.into_iter().flatten().fold(None, pick)
}

/// Maximize the lower bound over the search grid. Ties resolve toward the
/// lexicographically smallest `(eps, eps0)`.
pub fn optimize_lower(
    dist: &DistributionModel,
    n: u64,
    search: &ParamSearchSpec,
) -> Result<LowerBoundBreakdown> {
    let base = lnln_ratio(n);
    let mut eps_list: Vec<f64> = search
        .eps_coeffs
        .iter()
        .map(|c| (c * base).min(0.95))
        .filter(|e| *e > 0.0)
        .collect();
    eps_list.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut points = Vec::new();
    for &eps in &eps_list {
        for &eps0 in &search.eps0_values {
            points.push((eps, eps0));
        }
    }
    let best = parallel_best(
        points,
        |&(eps, eps0)| {
            lower_bound_general(dist, n, eps, eps0, search.theta_minus, search.theta_plus).ok()
        },
        |cand, b| {
            cand.lb > b.lb + 1e-12
                || ((cand.lb - b.lb).abs() <= 1e-12 && (cand.eps, cand.eps0) < (b.eps, b.eps0))
        },
    );
    best.ok_or_else(|| Error::Infeasible("no feasible lower-bound parameter point".into()))
}

/// Minimize the upper bound over the search grid. Ties resolve toward the
/// lexicographically smallest `(eps0, eps1, eps2, packing)`.
pub fn optimize_upper(
    dist: &DistributionModel,
    n: u64,
    search: &ParamSearchSpec,
) -> Result<UpperBoundBreakdown> {
    let base = lnln_ratio(n);
    let mut points = Vec::new();
    for &packing in &search.packings {
        for &eps1 in &search.eps1_values {
            for &eps0 in &search.ub_eps0_values {
                for &c2 in &search.eps2_coeffs {
                    points.push((packing, eps1, eps0, c2 * base));
                }
            }
        }
    }
    let key = |u: &UpperBoundBreakdown| (u.eps0, u.eps1, u.eps2, u.packing);
    let best = parallel_best(
        points,
        |&(packing, eps1, eps0, eps2)| {
            upper_bound_general(dist, n, eps0, eps1, eps2, packing).ok()
        },
        |cand, b| {
            cand.ub < b.ub - 1e-12 || ((cand.ub - b.ub).abs() <= 1e-12 && key(cand) < key(b))
        },
    );
    best.ok_or_else(|| Error::Infeasible("no feasible upper-bound parameter point".into()))
}

/// Evaluate the requested objective over the search grid and return the best
/// valid breakdown.
pub fn optimize_parameters(
    dist: &DistributionModel,
    n: u64,
    objective: Objective,
    search: &ParamSearchSpec,
) -> Result<OptimizedBound> {
    match objective {
        Objective::MaximizeLb => Ok(OptimizedBound::Lower(optimize_lower(dist, n, search)?)),
        Objective::MinimizeUb => Ok(OptimizedBound::Upper(optimize_upper(dist, n, search)?)),
    }
}
