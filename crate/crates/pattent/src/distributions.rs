//! The distribution families under study and their band statistics.
//!
//! Families with interval-valued normalizers (slow-integer, Zipf) carry the
//! normalizer bracket computed from a long exact head sum plus sum-vs-integral
//! tail bounds, so probability masses queried from them come back as tight
//! intervals. Bands are always half-open on the left: a symbol with
//! probability exactly on a boundary belongs to the lower bin.

use crate::numerics::{self, down, h2, up, EntropyInterval, StableSum, LN_2, LOG2_E};
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Exact head terms summed before switching to integral tail brackets.
const HEAD_CAP: u64 = 4_000_000;
/// Relative size at which a head term is considered negligible.
const HEAD_EPS: f64 = 1e-16;
/// Relative head size at which the integral tail bracket (whose width is one
/// term) is tight enough to take over from exact summation.
const TAIL_REL: f64 = 1e-12;
/// Default number of exact terms for normalizing constants.
const NORMALIZER_HEAD: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `theta_i = 1/k` for `i = 1..=k`.
    UniformK { k: u64 },
    /// `theta_i = lambda/n` for `i = 1..=n/lambda`.
    UniformRate { lambda: f64, n: u64, k: u64 },
    /// `theta_j = alpha / (j (log2 j)^(1+gamma))`, `j = 2, 3, ...`.
    SlowInteger { gamma: f64 },
    /// `theta_j = 1 / (zeta(1+gamma) j^(1+gamma))`, `j = 1, 2, ...`.
    Zipf { gamma: f64 },
    /// `theta_j = p (1-p)^(j-1)`, `j = 1, 2, ...`.
    Geometric { p: f64 },
    /// `theta_i = 2 (i - 1/2) lambda^2 / n^2`, increasing, `i = 1..=n/lambda`.
    Linear { lambda: f64, n: u64, k: u64 },
    /// Explicit finite vector, stored sorted nondecreasing.
    Explicit { theta: Vec<f64> },
}

/// A parametric i.i.d. source.
///
/// Models are immutable after construction; the interior band-query cache is
/// a pure memo (same query, same bracket) guarded for concurrent use.
#[derive(Debug)]
pub struct DistributionModel {
    family: Family,
    /// Bracket on the normalizing constant: alpha for slow-integer,
    /// zeta(1+gamma) for Zipf, exactly 1 otherwise.
    normalizer: EntropyInterval,
    entropy: OnceLock<EntropyInterval>,
    cache: Mutex<HashMap<BandKey, BandCached>>,
}

type BandKey = (u8, u64, u64, u64);

#[derive(Clone, Debug)]
enum BandCached {
    Stats(RangeStats),
    Iv(EntropyInterval),
    Exp(Option<(EntropyInterval, EntropyInterval)>),
}

/// Per-band aggregate statistics over a probability band `(lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct RangeStats {
    /// Number of symbols in the band (endpoints integer-valued, `hi` may be
    /// infinite for infinite-support families).
    pub count: EntropyInterval,
    /// Total probability mass.
    pub mass: EntropyInterval,
    /// Sum of squared probabilities.
    pub sq_mass: EntropyInterval,
    /// `sum theta_i log2(1/theta_i)`; may be infinite for slowly decaying
    /// tails with `gamma <= 1`.
    pub neg_entropy_mass: EntropyInterval,
}

impl RangeStats {
    fn zero() -> Self {
        RangeStats {
            count: EntropyInterval::ZERO,
            mass: EntropyInterval::ZERO,
            sq_mass: EntropyInterval::ZERO,
            neg_entropy_mass: EntropyInterval::ZERO,
        }
    }
}

/// Outcome of an exact enumeration over a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandLoop {
    Completed,
    /// Enumeration stopped at this index; the remaining indices were not
    /// visited (their contribution must be bracketed by the caller).
    Truncated { next_index: u64 },
    /// The band has infinitely many symbols beyond the cap.
    Infinite { next_index: u64 },
}

impl DistributionModel {
    pub fn uniform_k(k: u64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidDistribution("uniform needs k >= 1".into()));
        }
        Ok(Self::from_family(Family::UniformK { k }))
    }

    /// `theta_i = lambda/n`; requires `n/lambda` to round to a positive
    /// integer within relative 1e-9.
    pub fn uniform_rate(lambda: f64, n: u64) -> Result<Self> {
        let k = Self::rate_alphabet_size(lambda, n, "uniform")?;
        Ok(Self::from_family(Family::UniformRate { lambda, n, k }))
    }

    pub fn slow_integer(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidDistribution("slow_integer needs gamma > 0".into()));
        }
        Ok(Self::from_family(Family::SlowInteger { gamma }))
    }

    pub fn zipf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidDistribution("zipf needs gamma > 0".into()));
        }
        Ok(Self::from_family(Family::Zipf { gamma }))
    }

    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidDistribution("geometric needs 0 < p < 1".into()));
        }
        Ok(Self::from_family(Family::Geometric { p }))
    }

    pub fn linear(lambda: f64, n: u64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < n as f64) {
            return Err(Error::InvalidDistribution("linear needs 0 < lambda < n".into()));
        }
        let k = Self::rate_alphabet_size(lambda, n, "linear")?;
        Ok(Self::from_family(Family::Linear { lambda, n, k }))
    }

    pub fn explicit(mut theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidDistribution("explicit vector is empty".into()));
        }
        if theta.iter().any(|&t| !(t > 0.0) || t > 1.0) {
            return Err(Error::InvalidDistribution(
                "explicit probabilities must lie in (0, 1]".into(),
            ));
        }
        let mut s = StableSum::new();
        for &t in &theta {
            s.add(t);
        }
        if (s.value() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "explicit probabilities sum to {} (must be 1 within 1e-12)",
                s.value()
            )));
        }
        theta.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self::from_family(Family::Explicit { theta }))
    }

    fn rate_alphabet_size(lambda: f64, n: u64, what: &str) -> Result<u64> {
        if !(lambda > 0.0) || n == 0 {
            return Err(Error::InvalidDistribution(format!(
                "{what} needs lambda > 0 and n >= 1"
            )));
        }
        let ratio = n as f64 / lambda;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-9 * k.max(1.0) {
            return Err(Error::InvalidDistribution(format!(
                "{what}: n/lambda = {ratio} does not round to a positive integer"
            )));
        }
        Ok(k as u64)
    }

    fn from_family(family: Family) -> Self {
        let normalizer = match &family {
            Family::SlowInteger { gamma } => slow_integer_alpha(*gamma),
            Family::Zipf { gamma } => zeta_bracket(1.0 + *gamma),
            _ => EntropyInterval::point(1.0),
        };
        DistributionModel {
            family,
            normalizer,
            entropy: OnceLock::new(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Bracket on the normalizing constant (alpha for slow-integer,
    /// zeta(1+gamma) for Zipf, 1 otherwise).
    pub fn normalizer(&self) -> EntropyInterval {
        self.normalizer
    }

    /// `None` for infinite support.
    pub fn support_size(&self) -> Option<u64> {
        match &self.family {
            Family::UniformK { k } => Some(*k),
            Family::UniformRate { k, .. } | Family::Linear { k, .. } => Some(*k),
            Family::Explicit { theta } => Some(theta.len() as u64),
            _ => None,
        }
    }

    /// First index of the support (2 for the slow-integer family).
    pub fn support_start(&self) -> u64 {
        match &self.family {
            Family::SlowInteger { .. } => 2,
            _ => 1,
        }
    }

    fn is_decreasing_infinite(&self) -> bool {
        matches!(
            self.family,
            Family::SlowInteger { .. } | Family::Zipf { .. } | Family::Geometric { .. }
        )
    }

    /// Probability of symbol `j` as a bracket (degenerate unless the family
    /// has an interval-valued normalizer).
    pub fn pmf(&self, j: u64) -> Result<EntropyInterval> {
        if j < self.support_start() {
            return Err(Error::Domain(format!("index {j} below support start")));
        }
        if let Some(k) = self.support_size() {
            if j > k {
                return Err(Error::Domain(format!("index {j} beyond support size {k}")));
            }
        }
        Ok(self.theta_at(j))
    }

    /// Interval value of `theta_j`; caller must keep `j` in the support.
    fn theta_at(&self, j: u64) -> EntropyInterval {
        match &self.family {
            Family::UniformK { k } => EntropyInterval::point(1.0 / *k as f64),
            Family::UniformRate { lambda, n, .. } => EntropyInterval::point(lambda / *n as f64),
            Family::SlowInteger { gamma } => {
                let g = slow_integer_shape(j as f64, *gamma);
                scale_by(self.normalizer, g)
            }
            Family::Zipf { gamma } => {
                let g = (j as f64).powf(-(1.0 + *gamma));
                // theta = g / zeta
                EntropyInterval {
                    lo: down(g / self.normalizer.hi),
                    hi: up(g / self.normalizer.lo),
                }
            }
            Family::Geometric { p } => EntropyInterval::point(geometric_theta(*p, j)),
            Family::Linear { lambda, n, .. } => {
                EntropyInterval::point(2.0 * (j as f64 - 0.5) * lambda * lambda / ((*n as f64) * (*n as f64)))
            }
            Family::Explicit { theta } => EntropyInterval::point(theta[(j - 1) as usize]),
        }
    }

    /// Midpoint value of `theta_j`, used for classification decisions.
    fn theta_mid(&self, j: u64) -> f64 {
        self.theta_at(j).midpoint()
    }

    /// Smallest support index `j` with `theta_j <= x`, for the monotone
    /// decreasing families. `None` when no index qualifies (`x <= 0`).
    ///
    /// Classification uses the normalizer midpoint; boundary ties within the
    /// normalizer bracket width (~1e-12 relative) resolve deterministically.
    pub(crate) fn first_index_leq(&self, x: f64) -> Option<u64> {
        debug_assert!(self.is_decreasing_infinite());
        if x <= 0.0 {
            return None;
        }
        let start = self.support_start();
        if self.theta_mid(start) <= x {
            return Some(start);
        }
        match &self.family {
            Family::Geometric { p } => {
                let q = 1.0 - *p;
                // p q^(j-1) <= x  <=>  j >= 1 + ln(p/x)/ln(1/q)
                let cand = 1.0 + (p / x).ln() / -(q.ln());
                Some(self.refine_first_leq(x, cand))
            }
            Family::Zipf { gamma } => {
                let alpha = 1.0 / self.normalizer.midpoint();
                let cand = (alpha / x).powf(1.0 / (1.0 + *gamma));
                Some(self.refine_first_leq(x, cand))
            }
            Family::SlowInteger { gamma } => {
                let alpha = self.normalizer.midpoint();
                let cand = slow_integer_index_fixed_point(alpha, *gamma, x);
                Some(self.refine_first_leq(x, cand))
            }
            _ => unreachable!(),
        }
    }

    /// Local scan (falling back to binary search) around an analytic index
    /// candidate to pin the exact first index with `theta <= x`.
    fn refine_first_leq(&self, x: f64, cand: f64) -> u64 {
        let start = self.support_start();
        let cand = cand.max(start as f64).min(9.0e15);
        let mut j = cand.ceil() as u64;
        for _ in 0..8 {
            let here = self.theta_mid(j) <= x;
            let before = j <= start || self.theta_mid(j - 1) > x;
            if here && before {
                return j;
            }
            if here {
                j -= 1;
            } else {
                j += 1;
            }
        }
        // candidate was far off (extreme parameters): binary search
        let (mut lo, mut hi) = (start, j.max(start));
        while self.theta_mid(hi) > x {
            hi = hi.saturating_mul(2).max(hi + 1);
            if hi > (1u64 << 62) {
                break;
            }
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.theta_mid(mid) <= x {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Largest index with `theta <= x` for the increasing/sorted finite
    /// families, as a count of indices from the bottom (0 = none).
    fn last_index_leq_ascending(&self, x: f64) -> u64 {
        match &self.family {
            Family::Linear { lambda, n, k } => {
                if x <= 0.0 {
                    return 0;
                }
                let c = 2.0 * lambda * lambda / ((*n as f64) * (*n as f64));
                // theta_i <= x  <=>  i <= x/c + 1/2
                let mut i = ((x / c) + 0.5).floor().clamp(0.0, *k as f64) as u64;
                while i > 0 && self.theta_mid(i) > x {
                    i -= 1;
                }
                while i < *k && self.theta_mid(i + 1) <= x {
                    i += 1;
                }
                i
            }
            Family::Explicit { theta } => theta.partition_point(|&t| t <= x) as u64,
            _ => unreachable!(),
        }
    }

    /// Inclusive index range of symbols with `theta in (a, b]`, ordered by
    /// index; `hi = None` marks an infinite tail. `Err(())`-like empty band
    /// is `None`.
    fn band_indices(&self, a: f64, b: f64) -> Option<(u64, Option<u64>)> {
        if b <= a {
            return None;
        }
        match &self.family {
            Family::UniformK { .. } | Family::UniformRate { .. } => {
                let th = self.theta_mid(1);
                if th > a && th <= b {
                    Some((1, self.support_size()))
                } else {
                    None
                }
            }
            Family::Linear { .. } | Family::Explicit { .. } => {
                let lo = self.last_index_leq_ascending(a); // indices 1..=lo are <= a
                let hi = self.last_index_leq_ascending(b);
                if hi > lo {
                    Some((lo + 1, Some(hi)))
                } else {
                    None
                }
            }
            _ => {
                // decreasing families: theta_j <= b for j >= first_leq(b)
                let from = self.first_index_leq(b)?;
                match self.first_index_leq(a) {
                    None => Some((from, None)),
                    Some(end) if end > from => Some((from, Some(end - 1))),
                    Some(_) => None,
                }
            }
        }
    }

    /// Enumerate `(index, theta)` over a band, up to `cap` symbols; the
    /// callback returns `false` to stop early (reported as truncation).
    /// `theta` is passed as an interval (degenerate for exact families).
    pub(crate) fn for_each_in_band<F: FnMut(u64, EntropyInterval) -> bool>(
        &self,
        a: f64,
        b: f64,
        cap: u64,
        mut f: F,
    ) -> BandLoop {
        let Some((from, to)) = self.band_indices(a, b) else {
            return BandLoop::Completed;
        };
        match to {
            Some(to) => {
                let len = to - from + 1;
                let end = if len > cap { from + cap - 1 } else { to };
                for j in from..=end {
                    if !f(j, self.theta_at(j)) {
                        return BandLoop::Truncated { next_index: j + 1 };
                    }
                }
                if len > cap {
                    BandLoop::Truncated { next_index: end + 1 }
                } else {
                    BandLoop::Completed
                }
            }
            None => {
                for j in from..from + cap {
                    if !f(j, self.theta_at(j)) {
                        return BandLoop::Truncated { next_index: j + 1 };
                    }
                }
                BandLoop::Infinite { next_index: from + cap }
            }
        }
    }

    /// Count-only band query (index arithmetic, no mass sums).
    pub(crate) fn band_count(&self, a: f64, b: f64) -> EntropyInterval {
        match self.band_indices(a, b) {
            None => EntropyInterval::ZERO,
            Some((_, None)) => EntropyInterval {
                lo: f64::INFINITY,
                hi: f64::INFINITY,
            },
            Some((from, Some(to))) => EntropyInterval::point((to - from + 1) as f64),
        }
    }

    fn cache_get(&self, key: BandKey) -> Option<BandCached> {
        self.cache.lock().unwrap().get(&key).cloned()
    }

    fn cache_put(&self, key: BandKey, val: BandCached) {
        let mut c = self.cache.lock().unwrap();
        if c.len() >= 16_384 {
            c.clear();
        }
        c.insert(key, val);
    }

    /// Count, mass, squared mass and entropy mass over `(a, b]`.
    pub fn range_stats(&self, a: f64, b: f64) -> RangeStats {
        let key = (0u8, a.to_bits(), b.to_bits(), 0);
        if let Some(BandCached::Stats(st)) = self.cache_get(key) {
            return st;
        }
        let st = self.range_stats_uncached(a, b);
        self.cache_put(key, BandCached::Stats(st));
        st
    }

    fn range_stats_uncached(&self, a: f64, b: f64) -> RangeStats {
        let Some((from, to)) = self.band_indices(a, b) else {
            return RangeStats::zero();
        };
        match &self.family {
            Family::UniformK { .. }
            | Family::UniformRate { .. } => {
                let k = self.support_size().unwrap() as f64;
                let th = self.theta_at(1);
                RangeStats {
                    count: EntropyInterval::point(k),
                    mass: th.scale(k).clamp(0.0, 1.0),
                    sq_mass: th.mul(&th).scale(k),
                    neg_entropy_mass: neg_theta_log_theta(th).scale(k),
                }
            }
            Family::Explicit { theta } => {
                let to = to.unwrap();
                let mut mass = StableSum::new();
                let mut sq = StableSum::new();
                let mut ent = StableSum::new();
                for j in from..=to {
                    let t = theta[(j - 1) as usize];
                    mass.add(t);
                    sq.add(t * t);
                    ent.add(t * (1.0 / t).log2());
                }
                RangeStats {
                    count: EntropyInterval::point((to - from + 1) as f64),
                    mass: widen_sum(mass.value(), (to - from + 1) as f64),
                    sq_mass: widen_sum(sq.value(), (to - from + 1) as f64),
                    neg_entropy_mass: widen_sum(ent.value(), (to - from + 1) as f64),
                }
            }
            Family::Linear { .. } => self.linear_range_stats(from, to.unwrap()),
            Family::Geometric { p } => self.geometric_range_stats(*p, from, to),
            Family::Zipf { gamma } => self.zipf_range_stats(*gamma, from, to),
            Family::SlowInteger { gamma } => self.slow_integer_range_stats(*gamma, from, to),
        }
    }

    fn linear_range_stats(&self, from: u64, to: u64) -> RangeStats {
        let Family::Linear { lambda, n, .. } = &self.family else {
            unreachable!()
        };
        let c = 2.0 * lambda * lambda / ((*n as f64) * (*n as f64));
        let count = (to - from + 1) as f64;
        // Faulhaber sums of (i - 1/2)^m from 1 to m0
        let s1 = |m: f64| m * m / 2.0;
        let s2 = |m: f64| m * (4.0 * m * m - 1.0) / 12.0;
        let a = (from - 1) as f64;
        let b = to as f64;
        let mass = c * (s1(b) - s1(a));
        let sq = c * c * (s2(b) - s2(a));
        // entropy mass: exact loop when affordable, else a bracket from the
        // integral of t log2(1/t)
        let ent = if to - from + 1 <= HEAD_CAP {
            let mut acc = StableSum::new();
            for j in from..=to {
                let t = c * (j as f64 - 0.5);
                acc.add(t * (1.0 / t).log2());
            }
            widen_sum(acc.value(), count)
        } else {
            linear_entropy_band_bracket(c, from, to)
        };
        RangeStats {
            count: EntropyInterval::point(count),
            mass: widen_sum(mass, count).clamp(0.0, 1.0),
            sq_mass: widen_sum(sq, count),
            neg_entropy_mass: ent,
        }
    }

    fn geometric_range_stats(&self, p: f64, from: u64, to: Option<u64>) -> RangeStats {
        let q = 1.0 - p;
        let qpow = |e: f64| -> f64 {
            if e <= 0.0 {
                1.0
            } else {
                (e * q.ln()).exp()
            }
        };
        // sum over [from, to] of p^m q^(m(j-1)) style closed forms
        let a = (from - 1) as f64;
        let geo_block = |m: f64| -> f64 {
            // sum_{j=from}^{to} (p q^{j-1})^m = p^m (q^{m a} - q^{m b}) / (1 - q^m)
            let top = match to {
                Some(t) => qpow(m * a) - qpow(m * t as f64),
                None => qpow(m * a),
            };
            p.powf(m) * top / (1.0 - qpow(m))
        };
        let count = match to {
            Some(t) => EntropyInterval::point((t - from + 1) as f64),
            None => EntropyInterval {
                lo: f64::INFINITY,
                hi: f64::INFINITY,
            },
        };
        let mass = geo_block(1.0);
        let sq = geo_block(2.0);
        // entropy mass: c*mass + d*p*sum (j-1) q^(j-1)
        let c = (1.0 / p).log2();
        let d = (1.0 / q).log2();
        let s_inf = |m0: f64| -> f64 {
            // sum_{m >= m0} m q^m = q^{m0} (m0 + q/(1-q)) / (1-q)
            qpow(m0) * (m0 + q / p) / p
        };
        let t_sum = match to {
            Some(t) => s_inf(a) - s_inf(t as f64),
            None => s_inf(a),
        };
        let ent = c * mass + d * p * t_sum;
        let nudges = 16.0;
        RangeStats {
            count,
            mass: widen_sum(mass, nudges).clamp(0.0, 1.0),
            sq_mass: widen_sum(sq, nudges),
            neg_entropy_mass: widen_sum(ent, nudges),
        }
    }

    fn zipf_range_stats(&self, gamma: f64, from: u64, to: Option<u64>) -> RangeStats {
        let g = 1.0 + gamma;
        let shape = move |x: f64| x.powf(-g);
        let shape_int = move |x: f64| Some(x.powf(-gamma) / gamma);
        let sq_int = move |x: f64| Some(x.powf(-(1.0 + 2.0 * gamma)) / (1.0 + 2.0 * gamma));
        let zeta = self.normalizer;
        let alpha = EntropyInterval {
            lo: down(1.0 / zeta.hi),
            hi: up(1.0 / zeta.lo),
        };
        let count = match to {
            Some(t) => EntropyInterval::point((t - from + 1) as f64),
            None => EntropyInterval {
                lo: f64::INFINITY,
                hi: f64::INFINITY,
            },
        };
        // unit-normalizer sums, scaled by alpha powers afterwards
        let mass_u = head_tail_sum(from, to, &(shape, shape_int));
        let sq_u = head_tail_sum(from, to, &(move |x: f64| shape(x).powi(2), sq_int));
        // theta log2(1/theta) = alpha x^{-g} (log2(1/alpha) + g log2 x)
        let log_inv_alpha = EntropyInterval {
            lo: down((1.0 / alpha.hi).log2()),
            hi: up((1.0 / alpha.lo).log2()),
        };
        let logx_u = head_tail_sum(
            from.max(2),
            to,
            &(
                move |x: f64| shape(x) * x.log2(),
                move |x: f64| Some((x.powf(-gamma) / gamma) * (x.log2() + LOG2_E / gamma)),
            ),
        );
        // possible j=1 head term contributes zero to the log2 x part
        let ent = alpha
            .mul(&log_inv_alpha.mul(&mass_u).add(&logx_u.scale(g)))
            .clamp(0.0, f64::INFINITY);
        RangeStats {
            count,
            mass: alpha.mul(&mass_u).clamp(0.0, 1.0),
            sq_mass: alpha.mul(&alpha).mul(&sq_u),
            neg_entropy_mass: ent,
        }
    }

    fn slow_integer_range_stats(&self, gamma: f64, from: u64, to: Option<u64>) -> RangeStats {
        let g = 1.0 + gamma;
        let shape = move |x: f64| slow_integer_shape(x, gamma);
        let shape_int = move |x: f64| Some(LN_2 / (gamma * x.log2().powf(gamma)));
        // squared summand tail: bounded by freezing the slowly varying log factor
        let sq = move |x: f64| shape(x) * shape(x);
        let sq_int_hi = move |x: f64| Some(1.0 / (x * x.log2().powf(2.0 * g)));
        let alpha = self.normalizer;
        let count = match to {
            Some(t) => EntropyInterval::point((t - from + 1) as f64),
            None => EntropyInterval {
                lo: f64::INFINITY,
                hi: f64::INFINITY,
            },
        };
        let mass_u = head_tail_sum(from, to, &(shape, shape_int));
        let sq_u = head_tail_sum_asym(from, to, sq, |x| Some(0.0 * x), sq_int_hi);
        // theta log2(1/theta): alpha s(x) [log2(1/alpha) + log2 x + g log2 log2 x]
        let log_inv_alpha = EntropyInterval {
            lo: down((1.0 / alpha.hi).log2()),
            hi: up((1.0 / alpha.lo).log2()),
        };
        let logx_part = if gamma > 1.0 {
            head_tail_sum(
                from,
                to,
                &(
                    move |x: f64| shape(x) * x.log2(),
                    move |x: f64| Some(LN_2 * x.log2().powf(1.0 - gamma) / (gamma - 1.0)),
                ),
            )
        } else {
            match to {
                Some(t) => head_tail_sum(from, Some(t), &(move |x: f64| shape(x) * x.log2(), |_x: f64| None)),
                None => EntropyInterval::INFINITE,
            }
        };
        let loglog_part = head_tail_sum(
            from,
            to,
            &(
                move |x: f64| {
                    let u = x.log2();
                    let ll = u.log2().max(0.0);
                    shape(x) * ll
                },
                move |x: f64| {
                    let u = x.log2();
                    Some((1.0 + gamma * u.ln()) / (gamma * gamma * u.powf(gamma)))
                },
            ),
        );
        let ent = if logx_part.is_infinite() {
            EntropyInterval::INFINITE
        } else {
            alpha
                .mul(&log_inv_alpha.mul(&mass_u).add(&logx_part).add(&loglog_part.scale(g)))
                .clamp(0.0, f64::INFINITY)
        };
        RangeStats {
            count,
            mass: alpha.mul(&mass_u).clamp(0.0, 1.0),
            sq_mass: alpha.mul(&alpha).mul(&sq_u),
            neg_entropy_mass: ent,
        }
    }

    /// `sum theta^2 log2(1/theta)` over a band, with closed or bracketed
    /// tails per family (feeds the quadratic re-occurrence term).
    pub(crate) fn band_sq_log_inv(&self, a: f64, b: f64) -> EntropyInterval {
        let key = (1u8, a.to_bits(), b.to_bits(), 0);
        if let Some(BandCached::Iv(iv)) = self.cache_get(key) {
            return iv;
        }
        let iv = self.band_sq_log_inv_uncached(a, b);
        self.cache_put(key, BandCached::Iv(iv));
        iv
    }

    fn band_sq_log_inv_uncached(&self, a: f64, b: f64) -> EntropyInterval {
        let Some((from, to)) = self.band_indices(a, b) else {
            return EntropyInterval::ZERO;
        };
        match &self.family {
            Family::UniformK { .. } | Family::UniformRate { .. } => {
                let k = self.support_size().unwrap() as f64;
                let th = self.theta_at(1);
                let g = th.mul(&th).mul(&EntropyInterval::new(
                    down((1.0 / th.hi).log2()),
                    up((1.0 / th.lo).log2()),
                ));
                g.scale(k)
            }
            Family::Explicit { theta } => {
                let mut acc = StableSum::new();
                for j in from..=to.unwrap() {
                    let t = theta[(j - 1) as usize];
                    acc.add(t * t * (1.0 / t).log2());
                }
                widen_sum(acc.value(), 8.0)
            }
            Family::Linear { lambda, n, .. } => {
                let c = 2.0 * lambda * lambda / ((*n as f64) * (*n as f64));
                let to = to.unwrap();
                if to - from + 1 <= HEAD_CAP {
                    let mut acc = StableSum::new();
                    for i in from..=to {
                        let t = c * (i as f64 - 0.5);
                        acc.add(t * t * (1.0 / t).log2());
                    }
                    widen_sum(acc.value(), (to - from + 1) as f64)
                } else {
                    // wide but valid: squared mass times the extreme log factors
                    let sq = self.range_stats(a, b).sq_mass;
                    let th_lo = c * (from as f64 - 0.5);
                    let th_hi = c * (to as f64 - 0.5);
                    EntropyInterval::new(
                        down(sq.lo * (1.0 / th_hi).log2().max(0.0)),
                        up(sq.hi * (1.0 / th_lo).log2().max(0.0)),
                    )
                }
            }
            Family::Geometric { p } => {
                let q = 1.0 - *p;
                let r = q * q;
                let rpow = |e: f64| if e <= 0.0 { 1.0 } else { (e * r.ln()).exp() };
                let m0 = (from - 1) as f64;
                let sq_top = match to {
                    Some(t) => rpow(m0) - rpow(t as f64),
                    None => rpow(m0),
                };
                let sq = p * p * sq_top / (1.0 - r);
                // sum (j-1) q^{2(j-1)} over the range
                let s_inf = |m: f64| rpow(m) * (m + r / (1.0 - r)) / (1.0 - r);
                let t2 = match to {
                    Some(t) => s_inf(m0) - s_inf(t as f64),
                    None => s_inf(m0),
                };
                let v = (1.0 / p).log2() * sq + (1.0 / q).log2() * p * p * t2;
                widen_sum(v, 16.0)
            }
            Family::Zipf { gamma } => {
                let g2 = 2.0 + 2.0 * gamma;
                let zeta = self.normalizer;
                let alpha = EntropyInterval {
                    lo: down(1.0 / zeta.hi),
                    hi: up(1.0 / zeta.lo),
                };
                // unit summand x^{-g2} (c + (1+gamma) log2 x) with c from the
                // endpoint alpha that keeps the direction outward
                let build = move |c: f64| {
                    move |x: f64| x.powf(-g2) * (c + (1.0 + gamma) * x.log2())
                };
                let tail = move |c: f64| {
                    move |x: f64| {
                        let base = x.powf(1.0 - g2) / (g2 - 1.0);
                        Some(base * (c + (1.0 + gamma) * (x.log2() + LOG2_E / (g2 - 1.0))))
                    }
                };
                let c_lo = (1.0 / alpha.hi).log2();
                let c_hi = (1.0 / alpha.lo).log2();
                let s_lo = head_tail_sum(from, to, &(build(c_lo), tail(c_lo)));
                let s_hi = head_tail_sum(from, to, &(build(c_hi), tail(c_hi)));
                EntropyInterval::new(
                    down(alpha.lo * alpha.lo * s_lo.lo.max(0.0)),
                    up(alpha.hi * alpha.hi * s_hi.hi),
                )
            }
            Family::SlowInteger { gamma } => {
                let g = 1.0 + gamma;
                let alpha = self.normalizer;
                let c_lo = (1.0 / alpha.hi).log2();
                let c_hi = (1.0 / alpha.lo).log2();
                let shape = move |x: f64| slow_integer_shape(x, *gamma);
                let summand = move |c: f64| {
                    move |x: f64| {
                        let u = x.log2();
                        let sh = shape(x);
                        sh * sh * (c + u + g * u.log2().max(0.0))
                    }
                };
                // upper tail: freeze the slowly varying (log2 x)^(2+2g) factor
                // and integrate x^{-2} (c + (2+gamma) log2 x)
                let tail_hi = move |c: f64| {
                    move |x: f64| {
                        let u = x.log2();
                        Some(
                            (c / x + (2.0 + *gamma) * (x.log2() + LOG2_E) / x)
                                / u.powf(2.0 * g),
                        )
                    }
                };
                let s_lo = head_tail_sum_asym(from, to, summand(c_lo), |_x| Some(0.0), tail_hi(c_lo));
                let s_hi = head_tail_sum_asym(from, to, summand(c_hi), |_x| Some(0.0), tail_hi(c_hi));
                EntropyInterval::new(
                    down(alpha.lo * alpha.lo * s_lo.lo.max(0.0)),
                    up(alpha.hi * alpha.hi * s_hi.hi),
                )
            }
        }
    }

    /// `sum theta^3` over a band (used by the binomial occupancy bracket).
    pub(crate) fn band_cube_mass(&self, a: f64, b: f64) -> EntropyInterval {
        let key = (2u8, a.to_bits(), b.to_bits(), 0);
        if let Some(BandCached::Iv(iv)) = self.cache_get(key) {
            return iv;
        }
        let iv = self.band_cube_mass_uncached(a, b);
        self.cache_put(key, BandCached::Iv(iv));
        iv
    }

    fn band_cube_mass_uncached(&self, a: f64, b: f64) -> EntropyInterval {
        let Some((from, to)) = self.band_indices(a, b) else {
            return EntropyInterval::ZERO;
        };
        match &self.family {
            Family::UniformK { .. } | Family::UniformRate { .. } => {
                let k = self.support_size().unwrap() as f64;
                let th = self.theta_at(1);
                th.mul(&th).mul(&th).scale(k)
            }
            Family::Explicit { theta } => {
                let mut acc = StableSum::new();
                for j in from..=to.unwrap() {
                    acc.add(theta[(j - 1) as usize].powi(3));
                }
                widen_sum(acc.value(), 8.0)
            }
            Family::Linear { lambda, n, .. } => {
                let c = 2.0 * lambda * lambda / ((*n as f64) * (*n as f64));
                let s3 = |m: f64| m * m * (2.0 * m * m - 1.0) / 8.0;
                widen_sum(
                    c * c * c * (s3(to.unwrap() as f64) - s3((from - 1) as f64)),
                    8.0,
                )
            }
            Family::Geometric { p } => {
                let q = 1.0 - *p;
                let qpow = |e: f64| (e * q.ln()).exp();
                let a3 = 3.0 * (from - 1) as f64;
                let top = match to {
                    Some(t) => qpow(a3) - qpow(3.0 * t as f64),
                    None => qpow(a3),
                };
                widen_sum(p.powi(3) * top / (1.0 - qpow(3.0)), 8.0)
            }
            Family::Zipf { gamma } => {
                let g3 = 3.0 * (1.0 + gamma);
                let alpha = EntropyInterval {
                    lo: down(1.0 / self.normalizer.hi),
                    hi: up(1.0 / self.normalizer.lo),
                };
                let s = head_tail_sum(
                    from,
                    to,
                    &(
                        move |x: f64| x.powf(-g3),
                        move |x: f64| Some(x.powf(1.0 - g3) / (g3 - 1.0)),
                    ),
                );
                alpha.mul(&alpha).mul(&alpha).mul(&s)
            }
            Family::SlowInteger { gamma } => {
                let g = 1.0 + gamma;
                let cube = move |x: f64| slow_integer_shape(x, *gamma).powi(3);
                let cube_hi = move |x: f64| Some(1.0 / (2.0 * x * x * x.log2().powf(3.0 * g)));
                let a = self.normalizer;
                let s = head_tail_sum_asym(from, to, cube, |_x| Some(0.0), cube_hi);
                a.mul(&a).mul(&a).mul(&s)
            }
        }
    }

    /// Expected number of distinct band symbols in `X^n`:
    /// `L = sum over band of (1 - (1-theta)^n)`, bracketed.
    ///
    /// Uses the exact sum when the band is enumerable, intersected with the
    /// Taylor bracket and the (always valid) binomial bracket
    /// `n phi - C(n,2) sum theta^2 <= L <= that + C(n,3) sum theta^3`.
    pub(crate) fn expected_distinct(&self, a: f64, b: f64, n: u64) -> EntropyInterval {
        let key = (3u8, a.to_bits(), b.to_bits(), n);
        if let Some(BandCached::Iv(iv)) = self.cache_get(key) {
            return iv;
        }
        let iv = self.expected_distinct_uncached(a, b, n);
        self.cache_put(key, BandCached::Iv(iv));
        iv
    }

    fn expected_distinct_uncached(&self, a: f64, b: f64, n: u64) -> EntropyInterval {
        let stats = self.range_stats(a, b);
        if stats.count.hi == 0.0 {
            return EntropyInterval::ZERO;
        }
        let nf = n as f64;
        // binomial bracket
        let c2 = nf * (nf - 1.0) / 2.0;
        let c3 = c2 * (nf - 2.0) / 3.0;
        let cube = self.band_cube_mass(a, b);
        let lo_binom = nf * stats.mass.lo - c2 * stats.sq_mass.hi;
        let hi_binom = nf * stats.mass.hi - c2 * stats.sq_mass.lo + c3 * cube.hi;
        let mut iv = EntropyInterval {
            lo: down(lo_binom.max(0.0)),
            hi: up(hi_binom.min(stats.count.hi).min(nf)),
        };
        if iv.lo > iv.hi {
            iv = EntropyInterval::new(iv.hi.min(0.0).max(0.0), iv.hi.max(0.0));
        }
        // Taylor bracket: k_b - sum e^{-n theta} <= L <= k_b - sum_{theta <= 3/5} e^{-n(theta+theta^2)}
        if let Some((e1, e2)) = self.exp_sums(a, b, n) {
            let taylor = EntropyInterval::new(
                down((stats.count.lo - e1.hi).max(0.0)),
                up(stats.count.hi - e2.lo),
            );
            iv = iv.intersect(&taylor);
        }
        // exact enumeration when affordable
        if stats.count.hi.is_finite() && stats.count.hi <= HEAD_CAP as f64 {
            let mut lo = StableSum::new();
            let mut hi = StableSum::new();
            let done = self.for_each_in_band(a, b, HEAD_CAP, |_j, th| {
                lo.add(-f64::exp_m1(nf * f64::ln_1p(-th.lo)));
                hi.add(-f64::exp_m1(nf * f64::ln_1p(-th.hi)));
                true
            });
            if done == BandLoop::Completed {
                let cnt = stats.count.hi;
                let exact = EntropyInterval {
                    lo: down(lo.value() - 1e-13 * cnt.max(1.0)),
                    hi: up(hi.value() + 1e-13 * cnt.max(1.0)),
                };
                iv = iv.intersect(&exact);
            }
        }
        iv.clamp(0.0, nf)
    }

    /// `sum e^{-n theta}` and `sum_{theta <= 3/5} e^{-n(theta+theta^2)}`
    /// over an enumerable band; `None` when the band cannot be enumerated.
    pub(crate) fn exp_sums(&self, a: f64, b: f64, n: u64) -> Option<(EntropyInterval, EntropyInterval)> {
        let key = (4u8, a.to_bits(), b.to_bits(), n);
        if let Some(BandCached::Exp(e)) = self.cache_get(key) {
            return e;
        }
        let e = self.exp_sums_uncached(a, b, n);
        self.cache_put(key, BandCached::Exp(e));
        e
    }

    fn exp_sums_uncached(&self, a: f64, b: f64, n: u64) -> Option<(EntropyInterval, EntropyInterval)> {
        let stats_count = self.range_stats(a, b).count;
        if !stats_count.hi.is_finite() || stats_count.hi > HEAD_CAP as f64 {
            return None;
        }
        match &self.family {
            Family::UniformK { .. } | Family::UniformRate { .. } => {
                let k = self.support_size().unwrap() as f64;
                if stats_count.hi == 0.0 {
                    return Some((EntropyInterval::ZERO, EntropyInterval::ZERO));
                }
                let th = self.theta_mid(1);
                let nf = n as f64;
                let e1 = k * (-nf * th).exp();
                let e2 = if th <= 0.6 {
                    k * (-nf * (th + th * th)).exp()
                } else {
                    0.0
                };
                Some((widen_sum(e1, 4.0), widen_sum(e2, 4.0)))
            }
            _ => {
                let nf = n as f64;
                let mut e1_lo = StableSum::new();
                let mut e1_hi = StableSum::new();
                let mut e2_lo = StableSum::new();
                let mut e2_hi = StableSum::new();
                let done = self.for_each_in_band(a, b, HEAD_CAP, |_j, th| {
                    e1_lo.add((-nf * th.hi).exp());
                    e1_hi.add((-nf * th.lo).exp());
                    if th.hi <= 0.6 {
                        e2_lo.add((-nf * (th.hi + th.hi * th.hi)).exp());
                        e2_hi.add((-nf * (th.lo + th.lo * th.lo)).exp());
                    }
                    true
                });
                if done != BandLoop::Completed {
                    return None;
                }
                Some((
                    EntropyInterval::new(down(e1_lo.value()), up(e1_hi.value())),
                    EntropyInterval::new(down(e2_lo.value()), up(e2_hi.value())),
                ))
            }
        }
    }

    /// The `m` smallest in-band probabilities in ascending order, for finite
    /// supports; `None` for infinite-support families (whose in-band infimum
    /// is zero).
    pub(crate) fn smallest_in_band_ascending(&self, b: f64, m: usize) -> Option<Vec<f64>> {
        self.support_size()?;
        match &self.family {
            Family::UniformK { .. } | Family::UniformRate { .. } => {
                let th = self.theta_mid(1);
                if th <= b {
                    let k = self.support_size().unwrap() as usize;
                    Some(vec![th; m.min(k)])
                } else {
                    Some(vec![])
                }
            }
            Family::Linear { .. } => {
                let hi = self.last_index_leq_ascending(b);
                let take = (hi as usize).min(m);
                Some((1..=take as u64).map(|i| self.theta_mid(i)).collect())
            }
            Family::Explicit { theta } => {
                let hi = theta.partition_point(|&t| t <= b);
                Some(theta[..hi.min(m)].to_vec())
            }
            _ => None,
        }
    }

    /// Per-symbol i.i.d. entropy `H(X)` in bits; the distinguished
    /// [`EntropyInterval::INFINITE`] for slow-integer with `gamma <= 1`.
    pub fn iid_entropy(&self) -> EntropyInterval {
        *self.entropy.get_or_init(|| self.compute_entropy())
    }

    fn compute_entropy(&self) -> EntropyInterval {
        match &self.family {
            Family::UniformK { k } => EntropyInterval::point((*k as f64).log2()),
            Family::UniformRate { k, .. } => EntropyInterval::point((*k as f64).log2()),
            Family::Geometric { p } => EntropyInterval::point(h2(*p) / *p),
            Family::Explicit { theta } => {
                let mut acc = StableSum::new();
                for &t in theta {
                    acc.add(t * (1.0 / t).log2());
                }
                widen_sum(acc.value(), theta.len() as f64)
            }
            Family::SlowInteger { gamma } => {
                if *gamma <= 1.0 {
                    EntropyInterval::INFINITE
                } else {
                    self.range_stats(0.0, 1.0).neg_entropy_mass
                }
            }
            Family::Zipf { .. } => self.range_stats(0.0, 1.0).neg_entropy_mass,
            Family::Linear { lambda, n, k } => {
                linear_entropy(*lambda, *n as f64, *k)
            }
        }
    }

    /// Canonical spec string (also used in CSV output).
    pub fn spec_string(&self) -> String {
        match &self.family {
            Family::UniformK { k } => format!("uniform:k={k}"),
            Family::UniformRate { lambda, n, .. } => format!("uniform:lambda={lambda},n={n}"),
            Family::SlowInteger { gamma } => format!("slowint:gamma={gamma}"),
            Family::Zipf { gamma } => format!("zipf:gamma={gamma}"),
            Family::Geometric { p } => format!("geom:p={p}"),
            Family::Linear { lambda, n, .. } => format!("linear:lambda={lambda},n={n}"),
            Family::Explicit { theta } => format!("explicit:k={}", theta.len()),
        }
    }

    /// Parse the CLI distribution grammar, e.g. `geom:p=0.05`,
    /// `uniform:lambda=1,n=1000`, `explicit:@probs.csv`.
    ///
    /// `default_n` supplies `n` for the rate-parametrized families when the
    /// spec omits it.
    pub fn parse(spec: &str, default_n: Option<u64>) -> Result<Self> {
        let (head, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidDistribution(format!("missing ':' in '{spec}'")))?;
        let mut kv = std::collections::BTreeMap::new();
        if let Some(path) = rest.strip_prefix('@') {
            if head != "explicit" {
                return Err(Error::InvalidDistribution(format!(
                    "file argument only valid for explicit, got '{head}'"
                )));
            }
            let body = std::fs::read_to_string(path)?;
            let mut theta = Vec::new();
            for line in body.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                theta.push(line.parse::<f64>().map_err(|e| {
                    Error::InvalidDistribution(format!("bad probability '{line}': {e}"))
                })?);
            }
            return Self::explicit(theta);
        }
        for item in rest.split(',') {
            if item.is_empty() {
                continue;
            }
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::InvalidDistribution(format!("expected key=value, got '{item}'"))
            })?;
            let v: f64 = v.parse().map_err(|e| {
                Error::InvalidDistribution(format!("bad value for '{k}': {e}"))
            })?;
            kv.insert(k.to_string(), v);
        }
        let get = |key: &str| -> Result<f64> {
            kv.get(key)
                .copied()
                .ok_or_else(|| Error::InvalidDistribution(format!("missing '{key}' in '{spec}'")))
        };
        let n_param = || -> Result<u64> {
            if let Some(&n) = kv.get("n") {
                Ok(n as u64)
            } else {
                default_n.ok_or_else(|| {
                    Error::InvalidDistribution(format!("'{spec}' needs n= (or --n)"))
                })
            }
        };
        match head {
            "uniform" => {
                if kv.contains_key("k") {
                    Self::uniform_k(get("k")? as u64)
                } else {
                    Self::uniform_rate(get("lambda")?, n_param()?)
                }
            }
            "slowint" => Self::slow_integer(get("gamma")?),
            "zipf" => Self::zipf(get("gamma")?),
            "geom" => Self::geometric(get("p")?),
            "linear" => Self::linear(get("lambda")?, n_param()?),
            _ => Err(Error::InvalidDistribution(format!(
                "unknown family '{head}'"
            ))),
        }
    }
}

/// Generic exact-head-plus-integral-tail bracket for a sum of a positive
/// decreasing summand over `[from, to]` (`to = None` means infinity).
fn head_tail_sum<T: numerics::TailFunction>(from: u64, to: Option<u64>, f: &T) -> EntropyInterval {
    let mut acc = StableSum::new();
    let mut j = from;
    let mut terms = 0u64;
    let end = to.unwrap_or(u64::MAX);
    while j <= end {
        let t = f.eval(j as f64);
        acc.add(t);
        terms += 1;
        j += 1;
        // the convex-refined tail bracket has width ~ |f'|/4 ~ f(j)/j for
        // the power-law summands here, so stop once that is negligible
        if terms >= HEAD_CAP || (terms >= 64 && t < TAIL_REL * (j as f64) * acc.value().abs()) {
            break;
        }
    }
    let head = widen_sum(acc.value(), terms as f64);
    if j > end {
        return head;
    }
    // remainder [j, to]; all tail summands used here are convex decreasing
    let rem = match to {
        None => numerics::tail_integral_bounds_convex(f, j as f64),
        Some(t) => numerics::range_integral_bounds_convex(f, j as f64, t as f64),
    };
    match rem {
        Ok(r) => head.add(&r),
        Err(_) => EntropyInterval::INFINITE,
    }
}

/// Like [`head_tail_sum`] but with separate lower/upper tail integral
/// estimates for summands without an elementary antiderivative.
fn head_tail_sum_asym<F, GL, GH>(from: u64, to: Option<u64>, f: F, int_lo: GL, int_hi: GH) -> EntropyInterval
where
    F: Fn(f64) -> f64,
    GL: Fn(f64) -> Option<f64>,
    GH: Fn(f64) -> Option<f64>,
{
    let mut acc = StableSum::new();
    let mut j = from;
    let mut terms = 0u64;
    let end = to.unwrap_or(u64::MAX);
    while j <= end {
        let t = f(j as f64);
        acc.add(t);
        terms += 1;
        j += 1;
        if terms >= HEAD_CAP
            || (terms >= 64 && t < TAIL_REL * (j as f64) * acc.value().abs())
        {
            break;
        }
    }
    let head = widen_sum(acc.value(), terms as f64);
    if j > end {
        return head;
    }
    let x = j as f64;
    let lo_tail = int_lo(x).unwrap_or(0.0).max(0.0);
    // upper estimates are stated for the infinite tail; a finite remainder
    // never exceeds them
    let hi_tail = match int_hi(x - 0.5) {
        Some(v) => v.max(f(x)),
        None => return EntropyInterval::INFINITE,
    };
    head.add(&EntropyInterval::new(down(lo_tail), up(hi_tail)))
}

/// Outward-widen a compensated sum. Neumaier summation keeps the
/// accumulation error at O(eps * sum |x|), and each term carries at most a
/// few ulp of evaluation error, so a relative 1e-14 margin dominates both.
/// The `+1` absorbs cancellation in the rare mixed-sign sums.
fn widen_sum(v: f64, _terms: f64) -> EntropyInterval {
    let slack = (v.abs() + 1.0) * 1e-14;
    EntropyInterval::new(v - slack, v + slack)
}

fn scale_by(iv: EntropyInterval, c: f64) -> EntropyInterval {
    iv.scale(c)
}

/// `-theta log2 theta` as an interval image.
fn neg_theta_log_theta(th: EntropyInterval) -> EntropyInterval {
    numerics::neg_xlogx_interval(&th)
}

fn geometric_theta(p: f64, j: u64) -> f64 {
    p * ((j - 1) as f64 * (1.0 - p).ln()).exp()
}

/// Unnormalized slow-integer summand `1/(x (log2 x)^(1+gamma))`.
fn slow_integer_shape(x: f64, gamma: f64) -> f64 {
    1.0 / (x * x.log2().powf(1.0 + gamma))
}

/// Normalizing factor alpha for the slow-integer family: exact head plus
/// sum-vs-integral tail bracket on `1/alpha`.
fn slow_integer_alpha(gamma: f64) -> EntropyInterval {
    let shape = move |x: f64| slow_integer_shape(x, gamma);
    let shape_int = move |x: f64| Some(LN_2 / (gamma * x.log2().powf(gamma)));
    let total = head_tail_sum_bounded(2, &(shape, shape_int), NORMALIZER_HEAD);
    EntropyInterval {
        lo: down(1.0 / total.hi),
        hi: up(1.0 / total.lo),
    }
}

/// `zeta(s)` bracket, `s > 1`: exact head plus tail bounds.
pub fn zeta_bracket(s: f64) -> EntropyInterval {
    let gamma = s - 1.0;
    let shape = move |x: f64| x.powf(-s);
    let shape_int = move |x: f64| Some(x.powf(-gamma) / gamma);
    head_tail_sum_bounded(1, &(shape, shape_int), NORMALIZER_HEAD)
}

fn head_tail_sum_bounded<T: numerics::TailFunction>(from: u64, f: &T, cap: u64) -> EntropyInterval {
    let mut acc = StableSum::new();
    let mut j = from;
    let mut terms = 0u64;
    loop {
        let t = f.eval(j as f64);
        acc.add(t);
        terms += 1;
        j += 1;
        if terms >= cap || (terms >= 64 && t < HEAD_EPS * (j as f64) * acc.value()) {
            break;
        }
    }
    let head = widen_sum(acc.value(), terms as f64);
    match numerics::tail_integral_bounds_convex(f, j as f64) {
        Ok(tail) => head.add(&tail),
        Err(_) => EntropyInterval::INFINITE,
    }
}

/// Numeric fixed-point solve for the first slow-integer index with
/// `theta <= x`: `j = ceil(beta chi / (ln chi)^(1+gamma))` where
/// `chi = (alpha/x) (ln 2)^(1+gamma)` and `beta` solves
/// `beta = [1 + ln(beta)/ln(chi) - (1+gamma) ln ln(chi) / ln(chi)]^-(1+gamma)`.
pub(crate) fn slow_integer_index_fixed_point(alpha: f64, gamma: f64, x: f64) -> f64 {
    let chi = (alpha / x) * LN_2.powf(1.0 + gamma);
    if chi <= std::f64::consts::E.powi(2) {
        return 2.0;
    }
    let lnchi = chi.ln();
    let mut beta = 1.0f64;
    for _ in 0..200 {
        let inner = 1.0 + beta.ln() / lnchi - (1.0 + gamma) * lnchi.ln() / lnchi;
        if inner <= 0.0 {
            // argument left the basin; bisect toward a safe value
            beta = 0.5 * (beta + 1.0);
            continue;
        }
        let next = inner.powf(-(1.0 + gamma));
        if (next - beta).abs() <= 1e-10 * beta.abs() {
            beta = next;
            break;
        }
        beta = next;
    }
    (beta * chi / lnchi.powf(1.0 + gamma)).ceil().max(2.0)
}

/// Linear-family entropy `H(X)` bracket:
/// `H = log2(n^2/(2 lambda^2)) - (2 lambda^2/n^2) sum (i-1/2) log2(i-1/2)`.
fn linear_entropy(lambda: f64, n: f64, k: u64) -> EntropyInterval {
    let c = 2.0 * lambda * lambda / (n * n);
    let lead = (1.0 / c).log2();
    if k <= HEAD_CAP {
        let mut acc = StableSum::new();
        for i in 1..=k {
            let t = i as f64 - 0.5;
            acc.add(t * t.log2());
        }
        let s = widen_sum(acc.value(), k as f64);
        EntropyInterval {
            lo: down(lead - c * s.hi),
            hi: up(lead - c * s.lo),
        }
    } else {
        // midpoint-rule bracket: first term exact, the rest between
        // int_1^k t log2 t dt and that integral minus sum of g'' bounds / 24
        let kf = k as f64;
        let integral = kf * kf / 2.0 * kf.log2() - (kf * kf - 1.0) / (4.0 * LN_2);
        let first = 0.5 * 0.5f64.log2();
        let corr = (1.0 + (kf - 1.0).ln()) / (24.0 * LN_2);
        let s_lo = first + integral - corr;
        let s_hi = first + integral;
        EntropyInterval {
            lo: down(lead - c * s_hi),
            hi: up(lead - c * s_lo),
        }
    }
}

/// Entropy-mass bracket over a linear-family index block too long to
/// enumerate, from the same midpoint-rule argument.
fn linear_entropy_band_bracket(c: f64, from: u64, to: u64) -> EntropyInterval {
    // sum_{i=from}^{to} g(c (i-1/2)) with g(t) = t log2(1/t);
    // G(x) = int g(c(x)) dx = (1/c) int_{theta(from-1/2)} g(t) dt
    let g_int = |x: f64| -> f64 {
        // int_0^x t log2(1/t) dt = x^2/2 log2(1/x) + x^2/(4 ln 2)
        if x <= 0.0 {
            0.0
        } else {
            x * x / 2.0 * (1.0 / x).log2() + x * x / (4.0 * LN_2)
        }
    };
    let a = c * ((from - 1) as f64);
    let b = c * (to as f64);
    let integral = (g_int(b) - g_int(a)) / c;
    // |g''| = log2(e)/t, summed over unit cells
    let corr = ((to - from + 1) as f64 / (c * (from as f64 - 0.5))).ln().max(1.0) / (24.0 * LN_2)
        + c * LOG2_E / (12.0 * (from as f64 - 0.5).max(0.5));
    EntropyInterval::new(down(integral - corr.abs() - 1e-9), up(integral + corr.abs() + 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta2() -> f64 {
        std::f64::consts::PI * std::f64::consts::PI / 6.0
    }

    #[test]
    fn pmf_examples() {
        let geo = DistributionModel::geometric(0.5).unwrap();
        let p3 = geo.pmf(3).unwrap();
        assert!((p3.midpoint() - 0.125).abs() < 1e-15);

        let zipf = DistributionModel::zipf(1.0).unwrap();
        let p1 = zipf.pmf(1).unwrap();
        assert!(p1.contains(6.0 / (std::f64::consts::PI * std::f64::consts::PI)));
        assert!(p1.width() < 1e-9);

        let slow = DistributionModel::slow_integer(1.0).unwrap();
        let alpha = slow.normalizer();
        // our bracket must sit inside the loose two-integral bracket
        assert!(alpha.lo >= 0.934 && alpha.hi <= 1.067, "alpha = {alpha:?}");
        let p2 = slow.pmf(2).unwrap();
        assert!((p2.midpoint() - alpha.midpoint() / 2.0).abs() < 1e-12);
        assert!(slow.pmf(1).is_err());
    }

    #[test]
    fn normalizer_paper_brackets() {
        for gamma in [0.25, 0.5, 1.0, 2.0, 3.0] {
            let z = zeta_bracket(1.0 + gamma);
            let lo = (gamma * 2f64.powf(gamma) + 1.0) / (gamma * 2f64.powf(gamma));
            let hi = (gamma * 2f64.powf(gamma + 1.0) + gamma + 2.0) / (gamma * 2f64.powf(gamma + 1.0));
            assert!(z.lo >= lo - 1e-9 && z.hi <= hi + 1e-9, "gamma={gamma}: {z:?} not in [{lo}, {hi}]");

            let slow = DistributionModel::slow_integer(gamma).unwrap();
            let a = slow.normalizer();
            let l3 = 3f64.log2();
            let a_lo = 1.0 / (0.5 + 1.0 / (3.0 * l3.powf(1.0 + gamma)) + LN_2 / (gamma * l3.powf(gamma)));
            let a_hi = 1.0 / (0.5 + LN_2 / (gamma * l3.powf(gamma)));
            assert!(a.lo >= a_lo - 1e-9 && a.hi <= a_hi + 1e-9, "gamma={gamma}: {a:?} not in [{a_lo}, {a_hi}]");
        }
        let z2 = zeta_bracket(2.0);
        assert!(z2.contains(zeta2()) && z2.width() < 1e-10);
        let z3 = zeta_bracket(3.0);
        assert!(z3.contains(1.202_056_903_159_594) && z3.width() < 1e-12);
    }

    #[test]
    fn range_stats_examples() {
        let geo = DistributionModel::geometric(0.5).unwrap();
        let s = geo.range_stats(0.2, 1.0);
        assert_eq!(s.count.midpoint(), 2.0);
        assert!(s.mass.contains(0.75) && s.mass.width() < 1e-12);

        // geometric band (0, eta]: mass = (1-p)^(j0-1), j0 first index <= eta
        let p = 0.37;
        let geo = DistributionModel::geometric(p).unwrap();
        for eta in [0.01, 0.003, 2e-4] {
            let j0 = geo.first_index_leq(eta).unwrap();
            let want = (1.0 - p).powi(j0 as i32 - 1);
            let got = geo.range_stats(0.0, eta).mass;
            assert!(got.contains(want) || (got.midpoint() - want).abs() < 1e-12,
                "eta={eta}: {got:?} vs {want}");
        }

        // zipf tail mass vs term-wise oracle
        let zipf = DistributionModel::zipf(1.0).unwrap();
        let band = zipf.range_stats(0.0, 1e-4);
        let alpha = 1.0 / zeta2();
        let j0 = zipf.first_index_leq(1e-4).unwrap();
        let mut oracle = 0.0;
        for j in j0..j0 + 3_000_000 {
            oracle += alpha / ((j as f64) * (j as f64));
        }
        oracle += alpha / ((j0 + 3_000_000) as f64); // integral tail, exact for 1/x^2
        assert!(band.mass.lo <= oracle + 1e-9 && oracle <= band.mass.hi + 1e-9,
            "mass {:?} vs oracle {oracle}", band.mass);
        // consistent with the alpha/(gamma j0^gamma) integral bracket
        assert!(band.mass.hi <= alpha / (j0 as f64 - 1.0) + 1e-9);
        assert!(band.mass.lo >= alpha / (j0 as f64 + 1.0) - 1e-9);
    }

    #[test]
    fn range_stats_full_band_mass_is_one() {
        let models: Vec<DistributionModel> = vec![
            DistributionModel::uniform_k(17).unwrap(),
            DistributionModel::uniform_rate(2.0, 1000).unwrap(),
            DistributionModel::slow_integer(0.7).unwrap(),
            DistributionModel::zipf(1.3).unwrap(),
            DistributionModel::geometric(0.05).unwrap(),
            DistributionModel::linear(2.0, 1000).unwrap(),
            DistributionModel::explicit(vec![0.2, 0.3, 0.5]).unwrap(),
        ];
        for m in &models {
            let s = m.range_stats(0.0, 1.0);
            assert!(
                s.mass.lo <= 1.0 && 1.0 <= s.mass.hi + 1e-9,
                "{}: mass {:?}",
                m.spec_string(),
                s.mass
            );
        }
    }

    #[test]
    fn geometric_band_closed_form() {
        let p = 0.31f64;
        let geo = DistributionModel::geometric(p).unwrap();
        for j in [1u64, 2, 5, 9] {
            let th = geo.pmf(j).unwrap().midpoint();
            let band = geo.range_stats(th * 0.9999999, 1.0);
            let want = 1.0 - (1.0 - p).powi(j as i32);
            assert!((band.mass.midpoint() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_stats_exact() {
        let d = DistributionModel::explicit(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let s = d.range_stats(0.15, 0.35);
        assert_eq!(s.count.midpoint(), 2.0);
        assert!((s.mass.midpoint() - 0.5).abs() < 1e-15);
        assert!((s.sq_mass.midpoint() - 0.13).abs() < 1e-15);
        let ent = 0.2 * (5.0f64).log2() + 0.3 * (1.0 / 0.3f64).log2();
        assert!((s.neg_entropy_mass.midpoint() - ent).abs() < 1e-12);
    }

    #[test]
    fn iid_entropy_examples() {
        let u8_ = DistributionModel::uniform_k(8).unwrap();
        assert_eq!(u8_.iid_entropy().midpoint(), 3.0);

        let geo = DistributionModel::geometric(0.8).unwrap();
        assert!((geo.iid_entropy().midpoint() - 0.902_410_118).abs() < 1e-8);

        let slow = DistributionModel::slow_integer(0.5).unwrap();
        assert!(slow.iid_entropy().is_infinite());
        let slow2 = DistributionModel::slow_integer(2.0).unwrap();
        let h = slow2.iid_entropy();
        assert!(h.lo > 0.0 && h.hi.is_finite() && h.width() < 1e-6, "{h:?}");

        let zipf = DistributionModel::zipf(1.0).unwrap();
        let h = zipf.iid_entropy();
        assert!(h.width() < 1e-6 && h.lo > 0.0);
        // zeta-bracket sanity from the displayed inequality
        let z = zeta_bracket(2.0);
        assert!(1.5 <= z.lo && z.hi <= 1.75);
    }

    #[test]
    fn linear_entropy_matches_closed_form() {
        // H = log2(n/lambda) + log2(sqrt(e)/2) + small
        let n = 1000u64;
        let lambda = 2.0;
        let d = DistributionModel::linear(lambda, n).unwrap();
        let h = d.iid_entropy();
        let sqrt_e_over_2 = (std::f64::consts::E.sqrt() / 2.0).log2();
        let closed = (n as f64 / lambda).log2() + sqrt_e_over_2;
        assert!((h.midpoint() - closed).abs() < 0.02, "{} vs {closed}", h.midpoint());
        // and the bracket from the large-k path agrees with the closed form
        let big = DistributionModel::linear(1.0, 1 << 24).unwrap();
        let hb = big.iid_entropy();
        let closed_big = ((1u64 << 24) as f64).log2() + sqrt_e_over_2;
        assert!((hb.midpoint() - closed_big).abs() < 0.01);
    }

    #[test]
    fn expected_distinct_uniform() {
        // L over the whole band for uniform k = n = 100 contains 100(1-0.99^100)
        let d = DistributionModel::uniform_k(100).unwrap();
        let l = d.expected_distinct(0.0, 1.0, 100);
        let want = 100.0 * (1.0 - 0.99f64.powi(100));
        assert!(l.contains(want), "{l:?} vs {want}");
        assert!((l.midpoint() - 63.40).abs() < 0.01);
    }

    #[test]
    fn parse_grammar() {
        assert!(DistributionModel::parse("uniform:k=100", None).is_ok());
        assert!(DistributionModel::parse("uniform:lambda=1,n=1000", None).is_ok());
        assert!(DistributionModel::parse("uniform:lambda=1", Some(500)).is_ok());
        assert!(DistributionModel::parse("slowint:gamma=0.5", None).is_ok());
        assert!(DistributionModel::parse("zipf:gamma=1", None).is_ok());
        assert!(DistributionModel::parse("geom:p=0.05", None).is_ok());
        assert!(DistributionModel::parse("linear:lambda=2,n=1000", None).is_ok());
        assert!(DistributionModel::parse("geom:q=0.05", None).is_err());
        assert!(DistributionModel::parse("nope:p=1", None).is_err());
        // n/lambda must round to an integer
        assert!(DistributionModel::uniform_rate(3.0, 1000).is_err());
        assert!(DistributionModel::explicit(vec![0.5, 0.6]).is_err());
        assert!(DistributionModel::explicit(vec![0.5, -0.5, 1.0]).is_err());
    }

    #[test]
    fn slow_integer_fixed_point_matches_scan() {
        let d = DistributionModel::slow_integer(1.0).unwrap();
        let alpha = d.normalizer().midpoint();
        for x in [1e-3, 1e-5, 1e-8] {
            let j = d.first_index_leq(x).unwrap();
            assert!(d.pmf(j).unwrap().midpoint() <= x);
            assert!(j == 2 || d.pmf(j - 1).unwrap().midpoint() > x);
            let fp = slow_integer_index_fixed_point(alpha, 1.0, x);
            assert!((fp - j as f64).abs() <= 2.0, "fp {fp} vs scan {j}");
        }
    }
}
