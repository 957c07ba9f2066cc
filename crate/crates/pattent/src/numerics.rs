//! Shared rigorous-numerics utilities.
//!
//! Everything here works in bits (logarithms base 2). Quantities that cannot
//! be evaluated exactly are bracketed by an [`EntropyInterval`]; interval
//! endpoints are nudged outward by one ulp after each arithmetic step so that
//! the exact real result always lies inside the reported interval.

use crate::{Error, Result};

pub const LOG2_E: f64 = std::f64::consts::LOG2_E;
pub const LN_2: f64 = std::f64::consts::LN_2;

/// Round `x` one step toward -inf.
#[inline]
pub fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

/// Round `x` one step toward +inf.
#[inline]
pub fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

/// Two-sided bracket `[lo, hi]` on a real quantity, in bits.
///
/// A degenerate interval (`lo == hi`) represents an exactly known value.
/// The interval does not store a direction; whoever assembles a bound picks
/// the endpoint that keeps the assembled inequality valid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyInterval {
    pub lo: f64,
    pub hi: f64,
}

impl EntropyInterval {
    pub const ZERO: EntropyInterval = EntropyInterval { lo: 0.0, hi: 0.0 };
    /// Distinguished value for quantities that are exactly +infinity
    /// (e.g. the i.i.d. entropy of slowly decaying integer distributions).
    pub const INFINITE: EntropyInterval = EntropyInterval {
        lo: f64::INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "interval endpoints out of order: [{lo}, {hi}]");
        EntropyInterval { lo: lo.min(hi), hi: lo.max(hi) }
    }

    /// Exactly known value.
    pub fn point(x: f64) -> Self {
        EntropyInterval { lo: x, hi: x }
    }

    /// Interval from two endpoint candidates in either order.
    pub fn from_unordered(a: f64, b: f64) -> Self {
        EntropyInterval { lo: a.min(b), hi: a.max(b) }
    }

    pub fn is_infinite(&self) -> bool {
        self.lo == f64::INFINITY && self.hi == f64::INFINITY
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            0.5 * (self.lo + self.hi)
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        EntropyInterval {
            lo: down(self.lo + other.lo),
            hi: up(self.hi + other.hi),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        EntropyInterval {
            lo: down(self.lo - other.hi),
            hi: up(self.hi - other.lo),
        }
    }

    pub fn neg(&self) -> Self {
        EntropyInterval { lo: -self.hi, hi: -self.lo }
    }

    /// Multiply by an exactly known scalar.
    pub fn scale(&self, c: f64) -> Self {
        if c >= 0.0 {
            EntropyInterval { lo: down(c * self.lo), hi: up(c * self.hi) }
        } else {
            EntropyInterval { lo: down(c * self.hi), hi: up(c * self.lo) }
        }
    }

    /// Full interval product (corner evaluation).
    pub fn mul(&self, other: &Self) -> Self {
        let c = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        EntropyInterval { lo: down(lo), hi: up(hi) }
    }

    /// Intersect with another bracket of the same quantity; both must be
    /// valid, so an empty intersection signals an internal inconsistency and
    /// falls back to the tighter-endpoint combination.
    pub fn intersect(&self, other: &Self) -> Self {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            EntropyInterval { lo, hi }
        } else {
            // Disagreement beyond rounding: keep a thin interval around the
            // crossover rather than returning an inverted bracket.
            EntropyInterval { lo: hi, hi: lo }
        }
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        EntropyInterval {
            lo: self.lo.clamp(lo, hi),
            hi: self.hi.clamp(lo, hi),
        }
    }
}

/// Neumaier compensated accumulator for long sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct StableSum {
    sum: f64,
    comp: f64,
}

impl StableSum {
    pub fn new() -> Self {
        StableSum { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum with the magnitudes sorted ascending, compensated. Used where many
/// terms of mixed size accumulate (exact pattern entropies near the caps).
pub fn stable_sorted_sum(terms: &mut Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    let mut acc = StableSum::new();
    for &t in terms.iter() {
        acc.add(t);
    }
    acc.value()
}

/// Binary entropy `h2(x) = -x log2 x - (1-x) log2(1-x)` in bits.
///
/// Returns 0 at the endpoints by continuity; rejects arguments outside
/// `[0, 1]`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::Domain(format!("binary_entropy argument {x} outside [0, 1]")));
    }
    Ok(h2(x))
}

/// Total version of [`binary_entropy`] for call sites whose argument is
/// already known to be a probability (tiny negative rounding slop is clamped).
#[inline]
pub fn h2(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -(x * x.log2()) - (1.0 - x) * (1.0 - x).log2()
}

/// Maximum of `h2` over `[lo, hi] ∩ [0, 1]`.
pub fn h2_max_over(lo: f64, hi: f64) -> f64 {
    let lo = lo.clamp(0.0, 1.0);
    let hi = hi.clamp(0.0, 1.0);
    if lo <= 0.5 && 0.5 <= hi {
        1.0
    } else {
        h2(lo).max(h2(hi))
    }
}

/// Interval image of `x -> -x log2 x` over a probability interval.
/// The map is unimodal with maximum at `1/e`.
pub fn neg_xlogx_interval(x: &EntropyInterval) -> EntropyInterval {
    let f = |t: f64| -> f64 {
        let t = t.clamp(0.0, 1.0);
        if t == 0.0 {
            0.0
        } else {
            -t * t.log2()
        }
    };
    let inv_e = 1.0 / std::f64::consts::E;
    let lo = f(x.lo).min(f(x.hi));
    let hi = if x.lo <= inv_e && inv_e <= x.hi {
        f(inv_e)
    } else {
        f(x.lo).max(f(x.hi))
    };
    EntropyInterval { lo: down(lo), hi: up(hi) }
}

const EXACT_FACTORIAL_LIMIT: usize = 10_000;

fn log2_factorial_table() -> &'static [f64] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(EXACT_FACTORIAL_LIMIT + 1);
        let mut acc = StableSum::new();
        t.push(0.0);
        for j in 1..=EXACT_FACTORIAL_LIMIT {
            acc.add((j as f64).log2());
            t.push(acc.value());
        }
        t
    })
}

/// Stirling bracket `sqrt(2 pi m) (m/e)^m <= m! <= sqrt(2 pi m) (m/e)^m e^{1/(12m)}`
/// converted to bits; valid for all real `m > 0`.
fn stirling_log2_factorial(m: f64) -> EntropyInterval {
    let ln_lo = 0.5 * (2.0 * std::f64::consts::PI * m).ln() + m * (m.ln() - 1.0);
    let lo = ln_lo * LOG2_E;
    let hi = (ln_lo + 1.0 / (12.0 * m)) * LOG2_E;
    EntropyInterval { lo: down(down(lo)), hi: up(up(hi)) }
}

/// `log2(m!)` as a two-sided bracket.
///
/// Integer `m <= 10^4` is summed exactly (degenerate interval); larger or
/// non-integer arguments use the Stirling bracket, intersected with the
/// monotone bracket `log2(floor(m)!) <= log2 Gamma(m+1) <= log2(ceil(m)!)`
/// when that is available and tighter.
pub fn log_factorial(m: f64) -> Result<EntropyInterval> {
    if m < 0.0 || m.is_nan() {
        return Err(Error::Domain(format!("log_factorial argument {m} is negative")));
    }
    if m == 0.0 {
        return Ok(EntropyInterval::ZERO);
    }
    let is_int = m.fract() == 0.0;
    if is_int && m <= EXACT_FACTORIAL_LIMIT as f64 {
        let v = log2_factorial_table()[m as usize];
        return Ok(EntropyInterval::point(v));
    }
    if m < 2.0 {
        // Gamma(m+1) on (1, 3) stays within [Gamma(1.4616..), max(1, Gamma(m+1))];
        // the global minimum of Gamma is 0.8856031944...
        let lo = (0.885_603_194_410_888_f64).log2();
        let hi = if m <= 1.0 { 0.0 } else { log2_factorial_table()[2] };
        return Ok(EntropyInterval { lo: down(lo), hi: up(hi) });
    }
    let mut iv = stirling_log2_factorial(m);
    if !is_int && m <= EXACT_FACTORIAL_LIMIT as f64 {
        let neighbor = EntropyInterval {
            lo: log2_factorial_table()[m.floor() as usize],
            hi: log2_factorial_table()[m.ceil() as usize],
        };
        iv = iv.intersect(&neighbor);
    }
    Ok(iv)
}

/// `log2 C(a, b)` bracket via factorial brackets.
pub fn log_binomial(a: f64, b: f64) -> Result<EntropyInterval> {
    if b < 0.0 || a < b {
        return Err(Error::Domain(format!("log_binomial({a}, {b}) outside domain")));
    }
    let fa = log_factorial(a)?;
    let fb = log_factorial(b)?;
    let fab = log_factorial(a - b)?;
    Ok(fa.sub(&fb).sub(&fab).clamp(0.0, f64::INFINITY))
}

/// A positive decreasing summand together with its exact tail integral,
/// as needed by [`tail_integral_bounds`].
pub trait TailFunction {
    /// Evaluate the summand at (real) argument `x`.
    fn eval(&self, x: f64) -> f64;
    /// Exact value of the integral of the summand from `x` to +infinity,
    /// or `None` when it diverges.
    fn integral_from(&self, x: f64) -> Option<f64>;
}

impl<F, G> TailFunction for (F, G)
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> Option<f64>,
{
    fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }
    fn integral_from(&self, x: f64) -> Option<f64> {
        (self.1)(x)
    }
}

/// Sum-vs-integral bracket for the tail of a series with a positive,
/// decreasing summand:
/// `integral_from(m) <= sum_{j >= m} f(j) <= f(m) + integral_from(m)`.
pub fn tail_integral_bounds<T: TailFunction>(f: &T, from: f64) -> Result<EntropyInterval> {
    let integral = f
        .integral_from(from)
        .ok_or_else(|| Error::Divergent(format!("tail integral from {from} diverges")))?;
    if !integral.is_finite() {
        return Err(Error::Divergent(format!("tail integral from {from} diverges")));
    }
    let head = f.eval(from);
    Ok(EntropyInterval {
        lo: down(integral),
        hi: up(integral + head),
    })
}

/// Sharper tail bracket for a summand that is also convex on `[m - 1/2, inf)`:
/// the trapezoid rule overestimates integrals of convex functions and the
/// midpoint rule underestimates them, giving
/// `int_m f + f(m)/2 <= sum_{j >= m} f(j) <= int_{m-1/2} f`.
pub fn tail_integral_bounds_convex<T: TailFunction>(f: &T, from: f64) -> Result<EntropyInterval> {
    let int_m = f
        .integral_from(from)
        .ok_or_else(|| Error::Divergent(format!("tail integral from {from} diverges")))?;
    let int_half = f
        .integral_from(from - 0.5)
        .ok_or_else(|| Error::Divergent(format!("tail integral from {from} diverges")))?;
    if !int_m.is_finite() || !int_half.is_finite() {
        return Err(Error::Divergent(format!("tail integral from {from} diverges")));
    }
    let lo = int_m + 0.5 * f.eval(from);
    Ok(EntropyInterval {
        lo: down(lo.min(int_half)),
        hi: up(int_half.max(lo)),
    })
}

/// Convex-refined bracket for a finite trailing block:
/// `int_m^{b+1} f + (f(m) - f(b+1))/2 <= sum_{j=m}^{b} f(j)
///  <= int_{m-1/2}^{b+1/2} f`.
pub fn range_integral_bounds_convex<T: TailFunction>(
    f: &T,
    m: f64,
    b: f64,
) -> Result<EntropyInterval> {
    if b < m {
        return Ok(EntropyInterval::ZERO);
    }
    let int_from = |x: f64| -> Result<f64> {
        f.integral_from(x)
            .ok_or_else(|| Error::Divergent(format!("integral from {x} diverges")))
    };
    let lo = int_from(m)? - int_from(b + 1.0)? + 0.5 * (f.eval(m) - f.eval(b + 1.0));
    let hi = int_from(m - 0.5)? - int_from(b + 0.5)?;
    Ok(EntropyInterval {
        lo: down(lo.max(0.0).min(hi)),
        hi: up(hi.max(lo).max(0.0)),
    })
}

/// Bracket for a finite trailing block `sum_{j=m}^{b} f(j)` of a decreasing
/// positive summand: `int_m^{b+1} f <= sum <= f(m) + int_m^b f`.
pub fn range_integral_bounds<T: TailFunction>(f: &T, m: f64, b: f64) -> Result<EntropyInterval> {
    if b < m {
        return Ok(EntropyInterval::ZERO);
    }
    let int_from = |x: f64| -> Result<f64> {
        f.integral_from(x)
            .ok_or_else(|| Error::Divergent(format!("integral from {x} diverges")))
    };
    let lo = int_from(m)? - int_from(b + 1.0)?;
    let hi = f.eval(m) + int_from(m)? - int_from(b)?;
    Ok(EntropyInterval { lo: down(lo.max(0.0)), hi: up(hi) })
}
