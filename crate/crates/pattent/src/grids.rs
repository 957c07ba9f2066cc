//! Probability grids over `[0, 1]` and per-bin statistics.
//!
//! Two grid families partition the probability axis: the eta-grid (used by
//! the upper bound) with two dedicated low-probability points and quadratic
//! spacing above them, and the xi-grid (used by the lower bound) with purely
//! quadratic spacing. Symbols whose probabilities share a bin are
//! index-exchangeable up to a small probability distortion, which is what
//! the entropy bounds exploit.
//!
//! Grid points are generated on demand; bin statistics enumerate only the
//! populated bins, walking symbol index ranges with the closed-form boundary
//! index helpers of each family.

use crate::distributions::DistributionModel;
use crate::numerics::EntropyInterval;
use crate::{Error, Result};

/// The eta-grid: `eta_0 = 0`, `eta_1 = n^-(1+eps0)`, `eta_2 = n^-(1+eps1)`,
/// and `eta_b = b'^2 / n^(1+eps2)` with `b' = b + shift - 2` for `b >= 3`,
/// where `shift = floor(n^((eps2-eps1)/2))`.
#[derive(Debug, Clone)]
pub struct EtaGrid {
    pub n: u64,
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// `floor(n^((eps2-eps1)/2))`.
    pub shift: u64,
    /// `B_eta`: index of the last grid point below 1; `point(b_max + 1) = 1`.
    pub b_max: usize,
    /// `A_eta`: largest index whose grid point does not exceed 0.5.
    pub a_max: usize,
}

/// The xi-grid: `xi_b = b^2 / n^(1-eps)`.
#[derive(Debug, Clone)]
pub struct XiGrid {
    pub n: u64,
    /// `eps = -eps1 > 0` for the lower bound; the formula also admits
    /// `eps <= 0`.
    pub eps: f64,
    /// `B_xi = floor(sqrt(n^(1-eps)))`; `point(b_max + 1) = 1`.
    pub b_max: usize,
    /// `A_xi = floor(sqrt(n^(1-eps))/sqrt(2))`.
    pub a_max: usize,
}

pub fn build_eta_grid(n: u64, eps0: f64, eps1: f64, eps2: f64) -> Result<EtaGrid> {
    if n < 2 {
        return Err(Error::InvalidGrid("eta grid needs n >= 2".into()));
    }
    if !(eps0 >= 0.0f64.max(eps1)) || !(eps2 >= 0.0f64.max(eps1)) {
        return Err(Error::InvalidGrid(format!(
            "need eps0 >= max(0, eps1) and eps2 >= max(0, eps1); got ({eps0}, {eps1}, {eps2})"
        )));
    }
    let nf = n as f64;
    let shift = nf.powf((eps2 - eps1) / 2.0).floor();
    if !(shift >= 1.0) || shift > 9e15 {
        return Err(Error::InvalidGrid(format!("degenerate shift {shift}")));
    }
    let b_max_f = nf.powf((1.0 + eps2) / 2.0).floor() - shift + 2.0;
    if b_max_f < 2.0 || b_max_f > 2e9 {
        return Err(Error::InvalidGrid(format!("B_eta = {b_max_f} out of range")));
    }
    let mut grid = EtaGrid {
        n,
        eps0,
        eps1,
        eps2,
        shift: shift as u64,
        b_max: b_max_f as usize,
        a_max: 0,
    };
    // monotonicity of the low points and the splice into the quadratic part
    let e1 = grid.point(1);
    let e2 = grid.point(2);
    if !(e1 > 0.0) || !(e2 > e1) {
        return Err(Error::InvalidGrid(format!(
            "grid points collapse: eta1 = {e1}, eta2 = {e2} (need eps0 > eps1)"
        )));
    }
    if grid.b_max >= 3 && !(grid.point(3) > e2) {
        return Err(Error::InvalidGrid(format!(
            "eta3 = {} does not exceed eta2 = {e2}",
            grid.point(3)
        )));
    }
    grid.a_max = grid.largest_at_most(0.5);
    Ok(grid)
}

impl EtaGrid {
    /// Grid point `eta_b`; `b = b_max + 1` (and anything beyond) yields 1.
    pub fn point(&self, b: usize) -> f64 {
        let nf = self.n as f64;
        match b {
            0 => 0.0,
            1 => nf.powf(-(1.0 + self.eps0)),
            2 => nf.powf(-(1.0 + self.eps1)),
            b if b <= self.b_max => {
                let bp = b as f64 + self.shift as f64 - 2.0;
                (bp * bp) / nf.powf(1.0 + self.eps2)
            }
            _ => 1.0,
        }
    }

    /// `b' = b + shift - 2` for the quantization term of the upper bound.
    pub fn b_prime(&self, b: usize) -> f64 {
        b as f64 + self.shift as f64 - 2.0
    }

    /// Largest index `b <= b_max` with `point(b) <= x`.
    fn largest_at_most(&self, x: f64) -> usize {
        if self.point(self.b_max) <= x {
            return self.b_max;
        }
        let (mut lo, mut hi) = (0usize, self.b_max);
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.point(mid) <= x {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Bin index holding probability `th`, i.e. `b` with
    /// `point(b) < th <= point(b+1)`.
    pub fn bin_of(&self, th: f64) -> usize {
        if th <= self.point(1) {
            return 0;
        }
        if th <= self.point(2) {
            return 1;
        }
        if th > self.point(self.b_max) {
            return self.b_max;
        }
        // point(b) < th  <=>  b' < sqrt(th n^(1+eps2))
        let nf = self.n as f64;
        let root = (th * nf.powf(1.0 + self.eps2)).sqrt();
        let mut b = (root.ceil() - self.shift as f64 + 2.0 - 1.0).max(2.0) as usize;
        b = b.min(self.b_max);
        while b > 2 && self.point(b) >= th {
            b -= 1;
        }
        while b < self.b_max && self.point(b + 1) < th {
            b += 1;
        }
        b
    }
}

pub fn build_xi_grid(n: u64, eps: f64) -> Result<XiGrid> {
    if n < 2 {
        return Err(Error::InvalidGrid("xi grid needs n >= 2".into()));
    }
    let nf = n as f64;
    let root = nf.powf((1.0 - eps) / 2.0);
    if !(root >= 1.0) || root > 2e9 {
        return Err(Error::InvalidGrid(format!(
            "B_xi = {} out of range (eps = {eps})",
            root.floor()
        )));
    }
    Ok(XiGrid {
        n,
        eps,
        b_max: root.floor() as usize,
        a_max: (root / std::f64::consts::SQRT_2).floor() as usize,
    })
}

impl XiGrid {
    /// Grid point `xi_b = b^2 / n^(1-eps)`; indices past `b_max` yield 1.
    pub fn point(&self, b: usize) -> f64 {
        if b == 0 {
            return 0.0;
        }
        if b > self.b_max {
            return 1.0;
        }
        let nf = self.n as f64;
        (b as f64) * (b as f64) / nf.powf(1.0 - self.eps)
    }

    /// Bin index holding probability `th` (`xi_b < th <= xi_{b+1}`).
    pub fn bin_of(&self, th: f64) -> usize {
        if th <= self.point(1) {
            return 0;
        }
        if th > self.point(self.b_max) {
            return self.b_max;
        }
        let nf = self.n as f64;
        let root = (th * nf.powf(1.0 - self.eps)).sqrt();
        let mut b = (root.ceil() - 1.0).max(1.0) as usize;
        b = b.min(self.b_max);
        while b > 1 && self.point(b) >= th {
            b -= 1;
        }
        while b < self.b_max && self.point(b + 1) < th {
            b += 1;
        }
        b
    }
}

/// Statistics of one populated bin.
#[derive(Debug, Clone)]
pub struct PopulatedBin {
    pub bin: usize,
    /// `k_b` (eta) or `kappa_b` (xi).
    pub count: EntropyInterval,
    /// `kappa'_b`: symbols in `(xi_{b-1}, xi_{b+2}]` (xi-grids, `b >= 1`;
    /// `(xi_1, xi_3]` for `b = 1`).
    pub overlap_count: Option<EntropyInterval>,
    /// `phi_b`.
    pub mass: EntropyInterval,
    /// `L_b`: expected number of distinct bin symbols occurring in `X^n`.
    pub expected_distinct: EntropyInterval,
}

/// Per-bin populations, masses and expected-distinct counts for one grid.
///
/// `bins` lists populated bins above the low-probability region (eta: `b >=
/// 2`, xi: `b >= 1`) in increasing bin order. The low region is summarized by
/// the aggregates: for an eta-grid `phi0`/`phi1` are the bin-0/bin-1 masses
/// and the `01` aggregates cover `(0, eta_2]`; for a xi-grid the `01`
/// aggregates cover `(0, xi_1]` (the region the lower bound packs into one
/// point mass, so `phi0 = phi01` there) and `phi1` is the mass of xi-bin 1.
#[derive(Debug, Clone)]
pub struct BinStats {
    pub bins: Vec<PopulatedBin>,
    pub k01: EntropyInterval,
    pub phi0: EntropyInterval,
    pub phi1: EntropyInterval,
    pub phi01: EntropyInterval,
    pub l01: EntropyInterval,
}

/// Grid views accepted by [`bin_stats`].
pub enum GridRef<'a> {
    Eta(&'a EtaGrid),
    Xi(&'a XiGrid),
}

impl<'a> GridRef<'a> {
    fn point(&self, b: usize) -> f64 {
        match self {
            GridRef::Eta(g) => g.point(b),
            GridRef::Xi(g) => g.point(b),
        }
    }
    fn bin_of(&self, th: f64) -> usize {
        match self {
            GridRef::Eta(g) => g.bin_of(th),
            GridRef::Xi(g) => g.bin_of(th),
        }
    }
    fn low_region_top_index(&self) -> usize {
        match self {
            GridRef::Eta(_) => 2,
            GridRef::Xi(_) => 1,
        }
    }
    fn n(&self) -> u64 {
        match self {
            GridRef::Eta(g) => g.n,
            GridRef::Xi(g) => g.n,
        }
    }
}

/// Populate per-bin statistics for `dist` on `grid`.
///
/// `n` must match the grid's `n`. Only populated bins above the
/// low-probability region are materialized; bins of infinite-support
/// distributions above the largest populated index never get scanned.
pub fn bin_stats(dist: &DistributionModel, grid: GridRef<'_>, n: u64) -> Result<BinStats> {
    if n != grid.n() {
        return Err(Error::InvalidGrid(format!(
            "grid built for n = {}, queried with n = {n}",
            grid.n()
        )));
    }
    let low_top = grid.point(grid.low_region_top_index());
    let mut bins: Vec<PopulatedBin> = Vec::new();

    // walk populated bins above the low region by splitting the probability
    // axis at grid points; start from the bin holding the largest probability
    let largest = largest_probability(dist);
    if largest > low_top {
        let mut b = grid.bin_of(largest);
        loop {
            let lo = grid.point(b).max(low_top);
            let hi = grid.point(b + 1);
            let stats = dist.range_stats(lo, hi);
            if stats.count.hi > 0.0 {
                bins.push(PopulatedBin {
                    bin: b,
                    count: stats.count,
                    overlap_count: None,
                    mass: stats.mass,
                    expected_distinct: dist.expected_distinct(lo, hi, n),
                });
            }
            if grid.point(b) <= low_top || b == 0 {
                break;
            }
            // skip empty stretches: jump to the bin of the next lower symbol
            match largest_probability_at_most(dist, grid.point(b)) {
                Some(th) if th > low_top => {
                    b = grid.bin_of(th);
                }
                _ => break,
            }
        }
        bins.reverse();
    }

    // overlap counters for xi-grids
    if let GridRef::Xi(g) = grid {
        for pb in bins.iter_mut() {
            let b = pb.bin;
            if b == 0 {
                continue;
            }
            let (lo, hi) = if b == 1 {
                (g.point(1), g.point(3))
            } else {
                (g.point(b - 1), g.point(b + 2))
            };
            pb.overlap_count = Some(dist.band_count(lo, hi));
        }
    }

    let phi0 = dist.range_stats(0.0, grid.point(1)).mass;
    let phi1 = dist.range_stats(grid.point(1), grid.point(2)).mass;
    let low = dist.range_stats(0.0, low_top);
    Ok(BinStats {
        bins,
        k01: low.count,
        phi0,
        phi1,
        phi01: low.mass.clamp(0.0, 1.0),
        l01: dist.expected_distinct(0.0, low_top, n),
    })
}

fn largest_probability(dist: &DistributionModel) -> f64 {
    match dist.support_size() {
        Some(k) => dist
            .pmf(k)
            .map(|iv| iv.hi)
            .unwrap_or(0.0)
            .max(dist.pmf(1).map(|iv| iv.hi).unwrap_or(0.0)),
        None => dist
            .pmf(dist.support_start())
            .map(|iv| iv.hi)
            .unwrap_or(0.0),
    }
}

/// Largest probability value at most `x` (the top of the next populated
/// stretch at or below `x`); `None` when nothing lies at or below `x`.
fn largest_probability_at_most(dist: &DistributionModel, x: f64) -> Option<f64> {
    let stats = dist.range_stats(0.0, x);
    if stats.count.hi <= 0.0 {
        return None;
    }
    if dist.support_size().is_none() {
        let j = dist.first_index_leq(x)?;
        return dist.pmf(j).ok().map(|iv| iv.midpoint());
    }
    // finite families: bisect down the probability axis
    let mut lo = 0.0f64;
    let mut hi = x;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist.range_stats(mid, x).count.hi > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1e-300) {
            break;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionModel;

    #[test]
    fn eta_grid_example() {
        // n=100, eps0=0.1, eps1=-0.1, eps2=0.2
        let g = build_eta_grid(100, 0.1, -0.1, 0.2).unwrap();
        assert!((g.point(1) - 100f64.powf(-1.1)).abs() < 1e-12);
        assert!((g.point(1) - 0.00631).abs() < 1e-5);
        assert!((g.point(2) - 0.015849).abs() < 1e-6);
        assert_eq!(g.shift, 1); // floor(100^0.15) = 1
        assert!((g.point(3) - 4.0 / 100f64.powf(1.2)).abs() < 1e-12);
        assert!((g.point(3) - 0.015924).abs() < 1e-6);
        assert_eq!(g.b_max, 16);
        assert_eq!(g.point(17), 1.0);
        for b in 0..=g.b_max {
            assert!(g.point(b) < g.point(b + 1), "b={b}");
        }
        assert!(g.point(g.a_max) <= 0.5 && g.point(g.a_max + 1) > 0.5);
    }

    #[test]
    fn eta_grid_rejects_degenerate() {
        assert!(build_eta_grid(100, 0.0, 0.0, 0.0).is_err());
        assert!(build_eta_grid(1, 0.1, -0.1, 0.2).is_err());
        assert!(build_eta_grid(100, -0.5, -0.1, 0.2).is_err());
    }

    #[test]
    fn eta_grid_reduces_to_single_eps_form() {
        for (n, eps) in [(10_000u64, 0.1f64), (1000, 0.2), (250, 0.15)] {
            let g = build_eta_grid(n, eps, -eps, 2.0 * eps).unwrap();
            let nf = n as f64;
            let shift = nf.powf(1.5 * eps).floor();
            for b in 3..=g.b_max.min(50) {
                let bp = b as f64 + shift - 2.0;
                let want = bp * bp / nf.powf(1.0 + 2.0 * eps);
                assert!((g.point(b) - want).abs() <= 1e-14 * want);
            }
            let b_eta = (nf.powf((1.0 + 2.0 * eps) / 2.0).floor() - shift + 2.0) as usize;
            assert_eq!(g.b_max, b_eta);
        }
    }

    #[test]
    fn xi_grid_examples() {
        let g = build_xi_grid(100, 0.1).unwrap();
        assert!((g.point(1) - 0.015849).abs() < 1e-6);
        assert_eq!(g.b_max, 7);
        assert_eq!(g.a_max, 5);

        let g0 = build_xi_grid(100, 0.0).unwrap();
        assert_eq!(g0.b_max, 10);
        for b in 1..=10usize {
            assert!((g0.point(b) - (b * b) as f64 / 100.0).abs() < 1e-15);
        }

        // grid used by the slow-integer recipe
        let n = 1_000_000u64;
        let eps = 1.7 * (n as f64).ln().ln() / (n as f64).ln();
        let g = build_xi_grid(n, eps).unwrap();
        assert_eq!(g.b_max, (n as f64).powf((1.0 - eps) / 2.0).floor() as usize);
        assert!(g.point(1) > 1.0 / n as f64);
    }

    #[test]
    fn bin_of_consistency() {
        let g = build_eta_grid(1000, 0.3, -0.2, 0.4).unwrap();
        for &th in &[1e-4, 3.2e-3, 0.011, 0.09, 0.4, 0.77, 0.9999] {
            let b = g.bin_of(th);
            assert!(g.point(b) < th && th <= g.point(b + 1), "th={th} b={b}");
        }
        let x = build_xi_grid(1000, 0.25).unwrap();
        for &th in &[1e-4, 3.2e-3, 0.011, 0.09, 0.4, 0.77, 0.9999] {
            let b = x.bin_of(th);
            assert!(x.point(b) < th && th <= x.point(b + 1), "th={th} b={b}");
        }
    }

    #[test]
    fn uniform_bin_stats_expected_distinct() {
        // uniform k=n=100 on the eps=0 xi grid: theta = 0.01 lies exactly on
        // xi_1, and the half-open band semantics put it in the bin below the
        // boundary (bin 0). L for that bin contains 100 (1 - 0.99^100) = 63.40.
        let d = DistributionModel::uniform_k(100).unwrap();
        let g = build_xi_grid(100, 0.0).unwrap();
        let stats = bin_stats(&d, GridRef::Xi(&g), 100).unwrap();
        let want = 100.0 * (1.0 - 0.99f64.powi(100));
        assert!((want - 63.40).abs() < 0.01);
        assert!(stats.l01.contains(want), "{:?}", stats.l01);
        assert_eq!(stats.k01.midpoint(), 100.0);
        assert!(stats.bins.iter().all(|b| b.count.hi == 0.0 || b.bin == 0));

        // nudging the boundary below the atom moves everything into xi-bin 1
        let g = build_xi_grid(100, -0.01).unwrap();
        let stats = bin_stats(&d, GridRef::Xi(&g), 100).unwrap();
        let populated: Vec<_> = stats.bins.iter().filter(|b| b.count.hi > 0.0).collect();
        assert_eq!(populated.len(), 1);
        assert!(populated[0].expected_distinct.contains(want));
        assert_eq!(populated[0].count.midpoint(), 100.0);
    }

    #[test]
    fn geometric_k1_bracket() {
        // Bin-1 count of the eta grid obeys the closed-form bracket
        // log[n^(e0-e1)(1-p)]/(-log(1-p)) <= k1 <= log[n^(e0-e1)/(1-p)]/(-log(1-p))
        let p = 0.5f64;
        let n = 100u64;
        let (eps0, eps1) = (0.4f64, -0.2f64);
        let d = DistributionModel::geometric(p).unwrap();
        let g = build_eta_grid(n, eps0, eps1, 0.4).unwrap();
        let k1 = d.range_stats(g.point(1), g.point(2)).count.midpoint();
        let nf = n as f64;
        let denom = -(1.0 - p).log2();
        let lo = (nf.powf(eps0 - eps1) * (1.0 - p)).log2() / denom;
        let hi = (nf.powf(eps0 - eps1) / (1.0 - p)).log2() / denom;
        assert!(lo - 1e-9 <= k1 && k1 <= hi + 1e-9, "{lo} <= {k1} <= {hi}");
    }

    #[test]
    fn explicit_overlap_counts() {
        let d = DistributionModel::explicit(vec![0.2, 0.8]).unwrap();
        let n = 16u64;
        let g = build_xi_grid(n, 0.1).unwrap();
        let stats = bin_stats(&d, GridRef::Xi(&g), n).unwrap();
        assert!(!stats.bins.is_empty());
        for pb in &stats.bins {
            let b = pb.bin;
            if b == 0 {
                continue;
            }
            let (lo, hi) = if b == 1 {
                (g.point(1), g.point(3))
            } else {
                (g.point(b - 1), g.point(b + 2))
            };
            let direct = [0.2f64, 0.8]
                .iter()
                .filter(|&&t| t > lo && t <= hi)
                .count() as f64;
            assert_eq!(pb.overlap_count.unwrap().midpoint(), direct, "bin {b}");
        }
    }

    #[test]
    fn mass_partition_contains_one() {
        let models = [
            DistributionModel::geometric(0.3).unwrap(),
            DistributionModel::zipf(1.0).unwrap(),
            DistributionModel::slow_integer(0.8).unwrap(),
            DistributionModel::uniform_k(50).unwrap(),
            DistributionModel::explicit(vec![0.1, 0.4, 0.5]).unwrap(),
        ];
        for d in &models {
            let n = 200u64;
            let g = build_eta_grid(n, 0.2, -0.15, 0.3).unwrap();
            let stats = bin_stats(d, GridRef::Eta(&g), n).unwrap();
            let mut lo = stats.phi01.lo;
            let mut hi = stats.phi01.hi;
            for pb in &stats.bins {
                lo += pb.mass.lo;
                hi += pb.mass.hi;
            }
            assert!(
                lo <= 1.0 + 1e-9 && 1.0 <= hi + 1e-9,
                "{}: [{lo}, {hi}]",
                d.spec_string()
            );
            for pb in &stats.bins {
                assert!(pb.expected_distinct.lo >= -1e-12);
                assert!(pb.expected_distinct.hi <= pb.count.hi + 1e-9);
            }
        }
    }

    #[test]
    fn explicit_expected_distinct_in_interval() {
        let theta = vec![0.05, 0.15, 0.35, 0.45];
        let d = DistributionModel::explicit(theta.clone()).unwrap();
        let n = 40u64;
        let g = build_eta_grid(n, 0.2, -0.1, 0.3).unwrap();
        let stats = bin_stats(&d, GridRef::Eta(&g), n).unwrap();
        for pb in &stats.bins {
            let lo = g.point(pb.bin);
            let hi = g.point(pb.bin + 1);
            let exact: f64 = theta
                .iter()
                .filter(|&&t| t > lo && t <= hi)
                .map(|&t| 1.0 - (1.0 - t).powi(n as i32))
                .sum();
            assert!(
                pb.expected_distinct.lo <= exact + 1e-9
                    && exact <= pb.expected_distinct.hi + 1e-9,
                "bin {}: {exact} vs {:?}",
                pb.bin,
                pb.expected_distinct
            );
        }
    }
}
