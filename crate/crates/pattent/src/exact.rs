//! Exact pattern-distribution computation for small instances.
//!
//! Patterns index symbols by order of first occurrence, so the block
//! probability of a pattern sums the probabilities of every sequence mapping
//! to it. For small alphabets this is computed exactly: either by direct
//! enumeration of all `k^n` sequences (the brute-force oracle) or via the
//! occurrence-vector sum whose inner sum runs over the `k!/(k-m)!` injective
//! assignments of symbols to pattern indices.

use crate::numerics::{stable_sorted_sum, StableSum};
use crate::{Error, Result};
use std::collections::HashMap;
use std::hash::Hash;

/// Enumeration caps. The defaults keep exact computation comfortably under a
/// second; raising them requires the explicit acknowledgment flag.
#[derive(Debug, Clone, Copy)]
pub struct ExactConfig {
    pub max_n: u64,
    pub max_k: usize,
    /// Brute-force cap on `k^n`.
    pub max_sequences: f64,
    /// Set to accept larger instances (and the run time that comes with
    /// them) instead of an instance-too-large error.
    pub acknowledge_large: bool,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            max_n: 14,
            max_k: 4,
            max_sequences: 1e7,
            acknowledge_large: false,
        }
    }
}

/// A pattern: positive indices, first element 1, each element at most
/// one more than the running maximum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern(pub Vec<u32>);

impl Pattern {
    pub fn is_valid(&self) -> bool {
        let mut max_seen = 0u32;
        for &v in &self.0 {
            if v == 0 || v > max_seen + 1 {
                return false;
            }
            max_seen = max_seen.max(v);
        }
        true
    }

    /// Digit-string rendering (indices stay below 10 at the default caps).
    pub fn digits(&self) -> String {
        self.0
            .iter()
            .map(|v| {
                if *v < 10 {
                    char::from_digit(*v, 10).unwrap().to_string()
                } else {
                    format!("({v})")
                }
            })
            .collect()
    }
}

/// The exact distribution over patterns of length `n`.
#[derive(Debug, Clone)]
pub struct PatternTable {
    pub n: u64,
    pub k: usize,
    pub entries: Vec<(Pattern, f64)>,
}

impl PatternTable {
    /// `pattern,probability` CSV lines, patterns in lexicographic order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pattern,probability\n");
        for (p, prob) in &self.entries {
            out.push_str(&format!("{},{}\n", p.digits(), prob));
        }
        out
    }
}

/// Pattern of a sequence: indices assigned in order of first occurrence.
pub fn pattern_of<T: Eq + Hash>(seq: &[T]) -> Pattern {
    let mut next = 1u32;
    let mut seen: HashMap<&T, u32> = HashMap::new();
    let mut out = Vec::with_capacity(seq.len());
    for x in seq {
        let idx = *seen.entry(x).or_insert_with(|| {
            let v = next;
            next += 1;
            v
        });
        out.push(idx);
    }
    Pattern(out)
}

fn check_explicit(theta: &[f64]) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::InvalidDistribution("empty probability vector".into()));
    }
    let s: f64 = theta.iter().sum();
    if theta.iter().any(|&t| !(t > 0.0)) || (s - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution(format!(
            "probabilities must be positive and sum to 1 (sum = {s})"
        )));
    }
    Ok(())
}

/// `H(Psi^n)` via the occurrence-vector sum: the outer sum runs over all
/// occurrence vectors of sequences, the inner over the injective placements
/// of the distinct symbols.
pub fn exact_pattern_entropy(theta: &[f64], n: u64, cfg: &ExactConfig) -> Result<f64> {
    check_explicit(theta)?;
    let k = theta.len();
    if !cfg.acknowledge_large && (n > cfg.max_n || k > cfg.max_k) {
        let work = binomial_estimate(n + k as u64 - 1, k as u64 - 1) * factorial_estimate(k);
        return Err(Error::InstanceTooLarge(format!(
            "exact_pattern_entropy(k={k}, n={n}) needs about {work:.2e} inner terms; \
             raise the caps explicitly to proceed"
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let mut terms: Vec<f64> = Vec::new();
    let mut counts = vec![0u64; k];
    enumerate_compositions(n, k, 0, &mut counts, &mut |nu: &[u64]| {
        let log_multinomial = log2_multinomial(n, nu);
        let mut logp_seq = 0.0f64;
        for (i, &c) in nu.iter().enumerate() {
            if c > 0 {
                logp_seq += c as f64 * theta[i].log2();
            }
        }
        let p_pattern = injective_pattern_probability(theta, nu);
        // contribution: P(nu-class sequence mass) * (-log2 P(pattern))
        let weight = (log_multinomial + logp_seq).exp2();
        if weight > 0.0 && p_pattern > 0.0 {
            terms.push(weight * (-p_pattern.log2()));
        }
    });
    Ok(stable_sorted_sum(&mut terms).max(0.0))
}

/// Sum over injective assignments of the nonzero occurrence counts to
/// alphabet symbols: `sum_sigma prod_j theta_j^{sigma(nu)(j)}`.
fn injective_pattern_probability(theta: &[f64], nu: &[u64]) -> f64 {
    let nonzero: Vec<u64> = nu.iter().copied().filter(|&c| c > 0).collect();
    let k = theta.len();
    let mut used = vec![false; k];
    let mut acc = StableSum::new();
    fn rec(
        theta: &[f64],
        counts: &[u64],
        pos: usize,
        used: &mut [bool],
        prod: f64,
        acc: &mut StableSum,
    ) {
        if pos == counts.len() {
            acc.add(prod);
            return;
        }
        for j in 0..theta.len() {
            if !used[j] {
                used[j] = true;
                rec(theta, counts, pos + 1, used, prod * theta[j].powi(counts[pos] as i32), acc);
                used[j] = false;
            }
        }
    }
    rec(theta, &nonzero, 0, &mut used, 1.0, &mut acc);
    acc.value()
}

fn enumerate_compositions<F: FnMut(&[u64])>(
    remaining: u64,
    k: usize,
    pos: usize,
    counts: &mut Vec<u64>,
    f: &mut F,
) {
    if pos == k - 1 {
        counts[pos] = remaining;
        f(counts);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        enumerate_compositions(remaining - c, k, pos + 1, counts, f);
    }
}

fn log2_multinomial(n: u64, nu: &[u64]) -> f64 {
    let mut v = log2_factorial_int(n);
    for &c in nu {
        v -= log2_factorial_int(c);
    }
    v
}

fn log2_factorial_int(m: u64) -> f64 {
    (2..=m).map(|j| (j as f64).log2()).sum()
}

fn binomial_estimate(a: u64, b: u64) -> f64 {
    (log2_factorial_int(a) - log2_factorial_int(b) - log2_factorial_int(a - b)).exp2()
}

fn factorial_estimate(k: usize) -> f64 {
    log2_factorial_int(k as u64).exp2()
}

/// Brute-force oracle: enumerate all `k^n` sequences, group by pattern.
pub fn brute_force_pattern_entropy(
    theta: &[f64],
    n: u64,
    cfg: &ExactConfig,
) -> Result<(f64, PatternTable)> {
    check_explicit(theta)?;
    let k = theta.len();
    let total = (k as f64).powf(n as f64);
    if total > cfg.max_sequences && !cfg.acknowledge_large {
        return Err(Error::InstanceTooLarge(format!(
            "brute force over k^n = {total:.3e} sequences exceeds the cap"
        )));
    }
    let mut table: HashMap<Pattern, StableSum> = HashMap::new();
    let mut seq = vec![0u8; n as usize];
    loop {
        let p = pattern_of(&seq);
        let mut prob = 1.0f64;
        for &s in &seq {
            prob *= theta[s as usize];
        }
        table.entry(p).or_default().add(prob);
        // odometer increment
        let mut pos = 0usize;
        loop {
            if pos == n as usize {
                break;
            }
            seq[pos] += 1;
            if (seq[pos] as usize) < k {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
        if pos == n as usize {
            break;
        }
    }
    let mut entries: Vec<(Pattern, f64)> = table
        .into_iter()
        .map(|(p, s)| (p, s.value()))
        .collect();
    entries.sort_by(|a, b| a.0 .0.cmp(&b.0 .0));
    let mut terms: Vec<f64> = entries
        .iter()
        .filter(|(_, pr)| *pr > 0.0)
        .map(|(_, pr)| -pr * pr.log2())
        .collect();
    let h = stable_sorted_sum(&mut terms).max(0.0);
    Ok((
        h,
        PatternTable {
            n,
            k,
            entries,
        },
    ))
}

/// Conditional next-index entropy `H(Psi_l | Psi^{l-1}) = H(Psi^l) - H(Psi^{l-1})`.
pub fn conditional_index_entropy(theta: &[f64], l: u64, cfg: &ExactConfig) -> Result<f64> {
    if l == 0 {
        return Err(Error::Domain("index must be >= 1".into()));
    }
    if l == 1 {
        // Psi_1 = 1 deterministically
        return Ok(0.0);
    }
    let h_l = exact_pattern_entropy(theta, l, cfg)?;
    let h_lm1 = exact_pattern_entropy(theta, l - 1, cfg)?;
    Ok((h_l - h_lm1).max(0.0))
}

/// Exact pattern block entropy of the uniform distribution over `k` symbols:
/// `n log2 k - log2 k! + sum_j P(K = j) log2((k-j)!)` with `K` the number of
/// distinct symbols occurring, whose distribution follows the
/// Stirling-second-kind recurrence (run in log space).
pub fn exact_uniform_pattern_entropy(k: u64, n: u64) -> Result<f64> {
    const CAP: u64 = 5000;
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    if k > CAP || n > CAP {
        return Err(Error::InstanceTooLarge(format!(
            "exact_uniform_pattern_entropy caps at k, n <= {CAP} (got k={k}, n={n})"
        )));
    }
    if k == 1 || n == 0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let jmax = k.min(n) as usize;
    // log-space occupancy DP over sequence length:
    // P_m(j) = P_{m-1}(j) * j/k + P_{m-1}(j-1) * (k-j+1)/k
    let neg_inf = f64::NEG_INFINITY;
    let mut logp = vec![neg_inf; jmax + 1];
    logp[1] = 0.0; // after one draw, exactly one distinct symbol
    let log_add = |a: f64, b: f64| -> f64 {
        if a == neg_inf {
            return b;
        }
        if b == neg_inf {
            return a;
        }
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        hi + (lo - hi).exp().ln_1p()
    };
    for _m in 2..=n {
        let mut next = vec![neg_inf; jmax + 1];
        for j in 1..=jmax {
            let stay = logp[j] + ((j as f64) / kf).ln();
            let grow = if j >= 2 {
                logp[j - 1] + ((kf - (j as f64 - 1.0)) / kf).ln()
            } else {
                neg_inf
            };
            next[j] = log_add(stay, grow);
        }
        logp = next;
    }
    let mut acc = StableSum::new();
    for j in 1..=jmax {
        if logp[j] == neg_inf {
            continue;
        }
        let p = logp[j].exp();
        let lf = log2_factorial_int(k - j as u64);
        acc.add(p * lf);
    }
    let h = (n as f64) * kf.log2() - log2_factorial_int(k) + acc.value();
    Ok(h.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_of_examples() {
        assert_eq!(pattern_of("lossless".as_bytes()).0, vec![1, 2, 3, 3, 1, 4, 3, 3]);
        assert_eq!(pattern_of("76887288".as_bytes()).0, vec![1, 2, 3, 3, 1, 4, 3, 3]);
        assert_eq!(pattern_of("sellsoll".as_bytes()).digits(), "12331433");
        let empty: Vec<u8> = vec![];
        assert_eq!(pattern_of(&empty).0, Vec::<u32>::new());
        assert!(pattern_of("banana".as_bytes()).is_valid());
    }

    #[test]
    fn exact_entropy_examples() {
        let cfg = ExactConfig::default();
        let h = exact_pattern_entropy(&[0.5, 0.5], 3, &cfg).unwrap();
        assert!((h - 2.0).abs() < 1e-12);
        assert_eq!(exact_pattern_entropy(&[1.0], 5, &cfg).unwrap(), 0.0);
        assert_eq!(exact_pattern_entropy(&[0.2, 0.8], 1, &cfg).unwrap(), 0.0);
        // caps
        assert!(exact_pattern_entropy(&[0.25; 4], 20, &cfg).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let cfg = ExactConfig::default();
        let (h, table) = brute_force_pattern_entropy(&[0.5, 0.5], 3, &cfg).unwrap();
        assert!((h - 2.0).abs() < 1e-12);
        assert_eq!(table.entries.len(), 4);
        for (p, prob) in &table.entries {
            assert!(p.is_valid());
            assert!((prob - 0.25).abs() < 1e-12, "{}: {prob}", p.digits());
        }

        let (h1, t1) = brute_force_pattern_entropy(&[1.0], 3, &cfg).unwrap();
        assert_eq!(h1, 0.0);
        assert_eq!(t1.entries.len(), 1);
        assert_eq!(t1.entries[0].0.digits(), "111");

        let (h2, t2) = brute_force_pattern_entropy(&[0.2, 0.8], 2, &cfg).unwrap();
        let want = crate::numerics::h2(0.68);
        assert!((h2 - want).abs() < 1e-12);
        assert!((h2 - 0.9044).abs() < 1e-4);
        let m: HashMap<String, f64> = t2
            .entries
            .iter()
            .map(|(p, pr)| (p.digits(), *pr))
            .collect();
        assert!((m["11"] - 0.68).abs() < 1e-12);
        assert!((m["12"] - 0.32).abs() < 1e-12);
    }

    #[test]
    fn table_sums_to_one_and_keys_valid() {
        let cfg = ExactConfig::default();
        let (_, table) = brute_force_pattern_entropy(&[0.1, 0.35, 0.55], 6, &cfg).unwrap();
        let s: f64 = table.entries.iter().map(|(_, p)| p).sum();
        assert!((s - 1.0).abs() < 1e-10);
        assert!(table.entries.iter().all(|(p, _)| p.is_valid()));
        let csv = table.to_csv();
        assert!(csv.starts_with("pattern,probability\n"));
    }

    #[test]
    fn oracle_equivalence_small() {
        let cfg = ExactConfig::default();
        for theta in [
            vec![0.3, 0.7],
            vec![0.2, 0.3, 0.5],
            vec![0.1, 0.2, 0.3, 0.4],
        ] {
            let n = if theta.len() == 4 { 6 } else { 8 };
            let a = exact_pattern_entropy(&theta, n, &cfg).unwrap();
            let (b, _) = brute_force_pattern_entropy(&theta, n, &cfg).unwrap();
            assert!((a - b).abs() < 1e-9, "{theta:?}: {a} vs {b}");
        }
    }

    #[test]
    fn conditional_entropy_examples() {
        let cfg = ExactConfig::default();
        let c2 = conditional_index_entropy(&[0.5, 0.5], 2, &cfg).unwrap();
        assert!((c2 - 1.0).abs() < 1e-12);
        let c = conditional_index_entropy(&[0.2, 0.8], 2, &cfg).unwrap();
        assert!((c - crate::numerics::h2(0.68)).abs() < 1e-12);
        assert!(c > crate::numerics::h2(0.8)); // exceeds H(X) = 0.7219
        assert_eq!(conditional_index_entropy(&[0.4, 0.6], 1, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn uniform_specialization() {
        let cfg = ExactConfig::default();
        assert!((exact_uniform_pattern_entropy(2, 3).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(exact_uniform_pattern_entropy(1, 50).unwrap(), 0.0);
        for (k, n) in [(2u64, 8u64), (3, 8), (2, 5), (3, 5)] {
            let theta = vec![1.0 / k as f64; k as usize];
            let direct = exact_pattern_entropy(&theta, n, &cfg).unwrap();
            let occ = exact_uniform_pattern_entropy(k, n).unwrap();
            assert!((direct - occ).abs() < 1e-9, "k={k} n={n}: {direct} vs {occ}");
        }
    }

    #[test]
    fn entropy_monotone_and_data_processing() {
        let cfg = ExactConfig::default();
        let theta = [0.15f64, 0.35, 0.5];
        let hx = theta.iter().map(|&t| -t * t.log2()).sum::<f64>();
        let mut prev = 0.0;
        for n in 1..=7u64 {
            let h = exact_pattern_entropy(&theta, n, &cfg).unwrap();
            assert!(h + 1e-11 >= prev, "n={n}");
            assert!(h <= n as f64 * hx + 1e-9, "n={n}");
            prev = h;
        }
    }
}
