//! Command-line front end: evaluates bounds, exact small-instance pattern
//! entropies, and sweep files that reproduce whole tables and figure data as
//! CSV.
//!
//! Exit codes: 0 success, 2 usage/parse problems, 3 infeasible bound,
//! 4 instance too large.

use crate::closed_form::{self, ClosedFormResult, Mode, UniformKind};
use crate::distributions::{DistributionModel, Family};
use crate::exact::{
    brute_force_pattern_entropy, conditional_index_entropy, exact_pattern_entropy, ExactConfig,
};
use crate::general_bounds::{optimize_lower, optimize_upper, ParamSearchSpec};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::PathBuf;

pub const BOUNDS_HEADER: &str = "distribution,params,n,mode,eps,eps0,eps2,nHX_lo,nHX_hi,LB,UB,gap_LB,gap_UB,S1,S2,S3,S4,U,R0,R1,R01";

#[derive(Parser, Debug)]
#[command(
    name = "pattent",
    version,
    about = "Finite-n bounds and exact values for the block entropy of patterns of i.i.d. sequences"
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate entropy bounds for one distribution, one row per mode.
    Bounds(BoundsArgs),
    /// Exact pattern block entropies (and conditional next-index entropies)
    /// for small explicit distributions.
    Exact(ExactArgs),
    /// Run a sweep file and emit one bounds row per (value, mode).
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Distribution spec, e.g. geom:p=0.05, uniform:k=100,
    /// uniform:lambda=1,n=1000, slowint:gamma=0.5, zipf:gamma=1,
    /// linear:lambda=2,n=1000, explicit:@probs.csv
    dist: String,
    /// Block length.
    #[arg(long)]
    n: u64,
    /// Modes: finite_n, asymptotic, general (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "finite_n")]
    mode: Vec<String>,
    /// Significant digits in the output.
    #[arg(long, default_value_t = 6)]
    digits: usize,
    /// Search-grid overrides for general mode, e.g. "eps=0.5:2:0.25;eps0=0".
    #[arg(long)]
    search: Option<String>,
}

#[derive(Args, Debug)]
struct ExactArgs {
    /// Inline probabilities, e.g. 0.2,0.8.
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    /// File with one probability per line.
    #[arg(long)]
    theta_file: Option<PathBuf>,
    /// Maximum block length (rows for m = 1..=n).
    #[arg(long)]
    n: u64,
    /// Also emit H(Psi_l | Psi^(l-1)) for l = 1..=L.
    #[arg(long)]
    conditional: Option<u64>,
    /// Emit the exact length-n pattern table instead (pattern,probability).
    #[arg(long)]
    pattern_table: bool,
    #[arg(long, default_value_t = 6)]
    digits: usize,
    /// Accept instances beyond the default caps.
    #[arg(long)]
    acknowledge_large: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// TOML sweep specification.
    spec: PathBuf,
    /// Worker threads for sweep rows (default: PATTENT_JOBS or all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 6)]
    digits: usize,
}

/// Parse argv, run, and return the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version on stdout with success
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = match &cli.cmd {
        Cmd::Bounds(a) => run_bounds(a),
        Cmd::Exact(a) => run_exact(a),
        Cmd::Sweep(a) => run_sweep(a),
    };
    match out {
        Ok(csv) => {
            print!("{csv}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => 3,
        Error::InstanceTooLarge(_) => 4,
        _ => 2,
    }
}

/// Fixed-significant-digit decimal formatting with stable trimming.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let mag = x.abs().log10().floor() as i32;
    if mag < -4 || mag >= 15 {
        let s = format!("{:.*e}", digits - 1, x);
        return trim_zeros_exp(&s);
    }
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    trim_zeros(&s)
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

fn trim_zeros_exp(s: &str) -> String {
    match s.split_once('e') {
        Some((m, e)) => format!("{}e{}", trim_zeros(m), e),
        None => s.to_string(),
    }
}

fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "finite_n" => Ok(Mode::FiniteN),
        "asymptotic" => Ok(Mode::Asymptotic),
        other => Err(Error::InvalidSpec(format!(
            "unknown mode '{other}' (expected finite_n, asymptotic or general)"
        ))),
    }
}

fn closed_for(dist: &DistributionModel, n: u64, mode: Mode) -> Result<ClosedFormResult> {
    match dist.family() {
        Family::UniformK { k } => closed_form::uniform_bounds(UniformKind::FixedK(*k), n, mode),
        Family::UniformRate { lambda, .. } => {
            closed_form::uniform_bounds(UniformKind::Rate(*lambda), n, mode)
        }
        Family::SlowInteger { gamma } => closed_form::slow_integer_bounds(*gamma, n, mode),
        Family::Zipf { gamma } => closed_form::zipf_bounds(*gamma, n, mode),
        Family::Geometric { p } => closed_form::geometric_bounds(*p, n, mode),
        Family::Linear { lambda, .. } => closed_form::linear_bounds(*lambda, n, mode),
        Family::Explicit { .. } => Err(Error::Unsupported(
            "explicit distributions support only --mode general".into(),
        )),
    }
}

struct RowFields {
    eps: Option<f64>,
    eps0: Option<f64>,
    eps2: Option<f64>,
    lb: f64,
    ub: f64,
    s: [Option<f64>; 4],
    u: Option<f64>,
    r0: Option<f64>,
    r1: Option<f64>,
    r01: Option<f64>,
}

/// One CSV row of the bounds table.
fn bounds_row(
    dist: &DistributionModel,
    n: u64,
    mode: &str,
    digits: usize,
    search_override: Option<&str>,
) -> Result<String> {
    let hx = dist.iid_entropy();
    let nf = n as f64;
    let f = |v: RowFields| -> String {
        let fmt = |x: f64| format_sig(x, digits);
        let opt = |x: Option<f64>| x.map(&fmt).unwrap_or_default();
        let (name, params) = split_spec(&dist.spec_string());
        let gap_lb = nf * hx.hi - v.lb;
        let gap_ub = nf * hx.lo - v.ub;
        format!(
            "{name},{params},{n},{mode},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            opt(v.eps),
            opt(v.eps0),
            opt(v.eps2),
            fmt(nf * hx.lo),
            fmt(nf * hx.hi),
            fmt(v.lb),
            fmt(v.ub),
            fmt(gap_lb),
            fmt(gap_ub),
            opt(v.s[0]),
            opt(v.s[1]),
            opt(v.s[2]),
            opt(v.s[3]),
            opt(v.u),
            opt(v.r0),
            opt(v.r1),
            opt(v.r01),
        )
    };
    if mode == "general" {
        let mut search = ParamSearchSpec::default_for(dist, n);
        if let Some(s) = search_override {
            search.apply_overrides(s)?;
        }
        let lb = optimize_lower(dist, n, &search)?;
        let ub = optimize_upper(dist, n, &search)?;
        return Ok(f(RowFields {
            eps: Some(lb.eps),
            eps0: Some(lb.eps0),
            eps2: Some(ub.eps2),
            lb: lb.lb,
            ub: ub.ub,
            s: [Some(lb.s1), Some(lb.s2), Some(lb.s3), Some(lb.s4)],
            u: Some(ub.u),
            r0: ub.r_named("0"),
            r1: ub.r_named("1"),
            r01: ub.r_named("01"),
        }));
    }
    let m = parse_mode(mode)?;
    let r = closed_for(dist, n, m)?;
    Ok(f(RowFields {
        eps: r.lb_terms.map(|t| t.eps),
        eps0: r.lb_terms.map(|t| t.eps0),
        eps2: r.ub_terms.map(|t| t.eps2),
        lb: r.lb,
        ub: r.ub,
        s: match r.lb_terms {
            Some(t) => [Some(t.s1), Some(t.s2), Some(t.s3), Some(t.s4)],
            None => [None; 4],
        },
        u: r.ub_terms.map(|t| t.u),
        r0: r.ub_terms.and_then(|t| t.r0),
        r1: r.ub_terms.and_then(|t| t.r1),
        r01: r.ub_terms.and_then(|t| t.r01),
    }))
}

fn split_spec(spec: &str) -> (String, String) {
    match spec.split_once(':') {
        Some((a, b)) => (a.to_string(), b.replace(',', ";")),
        None => (spec.to_string(), String::new()),
    }
}

fn run_bounds(a: &BoundsArgs) -> Result<String> {
    let dist = DistributionModel::parse(&a.dist, Some(a.n))?;
    let mut out = String::from(BOUNDS_HEADER);
    out.push('\n');
    for mode in &a.mode {
        out.push_str(&bounds_row(&dist, a.n, mode, a.digits, a.search.as_deref())?);
        out.push('\n');
    }
    Ok(out)
}

fn run_exact(a: &ExactArgs) -> Result<String> {
    let theta: Vec<f64> = match (&a.theta, &a.theta_file) {
        (Some(t), None) => t.clone(),
        (None, Some(path)) => {
            let body = std::fs::read_to_string(path)?;
            let mut v = Vec::new();
            for line in body.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                v.push(line.parse::<f64>().map_err(|e| {
                    Error::InvalidSpec(format!("bad probability '{line}': {e}"))
                })?);
            }
            v
        }
        _ => {
            return Err(Error::InvalidSpec(
                "provide exactly one of --theta or --theta-file".into(),
            ))
        }
    };
    let cfg = ExactConfig {
        acknowledge_large: a.acknowledge_large,
        ..ExactConfig::default()
    };
    let fmt = |x: f64| format_sig(x, a.digits);
    if a.pattern_table {
        let (_, table) = brute_force_pattern_entropy(&theta, a.n, &cfg)?;
        let mut out = String::from("pattern,probability\n");
        for (p, prob) in &table.entries {
            out.push_str(&format!("{},{}\n", p.digits(), fmt(*prob)));
        }
        return Ok(out);
    }
    let cond_limit = a.conditional.unwrap_or(0);
    let mut out = String::new();
    if cond_limit > 0 {
        out.push_str("n,H_pattern,H_conditional\n");
    } else {
        out.push_str("n,H_pattern\n");
    }
    let top = a.n.max(cond_limit);
    let mut prev = 0.0f64;
    for m in 1..=top {
        let h = exact_pattern_entropy(&theta, m, &cfg)?;
        let cond = (h - prev).max(0.0);
        prev = h;
        if m <= a.n && cond_limit > 0 && m <= cond_limit {
            out.push_str(&format!("{m},{},{}\n", fmt(h), fmt(cond)));
        } else if m <= a.n {
            out.push_str(&format!("{m},{}\n", fmt(h)));
        } else if cond_limit > 0 && m <= cond_limit {
            out.push_str(&format!("{m},,{}\n", fmt(cond)));
        }
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct SweepFile {
    #[serde(default)]
    sweep: Vec<SweepSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    /// "bounds" (default) or "exact".
    kind: Option<String>,
    /// Distribution spec; use `{}` as the placeholder when sweeping a
    /// family parameter.
    dist: Option<String>,
    /// "n" to sweep the block length, "param" to substitute into `dist`.
    var: Option<String>,
    values: Option<Vec<f64>>,
    log_from: Option<f64>,
    log_to: Option<f64>,
    points: Option<usize>,
    #[serde(default)]
    modes: Vec<String>,
    n: Option<u64>,
    /// exact-kind fields
    theta: Option<Vec<f64>>,
    conditional: Option<u64>,
}

#[derive(Debug, Clone)]
enum WorkItem {
    Bounds {
        dist: String,
        n: u64,
        mode: String,
    },
    Exact {
        theta: Vec<f64>,
        n: u64,
        conditional: u64,
    },
}

fn section_values(s: &SweepSection) -> Result<Vec<f64>> {
    if let Some(v) = &s.values {
        if v.is_empty() {
            return Err(Error::InvalidSpec("empty sweep value list".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for &x in v {
            if x <= prev {
                return Err(Error::InvalidSpec(
                    "sweep values must be strictly increasing".into(),
                ));
            }
            prev = x;
        }
        return Ok(v.clone());
    }
    match (s.log_from, s.log_to, s.points) {
        (Some(a), Some(b), Some(p)) if p >= 2 && a > 0.0 && b > a => {
            let la = a.ln();
            let lb = b.ln();
            Ok((0..p)
                .map(|i| (la + (lb - la) * i as f64 / (p - 1) as f64).exp())
                .collect())
        }
        _ => Err(Error::InvalidSpec(
            "sweep needs `values` or log_from/log_to/points".into(),
        )),
    }
}

fn expand_section(s: &SweepSection) -> Result<Vec<WorkItem>> {
    let kind = s.kind.as_deref().unwrap_or("bounds");
    let mut items = Vec::new();
    match kind {
        "bounds" => {
            let dist = s
                .dist
                .as_ref()
                .ok_or_else(|| Error::InvalidSpec("bounds sweep needs `dist`".into()))?;
            let modes = if s.modes.is_empty() {
                return Err(Error::InvalidSpec("sweep needs at least one mode".into()));
            } else {
                s.modes.clone()
            };
            let values = section_values(s)?;
            match s.var.as_deref().unwrap_or("n") {
                "n" => {
                    for &v in &values {
                        for mode in &modes {
                            items.push(WorkItem::Bounds {
                                dist: dist.clone(),
                                n: v as u64,
                                mode: mode.clone(),
                            });
                        }
                    }
                }
                "param" => {
                    let n = s
                        .n
                        .ok_or_else(|| Error::InvalidSpec("param sweep needs `n`".into()))?;
                    if !dist.contains("{}") {
                        return Err(Error::InvalidSpec(
                            "param sweep needs a `{}` placeholder in `dist`".into(),
                        ));
                    }
                    for &v in &values {
                        let spec = dist.replace("{}", &format_sig(v, 12));
                        for mode in &modes {
                            items.push(WorkItem::Bounds {
                                dist: spec.clone(),
                                n,
                                mode: mode.clone(),
                            });
                        }
                    }
                }
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "unknown sweep var '{other}' (use \"n\" or \"param\")"
                    )));
                }
            }
        }
        "exact" => {
            let n = s
                .n
                .ok_or_else(|| Error::InvalidSpec("exact sweep needs `n`".into()))?;
            let conditional = s.conditional.unwrap_or(0);
            match (&s.theta, &s.values) {
                (Some(theta), None) => items.push(WorkItem::Exact {
                    theta: theta.clone(),
                    n,
                    conditional,
                }),
                (None, Some(_)) => {
                    // binary sweep over theta1
                    for &v in &section_values(s)? {
                        items.push(WorkItem::Exact {
                            theta: vec![v, 1.0 - v],
                            n,
                            conditional,
                        });
                    }
                }
                _ => {
                    return Err(Error::InvalidSpec(
                        "exact sweep needs `theta` or binary `values`".into(),
                    ))
                }
            }
        }
        other => {
            return Err(Error::InvalidSpec(format!("unknown sweep kind '{other}'")));
        }
    }
    Ok(items)
}

fn work_row(item: &WorkItem, digits: usize) -> String {
    match item {
        WorkItem::Bounds { dist, n, mode } => {
            let run = || -> Result<String> {
                let d = DistributionModel::parse(dist, Some(*n))?;
                bounds_row(&d, *n, mode, digits, None)
            };
            match run() {
                Ok(row) => format!("{row},"),
                Err(e) => {
                    let (name, params) = split_spec(dist);
                    let blanks = ",".repeat(17);
                    format!("{name},{params},{n},{mode}{blanks},\"{}\"", e.to_string().replace('"', "'"))
                }
            }
        }
        WorkItem::Exact {
            theta,
            n,
            conditional,
        } => {
            let cfg = ExactConfig::default();
            let fmt = |x: f64| format_sig(x, digits);
            let spec = theta
                .iter()
                .map(|t| format_sig(*t, 6))
                .collect::<Vec<_>>()
                .join(";");
            let mut rows = Vec::new();
            let mut prev = 0.0f64;
            let top = (*n).max(*conditional);
            for m in 1..=top {
                match exact_pattern_entropy(theta, m, &cfg) {
                    Ok(h) => {
                        let cond = (h - prev).max(0.0);
                        prev = h;
                        let cond_s = if *conditional >= m { fmt(cond) } else { String::new() };
                        rows.push(format!("exact,{spec},{m},,{},{},", fmt(h), cond_s));
                    }
                    Err(e) => {
                        rows.push(format!(
                            "exact,{spec},{m},,,,\"{}\"",
                            e.to_string().replace('"', "'")
                        ));
                        break;
                    }
                }
            }
            rows.join("\n")
        }
    }
}

fn run_sweep(a: &SweepArgs) -> Result<String> {
    let body = std::fs::read_to_string(&a.spec)?;
    let file: SweepFile = toml::from_str(&body)
        .map_err(|e| Error::InvalidSpec(format!("bad sweep file: {e}")))?;
    if file.sweep.is_empty() {
        return Err(Error::InvalidSpec("sweep file has no [[sweep]] sections".into()));
    }
    let mut items = Vec::new();
    let mut any_exact = false;
    for s in &file.sweep {
        let expanded = expand_section(s)?;
        any_exact |= expanded
            .iter()
            .any(|w| matches!(w, WorkItem::Exact { .. }));
        items.extend(expanded);
    }
    let jobs = a
        .jobs
        .or_else(|| {
            std::env::var("PATTENT_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
        .max(1);
    let digits = a.digits;
    // evaluate rows concurrently, emit in spec order
    let mut rows: Vec<(usize, String)> = std::thread::scope(|scope| {
        let chunk = items.len().div_ceil(jobs);
        let handles: Vec<_> = items
            .chunks(chunk)
            .enumerate()
            .map(|(ci, part)| {
                scope.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(i, w)| (ci * chunk + i, work_row(w, digits)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().unwrap())
            .collect()
    });
    rows.sort_by_key(|(i, _)| *i);
    let header = if any_exact && items.iter().all(|w| matches!(w, WorkItem::Exact { .. })) {
        "mode,theta,m,unused,H_pattern,H_conditional,error".to_string()
    } else {
        format!("{BOUNDS_HEADER},error")
    };
    let mut out = header;
    out.push('\n');
    for (_, r) in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}
