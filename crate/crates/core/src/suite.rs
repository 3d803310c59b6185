//! The randomized oracle-checked benchmark suite and its report.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{gen_random_instance, parse_instance, GenParams, Instance};
use crate::oracle::{brute_krsp, delay_range, OracleError};
use crate::solver::{solve, SolveError, SolverOptions, Status};

pub const DEFAULT_COUNT: usize = 200;
pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Clone)]
pub struct NamedInstance {
    pub name: String,
    pub instance: Instance,
}

/// `count` instances with n in [4,8], m in [n,2n], k = 2, weights in [0,5],
/// and D halfway between the least and greatest total delay of any k
/// disjoint paths. Draws without k disjoint paths are rejected and redrawn,
/// so every instance has at least one candidate path set.
pub fn generate_suite(count: usize, seed: u64) -> Vec<NamedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| loop {
            let n = rng.gen_range(4..=8);
            let m = rng.gen_range(n..=2 * n);
            let inst = gen_random_instance(GenParams { n, m, max_cost: 5, max_delay: 5, k: 2, seed: rng.gen() });
            if let Some((lo, hi)) = delay_range(&inst).expect("suite sizes are within oracle caps") {
                let instance = inst.with_delay_bound((lo + hi) / 2).unwrap();
                break NamedInstance { name: format!("suite-{i:03}"), instance };
            }
        })
        .collect()
}

/// Instance files (`*.txt`, `*.krsp`) of a directory, by file name.
pub fn load_dir(dir: &Path) -> std::io::Result<Vec<NamedInstance>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt" || x == "krsp"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for path in files {
        let text = std::fs::read_to_string(&path)?;
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        match parse_instance(&text) {
            Ok(instance) => out.push(NamedInstance { name, instance }),
            Err(e) => log::warn!("skipping {}: {e}", path.display()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub delay_bound: i64,
    /// `None` when the oracle reports infeasible.
    pub c_opt: Option<i64>,
    pub status: Status,
    pub cost: Option<i64>,
    pub delay: Option<i64>,
    /// `cost / C_OPT` as an exact fraction string; absent when undefined.
    pub cost_ratio: Option<String>,
    pub delay_slack: Option<i64>,
    pub iterations: usize,
    pub agrees_with_oracle: bool,
    #[serde(skip)]
    pub time: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchSummary {
    pub rows: Vec<BenchRow>,
    pub skipped: Vec<String>,
    pub solved: usize,
    pub infeasible: usize,
    pub max_cost_ratio: Option<f64>,
    pub mean_cost_ratio: Option<f64>,
    pub disagreements: usize,
}

fn ratio_string(cost: i64, opt: i64) -> Option<String> {
    if opt == 0 {
        return (cost == 0).then(|| "1".to_string());
    }
    let r = num_rational::Rational64::new(cost, opt);
    Some(r.to_string())
}

pub fn run_bench(instances: &[NamedInstance], opts: &SolverOptions) -> Result<BenchSummary, SolveError> {
    let mut sorted: Vec<&NamedInstance> = instances.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for item in sorted {
        let inst = &item.instance;
        let opt = match brute_krsp(inst) {
            Ok(o) => o,
            Err(e @ OracleError::TooLarge { .. }) | Err(e @ OracleError::TooManyVertices(_)) => {
                log::warn!("skipping {}: {e}", item.name);
                skipped.push(item.name.clone());
                continue;
            }
        };
        let started = Instant::now();
        let sol = solve(inst, opts)?;
        let time = started.elapsed();
        let solved = sol.status == Status::Solved;
        let c_opt = opt.as_ref().map(|o| o.cost);
        rows.push(BenchRow {
            name: item.name.clone(),
            n: inst.vertex_count(),
            m: inst.edges().len(),
            delay_bound: inst.delay_bound(),
            c_opt,
            status: sol.status,
            cost: solved.then(|| sol.paths.total_cost()),
            delay: solved.then(|| sol.paths.total_delay()),
            cost_ratio: c_opt.filter(|_| solved).and_then(|o| ratio_string(sol.paths.total_cost(), o)),
            delay_slack: solved.then(|| inst.delay_bound() - sol.paths.total_delay()),
            iterations: sol.total_iterations,
            agrees_with_oracle: solved == opt.is_some(),
            time,
        });
    }
    let ratios: Vec<f64> = rows
        .iter()
        .filter_map(|r| match (r.cost, r.c_opt) {
            (Some(c), Some(o)) if o > 0 => Some(c as f64 / o as f64),
            (Some(0), Some(0)) => Some(1.0),
            _ => None,
        })
        .collect();
    Ok(BenchSummary {
        solved: rows.iter().filter(|r| r.status == Status::Solved).count(),
        infeasible: rows.iter().filter(|r| r.status == Status::Infeasible).count(),
        max_cost_ratio: ratios.iter().copied().reduce(f64::max),
        mean_cost_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        disagreements: rows.iter().filter(|r| !r.agrees_with_oracle).count(),
        rows,
        skipped,
    })
}

fn cell(v: Option<impl ToString>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn render_table(s: &BenchSummary) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<12} {:>3} {:>3} {:>4} {:>6} {:>10} {:>5} {:>5} {:>7} {:>5} {:>5} {:>9}",
        "name", "n", "m", "D", "C_OPT", "status", "cost", "delay", "ratio", "slack", "iters", "time_ms"
    )
    .unwrap();
    for r in &s.rows {
        writeln!(
            out,
            "{:<12} {:>3} {:>3} {:>4} {:>6} {:>10} {:>5} {:>5} {:>7} {:>5} {:>5} {:>9.1}",
            r.name,
            r.n,
            r.m,
            r.delay_bound,
            cell(r.c_opt),
            r.status.to_string(),
            cell(r.cost),
            cell(r.delay),
            cell(r.cost_ratio.as_ref()),
            cell(r.delay_slack),
            r.iterations,
            r.time.as_secs_f64() * 1000.0
        )
        .unwrap();
    }
    writeln!(
        out,
        "solved {}  infeasible {}  skipped {}  disagreements {}  max ratio {}  mean ratio {}",
        s.solved,
        s.infeasible,
        s.skipped.len(),
        s.disagreements,
        s.max_cost_ratio.map_or("-".into(), |v| format!("{v:.4}")),
        s.mean_cost_ratio.map_or("-".into(), |v| format!("{v:.4}")),
    )
    .unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_deterministic_and_in_range() {
        let a = generate_suite(10, 5);
        let b = generate_suite(10, 5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.instance, y.instance);
            let n = x.instance.vertex_count();
            assert!((4..=8).contains(&n));
            assert!((n..=2 * n).contains(&x.instance.edges().len()));
            assert_eq!(x.instance.path_count(), 2);
        }
    }

    #[test]
    fn empty_bench() {
        let s = run_bench(&[], &SolverOptions::default()).unwrap();
        assert!(s.rows.is_empty());
        assert_eq!(s.max_cost_ratio, None);
    }
}
