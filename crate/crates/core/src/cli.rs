//! Command-line front end. `run` is the whole program minus process exit,
//! so it can be driven from tests.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use num_rational::Rational64;
use serde::Serialize;

use crate::bicameral::CycleSource;
use crate::graph::{gen_random_instance, parse_instance, EdgeId, GenParams, Instance};
use crate::phase1::Phase1Mode;
use crate::solver::{parse_ratio, solve, IterationRecord, Mode, SolverOptions, Status};
use crate::suite::{generate_suite, load_dir, render_table, run_bench, DEFAULT_COUNT, DEFAULT_SEED};

pub const EXIT_SOLVED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "krsp", version, about = "k disjoint delay-bounded min-cost paths")]
struct Args {
    /// Instance file ("n m k D [s t]" then "tail head cost delay" lines).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["gen", "bench"])]
    input: Option<PathBuf>,
    /// Generate an instance: n,m,maxc,maxd,k,seed.
    #[arg(long, value_name = "SPEC", conflicts_with = "bench")]
    gen: Option<String>,
    /// Delay bound for --gen, or an override for --input.
    #[arg(long, value_name = "D")]
    delay_bound: Option<i64>,
    #[arg(long, default_value = "exact", value_parser = str::parse::<Mode>)]
    mode: Mode,
    #[arg(long, value_name = "R", value_parser = parse_ratio)]
    eps1: Option<Rational64>,
    #[arg(long, value_name = "R", value_parser = parse_ratio)]
    eps2: Option<Rational64>,
    /// Sets both epsilons.
    #[arg(long, value_name = "R", value_parser = parse_ratio)]
    eps: Option<Rational64>,
    #[arg(long, default_value = "mincost", value_parser = str::parse::<Phase1Mode>)]
    phase1: Phase1Mode,
    #[arg(long, default_value = "hybrid", value_parser = str::parse::<CycleSource>)]
    cycles: CycleSource,
    /// Largest aux-graph budget B (default: the current cost estimate).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    bmax: Option<u64>,
    /// Bisect over B instead of scanning every budget.
    #[arg(long)]
    binary_search_b: bool,
    /// Include per-iteration records in the output.
    #[arg(long)]
    trace: bool,
    /// Benchmark a directory of instance files, or `suite[:COUNT[:SEED]]`.
    #[arg(long, value_name = "DIR|SPEC")]
    bench: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SolveReport<'a> {
    status: Status,
    paths: &'a [Vec<EdgeId>],
    total_cost: Option<i64>,
    total_delay: Option<i64>,
    cost_estimate_used: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<&'a [IterationRecord]>,
    wall_time_ms: f64,
}

fn parse_gen(spec: &str) -> Result<GenParams, String> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(format!("--gen expects n,m,maxc,maxd,k,seed, got `{spec}`"));
    }
    let num = |i: usize| parts[i].parse::<u64>().map_err(|_| format!("--gen field {} (`{}`) is not a nonnegative integer", i + 1, parts[i]));
    Ok(GenParams {
        n: num(0)? as usize,
        m: num(1)? as usize,
        max_cost: num(2)? as i64,
        max_delay: num(3)? as i64,
        k: num(4)? as usize,
        seed: num(5)?,
    })
}

fn options(args: &Args) -> SolverOptions {
    let defaults = SolverOptions::default();
    SolverOptions {
        mode: args.mode,
        eps1: args.eps1.or(args.eps).unwrap_or(defaults.eps1),
        eps2: args.eps2.or(args.eps).unwrap_or(defaults.eps2),
        phase1: args.phase1,
        cycles: args.cycles,
        bmax: args.bmax.map(|b| b as usize),
        binary_search_b: args.binary_search_b,
        trace: args.trace,
    }
}

fn load_instance(args: &Args) -> Result<Instance, String> {
    let inst = if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        parse_instance(&text).map_err(|e| format!("{}: {e}", path.display()))?
    } else if let Some(spec) = &args.gen {
        let inst = gen_random_instance(parse_gen(spec)?);
        if args.delay_bound.is_none() {
            return Err("--gen needs --delay-bound".into());
        }
        inst
    } else {
        return Err("one of --input, --gen or --bench is required".into());
    };
    match args.delay_bound {
        Some(d) => inst.with_delay_bound(d).map_err(|e| e.to_string()),
        None => Ok(inst),
    }
}

fn run_solve(args: &Args, out: &mut dyn Write) -> Result<i32, String> {
    let inst = load_instance(args)?;
    let opts = options(args);
    let started = Instant::now();
    let sol = solve(&inst, &opts).map_err(|e| e.to_string())?;
    let wall_time_ms = started.elapsed().as_secs_f64() * 1000.0;
    let solved = sol.status == Status::Solved;
    let report = SolveReport {
        status: sol.status,
        paths: sol.paths.paths(),
        total_cost: solved.then(|| sol.paths.total_cost()),
        total_delay: solved.then(|| sol.paths.total_delay()),
        cost_estimate_used: sol.cost_estimate,
        iterations: opts.trace.then_some(sol.trace.as_slice()),
        wall_time_ms,
    };
    let io = |e: std::io::Error| e.to_string();
    if args.json {
        serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| e.to_string())?;
        writeln!(out).map_err(io)?;
    } else {
        writeln!(out, "status: {}", sol.status).map_err(io)?;
        if solved {
            writeln!(out, "cost: {}  delay: {}  bound: {}", sol.paths.total_cost(), sol.paths.total_delay(), inst.delay_bound()).map_err(io)?;
            if let Some(c) = sol.cost_estimate {
                writeln!(out, "cost estimate: {c}").map_err(io)?;
            }
            for (i, p) in sol.paths.paths().iter().enumerate() {
                let ids: Vec<String> = p.iter().map(|e| e.to_string()).collect();
                writeln!(out, "path {}: {}", i + 1, ids.join(" ")).map_err(io)?;
            }
        }
        if opts.trace {
            for r in &sol.trace {
                writeln!(
                    out,
                    "iter {}: D={} C={} r={} cycle {:?} (c={}, d={}, {})",
                    r.index,
                    r.delay,
                    r.cost,
                    r.ratio.as_ref().map_or("undefined".to_string(), |q| q.to_string()),
                    r.cycle.edges.iter().map(|e| e.0).collect::<Vec<_>>(),
                    r.cycle.cost,
                    r.cycle.delay,
                    r.cycle.class
                )
                .map_err(io)?;
            }
        }
        writeln!(out, "time: {wall_time_ms:.1} ms").map_err(io)?;
    }
    Ok(if solved { EXIT_SOLVED } else { EXIT_INFEASIBLE })
}

fn run_bench_cmd(args: &Args, spec: &str, out: &mut dyn Write) -> Result<i32, String> {
    let instances = if spec == "suite" || spec.starts_with("suite:") {
        let mut parts = spec.split(':').skip(1);
        let count = parts.next().map(|s| s.parse::<usize>().map_err(|_| format!("bad suite count `{s}`"))).transpose()?;
        let seed = parts.next().map(|s| s.parse::<u64>().map_err(|_| format!("bad suite seed `{s}`"))).transpose()?;
        if parts.next().is_some() {
            return Err(format!("bench spec `{spec}` has too many fields"));
        }
        generate_suite(count.unwrap_or(DEFAULT_COUNT), seed.unwrap_or(DEFAULT_SEED))
    } else {
        load_dir(std::path::Path::new(spec)).map_err(|e| format!("{spec}: {e}"))?
    };
    let summary = run_bench(&instances, &options(args)).map_err(|e| e.to_string())?;
    let io = |e: std::io::Error| e.to_string();
    if args.json {
        serde_json::to_writer_pretty(&mut *out, &summary).map_err(|e| e.to_string())?;
        writeln!(out).map_err(io)?;
    } else {
        write!(out, "{}", render_table(&summary)).map_err(io)?;
    }
    Ok(EXIT_SOLVED)
}

pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_SOLVED };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match &args.bench {
        Some(spec) => run_bench_cmd(&args, spec, out),
        None => run_solve(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_spec_parsing() {
        let p = parse_gen("5,10,5,5,2,7").unwrap();
        assert_eq!((p.n, p.m, p.k, p.seed), (5, 10, 2, 7));
        assert!(parse_gen("5,10").is_err());
        assert!(parse_gen("5,10,5,5,2,x").is_err());
    }

    #[test]
    fn missing_source_is_an_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["krsp"], &mut out, &mut err), EXIT_ERROR);
        assert!(String::from_utf8(err).unwrap().contains("required"));
    }

    #[test]
    fn bad_flag_exits_with_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["krsp", "--mode", "fast"], &mut out, &mut err), EXIT_ERROR);
    }

    #[test]
    fn eps_sets_both() {
        let args = Args::try_parse_from(["krsp", "--gen", "4,4,1,1,1,1", "--eps", "1/4"]).unwrap();
        let o = options(&args);
        assert_eq!((o.eps1, o.eps2), (Rational64::new(1, 4), Rational64::new(1, 4)));
    }
}
