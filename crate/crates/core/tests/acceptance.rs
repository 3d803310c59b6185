//! End-to-end acceptance run over the generated suite. Prints one PASS/FAIL
//! line per criterion. Exits non-zero on any failure outside `KNOWN_GAPS`.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use krsp::bicameral::{build_aux, find_bicameral, lift_cycle, make_cycle_lp, AuxGraph, AuxKind, CycleSource, SearchContext, Sign};
use krsp::graph::{render_instance, EdgeId, Instance, PathSet};
use krsp::lp::{decompose_circulation, solve_lp, LpStatus};
use krsp::oracle::{brute_krsp, delay_range, enumerate_cycles, enumerate_simple_cycles, residual_edges, verify_bicameral};
use krsp::phase1::{check_feasible, phase1_solution, Phase1Mode};
use krsp::residual::{build_residual, decompose_flow, diff_cycles, path_edges, symmetric_diff, Cycle, ResidualGraph};
use krsp::solver::{cancel_cycles, solve, LoopEnd, Mode, RungRun, Solution, SolverOptions};
use krsp::suite::{generate_suite, NamedInstance, DEFAULT_COUNT, DEFAULT_SEED};
use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot hold as stated. They still run and still print
/// FAIL; they do not fail the process.
const KNOWN_GAPS: &[(usize, &str)] = &[(
    8,
    "a residual cycle whose running cost dips below 0 or above B from every anchor has no level-respecting walk in the + aux graph",
)];

struct Verdict {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

struct Report(Vec<Verdict>);

impl Report {
    fn record(&mut self, id: usize, name: &'static str, pass: bool, detail: String) {
        println!("{} {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.0.push(Verdict { id, name, pass, detail });
    }
}

struct SuiteRun {
    item: NamedInstance,
    c_opt: Option<i64>,
    exact: Solution,
    scaled: Solution,
}

fn ceil_half(x: i64) -> i64 {
    (x + 1).div_euclid(2)
}

/// Over-delay states visited by a run: each state a cycle was cancelled in,
/// plus the final one when the loop stopped short of the bound.
fn over_delay_states(inst: &Instance, run: &RungRun) -> Vec<PathSet> {
    let mut out: Vec<PathSet> = run.outcome.trace.iter().map(|r| PathSet::new(inst, r.paths.clone()).unwrap()).collect();
    if run.outcome.end != LoopEnd::Met {
        out.push(run.outcome.paths.clone());
    }
    out.retain(|p| p.total_delay() > inst.delay_bound());
    out
}

fn run_suite(suite: &[NamedInstance]) -> Vec<SuiteRun> {
    let exact_opts = SolverOptions::default();
    let scaled_opts = SolverOptions { mode: Mode::Scaled, ..SolverOptions::default() };
    suite
        .iter()
        .map(|item| {
            let inst = &item.instance;
            let c_opt = brute_krsp(inst).unwrap().map(|o| o.cost);
            SuiteRun {
                item: item.clone(),
                c_opt,
                exact: solve(inst, &exact_opts).unwrap_or_else(|e| panic!("{}: {e}", item.name)),
                scaled: solve(inst, &scaled_opts).unwrap_or_else(|e| panic!("{}: {e}", item.name)),
            }
        })
        .collect()
}

fn exact_bifactor(runs: &[SuiteRun], report: &mut Report) {
    let mut bad = Vec::new();
    let mut feasible = 0;
    let mut worst = Rational64::from_integer(0);
    for r in runs {
        let Some(opt) = r.c_opt else { continue };
        feasible += 1;
        let p = &r.exact.paths;
        let ok = common::check_paths(&r.item.instance, p.paths()).is_ok()
            && p.total_delay() <= r.item.instance.delay_bound()
            && p.total_cost() <= 2 * opt;
        if !ok {
            bad.push(r.item.name.clone());
        }
        if opt > 0 {
            worst = worst.max(Rational64::new(p.total_cost(), opt));
        }
    }
    report.record(
        1,
        "exact mode: delay <= D and cost <= 2 C_OPT",
        bad.is_empty(),
        format!("{}/{feasible} feasible instances within bounds, worst cost ratio {worst}; failures {bad:?}", feasible - bad.len()),
    );
}

fn scaled_bifactor(runs: &[SuiteRun], report: &mut Report) {
    let mut bad = Vec::new();
    let mut feasible = 0;
    let mut fallbacks = 0;
    for r in runs {
        let Some(opt) = r.c_opt else { continue };
        feasible += 1;
        fallbacks += r.scaled.scaled_fallback as usize;
        let p = &r.scaled.paths;
        let d = r.item.instance.delay_bound();
        let ok = common::check_paths(&r.item.instance, p.paths()).is_ok()
            && p.total_delay() <= ceil_half(3 * d)
            && p.total_cost() <= ceil_half(5 * opt);
        if !ok {
            bad.push(r.item.name.clone());
        }
    }
    report.record(
        2,
        "scaled mode (1/2, 1/2): delay <= ceil(1.5 D) and cost <= ceil(2.5 C_OPT)",
        bad.is_empty(),
        format!("{}/{feasible} within bounds ({fallbacks} fell back to exact); failures {bad:?}", feasible - bad.len()),
    );
}

fn feasibility_agreement(runs: &[SuiteRun], report: &mut Report) {
    let mut bad = Vec::new();
    let mut tightened = 0;
    for r in runs {
        let inst = &r.item.instance;
        if check_feasible(inst) != r.c_opt.is_some() {
            bad.push(r.item.name.clone());
        }
        // Just below the least achievable delay the verdict must flip.
        if let Some((lo, _)) = delay_range(inst).unwrap() {
            if lo > 0 {
                tightened += 1;
                let tight = inst.with_delay_bound(lo - 1).unwrap();
                if check_feasible(&tight) != brute_krsp(&tight).unwrap().is_some() {
                    bad.push(format!("{}@D={}", r.item.name, lo - 1));
                }
            }
        }
    }
    report.record(
        3,
        "check_feasible agrees with brute force",
        bad.is_empty(),
        format!("{} suite instances plus {tightened} tightened variants; disagreements {bad:?}", runs.len()),
    );
}

fn negative_delay_witness(runs: &[SuiteRun], report: &mut Report) {
    let mut states = 0;
    let mut bad = Vec::new();
    for r in runs {
        let inst = &r.item.instance;
        if r.c_opt.is_none() {
            continue;
        }
        let mut seen = BTreeSet::new();
        for run in r.exact.runs.iter() {
            for ps in over_delay_states(inst, run) {
                if !seen.insert(ps.edge_ids()) {
                    continue;
                }
                states += 1;
                let cycles = enumerate_cycles(inst.vertex_count(), &residual_edges(inst, &ps)).unwrap();
                if !cycles.iter().any(|c| c.delay() < 0) {
                    bad.push(format!("{} {:?}", r.item.name, ps.paths()));
                }
            }
        }
    }
    report.record(
        4,
        "every over-delay state has a negative-delay residual cycle",
        bad.is_empty(),
        format!("{states} distinct over-delay states checked; missing witness {bad:?}"),
    );
}

fn soundness(runs: &[SuiteRun], copt_runs: &[(String, RungRun)], report: &mut Report) {
    let mut checked = 0;
    let mut bad = Vec::new();
    let all = runs
        .iter()
        .flat_map(|r| r.exact.runs.iter().chain(&r.scaled.runs).map(move |x| (&r.item.name, x)))
        .chain(copt_runs.iter().map(|(n, x)| (n, x)));
    for (name, run) in all {
        for rec in &run.outcome.trace {
            checked += 1;
            if !verify_bicameral(rec.cycle.cost, rec.cycle.delay, rec.delta_d, rec.delta_c, run.c_hat) {
                bad.push(format!("{name} iter {} estimate {}", rec.index, run.c_hat));
            }
        }
    }
    report.record(5, "every returned cycle verifies as bicameral", bad.is_empty(), format!("{checked} cycles checked; failures {bad:?}"));
}

fn archive_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("lp-misses")
}

/// Runs the loop with the true optimum as the estimate on every feasible
/// instance.
fn copt_runs(runs: &[SuiteRun]) -> Vec<(String, RungRun)> {
    let opts = SolverOptions::default();
    runs.iter()
        .filter_map(|r| {
            let c_opt = r.c_opt?;
            let inst = &r.item.instance;
            let start = phase1_solution(inst, Phase1Mode::MinCost).unwrap();
            let outcome = cancel_cycles(inst, start, c_opt, &opts).unwrap();
            Some((r.item.name.clone(), RungRun { c_hat: c_opt, outcome }))
        })
        .collect()
}

fn completeness(runs: &[SuiteRun], copt: &[(String, RungRun)], report: &mut Report) {
    let mut states = 0;
    let mut hybrid_miss = Vec::new();
    let mut lp_miss = Vec::new();
    let mut ends = [0usize; 4];
    for (name, run) in copt {
        let inst = &runs.iter().find(|r| &r.item.name == name).unwrap().item.instance;
        ends[run.outcome.end as usize] += 1;
        for ps in over_delay_states(inst, run) {
            states += 1;
            let ctx = SearchContext::new(inst, &ps, run.c_hat, None).unwrap();
            if find_bicameral(&ctx, CycleSource::Hybrid).is_none() {
                hybrid_miss.push(name.clone());
            }
            if find_bicameral(&ctx, CycleSource::Lp).is_none() {
                let dir = archive_dir();
                std::fs::create_dir_all(&dir).unwrap();
                let file = dir.join(format!("{name}-{}.txt", lp_miss.len()));
                let body = format!("{}# C_OPT {}\n# state {:?}\n", render_instance(inst), run.c_hat, ps.paths());
                std::fs::write(&file, body).unwrap();
                lp_miss.push(name.clone());
            }
        }
    }
    let lp_note = if lp_miss.is_empty() {
        "lp-only search found a cycle on every state".to_string()
    } else {
        format!("lp-only misses {} on {lp_miss:?}, archived under {}", lp_miss.len(), archive_dir().display())
    };
    report.record(
        6,
        "hybrid search finds a cycle on every over-delay state (estimate = C_OPT)",
        hybrid_miss.is_empty(),
        format!(
            "{states} states over {} runs (end met/none/cap/repeat = {:?}); hybrid misses {hybrid_miss:?}; {lp_note}",
            copt.len(),
            ends
        ),
    );
}

fn monotonicity(copt: &[(String, RungRun)], report: &mut Report) {
    let mut pairs = 0;
    let mut bad = Vec::new();
    for (name, run) in copt {
        for w in run.outcome.trace.windows(2) {
            match w[0].progresses_to(&w[1]) {
                Some(true) => pairs += 1,
                Some(false) => {
                    pairs += 1;
                    bad.push(format!("{name} iter {}", w[0].index));
                }
                None => {}
            }
        }
    }
    report.record(
        7,
        "ratio rises, or holds while delay falls, between consecutive iterations",
        bad.is_empty(),
        format!("{pairs} consecutive pairs with defined ratios; violations {bad:?}"),
    );
}

/// Aux arcs tracing `cycle` from anchor `v` at level 0, closed by a wrap
/// when the cost is positive. `None` if some prefix cost leaves `[0, B]`.
fn counterpart(g: &ResidualGraph, aux: &AuxGraph, cycle: &Cycle, v: usize) -> Option<Vec<usize>> {
    let b = aux.budget() as i64;
    let at = cycle.edges().iter().position(|&id| g.edge(id).tail == v)?;
    let mut rotated = cycle.edges().to_vec();
    rotated.rotate_left(at);
    let mut level = 0i64;
    let mut arcs = Vec::new();
    for id in rotated {
        let e = g.edge(id);
        let next = level + e.cost;
        if !(0..=b).contains(&next) {
            return None;
        }
        let tail = aux.vertex(e.tail, level as usize);
        let arc = aux.edges().iter().position(|a| a.kind == AuxKind::Shift(id) && a.tail == tail)?;
        arcs.push(arc);
        level = next;
    }
    if level > 0 {
        let tail = aux.vertex(v, level as usize);
        let wrap = aux.edges().iter().position(|a| a.kind == AuxKind::Wrap && a.tail == tail && a.head == aux.vertex(v, 0))?;
        arcs.push(wrap);
    }
    Some(arcs)
}

/// Simple cycles of the aux graph as arc index lists, rooted at their least
/// vertex. Stops after `cap` cycles.
fn aux_cycles(aux: &AuxGraph, cap: usize) -> (Vec<Vec<usize>>, bool) {
    let n = aux.vertex_count();
    let mut out_of = vec![Vec::new(); n];
    for (i, a) in aux.edges().iter().enumerate() {
        out_of[a.tail].push(i);
    }
    let mut found = Vec::new();
    let mut truncated = false;
    for root in 0..n {
        let mut on = vec![false; n];
        on[root] = true;
        // Explicit stack of (vertex, next out-arc position).
        let mut stack = vec![(root, 0usize)];
        let mut arcs: Vec<usize> = Vec::new();
        while let Some((u, i)) = stack.pop() {
            if i >= out_of[u].len() {
                on[u] = false;
                arcs.pop();
                continue;
            }
            stack.push((u, i + 1));
            let a = out_of[u][i];
            let h = aux.edges()[a].head;
            if h == root {
                let mut c = arcs.clone();
                c.push(a);
                found.push(c);
                if found.len() >= cap {
                    truncated = true;
                    return (found, truncated);
                }
            } else if h > root && !on[h] {
                on[h] = true;
                arcs.push(a);
                stack.push((h, 0));
            }
        }
    }
    (found, truncated)
}

fn random_residual<R: Rng>(rng: &mut R) -> (Instance, PathSet, ResidualGraph) {
    let k = rng.gen_range(1..=2);
    let inst = common::instance_with_paths(rng, (3, 6), k);
    let ps = common::random_paths(rng, &inst);
    let g = build_residual(&inst, &ps).unwrap();
    (inst, ps, g)
}

fn aux_correspondence(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pairs = 0;
    let mut built = 0;
    let mut roundtrip_bad = 0;
    let mut anchor_ok: BTreeSet<(usize, usize, Vec<EdgeId>)> = BTreeSet::new();
    let mut anchor_all: BTreeSet<(usize, usize, Vec<EdgeId>)> = BTreeSet::new();
    let mut lifted = 0;
    let mut lifted_bad = Vec::new();
    let mut exhaustive = 0;
    let mut truncated = 0;
    let mut first_gap = None;
    for graph in 0..50 {
        let (inst, ps, g) = random_residual(&mut rng);
        let cycles = enumerate_simple_cycles(&g).unwrap();
        let delta_d = inst.delay_bound() - ps.total_delay();
        for b in 1..=6usize {
            for v in 0..g.vertex_count() {
                let plus = build_aux(&g, v, b, Sign::Plus);
                for o in cycles.iter().filter(|o| (0..=b as i64).contains(&o.cost())) {
                    if !o.vertices(&g).contains(&v) {
                        continue;
                    }
                    pairs += 1;
                    anchor_all.insert((graph, b, o.edges().to_vec()));
                    match counterpart(&g, &plus, o, v) {
                        Some(arcs) => {
                            built += 1;
                            anchor_ok.insert((graph, b, o.edges().to_vec()));
                            if lift_cycle(&g, &plus, &arcs) != vec![o.clone()] {
                                roundtrip_bad += 1;
                            }
                        }
                        None => {
                            first_gap.get_or_insert_with(|| format!("graph {graph} B={b} v={v} cycle {:?} (c={})", o.edges(), o.cost()));
                        }
                    }
                }
                for sign in [Sign::Plus, Sign::Minus] {
                    let aux = if sign == Sign::Plus { plus.clone() } else { build_aux(&g, v, b, sign) };
                    let mut aux_walks = Vec::new();
                    let sol = solve_lp(&make_cycle_lp(&aux, delta_d));
                    if sol.status == LpStatus::Optimal {
                        let arcs: Vec<(usize, usize)> = aux.edges().iter().map(|e| (e.tail, e.head)).collect();
                        let parts = decompose_circulation(&sol.values, aux.vertex_count(), &arcs).unwrap();
                        aux_walks.extend(parts.into_iter().map(|w| w.arcs));
                    }
                    if g.vertex_count() <= 4 && b <= 4 {
                        let (all, cut) = aux_cycles(&aux, 200_000);
                        exhaustive += all.len();
                        truncated += cut as usize;
                        aux_walks.extend(all);
                    }
                    for walk in aux_walks {
                        for o in lift_cycle(&g, &aux, &walk) {
                            lifted += 1;
                            if o.cost().unsigned_abs() as usize > b {
                                if lifted_bad.len() < 5 {
                                    lifted_bad.push(format!("graph {graph} B={b} v={v} {sign:?} cycle {:?} c={}", o.edges(), o.cost()));
                                } else {
                                    lifted_bad.push(String::new());
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let misses = pairs - built;
    let pass = misses == 0 && roundtrip_bad == 0 && lifted_bad.is_empty() && truncated == 0;
    let shown: Vec<&String> = lifted_bad.iter().filter(|s| !s.is_empty()).collect();
    report.record(
        8,
        "cycles with cost in [0,B] embed in the + aux graph; lifted cycles have |cost| <= B",
        pass,
        format!(
            "{built}/{pairs} (cycle, anchor) pairs embed ({misses} leave [0,B] on some prefix; first {}); \
             {}/{} cycles embed from at least one anchor; {roundtrip_bad} lift round-trip mismatches; \
             {lifted} lifted cycles ({exhaustive} from exhaustive aux enumeration, {truncated} truncated), {} over budget {shown:?}",
            first_gap.unwrap_or_else(|| "none".into()),
            anchor_ok.len(),
            anchor_all.len(),
            lifted_bad.len()
        ),
    );
}

fn flow_properties(report: &mut Report) {
    const TRIALS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad1 = Vec::new();
    let mut cycles_used = 0;
    for t in 0..TRIALS {
        let k = rng.gen_range(1..=3);
        let inst = common::instance_with_paths(&mut rng, (3, 8), k);
        let ps = common::random_paths(&mut rng, &inst);
        let g = build_residual(&inst, &ps).unwrap();
        let mut cycles = enumerate_simple_cycles(&g).unwrap();
        cycles.shuffle(&mut rng);
        let want = rng.gen_range(0..=cycles.len().min(4));
        let mut used = BTreeSet::new();
        let mut chosen = Vec::new();
        for o in cycles.into_iter() {
            if chosen.len() == want {
                break;
            }
            if o.edges().iter().all(|e| !used.contains(e)) {
                used.extend(o.edges().iter().copied());
                chosen.push(o);
            }
        }
        cycles_used += chosen.len();
        let res = residual_edges(&inst, &ps);
        let cycle_edges: Vec<_> = chosen.iter().flat_map(|o| o.edges().iter().map(|id| res[id.0].clone())).collect();
        let merged = symmetric_diff(&path_edges(&inst, &ps), &cycle_edges);
        match decompose_flow(&merged, &inst) {
            Ok(dec) => {
                if let Err(e) = common::check_paths(&inst, dec.paths.paths()) {
                    bad1.push(format!("trial {t}: {e}"));
                }
            }
            Err(e) => bad1.push(format!("trial {t}: {e}")),
        }
    }
    report.record(
        9,
        "paths xor disjoint residual cycles decomposes into k disjoint paths",
        bad1.is_empty(),
        format!("{TRIALS} trials, {cycles_used} cycles applied; failures {:?}", &bad1[..bad1.len().min(5)]),
    );

    let mut bad2 = Vec::new();
    for t in 0..TRIALS {
        let k = rng.gen_range(1..=3);
        let inst = common::instance_with_paths(&mut rng, (3, 8), k);
        let opt = common::random_paths(&mut rng, &inst);
        let cur = common::random_paths(&mut rng, &inst);
        let res = residual_edges(&inst, &cur);
        let cycles = diff_cycles(&opt, &cur, &inst).unwrap();
        let mut balance = vec![0i64; inst.vertex_count()];
        let mut seen = BTreeSet::new();
        let mut err = None;
        for o in &cycles {
            if let Err(e) = common::check_closed(&res, o.edges()) {
                err = Some(e);
            }
            for id in o.edges() {
                if !seen.insert(*id) {
                    err = Some(format!("edge {id} in two cycles"));
                }
                balance[res[id.0].tail] -= 1;
                balance[res[id.0].head] += 1;
            }
        }
        let cost: i64 = cycles.iter().map(|o| o.cost()).sum();
        let delay: i64 = cycles.iter().map(|o| o.delay()).sum();
        if balance.iter().any(|&b| b != 0) {
            err = Some(format!("unbalanced {balance:?}"));
        }
        if cost != opt.total_cost() - cur.total_cost() || delay != opt.total_delay() - cur.total_delay() {
            err = Some(format!("sums ({cost}, {delay}) do not telescope"));
        }
        if let Some(e) = err {
            bad2.push(format!("trial {t}: {e}"));
        }
    }
    report.record(
        9,
        "difference of two path sets splits into balanced cycles with telescoping sums",
        bad2.is_empty(),
        format!("{TRIALS} trials; failures {:?}", &bad2[..bad2.len().min(5)]),
    );
}

fn iteration_bound(runs: &[SuiteRun], report: &mut Report) {
    let mut bad = Vec::new();
    let mut most = 0;
    for r in runs {
        let inst = &r.item.instance;
        let cap = inst.delay_bound() as u128 * inst.total_cost() as u128 * inst.total_delay() as u128;
        let iters = r.exact.total_iterations as u128;
        most = most.max(r.exact.total_iterations);
        if iters > cap {
            bad.push(format!("{} ({iters} > {cap})", r.item.name));
        }
    }
    report.record(
        10,
        "cancellation iterations stay within D * sum(c) * sum(d)",
        bad.is_empty(),
        format!("{} runs, most iterations in one run {most}; over the bound {bad:?}", runs.len()),
    );
}

fn main() {
    let started = Instant::now();
    let suite = generate_suite(DEFAULT_COUNT, DEFAULT_SEED);
    let runs = run_suite(&suite);
    let copt = copt_runs(&runs);
    println!("suite: {} instances, seed {DEFAULT_SEED}, solved in {:.1?}", runs.len(), started.elapsed());

    let mut report = Report(Vec::new());
    exact_bifactor(&runs, &mut report);
    scaled_bifactor(&runs, &mut report);
    feasibility_agreement(&runs, &mut report);
    negative_delay_witness(&runs, &mut report);
    soundness(&runs, &copt, &mut report);
    completeness(&runs, &copt, &mut report);
    monotonicity(&copt, &mut report);
    aux_correspondence(&mut report);
    flow_properties(&mut report);
    iteration_bound(&runs, &mut report);

    let failed: Vec<&Verdict> = report.0.iter().filter(|v| !v.pass).collect();
    let gap = |id: usize| KNOWN_GAPS.iter().find(|g| g.0 == id).map(|g| g.1);
    let blocking: Vec<&&Verdict> = failed.iter().filter(|v| gap(v.id).is_none()).collect();
    println!(
        "acceptance: {} passed, {} failed ({} known gaps), {:.1?}",
        report.0.len() - failed.len(),
        failed.len(),
        failed.len() - blocking.len(),
        started.elapsed()
    );
    for v in &failed {
        if let Some(why) = gap(v.id) {
            println!("known gap {}: {why}", v.id);
        }
    }
    for (id, _) in KNOWN_GAPS {
        if report.0.iter().filter(|v| v.id == *id).all(|v| v.pass) {
            println!("note: criterion {id} is listed as a known gap but passed");
        }
    }
    if !blocking.is_empty() {
        for v in &blocking {
            eprintln!("failed {} {}: {}", v.id, v.name, v.detail);
        }
        std::process::exit(1);
    }
}
