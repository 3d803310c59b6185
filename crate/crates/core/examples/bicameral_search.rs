//! Layered auxiliary graphs, their circulation LPs, lifting back to residual
//! cycles, and the classification the solver uses to pick a cycle.

use krsp::bicameral::{build_aux, classify_cycle, find_bicameral, lp_cycles, make_cycle_lp, CycleSource, SearchContext, Sign};
use krsp::graph::parse_instance;
use krsp::lp::solve_lp;
use krsp::phase1::min_cost_k_disjoint;

fn main() {
    let inst = parse_instance("5 7 2 4\n0 4 0 0\n0 1 0 0\n1 2 1 0\n2 4 1 4\n2 3 0 3\n3 4 0 3\n1 4 9 0\n").unwrap();
    let cur = min_cost_k_disjoint(&inst).unwrap();
    // Optimum cost, as the estimate.
    let ctx = SearchContext::new(&inst, &cur, 2, None).unwrap();
    println!("delay slack {} cost slack {} budgets 1..={}", ctx.delta_d, ctx.delta_c, ctx.bmax);

    let v = 2;
    for budget in 1..=ctx.bmax {
        for sign in [Sign::Plus, Sign::Minus] {
            let aux = build_aux(&ctx.residual, v, budget, sign);
            let lp = solve_lp(&make_cycle_lp(&aux, ctx.delta_d));
            println!(
                "H{sign:?}(v={v}, B={budget}): {} vertices, {} arcs, LP {:?} objective {}",
                aux.vertex_count(),
                aux.edges().len(),
                lp.status,
                lp.objective
            );
            for o in lp_cycles(&ctx, v, budget, sign) {
                println!("    lifted {:?} c={} d={} {}", o.edges(), o.cost(), o.delay(), classify_cycle(&o, &ctx));
            }
        }
    }

    for source in [CycleSource::Lp, CycleSource::Enumerate, CycleSource::Hybrid] {
        match find_bicameral(&ctx, source) {
            Some(o) => println!("{source}: {:?} c={} d={} {}", o.edges(), o.cost(), o.delay(), classify_cycle(&o, &ctx)),
            None => println!("{source}: none"),
        }
    }
}
