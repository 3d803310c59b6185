#![allow(dead_code)]

use std::collections::HashSet;

use krsp::graph::{gen_random_instance, Edge, EdgeId, GenParams, Instance, PathSet};
use krsp::phase1::min_cost_k_disjoint;
use rand::Rng;

/// Random draws until one has `k` disjoint paths.
pub fn instance_with_paths<R: Rng>(rng: &mut R, n: (usize, usize), k: usize) -> Instance {
    loop {
        let nv = rng.gen_range(n.0..=n.1);
        let m = rng.gen_range(nv..=2 * nv);
        let inst = gen_random_instance(GenParams { n: nv, m, max_cost: 5, max_delay: 5, k, seed: rng.gen() });
        if min_cost_k_disjoint(&inst).is_ok() {
            return inst.with_delay_bound(rng.gen_range(0..=inst.total_delay())).unwrap();
        }
    }
}

/// A k-disjoint path set picked as the min-cost one under random weights.
pub fn random_paths<R: Rng>(rng: &mut R, inst: &Instance) -> PathSet {
    let weights: Vec<(i64, i64)> = inst.edges().iter().map(|_| (rng.gen_range(0..10), rng.gen_range(0..10))).collect();
    let reweighted = inst.with_weights(weights, inst.delay_bound()).unwrap();
    let ps = min_cost_k_disjoint(&reweighted).expect("reweighting keeps the topology");
    PathSet::new(inst, ps.paths().to_vec()).unwrap()
}

/// Checks `paths` are k edge-disjoint s-t walks over instance edges, without
/// using the library's own validation.
pub fn check_paths(inst: &Instance, paths: &[Vec<EdgeId>]) -> Result<(), String> {
    if paths.len() != inst.path_count() {
        return Err(format!("{} paths, want {}", paths.len(), inst.path_count()));
    }
    let mut used = HashSet::new();
    for p in paths {
        let mut at = inst.source();
        let mut visited = vec![at];
        for &id in p {
            if id.0 >= inst.edges().len() {
                return Err(format!("edge {id} not in G"));
            }
            let e = &inst.edges()[id.0];
            if e.tail != at {
                return Err(format!("path {p:?} breaks at edge {id}"));
            }
            if !used.insert(id) {
                return Err(format!("edge {id} used twice"));
            }
            at = e.head;
            if visited.contains(&at) {
                return Err(format!("path {p:?} revisits vertex {at}"));
            }
            visited.push(at);
        }
        if at != inst.sink() {
            return Err(format!("path {p:?} ends at {at}"));
        }
    }
    Ok(())
}

/// Checks `ids` chain head to tail into a closed simple cycle of `edges`.
pub fn check_closed(edges: &[Edge], ids: &[EdgeId]) -> Result<(), String> {
    let get = |id: EdgeId| edges.iter().find(|e| e.id == id).ok_or(format!("edge {id} missing"));
    let first = get(*ids.first().ok_or("empty cycle")?)?;
    let mut at = first.tail;
    for &id in ids {
        let e = get(id)?;
        if e.tail != at {
            return Err(format!("cycle {ids:?} breaks at {id}"));
        }
        at = e.head;
    }
    if at != first.tail {
        return Err(format!("cycle {ids:?} is open"));
    }
    Ok(())
}
