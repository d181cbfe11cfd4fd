//! Random valid Kato graphs for property tests and the `check` command.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{KatoGraph, VertexId};
use crate::group::{catalog_group, injections, Group, GroupInjection};

/// Catalog groups of order at most `max_order` (at most 12).
pub fn small_groups(max_order: usize) -> Vec<Group> {
    const NAMES: [&str; 18] = [
        "C1", "C2", "C3", "C4", "D2", "C5", "C6", "D3", "C7", "C8", "D4", "C9", "C10", "D5", "C11",
        "C12", "D6", "A4",
    ];
    NAMES
        .iter()
        .map(|n| catalog_group(n).expect("catalog group"))
        .filter(|g| g.order() <= max_order.min(12))
        .collect()
}

#[derive(Clone, Debug)]
pub struct RandomGraphSpec {
    pub max_vertices: usize,
    pub max_order: usize,
    /// Extra edges beyond a spanning tree.
    pub max_betti: usize,
    pub max_cusps: usize,
}

impl Default for RandomGraphSpec {
    fn default() -> Self {
        RandomGraphSpec { max_vertices: 8, max_order: 12, max_betti: 2, max_cusps: 6 }
    }
}

fn pick_injection<R: Rng>(rng: &mut R, h: &Group, g: &Group) -> Option<GroupInjection> {
    injections(h, g).choose(rng).cloned()
}

/// An edge group embedding in both `a` and `b`. Half the time the whole
/// group of one end is tried first, so contractible edges are common.
fn edge_labels<R: Rng>(
    rng: &mut R,
    pool: &[Group],
    a: &Group,
    b: &Group,
) -> (Group, [GroupInjection; 2]) {
    let mut tries: Vec<Group> = Vec::new();
    if rng.gen_bool(0.5) {
        tries.push(if rng.gen_bool(0.5) { a.clone() } else { b.clone() });
    }
    for _ in 0..4 {
        tries.push(pool.choose(rng).expect("nonempty pool").clone());
    }
    tries.push(pool[0].clone());
    for h in tries {
        if h.order() > a.order().min(b.order()) {
            continue;
        }
        if let (Some(x), Some(y)) = (pick_injection(rng, &h, a), pick_injection(rng, &h, b)) {
            return (h, [x, y]);
        }
    }
    unreachable!("the trivial group embeds everywhere")
}

/// A connected, validated Kato graph drawn from `spec`.
pub fn random_graph<R: Rng>(rng: &mut R, spec: &RandomGraphSpec) -> KatoGraph {
    let pool = small_groups(spec.max_order);
    let mut k = KatoGraph::new();
    let n = rng.gen_range(1..=spec.max_vertices.max(1));
    for _ in 0..n {
        let g = pool.choose(rng).expect("nonempty pool").clone();
        k.add_vertex(g);
    }
    let group_of = |k: &KatoGraph, v: VertexId| k.vertex(v).expect("vertex").group.clone();
    let join = |k: &mut KatoGraph, rng: &mut R, a: VertexId, b: VertexId| {
        let (h, maps) = edge_labels(rng, &pool, &group_of(k, a), &group_of(k, b));
        k.add_edge(h, [a, b], maps);
    };
    for i in 1..n {
        let a = VertexId(rng.gen_range(0..i) as u32);
        let b = VertexId(i as u32);
        if rng.gen_bool(0.5) {
            join(&mut k, rng, a, b);
        } else {
            join(&mut k, rng, b, a);
        }
    }
    for _ in 0..rng.gen_range(0..=spec.max_betti) {
        let a = VertexId(rng.gen_range(0..n) as u32);
        let b = VertexId(rng.gen_range(0..n) as u32);
        join(&mut k, rng, a, b);
    }
    for _ in 0..rng.gen_range(0..=spec.max_cusps) {
        let v = VertexId(rng.gen_range(0..n) as u32);
        let g = group_of(&k, v);
        let orders: Vec<usize> = g.order_profile().into_iter().filter(|&o| o >= 2).collect();
        let Some(&e) = orders.choose(rng) else {
            continue;
        };
        let c = catalog_group(&format!("C{e}")).expect("cyclic catalog group");
        let map = pick_injection(rng, &c, &g).expect("an element of order e exists");
        k.add_cusp(c, v, map);
    }
    debug_assert!(super::validate(&k).is_ok());
    k
}
