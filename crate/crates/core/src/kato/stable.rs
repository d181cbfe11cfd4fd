//! Contraction of unstable vertices.
//!
//! A vertex `v` is unstable along a non-loop edge `e` when `N_e → N_v` is an
//! isomorphism and `v` has fewer than three finite edge ends. Contracting `e`
//! folds `v` into the other endpoint `w`, re-attaching everything at `v`
//! through `ι_w ∘ ι_v⁻¹`. Loops are never contracted.
//!
//! One refinement keeps the fixpoint independent of the contraction order: a
//! vertex carrying cusps whose two edges both qualify is kept, since the two
//! choices would re-attach its cusps through different injections.

use super::{validate, EdgeId, KatoError, KatoGraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Contraction {
    pub edge: EdgeId,
    /// The vertex that disappears.
    pub removed: VertexId,
}

/// Every admissible contraction, sorted by edge id then removed vertex.
pub fn eligible_contractions(graph: &KatoGraph) -> Vec<Contraction> {
    let qualifies = |e: &super::Edge, v: VertexId| {
        !e.is_loop() && graph.vertex(v).expect("valid endpoint").group.order() == e.group.order()
    };
    let mut out = Vec::new();
    for e in graph.edges.iter().filter(|e| !e.is_loop()) {
        for i in 0..2 {
            let v = e.ends[i];
            if !qualifies(e, v) || graph.finite_valency(v) >= 3 {
                continue;
            }
            let ambiguous = graph.cusps.iter().any(|c| c.vertex == v)
                && graph
                    .edges
                    .iter()
                    .any(|f| f.id != e.id && f.ends.contains(&v) && qualifies(f, v));
            if !ambiguous {
                out.push(Contraction { edge: e.id, removed: v });
            }
        }
    }
    out.sort();
    out
}

pub fn is_stable(graph: &KatoGraph) -> bool {
    eligible_contractions(graph).is_empty()
}

/// Performs one contraction; the caller guarantees eligibility.
pub fn contract(graph: &KatoGraph, c: Contraction) -> Result<KatoGraph, KatoError> {
    let edge = graph.edge(c.edge).ok_or(KatoError::UnknownEdge(c.edge))?;
    let side =
        edge.ends.iter().position(|&x| x == c.removed).filter(|_| !edge.is_loop()).ok_or_else(
            || KatoError::BadLabeling {
                item: c.edge.to_string(),
                reason: format!("{} is not a contractible end", c.removed),
            },
        )?;
    let keep = edge.ends[1 - side];
    let to_edge = edge.maps[side].inverse().ok_or_else(|| KatoError::BadLabeling {
        item: c.edge.to_string(),
        reason: format!("edge group is not all of the group at {}", c.removed),
    })?;
    let phi = to_edge.then(&edge.maps[1 - side]);

    let mut out = graph.clone();
    out.edges.retain(|e| e.id != c.edge);
    out.vertices.retain(|v| v.id != c.removed);
    for e in &mut out.edges {
        for j in 0..2 {
            if e.ends[j] == c.removed {
                e.ends[j] = keep;
                e.maps[j] = e.maps[j].then(&phi);
            }
        }
    }
    for cusp in &mut out.cusps {
        if cusp.vertex == c.removed {
            cusp.vertex = keep;
            cusp.map = cusp.map.then(&phi);
        }
    }
    Ok(out)
}

/// Contracts until stable, always taking the first eligible contraction.
pub fn stable_model(graph: &KatoGraph) -> Result<KatoGraph, KatoError> {
    stable_model_with(graph, |_| 0)
}

/// Like [`stable_model`], with `choose` picking among the eligible
/// contractions at each step (its result is taken modulo the count).
pub fn stable_model_with(
    graph: &KatoGraph,
    mut choose: impl FnMut(&[Contraction]) -> usize,
) -> Result<KatoGraph, KatoError> {
    validate(graph)?;
    let mut current = graph.clone();
    loop {
        let options = eligible_contractions(&current);
        if options.is_empty() {
            return Ok(current);
        }
        let pick = options[choose(&options) % options.len()];
        current = contract(&current, pick)?;
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::group::{injections, GroupInjection};

    #[test]
    fn path_of_equal_groups_collapses() {
        let c2 = g("C2");
        let id = GroupInjection::identity(&c2);
        let mut k = KatoGraph::new();
        let a = k.add_vertex(c2.clone());
        let b = k.add_vertex(c2.clone());
        let c = k.add_vertex(c2.clone());
        k.add_edge(c2.clone(), [a, b], [id.clone(), id.clone()]);
        k.add_edge(c2.clone(), [b, c], [id.clone(), id.clone()]);
        let s = stable_model(&k).unwrap();
        assert_eq!(s.vertices.len(), 1);
        assert!(s.edges.is_empty());
        assert_eq!(validate(&s).unwrap().euler_char, k.euler_char());
    }

    #[test]
    fn proper_inclusions_are_stable() {
        let c2 = g("C2");
        let d2 = g("D2");
        let mut k = KatoGraph::new();
        let a = k.add_vertex(d2.clone());
        let b = k.add_vertex(d2.clone());
        let inj = injections(&c2, &d2);
        k.add_edge(c2.clone(), [a, b], [inj[0].clone(), inj[1].clone()]);
        assert!(is_stable(&k));
        assert_eq!(stable_model(&k).unwrap(), k);
    }

    #[test]
    fn tate_segment_is_stable() {
        assert!(is_stable(&tate_segment()));
    }

    #[test]
    fn loops_survive() {
        let mut k = KatoGraph::new();
        let v = k.add_vertex(g("C1"));
        k.add_trivial_edge(&g("C1"), v, v);
        assert!(is_stable(&k));
    }

    #[test]
    fn cusps_follow_the_contracted_vertex() {
        let c2 = g("C2");
        let c1 = g("C1");
        let mut k = KatoGraph::new();
        let a = k.add_vertex(c2.clone());
        let b = k.add_vertex(c1.clone());
        k.add_trivial_edge(&c1, a, b);
        k.add_cusp(c2.clone(), a, GroupInjection::identity(&c2));
        k.add_cusp(c2.clone(), a, GroupInjection::identity(&c2));
        let s = stable_model(&k).unwrap();
        assert_eq!(s.vertices.len(), 1);
        assert_eq!(s.vertices[0].id, a);
        assert_eq!(s.cusps.len(), 2);
        validate(&s).unwrap();
    }

    #[test]
    fn cusped_vertex_between_two_qualifying_edges_is_kept() {
        // D2 —C2— C2(cusp) —C2— D2: contracting either edge would attach the
        // cusp to a different D2, so the middle vertex stays.
        let (c2, d2) = (g("C2"), g("D2"));
        let id = GroupInjection::identity(&c2);
        let into = injections(&c2, &d2);
        let mut k = KatoGraph::new();
        let a = k.add_vertex(d2.clone());
        let m = k.add_vertex(c2.clone());
        let b = k.add_vertex(d2.clone());
        k.add_edge(c2.clone(), [a, m], [into[0].clone(), id.clone()]);
        k.add_edge(c2.clone(), [m, b], [id.clone(), into[1].clone()]);
        k.add_cusp(c2.clone(), m, id.clone());
        assert!(is_stable(&k));

        // without the cusp the path folds either way to one edge
        k.cusps.clear();
        let s = stable_model(&k).unwrap();
        assert_eq!(s.vertices.len(), 2);
        assert_eq!(s.edges.len(), 1);
    }
}
