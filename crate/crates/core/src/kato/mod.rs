//! Kato graphs: finite connected graphs of finite groups with cusps.
//!
//! Cusps are half-edges carrying the decomposition group of a branch point.
//! They are not part of the finite graph, so they never count towards the
//! Betti number or the Euler characteristic.

mod canonical;
mod elementary;
mod moves;
pub mod random;
mod stable;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_traits::Zero;

use crate::group::{same_group, Group, GroupError, GroupInjection};
use crate::Rational;

pub use canonical::{canonical_form, CanonicalKey};
pub use elementary::elementary_kato;
pub use moves::{paste, slide_cusp, slide_edge};
pub use stable::{
    contract, eligible_contractions, is_stable, stable_model, stable_model_with, Contraction,
};

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", $prefix, self.0)
            }
        }
    };
}

id_type!(VertexId, "v");
id_type!(EdgeId, "e");
id_type!(CuspId, "c");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub group: Group,
}

/// A finite edge; `maps[i]` embeds the edge group into the group of `ends[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub group: Group,
    pub ends: [VertexId; 2],
    pub maps: [GroupInjection; 2],
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cusp {
    pub id: CuspId,
    pub group: Group,
    pub vertex: VertexId,
    pub map: GroupInjection,
}

impl Cusp {
    /// Ramification index of the branch point.
    pub fn index(&self) -> usize {
        self.group.order()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KatoGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub cusps: Vec<Cusp>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphInvariants {
    pub betti: usize,
    pub cusp_count: usize,
    pub euler_char: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KatoError {
    #[error("graph has no vertices")]
    Empty,
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("{item} refers to missing vertex {vertex}")]
    DanglingEndpoint { item: String, vertex: VertexId },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("bad labeling on {item}: {reason}")]
    BadLabeling { item: String, reason: String },
    #[error("no edge {0}")]
    UnknownEdge(EdgeId),
    #[error("no cusp {0}")]
    UnknownCusp(CuspId),
    #[error("element index {element} is not in the group of {vertex}")]
    NotInGroup { element: usize, vertex: VertexId },
    #[error("cusp groups {0} and {1} are not isomorphic via the given match")]
    CuspMismatch(String, String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

impl KatoGraph {
    pub fn new() -> KatoGraph {
        KatoGraph::default()
    }

    pub fn add_vertex(&mut self, group: Group) -> VertexId {
        let id = VertexId(self.vertices.iter().map(|v| v.id.0 + 1).max().unwrap_or(0));
        self.vertices.push(Vertex { id, group });
        id
    }

    pub fn add_edge(
        &mut self,
        group: Group,
        ends: [VertexId; 2],
        maps: [GroupInjection; 2],
    ) -> EdgeId {
        let id = EdgeId(self.edges.iter().map(|e| e.id.0 + 1).max().unwrap_or(0));
        self.edges.push(Edge { id, group, ends, maps });
        id
    }

    /// An edge with trivial group between two vertices.
    pub fn add_trivial_edge(&mut self, trivial: &Group, a: VertexId, b: VertexId) -> EdgeId {
        let map_into = |v: VertexId| {
            let target = self.vertex(v).expect("endpoint exists").group.clone();
            let map = vec![target.identity()];
            GroupInjection::new(trivial.clone(), target, map).expect("trivial group embeds")
        };
        let maps = [map_into(a), map_into(b)];
        self.add_edge(trivial.clone(), [a, b], maps)
    }

    pub fn add_cusp(&mut self, group: Group, vertex: VertexId, map: GroupInjection) -> CuspId {
        let id = CuspId(self.cusps.iter().map(|c| c.id.0 + 1).max().unwrap_or(0));
        self.cusps.push(Cusp { id, group, vertex, map });
        id
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn vertex_index(&self, id: VertexId) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn cusp(&self, id: CuspId) -> Option<&Cusp> {
        self.cusps.iter().find(|c| c.id == id)
    }

    /// Number of finite edge ends at `v` (a loop counts twice).
    pub fn finite_valency(&self, v: VertexId) -> usize {
        self.edges.iter().map(|e| e.ends.iter().filter(|&&x| x == v).count()).sum()
    }

    /// Finite valency plus cusps.
    pub fn valency(&self, v: VertexId) -> usize {
        self.finite_valency(v) + self.cusps.iter().filter(|c| c.vertex == v).count()
    }

    pub fn betti(&self) -> usize {
        (self.edges.len() + 1).saturating_sub(self.vertices.len())
    }

    /// Σ_v 1/|N_v| − Σ_e 1/|N_e| over vertices and finite edges.
    pub fn euler_char(&self) -> Rational {
        let inv = |g: &Group| Rational::new(1.into(), g.order().into());
        let mut chi = Rational::zero();
        for v in &self.vertices {
            chi += inv(&v.group);
        }
        for e in &self.edges {
            chi -= inv(&e.group);
        }
        chi
    }

    /// Sorted multiset of cusp orders.
    pub fn cusp_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.cusps.iter().map(Cusp::index).collect();
        v.sort_unstable();
        v
    }

    pub fn is_connected(&self) -> bool {
        let Some(first) = self.vertices.first() else {
            return false;
        };
        let mut seen = BTreeSet::from([first.id]);
        let mut queue = VecDeque::from([first.id]);
        while let Some(v) = queue.pop_front() {
            for e in &self.edges {
                for i in 0..2 {
                    if e.ends[i] == v && seen.insert(e.ends[1 - i]) {
                        queue.push_back(e.ends[1 - i]);
                    }
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Checks ids and endpoints only (no group-theoretic checks).
    pub(crate) fn check_structure(&self) -> Result<(), KatoError> {
        if self.vertices.is_empty() {
            return Err(KatoError::Empty);
        }
        let mut ids = BTreeSet::new();
        for v in &self.vertices {
            if !ids.insert(v.id) {
                return Err(KatoError::DuplicateId(v.id.to_string()));
            }
        }
        let mut edge_ids = BTreeSet::new();
        for e in &self.edges {
            if !edge_ids.insert(e.id) {
                return Err(KatoError::DuplicateId(e.id.to_string()));
            }
            for &v in &e.ends {
                if !ids.contains(&v) {
                    return Err(KatoError::DanglingEndpoint { item: e.id.to_string(), vertex: v });
                }
            }
        }
        let mut cusp_ids = BTreeSet::new();
        for c in &self.cusps {
            if !cusp_ids.insert(c.id) {
                return Err(KatoError::DuplicateId(c.id.to_string()));
            }
            if !ids.contains(&c.vertex) {
                return Err(KatoError::DanglingEndpoint {
                    item: c.id.to_string(),
                    vertex: c.vertex,
                });
            }
        }
        if !self.is_connected() {
            return Err(KatoError::Disconnected);
        }
        Ok(())
    }

    fn check_injection(
        &self,
        item: String,
        group: &Group,
        vertex: VertexId,
        map: &GroupInjection,
    ) -> Result<(), KatoError> {
        let bad = |reason: String| KatoError::BadLabeling { item: item.clone(), reason };
        let target = &self.vertex(vertex).expect("checked").group;
        if !same_group(map.source(), group) {
            return Err(bad(format!(
                "source is {} but the group is {}",
                map.source().name(),
                group.name()
            )));
        }
        if !same_group(map.target(), target) {
            return Err(bad(format!(
                "target is {} but {vertex} carries {}",
                map.target().name(),
                target.name()
            )));
        }
        GroupInjection::new(group.clone(), target.clone(), map.map().to_vec())
            .map_err(|e| bad(e.to_string()))?;
        Ok(())
    }
}

/// Checks every Kato-graph axiom and returns the invariants.
pub fn validate(graph: &KatoGraph) -> Result<GraphInvariants, KatoError> {
    graph.check_structure()?;
    for e in &graph.edges {
        for i in 0..2 {
            graph.check_injection(format!("{} end {i}", e.id), &e.group, e.ends[i], &e.maps[i])?;
        }
    }
    for c in &graph.cusps {
        graph.check_injection(c.id.to_string(), &c.group, c.vertex, &c.map)?;
    }
    Ok(invariants(graph))
}

pub(crate) fn invariants(graph: &KatoGraph) -> GraphInvariants {
    GraphInvariants {
        betti: graph.betti(),
        cusp_count: graph.cusps.len(),
        euler_char: graph.euler_char(),
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn elementary_cyclic_tree_invariants() {
        let c2 = g("C2");
        let mut k = KatoGraph::new();
        let v = k.add_vertex(c2.clone());
        k.add_cusp(c2.clone(), v, GroupInjection::identity(&c2));
        k.add_cusp(c2.clone(), v, GroupInjection::identity(&c2));
        let inv = validate(&k).unwrap();
        assert_eq!((inv.betti, inv.cusp_count), (0, 2));
        assert_eq!(inv.euler_char, rat(1, 2));
    }

    #[test]
    fn single_trivial_vertex() {
        let mut k = KatoGraph::new();
        k.add_vertex(g("C1"));
        let inv = validate(&k).unwrap();
        assert_eq!((inv.betti, inv.cusp_count), (0, 0));
        assert_eq!(inv.euler_char, rat(1, 1));
    }

    #[test]
    fn tate_segment_invariants() {
        let inv = validate(&tate_segment()).unwrap();
        assert_eq!((inv.betti, inv.cusp_count), (0, 4));
        assert_eq!(inv.euler_char, rat(0, 1));
    }

    #[test]
    fn loops_count_towards_betti() {
        let mut k = KatoGraph::new();
        let v = k.add_vertex(g("C1"));
        k.add_trivial_edge(&g("C1"), v, v);
        let inv = validate(&k).unwrap();
        assert_eq!(inv.betti, 1);
        assert_eq!(k.finite_valency(v), 2);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(validate(&KatoGraph::new()), Err(KatoError::Empty));

        let mut k = KatoGraph::new();
        k.add_vertex(g("C1"));
        k.add_vertex(g("C1"));
        assert_eq!(validate(&k), Err(KatoError::Disconnected));

        let mut k = tate_segment();
        k.edges[0].ends[1] = VertexId(9);
        assert!(matches!(validate(&k), Err(KatoError::DanglingEndpoint { .. })));

        // C2 cusp attached to a trivial vertex: wrong target
        let mut k = KatoGraph::new();
        let v = k.add_vertex(g("C1"));
        let c2 = g("C2");
        k.add_cusp(c2.clone(), v, GroupInjection::identity(&c2));
        assert!(matches!(validate(&k), Err(KatoError::BadLabeling { .. })));

        // non-injective map smuggled in
        let mut k = tate_segment();
        let c2 = g("C2");
        k.cusps[0].map = GroupInjection::from_parts_unchecked(c2.clone(), c2.clone(), vec![0, 0]);
        assert!(matches!(validate(&k), Err(KatoError::BadLabeling { .. })));
    }
}
