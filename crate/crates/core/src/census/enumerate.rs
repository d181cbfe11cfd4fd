//! Generation of stable chart candidates.
//!
//! Every vertex group acts on the star of its vertex like a finite subgroup
//! of PGL₂ on P¹: the nontrivial half-edges at a vertex (cusps and
//! nontrivial edge ends) are exactly its branch orbits, each carrying the
//! full stabilizer, and every other half-edge is a trivial edge.
//!
//! A *piece* is a connected graph of nontrivial edges whose free branch
//! slots are all cusps. Pieces are grown one vertex at a time by gluing a
//! new vertex along one of its slots to an existing cusp, or closed up by
//! gluing two cusps to each other, and deduplicated by canonical key at
//! every size. A candidate is a multiset of pieces whose cusps realise the
//! signature, joined by trivial edges into a connected graph with
//! `Betti = g`; connected stable candidates are deduplicated by key.
//!
//! Since `Σ_v (val_v − 2) = 2g − 2 + n` and a stable vertex has valency at
//! least three once `V > 1`, no stable chart has more than
//! `max(1, 2g − 2 + n)` vertices; that is the size of the search space.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{
    dimension, integral_cover_genus, orbifold_chi_check, AdmissibilityFilter, BoundsUsed,
    CensusError, CensusReport, ChartClass, SearchBounds, Signature,
};
use crate::bass_serre::{abelian_invariants, find_markings, kernel_rank, presentation_size};
use crate::group::{
    automorphisms, branch_data, conjugacy_rep, identify, make_catalog_group,
    subgroups_up_to_conjugacy, CatalogSpec, Elem, Group, GroupInjection,
};
use crate::kato::{canonical_form, is_stable, CanonicalKey, KatoGraph, VertexId};
use crate::Rational;

/// Largest vertex count of a stable chart with this signature.
pub fn vertex_bound(sig: &Signature) -> usize {
    (2 * sig.genus as i64 - 2 + sig.n() as i64).max(1) as usize
}

fn default_cap(sig: &Signature) -> usize {
    (3 * sig.n()).max(vertex_bound(sig))
}

struct Slot {
    cusp_group: Group,
    cusp_map: GroupInjection,
    /// Gluing along this slot is redundant: an earlier slot of the same
    /// type has a conjugate image.
    repeat: bool,
    /// Exponents `j` to glue with, one per coset of the exponents realised
    /// by automorphisms of the vertex group fixing the slot's class.
    twists: Vec<usize>,
}

struct VertexType {
    group: Group,
    slots: Vec<Slot>,
}

fn power(g: &Group, x: Elem, j: usize) -> Elem {
    (0..j).fold(g.identity(), |acc, _| g.mul(acc, x))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn vertex_types(g: &Group) -> Result<Vec<VertexType>, CensusError> {
    let mut types: Vec<VertexType> = Vec::new();
    for h in subgroups_up_to_conjugacy(g)? {
        let (abstract_group, _) = h.to_group("H")?;
        let Some((group, _)) = identify(&abstract_group) else {
            continue;
        };
        if types.iter().any(|t| t.group.iso_key() == group.iso_key()) {
            continue;
        }
        let Some(data) = branch_data(&group) else {
            continue;
        };
        let mut slots = Vec::new();
        for s in data {
            let k = s.order();
            let gen = s
                .members()
                .iter()
                .find(|&x| group.element_order(x) == k)
                .expect("branch stabilizers are cyclic");
            let ck = make_catalog_group(&CatalogSpec::Cyclic(k))?;
            let class = conjugacy_rep(&group, s.members());
            slots.push(Slot {
                cusp_map: GroupInjection::from_generator_images(ck.clone(), group.clone(), &[gen])?,
                cusp_group: ck,
                repeat: slots
                    .iter()
                    .any(|t: &Slot| conjugacy_rep(&group, t.cusp_map.image()) == class),
                twists: leaf_twists(&group, gen, k),
            });
        }
        types.push(VertexType { group, slots });
    }
    Ok(types)
}

/// Representatives of the unit group mod `k` modulo the exponents `u` with
/// `α(x) ~ x^u` for some automorphism `α` (`~`: conjugate). Gluing a new
/// leaf vertex with exponents `j` and `j·u` gives isomorphic graphs.
fn leaf_twists(group: &Group, x: Elem, k: usize) -> Vec<usize> {
    let conjugates =
        |y: Elem| -> Vec<Elem> { (0..group.order()).map(|g| group.conj(g, y)).collect() };
    let realised: Vec<usize> = units(k)
        .filter(|&u| {
            let target = conjugates(power(group, x, u));
            automorphisms(group).iter().any(|a| target.contains(&a.apply(x)))
        })
        .collect();
    let mut reps: Vec<usize> = Vec::new();
    for j in units(k) {
        if !reps.iter().any(|&r| realised.iter().any(|&u| r * u % k == j % k)) {
            reps.push(j);
        }
    }
    reps
}

/// `map` precomposed with `x ↦ x^j` on its cyclic source.
fn twist(map: &GroupInjection, j: usize) -> GroupInjection {
    let images: Vec<Elem> =
        map.generator_images().iter().map(|&x| power(map.target(), x, j)).collect();
    GroupInjection::from_generator_images(map.source().clone(), map.target().clone(), &images)
        .expect("unit powers of a generator generate")
}

fn units(k: usize) -> impl Iterator<Item = usize> {
    (1..k.max(2)).filter(move |&j| gcd(j, k) == 1)
}

/// Cusps at the same vertex with conjugate images are interchangeable (up
/// to slides), so gluing at either gives isomorphic graphs.
fn cusp_classes(graph: &KatoGraph) -> Vec<(VertexId, u128)> {
    graph
        .cusps
        .iter()
        .map(|c| (c.vertex, conjugacy_rep(c.map.target(), c.map.image()).bits()))
        .collect()
}

/// `(Betti number, component count)` of a multigraph on `n` vertices.
fn shape(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> (usize, usize) {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let (mut components, mut betti) = (n, 0);
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            betti += 1;
        } else {
            parent[ra] = rb;
            components -= 1;
        }
    }
    (betti, components)
}

/// Trivial-edge lists `(a, b)`, `a ≤ b`, in nondecreasing order, that
/// turn the skeleton into a connected graph of Betti number at most `genus`
/// while giving every vertex at least `lower[v]` trivial ends.
fn trivial_edges(
    skeleton: &[(usize, usize)],
    count: usize,
    lower: &[usize],
    genus: usize,
) -> Vec<Vec<(usize, usize)>> {
    struct State<'a> {
        lower: &'a [usize],
        genus: usize,
        deg: Vec<usize>,
        cur: Vec<(usize, usize)>,
        out: Vec<Vec<(usize, usize)>>,
    }
    fn rec(st: &mut State, base: &[(usize, usize)], left: usize, from: (usize, usize)) {
        let v = st.lower.len();
        let (betti, components) = shape(v, base.iter().chain(st.cur.iter()).copied());
        if betti > st.genus || components - 1 > left {
            return;
        }
        let deficit: usize = (0..v).map(|i| st.lower[i].saturating_sub(st.deg[i])).sum();
        if deficit > 2 * left {
            return;
        }
        if left == 0 {
            st.out.push(st.cur.clone());
            return;
        }
        for a in from.0..v {
            let b0 = if a == from.0 { from.1 } else { a };
            for b in b0..v {
                st.deg[a] += 1;
                st.deg[b] += 1;
                st.cur.push((a, b));
                rec(st, base, left - 1, (a, b));
                st.cur.pop();
                st.deg[a] -= 1;
                st.deg[b] -= 1;
            }
        }
    }
    let mut st =
        State { lower, genus, deg: vec![0; lower.len()], cur: Vec::new(), out: Vec::new() };
    rec(&mut st, skeleton, count, (0, 0));
    st.out
}

#[derive(Clone)]
struct Piece {
    graph: KatoGraph,
    betti: usize,
}

impl Piece {
    fn cusp_orders(&self) -> Vec<usize> {
        let mut o: Vec<usize> = self.graph.cusps.iter().map(|c| c.group.order()).collect();
        o.sort_unstable();
        o
    }
}

struct Job<'a> {
    types: &'a [VertexType],
    sig: &'a Signature,
    max_vertices: usize,
    trivial: Group,
}

impl Job<'_> {
    fn single(&self, t: &VertexType) -> Piece {
        let mut graph = KatoGraph::new();
        let v = graph.add_vertex(t.group.clone());
        for s in &t.slots {
            graph.add_cusp(s.cusp_group.clone(), v, s.cusp_map.clone());
        }
        Piece { graph, betti: 0 }
    }

    /// Glue a fresh vertex of every type, along every slot and exponent, to
    /// each cusp.
    fn grow(&self, p: &Piece) -> Vec<Piece> {
        let mut out = Vec::new();
        let classes = cusp_classes(&p.graph);
        for (ci, c) in p.graph.cusps.iter().enumerate() {
            if classes[..ci].contains(&classes[ci]) {
                continue;
            }
            for t in self.types {
                for (si, s) in t.slots.iter().enumerate() {
                    if s.repeat || s.cusp_group.order() != c.group.order() {
                        continue;
                    }
                    for &j in &s.twists {
                        let mut graph = p.graph.clone();
                        let c = graph.cusps.remove(ci);
                        let w = graph.add_vertex(t.group.clone());
                        for (sj, other) in t.slots.iter().enumerate() {
                            if sj != si {
                                graph.add_cusp(other.cusp_group.clone(), w, other.cusp_map.clone());
                            }
                        }
                        graph.add_edge(
                            c.group.clone(),
                            [c.vertex, w],
                            [c.map.clone(), twist(&s.cusp_map, j)],
                        );
                        out.push(Piece { graph, betti: p.betti });
                    }
                }
            }
        }
        out
    }

    /// Glue two cusps of equal order to each other.
    fn close(&self, p: &Piece) -> Vec<Piece> {
        let mut out = Vec::new();
        let cusps = &p.graph.cusps;
        let classes = cusp_classes(&p.graph);
        let mut seen = Vec::new();
        for a in 0..cusps.len() {
            for b in a + 1..cusps.len() {
                if cusps[a].group.order() != cusps[b].group.order() {
                    continue;
                }
                let pair = (classes[a].clone(), classes[b].clone());
                if seen.contains(&pair) {
                    continue;
                }
                seen.push(pair);
                for j in units(cusps[a].group.order()) {
                    let mut graph = p.graph.clone();
                    let cb = graph.cusps.remove(b);
                    let ca = graph.cusps.remove(a);
                    graph.add_edge(
                        ca.group.clone(),
                        [ca.vertex, cb.vertex],
                        [ca.map.clone(), twist(&cb.map, j)],
                    );
                    out.push(Piece { graph, betti: p.betti + 1 });
                }
            }
        }
        out
    }

    /// Growth never lowers the cusp count and closing lowers it by two;
    /// every cusp the signature cannot absorb must be consumed by a later
    /// gluing, one per new vertex and two per new cycle.
    fn viable(&self, p: &Piece) -> bool {
        let closings = 2 * (self.sig.genus - p.betti);
        if p.graph.cusps.len() > self.sig.n() + closings {
            return false;
        }
        let orders = p.cusp_orders();
        let mut excess = 0;
        for (i, &o) in orders.iter().enumerate() {
            if i + 1 == orders.len() || orders[i + 1] != o {
                let have = orders.iter().filter(|&&x| x == o).count();
                let want = self.sig.indices.iter().filter(|&&x| x == o).count();
                excess += have.saturating_sub(want);
            }
        }
        excess <= self.max_vertices - p.graph.vertices.len() + closings
    }

    fn dedupe(&self, pieces: Vec<Piece>, into: &mut BTreeMap<CanonicalKey, Piece>) {
        let keyed: Vec<(CanonicalKey, Piece)> = pieces
            .into_par_iter()
            .filter(|p| self.viable(p))
            .map(|p| (canonical_form(&p.graph).expect("pieces are connected"), p))
            .collect();
        for (k, p) in keyed {
            into.entry(k).or_insert(p);
        }
    }

    /// All viable pieces up to isomorphism, by vertex count.
    fn pieces(&self) -> Vec<Vec<Piece>> {
        let mut levels: Vec<Vec<Piece>> = Vec::new();
        for _ in 0..self.max_vertices {
            let mut level = BTreeMap::new();
            let grown: Vec<Piece> = match levels.last() {
                None => self.types.iter().map(|t| self.single(t)).collect(),
                Some(prev) => prev.par_iter().flat_map_iter(|p| self.grow(p)).collect(),
            };
            self.dedupe(grown, &mut level);
            for b in 0..self.sig.genus {
                let closed: Vec<Piece> =
                    level.values().filter(|p| p.betti == b).flat_map(|p| self.close(p)).collect();
                self.dedupe(closed, &mut level);
            }
            levels.push(level.into_values().collect());
        }
        levels
    }

    /// Multisets of pieces realising the signature with at most
    /// `max_vertices` vertices and total Betti number at most `g`.
    fn skeletons<'p>(&self, pieces: &'p [Piece]) -> Vec<Vec<&'p Piece>> {
        let mut need: BTreeMap<usize, usize> = BTreeMap::new();
        for &e in &self.sig.indices {
            *need.entry(e).or_default() += 1;
        }
        let orders: Vec<Vec<usize>> = pieces.iter().map(Piece::cusp_orders).collect();
        #[allow(clippy::too_many_arguments)]
        fn rec<'p>(
            job: &Job,
            pieces: &'p [Piece],
            orders: &[Vec<usize>],
            from: usize,
            vertices: usize,
            betti: usize,
            need: &mut BTreeMap<usize, usize>,
            cur: &mut Vec<&'p Piece>,
            out: &mut Vec<Vec<&'p Piece>>,
        ) {
            if !cur.is_empty() && need.values().all(|&c| c == 0) {
                out.push(cur.clone());
            }
            for i in from..pieces.len() {
                let p = &pieces[i];
                let (v, b) = (vertices + p.graph.vertices.len(), betti + p.betti);
                if v > job.max_vertices || b > job.sig.genus {
                    continue;
                }
                let fits = orders[i].iter().all(|o| {
                    let used = orders[i].iter().filter(|&x| x == o).count();
                    need.get(o).is_some_and(|&c| c >= used)
                });
                if !fits {
                    continue;
                }
                for o in &orders[i] {
                    *need.get_mut(o).unwrap() -= 1;
                }
                cur.push(p);
                rec(job, pieces, orders, i, v, b, need, cur, out);
                cur.pop();
                for o in &orders[i] {
                    *need.get_mut(o).unwrap() += 1;
                }
            }
        }
        let mut out = Vec::new();
        rec(self, pieces, &orders, 0, 0, 0, &mut need, &mut Vec::new(), &mut out);
        out
    }

    /// Stable connected completions of one skeleton, keyed by canonical
    /// form (first occurrence wins).
    fn complete(&self, parts: &[&Piece]) -> (usize, BTreeMap<CanonicalKey, KatoGraph>) {
        let mut skeleton = KatoGraph::new();
        let mut links = Vec::new();
        for p in parts {
            let base = skeleton.vertices.len();
            let ids: Vec<VertexId> =
                p.graph.vertices.iter().map(|v| skeleton.add_vertex(v.group.clone())).collect();
            let local = |id: VertexId| p.graph.vertex_index(id).expect("piece endpoints exist");
            for e in &p.graph.edges {
                let ends = e.ends.map(local);
                skeleton.add_edge(e.group.clone(), ends.map(|i| ids[i]), e.maps.clone());
                links.push((base + ends[0], base + ends[1]));
            }
            for c in &p.graph.cusps {
                skeleton.add_cusp(c.group.clone(), ids[local(c.vertex)], c.map.clone());
            }
        }
        let v = skeleton.vertices.len();
        let mut found = BTreeMap::new();
        let Some(count) = (v + self.sig.genus).checked_sub(1 + links.len()) else {
            return (0, found);
        };
        let mut slots = vec![0; v];
        for &(a, b) in &links {
            slots[a] += 1;
            slots[b] += 1;
        }
        for c in &skeleton.cusps {
            slots[skeleton.vertex_index(c.vertex).unwrap()] += 1;
        }
        let lower: Vec<usize> =
            slots.iter().map(|&r| if v > 1 { 3usize.saturating_sub(r) } else { 0 }).collect();
        let completions = trivial_edges(&links, count, &lower, self.sig.genus);
        let examined = completions.len();
        for trivial in completions {
            let mut graph = skeleton.clone();
            for (a, b) in trivial {
                let ids = (graph.vertices[a].id, graph.vertices[b].id);
                graph.add_trivial_edge(&self.trivial, ids.0, ids.1);
            }
            if !is_stable(&graph) {
                continue;
            }
            let key = canonical_form(&graph).expect("generated graphs are well formed");
            found.entry(key).or_insert(graph);
        }
        (examined, found)
    }
}

fn classify(
    graph: KatoGraph,
    key: CanonicalKey,
    sig: &Signature,
    g: &Group,
    cover_genus: usize,
) -> Option<ChartClass> {
    if !orbifold_chi_check(&graph, sig.genus) {
        return None;
    }
    if kernel_rank(&graph, g.order()) != Rational::from_integer(cover_genus.into()) {
        return None;
    }
    let markings = find_markings(&graph, g).expect("generated graphs are valid");
    if markings.is_empty() {
        return None;
    }
    let abelianization = abelian_invariants(&graph).expect("generated graphs are valid");
    if abelianization.free_rank != sig.genus {
        return None;
    }
    let size = presentation_size(&graph);
    Some(ChartClass {
        key,
        graph,
        markings,
        base_genus: sig.genus,
        cover_genus,
        abelianization,
        presentation_size: size,
    })
}

/// Exhaustive census of chart classes for `sig` and `g`, sorted by key.
///
/// Returns [`CensusError::Incomplete`] carrying the partial report when the
/// vertex cap is below [`vertex_bound`].
pub fn enumerate_charts(
    sig: &Signature,
    g: &Group,
    bounds: &SearchBounds,
    filter: &dyn AdmissibilityFilter,
) -> Result<CensusReport, CensusError> {
    let cap = bounds.max_vertices.unwrap_or_else(|| default_cap(sig));
    let required = vertex_bound(sig);
    let mut report = CensusReport {
        signature: sig.clone(),
        group: g.clone(),
        filter: filter.name(),
        classes: Vec::new(),
        dimension: dimension(sig),
        cover_genus: integral_cover_genus(sig, g.order()),
        complete: cap >= required,
        bounds: BoundsUsed { max_vertices: cap, required_vertices: required, candidates: 0 },
    };
    let Some(cover_genus) = report.cover_genus else {
        report.complete = true;
        return Ok(report);
    };

    let types = vertex_types(g)?;
    let job = Job {
        types: &types,
        sig,
        max_vertices: cap.min(required),
        trivial: make_catalog_group(&CatalogSpec::Cyclic(1))?,
    };
    let pieces: Vec<Piece> = job.pieces().into_iter().flatten().collect();
    let skeletons = job.skeletons(&pieces);
    let results: Vec<(usize, BTreeMap<CanonicalKey, KatoGraph>)> =
        skeletons.par_iter().map(|parts| job.complete(parts)).collect();

    let mut merged: BTreeMap<CanonicalKey, KatoGraph> = BTreeMap::new();
    for (examined, found) in results {
        report.bounds.candidates += examined;
        for (key, graph) in found {
            merged.entry(key).or_insert(graph);
        }
    }
    let classes: Vec<Option<ChartClass>> = merged
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(key, graph)| classify(graph, key, sig, g, cover_genus))
        .collect();
    report.classes = classes.into_iter().flatten().filter(|c| filter.admits(c)).collect();

    if report.complete {
        Ok(report)
    } else {
        Err(CensusError::Incomplete(Box::new(report)))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{cyclic_pairing_check, AcceptAll};
    use super::*;
    use crate::group::catalog_group;

    fn census(genus: usize, group: &str, e: &[usize]) -> CensusReport {
        let sig = Signature::new(genus, e.to_vec()).unwrap();
        enumerate_charts(&sig, &catalog_group(group).unwrap(), &SearchBounds::default(), &AcceptAll)
            .unwrap()
    }

    #[test]
    fn trivial_edge_completions() {
        assert_eq!(trivial_edges(&[], 1, &[0, 0], 0), vec![vec![(0, 1)]]);
        assert_eq!(trivial_edges(&[], 1, &[0], 1), vec![vec![(0, 0)]]);
        assert!(trivial_edges(&[], 1, &[0], 0).is_empty());
        // Cayley: 4^2 labelled trees on four vertices
        assert_eq!(trivial_edges(&[], 3, &[0; 4], 0).len(), 16);
        assert_eq!(trivial_edges(&[], 3, &[1; 4], 0).len(), 16);
        assert_eq!(trivial_edges(&[], 3, &[3, 0, 0, 0], 0), vec![vec![(0, 1), (0, 2), (0, 3)]]);
        assert_eq!(trivial_edges(&[(0, 1)], 1, &[0; 3], 0).len(), 2);
        // unicyclic on two vertices: double edge, or a loop at either end
        assert_eq!(trivial_edges(&[], 2, &[0, 0], 1).len(), 3);
    }

    #[test]
    fn tate_census() {
        let r = census(0, "C2", &[2, 2, 2, 2]);
        assert_eq!(r.classes.len(), 1);
        let c = &r.classes[0];
        assert_eq!(c.cover_genus, 1);
        assert!(c.is_tate_type());
        assert_eq!(c.abelianization.free_rank, 0);
        assert_eq!(c.graph.vertices.len(), 2);
        assert_eq!(r.dimension, 1);
        assert!(r.complete);
    }

    #[test]
    fn rh_obstructions_give_empty_reports() {
        let r = census(0, "C2", &[2, 2, 2]);
        assert!(r.classes.is_empty());
        assert_eq!(r.cover_genus, None);
    }

    #[test]
    fn triangle_a5() {
        let r = census(0, "A5", &[2, 3, 5]);
        assert_eq!(r.classes.len(), 1);
        assert_eq!(r.classes[0].cover_genus, 0);
        assert_eq!(r.classes[0].graph.vertices.len(), 1);
        assert_eq!(r.dimension, 0);
    }

    #[test]
    fn cyclic_c3_quadrangle() {
        let r = census(0, "C3", &[3, 3, 3, 3]);
        assert!(!r.classes.is_empty());
        assert!(cyclic_pairing_check(&r).unwrap());
        assert!(census(0, "C3", &[3, 3, 3]).classes.is_empty());
    }

    #[test]
    fn small_cap_is_reported() {
        let sig = Signature::new(0, vec![2, 2, 2, 2, 2, 2]).unwrap();
        let bounds = SearchBounds { max_vertices: Some(2) };
        let err =
            enumerate_charts(&sig, &catalog_group("C2").unwrap(), &bounds, &AcceptAll).unwrap_err();
        match err {
            CensusError::Incomplete(r) => {
                assert!(!r.complete);
                assert_eq!(r.bounds.required_vertices, 4);
            }
            other => panic!("unexpected {other}"),
        }
    }
}
