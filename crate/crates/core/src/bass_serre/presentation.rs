use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::One;

use super::snf::invariant_factors;
use crate::kato::{validate, EdgeId, KatoError, KatoGraph, VertexId};

/// Generators plus relators; a relator is a word of signed 1-based
/// generator indices (`-k` is the inverse of generator `k`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub generators: Vec<String>,
    pub relators: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    /// Invariant factors greater than one.
    pub torsion: Vec<BigInt>,
}

/// Breadth-first spanning tree from the first vertex, scanning edges by id.
pub fn spanning_tree(graph: &KatoGraph) -> BTreeSet<EdgeId> {
    let mut edges: Vec<_> = graph.edges.iter().collect();
    edges.sort_by_key(|e| e.id);
    let mut tree = BTreeSet::new();
    let Some(root) = graph.vertices.first() else {
        return tree;
    };
    let mut seen = BTreeSet::from([root.id]);
    let mut queue = VecDeque::from([root.id]);
    while let Some(v) = queue.pop_front() {
        for e in &edges {
            for i in 0..2 {
                let w = e.ends[1 - i];
                if e.ends[i] == v && !seen.contains(&w) {
                    seen.insert(w);
                    tree.insert(e.id);
                    queue.push_back(w);
                }
            }
        }
    }
    tree
}

pub(crate) fn generator_name(v: VertexId, elem: &str) -> String {
    format!("{v}.{elem}")
}

pub(crate) fn stable_letter_name(e: EdgeId) -> String {
    format!("t{}", e.0)
}

/// Bass–Serre presentation of the fundamental group of the finite part.
///
/// Every non-identity element of every vertex group is a generator and the
/// whole multiplication table is imposed; tree edges identify the two
/// images of each edge-group element, other edges conjugate them by their
/// stable letter. Cusps contribute nothing.
pub fn presentation(graph: &KatoGraph) -> Result<Presentation, KatoError> {
    validate(graph)?;
    let mut vertices: Vec<_> = graph.vertices.iter().collect();
    vertices.sort_by_key(|v| v.id);
    let mut edges: Vec<_> = graph.edges.iter().collect();
    edges.sort_by_key(|e| e.id);
    let tree = spanning_tree(graph);

    let mut generators = Vec::new();
    // first generator index of each vertex; element x ≠ 1 maps to base + rank
    let mut base = Vec::new();
    for v in &vertices {
        base.push((v.id, generators.len() as i64 + 1));
        let g = &v.group;
        for x in (0..g.order()).filter(|&x| x != g.identity()) {
            generators.push(generator_name(v.id, g.element_name(x)));
        }
    }
    let gen = |v: VertexId, x: usize| -> i64 {
        let g = &graph.vertex(v).expect("validated").group;
        let start = base.iter().find(|(id, _)| *id == v).expect("validated").1;
        let rank = if x > g.identity() { x - 1 } else { x };
        start + rank as i64
    };

    let mut relators = Vec::new();
    for v in &vertices {
        let g = &v.group;
        let e = g.identity();
        for a in (0..g.order()).filter(|&a| a != e) {
            for b in (0..g.order()).filter(|&b| b != e) {
                let c = g.mul(a, b);
                if c == e {
                    relators.push(vec![gen(v.id, a), gen(v.id, b)]);
                } else {
                    relators.push(vec![gen(v.id, a), gen(v.id, b), -gen(v.id, c)]);
                }
            }
        }
    }
    let mut conjugations = Vec::new();
    for edge in &edges {
        let n = &edge.group;
        let pairs = (0..n.order()).filter(|&x| x != n.identity()).map(|x| {
            (gen(edge.ends[0], edge.maps[0].apply(x)), gen(edge.ends[1], edge.maps[1].apply(x)))
        });
        if tree.contains(&edge.id) {
            relators.extend(pairs.map(|(u, w)| vec![u, -w]));
        } else {
            generators.push(stable_letter_name(edge.id));
            let t = generators.len() as i64;
            conjugations.extend(pairs.map(|(u, w)| vec![-t, u, t, -w]));
        }
    }
    relators.extend(conjugations);
    Ok(Presentation { generators, relators })
}

impl Presentation {
    /// Relator exponent-sum matrix, one row per relator.
    pub fn exponent_matrix(&self) -> Vec<Vec<i64>> {
        self.relators
            .iter()
            .map(|r| {
                let mut row = vec![0i64; self.generators.len()];
                for &s in r {
                    row[s.unsigned_abs() as usize - 1] += s.signum();
                }
                row
            })
            .collect()
    }

    pub fn abelianization(&self) -> AbelianInvariants {
        let factors = invariant_factors(&self.exponent_matrix(), self.generators.len());
        AbelianInvariants {
            free_rank: self.generators.len() - factors.len(),
            torsion: factors.into_iter().filter(|d| !d.is_one()).collect(),
        }
    }

    /// Checks that every relator letter names a generator.
    pub fn is_well_formed(&self) -> bool {
        let n = self.generators.len() as u64;
        self.relators.iter().all(|r| r.iter().all(|&s| s != 0 && s.unsigned_abs() <= n))
    }
}

/// Free rank of the abelianization (the genus of the base curve).
pub fn abelian_free_rank(p: &Presentation) -> usize {
    p.abelianization().free_rank
}

/// `(generators, relators)` of [`presentation`] without building it.
pub fn presentation_size(graph: &KatoGraph) -> (usize, usize) {
    let tree = spanning_tree(graph);
    let loops = graph.edges.iter().filter(|e| !tree.contains(&e.id)).count();
    let gens: usize = graph.vertices.iter().map(|v| v.group.order() - 1).sum::<usize>() + loops;
    let rels = graph.vertices.iter().map(|v| (v.group.order() - 1).pow(2)).sum::<usize>()
        + graph.edges.iter().map(|e| e.group.order() - 1).sum::<usize>();
    (gens, rels)
}

/// Abelianization of the fundamental group, computed as the colimit
/// `(⊕ N_v^ab ⊕ Z^b) / ⟨ι₀(h) − ι₁(h)⟩` rather than from the full
/// presentation: each vertex group contributes coordinates over its
/// generating set and one relation per Cayley-graph edge `x → xs`, each
/// edge one relation per generator of the edge group. Agrees with
/// [`Presentation::abelianization`] of [`presentation`].
pub fn abelian_invariants(graph: &KatoGraph) -> Result<AbelianInvariants, KatoError> {
    validate(graph)?;
    let mut vertices: Vec<_> = graph.vertices.iter().collect();
    vertices.sort_by_key(|v| v.id);
    let mut offset = 0;
    // per vertex: (id, first column, coordinates of every element)
    let mut coords = Vec::new();
    let mut rows: Vec<Vec<i64>> = Vec::new();
    let mut local = Vec::new();
    for v in &vertices {
        let g = &v.group;
        let gens = g.generating_set();
        let mut w: Vec<Option<Vec<i64>>> = vec![None; g.order()];
        w[g.identity()] = Some(vec![0; gens.len()]);
        let mut queue = VecDeque::from([g.identity()]);
        while let Some(x) = queue.pop_front() {
            for (k, &s) in gens.iter().enumerate() {
                let y = g.mul(x, s);
                if w[y].is_none() {
                    let mut c = w[x].clone().expect("visited");
                    c[k] += 1;
                    w[y] = Some(c);
                    queue.push_back(y);
                }
            }
        }
        let w: Vec<Vec<i64>> = w.into_iter().map(|c| c.expect("generating set")).collect();
        for x in 0..g.order() {
            for (k, &s) in gens.iter().enumerate() {
                let y = g.mul(x, s);
                local.clear();
                local.extend((0..gens.len()).map(|j| w[x][j] + i64::from(j == k) - w[y][j]));
                if local.iter().any(|&c| c != 0) {
                    let mut row = vec![0; offset];
                    row.extend_from_slice(&local);
                    rows.push(row);
                }
            }
        }
        coords.push((v.id, offset, w));
        offset += gens.len();
    }
    let column = |v: VertexId, x: usize| {
        let (_, start, w) = coords.iter().find(|(id, _, _)| *id == v).expect("validated");
        (*start, &w[x])
    };
    for e in &graph.edges {
        for h in e.group.generating_set() {
            let mut row = vec![0; offset];
            for (i, sign) in [(0, 1), (1, -1)] {
                let (start, w) = column(e.ends[i], e.maps[i].apply(h));
                for (j, &c) in w.iter().enumerate() {
                    row[start + j] += sign * c;
                }
            }
            rows.push(row);
        }
    }
    for row in &mut rows {
        row.resize(offset, 0);
    }
    let factors = invariant_factors(&rows, offset);
    Ok(AbelianInvariants {
        free_rank: offset - factors.len() + graph.betti(),
        torsion: factors.into_iter().filter(|d| !d.is_one()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{catalog_group, injections, GroupInjection};
    use crate::kato::{elementary_kato, paste};

    fn tate() -> KatoGraph {
        let c2 = catalog_group("C2").unwrap();
        let mut k = KatoGraph::new();
        let a = k.add_vertex(c2.clone());
        let b = k.add_vertex(c2.clone());
        k.add_trivial_edge(&catalog_group("C1").unwrap(), a, b);
        for v in [a, a, b, b] {
            k.add_cusp(c2.clone(), v, GroupInjection::identity(&c2));
        }
        k
    }

    #[test]
    fn tate_segment_is_free_product() {
        let p = presentation(&tate()).unwrap();
        assert_eq!(p.generators, vec!["v0.a", "v1.a"]);
        assert_eq!(p.relators, vec![vec![1, 1], vec![2, 2]]);
        let ab = p.abelianization();
        assert_eq!(ab.free_rank, 0);
        assert_eq!(ab.torsion, vec![BigInt::from(2), BigInt::from(2)]);
    }

    #[test]
    fn trivial_loop_is_infinite_cyclic() {
        let c1 = catalog_group("C1").unwrap();
        let mut k = KatoGraph::new();
        let v = k.add_vertex(c1.clone());
        k.add_trivial_edge(&c1, v, v);
        let p = presentation(&k).unwrap();
        assert_eq!(p.generators, vec!["t0"]);
        assert!(p.relators.is_empty());
        assert_eq!(abelian_free_rank(&p), 1);
    }

    #[test]
    fn trivial_graphs_have_free_rank_betti() {
        let c1 = catalog_group("C1").unwrap();
        let mut k = KatoGraph::new();
        let vs: Vec<_> = (0..4).map(|_| k.add_vertex(c1.clone())).collect();
        for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 1)] {
            k.add_trivial_edge(&c1, vs[a], vs[b]);
        }
        let p = presentation(&k).unwrap();
        assert_eq!(abelian_free_rank(&p), k.betti());
        assert_eq!(k.betti(), 3);
    }

    #[test]
    fn amalgam_of_two_a4_along_c3() {
        let a4 = catalog_group("A4").unwrap();
        let t = elementary_kato(&a4).unwrap();
        let c3 = t.cusps.iter().find(|c| c.index() == 3).unwrap();
        let p = paste(&t, c3.id, &t, c3.id, &GroupInjection::identity(&c3.group)).unwrap();
        let pres = presentation(&p).unwrap();
        let single = presentation(&t).unwrap();
        assert_eq!(pres.relators.len(), 2 * single.relators.len() + 2);
        assert_eq!(pres.generators.len(), 22);
        assert!(pres.is_well_formed());
        // A4^ab = C3, and the amalgam over C3 identifies the two C3 quotients
        let ab = pres.abelianization();
        assert_eq!(ab.free_rank, 0);
        assert_eq!(ab.torsion, vec![BigInt::from(3)]);
        assert_eq!(abelian_invariants(&p).unwrap(), ab);
        assert_eq!(presentation_size(&p), (pres.generators.len(), pres.relators.len()));
    }

    #[test]
    fn colimit_matches_full_presentation() {
        use crate::kato::random::{random_graph, RandomGraphSpec};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let spec = RandomGraphSpec { max_vertices: 5, max_order: 12, max_betti: 2, max_cusps: 2 };
        for _ in 0..150 {
            let k = random_graph(&mut rng, &spec);
            let p = presentation(&k).unwrap();
            assert_eq!(abelian_invariants(&k).unwrap(), p.abelianization());
            assert_eq!(presentation_size(&k), (p.generators.len(), p.relators.len()));
        }
    }

    #[test]
    fn finite_group_abelianizations() {
        for (name, torsion) in
            [("S4", vec![2]), ("A5", vec![]), ("D4", vec![2, 2]), ("C6", vec![6])]
        {
            let k = elementary_kato(&catalog_group(name).unwrap()).unwrap();
            let ab = presentation(&k).unwrap().abelianization();
            assert_eq!(ab.free_rank, 0, "{name}");
            let want: Vec<BigInt> = torsion.into_iter().map(BigInt::from).collect();
            assert_eq!(ab.torsion, want, "{name}");
        }
    }

    #[test]
    fn presentation_is_deterministic() {
        let d2 = catalog_group("D2").unwrap();
        let c2 = catalog_group("C2").unwrap();
        let inj = injections(&c2, &d2);
        let mut k = KatoGraph::new();
        let a = k.add_vertex(d2.clone());
        k.add_edge(c2.clone(), [a, a], [inj[0].clone(), inj[1].clone()]);
        let p1 = presentation(&k).unwrap();
        let p2 = presentation(&k.clone()).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p1.abelianization().free_rank, 1);
    }
}
