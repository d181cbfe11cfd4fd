use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::One;

use super::presentation::{generator_name, stable_letter_name, Presentation};
use crate::group::{automorphisms, injections, Elem, ElementSet, Group, GroupInjection};
use crate::kato::{validate, EdgeId, KatoError, KatoGraph, VertexId};
use crate::Rational;

/// A surjection from the Bass–Serre group onto `target` that is injective
/// on every vertex group. Tree edges carry the identity as stable letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisMarking {
    pub target: Group,
    /// Sorted by vertex id.
    pub vertex_maps: Vec<(VertexId, GroupInjection)>,
    /// One entry per finite edge, sorted by edge id.
    pub stable_letters: Vec<(EdgeId, Elem)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MarkingError {
    #[error("marking does not match the graph: {0}")]
    Shape(String),
    #[error("map at {0} is not an injection into the target")]
    NotInjective(VertexId),
    #[error("edge {0} is not compatible with its stable letter")]
    Incompatible(EdgeId),
    #[error("images do not generate the target")]
    NotSurjective,
    #[error("relator {0} does not evaluate to the identity")]
    RelatorFails(usize),
    #[error("vertex generator {0} maps to the identity")]
    KillsVertexElement(String),
}

/// Vertices in breadth-first order along the spanning tree, each with the
/// tree edge it was reached by. The root is a vertex of largest order, so
/// that fixing its map up to automorphisms of the target prunes the most.
pub(crate) fn tree_order(graph: &KatoGraph) -> Vec<(VertexId, Option<EdgeId>)> {
    let tree = super::spanning_tree(graph);
    let mut edges: Vec<_> = graph.edges.iter().filter(|e| tree.contains(&e.id)).collect();
    edges.sort_by_key(|e| e.id);
    let Some(root) = graph.vertices.iter().rev().max_by_key(|v| v.group.order()) else {
        return Vec::new();
    };
    let mut order = vec![(root.id, None)];
    let mut queue = VecDeque::from([root.id]);
    while let Some(v) = queue.pop_front() {
        for e in &edges {
            for i in 0..2 {
                let w = e.ends[1 - i];
                if e.ends[i] == v && !order.iter().any(|(x, _)| *x == w) {
                    order.push((w, Some(e.id)));
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

impl GaloisMarking {
    pub fn vertex_map(&self, v: VertexId) -> Option<&GroupInjection> {
        self.vertex_maps.iter().find(|(id, _)| *id == v).map(|(_, m)| m)
    }

    pub fn stable_letter(&self, e: EdgeId) -> Option<Elem> {
        self.stable_letters.iter().find(|(id, _)| *id == e).map(|&(_, t)| t)
    }

    /// Checks injectivity, edge compatibility and surjectivity.
    pub fn verify(&self, graph: &KatoGraph) -> Result<(), MarkingError> {
        let g = &self.target;
        if self.vertex_maps.len() != graph.vertices.len()
            || self.stable_letters.len() != graph.edges.len()
        {
            return Err(MarkingError::Shape("wrong number of entries".into()));
        }
        let mut gens = ElementSet::EMPTY;
        for v in &graph.vertices {
            let m = self
                .vertex_map(v.id)
                .ok_or_else(|| MarkingError::Shape(format!("no map at {}", v.id)))?;
            GroupInjection::new(v.group.clone(), g.clone(), m.map().to_vec())
                .map_err(|_| MarkingError::NotInjective(v.id))?;
            gens = gens.union(m.image());
        }
        let tree = super::spanning_tree(graph);
        for e in &graph.edges {
            let t = self
                .stable_letter(e.id)
                .filter(|&t| t < g.order())
                .ok_or_else(|| MarkingError::Shape(format!("no stable letter for {}", e.id)))?;
            if tree.contains(&e.id) && t != g.identity() {
                return Err(MarkingError::Incompatible(e.id));
            }
            let m0 = self.vertex_map(e.ends[0]).expect("checked");
            let m1 = self.vertex_map(e.ends[1]).expect("checked");
            let tinv = g.inv(t);
            for x in 0..e.group.order() {
                if m1.apply(e.maps[1].apply(x)) != g.conj(tinv, m0.apply(e.maps[0].apply(x))) {
                    return Err(MarkingError::Incompatible(e.id));
                }
            }
            gens.insert(t);
        }
        if g.generate(gens) != g.all() {
            return Err(MarkingError::NotSurjective);
        }
        Ok(())
    }

    /// Evaluates the presentation under the marking: every relator must map
    /// to the identity and no vertex generator may.
    pub fn evaluate(&self, graph: &KatoGraph, p: &Presentation) -> Result<(), MarkingError> {
        let g = &self.target;
        let mut images: HashMap<String, Elem> = HashMap::new();
        for v in &graph.vertices {
            let m = self
                .vertex_map(v.id)
                .ok_or_else(|| MarkingError::Shape(format!("no map at {}", v.id)))?;
            for x in 0..v.group.order() {
                images.insert(generator_name(v.id, v.group.element_name(x)), m.apply(x));
            }
        }
        for &(e, t) in &self.stable_letters {
            images.insert(stable_letter_name(e), t);
        }
        let values: Vec<Elem> = p
            .generators
            .iter()
            .map(|name| {
                images
                    .get(name)
                    .copied()
                    .ok_or_else(|| MarkingError::Shape(format!("unknown generator {name}")))
            })
            .collect::<Result<_, _>>()?;
        for (name, &val) in p.generators.iter().zip(&values) {
            if !name.starts_with('t') && val == g.identity() {
                return Err(MarkingError::KillsVertexElement(name.clone()));
            }
        }
        for (i, r) in p.relators.iter().enumerate() {
            let mut acc = g.identity();
            for &s in r {
                let x = values[s.unsigned_abs() as usize - 1];
                acc = g.mul(acc, if s < 0 { g.inv(x) } else { x });
            }
            if acc != g.identity() {
                return Err(MarkingError::RelatorFails(i));
            }
        }
        Ok(())
    }
}

/// `1 − m·χ(Γ)`: the rank of a free normal subgroup of index `m` meeting
/// every vertex group trivially. Not necessarily integral.
pub fn kernel_rank(graph: &KatoGraph, m: usize) -> Rational {
    Rational::one() - Rational::from_integer(m.into()) * graph.euler_char()
}

/// Elements of `group` commuting with every element of `image`.
fn centralizer(group: &Group, image: impl Iterator<Item = Elem> + Clone) -> Vec<Elem> {
    (0..group.order())
        .filter(|&c| image.clone().all(|y| group.mul(c, y) == group.mul(y, c)))
        .collect()
}

/// How a graph constrains its markings: vertices in tree order, and for
/// every edge end the centralizer of the edge group's image there.
struct Layout {
    order: Vec<VertexId>,
    /// position of the parent and the tree edge, per position (root: none)
    parent: Vec<Option<(usize, EdgeId)>>,
    /// centralizers at (parent end, own end) of the tree edge, per position
    tree_centralizers: Vec<(Vec<Elem>, Vec<Elem>)>,
    /// (edge, position of end 0, position of end 1, centralizers at both ends)
    non_tree: Vec<(EdgeId, usize, usize, Vec<Elem>, Vec<Elem>)>,
    /// last search step at which the gauge element of a position is read
    needed_until: Vec<usize>,
}

impl Layout {
    fn new(graph: &KatoGraph) -> Layout {
        let tree_order = tree_order(graph);
        let order: Vec<VertexId> = tree_order.iter().map(|&(v, _)| v).collect();
        let pos = |v: VertexId| order.iter().position(|&x| x == v).expect("connected");
        let end_centralizer = |e: &crate::kato::Edge, side: usize| {
            let group = &graph.vertex(e.ends[side]).expect("valid").group;
            centralizer(group, e.maps[side].map().iter().copied())
        };
        let mut parent = Vec::new();
        let mut tree_centralizers = Vec::new();
        let mut needed_until: Vec<usize> = (0..order.len()).collect();
        for (k, &(v, via)) in tree_order.iter().enumerate() {
            match via {
                None => {
                    parent.push(None);
                    tree_centralizers.push((Vec::new(), Vec::new()));
                }
                Some(eid) => {
                    let e = graph.edge(eid).expect("tree edge");
                    let own = if e.ends[1] == v { 1 } else { 0 };
                    let up = pos(e.ends[1 - own]);
                    needed_until[up] = needed_until[up].max(k);
                    parent.push(Some((up, eid)));
                    tree_centralizers.push((end_centralizer(e, 1 - own), end_centralizer(e, own)));
                }
            }
        }
        let tree = super::spanning_tree(graph);
        let mut edges: Vec<_> = graph.edges.iter().filter(|e| !tree.contains(&e.id)).collect();
        edges.sort_by_key(|e| e.id);
        let mut non_tree = Vec::new();
        for (i, e) in edges.into_iter().enumerate() {
            let (p, q) = (pos(e.ends[0]), pos(e.ends[1]));
            let step = order.len() + i;
            needed_until[p] = needed_until[p].max(step);
            needed_until[q] = needed_until[q].max(step);
            non_tree.push((e.id, p, q, end_centralizer(e, 0), end_centralizer(e, 1)));
        }
        Layout { order, parent, tree_centralizers, non_tree, needed_until }
    }
}

/// Least element of the double coset `left · t · right`.
fn coset_min(g: &Group, left: impl Iterator<Item = Elem>, t: Elem, right: &[Elem]) -> Elem {
    left.flat_map(|a| right.iter().map(move |&b| g.mul(g.mul(a, t), b)))
        .min()
        .expect("cosets are nonempty")
}

/// `{a·b}` for `a ∈ left`, `b ∈ right`, sorted.
fn product_set(g: &Group, left: &[Elem], right: &[Elem]) -> Vec<Elem> {
    let mut set = ElementSet::EMPTY;
    for &a in left {
        for &b in right {
            set.insert(g.mul(a, b));
        }
    }
    set.iter().collect()
}

/// One transformation in the search for a canonical representative:
/// `ψ_v ↦ c_{h_v} ∘ α ∘ ψ_v`, `t_e ↦ h_p · α(t_e) · h_q⁻¹`.
#[derive(Clone)]
struct Gauge {
    alpha: usize,
    h: Vec<Elem>,
}

struct Canonizer<'a> {
    graph: &'a KatoGraph,
    target: &'a Group,
    layout: &'a Layout,
    auts: &'a [GroupInjection],
}

impl Canonizer<'_> {
    fn maps<'m>(&self, m: &'m GaloisMarking) -> Vec<&'m GroupInjection> {
        self.layout.order.iter().map(|&v| m.vertex_map(v).expect("complete marking")).collect()
    }

    fn image(&self, psi: &GroupInjection, gauge: &Gauge, h: Elem) -> Vec<Elem> {
        let a = &self.auts[gauge.alpha];
        psi.map().iter().map(|&x| self.target.conj(h, a.apply(x))).collect()
    }

    fn letter(&self, maps: &[&GroupInjection], gauge: &Gauge, k: usize, t: Elem) -> Elem {
        let g = self.target;
        let (_, p, q, cp, cq) = &self.layout.non_tree[k];
        let a = &self.auts[gauge.alpha];
        let (hp, hq) = (gauge.h[*p], gauge.h[*q]);
        let moved = g.mul(g.mul(hp, a.apply(t)), g.inv(hq));
        let left = cp.iter().map(|&c| g.conj(hp, a.apply(maps[*p].apply(c))));
        let right: Vec<Elem> = cq.iter().map(|&c| g.conj(hq, a.apply(maps[*q].apply(c)))).collect();
        coset_min(g, left, moved, &right)
    }

    /// Lexicographically least encoding over the orbit, and the marking
    /// realising it.
    fn canonical(&self, m: &GaloisMarking) -> (Vec<Elem>, GaloisMarking) {
        let g = self.target;
        let layout = self.layout;
        let maps = self.maps(m);
        let n = layout.order.len();
        let mut code = Vec::new();
        let mut states: Vec<Gauge> =
            (0..self.auts.len()).map(|alpha| Gauge { alpha, h: vec![g.identity(); n] }).collect();
        let steps = n + layout.non_tree.len();
        for step in 0..steps {
            let mut best: Option<Vec<Elem>> = None;
            let mut next: Vec<Gauge> = Vec::new();
            let mut offer = |item: Vec<Elem>, gauge: Gauge, next: &mut Vec<Gauge>| match best
                .as_ref()
                .map(|b| item.cmp(b))
            {
                Some(std::cmp::Ordering::Greater) => {}
                Some(std::cmp::Ordering::Equal) => next.push(gauge),
                _ => {
                    best = Some(item);
                    next.clear();
                    next.push(gauge);
                }
            };
            if step < n {
                match layout.parent[step] {
                    None => {
                        for gauge in states {
                            offer(self.image(maps[0], &gauge, g.identity()), gauge, &mut next);
                        }
                    }
                    Some((up, _)) => {
                        let (cu, cw) = &layout.tree_centralizers[step];
                        let a_set: Vec<Elem> = cu.iter().map(|&c| maps[up].apply(c)).collect();
                        let b_set: Vec<Elem> = cw.iter().map(|&c| maps[step].apply(c)).collect();
                        let twists = product_set(g, &a_set, &b_set);
                        for gauge in states {
                            for &k in &twists {
                                let h = g.mul(gauge.h[up], self.auts[gauge.alpha].apply(k));
                                let item = self.image(maps[step], &gauge, h);
                                let mut moved = gauge.clone();
                                moved.h[step] = h;
                                offer(item, moved, &mut next);
                            }
                        }
                    }
                }
            } else {
                let k = step - n;
                let t = m.stable_letter(layout.non_tree[k].0).expect("complete marking");
                for gauge in states {
                    offer(vec![self.letter(&maps, &gauge, k, t)], gauge, &mut next);
                }
            }
            code.extend(best.expect("at least one state"));
            // forget gauge entries nothing later reads, then merge states
            let mut seen = std::collections::HashSet::new();
            states = next
                .into_iter()
                .filter(|s| {
                    let live: Vec<Elem> = (0..n)
                        .filter(|&i| i <= step && layout.needed_until[i] > step)
                        .map(|i| s.h[i])
                        .collect();
                    seen.insert((s.alpha, live))
                })
                .collect();
        }
        let gauge = &states[0];
        let mut vertex_maps: Vec<(VertexId, GroupInjection)> = layout
            .order
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let psi = maps[i];
                let map = self.image(psi, gauge, gauge.h[i]);
                (v, GroupInjection::from_parts_unchecked(psi.source().clone(), g.clone(), map))
            })
            .collect();
        vertex_maps.sort_by_key(|x| x.0);
        let mut stable_letters: Vec<(EdgeId, Elem)> =
            self.graph.edges.iter().map(|e| (e.id, g.identity())).collect();
        for (k, (eid, ..)) in layout.non_tree.iter().enumerate() {
            let t = m.stable_letter(*eid).expect("complete marking");
            let value = self.letter(&maps, gauge, k, t);
            stable_letters.iter_mut().find(|x| x.0 == *eid).expect("edge").1 = value;
        }
        stable_letters.sort_by_key(|x| x.0);
        let rep = GaloisMarking { target: g.clone(), vertex_maps, stable_letters };
        (code, rep)
    }
}

struct Backtrack<'a> {
    graph: &'a KatoGraph,
    target: &'a Group,
    layout: &'a Layout,
    candidates: Vec<Vec<GroupInjection>>,
    /// candidate index per assigned position
    assigned: Vec<usize>,
    letters: Vec<Elem>,
    /// admissible candidates at a position, by the parent's candidate index
    admissible: Vec<HashMap<usize, Vec<usize>>>,
    /// stable letter choices of a non-tree edge, by its end candidates
    options: Vec<HashMap<(usize, usize), Vec<Elem>>>,
    found: Vec<GaloisMarking>,
}

impl Backtrack<'_> {
    fn map(&self, k: usize) -> &GroupInjection {
        &self.candidates[k][self.assigned[k]]
    }

    /// Tree-edge compatibility, and minimality of `psi` under the twists
    /// of its tree edge (conjugation of the subtree by `ψ_u(C_u)·ψ(C_w)`).
    fn admits(&self, k: usize, up: usize, eid: EdgeId, psi: &GroupInjection) -> bool {
        let g = self.target;
        let e = self.graph.edge(eid).expect("tree edge");
        let w = self.layout.order[k];
        let side = if e.ends[1] == w { 1 } else { 0 };
        let other = self.map(up);
        let compatible = (0..e.group.order())
            .all(|x| psi.apply(e.maps[side].apply(x)) == other.apply(e.maps[1 - side].apply(x)));
        if !compatible {
            return false;
        }
        let (cu, cw) = &self.layout.tree_centralizers[k];
        let a_set: Vec<Elem> = cu.iter().map(|&c| other.apply(c)).collect();
        let b_set: Vec<Elem> = cw.iter().map(|&c| psi.apply(c)).collect();
        product_set(g, &a_set, &b_set).into_iter().all(|h| {
            psi.map().iter().map(|&x| g.conj(h, x)).cmp(psi.map().iter().copied())
                != std::cmp::Ordering::Less
        })
    }

    fn vertices(&mut self, k: usize) {
        if k == self.layout.order.len() {
            self.stable(0);
            return;
        }
        let choices: Vec<usize> = match self.layout.parent[k] {
            None => (0..self.candidates[k].len()).collect(),
            Some((up, eid)) => {
                let key = self.assigned[up];
                if !self.admissible[k].contains_key(&key) {
                    let ok = (0..self.candidates[k].len())
                        .filter(|&i| self.admits(k, up, eid, &self.candidates[k][i]))
                        .collect();
                    self.admissible[k].insert(key, ok);
                }
                self.admissible[k][&key].clone()
            }
        };
        for i in choices {
            self.assigned[k] = i;
            self.vertices(k + 1);
        }
    }

    fn stable(&mut self, k: usize) {
        let g = self.target;
        let layout = self.layout;
        if k == layout.non_tree.len() {
            let mut gens = ElementSet::EMPTY;
            for i in 0..layout.order.len() {
                gens = gens.union(self.map(i).image());
            }
            for &t in &self.letters {
                gens.insert(t);
            }
            if g.generate(gens) != g.all() {
                return;
            }
            let mut vertex_maps: Vec<(VertexId, GroupInjection)> =
                layout.order.iter().enumerate().map(|(i, &v)| (v, self.map(i).clone())).collect();
            vertex_maps.sort_by_key(|x| x.0);
            let mut stable_letters: Vec<(EdgeId, Elem)> =
                self.graph.edges.iter().map(|e| (e.id, g.identity())).collect();
            for (i, (eid, ..)) in layout.non_tree.iter().enumerate() {
                stable_letters.iter_mut().find(|x| x.0 == *eid).expect("edge").1 = self.letters[i];
            }
            stable_letters.sort_by_key(|x| x.0);
            self.found.push(GaloisMarking { target: g.clone(), vertex_maps, stable_letters });
            return;
        }
        let (eid, p, q, cp, cq) = &layout.non_tree[k];
        let key = (self.assigned[*p], self.assigned[*q]);
        if !self.options[k].contains_key(&key) {
            let e = self.graph.edge(*eid).expect("edge");
            let (m0, m1) = (self.map(*p), self.map(*q));
            let right: Vec<Elem> = cq.iter().map(|&c| m1.apply(c)).collect();
            // one letter per double coset ψ_p(C_p)·t·ψ_q(C_q): its least element
            let options: Vec<Elem> = (0..g.order())
                .filter(|&t| {
                    let tinv = g.inv(t);
                    (0..e.group.order()).all(|x| {
                        m1.apply(e.maps[1].apply(x)) == g.conj(tinv, m0.apply(e.maps[0].apply(x)))
                    }) && coset_min(g, cp.iter().map(|&c| m0.apply(c)), t, &right) == t
                })
                .collect();
            self.options[k].insert(key, options);
        }
        for t in self.options[k][&key].clone() {
            self.letters.push(t);
            self.stable(k + 1);
            self.letters.pop();
        }
    }
}

/// Every marking of `graph` onto `target` up to equivalence, sorted by a
/// canonical encoding; each class is given by its canonical representative.
///
/// Two markings are equivalent when they differ by an automorphism of the
/// target or by twists: conjugating everything beyond a tree edge by an
/// element centralizing the edge group's image at either end, or
/// multiplying a stable letter on either side by such an element. Twists
/// are automorphisms of the fundamental group that fix the graph data.
pub fn find_markings(graph: &KatoGraph, target: &Group) -> Result<Vec<GaloisMarking>, KatoError> {
    validate(graph)?;
    let layout = Layout::new(graph);

    let mut cache: HashMap<*const crate::group::FiniteGroup, Vec<GroupInjection>> = HashMap::new();
    let mut candidates = Vec::new();
    for v in &layout.order {
        let group = &graph.vertex(*v).expect("valid").group;
        let list = cache
            .entry(std::sync::Arc::as_ptr(group))
            .or_insert_with(|| injections(group, target))
            .clone();
        if list.is_empty() {
            return Ok(Vec::new());
        }
        candidates.push(list);
    }

    // root maps up to Aut(target)
    let auts = automorphisms(target);
    let mut covered = std::collections::HashSet::new();
    let mut roots = Vec::new();
    for psi in &candidates[0] {
        if covered.insert(psi.map().to_vec()) {
            roots.push(psi.clone());
            for a in &auts {
                covered.insert(psi.then(a).map().to_vec());
            }
        }
    }
    candidates[0] = roots;

    let mut bt = Backtrack {
        graph,
        target,
        layout: &layout,
        candidates,
        assigned: vec![0; layout.order.len()],
        letters: Vec::new(),
        admissible: vec![HashMap::new(); layout.order.len()],
        options: vec![HashMap::new(); layout.non_tree.len()],
        found: Vec::new(),
    };
    bt.vertices(0);

    let canon = Canonizer { graph, target, layout: &layout, auts: &auts };
    let mut classes: BTreeMap<Vec<Elem>, GaloisMarking> = BTreeMap::new();
    for m in bt.found {
        let (code, rep) = canon.canonical(&m);
        classes.entry(code).or_insert(rep);
    }
    Ok(classes.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::super::presentation;
    use super::*;
    use crate::group::catalog_group;
    use crate::kato::elementary_kato;

    fn g(name: &str) -> Group {
        catalog_group(name).unwrap()
    }

    fn tate() -> KatoGraph {
        let c2 = g("C2");
        let mut k = KatoGraph::new();
        let a = k.add_vertex(c2.clone());
        let b = k.add_vertex(c2.clone());
        k.add_trivial_edge(&g("C1"), a, b);
        for v in [a, a, b, b] {
            k.add_cusp(c2.clone(), v, GroupInjection::identity(&c2));
        }
        k
    }

    /// Every valid tree-normalized marking, by exhaustive assignment.
    fn all_markings(graph: &KatoGraph, target: &Group) -> Vec<GaloisMarking> {
        let maps: Vec<Vec<GroupInjection>> =
            graph.vertices.iter().map(|v| injections(&v.group, target)).collect();
        let tree = super::super::spanning_tree(graph);
        let letter_choices: Vec<Vec<Elem>> = graph
            .edges
            .iter()
            .map(|e| {
                if tree.contains(&e.id) {
                    vec![target.identity()]
                } else {
                    (0..target.order()).collect()
                }
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; maps.len()];
        loop {
            let mut lidx = vec![0usize; letter_choices.len()];
            loop {
                let m = GaloisMarking {
                    target: target.clone(),
                    vertex_maps: graph
                        .vertices
                        .iter()
                        .zip(&idx)
                        .enumerate()
                        .map(|(i, (v, &j))| (v.id, maps[i][j].clone()))
                        .collect(),
                    stable_letters: graph
                        .edges
                        .iter()
                        .zip(&lidx)
                        .enumerate()
                        .map(|(i, (e, &j))| (e.id, letter_choices[i][j]))
                        .collect(),
                };
                if m.verify(graph).is_ok() {
                    out.push(m);
                }
                if !bump(&mut lidx, &letter_choices.iter().map(Vec::len).collect::<Vec<_>>()) {
                    break;
                }
            }
            if !bump(&mut idx, &maps.iter().map(Vec::len).collect::<Vec<_>>()) {
                break;
            }
        }
        out
    }

    fn code(m: &GaloisMarking) -> Vec<Elem> {
        let mut c: Vec<Elem> = m.vertex_maps.iter().flat_map(|(_, p)| p.map().to_vec()).collect();
        c.extend(m.stable_letters.iter().map(|x| x.1));
        c
    }

    /// Single moves generating the equivalence: automorphisms of the
    /// target, conjugation of one side of a tree edge, letter twists.
    fn moves(graph: &KatoGraph, m: &GaloisMarking, auts: &[GroupInjection]) -> Vec<GaloisMarking> {
        let g = &m.target;
        let mut out = Vec::new();
        for a in auts {
            out.push(GaloisMarking {
                target: g.clone(),
                vertex_maps: m.vertex_maps.iter().map(|(v, p)| (*v, p.then(a))).collect(),
                stable_letters: m.stable_letters.iter().map(|&(e, t)| (e, a.apply(t))).collect(),
            });
        }
        let tree = super::super::spanning_tree(graph);
        let cent = |e: &crate::kato::Edge, side: usize| -> Vec<Elem> {
            let psi = m.vertex_map(e.ends[side]).unwrap();
            let h = psi.source();
            (0..h.order())
                .filter(|&c| e.maps[side].map().iter().all(|&y| h.mul(c, y) == h.mul(y, c)))
                .map(|c| psi.apply(c))
                .collect()
        };
        for e in &graph.edges {
            if tree.contains(&e.id) {
                // side of the tree containing end 1 once e is cut
                let mut side = vec![e.ends[1]];
                let mut i = 0;
                while i < side.len() {
                    for f in graph.edges.iter().filter(|f| f.id != e.id && tree.contains(&f.id)) {
                        for s in 0..2 {
                            if f.ends[s] == side[i] && !side.contains(&f.ends[1 - s]) {
                                side.push(f.ends[1 - s]);
                            }
                        }
                    }
                    i += 1;
                }
                for k in cent(e, 0).into_iter().chain(cent(e, 1)) {
                    let inside = |v: &VertexId| side.contains(v);
                    let vertex_maps = m
                        .vertex_maps
                        .iter()
                        .map(|(v, p)| {
                            let map = if inside(v) {
                                p.map().iter().map(|&x| g.conj(k, x)).collect()
                            } else {
                                p.map().to_vec()
                            };
                            (*v, GroupInjection::new(p.source().clone(), g.clone(), map).unwrap())
                        })
                        .collect();
                    let stable_letters = m
                        .stable_letters
                        .iter()
                        .map(|&(eid, t)| {
                            let f = graph.edge(eid).unwrap();
                            if tree.contains(&eid) {
                                return (eid, t);
                            }
                            let t = match (inside(&f.ends[0]), inside(&f.ends[1])) {
                                (true, true) => g.conj(k, t),
                                (true, false) => g.mul(k, t),
                                (false, true) => g.mul(t, g.inv(k)),
                                (false, false) => t,
                            };
                            (eid, t)
                        })
                        .collect();
                    out.push(GaloisMarking { target: g.clone(), vertex_maps, stable_letters });
                }
            } else {
                let t = m.stable_letter(e.id).unwrap();
                let twisted: Vec<Elem> = cent(e, 0)
                    .into_iter()
                    .map(|a| g.mul(a, t))
                    .chain(cent(e, 1).into_iter().map(|b| g.mul(t, b)))
                    .collect();
                for t2 in twisted {
                    let mut moved = m.clone();
                    moved.stable_letters.iter_mut().find(|x| x.0 == e.id).unwrap().1 = t2;
                    out.push(moved);
                }
            }
        }
        out
    }

    /// Independent class count: orbits of all markings under the moves.
    fn brute_force_classes(graph: &KatoGraph, target: &Group) -> usize {
        let all = all_markings(graph, target);
        let auts = automorphisms(target);
        let mut seen = std::collections::HashSet::new();
        let mut orbits = 0;
        for m in &all {
            if !seen.insert(code(m)) {
                continue;
            }
            orbits += 1;
            let mut stack = vec![m.clone()];
            while let Some(x) = stack.pop() {
                for y in moves(graph, &x, &auts) {
                    y.verify(graph).expect("moves preserve markings");
                    if seen.insert(code(&y)) {
                        stack.push(y);
                    }
                }
            }
        }
        orbits
    }

    fn bump(idx: &mut [usize], sizes: &[usize]) -> bool {
        if sizes.iter().any(|&s| s == 0) {
            return false;
        }
        for i in 0..idx.len() {
            idx[i] += 1;
            if idx[i] < sizes[i] {
                return true;
            }
            idx[i] = 0;
        }
        false
    }

    #[test]
    fn tate_segment_markings() {
        let k = tate();
        let ms = find_markings(&k, &g("C2")).unwrap();
        assert_eq!(ms.len(), 1);
        ms[0].verify(&k).unwrap();
        ms[0].evaluate(&k, &presentation(&k).unwrap()).unwrap();
        assert!(find_markings(&k, &g("C3")).unwrap().is_empty());
        assert_eq!(kernel_rank(&k, 2), Rational::one());
    }

    #[test]
    fn elementary_tree_marks_onto_itself() {
        for name in ["C5", "D3", "A4", "A5"] {
            let group = g(name);
            let k = elementary_kato(&group).unwrap();
            let ms = find_markings(&k, &group).unwrap();
            assert_eq!(ms.len(), 1, "{name}");
            assert_eq!(kernel_rank(&k, group.order()), Rational::from_integer(0.into()));
        }
    }

    fn check_against_brute_force(k: &KatoGraph, targets: &[&str]) {
        for target in targets {
            let t = g(target);
            let ms = find_markings(k, &t).unwrap();
            assert_eq!(ms.len(), brute_force_classes(k, &t), "{target}");
            let p = presentation(k).unwrap();
            for m in &ms {
                m.verify(k).unwrap();
                m.evaluate(k, &p).unwrap();
            }
        }
    }

    #[test]
    fn marking_classes_match_brute_force() {
        let c1 = g("C1");
        let c2 = g("C2");
        let c3 = g("C3");
        // trivial vertex with two loops
        let mut k = KatoGraph::new();
        let v = k.add_vertex(c1.clone());
        k.add_trivial_edge(&c1, v, v);
        k.add_trivial_edge(&c1, v, v);
        check_against_brute_force(&k, &["D3", "D2", "C4", "C6"]);
        // C2 vertex with a trivial loop
        let mut k = KatoGraph::new();
        let v = k.add_vertex(c2.clone());
        k.add_trivial_edge(&c1, v, v);
        check_against_brute_force(&k, &["D2", "D4", "C2", "C4"]);
        // C2 - C3 - C2 joined by trivial edges
        let mut k = KatoGraph::new();
        let a = k.add_vertex(c2.clone());
        let b = k.add_vertex(c3.clone());
        let c = k.add_vertex(c2.clone());
        k.add_trivial_edge(&c1, a, b);
        k.add_trivial_edge(&c1, b, c);
        check_against_brute_force(&k, &["D3", "C6", "A4"]);
        // two C2 vertices joined by a C2 edge and a trivial edge
        let mut k = KatoGraph::new();
        let a = k.add_vertex(c2.clone());
        let b = k.add_vertex(c2.clone());
        let id = GroupInjection::identity(&c2);
        k.add_edge(c2.clone(), [a, b], [id.clone(), id.clone()]);
        k.add_trivial_edge(&c1, a, b);
        check_against_brute_force(&k, &["D2", "C2", "D4", "C4"]);
        // the Tate segment
        check_against_brute_force(&tate(), &["C2", "D2", "C4"]);
    }

    #[test]
    fn kernel_rank_examples() {
        let c1 = g("C1");
        let mut k = KatoGraph::new();
        let v = k.add_vertex(c1.clone());
        let w = k.add_vertex(c1.clone());
        k.add_trivial_edge(&c1, v, w);
        k.add_trivial_edge(&c1, v, w);
        k.add_trivial_edge(&c1, v, v);
        assert_eq!(kernel_rank(&k, 1), Rational::from_integer(k.betti().into()));
        let a5 = elementary_kato(&g("A5")).unwrap();
        assert_eq!(kernel_rank(&a5, 60), Rational::from_integer(0.into()));
    }
}
