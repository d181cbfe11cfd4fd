//! Exact canonical form of Kato graphs up to isomorphism.
//!
//! An isomorphism of Kato graphs is a graph isomorphism together with a group
//! isomorphism at every vertex, where each incidence may additionally be
//! twisted by an inner automorphism of its endpoint group (edge slides).
//!
//! Every vertex group is replaced by its canonical table. What remains free
//! is an outer automorphism per vertex, an independent conjugation per
//! incidence, and the vertex order. Incidences are encoded by descriptors
//! that are minimised over conjugation; the search runs over vertex orders
//! (connected, colour-refined) and outer-automorphism choices, keeping the
//! lexicographically least block sequence.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::{KatoError, KatoGraph};
use crate::group::CanonTable;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Short hex digest for display; equality should use the key itself.
    pub fn digest(&self) -> String {
        hex::encode(&Sha256::digest(&self.0)[..8])
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digest())
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.digest())
    }
}

type Pairs = Vec<(u8, u8)>;

struct Ctx {
    tables: Vec<Arc<CanonTable>>,
    token: Vec<u32>,
    color: Vec<u32>,
    /// canonical labels of each cusp image
    cusps: Vec<Vec<Vec<u8>>>,
    /// loops as (end 0, end 1) label pairs
    loops: Vec<Vec<Pairs>>,
    /// non-loop edges as (neighbour, pairs oriented neighbour-first)
    nbrs: Vec<Vec<(usize, Pairs)>>,
    /// usable outer automorphism indices per vertex
    alphas: Vec<Vec<usize>>,
    /// `local[v][a]`: cusp and loop part of the block of `v` under `a`
    local: Vec<Vec<Vec<u32>>>,
}

thread_local! {
    static SET_MEMO: RefCell<HashMap<(usize, u128), Vec<u8>>> = RefCell::new(HashMap::new());
    static EDGE_MEMO: RefCell<HashMap<(usize, usize, Pairs), Vec<u8>>> = RefCell::new(HashMap::new());
    static SEQ_MEMO: RefCell<HashMap<(usize, Vec<u8>), Vec<u8>>> = RefCell::new(HashMap::new());
}

/// Least sorted label list among the conjugates of a label set.
fn conj_min_set(t: &Arc<CanonTable>, labels: impl Iterator<Item = u8>) -> Vec<u8> {
    let mask = labels.fold(0u128, |m, l| m | 1 << l);
    let key = (Arc::as_ptr(t) as usize, mask);
    if let Some(hit) = SET_MEMO.with(|m| m.borrow().get(&key).cloned()) {
        return hit;
    }
    let members: Vec<u8> = (0..t.order as u8).filter(|&l| mask >> l & 1 == 1).collect();
    let mut best: Option<Vec<u8>> = None;
    let mut buf = Vec::with_capacity(members.len());
    for g in 0..t.order as u8 {
        buf.clear();
        buf.extend(members.iter().map(|&l| t.conj(g, l)));
        buf.sort_unstable();
        if best.as_ref().map_or(true, |b| buf < *b) {
            best = Some(buf.clone());
        }
    }
    let best = best.unwrap_or_default();
    SET_MEMO.with(|m| m.borrow_mut().insert(key, best.clone()));
    best
}

fn conj_min_seq(t: &Arc<CanonTable>, labels: Vec<u8>) -> Vec<u8> {
    let key = (Arc::as_ptr(t) as usize, labels);
    if let Some(hit) = SEQ_MEMO.with(|m| m.borrow().get(&key).cloned()) {
        return hit;
    }
    let labels = &key.1;
    let mut best: Option<Vec<u8>> = None;
    let mut buf = Vec::with_capacity(labels.len());
    for g in 0..t.order as u8 {
        buf.clear();
        buf.extend(labels.iter().map(|&l| t.conj(g, l)));
        if best.as_ref().map_or(true, |b| buf < *b) {
            best = Some(buf.clone());
        }
    }
    let best = best.unwrap_or_default();
    SEQ_MEMO.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() > 1 << 20 {
            m.clear();
        }
        m.insert(key, best.clone());
    });
    best
}

/// Least sorted pair list over independent conjugation at both ends.
fn edge_min(ta: &Arc<CanonTable>, tb: &Arc<CanonTable>, pairs: Pairs) -> Vec<u8> {
    if pairs.len() == 1 {
        return vec![0, 0];
    }
    let key = (Arc::as_ptr(ta) as usize, Arc::as_ptr(tb) as usize, pairs);
    if let Some(hit) = EDGE_MEMO.with(|m| m.borrow().get(&key).cloned()) {
        return hit;
    }
    let pairs = &key.2;
    let mut best: Option<Pairs> = None;
    let mut buf: Pairs = Vec::with_capacity(pairs.len());
    for g in 0..ta.order as u8 {
        for h in 0..tb.order as u8 {
            buf.clear();
            buf.extend(pairs.iter().map(|&(p, q)| (ta.conj(g, p), tb.conj(h, q))));
            buf.sort_unstable();
            if best.as_ref().map_or(true, |b| buf < *b) {
                best = Some(buf.clone());
            }
        }
    }
    let flat: Vec<u8> = best.unwrap().into_iter().flat_map(|(p, q)| [p, q]).collect();
    EDGE_MEMO.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() > 1 << 20 {
            m.clear();
        }
        m.insert(key.clone(), flat.clone());
    });
    flat
}

impl Ctx {
    fn alpha(&self, v: usize, a: usize, l: u8) -> u8 {
        self.tables[v].out_reps[a][l as usize]
    }

    fn edge_desc(&self, p: usize, ap: usize, c: usize, ac: usize, pairs: &Pairs) -> Vec<u8> {
        let mapped =
            pairs.iter().map(|&(x, y)| (self.alpha(p, ap, x), self.alpha(c, ac, y))).collect();
        edge_min(&self.tables[p], &self.tables[c], mapped)
    }

    /// Cusp and loop part of a block; independent of the vertex order.
    fn local_part(&self, c: usize, a: usize) -> Vec<u32> {
        let t = &self.tables[c];
        let mut b = Vec::new();
        let push_list = |b: &mut Vec<u32>, mut items: Vec<Vec<u8>>| {
            items.sort();
            b.push(items.len() as u32);
            for d in items {
                b.push(d.len() as u32);
                b.extend(d.into_iter().map(u32::from));
            }
        };
        let cusps = self.cusps[c]
            .iter()
            .map(|set| conj_min_set(t, set.iter().map(|&l| self.alpha(c, a, l))))
            .collect();
        push_list(&mut b, cusps);
        let loops = self.loops[c]
            .iter()
            .map(|pairs| {
                let swapped: Pairs = pairs.iter().map(|&(x, y)| (y, x)).collect();
                self.edge_desc(c, a, c, a, pairs).min(self.edge_desc(c, a, c, a, &swapped))
            })
            .collect();
        push_list(&mut b, loops);
        b
    }
}

/// Per-search memo of block parts that do not depend on the vertex order.
struct Parts<'a> {
    ctx: &'a Ctx,
    /// `edges[c][k][ap * |Out(c)| + ac]` for the k-th neighbour entry of `c`
    edges: Vec<Vec<Vec<Option<Vec<u32>>>>>,
}

impl<'a> Parts<'a> {
    fn new(ctx: &'a Ctx) -> Parts<'a> {
        let n = ctx.tables.len();
        let outs = |v: usize| ctx.tables[v].out_reps.len();
        Parts {
            ctx,
            edges: (0..n)
                .map(|c| ctx.nbrs[c].iter().map(|(p, _)| vec![None; outs(*p) * outs(c)]).collect())
                .collect(),
        }
    }

    fn block(&mut self, c: usize, a: usize, pos: &[usize], alpha: &[usize]) -> Vec<u32> {
        let ctx = self.ctx;
        let width = ctx.tables[c].out_reps.len();
        let mut adj: Vec<(u32, &[u32])> = Vec::with_capacity(ctx.nbrs[c].len());
        for (k, (p, pairs)) in ctx.nbrs[c].iter().enumerate() {
            if pos[*p] == usize::MAX {
                continue;
            }
            let slot = &mut self.edges[c][k][alpha[*p] * width + a];
            if slot.is_none() {
                *slot = Some(
                    ctx.edge_desc(*p, alpha[*p], c, a, pairs).into_iter().map(u32::from).collect(),
                );
            }
        }
        for (k, (p, _)) in ctx.nbrs[c].iter().enumerate() {
            if pos[*p] != usize::MAX {
                let desc =
                    self.edges[c][k][alpha[*p] * width + a].as_deref().expect("filled above");
                adj.push((pos[*p] as u32, desc));
            }
        }
        adj.sort_unstable();
        let local = &ctx.local[c][a];
        let mut b = Vec::with_capacity(
            3 + local.len() + adj.iter().map(|(_, d)| d.len() + 2).sum::<usize>(),
        );
        b.extend_from_slice(&[ctx.color[c], ctx.token[c]]);
        b.extend_from_slice(local);
        b.push(adj.len() as u32);
        for (p, desc) in adj {
            b.push(desc.len() as u32 + 1);
            b.push(p);
            b.extend_from_slice(desc);
        }
        b
    }
}

fn ranks<T: Ord + Clone>(sigs: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(s).unwrap() as u32).collect()
}

fn build(graph: &KatoGraph) -> (Ctx, Vec<Arc<CanonTable>>) {
    let n = graph.vertices.len();
    let index = |id| graph.vertex_index(id).expect("checked endpoint");
    let canons: Vec<_> = graph.vertices.iter().map(|v| v.group.canon()).collect();
    let tables: Vec<Arc<CanonTable>> = canons.iter().map(|c| c.table.clone()).collect();

    let mut distinct: Vec<Arc<CanonTable>> = Vec::new();
    for t in &tables {
        if !distinct.iter().any(|d| Arc::ptr_eq(d, t)) {
            distinct.push(t.clone());
        }
    }
    distinct.sort_by(|a, b| (a.order, &a.table).cmp(&(b.order, &b.table)));
    let token: Vec<u32> = tables
        .iter()
        .map(|t| distinct.iter().position(|d| Arc::ptr_eq(d, t)).unwrap() as u32)
        .collect();

    let mut cusps = vec![Vec::new(); n];
    for c in &graph.cusps {
        let v = index(c.vertex);
        cusps[v].push(c.map.map().iter().map(|&x| canons[v].labels[x]).collect());
    }
    let mut loops = vec![Vec::new(); n];
    let mut nbrs = vec![Vec::new(); n];
    let mut items: Vec<Vec<Vec<u8>>> = cusps.clone();
    for e in &graph.edges {
        let (a, b) = (index(e.ends[0]), index(e.ends[1]));
        let seq = |v: usize, side: usize| -> Vec<u8> {
            e.maps[side].map().iter().map(|&x| canons[v].labels[x]).collect()
        };
        let (sa, sb) = (seq(a, 0), seq(b, 1));
        let pairs: Pairs = sa.iter().copied().zip(sb.iter().copied()).collect();
        if a == b {
            loops[a].push(pairs);
        } else {
            nbrs[b].push((a, pairs.clone()));
            nbrs[a].push((b, pairs.iter().map(|&(x, y)| (y, x)).collect()));
        }
        items[a].push(sa);
        items[b].push(sb);
    }

    let mut ctx = Ctx {
        tables,
        token,
        color: Vec::new(),
        cusps,
        loops,
        nbrs,
        alphas: Vec::new(),
        local: Vec::new(),
    };

    // The local part of a block precedes its adjacency and ignores the
    // vertex order, so only outer automorphisms minimising it can occur in
    // the least block sequence. Among those, automorphisms that act the same
    // on every incidence up to conjugation give identical search subtrees.
    let mut local_min = Vec::with_capacity(n);
    let mut locals = Vec::with_capacity(n);
    let mut alphas = Vec::with_capacity(n);
    for v in 0..n {
        let t = &ctx.tables[v];
        let parts: Vec<Vec<u32>> = (0..t.out_reps.len()).map(|a| ctx.local_part(v, a)).collect();
        let least = parts.iter().min().cloned().unwrap_or_default();
        let mut seen = Vec::new();
        let mut keep = Vec::new();
        for (a, rep) in t.out_reps.iter().enumerate() {
            if parts[a] != least {
                continue;
            }
            if t.out_reps.len() > 1 {
                let sig: Vec<Vec<u8>> = items[v]
                    .iter()
                    .map(|s| conj_min_seq(t, s.iter().map(|&l| rep[l as usize]).collect()))
                    .collect();
                if seen.contains(&sig) {
                    continue;
                }
                seen.push(sig);
            }
            keep.push(a);
        }
        local_min.push(least);
        alphas.push(keep);
        locals.push(parts);
    }

    let initial: Vec<(Vec<u32>, &Vec<u32>)> = (0..n)
        .map(|v| {
            let mut eo: Vec<usize> = ctx.nbrs[v].iter().map(|(_, p)| p.len()).collect();
            eo.sort_unstable();
            let mut sig = vec![ctx.token[v]];
            sig.extend(eo.iter().map(|&x| x as u32));
            (sig, &local_min[v])
        })
        .collect();
    let mut color = ranks(&initial);
    loop {
        let sigs: Vec<(u32, Vec<(usize, u32)>)> = (0..n)
            .map(|v| {
                let mut around: Vec<(usize, u32)> =
                    ctx.nbrs[v].iter().map(|(p, pairs)| (pairs.len(), color[*p])).collect();
                around.sort_unstable();
                (color[v], around)
            })
            .collect();
        let next = ranks(&sigs);
        let count = |c: &[u32]| c.iter().max().map_or(0, |m| m + 1);
        let done = count(&next) == count(&color);
        color = next;
        if done {
            break;
        }
    }

    ctx.color = color;
    ctx.alphas = alphas;
    ctx.local = locals;
    (ctx, distinct)
}

struct Search<'a> {
    ctx: &'a Ctx,
    parts: Parts<'a>,
    pos: Vec<usize>,
    alpha: Vec<usize>,
    blocks: Vec<Vec<u32>>,
    best: Option<Vec<Vec<u32>>>,
}

impl Search<'_> {
    fn run(&mut self) {
        let n = self.pos.len();
        let depth = self.blocks.len();
        if depth == n {
            if self.best.as_ref().map_or(true, |b| self.blocks < *b) {
                self.best = Some(self.blocks.clone());
            }
            return;
        }
        let placed_adjacent = |v: usize| {
            depth == 0 || self.ctx.nbrs[v].iter().any(|(p, _)| self.pos[*p] != usize::MAX)
        };
        let open: Vec<usize> =
            (0..n).filter(|&v| self.pos[v] == usize::MAX && placed_adjacent(v)).collect();
        let min_color = open.iter().map(|&v| self.ctx.color[v]).min().expect("graph is connected");
        for c in open.into_iter().filter(|&v| self.ctx.color[v] == min_color) {
            for &a in &self.ctx.alphas[c] {
                let block = self.parts.block(c, a, &self.pos, &self.alpha);
                if let Some(best) = &self.best {
                    let ord =
                        self.blocks[..].cmp(&best[..depth]).then_with(|| block.cmp(&best[depth]));
                    if ord == std::cmp::Ordering::Greater {
                        continue;
                    }
                }
                self.pos[c] = depth;
                self.alpha[c] = a;
                self.blocks.push(block);
                self.run();
                self.blocks.pop();
                self.pos[c] = usize::MAX;
                self.alpha[c] = usize::MAX;
            }
        }
    }
}

/// Exact isomorphism invariant: equal keys iff the graphs are isomorphic.
pub fn canonical_form(graph: &KatoGraph) -> Result<CanonicalKey, KatoError> {
    graph.check_structure()?;
    let (ctx, distinct) = build(graph);
    let n = graph.vertices.len();
    let mut search = Search {
        ctx: &ctx,
        parts: Parts::new(&ctx),
        pos: vec![usize::MAX; n],
        alpha: vec![usize::MAX; n],
        blocks: Vec::with_capacity(n),
        best: None,
    };
    search.run();
    let blocks = search.best.expect("nonempty graph");

    let mut key = b"KATO1".to_vec();
    let put = |key: &mut Vec<u8>, x: usize| key.extend_from_slice(&(x as u32).to_be_bytes());
    put(&mut key, n);
    put(&mut key, distinct.len());
    for t in &distinct {
        put(&mut key, t.order);
        key.extend_from_slice(&t.table);
    }
    for b in blocks {
        put(&mut key, b.len());
        for x in b {
            put(&mut key, x as usize);
        }
    }
    Ok(CanonicalKey(key))
}

#[cfg(test)]
mod tests {
    use super::super::{fixtures::*, slide_cusp, slide_edge, EdgeId, VertexId};
    use super::*;
    use crate::group::{automorphisms, injections, GroupInjection};

    /// Relabels vertex and edge ids and reverses storage order.
    fn shuffle(k: &KatoGraph) -> KatoGraph {
        let mut out = k.clone();
        let n = k.vertices.len() as u32;
        let flip = |v: VertexId| VertexId(n - 1 - v.0);
        out.vertices.reverse();
        for v in &mut out.vertices {
            v.id = flip(v.id);
        }
        out.edges.reverse();
        for e in &mut out.edges {
            e.ends = e.ends.map(flip);
            e.ends.reverse();
            e.maps.reverse();
        }
        out.cusps.reverse();
        for c in &mut out.cusps {
            c.vertex = flip(c.vertex);
        }
        out
    }

    #[test]
    fn invariant_under_relabeling_and_slides() {
        let k = tate_segment();
        let key = canonical_form(&k).unwrap();
        assert_eq!(canonical_form(&shuffle(&k)).unwrap(), key);
        let s = slide_edge(&k, EdgeId(0), 0, 1).unwrap();
        assert_eq!(canonical_form(&s).unwrap(), key);
    }

    #[test]
    fn distinguishes_edge_groups() {
        let c2 = g("C2");
        let id = GroupInjection::identity(&c2);
        let mut k = KatoGraph::new();
        let a = k.add_vertex(c2.clone());
        let b = k.add_vertex(c2.clone());
        k.add_edge(c2.clone(), [a, b], [id.clone(), id.clone()]);
        for v in [a, a, b, b] {
            k.add_cusp(c2.clone(), v, id.clone());
        }
        assert_ne!(canonical_form(&k).unwrap(), canonical_form(&tate_segment()).unwrap());
    }

    #[test]
    fn vertex_automorphisms_are_absorbed() {
        // a D2 vertex with three C2 cusps; any automorphism applied to all
        // incidences gives an isomorphic graph
        let d2 = g("D2");
        let c2 = g("C2");
        let base = {
            let mut k = KatoGraph::new();
            let v = k.add_vertex(d2.clone());
            for inj in injections(&c2, &d2) {
                k.add_cusp(c2.clone(), v, inj);
            }
            k
        };
        let key = canonical_form(&base).unwrap();
        for aut in automorphisms(&d2) {
            let mut k = base.clone();
            for c in &mut k.cusps {
                c.map = c.map.then(&aut);
            }
            assert_eq!(canonical_form(&k).unwrap(), key);
        }
        // two cusps on the same involution differ
        let mut k = base.clone();
        k.cusps[2].map = k.cusps[0].map.clone();
        assert_ne!(canonical_form(&k).unwrap(), key);
    }

    #[test]
    fn outer_twist_on_one_side_is_detected() {
        // D2 -- C2 -- D2 with a cusp at each end: whether the edge meets the
        // cusp's involution at the right end is an invariant
        let d2 = g("D2");
        let c2 = g("C2");
        let inj = injections(&c2, &d2);
        let build = |right: usize| {
            let mut k = KatoGraph::new();
            let a = k.add_vertex(d2.clone());
            let b = k.add_vertex(d2.clone());
            k.add_edge(c2.clone(), [a, b], [inj[0].clone(), inj[right].clone()]);
            k.add_cusp(c2.clone(), a, inj[1].clone());
            k.add_cusp(c2.clone(), b, inj[1].clone());
            k
        };
        let k0 = canonical_form(&build(0)).unwrap();
        let k1 = canonical_form(&build(1)).unwrap();
        assert_ne!(k0, k1);
        // the third involution is related to the first by an automorphism
        assert_eq!(canonical_form(&build(2)).unwrap(), k0);
        assert_eq!(canonical_form(&shuffle(&build(1))).unwrap(), k1);
    }

    #[test]
    fn cusp_slides_do_not_matter() {
        let s4 = g("S4");
        let k = super::super::elementary_kato(&s4).unwrap();
        let key = canonical_form(&k).unwrap();
        for gelem in [1, 5, 17] {
            let s = slide_cusp(&k, k.cusps[2].id, gelem).unwrap();
            assert_eq!(canonical_form(&s).unwrap(), key);
        }
    }

    #[test]
    fn digest_is_short_hex() {
        let d = canonical_form(&tate_segment()).unwrap().digest();
        assert_eq!(d.len(), 16);
        assert!(d.chars().all(|c| c.is_ascii_hexdigit()));
    }
}
