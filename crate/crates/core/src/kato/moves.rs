use super::{validate, CuspId, Edge, EdgeId, KatoError, KatoGraph, VertexId};
use crate::group::{same_group, Elem, GroupInjection};

/// Replaces `ι` at one end of `edge` by `c_g ∘ ι`, `g` in the endpoint group.
/// The result is isomorphic to the input.
pub fn slide_edge(
    graph: &KatoGraph,
    edge: EdgeId,
    end: usize,
    g: Elem,
) -> Result<KatoGraph, KatoError> {
    let mut out = graph.clone();
    let e = out.edges.iter_mut().find(|e| e.id == edge).ok_or(KatoError::UnknownEdge(edge))?;
    let end = end.min(1);
    if g >= e.maps[end].target().order() {
        return Err(KatoError::NotInGroup { element: g, vertex: e.ends[end] });
    }
    e.maps[end] = e.maps[end].conjugated(g);
    Ok(out)
}

/// Same move for the embedding of a cusp group.
pub fn slide_cusp(graph: &KatoGraph, cusp: CuspId, g: Elem) -> Result<KatoGraph, KatoError> {
    let mut out = graph.clone();
    let c = out.cusps.iter_mut().find(|c| c.id == cusp).ok_or(KatoError::UnknownCusp(cusp))?;
    if g >= c.map.target().order() {
        return Err(KatoError::NotInGroup { element: g, vertex: c.vertex });
    }
    c.map = c.map.conjugated(g);
    Ok(out)
}

/// Glues cusp `c1` of `g1` to cusp `c2` of `g2` along `matching`, an
/// isomorphism from the group of `c1` onto that of `c2`, producing a finite
/// edge. All ids of `g2` are shifted past those of `g1`; the new edge gets
/// the next free edge id.
pub fn paste(
    g1: &KatoGraph,
    c1: CuspId,
    g2: &KatoGraph,
    c2: CuspId,
    matching: &GroupInjection,
) -> Result<KatoGraph, KatoError> {
    validate(g1)?;
    validate(g2)?;
    let cusp1 = g1.cusp(c1).ok_or(KatoError::UnknownCusp(c1))?;
    let cusp2 = g2.cusp(c2).ok_or(KatoError::UnknownCusp(c2))?;
    if !matching.is_bijective()
        || !same_group(matching.source(), &cusp1.group)
        || !same_group(matching.target(), &cusp2.group)
    {
        return Err(KatoError::CuspMismatch(
            cusp1.group.name().to_string(),
            cusp2.group.name().to_string(),
        ));
    }

    let next = |it: &mut dyn Iterator<Item = u32>| it.max().map_or(0, |m| m + 1);
    let dv = next(&mut g1.vertices.iter().map(|v| v.id.0));
    let de = next(&mut g1.edges.iter().map(|e| e.id.0));
    let dc = next(&mut g1.cusps.iter().map(|c| c.id.0));

    let mut out = g1.clone();
    out.cusps.retain(|c| c.id != c1);
    let shift = |v: VertexId| VertexId(v.0 + dv);
    for v in &g2.vertices {
        let mut v = v.clone();
        v.id = shift(v.id);
        out.vertices.push(v);
    }
    for e in &g2.edges {
        let mut e = e.clone();
        e.id = EdgeId(e.id.0 + de);
        e.ends = e.ends.map(shift);
        out.edges.push(e);
    }
    for c in g2.cusps.iter().filter(|c| c.id != c2) {
        let mut c = c.clone();
        c.id = CuspId(c.id.0 + dc);
        c.vertex = shift(c.vertex);
        out.cusps.push(c);
    }
    let id = EdgeId(out.edges.iter().map(|e| e.id.0 + 1).max().unwrap_or(0));
    out.edges.push(Edge {
        id,
        group: cusp1.group.clone(),
        ends: [cusp1.vertex, shift(cusp2.vertex)],
        maps: [cusp1.map.clone(), matching.then(&cusp2.map)],
    });
    Ok(out)
}
