//! Versioned, line-based text formats for groups, graphs, presentations and
//! census reports. Every `emit_*` output parses back to an equal value.
//!
//! Catalog groups are referenced by name; any other group is written inline
//! as a `group NAME` … `end-group` block with its element names and one
//! `row` of products per element. Injections are written as
//! `[ gen=image … ]` over the source group's deterministic generating set.

mod report;
mod text;

use std::fmt::Write as _;
use std::sync::Arc;

use crate::bass_serre::Presentation;
use crate::group::{catalog_group, same_group, FiniteGroup, Group, GroupInjection};
use crate::kato::{Cusp, CuspId, Edge, EdgeId, KatoGraph, Vertex, VertexId};

pub use report::{emit_report, emit_report_table, parse_report};
pub use text::ParseError;
use text::{Line, Lines};

/// Groups known by name while reading or writing one document.
#[derive(Default)]
pub(crate) struct GroupScope {
    inline: Vec<Group>,
}

impl GroupScope {
    fn is_catalog(g: &Group) -> bool {
        catalog_group(g.name()).is_ok_and(|c| same_group(&c, g))
    }

    /// True when `g` is neither a catalog group nor already registered, i.e.
    /// an inline block has to be written for it.
    fn register(&mut self, g: &Group) -> bool {
        if Self::is_catalog(g) || self.inline.iter().any(|h| same_group(h, g)) {
            return false;
        }
        self.inline.push(g.clone());
        true
    }

    fn resolve(&self, line: &Line, i: usize) -> Result<Group, ParseError> {
        let name = line.tok(i)?;
        if let Some(g) = self.inline.iter().find(|g| g.name() == name) {
            return Ok(g.clone());
        }
        catalog_group(name).map_err(|e| line.err(i, e.to_string()))
    }
}

fn write_group_body(out: &mut String, g: &FiniteGroup) {
    let _ = writeln!(out, "elements {}", g.elements().join(" "));
    for a in 0..g.order() {
        let row: Vec<&str> = (0..g.order()).map(|b| g.element_name(g.mul(a, b))).collect();
        let _ = writeln!(out, "row {}", row.join(" "));
    }
}

fn write_inline_group(out: &mut String, g: &FiniteGroup) {
    let _ = writeln!(out, "group {}", g.name());
    write_group_body(out, g);
    out.push_str("end-group\n");
}

fn parse_group_body(lines: &mut Lines, name: &str, end: &str) -> Result<Group, ParseError> {
    let l = lines.expect("elements")?;
    let names: Vec<String> = l.toks[1..].iter().map(|t| t.1.to_string()).collect();
    let (header_line, n) = (l.no, names.len());
    let mut table = Vec::with_capacity(n * n);
    for _ in 0..n {
        let l = lines.expect("row")?;
        l.expect_len(n + 1)?;
        for i in 1..=n {
            let t = l.tok(i)?;
            let x = names
                .iter()
                .position(|s| s == t)
                .ok_or_else(|| l.err(i, format!("unknown element `{t}`")))?;
            table.push(x);
        }
    }
    let l = lines.expect(end)?;
    l.expect_len(1)?;
    FiniteGroup::new(name, names, table).map(Arc::new).map_err(|e| ParseError {
        line: header_line,
        column: 1,
        message: e.to_string(),
    })
}

pub fn emit_group(g: &FiniteGroup) -> String {
    let mut out = String::from("kato-group 1\n");
    let _ = writeln!(out, "name {}", g.name());
    write_group_body(&mut out, g);
    out.push_str("end\n");
    out
}

pub fn parse_group(text: &str) -> Result<Group, ParseError> {
    let mut lines = Lines::new(text);
    lines.header("kato-group", 1)?;
    let l = lines.expect("name")?;
    l.expect_len(2)?;
    let name = l.tok(1)?.to_string();
    let g = parse_group_body(&mut lines, &name, "end")?;
    lines.finish()?;
    Ok(g)
}

fn write_injection(out: &mut String, m: &GroupInjection) {
    out.push_str(" [");
    for s in m.source().generating_set() {
        let _ =
            write!(out, " {}={}", m.source().element_name(s), m.target().element_name(m.apply(s)));
    }
    out.push_str(" ]");
}

/// Parses `[ … ]` at token `i` into an injection `source → target`.
fn parse_injection(
    line: &Line,
    i: usize,
    source: &Group,
    target: &Group,
) -> Result<(GroupInjection, usize), ParseError> {
    let (pairs, next) = line.bracket(i)?;
    let gens = source.generating_set();
    let mut images = vec![None; gens.len()];
    for &(j, a, b) in &pairs {
        let k = gens
            .iter()
            .position(|&s| source.element_name(s) == a)
            .ok_or_else(|| line.err(j, format!("`{a}` is not a generator of {}", source.name())))?;
        let y = target
            .element_index(b)
            .ok_or_else(|| line.err(j, format!("`{b}` is not an element of {}", target.name())))?;
        if images[k].replace(y).is_some() {
            return Err(line.err(j, format!("generator `{a}` given twice")));
        }
    }
    let images: Vec<usize> = images
        .into_iter()
        .enumerate()
        .map(|(k, y)| {
            y.ok_or_else(|| {
                line.err(i, format!("missing image of `{}`", source.element_name(gens[k])))
            })
        })
        .collect::<Result<_, _>>()?;
    let inj = GroupInjection::from_generator_images(source.clone(), target.clone(), &images)
        .map_err(|e| line.err(i, e.to_string()))?;
    Ok((inj, next))
}

fn parse_id(line: &Line, i: usize, prefix: char) -> Result<u32, ParseError> {
    let t = line.tok(i)?;
    t.strip_prefix(prefix)
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| line.err(i, format!("expected an id like `{prefix}0`, found `{t}`")))
}

/// Graph lines (inline groups, vertices, edges, cusps) without header.
pub(crate) fn write_graph_body(out: &mut String, graph: &KatoGraph) {
    let mut scope = GroupScope::default();
    let groups = graph
        .vertices
        .iter()
        .map(|v| &v.group)
        .chain(graph.edges.iter().map(|e| &e.group))
        .chain(graph.cusps.iter().map(|c| &c.group));
    for g in groups {
        if scope.register(g) {
            write_inline_group(out, g);
        }
    }
    for v in &graph.vertices {
        let _ = writeln!(out, "vertex {} {}", v.id, v.group.name());
    }
    for e in &graph.edges {
        let _ = write!(out, "edge {} {} {} {}", e.id, e.group.name(), e.ends[0], e.ends[1]);
        write_injection(out, &e.maps[0]);
        write_injection(out, &e.maps[1]);
        out.push('\n');
    }
    for c in &graph.cusps {
        let _ = write!(out, "cusp {} {} {}", c.id, c.group.name(), c.vertex);
        write_injection(out, &c.map);
        out.push('\n');
    }
}

pub(crate) fn parse_graph_body(lines: &mut Lines, end: &str) -> Result<KatoGraph, ParseError> {
    let mut scope = GroupScope::default();
    let mut graph = KatoGraph::new();
    let vertex_group =
        |graph: &KatoGraph, l: &Line, i: usize| -> Result<(VertexId, Group), ParseError> {
            let id = VertexId(parse_id(l, i, 'v')?);
            let v =
                graph.vertex(id).ok_or_else(|| l.err(i, format!("vertex {id} is not declared")))?;
            Ok((id, v.group.clone()))
        };
    loop {
        let l = lines.next()?;
        match l.keyword() {
            k if k == end => {
                l.expect_len(1)?;
                return Ok(graph);
            }
            "group" => {
                l.expect_len(2)?;
                let name = l.tok(1)?;
                if scope.inline.iter().any(|g| g.name() == name) {
                    return Err(l.err(1, format!("group `{name}` defined twice")));
                }
                let g = parse_group_body(lines, name, "end-group")?;
                scope.inline.push(g);
            }
            "vertex" => {
                l.expect_len(3)?;
                let id = VertexId(parse_id(l, 1, 'v')?);
                if graph.vertex(id).is_some() {
                    return Err(l.err(1, format!("vertex {id} declared twice")));
                }
                graph.vertices.push(Vertex { id, group: scope.resolve(l, 2)? });
            }
            "edge" => {
                let id = EdgeId(parse_id(l, 1, 'e')?);
                let group = scope.resolve(l, 2)?;
                let (a, ga) = vertex_group(&graph, l, 3)?;
                let (b, gb) = vertex_group(&graph, l, 4)?;
                let (m0, next) = parse_injection(l, 5, &group, &ga)?;
                let (m1, next) = parse_injection(l, next, &group, &gb)?;
                l.expect_len(next)?;
                graph.edges.push(Edge { id, group, ends: [a, b], maps: [m0, m1] });
            }
            "cusp" => {
                let id = CuspId(parse_id(l, 1, 'c')?);
                let group = scope.resolve(l, 2)?;
                let (v, gv) = vertex_group(&graph, l, 3)?;
                let (map, next) = parse_injection(l, 4, &group, &gv)?;
                l.expect_len(next)?;
                graph.cusps.push(Cusp { id, group, vertex: v, map });
            }
            other => return Err(l.err(0, format!("unexpected `{other}`"))),
        }
    }
}

pub fn emit_graph(graph: &KatoGraph) -> String {
    let mut out = String::from("kato-graph 1\n");
    write_graph_body(&mut out, graph);
    out.push_str("end\n");
    out
}

/// Parses a graph document. Structure is checked; use
/// [`crate::kato::validate`] for the group-theoretic axioms.
pub fn parse_graph(text: &str) -> Result<KatoGraph, ParseError> {
    let mut lines = Lines::new(text);
    lines.header("kato-graph", 1)?;
    let g = parse_graph_body(&mut lines, "end")?;
    lines.finish()?;
    Ok(g)
}

pub fn emit_presentation(p: &Presentation) -> String {
    let mut out = String::from("kato-presentation 1\n");
    let _ = writeln!(out, "generators {}", p.generators.len());
    for g in &p.generators {
        let _ = writeln!(out, "gen {g}");
    }
    let _ = writeln!(out, "relators {}", p.relators.len());
    for r in &p.relators {
        let word: Vec<String> = r.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "rel {}", word.join(" "));
    }
    let ab = p.abelianization();
    let torsion: Vec<String> = ab.torsion.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "free-rank {}", ab.free_rank);
    let _ =
        writeln!(out, "torsion{}{}", if torsion.is_empty() { "" } else { " " }, torsion.join(" "));
    out.push_str("end\n");
    out
}

/// Parses a presentation; the trailing abelianization lines are checked
/// against a recomputation.
pub fn parse_presentation(text: &str) -> Result<Presentation, ParseError> {
    let mut lines = Lines::new(text);
    lines.header("kato-presentation", 1)?;
    let l = lines.expect("generators")?;
    l.expect_len(2)?;
    let n: usize = l.parse(1, "generator count")?;
    let mut generators = Vec::with_capacity(n);
    for _ in 0..n {
        let l = lines.expect("gen")?;
        l.expect_len(2)?;
        generators.push(l.tok(1)?.to_string());
    }
    let l = lines.expect("relators")?;
    l.expect_len(2)?;
    let m: usize = l.parse(1, "relator count")?;
    let mut relators = Vec::with_capacity(m);
    for _ in 0..m {
        let l = lines.expect("rel")?;
        let word = (1..l.len())
            .map(|i| {
                let x: i64 = l.parse(i, "signed generator index")?;
                if x == 0 || x.unsigned_abs() as usize > n {
                    return Err(l.err(i, format!("generator index {x} out of range")));
                }
                Ok(x)
            })
            .collect::<Result<Vec<_>, _>>()?;
        relators.push(word);
    }
    let p = Presentation { generators, relators };
    let ab = p.abelianization();
    let l = lines.expect("free-rank")?;
    l.expect_len(2)?;
    if l.parse::<usize>(1, "rank")? != ab.free_rank {
        return Err(l.err(1, format!("free rank does not match the relators ({})", ab.free_rank)));
    }
    let l = lines.expect("torsion")?;
    let torsion: Vec<String> = l.toks[1..].iter().map(|t| t.1.to_string()).collect();
    let expected: Vec<String> = ab.torsion.iter().map(ToString::to_string).collect();
    if torsion != expected {
        return Err(
            l.err(1, format!("torsion does not match the relators ({})", expected.join(" ")))
        );
    }
    lines.expect("end")?.expect_len(1)?;
    lines.finish()?;
    Ok(p)
}

/// A `--group` argument: a catalog name, or failing that a group file.
pub fn load_group(arg: &str) -> Result<Group, String> {
    match catalog_group(arg) {
        Ok(g) => Ok(g),
        Err(catalog_err) => match std::fs::read_to_string(arg) {
            Ok(text) => parse_group(&text).map_err(|e| format!("{arg}: {e}")),
            Err(_) => Err(format!(
                "`{arg}` is neither a catalog group ({catalog_err}) nor a readable file"
            )),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bass_serre::presentation;
    use crate::group::{catalog_group, Subgroup};
    use crate::kato::{elementary_kato, paste, validate};

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
    fn tate_text() {
        let text = emit_graph(&tate());
        assert_eq!(
            text,
            "kato-graph 1\nvertex v0 C2\nvertex v1 C2\nedge e0 C1 v0 v1 [ ] [ ]\n\
             cusp c0 C2 v0 [ a=a ]\ncusp c1 C2 v0 [ a=a ]\ncusp c2 C2 v1 [ a=a ]\ncusp c3 C2 v1 [ a=a ]\nend\n"
        );
        assert_eq!(parse_graph(&text).unwrap(), tate());
    }

    #[test]
    fn graphs_round_trip() {
        let a4 = elementary_kato(&catalog_group("A4").unwrap()).unwrap();
        let s4 = elementary_kato(&catalog_group("S4").unwrap()).unwrap();
        let c3a = a4.cusps.iter().find(|c| c.index() == 3).unwrap().clone();
        let c3s = s4.cusps.iter().find(|c| c.index() == 3).unwrap().clone();
        let iso = crate::group::are_isomorphic(&c3a.group, &c3s.group).unwrap();
        let p = paste(&a4, c3a.id, &s4, c3s.id, &iso).unwrap();
        for g in [tate(), a4, s4, p] {
            let back = parse_graph(&emit_graph(&g)).unwrap();
            assert_eq!(back, g);
            validate(&back).unwrap();
        }
    }

    #[test]
    fn inline_groups_round_trip() {
        let s4 = catalog_group("S4").unwrap();
        let h = crate::group::subgroups_up_to_conjugacy(&s4).unwrap();
        let d4: &Subgroup = h.iter().find(|s| s.order() == 8).unwrap();
        let (group, inclusion) = d4.to_group("D4sub").unwrap();
        let mut k = KatoGraph::new();
        let v = k.add_vertex(s4.clone());
        let w = k.add_vertex(group.clone());
        k.add_edge(group.clone(), [w, v], [GroupInjection::identity(&group), inclusion]);
        let text = emit_graph(&k);
        assert!(text.contains("group D4sub\n"));
        assert_eq!(parse_graph(&text).unwrap(), k);

        let gt = emit_group(&group);
        assert_eq!(*parse_group(&gt).unwrap(), *group);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse_graph("kato-graph 1\nvertex v0 C2\nvertex v1 Q9\nend\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 11));
        let e = parse_graph("kato-graph 2\nend\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 12));
        let e =
            parse_graph("kato-graph 1\nvertex v0 C2\ncusp c0 C2 v0 [ a=b ]\nend\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 17));
        let e =
            parse_graph("kato-graph 1\nvertex v0 C2\nedge e0 C1 v0 v4 [ ] [ ]\nend\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 15));
        let e = parse_graph("kato-graph 1\nvertex v0 C2\n").unwrap_err();
        assert!(e.message.contains("end of input"));
        let e =
            parse_group("kato-group 1\nname X\nelements e a\nrow e a\nrow a a\nend\n").unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn presentations_round_trip() {
        for k in [tate(), elementary_kato(&catalog_group("D3").unwrap()).unwrap()] {
            let p = presentation(&k).unwrap();
            let text = emit_presentation(&p);
            assert_eq!(parse_presentation(&text).unwrap(), p);
        }
        let p = presentation(&tate()).unwrap();
        let text = emit_presentation(&p);
        assert!(text.ends_with("free-rank 0\ntorsion 2 2\nend\n"));
        let bad = text.replace("free-rank 0", "free-rank 1");
        assert!(parse_presentation(&bad).is_err());
    }
}
