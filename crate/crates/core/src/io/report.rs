use std::fmt::Write as _;

use num_bigint::BigInt;

use super::text::{Line, Lines, ParseError};
use super::{
    parse_graph_body, parse_injection, write_graph_body, write_injection, write_inline_group,
    GroupScope,
};
use crate::bass_serre::{AbelianInvariants, GaloisMarking};
use crate::census::{BoundsUsed, CensusReport, ChartClass, Signature};
use crate::group::Group;
use crate::kato::{canonical_form, EdgeId, KatoGraph, VertexId};

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn tail(xs: &[impl ToString]) -> String {
    xs.iter().map(|x| format!(" {}", x.to_string())).collect()
}

fn opt(x: Option<usize>) -> String {
    x.map_or("none".into(), |v| v.to_string())
}

/// Structured report: input echo, search bounds, and every class with its
/// graph, presentation summary and marking classes.
pub fn emit_report(r: &CensusReport) -> String {
    let mut out = String::from("kato-census 1\n");
    let mut scope = GroupScope::default();
    if scope.register(&r.group) {
        write_inline_group(&mut out, &r.group);
    }
    let _ = writeln!(out, "target {}", r.group.name());
    let _ = writeln!(out, "genus {}", r.signature.genus);
    let _ = writeln!(out, "signature{}", tail(&r.signature.indices));
    let _ = writeln!(out, "filter {}", r.filter);
    let _ = writeln!(out, "dimension {}", r.dimension);
    let _ = writeln!(out, "cover-genus {}", opt(r.cover_genus));
    let _ = writeln!(out, "complete {}", yes_no(r.complete));
    let _ = writeln!(out, "max-vertices {}", r.bounds.max_vertices);
    let _ = writeln!(out, "required-vertices {}", r.bounds.required_vertices);
    let _ = writeln!(out, "candidates {}", r.bounds.candidates);
    let _ = writeln!(out, "classes {}", r.classes.len());
    for c in &r.classes {
        let _ = writeln!(out, "class {}", c.key.digest());
        let _ = writeln!(out, "base-genus {}", c.base_genus);
        let _ = writeln!(out, "cover-genus {}", c.cover_genus);
        let _ = writeln!(out, "tate-type {}", yes_no(c.is_tate_type()));
        let _ = writeln!(out, "presentation {} {}", c.presentation_size.0, c.presentation_size.1);
        let _ = writeln!(
            out,
            "abelianization {}{}",
            c.abelianization.free_rank,
            tail(&c.abelianization.torsion)
        );
        out.push_str("graph\n");
        write_graph_body(&mut out, &c.graph);
        out.push_str("end-graph\n");
        let _ = writeln!(out, "markings {}", c.markings.len());
        for m in &c.markings {
            out.push_str("marking\n");
            for (v, map) in &m.vertex_maps {
                let _ = write!(out, "vmap {v}");
                write_injection(&mut out, map);
                out.push('\n');
            }
            for (e, t) in &m.stable_letters {
                let _ = writeln!(out, "tmap {e} {}", m.target.element_name(*t));
            }
            out.push_str("end-marking\n");
        }
        out.push_str("end-class\n");
    }
    out.push_str("end\n");
    out
}

/// One row per class: key, vertex count, edge count, vertex-group orders,
/// marking count.
pub fn emit_report_table(r: &CensusReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# target {} genus {} signature {} dimension {} cover-genus {} complete {} classes {}",
        r.group.name(),
        r.signature.genus,
        if r.signature.indices.is_empty() { "-".into() } else { join(&r.signature.indices, ",") },
        r.dimension,
        opt(r.cover_genus),
        yes_no(r.complete),
        r.classes.len()
    );
    out.push_str("key\tvertices\tedges\tvertex-orders\tmarkings\n");
    for c in &r.classes {
        let orders: Vec<usize> = c.graph.vertices.iter().map(|v| v.group.order()).collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            c.key.digest(),
            c.graph.vertices.len(),
            c.graph.edges.len(),
            join(&orders, ","),
            c.markings.len()
        );
    }
    out
}

fn field<'l, 'a>(lines: &'l mut Lines<'a>, kw: &str, n: usize) -> Result<&'l Line<'a>, ParseError> {
    let l = lines.expect(kw)?;
    l.expect_len(n + 1)?;
    Ok(l)
}

fn yes_no_at(l: &Line, i: usize) -> Result<bool, ParseError> {
    match l.tok(i)? {
        "yes" => Ok(true),
        "no" => Ok(false),
        t => Err(l.err(i, format!("expected `yes` or `no`, found `{t}`"))),
    }
}

fn opt_at(l: &Line, i: usize) -> Result<Option<usize>, ParseError> {
    if l.tok(i)? == "none" {
        Ok(None)
    } else {
        l.parse(i, "integer or `none`").map(Some)
    }
}

fn parse_marking(
    lines: &mut Lines,
    graph: &KatoGraph,
    target: &Group,
) -> Result<GaloisMarking, ParseError> {
    let mut vertex_maps = Vec::new();
    let mut stable_letters = Vec::new();
    loop {
        let l = lines.next()?;
        match l.keyword() {
            "end-marking" => {
                l.expect_len(1)?;
                break;
            }
            "vmap" => {
                let id = VertexId(super::parse_id(l, 1, 'v')?);
                let v = graph
                    .vertex(id)
                    .ok_or_else(|| l.err(1, format!("no vertex {id} in the class graph")))?;
                let (map, next) = parse_injection(l, 2, &v.group, target)?;
                l.expect_len(next)?;
                vertex_maps.push((id, map));
            }
            "tmap" => {
                l.expect_len(3)?;
                let id = EdgeId(super::parse_id(l, 1, 'e')?);
                if graph.edge(id).is_none() {
                    return Err(l.err(1, format!("no edge {id} in the class graph")));
                }
                let name = l.tok(2)?;
                let t = target.element_index(name).ok_or_else(|| {
                    l.err(2, format!("`{name}` is not an element of {}", target.name()))
                })?;
                stable_letters.push((id, t));
            }
            other => return Err(l.err(0, format!("unexpected `{other}` in marking"))),
        }
    }
    Ok(GaloisMarking { target: target.clone(), vertex_maps, stable_letters })
}

fn parse_class(lines: &mut Lines, target: &Group) -> Result<ChartClass, ParseError> {
    let l = field(lines, "class", 1)?;
    let (digest_line, digest) = (l.no, l.tok(1)?.to_string());
    let base_genus = field(lines, "base-genus", 1)?.parse(1, "genus")?;
    let cover_genus = field(lines, "cover-genus", 1)?.parse(1, "genus")?;
    let l = field(lines, "tate-type", 1)?;
    let tate = yes_no_at(l, 1)?;
    if tate != (cover_genus == 1) {
        return Err(l.err(1, "tate-type flag disagrees with cover-genus"));
    }
    let l = field(lines, "presentation", 2)?;
    let presentation_size = (l.parse(1, "generator count")?, l.parse(2, "relator count")?);
    let l = lines.expect("abelianization")?;
    let free_rank = l.parse(1, "free rank")?;
    let torsion =
        (2..l.len()).map(|i| l.parse::<BigInt>(i, "invariant factor")).collect::<Result<_, _>>()?;
    field(lines, "graph", 0)?;
    let graph = parse_graph_body(lines, "end-graph")?;
    let key = canonical_form(&graph).map_err(|e| ParseError {
        line: digest_line,
        column: 1,
        message: format!("class graph: {e}"),
    })?;
    if key.digest() != digest {
        return Err(ParseError {
            line: digest_line,
            column: 7,
            message: format!("class key {digest} does not match its graph ({})", key.digest()),
        });
    }
    let count: usize = field(lines, "markings", 1)?.parse(1, "marking count")?;
    let mut markings = Vec::with_capacity(count);
    for _ in 0..count {
        field(lines, "marking", 0)?;
        markings.push(parse_marking(lines, &graph, target)?);
    }
    field(lines, "end-class", 0)?;
    Ok(ChartClass {
        key,
        graph,
        markings,
        base_genus,
        cover_genus,
        abelianization: AbelianInvariants { free_rank, torsion },
        presentation_size,
    })
}

pub fn parse_report(text: &str) -> Result<CensusReport, ParseError> {
    let mut lines = Lines::new(text);
    lines.header("kato-census", 1)?;
    let mut scope = GroupScope::default();
    if lines.peek().is_some_and(|l| l.keyword() == "group") {
        let l = lines.next()?;
        l.expect_len(2)?;
        let name = l.tok(1)?.to_string();
        scope.inline.push(super::parse_group_body(&mut lines, &name, "end-group")?);
    }
    let l = field(&mut lines, "target", 1)?;
    let group = scope.resolve(l, 1)?;
    let genus = field(&mut lines, "genus", 1)?.parse(1, "genus")?;
    let l = lines.expect("signature")?;
    let indices = (1..l.len())
        .map(|i| l.parse(i, "ramification index"))
        .collect::<Result<Vec<usize>, _>>()?;
    let signature = Signature::new(genus, indices).map_err(|e| l.err(1, e.to_string()))?;
    let filter = field(&mut lines, "filter", 1)?.tok(1)?.to_string();
    let dimension = field(&mut lines, "dimension", 1)?.parse(1, "dimension")?;
    let cover_genus = opt_at(field(&mut lines, "cover-genus", 1)?, 1)?;
    let complete = yes_no_at(field(&mut lines, "complete", 1)?, 1)?;
    let max_vertices = field(&mut lines, "max-vertices", 1)?.parse(1, "vertex count")?;
    let required_vertices = field(&mut lines, "required-vertices", 1)?.parse(1, "vertex count")?;
    let candidates = field(&mut lines, "candidates", 1)?.parse(1, "candidate count")?;
    let count: usize = field(&mut lines, "classes", 1)?.parse(1, "class count")?;
    let mut classes = Vec::with_capacity(count);
    for _ in 0..count {
        classes.push(parse_class(&mut lines, &group)?);
    }
    field(&mut lines, "end", 0)?;
    lines.finish()?;
    Ok(CensusReport {
        signature,
        group,
        filter,
        classes,
        dimension,
        cover_genus,
        complete,
        bounds: BoundsUsed { max_vertices, required_vertices, candidates },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{enumerate_charts, AcceptAll, SearchBounds};
    use crate::group::catalog_group;

    fn census(genus: usize, group: &str, e: &[usize]) -> CensusReport {
        let sig = Signature::new(genus, e.to_vec()).unwrap();
        enumerate_charts(&sig, &catalog_group(group).unwrap(), &SearchBounds::default(), &AcceptAll)
            .unwrap()
    }

    #[test]
    fn reports_round_trip() {
        for r in [
            census(0, "C2", &[2, 2, 2, 2]),
            census(0, "A5", &[2, 3, 5]),
            census(0, "C2", &[2, 2, 2]),
            census(1, "D2", &[2, 2]),
        ] {
            let text = emit_report(&r);
            let back = parse_report(&text).unwrap();
            assert_eq!(back, r);
            assert_eq!(emit_report(&back), text);
            for c in &back.classes {
                for m in &c.markings {
                    m.verify(&c.graph).unwrap();
                }
            }
        }
    }

    #[test]
    fn table_rows() {
        let t = emit_report_table(&census(0, "C2", &[2, 2, 2, 2]));
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(
            lines[0].starts_with("# target C2 genus 0 signature 2,2,2,2 dimension 1 cover-genus 1")
        );
        assert!(lines[2].ends_with("\t2\t1\t2,2\t1"));
    }

    #[test]
    fn tampered_key_is_rejected() {
        let text = emit_report(&census(0, "C2", &[2, 2, 2, 2]));
        let key = text.lines().find(|l| l.starts_with("class ")).unwrap()[6..].to_string();
        let bad = text.replace(&key, "0000000000000000");
        assert!(parse_report(&bad).unwrap_err().message.contains("does not match"));
    }
}
