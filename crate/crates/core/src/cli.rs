//! The `kato` command line: argument parsing, dispatch, and the invariant
//! suite behind `check`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bass_serre::{kernel_rank, presentation};
use crate::census::{
    cyclic_pairing_holds, dimension, enumerate_charts, orbifold_chi_check, riemann_hurwitz_genus,
    AcceptAll, AdmissibilityFilter, CensusError, CensusReport, PFilter, SearchBounds, Signature,
};
use crate::group::are_isomorphic;
use crate::io::{
    emit_graph, emit_presentation, emit_report, emit_report_table, load_group, parse_graph,
    parse_report,
};
use crate::kato::{
    canonical_form, is_stable, paste, slide_cusp, slide_edge, stable_model, validate, CuspId,
    KatoGraph,
};
use crate::Rational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "kato",
    version,
    about = "Kato graphs, Bass–Serre presentations and chart censuses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Structured, global = true)]
    format: Format,
    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the axioms of a graph file and print its invariants.
    Validate { graph: PathBuf },
    /// Contract to the stable model.
    Stabilize { graph: PathBuf },
    /// Glue cusp CUSP1 of GRAPH1 to cusp CUSP2 of GRAPH2.
    Paste { graph1: PathBuf, cusp1: String, graph2: PathBuf, cusp2: String },
    /// Bass–Serre presentation and abelianization.
    Present { graph: PathBuf },
    /// Enumerate chart classes.
    Census {
        #[arg(long)]
        genus: usize,
        /// Comma-separated ramification indices; empty for none.
        #[arg(long, allow_hyphen_values = true)]
        signature: String,
        /// Catalog name (C12, D4, A5, C2xC2, …) or a group file.
        #[arg(long)]
        group: String,
        #[arg(long)]
        max_vertices: Option<usize>,
        /// `none`, `p-filter` or `p-filter:NAME,NAME,…`.
        #[arg(long, default_value = "none")]
        filter: String,
    },
    /// Run the invariant suite on a graph or census report.
    Check {
        file: PathBuf,
        /// Seeds the check order and the random move sequences.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
    /// Output was still produced.
    Incomplete(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Domain(_) => EXIT_DOMAIN,
            Failure::Incomplete(_) => EXIT_INCOMPLETE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Incomplete(m) => m,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

/// Parses `args` (including the program name), runs the command, and
/// returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let (output, status) = match dispatch(&cli) {
        Ok(text) => (Some(text), None),
        Err((text, failure)) => (text, Some(failure)),
    };
    if let Some(text) = output {
        let written = match &cli.out {
            Some(path) => {
                write_atomic(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))
            }
            None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
        };
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    }
    match status {
        None => EXIT_OK,
        Some(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

/// Write-then-rename in the destination directory.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = std::fs::write(&tmp, bytes).and_then(|()| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

type Outcome = Result<String, (Option<String>, Failure)>;

fn fail(f: Failure) -> (Option<String>, Failure) {
    (None, f)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<KatoGraph, Failure> {
    let g = parse_graph(&read(path)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    validate(&g).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    Ok(g)
}

fn cusp_id(s: &str) -> Result<CuspId, Failure> {
    s.strip_prefix('c')
        .and_then(|d| d.parse().ok())
        .map(CuspId)
        .ok_or_else(|| Failure::Usage(format!("expected a cusp id like `c0`, found `{s}`")))
}

fn parse_signature(genus: usize, s: &str) -> Result<Signature, Failure> {
    let indices = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>().map_err(|_| Failure::Usage(format!("bad ramification index `{t}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Signature::new(genus, indices).map_err(|e| Failure::Usage(e.to_string()))
}

fn parse_filter(s: &str) -> Result<Box<dyn AdmissibilityFilter>, Failure> {
    match s.split_once(':') {
        _ if s == "none" => Ok(Box::new(AcceptAll)),
        _ if s == "p-filter" => Ok(Box::new(PFilter::new())),
        Some(("p-filter", names)) => {
            let names: Vec<&str> = names.split(',').filter(|n| !n.is_empty()).collect();
            Ok(Box::new(
                PFilter::with_allowlist(&names).map_err(|e| Failure::Usage(e.to_string()))?,
            ))
        }
        _ => {
            Err(Failure::Usage(format!("unknown filter `{s}` (expected none or p-filter[:NAMES])")))
        }
    }
}

fn invariants_text(graph: &KatoGraph, format: Format) -> String {
    let inv = crate::kato::validate(graph).expect("validated on load");
    match format {
        Format::Table => format!(
            "betti\tcusps\teuler-char\n{}\t{}\t{}\n",
            inv.betti, inv.cusp_count, inv.euler_char
        ),
        Format::Structured => format!(
            "kato-invariants 1\nbetti {}\ncusps {}\neuler-char {}\nend\n",
            inv.betti, inv.cusp_count, inv.euler_char
        ),
    }
}

fn report_text(r: &CensusReport, format: Format) -> String {
    match format {
        Format::Table => emit_report_table(r),
        Format::Structured => emit_report(r),
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { graph } => {
            let g = load_graph(graph).map_err(fail)?;
            Ok(invariants_text(&g, cli.format))
        }
        Command::Stabilize { graph } => {
            let g = load_graph(graph).map_err(fail)?;
            Ok(emit_graph(&stable_model(&g).map_err(|e| fail(domain(e)))?))
        }
        Command::Paste { graph1, cusp1, graph2, cusp2 } => {
            let a = load_graph(graph1).map_err(fail)?;
            let b = load_graph(graph2).map_err(fail)?;
            let (c1, c2) = (cusp_id(cusp1).map_err(fail)?, cusp_id(cusp2).map_err(fail)?);
            let ga = &a
                .cusp(c1)
                .ok_or_else(|| fail(Failure::Usage(format!("{}: no cusp {c1}", graph1.display()))))?
                .group;
            let gb = &b
                .cusp(c2)
                .ok_or_else(|| fail(Failure::Usage(format!("{}: no cusp {c2}", graph2.display()))))?
                .group;
            let iso = are_isomorphic(ga, gb).ok_or_else(|| {
                fail(Failure::Domain(format!(
                    "cusp groups {} and {} are not isomorphic",
                    ga.name(),
                    gb.name()
                )))
            })?;
            Ok(emit_graph(&paste(&a, c1, &b, c2, &iso).map_err(|e| fail(domain(e)))?))
        }
        Command::Present { graph } => {
            let g = load_graph(graph).map_err(fail)?;
            Ok(emit_presentation(&presentation(&g).map_err(|e| fail(domain(e)))?))
        }
        Command::Census { genus, signature, group, max_vertices, filter } => {
            let sig = parse_signature(*genus, signature).map_err(fail)?;
            let g = load_group(group).map_err(|e| fail(Failure::Usage(e)))?;
            let filter = parse_filter(filter).map_err(fail)?;
            let bounds = SearchBounds { max_vertices: *max_vertices };
            match enumerate_charts(&sig, &g, &bounds, filter.as_ref()) {
                Ok(r) => Ok(report_text(&r, cli.format)),
                Err(CensusError::Incomplete(r)) => {
                    let msg = CensusError::Incomplete(r.clone()).to_string();
                    Err((Some(report_text(&r, cli.format)), Failure::Incomplete(msg)))
                }
                Err(e) => Err(fail(domain(e))),
            }
        }
        Command::Check { file, seed } => {
            let text = read(file).map_err(fail)?;
            let results = if text.trim_start().starts_with("kato-census") {
                let r = parse_report(&text)
                    .map_err(|e| fail(Failure::Usage(format!("{}: {e}", file.display()))))?;
                check_report(&r, *seed)
            } else {
                let g = parse_graph(&text)
                    .map_err(|e| fail(Failure::Usage(format!("{}: {e}", file.display()))))?;
                check_graph(&g, *seed)
            };
            let out = format_checks(&results, cli.format);
            let failed = results.iter().filter(|c| c.detail.is_some()).count();
            if failed == 0 {
                Ok(out)
            } else {
                Err((Some(out), Failure::Domain(format!("{failed} check(s) failed"))))
            }
        }
    }
}

/// One line of `check` output; `detail` is set on failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub detail: Option<String>,
}

fn format_checks(results: &[CheckResult], format: Format) -> String {
    let mut out = String::new();
    if format == Format::Structured {
        out.push_str("kato-check 1\n");
    }
    for c in results {
        match (&c.detail, format) {
            (None, Format::Table) => out.push_str(&format!("{}\tok\n", c.name)),
            (Some(d), Format::Table) => out.push_str(&format!("{}\tFAIL\t{d}\n", c.name)),
            (None, Format::Structured) => out.push_str(&format!("ok {}\n", c.name)),
            (Some(d), Format::Structured) => out.push_str(&format!("fail {} {d}\n", c.name)),
        }
    }
    if format == Format::Structured {
        out.push_str("end\n");
    }
    out
}

type Check<'a> = (String, Box<dyn Fn(&mut ChaCha8Rng) -> Result<(), String> + 'a>);

/// Runs the checks in a seed-dependent order.
fn run_checks(mut checks: Vec<Check<'_>>, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    checks.shuffle(&mut rng);
    checks.into_iter().map(|(name, f)| CheckResult { name, detail: f(&mut rng).err() }).collect()
}

/// Random conjugation moves on every edge end and cusp.
pub fn random_slides<R: Rng>(graph: &KatoGraph, rng: &mut R, steps: usize) -> KatoGraph {
    let mut g = graph.clone();
    for _ in 0..steps {
        let ends = 2 * g.edges.len();
        if ends + g.cusps.len() == 0 {
            break;
        }
        let pick = rng.gen_range(0..ends + g.cusps.len());
        g = if pick < ends {
            let e = &g.edges[pick / 2];
            let order = e.maps[pick % 2].target().order();
            slide_edge(&g, e.id, pick % 2, rng.gen_range(0..order))
        } else {
            let c = &g.cusps[pick - ends];
            slide_cusp(&g, c.id, rng.gen_range(0..c.map.target().order()))
        }
        .expect("moves stay within the graph");
    }
    g
}

fn move_invariance(graph: &KatoGraph, rng: &mut ChaCha8Rng, rounds: usize) -> Result<(), String> {
    let key = canonical_form(&stable_model(graph).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    for round in 0..rounds {
        let moved = random_slides(graph, rng, 8);
        let k = canonical_form(&stable_model(&moved).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        if k != key {
            return Err(format!("key changed after move sequence {round}"));
        }
    }
    Ok(())
}

/// The genus of the base implied by `2χ = 2 − 2g − Σ(1 − 1/e)`, if integral.
fn implied_genus(graph: &KatoGraph) -> Option<usize> {
    let indices = graph.cusp_indices();
    let sig = Signature::new(0, indices).ok()?;
    let two = Rational::from_integer(2.into());
    let g = (two.clone() - sig.ramification() - two * graph.euler_char())
        / Rational::from_integer(2.into());
    (g.is_integer() && !g.is_negative()).then(|| g.to_integer().to_usize()).flatten()
}

/// Invariant suite for a single graph.
pub fn check_graph(graph: &KatoGraph, seed: u64) -> Vec<CheckResult> {
    let checks: Vec<Check> = vec![
        ("axioms".into(), Box::new(|_| validate(graph).map(|_| ()).map_err(|e| e.to_string()))),
        (
            "chi".into(),
            Box::new(|_| {
                implied_genus(graph)
                    .filter(|&g| orbifold_chi_check(graph, g))
                    .map(|_| ())
                    .ok_or_else(|| {
                        format!("χ = {} gives no integral base genus", graph.euler_char())
                    })
            }),
        ),
        (
            "stable-idempotent".into(),
            Box::new(|_| {
                let s = stable_model(graph).map_err(|e| e.to_string())?;
                let again = stable_model(&s).map_err(|e| e.to_string())?;
                (is_stable(&s) && again == s)
                    .then_some(())
                    .ok_or_else(|| "stable model is not a fixed point".into())
            }),
        ),
        (
            "presentation".into(),
            Box::new(|_| {
                let p = presentation(graph).map_err(|e| e.to_string())?;
                p.is_well_formed().then_some(()).ok_or_else(|| "malformed presentation".into())
            }),
        ),
        ("move-invariance".into(), Box::new(|rng| move_invariance(graph, rng, 20))),
    ];
    if validate(graph).is_err() {
        return run_checks(checks.into_iter().take(1).collect(), seed);
    }
    run_checks(checks, seed)
}

/// Invariant suite for a census report: per class the χ-check, kernel rank
/// against the Riemann–Hurwitz genus, stability, markings, abelianization,
/// move invariance, and cyclic pairing for cyclic targets.
pub fn check_report(r: &CensusReport, seed: u64) -> Vec<CheckResult> {
    let m = r.group.order();
    let rh = riemann_hurwitz_genus(&r.signature, m);
    let mut checks: Vec<Check> = vec![(
        "dimension".into(),
        Box::new(|_| {
            (r.dimension == dimension(&r.signature)).then_some(()).ok_or_else(|| {
                format!("recorded {} but 3g−3+n = {}", r.dimension, dimension(&r.signature))
            })
        }),
    )];
    for (i, class) in r.classes.iter().enumerate() {
        let g = &class.graph;
        let rh = rh.clone();
        checks.push((
            format!("class-{i}-chi"),
            Box::new(move |_| {
                (orbifold_chi_check(g, r.signature.genus)
                    && g.cusp_indices() == r.signature.indices)
                    .then_some(())
                    .ok_or_else(|| "χ or cusp orders disagree with the signature".into())
            }),
        ));
        checks.push((
            format!("class-{i}-rank"),
            Box::new(move |_| {
                let k = kernel_rank(g, m);
                (k == rh && Rational::from_integer(class.cover_genus.into()) == rh)
                    .then_some(())
                    .ok_or_else(|| format!("kernel rank {k} vs Riemann–Hurwitz {rh}"))
            }),
        ));
        checks.push((
            format!("class-{i}-stable"),
            Box::new(move |_| is_stable(g).then_some(()).ok_or_else(|| "not stable".into())),
        ));
        checks.push((
            format!("class-{i}-markings"),
            Box::new(move |_| {
                if class.markings.is_empty() {
                    return Err("no marking".into());
                }
                class.markings.iter().try_for_each(|mk| mk.verify(g).map_err(|e| e.to_string()))
            }),
        ));
        checks.push((
            format!("class-{i}-abelianization"),
            Box::new(move |_| {
                let ab = presentation(g).map_err(|e| e.to_string())?.abelianization();
                (ab == class.abelianization)
                    .then_some(())
                    .ok_or_else(|| "abelianization differs".into())
            }),
        ));
        checks.push((format!("class-{i}-moves"), Box::new(move |rng| move_invariance(g, rng, 20))));
        if r.group.is_cyclic() {
            checks.push((
                format!("class-{i}-cyclic-pairing"),
                Box::new(move |_| {
                    cyclic_pairing_holds(g).then_some(()).ok_or_else(|| "pairing fails".into())
                }),
            ));
        }
    }
    run_checks(checks, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("kato").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&[]).0, EXIT_USAGE);
        assert_eq!(run_str(&["census", "--genus", "0"]).0, EXIT_USAGE);
        let (code, _, err) =
            run_str(&["census", "--genus", "0", "--group", "Q7", "--signature", "2,2"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Q7"));
        assert_eq!(
            run_str(&["census", "--genus", "0", "--group", "C2", "--signature", "2,1"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn incomplete_exits_3_with_output() {
        let (code, out, _) = run_str(&[
            "census",
            "--genus",
            "0",
            "--group",
            "C2",
            "--signature",
            "2,2,2,2",
            "--max-vertices",
            "1",
        ]);
        assert_eq!(code, EXIT_INCOMPLETE);
        assert!(out.contains("complete no"));
    }

    #[test]
    fn implied_genus_of_tate() {
        let k = crate::kato::fixtures::tate_segment();
        assert_eq!(implied_genus(&k), Some(0));
        assert!(check_graph(&k, 1).iter().all(|c| c.detail.is_none()));
    }
}
