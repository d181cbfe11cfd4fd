//! Exhaustive census of chart classes for a genus, a finite group and a
//! branching signature.

mod enumerate;
mod filter;

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bass_serre::{AbelianInvariants, GaloisMarking};
use crate::group::{Group, GroupError};
use crate::kato::{CanonicalKey, KatoError, KatoGraph};
use crate::Rational;

pub use enumerate::{enumerate_charts, vertex_bound};
pub use filter::{AcceptAll, AdmissibilityFilter, PFilter};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub genus: usize,
    /// Sorted ramification indices, each at least 2.
    pub indices: Vec<usize>,
}

impl Signature {
    pub fn new(genus: usize, mut indices: Vec<usize>) -> Result<Signature, CensusError> {
        if let Some(&e) = indices.iter().find(|&&e| e < 2) {
            return Err(CensusError::BadIndex(e));
        }
        indices.sort_unstable();
        Ok(Signature { genus, indices })
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    /// `Σ (1 − 1/e_i)`.
    pub fn ramification(&self) -> Rational {
        ramification(&self.indices)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(ToString::to_string).collect();
        write!(f, "g={} ({})", self.genus, idx.join(","))
    }
}

fn ramification(indices: &[usize]) -> Rational {
    indices
        .iter()
        .map(|&e| Rational::one() - Rational::new(1.into(), e.into()))
        .fold(Rational::zero(), |a, b| a + b)
}

/// `g′` with `2g′ − 2 = m(2g − 2 + Σ(1 − 1/e_i))`; may be non-integral.
pub fn riemann_hurwitz_genus(sig: &Signature, m: usize) -> Rational {
    let two = Rational::from_integer(2.into());
    let base = Rational::from_integer((2 * sig.genus as i64 - 2).into()) + sig.ramification();
    Rational::one() + Rational::from_integer(m.into()) * base / two
}

/// `g′` when it is a nonnegative integer.
pub fn integral_cover_genus(sig: &Signature, m: usize) -> Option<usize> {
    let g = riemann_hurwitz_genus(sig, m);
    (g.is_integer() && !g.is_negative()).then(|| g.to_integer().to_usize()).flatten()
}

/// `3g − 3 + n`.
pub fn dimension(sig: &Signature) -> i64 {
    3 * sig.genus as i64 - 3 + sig.n() as i64
}

/// `2χ(Γ) = 2 − 2g − Σ(1 − 1/e)` over the cusps of `graph`.
pub fn orbifold_chi_check(graph: &KatoGraph, genus: usize) -> bool {
    let two = Rational::from_integer(2.into());
    let rhs = two.clone()
        - Rational::from_integer((2 * genus).into())
        - ramification(&graph.cusp_indices());
    two * graph.euler_char() == rhs
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartClass {
    pub key: CanonicalKey,
    /// Stable representative.
    pub graph: KatoGraph,
    /// Marking classes up to automorphisms of the target.
    pub markings: Vec<GaloisMarking>,
    pub base_genus: usize,
    pub cover_genus: usize,
    pub abelianization: AbelianInvariants,
    pub presentation_size: (usize, usize),
}

impl ChartClass {
    /// `g′ = 1`: free kernel of rank one, as for the Tate curve.
    pub fn is_tate_type(&self) -> bool {
        self.cover_genus == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    /// `None` selects the default `max(3n, 2g − 2 + n, 1)`.
    pub max_vertices: Option<usize>,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { max_vertices: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsUsed {
    pub max_vertices: usize,
    /// Largest vertex count a stable chart can have for this signature.
    pub required_vertices: usize,
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusReport {
    pub signature: Signature,
    pub group: Group,
    pub filter: String,
    pub classes: Vec<ChartClass>,
    pub dimension: i64,
    /// `None` when the Riemann–Hurwitz genus is not a nonnegative integer.
    pub cover_genus: Option<usize>,
    pub complete: bool,
    pub bounds: BoundsUsed,
}

#[derive(Debug, thiserror::Error)]
pub enum CensusError {
    #[error("ramification index {0} is below 2")]
    BadIndex(usize),
    #[error("search stopped at {} vertices; stable charts may need {}", .0.bounds.max_vertices, .0.bounds.required_vertices)]
    Incomplete(Box<CensusReport>),
    #[error("cyclic pairing applies to cyclic groups only, not {0}")]
    NotCyclic(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Kato(#[from] KatoError),
}

/// For cyclic `G`: every class has an even number of cusps pairing up by
/// order, only cyclic vertex groups, and nontrivial edges only between
/// vertices whose whole group is the edge group.
pub fn cyclic_pairing_check(report: &CensusReport) -> Result<bool, CensusError> {
    if !report.group.is_cyclic() {
        return Err(CensusError::NotCyclic(report.group.name().to_string()));
    }
    Ok(report.classes.iter().all(|c| cyclic_pairing_holds(&c.graph)))
}

pub fn cyclic_pairing_holds(graph: &KatoGraph) -> bool {
    let idx = graph.cusp_indices();
    let paired = idx.len() % 2 == 0 && idx.chunks(2).all(|p| p[0] == p[1]);
    let cyclic = graph.vertices.iter().all(|v| v.group.is_cyclic());
    let edges = graph.edges.iter().all(|e| {
        e.group.is_trivial()
            || e.ends
                .iter()
                .all(|&v| graph.vertex(v).is_some_and(|v| v.group.order() == e.group.order()))
    });
    paired && cyclic && edges
}
