//! Bass–Serre fundamental groups of Kato graphs and their finite quotients.

mod marking;
mod presentation;
mod snf;

pub use marking::{find_markings, kernel_rank, GaloisMarking, MarkingError};
pub use presentation::{
    abelian_free_rank, abelian_invariants, presentation, presentation_size, spanning_tree,
    AbelianInvariants, Presentation,
};
pub use snf::invariant_factors;
