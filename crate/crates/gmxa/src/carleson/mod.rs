//! Sheared-plate lattices, Carleson sequences and their balayage, and the
//! embedding, subordination, decay and slicing audits.

mod audit;
mod geometry;
mod lattice;
mod sequence;

pub use audit::{
    adversarial_sequence, balayage_norm, decay_audit, embedding_audit, shadow_measure, slicing_check, subordination_audit, DecayReport, DecayRow,
    EmbeddingReport, SliceCheck, SubordinationCheck, SubordinationReport,
};
pub use geometry::{contained_in, for_each_node, intersection_volume, intersection_volume_quadrature, vertices};
pub use lattice::{build_lattice, random_cap_directions, PlateId, PlateLattice};
pub use sequence::{adjoint_sequence, balayage, random_lattice_sequence, random_selection, CarlesonSequence, SequenceEntry};
