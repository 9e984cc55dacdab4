//! Non-abelian group arithmetic: finite Cayley tables, free groups, products,
//! homomorphisms, commutator calculus, and abelianization.

mod abelianize;
pub mod catalog;
mod finite;
mod free;
mod object;

pub use abelianize::{
    ab_invariants_by_counting, abelianization, abelianization_by_presentation,
    commutator_subobject, direct_sum_with_projection, induced_ab_map, Abelianization,
};
pub use finite::{
    commutator_length_finite, commutator_length_table, commutator_width_finite, EmbeddedSubgroup,
    FiniteClResult, FiniteGroup, GroupError, EXHAUSTIVE_ASSOC_BOUND,
};
pub use free::{
    commutator_length_free, is_single_commutator, quotient_lower_bound,
    single_commutator_witness, CommutatorWitness, FreeClOptions, FreeClReport, FreeClResult,
    FreeWord, FreeWordError,
};
pub use object::{GroupElement, GroupHom, GroupObject, HomData, ObjectError};
