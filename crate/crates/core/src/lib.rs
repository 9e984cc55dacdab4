//! Exact computational algebra for towers of groups.
//!
//! The crate is organized around six subsystems:
//!
//! * [`linalg`] — arbitrary-precision integer matrices, Smith normal form,
//!   linear diophantine solving and cokernel structure.
//! * [`abgroup`] — finitely generated abelian groups in invariant-factor
//!   canonical form, Hom/Ext, symbolic direct sums of classified atoms,
//!   cotorsion and divisibility queries, p-chains and Ulm chains.
//! * [`group`] — finite groups given by Cayley tables, free groups as
//!   reduced words, products, homomorphisms, commutator calculus and
//!   abelianization.
//! * [`tower`] — towers of groups with tail rules, image stabilization,
//!   derived subtowers, windowed limits and the abelian boundary map.
//! * [`eqsolve`] — row-finite equation systems over abelian groups and the
//!   lift/recursion engine for quotients of windowed limits.
//! * [`kernel`] — the comparison map from the abelianization of a product
//!   to the product of abelianizations, kernel presentations, and
//!   commutator-length witness families.
//!
//! All computations are exact; no floating point is used anywhere.

pub mod abgroup;
pub(crate) mod bigjson;
pub mod eqsolve;
pub mod group;
pub mod kernel;
pub mod linalg;
pub mod tower;
