//! Finitely generated abelian groups, symbolic direct sums of classified
//! atoms, and the finite-ordinal fragment of divisibility theory.

mod des;
mod fgab;
mod ordinal;
mod subgroup;
mod symbolic;

pub use des::{
    des_tuples, divisibility_witness_tree, p_divisible_thread_check, DesTuple, ThreadCheckError,
    ThreadCheckReport, WitnessError, WitnessTree,
};
pub use fgab::{
    ext_group, hom_group, is_prime, multiples_subgroup, p_chain, p_length, p_valuation, AbElement,
    AbGroupError, FgAbGroup, MultiplesSubgroup, PChain, PChainTerm, MAX_ENUMERATION,
};
pub use ordinal::Ordinal;
pub use subgroup::{map_kernel_cokernel, subgroup_presentation, SubgroupPresentation};
pub use symbolic::{
    divisible_reduced_split, is_cotorsion, multiples_subgroup_symbolic, p_chain_symbolic,
    p_length_symbolic, ulm_chain, Atom, CotorsionCertificate, CotorsionVerdict, SymbolicAbGroup,
    UlmChain,
};
