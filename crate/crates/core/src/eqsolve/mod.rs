//! Row-finite equation systems over abelian groups and the lift/recursion
//! engine for quotients of windowed limits.

mod recursion;
mod system;

pub use recursion::{
    lift_vanishing_below, theorem33_recursion, GridChecks, LiftOracle, PaddingOracle,
    RecursionError, RecursionGrid, VanishingLift,
};
pub use system::{
    divisibility_system_global, is_unitriangular, solve_truncated, CoeffMatrix, EqError,
    EquationSystem, FactorialCertificate, GlobalVerdict, RhsSeq, RhsTail, SystemGroup,
    WindowSolution,
};
