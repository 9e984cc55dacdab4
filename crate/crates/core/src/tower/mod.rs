//! Towers of groups: explicit prefixes with tail rules, image stabilization,
//! derived subtowers, windowed limits, and the abelian boundary map.

mod limits;
mod ml;
#[allow(clippy::module_inception)]
mod tower;

pub use limits::{
    lim1_classify, lim1_window_equivalence, lim1_window_surjectivity, six_term_window_check,
    windowed_lim, EquivalenceWitness, Lim1Class, Lim1SurjReport, SampleBudget, SesTowers,
    SixTermError, SixTermReport, WindowedLim,
};
pub use ml::{
    commutator_image_identity, commutator_tower, derived_subtower, image_stabilization,
    ml_certificate, DerivedLevel, DerivedTower, ImageDesc, MlCertificate, MlReport, MlVerdict,
};
pub use tower::{HomSpec, MultiplierRule, TailRule, Thread, Tower, TowerError};
