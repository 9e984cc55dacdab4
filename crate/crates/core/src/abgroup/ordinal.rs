use std::fmt;

use serde::{Deserialize, Serialize};

/// Ordinals of the form `ω·a + b` with natural `a`, `b`.
///
/// This range covers every stabilization ordinal the supported group classes
/// can produce. Anything beyond it is a hard error at the call site, never a
/// silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ordinal {
    /// coefficient of ω
    pub omegas: u64,
    /// finite tail
    pub finite: u64,
}

impl Ordinal {
    pub const ZERO: Ordinal = Ordinal { omegas: 0, finite: 0 };
    pub const OMEGA: Ordinal = Ordinal { omegas: 1, finite: 0 };

    pub fn finite(b: u64) -> Self {
        Ordinal { omegas: 0, finite: b }
    }

    pub fn is_finite(&self) -> bool {
        self.omegas == 0
    }

    /// Successor ordinal.
    pub fn succ(&self) -> Self {
        Ordinal { omegas: self.omegas, finite: self.finite + 1 }
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.omegas, self.finite) {
            (0, b) => write!(f, "{b}"),
            (1, 0) => write!(f, "w"),
            (1, b) => write!(f, "w+{b}"),
            (a, 0) => write!(f, "w*{a}"),
            (a, b) => write!(f, "w*{a}+{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_lexicographic() {
        assert!(Ordinal::finite(1000) < Ordinal::OMEGA);
        assert!(Ordinal::OMEGA < Ordinal::OMEGA.succ());
        assert!(Ordinal::OMEGA.succ() < Ordinal { omegas: 2, finite: 0 });
        assert_eq!(Ordinal::ZERO, Ordinal::finite(0));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Ordinal::finite(3).to_string(), "3");
        assert_eq!(Ordinal::OMEGA.to_string(), "w");
        assert_eq!(Ordinal::OMEGA.succ().to_string(), "w+1");
        assert_eq!(Ordinal { omegas: 2, finite: 5 }.to_string(), "w*2+5");
    }
}
