use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::fgab::{is_prime, p_valuation, AbGroupError, FgAbGroup};
use super::ordinal::Ordinal;

/// Classified building blocks for symbolic abelian groups.
///
/// `PadicModule(p)` is deliberately opaque: a single reduced cotorsion atom
/// with `∩_n nM = 0`; no module structure theory beyond that is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Atom {
    /// the integers
    Int,
    /// the rationals
    Rat,
    /// Z/p^k
    Cyclic { p: u64, k: u32 },
    /// the Prüfer p-group Z(p^∞)
    Pruefer { p: u64 },
    /// the additive group of p-adic integers
    #[serde(rename = "padic")]
    PadicModule { p: u64 },
}

impl Atom {
    pub fn validate(&self) -> Result<(), AbGroupError> {
        match *self {
            Atom::Cyclic { p, k } => {
                if !is_prime(p) || k == 0 {
                    return Err(AbGroupError::NotPrime(p));
                }
            }
            Atom::Pruefer { p } | Atom::PadicModule { p } => {
                if !is_prime(p) {
                    return Err(AbGroupError::NotPrime(p));
                }
            }
            Atom::Int | Atom::Rat => {}
        }
        Ok(())
    }

    pub fn is_divisible(&self) -> bool {
        matches!(self, Atom::Rat | Atom::Pruefer { .. })
    }

    /// Cotorsion fact table. `Int` is the only non-cotorsion atom here:
    /// divisible groups and finite groups are cotorsion, and so is the
    /// additive group of p-adic integers.
    pub fn is_cotorsion(&self) -> bool {
        !matches!(self, Atom::Int)
    }

    fn p_length(&self, p: u64) -> Ordinal {
        match *self {
            Atom::Rat | Atom::Pruefer { .. } => Ordinal::ZERO,
            Atom::Int => Ordinal::OMEGA,
            Atom::Cyclic { p: q, k } => {
                if q == p {
                    Ordinal::finite(k as u64)
                } else {
                    Ordinal::ZERO
                }
            }
            Atom::PadicModule { p: q } => {
                if q == p {
                    Ordinal::OMEGA
                } else {
                    Ordinal::ZERO
                }
            }
        }
    }

    /// Image of the atom under multiplication by p, as an abstract atom;
    /// `None` means the atom dies (only for `Cyclic` with exhausted power).
    fn p_multiple(&self, p: u64) -> Option<Atom> {
        match *self {
            Atom::Cyclic { p: q, k } if q == p => {
                if k > 1 {
                    Some(Atom::Cyclic { p: q, k: k - 1 })
                } else {
                    None
                }
            }
            other => Some(other),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Atom::Int => write!(f, "Z"),
            Atom::Rat => write!(f, "Q"),
            Atom::Cyclic { p, k } => write!(f, "Z/{}", BigInt::from(p).pow(k)),
            Atom::Pruefer { p } => write!(f, "Z({p}^inf)"),
            Atom::PadicModule { p } => write!(f, "Z_{p}"),
        }
    }
}

/// Finite direct sum of classified atoms, kept sorted as a multiset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SymbolicWire", into = "SymbolicWire")]
pub struct SymbolicAbGroup {
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct SymbolicWire {
    atoms: Vec<Atom>,
}

impl TryFrom<SymbolicWire> for SymbolicAbGroup {
    type Error = AbGroupError;
    fn try_from(w: SymbolicWire) -> Result<Self, Self::Error> {
        SymbolicAbGroup::new(w.atoms)
    }
}

impl From<SymbolicAbGroup> for SymbolicWire {
    fn from(g: SymbolicAbGroup) -> Self {
        SymbolicWire { atoms: g.atoms }
    }
}

impl SymbolicAbGroup {
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self, AbGroupError> {
        for a in &atoms {
            a.validate()?;
        }
        atoms.sort();
        Ok(SymbolicAbGroup { atoms })
    }

    pub fn trivial() -> Self {
        SymbolicAbGroup { atoms: vec![] }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn direct_sum(&self, other: &SymbolicAbGroup) -> SymbolicAbGroup {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        atoms.sort();
        SymbolicAbGroup { atoms }
    }

    pub fn is_divisible(&self) -> bool {
        self.atoms.iter().all(Atom::is_divisible)
    }

    /// Symbolic image of a finitely generated group: invariant factors split
    /// into prime-power cyclics, free rank into `Int` atoms.
    pub fn from_fgab(g: &FgAbGroup) -> Result<Self, AbGroupError> {
        let mut atoms = Vec::new();
        for _ in 0..g.free_rank() {
            atoms.push(Atom::Int);
        }
        for d in g.invariant_factors() {
            let mut rest = d.clone();
            let mut p = BigInt::from(2u64);
            while &p * &p <= rest {
                if (&rest % &p).is_zero() {
                    let mut k = 0u32;
                    while (&rest % &p).is_zero() {
                        rest /= &p;
                        k += 1;
                    }
                    let p64 = p.to_u64().ok_or_else(|| AbGroupError::FactorTooLarge(d.clone()))?;
                    atoms.push(Atom::Cyclic { p: p64, k });
                }
                p += 1u64;
            }
            if rest > BigInt::one() {
                // the remaining cofactor is prime (to the first power)
                let q = rest.to_u64().ok_or_else(|| AbGroupError::FactorTooLarge(d.clone()))?;
                atoms.push(Atom::Cyclic { p: q, k: 1 });
            }
        }
        SymbolicAbGroup::new(atoms)
    }
}

impl fmt::Display for SymbolicAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "0");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// `A = D ⊕ R` with `D` the divisible atoms and `R` reduced.
pub fn divisible_reduced_split(a: &SymbolicAbGroup) -> (SymbolicAbGroup, SymbolicAbGroup) {
    let (div, red): (Vec<Atom>, Vec<Atom>) =
        a.atoms.iter().partition(|atom| atom.is_divisible());
    (SymbolicAbGroup { atoms: div }, SymbolicAbGroup { atoms: red })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CotorsionCertificate {
    /// every atom is cotorsion and finite direct sums of cotorsion groups
    /// are cotorsion
    ClosureUnderFiniteSums { atoms: Vec<Atom> },
    /// a single violating atom is enough
    ViolatingAtom(Atom),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CotorsionVerdict {
    pub cotorsion: bool,
    pub certificate: CotorsionCertificate,
}

pub fn is_cotorsion(a: &SymbolicAbGroup) -> CotorsionVerdict {
    match a.atoms.iter().find(|atom| !atom.is_cotorsion()) {
        Some(bad) => CotorsionVerdict {
            cotorsion: false,
            certificate: CotorsionCertificate::ViolatingAtom(*bad),
        },
        None => CotorsionVerdict {
            cotorsion: true,
            certificate: CotorsionCertificate::ClosureUnderFiniteSums { atoms: a.atoms.clone() },
        },
    }
}

/// Symbolic `nA` for `n >= 1`; every atom survives as an abstract group
/// except exhausted cyclic p-powers.
pub fn multiples_subgroup_symbolic(a: &SymbolicAbGroup, n: &BigInt) -> SymbolicAbGroup {
    assert!(n >= &BigInt::one(), "n must be >= 1 for the symbolic variant");
    let mut atoms = Vec::new();
    for atom in &a.atoms {
        match *atom {
            Atom::Cyclic { p, k } => {
                let v = p_valuation(n, p).min(k as u64) as u32;
                if v < k {
                    atoms.push(Atom::Cyclic { p, k: k - v });
                }
            }
            other => atoms.push(other),
        }
    }
    SymbolicAbGroup::new(atoms).expect("atoms stay valid")
}

pub fn p_chain_symbolic(
    a: &SymbolicAbGroup,
    p: u64,
    depth: u64,
) -> Result<(Vec<SymbolicAbGroup>, Option<usize>), AbGroupError> {
    if !is_prime(p) {
        return Err(AbGroupError::NotPrime(p));
    }
    let mut terms = vec![a.clone()];
    for _ in 0..depth {
        let prev = terms.last().unwrap();
        let atoms: Vec<Atom> =
            prev.atoms.iter().filter_map(|atom| atom.p_multiple(p)).collect();
        terms.push(SymbolicAbGroup::new(atoms)?);
    }
    // the chain stabilizes at the p-length when that is finite
    let lp = p_length_symbolic(a, p)?;
    let stabilized_at =
        if lp.is_finite() && lp.finite <= depth { Some(lp.finite as usize) } else { None };
    Ok((terms, stabilized_at))
}

pub fn p_length_symbolic(a: &SymbolicAbGroup, p: u64) -> Result<Ordinal, AbGroupError> {
    if !is_prime(p) {
        return Err(AbGroupError::NotPrime(p));
    }
    Ok(a.atoms.iter().map(|atom| atom.p_length(p)).max().unwrap_or(Ordinal::ZERO))
}

/// The Ulm chain `A ⊇ A¹ ⊇ ...` where `A^{λ+1} = ∩_n n A^λ`, computed
/// atom-wise: divisible atoms are fixed, everything else has `A¹ = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UlmChain {
    pub terms: Vec<SymbolicAbGroup>,
    pub ulm_length: Ordinal,
    /// the largest divisible subgroup, i.e. the final stable term
    pub divisible_part: SymbolicAbGroup,
}

pub fn ulm_chain(a: &SymbolicAbGroup, depth: u64) -> UlmChain {
    let (divisible, _) = divisible_reduced_split(a);
    let mut terms = vec![a.clone()];
    for _ in 0..depth {
        terms.push(divisible.clone());
    }
    let ulm_length =
        if a.is_divisible() { Ordinal::ZERO } else { Ordinal::finite(1) };
    UlmChain { terms, ulm_length, divisible_part: divisible }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(atoms: &[Atom]) -> SymbolicAbGroup {
        SymbolicAbGroup::new(atoms.to_vec()).unwrap()
    }

    #[test]
    fn atom_validation() {
        assert!(SymbolicAbGroup::new(vec![Atom::Cyclic { p: 4, k: 1 }]).is_err());
        assert!(SymbolicAbGroup::new(vec![Atom::Pruefer { p: 9 }]).is_err());
        assert!(SymbolicAbGroup::new(vec![Atom::Cyclic { p: 2, k: 0 }]).is_err());
        assert!(SymbolicAbGroup::new(vec![Atom::Cyclic { p: 2, k: 3 }]).is_ok());
    }

    #[test]
    fn split_examples() {
        let a = sym(&[Atom::Rat, Atom::Cyclic { p: 2, k: 2 }]);
        let (d, r) = divisible_reduced_split(&a);
        assert_eq!(d, sym(&[Atom::Rat]));
        assert_eq!(r, sym(&[Atom::Cyclic { p: 2, k: 2 }]));

        let b = sym(&[Atom::Pruefer { p: 3 }, Atom::PadicModule { p: 5 }]);
        let (d, r) = divisible_reduced_split(&b);
        assert_eq!(d, sym(&[Atom::Pruefer { p: 3 }]));
        assert_eq!(r, sym(&[Atom::PadicModule { p: 5 }]));

        let (d, r) = divisible_reduced_split(&SymbolicAbGroup::trivial());
        assert!(d.is_trivial() && r.is_trivial());
    }

    #[test]
    fn cotorsion_fact_table() {
        let z = sym(&[Atom::Int]);
        let v = is_cotorsion(&z);
        assert!(!v.cotorsion);
        assert_eq!(v.certificate, CotorsionCertificate::ViolatingAtom(Atom::Int));

        let good = sym(&[Atom::Cyclic { p: 2, k: 3 }, Atom::Pruefer { p: 2 }]);
        assert!(is_cotorsion(&good).cotorsion);
        assert!(is_cotorsion(&SymbolicAbGroup::trivial()).cotorsion);
        assert!(is_cotorsion(&sym(&[Atom::Rat])).cotorsion);
        assert!(is_cotorsion(&sym(&[Atom::PadicModule { p: 7 }])).cotorsion);
    }

    #[test]
    fn cotorsion_respects_direct_sums() {
        let parts = [
            sym(&[Atom::Int]),
            sym(&[Atom::Rat]),
            sym(&[Atom::Cyclic { p: 3, k: 1 }]),
            sym(&[Atom::Pruefer { p: 2 }]),
        ];
        for a in &parts {
            for b in &parts {
                let sum = a.direct_sum(b);
                assert_eq!(
                    is_cotorsion(&sum).cotorsion,
                    is_cotorsion(a).cotorsion && is_cotorsion(b).cotorsion
                );
            }
        }
    }

    #[test]
    fn p_length_atoms() {
        assert_eq!(p_length_symbolic(&sym(&[Atom::Rat]), 2).unwrap(), Ordinal::ZERO);
        assert_eq!(p_length_symbolic(&sym(&[Atom::Int]), 3).unwrap(), Ordinal::OMEGA);
        assert_eq!(
            p_length_symbolic(&sym(&[Atom::Cyclic { p: 2, k: 3 }]), 2).unwrap(),
            Ordinal::finite(3)
        );
        assert_eq!(
            p_length_symbolic(&sym(&[Atom::Cyclic { p: 3, k: 2 }]), 2).unwrap(),
            Ordinal::ZERO
        );
        assert_eq!(
            p_length_symbolic(&sym(&[Atom::PadicModule { p: 2 }]), 2).unwrap(),
            Ordinal::OMEGA
        );
        assert_eq!(
            p_length_symbolic(&sym(&[Atom::PadicModule { p: 3 }]), 2).unwrap(),
            Ordinal::ZERO
        );
    }

    #[test]
    fn p_chain_of_rationals_is_constant() {
        let q = sym(&[Atom::Rat]);
        let (terms, stab) = p_chain_symbolic(&q, 5, 4).unwrap();
        assert!(terms.iter().all(|t| *t == q));
        assert_eq!(stab, Some(0));
    }

    #[test]
    fn ulm_examples() {
        // Q + Z: first Ulm subgroup is Q, length 1
        let a = sym(&[Atom::Rat, Atom::Int]);
        let u = ulm_chain(&a, 3);
        assert_eq!(u.terms[1], sym(&[Atom::Rat]));
        assert_eq!(u.ulm_length, Ordinal::finite(1));
        assert_eq!(u.divisible_part, sym(&[Atom::Rat]));

        let t = ulm_chain(&SymbolicAbGroup::trivial(), 2);
        assert_eq!(t.ulm_length, Ordinal::ZERO);

        // Z/12: ∩_n n(Z/12) ⊆ 12(Z/12) = 0
        let c = SymbolicAbGroup::from_fgab(&FgAbGroup::cyclic(12)).unwrap();
        let u = ulm_chain(&c, 2);
        assert!(u.terms[1].is_trivial());
        assert_eq!(u.ulm_length, Ordinal::finite(1));
    }

    #[test]
    fn from_fgab_factorizes() {
        let g = FgAbGroup::new(vec![BigInt::from(2), BigInt::from(12)], 1).unwrap();
        let s = SymbolicAbGroup::from_fgab(&g).unwrap();
        assert_eq!(
            s,
            sym(&[
                Atom::Int,
                Atom::Cyclic { p: 2, k: 1 },
                Atom::Cyclic { p: 2, k: 2 },
                Atom::Cyclic { p: 3, k: 1 },
            ])
        );
    }

    #[test]
    fn symbolic_multiples() {
        let a = sym(&[Atom::Rat, Atom::Cyclic { p: 2, k: 3 }, Atom::Int]);
        // divisible atom survives any n
        let m = multiples_subgroup_symbolic(&a, &BigInt::from(4));
        assert_eq!(m, sym(&[Atom::Rat, Atom::Cyclic { p: 2, k: 1 }, Atom::Int]));
        let m8 = multiples_subgroup_symbolic(&a, &BigInt::from(8));
        assert_eq!(m8, sym(&[Atom::Rat, Atom::Int]));
        // pure divisible group: subgroup = whole group
        let q = sym(&[Atom::Rat]);
        assert_eq!(multiples_subgroup_symbolic(&q, &BigInt::from(17)), q);
    }

    #[test]
    fn atom_wire_format() {
        let a = sym(&[Atom::Pruefer { p: 2 }, Atom::Cyclic { p: 3, k: 2 }]);
        let s = serde_json::to_string(&a).unwrap();
        let back: SymbolicAbGroup = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        let manual: SymbolicAbGroup = serde_json::from_str(
            r#"{"atoms":[{"kind":"pruefer","p":2},{"kind":"cyclic","p":3,"k":2}]}"#,
        )
        .unwrap();
        assert_eq!(manual, a);
    }
}
