use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{cokernel_structure, IntMatrix};

use super::ordinal::Ordinal;

/// Enumeration guard: groups larger than this are treated as "too big to
/// list" rather than looping for hours.
pub const MAX_ENUMERATION: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbGroupError {
    #[error("invariant factors must be >= 2 and form a divisibility chain, got {0:?}")]
    BadInvariantFactors(Vec<BigInt>),
    #[error("coordinate vector has length {got}, group has {want} generators")]
    BadCoordinateLength { want: usize, got: usize },
    #[error("element belongs to a different group")]
    OwnerMismatch,
    #[error("group is infinite or too large to enumerate")]
    NotEnumerable,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invariant factor {0} has a prime factor beyond the supported range")]
    FactorTooLarge(BigInt),
}

/// Finitely generated abelian group in invariant-factor canonical form:
/// `Z/d_1 + ... + Z/d_k + Z^rank` with `d_i >= 2` and `d_i | d_{i+1}`.
///
/// Canonical form is unique, so structural equality is isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "FgAbGroupWire", into = "FgAbGroupWire")]
pub struct FgAbGroup {
    invariant_factors: Vec<BigInt>,
    free_rank: usize,
}

#[derive(Serialize, Deserialize)]
struct FgAbGroupWire {
    #[serde(with = "crate::bigjson::vec", default)]
    factors: Vec<BigInt>,
    #[serde(default)]
    rank: usize,
}

impl TryFrom<FgAbGroupWire> for FgAbGroup {
    type Error = AbGroupError;
    fn try_from(w: FgAbGroupWire) -> Result<Self, Self::Error> {
        FgAbGroup::new(w.factors, w.rank)
    }
}

impl From<FgAbGroup> for FgAbGroupWire {
    fn from(g: FgAbGroup) -> Self {
        FgAbGroupWire { factors: g.invariant_factors, rank: g.free_rank }
    }
}

impl FgAbGroup {
    pub fn new(invariant_factors: Vec<BigInt>, free_rank: usize) -> Result<Self, AbGroupError> {
        let two = BigInt::from(2);
        for (i, d) in invariant_factors.iter().enumerate() {
            if *d < two {
                return Err(AbGroupError::BadInvariantFactors(invariant_factors.clone()));
            }
            if i + 1 < invariant_factors.len()
                && !(&invariant_factors[i + 1] % d).is_zero()
            {
                return Err(AbGroupError::BadInvariantFactors(invariant_factors.clone()));
            }
        }
        Ok(FgAbGroup { invariant_factors, free_rank })
    }

    pub fn trivial() -> Self {
        FgAbGroup { invariant_factors: vec![], free_rank: 0 }
    }

    pub fn free(rank: usize) -> Self {
        FgAbGroup { invariant_factors: vec![], free_rank: rank }
    }

    pub fn cyclic(n: u64) -> Self {
        if n <= 1 {
            Self::trivial()
        } else {
            FgAbGroup { invariant_factors: vec![BigInt::from(n)], free_rank: 0 }
        }
    }

    /// Canonicalize an arbitrary direct sum of cyclic groups; orders of 1 are
    /// dropped, the rest are reorganized into a divisibility chain via the
    /// Smith normal form of the diagonal relation matrix.
    pub fn from_cyclic_orders(orders: impl IntoIterator<Item = BigInt>, free_rank: usize) -> Self {
        let orders: Vec<BigInt> = orders.into_iter().filter(|o| !o.is_one()).collect();
        assert!(orders.iter().all(|o| o.is_positive()), "cyclic orders must be >= 1");
        let n = orders.len();
        let rel = IntMatrix::diagonal(n, n, &orders);
        let coker = cokernel_structure(&rel);
        debug_assert_eq!(coker.free_rank, 0);
        FgAbGroup { invariant_factors: coker.invariant_factors, free_rank }
    }

    /// Direct sum, recanonicalized.
    pub fn direct_sum(&self, other: &FgAbGroup) -> FgAbGroup {
        let orders = self.invariant_factors.iter().chain(&other.invariant_factors).cloned();
        FgAbGroup::from_cyclic_orders(orders, self.free_rank + other.free_rank)
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion_len(&self) -> usize {
        self.invariant_factors.len()
    }

    /// Number of coordinates of an element: torsion then free.
    pub fn dims(&self) -> usize {
        self.invariant_factors.len() + self.free_rank
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty() && self.free_rank == 0
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn order(&self) -> Option<BigInt> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.invariant_factors.iter().product::<BigInt>().max(BigInt::one()))
    }

    /// Least `n >= 1` with `nA = 0`, when one exists.
    pub fn exponent(&self) -> Option<BigInt> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.invariant_factors.last().cloned().unwrap_or_else(BigInt::one))
    }

    pub fn zero(&self) -> AbElement {
        AbElement { group: self.clone(), coords: vec![BigInt::zero(); self.dims()] }
    }

    pub fn generator(&self, i: usize) -> AbElement {
        assert!(i < self.dims(), "generator index out of range");
        let mut coords = vec![BigInt::zero(); self.dims()];
        coords[i] = BigInt::one();
        self.element(coords).expect("generator coords are valid")
    }

    /// Build an element, reducing torsion coordinates into canonical range.
    pub fn element(&self, coords: Vec<BigInt>) -> Result<AbElement, AbGroupError> {
        if coords.len() != self.dims() {
            return Err(AbGroupError::BadCoordinateLength { want: self.dims(), got: coords.len() });
        }
        let mut el = AbElement { group: self.clone(), coords };
        el.reduce();
        Ok(el)
    }

    pub fn element_from_i64(&self, coords: &[i64]) -> Result<AbElement, AbGroupError> {
        self.element(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// All elements in mixed-radix order (last coordinate fastest); `None`
    /// when infinite or past the enumeration guard.
    pub fn elements(&self) -> Option<Vec<AbElement>> {
        let order = self.order()?;
        let order = order.to_u64()?;
        if order > MAX_ENUMERATION {
            return None;
        }
        let mut out = Vec::with_capacity(order as usize);
        for idx in 0..order as usize {
            out.push(self.element_at(idx).expect("index in range"));
        }
        Some(out)
    }

    /// Mixed-radix rank of an element among `elements()`.
    pub fn index_of(&self, el: &AbElement) -> Option<usize> {
        if el.group != *self || self.free_rank > 0 {
            return None;
        }
        let mut idx: usize = 0;
        for (d, c) in self.invariant_factors.iter().zip(&el.coords) {
            let d = d.to_usize()?;
            let c = c.to_usize()?;
            idx = idx.checked_mul(d)?.checked_add(c)?;
        }
        Some(idx)
    }

    pub fn element_at(&self, mut idx: usize) -> Option<AbElement> {
        if self.free_rank > 0 {
            return None;
        }
        let mut coords = vec![BigInt::zero(); self.dims()];
        for (i, d) in self.invariant_factors.iter().enumerate().rev() {
            let d = d.to_usize()?;
            coords[i] = BigInt::from(idx % d);
            idx /= d;
        }
        if idx != 0 {
            return None;
        }
        Some(AbElement { group: self.clone(), coords })
    }

    /// True when `el` is an n-th multiple, i.e. `el` lies in `nA`.
    pub fn is_multiple(&self, el: &AbElement, n: &BigInt) -> bool {
        assert_eq!(el.group, *self, "element of a different group");
        if n.is_zero() {
            return el.is_zero();
        }
        for (i, c) in el.coords.iter().enumerate() {
            if i < self.torsion_len() {
                let d = &self.invariant_factors[i];
                let g = n.gcd(d);
                if !(c % &g).is_zero() {
                    return false;
                }
            } else if !(c % n).is_zero() {
                return false;
            }
        }
        true
    }

    /// True when `el` lies in `p^k A`.
    pub fn in_p_power_subgroup(&self, el: &AbElement, p: u64, k: u64) -> bool {
        let pk = BigInt::from(p).pow(k.min(128) as u32).max(BigInt::one());
        // beyond the exponent's p-valuation the subgroup is constant, so a
        // capped power is enough for membership
        self.is_multiple(el, &pk)
    }
}

impl std::fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut first = true;
        for d in &self.invariant_factors {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "Z/{d}")?;
            first = false;
        }
        if self.free_rank == 1 {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "Z")?;
        } else if self.free_rank > 1 {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "Z^{}", self.free_rank)?;
        }
        Ok(())
    }
}

/// Element of an [`FgAbGroup`]; torsion coordinates are kept reduced into
/// `0 <= c_i < d_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbElement {
    group: FgAbGroup,
    coords: Vec<BigInt>,
}

impl AbElement {
    fn reduce(&mut self) {
        for (i, d) in self.group.invariant_factors.iter().enumerate() {
            self.coords[i] = self.coords[i].mod_floor(d);
        }
    }

    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &AbElement) -> AbElement {
        assert_eq!(self.group, other.group, "elements of different groups");
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        let mut out = AbElement { group: self.group.clone(), coords };
        out.reduce();
        out
    }

    pub fn neg(&self) -> AbElement {
        let coords = self.coords.iter().map(|a| -a).collect();
        let mut out = AbElement { group: self.group.clone(), coords };
        out.reduce();
        out
    }

    pub fn sub(&self, other: &AbElement) -> AbElement {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, k: &BigInt) -> AbElement {
        let coords = self.coords.iter().map(|a| a * k).collect();
        let mut out = AbElement { group: self.group.clone(), coords };
        out.reduce();
        out
    }
}

/// `Hom(A, B)` in canonical form, assembled additively from
/// `Hom(Z, B) = B` and `Hom(Z/m, B) = B[m]` (the m-torsion subgroup).
pub fn hom_group(a: &FgAbGroup, b: &FgAbGroup) -> FgAbGroup {
    let mut orders: Vec<BigInt> = Vec::new();
    for _ in 0..a.free_rank {
        orders.extend(b.invariant_factors.iter().cloned());
    }
    for m in &a.invariant_factors {
        for d in &b.invariant_factors {
            orders.push(m.gcd(d));
        }
        // Hom(Z/m, Z^r) = 0: torsion has nowhere to go in a free group
    }
    FgAbGroup::from_cyclic_orders(orders, a.free_rank * b.free_rank)
}

/// `Ext(A, B)` in canonical form, assembled additively from
/// `Ext(Z, B) = 0` and `Ext(Z/m, B) = B/mB`.
pub fn ext_group(a: &FgAbGroup, b: &FgAbGroup) -> FgAbGroup {
    let mut orders: Vec<BigInt> = Vec::new();
    for m in &a.invariant_factors {
        for d in &b.invariant_factors {
            orders.push(m.gcd(d));
        }
        for _ in 0..b.free_rank {
            orders.push(m.clone());
        }
    }
    FgAbGroup::from_cyclic_orders(orders, 0)
}

/// The subgroup `nA` embedded in `A`, plus the quotient `A/nA`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplesSubgroup {
    /// `n * e_i` for each canonical generator, zero images dropped
    pub generators: Vec<AbElement>,
    /// abstract isomorphism type of `nA`
    pub subgroup: FgAbGroup,
    /// canonical form of `A/nA`
    pub quotient: FgAbGroup,
}

pub fn multiples_subgroup(a: &FgAbGroup, n: &BigInt) -> MultiplesSubgroup {
    assert!(!n.is_negative(), "n must be >= 0");
    if n.is_zero() {
        return MultiplesSubgroup {
            generators: vec![],
            subgroup: FgAbGroup::trivial(),
            quotient: a.clone(),
        };
    }
    let mut generators = Vec::new();
    for i in 0..a.dims() {
        let g = a.generator(i).scalar_mul(n);
        if !g.is_zero() || (i >= a.torsion_len()) {
            generators.push(g);
        }
    }
    let sub_orders: Vec<BigInt> =
        a.invariant_factors.iter().map(|d| d / n.gcd(d)).collect();
    let quot_orders: Vec<BigInt> = a.invariant_factors.iter().map(|d| n.gcd(d)).collect();
    let mut quot = FgAbGroup::from_cyclic_orders(quot_orders, 0);
    // each free generator contributes Z/n to the quotient
    for _ in 0..a.free_rank {
        quot = quot.direct_sum(&FgAbGroup::from_cyclic_orders([n.clone()], 0));
    }
    MultiplesSubgroup {
        generators,
        subgroup: FgAbGroup::from_cyclic_orders(sub_orders, a.free_rank),
        quotient: quot,
    }
}

/// One term of the chain `A ⊇ pA ⊇ p²A ⊇ ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PChainTerm {
    pub group: FgAbGroup,
    pub order: Option<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PChain {
    pub terms: Vec<PChainTerm>,
    /// first k <= depth with `p^{k+1}A = p^k A` as subgroups
    pub stabilized_at: Option<usize>,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// p-adic valuation of a positive integer.
pub fn p_valuation(d: &BigInt, p: u64) -> u64 {
    let p = BigInt::from(p);
    let mut d = d.clone();
    let mut v = 0;
    while !d.is_zero() && (&d % &p).is_zero() {
        d /= &p;
        v += 1;
    }
    v
}

pub fn p_chain(a: &FgAbGroup, p: u64, depth: u64) -> Result<PChain, AbGroupError> {
    if !is_prime(p) {
        return Err(AbGroupError::NotPrime(p));
    }
    let max_v = a.invariant_factors.iter().map(|d| p_valuation(d, p)).max().unwrap_or(0);
    let bigp = BigInt::from(p);
    let mut terms = Vec::with_capacity(depth as usize + 1);
    for k in 0..=depth {
        let pk = bigp.pow(k.min(max_v.max(1) * 2 + 64) as u32);
        let orders: Vec<BigInt> = a.invariant_factors.iter().map(|d| d / pk.gcd(d)).collect();
        let group = FgAbGroup::from_cyclic_orders(orders, a.free_rank);
        let order = group.order();
        terms.push(PChainTerm { group, order });
    }
    let stabilized_at = if a.free_rank == 0 && max_v <= depth { Some(max_v as usize) } else { None };
    Ok(PChain { terms, stabilized_at })
}

/// Stabilization ordinal of the chain `p^λ A`: the largest torsion
/// p-exponent, or ω as soon as there is free rank.
pub fn p_length(a: &FgAbGroup, p: u64) -> Result<Ordinal, AbGroupError> {
    if !is_prime(p) {
        return Err(AbGroupError::NotPrime(p));
    }
    if a.free_rank > 0 {
        return Ok(Ordinal::OMEGA);
    }
    let max_v = a.invariant_factors.iter().map(|d| p_valuation(d, p)).max().unwrap_or(0);
    Ok(Ordinal::finite(max_v))
}
