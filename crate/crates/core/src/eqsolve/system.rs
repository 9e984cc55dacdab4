use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{is_cotorsion, AbElement, AbGroupError, FgAbGroup, SymbolicAbGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EqError {
    #[error("row {0} of the coefficient matrix is not available")]
    RowUnavailable(usize),
    #[error("system is not unitriangular at row {0}")]
    NotUnitriangular(usize),
    #[error("unsupported group for this solver: {0}")]
    UnsupportedGroup(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Group(#[from] AbGroupError),
}

/// Row-finite integer coefficient matrix, generated on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoeffMatrix {
    /// row n reads `x_n - (n+1) x_{n+1} = a_n`
    Divisibility,
    /// sparse explicit rows `(column, coefficient)`; rows beyond the list
    /// are unavailable
    Explicit { rows: Vec<Vec<(usize, BigInt)>> },
}

impl CoeffMatrix {
    pub fn row(&self, n: usize) -> Result<Vec<(usize, BigInt)>, EqError> {
        match self {
            CoeffMatrix::Divisibility => {
                Ok(vec![(n, BigInt::one()), (n + 1, -BigInt::from(n as u64 + 1))])
            }
            CoeffMatrix::Explicit { rows } => {
                rows.get(n).cloned().ok_or(EqError::RowUnavailable(n))
            }
        }
    }

    pub fn entry(&self, n: usize, m: usize) -> Result<BigInt, EqError> {
        Ok(self
            .row(n)?
            .into_iter()
            .filter(|(col, _)| *col == m)
            .map(|(_, c)| c)
            .sum())
    }
}

/// How the right-hand side continues beyond its explicit values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsTail {
    Zero,
    RepeatLast,
    Cycle,
}

/// Window-materialized right-hand side sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhsSeq {
    values: Vec<AbElement>,
    tail: RhsTail,
    group: FgAbGroup,
}

impl RhsSeq {
    pub fn new(group: FgAbGroup, values: Vec<AbElement>, tail: RhsTail) -> Result<Self, EqError> {
        for v in &values {
            if v.group() != &group {
                return Err(EqError::BadInput("rhs value from a different group".into()));
            }
        }
        if values.is_empty() && tail != RhsTail::Zero {
            return Err(EqError::BadInput("empty rhs can only continue with zeros".into()));
        }
        Ok(RhsSeq { values, tail, group })
    }

    pub fn zero(group: FgAbGroup) -> Self {
        RhsSeq { values: vec![], tail: RhsTail::Zero, group }
    }

    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    pub fn at(&self, n: usize) -> AbElement {
        if n < self.values.len() {
            return self.values[n].clone();
        }
        match self.tail {
            RhsTail::Zero => self.group.zero(),
            RhsTail::RepeatLast => self.values.last().expect("nonempty").clone(),
            RhsTail::Cycle => self.values[n % self.values.len()].clone(),
        }
    }

    /// True when the sequence is zero from `from` onward.
    pub fn vanishes_from(&self, from: usize) -> bool {
        match self.tail {
            RhsTail::Zero => self.values.iter().skip(from).all(|v| v.is_zero()),
            RhsTail::RepeatLast => {
                self.values.iter().skip(from.min(self.values.len() - 1)).all(|v| v.is_zero())
            }
            RhsTail::Cycle => self.values.iter().all(|v| v.is_zero()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemGroup {
    FgAb(FgAbGroup),
    Symbolic(SymbolicAbGroup),
}

/// Row-finite equation system `Σ_m l_{n,m} x_m = a_n` over an abelian group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    pub coeff: CoeffMatrix,
    pub rhs: RhsSeq,
    pub group: SystemGroup,
}

impl EquationSystem {
    pub fn divisibility(group: FgAbGroup, rhs: RhsSeq) -> Result<Self, EqError> {
        if rhs.group() != &group {
            return Err(EqError::BadInput("rhs group mismatch".into()));
        }
        Ok(EquationSystem {
            coeff: CoeffMatrix::Divisibility,
            rhs,
            group: SystemGroup::FgAb(group),
        })
    }

    fn fgab_group(&self) -> Result<&FgAbGroup, EqError> {
        match &self.group {
            SystemGroup::FgAb(g) => Ok(g),
            SystemGroup::Symbolic(_) => Err(EqError::UnsupportedGroup(
                "symbolic groups do not support element-level solving".into(),
            )),
        }
    }
}

/// `l_{n,n} = 1` and `l_{n,m} = 0` for `m < n`, for every `n <= window`.
pub fn is_unitriangular(system: &EquationSystem, window: usize) -> Result<bool, EqError> {
    for n in 0..=window {
        let row = system.coeff.row(n)?;
        let mut diag = BigInt::zero();
        for (col, coeff) in &row {
            if *col < n && !coeff.is_zero() {
                return Ok(false);
            }
            if *col == n {
                diag += coeff;
            }
        }
        if !diag.is_one() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Window solution of a unitriangular system: tail variables are pinned to
/// zero and rows are solved from the bottom up. The first `window + 1`
/// equations are re-verified by substitution before returning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSolution {
    /// x_0 ..= x_window; all deeper variables are zero
    pub values: Vec<AbElement>,
}

pub fn solve_truncated(
    system: &EquationSystem,
    window: usize,
) -> Result<WindowSolution, EqError> {
    let group = system.fgab_group()?.clone();
    for n in 0..=window {
        if !is_unitriangular_row(system, n)? {
            return Err(EqError::NotUnitriangular(n));
        }
    }
    let mut values = vec![group.zero(); window + 1];
    for n in (0..=window).rev() {
        // x_n = a_n - Σ_{m > n} l_{n,m} x_m   (zero beyond the window)
        let mut x = system.rhs.at(n);
        for (col, coeff) in system.coeff.row(n)? {
            if col > n && col <= window {
                x = x.sub(&values[col].scalar_mul(&coeff));
            }
        }
        values[n] = x;
    }
    // independent substitution check
    for n in 0..=window {
        let mut acc = group.zero();
        for (col, coeff) in system.coeff.row(n)? {
            if col <= window {
                acc = acc.add(&values[col].scalar_mul(&coeff));
            }
        }
        if acc != system.rhs.at(n) {
            return Err(EqError::BadInput(format!("substitution check failed at row {n}")));
        }
    }
    Ok(WindowSolution { values })
}

fn is_unitriangular_row(system: &EquationSystem, n: usize) -> Result<bool, EqError> {
    let row = system.coeff.row(n)?;
    let mut diag = BigInt::zero();
    for (col, coeff) in &row {
        if *col < n && !coeff.is_zero() {
            return Ok(false);
        }
        if *col == n {
            diag += coeff;
        }
    }
    Ok(diag.is_one())
}

/// Certificate that the divisibility system over the integers has no
/// solution with `|x_0| <= bound`: any solution satisfies
/// `x_0 ≡ residue (mod modulus)` with `modulus = depth!`, and that class
/// misses the interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorialCertificate {
    pub depth: usize,
    #[serde(with = "crate::bigjson")]
    pub modulus: BigInt,
    #[serde(with = "crate::bigjson")]
    pub residue: BigInt,
}

impl FactorialCertificate {
    /// Re-derive the congruence from the right-hand side and confirm the
    /// excluded interval.
    pub fn verify(&self, rhs: &RhsSeq, bound: &BigInt) -> bool {
        let Some((modulus, residue)) = factorial_congruence(rhs, self.depth) else {
            return false;
        };
        if modulus != self.modulus || residue != self.residue {
            return false;
        }
        // no integer of absolute value <= bound is ≡ residue (mod modulus)
        &self.residue > bound && (&self.modulus - &self.residue) > *bound
    }
}

/// Any global solution of the divisibility system over Z satisfies
/// `x_0 = Σ_{k<N} k! a_k + N! x_N`, so `x_0` is pinned mod `N!`.
fn factorial_congruence(rhs: &RhsSeq, depth: usize) -> Option<(BigInt, BigInt)> {
    let mut modulus = BigInt::one();
    let mut residue = BigInt::zero();
    let mut factorial = BigInt::one();
    for k in 0..depth {
        let a = rhs.at(k);
        residue += &factorial * &a.coords()[0];
        factorial *= BigInt::from(k as u64 + 1);
    }
    modulus *= &factorial;
    Some((modulus.clone(), residue.mod_floor(&modulus)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GlobalVerdict {
    /// a global solution exists; the witness solves the window exactly
    Solved { x0: AbElement, window: Vec<AbElement> },
    /// no solution with |x_0| <= bound, certified by a factorial congruence
    NoSolutionBelow { bound: BigInt, certificate: FactorialCertificate },
    Unknown,
}

/// Global solvability of the divisibility system `x_n = a_n + (n+1)x_{n+1}`.
///
/// Finite groups always solve (and the cotorsion fact table is consulted as
/// a cross-check). Over the integers a finitely supported right-hand side
/// solves by back-substitution, while a non-vanishing one is scanned for a
/// factorial-modulus obstruction around the requested bound.
pub fn divisibility_system_global(
    group: &FgAbGroup,
    rhs: &RhsSeq,
    bound: &BigInt,
    depth: usize,
) -> Result<GlobalVerdict, EqError> {
    if rhs.group() != group {
        return Err(EqError::BadInput("rhs group mismatch".into()));
    }
    if group.free_rank() == 0 {
        // finite groups are cotorsion; the window solution certifies the
        // first equations and theory extends it
        let symbolic = SymbolicAbGroup::from_fgab(group)?;
        if !is_cotorsion(&symbolic).cotorsion {
            return Err(EqError::UnsupportedGroup(
                "finite group flagged non-cotorsion; fact table is broken".into(),
            ));
        }
        let system = EquationSystem::divisibility(group.clone(), rhs.clone())?;
        let solution = solve_truncated(&system, depth)?;
        return Ok(GlobalVerdict::Solved {
            x0: solution.values[0].clone(),
            window: solution.values,
        });
    }
    if group.free_rank() == 1 && group.torsion_len() == 0 {
        // the integers
        let supported = finite_support_end(rhs, depth).filter(|&end| end <= depth + 1);
        if supported.is_some() {
            // zero tail past the window, so back-substitution is a genuine
            // global solution: x_n = Σ_{k>=n} (k!/n!) a_k
            let mut values = vec![group.zero(); depth + 1];
            for n in (0..=depth).rev() {
                let mut x = rhs.at(n);
                if n + 1 <= depth {
                    x = x.add(&values[n + 1].scalar_mul(&BigInt::from(n as u64 + 1)));
                }
                values[n] = x;
            }
            return Ok(GlobalVerdict::Solved { x0: values[0].clone(), window: values });
        }
        for n in 2..=depth {
            let (modulus, residue) =
                factorial_congruence(rhs, n).expect("integer coordinates");
            if &residue > bound && (&modulus - &residue) > *bound {
                let certificate = FactorialCertificate { depth: n, modulus, residue };
                debug_assert!(certificate.verify(rhs, bound));
                return Ok(GlobalVerdict::NoSolutionBelow {
                    bound: bound.clone(),
                    certificate,
                });
            }
        }
        return Ok(GlobalVerdict::Unknown);
    }
    Err(EqError::UnsupportedGroup(
        "global divisibility solving is wired for Z and finite groups".into(),
    ))
}

/// Index after which the rhs is identically zero, if that is knowable.
fn finite_support_end(rhs: &RhsSeq, probe: usize) -> Option<usize> {
    match rhs.tail {
        RhsTail::Zero => Some(rhs.values.len()),
        RhsTail::RepeatLast if rhs.values.last().map(|v| v.is_zero()).unwrap_or(true) => {
            Some(rhs.values.len())
        }
        RhsTail::Cycle if rhs.values.iter().all(|v| v.is_zero()) => Some(0),
        _ => {
            let _ = probe;
            None
        }
    }
}

// ---------------------------------------------------------------------------
// wire format

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CoeffWire {
    Divisibility,
    ExplicitRows { rows: Vec<Vec<(usize, i64)>> },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SystemGroupWire {
    Symbolic(SymbolicAbGroup),
    FgAb(FgAbGroup),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RhsWire {
    Bare(Vec<Vec<i64>>),
    Tagged { values: Vec<Vec<i64>>, tail: RhsTail },
}

#[derive(Serialize, Deserialize)]
struct SystemWire {
    matrix: CoeffWire,
    group: SystemGroupWire,
    rhs: RhsWire,
}

impl Serialize for EquationSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let matrix = match &self.coeff {
            CoeffMatrix::Divisibility => CoeffWire::Divisibility,
            CoeffMatrix::Explicit { rows } => CoeffWire::ExplicitRows {
                rows: rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|(c, v)| {
                                num_traits::ToPrimitive::to_i64(v)
                                    .map(|v| (*c, v))
                                    .ok_or_else(|| S::Error::custom("coefficient too large"))
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            },
        };
        let group = match &self.group {
            SystemGroup::FgAb(g) => SystemGroupWire::FgAb(g.clone()),
            SystemGroup::Symbolic(g) => SystemGroupWire::Symbolic(g.clone()),
        };
        let values = self
            .rhs
            .values
            .iter()
            .map(|v| {
                v.coords()
                    .iter()
                    .map(|c| {
                        num_traits::ToPrimitive::to_i64(c)
                            .ok_or_else(|| S::Error::custom("rhs value too large"))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        SystemWire { matrix, group, rhs: RhsWire::Tagged { values, tail: self.rhs.tail } }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EquationSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = SystemWire::deserialize(d)?;
        let coeff = match wire.matrix {
            CoeffWire::Divisibility => CoeffMatrix::Divisibility,
            CoeffWire::ExplicitRows { rows } => CoeffMatrix::Explicit {
                rows: rows
                    .into_iter()
                    .map(|r| r.into_iter().map(|(c, v)| (c, BigInt::from(v))).collect())
                    .collect(),
            },
        };
        let (values_raw, tail) = match wire.rhs {
            RhsWire::Bare(values) => (values, RhsTail::Zero),
            RhsWire::Tagged { values, tail } => (values, tail),
        };
        match wire.group {
            SystemGroupWire::FgAb(g) => {
                let values = values_raw
                    .iter()
                    .map(|coords| g.element_from_i64(coords).map_err(D::Error::custom))
                    .collect::<Result<Vec<_>, _>>()?;
                let rhs = RhsSeq::new(g.clone(), values, tail).map_err(D::Error::custom)?;
                Ok(EquationSystem { coeff, rhs, group: SystemGroup::FgAb(g) })
            }
            SystemGroupWire::Symbolic(g) => {
                if !values_raw.is_empty() {
                    return Err(D::Error::custom(
                        "symbolic systems carry no concrete rhs values",
                    ));
                }
                let rhs = RhsSeq::zero(FgAbGroup::trivial());
                Ok(EquationSystem { coeff, rhs, group: SystemGroup::Symbolic(g) })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> FgAbGroup {
        FgAbGroup::free(1)
    }

    fn zn(n: u64) -> FgAbGroup {
        FgAbGroup::cyclic(n)
    }

    fn rhs_of(group: &FgAbGroup, values: &[i64], tail: RhsTail) -> RhsSeq {
        let values = values
            .iter()
            .map(|&v| group.element_from_i64(&[v]).unwrap())
            .collect();
        RhsSeq::new(group.clone(), values, tail).unwrap()
    }

    #[test]
    fn divisibility_matrix_is_unitriangular() {
        let sys = EquationSystem::divisibility(z(), RhsSeq::zero(z())).unwrap();
        assert!(is_unitriangular(&sys, 10).unwrap());
        assert_eq!(sys.coeff.entry(2, 3).unwrap(), BigInt::from(-3));
        assert_eq!(sys.coeff.entry(2, 2).unwrap(), BigInt::one());
        assert_eq!(sys.coeff.entry(2, 1).unwrap(), BigInt::zero());
    }

    #[test]
    fn explicit_identity_is_unitriangular() {
        let rows = vec![vec![(0usize, BigInt::one())], vec![(1, BigInt::one())]];
        let sys = EquationSystem {
            coeff: CoeffMatrix::Explicit { rows },
            rhs: RhsSeq::zero(z()),
            group: SystemGroup::FgAb(z()),
        };
        assert!(is_unitriangular(&sys, 1).unwrap());
        // rows beyond the explicit list are an error, not silently fine
        assert!(matches!(is_unitriangular(&sys, 2), Err(EqError::RowUnavailable(2))));
    }

    #[test]
    fn lower_entry_breaks_unitriangularity() {
        let rows = vec![
            vec![(0usize, BigInt::one())],
            vec![(0, BigInt::one()), (1, BigInt::one())],
        ];
        let sys = EquationSystem {
            coeff: CoeffMatrix::Explicit { rows },
            rhs: RhsSeq::zero(z()),
            group: SystemGroup::FgAb(z()),
        };
        assert!(!is_unitriangular(&sys, 1).unwrap());
    }

    #[test]
    fn zero_rhs_solves_to_zero() {
        let sys = EquationSystem::divisibility(z(), RhsSeq::zero(z())).unwrap();
        let sol = solve_truncated(&sys, 4).unwrap();
        assert!(sol.values.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn unit_impulse_back_substitutes() {
        let rhs = rhs_of(&z(), &[1], RhsTail::Zero);
        let sys = EquationSystem::divisibility(z(), rhs).unwrap();
        let sol = solve_truncated(&sys, 2).unwrap();
        let coords: Vec<i64> = sol
            .values
            .iter()
            .map(|v| num_traits::ToPrimitive::to_i64(&v.coords()[0]).unwrap())
            .collect();
        assert_eq!(coords, vec![1, 0, 0]);
    }

    #[test]
    fn window_solution_mod_six() {
        let g = zn(6);
        let rhs = rhs_of(&g, &[1, 1, 1, 1], RhsTail::Zero);
        let sys = EquationSystem::divisibility(g, rhs).unwrap();
        // substitution check inside solve_truncated is the oracle here
        let sol = solve_truncated(&sys, 3).unwrap();
        assert_eq!(sol.values.len(), 4);
    }

    #[test]
    fn global_over_z_all_ones_has_factorial_obstruction() {
        let rhs = rhs_of(&z(), &[1], RhsTail::RepeatLast);
        let bound = BigInt::from(1_000_000u64);
        match divisibility_system_global(&z(), &rhs, &bound, 20).unwrap() {
            GlobalVerdict::NoSolutionBelow { certificate, .. } => {
                // 11! = 39 916 800 and Σ_{k<11} k! = 4 037 914
                assert_eq!(certificate.depth, 11);
                assert_eq!(certificate.modulus, BigInt::from(39_916_800u64));
                assert_eq!(certificate.residue, BigInt::from(4_037_914u64));
                assert!(certificate.verify(&rhs, &bound));
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    #[test]
    fn certificate_excludes_the_whole_interval() {
        let rhs = rhs_of(&z(), &[1], RhsTail::RepeatLast);
        let bound = BigInt::from(1_000_000u64);
        let GlobalVerdict::NoSolutionBelow { certificate, .. } =
            divisibility_system_global(&z(), &rhs, &bound, 20).unwrap()
        else {
            panic!()
        };
        // spot-scan the congruence class: nothing lands within the bound
        let m = num_traits::ToPrimitive::to_i64(&certificate.modulus).unwrap();
        let r = num_traits::ToPrimitive::to_i64(&certificate.residue).unwrap();
        let b = 1_000_000i64;
        let mut candidate = r - ((r + b) / m + 1) * m;
        while candidate <= b {
            assert!(candidate.abs() > b);
            candidate += m;
        }
    }

    #[test]
    fn global_over_z_finite_support_solves() {
        let rhs = rhs_of(&z(), &[1], RhsTail::Zero);
        match divisibility_system_global(&z(), &rhs, &BigInt::from(10), 6).unwrap() {
            GlobalVerdict::Solved { x0, .. } => {
                assert_eq!(x0.coords()[0], BigInt::one());
            }
            other => panic!("expected solution, got {other:?}"),
        }
    }

    #[test]
    fn global_over_finite_group_always_solves() {
        let g = zn(6);
        let rhs = rhs_of(&g, &[5, 3, 1, 4, 2], RhsTail::Cycle);
        match divisibility_system_global(&g, &rhs, &BigInt::from(1), 8).unwrap() {
            GlobalVerdict::Solved { window, .. } => {
                assert_eq!(window.len(), 9);
            }
            other => panic!("expected solution, got {other:?}"),
        }
    }

    #[test]
    fn unsupported_groups_are_rejected() {
        let g = FgAbGroup::free(2);
        let rhs = RhsSeq::zero(g.clone());
        assert!(matches!(
            divisibility_system_global(&g, &rhs, &BigInt::one(), 4),
            Err(EqError::UnsupportedGroup(_))
        ));
    }

    #[test]
    fn system_wire_round_trip() {
        let g = zn(6);
        let rhs = rhs_of(&g, &[1, 2], RhsTail::Cycle);
        let sys = EquationSystem::divisibility(g, rhs).unwrap();
        let s = serde_json::to_string(&sys).unwrap();
        let back: EquationSystem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, sys);
        // the documented shorthand: bare rhs array means zero tail
        let manual: EquationSystem = serde_json::from_str(
            r#"{"matrix":{"kind":"divisibility"},"group":{"factors":[4],"rank":0},"rhs":[[1],[3]]}"#,
        )
        .unwrap();
        assert_eq!(manual.rhs.at(0).coords()[0], BigInt::one());
        assert!(manual.rhs.at(5).is_zero());
    }
}
