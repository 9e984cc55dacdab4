use num_bigint::BigInt;
use num_traits::{One, Zero};
#[cfg(test)]
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::matrix::{IntMatrix, LinalgError};
use super::snf::{smith_normal_form, SmithDecomposition};

/// Why `A x = b` has no integer solution: row `row` of `U b` is not
/// divisible by the corresponding diagonal entry (`divisor` may be zero,
/// meaning the row must vanish and does not).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsolvableCertificate {
    pub row: usize,
    #[serde(with = "crate::bigjson")]
    pub divisor: BigInt,
    #[serde(with = "crate::bigjson")]
    pub value: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearSolution {
    Solvable { particular: Vec<BigInt>, kernel_basis: Vec<Vec<BigInt>> },
    Unsolvable(UnsolvableCertificate),
}

/// Solve `A x = b` over the integers. On success the kernel basis spans all
/// integer solutions of `A x = 0`.
pub fn solve_linear(a: &IntMatrix, b: &[BigInt]) -> Result<LinearSolution, LinalgError> {
    if b.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "matrix {}x{} with rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let dec = smith_normal_form(a);
    let ub = dec.u.mul_vec(b)?;
    let mut y = vec![BigInt::zero(); a.cols()];
    for (i, ubi) in ub.iter().enumerate() {
        if i < dec.rank {
            let d = dec.s.at(i, i);
            if !(ubi % d).is_zero() {
                return Ok(LinearSolution::Unsolvable(UnsolvableCertificate {
                    row: i,
                    divisor: d.clone(),
                    value: ubi.clone(),
                }));
            }
            y[i] = ubi / d;
        } else if !ubi.is_zero() {
            return Ok(LinearSolution::Unsolvable(UnsolvableCertificate {
                row: i,
                divisor: BigInt::zero(),
                value: ubi.clone(),
            }));
        }
    }
    let particular = dec.v.mul_vec(&y)?;
    let kernel_basis = (dec.rank..a.cols()).map(|j| dec.v.col(j)).collect();
    Ok(LinearSolution::Solvable { particular, kernel_basis })
}

/// Isomorphism type of `Z^cols / rowspace(A)`: invariant factors > 1 plus
/// the free rank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CokernelStructure {
    #[serde(with = "crate::bigjson::vec")]
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
}

/// Cokernel structure together with the coordinate change that projects a
/// generator-space vector onto canonical coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CokernelPresentation {
    pub structure: CokernelStructure,
    /// full SNF diagonal, unit entries included
    pub diagonal: Vec<BigInt>,
    pub rank: usize,
    /// `w = transform * x` are coordinates in which the relations become
    /// `d_i w_i = 0`
    pub transform: IntMatrix,
}

impl CokernelPresentation {
    /// Canonical coordinates of the class of `x`: torsion coordinates
    /// (diagonal entries > 1) reduced mod d_i, then the free coordinates.
    pub fn project(&self, x: &[BigInt]) -> Result<Vec<BigInt>, LinalgError> {
        use num_integer::Integer;
        let w = self.transform.mul_vec(x)?;
        let mut out = Vec::new();
        for (i, d) in self.diagonal.iter().enumerate() {
            if d > &BigInt::one() {
                out.push(w[i].mod_floor(d));
            }
        }
        for wi in w.iter().skip(self.rank) {
            out.push(wi.clone());
        }
        Ok(out)
    }
}

/// Structure of the abelian group presented by `a` (rows are relations on
/// `cols` generators). Unit factors are dropped; factors are positive.
pub fn cokernel_structure(a: &IntMatrix) -> CokernelStructure {
    cokernel_with_projection(a).structure
}

/// Exact inverse of a unimodular matrix, through its Smith normal form:
/// `U m V = I` gives `m^{-1} = V U`. `None` when `m` is not unimodular.
pub fn invert_unimodular(m: &IntMatrix) -> Option<IntMatrix> {
    if m.rows() != m.cols() {
        return None;
    }
    let dec = smith_normal_form(m);
    if !dec.s.is_identity() {
        return None;
    }
    Some(dec.v.mul(&dec.u).expect("square factors"))
}

pub fn cokernel_with_projection(a: &IntMatrix) -> CokernelPresentation {
    // rowspace quotient = coker(A^T); SNF of A^T is the transpose-flip of SNF of A
    let at = a.transpose();
    let dec: SmithDecomposition = smith_normal_form(&at);
    let diagonal: Vec<BigInt> = (0..dec.rank).map(|i| dec.s.at(i, i).clone()).collect();
    let invariant_factors: Vec<BigInt> =
        diagonal.iter().filter(|d| **d > BigInt::one()).cloned().collect();
    let free_rank = at.rows() - dec.rank;
    CokernelPresentation {
        structure: CokernelStructure { invariant_factors, free_rank },
        diagonal,
        rank: dec.rank,
        // A^T maps relation space into generator space Z^cols and
        // U (A^T) V = S, so generators transform by U
        transform: dec.u,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    /// Brute-force small-box search oracle for 2x2 systems.
    fn brute_solve_2x2(a: &IntMatrix, b: &[BigInt], bound: i64) -> Option<Vec<BigInt>> {
        for x0 in -bound..=bound {
            for x1 in -bound..=bound {
                let x = vec![big(x0), big(x1)];
                if a.mul_vec(&x).unwrap() == b {
                    return Some(x);
                }
            }
        }
        None
    }

    #[test]
    fn one_dimensional_solvable() {
        let a = IntMatrix::from_i64_rows(&[vec![2]]);
        match solve_linear(&a, &[big(4)]).unwrap() {
            LinearSolution::Solvable { particular, kernel_basis } => {
                assert_eq!(particular, vec![big(2)]);
                assert!(kernel_basis.is_empty());
            }
            other => panic!("expected solution, got {other:?}"),
        }
    }

    #[test]
    fn one_dimensional_certificate() {
        let a = IntMatrix::from_i64_rows(&[vec![2]]);
        match solve_linear(&a, &[big(3)]).unwrap() {
            LinearSolution::Unsolvable(cert) => {
                assert_eq!(cert.row, 0);
                assert_eq!(cert.divisor, big(2));
                assert!(!(&cert.value % &cert.divisor).is_zero());
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }

    #[test]
    fn two_by_two_matches_brute_force() {
        let a = IntMatrix::from_i64_rows(&[vec![1, 2], vec![3, 4]]);
        let b = vec![big(1), big(1)];
        let expected = brute_solve_2x2(&a, &b, 5).expect("oracle finds a solution");
        assert_eq!(expected, vec![big(-1), big(1)]);
        match solve_linear(&a, &b).unwrap() {
            LinearSolution::Solvable { particular, kernel_basis } => {
                // det = -2, so the solution is unique
                assert_eq!(particular, expected);
                assert!(kernel_basis.is_empty());
            }
            other => panic!("expected solution, got {other:?}"),
        }
    }

    #[test]
    fn kernel_basis_spans_solutions() {
        let a = IntMatrix::from_i64_rows(&[vec![2, -2]]);
        match solve_linear(&a, &[big(4)]).unwrap() {
            LinearSolution::Solvable { particular, kernel_basis } => {
                assert_eq!(a.mul_vec(&particular).unwrap(), vec![big(4)]);
                assert_eq!(kernel_basis.len(), 1);
                let k = &kernel_basis[0];
                assert_eq!(a.mul_vec(k).unwrap(), vec![big(0)]);
                // (1,1) generates the kernel up to sign
                assert_eq!(k[0].abs(), k[1].abs());
                assert!(k[0].abs().is_one());
            }
            other => panic!("expected solution, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = IntMatrix::from_i64_rows(&[vec![1, 2]]);
        assert!(solve_linear(&a, &[big(1), big(2)]).is_err());
    }

    #[test]
    fn cokernel_examples() {
        let a = IntMatrix::from_i64_rows(&[vec![6]]);
        let c = cokernel_structure(&a);
        assert_eq!(c.invariant_factors, vec![big(6)]);
        assert_eq!(c.free_rank, 0);

        let a = IntMatrix::from_i64_rows(&[vec![2, 4], vec![6, 8]]);
        let c = cokernel_structure(&a);
        assert_eq!(c.invariant_factors, vec![big(2), big(4)]);
        assert_eq!(c.free_rank, 0);

        let a = IntMatrix::zero(0, 2);
        let c = cokernel_structure(&a);
        assert!(c.invariant_factors.is_empty());
        assert_eq!(c.free_rank, 2);
    }

    #[test]
    fn unit_factors_are_dropped() {
        let a = IntMatrix::from_i64_rows(&[vec![1, 0], vec![0, 4]]);
        let c = cokernel_structure(&a);
        assert_eq!(c.invariant_factors, vec![big(4)]);
        assert_eq!(c.free_rank, 0);
    }

    #[test]
    fn projection_respects_relations() {
        // Z^2 / <(2,0), (0,4)>; the class of any relation row projects to 0
        let a = IntMatrix::from_i64_rows(&[vec![2, 0], vec![0, 4]]);
        let p = cokernel_with_projection(&a);
        for row in [[2i64, 0], [0, 4], [2, 4], [-2, 8]] {
            let x: Vec<BigInt> = row.iter().map(|&v| big(v)).collect();
            let coords = p.project(&x).unwrap();
            assert!(coords.iter().all(|c| c.is_zero()), "row {row:?} -> {coords:?}");
        }
        // generators project to distinct nonzero classes
        let g0 = p.project(&[big(1), big(0)]).unwrap();
        let g1 = p.project(&[big(0), big(1)]).unwrap();
        assert!(!g0.iter().all(|c| c.is_zero()));
        assert!(!g1.iter().all(|c| c.is_zero()));
        assert_ne!(g0, g1);
    }
}
