use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::IntMatrix;

/// Result of reducing `A` to Smith normal form: `U * A * V = S` with
/// unimodular `U`, `V` and rectangular-diagonal `S` whose nonzero diagonal
/// entries are positive and form a divisibility chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    pub rank: usize,
}

impl SmithDecomposition {
    /// The nonzero diagonal entries d_1 | d_2 | ... | d_rank.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.s.at(i, i).clone()).collect()
    }

    /// Re-checks every structural invariant against the source matrix.
    pub fn verify(&self, a: &IntMatrix) -> bool {
        let product = match self.u.mul(a).and_then(|ua| ua.mul(&self.v)) {
            Ok(p) => p,
            Err(_) => return false,
        };
        if product != self.s {
            return false;
        }
        if !self.u.is_unimodular() || !self.v.is_unimodular() {
            return false;
        }
        if !self.s.is_diagonal() {
            return false;
        }
        let diag = self.diagonal();
        if diag.iter().any(|d| !d.is_positive()) {
            return false;
        }
        for w in diag.windows(2) {
            if !(&w[1] % &w[0]).is_zero() {
                return false;
            }
        }
        // nothing past the rank
        let n = self.s.rows().min(self.s.cols());
        (self.rank..n).all(|i| self.s.at(i, i).is_zero())
    }
}

struct SnfWork {
    m: IntMatrix,
    u: IntMatrix,
    v: IntMatrix,
}

impl SnfWork {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.m.cols() {
            let a = self.m.at(i, c).clone();
            let b = self.m.at(j, c).clone();
            self.m.set(i, c, b);
            self.m.set(j, c, a);
        }
        for c in 0..self.u.cols() {
            let a = self.u.at(i, c).clone();
            let b = self.u.at(j, c).clone();
            self.u.set(i, c, b);
            self.u.set(j, c, a);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.m.rows() {
            let a = self.m.at(r, i).clone();
            let b = self.m.at(r, j).clone();
            self.m.set(r, i, b);
            self.m.set(r, j, a);
        }
        for r in 0..self.v.rows() {
            let a = self.v.at(r, i).clone();
            let b = self.v.at(r, j).clone();
            self.v.set(r, i, b);
            self.v.set(r, j, a);
        }
    }

    /// row[i] -= q * row[j]
    fn row_sub(&mut self, i: usize, j: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.m.cols() {
            let val = self.m.at(i, c) - q * self.m.at(j, c);
            self.m.set(i, c, val);
        }
        for c in 0..self.u.cols() {
            let val = self.u.at(i, c) - q * self.u.at(j, c);
            self.u.set(i, c, val);
        }
    }

    /// col[i] -= q * col[j]
    fn col_sub(&mut self, i: usize, j: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.m.rows() {
            let val = self.m.at(r, i) - q * self.m.at(r, j);
            self.m.set(r, i, val);
        }
        for r in 0..self.v.rows() {
            let val = self.v.at(r, i) - q * self.v.at(r, j);
            self.v.set(r, i, val);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.m.cols() {
            let val = -self.m.at(i, c).clone();
            self.m.set(i, c, val);
        }
        for c in 0..self.u.cols() {
            let val = -self.u.at(i, c).clone();
            self.u.set(i, c, val);
        }
    }

    /// Smallest nonzero |entry| in the submatrix at (k,k)..; the standard
    /// anti-blowup pivot choice.
    fn min_abs_pivot(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), BigInt)> = None;
        for r in k..self.m.rows() {
            for c in k..self.m.cols() {
                let e = self.m.at(r, c);
                if e.is_zero() {
                    continue;
                }
                let a = e.abs();
                match &best {
                    Some((_, cur)) if *cur <= a => {}
                    _ => best = Some(((r, c), a)),
                }
            }
        }
        best.map(|(pos, _)| pos)
    }

    /// rows (i, j) <- (p*row_i + q*row_j, r*row_i + s*row_j); the caller
    /// guarantees det(p s - q r) = ±1
    fn row_transform(&mut self, i: usize, j: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt) {
        for c in 0..self.m.cols() {
            let a = self.m.at(i, c).clone();
            let b = self.m.at(j, c).clone();
            self.m.set(i, c, p * &a + q * &b);
            self.m.set(j, c, r * &a + s * &b);
        }
        for c in 0..self.u.cols() {
            let a = self.u.at(i, c).clone();
            let b = self.u.at(j, c).clone();
            self.u.set(i, c, p * &a + q * &b);
            self.u.set(j, c, r * &a + s * &b);
        }
    }

    fn col_transform(&mut self, i: usize, j: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt) {
        for row in 0..self.m.rows() {
            let a = self.m.at(row, i).clone();
            let b = self.m.at(row, j).clone();
            self.m.set(row, i, p * &a + q * &b);
            self.m.set(row, j, r * &a + s * &b);
        }
        for row in 0..self.v.rows() {
            let a = self.v.at(row, i).clone();
            let b = self.v.at(row, j).clone();
            self.v.set(row, i, p * &a + q * &b);
            self.v.set(row, j, r * &a + s * &b);
        }
    }

    /// Put gcd(pivot, m[r][k]) at the pivot and zero at (r, k) in one
    /// unimodular step: [s t; -y/d x/d] has determinant one.
    fn clear_entry_in_column(&mut self, k: usize, r: usize) {
        let x = self.m.at(k, k).clone();
        let y = self.m.at(r, k).clone();
        if (&y % &x).is_zero() {
            let q = &y / &x;
            self.row_sub(r, k, &q);
            return;
        }
        let eg = x.extended_gcd(&y);
        let (a, b) = (&x / &eg.gcd, &y / &eg.gcd);
        self.row_transform(k, r, &eg.x, &eg.y, &-b, &a);
    }

    fn clear_entry_in_row(&mut self, k: usize, c: usize) {
        let x = self.m.at(k, k).clone();
        let y = self.m.at(k, c).clone();
        if (&y % &x).is_zero() {
            let q = &y / &x;
            self.col_sub(c, k, &q);
            return;
        }
        let eg = x.extended_gcd(&y);
        let (a, b) = (&x / &eg.gcd, &y / &eg.gcd);
        self.col_transform(k, c, &eg.x, &eg.y, &-b, &a);
    }

    fn column_live(&self, k: usize) -> Option<usize> {
        (k + 1..self.m.rows()).find(|&r| !self.m.at(r, k).is_zero())
    }

    fn row_live(&self, k: usize) -> Option<usize> {
        (k + 1..self.m.cols()).find(|&c| !self.m.at(k, c).is_zero())
    }

    /// Clear row k and column k against the pivot at (k, k). Each cleared
    /// entry is handled by a single extended-gcd transform, so the pivot
    /// only ever moves to a divisor of itself and the loop ends after at
    /// most log(pivot) alternations.
    fn eliminate(&mut self, k: usize) {
        debug_assert!(!self.m.at(k, k).is_zero());
        loop {
            while let Some(r) = self.column_live(k) {
                self.clear_entry_in_column(k, r);
            }
            match self.row_live(k) {
                Some(c) => self.clear_entry_in_row(k, c),
                None => break,
            }
        }
    }
}

/// Smith normal form with transforms. Total: every integer matrix, including
/// empty ones, has a decomposition.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let mut w = SnfWork {
        m: a.clone(),
        u: IntMatrix::identity(a.rows()),
        v: IntMatrix::identity(a.cols()),
    };
    let n = a.rows().min(a.cols());
    let mut rank = 0;
    for k in 0..n {
        let Some((pr, pc)) = w.min_abs_pivot(k) else {
            break;
        };
        w.swap_rows(k, pr);
        w.swap_cols(k, pc);
        w.eliminate(k);
        if w.m.at(k, k).is_negative() {
            w.negate_row(k);
        }
        rank = k + 1;
    }
    // enforce the divisibility chain d_i | d_{i+1}
    loop {
        let mut settled = true;
        for i in 0..rank.saturating_sub(1) {
            let d = w.m.at(i, i).clone();
            let e = w.m.at(i + 1, i + 1).clone();
            if (&e % &d).is_zero() {
                continue;
            }
            settled = false;
            // fold the two diagonal entries back into a 2x2 block and re-run
            w.col_sub(i, i + 1, &BigInt::from(-1));
            w.eliminate(i);
            if w.m.at(i, i).is_negative() {
                w.negate_row(i);
            }
            if w.m.at(i + 1, i + 1).is_negative() {
                w.negate_row(i + 1);
            }
        }
        if settled {
            break;
        }
    }
    debug_assert!(w.m.is_diagonal());
    SmithDecomposition { u: w.u, s: w.m, v: w.v, rank }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use num_traits::One;

    /// Determinant-divisor oracle: d_i = D_i / D_{i-1} where D_i is the gcd
    /// of all i x i minors. Independent of the elimination path.
    fn invariant_factors_by_minors(a: &IntMatrix) -> Vec<BigInt> {
        fn minor_gcd(a: &IntMatrix, k: usize) -> BigInt {
            fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
                fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
                    if cur.len() == k {
                        out.push(cur.clone());
                        return;
                    }
                    for i in start..n {
                        cur.push(i);
                        rec(i + 1, n, k, cur, out);
                        cur.pop();
                    }
                }
                let mut out = Vec::new();
                rec(0, n, k, &mut Vec::new(), &mut out);
                out
            }
            let mut g = BigInt::zero();
            for rows in combos(a.rows(), k) {
                for cols in combos(a.cols(), k) {
                    let sub = IntMatrix::from_fn(k, k, |r, c| a.at(rows[r], cols[c]).clone());
                    g = g.gcd(&sub.determinant().unwrap());
                }
            }
            g
        }
        let mut out = Vec::new();
        let mut prev = BigInt::one();
        for k in 1..=a.rows().min(a.cols()) {
            let dk = minor_gcd(a, k);
            if dk.is_zero() {
                break;
            }
            out.push(&dk / &prev);
            prev = dk;
        }
        out
    }

    #[test]
    fn identity_stays_identity() {
        let a = IntMatrix::identity(2);
        let d = smith_normal_form(&a);
        assert!(d.verify(&a));
        assert_eq!(d.s, IntMatrix::identity(2));
        assert_eq!(d.rank, 2);
    }

    #[test]
    fn two_by_two_matches_determinant_divisors() {
        let a = IntMatrix::from_i64_rows(&[vec![2, 4], vec![6, 8]]);
        let d = smith_normal_form(&a);
        assert!(d.verify(&a));
        // gcd of entries = 2, |det| = 8, so d_2 = 8 / 2 = 4
        assert_eq!(d.diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(invariant_factors_by_minors(&a), d.diagonal());
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let a = IntMatrix::zero(3, 2);
        let d = smith_normal_form(&a);
        assert!(d.verify(&a));
        assert!(d.s.is_zero());
        assert_eq!(d.rank, 0);
    }

    #[test]
    fn empty_shapes() {
        for (r, c) in [(0, 0), (0, 3), (3, 0)] {
            let a = IntMatrix::zero(r, c);
            let d = smith_normal_form(&a);
            assert!(d.verify(&a), "empty shape {r}x{c}");
            assert_eq!(d.rank, 0);
        }
    }

    #[test]
    fn divisibility_chain_needs_fixing() {
        // diag(4, 6) is diagonal but 4 does not divide 6; SNF is diag(2, 12)
        let a = IntMatrix::diagonal(2, 2, &[BigInt::from(4), BigInt::from(6)]);
        let d = smith_normal_form(&a);
        assert!(d.verify(&a));
        assert_eq!(d.diagonal(), vec![BigInt::from(2), BigInt::from(12)]);
    }

    #[test]
    fn random_matrices_match_minor_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let rows = rng.gen_range(1..=4);
            let cols = rng.gen_range(1..=4);
            let a = IntMatrix::from_fn(rows, cols, |_, _| BigInt::from(rng.gen_range(-9i64..=9)));
            let d = smith_normal_form(&a);
            assert!(d.verify(&a), "verify failed for\n{a}");
            assert_eq!(invariant_factors_by_minors(&a), d.diagonal(), "oracle mismatch for\n{a}");
        }
    }
}
