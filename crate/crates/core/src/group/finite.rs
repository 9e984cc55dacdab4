use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Above this order associativity is spot-checked on seeded random triples
/// instead of all `order^3` of them.
pub const EXHAUSTIVE_ASSOC_BOUND: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is not square: {0} rows for order {1}")]
    BadTableShape(usize, usize),
    #[error("table entry {0} out of range for order {1}")]
    EntryOutOfRange(usize, usize),
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no two-sided inverse")]
    NoInverse(usize),
    #[error("associativity fails on ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("rows/columns are not permutations (cancellation fails)")]
    NotCancellative,
    #[error("subgroup is not closed under multiplication")]
    NotClosed,
    #[error("subgroup is not normal")]
    NotNormal,
}

/// Finite group presented by its full multiplication table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FiniteGroupWire", into = "FiniteGroupWire")]
pub struct FiniteGroup {
    order: usize,
    /// row-major: `table[a * order + b] = a * b`
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
    name: Option<String>,
}

// the display name carries no mathematical content
impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.table == other.table
    }
}

impl Eq for FiniteGroup {}

impl std::hash::Hash for FiniteGroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.order.hash(state);
        self.table.hash(state);
    }
}

#[derive(Serialize, Deserialize)]
struct FiniteGroupWire {
    order: usize,
    table: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    name: Option<String>,
}

impl TryFrom<FiniteGroupWire> for FiniteGroup {
    type Error = GroupError;
    fn try_from(w: FiniteGroupWire) -> Result<Self, Self::Error> {
        if w.table.len() != w.order {
            return Err(GroupError::BadTableShape(w.table.len(), w.order));
        }
        let mut g = FiniteGroup::from_table(w.table)?;
        g.name = w.name;
        Ok(g)
    }
}

impl From<FiniteGroup> for FiniteGroupWire {
    fn from(g: FiniteGroup) -> Self {
        let table = (0..g.order).map(|a| g.table[a * g.order..(a + 1) * g.order].to_vec()).collect();
        FiniteGroupWire { order: g.order, table, name: g.name }
    }
}

impl FiniteGroup {
    /// Validate a multiplication table and build the group. Identity and
    /// inverse laws are always checked exhaustively; associativity is
    /// exhaustive up to order 64 and seeded-random beyond.
    pub fn from_table(rows: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let order = rows.len();
        let mut table = Vec::with_capacity(order * order);
        for row in &rows {
            if row.len() != order {
                return Err(GroupError::BadTableShape(row.len(), order));
            }
            for &e in row {
                if e >= order {
                    return Err(GroupError::EntryOutOfRange(e, order));
                }
            }
            table.extend_from_slice(row);
        }
        if order == 0 {
            return Err(GroupError::NoIdentity);
        }
        let mul = |a: usize, b: usize| table[a * order + b];
        // rows and columns must be permutations
        for a in 0..order {
            let mut seen_row = vec![false; order];
            let mut seen_col = vec![false; order];
            for b in 0..order {
                if std::mem::replace(&mut seen_row[mul(a, b)], true) {
                    return Err(GroupError::NotCancellative);
                }
                if std::mem::replace(&mut seen_col[mul(b, a)], true) {
                    return Err(GroupError::NotCancellative);
                }
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| mul(e, a) == a && mul(a, e) == a))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverses = vec![0; order];
        for a in 0..order {
            let inv = (0..order)
                .find(|&b| mul(a, b) == identity && mul(b, a) == identity)
                .ok_or(GroupError::NoInverse(a))?;
            inverses[a] = inv;
        }
        if order <= EXHAUSTIVE_ASSOC_BOUND {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                            return Err(GroupError::NotAssociative(a, b, c));
                        }
                    }
                }
            }
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..4096 {
                let (a, b, c) =
                    (rng.gen_range(0..order), rng.gen_range(0..order), rng.gen_range(0..order));
                if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                    return Err(GroupError::NotAssociative(a, b, c));
                }
            }
        }
        Ok(FiniteGroup { order, table, identity, inverses, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn commutator(&self, x: usize, y: usize) -> usize {
        self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y))
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let mut base = if k < 0 { self.inv(a) } else { a };
        let mut k = k.unsigned_abs();
        let mut acc = self.identity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut n = 1;
        while x != self.identity {
            x = self.mul(x, a);
            n += 1;
        }
        n
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// Closure of a subset under multiplication (finite, so inverses come
    /// for free).
    pub fn closure(&self, seed: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut set: BTreeSet<usize> = seed.into_iter().collect();
        set.insert(self.identity);
        let mut frontier: Vec<usize> = set.iter().copied().collect();
        while let Some(a) = frontier.pop() {
            let members: Vec<usize> = set.iter().copied().collect();
            for b in members {
                for prod in [self.mul(a, b), self.mul(b, a)] {
                    if set.insert(prod) {
                        frontier.push(prod);
                    }
                }
            }
        }
        set.into_iter().collect()
    }

    pub fn is_normal(&self, subgroup: &[usize]) -> bool {
        let set: BTreeSet<usize> = subgroup.iter().copied().collect();
        self.elements().all(|g| subgroup.iter().all(|&s| set.contains(&self.conj(g, s))))
    }

    /// All commutators `[x, y]`, deduplicated and sorted.
    pub fn commutator_set(&self) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for x in self.elements() {
            for y in self.elements() {
                set.insert(self.commutator(x, y));
            }
        }
        set.into_iter().collect()
    }

    /// Direct product table; element `(a, b)` gets index `a * |other| + b`.
    pub fn direct_product(&self, other: &FiniteGroup) -> FiniteGroup {
        let n = self.order * other.order;
        let mut table = vec![0usize; n * n];
        for a1 in 0..self.order {
            for b1 in 0..other.order {
                for a2 in 0..self.order {
                    for b2 in 0..other.order {
                        let i = a1 * other.order + b1;
                        let j = a2 * other.order + b2;
                        table[i * n + j] = self.mul(a1, a2) * other.order + other.mul(b1, b2);
                    }
                }
            }
        }
        let identity = self.identity * other.order + other.identity;
        let inverses = (0..n)
            .map(|i| self.inv(i / other.order) * other.order + other.inv(i % other.order))
            .collect();
        FiniteGroup { order: n, table, identity, inverses, name: None }
    }
}

/// A subgroup with its own table and the inclusion back into the parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddedSubgroup {
    /// element ids in the parent, sorted
    pub elements: Vec<usize>,
    /// the subgroup as a group in its own right
    pub group: FiniteGroup,
    /// `inclusion[i]` = parent id of subgroup element `i`
    pub inclusion: Vec<usize>,
}

impl FiniteGroup {
    /// Package a closed subset as an [`EmbeddedSubgroup`].
    pub fn subgroup_from_elements(&self, elements: &[usize]) -> Result<EmbeddedSubgroup, GroupError> {
        let sorted: Vec<usize> = {
            let set: BTreeSet<usize> = elements.iter().copied().collect();
            set.into_iter().collect()
        };
        let index_of = |id: usize| sorted.binary_search(&id).ok();
        let mut rows = Vec::with_capacity(sorted.len());
        for &a in &sorted {
            let mut row = Vec::with_capacity(sorted.len());
            for &b in &sorted {
                let prod = self.mul(a, b);
                row.push(index_of(prod).ok_or(GroupError::NotClosed)?);
            }
            rows.push(row);
        }
        let group = FiniteGroup::from_table(rows)?;
        Ok(EmbeddedSubgroup { inclusion: sorted.clone(), elements: sorted, group })
    }

    /// The commutator subgroup: closure of all commutators. Normality is
    /// re-checked before returning.
    pub fn commutator_subgroup(&self) -> EmbeddedSubgroup {
        let generated = self.closure(self.commutator_set());
        assert!(self.is_normal(&generated), "commutator subgroup must be normal");
        self.subgroup_from_elements(&generated).expect("closure is closed")
    }

    /// Quotient by a normal subgroup: the coset table plus the projection
    /// `element id -> coset id`.
    pub fn quotient_by_normal(
        &self,
        normal: &[usize],
    ) -> Result<(FiniteGroup, Vec<usize>), GroupError> {
        if !self.is_normal(normal) {
            return Err(GroupError::NotNormal);
        }
        let nset: BTreeSet<usize> = normal.iter().copied().collect();
        let mut coset_of = vec![usize::MAX; self.order];
        let mut reps: Vec<usize> = Vec::new();
        for g in self.elements() {
            if coset_of[g] != usize::MAX {
                continue;
            }
            let id = reps.len();
            reps.push(g);
            for &n in &nset {
                coset_of[self.mul(g, n)] = id;
            }
        }
        let k = reps.len();
        let mut rows = vec![vec![0usize; k]; k];
        for i in 0..k {
            for j in 0..k {
                rows[i][j] = coset_of[self.mul(reps[i], reps[j])];
            }
        }
        Ok((FiniteGroup::from_table(rows)?, coset_of))
    }
}

/// Commutator length of every element: `cl[e] = Some(n)` when the element is
/// a product of `n` and no fewer commutators, `None` outside the commutator
/// subgroup. Plain breadth-first search over products of the commutator set.
pub fn commutator_length_table(g: &FiniteGroup) -> Vec<Option<usize>> {
    let commutators = g.commutator_set();
    let mut cl = vec![None; g.order()];
    cl[g.identity()] = Some(0);
    let mut frontier = vec![g.identity()];
    let mut n = 0;
    while !frontier.is_empty() {
        n += 1;
        let mut next = Vec::new();
        for &a in &frontier {
            for &c in &commutators {
                let prod = g.mul(a, c);
                if cl[prod].is_none() {
                    cl[prod] = Some(n);
                    next.push(prod);
                }
            }
        }
        frontier = next;
    }
    cl
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FiniteClResult {
    Exact(usize),
    NotInCommutatorSubgroup,
}

pub fn commutator_length_finite(g: &FiniteGroup, el: usize) -> FiniteClResult {
    match commutator_length_table(g)[el] {
        Some(n) => FiniteClResult::Exact(n),
        None => FiniteClResult::NotInCommutatorSubgroup,
    }
}

/// Supremum of commutator lengths over the commutator subgroup; finite
/// groups always have finite width.
pub fn commutator_width_finite(g: &FiniteGroup) -> usize {
    commutator_length_table(g).iter().flatten().copied().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;

    #[test]
    fn cyclic_tables_validate() {
        let z6 = catalog::cyclic(6);
        assert_eq!(z6.order(), 6);
        assert!(z6.is_abelian());
        assert_eq!(z6.element_order(1), 6);
        assert_eq!(z6.pow(1, 4), 4);
        assert_eq!(z6.pow(1, -1), 5);
    }

    #[test]
    fn bad_tables_are_rejected() {
        // swap one entry of Z/3's table: breaks cancellation
        assert!(FiniteGroup::from_table(vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 0]]).is_err());
        // left-identity only
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![0, 1]]).is_err());
    }

    #[test]
    fn s3_commutator_subgroup_is_a3() {
        let s3 = catalog::symmetric(3);
        let c = s3.commutator_subgroup();
        assert_eq!(c.group.order(), 3);
        // every member is an even permutation: the 3-cycles and identity
        for &e in &c.elements {
            assert!(s3.element_order(e) == 1 || s3.element_order(e) == 3);
        }
    }

    #[test]
    fn q8_commutator_subgroup_is_center() {
        let q8 = catalog::quaternion8();
        let c = q8.commutator_subgroup();
        assert_eq!(c.group.order(), 2);
        let minus_one = c.elements.iter().copied().find(|&e| e != q8.identity()).unwrap();
        assert_eq!(q8.element_order(minus_one), 2);
    }

    #[test]
    fn abelian_commutator_subgroup_is_trivial() {
        let z8 = catalog::cyclic(8);
        let c = z8.commutator_subgroup();
        assert_eq!(c.group.order(), 1);
    }

    #[test]
    fn commutator_of_transpositions_is_three_cycle() {
        let s3 = catalog::symmetric(3);
        let transpositions: Vec<usize> =
            s3.elements().filter(|&e| s3.element_order(e) == 2).collect();
        assert_eq!(transpositions.len(), 3);
        let c = s3.commutator(transpositions[0], transpositions[1]);
        assert_eq!(s3.element_order(c), 3);
    }

    #[test]
    fn commutator_with_identity_is_identity() {
        let q8 = catalog::quaternion8();
        for x in q8.elements() {
            assert_eq!(q8.commutator(q8.identity(), x), q8.identity());
            assert_eq!(q8.commutator(x, q8.identity()), q8.identity());
        }
    }

    #[test]
    fn commutator_lengths_in_small_groups() {
        let s3 = catalog::symmetric(3);
        assert_eq!(commutator_length_finite(&s3, s3.identity()), FiniteClResult::Exact(0));
        let transposition = s3.elements().find(|&e| s3.element_order(e) == 2).unwrap();
        assert_eq!(
            commutator_length_finite(&s3, transposition),
            FiniteClResult::NotInCommutatorSubgroup
        );
        assert_eq!(commutator_width_finite(&s3), 1);

        let q8 = catalog::quaternion8();
        let minus_one = q8.commutator_subgroup().elements[1];
        assert_eq!(commutator_length_finite(&q8, minus_one), FiniteClResult::Exact(1));
        assert_eq!(commutator_width_finite(&q8), 1);

        assert_eq!(commutator_width_finite(&catalog::cyclic(12)), 0);
    }

    /// Independent check of the BFS: enumerate products of n commutators
    /// directly for small n.
    #[test]
    fn cl_bfs_matches_direct_enumeration() {
        for g in [catalog::symmetric(3), catalog::quaternion8(), catalog::dihedral(4)] {
            let commutators = g.commutator_set();
            let mut reachable: Vec<BTreeSet<usize>> = vec![BTreeSet::from([g.identity()])];
            for n in 1..=3 {
                let prev = reachable[n - 1].clone();
                let mut cur = BTreeSet::new();
                for &a in &prev {
                    for &c in &commutators {
                        cur.insert(g.mul(a, c));
                    }
                }
                reachable.push(cur);
            }
            let table = commutator_length_table(&g);
            for e in g.elements() {
                let direct = (0..=3).find(|&n| reachable[n].contains(&e));
                match (direct, table[e]) {
                    (Some(n), Some(m)) => assert_eq!(n, m, "element {e}"),
                    (None, Some(m)) => assert!(m > 3),
                    (None, None) => {}
                    (Some(_), None) => panic!("BFS missed element {e}"),
                }
            }
        }
    }

    #[test]
    fn subadditivity_spot_check() {
        let g = catalog::symmetric(4);
        let table = commutator_length_table(&g);
        for a in g.elements() {
            for b in g.elements() {
                if let (Some(ca), Some(cb)) = (table[a], table[b]) {
                    let cab = table[g.mul(a, b)].expect("product stays in C(G)");
                    assert!(cab <= ca + cb);
                }
            }
        }
    }

    #[test]
    fn quotient_of_s3_by_a3() {
        let s3 = catalog::symmetric(3);
        let a3 = s3.commutator_subgroup();
        let (q, coset_of) = s3.quotient_by_normal(&a3.elements).unwrap();
        assert_eq!(q.order(), 2);
        for &e in &a3.elements {
            assert_eq!(coset_of[e], coset_of[s3.identity()]);
        }
    }

    #[test]
    fn direct_product_structure() {
        let z2 = catalog::cyclic(2);
        let z3 = catalog::cyclic(3);
        let prod = z2.direct_product(&z3);
        assert_eq!(prod.order(), 6);
        assert!(prod.is_abelian());
        // (1,1) has order 6
        let gen = 1 * 3 + 1;
        assert_eq!(prod.element_order(gen), 6);
    }

    #[test]
    fn wire_format_round_trip() {
        let s3 = catalog::symmetric(3);
        let s = serde_json::to_string(&s3).unwrap();
        let back: FiniteGroup = serde_json::from_str(&s).unwrap();
        assert_eq!(back.order(), 6);
        assert!(!back.is_abelian());
    }
}
