use serde::Serialize;
use thiserror::Error;

use crate::group::{GroupElement, GroupObject};
use crate::tower::{Thread, Tower, TowerError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecursionError {
    #[error("oracle violated its contract: {0}")]
    OracleViolation(String),
    #[error("window {0} is too small, need at least 2")]
    WindowTooSmall(usize),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// Access to a subgroup `F` of the windowed limit through its projections:
/// given a level and a target in that level's image, produce an element of
/// `F` (as a window thread) hitting it. `F` itself is never materialized;
/// the callers re-verify every projection contract.
pub trait LiftOracle {
    fn lift(
        &self,
        level: usize,
        target: &GroupElement,
        window: usize,
    ) -> Result<Thread, RecursionError>;
}

/// The canonical oracle for product-accumulation towers: a target in a
/// level is lifted to the thread that carries it unchanged and pads all
/// deeper coordinates with identities. This is the coordinatewise extension
/// device: each padded coordinate extends an expression by trivial factors.
pub struct PaddingOracle<'a> {
    pub tower: &'a Tower,
}

impl LiftOracle for PaddingOracle<'_> {
    fn lift(
        &self,
        level: usize,
        target: &GroupElement,
        window: usize,
    ) -> Result<Thread, RecursionError> {
        let level_group = self.tower.level(level)?;
        if !level_group.contains(target) {
            return Err(RecursionError::BadInput("target outside its level".into()));
        }
        let GroupElement::Product(target_parts) = target else {
            return Err(RecursionError::BadInput(
                "padding oracle needs product-shaped levels".into(),
            ));
        };
        let mut values = Vec::with_capacity(window + 1);
        for m in 0..=window {
            let group_m = self.tower.level(m)?;
            let GroupObject::Product(components) = &group_m else {
                return Err(RecursionError::BadInput(
                    "padding oracle needs product-shaped levels".into(),
                ));
            };
            let parts: Vec<GroupElement> = components
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i < target_parts.len() {
                        target_parts[i].clone()
                    } else {
                        c.identity()
                    }
                })
                .collect();
            values.push(GroupElement::Product(parts));
        }
        Ok(Thread { values })
    }
}

/// Outcome of pushing a thread into its coset representative that vanishes
/// below a level: `lifted` agrees with the input modulo `F` and projects to
/// the identity strictly below `level`.
#[derive(Debug, Clone)]
pub struct VanishingLift {
    pub level: usize,
    pub lifted: Thread,
    /// the oracle's element of `F` used to translate the coset
    pub coset_witness: Thread,
}

/// Translate `f` inside its `F`-coset so that everything below `level`
/// becomes the identity. Both postconditions (`F f̄ = F f` via the recorded
/// witness, and vanishing below the level) are re-verified.
pub fn lift_vanishing_below(
    tower: &Tower,
    oracle: &dyn LiftOracle,
    f: &Thread,
    level: usize,
    window: usize,
) -> Result<VanishingLift, RecursionError> {
    if f.depth() != window {
        return Err(RecursionError::BadInput(format!(
            "thread depth {} does not match window {window}",
            f.depth()
        )));
    }
    if !f.verify(tower)? {
        return Err(RecursionError::BadInput("input thread is incompatible".into()));
    }
    if level == 0 {
        return Ok(VanishingLift {
            level,
            lifted: f.clone(),
            coset_witness: tower.thread_identity(window)?,
        });
    }
    let target = f.value(level - 1).clone();
    let witness = oracle.lift(level - 1, &target, window)?;
    // re-verify the oracle contract
    if witness.depth() != window {
        return Err(RecursionError::OracleViolation("wrong window depth".into()));
    }
    if !witness.verify(tower)? {
        return Err(RecursionError::OracleViolation("witness is not a thread".into()));
    }
    if witness.value(level - 1) != &target {
        return Err(RecursionError::OracleViolation(
            "witness does not project onto the target".into(),
        ));
    }
    let lifted = tower.thread_mul(&tower.thread_inv(&witness)?, f)?;
    // postcondition: identity strictly below the level
    for i in 0..level {
        if lifted.value(i) != &tower.level(i)?.identity() {
            return Err(RecursionError::OracleViolation(format!(
                "lift fails to vanish at level {i}"
            )));
        }
    }
    Ok(VanishingLift { level, lifted, coset_witness: witness })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridChecks {
    /// entries with n > l are the identity
    pub base_case: bool,
    /// the defining recursion holds at every grid point
    pub recursion_identity: bool,
    /// every grid row assembles into a compatible thread
    pub thread_compatibility: bool,
    /// the assembled threads satisfy g_n = f̄_n · g_{n+1}^{n+1}
    pub quotient_equation: bool,
}

impl GridChecks {
    pub fn all(&self) -> bool {
        self.base_case && self.recursion_identity && self.thread_compatibility && self.quotient_equation
    }
}

/// The filled recursion grid `ḡ_{n,l}` with its lifts and check matrix.
#[derive(Debug, Clone)]
pub struct RecursionGrid {
    pub window: usize,
    pub lifts: Vec<VanishingLift>,
    /// entries[n][l] for n in 0..=window+1, l in 0..=window; row window+1
    /// is the all-identity base row
    pub entries: Vec<Vec<GroupElement>>,
    pub checks: GridChecks,
}

impl RecursionGrid {
    /// The thread assembled from grid row `n`.
    pub fn row_thread(&self, n: usize) -> Thread {
        Thread { values: self.entries[n].clone() }
    }
}

/// Run the double recursion over the window: lift every `f_n` into its
/// vanishing representative, fill `ḡ_{n,l} = φ_l(f̄_n) · ḡ_{n+1,l}^{n+1}`
/// downward from the base row, and re-verify all four structural checks.
pub fn theorem33_recursion(
    tower: &Tower,
    oracle: &dyn LiftOracle,
    f_seq: &[Thread],
    window: usize,
) -> Result<RecursionGrid, RecursionError> {
    if window < 2 {
        return Err(RecursionError::WindowTooSmall(window));
    }
    if f_seq.len() != window + 1 {
        return Err(RecursionError::BadInput(format!(
            "need f_0..f_{window}, got {} threads",
            f_seq.len()
        )));
    }
    let mut lifts = Vec::with_capacity(window + 1);
    for (n, f) in f_seq.iter().enumerate() {
        lifts.push(lift_vanishing_below(tower, oracle, f, n, window)?);
    }
    // base row n = window + 1: identities everywhere
    let mut entries = vec![Vec::new(); window + 2];
    entries[window + 1] =
        (0..=window).map(|l| tower.level(l).map(|g| g.identity())).collect::<Result<_, _>>()?;
    for n in (0..=window).rev() {
        let mut row = Vec::with_capacity(window + 1);
        for l in 0..=window {
            let level = tower.level(l)?;
            if n > l {
                row.push(level.identity());
                continue;
            }
            let phi = lifts[n].lifted.value(l);
            let next = &entries[n + 1][l];
            let value = level.mul(phi, &level.pow(next, n as i64 + 1));
            row.push(value);
        }
        entries[n] = row;
    }

    // (i) base case
    let mut base_case = entries[window + 1].iter().enumerate().all(|(l, v)| {
        tower.level(l).map(|g| *v == g.identity()).unwrap_or(false)
    });
    for n in 0..=window {
        for l in 0..=window {
            if n > l {
                base_case &= entries[n][l]
                    == tower.level(l).map(|g| g.identity()).unwrap_or_else(|_| entries[n][l].clone());
            }
        }
    }
    // (ii) recursion identity at every grid point
    let mut recursion_identity = true;
    for n in 0..=window {
        for l in 0..=window {
            let level = tower.level(l)?;
            let expect = level.mul(
                lifts[n].lifted.value(l),
                &level.pow(&entries[n + 1][l], n as i64 + 1),
            );
            if entries[n][l] != expect {
                recursion_identity = false;
            }
        }
    }
    // (iii) rows are threads
    let mut thread_compatibility = true;
    for n in 0..=window {
        let thread = Thread { values: entries[n].clone() };
        if !thread.verify(tower)? {
            thread_compatibility = false;
        }
    }
    // (iv) the quotient equation, checked on the assembled threads
    let mut quotient_equation = true;
    for n in 0..window {
        let g_n = Thread { values: entries[n].clone() };
        let g_next = Thread { values: entries[n + 1].clone() };
        let rhs = tower.thread_mul(
            &lifts[n].lifted,
            &tower.thread_pow(&g_next, n as i64 + 1)?,
        )?;
        if g_n != rhs {
            quotient_equation = false;
        }
    }

    Ok(RecursionGrid {
        window,
        lifts,
        entries,
        checks: GridChecks { base_case, recursion_identity, thread_compatibility, quotient_equation },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{catalog, GroupObject};
    use crate::tower::commutator_tower;

    /// The derived tower of the S3 accumulation: level n is A3^{n+1}.
    fn a3_tower() -> Tower {
        let s3 = GroupObject::finite(catalog::symmetric(3));
        let g = Tower::product_accumulation(vec![s3]).unwrap();
        commutator_tower(&g, 0).unwrap()
    }

    fn diagonal_thread(tower: &Tower, component: usize, window: usize) -> Thread {
        let values = (0..=window)
            .map(|l| {
                let GroupObject::Product(cs) = tower.level(l).unwrap() else { panic!() };
                GroupElement::Product(
                    cs.iter().map(|_| GroupElement::Finite(component)).collect(),
                )
            })
            .collect();
        Thread { values }
    }

    #[test]
    fn padding_oracle_projects_correctly() {
        let t = a3_tower();
        let oracle = PaddingOracle { tower: &t };
        let target = t.level(2).unwrap().element_at(5).unwrap();
        let thread = oracle.lift(2, &target, 5).unwrap();
        assert!(thread.verify(&t).unwrap());
        assert_eq!(thread.value(2), &target);
        // deeper coordinates are padded with identities
        let GroupElement::Product(parts) = thread.value(4) else { panic!() };
        assert_eq!(parts.len(), 5);
        assert_eq!(parts[3], GroupElement::Finite(0));
        assert_eq!(parts[4], GroupElement::Finite(0));
    }

    #[test]
    fn lift_at_level_zero_is_identity_translation() {
        let t = a3_tower();
        let oracle = PaddingOracle { tower: &t };
        let f = diagonal_thread(&t, 1, 4);
        assert!(f.verify(&t).unwrap());
        let lift = lift_vanishing_below(&t, &oracle, &f, 0, 4).unwrap();
        assert_eq!(lift.lifted, f);
    }

    #[test]
    fn lift_vanishes_below_its_level() {
        let t = a3_tower();
        let oracle = PaddingOracle { tower: &t };
        let f = diagonal_thread(&t, 1, 4);
        let lift = lift_vanishing_below(&t, &oracle, &f, 2, 4).unwrap();
        for i in 0..2 {
            assert_eq!(lift.lifted.value(i), &t.level(i).unwrap().identity());
        }
        // the coset witness recorded is the oracle's element
        assert_eq!(lift.coset_witness.value(1), f.value(1));
    }

    #[test]
    fn lift_of_identity_thread_is_identity() {
        let t = a3_tower();
        let oracle = PaddingOracle { tower: &t };
        let e = t.thread_identity(4).unwrap();
        let lift = lift_vanishing_below(&t, &oracle, &e, 3, 4).unwrap();
        assert_eq!(lift.lifted, e);
    }

    #[test]
    fn recursion_grid_on_identity_inputs() {
        let t = a3_tower();
        let oracle = PaddingOracle { tower: &t };
        let f_seq: Vec<Thread> = (0..=4).map(|_| t.thread_identity(4).unwrap()).collect();
        let grid = theorem33_recursion(&t, &oracle, &f_seq, 4).unwrap();
        assert!(grid.checks.all());
        for row in &grid.entries {
            for (l, v) in row.iter().enumerate() {
                assert_eq!(v, &t.level(l).unwrap().identity());
            }
        }
    }

    #[test]
    fn recursion_grid_on_diagonal_threads() {
        let t = a3_tower();
        let oracle = PaddingOracle { tower: &t };
        let window = 4;
        let f_seq: Vec<Thread> =
            (0..=window).map(|_| diagonal_thread(&t, 1, window)).collect();
        let grid = theorem33_recursion(&t, &oracle, &f_seq, window).unwrap();
        assert!(grid.checks.base_case, "base case");
        assert!(grid.checks.recursion_identity, "recursion identity");
        assert!(grid.checks.thread_compatibility, "thread compatibility");
        assert!(grid.checks.quotient_equation, "quotient equation");
    }

    #[test]
    fn window_too_small_is_rejected() {
        let t = a3_tower();
        let oracle = PaddingOracle { tower: &t };
        let f_seq: Vec<Thread> = (0..=1).map(|_| t.thread_identity(1).unwrap()).collect();
        assert!(matches!(
            theorem33_recursion(&t, &oracle, &f_seq, 1),
            Err(RecursionError::WindowTooSmall(1))
        ));
    }

    /// An oracle that ignores its target exposes the contract re-check.
    struct BrokenOracle<'a> {
        tower: &'a Tower,
    }

    impl LiftOracle for BrokenOracle<'_> {
        fn lift(
            &self,
            _level: usize,
            _target: &GroupElement,
            window: usize,
        ) -> Result<Thread, RecursionError> {
            Ok(self.tower.thread_identity(window).map_err(RecursionError::from)?)
        }
    }

    #[test]
    fn oracle_violations_are_caught() {
        let t = a3_tower();
        let oracle = BrokenOracle { tower: &t };
        let f = diagonal_thread(&t, 1, 4);
        assert!(matches!(
            lift_vanishing_below(&t, &oracle, &f, 2, 4),
            Err(RecursionError::OracleViolation(_))
        ));
    }
}
