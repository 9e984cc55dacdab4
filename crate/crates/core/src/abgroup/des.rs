use std::collections::BTreeMap;

use num_bigint::BigInt;
use thiserror::Error;

use super::fgab::{is_prime, p_length, AbElement, AbGroupError, FgAbGroup};

/// Strictly descending tuple below a bound `lambda`, including the empty
/// tuple. `min()` of the empty tuple is `lambda` itself.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DesTuple {
    lambda: u64,
    entries: Vec<u64>,
}

impl DesTuple {
    pub fn new(lambda: u64, entries: Vec<u64>) -> Option<Self> {
        let mut prev = lambda;
        for &e in &entries {
            if e >= prev {
                return None;
            }
            prev = e;
        }
        Some(DesTuple { lambda, entries })
    }

    pub fn empty(lambda: u64) -> Self {
        DesTuple { lambda, entries: vec![] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// The last entry, or `lambda` for the empty tuple.
    pub fn min_value(&self) -> u64 {
        self.entries.last().copied().unwrap_or(self.lambda)
    }

    /// Truncation to the first `m` entries.
    pub fn prefix(&self, m: usize) -> DesTuple {
        assert!(m <= self.len());
        DesTuple { lambda: self.lambda, entries: self.entries[..m].to_vec() }
    }

    /// Extension by one more, strictly smaller entry.
    pub fn push(&self, next: u64) -> Option<DesTuple> {
        if next >= self.min_value() {
            return None;
        }
        let mut entries = self.entries.clone();
        entries.push(next);
        Some(DesTuple { lambda: self.lambda, entries })
    }
}

/// All strictly descending tuples below `lambda` of length at most
/// `max_len`, in breadth-first order starting from the empty tuple.
pub fn des_tuples(lambda: u64, max_len: usize) -> Vec<DesTuple> {
    let mut out = vec![DesTuple::empty(lambda)];
    let mut frontier = vec![DesTuple::empty(lambda)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for t in &frontier {
            for e in (0..t.min_value()).rev() {
                let ext = t.push(e).expect("strictly smaller");
                out.push(ext.clone());
                next.push(ext);
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("element does not lie in p^{k} of the group")]
    NotInPkH { k: u64 },
    #[error("group must be finite for witness search")]
    NotFinite,
    #[error(transparent)]
    Group(#[from] AbGroupError),
}

/// Tree of divisibility witnesses indexed by descending tuples below `k`:
/// the root carries `x`, and the node for `μ` extended by one entry carries
/// a p-th root of its parent inside `p^{min(μ)} H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTree {
    pub lambda: u64,
    pub nodes: BTreeMap<DesTuple, AbElement>,
}

impl WitnessTree {
    /// Node-by-node re-check of both defining conditions plus membership of
    /// every node in its prescribed power subgroup.
    pub fn verify(&self, h: &FgAbGroup, p: u64) -> bool {
        let Some(root) = self.nodes.get(&DesTuple::empty(self.lambda)) else {
            return false;
        };
        if !h.in_p_power_subgroup(root, p, self.lambda) {
            return false;
        }
        for (key, value) in &self.nodes {
            if !h.in_p_power_subgroup(value, p, key.min_value()) {
                return false;
            }
            if key.len() > 0 {
                let parent = key.prefix(key.len() - 1);
                let Some(parent_value) = self.nodes.get(&parent) else {
                    return false;
                };
                if value.scalar_mul(&BigInt::from(p)) != *parent_value {
                    return false;
                }
            }
        }
        true
    }
}

/// Recursive preimage search: build the full witness tree over `des(k)` for
/// an element `x` of `p^k H` in a finite group `H`.
pub fn divisibility_witness_tree(
    h: &FgAbGroup,
    x: &AbElement,
    p: u64,
    k: u64,
) -> Result<WitnessTree, WitnessError> {
    if !is_prime(p) {
        return Err(WitnessError::Group(AbGroupError::NotPrime(p)));
    }
    if !h.is_finite() {
        return Err(WitnessError::NotFinite);
    }
    if !h.in_p_power_subgroup(x, p, k) {
        return Err(WitnessError::NotInPkH { k });
    }
    let elements = h.elements().ok_or(WitnessError::NotFinite)?;
    let bigp = BigInt::from(p);
    let mut nodes = BTreeMap::new();
    nodes.insert(DesTuple::empty(k), x.clone());
    for tuple in des_tuples(k, k as usize) {
        if tuple.is_empty() {
            continue;
        }
        let parent = tuple.prefix(tuple.len() - 1);
        let parent_value = nodes.get(&parent).expect("breadth-first order fills parents first").clone();
        // want z in p^{min(μ)} H with p z = parent; the parent lies in
        // p^{min(parent)} H ⊆ p^{min(μ)+1} H, so a preimage exists
        let target_power = tuple.min_value();
        let z = elements
            .iter()
            .find(|z| {
                h.in_p_power_subgroup(z, p, target_power)
                    && z.scalar_mul(&bigp) == parent_value
            })
            .cloned()
            .ok_or(WitnessError::NotInPkH { k })?;
        nodes.insert(tuple, z);
    }
    let tree = WitnessTree { lambda: k, nodes };
    debug_assert!(tree.verify(h, p));
    Ok(tree)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThreadCheckError {
    #[error("thread broken at index {index}: y_{index} != p * y_{}", index + 1)]
    ThreadBroken { index: usize },
    #[error(transparent)]
    Group(#[from] AbGroupError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadCheckReport {
    pub thread_len: usize,
    pub p_length: u64,
    /// set when the thread was long enough to trigger the membership check
    pub membership_checked: bool,
    /// `y_0 ∈ p^{l_p(A)} A`; anything but `true` after a successful check
    /// is a bug signal upstream
    pub membership_holds: bool,
}

/// Check a p-division chain `y_m = p · y_{m+1}` and, when the chain is at
/// least as long as the p-length of the group, confirm that `y_0` lands in
/// the stabilized power subgroup.
pub fn p_divisible_thread_check(
    a: &FgAbGroup,
    ys: &[AbElement],
    p: u64,
) -> Result<ThreadCheckReport, ThreadCheckError> {
    if !is_prime(p) {
        return Err(ThreadCheckError::Group(AbGroupError::NotPrime(p)));
    }
    let bigp = BigInt::from(p);
    for (index, pair) in ys.windows(2).enumerate() {
        if pair[1].scalar_mul(&bigp) != pair[0] {
            return Err(ThreadCheckError::ThreadBroken { index });
        }
    }
    let lp = p_length(a, p)?;
    debug_assert!(lp.is_finite(), "finite groups have finite p-length");
    let lp = lp.finite;
    let long_enough = !ys.is_empty() && (ys.len() as u64 - 1) >= lp;
    let membership_holds = if long_enough {
        a.in_p_power_subgroup(&ys[0], p, lp)
    } else {
        false
    };
    Ok(ThreadCheckReport {
        thread_len: ys.len(),
        p_length: lp,
        membership_checked: long_enough,
        membership_holds,
    })
}
