use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::finite::{commutator_length_table, FiniteGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeWordError {
    #[error("generator index {0} out of range for rank {1}")]
    GeneratorOutOfRange(usize, usize),
    #[error("cannot parse word {0:?}: rank supports letters a..{1}")]
    Parse(String, char),
    #[error("word has nonzero exponent sums, not in the commutator subgroup")]
    NotInCommutatorSubgroup,
}

/// Freely reduced word in the free group of the given rank. Letters are
/// `(generator, ±1)` pairs with no adjacent cancelling pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "WordWire", into = "WordWire")]
pub struct FreeWord {
    rank: usize,
    letters: Vec<(usize, i8)>,
}

/// Wire form: rank plus compact string like `"abAB"` (capitals are
/// inverses, `rank` defaults from the letters used).
#[derive(Serialize, Deserialize)]
struct WordWire {
    #[serde(default)]
    rank: Option<usize>,
    word: String,
}

impl TryFrom<WordWire> for FreeWord {
    type Error = FreeWordError;
    fn try_from(w: WordWire) -> Result<Self, Self::Error> {
        let min_rank = w
            .word
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .map(|c| (c.to_ascii_lowercase() as usize) - ('a' as usize) + 1)
            .max()
            .unwrap_or(0);
        let rank = w.rank.unwrap_or(min_rank.max(2));
        FreeWord::parse(rank, &w.word)
    }
}

impl From<FreeWord> for WordWire {
    fn from(w: FreeWord) -> Self {
        WordWire { rank: Some(w.rank), word: w.to_string() }
    }
}

impl FreeWord {
    pub fn identity(rank: usize) -> Self {
        FreeWord { rank, letters: vec![] }
    }

    pub fn generator(rank: usize, i: usize) -> Result<Self, FreeWordError> {
        if i >= rank {
            return Err(FreeWordError::GeneratorOutOfRange(i, rank));
        }
        Ok(FreeWord { rank, letters: vec![(i, 1)] })
    }

    /// Build from raw letters, reducing as needed.
    pub fn from_letters(
        rank: usize,
        letters: impl IntoIterator<Item = (usize, i8)>,
    ) -> Result<Self, FreeWordError> {
        let mut out: Vec<(usize, i8)> = Vec::new();
        for (g, e) in letters {
            if g >= rank {
                return Err(FreeWordError::GeneratorOutOfRange(g, rank));
            }
            debug_assert!(e == 1 || e == -1);
            if let Some(&(lg, le)) = out.last() {
                if lg == g && le == -e {
                    out.pop();
                    continue;
                }
            }
            out.push((g, e));
        }
        Ok(FreeWord { rank, letters: out })
    }

    /// Parse `"abA"`-style words: lowercase letters are generators,
    /// uppercase their inverses. `""` and `"e"` denote the identity.
    pub fn parse(rank: usize, s: &str) -> Result<Self, FreeWordError> {
        let max_char = (b'a' + (rank.min(26) as u8).saturating_sub(1)) as char;
        if s == "e" || s.is_empty() {
            return Ok(Self::identity(rank));
        }
        let mut letters = Vec::new();
        for c in s.chars() {
            if c.is_whitespace() || c == '*' {
                continue;
            }
            if !c.is_ascii_alphabetic() {
                return Err(FreeWordError::Parse(s.into(), max_char));
            }
            let lower = c.to_ascii_lowercase();
            let g = (lower as usize) - ('a' as usize);
            if g >= rank {
                return Err(FreeWordError::Parse(s.into(), max_char));
            }
            letters.push((g, if c.is_ascii_lowercase() { 1 } else { -1 }));
        }
        Self::from_letters(rank, letters)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.letters
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        assert_eq!(self.rank, other.rank, "rank mismatch");
        Self::from_letters(self.rank, self.letters.iter().chain(&other.letters).copied())
            .expect("letters already validated")
    }

    pub fn inv(&self) -> FreeWord {
        let letters = self.letters.iter().rev().map(|&(g, e)| (g, -e));
        Self::from_letters(self.rank, letters).expect("letters already validated")
    }

    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let mut out = Self::identity(self.rank);
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn conjugate_by(&self, u: &FreeWord) -> FreeWord {
        u.mul(self).mul(&u.inv())
    }

    pub fn commutator(x: &FreeWord, y: &FreeWord) -> FreeWord {
        x.inv().mul(&y.inv()).mul(x).mul(y)
    }

    pub fn exponent_sums(&self) -> Vec<i64> {
        let mut sums = vec![0i64; self.rank];
        for &(g, e) in &self.letters {
            sums[g] += e as i64;
        }
        sums
    }

    /// `self = u * core * u^{-1}` with `core` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (FreeWord, FreeWord) {
        let mut letters = self.letters.clone();
        let mut conj: Vec<(usize, i8)> = Vec::new();
        while letters.len() >= 2 {
            let first = letters[0];
            let last = *letters.last().unwrap();
            if first.0 == last.0 && first.1 == -last.1 {
                conj.push(first);
                letters.remove(0);
                letters.pop();
            } else {
                break;
            }
        }
        let core = FreeWord { rank: self.rank, letters };
        let u = Self::from_letters(self.rank, conj).expect("validated");
        (core, u)
    }

    /// Left rotation by `r` letters; meaningful on cyclically reduced words.
    pub fn rotate(&self, r: usize) -> FreeWord {
        if self.letters.is_empty() {
            return self.clone();
        }
        let r = r % self.letters.len();
        let letters: Vec<_> =
            self.letters[r..].iter().chain(&self.letters[..r]).copied().collect();
        FreeWord { rank: self.rank, letters }
    }

    fn prefix(&self, n: usize) -> FreeWord {
        FreeWord { rank: self.rank, letters: self.letters[..n].to_vec() }
    }

    /// Evaluate the word in a finite group at the given generator images.
    pub fn evaluate(&self, g: &FiniteGroup, images: &[usize]) -> usize {
        assert_eq!(images.len(), self.rank);
        let mut acc = g.identity();
        for &(gen, e) in &self.letters {
            let x = if e > 0 { images[gen] } else { g.inv(images[gen]) };
            acc = g.mul(acc, x);
        }
        acc
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for &(g, e) in &self.letters {
            let c = (b'a' + g as u8) as char;
            if e > 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{}", c.to_ascii_uppercase())?;
            }
        }
        Ok(())
    }
}

/// Concrete factorization `w = [x, y]`, re-verified by reduction before it
/// leaves this module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutatorWitness {
    pub x: FreeWord,
    pub y: FreeWord,
}

/// Single-commutator test: after cyclic reduction, some rotation must split
/// literally as `A B C A^{-1} B^{-1} C^{-1}` with possibly empty blocks.
/// Exhaustive over all rotations and split points.
pub fn single_commutator_witness(w: &FreeWord) -> Option<CommutatorWitness> {
    // nonzero abelianization shortcut
    if w.exponent_sums().iter().any(|&s| s != 0) {
        return None;
    }
    let (core, u) = w.cyclic_reduce();
    let len = core.len();
    if len % 2 != 0 {
        return None;
    }
    if len == 0 {
        let e = FreeWord::identity(w.rank());
        return Some(CommutatorWitness { x: e.clone(), y: e });
    }
    let half = len / 2;
    let inv_at = |v: &FreeWord, from: usize, to: usize| -> Vec<(usize, i8)> {
        v.letters()[from..to].iter().rev().map(|&(g, e)| (g, -e)).collect()
    };
    for r in 0..len {
        let v = core.rotate(r);
        for i in 0..=half {
            for j in i..=half {
                // blocks A = v[0..i], B = v[i..j], C = v[j..half]
                let mut expect: Vec<(usize, i8)> = inv_at(&v, 0, i);
                expect.extend(inv_at(&v, i, j));
                expect.extend(inv_at(&v, j, half));
                if v.letters()[half..] != expect[..] {
                    continue;
                }
                let a = v.prefix(i);
                let b = FreeWord { rank: v.rank, letters: v.letters()[i..j].to_vec() };
                let c = FreeWord { rank: v.rank, letters: v.letters()[j..half].to_vec() };
                // [A·B, C·A^{-1}] equals a rotation of the core; locate it
                // and conjugate back
                let x0 = a.mul(&b);
                let y0 = c.mul(&a.inv());
                let z = FreeWord::commutator(&x0, &y0);
                let Some(rot) = (0..len).find(|&k| core.rotate(k) == z) else {
                    continue;
                };
                let conj = u.mul(&core.prefix(rot));
                let witness = CommutatorWitness {
                    x: x0.conjugate_by(&conj),
                    y: y0.conjugate_by(&conj),
                };
                // re-verify by reduction before returning
                if FreeWord::commutator(&witness.x, &witness.y) == *w {
                    return Some(witness);
                }
            }
        }
    }
    None
}

pub fn is_single_commutator(w: &FreeWord) -> bool {
    single_commutator_witness(w).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeClOptions {
    /// largest number of commutator factors to try
    pub max_n: usize,
    /// factor words are enumerated up to this length
    pub factor_len_bound: usize,
    /// deterministic work cap, counted in first-factor candidates
    pub node_budget: u64,
}

impl Default for FreeClOptions {
    fn default() -> Self {
        FreeClOptions { max_n: 3, factor_len_bound: 8, node_budget: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FreeClResult {
    Exact(usize),
    Bounds { lower: usize, upper: Option<usize> },
}

#[derive(Debug, Clone)]
pub struct FreeClReport {
    pub result: FreeClResult,
    /// factor pairs of a successful decomposition, re-verified by reduction
    pub witness: Option<Vec<(FreeWord, FreeWord)>>,
    /// where the lower bound came from
    pub lower_bound_source: String,
    pub nodes_used: u64,
}

/// Reduced words of length <= max over the given rank, in deterministic
/// order (by length, then letters).
fn reduced_words_up_to(rank: usize, max: usize) -> Vec<FreeWord> {
    let mut out = vec![FreeWord::identity(rank)];
    let mut layer = vec![FreeWord::identity(rank)];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for g in 0..rank {
                for e in [1i8, -1] {
                    if let Some(&(lg, le)) = w.letters().last() {
                        if lg == g && le == -e {
                            continue;
                        }
                    }
                    let mut letters = w.letters().to_vec();
                    letters.push((g, e));
                    next.push(FreeWord { rank, letters });
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Best sound lower bound from finite quotients: commutator length never
/// increases under a homomorphism, so the image length in any finite group
/// is a lower bound. Scans all generator-image pairs.
pub fn quotient_lower_bound(w: &FreeWord, quotients: &[FiniteGroup]) -> usize {
    assert_eq!(w.rank(), 2, "quotient certificates are wired for rank 2");
    let mut best = 0;
    for g in quotients {
        let table = commutator_length_table(g);
        for ga in g.elements() {
            for gb in g.elements() {
                let image = w.evaluate(g, &[ga, gb]);
                if let Some(cl) = table[image] {
                    best = best.max(cl);
                }
            }
        }
    }
    best
}

/// Search for `w = [x_1, y_1] ... [x_n, y_n]` with all factors of length
/// <= `len`, trying first factors in enumeration order and closing with the
/// single-commutator test. Returns the factor list on success.
fn search_product(
    w: &FreeWord,
    n: usize,
    len: usize,
    words: &[FreeWord],
    wicks_cache: &mut HashMap<FreeWord, Option<CommutatorWitness>>,
    budget: &mut u64,
) -> Option<Vec<(FreeWord, FreeWord)>> {
    if n == 1 {
        let witness = wicks_cache
            .entry(w.clone())
            .or_insert_with(|| single_commutator_witness(w))
            .clone()?;
        return Some(vec![(witness.x, witness.y)]);
    }
    for x in words.iter().filter(|x| x.len() <= len) {
        for y in words.iter().filter(|y| y.len() <= len) {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            let c = FreeWord::commutator(x, y);
            if c.is_empty() {
                // an identity factor never helps at minimal n
                continue;
            }
            let rest = c.inv().mul(w);
            if let Some(mut tail) = search_product(&rest, n - 1, len, words, wicks_cache, budget) {
                let mut out = vec![(x.clone(), y.clone())];
                out.append(&mut tail);
                return Some(out);
            }
        }
    }
    None
}

/// Commutator length in the free group: exact when a sound lower bound
/// meets a search upper bound, honest bounds otherwise.
pub fn commutator_length_free(
    w: &FreeWord,
    opts: FreeClOptions,
    quotients: &[FiniteGroup],
) -> Result<FreeClReport, FreeWordError> {
    if w.exponent_sums().iter().any(|&s| s != 0) {
        return Err(FreeWordError::NotInCommutatorSubgroup);
    }
    if w.is_empty() {
        return Ok(FreeClReport {
            result: FreeClResult::Exact(0),
            witness: Some(vec![]),
            lower_bound_source: "identity".into(),
            nodes_used: 0,
        });
    }
    if let Some(witness) = single_commutator_witness(w) {
        debug_assert_eq!(FreeWord::commutator(&witness.x, &witness.y), *w);
        return Ok(FreeClReport {
            result: FreeClResult::Exact(1),
            witness: Some(vec![(witness.x, witness.y)]),
            lower_bound_source: "single-commutator normal form".into(),
            nodes_used: 0,
        });
    }
    let quotient_lb = quotient_lower_bound(w, quotients);
    let (lower, lower_bound_source) = if quotient_lb > 2 {
        (quotient_lb, "finite quotient certificate".to_string())
    } else {
        (2, "normal-form rejection".to_string())
    };

    let mut budget = opts.node_budget;
    let mut wicks_cache: HashMap<FreeWord, Option<CommutatorWitness>> = HashMap::new();
    let mut upper: Option<usize> = None;
    let mut witness = None;
    'outer: for n in 2..=opts.max_n {
        for len in 1..=opts.factor_len_bound {
            let words = reduced_words_up_to(w.rank(), len);
            if let Some(factors) =
                search_product(w, n, len, &words, &mut wicks_cache, &mut budget)
            {
                // re-verify the full product before trusting it
                let mut acc = FreeWord::identity(w.rank());
                for (x, y) in &factors {
                    acc = acc.mul(&FreeWord::commutator(x, y));
                }
                assert_eq!(acc, *w, "search produced a bad decomposition");
                upper = Some(n);
                witness = Some(factors);
                break 'outer;
            }
            if budget == 0 {
                break 'outer;
            }
        }
    }
    let result = match upper {
        Some(u) if u == lower => FreeClResult::Exact(u),
        u => FreeClResult::Bounds { lower, upper: u },
    };
    Ok(FreeClReport {
        result,
        witness,
        lower_bound_source,
        nodes_used: opts.node_budget - budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;

    fn w(s: &str) -> FreeWord {
        FreeWord::parse(2, s).unwrap()
    }

    #[test]
    fn reduction_and_parsing() {
        assert_eq!(w("aA"), FreeWord::identity(2));
        assert_eq!(w("abBA"), FreeWord::identity(2));
        assert_eq!(w("aab Ba").to_string(), "aaa"); // bB cancels, then aa·a
        assert_eq!(w("ab").inv().to_string(), "BA");
        assert_eq!(w("ab").mul(&w("BA")), FreeWord::identity(2));
    }

    #[test]
    fn commutator_definition() {
        let a = FreeWord::generator(2, 0).unwrap();
        let b = FreeWord::generator(2, 1).unwrap();
        assert_eq!(FreeWord::commutator(&a, &b).to_string(), "ABab");
        // commutator with the identity is the identity
        let e = FreeWord::identity(2);
        assert!(FreeWord::commutator(&e, &b).is_empty());
    }

    #[test]
    fn cyclic_reduction() {
        let word = w("aabAA"); // a^2 b a^-2 = a^2 * (b) * a^-2 ... core is b after two peels? no: aabAA
        let (core, u) = word.cyclic_reduce();
        assert_eq!(u.mul(&core).mul(&u.inv()), word);
        // aabAA -> peel a: abA -> peel a: b
        assert_eq!(core.to_string(), "b");
        assert_eq!(u.to_string(), "aa");
    }

    #[test]
    fn basic_commutator_is_accepted() {
        let c = w("ABab");
        let witness = single_commutator_witness(&c).expect("[a,b] is a commutator");
        assert_eq!(FreeWord::commutator(&witness.x, &witness.y), c);
    }

    #[test]
    fn conjugates_of_commutators_are_accepted() {
        let c = w("ABab");
        for conj in ["a", "ba", "aB"] {
            let u = w(conj);
            let word = c.conjugate_by(&u);
            let witness = single_commutator_witness(&word).expect("conjugate of a commutator");
            assert_eq!(FreeWord::commutator(&witness.x, &witness.y), word);
        }
    }

    #[test]
    fn squared_commutator_is_rejected() {
        let c2 = w("ABab").pow(2);
        assert!(!is_single_commutator(&c2));
    }

    #[test]
    fn nonzero_exponent_sum_shortcut() {
        assert!(!is_single_commutator(&w("aa")));
        assert!(!is_single_commutator(&w("aab")));
    }

    #[test]
    fn cl_of_basic_words() {
        let quotients = [catalog::symmetric(3), catalog::quaternion8()];
        let report =
            commutator_length_free(&w("ABab"), FreeClOptions::default(), &quotients).unwrap();
        assert_eq!(report.result, FreeClResult::Exact(1));

        let report = commutator_length_free(&FreeWord::identity(2), FreeClOptions::default(), &[])
            .unwrap();
        assert_eq!(report.result, FreeClResult::Exact(0));

        assert!(matches!(
            commutator_length_free(&w("aa"), FreeClOptions::default(), &[]),
            Err(FreeWordError::NotInCommutatorSubgroup)
        ));
    }

    #[test]
    fn cl_of_squared_commutator_is_two() {
        let c2 = w("ABab").pow(2);
        let report = commutator_length_free(&c2, FreeClOptions::default(), &[]).unwrap();
        assert_eq!(report.result, FreeClResult::Exact(2));
        let witness = report.witness.unwrap();
        assert_eq!(witness.len(), 2);
        let mut acc = FreeWord::identity(2);
        for (x, y) in &witness {
            acc = acc.mul(&FreeWord::commutator(x, y));
        }
        assert_eq!(acc, c2);
    }

    #[test]
    fn cl_of_cubed_commutator_degrades_honestly() {
        let c3 = w("ABab").pow(3);
        // max_n too small to reach the trivial triple: honest unknown upper
        let tight = FreeClOptions { max_n: 2, factor_len_bound: 1, node_budget: 10_000 };
        let report = commutator_length_free(&c3, tight, &[]).unwrap();
        assert_eq!(report.result, FreeClResult::Bounds { lower: 2, upper: None });

        // allowing three single-letter factors finds the word-by-word triple
        let wider = FreeClOptions { max_n: 3, factor_len_bound: 1, node_budget: 200_000 };
        let report = commutator_length_free(&c3, wider, &[]).unwrap();
        assert_eq!(report.result, FreeClResult::Bounds { lower: 2, upper: Some(3) });
    }

    #[test]
    fn cl_of_cubed_commutator_is_two_with_longer_factors() {
        // two-letter factors already admit a verified two-commutator
        // expression, which meets the lower bound
        let c3 = w("ABab").pow(3);
        let opts = FreeClOptions { max_n: 3, factor_len_bound: 2, node_budget: 500_000 };
        let report = commutator_length_free(&c3, opts, &[]).unwrap();
        assert_eq!(report.result, FreeClResult::Exact(2));
        let witness = report.witness.unwrap();
        assert_eq!(witness.len(), 2);
        let mut acc = FreeWord::identity(2);
        for (x, y) in &witness {
            acc = acc.mul(&FreeWord::commutator(x, y));
        }
        assert_eq!(acc, c3);
    }

    #[test]
    fn quotient_bound_is_sound() {
        // [a,b] maps to a commutator everywhere: bound <= 1
        let lb = quotient_lower_bound(&w("ABab"), &[catalog::symmetric(3), catalog::dihedral(4)]);
        assert!(lb <= 1);
    }

    #[test]
    fn word_enumeration_counts() {
        // reduced words of length <= 2 over rank 2: 1 + 4 + 12
        assert_eq!(reduced_words_up_to(2, 2).len(), 17);
    }

    #[test]
    fn wire_format() {
        let word = w("ABab");
        let s = serde_json::to_string(&word).unwrap();
        let back: FreeWord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, word);
        let manual: FreeWord = serde_json::from_str(r#"{"word":"ABab"}"#).unwrap();
        assert_eq!(manual, word);
    }
}
