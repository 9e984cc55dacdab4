use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::FgAbGroup;
use crate::group::{GroupElement, GroupHom, GroupObject, ObjectError};
use crate::linalg::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TowerError {
    #[error("level {0} is beyond the tower's defined range")]
    LevelOutOfRange(usize),
    #[error("tower shape invalid: {0}")]
    BadShape(String),
    #[error("operation unsupported for this tower: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Object(#[from] ObjectError),
}

/// How the multiplier sequence of a multiplication tower continues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MultiplierRule {
    Constant(BigInt),
    /// the map into level n multiplies by n+1 (so the sequence reads
    /// ... ->3 A ->2 A ->1 A)
    Successor,
}

impl MultiplierRule {
    /// Multiplier of the connecting map `G_{n+1} -> G_n`.
    pub fn at(&self, n: usize) -> BigInt {
        match self {
            MultiplierRule::Constant(c) => c.clone(),
            MultiplierRule::Successor => BigInt::from(n as u64 + 1),
        }
    }
}

/// Rule generating levels past the explicit prefix.
#[derive(Debug, Clone, PartialEq)]
pub enum TailRule {
    /// tower is only defined on the prefix
    None,
    /// repeat the last prefix group with identity maps
    Constant,
    /// level n is the product of components 0..=n with projection maps;
    /// the component list repeats its last entry forever
    ProductAccumulation { components: Vec<GroupObject> },
    /// every level is the same fgab group, maps multiply
    Multiplication { group: FgAbGroup, multipliers: MultiplierRule },
}

/// A tower of groups `... -> G_2 -> G_1 -> G_0`: an explicit prefix plus an
/// optional tail rule that generates deeper levels on demand.
#[derive(Debug)]
pub struct Tower {
    prefix: Vec<GroupObject>,
    maps: Vec<GroupHom>,
    tail: TailRule,
    cache: Mutex<HashMap<usize, GroupObject>>,
}

impl Clone for Tower {
    fn clone(&self) -> Self {
        Tower {
            prefix: self.prefix.clone(),
            maps: self.maps.clone(),
            tail: self.tail.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        self.prefix == other.prefix && self.maps == other.maps && self.tail == other.tail
    }
}

impl Tower {
    pub fn new(
        prefix: Vec<GroupObject>,
        maps: Vec<GroupHom>,
        tail: TailRule,
    ) -> Result<Self, TowerError> {
        if !prefix.is_empty() && maps.len() + 1 != prefix.len() {
            return Err(TowerError::BadShape(format!(
                "{} groups need {} connecting maps, got {}",
                prefix.len(),
                prefix.len() - 1,
                maps.len()
            )));
        }
        if prefix.is_empty() && !maps.is_empty() {
            return Err(TowerError::BadShape("maps without groups".into()));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.domain != prefix[i + 1] || m.codomain != prefix[i] {
                return Err(TowerError::BadShape(format!(
                    "map {i} endpoints do not match adjacent groups"
                )));
            }
        }
        match &tail {
            TailRule::Constant if prefix.is_empty() => {
                return Err(TowerError::BadShape("constant tail needs a prefix".into()));
            }
            TailRule::ProductAccumulation { components } => {
                if !prefix.is_empty() {
                    return Err(TowerError::BadShape(
                        "product-accumulation towers take no explicit prefix".into(),
                    ));
                }
                if components.is_empty() {
                    return Err(TowerError::BadShape("product tail needs components".into()));
                }
            }
            TailRule::Multiplication { .. } if !prefix.is_empty() => {
                return Err(TowerError::BadShape(
                    "multiplication towers take no explicit prefix".into(),
                ));
            }
            TailRule::None if prefix.is_empty() => {
                return Err(TowerError::BadShape("empty tower".into()));
            }
            _ => {}
        }
        Ok(Tower { prefix, maps, tail, cache: Mutex::new(HashMap::new()) })
    }

    /// Constant tower on a single group with identity maps.
    pub fn constant(group: GroupObject) -> Self {
        Tower::new(vec![group], vec![], TailRule::Constant).expect("valid shape")
    }

    pub fn product_accumulation(components: Vec<GroupObject>) -> Result<Self, TowerError> {
        Tower::new(vec![], vec![], TailRule::ProductAccumulation { components })
    }

    pub fn multiplication(group: FgAbGroup, multipliers: MultiplierRule) -> Self {
        Tower::new(vec![], vec![], TailRule::Multiplication { group, multipliers })
            .expect("valid shape")
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    /// Highest defined level, or `None` when the tail generates all levels.
    pub fn max_level(&self) -> Option<usize> {
        match self.tail {
            TailRule::None => Some(self.prefix.len() - 1),
            _ => None,
        }
    }

    fn tail_component(components: &[GroupObject], i: usize) -> GroupObject {
        components[i.min(components.len() - 1)].clone()
    }

    pub fn level(&self, n: usize) -> Result<GroupObject, TowerError> {
        if n < self.prefix.len() {
            return Ok(self.prefix[n].clone());
        }
        if let Some(hit) = self.cache.lock().unwrap().get(&n) {
            return Ok(hit.clone());
        }
        let built = match &self.tail {
            TailRule::None => return Err(TowerError::LevelOutOfRange(n)),
            TailRule::Constant => self.prefix.last().expect("validated").clone(),
            TailRule::ProductAccumulation { components } => GroupObject::Product(
                (0..=n).map(|i| Self::tail_component(components, i)).collect(),
            ),
            TailRule::Multiplication { group, .. } => GroupObject::FgAb(group.clone()),
        };
        self.cache.lock().unwrap().insert(n, built.clone());
        Ok(built)
    }

    /// The connecting map `G_{n+1} -> G_n`.
    pub fn connecting(&self, n: usize) -> Result<GroupHom, TowerError> {
        if n + 1 < self.prefix.len() {
            return Ok(self.maps[n].clone());
        }
        match &self.tail {
            TailRule::None => Err(TowerError::LevelOutOfRange(n + 1)),
            TailRule::Constant => Ok(GroupHom::identity(self.level(n)?)),
            TailRule::ProductAccumulation { .. } => {
                let domain = self.level(n + 1)?;
                Ok(GroupHom::truncate_product(&domain, n + 1)?)
            }
            TailRule::Multiplication { group, multipliers } => {
                Ok(GroupHom::multiplication(group, &multipliers.at(n)))
            }
        }
    }

    /// `G_s -> G_t` for `s >= t`, composing connecting maps.
    pub fn compose_down(&self, t: usize, s: usize) -> Result<GroupHom, TowerError> {
        assert!(s >= t, "compose_down goes downward");
        let mut hom = GroupHom::identity(self.level(s)?);
        for k in (t..s).rev() {
            hom = GroupHom::compose(hom, self.connecting(k)?)?;
        }
        Ok(hom)
    }

    /// All levels up to `n` have finite carriers.
    pub fn finite_window(&self, n: usize) -> Result<bool, TowerError> {
        for k in 0..=n {
            if !self.level(k)?.is_finite_carrier() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn abelian_window(&self, n: usize) -> Result<bool, TowerError> {
        for k in 0..=n {
            if !self.level(k)?.is_abelian() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn thread_identity(&self, depth: usize) -> Result<Thread, TowerError> {
        let values = (0..=depth)
            .map(|n| self.level(n).map(|g| g.identity()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Thread { values })
    }

    pub fn thread_mul(&self, a: &Thread, b: &Thread) -> Result<Thread, TowerError> {
        assert_eq!(a.depth(), b.depth(), "thread depth mismatch");
        let values = a
            .values
            .iter()
            .zip(&b.values)
            .enumerate()
            .map(|(n, (x, y))| self.level(n).map(|g| g.mul(x, y)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Thread { values })
    }

    pub fn thread_inv(&self, a: &Thread) -> Result<Thread, TowerError> {
        let values = a
            .values
            .iter()
            .enumerate()
            .map(|(n, x)| self.level(n).map(|g| g.inv(x)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Thread { values })
    }

    pub fn thread_pow(&self, a: &Thread, k: i64) -> Result<Thread, TowerError> {
        let base = if k < 0 { self.thread_inv(a)? } else { a.clone() };
        let mut out = self.thread_identity(a.depth())?;
        for _ in 0..k.unsigned_abs() {
            out = self.thread_mul(&out, &base)?;
        }
        Ok(out)
    }

    /// Thread obtained by pushing a level-`depth` element down the tower.
    pub fn thread_down(&self, depth: usize, top: &GroupElement) -> Result<Thread, TowerError> {
        let mut values = vec![top.clone()];
        let mut current = top.clone();
        for n in (0..depth).rev() {
            current = self.connecting(n)?.apply(&current);
            values.push(current.clone());
        }
        values.reverse();
        Ok(Thread { values })
    }
}

/// A compatible tuple `(x_0, ..., x_N)` with `g_{n+1}(x_{n+1}) = x_n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Thread {
    pub values: Vec<GroupElement>,
}

impl Thread {
    pub fn depth(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, n: usize) -> &GroupElement {
        &self.values[n]
    }

    /// Independent compatibility re-check against the tower's maps.
    pub fn verify(&self, tower: &Tower) -> Result<bool, TowerError> {
        for n in 0..self.depth() {
            let pushed = tower.connecting(n)?.apply(&self.values[n + 1]);
            if pushed != self.values[n] {
                return Ok(false);
            }
            if !tower.level(n)?.contains(&self.values[n]) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// wire format

#[derive(Serialize, Deserialize)]
struct TowerWire {
    #[serde(default)]
    prefix: Vec<PrefixEntryWire>,
    tail: TailWire,
}

#[derive(Serialize, Deserialize)]
struct PrefixEntryWire {
    group: GroupObject,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    map: Option<HomSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TailWire {
    None,
    Constant,
    Product { components: Vec<GroupObject> },
    Mult { group: FgAbGroup, multipliers: MultiplierWire },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MultiplierWire {
    Rule(String),
    Constant(i64),
}

/// Map description relative to known domain/codomain.
#[derive(Serialize, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HomSpec {
    Identity,
    Trivial,
    ElementMap { images: Vec<usize> },
    Matrix { matrix: IntMatrix },
    Mult { by: i64 },
    Truncate,
}

impl HomSpec {
    pub fn resolve(
        &self,
        domain: &GroupObject,
        codomain: &GroupObject,
    ) -> Result<GroupHom, TowerError> {
        match self {
            HomSpec::Identity => {
                if domain != codomain {
                    return Err(TowerError::BadShape(
                        "identity map between different groups".into(),
                    ));
                }
                Ok(GroupHom::identity(domain.clone()))
            }
            HomSpec::Trivial => Ok(GroupHom::trivial(domain.clone(), codomain.clone())),
            HomSpec::ElementMap { images } => {
                let elements = images
                    .iter()
                    .map(|&i| {
                        codomain
                            .element_at(i)
                            .ok_or_else(|| TowerError::BadShape(format!("image index {i} bad")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let hom = GroupHom::element_map(domain.clone(), codomain.clone(), elements)?;
                if !hom.verify_multiplicative() {
                    return Err(TowerError::BadShape("element map is not a homomorphism".into()));
                }
                Ok(hom)
            }
            HomSpec::Matrix { matrix } => {
                let (GroupObject::FgAb(a), GroupObject::FgAb(b)) = (domain, codomain) else {
                    return Err(TowerError::BadShape("matrix map needs fgab endpoints".into()));
                };
                Ok(GroupHom::matrix(a, b, matrix.clone())?)
            }
            HomSpec::Mult { by } => {
                let (GroupObject::FgAb(a), GroupObject::FgAb(b)) = (domain, codomain) else {
                    return Err(TowerError::BadShape("mult map needs fgab endpoints".into()));
                };
                if a != b {
                    return Err(TowerError::BadShape("mult map must be a self-map".into()));
                }
                Ok(GroupHom::multiplication(a, &BigInt::from(*by)))
            }
            HomSpec::Truncate => {
                let hom = GroupHom::truncate_product(
                    domain,
                    match codomain {
                        GroupObject::Product(cs) => cs.len(),
                        _ => 1,
                    },
                )?;
                if hom.codomain != *codomain {
                    return Err(TowerError::BadShape("truncation target mismatch".into()));
                }
                Ok(hom)
            }
        }
    }
}

impl Serialize for Tower {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let prefix = self
            .prefix
            .iter()
            .enumerate()
            .map(|(i, g)| PrefixEntryWire {
                group: g.clone(),
                map: if i == 0 { None } else { hom_to_spec(&self.maps[i - 1]) },
            })
            .collect();
        let tail = match &self.tail {
            TailRule::None => TailWire::None,
            TailRule::Constant => TailWire::Constant,
            TailRule::ProductAccumulation { components } => {
                TailWire::Product { components: components.clone() }
            }
            TailRule::Multiplication { group, multipliers } => TailWire::Mult {
                group: group.clone(),
                multipliers: match multipliers {
                    MultiplierRule::Successor => MultiplierWire::Rule("n+1".into()),
                    MultiplierRule::Constant(c) => MultiplierWire::Constant(
                        num_traits::ToPrimitive::to_i64(c).unwrap_or(i64::MAX),
                    ),
                },
            },
        };
        TowerWire { prefix, tail }.serialize(s)
    }
}

fn hom_to_spec(h: &GroupHom) -> Option<HomSpec> {
    use crate::group::HomData;
    match h.data() {
        HomData::Identity => Some(HomSpec::Identity),
        HomData::Trivial => Some(HomSpec::Trivial),
        HomData::ElementMap(images) => Some(HomSpec::ElementMap {
            images: images.iter().map(|e| h.codomain.index_of(e).unwrap_or(usize::MAX)).collect(),
        }),
        HomData::Matrix(m) => Some(HomSpec::Matrix { matrix: m.clone() }),
        HomData::TruncateProduct => Some(HomSpec::Truncate),
        _ => None,
    }
}

impl<'de> Deserialize<'de> for Tower {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = TowerWire::deserialize(d)?;
        let groups: Vec<GroupObject> = wire.prefix.iter().map(|e| e.group.clone()).collect();
        let mut maps = Vec::new();
        for (i, entry) in wire.prefix.iter().enumerate().skip(1) {
            let spec = entry.map.as_ref().ok_or_else(|| {
                D::Error::custom(format!("prefix entry {i} is missing its connecting map"))
            })?;
            maps.push(
                spec.resolve(&groups[i], &groups[i - 1]).map_err(D::Error::custom)?,
            );
        }
        let tail = match wire.tail {
            TailWire::None => TailRule::None,
            TailWire::Constant => TailRule::Constant,
            TailWire::Product { components } => TailRule::ProductAccumulation { components },
            TailWire::Mult { group, multipliers } => TailRule::Multiplication {
                group,
                multipliers: match multipliers {
                    MultiplierWire::Rule(r) if r == "n+1" => MultiplierRule::Successor,
                    MultiplierWire::Rule(r) => {
                        return Err(D::Error::custom(format!("unknown multiplier rule {r:?}")))
                    }
                    MultiplierWire::Constant(c) => MultiplierRule::Constant(BigInt::from(c)),
                },
            },
        };
        Tower::new(groups, maps, tail).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;

    #[test]
    fn constant_tower_levels() {
        let t = Tower::constant(GroupObject::finite(catalog::symmetric(3)));
        assert_eq!(t.level(0).unwrap(), t.level(7).unwrap());
        let c = t.connecting(3).unwrap();
        assert_eq!(c.domain, c.codomain);
    }

    #[test]
    fn multiplication_tower_maps() {
        let t = Tower::multiplication(FgAbGroup::free(1), MultiplierRule::Successor);
        // connecting into level 0 multiplies by 1, into level 2 by 3
        let z = FgAbGroup::free(1);
        let x = GroupElement::FgAb(z.element_from_i64(&[5]).unwrap());
        assert_eq!(t.connecting(0).unwrap().apply(&x), x);
        assert_eq!(
            t.connecting(2).unwrap().apply(&x),
            GroupElement::FgAb(z.element_from_i64(&[15]).unwrap())
        );
    }

    #[test]
    fn product_accumulation_levels_grow() {
        let t = Tower::product_accumulation(vec![GroupObject::finite(catalog::symmetric(3))])
            .unwrap();
        let g2 = t.level(2).unwrap();
        let GroupObject::Product(cs) = &g2 else { panic!() };
        assert_eq!(cs.len(), 3);
        // connecting drops the last coordinate
        let el = g2.element_at(17).unwrap();
        let down = t.connecting(1).unwrap().apply(&el);
        let GroupElement::Product(xs) = &el else { panic!() };
        assert_eq!(down, GroupElement::Product(xs[..2].to_vec()));
    }

    #[test]
    fn thread_down_and_verify() {
        let z4 = FgAbGroup::cyclic(4);
        let t = Tower::multiplication(z4.clone(), MultiplierRule::Constant(BigInt::from(2)));
        let top = GroupElement::FgAb(z4.element_from_i64(&[1]).unwrap());
        let thread = t.thread_down(3, &top).unwrap();
        assert!(thread.verify(&t).unwrap());
        let coords: Vec<i64> = thread
            .values
            .iter()
            .map(|v| {
                let GroupElement::FgAb(x) = v else { panic!() };
                num_traits::ToPrimitive::to_i64(&x.coords()[0]).unwrap()
            })
            .collect();
        // top 1 doubles downward: 1 -> 2 -> 0 -> 0
        assert_eq!(coords, vec![0, 0, 2, 1]);
    }

    #[test]
    fn finite_tower_out_of_range() {
        let g = GroupObject::finite(catalog::cyclic(2));
        let t = Tower::new(vec![g.clone(), g.clone()], vec![GroupHom::identity(g)], TailRule::None)
            .unwrap();
        assert!(t.level(1).is_ok());
        assert!(matches!(t.level(2), Err(TowerError::LevelOutOfRange(2))));
    }

    #[test]
    fn wire_round_trip() {
        let t = Tower::multiplication(FgAbGroup::free(1), MultiplierRule::Successor);
        let s = serde_json::to_string(&t).unwrap();
        let back: Tower = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);

        let json = r#"{
            "prefix": [],
            "tail": {"kind":"mult","group":{"factors":[6],"rank":0},"multipliers":"n+1"}
        }"#;
        let parsed: Tower = serde_json::from_str(json).unwrap();
        assert!(matches!(
            parsed.tail(),
            TailRule::Multiplication { multipliers: MultiplierRule::Successor, .. }
        ));

        let bad = r#"{"prefix":[],"tail":{"kind":"mult","group":{"factors":[6],"rank":0},"multipliers":"n^2"}}"#;
        assert!(serde_json::from_str::<Tower>(bad).is_err());
    }
}
