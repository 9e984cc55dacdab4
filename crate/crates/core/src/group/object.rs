use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{AbElement, FgAbGroup, MAX_ENUMERATION};
use crate::linalg::{CokernelPresentation, IntMatrix};

use super::finite::FiniteGroup;
use super::free::FreeWord;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObjectError {
    #[error("element does not belong to the group")]
    NotAnElement,
    #[error("homomorphism data does not match domain/codomain: {0}")]
    BadHom(String),
    #[error("group is infinite or too large to enumerate")]
    NotEnumerable,
    #[error("unknown catalog group {0:?}")]
    UnknownCatalogName(String),
}

/// Unified group value: finite Cayley table, free group, finitely generated
/// abelian group, or a flat finite direct product of these.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupObject {
    Finite(Arc<FiniteGroup>),
    Free { rank: usize },
    FgAb(FgAbGroup),
    Product(Vec<GroupObject>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupElement {
    Finite(usize),
    Free(FreeWord),
    FgAb(AbElement),
    Product(Vec<GroupElement>),
}

impl GroupObject {
    pub fn finite(g: FiniteGroup) -> Self {
        GroupObject::Finite(Arc::new(g))
    }

    pub fn trivial() -> Self {
        GroupObject::FgAb(FgAbGroup::trivial())
    }

    /// Flat product; nested products are spliced in.
    pub fn product(components: Vec<GroupObject>) -> Self {
        let mut flat = Vec::with_capacity(components.len());
        for c in components {
            match c {
                GroupObject::Product(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        GroupObject::Product(flat)
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupObject::Finite(g) => g.is_abelian(),
            GroupObject::Free { rank } => *rank <= 1,
            GroupObject::FgAb(_) => true,
            GroupObject::Product(cs) => cs.iter().all(|c| c.is_abelian()),
        }
    }

    pub fn carrier_size(&self) -> Option<BigInt> {
        match self {
            GroupObject::Finite(g) => Some(BigInt::from(g.order())),
            GroupObject::Free { rank } => (*rank == 0).then(|| BigInt::from(1)),
            GroupObject::FgAb(a) => a.order(),
            GroupObject::Product(cs) => {
                cs.iter().map(|c| c.carrier_size()).product::<Option<BigInt>>()
            }
        }
    }

    pub fn is_finite_carrier(&self) -> bool {
        self.carrier_size().is_some()
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupObject::Finite(g) => GroupElement::Finite(g.identity()),
            GroupObject::Free { rank } => GroupElement::Free(FreeWord::identity(*rank)),
            GroupObject::FgAb(a) => GroupElement::FgAb(a.zero()),
            GroupObject::Product(cs) => {
                GroupElement::Product(cs.iter().map(|c| c.identity()).collect())
            }
        }
    }

    pub fn contains(&self, el: &GroupElement) -> bool {
        match (self, el) {
            (GroupObject::Finite(g), GroupElement::Finite(id)) => *id < g.order(),
            (GroupObject::Free { rank }, GroupElement::Free(w)) => w.rank() == *rank,
            (GroupObject::FgAb(a), GroupElement::FgAb(x)) => x.group() == a,
            (GroupObject::Product(cs), GroupElement::Product(xs)) => {
                cs.len() == xs.len() && cs.iter().zip(xs).all(|(c, x)| c.contains(x))
            }
            _ => false,
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        debug_assert!(self.contains(a) && self.contains(b), "elements of a different group");
        match (self, a, b) {
            (GroupObject::Finite(g), GroupElement::Finite(x), GroupElement::Finite(y)) => {
                GroupElement::Finite(g.mul(*x, *y))
            }
            (GroupObject::Free { .. }, GroupElement::Free(x), GroupElement::Free(y)) => {
                GroupElement::Free(x.mul(y))
            }
            (GroupObject::FgAb(_), GroupElement::FgAb(x), GroupElement::FgAb(y)) => {
                GroupElement::FgAb(x.add(y))
            }
            (GroupObject::Product(cs), GroupElement::Product(xs), GroupElement::Product(ys)) => {
                GroupElement::Product(
                    cs.iter()
                        .zip(xs.iter().zip(ys))
                        .map(|(c, (x, y))| c.mul(x, y))
                        .collect(),
                )
            }
            _ => panic!("element shape does not match group"),
        }
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        debug_assert!(self.contains(a), "element of a different group");
        match (self, a) {
            (GroupObject::Finite(g), GroupElement::Finite(x)) => GroupElement::Finite(g.inv(*x)),
            (GroupObject::Free { .. }, GroupElement::Free(x)) => GroupElement::Free(x.inv()),
            (GroupObject::FgAb(_), GroupElement::FgAb(x)) => GroupElement::FgAb(x.neg()),
            (GroupObject::Product(cs), GroupElement::Product(xs)) => GroupElement::Product(
                cs.iter().zip(xs).map(|(c, x)| c.inv(x)).collect(),
            ),
            _ => panic!("element shape does not match group"),
        }
    }

    pub fn commutator(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let xy = self.mul(x, y);
        let yx = self.mul(y, x);
        self.mul(&self.inv(&yx), &xy)
    }

    pub fn pow(&self, a: &GroupElement, k: i64) -> GroupElement {
        let base = if k < 0 { self.inv(a) } else { a.clone() };
        let mut out = self.identity();
        for _ in 0..k.unsigned_abs() {
            out = self.mul(&out, &base);
        }
        out
    }

    /// Deterministic element enumeration for finite carriers; first
    /// component varies slowest in products.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        let size = self.carrier_size()?.to_u64()?;
        if size > MAX_ENUMERATION {
            return None;
        }
        Some((0..size as usize).map(|i| self.element_at(i).expect("in range")).collect())
    }

    pub fn element_at(&self, idx: usize) -> Option<GroupElement> {
        match self {
            GroupObject::Finite(g) => (idx < g.order()).then_some(GroupElement::Finite(idx)),
            GroupObject::Free { rank } => {
                (*rank == 0 && idx == 0).then(|| GroupElement::Free(FreeWord::identity(0)))
            }
            GroupObject::FgAb(a) => {
                if a.is_trivial() {
                    (idx == 0).then(|| GroupElement::FgAb(a.zero()))
                } else {
                    a.element_at(idx).map(GroupElement::FgAb)
                }
            }
            GroupObject::Product(cs) => {
                let mut idx = idx;
                let mut rev = Vec::with_capacity(cs.len());
                for c in cs.iter().rev() {
                    let size = c.carrier_size()?.to_usize()?;
                    rev.push(c.element_at(idx % size)?);
                    idx /= size;
                }
                (idx == 0).then(|| {
                    rev.reverse();
                    GroupElement::Product(rev)
                })
            }
        }
    }

    pub fn index_of(&self, el: &GroupElement) -> Option<usize> {
        match (self, el) {
            (GroupObject::Finite(_), GroupElement::Finite(id)) => Some(*id),
            (GroupObject::Free { rank }, GroupElement::Free(w)) => {
                (*rank == 0 && w.is_empty()).then_some(0)
            }
            (GroupObject::FgAb(a), GroupElement::FgAb(x)) => {
                if a.is_trivial() {
                    Some(0)
                } else {
                    a.index_of(x)
                }
            }
            (GroupObject::Product(cs), GroupElement::Product(xs)) => {
                let mut idx: usize = 0;
                for (c, x) in cs.iter().zip(xs) {
                    let size = c.carrier_size()?.to_usize()?;
                    idx = idx.checked_mul(size)?.checked_add(c.index_of(x)?)?;
                }
                Some(idx)
            }
            _ => None,
        }
    }

    /// Materialize a finite-carrier object as a Cayley table (used when a
    /// product has to be treated as a single concrete group).
    pub fn to_finite_group(&self) -> Result<FiniteGroup, ObjectError> {
        let elements = self.elements().ok_or(ObjectError::NotEnumerable)?;
        let n = elements.len();
        let mut rows = vec![vec![0usize; n]; n];
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate() {
                let prod = self.mul(a, b);
                rows[i][j] = self.index_of(&prod).expect("closed");
            }
        }
        FiniteGroup::from_table(rows).map_err(|e| ObjectError::BadHom(e.to_string()))
    }
}

/// Group homomorphism with explicit map data.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupHom {
    pub domain: GroupObject,
    pub codomain: GroupObject,
    data: HomData,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HomData {
    Identity,
    /// everything to the identity
    Trivial,
    /// image of every domain element, indexed by the domain enumeration
    ElementMap(Vec<GroupElement>),
    /// integer matrix acting on fgab coordinates (codomain dims x domain dims)
    Matrix(IntMatrix),
    /// images of the free generators
    GeneratorImages(Vec<GroupElement>),
    /// product onto the product of its first components
    TruncateProduct,
    /// product to product of the same arity, map per component
    Componentwise(Vec<GroupHom>),
    /// product of fgab components onto the canonical form of their sum
    FlattenSum(CokernelPresentation),
    /// g after f
    Compose(Box<GroupHom>, Box<GroupHom>),
}

impl GroupHom {
    pub fn identity(g: GroupObject) -> Self {
        GroupHom { domain: g.clone(), codomain: g, data: HomData::Identity }
    }

    pub fn trivial(domain: GroupObject, codomain: GroupObject) -> Self {
        GroupHom { domain, codomain, data: HomData::Trivial }
    }

    pub fn element_map(
        domain: GroupObject,
        codomain: GroupObject,
        images: Vec<GroupElement>,
    ) -> Result<Self, ObjectError> {
        let size = domain
            .carrier_size()
            .and_then(|s| s.to_usize())
            .ok_or(ObjectError::NotEnumerable)?;
        if images.len() != size {
            return Err(ObjectError::BadHom(format!(
                "element map has {} images for carrier of size {size}",
                images.len()
            )));
        }
        if images.iter().any(|im| !codomain.contains(im)) {
            return Err(ObjectError::BadHom("image outside codomain".into()));
        }
        Ok(GroupHom { domain, codomain, data: HomData::ElementMap(images) })
    }

    /// Matrix map between fgab groups; well-definedness on torsion is
    /// checked (each relation must map to zero).
    pub fn matrix(a: &FgAbGroup, b: &FgAbGroup, m: IntMatrix) -> Result<Self, ObjectError> {
        if m.rows() != b.dims() || m.cols() != a.dims() {
            return Err(ObjectError::BadHom(format!(
                "matrix {}x{} between groups of dims {} and {}",
                m.rows(),
                m.cols(),
                a.dims(),
                b.dims()
            )));
        }
        for (j, d) in a.invariant_factors().iter().enumerate() {
            let col: Vec<BigInt> = m.col(j).iter().map(|c| c * d).collect();
            let el = b.element(col).map_err(|e| ObjectError::BadHom(e.to_string()))?;
            if !el.is_zero() {
                return Err(ObjectError::BadHom(format!(
                    "matrix does not kill the relation {d}·e_{j}"
                )));
            }
        }
        Ok(GroupHom {
            domain: GroupObject::FgAb(a.clone()),
            codomain: GroupObject::FgAb(b.clone()),
            data: HomData::Matrix(m),
        })
    }

    /// Multiplication by a fixed integer as a self-map of an fgab group.
    pub fn multiplication(a: &FgAbGroup, s: &BigInt) -> Self {
        let dims = a.dims();
        let m = IntMatrix::diagonal(dims, dims, &vec![s.clone(); dims]);
        Self::matrix(a, a, m).expect("scalar multiples always respect relations")
    }

    pub fn generator_images(
        rank: usize,
        codomain: GroupObject,
        images: Vec<GroupElement>,
    ) -> Result<Self, ObjectError> {
        if images.len() != rank {
            return Err(ObjectError::BadHom(format!(
                "{} generator images for rank {rank}",
                images.len()
            )));
        }
        if images.iter().any(|im| !codomain.contains(im)) {
            return Err(ObjectError::BadHom("image outside codomain".into()));
        }
        Ok(GroupHom { domain: GroupObject::Free { rank }, codomain, data: HomData::GeneratorImages(images) })
    }

    /// Projection of a product onto the product of its first `keep`
    /// components.
    pub fn truncate_product(domain: &GroupObject, keep: usize) -> Result<Self, ObjectError> {
        let GroupObject::Product(cs) = domain else {
            return Err(ObjectError::BadHom("truncation needs a product domain".into()));
        };
        if keep > cs.len() {
            return Err(ObjectError::BadHom(format!(
                "cannot keep {keep} of {} components",
                cs.len()
            )));
        }
        let codomain = GroupObject::Product(cs[..keep].to_vec());
        Ok(GroupHom { domain: domain.clone(), codomain, data: HomData::TruncateProduct })
    }

    pub fn componentwise(
        domain: &GroupObject,
        codomain: &GroupObject,
        maps: Vec<GroupHom>,
    ) -> Result<Self, ObjectError> {
        let (GroupObject::Product(dcs), GroupObject::Product(ccs)) = (domain, codomain) else {
            return Err(ObjectError::BadHom("componentwise needs product shapes".into()));
        };
        if dcs.len() != maps.len() || ccs.len() != maps.len() {
            return Err(ObjectError::BadHom("component count mismatch".into()));
        }
        for ((d, c), m) in dcs.iter().zip(ccs).zip(&maps) {
            if m.domain != *d || m.codomain != *c {
                return Err(ObjectError::BadHom("component map endpoints mismatch".into()));
            }
        }
        Ok(GroupHom {
            domain: domain.clone(),
            codomain: codomain.clone(),
            data: HomData::Componentwise(maps),
        })
    }

    pub fn flatten_sum(
        domain: GroupObject,
        codomain: FgAbGroup,
        pres: CokernelPresentation,
    ) -> Self {
        GroupHom { domain, codomain: GroupObject::FgAb(codomain), data: HomData::FlattenSum(pres) }
    }

    pub fn compose(first: GroupHom, second: GroupHom) -> Result<Self, ObjectError> {
        if first.codomain != second.domain {
            return Err(ObjectError::BadHom("composition endpoints do not match".into()));
        }
        // collapse the cheap cases
        match (&first.data, &second.data) {
            (HomData::Identity, _) => return Ok(second),
            (_, HomData::Identity) => return Ok(first),
            (HomData::Matrix(m1), HomData::Matrix(m2)) => {
                let m = m2.mul(m1).expect("dims checked");
                let (GroupObject::FgAb(a), GroupObject::FgAb(b)) =
                    (&first.domain, &second.codomain)
                else {
                    unreachable!("matrix homs have fgab endpoints");
                };
                return GroupHom::matrix(a, b, m);
            }
            _ => {}
        }
        Ok(GroupHom {
            domain: first.domain.clone(),
            codomain: second.codomain.clone(),
            data: HomData::Compose(Box::new(first), Box::new(second)),
        })
    }

    pub fn data(&self) -> &HomData {
        &self.data
    }

    pub fn apply(&self, el: &GroupElement) -> GroupElement {
        debug_assert!(self.domain.contains(el), "element outside hom domain");
        match &self.data {
            HomData::Identity => el.clone(),
            HomData::Trivial => self.codomain.identity(),
            HomData::ElementMap(images) => {
                let idx = self.domain.index_of(el).expect("finite carrier");
                images[idx].clone()
            }
            HomData::Matrix(m) => {
                let GroupElement::FgAb(x) = el else { panic!("matrix hom on non-fgab element") };
                let GroupObject::FgAb(b) = &self.codomain else { unreachable!() };
                let coords = m.mul_vec(x.coords()).expect("dims checked");
                GroupElement::FgAb(b.element(coords).expect("dims checked"))
            }
            HomData::GeneratorImages(images) => {
                let GroupElement::Free(w) = el else { panic!("free hom on non-word") };
                let mut acc = self.codomain.identity();
                for &(g, e) in w.letters() {
                    let image = if e > 0 { images[g].clone() } else { self.codomain.inv(&images[g]) };
                    acc = self.codomain.mul(&acc, &image);
                }
                acc
            }
            HomData::TruncateProduct => {
                let GroupElement::Product(xs) = el else { panic!("truncate on non-product") };
                let GroupObject::Product(ccs) = &self.codomain else { unreachable!() };
                GroupElement::Product(xs[..ccs.len()].to_vec())
            }
            HomData::Componentwise(maps) => {
                let GroupElement::Product(xs) = el else { panic!("componentwise on non-product") };
                GroupElement::Product(maps.iter().zip(xs).map(|(m, x)| m.apply(x)).collect())
            }
            HomData::FlattenSum(pres) => {
                let GroupElement::Product(xs) = el else { panic!("flatten on non-product") };
                let mut concat: Vec<BigInt> = Vec::new();
                for x in xs {
                    let GroupElement::FgAb(a) = x else { panic!("flatten needs fgab components") };
                    concat.extend(a.coords().iter().cloned());
                }
                let GroupObject::FgAb(b) = &self.codomain else { unreachable!() };
                let coords = pres.project(&concat).expect("dims fixed at construction");
                GroupElement::FgAb(b.element(coords).expect("projection emits canonical dims"))
            }
            HomData::Compose(f, g) => g.apply(&f.apply(el)),
        }
    }

    /// Exhaustive multiplicativity check on finite carriers (up to the
    /// enumeration guard); matrix and generator-image maps are structurally
    /// multiplicative and return true directly.
    pub fn verify_multiplicative(&self) -> bool {
        match &self.data {
            HomData::Matrix(_) | HomData::Identity | HomData::Trivial | HomData::GeneratorImages(_) => {
                true
            }
            _ => {
                let Some(elements) = self.domain.elements() else {
                    return true;
                };
                if elements.len() > 512 {
                    // quadratic check gets expensive; sample the full grid once
                    // deterministically by striding
                    let stride = elements.len() / 256 + 1;
                    return elements.iter().step_by(stride).all(|a| {
                        elements.iter().step_by(stride).all(|b| {
                            self.apply(&self.domain.mul(a, b))
                                == self.codomain.mul(&self.apply(a), &self.apply(b))
                        })
                    });
                }
                elements.iter().all(|a| {
                    elements.iter().all(|b| {
                        self.apply(&self.domain.mul(a, b))
                            == self.codomain.mul(&self.apply(a), &self.apply(b))
                    })
                })
            }
        }
    }

    /// Image of a finite-carrier domain as a sorted, deduplicated element
    /// list in the codomain.
    pub fn image_elements(&self) -> Option<Vec<GroupElement>> {
        let elements = self.domain.elements()?;
        let mut out: Vec<GroupElement> = elements.iter().map(|e| self.apply(e)).collect();
        out.sort();
        out.dedup();
        Some(out)
    }
}

// ---------------------------------------------------------------------------
// wire format

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum GroupObjectWire {
    Finite {
        order: usize,
        table: Vec<Vec<usize>>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        name: Option<String>,
    },
    Catalog {
        name: String,
    },
    Free {
        rank: usize,
    },
    Fgab {
        #[serde(with = "crate::bigjson::vec", default)]
        factors: Vec<BigInt>,
        #[serde(default)]
        rank: usize,
    },
    Product {
        components: Vec<GroupObjectWire>,
    },
}

fn to_wire(g: &GroupObject) -> GroupObjectWire {
    match g {
        GroupObject::Finite(fg) => GroupObjectWire::Finite {
            order: fg.order(),
            table: (0..fg.order())
                .map(|a| (0..fg.order()).map(|b| fg.mul(a, b)).collect())
                .collect(),
            name: fg.name().map(Into::into),
        },
        GroupObject::Free { rank } => GroupObjectWire::Free { rank: *rank },
        GroupObject::FgAb(a) => GroupObjectWire::Fgab {
            factors: a.invariant_factors().to_vec(),
            rank: a.free_rank(),
        },
        GroupObject::Product(cs) => {
            GroupObjectWire::Product { components: cs.iter().map(to_wire).collect() }
        }
    }
}

fn from_wire(w: GroupObjectWire) -> Result<GroupObject, ObjectError> {
    match w {
        GroupObjectWire::Finite { order, table, name } => {
            if table.len() != order {
                return Err(ObjectError::BadHom(format!(
                    "table has {} rows for order {order}",
                    table.len()
                )));
            }
            let mut g =
                FiniteGroup::from_table(table).map_err(|e| ObjectError::BadHom(e.to_string()))?;
            if let Some(n) = name {
                g = g.with_name(n);
            }
            Ok(GroupObject::finite(g))
        }
        GroupObjectWire::Catalog { name } => super::catalog::by_name(&name)
            .map(GroupObject::finite)
            .ok_or(ObjectError::UnknownCatalogName(name)),
        GroupObjectWire::Free { rank } => Ok(GroupObject::Free { rank }),
        GroupObjectWire::Fgab { factors, rank } => FgAbGroup::new(factors, rank)
            .map(GroupObject::FgAb)
            .map_err(|e| ObjectError::BadHom(e.to_string())),
        GroupObjectWire::Product { components } => {
            let parts: Result<Vec<_>, _> = components.into_iter().map(from_wire).collect();
            Ok(GroupObject::product(parts?))
        }
    }
}

impl Serialize for GroupObject {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_wire(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupObject {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = GroupObjectWire::deserialize(d)?;
        from_wire(wire).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;

    fn z2xz3() -> GroupObject {
        GroupObject::product(vec![
            GroupObject::FgAb(FgAbGroup::cyclic(2)),
            GroupObject::FgAb(FgAbGroup::cyclic(3)),
        ])
    }

    #[test]
    fn product_flattening() {
        let nested = GroupObject::product(vec![
            z2xz3(),
            GroupObject::FgAb(FgAbGroup::cyclic(5)),
        ]);
        let GroupObject::Product(cs) = &nested else { panic!() };
        assert_eq!(cs.len(), 3);
    }

    #[test]
    fn enumeration_round_trip() {
        let g = z2xz3();
        let els = g.elements().unwrap();
        assert_eq!(els.len(), 6);
        for (i, el) in els.iter().enumerate() {
            assert_eq!(g.index_of(el), Some(i));
        }
    }

    #[test]
    fn product_arithmetic_is_componentwise() {
        let g = z2xz3();
        let els = g.elements().unwrap();
        // the whole product is abelian and every commutator is trivial
        for a in &els {
            for b in &els {
                assert_eq!(g.commutator(a, b), g.identity());
            }
        }
    }

    #[test]
    fn commutator_in_finite_object() {
        let s3 = GroupObject::finite(catalog::symmetric(3));
        let els = s3.elements().unwrap();
        let mut nontrivial = 0;
        for a in &els {
            for b in &els {
                if s3.commutator(a, b) != s3.identity() {
                    nontrivial += 1;
                }
            }
        }
        assert!(nontrivial > 0);
    }

    #[test]
    fn free_commutator_words() {
        let f2 = GroupObject::Free { rank: 2 };
        let a = GroupElement::Free(FreeWord::generator(2, 0).unwrap());
        let b = GroupElement::Free(FreeWord::generator(2, 1).unwrap());
        let c = f2.commutator(&a, &b);
        let GroupElement::Free(w) = &c else { panic!() };
        assert_eq!(w.to_string(), "ABab");
    }

    #[test]
    fn identity_commutes_everywhere() {
        for g in [
            GroupObject::finite(catalog::quaternion8()),
            z2xz3(),
            GroupObject::Free { rank: 2 },
        ] {
            let e = g.identity();
            let x = match &g {
                GroupObject::Free { .. } => {
                    GroupElement::Free(FreeWord::parse(2, "abA").unwrap())
                }
                _ => g.element_at(1).unwrap(),
            };
            assert_eq!(g.commutator(&e, &x), e);
            assert_eq!(g.commutator(&x, &e), e);
        }
    }

    #[test]
    fn truncate_product_projection() {
        let q8 = GroupObject::finite(catalog::quaternion8());
        let s3 = GroupObject::finite(catalog::symmetric(3));
        let domain = GroupObject::product(vec![q8.clone(), s3.clone()]);
        let proj = GroupHom::truncate_product(&domain, 1).unwrap();
        assert!(proj.verify_multiplicative());
        let el = domain.element_at(13).unwrap();
        let GroupElement::Product(xs) = &el else { panic!() };
        assert_eq!(proj.apply(&el), GroupElement::Product(vec![xs[0].clone()]));
    }

    #[test]
    fn matrix_hom_validation() {
        let z4 = FgAbGroup::cyclic(4);
        let z2 = FgAbGroup::cyclic(2);
        // reduction mod 2 is fine
        let ok = GroupHom::matrix(&z4, &z2, IntMatrix::from_i64_rows(&[vec![1]]));
        assert!(ok.is_ok());
        // there is no injection Z/4 -> Z/2 sending e to a generator of order 4
        let z8 = FgAbGroup::cyclic(8);
        let bad = GroupHom::matrix(&z4, &z8, IntMatrix::from_i64_rows(&[vec![1]]));
        assert!(bad.is_err());
        let ok2 = GroupHom::matrix(&z4, &z8, IntMatrix::from_i64_rows(&[vec![2]]));
        assert!(ok2.is_ok());
    }

    #[test]
    fn multiplication_hom() {
        let z = FgAbGroup::free(1);
        let double = GroupHom::multiplication(&z, &BigInt::from(2));
        let x = GroupElement::FgAb(z.element_from_i64(&[3]).unwrap());
        assert_eq!(double.apply(&x), GroupElement::FgAb(z.element_from_i64(&[6]).unwrap()));
    }

    #[test]
    fn composition_collapses_matrices() {
        let z = FgAbGroup::free(1);
        let double = GroupHom::multiplication(&z, &BigInt::from(2));
        let triple = GroupHom::multiplication(&z, &BigInt::from(3));
        let six = GroupHom::compose(double, triple).unwrap();
        let HomData::Matrix(m) = six.data() else { panic!("expected collapsed matrix") };
        assert_eq!(m.at(0, 0), &BigInt::from(6));
    }

    #[test]
    fn element_map_checks_sizes() {
        let z2 = GroupObject::FgAb(FgAbGroup::cyclic(2));
        let bad = GroupHom::element_map(z2.clone(), z2.clone(), vec![z2.identity()]);
        assert!(bad.is_err());
        let ok = GroupHom::element_map(
            z2.clone(),
            z2.clone(),
            vec![z2.identity(), z2.identity()],
        )
        .unwrap();
        assert!(ok.verify_multiplicative());
    }

    #[test]
    fn group_object_wire() {
        let g = z2xz3();
        let s = serde_json::to_string(&g).unwrap();
        let back: GroupObject = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let cat: GroupObject = serde_json::from_str(r#"{"kind":"catalog","name":"Q8"}"#).unwrap();
        assert_eq!(cat.carrier_size(), Some(BigInt::from(8)));
        assert!(serde_json::from_str::<GroupObject>(r#"{"kind":"catalog","name":"nope"}"#).is_err());
    }
}
