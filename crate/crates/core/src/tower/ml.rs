use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::abgroup::{subgroup_presentation, FgAbGroup, SubgroupPresentation};
use crate::group::{
    commutator_subobject, GroupElement, GroupHom, GroupObject, HomData,
};
use crate::linalg::IntMatrix;

use super::tower::{MultiplierRule, TailRule, Tower, TowerError};

/// Image of one `G_s -> G_t`, in a form that supports exact comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageDesc {
    /// element indices inside the level-t enumeration
    Finite { indices: Vec<usize> },
    /// subgroup of an fgab level
    Lattice(SubgroupPresentation),
}

impl ImageDesc {
    pub fn order(&self) -> Option<BigInt> {
        match self {
            ImageDesc::Finite { indices } => Some(BigInt::from(indices.len() as u64)),
            ImageDesc::Lattice(sub) => sub.group.order(),
        }
    }

    pub fn same_as(&self, other: &ImageDesc) -> bool {
        match (self, other) {
            (ImageDesc::Finite { indices: a }, ImageDesc::Finite { indices: b }) => a == b,
            (ImageDesc::Lattice(a), ImageDesc::Lattice(b)) => a.same_subgroup(b),
            _ => false,
        }
    }

    /// Set inclusion `self ⊇ other`.
    pub fn contains_image(&self, other: &ImageDesc) -> bool {
        match (self, other) {
            (ImageDesc::Finite { indices: a }, ImageDesc::Finite { indices: b }) => {
                b.iter().all(|i| a.binary_search(i).is_ok())
            }
            (ImageDesc::Lattice(a), ImageDesc::Lattice(b)) => {
                b.embedded_generators.iter().all(|g| a.contains(g))
            }
            _ => false,
        }
    }
}

/// Structural reason a stabilization claim is sound beyond the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MlCertificate {
    /// constant tail: images are frozen beyond the prefix
    IdentityTail,
    /// every connecting map is surjective by construction
    SurjectiveConnectingMaps,
    /// finite multiplication tower whose accumulated multiplier has
    /// saturated against the group exponent
    MultiplierClosure,
    /// every level is a finite group, so each image chain must terminate
    LevelwiseFinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MlVerdict {
    Stabilized { at: usize, certificate: MlCertificate },
    Undetermined { depth: usize },
}

#[derive(Debug, Clone)]
pub struct MlReport {
    pub level: usize,
    /// images of `G_s -> G_t` for `s = t ..= depth`
    pub images: Vec<ImageDesc>,
    pub verdict: MlVerdict,
}

fn fgab_matrix(hom: &GroupHom) -> Option<(FgAbGroup, FgAbGroup, IntMatrix)> {
    let (GroupObject::FgAb(a), GroupObject::FgAb(b)) = (&hom.domain, &hom.codomain) else {
        return None;
    };
    match hom.data() {
        HomData::Identity => Some((a.clone(), b.clone(), IntMatrix::identity(a.dims()))),
        HomData::Matrix(m) => Some((a.clone(), b.clone(), m.clone())),
        _ => None,
    }
}

/// Exact image of a composed map into level `t`.
fn image_of(hom: &GroupHom) -> Result<ImageDesc, TowerError> {
    if hom.domain.is_finite_carrier() {
        let elements = hom
            .image_elements()
            .ok_or_else(|| TowerError::Unsupported("carrier too large to enumerate".into()))?;
        let mut indices: Vec<usize> = elements
            .iter()
            .map(|e| hom.codomain.index_of(e).expect("image lies in codomain"))
            .collect();
        indices.sort_unstable();
        indices.dedup();
        return Ok(ImageDesc::Finite { indices });
    }
    if let Some((a, b, m)) = fgab_matrix(hom) {
        let generators: Vec<_> = (0..a.dims())
            .map(|j| b.element(m.col(j)).expect("column has codomain dims"))
            .collect();
        return Ok(ImageDesc::Lattice(subgroup_presentation(&b, &generators)));
    }
    Err(TowerError::Unsupported(
        "image computation needs a finite carrier or an fgab matrix map".into(),
    ))
}

/// Whether a finite multiplication tower's image chain into level `t` can
/// still descend after `depth`: saturation of the accumulated multiplier
/// against the exponent.
fn multiplier_saturated(
    group: &FgAbGroup,
    multipliers: &MultiplierRule,
    t: usize,
    depth: usize,
) -> bool {
    let Some(exponent) = group.exponent() else {
        return false;
    };
    if exponent.is_one() {
        return true;
    }
    // gcd of the accumulated multiplier with the exponent; that is all the
    // image subgroup depends on
    let mut acc = BigInt::one();
    for n in t..depth {
        acc = (acc * multipliers.at(n)).gcd(&exponent);
    }
    match multipliers {
        // successor multipliers sweep every prime, so the chain has
        // terminated exactly when the accumulated gcd already kills the group
        MultiplierRule::Successor => acc == exponent,
        MultiplierRule::Constant(c) => {
            // limit of gcd(c^k, e): the part of e built from primes of c
            let mut rest = exponent.clone();
            loop {
                let g = rest.gcd(&c.abs());
                if g.is_one() {
                    break;
                }
                rest /= &g;
            }
            let shared_part = &exponent / &rest;
            acc == shared_part
        }
    }
}

/// Exact image chain `im(G_s -> G_t)` with a structurally certified verdict.
/// Equality over the window is never extrapolated on its own.
pub fn image_stabilization(
    tower: &Tower,
    t: usize,
    depth: usize,
) -> Result<MlReport, TowerError> {
    if depth < t {
        return Err(TowerError::BadShape(format!("depth {depth} below level {t}")));
    }
    // range check: materialize the deepest level up front
    tower.level(depth)?;
    let mut images = Vec::with_capacity(depth - t + 1);
    for s in t..=depth {
        let hom = tower.compose_down(t, s)?;
        images.push(image_of(&hom)?);
    }
    for w in images.windows(2) {
        debug_assert!(w[0].contains_image(&w[1]), "image chain must descend");
    }
    let first_stable = (0..images.len())
        .find(|&i| images[i..].windows(2).all(|w| w[0].same_as(&w[1])))
        .unwrap_or(images.len() - 1)
        + t;
    let verdict = match tower.tail() {
        TailRule::Constant => {
            if depth + 1 >= tower.prefix_len() {
                MlVerdict::Stabilized { at: first_stable, certificate: MlCertificate::IdentityTail }
            } else {
                MlVerdict::Undetermined { depth }
            }
        }
        TailRule::ProductAccumulation { .. } => {
            MlVerdict::Stabilized { at: t, certificate: MlCertificate::SurjectiveConnectingMaps }
        }
        TailRule::Multiplication { group, multipliers } => {
            if group.free_rank() == 0 && multiplier_saturated(group, multipliers, t, depth) {
                MlVerdict::Stabilized {
                    at: first_stable,
                    certificate: MlCertificate::MultiplierClosure,
                }
            } else if matches!(multipliers, MultiplierRule::Constant(c) if c.abs().is_one()) {
                MlVerdict::Stabilized {
                    at: t,
                    certificate: MlCertificate::SurjectiveConnectingMaps,
                }
            } else {
                MlVerdict::Undetermined { depth }
            }
        }
        TailRule::None => MlVerdict::Undetermined { depth },
    };
    Ok(MlReport { level: t, images, verdict })
}

/// Structural Mittag-Leffler certificate for the whole tower, independent
/// of any window.
pub fn ml_certificate(tower: &Tower) -> Option<MlCertificate> {
    match tower.tail() {
        TailRule::Constant => Some(MlCertificate::IdentityTail),
        TailRule::ProductAccumulation { .. } => Some(MlCertificate::SurjectiveConnectingMaps),
        TailRule::Multiplication { group, multipliers } => {
            if group.free_rank() == 0 {
                Some(MlCertificate::LevelwiseFinite)
            } else if matches!(multipliers, MultiplierRule::Constant(c) if c.abs().is_one()) {
                Some(MlCertificate::SurjectiveConnectingMaps)
            } else {
                None
            }
        }
        TailRule::None => None,
    }
}

/// One level of a derived subtower.
#[derive(Debug, Clone)]
pub struct DerivedLevel {
    /// the windowed intersection as a standalone group object
    pub group: GroupObject,
    /// embedding back into the tower level (None when the level is full and
    /// the original object is reused)
    pub inclusion: Option<GroupHom>,
    pub full: bool,
    /// stabilization certified within the window, so this intersection is
    /// the true derived subgroup rather than a window approximation
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct DerivedTower {
    pub tower: Tower,
    pub levels: Vec<DerivedLevel>,
    /// every level certified: the window intersection is the derived tower
    pub exact: bool,
    /// levels `0..=k` are all certified (levels near the window top have
    /// shorter probe ranges and certify last)
    pub certified_through: Option<usize>,
    pub certificate: Option<MlCertificate>,
    /// checked surjectivity of the derived connecting maps over the
    /// certified prefix (None when carriers are too large to enumerate)
    pub connecting_surjective: Option<bool>,
}

/// Windowed derived subtower: level `n` carries the intersection of the
/// images `im(G_s -> G_n)` over the window, which by descent equals the
/// deepest image. Each level is marked exact only under a stabilization
/// certificate; window equality alone is never extrapolated.
pub fn derived_subtower(tower: &Tower, depth: usize) -> Result<DerivedTower, TowerError> {
    let mut certificate = None;
    let mut certified_flags = Vec::with_capacity(depth + 1);
    let mut reports = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let report = image_stabilization(tower, n, depth)?;
        match &report.verdict {
            MlVerdict::Stabilized { certificate: c, .. } => {
                certificate.get_or_insert(*c);
                certified_flags.push(true);
            }
            MlVerdict::Undetermined { .. } => certified_flags.push(false),
        }
        reports.push(report);
    }
    let exact = certified_flags.iter().all(|&c| c);
    let certified_through = if certified_flags.first().copied().unwrap_or(false) {
        Some(certified_flags.iter().take_while(|&&c| c).count() - 1)
    } else {
        None
    };

    let mut levels: Vec<DerivedLevel> = Vec::with_capacity(depth + 1);
    for (n, report) in reports.iter().enumerate() {
        let ambient = tower.level(n)?;
        let last = report.images.last().expect("window nonempty");
        let certified = certified_flags[n];
        match last {
            ImageDesc::Finite { indices } => {
                let full =
                    BigInt::from(indices.len() as u64) == ambient.carrier_size().unwrap();
                if full {
                    levels.push(DerivedLevel { group: ambient, inclusion: None, full: true, certified });
                } else {
                    let elements: Vec<GroupElement> = indices
                        .iter()
                        .map(|&i| ambient.element_at(i).expect("in range"))
                        .collect();
                    let sub = sub_object_from_elements(&ambient, &elements)?;
                    let inclusion =
                        GroupHom::element_map(sub.clone(), ambient.clone(), elements.clone())?;
                    levels.push(DerivedLevel {
                        group: sub,
                        inclusion: Some(inclusion),
                        full: false,
                        certified,
                    });
                }
            }
            ImageDesc::Lattice(sub) => {
                // always go through the abstract presentation so the
                // restricted maps have consistent coordinates
                let full =
                    (0..sub.ambient.dims()).all(|i| sub.contains(&sub.ambient.generator(i)));
                levels.push(DerivedLevel {
                    group: GroupObject::FgAb(sub.group.clone()),
                    inclusion: None,
                    full,
                    certified,
                });
            }
        }
    }

    // restricted connecting maps between consecutive derived levels
    let mut maps = Vec::with_capacity(depth);
    for n in 0..depth {
        maps.push(restricted_connecting(tower, n, &reports, &levels)?);
    }
    let groups: Vec<GroupObject> = levels.iter().map(|l| l.group.clone()).collect();
    let derived = Tower::new(groups, maps.clone(), TailRule::None)?;

    let connecting_surjective = match certified_through {
        Some(k) if k > 0 => {
            let mut all = Some(true);
            for m in &maps[..k] {
                match m.image_elements() {
                    Some(img) => {
                        let target = m.codomain.carrier_size();
                        if target != Some(BigInt::from(img.len() as u64)) {
                            all = Some(false);
                            break;
                        }
                    }
                    None => {
                        all = None;
                        break;
                    }
                }
            }
            all
        }
        _ => None,
    };

    Ok(DerivedTower {
        tower: derived,
        levels,
        exact,
        certified_through,
        certificate,
        connecting_surjective,
    })
}

fn sub_object_from_elements(
    ambient: &GroupObject,
    elements: &[GroupElement],
) -> Result<GroupObject, TowerError> {
    let n = elements.len();
    let index_of = |el: &GroupElement| elements.iter().position(|e| e == el);
    let mut rows = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            let prod = ambient.mul(&elements[i], &elements[j]);
            rows[i][j] = index_of(&prod)
                .ok_or_else(|| TowerError::BadShape("image set is not closed".into()))?;
        }
    }
    let table = crate::group::FiniteGroup::from_table(rows)
        .map_err(|e| TowerError::BadShape(e.to_string()))?;
    Ok(GroupObject::finite(table))
}

fn restricted_connecting(
    tower: &Tower,
    n: usize,
    reports: &[MlReport],
    levels: &[DerivedLevel],
) -> Result<GroupHom, TowerError> {
    let g = tower.connecting(n)?;
    let (dom_level, cod_level) = (&levels[n + 1], &levels[n]);
    let finite_kind = matches!(reports[n].images.last(), Some(ImageDesc::Finite { .. }));
    if dom_level.full && cod_level.full && finite_kind {
        return Ok(g);
    }
    match (&reports[n + 1].images.last().unwrap(), &reports[n].images.last().unwrap()) {
        (ImageDesc::Finite { indices: dom_idx }, ImageDesc::Finite { indices: cod_idx }) => {
            let dom_ambient = tower.level(n + 1)?;
            let cod_ambient = tower.level(n)?;
            let cod_elements: Vec<GroupElement> = cod_idx
                .iter()
                .map(|&i| cod_ambient.element_at(i).expect("in range"))
                .collect();
            let images = dom_idx
                .iter()
                .map(|&i| {
                    let el = dom_ambient.element_at(i).expect("in range");
                    let pushed = g.apply(&el);
                    if cod_level.full {
                        Ok(pushed)
                    } else {
                        let j = cod_elements
                            .iter()
                            .position(|e| *e == pushed)
                            .ok_or_else(|| {
                                TowerError::BadShape("image does not descend".into())
                            })?;
                        Ok(GroupElement::Finite(j))
                    }
                })
                .collect::<Result<Vec<_>, TowerError>>()?;
            Ok(GroupHom::element_map(dom_level.group.clone(), cod_level.group.clone(), images)?)
        }
        (ImageDesc::Lattice(dom_sub), ImageDesc::Lattice(cod_sub)) => {
            let (_, _, m) = fgab_matrix(&g)
                .ok_or_else(|| TowerError::Unsupported("fgab tower with non-matrix map".into()))?;
            let (GroupObject::FgAb(dom_abs), GroupObject::FgAb(cod_abs)) =
                (&dom_level.group, &cod_level.group)
            else {
                return Err(TowerError::BadShape("lattice level is not fgab".into()));
            };
            let mut cols = Vec::with_capacity(dom_abs.dims());
            for gen in &dom_sub.embedded_generators {
                let pushed = cod_sub
                    .ambient
                    .element(m.mul_vec(gen.coords()).expect("dims"))
                    .expect("dims");
                let coords = cod_sub.express(&pushed).ok_or_else(|| {
                    TowerError::BadShape("connecting map leaves the derived level".into())
                })?;
                cols.push(coords);
            }
            let matrix =
                IntMatrix::from_fn(cod_abs.dims(), dom_abs.dims(), |r, c| cols[c][r].clone());
            Ok(GroupHom::matrix(dom_abs, cod_abs, matrix)?)
        }
        _ => Err(TowerError::Unsupported("mixed level kinds in derived tower".into())),
    }
}

/// Levelwise commutator subgroups with restricted maps. Product tails
/// transport componentwise; abelian multiplication towers collapse to the
/// constant trivial tower.
pub fn commutator_tower(tower: &Tower, depth: usize) -> Result<Tower, TowerError> {
    match tower.tail() {
        TailRule::ProductAccumulation { components } => {
            let c_components = components
                .iter()
                .map(|c| commutator_subobject(c).map(|(g, _)| g))
                .collect::<Result<Vec<_>, _>>()?;
            Tower::product_accumulation(c_components)
        }
        TailRule::Multiplication { .. } => {
            Ok(Tower::constant(GroupObject::trivial()))
        }
        TailRule::Constant | TailRule::None => {
            let top = match tower.tail() {
                TailRule::Constant => tower.prefix_len().max(1) - 1,
                _ => depth.min(tower.max_level().unwrap_or(depth)),
            };
            let mut groups = Vec::with_capacity(top + 1);
            let mut incls = Vec::with_capacity(top + 1);
            for n in 0..=top {
                let (c, incl) = commutator_subobject(&tower.level(n)?)?;
                groups.push(c);
                incls.push(incl);
            }
            let mut maps = Vec::with_capacity(top);
            for n in 0..top {
                let g = tower.connecting(n)?;
                maps.push(restrict_to_subobjects(&g, &incls[n + 1], &incls[n], &groups[n + 1], &groups[n])?);
            }
            let tail = match tower.tail() {
                TailRule::Constant => TailRule::Constant,
                _ => TailRule::None,
            };
            Tower::new(groups, maps, tail)
        }
    }
}

/// Restrict `g` along inclusions of finite subobjects.
fn restrict_to_subobjects(
    g: &GroupHom,
    dom_incl: &GroupHom,
    cod_incl: &GroupHom,
    dom_sub: &GroupObject,
    cod_sub: &GroupObject,
) -> Result<GroupHom, TowerError> {
    let dom_elements = dom_sub
        .elements()
        .ok_or_else(|| TowerError::Unsupported("subobject too large".into()))?;
    let cod_elements = cod_sub
        .elements()
        .ok_or_else(|| TowerError::Unsupported("subobject too large".into()))?;
    let cod_embedded: Vec<GroupElement> = cod_elements.iter().map(|e| cod_incl.apply(e)).collect();
    let images = dom_elements
        .iter()
        .map(|e| {
            let pushed = g.apply(&dom_incl.apply(e));
            let j = cod_embedded.iter().position(|c| *c == pushed).ok_or_else(|| {
                TowerError::BadShape("map does not restrict to the subgroups".into())
            })?;
            Ok(cod_elements[j].clone())
        })
        .collect::<Result<Vec<_>, TowerError>>()?;
    Ok(GroupHom::element_map(dom_sub.clone(), cod_sub.clone(), images)?)
}

/// Check `φ(C(G_{n+1})) = C(φ(G_{n+1}))` inside `G_n` for every window
/// level: the image of the commutator subgroup is the commutator subgroup
/// of the image.
pub fn commutator_image_identity(tower: &Tower, window: usize) -> Result<bool, TowerError> {
    for n in 0..window {
        let g = tower.connecting(n)?;
        let dom = tower.level(n + 1)?;
        let (c_dom, incl) = commutator_subobject(&dom)?;
        // left side: φ(C(G_{n+1}))
        let mut lhs: Vec<GroupElement> = c_dom
            .elements()
            .ok_or_else(|| TowerError::Unsupported("carrier too large".into()))?
            .iter()
            .map(|e| g.apply(&incl.apply(e)))
            .collect();
        lhs.sort();
        lhs.dedup();
        // right side: C(φ(G_{n+1})) via closure inside the image subgroup
        let image = g
            .image_elements()
            .ok_or_else(|| TowerError::Unsupported("carrier too large".into()))?;
        let cod = tower.level(n)?;
        let image_obj = sub_object_from_elements(&cod, &image)?;
        let (c_img, c_img_incl) = commutator_subobject(&image_obj)?;
        let mut rhs: Vec<GroupElement> = c_img
            .elements()
            .ok_or_else(|| TowerError::Unsupported("carrier too large".into()))?
            .iter()
            .map(|e| {
                // embed: subgroup id -> image element of G_n
                let GroupElement::Finite(idx) = c_img_incl.apply(e) else {
                    panic!("finite embedding")
                };
                image[idx].clone()
            })
            .collect();
        rhs.sort();
        rhs.dedup();
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}
