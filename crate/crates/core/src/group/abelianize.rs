use num_bigint::BigInt;
use num_traits::One;

use crate::abgroup::FgAbGroup;
use crate::linalg::{cokernel_with_projection, CokernelPresentation, IntMatrix};

use super::finite::FiniteGroup;
use super::object::{GroupElement, GroupHom, GroupObject, ObjectError};

/// Abelianization plus the natural projection onto it.
#[derive(Debug, Clone)]
pub struct Abelianization {
    pub group: FgAbGroup,
    pub projection: GroupHom,
}

/// Canonical form of a finite direct sum of fgab groups, with the
/// coordinate change from concatenated part-coordinates.
pub fn direct_sum_with_projection(parts: &[FgAbGroup]) -> (FgAbGroup, CokernelPresentation) {
    let cols: usize = parts.iter().map(|p| p.dims()).sum();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    let mut offset = 0;
    for p in parts {
        for (i, d) in p.invariant_factors().iter().enumerate() {
            let mut row = vec![BigInt::from(0); cols];
            row[offset + i] = d.clone();
            rows.push(row);
        }
        offset += p.dims();
    }
    let flat: Vec<BigInt> = rows.iter().flatten().cloned().collect();
    let rel = IntMatrix::new(rows.len(), cols, flat).expect("shape by construction");
    let pres = cokernel_with_projection(&rel);
    let group = FgAbGroup::new(pres.structure.invariant_factors.clone(), pres.structure.free_rank)
        .expect("smith normal form emits a divisibility chain");
    (group, pres)
}

/// Abelianize a finite group through its commutator subgroup: quotient
/// table first, then the quotient's pair presentation through Smith normal
/// form. Returns the canonical group plus per-element coordinates.
fn abelianize_finite(g: &FiniteGroup) -> (FgAbGroup, Vec<Vec<BigInt>>) {
    let c = g.commutator_subgroup();
    let (q, coset_of) = g.quotient_by_normal(&c.elements).expect("commutator subgroup is normal");
    let pres = cokernel_with_projection(&pair_presentation(&q));
    let group = FgAbGroup::new(pres.structure.invariant_factors.clone(), pres.structure.free_rank)
        .expect("smith normal form emits a divisibility chain");
    let coset_coords: Vec<Vec<BigInt>> = (0..q.order())
        .map(|j| {
            let mut unit = vec![BigInt::from(0); q.order()];
            unit[j] = BigInt::one();
            pres.project(&unit).expect("dims fixed")
        })
        .collect();
    let coords = (0..g.order()).map(|e| coset_coords[coset_of[e]].clone()).collect();
    (group, coords)
}

/// The relations `e_a + e_b - e_{ab}` over one generator per element.
fn pair_presentation(g: &FiniteGroup) -> IntMatrix {
    let n = g.order();
    let mut rows: Vec<BigInt> = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            let mut row = vec![BigInt::from(0); n];
            row[a] += 1;
            row[b] += 1;
            row[g.mul(a, b)] -= 1;
            rows.extend(row);
        }
    }
    IntMatrix::new(n * n, n, rows).expect("shape by construction")
}

/// Independent route used for cross-checking: abelianize by running Smith
/// normal form on the full pair presentation of the group itself, without
/// computing the commutator subgroup first.
pub fn abelianization_by_presentation(g: &FiniteGroup) -> FgAbGroup {
    let pres = cokernel_with_projection(&pair_presentation(g));
    FgAbGroup::new(pres.structure.invariant_factors.clone(), pres.structure.free_rank)
        .expect("smith normal form emits a divisibility chain")
}

/// Third route, for abelian tables only: recover the invariant factors from
/// the counts of n-torsion elements, one prime at a time. No linear algebra
/// involved.
pub fn ab_invariants_by_counting(g: &FiniteGroup) -> Option<Vec<BigInt>> {
    if !g.is_abelian() {
        return None;
    }
    let order = g.order() as u64;
    let mut exponents_per_prime: Vec<(u64, Vec<u32>)> = Vec::new();
    let mut rest = order;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            while rest % p == 0 {
                rest /= p;
            }
            exponents_per_prime.push((p, p_exponent_partition(g, p)?));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        exponents_per_prime.push((rest, p_exponent_partition(g, rest)?));
    }
    // parts are descending per prime, so zipping them largest-first keeps
    // the divisibility chain
    let depth = exponents_per_prime.iter().map(|(_, parts)| parts.len()).max().unwrap_or(0);
    let mut descending = Vec::new();
    for i in 0..depth {
        let mut f = BigInt::one();
        for (q, parts) in &exponents_per_prime {
            if let Some(&e) = parts.get(i) {
                f *= BigInt::from(*q).pow(e);
            }
        }
        descending.push(f);
    }
    descending.reverse();
    Some(descending.into_iter().filter(|f| !f.is_one()).collect())
}

/// Partition of p-exponents of the cyclic p-power factors, descending.
/// Counts of p^k-torsion elements determine it: the jumps of
/// log_p #{x : p^k x = 0} are the conjugate partition.
fn p_exponent_partition(g: &FiniteGroup, p: u64) -> Option<Vec<u32>> {
    let mut log_counts = vec![0u32];
    let mut pk: u64 = 1;
    loop {
        pk = pk.saturating_mul(p);
        let count =
            g.elements().filter(|&x| g.pow(x, pk as i64) == g.identity()).count() as u64;
        let mut log = 0u32;
        let mut c = count;
        while c % p == 0 {
            c /= p;
            log += 1;
        }
        if c != 1 {
            return None;
        }
        if log == *log_counts.last().unwrap() {
            break;
        }
        log_counts.push(log);
    }
    let conjugate: Vec<u32> = log_counts.windows(2).map(|w| w[1] - w[0]).collect();
    let max_j = conjugate.iter().copied().max().unwrap_or(0);
    let mut parts: Vec<u32> =
        (1..=max_j).map(|j| conjugate.iter().filter(|&&m| m >= j).count() as u32).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Some(parts)
}

/// The abelianization of any group object, with its projection:
/// finite groups go through the commutator quotient, free groups through
/// exponent sums, fgab groups are their own abelianization, and products
/// abelianize componentwise.
pub fn abelianization(g: &GroupObject) -> Abelianization {
    match g {
        GroupObject::Finite(fg) => {
            let (group, coords) = abelianize_finite(fg);
            let images = coords
                .into_iter()
                .map(|c| GroupElement::FgAb(group.element(c).expect("projected coords")))
                .collect();
            let projection =
                GroupHom::element_map(g.clone(), GroupObject::FgAb(group.clone()), images)
                    .expect("one image per element");
            Abelianization { group, projection }
        }
        GroupObject::Free { rank } => {
            let group = FgAbGroup::free(*rank);
            let images =
                (0..*rank).map(|i| GroupElement::FgAb(group.generator(i))).collect();
            let projection =
                GroupHom::generator_images(*rank, GroupObject::FgAb(group.clone()), images)
                    .expect("one image per generator");
            Abelianization { group, projection }
        }
        GroupObject::FgAb(a) => {
            Abelianization { group: a.clone(), projection: GroupHom::identity(g.clone()) }
        }
        GroupObject::Product(cs) => {
            let parts: Vec<Abelianization> = cs.iter().map(abelianization).collect();
            let part_groups: Vec<FgAbGroup> = parts.iter().map(|p| p.group.clone()).collect();
            let (group, pres) = direct_sum_with_projection(&part_groups);
            let mid = GroupObject::Product(
                part_groups.iter().cloned().map(GroupObject::FgAb).collect(),
            );
            let stage1 = GroupHom::componentwise(
                g,
                &mid,
                parts.into_iter().map(|p| p.projection).collect(),
            )
            .expect("componentwise endpoints match");
            let stage2 = GroupHom::flatten_sum(mid, group.clone(), pres);
            let projection = GroupHom::compose(stage1, stage2).expect("endpoints match");
            Abelianization { group, projection }
        }
    }
}

/// The commutator subgroup as a group object plus its inclusion.
/// Finite carriers only (free groups are out).
pub fn commutator_subobject(g: &GroupObject) -> Result<(GroupObject, GroupHom), ObjectError> {
    match g {
        GroupObject::Finite(fg) => {
            let sub = fg.commutator_subgroup();
            let object = GroupObject::finite(sub.group.clone());
            let images = sub.inclusion.iter().map(|&id| GroupElement::Finite(id)).collect();
            let inclusion = GroupHom::element_map(object.clone(), g.clone(), images)?;
            Ok((object, inclusion))
        }
        GroupObject::FgAb(_) => {
            let object = GroupObject::trivial();
            let inclusion =
                GroupHom::element_map(object.clone(), g.clone(), vec![g.identity()])?;
            Ok((object, inclusion))
        }
        GroupObject::Product(cs) => {
            let parts: Result<Vec<_>, _> = cs.iter().map(commutator_subobject).collect();
            let (objects, inclusions): (Vec<_>, Vec<_>) = parts?.into_iter().unzip();
            let object = GroupObject::Product(objects);
            let inclusion = GroupHom::componentwise(&object, g, inclusions)?;
            Ok((object, inclusion))
        }
        GroupObject::Free { .. } => Err(ObjectError::BadHom(
            "commutator subgroup of a free group is not finitely enumerable".into(),
        )),
    }
}

/// Matrix of the induced map on abelianizations. Representatives are found
/// by scanning the (finite) domain for preimages of canonical generators,
/// or taken directly for free and fgab domains.
pub fn induced_ab_map(
    f: &GroupHom,
    ab_dom: &Abelianization,
    ab_cod: &Abelianization,
) -> Result<GroupHom, ObjectError> {
    let dims = ab_dom.group.dims();
    let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(dims);
    for j in 0..dims {
        let target = GroupElement::FgAb(ab_dom.group.generator(j));
        let rep = find_projection_preimage(&f.domain, &ab_dom.projection, &target)?;
        let image = ab_cod.projection.apply(&f.apply(&rep));
        let GroupElement::FgAb(x) = image else {
            return Err(ObjectError::BadHom("projection did not land in fgab".into()));
        };
        cols.push(x.coords().to_vec());
    }
    let m = IntMatrix::from_fn(ab_cod.group.dims(), dims, |r, c| cols[c][r].clone());
    let hom = GroupHom::matrix(&ab_dom.group, &ab_cod.group, m)?;
    // functoriality spot-check on finite domains: the square commutes
    if let Some(elements) = f.domain.elements() {
        for el in &elements {
            let through_top = ab_cod.projection.apply(&f.apply(el));
            let through_bottom = hom.apply(&ab_dom.projection.apply(el));
            if through_top != through_bottom {
                return Err(ObjectError::BadHom("induced map square does not commute".into()));
            }
        }
    }
    Ok(hom)
}

fn find_projection_preimage(
    domain: &GroupObject,
    projection: &GroupHom,
    target: &GroupElement,
) -> Result<GroupElement, ObjectError> {
    match domain {
        GroupObject::FgAb(_) => Ok(target.clone()),
        GroupObject::Free { rank } => {
            // exponent-sum projection: generator j lifts to generator word j
            let GroupElement::FgAb(x) = target else {
                return Err(ObjectError::BadHom("bad target".into()));
            };
            let j = x
                .coords()
                .iter()
                .position(|c| c.is_one())
                .ok_or_else(|| ObjectError::BadHom("expected a canonical generator".into()))?;
            Ok(GroupElement::Free(
                super::free::FreeWord::generator(*rank, j)
                    .map_err(|e| ObjectError::BadHom(e.to_string()))?,
            ))
        }
        _ => {
            let elements = domain.elements().ok_or(ObjectError::NotEnumerable)?;
            elements
                .into_iter()
                .find(|g| projection.apply(g) == *target)
                .ok_or_else(|| ObjectError::BadHom("projection is not surjective?".into()))
        }
    }
}
