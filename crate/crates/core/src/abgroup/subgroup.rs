//! Subgroups of finitely generated abelian groups, presented by generator
//! lists. All the lattice work routes through Smith normal form, so this is
//! exact for free ranks and torsion alike.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::linalg::{
    cokernel_with_projection, invert_unimodular, smith_normal_form, solve_linear, IntMatrix,
    LinearSolution,
};

use super::fgab::{AbElement, FgAbGroup};

/// A subgroup of an ambient fgab group: abstract canonical form plus the
/// embedded images of its canonical generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupPresentation {
    pub ambient: FgAbGroup,
    pub group: FgAbGroup,
    /// embedded image of each canonical generator of `group`
    pub embedded_generators: Vec<AbElement>,
}

/// Columns of the ambient's torsion relations (`d_i e_i`).
fn torsion_columns(ambient: &FgAbGroup) -> Vec<Vec<BigInt>> {
    let dims = ambient.dims();
    ambient
        .invariant_factors()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let mut col = vec![BigInt::zero(); dims];
            col[i] = d.clone();
            col
        })
        .collect()
}

fn columns_to_matrix(dims: usize, cols: &[Vec<BigInt>]) -> IntMatrix {
    IntMatrix::from_fn(dims, cols.len(), |r, c| cols[c][r].clone())
}

/// Present the subgroup generated by the given elements.
pub fn subgroup_presentation(
    ambient: &FgAbGroup,
    generators: &[AbElement],
) -> SubgroupPresentation {
    let dims = ambient.dims();
    // lift: lattice L spanned by the generator coordinates and the torsion
    // relations; the subgroup is L modulo the torsion lattice
    let mut cols: Vec<Vec<BigInt>> = generators
        .iter()
        .inspect(|g| assert_eq!(g.group(), ambient, "generator of a different group"))
        .map(|g| g.coords().to_vec())
        .collect();
    let relations = torsion_columns(ambient);
    cols.extend(relations.iter().cloned());
    let m = columns_to_matrix(dims, &cols);
    // column lattice basis: with U A V = S, im(A) = U^{-1} im(S)
    let dec = smith_normal_form(&m);
    let uinv = invert_unimodular(&dec.u).expect("transform is unimodular");
    let basis: Vec<Vec<BigInt>> = (0..dec.rank)
        .map(|i| {
            let d = dec.s.at(i, i);
            uinv.col(i).iter().map(|e| e * d).collect()
        })
        .collect();
    // relations among the basis: torsion columns expressed in basis coords
    let basis_m = columns_to_matrix(dims, &basis);
    let mut rel_rows: Vec<Vec<BigInt>> = Vec::new();
    for r in &relations {
        match solve_linear(&basis_m, r).expect("dims agree") {
            LinearSolution::Solvable { particular, .. } => rel_rows.push(particular),
            LinearSolution::Unsolvable(_) => {
                unreachable!("torsion columns lie in the lattice by construction")
            }
        }
    }
    let flat: Vec<BigInt> = rel_rows.iter().flatten().cloned().collect();
    let rel = IntMatrix::new(rel_rows.len(), basis.len(), flat).expect("shape by construction");
    let pres = cokernel_with_projection(&rel);
    let group = FgAbGroup::new(pres.structure.invariant_factors.clone(), pres.structure.free_rank)
        .expect("smith normal form emits a divisibility chain");
    // embedded canonical generators: invert the diagonalizing transform and
    // read off the basis combination for each surviving coordinate
    let tinv = invert_unimodular(&pres.transform).expect("transform is unimodular");
    let mut embedded_generators = Vec::with_capacity(group.dims());
    for (i, d) in pres.diagonal.iter().enumerate() {
        if d > &BigInt::from(1) {
            embedded_generators.push(embed_basis_combination(ambient, &basis_m, &tinv.col(i)));
        }
    }
    for i in pres.rank..basis.len() {
        embedded_generators.push(embed_basis_combination(ambient, &basis_m, &tinv.col(i)));
    }
    debug_assert_eq!(embedded_generators.len(), group.dims());
    SubgroupPresentation { ambient: ambient.clone(), group, embedded_generators }
}

fn embed_basis_combination(
    ambient: &FgAbGroup,
    basis_m: &IntMatrix,
    combo: &[BigInt],
) -> AbElement {
    let coords = basis_m.mul_vec(combo).expect("dims agree");
    ambient.element(coords).expect("dims agree")
}

impl SubgroupPresentation {
    /// Coordinates of `el` relative to the subgroup's canonical generators,
    /// or `None` when `el` is outside the subgroup.
    pub fn express(&self, el: &AbElement) -> Option<Vec<BigInt>> {
        assert_eq!(el.group(), &self.ambient, "element of a different group");
        let dims = self.ambient.dims();
        let mut cols: Vec<Vec<BigInt>> =
            self.embedded_generators.iter().map(|g| g.coords().to_vec()).collect();
        let gen_count = cols.len();
        cols.extend(torsion_columns(&self.ambient));
        let m = columns_to_matrix(dims, &cols);
        match solve_linear(&m, el.coords()).expect("dims agree") {
            LinearSolution::Solvable { particular, .. } => {
                Some(particular[..gen_count].to_vec())
            }
            LinearSolution::Unsolvable(_) => None,
        }
    }

    pub fn contains(&self, el: &AbElement) -> bool {
        self.express(el).is_some()
    }

    /// Set equality with another subgroup of the same ambient group, by
    /// mutual membership of generators.
    pub fn same_subgroup(&self, other: &SubgroupPresentation) -> bool {
        self.ambient == other.ambient
            && other.embedded_generators.iter().all(|g| self.contains(g))
            && self.embedded_generators.iter().all(|g| other.contains(g))
    }

    /// Map an abstract coordinate vector of the subgroup into the ambient
    /// group.
    pub fn embed(&self, coords: &[BigInt]) -> AbElement {
        assert_eq!(coords.len(), self.group.dims());
        let mut acc = self.ambient.zero();
        for (g, c) in self.embedded_generators.iter().zip(coords) {
            acc = acc.add(&g.scalar_mul(c));
        }
        acc
    }
}

/// Kernel and cokernel of a homomorphism `A -> B` given by an integer
/// matrix on canonical coordinates (columns = images of `A`'s generators).
pub fn map_kernel_cokernel(
    m: &IntMatrix,
    a: &FgAbGroup,
    b: &FgAbGroup,
) -> (FgAbGroup, FgAbGroup) {
    assert_eq!(m.rows(), b.dims(), "matrix rows must match the codomain");
    assert_eq!(m.cols(), a.dims(), "matrix cols must match the domain");
    // cokernel: quotient of B by the image and B's own relations
    let mut rel_rows: Vec<Vec<BigInt>> = (0..m.cols()).map(|j| m.col(j)).collect();
    for col in torsion_columns(b) {
        rel_rows.push(col);
    }
    let flat: Vec<BigInt> = rel_rows.iter().flatten().cloned().collect();
    let rel = IntMatrix::new(rel_rows.len(), b.dims(), flat).expect("shape by construction");
    let coker = crate::linalg::cokernel_structure(&rel);
    let cokernel = FgAbGroup::new(coker.invariant_factors, coker.free_rank)
        .expect("smith normal form emits a divisibility chain");
    // kernel: x with Mx ≡ 0 mod B's relations, as a subgroup of A
    let d_cols = torsion_columns(b);
    let stacked = {
        let mut cols: Vec<Vec<BigInt>> = (0..m.cols()).map(|j| m.col(j)).collect();
        cols.extend(d_cols);
        columns_to_matrix(b.dims(), &cols)
    };
    let zero = vec![BigInt::zero(); b.dims()];
    let LinearSolution::Solvable { kernel_basis, .. } =
        solve_linear(&stacked, &zero).expect("dims agree")
    else {
        unreachable!("homogeneous system")
    };
    let generators: Vec<AbElement> = kernel_basis
        .iter()
        .map(|v| a.element(v[..a.dims()].to_vec()).expect("dims"))
        .filter(|el| !el.is_zero())
        .collect();
    let kernel = subgroup_presentation(a, &generators).group;
    (kernel, cokernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn kernel_cokernel_of_reduction() {
        // reduction Z -> Z/4: kernel 4Z = Z, cokernel trivial
        let z = FgAbGroup::free(1);
        let z4 = FgAbGroup::cyclic(4);
        let m = IntMatrix::from_i64_rows(&[vec![1]]);
        let (k, c) = map_kernel_cokernel(&m, &z, &z4);
        assert_eq!(k, FgAbGroup::free(1));
        assert!(c.is_trivial());
    }

    #[test]
    fn kernel_cokernel_of_doubling_mod_eight() {
        // x -> 2x on Z/8: kernel Z/2 (the element 4), cokernel Z/2
        let z8 = FgAbGroup::cyclic(8);
        let m = IntMatrix::from_i64_rows(&[vec![2]]);
        let (k, c) = map_kernel_cokernel(&m, &z8, &z8);
        assert_eq!(k, FgAbGroup::cyclic(2));
        assert_eq!(c, FgAbGroup::cyclic(2));
    }

    #[test]
    fn kernel_cokernel_of_isomorphism() {
        let g = FgAbGroup::new(vec![big(2), big(4)], 0).unwrap();
        let m = IntMatrix::from_i64_rows(&[vec![1, 0], vec![0, 1]]);
        let (k, c) = map_kernel_cokernel(&m, &g, &g);
        assert!(k.is_trivial());
        assert!(c.is_trivial());
    }

    #[test]
    fn subgroup_of_cyclic() {
        // 2(Z/8) = {0,2,4,6} = Z/4
        let z8 = FgAbGroup::cyclic(8);
        let two = z8.element_from_i64(&[2]).unwrap();
        let sub = subgroup_presentation(&z8, &[two.clone()]);
        assert_eq!(sub.group, FgAbGroup::cyclic(4));
        assert!(sub.contains(&two));
        assert!(sub.contains(&z8.element_from_i64(&[6]).unwrap()));
        assert!(!sub.contains(&z8.element_from_i64(&[1]).unwrap()));
        // coordinates round-trip through embed
        let coords = sub.express(&z8.element_from_i64(&[6]).unwrap()).unwrap();
        assert_eq!(sub.embed(&coords), z8.element_from_i64(&[6]).unwrap());
    }

    #[test]
    fn sublattice_of_free_group() {
        // <(2,0), (0,3)> in Z^2 is free of rank 2
        let z2 = FgAbGroup::free(2);
        let a = z2.element_from_i64(&[2, 0]).unwrap();
        let b = z2.element_from_i64(&[0, 3]).unwrap();
        let sub = subgroup_presentation(&z2, &[a, b]);
        assert_eq!(sub.group, FgAbGroup::free(2));
        assert!(sub.contains(&z2.element_from_i64(&[2, 3]).unwrap()));
        assert!(!sub.contains(&z2.element_from_i64(&[1, 0]).unwrap()));
        assert!(!sub.contains(&z2.element_from_i64(&[2, 1]).unwrap()));
    }

    #[test]
    fn subgroup_equality_by_membership() {
        let z = FgAbGroup::free(1);
        let four_a = subgroup_presentation(&z, &[z.element_from_i64(&[4]).unwrap()]);
        let four_b = subgroup_presentation(
            &z,
            &[z.element_from_i64(&[-4]).unwrap(), z.element_from_i64(&[8]).unwrap()],
        );
        let two = subgroup_presentation(&z, &[z.element_from_i64(&[2]).unwrap()]);
        assert!(four_a.same_subgroup(&four_b));
        assert!(!four_a.same_subgroup(&two));
        // 4Z is a subgroup of 2Z but not conversely
        assert!(two.contains(&z.element_from_i64(&[4]).unwrap()));
        assert!(!four_a.contains(&z.element_from_i64(&[2]).unwrap()));
    }

    #[test]
    fn mixed_torsion_subgroup() {
        // subgroup of Z/4 + Z generated by (2, 0) and (0, 2)
        let g = FgAbGroup::new(vec![big(4)], 1).unwrap();
        let a = g.element_from_i64(&[2, 0]).unwrap();
        let b = g.element_from_i64(&[0, 2]).unwrap();
        let sub = subgroup_presentation(&g, &[a, b]);
        assert_eq!(sub.group, FgAbGroup::new(vec![big(2)], 1).unwrap());
        assert!(sub.contains(&g.element_from_i64(&[2, 4]).unwrap()));
        assert!(!sub.contains(&g.element_from_i64(&[1, 0]).unwrap()));
        assert!(!sub.contains(&g.element_from_i64(&[0, 1]).unwrap()));
    }

    #[test]
    fn trivial_and_full_subgroups() {
        let g = FgAbGroup::new(vec![big(2), big(4)], 0).unwrap();
        let trivial = subgroup_presentation(&g, &[]);
        assert!(trivial.group.is_trivial());
        let full = subgroup_presentation(&g, &[g.generator(0), g.generator(1)]);
        assert_eq!(full.group, g);
        for el in g.elements().unwrap() {
            assert!(full.contains(&el));
            assert_eq!(trivial.contains(&el), el.is_zero());
        }
    }

    /// Exhaustive oracle on small finite groups: membership agrees with the
    /// generated-set closure.
    #[test]
    fn membership_matches_closure_oracle() {
        let g = FgAbGroup::new(vec![big(2), big(8)], 0).unwrap();
        let gens =
            [g.element_from_i64(&[1, 2]).unwrap(), g.element_from_i64(&[0, 4]).unwrap()];
        let sub = subgroup_presentation(&g, &gens);
        // closure by repeated addition
        let mut set = std::collections::BTreeSet::new();
        set.insert(g.zero());
        loop {
            let mut grew = false;
            let snapshot: Vec<_> = set.iter().cloned().collect();
            for x in &snapshot {
                for gen in &gens {
                    if set.insert(x.add(gen)) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        for el in g.elements().unwrap() {
            assert_eq!(sub.contains(&el), set.contains(&el), "element {el:?}");
        }
        assert_eq!(sub.group.order().unwrap(), big(set.len() as i64).into());
    }
}
