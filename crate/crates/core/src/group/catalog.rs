//! Built-in group library: cyclic, dihedral, symmetric, alternating,
//! quaternion, and a few abelian products, all as validated Cayley tables.

use super::finite::FiniteGroup;

/// Z/n as a table (n >= 1).
pub fn cyclic(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    let rows = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    FiniteGroup::from_table(rows).expect("cyclic table is a group").with_name(format!("Z{n}"))
}

/// Dihedral group of order 2n: ids `0..n` are rotations `r^i`, ids `n..2n`
/// are reflections `s r^i`.
pub fn dihedral(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    let mul = |a: usize, b: usize| -> usize {
        let (ra, fa) = if a < n { (a, false) } else { (a - n, true) };
        let (rb, fb) = if b < n { (b, false) } else { (b - n, true) };
        // s r^i * s r^j = r^{j-i};  s r^i * r^j = s r^{i+j};  r^i * s r^j = s r^{j-i}
        match (fa, fb) {
            (false, false) => (ra + rb) % n,
            (false, true) => n + (rb + n - ra) % n,
            (true, false) => n + (ra + rb) % n,
            (true, true) => (rb + n - ra) % n,
        }
    };
    let rows = (0..2 * n).map(|a| (0..2 * n).map(|b| mul(a, b)).collect()).collect();
    FiniteGroup::from_table(rows).expect("dihedral table is a group").with_name(format!("D{n}"))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..remaining.len() {
            let v = remaining.remove(i);
            cur.push(v);
            rec(remaining, cur, out);
            cur.pop();
            remaining.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

fn permutation_group(perms: Vec<Vec<usize>>, name: &str) -> FiniteGroup {
    // compose as (p * q)(x) = p(q(x))
    let index_of = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
    let rows = perms
        .iter()
        .map(|p| {
            perms
                .iter()
                .map(|q| {
                    let composed: Vec<usize> = (0..p.len()).map(|x| p[q[x]]).collect();
                    index_of(&composed)
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table(rows).expect("permutation table is a group").with_name(name)
}

/// Symmetric group on n letters (intended for n <= 4).
pub fn symmetric(n: usize) -> FiniteGroup {
    permutation_group(permutations(n), &format!("S{n}"))
}

fn is_even(p: &[usize]) -> bool {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 0
}

/// Alternating group on n letters.
pub fn alternating(n: usize) -> FiniteGroup {
    let perms = permutations(n).into_iter().filter(|p| is_even(p)).collect();
    permutation_group(perms, &format!("A{n}"))
}

/// The quaternion group. Ids: 0:1, 1:-1, 2:i, 3:-i, 4:j, 5:-j, 6:k, 7:-k.
pub fn quaternion8() -> FiniteGroup {
    // (unit index, sign) with units 1,i,j,k
    let decode = |a: usize| (a / 2, if a % 2 == 0 { 1i32 } else { -1 });
    let encode = |unit: usize, sign: i32| unit * 2 + if sign > 0 { 0 } else { 1 };
    // multiplication of units: table[u][v] = (unit, sign)
    let unit_mul = [
        [(0, 1), (1, 1), (2, 1), (3, 1)],
        [(1, 1), (0, -1), (3, 1), (2, -1)],
        [(2, 1), (3, -1), (0, -1), (1, 1)],
        [(3, 1), (2, 1), (1, -1), (0, -1)],
    ];
    let rows = (0..8)
        .map(|a| {
            (0..8)
                .map(|b| {
                    let (ua, sa) = decode(a);
                    let (ub, sb) = decode(b);
                    let (u, s) = unit_mul[ua][ub];
                    encode(u, s * sa * sb)
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table(rows).expect("quaternion table is a group").with_name("Q8")
}

fn product_named(parts: &[FiniteGroup], name: &str) -> FiniteGroup {
    let mut it = parts.iter();
    let first = it.next().expect("nonempty product").clone();
    it.fold(first, |acc, g| acc.direct_product(g)).with_name(name)
}

/// The default catalog: cyclic groups up to order 16, the named small
/// non-abelian groups, and a few abelian products.
pub fn builtin_catalog() -> Vec<FiniteGroup> {
    let mut out: Vec<FiniteGroup> = (1..=16).map(cyclic).collect();
    out.push(product_named(&[cyclic(2), cyclic(2)], "Z2xZ2"));
    out.push(product_named(&[cyclic(2), cyclic(4)], "Z2xZ4"));
    out.push(product_named(&[cyclic(2), cyclic(2), cyclic(2)], "Z2xZ2xZ2"));
    out.push(product_named(&[cyclic(2), cyclic(6)], "Z2xZ6"));
    out.push(product_named(&[cyclic(2), cyclic(8)], "Z2xZ8"));
    out.push(product_named(&[cyclic(3), cyclic(3)], "Z3xZ3"));
    out.push(product_named(&[cyclic(4), cyclic(4)], "Z4xZ4"));
    out.push(product_named(&[cyclic(2), cyclic(2), cyclic(4)], "Z2xZ2xZ4"));
    out.push(symmetric(3));
    out.push(symmetric(4));
    out.push(alternating(4));
    out.push(quaternion8());
    out.push(dihedral(4));
    out.push(dihedral(5));
    out.push(dihedral(6));
    out.push(dihedral(7));
    out.push(dihedral(8));
    out
}

/// Look a group up by name; `Z<n>` is parsed for any reasonable n.
pub fn by_name(name: &str) -> Option<FiniteGroup> {
    if let Some(rest) = name.strip_prefix('Z') {
        if !rest.contains('x') {
            if let Ok(n) = rest.parse::<usize>() {
                if (1..=4096).contains(&n) {
                    return Some(cyclic(n));
                }
            }
        }
    }
    builtin_catalog().into_iter().find(|g| g.name() == Some(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_are_right() {
        assert_eq!(symmetric(3).order(), 6);
        assert_eq!(symmetric(4).order(), 24);
        assert_eq!(alternating(4).order(), 12);
        assert_eq!(quaternion8().order(), 8);
        assert_eq!(dihedral(4).order(), 8);
        assert_eq!(dihedral(6).order(), 12);
    }

    #[test]
    fn abelianness() {
        assert!(cyclic(12).is_abelian());
        assert!(!symmetric(3).is_abelian());
        assert!(!quaternion8().is_abelian());
        assert!(!dihedral(4).is_abelian());
    }

    #[test]
    fn q8_relations() {
        let q8 = quaternion8();
        let (i, j, k, minus_one) = (2, 4, 6, 1);
        assert_eq!(q8.mul(i, i), minus_one);
        assert_eq!(q8.mul(j, j), minus_one);
        assert_eq!(q8.mul(i, j), k);
        assert_eq!(q8.mul(j, i), q8.inv(k));
        // -1 = [i, j]
        assert_eq!(q8.commutator(i, j), minus_one);
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(by_name("Q8").unwrap().order(), 8);
        assert_eq!(by_name("Z40").unwrap().order(), 40);
        assert_eq!(by_name("Z2xZ4").unwrap().order(), 8);
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn whole_catalog_validates() {
        let cat = builtin_catalog();
        assert!(cat.len() > 20);
        for g in &cat {
            assert!(g.order() >= 1);
            assert!(g.name().is_some());
        }
    }
}
