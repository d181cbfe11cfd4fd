//! Branch data of finite groups acting on the projective line.
//!
//! A finite group `G` acting tamely on P¹ has one branch orbit per
//! conjugacy class of maximal cyclic subgroups `C`, counted
//! `2 / [N_G(C) : C]` times. These orbits are exactly the cusps of the
//! elementary Kato tree of `G`.

use super::{
    make_catalog_group, maximal_cyclic_classes, normalizer, CatalogSpec, Group, GroupError,
    Subgroup,
};

/// Branch-orbit stabilizers of `g` (sorted by order), or `None` when `g`
/// admits no tame action on P¹ with quotient P¹. The trivial group has none.
pub fn branch_data(g: &Group) -> Option<Vec<Subgroup>> {
    if g.is_trivial() {
        return Some(Vec::new());
    }
    let classes = maximal_cyclic_classes(g).ok()?;
    let mut out = Vec::new();
    for c in classes {
        let twice = 2 * c.order();
        let norm = normalizer(g, c.members()).len();
        if twice % norm != 0 {
            return None;
        }
        for _ in 0..twice / norm {
            out.push(c.clone());
        }
    }
    // Riemann–Hurwitz for P¹ -> P¹/G: sum (1 - 1/|C|) = 2 - 2/|G|
    let n = g.order();
    let lhs: usize = out.iter().map(|c| n - n / c.order()).sum();
    if lhs != 2 * n - 2 {
        return None;
    }
    Some(out)
}

/// Cusp orders of the elementary Kato tree, as tabulated for catalog groups.
pub fn branch_table_orders(spec: &CatalogSpec) -> Option<Vec<usize>> {
    let mut v = match spec {
        CatalogSpec::Cyclic(n) if *n >= 2 => vec![*n, *n],
        CatalogSpec::Dihedral(n) => vec![2, 2, *n],
        CatalogSpec::A4 => vec![2, 3, 3],
        CatalogSpec::S4 => vec![2, 3, 4],
        CatalogSpec::A5 => vec![2, 3, 5],
        _ => return None,
    };
    v.sort_unstable();
    Some(v)
}

/// Compares the table entry for `spec` against [`branch_data`].
pub fn validate_branch_table(spec: &CatalogSpec) -> Result<Vec<usize>, GroupError> {
    let table =
        branch_table_orders(spec).ok_or_else(|| GroupError::NoBranchData(spec.to_string()))?;
    let g = make_catalog_group(spec)?;
    let oracle: Vec<usize> = branch_data(&g)
        .ok_or_else(|| GroupError::NoBranchData(spec.to_string()))?
        .iter()
        .map(Subgroup::order)
        .collect();
    if oracle != table {
        return Err(GroupError::BranchTableMismatch { name: spec.to_string(), table, oracle });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog_group;

    fn orders(name: &str) -> Option<Vec<usize>> {
        branch_data(&catalog_group(name).unwrap()).map(|v| v.iter().map(Subgroup::order).collect())
    }

    #[test]
    fn spherical_groups_have_branch_data() {
        assert_eq!(orders("C1"), Some(vec![]));
        assert_eq!(orders("C5"), Some(vec![5, 5]));
        assert_eq!(orders("D2"), Some(vec![2, 2, 2]));
        assert_eq!(orders("D3"), Some(vec![2, 2, 3]));
        assert_eq!(orders("D4"), Some(vec![2, 2, 4]));
        assert_eq!(orders("A4"), Some(vec![2, 3, 3]));
        assert_eq!(orders("S4"), Some(vec![2, 3, 4]));
        assert_eq!(orders("A5"), Some(vec![2, 3, 5]));
    }

    #[test]
    fn non_spherical_groups_have_none() {
        assert_eq!(orders("C2xC4"), None);
        assert_eq!(orders("C2xC2xC2"), None);
        assert_eq!(orders("C3xC3"), None);
        assert_eq!(orders("C2xA4"), None);
    }

    #[test]
    fn table_agrees_with_oracle() {
        for name in ["C2", "C7", "D3", "D4", "D5", "D6", "A4", "S4", "A5"] {
            validate_branch_table(&name.parse().unwrap()).unwrap();
        }
        assert!(validate_branch_table(&"C2xC2".parse().unwrap()).is_err());
    }

    #[test]
    fn odd_dihedral_involution_class_counted_twice() {
        let d3 = catalog_group("D3").unwrap();
        let data = branch_data(&d3).unwrap();
        assert_eq!(data[0].members(), data[1].members());
    }
}
