use std::collections::BTreeSet;
use std::fmt;

use super::{Elem, ElementSet, FiniteGroup, Group, GroupError, GroupInjection, ORDER_BOUND};

/// A subgroup of `parent`, as a closed set of parent elements.
#[derive(Clone)]
pub struct Subgroup {
    parent: Group,
    members: ElementSet,
}

impl Subgroup {
    /// Checks closure (and hence the subgroup axioms, the parent being finite).
    pub fn new(parent: Group, members: ElementSet) -> Option<Subgroup> {
        if !members.contains(parent.identity()) {
            return None;
        }
        for a in members.iter() {
            if !members.contains(parent.inv(a)) {
                return None;
            }
            for b in members.iter() {
                if !members.contains(parent.mul(a, b)) {
                    return None;
                }
            }
        }
        Some(Subgroup { parent, members })
    }

    pub fn parent(&self) -> &Group {
        &self.parent
    }

    pub fn members(&self) -> ElementSet {
        self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.members.contains(x)
    }

    pub fn is_cyclic(&self) -> bool {
        self.members.iter().any(|x| self.parent.element_order(x) == self.order())
    }

    /// `g H g⁻¹`.
    pub fn conjugate(&self, g: Elem) -> Subgroup {
        Subgroup {
            parent: self.parent.clone(),
            members: conjugate_set(&self.parent, self.members, g),
        }
    }

    /// The subgroup as an abstract group (element names inherited from the
    /// parent), together with its inclusion into the parent.
    pub fn to_group(&self, name: &str) -> Result<(Group, GroupInjection), GroupError> {
        let elems: Vec<Elem> = self.members.iter().collect();
        let mut index = vec![usize::MAX; self.parent.order()];
        for (i, &x) in elems.iter().enumerate() {
            index[x] = i;
        }
        let table = elems
            .iter()
            .flat_map(|&a| elems.iter().map(move |&b| (a, b)))
            .map(|(a, b)| index[self.parent.mul(a, b)])
            .collect();
        let names = elems.iter().map(|&x| self.parent.element_name(x).to_string()).collect();
        let group = std::sync::Arc::new(FiniteGroup::new(name, names, table)?);
        let inclusion = GroupInjection::new(group.clone(), self.parent.clone(), elems)?;
        Ok((group, inclusion))
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && super::same_group(&self.parent, &other.parent)
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.members.iter().map(|x| self.parent.element_name(x)).collect();
        write!(f, "Subgroup<{}>{{{}}}", self.parent.name(), names.join(","))
    }
}

fn conjugate_set(g: &FiniteGroup, set: ElementSet, by: Elem) -> ElementSet {
    set.iter().map(|x| g.conj(by, x)).collect()
}

/// Representative of the conjugacy class of `set`: the conjugate with the
/// smallest bit pattern.
pub fn conjugacy_rep(g: &FiniteGroup, set: ElementSet) -> ElementSet {
    (0..g.order()).map(|by| conjugate_set(g, set, by)).min().unwrap_or(set)
}

pub fn normalizer(g: &FiniteGroup, set: ElementSet) -> ElementSet {
    (0..g.order()).filter(|&by| conjugate_set(g, set, by) == set).collect()
}

fn check_bound(g: &FiniteGroup) -> Result<(), GroupError> {
    if g.order() > ORDER_BOUND {
        return Err(GroupError::OrderTooLarge { order: g.order(), bound: ORDER_BOUND });
    }
    Ok(())
}

/// All cyclic subgroups, as distinct element sets.
pub fn cyclic_subgroups(g: &FiniteGroup) -> Vec<ElementSet> {
    let set: BTreeSet<ElementSet> =
        (0..g.order()).map(|x| g.generate(ElementSet::singleton(x))).collect();
    set.into_iter().collect()
}

/// Every subgroup: joins of cyclic subgroups, closed under further joins.
pub fn all_subgroups(g: &FiniteGroup) -> Vec<ElementSet> {
    let cyclic = cyclic_subgroups(g);
    let mut found: BTreeSet<ElementSet> = cyclic.iter().copied().collect();
    let mut frontier: Vec<ElementSet> = cyclic.clone();
    while let Some(h) = frontier.pop() {
        for &c in &cyclic {
            if c.is_subset(h) {
                continue;
            }
            let joined = g.generate(h.union(c));
            if found.insert(joined) {
                frontier.push(joined);
            }
        }
    }
    found.into_iter().collect()
}

/// One representative per conjugacy class of subgroups, sorted by order and
/// then by the representative's element set.
pub fn subgroups_up_to_conjugacy(g: &Group) -> Result<Vec<Subgroup>, GroupError> {
    check_bound(g)?;
    let reps: BTreeSet<(usize, ElementSet)> =
        all_subgroups(g).into_iter().map(|h| (h.len(), conjugacy_rep(g, h))).collect();
    Ok(reps.into_iter().map(|(_, members)| Subgroup { parent: g.clone(), members }).collect())
}

/// Conjugacy-class representatives of the maximal cyclic subgroups, sorted
/// like [`subgroups_up_to_conjugacy`].
pub fn maximal_cyclic_classes(g: &Group) -> Result<Vec<Subgroup>, GroupError> {
    check_bound(g)?;
    if g.is_trivial() {
        return Err(GroupError::TrivialGroup);
    }
    let cyclic: Vec<ElementSet> = cyclic_subgroups(g).into_iter().filter(|c| c.len() > 1).collect();
    let maximal = cyclic.iter().filter(|&&c| !cyclic.iter().any(|&d| d != c && c.is_subset(d)));
    let reps: BTreeSet<(usize, ElementSet)> =
        maximal.map(|&c| (c.len(), conjugacy_rep(g, c))).collect();
    Ok(reps.into_iter().map(|(_, members)| Subgroup { parent: g.clone(), members }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog_group;

    /// Independent oracle: closure check over every subset (tiny groups only).
    fn brute_force_subgroups(g: &FiniteGroup) -> Vec<ElementSet> {
        let n = g.order();
        (0u128..(1 << n))
            .map(ElementSet)
            .filter(|&s| {
                s.contains(g.identity())
                    && s.iter().all(|a| s.iter().all(|b| s.contains(g.mul(a, b))))
            })
            .collect()
    }

    fn class_count_oracle(g: &FiniteGroup) -> usize {
        let subs = brute_force_subgroups(g);
        let reps: BTreeSet<ElementSet> = subs.iter().map(|&s| conjugacy_rep(g, s)).collect();
        reps.len()
    }

    #[test]
    fn small_subgroup_lattices() {
        let c2 = catalog_group("C2").unwrap();
        let subs = subgroups_up_to_conjugacy(&c2).unwrap();
        assert_eq!(subs.iter().map(Subgroup::order).collect::<Vec<_>>(), vec![1, 2]);

        let c4 = catalog_group("C4").unwrap();
        let subs = subgroups_up_to_conjugacy(&c4).unwrap();
        assert_eq!(subs.iter().map(Subgroup::order).collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(class_count_oracle(&c4), 3);

        let v4 = catalog_group("D2").unwrap();
        let subs = subgroups_up_to_conjugacy(&v4).unwrap();
        assert_eq!(subs.iter().map(Subgroup::order).collect::<Vec<_>>(), vec![1, 2, 2, 2, 4]);
        assert_eq!(class_count_oracle(&v4), 5);
    }

    #[test]
    fn matches_brute_force_on_small_groups() {
        for name in ["D3", "D4", "C2xC2xC2", "C6", "D5"] {
            let g = catalog_group(name).unwrap();
            assert_eq!(all_subgroups(&g).len(), brute_force_subgroups(&g).len(), "{name}");
            assert_eq!(
                subgroups_up_to_conjugacy(&g).unwrap().len(),
                class_count_oracle(&g),
                "{name}"
            );
        }
    }

    #[test]
    fn known_class_counts() {
        // classical counts of conjugacy classes of subgroups
        for (name, classes) in [("A4", 5), ("S4", 11), ("A5", 9)] {
            let g = catalog_group(name).unwrap();
            assert_eq!(subgroups_up_to_conjugacy(&g).unwrap().len(), classes, "{name}");
        }
    }

    #[test]
    fn every_conjugate_hits_exactly_one_representative() {
        let s4 = catalog_group("S4").unwrap();
        let reps = subgroups_up_to_conjugacy(&s4).unwrap();
        for h in &reps {
            for g in 0..s4.order() {
                let c = h.conjugate(g);
                let hits = reps
                    .iter()
                    .filter(|r| (0..s4.order()).any(|x| r.conjugate(x).members() == c.members()))
                    .count();
                assert_eq!(hits, 1);
            }
        }
    }

    #[test]
    fn maximal_cyclic_orders() {
        let c6 = catalog_group("C6").unwrap();
        let m = maximal_cyclic_classes(&c6).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].order(), 6);

        let orders = |name: &str| -> Vec<usize> {
            maximal_cyclic_classes(&catalog_group(name).unwrap())
                .unwrap()
                .iter()
                .map(Subgroup::order)
                .collect()
        };
        assert_eq!(orders("A4"), vec![2, 3]);
        assert_eq!(orders("S4"), vec![2, 3, 4]);
        assert_eq!(orders("A5"), vec![2, 3, 5]);
        assert!(matches!(
            maximal_cyclic_classes(&catalog_group("C1").unwrap()),
            Err(GroupError::TrivialGroup)
        ));
    }

    #[test]
    fn maximal_cyclic_matches_brute_force() {
        for name in ["A4", "S4", "D4", "D6"] {
            let g = catalog_group(name).unwrap();
            let subs = brute_force_subgroups(&g);
            let cyclic: Vec<ElementSet> = subs
                .iter()
                .copied()
                .filter(|s| s.len() > 1 && s.iter().any(|x| g.element_order(x) == s.len()))
                .collect();
            let maximal: BTreeSet<ElementSet> = cyclic
                .iter()
                .copied()
                .filter(|&c| !cyclic.iter().any(|&d| d != c && c.is_subset(d)))
                .map(|c| conjugacy_rep(&g, c))
                .collect();
            let got: BTreeSet<ElementSet> =
                maximal_cyclic_classes(&g).unwrap().iter().map(Subgroup::members).collect();
            assert_eq!(got, maximal, "{name}");
        }
    }
}
