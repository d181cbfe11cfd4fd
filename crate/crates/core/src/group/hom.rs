use std::fmt;

use super::{same_group, Elem, ElementSet, Group, GroupError};

/// An injective homomorphism between finite groups, stored as an element map.
#[derive(Clone)]
pub struct GroupInjection {
    source: Group,
    target: Group,
    map: Vec<Elem>,
}

impl GroupInjection {
    /// Checks the homomorphism and injectivity laws exhaustively.
    pub fn new(source: Group, target: Group, map: Vec<Elem>) -> Result<Self, GroupError> {
        let fail = |reason: String| GroupError::NotInjective {
            source_name: source.name().to_string(),
            target: target.name().to_string(),
            reason,
        };
        if map.len() != source.order() {
            return Err(fail(format!(
                "map has {} entries, expected {}",
                map.len(),
                source.order()
            )));
        }
        if let Some(&x) = map.iter().find(|&&x| x >= target.order()) {
            return Err(fail(format!("image index {x} out of range")));
        }
        let image: ElementSet = map.iter().copied().collect();
        if image.len() != map.len() {
            return Err(fail("map is not injective".into()));
        }
        for a in 0..source.order() {
            for b in 0..source.order() {
                if map[source.mul(a, b)] != target.mul(map[a], map[b]) {
                    return Err(fail(format!(
                        "image of {}*{} differs from product of images",
                        source.element_name(a),
                        source.element_name(b)
                    )));
                }
            }
        }
        Ok(GroupInjection { source, target, map })
    }

    /// Extends images of `source.generating_set()` to a full map.
    pub fn from_generator_images(
        source: Group,
        target: Group,
        images: &[Elem],
    ) -> Result<Self, GroupError> {
        let tree = GenTree::new(&source);
        if images.len() != tree.gens.len() {
            return Err(GroupError::NotInjective {
                source_name: source.name().to_string(),
                target: target.name().to_string(),
                reason: format!(
                    "{} generator images given, expected {}",
                    images.len(),
                    tree.gens.len()
                ),
            });
        }
        let map =
            tree.extend(&source, &target, images).ok_or_else(|| GroupError::NotInjective {
                source_name: source.name().to_string(),
                target: target.name().to_string(),
                reason: "generator images do not define a homomorphism".into(),
            })?;
        GroupInjection::new(source, target, map)
    }

    pub fn identity(g: &Group) -> Self {
        GroupInjection { source: g.clone(), target: g.clone(), map: (0..g.order()).collect() }
    }

    pub fn source(&self) -> &Group {
        &self.source
    }

    pub fn target(&self) -> &Group {
        &self.target
    }

    pub fn map(&self) -> &[Elem] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, x: Elem) -> Elem {
        self.map[x]
    }

    pub fn image(&self) -> ElementSet {
        self.map.iter().copied().collect()
    }

    pub fn is_bijective(&self) -> bool {
        self.source.order() == self.target.order()
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &GroupInjection) -> GroupInjection {
        debug_assert!(same_group(&self.target, &then.source));
        GroupInjection {
            source: self.source.clone(),
            target: then.target.clone(),
            map: self.map.iter().map(|&x| then.map[x]).collect(),
        }
    }

    /// Inverse of a bijective injection.
    pub fn inverse(&self) -> Option<GroupInjection> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y] = x;
        }
        Some(GroupInjection { source: self.target.clone(), target: self.source.clone(), map: inv })
    }

    /// Post-composes with conjugation `x ↦ g x g⁻¹` in the target.
    pub fn conjugated(&self, g: Elem) -> GroupInjection {
        GroupInjection {
            source: self.source.clone(),
            target: self.target.clone(),
            map: self.map.iter().map(|&x| self.target.conj(g, x)).collect(),
        }
    }

    /// Images of `source.generating_set()`.
    pub fn generator_images(&self) -> Vec<Elem> {
        self.source.generating_set().iter().map(|&s| self.map[s]).collect()
    }

    pub(crate) fn from_parts_unchecked(source: Group, target: Group, map: Vec<Elem>) -> Self {
        GroupInjection { source, target, map }
    }
}

impl PartialEq for GroupInjection {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map
            && same_group(&self.source, &other.source)
            && same_group(&self.target, &other.target)
    }
}

impl Eq for GroupInjection {}

impl fmt::Debug for GroupInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {:?}", self.source.name(), self.target.name(), self.map)
    }
}

/// Breadth-first spanning tree of the Cayley graph on a fixed generating set;
/// every element is `parent * gens[k]` for its recorded `(parent, k)`.
pub(crate) struct GenTree {
    pub gens: Vec<Elem>,
    order: Vec<Elem>,
    parent: Vec<(Elem, usize)>,
}

impl GenTree {
    pub fn new(g: &Group) -> GenTree {
        GenTree::with_gens(g, g.generating_set())
    }

    pub fn with_gens(g: &Group, gens: Vec<Elem>) -> GenTree {
        let n = g.order();
        let mut parent = vec![(usize::MAX, 0); n];
        let mut seen = ElementSet::singleton(g.identity());
        let mut order = vec![g.identity()];
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            for (k, &s) in gens.iter().enumerate() {
                let y = g.mul(x, s);
                if !seen.contains(y) {
                    seen.insert(y);
                    parent[y] = (x, k);
                    order.push(y);
                }
            }
            i += 1;
        }
        GenTree { gens, order, parent }
    }

    /// Extends generator images to a homomorphism `source -> target`, if one exists.
    pub fn extend(&self, source: &Group, target: &Group, images: &[Elem]) -> Option<Vec<Elem>> {
        let n = source.order();
        let mut map = vec![usize::MAX; n];
        map[source.identity()] = target.identity();
        for &x in &self.order[1..] {
            let (p, k) = self.parent[x];
            map[x] = target.mul(map[p], images[k]);
        }
        for x in 0..n {
            for (k, &s) in self.gens.iter().enumerate() {
                if map[source.mul(x, s)] != target.mul(map[x], images[k]) {
                    return None;
                }
            }
        }
        Some(map)
    }
}

fn search(h: &Group, g: &Group, first_only: bool) -> Vec<GroupInjection> {
    let mut out = Vec::new();
    if g.order() % h.order() != 0 {
        return out;
    }
    let tree = GenTree::new(h);
    let candidates: Vec<Vec<Elem>> = tree
        .gens
        .iter()
        .map(|&s| (0..g.order()).filter(|&y| g.element_order(y) == h.element_order(s)).collect())
        .collect();
    let mut images = vec![0; tree.gens.len()];
    fn rec(
        k: usize,
        h: &Group,
        g: &Group,
        tree: &GenTree,
        candidates: &[Vec<Elem>],
        images: &mut Vec<Elem>,
        out: &mut Vec<GroupInjection>,
        first_only: bool,
    ) -> bool {
        if k == images.len() {
            if let Some(map) = tree.extend(h, g, images) {
                let image: ElementSet = map.iter().copied().collect();
                if image.len() == h.order() {
                    out.push(GroupInjection::from_parts_unchecked(h.clone(), g.clone(), map));
                    return first_only;
                }
            }
            return false;
        }
        for &y in &candidates[k] {
            images[k] = y;
            if rec(k + 1, h, g, tree, candidates, images, out, first_only) {
                return true;
            }
        }
        false
    }
    rec(0, h, g, &tree, &candidates, &mut images, &mut out, first_only);
    out
}

/// All injective homomorphisms `h -> g`, ordered by generator images.
pub fn injections(h: &Group, g: &Group) -> Vec<GroupInjection> {
    let maps = g.maps_from(h, || search(h, g, false).into_iter().map(|i| i.map).collect());
    maps.iter()
        .map(|m| GroupInjection::from_parts_unchecked(h.clone(), g.clone(), m.clone()))
        .collect()
}

/// All automorphisms of `g`.
pub fn automorphisms(g: &Group) -> Vec<GroupInjection> {
    injections(g, g)
}

/// An isomorphism `g -> h` if one exists.
pub fn are_isomorphic(g: &Group, h: &Group) -> Option<GroupInjection> {
    if same_group(g, h) {
        return Some(GroupInjection::identity(g));
    }
    if g.order() != h.order() || g.order_profile() != h.order_profile() {
        return None;
    }
    search(g, h, true).into_iter().next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog_group;

    fn brute_force_injection_count(h: &Group, g: &Group) -> usize {
        // enumerate all maps h -> g; feasible only for tiny groups
        let n = h.order();
        let m = g.order();
        let total = m.pow(n as u32);
        let mut count = 0;
        for code in 0..total {
            let mut c = code;
            let map: Vec<usize> = (0..n)
                .map(|_| {
                    let v = c % m;
                    c /= m;
                    v
                })
                .collect();
            if GroupInjection::new(h.clone(), g.clone(), map).is_ok() {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn injection_counts() {
        let c1 = catalog_group("C1").unwrap();
        let c2 = catalog_group("C2").unwrap();
        let v4 = catalog_group("D2").unwrap();
        let s4 = catalog_group("S4").unwrap();
        assert_eq!(injections(&c1, &s4).len(), 1);
        assert_eq!(injections(&c2, &c2).len(), 1);
        assert_eq!(injections(&c2, &v4).len(), 3);
        assert_eq!(brute_force_injection_count(&c2, &v4), 3);
        let c3 = catalog_group("C3").unwrap();
        let d3 = catalog_group("D3").unwrap();
        assert_eq!(injections(&c3, &d3).len(), brute_force_injection_count(&c3, &d3));
        assert!(injections(&c2, &c3).is_empty());
    }

    #[test]
    fn isomorphism_examples() {
        let c4 = catalog_group("C4").unwrap();
        let v4 = catalog_group("D2").unwrap();
        assert!(are_isomorphic(&c4, &v4).is_none());
        let c6 = catalog_group("C6").unwrap();
        let c2c3 = catalog_group("C2xC3").unwrap();
        let iso = are_isomorphic(&c6, &c2c3).unwrap();
        assert!(iso.is_bijective());
        assert!(GroupInjection::new(c6.clone(), c2c3.clone(), iso.map().to_vec()).is_ok());
        let a5 = catalog_group("A5").unwrap();
        assert!(are_isomorphic(&a5, &a5).is_some());
    }

    #[test]
    fn automorphism_group_orders() {
        for (name, aut) in
            [("C5", 4), ("D2", 6), ("D3", 6), ("A4", 24), ("S4", 24), ("A5", 120), ("D4", 8)]
        {
            assert_eq!(automorphisms(&catalog_group(name).unwrap()).len(), aut, "{name}");
        }
    }

    #[test]
    fn generator_images_round_trip() {
        let s4 = catalog_group("S4").unwrap();
        for inj in injections(&catalog_group("D4").unwrap(), &s4) {
            let back = GroupInjection::from_generator_images(
                inj.source().clone(),
                s4.clone(),
                &inj.generator_images(),
            )
            .unwrap();
            assert_eq!(back, inj);
        }
    }
}
