//! Finite groups given by multiplication tables.
//!
//! Every group used as a vertex, edge or cusp label is a [`FiniteGroup`]:
//! a validated Cayley table over named elements. Orders are capped at
//! [`ORDER_BOUND`] so that element subsets fit in a single `u128`.

mod branch;
mod canon;
mod catalog;
mod hom;
mod subgroup;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

pub use branch::{branch_data, branch_table_orders, validate_branch_table};
pub(crate) use canon::{CanonTable, GroupCanon};
pub use catalog::{catalog_group, identify, make_catalog_group, CatalogSpec};
pub use hom::{are_isomorphic, automorphisms, injections, GroupInjection};
pub use subgroup::{
    all_subgroups, conjugacy_rep, cyclic_subgroups, maximal_cyclic_classes, normalizer,
    subgroups_up_to_conjugacy, Subgroup,
};

/// Index of an element inside its group's element list.
pub type Elem = usize;

/// Shared handle to an immutable group.
pub type Group = Arc<FiniteGroup>;

/// Largest supported group order.
pub const ORDER_BOUND: usize = 120;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("unknown catalog group `{0}`")]
    UnknownCatalog(String),
    #[error("catalog parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("group order {order} exceeds the supported bound {bound}")]
    OrderTooLarge { order: usize, bound: usize },
    #[error("invalid group table for `{name}`: {reason}")]
    InvalidTable { name: String, reason: String },
    #[error("not an injective homomorphism {source_name} -> {target}: {reason}")]
    NotInjective { source_name: String, target: String, reason: String },
    #[error("the trivial group has no maximal cyclic subgroups")]
    TrivialGroup,
    #[error("no branch data for group `{0}`")]
    NoBranchData(String),
    #[error(
        "branch table for `{name}` lists orders {table:?} but the subgroup oracle gives {oracle:?}"
    )]
    BranchTableMismatch { name: String, table: Vec<usize>, oracle: Vec<usize> },
}

/// A set of elements of a group of order at most 128.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementSet(u128);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn singleton(x: Elem) -> Self {
        ElementSet(1u128 << x)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn contains(self, x: Elem) -> bool {
        x < 128 && self.0 & (1u128 << x) != 0
    }

    pub fn insert(&mut self, x: Elem) {
        self.0 |= 1u128 << x;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Elem> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl FromIterator<Elem> for ElementSet {
    fn from_iter<I: IntoIterator<Item = Elem>>(iter: I) -> Self {
        let mut s = ElementSet::EMPTY;
        for x in iter {
            s.insert(x);
        }
        s
    }
}

/// A finite group as a validated multiplication table over named elements.
pub struct FiniteGroup {
    name: String,
    elements: Vec<String>,
    table: Vec<u8>,
    identity: Elem,
    inverses: Vec<u8>,
    orders: Vec<u8>,
    canon: OnceLock<GroupCanon>,
    // injection maps into this group, keyed by the source's table
    maps_in: Mutex<HashMap<Vec<u8>, Arc<Vec<Vec<Elem>>>>>,
}

impl FiniteGroup {
    /// Builds a group from element names and a row-major table
    /// (`table[a * n + b]` is the index of `a * b`), checking the group axioms.
    pub fn new(
        name: impl Into<String>,
        elements: Vec<String>,
        table: Vec<Elem>,
    ) -> Result<FiniteGroup, GroupError> {
        let name = name.into();
        let n = elements.len();
        let invalid = |reason: String| GroupError::InvalidTable { name: name.clone(), reason };
        if n == 0 {
            return Err(invalid("a group needs at least one element".into()));
        }
        if n > ORDER_BOUND {
            return Err(GroupError::OrderTooLarge { order: n, bound: ORDER_BOUND });
        }
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(invalid("group names must be nonempty without whitespace".into()));
        }
        for (i, e) in elements.iter().enumerate() {
            if e.is_empty()
                || e.chars().any(|c| c.is_whitespace() || c == '=' || c == '[' || c == ']')
            {
                return Err(invalid(format!("bad element name `{e}`")));
            }
            if elements[..i].contains(e) {
                return Err(invalid(format!("duplicate element `{e}`")));
            }
        }
        if table.len() != n * n {
            return Err(invalid(format!("table has {} entries, expected {}", table.len(), n * n)));
        }
        if let Some(bad) = table.iter().find(|&&x| x >= n) {
            return Err(invalid(format!("table entry {bad} out of range")));
        }
        let mul = |a: usize, b: usize| table[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul(e, x) == x && mul(x, e) == x))
            .ok_or_else(|| invalid("no identity element".into()))?;
        let mut inverses = vec![0u8; n];
        for x in 0..n {
            let inv = (0..n)
                .find(|&y| mul(x, y) == identity)
                .ok_or_else(|| invalid(format!("`{}` has no inverse", elements[x])))?;
            if mul(inv, x) != identity {
                return Err(invalid(format!("`{}` has no two-sided inverse", elements[x])));
            }
            inverses[x] = inv as u8;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul(a, b);
                for c in 0..n {
                    if mul(ab, c) != mul(a, mul(b, c)) {
                        return Err(invalid(format!(
                            "not associative at ({}, {}, {})",
                            elements[a], elements[b], elements[c]
                        )));
                    }
                }
            }
        }
        let orders = (0..n)
            .map(|x| {
                let mut k = 1;
                let mut y = x;
                while y != identity {
                    y = mul(y, x);
                    k += 1;
                }
                k as u8
            })
            .collect();
        Ok(FiniteGroup {
            name,
            elements,
            table: table.into_iter().map(|x| x as u8).collect(),
            identity,
            inverses,
            orders,
            canon: OnceLock::new(),
            maps_in: Mutex::new(HashMap::new()),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn element_name(&self, x: Elem) -> &str {
        &self.elements[x]
    }

    pub fn element_index(&self, name: &str) -> Option<Elem> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a * self.elements.len() + b] as Elem
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inverses[a] as Elem
    }

    /// `g x g^-1`.
    #[inline]
    pub fn conj(&self, g: Elem, x: Elem) -> Elem {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn element_order(&self, x: Elem) -> usize {
        self.orders[x] as usize
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn is_cyclic(&self) -> bool {
        let n = self.order();
        (0..n).any(|x| self.element_order(x) == n)
    }

    /// Row-major table of element indices.
    pub fn table(&self) -> Vec<Elem> {
        self.table.iter().map(|&x| x as Elem).collect()
    }

    pub fn all(&self) -> ElementSet {
        (0..self.order()).collect()
    }

    /// Subgroup generated by `set`.
    pub fn generate(&self, set: ElementSet) -> ElementSet {
        let mut closure = ElementSet::singleton(self.identity);
        let mut frontier: Vec<Elem> = vec![self.identity];
        let gens: Vec<Elem> = set.iter().collect();
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = self.mul(x, g);
                if !closure.contains(y) {
                    closure.insert(y);
                    frontier.push(y);
                }
            }
        }
        closure
    }

    /// A deterministic small generating set: repeatedly add the element of
    /// largest order (lowest index on ties) outside the subgroup built so far.
    pub fn generating_set(&self) -> Vec<Elem> {
        let mut gens = Vec::new();
        let mut current = ElementSet::singleton(self.identity);
        while current.len() < self.order() {
            let next = (0..self.order())
                .filter(|&x| !current.contains(x))
                .max_by_key(|&x| (self.element_order(x), std::cmp::Reverse(x)))
                .expect("proper subgroup has an outside element");
            gens.push(next);
            current = self.generate(current.union(ElementSet::singleton(next)));
        }
        gens
    }

    /// Sorted multiset of element orders; an isomorphism invariant.
    pub fn order_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.order()).map(|x| self.element_order(x)).collect();
        v.sort_unstable();
        v
    }

    /// Memoized injection maps from `source` into `self`.
    pub(crate) fn maps_from(
        &self,
        source: &FiniteGroup,
        search: impl FnOnce() -> Vec<Vec<Elem>>,
    ) -> Arc<Vec<Vec<Elem>>> {
        if let Some(m) = self.maps_in.lock().expect("unpoisoned").get(&source.table) {
            return m.clone();
        }
        let maps = Arc::new(search());
        self.maps_in.lock().expect("unpoisoned").entry(source.table.clone()).or_insert(maps).clone()
    }

    pub(crate) fn canon(&self) -> &GroupCanon {
        self.canon.get_or_init(|| canon::compute(self))
    }

    /// Canonical multiplication table: equal for two groups iff they are isomorphic.
    pub fn iso_key(&self) -> &[u8] {
        self.canon().table.table.as_slice()
    }

    /// Returns a copy of this group under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Result<FiniteGroup, GroupError> {
        FiniteGroup::new(name, self.elements.clone(), self.table())
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.elements == other.elements && self.table == other.table
    }
}

impl Eq for FiniteGroup {}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.order())
    }
}

/// Structural equality with a pointer fast path.
pub fn same_group(a: &Group, b: &Group) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
