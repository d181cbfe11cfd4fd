//! Canonical labeling of finite groups.
//!
//! Elements are relabeled by breadth-first search over an ordered generating
//! sequence; the sequence ranges over all choices where each generator has
//! maximal order outside the subgroup generated so far. The lexicographically
//! least relabeled table is an isomorphism invariant.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use super::{automorphisms, ElementSet, FiniteGroup};

pub(crate) struct CanonTable {
    pub order: usize,
    pub table: Vec<u8>,
    pub inverse: Vec<u8>,
    /// Coset representatives of Inn in Aut, as label permutations; the
    /// identity comes first.
    pub out_reps: Vec<Vec<u8>>,
}

impl CanonTable {
    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.table[a as usize * self.order + b as usize]
    }

    #[inline]
    pub fn conj(&self, g: u8, x: u8) -> u8 {
        self.mul(self.mul(g, x), self.inverse[g as usize])
    }
}

pub(crate) struct GroupCanon {
    pub table: Arc<CanonTable>,
    /// element index -> canonical label
    pub labels: Vec<u8>,
}

fn cache() -> &'static Mutex<HashMap<Vec<u8>, Arc<CanonTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<u8>, Arc<CanonTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn compute(g: &FiniteGroup) -> GroupCanon {
    let n = g.order();
    let mut best: Option<(Vec<u8>, Vec<u8>)> = None;
    let mut seq = Vec::new();
    search(g, ElementSet::singleton(g.identity()), &mut seq, &mut best);
    let (table, labels) = best.expect("at least one generating sequence");
    debug_assert_eq!(table.len(), n * n);

    let existing = cache().lock().unwrap().get(&table).cloned();
    let canon = match existing {
        Some(c) => c,
        None => {
            let c = Arc::new(build_table(table.clone()));
            cache().lock().unwrap().entry(table).or_insert(c).clone()
        }
    };
    GroupCanon { table: canon, labels }
}

fn search(
    g: &FiniteGroup,
    current: ElementSet,
    seq: &mut Vec<usize>,
    best: &mut Option<(Vec<u8>, Vec<u8>)>,
) {
    if current.len() == g.order() {
        evaluate(g, seq, best);
        return;
    }
    let outside = (0..g.order()).filter(|&x| !current.contains(x));
    let max_order = outside.clone().map(|x| g.element_order(x)).max().unwrap();
    for x in outside.filter(|&x| g.element_order(x) == max_order) {
        seq.push(x);
        let next = g.generate(current.union(ElementSet::singleton(x)));
        search(g, next, seq, best);
        seq.pop();
    }
}

fn evaluate(g: &FiniteGroup, seq: &[usize], best: &mut Option<(Vec<u8>, Vec<u8>)>) {
    let n = g.order();
    let mut labels = vec![u8::MAX; n];
    let mut by_label = Vec::with_capacity(n);
    labels[g.identity()] = 0;
    by_label.push(g.identity());
    let mut i = 0;
    while i < by_label.len() {
        let u = by_label[i];
        for &s in seq {
            let v = g.mul(u, s);
            if labels[v] == u8::MAX {
                labels[v] = by_label.len() as u8;
                by_label.push(v);
            }
        }
        i += 1;
    }
    let entry = |k: usize| labels[g.mul(by_label[k / n], by_label[k % n])];
    if let Some((bt, _)) = best.as_ref() {
        // early exit on the first differing entry
        for k in 0..n * n {
            let e = entry(k);
            if e > bt[k] {
                return;
            }
            if e < bt[k] {
                break;
            }
            if k == n * n - 1 {
                return;
            }
        }
    }
    let table = (0..n * n).map(entry).collect();
    *best = Some((table, labels));
}

fn build_table(table: Vec<u8>) -> CanonTable {
    let n = (table.len() as f64).sqrt().round() as usize;
    let group = Arc::new(
        FiniteGroup::new(
            "canon",
            (0..n).map(|i| i.to_string()).collect(),
            table.iter().map(|&x| x as usize).collect(),
        )
        .expect("canonical table is a group table"),
    );
    let inverse: Vec<u8> = (0..n).map(|x| group.inv(x) as u8).collect();
    let mut auts: Vec<Vec<u8>> =
        automorphisms(&group).iter().map(|a| a.map().iter().map(|&x| x as u8).collect()).collect();
    auts.sort();
    let mut covered: HashSet<Vec<u8>> = HashSet::new();
    let mut out_reps = Vec::new();
    for a in auts {
        if covered.contains(&a) {
            continue;
        }
        for h in 0..n {
            let coset: Vec<u8> = (0..n).map(|x| a[group.conj(h, x)]).collect();
            covered.insert(coset);
        }
        out_reps.push(a);
    }
    CanonTable { order: n, table, inverse, out_reps }
}
