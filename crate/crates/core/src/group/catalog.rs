use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use super::{are_isomorphic, FiniteGroup, Group, GroupError, GroupInjection, ORDER_BOUND};

/// Names a group in the built-in catalog.
///
/// Textual forms: `C<n>` (cyclic, order n), `D<n>` (dihedral, order 2n),
/// `A4`, `S4`, `A5`, and direct products joined by `x`, e.g. `C2xC3`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CatalogSpec {
    Cyclic(usize),
    Dihedral(usize),
    A4,
    S4,
    A5,
    Product(Vec<CatalogSpec>),
}

impl CatalogSpec {
    pub fn order(&self) -> usize {
        match self {
            CatalogSpec::Cyclic(n) => *n,
            CatalogSpec::Dihedral(n) => 2 * n,
            CatalogSpec::A4 => 12,
            CatalogSpec::S4 => 24,
            CatalogSpec::A5 => 60,
            CatalogSpec::Product(fs) => fs.iter().map(CatalogSpec::order).product(),
        }
    }
}

impl fmt::Display for CatalogSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogSpec::Cyclic(n) => write!(f, "C{n}"),
            CatalogSpec::Dihedral(n) => write!(f, "D{n}"),
            CatalogSpec::A4 => f.write_str("A4"),
            CatalogSpec::S4 => f.write_str("S4"),
            CatalogSpec::A5 => f.write_str("A5"),
            CatalogSpec::Product(fs) => {
                for (i, s) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("x")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for CatalogSpec {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let factors: Vec<&str> = s.split('x').collect();
        if factors.len() > 1 {
            return factors
                .iter()
                .map(|f| parse_factor(f, s))
                .collect::<Result<Vec<_>, _>>()
                .map(CatalogSpec::Product);
        }
        parse_factor(s, s)
    }
}

fn parse_factor(f: &str, whole: &str) -> Result<CatalogSpec, GroupError> {
    let unknown = || GroupError::UnknownCatalog(whole.to_string());
    match f {
        "A4" => return Ok(CatalogSpec::A4),
        "S4" => return Ok(CatalogSpec::S4),
        "A5" => return Ok(CatalogSpec::A5),
        _ => {}
    }
    let (head, num) = f.split_at(f.len().min(1));
    if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
        return Err(unknown());
    }
    let n: usize = num.parse().map_err(|_| GroupError::ParameterOutOfRange(whole.to_string()))?;
    match head {
        "C" => Ok(CatalogSpec::Cyclic(n)),
        "D" => Ok(CatalogSpec::Dihedral(n)),
        _ => Err(unknown()),
    }
}

fn interned() -> &'static Mutex<HashMap<CatalogSpec, Group>> {
    static CACHE: OnceLock<Mutex<HashMap<CatalogSpec, Group>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds (or returns the shared instance of) a catalog group.
pub fn make_catalog_group(spec: &CatalogSpec) -> Result<Group, GroupError> {
    if let Some(g) = interned().lock().unwrap().get(spec) {
        return Ok(g.clone());
    }
    let g = Arc::new(build(spec)?);
    let mut cache = interned().lock().unwrap();
    Ok(cache.entry(spec.clone()).or_insert(g).clone())
}

/// Parses a catalog name such as `D4` or `C2xC3` and builds the group.
pub fn catalog_group(name: &str) -> Result<Group, GroupError> {
    make_catalog_group(&name.parse()?)
}

fn build(spec: &CatalogSpec) -> Result<FiniteGroup, GroupError> {
    let out_of_range = || GroupError::ParameterOutOfRange(spec.to_string());
    match spec {
        CatalogSpec::Cyclic(n) => {
            if *n == 0 || *n > ORDER_BOUND {
                return Err(out_of_range());
            }
            let n = *n;
            let names = (0..n).map(cyclic_name).collect();
            let table = (0..n).flat_map(|a| (0..n).map(move |b| (a + b) % n)).collect();
            FiniteGroup::new(spec.to_string(), names, table)
        }
        CatalogSpec::Dihedral(n) => {
            if *n < 2 || 2 * n > ORDER_BOUND {
                return Err(out_of_range());
            }
            let n = *n;
            // element s^f r^k stored at index f*n + k; r s = s r^-1
            let names = (0..2 * n)
                .map(|i| {
                    let (f, k) = (i / n, i % n);
                    let rot = match k {
                        0 => String::new(),
                        1 => "r".to_string(),
                        _ => format!("r^{k}"),
                    };
                    match (f, rot.is_empty()) {
                        (0, true) => "e".to_string(),
                        (0, false) => rot,
                        (_, _) => format!("s{rot}"),
                    }
                })
                .collect();
            let mul = |a: usize, b: usize| {
                let (f1, k1) = (a / n, a % n);
                let (f2, k2) = (b / n, b % n);
                let k1 = if f2 == 1 { (n - k1) % n } else { k1 };
                ((f1 + f2) % 2) * n + (k1 + k2) % n
            };
            let table = (0..2 * n).flat_map(|a| (0..2 * n).map(move |b| mul(a, b))).collect();
            FiniteGroup::new(spec.to_string(), names, table)
        }
        CatalogSpec::A4 => permutation_group(spec, 4, true),
        CatalogSpec::S4 => permutation_group(spec, 4, false),
        CatalogSpec::A5 => permutation_group(spec, 5, true),
        CatalogSpec::Product(factors) => {
            if factors.len() < 2 || factors.iter().any(|f| matches!(f, CatalogSpec::Product(_))) {
                return Err(out_of_range());
            }
            if spec.order() > ORDER_BOUND {
                return Err(GroupError::OrderTooLarge { order: spec.order(), bound: ORDER_BOUND });
            }
            let groups = factors.iter().map(make_catalog_group).collect::<Result<Vec<_>, _>>()?;
            direct_product(&spec.to_string(), &groups)
        }
    }
}

fn cyclic_name(k: usize) -> String {
    match k {
        0 => "e".to_string(),
        1 => "a".to_string(),
        _ => format!("a^{k}"),
    }
}

fn permutation_group(
    spec: &CatalogSpec,
    degree: usize,
    even_only: bool,
) -> Result<FiniteGroup, GroupError> {
    let mut perms = Vec::new();
    let mut current: Vec<usize> = (0..degree).collect();
    permutations(&mut current, 0, &mut perms);
    if even_only {
        perms.retain(|p| parity(p) == 0);
    }
    perms.sort();
    let index: HashMap<Vec<usize>, usize> =
        perms.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let n = perms.len();
    let mut table = Vec::with_capacity(n * n);
    for a in &perms {
        for b in &perms {
            // apply a first, then b
            let ab: Vec<usize> = (0..degree).map(|x| b[a[x]]).collect();
            table.push(index[&ab]);
        }
    }
    let names = perms.iter().map(|p| cycle_notation(p)).collect();
    FiniteGroup::new(spec.to_string(), names, table)
}

fn permutations(current: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == current.len() {
        out.push(current.clone());
        return;
    }
    for i in k..current.len() {
        current.swap(k, i);
        permutations(current, k + 1, out);
        current.swap(k, i);
    }
}

fn parity(p: &[usize]) -> usize {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2
}

fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            cycle.push((x + 1).to_string());
            x = p[x];
        }
        out.push('(');
        out.push_str(&cycle.join(","));
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

fn direct_product(name: &str, groups: &[Group]) -> Result<FiniteGroup, GroupError> {
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for g in groups {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..g.order()).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    let index: HashMap<Vec<usize>, usize> =
        tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let names = tuples
        .iter()
        .map(|t| {
            t.iter().zip(groups).map(|(&x, g)| g.element_name(x)).collect::<Vec<_>>().join(":")
        })
        .collect();
    let mut table = Vec::with_capacity(tuples.len() * tuples.len());
    for a in &tuples {
        for b in &tuples {
            let ab: Vec<usize> =
                groups.iter().enumerate().map(|(i, g)| g.mul(a[i], b[i])).collect();
            table.push(index[&ab]);
        }
    }
    FiniteGroup::new(name, names, table)
}

/// Candidate catalog specs for a given order, in preference order.
fn candidates(order: usize) -> Vec<CatalogSpec> {
    let mut out = vec![CatalogSpec::Cyclic(order)];
    if order % 2 == 0 && order >= 4 {
        out.push(CatalogSpec::Dihedral(order / 2));
    }
    match order {
        12 => out.push(CatalogSpec::A4),
        24 => out.push(CatalogSpec::S4),
        60 => out.push(CatalogSpec::A5),
        _ => {}
    }
    for factors in invariant_factor_lists(order) {
        if factors.len() > 1 {
            out.push(CatalogSpec::Product(factors.into_iter().map(CatalogSpec::Cyclic).collect()));
        }
    }
    out
}

/// All lists d1 | d2 | ... | dk with d1 > 1 and product `n`.
fn invariant_factor_lists(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, last: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 1 {
            out.push(acc.clone());
            return;
        }
        for d in 2..=rest {
            if rest % d == 0 && d % last == 0 {
                acc.push(d);
                rec(rest / d, d, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, 1, &mut Vec::new(), &mut out);
    out
}

/// Finds a catalog group isomorphic to `g`, with an isomorphism `g -> catalog`.
pub fn identify(g: &Group) -> Option<(Group, GroupInjection)> {
    let key = g.iso_key();
    for spec in candidates(g.order()) {
        let Ok(c) = make_catalog_group(&spec) else {
            continue;
        };
        if c.iso_key() == key {
            let iso = are_isomorphic(g, &c)?;
            return Some((c, iso));
        }
    }
    None
}
