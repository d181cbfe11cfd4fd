use super::ChartClass;
use crate::group::{catalog_group, identify, CatalogSpec, Group, GroupError};

/// Last-stage hook deciding which combinatorial classes are reported.
pub trait AdmissibilityFilter: Sync {
    /// Echoed into reports.
    fn name(&self) -> String;
    fn admits(&self, class: &ChartClass) -> bool;
}

pub struct AcceptAll;

impl AdmissibilityFilter for AcceptAll {
    fn name(&self) -> String {
        "none".into()
    }

    fn admits(&self, _: &ChartClass) -> bool {
        true
    }
}

/// Necessary conditions only: vertex groups must be cyclic, dihedral, A4,
/// S4 or A5, and optionally lie in an allowlist of isomorphism types.
/// Realizability over a particular p is not decided here.
pub struct PFilter {
    allowlist: Option<Vec<(String, Group)>>,
}

impl PFilter {
    pub fn new() -> PFilter {
        PFilter { allowlist: None }
    }

    pub fn with_allowlist<S: AsRef<str>>(names: &[S]) -> Result<PFilter, GroupError> {
        let list = names
            .iter()
            .map(|n| Ok((n.as_ref().to_string(), catalog_group(n.as_ref())?)))
            .collect::<Result<_, GroupError>>()?;
        Ok(PFilter { allowlist: Some(list) })
    }

    fn vertex_ok(&self, g: &Group) -> bool {
        let spherical = identify(g).is_some_and(|(c, _)| {
            matches!(
                c.name().parse::<CatalogSpec>(),
                Ok(CatalogSpec::Cyclic(_)
                    | CatalogSpec::Dihedral(_)
                    | CatalogSpec::A4
                    | CatalogSpec::S4
                    | CatalogSpec::A5)
            )
        });
        spherical
            && self
                .allowlist
                .as_ref()
                .map_or(true, |list| list.iter().any(|(_, h)| h.iso_key() == g.iso_key()))
    }
}

impl Default for PFilter {
    fn default() -> Self {
        PFilter::new()
    }
}

impl AdmissibilityFilter for PFilter {
    fn name(&self) -> String {
        match &self.allowlist {
            None => "p-filter".into(),
            Some(list) => {
                let names: Vec<&str> = list.iter().map(|(n, _)| n.as_str()).collect();
                format!("p-filter:{}", names.join(","))
            }
        }
    }

    fn admits(&self, class: &ChartClass) -> bool {
        class.graph.vertices.iter().all(|v| self.vertex_ok(&v.group))
    }
}
