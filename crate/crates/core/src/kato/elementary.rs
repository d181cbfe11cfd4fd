use super::{KatoError, KatoGraph};
use crate::group::{
    branch_data, branch_table_orders, make_catalog_group, CatalogSpec, Group, GroupError,
    GroupInjection, Subgroup,
};

/// The one-vertex Kato tree of `g`: one cusp per branch orbit of the
/// spherical action, each carrying its (cyclic) stabilizer.
///
/// Cyclic groups get two cusps with group `g` itself. Catalog groups use the
/// tabulated branch orders, checked against the subgroup computation.
pub fn elementary_kato(g: &Group) -> Result<KatoGraph, KatoError> {
    if g.is_trivial() {
        return Err(GroupError::TrivialGroup.into());
    }
    let mut k = KatoGraph::new();
    let v = k.add_vertex(g.clone());
    if g.is_cyclic() {
        for _ in 0..2 {
            k.add_cusp(g.clone(), v, GroupInjection::identity(g));
        }
        return Ok(k);
    }

    let data = branch_data(g).ok_or_else(|| GroupError::NoBranchData(g.name().to_string()))?;
    let oracle: Vec<usize> = data.iter().map(Subgroup::order).collect();
    if let Some(table) = g.name().parse::<CatalogSpec>().ok().and_then(|s| branch_table_orders(&s))
    {
        if table != oracle {
            return Err(GroupError::BranchTableMismatch {
                name: g.name().to_string(),
                table,
                oracle,
            }
            .into());
        }
    }
    for h in &data {
        let n = h.order();
        let cyclic = make_catalog_group(&CatalogSpec::Cyclic(n))?;
        let gen = h
            .members()
            .iter()
            .find(|&x| g.element_order(x) == n)
            .expect("branch stabilizers are cyclic");
        let map = GroupInjection::from_generator_images(cyclic.clone(), g.clone(), &[gen])?;
        k.add_cusp(cyclic, v, map);
    }
    Ok(k)
}
