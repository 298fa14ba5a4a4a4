//! Built-in scenarios, embedded from `catalog/`.

use crate::scenario::{parse_scenario, Scenario};

pub struct CatalogEntry {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! entry {
    ($name:literal) => {
        CatalogEntry { name: $name, text: include_str!(concat!("../catalog/", $name, ".scn")) }
    };
}

pub const CATALOG: [CatalogEntry; 10] = [
    entry!("zero_dirac_r2"),
    entry!("area_form_r2"),
    entry!("lcp_r3"),
    entry!("precontact_r3"),
    entry!("contact_jacobi_r3"),
    entry!("jacobi_planes_r3"),
    entry!("homogeneous_plane_r2"),
    entry!("homogeneous_r3"),
    entry!("jacobi_transverse_r3"),
    entry!("homogeneous_wrong_weight_r2"),
];

pub fn catalog() -> Vec<Scenario> {
    CATALOG
        .iter()
        .map(|e| parse_scenario(e.text).unwrap_or_else(|errs| panic!("catalog entry {} is invalid: {errs:?}", e.name)))
        .collect()
}

pub fn lookup(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Expectation;

    #[test]
    fn entries_parse_and_are_named_after_their_files() {
        let all = catalog();
        assert_eq!(all.len(), 10);
        for (s, e) in all.iter().zip(CATALOG.iter()) {
            assert_eq!(s.name, e.name);
        }
        let bad = all.iter().filter(|s| matches!(s.expect, Some(Expectation::NotIntegrable { .. }))).count();
        assert_eq!(bad, 2);
    }
}
