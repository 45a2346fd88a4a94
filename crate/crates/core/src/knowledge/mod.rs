//! Knowledge sources ("treasures"): ontology triple stores, a thesaurus,
//! and the property catalog deciding which ontology relations count.

mod catalog;
mod ontology;
mod thesaurus;

pub use catalog::{local_name, PropertyCatalog, RelationCategory};
pub use ontology::{normalize_concept, OntologyStore, StoredTriple, Triple};
pub use thesaurus::{Thesaurus, DEFAULT_THESAURUS_ID};

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// The set of loaded treasures. Treasure ids are unique across ontologies
/// and the thesaurus.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    ontologies: Vec<OntologyStore>,
    thesaurus: Option<Thesaurus>,
}

impl KnowledgeBase {
    pub fn new(ontologies: Vec<OntologyStore>, thesaurus: Option<Thesaurus>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        let all_ids = ontologies
            .iter()
            .map(OntologyStore::treasure_id)
            .chain(thesaurus.as_ref().map(Thesaurus::treasure_id));
        for id in all_ids {
            if !ids.insert(id) {
                return Err(Error::Config(format!("duplicate treasure id `{id}`")));
            }
        }
        Ok(KnowledgeBase {
            ontologies,
            thesaurus,
        })
    }

    pub fn empty() -> Self {
        KnowledgeBase::default()
    }

    pub fn ontologies(&self) -> &[OntologyStore] {
        &self.ontologies
    }

    pub fn thesaurus(&self) -> Option<&Thesaurus> {
        self.thesaurus.as_ref()
    }

    pub fn ontology(&self, treasure_id: &str) -> Option<&OntologyStore> {
        self.ontologies
            .iter()
            .find(|o| o.treasure_id() == treasure_id)
    }

    pub fn is_empty(&self) -> bool {
        self.ontologies.is_empty() && self.thesaurus.is_none()
    }

    pub fn treasure_ids(&self) -> Vec<&str> {
        self.ontologies
            .iter()
            .map(OntologyStore::treasure_id)
            .chain(self.thesaurus.as_ref().map(Thesaurus::treasure_id))
            .collect()
    }

    /// Only the thesaurus, if any.
    pub fn thesaurus_only(&self) -> KnowledgeBase {
        KnowledgeBase {
            ontologies: Vec::new(),
            thesaurus: self.thesaurus.clone(),
        }
    }

    /// Only the ontologies.
    pub fn ontologies_only(&self) -> KnowledgeBase {
        KnowledgeBase {
            ontologies: self.ontologies.clone(),
            thesaurus: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_ids_rejected() {
        let cat = PropertyCatalog::default();
        let a = OntologyStore::from_triples("x.owl", [], &cat);
        let b = OntologyStore::from_triples("x.owl", [], &cat);
        assert!(matches!(
            KnowledgeBase::new(vec![a, b], None),
            Err(Error::Config(_))
        ));
        let a = OntologyStore::from_triples("wordnet", [], &cat);
        assert!(KnowledgeBase::new(vec![a], Some(Thesaurus::new("wordnet"))).is_err());
    }
}
