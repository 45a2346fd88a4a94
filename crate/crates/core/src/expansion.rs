//! Tag meaning expansion: every candidate meaning of a tag across the
//! loaded treasures.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, NormalizedTag};
use crate::error::{Error, Result};
use crate::knowledge::{
    normalize_concept, KnowledgeBase, OntologyStore, RelationCategory, Thesaurus,
};

/// Property name recorded on thesaurus expansions.
pub const SYNONYM_PROPERTY: &str = "isSynonymOf";

/// Which endpoint of the source triple the tag occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Direction {
    TagAsSubject,
    TagAsObject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SourceKind {
    OntologyClass,
    Synset,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::OntologyClass => "Ontology Class",
            SourceKind::Synset => "Synset",
        })
    }
}

/// One candidate meaning of a tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemanticExpansion {
    pub source_tag: NormalizedTag,
    pub expanded_term: NormalizedTag,
    /// Expanded concept or synonym exactly as written in the treasure.
    pub expanded_label: String,
    /// Concept the tag matched, as written in the treasure.
    pub matched_label: String,
    /// Property name, verbatim from the treasure.
    pub property: String,
    pub direction: Direction,
    pub category: RelationCategory,
    pub treasure_id: String,
    pub source_kind: SourceKind,
    #[serde(skip)]
    match_forms: BTreeSet<String>,
}

impl SemanticExpansion {
    /// Whether `tag` names the expanded term. Ontology concepts match any of
    /// their normalized forms, so `workshop paper` matches `workshopPaper`.
    pub fn reaches(&self, tag: &NormalizedTag) -> bool {
        self.expanded_term == *tag || self.match_forms.contains(tag.as_str())
    }

    /// The statement behind the expansion, e.g. `workshopPaper isSubClassOf Paper`.
    pub fn relationship(&self) -> String {
        match self.direction {
            Direction::TagAsSubject => {
                format!(
                    "{} {} {}",
                    self.matched_label, self.property, self.expanded_label
                )
            }
            Direction::TagAsObject => {
                format!(
                    "{} {} {}",
                    self.expanded_label, self.property, self.matched_label
                )
            }
        }
    }

    fn sort_key(&self) -> (&str, &NormalizedTag, &str, Direction) {
        (
            &self.treasure_id,
            &self.expanded_term,
            &self.property,
            self.direction,
        )
    }
}

fn expand_ontology(tag: &NormalizedTag, store: &OntologyStore, out: &mut Vec<SemanticExpansion>) {
    if !store.has_concept(tag) {
        return;
    }
    for st in store.incident(tag.as_str()) {
        let Some(category) = st.category else {
            continue;
        };
        let t = &st.triple;
        let subject_hit = normalize_concept(&t.subject).contains(tag.as_str());
        let object_hit = normalize_concept(&t.object).contains(tag.as_str());
        let (direction, matched, other) = match (subject_hit, object_hit) {
            (true, false) => (Direction::TagAsSubject, &t.subject, &t.object),
            (false, true) => (Direction::TagAsObject, &t.object, &t.subject),
            _ => continue,
        };
        let Ok(expanded_term) = NormalizedTag::new(other) else {
            continue;
        };
        if expanded_term == *tag {
            continue;
        }
        out.push(SemanticExpansion {
            source_tag: tag.clone(),
            expanded_term,
            expanded_label: other.clone(),
            matched_label: matched.clone(),
            property: t.predicate.clone(),
            direction,
            category,
            treasure_id: store.treasure_id().to_owned(),
            source_kind: SourceKind::OntologyClass,
            match_forms: normalize_concept(other),
        });
    }
}

fn expand_thesaurus(tag: &NormalizedTag, thesaurus: &Thesaurus, out: &mut Vec<SemanticExpansion>) {
    for synset in thesaurus.synsets(tag) {
        for term in synset.iter().filter(|t| *t != tag) {
            out.push(SemanticExpansion {
                source_tag: tag.clone(),
                expanded_term: term.clone(),
                expanded_label: term.to_string(),
                matched_label: tag.to_string(),
                property: SYNONYM_PROPERTY.to_owned(),
                // synonymy is symmetric; direction is fixed by convention
                direction: Direction::TagAsSubject,
                category: RelationCategory::Equivalence,
                treasure_id: thesaurus.treasure_id().to_owned(),
                source_kind: SourceKind::Synset,
                match_forms: BTreeSet::new(),
            });
        }
    }
}

/// All semantic expansions of `tag`, deduplicated on
/// `(expanded_term, property, treasure_id, direction)` and sorted by
/// `(treasure_id, expanded_term, property)`.
pub fn expand(
    tag: &NormalizedTag,
    stores: &[OntologyStore],
    thesaurus: Option<&Thesaurus>,
) -> Vec<SemanticExpansion> {
    let mut out = Vec::new();
    for store in stores {
        expand_ontology(tag, store, &mut out);
    }
    if let Some(th) = thesaurus {
        expand_thesaurus(tag, th, &mut out);
    }
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    out.dedup_by(|a, b| a.sort_key() == b.sort_key());
    out
}

impl KnowledgeBase {
    pub fn expand(&self, tag: &NormalizedTag) -> Vec<SemanticExpansion> {
        expand(tag, self.ontologies(), self.thesaurus())
    }
}

/// Fraction of the corpus vocabulary with at least one expansion.
pub fn expansion_rate(corpus: &Corpus, kb: &KnowledgeBase) -> Result<f64> {
    let vocab = corpus.vocabulary();
    if vocab.is_empty() {
        return Err(Error::UndefinedRate("empty vocabulary"));
    }
    let expanded = vocab
        .par_iter()
        .filter(|t| !kb.expand(t).is_empty())
        .count();
    Ok(expanded as f64 / vocab.len() as f64)
}

/// Precomputed expansions for a fixed set of tags.
#[derive(Debug, Clone, Default)]
pub struct ExpansionCache {
    entries: HashMap<NormalizedTag, Vec<SemanticExpansion>>,
}

impl ExpansionCache {
    pub fn build<'a, I>(tags: I, kb: &KnowledgeBase) -> Self
    where
        I: IntoIterator<Item = &'a NormalizedTag>,
    {
        let tags: Vec<&NormalizedTag> = tags.into_iter().collect();
        let entries = tags
            .into_par_iter()
            .map(|t| (t.clone(), kb.expand(t)))
            .collect();
        ExpansionCache { entries }
    }

    pub fn get(&self, tag: &NormalizedTag) -> Option<&[SemanticExpansion]> {
        self.entries.get(tag).map(Vec::as_slice)
    }
}
