use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relation families an ontology property may belong to. Only these three
/// ever produce expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationCategory {
    Partnership,
    Equivalence,
    Definition,
}

impl RelationCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationCategory::Partnership => "Partnership",
            RelationCategory::Equivalence => "Equivalence",
            RelationCategory::Definition => "Definition",
        }
    }
}

impl fmt::Display for RelationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "partnership" => Ok(RelationCategory::Partnership),
            "equivalence" => Ok(RelationCategory::Equivalence),
            "definition" => Ok(RelationCategory::Definition),
            other => Err(Error::Config(format!(
                "unknown relation category `{other}`"
            ))),
        }
    }
}

const DEFAULT_ACCEPTED: &[(&str, RelationCategory)] = &[
    ("subClassOf", RelationCategory::Partnership),
    ("specify", RelationCategory::Partnership),
    ("hasPartOf", RelationCategory::Partnership),
    ("intersectionOf", RelationCategory::Partnership),
    ("unionOf", RelationCategory::Partnership),
    ("complementOf", RelationCategory::Partnership),
    ("generalizes", RelationCategory::Partnership),
    ("equivalentClass", RelationCategory::Equivalence),
    ("equivalentProperty", RelationCategory::Equivalence),
    ("SymmetricProperty", RelationCategory::Equivalence),
    ("sameAs", RelationCategory::Equivalence),
    ("similarTo", RelationCategory::Equivalence),
    ("associatedWith", RelationCategory::Equivalence),
    ("hasRelatedConcept", RelationCategory::Equivalence),
    ("isA", RelationCategory::Definition),
    ("hasTypeOf", RelationCategory::Definition),
    ("hasMeaning", RelationCategory::Definition),
    ("typify", RelationCategory::Definition),
    ("meaningOf", RelationCategory::Definition),
    ("belongsTo", RelationCategory::Definition),
    ("type", RelationCategory::Definition),
];

/// Strips an IRI namespace or a `prefix:` qualifier, leaving the local name.
///
/// `http://www.w3.org/2000/01/rdf-schema#subClassOf`, `rdfs:subClassOf` and
/// `<...#subClassOf>` all map to `subClassOf`.
pub fn local_name(predicate: &str) -> &str {
    let p = predicate.trim();
    let p = p.strip_prefix('<').unwrap_or(p);
    let p = p.strip_suffix('>').unwrap_or(p);
    let p = p.rsplit(['#', '/']).next().unwrap_or(p);
    p.rsplit(':').next().unwrap_or(p)
}

fn key(predicate: &str) -> String {
    local_name(predicate).to_lowercase()
}

/// Maps property local names to accepted relation categories. Anything not
/// accepted is rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyCatalog {
    accepted: BTreeMap<String, RelationCategory>,
    explicitly_rejected: BTreeSet<String>,
}

impl Default for PropertyCatalog {
    fn default() -> Self {
        let accepted = DEFAULT_ACCEPTED
            .iter()
            .map(|(name, cat)| (key(name), *cat))
            .collect();
        PropertyCatalog {
            accepted,
            explicitly_rejected: BTreeSet::new(),
        }
    }
}

impl PropertyCatalog {
    /// A catalog that accepts nothing.
    pub fn empty() -> Self {
        PropertyCatalog {
            accepted: BTreeMap::new(),
            explicitly_rejected: BTreeSet::new(),
        }
    }

    /// `None` means the property is rejected.
    pub fn classify(&self, predicate: &str) -> Option<RelationCategory> {
        self.accepted.get(&key(predicate)).copied()
    }

    pub fn accept(&mut self, predicate: &str, category: RelationCategory) {
        let k = key(predicate);
        self.explicitly_rejected.remove(&k);
        self.accepted.insert(k, category);
    }

    pub fn reject(&mut self, predicate: &str) {
        let k = key(predicate);
        self.accepted.remove(&k);
        self.explicitly_rejected.insert(k);
    }

    pub fn accepted(&self) -> impl Iterator<Item = (&str, RelationCategory)> + '_ {
        self.accepted.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn explicitly_rejected(&self) -> impl Iterator<Item = &str> + '_ {
        self.explicitly_rejected.iter().map(String::as_str)
    }

    /// Applies `property = Partnership|Equivalence|Definition|Rejected` lines.
    /// Blank lines and `#` comments are ignored.
    pub fn apply_overrides(&mut self, text: &str, origin: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, idx + 1, "expected `property = category`"))?;
            let (name, value) = (name.trim(), value.trim());
            if name.is_empty() {
                return Err(Error::parse(origin, idx + 1, "empty property name"));
            }
            if value.eq_ignore_ascii_case("rejected") {
                self.reject(name);
            } else {
                let cat = value
                    .parse()
                    .map_err(|e: Error| Error::parse(origin, idx + 1, e.to_string()))?;
                self.accept(name, cat);
            }
        }
        Ok(())
    }
}
