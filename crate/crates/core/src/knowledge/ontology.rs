use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use super::catalog::{PropertyCatalog, RelationCategory};
use crate::corpus::NormalizedTag;
use crate::error::{Error, Result};

/// A `subject predicate object` statement, kept verbatim from the source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triple {
    pub fn new(subject: &str, predicate: &str, object: &str) -> Result<Self> {
        let (s, p, o) = (subject.trim(), predicate.trim(), object.trim());
        if s.is_empty() || p.is_empty() || o.is_empty() {
            return Err(Error::Contract("triple fields must be non-empty".into()));
        }
        Ok(Triple {
            subject: s.to_owned(),
            predicate: p.to_owned(),
            object: o.to_owned(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredTriple {
    pub triple: Triple,
    /// `None` when the predicate is rejected by the catalog.
    pub category: Option<RelationCategory>,
}

/// Normalized forms a concept name can match: the lowercase concatenation
/// and the lowercase camelCase split.
///
/// `workshopPaper` yields `workshoppaper` and `workshop paper`.
pub fn normalize_concept(name: &str) -> BTreeSet<String> {
    let words = split_words(name);
    let mut forms = BTreeSet::new();
    if words.is_empty() {
        return forms;
    }
    forms.insert(words.concat());
    forms.insert(words.join(" "));
    forms
}

fn split_words(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    for chunk in name.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let lower_to_upper =
                (prev.is_lowercase() || prev.is_ascii_digit()) && cur.is_uppercase();
            // "XMLParser": split before the 'P'
            let acronym_end = prev.is_uppercase()
                && cur.is_uppercase()
                && chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if lower_to_upper || acronym_end {
                words.push(chars[start..i].iter().collect::<String>());
                start = i;
            }
        }
        words.push(chars[start..].iter().collect::<String>());
    }
    words.into_iter().map(|w| w.to_lowercase()).collect()
}

/// One loaded ontology: its triples and a concept index over both
/// endpoints of every triple.
#[derive(Debug, Clone)]
pub struct OntologyStore {
    treasure_id: String,
    triples: Vec<StoredTriple>,
    concepts: BTreeSet<String>,
    by_concept: HashMap<String, Vec<usize>>,
}

impl OntologyStore {
    pub fn new(treasure_id: impl Into<String>) -> Self {
        OntologyStore {
            treasure_id: treasure_id.into(),
            triples: Vec::new(),
            concepts: BTreeSet::new(),
            by_concept: HashMap::new(),
        }
    }

    /// Builds a store from triples. Rejected-predicate triples are kept
    /// (flagged) and still contribute their endpoints to the concept set.
    pub fn from_triples<I>(
        treasure_id: impl Into<String>,
        triples: I,
        catalog: &PropertyCatalog,
    ) -> Self
    where
        I: IntoIterator<Item = Triple>,
    {
        let mut store = OntologyStore::new(treasure_id);
        for t in triples {
            store.push(t, catalog);
        }
        store
    }

    fn push(&mut self, triple: Triple, catalog: &PropertyCatalog) {
        let idx = self.triples.len();
        let mut forms = normalize_concept(&triple.subject);
        forms.extend(normalize_concept(&triple.object));
        for form in forms {
            self.by_concept.entry(form.clone()).or_default().push(idx);
            self.concepts.insert(form);
        }
        let category = catalog.classify(&triple.predicate);
        self.triples.push(StoredTriple { triple, category });
    }

    /// Parses `subject<TAB>predicate<TAB>object` lines; `#` comments and
    /// blank lines are skipped.
    pub fn parse<R: BufRead>(
        reader: R,
        treasure_id: &str,
        catalog: &PropertyCatalog,
    ) -> Result<Self> {
        let mut store = OntologyStore::new(treasure_id);
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::parse(treasure_id, line_no, e.to_string()))?;
            let text = line.trim_end_matches('\r');
            if text.trim().is_empty() || text.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = text.split('\t').collect();
            let triple = match fields.as_slice() {
                [s, p, o] => Triple::new(s, p, o)
                    .map_err(|_| Error::parse(treasure_id, line_no, "empty triple field"))?,
                _ => {
                    return Err(Error::parse(
                        treasure_id,
                        line_no,
                        format!("expected 3 tab-separated fields, found {}", fields.len()),
                    ))
                }
            };
            store.push(triple, catalog);
        }
        Ok(store)
    }

    /// Loads an ontology file; the treasure id is the file name.
    pub fn load_path(path: &Path, catalog: &PropertyCatalog) -> Result<Self> {
        let id = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let file = std::fs::File::open(path).map_err(|e| Error::parse(&id, 0, e.to_string()))?;
        Self::parse(std::io::BufReader::new(file), &id, catalog)
    }

    pub fn treasure_id(&self) -> &str {
        &self.treasure_id
    }

    pub fn triples(&self) -> &[StoredTriple] {
        &self.triples
    }

    pub fn concepts(&self) -> &BTreeSet<String> {
        &self.concepts
    }

    pub fn has_concept(&self, term: &NormalizedTag) -> bool {
        self.concepts.contains(term.as_str())
    }

    /// Triples with an endpoint whose normalized form equals `form`.
    pub fn incident(&self, form: &str) -> impl Iterator<Item = &StoredTriple> + '_ {
        self.by_concept
            .get(form)
            .into_iter()
            .flatten()
            .map(move |&i| &self.triples[i])
    }

    /// Normalized forms of every concept one triple away from `form`.
    pub fn neighbors(&self, form: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for st in self.incident(form) {
            let t = &st.triple;
            let subject_forms = normalize_concept(&t.subject);
            let other = if subject_forms.contains(form) {
                &t.object
            } else {
                &t.subject
            };
            out.extend(normalize_concept(other));
        }
        out
    }

    /// Serializes the triples back to the line format, in load order.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for st in &self.triples {
            let t = &st.triple;
            out.push_str(&t.subject);
            out.push('\t');
            out.push_str(&t.predicate);
            out.push('\t');
            out.push_str(&t.object);
            out.push('\n');
        }
        out
    }
}
