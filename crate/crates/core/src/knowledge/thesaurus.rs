use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use crate::corpus::{NormalizeMode, NormalizedTag};
use crate::error::{Error, Result};

pub const DEFAULT_THESAURUS_ID: &str = "wordnet";

/// Synonym sets keyed by normalized term.
#[derive(Debug, Clone)]
pub struct Thesaurus {
    treasure_id: String,
    synsets: Vec<Vec<NormalizedTag>>,
    by_term: HashMap<NormalizedTag, Vec<usize>>,
}

impl Thesaurus {
    pub fn new(treasure_id: impl Into<String>) -> Self {
        Thesaurus {
            treasure_id: treasure_id.into(),
            synsets: Vec::new(),
            by_term: HashMap::new(),
        }
    }

    /// Adds a synset. Terms are normalized and deduplicated; fewer than two
    /// distinct terms is an error.
    pub fn add_synset<'a, I>(&mut self, terms: I, mode: NormalizeMode) -> Result<()>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut seen = BTreeSet::new();
        let mut synset = Vec::new();
        for raw in terms {
            let term = NormalizedTag::with_mode(raw, mode)
                .map_err(|_| Error::Contract("empty synonym in synset".into()))?;
            if seen.insert(term.clone()) {
                synset.push(term);
            }
        }
        if synset.len() < 2 {
            return Err(Error::Contract(
                "a synset needs at least two distinct terms".into(),
            ));
        }
        let idx = self.synsets.len();
        for term in &synset {
            self.by_term.entry(term.clone()).or_default().push(idx);
        }
        self.synsets.push(synset);
        Ok(())
    }

    /// One synset per line, comma-separated terms; `#` comments allowed.
    pub fn parse<R: BufRead>(reader: R, treasure_id: &str, mode: NormalizeMode) -> Result<Self> {
        let mut thesaurus = Thesaurus::new(treasure_id);
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::parse(treasure_id, line_no, e.to_string()))?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            thesaurus
                .add_synset(text.split(','), mode)
                .map_err(|e| Error::parse(treasure_id, line_no, e.to_string()))?;
        }
        Ok(thesaurus)
    }

    pub fn load_path(path: &Path, treasure_id: &str, mode: NormalizeMode) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::parse(path.display().to_string(), 0, e.to_string()))?;
        Self::parse(std::io::BufReader::new(file), treasure_id, mode)
    }

    pub fn treasure_id(&self) -> &str {
        &self.treasure_id
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    /// Every synset containing `term`, in load order.
    pub fn synsets(&self, term: &NormalizedTag) -> Vec<&[NormalizedTag]> {
        self.by_term
            .get(term)
            .map(|ids| ids.iter().map(|&i| self.synsets[i].as_slice()).collect())
            .unwrap_or_default()
    }

    pub fn contains(&self, term: &NormalizedTag) -> bool {
        self.by_term.contains_key(term)
    }

    pub fn share_synset(&self, a: &NormalizedTag, b: &NormalizedTag) -> bool {
        match (self.by_term.get(a), self.by_term.get(b)) {
            (Some(xs), Some(ys)) => xs.iter().any(|x| ys.contains(x)),
            _ => false,
        }
    }
}
