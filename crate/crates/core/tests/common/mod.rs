#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;
use tagground::{
    read_tagging_file, Corpus, KnowledgeBase, NormalizeMode, NormalizedTag, OntologyStore,
    PropertyCatalog, RelationCategory, TaggingRecord, Thesaurus, Triple,
};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

pub fn tag(s: &str) -> NormalizedTag {
    NormalizedTag::new(s).unwrap()
}

pub fn tags(list: &[&str]) -> BTreeSet<NormalizedTag> {
    list.iter().map(|s| tag(s)).collect()
}

pub fn catalog() -> PropertyCatalog {
    let mut cat = PropertyCatalog::default();
    let text = std::fs::read_to_string(fixture("catalog.conf")).unwrap();
    cat.apply_overrides(&text, "catalog.conf").unwrap();
    cat
}

pub fn load_corpus(rel: &str) -> Corpus {
    let file = std::fs::File::open(fixture(rel)).unwrap();
    let ingested =
        read_tagging_file(std::io::BufReader::new(file), NormalizeMode::Preserve).unwrap();
    assert!(ingested.rejects.is_empty(), "{:?}", ingested.rejects);
    ingested.corpus
}

pub fn load_ontologies(dir: &str, names: &[&str]) -> Vec<OntologyStore> {
    let cat = catalog();
    names
        .iter()
        .map(|n| OntologyStore::load_path(&fixture(&format!("{dir}/{n}")), &cat).unwrap())
        .collect()
}

pub fn load_thesaurus(rel: &str) -> Thesaurus {
    Thesaurus::load_path(&fixture(rel), "wordnet", NormalizeMode::Preserve).unwrap()
}

/// The five mini ontologies plus the thesaurus behind the worked examples.
pub fn example_treasures() -> KnowledgeBase {
    let ontologies = load_ontologies(
        "treasures",
        &[
            "conference.owl",
            "arts.owl",
            "nature.owl",
            "context.owl",
            "java.owl",
        ],
    );
    KnowledgeBase::new(ontologies, Some(load_thesaurus("treasures/wordnet.txt"))).unwrap()
}

pub fn paperlike() -> (Corpus, KnowledgeBase) {
    let corpus = load_corpus("paperlike/corpus.tsv");
    let ontologies = load_ontologies("paperlike", &["photography.owl", "trip.owl", "wine.owl"]);
    let kb = KnowledgeBase::new(ontologies, Some(load_thesaurus("paperlike/wordnet.txt"))).unwrap();
    (corpus, kb)
}

pub fn corpus_of(rows: &[(&str, &str, &str)]) -> Corpus {
    Corpus::ingest(
        rows.iter()
            .map(|(r, u, t)| TaggingRecord::new(r, u, t).unwrap()),
    )
    .unwrap()
}

// ── random synthetic worlds ───────────────────────────────────────────

const WORDS: &[&str] = &[
    "paper", "report", "wood", "tree", "java", "code", "beach", "shore", "wine", "red", "photo",
    "camera", "trip", "hotel", "todo", "fun",
];
const PREDICATES: &[&str] = &[
    "subClassOf",
    "isA",
    "sameAs",
    "disjointWith",
    "hasPartOf",
    "seeAlso",
];
const AUTHORS: &[&str] = &["ann", "bob", "cyd", "dee", "eve"];

/// A randomized corpus plus mini ontologies and a small thesaurus.
#[derive(Debug, Clone)]
pub struct World {
    pub records: Vec<(String, String, String)>,
    pub ontologies: Vec<Vec<(String, String, String)>>,
    pub synsets: Vec<Vec<String>>,
}

impl World {
    pub fn corpus(&self) -> Corpus {
        Corpus::ingest(
            self.records
                .iter()
                .map(|(r, u, t)| TaggingRecord::new(r, u, t).unwrap()),
        )
        .unwrap()
    }

    pub fn kb(&self) -> KnowledgeBase {
        let cat = PropertyCatalog::default();
        let stores = self
            .ontologies
            .iter()
            .enumerate()
            .map(|(i, triples)| {
                OntologyStore::from_triples(
                    format!("onto{i}.owl"),
                    triples
                        .iter()
                        .map(|(s, p, o)| Triple::new(s, p, o).unwrap()),
                    &cat,
                )
            })
            .collect();
        let thesaurus = if self.synsets.is_empty() {
            None
        } else {
            let mut th = Thesaurus::new("wordnet");
            for s in &self.synsets {
                th.add_synset(s.iter().map(String::as_str), NormalizeMode::Preserve)
                    .unwrap();
            }
            Some(th)
        };
        KnowledgeBase::new(stores, thesaurus).unwrap()
    }

    /// Same resources reduced to their first tag, so no sibling context exists.
    pub fn single_tag_corpus(&self) -> Corpus {
        let mut seen = BTreeSet::new();
        let rows = self
            .records
            .iter()
            .filter(|(r, _, _)| seen.insert(r.clone()))
            .map(|(r, u, t)| TaggingRecord::new(r, u, t).unwrap());
        Corpus::ingest(rows).unwrap()
    }
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(WORDS).prop_map(str::to_owned)
}

fn triple() -> impl Strategy<Value = (String, String, String)> {
    (word(), prop::sample::select(PREDICATES), word()).prop_map(|(s, p, o)| (s, p.to_owned(), o))
}

fn synset() -> impl Strategy<Value = Vec<String>> {
    prop::collection::btree_set(word(), 2..4).prop_map(|s| s.into_iter().collect())
}

fn resource(idx: usize) -> impl Strategy<Value = Vec<(String, String, String)>> {
    (
        prop::sample::select(AUTHORS),
        prop::collection::vec(word(), 1..=8),
        prop::collection::vec(prop::sample::select(AUTHORS), 0..3),
    )
        .prop_map(move |(owner, words, extra)| {
            let id = format!("r{idx:02}");
            let mut rows: Vec<_> = words
                .into_iter()
                .map(|w| (id.clone(), owner.to_owned(), w))
                .collect();
            // occasional co-tagger on the same resource
            for (i, a) in extra.into_iter().enumerate() {
                let w = rows[i % rows.len()].2.clone();
                rows.push((id.clone(), a.to_owned(), w));
            }
            rows
        })
}

pub fn world() -> impl Strategy<Value = World> {
    let resources = (1usize..=30).prop_flat_map(|n| (0..n).map(resource).collect::<Vec<_>>());
    (
        resources,
        prop::collection::vec(prop::collection::vec(triple(), 0..10), 0..4),
        prop::collection::vec(synset(), 0..4),
    )
        .prop_map(|(resources, ontologies, synsets)| World {
            records: resources.into_iter().flatten().collect(),
            ontologies,
            synsets,
        })
}

/// Category check helper: the default catalog's classification.
pub fn accepted(predicate: &str) -> Option<RelationCategory> {
    PropertyCatalog::default().classify(predicate)
}
