//! Synthetic inputs for the benchmarks in `benches/`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tagground::{
    Corpus, KnowledgeBase, NormalizeMode, OntologyStore, PropertyCatalog, TaggingRecord, Thesaurus,
    Triple,
};

/// A corpus of `resources` resources with `tags` tags each drawn from a
/// vocabulary of `vocab` words, plus one ontology and a thesaurus that
/// relate random vocabulary pairs.
pub fn synthetic(
    resources: usize,
    tags: usize,
    vocab: usize,
    seed: u64,
) -> (Corpus, KnowledgeBase) {
    let mut rng = StdRng::seed_from_u64(seed);
    let word = |i: usize| format!("w{i:04}");
    let mut records = Vec::with_capacity(resources * tags);
    for r in 0..resources {
        let author = format!("u{}", rng.gen_range(0..resources / 4 + 1));
        for _ in 0..tags {
            let t = word(rng.gen_range(0..vocab));
            records.push(TaggingRecord::new(&format!("r{r:05}"), &author, &t).unwrap());
        }
    }
    let corpus = Corpus::ingest(records).unwrap();

    let predicates = ["subClassOf", "isA", "hasPartOf", "sameAs", "seeAlso"];
    let triples: Vec<Triple> = (0..vocab)
        .map(|_| {
            let p = predicates[rng.gen_range(0..predicates.len())];
            Triple::new(
                &word(rng.gen_range(0..vocab)),
                p,
                &word(rng.gen_range(0..vocab)),
            )
            .unwrap()
        })
        .collect();
    let store = OntologyStore::from_triples("synthetic.owl", triples, &PropertyCatalog::default());
    let mut thesaurus = Thesaurus::new("wordnet");
    for _ in 0..vocab / 4 {
        let a = word(rng.gen_range(0..vocab));
        let b = word(rng.gen_range(0..vocab));
        if a != b {
            thesaurus
                .add_synset([a.as_str(), b.as_str()], NormalizeMode::Preserve)
                .unwrap();
        }
    }
    (
        corpus,
        KnowledgeBase::new(vec![store], Some(thesaurus)).unwrap(),
    )
}
