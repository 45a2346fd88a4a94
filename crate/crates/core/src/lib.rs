//! Semantically grounded tag similarity for tag-based recommendation.
//!
//! Tags are expanded into candidate meanings using ontologies and a
//! thesaurus, candidate links between tags on different resources are
//! validated against sibling tags or the user's most frequent tags, and the
//! resulting groundings extend a lexical cosine similarity between
//! resources.
//!
//! ```
//! use tagground::{Corpus, Grounder, KnowledgeBase, Recommender, SimilarityMode, TaggingRecord};
//!
//! let corpus = Corpus::ingest([
//!     TaggingRecord::new("r1", "ann", "java").unwrap(),
//!     TaggingRecord::new("r2", "bob", "java").unwrap(),
//! ])
//! .unwrap();
//! let kb = KnowledgeBase::empty();
//! let grounder = Grounder::new(&corpus, &kb);
//! let list = Recommender::new(&grounder)
//!     .recommend(&"r1".into(), 5, &SimilarityMode::Baseline, None)
//!     .unwrap();
//! assert_eq!(list.items[0].resource.as_str(), "r2");
//! ```

pub mod corpus;
pub mod error;
pub mod expansion;
pub mod grounding;
pub mod harness;
pub mod knowledge;
pub mod matching;
pub mod recommender;

pub use corpus::{
    normalize_tag, read_tagging_file, AuthorId, Corpus, NormalizeMode, NormalizedTag, Resource,
    ResourceId, TaggingRecord, UserProfile, DEFAULT_MFT_THRESHOLD,
};
pub use error::{Error, Result};
pub use expansion::{expand, expansion_rate, Direction, SemanticExpansion, SourceKind};
pub use grounding::{
    grounding_rate, Grounder, Grounding, GroundingOutcome, GroundingStrategy, RejectionReason,
    SiblingScope, StrategyKind,
};
pub use harness::{
    evaluate, variation_rate, EvalConfig, EvalReport, VariationMeasure, VariationSummary,
};
pub use knowledge::{
    normalize_concept, KnowledgeBase, OntologyStore, PropertyCatalog, RelationCategory, Thesaurus,
    Triple,
};
pub use recommender::{
    MatchKind, MatchingAlgorithm, RecommendationList, Recommender, SimilarityMode, SimilarityScore,
};
