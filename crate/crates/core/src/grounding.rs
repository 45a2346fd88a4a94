//! Semantic grounding: validating a candidate expansion that links two tags
//! on two distinct resources, under one of three context strategies.
//!
//! * `AllExpansion` accepts the first candidate with no validation.
//! * `Sibling` requires a sibling tag to be known to the candidate's treasure.
//! * `Mft` requires one of the target user's most frequent tags to be known
//!   to the candidate's treasure.
//!
//! Context validation always uses the treasure that produced the candidate.
//! The two tags being grounded never count as their own context.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    check_threshold, Corpus, NormalizedTag, ResourceId, UserProfile, DEFAULT_MFT_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::expansion::{ExpansionCache, SemanticExpansion, SourceKind};
use crate::knowledge::KnowledgeBase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    #[serde(rename = "all")]
    AllExpansion,
    Sibling,
    Mft,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::AllExpansion,
        StrategyKind::Sibling,
        StrategyKind::Mft,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::AllExpansion => "all",
            StrategyKind::Sibling => "sibling",
            StrategyKind::Mft => "mft",
        }
    }

    /// Row label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::AllExpansion => "All Expansion Strategy",
            StrategyKind::Sibling => "Sibling Strategy",
            StrategyKind::Mft => "MFT Strategy",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" | "allexpansion" | "all-expansion" => Ok(StrategyKind::AllExpansion),
            "sibling" => Ok(StrategyKind::Sibling),
            "mft" => Ok(StrategyKind::Mft),
            other => Err(Error::Config(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Whose siblings may validate a candidate under the `Sibling` strategy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiblingScope {
    /// Siblings from either resource.
    #[default]
    EitherResource,
    /// At least one validating sibling on each resource.
    BothResources,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundingStrategy {
    pub kind: StrategyKind,
    /// Degrade to `AllExpansion` when the strategy has no context to work
    /// with. Ignored for `AllExpansion`.
    pub fallback_to_all: bool,
    pub mft_threshold: f64,
    pub sibling_scope: SiblingScope,
}

impl GroundingStrategy {
    pub fn new(kind: StrategyKind) -> Self {
        GroundingStrategy {
            kind,
            fallback_to_all: false,
            mft_threshold: DEFAULT_MFT_THRESHOLD,
            sibling_scope: SiblingScope::default(),
        }
    }

    pub fn all() -> Self {
        Self::new(StrategyKind::AllExpansion)
    }

    pub fn sibling() -> Self {
        Self::new(StrategyKind::Sibling)
    }

    pub fn mft() -> Self {
        Self::new(StrategyKind::Mft)
    }

    pub fn with_fallback(mut self, fallback: bool) -> Self {
        self.fallback_to_all = fallback;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.mft_threshold = threshold;
        self
    }

    pub fn with_sibling_scope(mut self, scope: SiblingScope) -> Self {
        self.sibling_scope = scope;
        self
    }
}

/// A validated semantic link between two tags on two distinct resources.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grounding {
    pub tag_a: NormalizedTag,
    pub resource_a: ResourceId,
    pub tag_b: NormalizedTag,
    pub resource_b: ResourceId,
    pub via: SemanticExpansion,
    pub strategy: StrategyKind,
    /// Context terms that validated the candidate; empty for `AllExpansion`
    /// and for fallback groundings.
    pub context_evidence: BTreeSet<NormalizedTag>,
    /// Set when the strategy degraded to `AllExpansion`.
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RejectionReason {
    NoExpansion,
    ContextValidationFailed,
    NoClearPreference,
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectionReason::NoExpansion => "no expansion",
            RejectionReason::ContextValidationFailed => "context validation failed",
            RejectionReason::NoClearPreference => "no clear preference",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum GroundingOutcome {
    Grounded(Grounding),
    Rejected(RejectionReason),
}

impl GroundingOutcome {
    pub fn grounding(&self) -> Option<&Grounding> {
        match self {
            GroundingOutcome::Grounded(g) => Some(g),
            GroundingOutcome::Rejected(_) => None,
        }
    }

    pub fn is_grounded(&self) -> bool {
        matches!(self, GroundingOutcome::Grounded(_))
    }
}

/// One grounded `(tag_a @ resource_a, tag_b @ resource_b)` combination.
pub type GroundedPair = (NormalizedTag, ResourceId, NormalizedTag, ResourceId);

/// Grounds tag pairs over a fixed corpus and knowledge base. Expansions of
/// the corpus vocabulary are computed once up front.
pub struct Grounder<'a> {
    corpus: &'a Corpus,
    kb: &'a KnowledgeBase,
    cache: ExpansionCache,
}

impl<'a> Grounder<'a> {
    pub fn new(corpus: &'a Corpus, kb: &'a KnowledgeBase) -> Self {
        let cache = ExpansionCache::build(corpus.vocabulary(), kb);
        Grounder { corpus, kb, cache }
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn knowledge(&self) -> &'a KnowledgeBase {
        self.kb
    }

    pub fn expansions(&self, tag: &NormalizedTag) -> Cow<'_, [SemanticExpansion]> {
        match self.cache.get(tag) {
            Some(found) => Cow::Borrowed(found),
            None => Cow::Owned(self.kb.expand(tag)),
        }
    }

    /// Expansions linking the two tags, those of `tag_a` first, each in
    /// expansion order.
    pub fn candidates(
        &self,
        tag_a: &NormalizedTag,
        tag_b: &NormalizedTag,
    ) -> Vec<SemanticExpansion> {
        let forward = self.expansions(tag_a);
        let backward = self.expansions(tag_b);
        forward
            .iter()
            .filter(|e| e.reaches(tag_b))
            .chain(backward.iter().filter(|e| e.reaches(tag_a)))
            .cloned()
            .collect()
    }

    /// Cheap existence test used before any context work.
    pub fn linked(&self, tag_a: &NormalizedTag, tag_b: &NormalizedTag) -> bool {
        self.expansions(tag_a).iter().any(|e| e.reaches(tag_b))
            || self.expansions(tag_b).iter().any(|e| e.reaches(tag_a))
    }

    fn validates(
        &self,
        candidate: &SemanticExpansion,
        term: &NormalizedTag,
        tag_a: &NormalizedTag,
        tag_b: &NormalizedTag,
    ) -> bool {
        match candidate.source_kind {
            SourceKind::OntologyClass => self
                .kb
                .ontology(&candidate.treasure_id)
                .is_some_and(|o| o.has_concept(term)),
            SourceKind::Synset => self.kb.thesaurus().is_some_and(|th| {
                [tag_a, tag_b, &candidate.expanded_term]
                    .into_iter()
                    .any(|t| th.share_synset(term, t))
            }),
        }
    }

    /// Grounds `tag_a` on `resource_a` against `tag_b` on `resource_b`.
    ///
    /// `profile` is the target user's profile and is only consulted by the
    /// `Mft` strategy.
    pub fn ground(
        &self,
        tag_a: &NormalizedTag,
        resource_a: &ResourceId,
        tag_b: &NormalizedTag,
        resource_b: &ResourceId,
        strategy: &GroundingStrategy,
        profile: Option<&UserProfile>,
    ) -> Result<GroundingOutcome> {
        if tag_a == tag_b {
            return Err(Error::Contract(format!(
                "lexically identical tags `{tag_a}` are matched lexically, not grounded"
            )));
        }
        if resource_a == resource_b {
            return Err(Error::Contract(format!(
                "grounding needs two distinct resources, got `{resource_a}` twice"
            )));
        }
        let siblings_a = self.corpus.sibling_tags(resource_a.as_str(), tag_a)?;
        let siblings_b = self.corpus.sibling_tags(resource_b.as_str(), tag_b)?;

        let candidates = self.candidates(tag_a, tag_b);
        if candidates.is_empty() {
            return Ok(GroundingOutcome::Rejected(RejectionReason::NoExpansion));
        }
        let grounding = |via: &SemanticExpansion,
                         evidence: BTreeSet<NormalizedTag>,
                         fallback: bool| Grounding {
            tag_a: tag_a.clone(),
            resource_a: resource_a.clone(),
            tag_b: tag_b.clone(),
            resource_b: resource_b.clone(),
            via: via.clone(),
            strategy: strategy.kind,
            context_evidence: evidence,
            fallback,
        };
        let unvalidated = |fallback: bool| {
            Ok(GroundingOutcome::Grounded(grounding(
                &candidates[0],
                BTreeSet::new(),
                fallback,
            )))
        };
        let not_pair = |t: &&NormalizedTag| *t != tag_a && *t != tag_b;

        match strategy.kind {
            StrategyKind::AllExpansion => unvalidated(false),
            StrategyKind::Sibling => {
                let any_context = siblings_a.iter().chain(&siblings_b).any(|t| not_pair(&t));
                if !any_context {
                    return if strategy.fallback_to_all {
                        unvalidated(true)
                    } else {
                        Ok(GroundingOutcome::Rejected(
                            RejectionReason::ContextValidationFailed,
                        ))
                    };
                }
                let validated = |siblings: &BTreeSet<NormalizedTag>,
                                 via: &SemanticExpansion|
                 -> BTreeSet<NormalizedTag> {
                    siblings
                        .iter()
                        .filter(not_pair)
                        .filter(|t| self.validates(via, t, tag_a, tag_b))
                        .cloned()
                        .collect()
                };
                for via in &candidates {
                    let from_a = validated(&siblings_a, via);
                    let from_b = validated(&siblings_b, via);
                    let accepted = match strategy.sibling_scope {
                        SiblingScope::EitherResource => !from_a.is_empty() || !from_b.is_empty(),
                        SiblingScope::BothResources => !from_a.is_empty() && !from_b.is_empty(),
                    };
                    if accepted {
                        let evidence = from_a.into_iter().chain(from_b).collect();
                        return Ok(GroundingOutcome::Grounded(grounding(via, evidence, false)));
                    }
                }
                Ok(GroundingOutcome::Rejected(
                    RejectionReason::ContextValidationFailed,
                ))
            }
            StrategyKind::Mft => {
                let Some(profile) = profile else {
                    return if strategy.fallback_to_all {
                        unvalidated(true)
                    } else {
                        Err(Error::MissingContext(
                            "MFT grounding requires a user profile",
                        ))
                    };
                };
                if !profile.has_clear_preference {
                    return if strategy.fallback_to_all {
                        unvalidated(true)
                    } else {
                        Ok(GroundingOutcome::Rejected(
                            RejectionReason::NoClearPreference,
                        ))
                    };
                }
                for via in &candidates {
                    let evidence: BTreeSet<NormalizedTag> = profile
                        .mft
                        .iter()
                        .filter(not_pair)
                        .filter(|t| self.validates(via, t, tag_a, tag_b))
                        .cloned()
                        .collect();
                    if !evidence.is_empty() {
                        return Ok(GroundingOutcome::Grounded(grounding(via, evidence, false)));
                    }
                }
                Ok(GroundingOutcome::Rejected(
                    RejectionReason::ContextValidationFailed,
                ))
            }
        }
    }

    /// Profiles of each resource's most prolific author, for batch MFT runs.
    pub fn owner_profiles(&self, threshold: f64) -> Result<BTreeMap<ResourceId, UserProfile>> {
        check_threshold(threshold)?;
        self.corpus
            .resources()
            .map(|r| {
                Ok((
                    r.id.clone(),
                    self.corpus.owner_profile(r.id.as_str(), threshold)?,
                ))
            })
            .collect()
    }

    /// Every grounded `(t, A, u, B)` with `A != B` and `t != u`. For `Mft`
    /// the profile of `A`'s most prolific author is used.
    pub fn grounded_pairs(&self, strategy: &GroundingStrategy) -> Result<BTreeSet<GroundedPair>> {
        let profiles = match strategy.kind {
            StrategyKind::Mft => Some(self.owner_profiles(strategy.mft_threshold)?),
            _ => None,
        };
        let resources: Vec<_> = self.corpus.resources().collect();
        let per_resource: Vec<Result<Vec<GroundedPair>>> = resources
            .par_iter()
            .map(|a| {
                let profile = profiles.as_ref().and_then(|p| p.get(&a.id));
                let mut found = Vec::new();
                for b in resources.iter().filter(|b| b.id != a.id) {
                    for t in a.distinct_tags() {
                        for u in b.distinct_tags().filter(|u| *u != t) {
                            if !self.linked(t, u) {
                                continue;
                            }
                            if self
                                .ground(t, &a.id, u, &b.id, strategy, profile)?
                                .is_grounded()
                            {
                                found.push((t.clone(), a.id.clone(), u.clone(), b.id.clone()));
                            }
                        }
                    }
                }
                Ok(found)
            })
            .collect();
        let mut out = BTreeSet::new();
        for chunk in per_resource {
            out.extend(chunk?);
        }
        Ok(out)
    }
}

/// Fraction of the vocabulary participating in at least one grounding with
/// a tag on a different resource.
pub fn grounding_rate(grounder: &Grounder<'_>, strategy: &GroundingStrategy) -> Result<f64> {
    let vocab = grounder.corpus().vocabulary();
    if vocab.is_empty() {
        return Err(Error::UndefinedRate("empty vocabulary"));
    }
    let pairs = grounder.grounded_pairs(strategy)?;
    let participating: BTreeSet<&NormalizedTag> =
        pairs.iter().flat_map(|(t, _, u, _)| [t, u]).collect();
    Ok(participating.len() as f64 / vocab.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TaggingRecord;
    use crate::knowledge::{OntologyStore, PropertyCatalog, RelationCategory};

    fn tag(s: &str) -> NormalizedTag {
        NormalizedTag::new(s).unwrap()
    }

    fn rid(s: &str) -> ResourceId {
        ResourceId::new(s)
    }

    fn corpus(rows: &[(&str, &str, &str)]) -> Corpus {
        Corpus::ingest(
            rows.iter()
                .map(|(r, u, t)| TaggingRecord::new(r, u, t).unwrap()),
        )
        .unwrap()
    }

    fn kb(text: &str) -> KnowledgeBase {
        let mut cat = PropertyCatalog::default();
        cat.accept("isPartOf", RelationCategory::Partnership);
        let store = OntologyStore::parse(text.as_bytes(), "conference.owl", &cat).unwrap();
        KnowledgeBase::new(vec![store], None).unwrap()
    }

    const ONTO: &str = "workshop\tisPartOf\tconference\ndeadline\tbelongsTo\tconference\n";

    #[test]
    fn strategy_parsing() {
        assert_eq!(
            "all".parse::<StrategyKind>().unwrap(),
            StrategyKind::AllExpansion
        );
        assert_eq!("MFT".parse::<StrategyKind>().unwrap(), StrategyKind::Mft);
        assert!("both".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn all_expansion_needs_no_context() {
        let c = corpus(&[("A", "u", "workshop"), ("B", "v", "conference")]);
        let k = kb(ONTO);
        let g = Grounder::new(&c, &k);
        let out = g
            .ground(
                &tag("workshop"),
                &rid("A"),
                &tag("conference"),
                &rid("B"),
                &GroundingStrategy::all(),
                None,
            )
            .unwrap();
        let grounding = out.grounding().unwrap();
        assert_eq!(grounding.via.category, RelationCategory::Partnership);
        assert!(grounding.context_evidence.is_empty());
        let out = g
            .ground(
                &tag("workshop"),
                &rid("A"),
                &tag("conference"),
                &rid("B"),
                &GroundingStrategy::sibling(),
                None,
            )
            .unwrap();
        assert_eq!(
            out,
            GroundingOutcome::Rejected(RejectionReason::ContextValidationFailed)
        );
        let out = g
            .ground(
                &tag("workshop"),
                &rid("A"),
                &tag("conference"),
                &rid("B"),
                &GroundingStrategy::sibling().with_fallback(true),
                None,
            )
            .unwrap();
        assert!(out.grounding().unwrap().fallback);
    }

    #[test]
    fn sibling_evidence_and_scope() {
        let c = corpus(&[
            ("A", "u", "workshop"),
            ("A", "u", "deadline"),
            ("B", "v", "conference"),
            ("B", "v", "party"),
        ]);
        let k = kb(ONTO);
        let g = Grounder::new(&c, &k);
        let (w, conf) = (tag("workshop"), tag("conference"));
        let out = g
            .ground(
                &w,
                &rid("A"),
                &conf,
                &rid("B"),
                &GroundingStrategy::sibling(),
                None,
            )
            .unwrap();
        let evidence: Vec<_> = out
            .grounding()
            .unwrap()
            .context_evidence
            .iter()
            .map(|t| t.as_str())
            .collect();
        assert_eq!(evidence, vec!["deadline"]);
        // "deadline" validates on A but B offers only "party"
        let narrow = GroundingStrategy::sibling().with_sibling_scope(SiblingScope::BothResources);
        let out = g
            .ground(&w, &rid("A"), &conf, &rid("B"), &narrow, None)
            .unwrap();
        assert!(!out.is_grounded());
    }

    #[test]
    fn no_expansion_reason() {
        let c = corpus(&[("A", "u", "koala"), ("B", "v", "conference")]);
        let k = kb(ONTO);
        let g = Grounder::new(&c, &k);
        let out = g
            .ground(
                &tag("koala"),
                &rid("A"),
                &tag("conference"),
                &rid("B"),
                &GroundingStrategy::all(),
                None,
            )
            .unwrap();
        assert_eq!(
            out,
            GroundingOutcome::Rejected(RejectionReason::NoExpansion)
        );
    }

    #[test]
    fn mft_requirements() {
        let c = corpus(&[
            ("A", "u", "workshop"),
            ("B", "v", "conference"),
            ("C", "u", "deadline"),
            ("D", "u", "deadline"),
            ("E", "w", "x"),
            ("E", "w", "y"),
        ]);
        let k = kb(ONTO);
        let g = Grounder::new(&c, &k);
        let (w, conf) = (tag("workshop"), tag("conference"));
        let mft = GroundingStrategy::mft();
        assert!(matches!(
            g.ground(&w, &rid("A"), &conf, &rid("B"), &mft, None),
            Err(Error::MissingContext(_))
        ));
        let fallback = g
            .ground(
                &w,
                &rid("A"),
                &conf,
                &rid("B"),
                &mft.with_fallback(true),
                None,
            )
            .unwrap();
        assert!(fallback.grounding().unwrap().fallback);

        let u = c.build_profile("u", 0.7).unwrap();
        let out = g
            .ground(&w, &rid("A"), &conf, &rid("B"), &mft, Some(&u))
            .unwrap();
        assert_eq!(
            out.grounding().unwrap().context_evidence,
            BTreeSet::from([tag("deadline")])
        );

        let flat = c.build_profile("w", 0.7).unwrap();
        let out = g
            .ground(&w, &rid("A"), &conf, &rid("B"), &mft, Some(&flat))
            .unwrap();
        assert_eq!(
            out,
            GroundingOutcome::Rejected(RejectionReason::NoClearPreference)
        );
    }

    #[test]
    fn contract_checks() {
        let c = corpus(&[("A", "u", "workshop"), ("B", "v", "conference")]);
        let k = kb(ONTO);
        let g = Grounder::new(&c, &k);
        let s = GroundingStrategy::all();
        assert!(matches!(
            g.ground(
                &tag("workshop"),
                &rid("A"),
                &tag("workshop"),
                &rid("B"),
                &s,
                None
            ),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            g.ground(
                &tag("workshop"),
                &rid("A"),
                &tag("conference"),
                &rid("A"),
                &s,
                None
            ),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            g.ground(
                &tag("workshop"),
                &rid("A"),
                &tag("conference"),
                &rid("Z"),
                &s,
                None
            ),
            Err(Error::NotFound { .. })
        ));
    }

    #[test]
    fn rates_on_tiny_corpus() {
        let c = corpus(&[
            ("A", "u", "workshop"),
            ("A", "u", "cfp"),
            ("B", "v", "conference"),
            ("B", "v", "deadline2010"),
        ]);
        let k = kb(ONTO);
        let g = Grounder::new(&c, &k);
        assert_eq!(grounding_rate(&g, &GroundingStrategy::all()).unwrap(), 0.5);
        assert_eq!(
            grounding_rate(&g, &GroundingStrategy::sibling()).unwrap(),
            0.0
        );

        let empty = KnowledgeBase::empty();
        let g = Grounder::new(&c, &empty);
        for kind in StrategyKind::ALL {
            assert_eq!(
                grounding_rate(&g, &GroundingStrategy::new(kind)).unwrap(),
                0.0
            );
        }
        let none = Corpus::default();
        let g = Grounder::new(&none, &k);
        assert!(matches!(
            grounding_rate(&g, &GroundingStrategy::all()),
            Err(Error::UndefinedRate(_))
        ));
    }

    #[test]
    fn single_tag_resources_never_sibling_ground() {
        let c = corpus(&[
            ("A", "u", "workshop"),
            ("B", "v", "conference"),
            ("C", "w", "deadline"),
        ]);
        let k = kb(ONTO);
        let g = Grounder::new(&c, &k);
        assert_eq!(
            grounding_rate(&g, &GroundingStrategy::sibling()).unwrap(),
            0.0
        );
        assert!(grounding_rate(&g, &GroundingStrategy::all()).unwrap() > 0.0);
    }
}
