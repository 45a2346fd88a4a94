//! Resource similarity and top-k recommendation.
//!
//! Similarity is a cosine over binary tag vectors generalized with grounded
//! matches: identical tags match lexically, remaining tags may match through
//! a grounding, each tag at most once, and the score is
//! `matches / sqrt(|Ta| * |Tb|)`. Baseline mode uses lexical matches only,
//! which is exactly the binary cosine.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorId, NormalizedTag, Resource, ResourceId, UserProfile};
use crate::error::{Error, Result};
use crate::grounding::{Grounder, GroundingStrategy, StrategyKind};
use crate::matching;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SimilarityMode {
    Baseline,
    Grounded(GroundingStrategy),
}

impl SimilarityMode {
    pub fn name(&self) -> &'static str {
        match self {
            SimilarityMode::Baseline => "baseline",
            SimilarityMode::Grounded(s) => s.kind.as_str(),
        }
    }

    fn strategy(&self) -> Option<&GroundingStrategy> {
        match self {
            SimilarityMode::Baseline => None,
            SimilarityMode::Grounded(s) => Some(s),
        }
    }
}

impl fmt::Display for SimilarityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimilarityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("baseline") {
            return Ok(SimilarityMode::Baseline);
        }
        let kind: StrategyKind = s.parse()?;
        Ok(SimilarityMode::Grounded(GroundingStrategy::new(kind)))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchingAlgorithm {
    /// Lexical matches first, then grounded pairs in lexicographic order.
    #[default]
    Greedy,
    /// Maximum bipartite matching over lexical and grounded edges.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatchKind {
    Lexical,
    Grounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchedPair {
    pub tag_a: NormalizedTag,
    pub tag_b: NormalizedTag,
    pub kind: MatchKind,
}

impl fmt::Display for MatchedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MatchKind::Lexical => write!(f, "{}", self.tag_a),
            MatchKind::Grounded => write!(f, "{}~{}", self.tag_a, self.tag_b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityScore {
    pub value: f64,
    /// Number of matched pairs (the numerator).
    pub matches: usize,
    /// `|Ta| * |Tb|` (the value under the square root).
    pub norm_product: usize,
    pub matched_pairs: Vec<MatchedPair>,
}

impl SimilarityScore {
    fn new(matched_pairs: Vec<MatchedPair>, na: usize, nb: usize) -> Self {
        let matches = matched_pairs.len();
        let norm_product = na * nb;
        let value = if matches == 0 {
            0.0
        } else {
            matches as f64 / (norm_product as f64).sqrt()
        };
        SimilarityScore {
            value,
            matches,
            norm_product,
            matched_pairs,
        }
    }

    /// Exact comparison of the underlying ratios:
    /// `m1 / sqrt(p1)` vs `m2 / sqrt(p2)` as `m1^2 * p2` vs `m2^2 * p1`.
    pub fn cmp_value(&self, other: &SimilarityScore) -> Ordering {
        if self.matches == 0 || other.matches == 0 {
            return self.matches.cmp(&other.matches);
        }
        let lhs = (self.matches as u128).pow(2) * other.norm_product as u128;
        let rhs = (other.matches as u128).pow(2) * self.norm_product as u128;
        lhs.cmp(&rhs)
    }

    pub fn justification(&self) -> String {
        self.matched_pairs
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub resource: ResourceId,
    pub score: SimilarityScore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationList {
    pub query: ResourceId,
    pub mode: SimilarityMode,
    pub items: Vec<Recommendation>,
}

impl RecommendationList {
    pub fn ids(&self) -> Vec<ResourceId> {
        self.items.iter().map(|r| r.resource.clone()).collect()
    }
}

/// A resource recommended to a user, with the user's own resource that
/// produced the best score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserRecommendation {
    pub resource: ResourceId,
    pub anchor: ResourceId,
    pub score: SimilarityScore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserRecommendations {
    pub user: AuthorId,
    pub mode: SimilarityMode,
    pub items: Vec<UserRecommendation>,
}

pub struct Recommender<'g, 'a> {
    grounder: &'g Grounder<'a>,
    matching: MatchingAlgorithm,
}

impl<'g, 'a> Recommender<'g, 'a> {
    pub fn new(grounder: &'g Grounder<'a>) -> Self {
        Recommender {
            grounder,
            matching: MatchingAlgorithm::Greedy,
        }
    }

    pub fn with_matching(mut self, matching: MatchingAlgorithm) -> Self {
        self.matching = matching;
        self
    }

    pub fn grounder(&self) -> &'g Grounder<'a> {
        self.grounder
    }

    /// Similarity of two distinct resources. `profile` is the target user's
    /// profile, used only by the MFT strategy.
    pub fn pair_similarity(
        &self,
        a: &ResourceId,
        b: &ResourceId,
        mode: &SimilarityMode,
        profile: Option<&UserProfile>,
    ) -> Result<SimilarityScore> {
        if a == b {
            return Err(Error::Contract(format!(
                "resource `{a}` compared with itself"
            )));
        }
        let corpus = self.grounder.corpus();
        let (ra, rb) = (corpus.resource(a.as_str())?, corpus.resource(b.as_str())?);
        // score in canonical id order so the result is symmetric
        if a <= b {
            self.score(ra, rb, mode, profile)
        } else {
            let mut s = self.score(rb, ra, mode, profile)?;
            for p in &mut s.matched_pairs {
                std::mem::swap(&mut p.tag_a, &mut p.tag_b);
            }
            Ok(s)
        }
    }

    fn score(
        &self,
        ra: &Resource,
        rb: &Resource,
        mode: &SimilarityMode,
        profile: Option<&UserProfile>,
    ) -> Result<SimilarityScore> {
        let ta: Vec<&NormalizedTag> = ra.distinct_tags().collect();
        let tb: Vec<&NormalizedTag> = rb.distinct_tags().collect();
        let index_b = |t: &NormalizedTag| tb.binary_search(&t).ok();

        let lexical: Vec<(usize, usize)> = ta
            .iter()
            .enumerate()
            .filter_map(|(i, t)| index_b(t).map(|j| (i, j)))
            .collect();

        let grounded_edge = |i: usize, j: usize| -> Result<bool> {
            let (Some(strategy), t, u) = (mode.strategy(), ta[i], tb[j]) else {
                return Ok(false);
            };
            if t == u || !self.grounder.linked(t, u) {
                return Ok(false);
            }
            Ok(self
                .grounder
                .ground(t, &ra.id, u, &rb.id, strategy, profile)?
                .is_grounded())
        };

        let pairs: Vec<(usize, usize)> = match (mode, self.matching) {
            (SimilarityMode::Baseline, _) => lexical.clone(),
            (SimilarityMode::Grounded(_), MatchingAlgorithm::Greedy) => {
                let mut left_used = vec![false; ta.len()];
                let mut right_used = vec![false; tb.len()];
                for &(i, j) in &lexical {
                    left_used[i] = true;
                    right_used[j] = true;
                }
                let mut pairs = lexical.clone();
                for (i, used) in left_used.iter_mut().enumerate() {
                    for (j, taken) in right_used.iter_mut().enumerate() {
                        if *used || *taken {
                            continue;
                        }
                        if grounded_edge(i, j)? {
                            *used = true;
                            *taken = true;
                            pairs.push((i, j));
                        }
                    }
                }
                pairs
            }
            (SimilarityMode::Grounded(_), MatchingAlgorithm::Exact) => {
                let mut adj = vec![Vec::new(); ta.len()];
                for (i, row) in adj.iter_mut().enumerate() {
                    for (j, u) in tb.iter().enumerate() {
                        if ta[i] == *u || grounded_edge(i, j)? {
                            row.push(j);
                        }
                    }
                }
                matching::maximum(&adj, tb.len(), &lexical)
            }
        };

        let matched_pairs = pairs
            .into_iter()
            .map(|(i, j)| MatchedPair {
                tag_a: ta[i].clone(),
                tag_b: tb[j].clone(),
                kind: if ta[i] == tb[j] {
                    MatchKind::Lexical
                } else {
                    MatchKind::Grounded
                },
            })
            .collect();
        Ok(SimilarityScore::new(matched_pairs, ta.len(), tb.len()))
    }

    fn profile_for(
        &self,
        mode: &SimilarityMode,
        user: Option<&AuthorId>,
        query: &ResourceId,
    ) -> Result<Option<UserProfile>> {
        let Some(strategy) = mode.strategy().filter(|s| s.kind == StrategyKind::Mft) else {
            return Ok(None);
        };
        let corpus = self.grounder.corpus();
        let profile = match user {
            Some(u) => corpus.build_profile(u.as_str(), strategy.mft_threshold)?,
            None => corpus.owner_profile(query.as_str(), strategy.mft_threshold)?,
        };
        Ok(Some(profile))
    }

    /// Top-`k` resources for `query`. For MFT the profile of `user` is used,
    /// or the query resource's most prolific author when `user` is absent.
    pub fn recommend(
        &self,
        query: &ResourceId,
        k: usize,
        mode: &SimilarityMode,
        user: Option<&AuthorId>,
    ) -> Result<RecommendationList> {
        if k == 0 {
            return Err(Error::Contract("k must be at least 1".into()));
        }
        let corpus = self.grounder.corpus();
        corpus.resource(query.as_str())?;
        let profile = self.profile_for(mode, user, query)?;
        let others: Vec<&Resource> = corpus.resources().filter(|r| r.id != *query).collect();
        let scored: Vec<Result<Recommendation>> = others
            .par_iter()
            .map(|r| {
                let score = self.pair_similarity(query, &r.id, mode, profile.as_ref())?;
                Ok(Recommendation {
                    resource: r.id.clone(),
                    score,
                })
            })
            .collect();
        let mut items = Vec::with_capacity(scored.len());
        for item in scored {
            let item = item?;
            if item.score.matches > 0 {
                items.push(item);
            }
        }
        items.sort_by(|x, y| {
            y.score
                .cmp_value(&x.score)
                .then_with(|| x.resource.cmp(&y.resource))
        });
        items.truncate(k);
        Ok(RecommendationList {
            query: query.clone(),
            mode: *mode,
            items,
        })
    }

    /// Recommends resources the user has not tagged, scoring each candidate
    /// by its best similarity to any of the user's own resources.
    pub fn recommend_for_user(
        &self,
        user: &AuthorId,
        k: usize,
        mode: &SimilarityMode,
    ) -> Result<UserRecommendations> {
        if k == 0 {
            return Err(Error::Contract("k must be at least 1".into()));
        }
        let corpus = self.grounder.corpus();
        let own: Vec<&Resource> = corpus
            .resources()
            .filter(|r| r.authors.contains_key(user))
            .collect();
        if own.is_empty() {
            return Err(Error::not_found("author", user.as_str()));
        }
        let profile = match mode.strategy().filter(|s| s.kind == StrategyKind::Mft) {
            Some(s) => Some(corpus.build_profile(user.as_str(), s.mft_threshold)?),
            None => None,
        };
        let candidates: Vec<&Resource> = corpus
            .resources()
            .filter(|r| !r.authors.contains_key(user))
            .collect();
        let scored: Vec<Result<Option<UserRecommendation>>> = candidates
            .par_iter()
            .map(|c| {
                let mut best: Option<UserRecommendation> = None;
                for anchor in &own {
                    let score = self.pair_similarity(&anchor.id, &c.id, mode, profile.as_ref())?;
                    if score.matches > 0
                        && best
                            .as_ref()
                            .is_none_or(|b| score.cmp_value(&b.score) == Ordering::Greater)
                    {
                        best = Some(UserRecommendation {
                            resource: c.id.clone(),
                            anchor: anchor.id.clone(),
                            score,
                        });
                    }
                }
                Ok(best)
            })
            .collect();
        let mut items = Vec::new();
        for item in scored {
            items.extend(item?);
        }
        items.sort_by(|x, y| {
            y.score
                .cmp_value(&x.score)
                .then_with(|| x.resource.cmp(&y.resource))
        });
        items.truncate(k);
        Ok(UserRecommendations {
            user: user.clone(),
            mode: *mode,
            items,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, TaggingRecord};
    use crate::knowledge::{KnowledgeBase, OntologyStore, PropertyCatalog, RelationCategory};

    fn corpus(rows: &[(&str, &str, &str)]) -> Corpus {
        Corpus::ingest(
            rows.iter()
                .map(|(r, u, t)| TaggingRecord::new(r, u, t).unwrap()),
        )
        .unwrap()
    }

    fn rid(s: &str) -> ResourceId {
        ResourceId::new(s)
    }

    fn kb() -> KnowledgeBase {
        let mut cat = PropertyCatalog::default();
        cat.accept("isPartOf", RelationCategory::Partnership);
        let store = OntologyStore::parse(
            "workshop\tisPartOf\tconference\n".as_bytes(),
            "conference.owl",
            &cat,
        )
        .unwrap();
        KnowledgeBase::new(vec![store], None).unwrap()
    }

    #[test]
    fn identical_sets_score_one() {
        let c = corpus(&[
            ("a", "u", "x"),
            ("a", "u", "y"),
            ("b", "v", "y"),
            ("b", "v", "x"),
        ]);
        let k = KnowledgeBase::empty();
        let g = Grounder::new(&c, &k);
        let rec = Recommender::new(&g);
        for mode in ["baseline", "all", "sibling"] {
            let mode: SimilarityMode = mode.parse().unwrap();
            let s = rec
                .pair_similarity(&rid("a"), &rid("b"), &mode, None)
                .unwrap();
            assert_eq!(s.value, 1.0);
        }
    }

    #[test]
    fn shared_single_tag_baseline() {
        let c = corpus(&[
            ("r1", "u1", "reference"),
            ("r1", "u1", "library"),
            ("r1", "u1", "libraries"),
            ("r1", "u1", "conferences"),
            ("r2", "u2", "reference"),
            ("r2", "u2", "java"),
            ("r2", "u2", "examples"),
            ("r2", "u2", "javadoc"),
        ]);
        let k = KnowledgeBase::empty();
        let g = Grounder::new(&c, &k);
        let s = Recommender::new(&g)
            .pair_similarity(&rid("r1"), &rid("r2"), &SimilarityMode::Baseline, None)
            .unwrap();
        assert_eq!(s.value, 0.25);
        assert_eq!(s.justification(), "reference");
    }

    #[test]
    fn grounding_adds_a_match() {
        let c = corpus(&[
            ("A", "u", "workshop"),
            ("A", "u", "cfp"),
            ("B", "v", "conference"),
            ("B", "v", "x"),
        ]);
        let k = kb();
        let g = Grounder::new(&c, &k);
        let rec = Recommender::new(&g);
        let all = SimilarityMode::Grounded(GroundingStrategy::all());
        let ab = rec
            .pair_similarity(&rid("A"), &rid("B"), &all, None)
            .unwrap();
        let ba = rec
            .pair_similarity(&rid("B"), &rid("A"), &all, None)
            .unwrap();
        assert_eq!(ab.value, 0.5);
        assert_eq!(ab.value, ba.value);
        assert_eq!(ab.justification(), "workshop~conference");
        assert_eq!(ba.justification(), "conference~workshop");
        assert_eq!(
            rec.pair_similarity(&rid("A"), &rid("B"), &SimilarityMode::Baseline, None)
                .unwrap()
                .value,
            0.0
        );
        assert!(matches!(
            rec.pair_similarity(&rid("A"), &rid("A"), &all, None),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn exact_comparison_orders_ratios() {
        let s = |m, na, nb| {
            SimilarityScore::new(
                (0..m)
                    .map(|i: usize| MatchedPair {
                        tag_a: NormalizedTag::new(&format!("t{i}")).unwrap(),
                        tag_b: NormalizedTag::new(&format!("t{i}")).unwrap(),
                        kind: MatchKind::Lexical,
                    })
                    .collect(),
                na,
                nb,
            )
        };
        assert_eq!(s(1, 2, 1).cmp_value(&s(2, 4, 2)), Ordering::Equal);
        assert_eq!(s(1, 4, 4).cmp_value(&s(1, 3, 4)), Ordering::Less);
        assert_eq!(s(0, 4, 4).cmp_value(&s(0, 1, 1)), Ordering::Equal);
    }

    #[test]
    fn recommend_orders_and_truncates() {
        let c = corpus(&[
            ("q", "u", "a"),
            ("q", "u", "b"),
            ("x", "v", "a"),
            ("y", "v", "a"),
            ("y", "v", "b"),
            ("w", "v", "a"),
            ("z", "v", "zzz"),
        ]);
        let k = KnowledgeBase::empty();
        let g = Grounder::new(&c, &k);
        let rec = Recommender::new(&g);
        let list = rec
            .recommend(&rid("q"), 10, &SimilarityMode::Baseline, None)
            .unwrap();
        let ids: Vec<_> = list.ids().iter().map(|r| r.to_string()).collect();
        assert_eq!(ids, vec!["y", "w", "x"]);
        let list = rec
            .recommend(&rid("q"), 2, &SimilarityMode::Baseline, None)
            .unwrap();
        assert_eq!(list.items.len(), 2);
        assert!(rec
            .recommend(&rid("q"), 0, &SimilarityMode::Baseline, None)
            .is_err());
        assert!(matches!(
            rec.recommend(&rid("nope"), 3, &SimilarityMode::Baseline, None),
            Err(Error::NotFound { .. })
        ));
    }

    #[test]
    fn user_level_recommendation() {
        let c = corpus(&[
            ("mine1", "me", "a"),
            ("mine2", "me", "b"),
            ("mine2", "me", "c"),
            ("other1", "you", "b"),
            ("other1", "you", "c"),
            ("other2", "you", "a"),
            ("other2", "you", "q"),
        ]);
        let k = KnowledgeBase::empty();
        let g = Grounder::new(&c, &k);
        let recs = Recommender::new(&g)
            .recommend_for_user(&AuthorId::new("me"), 5, &SimilarityMode::Baseline)
            .unwrap();
        let rows: Vec<_> = recs
            .items
            .iter()
            .map(|r| (r.resource.as_str(), r.anchor.as_str()))
            .collect();
        assert_eq!(rows, vec![("other1", "mine2"), ("other2", "mine1")]);
    }
}
