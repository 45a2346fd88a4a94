//! Batch evaluation: expansion and grounding rates per treasure group, and
//! how much each strategy displaces the baseline top-k lists.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{check_threshold, Corpus, NormalizeMode, ResourceId, DEFAULT_MFT_THRESHOLD};
use crate::error::{Error, Result};
use crate::expansion::expansion_rate;
use crate::grounding::{grounding_rate, Grounder, GroundingStrategy, SiblingScope, StrategyKind};
use crate::knowledge::KnowledgeBase;
use crate::recommender::{MatchingAlgorithm, Recommender, SimilarityMode};

pub const DEFAULT_K: usize = 10;

/// Effective configuration of an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k: usize,
    pub strategies: Vec<StrategyKind>,
    pub fallback_to_all: bool,
    pub mft_threshold: f64,
    pub sibling_scope: SiblingScope,
    pub matching: MatchingAlgorithm,
    /// Use the rank-aware variation measure instead of set displacement.
    pub rank_aware: bool,
    pub normalize: NormalizeMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: DEFAULT_K,
            strategies: StrategyKind::ALL.to_vec(),
            fallback_to_all: false,
            mft_threshold: DEFAULT_MFT_THRESHOLD,
            sibling_scope: SiblingScope::default(),
            matching: MatchingAlgorithm::default(),
            rank_aware: false,
            normalize: NormalizeMode::default(),
        }
    }
}

impl EvalConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: EvalConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        check_threshold(self.mft_threshold)
    }

    pub fn strategy(&self, kind: StrategyKind) -> GroundingStrategy {
        GroundingStrategy::new(kind)
            .with_fallback(self.fallback_to_all)
            .with_threshold(self.mft_threshold)
            .with_sibling_scope(self.sibling_scope)
    }

    /// Configured strategies, deduplicated, in canonical order.
    pub fn strategy_kinds(&self) -> Vec<StrategyKind> {
        let set: BTreeSet<StrategyKind> = self.strategies.iter().copied().collect();
        set.into_iter().collect()
    }
}

/// Top-k change for one query resource.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationMeasure {
    pub query: ResourceId,
    pub baseline_topk: Vec<ResourceId>,
    pub strategy_topk: Vec<ResourceId>,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationSummary {
    pub mean: f64,
    pub per_query: Vec<VariationMeasure>,
}

/// Fraction of the strategy's top-k that is absent from the baseline top-k.
pub fn set_displacement(baseline: &[ResourceId], strategy: &[ResourceId], k: usize) -> f64 {
    let base: BTreeSet<&ResourceId> = baseline.iter().collect();
    let new = strategy.iter().filter(|r| !base.contains(r)).count();
    new as f64 / k as f64
}

/// Rank-aware displacement: set displacement at every prefix depth
/// `d = 1..=k`, normalized by `d` and averaged over `k`.
pub fn rank_aware_displacement(baseline: &[ResourceId], strategy: &[ResourceId], k: usize) -> f64 {
    let mut total = 0.0;
    for d in 1..=k {
        let b = &baseline[..d.min(baseline.len())];
        let s = &strategy[..d.min(strategy.len())];
        total += set_displacement(b, s, d);
    }
    total / k as f64
}

/// Baseline top-k list of every resource.
pub fn baseline_lists(
    recommender: &Recommender<'_, '_>,
    k: usize,
) -> Result<BTreeMap<ResourceId, Vec<ResourceId>>> {
    topk_lists(recommender, k, &SimilarityMode::Baseline)
}

fn topk_lists(
    recommender: &Recommender<'_, '_>,
    k: usize,
    mode: &SimilarityMode,
) -> Result<BTreeMap<ResourceId, Vec<ResourceId>>> {
    let ids: Vec<&ResourceId> = recommender
        .grounder()
        .corpus()
        .resources()
        .map(|r| &r.id)
        .collect();
    ids.par_iter()
        .map(|id| {
            Ok((
                (*id).clone(),
                recommender.recommend(id, k, mode, None)?.ids(),
            ))
        })
        .collect()
}

/// Mean variation of `strategy` against precomputed baseline lists.
pub fn variation_against(
    recommender: &Recommender<'_, '_>,
    baseline: &BTreeMap<ResourceId, Vec<ResourceId>>,
    strategy: &GroundingStrategy,
    k: usize,
    rank_aware: bool,
) -> Result<VariationSummary> {
    if baseline.is_empty() {
        return Err(Error::UndefinedRate("empty corpus"));
    }
    let lists = topk_lists(recommender, k, &SimilarityMode::Grounded(*strategy))?;
    let per_query: Vec<VariationMeasure> = baseline
        .iter()
        .map(|(query, base)| {
            let grounded = lists.get(query).cloned().unwrap_or_default();
            let rate = if rank_aware {
                rank_aware_displacement(base, &grounded, k)
            } else {
                set_displacement(base, &grounded, k)
            };
            VariationMeasure {
                query: query.clone(),
                baseline_topk: base.clone(),
                strategy_topk: grounded,
                rate,
            }
        })
        .collect();
    let mean = per_query.iter().map(|m| m.rate).sum::<f64>() / per_query.len() as f64;
    Ok(VariationSummary { mean, per_query })
}

/// Mean top-k set displacement of `strategy` relative to the lexical baseline.
pub fn variation_rate(
    recommender: &Recommender<'_, '_>,
    strategy: &GroundingStrategy,
    k: usize,
) -> Result<VariationSummary> {
    if k == 0 {
        return Err(Error::Contract("k must be at least 1".into()));
    }
    if recommender.grounder().corpus().is_empty() {
        return Err(Error::UndefinedRate("empty corpus"));
    }
    let baseline = baseline_lists(recommender, k)?;
    variation_against(recommender, &baseline, strategy, k, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum TreasureGroup {
    Thesaurus,
    Ontologies,
    Combined,
}

impl TreasureGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            TreasureGroup::Thesaurus => "thesaurus",
            TreasureGroup::Ontologies => "ontologies",
            TreasureGroup::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub group: TreasureGroup,
    pub treasures: Vec<String>,
    pub expansion_rate: f64,
    pub grounding_rates: BTreeMap<StrategyKind, f64>,
    pub variation: BTreeMap<StrategyKind, VariationSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub corpus_name: String,
    pub k: usize,
    pub groups: Vec<GroupReport>,
    pub config: EvalConfig,
}

/// Runs every metric for the thesaurus-only, ontologies-only and combined
/// treasure groups (those that are non-empty).
pub fn evaluate(
    corpus: &Corpus,
    kb: &KnowledgeBase,
    config: &EvalConfig,
    corpus_name: &str,
) -> Result<EvalReport> {
    config.validate()?;
    if corpus.vocabulary().is_empty() {
        return Err(Error::UndefinedRate("empty vocabulary"));
    }
    let mut groups = Vec::new();
    if kb.thesaurus().is_some() {
        groups.push((TreasureGroup::Thesaurus, kb.thesaurus_only()));
    }
    if !kb.ontologies().is_empty() {
        groups.push((TreasureGroup::Ontologies, kb.ontologies_only()));
    }
    if groups.len() == 2 {
        groups.push((TreasureGroup::Combined, kb.clone()));
    }
    if groups.is_empty() {
        return Err(Error::Config("at least one treasure is required".into()));
    }

    let empty = KnowledgeBase::empty();
    let lexical = Grounder::new(corpus, &empty);
    let baseline = baseline_lists(
        &Recommender::new(&lexical).with_matching(config.matching),
        config.k,
    )?;

    let mut reports = Vec::new();
    for (group, group_kb) in &groups {
        log::info!("evaluating treasure group {}", group.as_str());
        let grounder = Grounder::new(corpus, group_kb);
        let recommender = Recommender::new(&grounder).with_matching(config.matching);
        let mut grounding_rates = BTreeMap::new();
        let mut variation = BTreeMap::new();
        for kind in config.strategy_kinds() {
            let strategy = config.strategy(kind);
            grounding_rates.insert(kind, grounding_rate(&grounder, &strategy)?);
            variation.insert(
                kind,
                variation_against(
                    &recommender,
                    &baseline,
                    &strategy,
                    config.k,
                    config.rank_aware,
                )?,
            );
        }
        reports.push(GroupReport {
            group: *group,
            treasures: group_kb
                .treasure_ids()
                .into_iter()
                .map(str::to_owned)
                .collect(),
            expansion_rate: expansion_rate(corpus, group_kb)?,
            grounding_rates,
            variation,
        });
    }
    Ok(EvalReport {
        corpus_name: corpus_name.to_owned(),
        k: config.k,
        groups: reports,
        config: config.clone(),
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn rate(v: f64) -> String {
    format!("{v:.4}")
}

impl EvalReport {
    fn column_names(&self) -> Vec<String> {
        self.groups
            .iter()
            .map(|g| format!("{}:{}", self.corpus_name, g.group.as_str()))
            .collect()
    }

    fn grounding_rows(&self) -> Vec<(String, Vec<f64>)> {
        let mut rows = vec![(
            "Semantic Expansions".to_owned(),
            self.groups.iter().map(|g| g.expansion_rate).collect(),
        )];
        for kind in self.config.strategy_kinds() {
            rows.push((
                kind.label().to_owned(),
                self.groups
                    .iter()
                    .map(|g| g.grounding_rates[&kind])
                    .collect(),
            ));
        }
        rows
    }

    fn variation_rows(&self) -> Vec<(String, Vec<f64>)> {
        self.config
            .strategy_kinds()
            .into_iter()
            .map(|kind| {
                (
                    kind.label().to_owned(),
                    self.groups
                        .iter()
                        .map(|g| g.variation[&kind].mean)
                        .collect(),
                )
            })
            .collect()
    }

    fn table_csv(&self, first: &str, rows: &[(String, Vec<f64>)]) -> String {
        let mut out = String::new();
        let header: Vec<String> = std::iter::once(first.to_owned())
            .chain(self.column_names())
            .map(|s| csv_field(&s))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (label, values) in rows {
            out.push_str(&csv_field(label));
            for v in values {
                out.push(',');
                out.push_str(&rate(*v));
            }
            out.push('\n');
        }
        out
    }

    /// Expansion and grounding rates: one row per metric, one column per
    /// treasure group.
    pub fn grounding_csv(&self) -> String {
        self.table_csv("metric", &self.grounding_rows())
    }

    /// Mean variation rate per strategy and treasure group.
    pub fn variation_csv(&self) -> String {
        self.table_csv("strategy", &self.variation_rows())
    }

    /// Per-query variation breakdown, lists joined with `;`.
    pub fn per_query_csv(&self) -> String {
        let mut out = String::from("group,strategy,query,rate,baseline_topk,strategy_topk\n");
        for g in &self.groups {
            for (kind, summary) in &g.variation {
                for m in &summary.per_query {
                    let join = |ids: &[ResourceId]| {
                        ids.iter()
                            .map(ResourceId::as_str)
                            .collect::<Vec<_>>()
                            .join(";")
                    };
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        g.group.as_str(),
                        kind.as_str(),
                        csv_field(m.query.as_str()),
                        rate(m.rate),
                        csv_field(&join(&m.baseline_topk)),
                        csv_field(&join(&m.strategy_topk)),
                    );
                }
            }
        }
        out
    }

    /// Combined CSV: the grounding table, a blank line, the variation table.
    pub fn to_csv(&self) -> String {
        format!("{}\n{}", self.grounding_csv(), self.variation_csv())
    }

    fn table_md(&self, first: &str, rows: &[(String, Vec<f64>)]) -> String {
        let mut out = String::new();
        let cols = self.column_names();
        let _ = writeln!(out, "| {} | {} |", first, cols.join(" | "));
        let _ = writeln!(out, "|---|{}", "---|".repeat(cols.len()));
        for (label, values) in rows {
            let cells: Vec<String> = values
                .iter()
                .map(|v| format!("{:.1}%", v * 100.0))
                .collect();
            let _ = writeln!(out, "| {} | {} |", label, cells.join(" | "));
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Evaluation of `{}`\n", self.corpus_name);
        let _ = writeln!(out, "## Semantic expansions and groundings\n");
        out.push_str(&self.table_md("Data", &self.grounding_rows()));
        let _ = writeln!(
            out,
            "\n## Variation of the top-{} recommendations\n",
            self.k
        );
        out.push_str(&self.table_md("Strategy", &self.variation_rows()));
        let _ = writeln!(out, "\n## Treasures\n");
        for g in &self.groups {
            let _ = writeln!(out, "- {}: {}", g.group.as_str(), g.treasures.join(", "));
        }
        let _ = writeln!(
            out,
            "\n## Configuration\n\n```toml\n{}```",
            self.config.to_toml()
        );
        out
    }
}
