use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tagground::corpus::RejectedLine;
use tagground::knowledge::DEFAULT_THESAURUS_ID;
use tagground::{
    evaluate, read_tagging_file, AuthorId, Corpus, EvalConfig, Grounder, GroundingOutcome,
    KnowledgeBase, MatchingAlgorithm, NormalizeMode, NormalizedTag, OntologyStore, PropertyCatalog,
    Recommender, ResourceId, SiblingScope, SimilarityMode, StrategyKind, Thesaurus,
};

#[derive(Parser)]
#[command(
    name = "tagground",
    version,
    about = "Semantically grounded tag similarity and recommendation"
)]
struct Cli {
    /// Evaluation config (TOML). Command-line flags override its values.
    #[arg(long, global = true, env = "TAGGROUND_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the semantic expansions of a tag.
    Expand {
        tag: String,
        #[command(flatten)]
        treasures: TreasureArgs,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
    /// Ground TAG@RESOURCE against TAG@RESOURCE.
    Ground {
        a: String,
        b: String,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        treasures: TreasureArgs,
        #[arg(long, default_value = "all")]
        strategy: StrategyKind,
        /// Target user whose MFT profile is used.
        #[arg(long)]
        user: Option<String>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Top-k resources similar to a resource.
    Recommend {
        resource: String,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        treasures: TreasureArgs,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long, default_value = "baseline")]
        mode: SimilarityMode,
        #[arg(long)]
        user: Option<String>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Top-k resources for a user, scored against the user's own resources.
    RecommendUser {
        user: String,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        treasures: TreasureArgs,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long, default_value = "baseline")]
        mode: SimilarityMode,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Expansion, grounding and variation rates per treasure group.
    Evaluate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        treasures: TreasureArgs,
        /// Comma-separated subset of all,sibling,mft.
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<StrategyKind>,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Directory for report files; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the rank-aware variation measure.
        #[arg(long)]
        rank_aware: bool,
        /// Corpus name for report columns; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        tuning: Tuning,
    },
}

#[derive(Args)]
struct CorpusArgs {
    /// Tagging file: resource<TAB>author<TAB>tag per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Write skipped input lines to this file.
    #[arg(long)]
    rejects: Option<PathBuf>,
    #[arg(long, value_enum)]
    normalize: Option<Normalize>,
}

#[derive(Args)]
struct TreasureArgs {
    /// Ontology file (subject<TAB>predicate<TAB>object), repeatable.
    #[arg(long = "ontology")]
    ontologies: Vec<PathBuf>,
    /// Thesaurus file, one comma-separated synset per line.
    #[arg(long)]
    thesaurus: Option<PathBuf>,
    /// Property catalog overrides (`property = Category`).
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
struct Tuning {
    /// Fall back to the unvalidated strategy when no context exists.
    #[arg(long)]
    fallback: bool,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum)]
    sibling_scope: Option<Scope>,
    #[arg(long, value_enum)]
    matching: Option<Matching>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Normalize {
    Preserve,
    FoldPunctuation,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Either,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Matching {
    Greedy,
    Exact,
}

fn load_config(path: Option<&Path>) -> Result<EvalConfig> {
    match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            EvalConfig::from_toml(&text).with_context(|| format!("in config {}", p.display()))
        }
        None => Ok(EvalConfig::default()),
    }
}

impl Tuning {
    fn apply(&self, config: &mut EvalConfig) {
        config.fallback_to_all |= self.fallback;
        if let Some(t) = self.threshold {
            config.mft_threshold = t;
        }
        if let Some(s) = self.sibling_scope {
            config.sibling_scope = match s {
                Scope::Either => SiblingScope::EitherResource,
                Scope::Both => SiblingScope::BothResources,
            };
        }
        if let Some(m) = self.matching {
            config.matching = match m {
                Matching::Greedy => MatchingAlgorithm::Greedy,
                Matching::Exact => MatchingAlgorithm::Exact,
            };
        }
    }
}

impl CorpusArgs {
    fn load(&self, config: &mut EvalConfig) -> Result<Corpus> {
        Ok(self.load_with_rejects(config)?.0)
    }

    fn load_with_rejects(&self, config: &mut EvalConfig) -> Result<(Corpus, Vec<RejectedLine>)> {
        if let Some(n) = self.normalize {
            config.normalize = match n {
                Normalize::Preserve => NormalizeMode::Preserve,
                Normalize::FoldPunctuation => NormalizeMode::FoldPunctuation,
            };
        }
        let file = fs::File::open(&self.corpus)
            .with_context(|| format!("opening {}", self.corpus.display()))?;
        let ingested = read_tagging_file(BufReader::new(file), config.normalize)
            .with_context(|| format!("reading {}", self.corpus.display()))?;
        if !ingested.rejects.is_empty() {
            log::warn!(
                "{} malformed line(s) skipped in {}",
                ingested.rejects.len(),
                self.corpus.display()
            );
        }
        if let Some(path) = &self.rejects {
            write_rejects(path, &ingested.rejects)?;
        }
        Ok((ingested.corpus, ingested.rejects))
    }
}

fn write_rejects(path: &Path, rejects: &[RejectedLine]) -> Result<()> {
    let mut out = String::from("line\treason\ttext\n");
    for r in rejects {
        let _ = writeln!(out, "{}\t{}\t{}", r.line, r.reason, r.text);
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

impl TreasureArgs {
    fn load(&self, mode: NormalizeMode) -> Result<KnowledgeBase> {
        let mut catalog = PropertyCatalog::default();
        if let Some(p) = &self.catalog {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            catalog.apply_overrides(&text, &p.display().to_string())?;
        }
        let ontologies = self
            .ontologies
            .iter()
            .map(|p| {
                OntologyStore::load_path(p, &catalog)
                    .with_context(|| format!("loading {}", p.display()))
            })
            .collect::<Result<Vec<_>>>()?;
        let thesaurus = self
            .thesaurus
            .as_ref()
            .map(|p| {
                Thesaurus::load_path(p, DEFAULT_THESAURUS_ID, mode)
                    .with_context(|| format!("loading {}", p.display()))
            })
            .transpose()?;
        Ok(KnowledgeBase::new(ontologies, thesaurus)?)
    }
}

/// Splits `tag@resource` at the last `@`.
fn tag_at(spec: &str, mode: NormalizeMode) -> Result<(NormalizedTag, ResourceId)> {
    let Some((tag, resource)) = spec.rsplit_once('@') else {
        bail!("expected TAG@RESOURCE, got `{spec}`");
    };
    if resource.is_empty() {
        bail!("missing resource in `{spec}`");
    }
    Ok((
        NormalizedTag::with_mode(tag, mode)?,
        ResourceId::new(resource),
    ))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn expand_table(tag: &NormalizedTag, kb: &KnowledgeBase, format: Format) -> String {
    let rows: Vec<[String; 4]> = kb
        .expand(tag)
        .into_iter()
        .map(|e| {
            [
                e.expanded_label.clone(),
                e.source_kind.to_string(),
                e.relationship(),
                e.treasure_id.clone(),
            ]
        })
        .collect();
    let header = [
        "Semantic Expansion",
        "Source",
        "Semantic Relationship",
        "Treasure",
    ];
    let mut out = String::new();
    match format {
        Format::Csv => {
            let _ = writeln!(out, "expansion,source,relationship,treasure");
            for row in &rows {
                let cells: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        Format::Md => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|---|---|---|---|");
            for row in &rows {
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
        }
    }
    out
}

fn profile_for(
    corpus: &Corpus,
    user: Option<&str>,
    threshold: f64,
) -> Result<Option<tagground::UserProfile>> {
    user.map(|u| corpus.build_profile(u, threshold))
        .transpose()
        .map_err(Into::into)
}

fn run(cli: Cli) -> Result<()> {
    let mut config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Expand {
            tag,
            treasures,
            format,
        } => {
            let kb = treasures.load(config.normalize)?;
            let tag = NormalizedTag::with_mode(&tag, config.normalize)?;
            print!("{}", expand_table(&tag, &kb, format));
        }
        Command::Ground {
            a,
            b,
            corpus,
            treasures,
            strategy,
            user,
            tuning,
        } => {
            tuning.apply(&mut config);
            let corpus = corpus.load(&mut config)?;
            let kb = treasures.load(config.normalize)?;
            let (ta, ra) = tag_at(&a, config.normalize)?;
            let (tb, rb) = tag_at(&b, config.normalize)?;
            let profile = profile_for(&corpus, user.as_deref(), config.mft_threshold)?;
            let grounder = Grounder::new(&corpus, &kb);
            match grounder.ground(
                &ta,
                &ra,
                &tb,
                &rb,
                &config.strategy(strategy),
                profile.as_ref(),
            )? {
                GroundingOutcome::Grounded(g) => {
                    println!(
                        "{}@{} ~ {}@{}",
                        g.tag_a, g.resource_a, g.tag_b, g.resource_b
                    );
                    println!("strategy: {}", g.strategy.label());
                    println!(
                        "via: {} [{}, {}]",
                        g.via.relationship(),
                        g.via.treasure_id,
                        g.via.category
                    );
                    let evidence: Vec<&str> = g
                        .context_evidence
                        .iter()
                        .map(NormalizedTag::as_str)
                        .collect();
                    println!(
                        "evidence: {}",
                        if evidence.is_empty() {
                            "-".into()
                        } else {
                            evidence.join(", ")
                        }
                    );
                    if g.fallback {
                        println!("fallback: yes");
                    }
                }
                GroundingOutcome::Rejected(reason) => println!("none: {reason}"),
            }
        }
        Command::Recommend {
            resource,
            corpus,
            treasures,
            k,
            mode,
            user,
            tuning,
        } => {
            tuning.apply(&mut config);
            let corpus = corpus.load(&mut config)?;
            let kb = treasures.load(config.normalize)?;
            let grounder = Grounder::new(&corpus, &kb);
            let rec = Recommender::new(&grounder).with_matching(config.matching);
            let mode = configure(mode, &config);
            let user = user.map(AuthorId::new);
            let list = rec.recommend(
                &ResourceId::new(resource),
                k.unwrap_or(config.k),
                &mode,
                user.as_ref(),
            )?;
            println!("rank\tresource\tscore\twhy");
            for (i, item) in list.items.iter().enumerate() {
                println!(
                    "{}\t{}\t{:.4}\t{}",
                    i + 1,
                    item.resource,
                    item.score.value,
                    item.score.justification()
                );
            }
        }
        Command::RecommendUser {
            user,
            corpus,
            treasures,
            k,
            mode,
            tuning,
        } => {
            tuning.apply(&mut config);
            let corpus = corpus.load(&mut config)?;
            let kb = treasures.load(config.normalize)?;
            let grounder = Grounder::new(&corpus, &kb);
            let rec = Recommender::new(&grounder).with_matching(config.matching);
            let mode = configure(mode, &config);
            let list =
                rec.recommend_for_user(&AuthorId::new(user), k.unwrap_or(config.k), &mode)?;
            println!("rank\tresource\tscore\tanchor\twhy");
            for (i, item) in list.items.iter().enumerate() {
                println!(
                    "{}\t{}\t{:.4}\t{}\t{}",
                    i + 1,
                    item.resource,
                    item.score.value,
                    item.anchor,
                    item.score.justification()
                );
            }
        }
        Command::Evaluate {
            corpus,
            treasures,
            strategies,
            k,
            format,
            out,
            rank_aware,
            name,
            tuning,
        } => {
            tuning.apply(&mut config);
            if !strategies.is_empty() {
                config.strategies = strategies;
            }
            if let Some(k) = k {
                config.k = k;
            }
            config.rank_aware |= rank_aware;
            config.validate()?;
            let name = name.unwrap_or_else(|| {
                corpus
                    .corpus
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "corpus".into())
            });
            let (loaded, rejects) = corpus.load_with_rejects(&mut config)?;
            let kb = treasures.load(config.normalize)?;
            let report = evaluate(&loaded, &kb, &config, &name)?;
            match out {
                None => match format {
                    Format::Csv => print!("{}", report.to_csv()),
                    Format::Md => print!("{}", report.to_markdown()),
                },
                Some(dir) => {
                    fs::create_dir_all(&dir)
                        .with_context(|| format!("creating {}", dir.display()))?;
                    let write = |file: &str, body: String| {
                        let path = dir.join(file);
                        fs::write(&path, body)
                            .with_context(|| format!("writing {}", path.display()))
                    };
                    match format {
                        Format::Csv => {
                            write("grounding.csv", report.grounding_csv())?;
                            write("variation.csv", report.variation_csv())?;
                            write("per_query.csv", report.per_query_csv())?;
                        }
                        Format::Md => write("report.md", report.to_markdown())?,
                    }
                    write("config.toml", config.to_toml())?;
                    if !rejects.is_empty() && corpus.rejects.is_none() {
                        write_rejects(&dir.join("rejects.tsv"), &rejects)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Carries config-level strategy settings into a mode parsed from the command line.
fn configure(mode: SimilarityMode, config: &EvalConfig) -> SimilarityMode {
    match mode {
        SimilarityMode::Baseline => SimilarityMode::Baseline,
        SimilarityMode::Grounded(s) => SimilarityMode::Grounded(config.strategy(s.kind)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
