//! Folksonomy corpus: tagging records, tag normalization, resources and
//! per-user tag frequency profiles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default MFT cutoff relative to the user's most frequent tag.
pub const DEFAULT_MFT_THRESHOLD: f64 = 0.7;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

id_newtype!(
    /// Opaque identifier of a tagged resource.
    ResourceId
);
id_newtype!(
    /// Opaque identifier of a tagging user.
    AuthorId
);

/// How aggressively raw tags are folded before comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizeMode {
    /// Lowercase, trim, collapse whitespace. Punctuation is kept, so
    /// `web2.0` and `web2_0` stay distinct.
    #[default]
    Preserve,
    /// Additionally fold every run of `.`, `_` and `-` into a single `_`.
    FoldPunctuation,
}

/// A tag after case folding and whitespace cleanup.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedTag(String);

impl NormalizedTag {
    pub fn new(raw: &str) -> Result<Self> {
        Self::with_mode(raw, NormalizeMode::Preserve)
    }

    pub fn with_mode(raw: &str, mode: NormalizeMode) -> Result<Self> {
        let mut out = String::with_capacity(raw.len());
        for word in raw.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.extend(word.chars().flat_map(char::to_lowercase));
        }
        if out.is_empty() {
            return Err(Error::RejectedRecord(format!(
                "tag `{raw}` is empty after trimming"
            )));
        }
        if mode == NormalizeMode::FoldPunctuation {
            out = fold_punctuation(&out);
        }
        Ok(NormalizedTag(out))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn fold_punctuation(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_run = false;
    for c in s.chars() {
        if matches!(c, '.' | '_' | '-') {
            if !in_run {
                out.push('_');
            }
            in_run = true;
        } else {
            out.push(c);
            in_run = false;
        }
    }
    out
}

impl fmt::Display for NormalizedTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for NormalizedTag {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Normalizes a raw tag with the default (punctuation-preserving) mode.
pub fn normalize_tag(raw: &str) -> Result<NormalizedTag> {
    NormalizedTag::new(raw)
}

/// One `<tag, resource, author>` assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggingRecord {
    pub resource_id: ResourceId,
    pub author_id: AuthorId,
    pub raw_tag: String,
}

impl TaggingRecord {
    pub fn new(resource_id: &str, author_id: &str, raw_tag: &str) -> Result<Self> {
        let (resource_id, author_id, raw_tag) =
            (resource_id.trim(), author_id.trim(), raw_tag.trim());
        if resource_id.is_empty() || author_id.is_empty() || raw_tag.is_empty() {
            return Err(Error::RejectedRecord(
                "resource, author and tag must all be non-empty".into(),
            ));
        }
        Ok(TaggingRecord {
            resource_id: ResourceId::new(resource_id),
            author_id: AuthorId::new(author_id),
            raw_tag: raw_tag.to_owned(),
        })
    }
}

/// A tagged resource, aggregated over every author who tagged it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub id: ResourceId,
    /// Tag multiset: occurrence count per distinct tag.
    pub tags: BTreeMap<NormalizedTag, u32>,
    /// Number of tag assignments each author made on this resource.
    pub authors: BTreeMap<AuthorId, u32>,
}

impl Resource {
    pub fn distinct_tags(&self) -> impl Iterator<Item = &NormalizedTag> + '_ {
        self.tags.keys()
    }

    pub fn has_tag(&self, tag: &NormalizedTag) -> bool {
        self.tags.contains_key(tag)
    }

    /// The author with the most assignments on this resource; ties go to
    /// the smallest author id.
    pub fn most_prolific_author(&self) -> Option<&AuthorId> {
        self.authors
            .iter()
            .fold(None::<(&AuthorId, u32)>, |best, (id, &n)| match best {
                Some((_, m)) if m >= n => best,
                _ => Some((id, n)),
            })
            .map(|(id, _)| id)
    }
}

/// Tag frequency profile of one user, with the most frequent tags (MFT).
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub author_id: AuthorId,
    pub tag_frequencies: BTreeMap<NormalizedTag, u32>,
    pub mft: BTreeSet<NormalizedTag>,
    pub has_clear_preference: bool,
    pub threshold: f64,
}

impl UserProfile {
    /// Builds a profile from a frequency map.
    ///
    /// A tag is in the MFT set when `freq >= threshold * max_freq`. A user
    /// whose tags never repeat (`max_freq == 1`) has no clear preference and
    /// an empty MFT set.
    pub fn from_frequencies(
        author_id: AuthorId,
        tag_frequencies: BTreeMap<NormalizedTag, u32>,
        threshold: f64,
    ) -> Result<Self> {
        check_threshold(threshold)?;
        let max_freq = tag_frequencies.values().copied().max().unwrap_or(0);
        let has_clear_preference = max_freq > 1;
        let mft = if has_clear_preference {
            let cutoff = threshold * f64::from(max_freq);
            tag_frequencies
                .iter()
                .filter(|(_, &f)| f64::from(f) >= cutoff)
                .map(|(t, _)| t.clone())
                .collect()
        } else {
            BTreeSet::new()
        };
        Ok(UserProfile {
            author_id,
            tag_frequencies,
            mft,
            has_clear_preference,
            threshold,
        })
    }
}

pub(crate) fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "MFT threshold must be in (0, 1], got {threshold}"
        )))
    }
}

/// A line of the tagging file that was skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    pub line: usize,
    pub reason: String,
    pub text: String,
}

/// The folksonomy: resources, per-author tag frequencies and the global
/// vocabulary. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    resources: BTreeMap<ResourceId, Resource>,
    authors: BTreeMap<AuthorId, BTreeMap<NormalizedTag, u32>>,
    vocabulary: BTreeSet<NormalizedTag>,
    mode: NormalizeMode,
}

impl Corpus {
    pub fn builder(mode: NormalizeMode) -> CorpusBuilder {
        CorpusBuilder {
            corpus: Corpus {
                mode,
                ..Corpus::default()
            },
        }
    }

    /// Ingests records with the default normalization. Duplicate
    /// `(resource, author, tag)` triples increment counts.
    pub fn ingest<I>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = TaggingRecord>,
    {
        Self::ingest_with_mode(records, NormalizeMode::Preserve)
    }

    pub fn ingest_with_mode<I>(records: I, mode: NormalizeMode) -> Result<Self>
    where
        I: IntoIterator<Item = TaggingRecord>,
    {
        let mut builder = Corpus::builder(mode);
        for record in records {
            builder.add(&record)?;
        }
        Ok(builder.build())
    }

    pub fn normalize_mode(&self) -> NormalizeMode {
        self.mode
    }

    pub fn resource(&self, id: &str) -> Result<&Resource> {
        self.resources
            .get(id)
            .ok_or_else(|| Error::not_found("resource", id))
    }

    pub fn resources(&self) -> impl ExactSizeIterator<Item = &Resource> + '_ {
        self.resources.values()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn authors(&self) -> impl Iterator<Item = &AuthorId> + '_ {
        self.authors.keys()
    }

    pub fn vocabulary(&self) -> &BTreeSet<NormalizedTag> {
        &self.vocabulary
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    /// Distinct tags of the resource other than `tag`. The query tag need not
    /// be present on the resource.
    pub fn sibling_tags(
        &self,
        resource_id: &str,
        tag: &NormalizedTag,
    ) -> Result<BTreeSet<NormalizedTag>> {
        let resource = self.resource(resource_id)?;
        Ok(resource
            .distinct_tags()
            .filter(|t| *t != tag)
            .cloned()
            .collect())
    }

    pub fn build_profile(&self, author_id: &str, threshold: f64) -> Result<UserProfile> {
        let (id, freqs) = self
            .authors
            .get_key_value(author_id)
            .ok_or_else(|| Error::not_found("author", author_id))?;
        UserProfile::from_frequencies(id.clone(), freqs.clone(), threshold)
    }

    /// Profile of the resource's most prolific author.
    pub fn owner_profile(&self, resource_id: &str, threshold: f64) -> Result<UserProfile> {
        let resource = self.resource(resource_id)?;
        let owner = resource
            .most_prolific_author()
            .ok_or_else(|| Error::not_found("author of resource", resource_id))?;
        self.build_profile(owner.as_str(), threshold)
    }
}

/// Single-writer accumulator for a [`Corpus`].
#[derive(Debug)]
pub struct CorpusBuilder {
    corpus: Corpus,
}

impl CorpusBuilder {
    pub fn add(&mut self, record: &TaggingRecord) -> Result<()> {
        let tag = NormalizedTag::with_mode(&record.raw_tag, self.corpus.mode)?;
        let corpus = &mut self.corpus;
        let resource = corpus
            .resources
            .entry(record.resource_id.clone())
            .or_insert_with(|| Resource {
                id: record.resource_id.clone(),
                tags: BTreeMap::new(),
                authors: BTreeMap::new(),
            });
        *resource.tags.entry(tag.clone()).or_insert(0) += 1;
        *resource
            .authors
            .entry(record.author_id.clone())
            .or_insert(0) += 1;
        *corpus
            .authors
            .entry(record.author_id.clone())
            .or_default()
            .entry(tag.clone())
            .or_insert(0) += 1;
        corpus.vocabulary.insert(tag);
        Ok(())
    }

    pub fn build(self) -> Corpus {
        self.corpus
    }
}

/// Result of reading a tagging file.
#[derive(Debug)]
pub struct Ingested {
    pub corpus: Corpus,
    pub rejects: Vec<RejectedLine>,
}

/// Reads `resource_id<TAB>author_id<TAB>raw_tag` lines. `#` lines and blank
/// lines are skipped; malformed lines are collected in `rejects`.
pub fn read_tagging_file<R: BufRead>(reader: R, mode: NormalizeMode) -> Result<Ingested> {
    let mut builder = Corpus::builder(mode);
    let mut rejects = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Ingest {
            line: line_no,
            source,
        })?;
        let text = line.trim_end_matches('\r');
        if text.trim().is_empty() || text.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').collect();
        let outcome = match fields.as_slice() {
            [resource, author, tag] => {
                TaggingRecord::new(resource, author, tag).and_then(|r| builder.add(&r))
            }
            _ => Err(Error::RejectedRecord(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            ))),
        };
        if let Err(err) = outcome {
            log::warn!("tagging line {line_no} skipped: {err}");
            rejects.push(RejectedLine {
                line: line_no,
                reason: err.to_string(),
                text: text.to_owned(),
            });
        }
    }
    Ok(Ingested {
        corpus: builder.build(),
        rejects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(s: &str) -> NormalizedTag {
        NormalizedTag::new(s).unwrap()
    }

    fn rec(r: &str, u: &str, t: &str) -> TaggingRecord {
        TaggingRecord::new(r, u, t).unwrap()
    }

    fn tags(list: &[&str]) -> BTreeSet<NormalizedTag> {
        list.iter().map(|s| tag(s)).collect()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(tag("Reference").as_str(), "reference");
        assert_eq!(tag("web2.0").as_str(), "web2.0");
        assert_ne!(tag("web2.0"), tag("web2_0"));
        assert_eq!(tag("  Java   Examples ").as_str(), "java examples");
    }

    #[test]
    fn normalize_rejects_blank() {
        assert!(matches!(
            NormalizedTag::new("   \t "),
            Err(Error::RejectedRecord(_))
        ));
    }

    #[test]
    fn fold_mode_merges_syntax_variants() {
        let a = NormalizedTag::with_mode("web2.0", NormalizeMode::FoldPunctuation).unwrap();
        let b = NormalizedTag::with_mode("Web2_0", NormalizeMode::FoldPunctuation).unwrap();
        assert_eq!(a, b);
        let c = NormalizedTag::with_mode("a.-_b", NormalizeMode::FoldPunctuation).unwrap();
        assert_eq!(c.as_str(), "a_b");
    }

    #[test]
    fn ingest_examples() {
        let c = Corpus::ingest([rec("r1", "u1", "workshop"), rec("r1", "u1", "cfp")]).unwrap();
        assert_eq!(c.resource_count(), 1);
        assert_eq!(c.vocabulary().len(), 2);

        let empty = Corpus::ingest(Vec::new()).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.resource_count(), 0);

        let c = Corpus::ingest(vec![rec("r1", "u1", "java"); 3]).unwrap();
        assert_eq!(c.resource("r1").unwrap().tags[&tag("java")], 3);
    }

    #[test]
    fn record_requires_all_fields() {
        assert!(TaggingRecord::new("r1", " ", "x").is_err());
        assert!(TaggingRecord::new("", "u", "x").is_err());
        assert!(TaggingRecord::new("r", "u", "  ").is_err());
    }

    #[test]
    fn sibling_examples() {
        let c = Corpus::ingest([
            rec("r1", "u1", "reference"),
            rec("r1", "u1", "library"),
            rec("r1", "u1", "libraries"),
            rec("r1", "u1", "conferences"),
            rec("r2", "u2", "solo"),
        ])
        .unwrap();
        assert_eq!(
            c.sibling_tags("r1", &tag("reference")).unwrap(),
            tags(&["library", "libraries", "conferences"])
        );
        assert!(c.sibling_tags("r2", &tag("solo")).unwrap().is_empty());
        // absent query tag: set difference with nothing removed
        assert_eq!(
            c.sibling_tags("r1", &tag("conference")).unwrap(),
            tags(&["reference", "library", "libraries", "conferences"])
        );
        assert!(matches!(
            c.sibling_tags("nope", &tag("x")),
            Err(Error::NotFound { .. })
        ));
    }

    fn freq_corpus(user: &str, freqs: &[(&str, u32)]) -> Corpus {
        let mut records = Vec::new();
        for (i, (t, n)) in freqs.iter().enumerate() {
            for j in 0..*n {
                records.push(rec(&format!("r{i}_{j}"), user, t));
            }
        }
        Corpus::ingest(records).unwrap()
    }

    #[test]
    fn profile_cutoff() {
        let c = freq_corpus("u", &[("a", 5), ("b", 4), ("c", 1)]);
        let p = c.build_profile("u", DEFAULT_MFT_THRESHOLD).unwrap();
        assert!(p.has_clear_preference);
        assert_eq!(p.mft, tags(&["a", "b"]));
    }

    #[test]
    fn profile_without_repetition_has_no_preference() {
        let c = freq_corpus("u", &[("x", 1), ("y", 1)]);
        let p = c.build_profile("u", 0.7).unwrap();
        assert!(!p.has_clear_preference);
        assert!(p.mft.is_empty());
    }

    #[test]
    fn profile_top_four() {
        let c = freq_corpus(
            "owner",
            &[
                ("programming", 9),
                ("java", 8),
                ("howto", 7),
                ("software", 7),
                ("reference", 2),
                ("examples", 1),
            ],
        );
        let p = c.build_profile("owner", 0.7).unwrap();
        assert_eq!(p.mft, tags(&["programming", "java", "howto", "software"]));
    }

    #[test]
    fn profile_errors() {
        let c = freq_corpus("u", &[("x", 2)]);
        assert!(matches!(
            c.build_profile("ghost", 0.7),
            Err(Error::NotFound { .. })
        ));
        assert!(matches!(c.build_profile("u", 0.0), Err(Error::Config(_))));
        assert!(matches!(c.build_profile("u", 1.5), Err(Error::Config(_))));
    }

    #[test]
    fn most_prolific_author_breaks_ties_by_id() {
        let c = Corpus::ingest([
            rec("r", "zed", "a"),
            rec("r", "amy", "b"),
            rec("r", "bob", "c"),
            rec("r", "bob", "d"),
        ])
        .unwrap();
        let r = c.resource("r").unwrap();
        assert_eq!(r.most_prolific_author().unwrap().as_str(), "bob");
        let c = Corpus::ingest([rec("r", "zed", "a"), rec("r", "amy", "b")]).unwrap();
        let r = c.resource("r").unwrap();
        assert_eq!(r.most_prolific_author().unwrap().as_str(), "amy");
    }

    #[test]
    fn tagging_file_skips_and_reports() {
        let text = "# header\nr1\tu1\tWorkshop\n\nr1\tu1\n r2 \tu2\t  \nr2\tu2\tcfp\textra\nr3\tu3\tJava Examples\r\n";
        let got = read_tagging_file(text.as_bytes(), NormalizeMode::Preserve).unwrap();
        assert_eq!(got.corpus.resource_count(), 2);
        assert!(got.corpus.vocabulary().contains(&tag("java examples")));
        let lines: Vec<usize> = got.rejects.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![4, 5, 6]);
    }

    #[test]
    fn tagging_file_reports_unreadable_line() {
        let bytes: &[u8] = b"r1\tu1\tok\nr2\tu2\t\xff\xfe\n";
        match read_tagging_file(bytes, NormalizeMode::Preserve) {
            Err(Error::Ingest { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected ingest error, got {other:?}"),
        }
    }
}
