//! Claims, their related evidence articles, and deterministic splitting.
//!
//! A corpus is read from two line-delimited JSON files: one claim per line and
//! one related article per line. Articles inherit the veracity label of the
//! claim they were retrieved for; the label is never read from the article
//! record itself.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

/// Maximum number of related articles kept per story.
pub const MAX_ARTICLES: usize = 16;

pub const CLAIMS_FILE: &str = "claims.jsonl";
pub const ARTICLES_FILE: &str = "articles.jsonl";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{file}:{line}: malformed record: {reason}")]
    Malformed {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("articles reference unknown stories: {}", .0.join(", "))]
    OrphanArticles(Vec<String>),
    #[error("duplicate story id {0:?}")]
    DuplicateStory(String),
    #[error("duplicate article id {0:?}")]
    DuplicateArticle(String),
    #[error("story {story_id:?} has {count} related articles (max {MAX_ARTICLES})")]
    TooManyArticles { story_id: String, count: usize },
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
    #[error("corpus has {0} stories, at least 10 are required to split")]
    TooSmall(usize),
    #[error("unknown story id {0:?}")]
    UnknownStory(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Binary veracity label. FAKE is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    True,
    Fake,
}

impl Label {
    pub fn is_fake(self) -> bool {
        self == Label::Fake
    }

    /// Label for a probability-of-fake score; ties go to FAKE.
    pub fn from_score(score: f64) -> Self {
        if score >= 0.5 {
            Label::Fake
        } else {
            Label::True
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::True => Label::Fake,
            Label::Fake => Label::True,
        }
    }

    /// 1.0 for FAKE, 0.0 for TRUE.
    pub fn target(self) -> f64 {
        if self.is_fake() {
            1.0
        } else {
            0.0
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::True => "true",
            Label::Fake => "fake",
        })
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "true" => Ok(Label::True),
            "fake" => Ok(Label::Fake),
            other => Err(format!("unknown label {other:?}, expected \"true\" or \"fake\"")),
        }
    }
}

/// One line of the claims file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub story_id: String,
    pub headline: String,
    pub label: Label,
    pub topic: String,
}

/// One line of the articles file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub article_id: String,
    pub story_id: String,
    pub title: String,
    pub body: String,
    pub source: String,
    pub search_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelatedArticle {
    pub article_id: String,
    pub parent_story_id: String,
    pub title: String,
    pub body: String,
    /// Registrable domain, lowercased.
    pub source: String,
    pub search_rank: u32,
    pub noisy_label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsStory {
    pub story_id: String,
    pub headline: String,
    pub label: Label,
    pub topic: String,
    pub articles: Vec<RelatedArticle>,
}

impl NewsStory {
    /// Stories without evidence are kept but flagged; article-based models
    /// fall back to their headline path for them.
    pub fn lacks_evidence(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn article_ids(&self) -> Vec<String> {
        self.articles.iter().map(|a| a.article_id.clone()).collect()
    }
}

/// Immutable collection of stories, ordered as in the claims file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    stories: Vec<NewsStory>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Assembles a corpus from parsed records, attaching and label-propagating articles.
    pub fn from_records(
        claims: Vec<ClaimRecord>,
        articles: Vec<ArticleRecord>,
    ) -> Result<Self, CorpusError> {
        let mut stories = Vec::with_capacity(claims.len());
        let mut index = HashMap::with_capacity(claims.len());
        for (i, c) in claims.into_iter().enumerate() {
            if index.insert(c.story_id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateStory(c.story_id));
            }
            stories.push(NewsStory {
                story_id: c.story_id,
                headline: normalize_whitespace(&c.headline),
                label: c.label,
                topic: c.topic,
                articles: Vec::new(),
            });
        }

        let mut orphans = BTreeSet::new();
        let mut seen_articles = BTreeSet::new();
        for a in articles {
            if !seen_articles.insert(a.article_id.clone()) {
                return Err(CorpusError::DuplicateArticle(a.article_id));
            }
            match index.get(&a.story_id) {
                Some(&i) => {
                    let story = &mut stories[i];
                    story.articles.push(RelatedArticle {
                        article_id: a.article_id,
                        parent_story_id: a.story_id,
                        title: a.title,
                        body: a.body,
                        source: normalize_source(&a.source),
                        search_rank: a.search_rank,
                        noisy_label: story.label,
                    });
                }
                None => {
                    orphans.insert(a.story_id);
                }
            }
        }
        if !orphans.is_empty() {
            return Err(CorpusError::OrphanArticles(orphans.into_iter().collect()));
        }
        for s in &mut stories {
            if s.articles.len() > MAX_ARTICLES {
                return Err(CorpusError::TooManyArticles {
                    story_id: s.story_id.clone(),
                    count: s.articles.len(),
                });
            }
            s.articles
                .sort_by(|a, b| (a.search_rank, &a.article_id).cmp(&(b.search_rank, &b.article_id)));
        }
        Ok(Self { stories, index })
    }

    /// Parses claims and articles from readers; `names` label errors.
    pub fn from_readers<C: Read, A: Read>(
        claims: C,
        articles: A,
        names: (&str, &str),
    ) -> Result<Self, CorpusError> {
        let claims: Vec<ClaimRecord> = read_records(claims, names.0, validate_claim)?;
        let articles: Vec<ArticleRecord> = read_records(articles, names.1, validate_article)?;
        Self::from_records(claims, articles)
    }

    pub fn stories(&self) -> &[NewsStory] {
        &self.stories
    }

    pub fn len(&self) -> usize {
        self.stories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stories.is_empty()
    }

    pub fn get(&self, story_id: &str) -> Option<&NewsStory> {
        self.index.get(story_id).map(|&i| &self.stories[i])
    }

    pub fn article_count(&self) -> usize {
        self.stories.iter().map(|s| s.articles.len()).sum()
    }

    /// Stories without any related article.
    pub fn flagged_without_evidence(&self) -> Vec<&str> {
        self.stories
            .iter()
            .filter(|s| s.lacks_evidence())
            .map(|s| s.story_id.as_str())
            .collect()
    }

    /// Stories for the given ids, in corpus order.
    pub fn subset<'a>(&'a self, ids: &BTreeSet<String>) -> Vec<&'a NewsStory> {
        self.stories
            .iter()
            .filter(|s| ids.contains(&s.story_id))
            .collect()
    }

    pub fn claim_records(&self) -> Vec<ClaimRecord> {
        self.stories
            .iter()
            .map(|s| ClaimRecord {
                story_id: s.story_id.clone(),
                headline: s.headline.clone(),
                label: s.label,
                topic: s.topic.clone(),
            })
            .collect()
    }

    pub fn article_records(&self) -> Vec<ArticleRecord> {
        self.stories
            .iter()
            .flat_map(|s| s.articles.iter())
            .map(|a| ArticleRecord {
                article_id: a.article_id.clone(),
                story_id: a.parent_story_id.clone(),
                title: a.title.clone(),
                body: a.body.clone(),
                source: a.source.clone(),
                search_rank: a.search_rank,
            })
            .collect()
    }
}

/// Reads a corpus from a claims file and an articles file.
pub fn ingest_corpus(claims_file: &Path, articles_file: &Path) -> Result<Corpus, CorpusError> {
    let c = fs::File::open(claims_file).map_err(io_err(claims_file))?;
    let a = fs::File::open(articles_file).map_err(io_err(articles_file))?;
    Corpus::from_readers(
        c,
        a,
        (
            &claims_file.display().to_string(),
            &articles_file.display().to_string(),
        ),
    )
}

/// Writes `claims.jsonl` and `articles.jsonl` into `dir`.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_records(&dir.join(CLAIMS_FILE), &corpus.claim_records())?;
    write_records(&dir.join(ARTICLES_FILE), &corpus.article_records())?;
    Ok(())
}

/// Reads a corpus directory written by [`write_corpus`].
pub fn read_corpus_dir(dir: &Path) -> Result<Corpus, CorpusError> {
    ingest_corpus(&dir.join(CLAIMS_FILE), &dir.join(ARTICLES_FILE))
}

/// Writes serializable records as JSON lines.
pub fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CorpusError> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_records<T, R, V>(reader: R, name: &str, validate: V) -> Result<Vec<T>, CorpusError>
where
    T: for<'de> Deserialize<'de>,
    R: Read,
    V: Fn(&T) -> Result<(), String>,
{
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| CorpusError::Malformed {
            file: name.to_string(),
            line: lineno,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            file: name.to_string(),
            line: lineno,
            reason: e.to_string(),
        })?;
        validate(&rec).map_err(|reason| CorpusError::Malformed {
            file: name.to_string(),
            line: lineno,
            reason,
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn validate_claim(c: &ClaimRecord) -> Result<(), String> {
    if c.story_id.trim().is_empty() {
        return Err("empty story_id".into());
    }
    if normalize_whitespace(&c.headline).is_empty() {
        return Err(format!("story {:?} has an empty headline", c.story_id));
    }
    Ok(())
}

fn validate_article(a: &ArticleRecord) -> Result<(), String> {
    if a.article_id.trim().is_empty() {
        return Err("empty article_id".into());
    }
    if !(1..=MAX_ARTICLES as u32).contains(&a.search_rank) {
        return Err(format!(
            "article {:?} has search_rank {} outside [1, {MAX_ARTICLES}]",
            a.article_id, a.search_rank
        ));
    }
    Ok(())
}

/// Collapses runs of whitespace and trims.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

const SECOND_LEVEL: &[&str] = &["co", "com", "org", "net", "gov", "ac", "edu", "gob", "ne", "or"];

/// Reduces a URL or host to its registrable domain, lowercased.
///
/// `https://www.News.Example.co.uk/a/b` becomes `example.co.uk`. Hosts under a
/// two-letter country code with a generic second level (`co`, `com`, `org`, ...)
/// keep three labels; everything else keeps two.
pub fn normalize_source(raw: &str) -> String {
    let mut s = raw.trim().to_ascii_lowercase();
    if let Some(pos) = s.find("://") {
        s = s[pos + 3..].to_string();
    }
    let host_end = s.find(['/', '?', '#']).unwrap_or(s.len());
    let mut host = &s[..host_end];
    if let Some(at) = host.rfind('@') {
        host = &host[at + 1..];
    }
    if let Some(colon) = host.find(':') {
        host = &host[..colon];
    }
    let labels: Vec<&str> = host
        .trim_matches('.')
        .split('.')
        .filter(|l| !l.is_empty())
        .collect();
    let keep = match labels.as_slice() {
        [.., sld, tld] if tld.len() == 2 && SECOND_LEVEL.contains(sld) && labels.len() >= 3 => 3,
        _ => 2,
    };
    let start = labels.len().saturating_sub(keep);
    labels[start..].join(".")
}

/// Train/validation/test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    fn validate(&self) -> Result<(), CorpusError> {
        let r = [self.train, self.validation, self.test];
        let sum: f64 = r.iter().sum();
        if r.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::BadRatios(r));
        }
        Ok(())
    }

    /// Target set sizes for `n` stories by largest remainder, ties to the later set.
    pub fn counts(&self, n: usize) -> [usize; 3] {
        let exact = [
            self.train * n as f64,
            self.validation * n as f64,
            self.test * n as f64,
        ];
        let mut counts = exact.map(|x| x.floor() as usize);
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.partial_cmp(&ra).unwrap().then(b.cmp(&a))
        });
        for &i in order.iter().take(n.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        counts
    }
}

/// Story-level partition of a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train: BTreeSet<String>,
    pub validation: BTreeSet<String>,
    pub test: BTreeSet<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPart {
    Train,
    Validation,
    Test,
}

impl std::str::FromStr for SplitPart {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(SplitPart::Train),
            "validation" | "val" => Ok(SplitPart::Validation),
            "test" => Ok(SplitPart::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

impl CorpusSplit {
    pub fn part(&self, part: SplitPart) -> &BTreeSet<String> {
        match part {
            SplitPart::Train => &self.train,
            SplitPart::Validation => &self.validation,
            SplitPart::Test => &self.test,
        }
    }
}

/// Stratified, seeded split of story ids.
///
/// Each label class is shuffled independently, the classes are interleaved
/// evenly into one sequence, and the sequence is cut at the target sizes. The
/// interleaving keeps every contiguous cut within about one story per class of
/// the corpus label proportion.
pub fn split_corpus(
    corpus: &Corpus,
    ratios: SplitRatios,
    seed: u64,
) -> Result<CorpusSplit, CorpusError> {
    ratios.validate()?;
    let n = corpus.len();
    if n < 10 {
        return Err(CorpusError::TooSmall(n));
    }
    let mut by_label: BTreeMap<Label, Vec<&str>> = BTreeMap::new();
    for s in corpus.stories() {
        by_label.entry(s.label).or_default().push(&s.story_id);
    }
    let mut keyed: Vec<(f64, usize, &str)> = Vec::with_capacity(n);
    for (class, (label, ids)) in by_label.iter_mut().enumerate() {
        ids.sort_unstable();
        let mut r = rng::seeded(seed, &format!("split/{label}"));
        ids.shuffle(&mut r);
        let len = ids.len() as f64;
        for (i, id) in ids.iter().enumerate() {
            keyed.push(((i as f64 + 0.5) / len, class, id));
        }
    }
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let [n_train, n_val, _] = ratios.counts(n);
    let mut split = CorpusSplit {
        train: BTreeSet::new(),
        validation: BTreeSet::new(),
        test: BTreeSet::new(),
        seed,
    };
    for (pos, (_, _, id)) in keyed.into_iter().enumerate() {
        let target = if pos < n_train {
            &mut split.train
        } else if pos < n_train + n_val {
            &mut split.validation
        } else {
            &mut split.test
        };
        target.insert(id.to_string());
    }
    Ok(split)
}
