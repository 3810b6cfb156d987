//! Dataset loading, tokenization, vocabularies, the trainable word-embedding
//! table and seeded splits.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercases, splits on whitespace and strips ASCII punctuation.
pub fn tokenize(sentence: &str) -> Result<Vec<String>> {
    let tokens: Vec<String> = sentence
        .split_whitespace()
        .map(|w| w.chars().filter(|c| !c.is_ascii_punctuation()).collect::<String>().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(Error::EmptySentence(sentence.to_string()));
    }
    Ok(tokens)
}

/// The first `max_len` tokens. No padding.
pub fn truncate(tokens: &[String], max_len: usize) -> &[String] {
    &tokens[..tokens.len().min(max_len.max(1))]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub tokens: Vec<String>,
    pub label: u8,
}

/// Token → index map ordered by first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a Sample>) -> Self {
        let mut v = Vocab::default();
        for s in samples {
            for t in &s.tokens {
                v.insert(t);
            }
        }
        v
    }

    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let mut v = Vocab::default();
        for t in &tokens {
            v.insert(t);
        }
        v
    }

    fn insert(&mut self, token: &str) {
        if !self.index.contains_key(token) {
            self.index.insert(token.to_string(), self.tokens.len());
            self.tokens.push(token.to_string());
        }
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens in index order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// JSON object `{token: index}`.
    pub fn to_json(&self) -> Result<String> {
        let map: serde_json::Map<String, serde_json::Value> =
            self.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i.into())).collect();
        Ok(serde_json::to_string_pretty(&map)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub samples: Vec<Sample>,
    pub vocab: Vocab,
}

impl Corpus {
    pub fn new(name: impl Into<String>, samples: Vec<Sample>) -> Self {
        let vocab = Vocab::from_samples(&samples);
        Self { name: name.into(), samples, vocab }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples at `indices`, in that order, with a vocabulary rebuilt from them.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus::new(self.name.clone(), indices.iter().map(|&i| self.samples[i].clone()).collect())
    }

    pub fn label_counts(&self) -> [usize; 2] {
        let mut c = [0, 0];
        for s in &self.samples {
            c[s.label as usize] += 1;
        }
        c
    }
}

/// Parses `sentence<TAB>{0|1}` lines. Blank lines are skipped; `path` is only
/// used in error messages.
pub fn parse_tsv(text: &str, path: &Path) -> Result<Corpus> {
    let err = |line: usize, msg: String| Error::Dataset { path: path.to_path_buf(), line, msg };
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (sentence, label) = raw.rsplit_once('\t').ok_or_else(|| err(line_no, "missing tab separator".into()))?;
        let label = match label.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(err(line_no, format!("label {other:?} is not 0 or 1"))),
        };
        let tokens = tokenize(sentence).map_err(|e| err(line_no, e.to_string()))?;
        samples.push(Sample { tokens, label });
    }
    if samples.is_empty() {
        return Err(err(0, "no samples".into()));
    }
    let name = path.file_stem().map_or_else(|| "corpus".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(Corpus::new(name, samples))
}

pub fn load_tsv(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_tsv(&text, path)
}

/// The bundled 40-sentence two-topic corpus (food = 1, IT = 0).
pub fn mc_fixture() -> Corpus {
    parse_tsv(include_str!("../data/mc_fixture.tsv"), Path::new("mc_fixture.tsv")).expect("bundled fixture parses")
}

/// Trainable word vectors, one row per vocabulary entry plus a final UNK row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub width: usize,
    pub rows: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    /// `vocab_len + 1` rows of `N(0, sigma)` entries.
    pub fn random(vocab_len: usize, width: usize, sigma: f64, rng: &mut impl Rng) -> Result<Self> {
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("init sigma: {e}")))?;
        let rows = (0..=vocab_len).map(|_| (0..width).map(|_| normal.sample(rng)).collect()).collect();
        Ok(Self { width, rows })
    }

    pub fn unk_index(&self) -> usize {
        self.rows.len() - 1
    }

    /// Vocabulary rows, excluding UNK.
    pub fn vocab_rows(&self) -> &[Vec<f64>] {
        &self.rows[..self.unk_index()]
    }

    /// Row index per token; unknown tokens map to UNK.
    pub fn ids(&self, vocab: &Vocab, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| vocab.get(t).unwrap_or(self.unk_index())).collect()
    }
}

/// `S × n` matrix of the tokens' table rows.
pub fn lookup(table: &EmbeddingTable, vocab: &Vocab, tokens: &[String]) -> Vec<Vec<f64>> {
    table.ids(vocab, tokens).into_iter().map(|i| table.rows[i].clone()).collect()
}

/// How a corpus is divided into train and test parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitScheme {
    /// One stratified train/test split with the given test fraction.
    Holdout { test_fraction: f64 },
    /// Stratified `k`-fold cross-validation.
    KFold { k: usize },
}

/// Train and test sample indices into the source corpus, each ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn shuffled_by_class(corpus: &Corpus, rng: &mut impl Rng) -> [Vec<usize>; 2] {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, s) in corpus.samples.iter().enumerate() {
        by_class[s.label as usize].push(i);
    }
    for c in by_class.iter_mut() {
        c.shuffle(rng);
    }
    by_class
}

/// Stratified split; one fold for holdout, `k` for cross-validation.
pub fn split(corpus: &Corpus, scheme: SplitScheme, rng: &mut impl Rng) -> Result<Vec<Fold>> {
    let by_class = shuffled_by_class(corpus, rng);
    let n = corpus.len();
    let mut folds = match scheme {
        SplitScheme::Holdout { test_fraction } => {
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                return Err(Error::InvalidSplit(format!("test fraction {test_fraction} not in (0, 1)")));
            }
            // floor per class, then hand the remainder to the largest fractional parts
            let target = (n as f64 * test_fraction).round() as usize;
            let exact: Vec<f64> = by_class.iter().map(|c| c.len() as f64 * test_fraction).collect();
            let mut take: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
            let mut order = [0usize, 1];
            order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
            for &c in order.iter().cycle().take(2 * n) {
                if take.iter().sum::<usize>() >= target {
                    break;
                }
                if take[c] < by_class[c].len() {
                    take[c] += 1;
                }
            }
            let mut fold = Fold { train: Vec::new(), test: Vec::new() };
            for (c, idx) in by_class.iter().enumerate() {
                fold.test.extend_from_slice(&idx[..take[c]]);
                fold.train.extend_from_slice(&idx[take[c]..]);
            }
            if fold.train.is_empty() || fold.test.is_empty() {
                return Err(Error::InvalidSplit(format!("{n} samples cannot be split at {test_fraction}")));
            }
            vec![fold]
        }
        SplitScheme::KFold { k } => {
            let smallest = by_class.iter().map(Vec::len).filter(|&l| l > 0).min().unwrap_or(0);
            if k < 2 || k > smallest {
                return Err(Error::InvalidSplit(format!("{k} folds with a smallest class of {smallest}")));
            }
            let mut assignment = vec![0usize; n];
            // deal class by class, continuing the rotation so fold sizes stay balanced
            let mut next = 0;
            for idx in &by_class {
                for &i in idx {
                    assignment[i] = next % k;
                    next += 1;
                }
            }
            (0..k)
                .map(|f| Fold {
                    train: (0..n).filter(|&i| assignment[i] != f).collect(),
                    test: (0..n).filter(|&i| assignment[i] == f).collect(),
                })
                .collect()
        }
    };
    for f in &mut folds {
        f.train.sort_unstable();
        f.test.sort_unstable();
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::path::PathBuf;

    fn p() -> PathBuf {
        PathBuf::from("test.tsv")
    }

    fn balanced(n: usize) -> Corpus {
        let samples = (0..n).map(|i| Sample { tokens: vec![format!("w{i}")], label: (i % 2) as u8 }).collect();
        Corpus::new("synthetic", samples)
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Great movie!").unwrap(), vec!["great", "movie"]);
        assert_eq!(tokenize("A a A").unwrap(), vec!["a", "a", "a"]);
        assert!(matches!(tokenize("..."), Err(Error::EmptySentence(_))));
        assert_eq!(tokenize("don't\tstop").unwrap(), vec!["dont", "stop"]);
    }

    #[test]
    fn truncate_examples() {
        let toks: Vec<String> = (0..50).map(|i| i.to_string()).collect();
        assert_eq!(truncate(&toks, 45).len(), 45);
        assert_eq!(truncate(&toks[..3], 45).len(), 3);
        assert_eq!(truncate(&toks, 1), &toks[..1]);
    }

    #[test]
    fn parse_examples() {
        let c = parse_tsv("good food\t1\nbad\t0\ngood food\t1\n", &p()).unwrap();
        assert_eq!(c.samples[0], Sample { tokens: vec!["good".into(), "food".into()], label: 1 });
        assert_eq!(c.len(), 3);
        assert_eq!(c.vocab.tokens(), &["good", "food", "bad"]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(parse_tsv("", &p()), Err(Error::Dataset { line: 0, .. })));
        assert!(matches!(parse_tsv("ok\t1\nno tab here\n", &p()), Err(Error::Dataset { line: 2, .. })));
        assert!(matches!(parse_tsv("ok\t1\n\nx\t2\n", &p()), Err(Error::Dataset { line: 3, .. })));
        assert!(matches!(parse_tsv("!!!\t1\n", &p()), Err(Error::Dataset { line: 1, .. })));
    }

    #[test]
    fn lookup_uses_unk_for_unseen_tokens() {
        let vocab = Vocab::from_tokens(vec!["a".into(), "b".into()]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let table = EmbeddingTable::random(vocab.len(), 3, 0.1, &mut rng).unwrap();
        assert_eq!(table.rows.len(), 3);
        let toks: Vec<String> = ["b", "zzz", "b"].iter().map(|s| s.to_string()).collect();
        let rows = lookup(&table, &vocab, &toks);
        assert_eq!(rows[0], table.rows[1]);
        assert_eq!(rows[1], table.rows[2]);
        assert_eq!(rows[0], rows[2]);
    }

    #[test]
    fn holdout_sizes() {
        let c = balanced(1000);
        let folds = split(&c, SplitScheme::Holdout { test_fraction: 0.2 }, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!((folds[0].train.len(), folds[0].test.len()), (800, 200));
        let test = c.subset(&folds[0].test);
        assert_eq!(test.label_counts(), [100, 100]);
    }

    #[test]
    fn kfold_sizes_and_stratification() {
        let mut samples: Vec<Sample> = Vec::new();
        for i in 0..1000 {
            samples.push(Sample { tokens: vec!["t".into()], label: u8::from(i < 600) });
        }
        let c = Corpus::new("x", samples);
        let folds = split(&c, SplitScheme::KFold { k: 5 }, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(folds.len(), 5);
        let mut seen = vec![0; 1000];
        for f in &folds {
            assert_eq!(f.test.len(), 200);
            let ratio = c.subset(&f.test).label_counts()[1] as f64 / 200.0;
            assert!((ratio - 0.6).abs() <= 0.02);
            for &i in &f.test {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn split_is_seed_deterministic() {
        let c = balanced(60);
        let a = split(&c, SplitScheme::KFold { k: 3 }, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = split(&c, SplitScheme::KFold { k: 3 }, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_many_folds() {
        let c = balanced(6);
        assert!(split(&c, SplitScheme::KFold { k: 4 }, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(split(&c, SplitScheme::Holdout { test_fraction: 1.5 }, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn vocab_json_is_token_to_index() {
        let v = Vocab::from_tokens(vec!["b".into(), "a".into()]);
        let parsed: HashMap<String, usize> = serde_json::from_str(&v.to_json().unwrap()).unwrap();
        assert_eq!(parsed["b"], 0);
        assert_eq!(parsed["a"], 1);
    }
}
