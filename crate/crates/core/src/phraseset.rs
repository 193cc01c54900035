//! The meme lexicon and the background word set.

use std::collections::{BTreeSet, HashMap};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::tokenize;
use crate::{Error, Result};

pub const MAX_PHRASE_TOKENS: usize = 8;
pub const DEFAULT_BACKGROUND_SIZE: usize = 5000;
pub const DEFAULT_MIN_COUNT: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    pub id: u32,
    /// 1..=8 lowercase tokens.
    pub tokens: Vec<String>,
    /// The line as it appeared in the source file.
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhraseSet {
    pub phrases: Vec<Phrase>,
    /// Sorted, unique single-token words.
    pub background: Vec<String>,
    pub rng_seed: Option<u64>,
}

/// Non-fatal findings from [`load_phrases`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// (line, label) of lines dropped because an earlier line had the same tokens.
    pub duplicates: Vec<(usize, String)>,
    /// (line, original token count) of lines cut to their 8-token prefix.
    pub truncated: Vec<(usize, usize)>,
}

/// Parses a phrase file: one phrase per line, `#` comments and blank lines ignored.
pub fn load_phrases(text: &str) -> Result<(PhraseSet, LoadReport)> {
    let mut report = LoadReport::default();
    let mut seen: HashMap<Vec<String>, u32> = HashMap::new();
    let mut phrases = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let label = raw.trim();
        if label.is_empty() || label.starts_with('#') {
            continue;
        }
        let mut tokens = tokenize(label);
        if tokens.is_empty() {
            return Err(Error::PhraseLoad {
                line,
                message: format!("`{label}` contains no tokens"),
            });
        }
        if tokens.len() > MAX_PHRASE_TOKENS {
            log::warn!(
                "phrase line {line}: {} tokens, keeping the {MAX_PHRASE_TOKENS}-token prefix",
                tokens.len()
            );
            report.truncated.push((line, tokens.len()));
            tokens.truncate(MAX_PHRASE_TOKENS);
        }
        if seen.contains_key(&tokens) {
            log::warn!("phrase line {line}: duplicate of an earlier phrase, skipped");
            report.duplicates.push((line, label.to_owned()));
            continue;
        }
        let id = phrases.len() as u32;
        seen.insert(tokens.clone(), id);
        phrases.push(Phrase {
            id,
            tokens,
            label: label.to_owned(),
        });
    }
    Ok((
        PhraseSet {
            phrases,
            background: Vec::new(),
            rng_seed: None,
        },
        report,
    ))
}

/// Parses a background word file, one word per line.
pub fn load_background(text: &str) -> Result<Vec<String>> {
    let mut words = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut tokens = tokenize(raw);
        if tokens.len() != 1 {
            return Err(Error::PhraseLoad {
                line: i + 1,
                message: format!("background entry `{raw}` is not a single token"),
            });
        }
        words.insert(tokens.pop().unwrap());
    }
    Ok(words.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundSample {
    /// Sorted.
    pub words: Vec<String>,
    /// True when fewer than the requested number of words were eligible.
    pub short: bool,
}

/// Uniform sample without replacement of `n` words whose corpus count is at least `min_count`.
pub fn sample_background(
    vocabulary: &HashMap<String, u64>,
    n: usize,
    min_count: u64,
    seed: u64,
) -> Result<BackgroundSample> {
    if n == 0 {
        return Err(Error::InvalidArgument("background sample size must be >= 1".into()));
    }
    if vocabulary.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let mut eligible: Vec<&String> = vocabulary
        .iter()
        .filter(|(_, &c)| c >= min_count)
        .map(|(w, _)| w)
        .collect();
    if eligible.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    // HashMap order is random; sampling indexes into a sorted list.
    eligible.sort();
    if eligible.len() <= n {
        if eligible.len() < n {
            log::warn!(
                "only {} words have count >= {min_count}; background uses all of them instead of {n}",
                eligible.len()
            );
        }
        let short = eligible.len() < n;
        return Ok(BackgroundSample {
            words: eligible.into_iter().cloned().collect(),
            short,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words: Vec<String> = index::sample(&mut rng, eligible.len(), n)
        .into_iter()
        .map(|i| eligible[i].clone())
        .collect();
    words.sort();
    Ok(BackgroundSample { words, short: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A lexicon with the same per-length histogram as the tracked meme set.
    pub(crate) fn table_one_lexicon() -> String {
        let hist = [(1, 69), (2, 80), (3, 69), (4, 48), (5, 25), (6, 25), (7, 18), (8, 18)];
        let mut out = String::from("# synthetic lexicon\n");
        let mut k = 0;
        for (len, count) in hist {
            for _ in 0..count {
                let words: Vec<String> = (0..len).map(|j| format!("m{k}t{j}")).collect();
                out.push_str(&words.join(" "));
                out.push('\n');
                k += 1;
            }
        }
        out
    }

    #[test]
    fn length_histogram_survives_loading() {
        let (set, report) = load_phrases(&table_one_lexicon()).unwrap();
        assert_eq!(set.phrases.len(), 352);
        let mut hist = [0usize; 9];
        for p in &set.phrases {
            hist[p.tokens.len()] += 1;
        }
        assert_eq!(&hist[1..], &[69, 80, 69, 48, 25, 25, 18, 18]);
        assert_eq!(report, LoadReport::default());
    }

    #[test]
    fn examples() {
        let (set, _) = load_phrases("hello darkness my old friend\n").unwrap();
        assert_eq!(set.phrases[0].tokens.len(), 5);

        let long = "a b c d e f g h i j k l";
        let (set, report) = load_phrases(long).unwrap();
        assert_eq!(set.phrases[0].tokens, tokenize("a b c d e f g h"));
        assert_eq!(set.phrases[0].label, long);
        assert_eq!(report.truncated, vec![(1, 12)]);
    }

    #[test]
    fn duplicates_and_comments() {
        let (set, report) = load_phrases("# c\nY tho\n\ny tho!\nzerg rush\n").unwrap();
        assert_eq!(set.phrases.len(), 2);
        assert_eq!(set.phrases[0].label, "Y tho");
        assert_eq!(set.phrases[1].id, 1);
        assert_eq!(report.duplicates, vec![(4, "y tho!".to_string())]);
    }

    #[test]
    fn zero_token_line_is_an_error() {
        let err = load_phrases("ok\n?!?\n").unwrap_err();
        assert!(matches!(err, Error::PhraseLoad { line: 2, .. }));
    }

    #[test]
    fn loading_is_idempotent() {
        let text = "winter is coming\nu wot m8\nthicc\n";
        let (a, _) = load_phrases(text).unwrap();
        let relabelled: String = a.phrases.iter().map(|p| format!("{}\n", p.label)).collect();
        let (b, _) = load_phrases(&relabelled).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn background_file() {
        assert_eq!(load_background("b\na\n\nA\n").unwrap(), vec!["a", "b"]);
        assert!(load_background("two words\n").is_err());
    }

    fn vocab(n: usize) -> HashMap<String, u64> {
        (0..n).map(|i| (format!("w{i:05}"), 1000)).collect()
    }

    #[test]
    fn exhaustive_sample() {
        let v = vocab(3);
        for seed in 0..5 {
            let s = sample_background(&v, 3, 1, seed).unwrap();
            assert_eq!(s.words.len(), 3);
            assert!(!s.short);
        }
        let s = sample_background(&v, 10, 1, 0).unwrap();
        assert_eq!(s.words.len(), 3);
        assert!(s.short);
    }

    #[test]
    fn sample_is_deterministic() {
        let v = vocab(4000);
        assert_eq!(
            sample_background(&v, 1000, 1, 9).unwrap(),
            sample_background(&v, 1000, 1, 9).unwrap()
        );
    }

    #[test]
    fn min_count_filters() {
        let mut v = vocab(10);
        v.insert("rare".into(), 1);
        let s = sample_background(&v, 100, 100, 0).unwrap();
        assert!(!s.words.contains(&"rare".to_string()));
        assert!(sample_background(&HashMap::new(), 1, 1, 0).is_err());
        assert!(sample_background(&v, 0, 1, 0).is_err());
    }

    #[test]
    fn two_seeds_overlap_near_hypergeometric_mean() {
        // Expected intersection 5000 * 5000 / 10000 = 2500, sd about 25.
        let v = vocab(10_000);
        let a: BTreeSet<_> = sample_background(&v, 5000, 1, 1).unwrap().words.into_iter().collect();
        let b: BTreeSet<_> = sample_background(&v, 5000, 1, 2).unwrap().words.into_iter().collect();
        let common = a.intersection(&b).count();
        assert!((2300..=2700).contains(&common), "intersection {common}");
    }
}
