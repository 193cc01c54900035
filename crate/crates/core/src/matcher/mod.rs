//! Token-level multi-pattern matching.
//!
//! Every phrase is compiled into an Aho-Corasick automaton over interned token
//! ids. Scanning a document is a single left-to-right pass: each token either
//! advances the automaton or, if it occurs in no phrase, resets it to the root.
//! All match positions are reported, so overlapping occurrences of one phrase
//! (`na na` in `na na na`) and phrases nested inside longer ones are counted
//! independently. Background words are single tokens and are resolved
//! directly from the interner.

mod cache;
mod table;

use std::collections::{HashMap, VecDeque};

pub use cache::{read_cache, write_cache, write_csv, CountCache, CACHE_MAGIC};
pub use table::{BackgroundCount, CountTable, DocCount, MemeCount, TableBuilder};

use crate::corpus::{for_each_token, parse_record, Document, RawLine};
use crate::par;
use crate::phraseset::PhraseSet;

const ROOT: u32 = 0;
const NONE: u32 = u32::MAX;

/// How repeated occurrences of a phrase inside one document are counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum CountMode {
    /// Every match position.
    #[default]
    All,
    /// At most one per phrase per document. Background words are always
    /// counted per occurrence.
    PerDocument,
}

impl CountMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CountMode::All => "all",
            CountMode::PerDocument => "per-document",
        }
    }

    pub fn parse(s: &str) -> crate::Result<CountMode> {
        match s {
            "all" => Ok(CountMode::All),
            "per-document" => Ok(CountMode::PerDocument),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown count mode `{other}` (expected all or per-document)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Matcher {
    interner: HashMap<String, u32>,
    /// Token id -> background word index, or NONE.
    background_of: Vec<u32>,
    /// Dense transitions out of the root, indexed by token id.
    root_next: Vec<u32>,
    /// Sorted (token, target) transitions for every non-root state.
    edges: Vec<Vec<(u32, u32)>>,
    fail: Vec<u32>,
    /// Phrases ending exactly at each state.
    output: Vec<Vec<u32>>,
    /// Nearest proper suffix state with non-empty output.
    dict_link: Vec<u32>,
    phrase_count: usize,
    background_count: usize,
    mode: CountMode,
}

/// Occurrence counts for one document, sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentCounts {
    pub memes: Vec<(u32, u32)>,
    pub background: Vec<(u32, u32)>,
    pub tokens: u64,
}

/// Reusable per-worker buffers for scanning.
#[derive(Debug, Default)]
pub struct Scratch {
    token: String,
    meme_hits: Vec<u32>,
    background_hits: Vec<u32>,
}

impl Matcher {
    pub fn new(set: &PhraseSet) -> Matcher {
        Matcher::with_mode(set, CountMode::All)
    }

    pub fn with_mode(set: &PhraseSet, mode: CountMode) -> Matcher {
        let mut interner: HashMap<String, u32> = HashMap::new();
        let mut intern = |t: &str| -> u32 {
            let next = interner.len() as u32;
            *interner.entry(t.to_owned()).or_insert(next)
        };

        let patterns: Vec<Vec<u32>> = set
            .phrases
            .iter()
            .map(|p| p.tokens.iter().map(|t| intern(t)).collect())
            .collect();
        let background_ids: Vec<u32> = set.background.iter().map(|w| intern(w)).collect();
        let vocab = interner.len();

        let mut background_of = vec![NONE; vocab];
        for (i, &tok) in background_ids.iter().enumerate() {
            background_of[tok as usize] = i as u32;
        }

        // Trie.
        let mut goto: Vec<HashMap<u32, u32>> = vec![HashMap::new()];
        let mut output: Vec<Vec<u32>> = vec![Vec::new()];
        for (phrase, tokens) in set.phrases.iter().zip(&patterns) {
            let mut state = ROOT;
            for &tok in tokens {
                let next = goto.len() as u32;
                state = *goto[state as usize].entry(tok).or_insert_with(|| next);
                if state == next {
                    goto.push(HashMap::new());
                    output.push(Vec::new());
                }
            }
            output[state as usize].push(phrase.id);
        }

        let states = goto.len();
        let mut edges: Vec<Vec<(u32, u32)>> = goto
            .iter()
            .map(|m| {
                let mut e: Vec<(u32, u32)> = m.iter().map(|(&k, &v)| (k, v)).collect();
                e.sort_unstable();
                e
            })
            .collect();
        let mut root_next = vec![ROOT; vocab];
        for &(tok, target) in &edges[ROOT as usize] {
            root_next[tok as usize] = target;
        }
        edges[ROOT as usize].clear();

        // Failure and dictionary links, breadth first.
        let mut fail = vec![ROOT; states];
        let mut dict_link = vec![NONE; states];
        let mut queue: VecDeque<u32> = VecDeque::new();
        for &child in root_next.iter().filter(|&&s| s != ROOT) {
            queue.push_back(child);
        }
        let step = |edges: &[Vec<(u32, u32)>], root_next: &[u32], state: u32, tok: u32| -> Option<u32> {
            if state == ROOT {
                let t = root_next[tok as usize];
                (t != ROOT).then_some(t)
            } else {
                let e = &edges[state as usize];
                e.binary_search_by_key(&tok, |&(k, _)| k).ok().map(|i| e[i].1)
            }
        };
        while let Some(state) = queue.pop_front() {
            for &(tok, child) in &edges[state as usize] {
                let mut f = fail[state as usize];
                let target = loop {
                    if let Some(t) = step(&edges, &root_next, f, tok) {
                        break t;
                    }
                    if f == ROOT {
                        break ROOT;
                    }
                    f = fail[f as usize];
                };
                fail[child as usize] = target;
                dict_link[child as usize] = if !output[target as usize].is_empty() {
                    target
                } else {
                    dict_link[target as usize]
                };
                queue.push_back(child);
            }
        }

        Matcher {
            interner,
            background_of,
            root_next,
            edges,
            fail,
            output,
            dict_link,
            phrase_count: set.phrases.len(),
            background_count: set.background.len(),
            mode,
        }
    }

    pub fn phrase_count(&self) -> usize {
        self.phrase_count
    }

    pub fn background_count(&self) -> usize {
        self.background_count
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    pub fn state_count(&self) -> usize {
        self.fail.len()
    }

    #[inline]
    fn next_state(&self, mut state: u32, tok: u32) -> u32 {
        loop {
            if state == ROOT {
                return self.root_next[tok as usize];
            }
            let e = &self.edges[state as usize];
            if let Ok(i) = e.binary_search_by_key(&tok, |&(k, _)| k) {
                return e[i].1;
            }
            state = self.fail[state as usize];
        }
    }

    /// Collects raw hits for `text` into `scratch`, returning the token count.
    fn collect_hits(&self, text: &str, scratch: &mut Scratch) -> u64 {
        let Scratch {
            token,
            meme_hits,
            background_hits,
        } = scratch;
        meme_hits.clear();
        background_hits.clear();
        let mut state = ROOT;
        let mut tokens = 0u64;
        for_each_token(text, token, |t| {
            tokens += 1;
            let Some(&tok) = self.interner.get(t) else {
                state = ROOT;
                return;
            };
            let bg = self.background_of[tok as usize];
            if bg != NONE {
                background_hits.push(bg);
            }
            state = self.next_state(state, tok);
            let mut s = state;
            if self.output[s as usize].is_empty() {
                s = self.dict_link[s as usize];
            }
            while s != NONE {
                meme_hits.extend_from_slice(&self.output[s as usize]);
                s = self.dict_link[s as usize];
            }
        });
        tokens
    }

    /// Counts every phrase and background word occurrence in `text`.
    pub fn scan_text(&self, text: &str) -> DocumentCounts {
        let mut scratch = Scratch::default();
        let tokens = self.collect_hits(text, &mut scratch);
        let once = self.mode == CountMode::PerDocument;
        DocumentCounts {
            memes: run_lengths(&mut scratch.meme_hits, once),
            background: run_lengths(&mut scratch.background_hits, false),
            tokens,
        }
    }

    pub fn scan_document(&self, doc: &Document) -> DocumentCounts {
        self.scan_text(&doc.text)
    }

    /// Scans `doc` and adds its counts to `builder`.
    pub fn scan_into(&self, doc: &Document, scratch: &mut Scratch, builder: &mut TableBuilder) {
        let tokens = self.collect_hits(&doc.text, scratch);
        let day = doc.day();
        builder.add_document(day, doc.kind, tokens);
        let once = self.mode == CountMode::PerDocument;
        if !scratch.meme_hits.is_empty() {
            scratch.meme_hits.sort_unstable();
            let community = builder.community_slot(&doc.community);
            for_runs(&scratch.meme_hits, |id, n| {
                let n = if once { 1 } else { n };
                *community.entry((id, day.0)).or_insert(0) += n as u64;
            });
        }
        if !scratch.background_hits.is_empty() {
            scratch.background_hits.sort_unstable();
            for_runs(&scratch.background_hits, |id, n| {
                builder.add_background(id, day, n as u64);
            });
        }
    }
}

fn for_runs(sorted: &[u32], mut f: impl FnMut(u32, u32)) {
    let mut i = 0;
    while i < sorted.len() {
        let id = sorted[i];
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == id {
            j += 1;
        }
        f(id, (j - i) as u32);
        i = j;
    }
}

fn run_lengths(hits: &mut [u32], once: bool) -> Vec<(u32, u32)> {
    hits.sort_unstable();
    let mut out = Vec::new();
    for_runs(hits, |id, n| out.push((id, if once { 1 } else { n })));
    out
}

/// Scans documents split into `shards` contiguous shards, one private table
/// per shard, merged at the end.
pub fn scan_corpus(matcher: &Matcher, docs: &[Document], shards: usize) -> CountTable {
    let parts = par::map_shards(docs, shards, |chunk| scan_chunk(matcher, chunk));
    merge_builders(parts).finish()
}

/// [`scan_corpus`] without the parallel backend.
pub fn scan_corpus_sequential(matcher: &Matcher, docs: &[Document], shards: usize) -> CountTable {
    let parts = par::map_shards_sequential(docs, shards, |chunk| scan_chunk(matcher, chunk));
    merge_builders(parts).finish()
}

fn scan_chunk(matcher: &Matcher, docs: &[Document]) -> TableBuilder {
    let mut builder = TableBuilder::default();
    let mut scratch = Scratch::default();
    for doc in docs {
        matcher.scan_into(doc, &mut scratch, &mut builder);
    }
    builder
}

fn merge_builders(parts: Vec<TableBuilder>) -> TableBuilder {
    parts
        .into_iter()
        .reduce(|mut a, b| {
            a.merge(b);
            a
        })
        .unwrap_or_default()
}

/// A record that failed to parse or validate during streaming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejected {
    pub line: u64,
    pub message: String,
}

/// Streaming scan state: raw input lines are parsed, validated and matched in
/// parallel batches. Invalid records are counted and skipped.
pub struct Scanner<'m> {
    matcher: &'m Matcher,
    shards: usize,
    builder: TableBuilder,
    skipped: u64,
    rejected: Vec<Rejected>,
}

/// How many rejected records keep their message for reporting.
const REJECT_SAMPLE: usize = 20;

impl<'m> Scanner<'m> {
    pub fn new(matcher: &'m Matcher, shards: usize) -> Scanner<'m> {
        Scanner {
            matcher,
            shards: shards.max(1),
            builder: TableBuilder::default(),
            skipped: 0,
            rejected: Vec::new(),
        }
    }

    pub fn scan_lines(&mut self, lines: &[RawLine]) {
        let matcher = self.matcher;
        let parts = par::map_shards(lines, self.shards, |chunk| {
            let mut builder = TableBuilder::default();
            let mut scratch = Scratch::default();
            let mut skipped = 0u64;
            let mut rejected = Vec::new();
            for raw in chunk {
                match parse_record(&raw.text, raw.line) {
                    Ok(doc) => matcher.scan_into(&doc, &mut scratch, &mut builder),
                    Err(e) => {
                        skipped += 1;
                        if rejected.len() < REJECT_SAMPLE {
                            rejected.push(Rejected {
                                line: raw.line,
                                message: e.to_string(),
                            });
                        }
                    }
                }
            }
            (builder, skipped, rejected)
        });
        for (builder, skipped, rejected) in parts {
            self.builder.merge(builder);
            self.skipped += skipped;
            let room = REJECT_SAMPLE.saturating_sub(self.rejected.len());
            self.rejected.extend(rejected.into_iter().take(room));
        }
    }

    pub fn scan_documents(&mut self, docs: &[Document]) {
        let matcher = self.matcher;
        let parts = par::map_shards(docs, self.shards, |chunk| scan_chunk(matcher, chunk));
        for b in parts {
            self.builder.merge(b);
        }
    }

    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn rejected(&self) -> &[Rejected] {
        &self.rejected
    }

    pub fn finish(self) -> (CountTable, u64) {
        (self.builder.finish(), self.skipped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Kind};
    use crate::phraseset::{load_phrases, Phrase};
    use crate::time::Day;

    fn set(phrases: &[&str], background: &[&str]) -> PhraseSet {
        let (mut s, _) = load_phrases(&phrases.join("\n")).unwrap();
        s.background = background.iter().map(|w| w.to_string()).collect();
        s.background.sort();
        s
    }

    /// Sliding-window count of `phrase` in `tokens`.
    fn naive(phrase: &Phrase, tokens: &[String]) -> u32 {
        let k = phrase.tokens.len();
        if tokens.len() < k {
            return 0;
        }
        (0..=tokens.len() - k)
            .filter(|&i| tokens[i..i + k] == phrase.tokens[..])
            .count() as u32
    }

    #[test]
    fn overlapping_patterns() {
        let m = Matcher::new(&set(&["a b", "b c"], &[]));
        assert_eq!(m.scan_text("a b c").memes, vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn background_only() {
        let m = Matcher::new(&set(&[], &["lift", "the"]));
        let c = m.scan_text("the lift and the bar");
        assert!(c.memes.is_empty());
        // "lift" = 0, "the" = 1 in sorted order
        assert_eq!(c.background, vec![(0, 1), (1, 2)]);
        assert_eq!(c.tokens, 5);
    }

    #[test]
    fn scan_examples() {
        let m = Matcher::new(&set(&["do you even lift"], &[]));
        assert_eq!(m.scan_text("do you even lift bro").memes, vec![(0, 1)]);
        let m = Matcher::new(&set(&["y tho"], &[]));
        assert_eq!(m.scan_text("y tho y tho").memes, vec![(0, 2)]);
        let s = set(&["na na"], &[]);
        let m = Matcher::new(&s);
        let tokens = tokenize("na na na");
        assert_eq!(naive(&s.phrases[0], &tokens), 2);
        assert_eq!(m.scan_text("na na na").memes, vec![(0, 2)]);
    }

    #[test]
    fn whole_tokens_only() {
        let m = Matcher::new(&set(&["lift"], &[]));
        assert!(m.scan_text("lifting liftoff").memes.is_empty());
    }

    #[test]
    fn nested_phrases_counted_independently() {
        let m = Matcher::new(&set(&["shrek is love shrek is life", "shrek", "is life"], &[]));
        let c = m.scan_text("Shrek is love, shrek is life!");
        assert_eq!(c.memes, vec![(0, 1), (1, 2), (2, 1)]);
    }

    #[test]
    fn failure_links_recover_after_partial_match() {
        let m = Matcher::new(&set(&["a a b", "a b c"], &[]));
        assert_eq!(m.scan_text("a a a b c").memes, vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn unknown_token_breaks_match() {
        let m = Matcher::new(&set(&["a b"], &[]));
        assert!(m.scan_text("a zz b").memes.is_empty());
    }

    #[test]
    fn per_document_mode() {
        let m = Matcher::with_mode(&set(&["y tho"], &["y"]), CountMode::PerDocument);
        let c = m.scan_text("y tho y tho");
        assert_eq!(c.memes, vec![(0, 1)]);
        assert_eq!(c.background, vec![(0, 2)]);
    }

    #[test]
    fn every_label_matches_itself_once() {
        let labels = [
            "thicc", "moms spaghetti", "u wot m8", "kill it with fire",
            "hello darkness my old friend", "shrek is love shrek is life",
            "still a better love story than twilight",
            "this is why we cant have nice things",
        ];
        for label in labels {
            let s = set(&[label], &[]);
            let m = Matcher::new(&s);
            assert_eq!(m.scan_text(label).memes, vec![(0, 1)], "{label}");
        }
    }

    #[test]
    fn table_one_scale_builds() {
        let lexicon: String = (0..352)
            .map(|k| {
                let len = 1 + k % 8;
                (0..len).map(|j| format!("m{k}t{j}")).collect::<Vec<_>>().join(" ") + "\n"
            })
            .collect();
        let (mut s, _) = load_phrases(&lexicon).unwrap();
        s.background = (0..5000).map(|i| format!("w{i:04}")).collect();
        let m = Matcher::new(&s);
        assert_eq!(m.phrase_count(), 352);
        assert_eq!(m.background_count(), 5000);
        assert_eq!(m.scan_text("m7t0 m7t1 m7t2 m7t3 m7t4 m7t5 m7t6 m7t7 w0001").memes, vec![(7, 1)]);
    }

    #[test]
    fn single_document_table() {
        let m = Matcher::new(&set(&["y tho"], &[]));
        let doc = Document {
            id: "1".into(),
            created_utc: 3 * 86_400 + 5,
            community: "funny".into(),
            kind: Kind::Comment,
            text: "but y tho".into(),
        };
        let t = scan_corpus(&m, &[doc], 1);
        assert_eq!(
            t.memes(),
            &[MemeCount {
                phrase: 0,
                day: Day(3),
                community: 0,
                count: 1
            }]
        );
        assert_eq!(t.communities(), &["funny".to_string()]);
        assert_eq!(t.tokens(), 3);
    }
}
