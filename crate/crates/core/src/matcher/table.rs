use std::collections::{BTreeMap, HashMap};

use crate::corpus::Kind;
use crate::time::{Day, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemeCount {
    pub phrase: u32,
    pub day: Day,
    /// Index into [`CountTable::communities`].
    pub community: u32,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BackgroundCount {
    /// Index into the background word list.
    pub word: u32,
    pub day: Day,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocCount {
    pub day: Day,
    pub kind: Kind,
    pub count: u64,
}

/// Per-shard accumulator. Cheap to update; turned into a canonical
/// [`CountTable`] by [`TableBuilder::finish`].
#[derive(Debug, Default, Clone)]
pub struct TableBuilder {
    memes: HashMap<String, HashMap<(u32, i64), u64>>,
    background: HashMap<(u32, i64), u64>,
    documents: HashMap<(i64, Kind), u64>,
    tokens: u64,
}

impl TableBuilder {
    pub(crate) fn community_slot(&mut self, community: &str) -> &mut HashMap<(u32, i64), u64> {
        if !self.memes.contains_key(community) {
            self.memes.insert(community.to_owned(), HashMap::new());
        }
        self.memes.get_mut(community).unwrap()
    }

    pub fn add_meme(&mut self, phrase: u32, day: Day, community: &str, count: u64) {
        if count > 0 {
            *self.community_slot(community).entry((phrase, day.0)).or_insert(0) += count;
        }
    }

    pub fn add_background(&mut self, word: u32, day: Day, count: u64) {
        if count > 0 {
            *self.background.entry((word, day.0)).or_insert(0) += count;
        }
    }

    pub fn add_document(&mut self, day: Day, kind: Kind, tokens: u64) {
        *self.documents.entry((day.0, kind)).or_insert(0) += 1;
        self.tokens += tokens;
    }

    pub fn merge(&mut self, other: TableBuilder) {
        for (community, counts) in other.memes {
            let slot = self.memes.entry(community).or_default();
            for (k, v) in counts {
                *slot.entry(k).or_insert(0) += v;
            }
        }
        for (k, v) in other.background {
            *self.background.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.documents {
            *self.documents.entry(k).or_insert(0) += v;
        }
        self.tokens += other.tokens;
    }

    pub fn finish(self) -> CountTable {
        let mut communities: Vec<String> = self
            .memes
            .iter()
            .filter(|(_, c)| !c.is_empty())
            .map(|(name, _)| name.clone())
            .collect();
        communities.sort();
        let index: HashMap<&str, u32> = communities
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i as u32))
            .collect();
        let mut memes: Vec<MemeCount> = Vec::new();
        for (name, counts) in &self.memes {
            let Some(&community) = index.get(name.as_str()) else {
                continue;
            };
            memes.extend(counts.iter().map(|(&(phrase, day), &count)| MemeCount {
                phrase,
                day: Day(day),
                community,
                count,
            }));
        }
        memes.sort_unstable();
        let mut background: Vec<BackgroundCount> = self
            .background
            .into_iter()
            .map(|((word, day), count)| BackgroundCount {
                word,
                day: Day(day),
                count,
            })
            .collect();
        background.sort_unstable();
        let mut documents: Vec<DocCount> = self
            .documents
            .into_iter()
            .map(|((day, kind), count)| DocCount {
                day: Day(day),
                kind,
                count,
            })
            .collect();
        documents.sort_unstable();
        CountTable {
            communities,
            memes,
            background,
            documents,
            tokens: self.tokens,
        }
    }
}

/// Canonical, sorted counts keyed by (phrase, day, community), plus
/// background word counts per (word, day) and document counts per (day, kind).
///
/// Two tables built from the same documents are equal regardless of how the
/// documents were sharded, and [`CountTable::merge`] is key-wise addition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    communities: Vec<String>,
    /// Sorted by (phrase, day, community).
    memes: Vec<MemeCount>,
    /// Sorted by (word, day).
    background: Vec<BackgroundCount>,
    /// Sorted by (day, kind).
    documents: Vec<DocCount>,
    tokens: u64,
}

impl CountTable {
    pub(crate) fn from_parts(
        communities: Vec<String>,
        memes: Vec<MemeCount>,
        background: Vec<BackgroundCount>,
        documents: Vec<DocCount>,
        tokens: u64,
    ) -> CountTable {
        CountTable {
            communities,
            memes,
            background,
            documents,
            tokens,
        }
    }

    pub fn communities(&self) -> &[String] {
        &self.communities
    }

    pub fn community_name(&self, index: u32) -> &str {
        &self.communities[index as usize]
    }

    pub fn memes(&self) -> &[MemeCount] {
        &self.memes
    }

    pub fn background(&self) -> &[BackgroundCount] {
        &self.background
    }

    pub fn documents(&self) -> &[DocCount] {
        &self.documents
    }

    pub fn tokens(&self) -> u64 {
        self.tokens
    }

    pub fn document_total(&self) -> u64 {
        self.documents.iter().map(|d| d.count).sum()
    }

    /// All entries for one phrase, sorted by (day, community).
    pub fn phrase_entries(&self, phrase: u32) -> &[MemeCount] {
        let lo = self.memes.partition_point(|m| m.phrase < phrase);
        let hi = self.memes.partition_point(|m| m.phrase <= phrase);
        &self.memes[lo..hi]
    }

    /// Meme count for a key, 0 when absent.
    pub fn meme_count(&self, phrase: u32, day: Day, community: &str) -> u64 {
        let Ok(c) = self.communities.binary_search_by(|n| n.as_str().cmp(community)) else {
            return 0;
        };
        let key = (phrase, day, c as u32);
        self.memes
            .binary_search_by(|m| (m.phrase, m.day, m.community).cmp(&key))
            .map(|i| self.memes[i].count)
            .unwrap_or(0)
    }

    /// First and last day with any document, if any.
    pub fn day_span(&self) -> Option<Window> {
        let first = self.documents.first()?.day;
        let last = self.documents.last()?.day;
        Some(Window { first, last })
    }

    /// Key-wise sum of two tables.
    pub fn merge(&self, other: &CountTable) -> CountTable {
        let mut memes: BTreeMap<(u32, Day, &str), u64> = BTreeMap::new();
        for t in [self, other] {
            for m in &t.memes {
                *memes
                    .entry((m.phrase, m.day, t.community_name(m.community)))
                    .or_insert(0) += m.count;
            }
        }
        let mut communities: Vec<String> = self
            .communities
            .iter()
            .chain(&other.communities)
            .cloned()
            .collect();
        communities.sort();
        communities.dedup();
        let memes = memes
            .into_iter()
            .map(|((phrase, day, name), count)| MemeCount {
                phrase,
                day,
                community: communities.binary_search_by(|c| c.as_str().cmp(name)).unwrap() as u32,
                count,
            })
            .collect();

        let mut background: BTreeMap<(u32, Day), u64> = BTreeMap::new();
        for b in self.background.iter().chain(&other.background) {
            *background.entry((b.word, b.day)).or_insert(0) += b.count;
        }
        let mut documents: BTreeMap<(Day, Kind), u64> = BTreeMap::new();
        for d in self.documents.iter().chain(&other.documents) {
            *documents.entry((d.day, d.kind)).or_insert(0) += d.count;
        }
        CountTable {
            communities,
            memes,
            background: background
                .into_iter()
                .map(|((word, day), count)| BackgroundCount { word, day, count })
                .collect(),
            documents: documents
                .into_iter()
                .map(|((day, kind), count)| DocCount { day, kind, count })
                .collect(),
            tokens: self.tokens + other.tokens,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn builder_from(entries: &[(u32, i64, u8, u64)], bg: &[(u32, i64, u64)]) -> TableBuilder {
        let mut b = TableBuilder::default();
        for &(p, d, c, n) in entries {
            b.add_meme(p, Day(d), &format!("c{c}"), n);
            b.add_document(Day(d), if c % 2 == 0 { Kind::Post } else { Kind::Comment }, n);
        }
        for &(w, d, n) in bg {
            b.add_background(w, Day(d), n);
        }
        b
    }

    fn entries() -> impl Strategy<Value = Vec<(u32, i64, u8, u64)>> {
        proptest::collection::vec((0u32..4, 0i64..5, 0u8..3, 1u64..5), 0..20)
    }

    fn bg() -> impl Strategy<Value = Vec<(u32, i64, u64)>> {
        proptest::collection::vec((0u32..3, 0i64..5, 1u64..5), 0..10)
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_associative(
            a in entries(), b in entries(), c in entries(), x in bg(), y in bg()
        ) {
            let ta = builder_from(&a, &x).finish();
            let tb = builder_from(&b, &y).finish();
            let tc = builder_from(&c, &[]).finish();
            prop_assert_eq!(ta.merge(&tb), tb.merge(&ta));
            prop_assert_eq!(ta.merge(&tb).merge(&tc), ta.merge(&tb.merge(&tc)));

            // Builder-level merge agrees with table-level merge.
            let mut ba = builder_from(&a, &x);
            ba.merge(builder_from(&b, &y));
            prop_assert_eq!(ba.finish(), ta.merge(&tb));
        }

        #[test]
        fn counts_are_positive_and_sorted(a in entries(), x in bg()) {
            let t = builder_from(&a, &x).finish();
            prop_assert!(t.memes().iter().all(|m| m.count >= 1));
            prop_assert!(t.memes().windows(2).all(|w| (w[0].phrase, w[0].day, w[0].community) < (w[1].phrase, w[1].day, w[1].community)));
            prop_assert!(t.background().iter().all(|m| m.count >= 1));
        }
    }

    #[test]
    fn lookup_and_span() {
        let t = builder_from(&[(1, 3, 0, 2), (1, 3, 1, 5), (2, 7, 0, 1)], &[]).finish();
        assert_eq!(t.meme_count(1, Day(3), "c1"), 5);
        assert_eq!(t.meme_count(1, Day(4), "c1"), 0);
        assert_eq!(t.meme_count(1, Day(3), "zz"), 0);
        assert_eq!(t.phrase_entries(1).len(), 2);
        assert_eq!(t.phrase_entries(9).len(), 0);
        assert_eq!(t.day_span(), Some(Window { first: Day(3), last: Day(7) }));
        assert_eq!(TableBuilder::default().finish().day_span(), None);
    }
}
