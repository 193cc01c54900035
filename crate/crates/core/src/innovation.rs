//! Entry events, per-year innovation rankings by mean reciprocal rank, and
//! year-over-year rank turnover.

use std::collections::{BTreeMap, HashSet};

use crate::matcher::CountTable;
use crate::par;
use crate::stats;
use crate::time::Day;
use crate::{Error, Result};

pub const ENTRY_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub community: String,
    pub first_use: Day,
}

/// Communities in order of first use, ties by name, at most [`ENTRY_LIMIT`] long.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryList {
    pub phrase: u32,
    pub entries: Vec<Entry>,
}

impl EntryList {
    /// Where the phrase first appeared.
    pub fn beachhead(&self) -> Option<&Entry> {
        self.entries.first()
    }
}

/// One entry list per phrase id in `0..phrases`; unused phrases get an empty list.
pub fn entry_events(table: &CountTable, phrases: usize) -> Vec<EntryList> {
    let ids: Vec<u32> = (0..phrases as u32).collect();
    par::map(&ids, |&phrase| {
        // Rows are sorted by (day, community index) and indices follow name
        // order, so the first row seen per community is its first use.
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for m in table.phrase_entries(phrase) {
            if seen.insert(m.community) {
                entries.push(Entry {
                    community: table.community_name(m.community).to_owned(),
                    first_use: m.day,
                });
                if entries.len() == ENTRY_LIMIT {
                    break;
                }
            }
        }
        EntryList { phrase, entries }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MrrMode {
    /// Ranks restart at 1 within the year's slice of each entry list.
    #[default]
    Restart,
    /// Ranks are positions in the full entry list.
    Global,
}

impl MrrMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MrrMode::Restart => "restart",
            MrrMode::Global => "global",
        }
    }

    pub fn parse(s: &str) -> Result<MrrMode> {
        match s {
            "restart" => Ok(MrrMode::Restart),
            "global" => Ok(MrrMode::Global),
            _ => Err(Error::InvalidArgument(format!(
                "unknown MRR mode `{s}` (expected restart or global)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnovationRanking {
    pub year: i32,
    /// Phrases with at least one entry in the year.
    pub memes: usize,
    pub scores: BTreeMap<String, f64>,
    /// Descending score, ties by name.
    pub ranked: Vec<(String, f64)>,
}

impl InnovationRanking {
    /// MRR of a community; 0 when it never entered a phrase this year.
    pub fn score(&self, community: &str) -> f64 {
        self.scores.get(community).copied().unwrap_or(0.0)
    }
}

/// Years in which at least one entry event happened, ascending.
pub fn entry_years(entries: &[EntryList]) -> Vec<i32> {
    let mut years: Vec<i32> = entries
        .iter()
        .flat_map(|l| l.entries.iter().map(|e| e.first_use.year()))
        .collect();
    years.sort_unstable();
    years.dedup();
    years
}

/// Mean reciprocal rank of every community over the phrases that gained
/// entries in `year`. A phrase a community did not enter contributes 0.
pub fn innovation_ranking(entries: &[EntryList], year: i32, mode: MrrMode) -> InnovationRanking {
    let mut reciprocal: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut memes = 0usize;
    for list in entries {
        let mut restart_rank = 0usize;
        for (i, e) in list.entries.iter().enumerate() {
            if e.first_use.year() != year {
                continue;
            }
            restart_rank += 1;
            let rank = match mode {
                MrrMode::Restart => restart_rank,
                MrrMode::Global => i + 1,
            };
            reciprocal.entry(&e.community).or_default().push(1.0 / rank as f64);
        }
        if restart_rank > 0 {
            memes += 1;
        }
    }
    let scores: BTreeMap<String, f64> = reciprocal
        .into_iter()
        .map(|(c, r)| (c.to_owned(), stats::fsum(r) / memes as f64))
        .collect();
    let mut ranked: Vec<(String, f64)> = scores.iter().map(|(c, &s)| (c.clone(), s)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    InnovationRanking {
        year,
        memes,
        scores,
        ranked,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankShift {
    pub tau: f64,
    pub p_value: f64,
    pub n_common: usize,
}

/// Kendall tau-b between two years' scores over the communities ranked in both.
pub fn rank_shift(a: &InnovationRanking, b: &InnovationRanking) -> Result<RankShift> {
    let (x, y): (Vec<f64>, Vec<f64>) = a
        .scores
        .iter()
        .filter_map(|(c, &s)| Some((s, *b.scores.get(c)?)))
        .unzip();
    if x.len() < 3 {
        return Err(Error::Insufficient(format!(
            "rank shift needs at least 3 common communities, got {}",
            x.len()
        )));
    }
    let (tau, p_value) = stats::kendall_tau_b(&x, &y)?;
    Ok(RankShift {
        tau,
        p_value,
        n_common: x.len(),
    })
}
