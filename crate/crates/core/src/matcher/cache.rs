//! Binary count cache and CSV exports.
//!
//! Cache layout, all integers little-endian, strings as `u32` length + UTF-8:
//!
//! ```text
//! "MEC1"
//! u8   count mode (0 = all, 1 = per-document)
//! u64  skipped records
//! u64  scanned tokens
//! u8   has seed, u64 seed
//! u32  phrases      { str label, u8 n, str token * n }
//! u32  background   { str word }
//! u32  communities  { str name }
//! u64  meme rows    { u32 phrase, i64 day, u32 community, u64 count }
//! u64  bg rows      { u32 word, i64 day, u64 count }
//! u64  doc rows     { i64 day, u8 kind, u64 count }
//! ```
//!
//! Rows are written in the table's canonical sorted order, so equal tables
//! always serialize to identical bytes.

use std::io::{Read, Write};
use std::path::Path;

use super::table::{BackgroundCount, CountTable, DocCount, MemeCount};
use super::CountMode;
use crate::corpus::Kind;
use crate::phraseset::{Phrase, PhraseSet};
use crate::time::Day;
use crate::{Error, Result};

pub const CACHE_MAGIC: &[u8; 4] = b"MEC1";

/// Everything the metrics phase needs from a scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountCache {
    pub lexicon: PhraseSet,
    pub count_mode: CountMode,
    pub skipped: u64,
    pub table: CountTable,
}

struct Out<W: Write>(W);

impl<W: Write> Out<W> {
    fn bytes(&mut self, b: &[u8]) -> std::io::Result<()> {
        self.0.write_all(b)
    }
    fn u8(&mut self, v: u8) -> std::io::Result<()> {
        self.bytes(&[v])
    }
    fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> std::io::Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn i64(&mut self, v: i64) -> std::io::Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn str(&mut self, s: &str) -> std::io::Result<()> {
        self.u32(s.len() as u32)?;
        self.bytes(s.as_bytes())
    }
}

pub fn write_cache(cache: &CountCache, w: impl Write) -> std::io::Result<()> {
    let mut out = Out(w);
    out.bytes(CACHE_MAGIC)?;
    out.u8(match cache.count_mode {
        CountMode::All => 0,
        CountMode::PerDocument => 1,
    })?;
    out.u64(cache.skipped)?;
    out.u64(cache.table.tokens())?;
    match cache.lexicon.rng_seed {
        Some(s) => {
            out.u8(1)?;
            out.u64(s)?;
        }
        None => {
            out.u8(0)?;
            out.u64(0)?;
        }
    }
    out.u32(cache.lexicon.phrases.len() as u32)?;
    for p in &cache.lexicon.phrases {
        out.str(&p.label)?;
        out.u8(p.tokens.len() as u8)?;
        for t in &p.tokens {
            out.str(t)?;
        }
    }
    out.u32(cache.lexicon.background.len() as u32)?;
    for w in &cache.lexicon.background {
        out.str(w)?;
    }
    let t = &cache.table;
    out.u32(t.communities().len() as u32)?;
    for c in t.communities() {
        out.str(c)?;
    }
    out.u64(t.memes().len() as u64)?;
    for m in t.memes() {
        out.u32(m.phrase)?;
        out.i64(m.day.0)?;
        out.u32(m.community)?;
        out.u64(m.count)?;
    }
    out.u64(t.background().len() as u64)?;
    for b in t.background() {
        out.u32(b.word)?;
        out.i64(b.day.0)?;
        out.u64(b.count)?;
    }
    out.u64(t.documents().len() as u64)?;
    for d in t.documents() {
        out.i64(d.day.0)?;
        out.u8(match d.kind {
            Kind::Post => 0,
            Kind::Comment => 1,
        })?;
        out.u64(d.count)?;
    }
    out.0.flush()
}

struct In<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> In<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::CacheCorrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::CacheCorrupt(format!("invalid UTF-8 near byte {}", self.pos)))
    }
    /// Element count, bounded by the bytes that remain.
    fn len(&mut self, wide: bool, min_size: usize) -> Result<usize> {
        let n = if wide { self.u64()? as usize } else { self.u32()? as usize };
        if n.saturating_mul(min_size) > self.buf.len() - self.pos {
            return Err(Error::CacheCorrupt(format!("implausible length {n}")));
        }
        Ok(n)
    }
}

pub fn read_cache(mut r: impl Read) -> Result<CountCache> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)
        .map_err(|e| Error::CacheCorrupt(e.to_string()))?;
    if buf.len() < 4 || &buf[..4] != CACHE_MAGIC {
        let found = String::from_utf8_lossy(&buf[..buf.len().min(4)]).into_owned();
        return Err(Error::CacheVersion(format!(
            "expected magic MEC1, found {found:?}"
        )));
    }
    let mut inp = In { buf: &buf, pos: 4 };
    let count_mode = match inp.u8()? {
        0 => CountMode::All,
        1 => CountMode::PerDocument,
        x => return Err(Error::CacheCorrupt(format!("bad count mode {x}"))),
    };
    let skipped = inp.u64()?;
    let tokens = inp.u64()?;
    let has_seed = inp.u8()?;
    let seed = inp.u64()?;

    let n = inp.len(false, 5)?;
    let mut phrases = Vec::with_capacity(n);
    for id in 0..n {
        let label = inp.str()?;
        let k = inp.u8()? as usize;
        let tokens = (0..k).map(|_| inp.str()).collect::<Result<Vec<_>>>()?;
        phrases.push(Phrase {
            id: id as u32,
            tokens,
            label,
        });
    }
    let n = inp.len(false, 4)?;
    let background = (0..n).map(|_| inp.str()).collect::<Result<Vec<_>>>()?;
    let n = inp.len(false, 4)?;
    let communities = (0..n).map(|_| inp.str()).collect::<Result<Vec<_>>>()?;

    let n = inp.len(true, 24)?;
    let mut memes = Vec::with_capacity(n);
    for _ in 0..n {
        let m = MemeCount {
            phrase: inp.u32()?,
            day: Day(inp.i64()?),
            community: inp.u32()?,
            count: inp.u64()?,
        };
        if m.community as usize >= communities.len() || m.phrase as usize >= phrases.len() {
            return Err(Error::CacheCorrupt("meme row index out of range".into()));
        }
        memes.push(m);
    }
    let n = inp.len(true, 20)?;
    let mut bg = Vec::with_capacity(n);
    for _ in 0..n {
        bg.push(BackgroundCount {
            word: inp.u32()?,
            day: Day(inp.i64()?),
            count: inp.u64()?,
        });
    }
    let n = inp.len(true, 17)?;
    let mut documents = Vec::with_capacity(n);
    for _ in 0..n {
        let day = Day(inp.i64()?);
        let kind = match inp.u8()? {
            0 => Kind::Post,
            1 => Kind::Comment,
            x => return Err(Error::CacheCorrupt(format!("bad kind {x}"))),
        };
        documents.push(DocCount {
            day,
            kind,
            count: inp.u64()?,
        });
    }
    if inp.pos != buf.len() {
        return Err(Error::CacheCorrupt("trailing bytes".into()));
    }
    Ok(CountCache {
        lexicon: PhraseSet {
            phrases,
            background,
            rng_seed: (has_seed == 1).then_some(seed),
        },
        count_mode,
        skipped,
        table: CountTable::from_parts(communities, memes, bg, documents, tokens),
    })
}

/// Writes `phrase_id,day,community,count` and `background_word,day,count` files.
pub fn write_csv(cache: &CountCache, memes: &Path, background: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(memes)?;
    w.write_record(["phrase_id", "day", "community", "count"])?;
    let t = &cache.table;
    for m in t.memes() {
        w.write_record([
            m.phrase.to_string(),
            m.day.0.to_string(),
            t.community_name(m.community).to_owned(),
            m.count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(memes, e))?;

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(background)?;
    w.write_record(["background_word", "day", "count"])?;
    for b in t.background() {
        w.write_record([
            cache.lexicon.background[b.word as usize].clone(),
            b.day.0.to_string(),
            b.count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(background, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::TableBuilder;
    use proptest::prelude::*;

    fn sample(entries: &[(u32, i64, u8, u64)]) -> CountCache {
        let mut b = TableBuilder::default();
        for &(p, d, c, n) in entries {
            b.add_meme(p, Day(d), &format!("sub{c}"), n);
            b.add_background(p, Day(d), n + 1);
            b.add_document(Day(d), Kind::Comment, 3);
        }
        let lexicon = PhraseSet {
            phrases: (0..4)
                .map(|i| Phrase {
                    id: i,
                    tokens: vec![format!("t{i}"), "x".into()],
                    label: format!("T{i} x"),
                })
                .collect(),
            background: (0..4).map(|i| format!("w{i}")).collect(),
            rng_seed: Some(7),
        };
        CountCache {
            lexicon,
            count_mode: CountMode::PerDocument,
            skipped: 2,
            table: b.finish(),
        }
    }

    proptest! {
        #[test]
        fn cache_round_trips(entries in proptest::collection::vec((0u32..4, 0i64..40, 0u8..5, 1u64..9), 0..30)) {
            let cache = sample(&entries);
            let mut bytes = Vec::new();
            write_cache(&cache, &mut bytes).unwrap();
            prop_assert_eq!(&bytes[..4], CACHE_MAGIC);
            prop_assert_eq!(read_cache(&bytes[..]).unwrap(), cache);
        }
    }

    #[test]
    fn wrong_magic_requires_rescan() {
        let err = read_cache(&b"MEC0\0\0"[..]).unwrap_err();
        assert!(matches!(err, Error::CacheVersion(_)));
        assert!(err.to_string().contains("re-scan required"));
    }

    #[test]
    fn truncated_cache_is_corrupt() {
        let mut bytes = Vec::new();
        write_cache(&sample(&[(1, 2, 3, 4)]), &mut bytes).unwrap();
        bytes.pop();
        assert!(matches!(read_cache(&bytes[..]), Err(Error::CacheCorrupt(_))));
        bytes.extend_from_slice(&[0, 0]);
        assert!(matches!(read_cache(&bytes[..]), Err(Error::CacheCorrupt(_))));
    }

    #[test]
    fn csv_export() {
        let dir = tempfile::tempdir().unwrap();
        let (m, b) = (dir.path().join("m.csv"), dir.path().join("b.csv"));
        write_csv(&sample(&[(1, 2, 3, 4)]), &m, &b).unwrap();
        assert_eq!(
            std::fs::read_to_string(&m).unwrap(),
            "phrase_id,day,community,count\n1,2,sub3,4\n"
        );
        assert_eq!(
            std::fs::read_to_string(&b).unwrap(),
            "background_word,day,count\nw1,2,5\n"
        );
    }
}
