//! Document records, tokenization, and corpus input.
//!
//! Input is newline-delimited JSON, one object per line:
//!
//! ```text
//! {"id":"a1","created_utc":1262304000,"subreddit":"Pics","kind":"comment","body":"..."}
//! {"id":"b7","created_utc":1262304000,"subreddit":"funny","kind":"post","title":"...","selftext":"..."}
//! ```
//!
//! Files may be gzip-compressed; compression is detected from the magic bytes,
//! not the file name.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use crate::time::{Day, YearMonth};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Post,
    Comment,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Post => "post",
            Kind::Comment => "comment",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub created_utc: i64,
    /// Lowercased community name.
    pub community: String,
    pub kind: Kind,
    /// Comment body, or post title and body joined by one space.
    pub text: String,
}

impl Document {
    pub fn day(&self) -> Day {
        Day::from_timestamp(self.created_utc)
    }
}

#[derive(Deserialize)]
struct RawRecord<'a> {
    #[serde(default, borrow)]
    id: Option<Cow<'a, str>>,
    #[serde(default)]
    created_utc: Option<serde_json::Value>,
    #[serde(default, borrow)]
    subreddit: Option<Cow<'a, str>>,
    #[serde(default, borrow)]
    kind: Option<Cow<'a, str>>,
    #[serde(default, borrow)]
    body: Option<Cow<'a, str>>,
    #[serde(default, borrow)]
    title: Option<Cow<'a, str>>,
    #[serde(default, borrow)]
    selftext: Option<Cow<'a, str>>,
}

/// Parses and validates one input record. `line` is only used for error context.
pub fn parse_record(text: &str, line: u64) -> Result<Document> {
    let raw: RawRecord<'_> = serde_json::from_str(text).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    let invalid = |message: String| Error::Validation { line, message };

    let created_utc = match raw.created_utc {
        None | Some(serde_json::Value::Null) => {
            return Err(invalid("missing created_utc".into()));
        }
        Some(v) => v
            .as_i64()
            .ok_or_else(|| invalid(format!("created_utc is not an integer: {v}")))?,
    };
    if created_utc < 0 {
        return Err(invalid(format!("negative created_utc {created_utc}")));
    }

    let community = match raw.subreddit {
        Some(s) if !s.is_empty() => s.to_lowercase(),
        _ => return Err(invalid("missing subreddit".into())),
    };
    if community.chars().any(char::is_whitespace) {
        return Err(invalid(format!("subreddit contains whitespace: {community:?}")));
    }

    let kind = match raw.kind.as_deref() {
        Some("post") => Kind::Post,
        Some("comment") => Kind::Comment,
        Some(other) => return Err(invalid(format!("unknown kind {other:?}"))),
        None => return Err(invalid("missing kind".into())),
    };

    let text = match kind {
        Kind::Comment => raw.body.map(Cow::into_owned).unwrap_or_default(),
        Kind::Post => {
            let title = raw.title.as_deref().unwrap_or("");
            let body = raw.selftext.as_deref().unwrap_or("");
            let mut s = String::with_capacity(title.len() + body.len() + 1);
            s.push_str(title);
            s.push(' ');
            s.push_str(body);
            s
        }
    };

    Ok(Document {
        id: raw.id.map(Cow::into_owned).unwrap_or_default(),
        created_utc,
        community,
        kind,
        text,
    })
}

/// Serializes a document in the input record format.
pub fn to_record(doc: &Document) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        id: &'a str,
        created_utc: i64,
        subreddit: &'a str,
        kind: Kind,
        #[serde(skip_serializing_if = "Option::is_none")]
        body: Option<&'a str>,
        #[serde(skip_serializing_if = "Option::is_none")]
        title: Option<&'a str>,
        #[serde(skip_serializing_if = "Option::is_none")]
        selftext: Option<&'a str>,
    }
    let (body, title, selftext) = match doc.kind {
        Kind::Comment => (Some(doc.text.as_str()), None, None),
        Kind::Post => {
            let (t, s) = doc.text.split_once(' ').unwrap_or((&doc.text, ""));
            (None, Some(t), Some(s))
        }
    };
    serde_json::to_string(&Out {
        id: &doc.id,
        created_utc: doc.created_utc,
        subreddit: &doc.community,
        kind: doc.kind,
        body,
        title,
        selftext,
    })
    .expect("document serializes")
}

#[inline]
fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Calls `f` with every token of `text`, reusing `buf` for the lowercased form.
///
/// A token is a maximal run of letters, digits and apostrophes, lowercased.
/// Characters produced by lowercasing that are not themselves token characters
/// (e.g. the combining dot of `İ`) are dropped so the output is a fixed point.
pub fn for_each_token(text: &str, buf: &mut String, mut f: impl FnMut(&str)) {
    buf.clear();
    for c in text.chars() {
        if is_token_char(c) {
            if c.is_ascii() {
                buf.push(c.to_ascii_lowercase());
            } else {
                buf.extend(c.to_lowercase().filter(|&l| is_token_char(l)));
            }
        } else if !buf.is_empty() {
            f(buf);
            buf.clear();
        }
    }
    if !buf.is_empty() {
        f(buf);
        buf.clear();
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut buf = String::new();
    for_each_token(text, &mut buf, |t| out.push(t.to_owned()));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonthActivity {
    pub month: YearMonth,
    pub posts: u64,
    pub comments: u64,
    pub total: u64,
}

/// Per-month post and comment counts, one row per month present.
pub fn corpus_stats<'a>(documents: impl IntoIterator<Item = &'a Document>) -> Vec<MonthActivity> {
    activity_from_counts(documents.into_iter().map(|d| (d.day(), d.kind, 1)))
}

/// Same as [`corpus_stats`], from pre-aggregated `(day, kind, count)` triples.
pub fn activity_from_counts(counts: impl IntoIterator<Item = (Day, Kind, u64)>) -> Vec<MonthActivity> {
    let mut months: BTreeMap<YearMonth, (u64, u64)> = BTreeMap::new();
    for (day, kind, n) in counts {
        let e = months.entry(day.month()).or_default();
        match kind {
            Kind::Post => e.0 += n,
            Kind::Comment => e.1 += n,
        }
    }
    months
        .into_iter()
        .map(|(month, (posts, comments))| MonthActivity {
            month,
            posts,
            comments,
            total: posts + comments,
        })
        .collect()
}

/// Expands files and directories (recursively) into a sorted list of files.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
        if meta.is_dir() {
            let mut found = Vec::new();
            for entry in walkdir::WalkDir::new(path).follow_links(true) {
                let entry = entry.map_err(|e| {
                    let p = e.path().map(Path::to_path_buf).unwrap_or_else(|| path.clone());
                    Error::io(p, e.into())
                })?;
                if entry.file_type().is_file() {
                    found.push(entry.into_path());
                }
            }
            found.sort();
            files.extend(found);
        } else {
            files.push(path.clone());
        }
    }
    Ok(files)
}

/// Opens a file for line reading, transparently decompressing gzip.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let n = read_up_to(&mut file, &mut magic).map_err(|e| Error::io(path, e))?;
    let head = io::Cursor::new(magic[..n].to_vec());
    let chained = head.chain(file);
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::with_capacity(
            1 << 20,
            MultiGzDecoder::new(chained),
        )))
    } else {
        Ok(Box::new(BufReader::with_capacity(1 << 20, chained)))
    }
}

fn read_up_to(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// One raw input line with its 1-based line number within its file.
#[derive(Debug, Clone)]
pub struct RawLine {
    pub line: u64,
    pub text: String,
}

/// Reads input files as batches of raw lines, in file order.
pub struct LineBatches {
    files: std::vec::IntoIter<PathBuf>,
    current: Option<(PathBuf, Box<dyn BufRead + Send>, u64)>,
    batch_size: usize,
}

impl LineBatches {
    pub fn new(files: Vec<PathBuf>, batch_size: usize) -> LineBatches {
        LineBatches {
            files: files.into_iter(),
            current: None,
            batch_size: batch_size.max(1),
        }
    }

    /// Next batch of at most `batch_size` lines, or `None` when every file is exhausted.
    pub fn next_batch(&mut self) -> Result<Option<Vec<RawLine>>> {
        let mut batch = Vec::with_capacity(self.batch_size);
        while batch.len() < self.batch_size {
            if self.current.is_none() {
                match self.files.next() {
                    None => break,
                    Some(path) => {
                        let reader = open_input(&path)?;
                        self.current = Some((path, reader, 0));
                    }
                }
            }
            let (path, reader, line_no) = self.current.as_mut().unwrap();
            let mut text = String::new();
            match reader.read_line(&mut text) {
                Ok(0) => self.current = None,
                Ok(_) => {
                    *line_no += 1;
                    let trimmed = text.trim_end_matches(['\n', '\r']).len();
                    text.truncate(trimmed);
                    if !text.trim().is_empty() {
                        batch.push(RawLine {
                            line: *line_no,
                            text,
                        });
                    }
                }
                Err(source) => {
                    return Err(Error::InputIo {
                        path: path.clone(),
                        line: *line_no + 1,
                        source,
                    })
                }
            }
        }
        Ok((!batch.is_empty()).then_some(batch))
    }
}
