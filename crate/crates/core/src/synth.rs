//! Seeded synthetic corpora with planted phrase profiles and exact ground truth.
//!
//! Each day the generator draws a document count per community, a count per
//! background word and a count per planted phrase, then scatters those units
//! over the day's documents. Background words are `w0000`-style tokens, so they
//! never collide with plants. Two planted units that end up adjacent are split
//! by [`FILLER`], which keeps every planted occurrence an isolated match.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Document, Kind};
use crate::phraseset::MAX_PHRASE_TOKENS;
use crate::time::{Day, Window};
use crate::{Error, Result};

pub const FILLER: &str = "zzfiller";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    /// `START..END`, dates or day indices.
    pub window: String,
    pub seed: u64,
    pub communities: Vec<CommunitySpec>,
    pub background: VocabSpec,
    #[serde(default)]
    pub plants: Vec<Plant>,
    /// Fraction of documents emitted as posts rather than comments.
    #[serde(default = "default_post_share")]
    pub post_share: f64,
}

fn default_post_share() -> f64 {
    0.2
}

fn default_growth() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunitySpec {
    pub name: String,
    /// Expected documents per day at the start of the window.
    pub docs_per_day: f64,
}

/// Background vocabulary. Every rate in the spec is multiplied by
/// `growth^(i / (len - 1))` on day `i`, so the last day runs `growth` times the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabSpec {
    pub words: usize,
    /// Expected occurrences per word per day.
    pub rate: f64,
    #[serde(default = "default_growth")]
    pub growth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plant {
    pub phrase: String,
    pub profile: Profile,
    /// Restrict insertions to these communities; empty means any.
    #[serde(default)]
    pub communities: Vec<String>,
}

/// Expected insertions per day. Only `proportional` follows the growth factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        rate: f64,
    },
    LinearRamp {
        from: f64,
        to: f64,
    },
    /// Starts `start` days into the window, ramps up over `rise` days, holds
    /// `height` for `plateau` days and ramps down over `fall` days.
    Trapezoid {
        start: usize,
        rise: usize,
        plateau: usize,
        fall: usize,
        height: f64,
    },
    /// Each background occurrence of the day is paired with a planted one with probability `p`.
    Proportional {
        p: f64,
    },
}

impl Profile {
    /// Expected insertions on day `i` of a window of `len` days; `None` for `Proportional`.
    pub fn expected(&self, i: usize, len: usize) -> Option<f64> {
        let frac = if len > 1 { i as f64 / (len - 1) as f64 } else { 0.0 };
        match *self {
            Profile::Constant { rate } => Some(rate),
            Profile::LinearRamp { from, to } => Some(from + (to - from) * frac),
            Profile::Trapezoid {
                start,
                rise,
                plateau,
                fall,
                height,
            } => {
                let Some(j) = i.checked_sub(start) else {
                    return Some(0.0);
                };
                Some(if j < rise {
                    height * (j + 1) as f64 / (rise + 1) as f64
                } else if j < rise + plateau {
                    height
                } else if j < rise + plateau + fall {
                    height * (rise + plateau + fall - j) as f64 / (fall + 1) as f64
                } else {
                    0.0
                })
            }
            Profile::Proportional { .. } => None,
        }
    }
}

/// What the generator actually emitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub window: Window,
    /// Planted phrases in id order.
    pub phrases: Vec<String>,
    pub words: Vec<String>,
    /// `[plant][day index]`.
    pub plant_counts: Vec<Vec<u64>>,
    /// Nonzero planted counts keyed by (plant, day, community).
    pub plant_by_community: BTreeMap<(u32, Day, String), u64>,
    /// `[word][day index]`.
    pub background_counts: Vec<Vec<u64>>,
    pub documents: u64,
}

impl GroundTruth {
    /// Daily summed background occurrences.
    pub fn background_total(&self) -> Vec<u64> {
        let mut total = vec![0u64; self.window.len()];
        for counts in &self.background_counts {
            for (t, c) in total.iter_mut().zip(counts) {
                *t += c;
            }
        }
        total
    }

    /// Phrase file text listing the plants, one per line, in id order.
    pub fn phrase_file(&self) -> String {
        self.phrases.iter().map(|p| format!("{p}\n")).collect()
    }

    pub fn background_file(&self) -> String {
        self.words.iter().map(|w| format!("{w}\n")).collect()
    }

    /// `phrase,day,count` rows for every nonzero planted and background count.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(["phrase", "day", "count"])?;
        let rows = self
            .phrases
            .iter()
            .zip(&self.plant_counts)
            .chain(self.words.iter().zip(&self.background_counts));
        for (name, counts) in rows {
            for (i, &c) in counts.iter().enumerate() {
                if c > 0 {
                    let day = self.window.day_at(i).date().to_string();
                    out.write_record([name.as_str(), day.as_str(), c.to_string().as_str()])?;
                }
            }
        }
        out.flush().map_err(|e| Error::io("<ground truth>", e))?;
        Ok(())
    }
}

struct Checked {
    window: Window,
    words: Vec<String>,
    plant_tokens: Vec<Vec<String>>,
    /// Community indices a plant may land in; empty means any.
    plant_communities: Vec<Vec<usize>>,
}

fn spec_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Spec {
        path: path.into(),
        message: message.into(),
    }
}

fn non_negative(path: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(spec_err(path, format!("must be a finite value >= 0, got {v}")))
    }
}

fn contains_run(hay: &[String], needle: &[String]) -> bool {
    needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

impl PlantSpec {
    pub fn from_json(text: &str) -> Result<PlantSpec> {
        serde_json::from_str(text).map_err(|e| spec_err("", e.to_string()))
    }

    pub fn vocabulary(&self) -> Vec<String> {
        let width = self.background.words.saturating_sub(1).to_string().len().max(4);
        (0..self.background.words)
            .map(|i| format!("w{i:0width$}"))
            .collect()
    }

    fn check(&self) -> Result<Checked> {
        let window = Window::parse(&self.window).map_err(|e| spec_err("window", e.to_string()))?;
        if self.communities.is_empty() {
            return Err(spec_err("communities", "at least one community is required"));
        }
        let mut names = HashSet::new();
        for (i, c) in self.communities.iter().enumerate() {
            let path = format!("communities[{i}]");
            if c.name.is_empty() || c.name.chars().any(char::is_whitespace) || c.name != c.name.to_lowercase() {
                return Err(spec_err(format!("{path}.name"), "must be non-empty, lowercase, without whitespace"));
            }
            if !names.insert(c.name.as_str()) {
                return Err(spec_err(format!("{path}.name"), format!("duplicate community `{}`", c.name)));
            }
            non_negative(&format!("{path}.docs_per_day"), c.docs_per_day)?;
        }
        if self.communities.iter().all(|c| c.docs_per_day == 0.0) {
            return Err(spec_err("communities", "total docs_per_day must be positive"));
        }
        if self.background.words == 0 {
            return Err(spec_err("background.words", "must be >= 1"));
        }
        non_negative("background.rate", self.background.rate)?;
        if !(self.background.growth > 0.0 && self.background.growth.is_finite()) {
            return Err(spec_err("background.growth", "must be a finite value > 0"));
        }
        if !(0.0..=1.0).contains(&self.post_share) {
            return Err(spec_err("post_share", "must lie in [0, 1]"));
        }

        let words = self.vocabulary();
        let vocab: HashSet<&str> = words.iter().map(String::as_str).collect();
        let mut plant_tokens: Vec<Vec<String>> = Vec::new();
        let mut plant_communities = Vec::new();
        for (i, plant) in self.plants.iter().enumerate() {
            let path = format!("plants[{i}]");
            let tokens = tokenize(&plant.phrase);
            if tokens.is_empty() || tokens.len() > MAX_PHRASE_TOKENS {
                return Err(spec_err(
                    format!("{path}.phrase"),
                    format!("needs 1..={MAX_PHRASE_TOKENS} tokens, got {}", tokens.len()),
                ));
            }
            if let Some(t) = tokens.iter().find(|t| vocab.contains(t.as_str()) || *t == FILLER) {
                return Err(spec_err(format!("{path}.phrase"), format!("token `{t}` is reserved for background text")));
            }
            for (j, other) in plant_tokens.iter().enumerate() {
                if contains_run(other, &tokens) || contains_run(&tokens, other) {
                    return Err(spec_err(
                        format!("{path}.phrase"),
                        format!("overlaps plants[{j}]; planted phrases must not contain one another"),
                    ));
                }
            }
            let ppath = format!("{path}.profile");
            match plant.profile {
                Profile::Constant { rate } => non_negative(&format!("{ppath}.rate"), rate)?,
                Profile::LinearRamp { from, to } => {
                    non_negative(&format!("{ppath}.from"), from)?;
                    non_negative(&format!("{ppath}.to"), to)?;
                }
                Profile::Trapezoid {
                    start,
                    rise,
                    plateau,
                    fall,
                    height,
                } => {
                    non_negative(&format!("{ppath}.height"), height)?;
                    if start + rise + plateau + fall > window.len() || rise + plateau + fall == 0 {
                        return Err(spec_err(ppath, "trapezoid must be a non-empty interval inside the window"));
                    }
                }
                Profile::Proportional { p } => {
                    if !(p > 0.0 && p < 1.0) {
                        return Err(spec_err(format!("{ppath}.p"), format!("must lie in (0, 1), got {p}")));
                    }
                }
            }
            let mut allowed = Vec::new();
            for (k, name) in plant.communities.iter().enumerate() {
                let idx = self
                    .communities
                    .iter()
                    .position(|c| &c.name == name)
                    .ok_or_else(|| spec_err(format!("{path}.communities[{k}]"), format!("unknown community `{name}`")))?;
                allowed.push(idx);
            }
            plant_tokens.push(tokens);
            plant_communities.push(allowed);
        }
        Ok(Checked {
            window,
            words,
            plant_tokens,
            plant_communities,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map(|_| ())
    }
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("finite positive rate").sample(rng) as u64
}

#[derive(Clone, Copy)]
enum Unit {
    Word(u32),
    Plant(u32),
}

/// Generates the corpus in chronological order together with what was planted.
pub fn generate(spec: &PlantSpec) -> Result<(Vec<Document>, GroundTruth)> {
    let checked = spec.check()?;
    let window = checked.window;
    let len = window.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut truth = GroundTruth {
        window,
        phrases: checked.plant_tokens.iter().map(|t| t.join(" ")).collect(),
        words: checked.words,
        plant_counts: vec![vec![0; len]; spec.plants.len()],
        plant_by_community: BTreeMap::new(),
        background_counts: vec![vec![0; len]; spec.background.words],
        documents: 0,
    };
    let mut docs = Vec::new();
    let mut units: Vec<Unit> = Vec::new();
    let mut doc_units: Vec<Vec<Unit>> = Vec::new();
    let mut doc_community: Vec<usize> = Vec::new();
    let mut text = String::new();

    for (i, day) in window.days().enumerate() {
        let frac = if len > 1 { i as f64 / (len - 1) as f64 } else { 0.0 };
        let g = spec.background.growth.powf(frac);

        doc_community.clear();
        for (c, community) in spec.communities.iter().enumerate() {
            let n = poisson(&mut rng, community.docs_per_day * g);
            doc_community.extend(std::iter::repeat_n(c, n as usize));
        }

        units.clear();
        let mut day_background = 0u64;
        for (w, counts) in truth.background_counts.iter_mut().enumerate() {
            let n = poisson(&mut rng, spec.background.rate * g);
            counts[i] = n;
            day_background += n;
            units.extend(std::iter::repeat_n(Unit::Word(w as u32), n as usize));
        }
        let mut planted: Vec<u64> = Vec::with_capacity(spec.plants.len());
        for plant in &spec.plants {
            let n = match plant.profile {
                Profile::Proportional { p } if day_background > 0 => {
                    Binomial::new(day_background, p).expect("p checked").sample(&mut rng)
                }
                Profile::Proportional { .. } => 0,
                ref profile => poisson(&mut rng, profile.expected(i, len).unwrap()),
            };
            planted.push(n);
        }

        let has_content = !units.is_empty() || planted.iter().any(|&n| n > 0);
        if doc_community.is_empty() && has_content {
            doc_community.push(0);
        }
        doc_units.clear();
        doc_units.resize(doc_community.len(), Vec::new());

        for &u in &units {
            let d = rng.random_range(0..doc_community.len());
            doc_units[d].push(u);
        }
        for (p, &n) in planted.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let allowed = &checked.plant_communities[p];
            let mut eligible: Vec<usize> = if allowed.is_empty() {
                (0..doc_community.len()).collect()
            } else {
                (0..doc_community.len())
                    .filter(|&d| allowed.contains(&doc_community[d]))
                    .collect()
            };
            if eligible.is_empty() {
                doc_community.push(allowed[0]);
                doc_units.push(Vec::new());
                eligible.push(doc_community.len() - 1);
            }
            truth.plant_counts[p][i] = n;
            for _ in 0..n {
                let d = eligible[rng.random_range(0..eligible.len())];
                doc_units[d].push(Unit::Plant(p as u32));
                *truth
                    .plant_by_community
                    .entry((p as u32, day, spec.communities[doc_community[d]].name.clone()))
                    .or_insert(0) += 1;
            }
        }

        let per_day = doc_units.len() as i64;
        for (d, body) in doc_units.iter_mut().enumerate() {
            body.shuffle(&mut rng);
            text.clear();
            let mut last_plant = false;
            for &u in body.iter() {
                if !text.is_empty() {
                    text.push(' ');
                }
                match u {
                    Unit::Word(w) => {
                        text.push_str(&truth.words[w as usize]);
                        last_plant = false;
                    }
                    Unit::Plant(p) => {
                        if last_plant {
                            text.push_str(FILLER);
                            text.push(' ');
                        }
                        text.push_str(&truth.phrases[p as usize]);
                        last_plant = true;
                    }
                }
            }
            let kind = if rng.random_bool(spec.post_share) {
                Kind::Post
            } else {
                Kind::Comment
            };
            docs.push(Document {
                id: format!("s{}_{d}", day.0),
                created_utc: day.0 * 86_400 + d as i64 * 86_400 / per_day,
                community: spec.communities[doc_community[d]].name.clone(),
                kind,
                text: text.clone(),
            });
        }
    }
    truth.documents = docs.len() as u64;
    Ok((docs, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::{scan_corpus, Matcher};
    use crate::phraseset::{load_background, load_phrases};

    fn spec(plants: Vec<Plant>) -> PlantSpec {
        PlantSpec {
            window: "0..59".into(),
            seed: 7,
            communities: vec![
                CommunitySpec { name: "alpha".into(), docs_per_day: 4.0 },
                CommunitySpec { name: "beta".into(), docs_per_day: 2.0 },
            ],
            background: VocabSpec { words: 50, rate: 3.0, growth: 2.0 },
            plants,
            post_share: 0.2,
        }
    }

    fn plant(phrase: &str, profile: Profile) -> Plant {
        Plant { phrase: phrase.into(), profile, communities: Vec::new() }
    }

    fn suite() -> Vec<Plant> {
        vec![
            plant("y tho", Profile::Constant { rate: 2.0 }),
            plant("na na na", Profile::LinearRamp { from: 0.0, to: 6.0 }),
            plant("one does not simply", Profile::Trapezoid { start: 10, rise: 3, plateau: 11, fall: 3, height: 8.0 }),
            plant("such wow", Profile::Proportional { p: 0.05 }),
            Plant {
                phrase: "press f".into(),
                profile: Profile::Constant { rate: 1.0 },
                communities: vec!["beta".into()],
            },
        ]
    }

    #[test]
    fn scan_reproduces_ground_truth() {
        let s = spec(suite());
        let (docs, truth) = generate(&s).unwrap();
        let (mut set, _) = load_phrases(&truth.phrase_file()).unwrap();
        set.background = load_background(&truth.background_file()).unwrap();
        let table = scan_corpus(&Matcher::new(&set), &docs, 3);

        for (p, counts) in truth.plant_counts.iter().enumerate() {
            for (i, &c) in counts.iter().enumerate() {
                let got: u64 = table
                    .phrase_entries(p as u32)
                    .iter()
                    .filter(|m| m.day == truth.window.day_at(i))
                    .map(|m| m.count)
                    .sum();
                assert_eq!(got, c, "plant {p} day {i}");
            }
        }
        for (&(p, day, ref c), &n) in &truth.plant_by_community {
            assert_eq!(table.meme_count(p, day, c), n);
        }
        let mut bg = vec![vec![0u64; truth.window.len()]; truth.words.len()];
        for b in table.background() {
            bg[b.word as usize][truth.window.index_of(b.day).unwrap()] = b.count;
        }
        assert_eq!(bg, truth.background_counts);
        assert_eq!(table.document_total(), truth.documents);
        // Restricted plants stay in their community.
        assert!(table.phrase_entries(4).iter().all(|m| table.community_name(m.community) == "beta"));
    }

    #[test]
    fn round_trips_through_records() {
        let (docs, _) = generate(&spec(suite())).unwrap();
        for d in docs.iter().take(200) {
            let back = crate::corpus::parse_record(&crate::corpus::to_record(d), 1).unwrap();
            assert_eq!(tokenize(&back.text), tokenize(&d.text));
            assert_eq!((back.day(), &back.community, back.kind), (d.day(), &d.community, d.kind));
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let render = |s: &PlantSpec| {
            let (docs, truth) = generate(s).unwrap();
            let mut out: Vec<u8> = docs.iter().flat_map(|d| (crate::corpus::to_record(d) + "\n").into_bytes()).collect();
            truth.write_csv(&mut out).unwrap();
            out
        };
        let a = spec(suite());
        assert_eq!(render(&a), render(&a));
        let mut b = a.clone();
        b.seed += 1;
        assert_ne!(render(&a), render(&b));
    }

    #[test]
    fn trapezoid_shape() {
        let t = Profile::Trapezoid { start: 2, rise: 1, plateau: 2, fall: 1, height: 4.0 };
        let v: Vec<f64> = (0..8).map(|i| t.expected(i, 8).unwrap()).collect();
        assert_eq!(v, vec![0.0, 0.0, 2.0, 4.0, 4.0, 2.0, 0.0, 0.0]);
        let r = Profile::LinearRamp { from: 1.0, to: 3.0 };
        assert_eq!(r.expected(2, 3), Some(3.0));
        assert_eq!(Profile::Proportional { p: 0.1 }.expected(0, 3), None);
    }

    #[test]
    fn empty_plants_give_pure_background() {
        let (docs, truth) = generate(&spec(Vec::new())).unwrap();
        assert!(truth.phrases.is_empty());
        assert!(docs.iter().all(|d| tokenize(&d.text).iter().all(|t| t.starts_with('w'))));
    }

    #[test]
    fn proportional_tracks_background() {
        let mut s = spec(vec![plant("such wow", Profile::Proportional { p: 0.01 })]);
        s.window = "0..399".into();
        s.background = VocabSpec { words: 200, rate: 5.0, growth: 10.0 };
        let (_, truth) = generate(&s).unwrap();
        let b = truth.background_total();
        let early: u64 = truth.plant_counts[0][..100].iter().sum();
        let late: u64 = truth.plant_counts[0][300..].iter().sum();
        let (be, bl): (u64, u64) = (b[..100].iter().sum(), b[300..].iter().sum());
        // Binomial sd is about 1% of the mean at these sizes; allow 5 sd.
        for (f, bb) in [(early, be), (late, bl)] {
            let ratio = f as f64 / bb as f64;
            assert!((ratio / 0.01 - 1.0).abs() < 0.15, "{ratio}");
        }
        assert!(bl > 4 * be);
    }

    #[test]
    fn validation_paths() {
        let err = |s: PlantSpec| match s.validate() {
            Err(Error::Spec { path, .. }) => path,
            other => panic!("{other:?}"),
        };
        let mut s = spec(vec![plant("w0003 x", Profile::Constant { rate: 1.0 })]);
        assert_eq!(err(s.clone()), "plants[0].phrase");
        s.plants = vec![plant("a b c", Profile::Constant { rate: 1.0 }), plant("b c", Profile::Constant { rate: 1.0 })];
        assert_eq!(err(s.clone()), "plants[1].phrase");
        s.plants = vec![plant("a", Profile::Proportional { p: 1.5 })];
        assert_eq!(err(s.clone()), "plants[0].profile.p");
        s.plants = vec![plant("a", Profile::Trapezoid { start: 50, rise: 5, plateau: 5, fall: 5, height: 1.0 })];
        assert_eq!(err(s.clone()), "plants[0].profile");
        s.plants = vec![Plant { communities: vec!["nope".into()], ..plant("a", Profile::Constant { rate: 1.0 }) }];
        assert_eq!(err(s.clone()), "plants[0].communities[0]");
        s.plants.clear();
        s.window = "9..3".into();
        assert_eq!(err(s.clone()), "window");
        s.window = "0..9".into();
        s.communities[1].docs_per_day = -1.0;
        assert_eq!(err(s.clone()), "communities[1].docs_per_day");
        s.communities[1].name = "alpha".into();
        assert_eq!(err(s), "communities[1].name");
    }

    #[test]
    fn parses_json() {
        let text = r#"{
            "window": "2010-01-01..2010-03-31", "seed": 3,
            "communities": [{"name": "a", "docs_per_day": 5}],
            "background": {"words": 20, "rate": 2},
            "plants": [{"phrase": "y tho", "profile": {"shape": "trapezoid", "start": 3, "rise": 2, "plateau": 5, "fall": 2, "height": 4}}]
        }"#;
        let s = PlantSpec::from_json(text).unwrap();
        assert_eq!(s.background.growth, 1.0);
        s.validate().unwrap();
        assert!(PlantSpec::from_json(r#"{"window": "0..1"}"#).is_err());
    }
}
