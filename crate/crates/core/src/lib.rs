//! Meme ecology over timestamped community text: phrase matching, daily
//! frequency series, diversity and lifespan metrics, peak dynamics, and
//! innovation rankings.

pub mod corpus;
pub mod dynamics;
pub mod ecology;
mod error;
pub mod innovation;
pub mod matcher;
pub mod par;
pub mod phraseset;
pub mod pipeline;
pub mod series;
pub mod stats;
pub mod synth;
pub mod time;

pub use error::{Error, Result};
