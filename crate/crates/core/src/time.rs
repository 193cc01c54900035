//! UTC day and calendar-month indices.

use std::fmt;

use chrono::{DateTime, Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Whole UTC days since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Day(pub i64);

impl Day {
    pub fn from_timestamp(created_utc: i64) -> Day {
        Day(created_utc.div_euclid(SECONDS_PER_DAY))
    }

    pub fn date(self) -> NaiveDate {
        DateTime::from_timestamp(self.0 * SECONDS_PER_DAY, 0)
            .expect("day index within chrono range")
            .date_naive()
    }

    pub fn from_date(date: NaiveDate) -> Day {
        let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap();
        Day((date - epoch).num_days())
    }

    pub fn month(self) -> YearMonth {
        let d = self.date();
        YearMonth {
            year: d.year(),
            month: d.month(),
        }
    }

    pub fn year(self) -> i32 {
        self.date().year()
    }

    pub fn offset(self, days: i64) -> Day {
        Day(self.0 + days)
    }
}

impl fmt::Display for Day {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A proleptic Gregorian (year, month) pair, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    /// 1..=12
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> YearMonth {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        YearMonth { year, month }
    }

    /// Months since year 0, usable as a linear time axis.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn succ(self) -> YearMonth {
        if self.month == 12 {
            YearMonth::new(self.year + 1, 1)
        } else {
            YearMonth::new(self.year, self.month + 1)
        }
    }

    pub fn first_day(self) -> Day {
        Day::from_date(NaiveDate::from_ymd_opt(self.year, self.month, 1).unwrap())
    }

    pub fn last_day(self) -> Day {
        self.succ().first_day().offset(-1)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Inclusive range of days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub first: Day,
    pub last: Day,
}

impl Window {
    pub fn new(first: Day, last: Day) -> crate::Result<Window> {
        if last < first {
            return Err(crate::Error::Window(format!(
                "last day {last} precedes first day {first}"
            )));
        }
        Ok(Window { first, last })
    }

    pub fn len(&self) -> usize {
        (self.last.0 - self.first.0 + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, day: Day) -> bool {
        self.first <= day && day <= self.last
    }

    /// Position of `day` inside the window, if it falls inside.
    pub fn index_of(&self, day: Day) -> Option<usize> {
        self.contains(day).then(|| (day.0 - self.first.0) as usize)
    }

    pub fn day_at(&self, index: usize) -> Day {
        self.first.offset(index as i64)
    }

    pub fn days(&self) -> impl Iterator<Item = Day> {
        (self.first.0..=self.last.0).map(Day)
    }

    /// Every calendar month touched by the window, in order.
    pub fn months(&self) -> Vec<YearMonth> {
        let mut out = Vec::new();
        let end = self.last.month();
        let mut m = self.first.month();
        while m <= end {
            out.push(m);
            m = m.succ();
        }
        out
    }

    /// The part of `month` that lies inside the window.
    pub fn clip_month(&self, month: YearMonth) -> Option<Window> {
        let first = month.first_day().max(self.first);
        let last = month.last_day().min(self.last);
        (first <= last).then_some(Window { first, last })
    }

    /// Parses `START..END` where each bound is `YYYY-MM-DD` or a day index.
    pub fn parse(text: &str) -> crate::Result<Window> {
        let (a, b) = text
            .split_once("..")
            .ok_or_else(|| crate::Error::Window(format!("expected START..END, got `{text}`")))?;
        Window::new(parse_day(a)?, parse_day(b)?)
    }
}

fn parse_day(text: &str) -> crate::Result<Day> {
    let text = text.trim();
    if let Ok(n) = text.parse::<i64>() {
        return Ok(Day(n));
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map(Day::from_date)
        .map_err(|e| crate::Error::Window(format!("bad day `{text}`: {e}")))
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn day_floor() {
        assert_eq!(Day::from_timestamp(0), Day(0));
        assert_eq!(Day::from_timestamp(86_399), Day(0));
        assert_eq!(Day::from_timestamp(86_400), Day(1));
    }

    #[test]
    fn month_matches_calendar() {
        assert_eq!(Day(0).month(), YearMonth::new(1970, 1));
        // 2012-02-29
        let leap = Day::from_date(NaiveDate::from_ymd_opt(2012, 2, 29).unwrap());
        assert_eq!(leap.month(), YearMonth::new(2012, 2));
        assert_eq!(leap.offset(1).month(), YearMonth::new(2012, 3));
        assert_eq!(YearMonth::new(2012, 2).last_day(), leap);
        assert_eq!(YearMonth::new(2019, 12).succ(), YearMonth::new(2020, 1));
    }

    #[test]
    fn window_months_and_clip() {
        let w = Window::parse("2010-01-20..2010-03-05").unwrap();
        let months = w.months();
        assert_eq!(
            months,
            vec![
                YearMonth::new(2010, 1),
                YearMonth::new(2010, 2),
                YearMonth::new(2010, 3)
            ]
        );
        assert_eq!(w.clip_month(months[0]).unwrap().len(), 12);
        assert_eq!(w.clip_month(months[1]).unwrap().len(), 28);
        assert_eq!(w.clip_month(months[2]).unwrap().len(), 5);
        assert!(w.clip_month(YearMonth::new(2011, 1)).is_none());
    }

    #[test]
    fn window_rejects_inverted() {
        assert!(Window::parse("10..3").is_err());
        assert!(Window::parse("10").is_err());
        assert_eq!(Window::parse("3..10").unwrap().len(), 8);
    }
}
