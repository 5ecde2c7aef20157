//! Calendar-to-tick resolution. The engine computes over abstract ticks; the
//! workspace config fixes what a tick means (a day since an epoch date, or a
//! calendar year) and where `Now` currently sits.

use thiserror::Error;

use crate::temporal::{Instant, Interval, TemporalError, Tick};

#[derive(Debug, Error, PartialEq)]
pub enum TimeError {
    #[error("invalid calendar date {day}/{month}/{year}")]
    BadDate { day: u32, month: u32, year: i64 },
    #[error("{0} is before the workspace epoch")]
    BeforeEpoch(String),
    #[error(transparent)]
    Interval(#[from] TemporalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Day,
    Year,
}

/// A raw time literal as written in a query or op spec, before resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeLiteral {
    /// A bare integer: a tick, except that under day granularity a four-digit
    /// number is read as a calendar year.
    Number(u64),
    /// d/m/yyyy; month and day are swapped when only the swap is valid.
    Date {
        day: u32,
        month: u32,
        year: i64,
    },
    Now,
}

/// Which edge of an interval a literal occupies; years expand to their first
/// or last covered tick accordingly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub granularity: Granularity,
    /// Epoch year (year granularity) or the day count origin (day granularity,
    /// stored as days-from-civil of the epoch date).
    epoch_year: i64,
    epoch_days: i64,
    pub current: Tick,
}

impl TimeConfig {
    pub fn years(epoch_year: i64, current: Tick) -> TimeConfig {
        TimeConfig {
            granularity: Granularity::Year,
            epoch_year,
            epoch_days: 0,
            current,
        }
    }

    pub fn days(
        epoch_day: u32,
        epoch_month: u32,
        epoch_year: i64,
        current: Tick,
    ) -> Result<TimeConfig, TimeError> {
        check_date(epoch_day, epoch_month, epoch_year)?;
        Ok(TimeConfig {
            granularity: Granularity::Day,
            epoch_year,
            epoch_days: days_from_civil(epoch_year, epoch_month, epoch_day),
            current,
        })
    }

    pub fn date_to_tick(&self, day: u32, month: u32, year: i64) -> Result<Tick, TimeError> {
        let (day, month) = normalize_day_month(day, month, year)?;
        match self.granularity {
            Granularity::Year => self.year_to_tick(year),
            Granularity::Day => {
                let d = days_from_civil(year, month, day) - self.epoch_days;
                if d < 0 {
                    return Err(TimeError::BeforeEpoch(format!("{day}/{month}/{year}")));
                }
                Ok(d as Tick)
            }
        }
    }

    fn year_to_tick(&self, year: i64) -> Result<Tick, TimeError> {
        if year < self.epoch_year {
            return Err(TimeError::BeforeEpoch(year.to_string()));
        }
        Ok((year - self.epoch_year) as Tick)
    }

    /// The tick range a calendar year covers.
    pub fn year_to_range(&self, year: i64) -> Result<(Tick, Tick), TimeError> {
        match self.granularity {
            Granularity::Year => {
                let t = self.year_to_tick(year)?;
                Ok((t, t))
            }
            Granularity::Day => Ok((
                self.date_to_tick(1, 1, year)?,
                self.date_to_tick(31, 12, year)?,
            )),
        }
    }

    /// True when a bare number should be read as a calendar year rather than
    /// a tick. Only under day granularity, and only for four-digit numbers.
    fn number_is_year(&self, n: u64) -> bool {
        self.granularity == Granularity::Day && (1000..=9999).contains(&n)
    }

    /// Resolve a literal in instant position. `Now` materializes to the
    /// current tick; a year resolves to its first covered tick.
    pub fn resolve_instant(&self, lit: &TimeLiteral) -> Result<Tick, TimeError> {
        match lit {
            TimeLiteral::Now => Ok(self.current),
            TimeLiteral::Number(n) if self.number_is_year(*n) => {
                Ok(self.year_to_range(*n as i64)?.0)
            }
            TimeLiteral::Number(n) => Ok(*n),
            TimeLiteral::Date { day, month, year } => self.date_to_tick(*day, *month, *year),
        }
    }

    /// Resolve a literal on one edge of an interval; `Now` stays symbolic.
    pub fn resolve_bound(&self, lit: &TimeLiteral, edge: Edge) -> Result<Instant, TimeError> {
        match lit {
            TimeLiteral::Now => Ok(Instant::Now),
            TimeLiteral::Number(n) if self.number_is_year(*n) => {
                let (first, last) = self.year_to_range(*n as i64)?;
                Ok(Instant::At(if edge == Edge::Start { first } else { last }))
            }
            TimeLiteral::Number(n) => Ok(Instant::At(*n)),
            TimeLiteral::Date { day, month, year } => {
                Ok(Instant::At(self.date_to_tick(*day, *month, *year)?))
            }
        }
    }

    pub fn resolve_interval(
        &self,
        from: &TimeLiteral,
        to: &TimeLiteral,
    ) -> Result<Interval, TimeError> {
        let lo = self.resolve_bound(from, Edge::Start)?;
        let hi = self.resolve_bound(to, Edge::End)?;
        Ok(Interval::new(lo, hi)?)
    }

    /// Tick range of a Time-dimension member label when it names a year.
    pub fn member_year_range(&self, label: &str) -> Option<(Tick, Tick)> {
        let year: i64 = label.trim().parse().ok()?;
        self.year_to_range(year).ok()
    }

    /// The tick the wall clock sits on, given days since 1970-01-01.
    pub fn tick_for_unix_days(&self, unix_days: i64) -> Result<Tick, TimeError> {
        match self.granularity {
            Granularity::Day => {
                let d = unix_days - self.epoch_days;
                if d < 0 {
                    return Err(TimeError::BeforeEpoch("today".into()));
                }
                Ok(d as Tick)
            }
            Granularity::Year => {
                let (y, _, _) = civil_from_days(unix_days);
                self.year_to_tick(y)
            }
        }
    }
}

/// Accept d/m/yyyy; when the month slot is out of range but the swapped
/// reading is a valid date, read it as m/d/yyyy instead.
fn normalize_day_month(day: u32, month: u32, year: i64) -> Result<(u32, u32), TimeError> {
    if check_date(day, month, year).is_ok() {
        return Ok((day, month));
    }
    if check_date(month, day, year).is_ok() {
        return Ok((month, day));
    }
    Err(TimeError::BadDate { day, month, year })
}

fn check_date(day: u32, month: u32, year: i64) -> Result<(), TimeError> {
    let ok = (1..=12).contains(&month) && day >= 1 && day <= days_in_month(year, month);
    if ok {
        Ok(())
    } else {
        Err(TimeError::BadDate { day, month, year })
    }
}

fn days_in_month(year: i64, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if year % 4 == 0 && (year % 100 != 0 || year % 400 == 0) => 29,
        2 => 28,
        _ => 0,
    }
}

/// Civil date of a days-since-1970 count (inverse of `days_from_civil`).
fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719468;
    let era = if z >= 0 { z } else { z - 146096 } / 146097;
    let doe = z - era * 146097;
    let yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = (if mp < 10 { mp + 3 } else { mp - 9 }) as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

/// Days since 1970-01-01 of a proleptic Gregorian civil date.
fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = if month > 2 { month - 3 } else { month + 9 } as i64;
    let doy = (153 * mp + 2) / 5 + day as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146097 + doe - 719468
}
