//! Discrete valid-time domain: instants with a distinguished `Now`, closed
//! intervals, the interval/instant predicate set, and coalescing.
//!
//! Time is a sequence of non-negative integer ticks. `Now` is the moving
//! current instant: it compares greater than every finite tick and equal to
//! itself, and is materialized to a concrete tick only when a snapshot or a
//! point-set expansion needs it.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::value::Value;

/// Granule index in the discrete time domain.
pub type Tick = u64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemporalError {
    #[error("interval start must be a finite instant")]
    OpenStart,
    #[error("interval start {from} is after its end {to}")]
    Inverted { from: Instant, to: Instant },
    #[error("expected a finite instant, got Now")]
    NowNotAllowed,
}

/// A time instant: a finite tick or the moving current instant `Now`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instant {
    At(Tick),
    Now,
}

impl Instant {
    pub fn is_finite(&self) -> bool {
        matches!(self, Instant::At(_))
    }

    pub fn tick(&self) -> Option<Tick> {
        match self {
            Instant::At(t) => Some(*t),
            Instant::Now => None,
        }
    }

    /// Replace `Now` by a concrete tick.
    pub fn materialize(&self, now: Tick) -> Tick {
        match self {
            Instant::At(t) => *t,
            Instant::Now => now,
        }
    }

    /// The immediately preceding instant; undefined for tick 0 and for `Now`.
    pub fn pred(&self) -> Option<Instant> {
        match self {
            Instant::At(t) if *t > 0 => Some(Instant::At(t - 1)),
            _ => None,
        }
    }
}

impl Ord for Instant {
    fn cmp(&self, other: &Instant) -> Ordering {
        match (self, other) {
            (Instant::At(a), Instant::At(b)) => a.cmp(b),
            (Instant::At(_), Instant::Now) => Ordering::Less,
            (Instant::Now, Instant::At(_)) => Ordering::Greater,
            (Instant::Now, Instant::Now) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Instant {
    fn partial_cmp(&self, other: &Instant) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Instant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instant::At(t) => write!(f, "{t}"),
            Instant::Now => write!(f, "Now"),
        }
    }
}

impl From<Tick> for Instant {
    fn from(t: Tick) -> Instant {
        Instant::At(t)
    }
}

/// A closed validity interval `[from, to]` over the tick domain.
///
/// The start is always finite; the end may be `Now`. The point-based reading
/// is the tick set `{from, ..., to}` with `Now` read as the current tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    from: Tick,
    to: Instant,
}

impl Interval {
    pub fn new(from: Instant, to: Instant) -> Result<Interval, TemporalError> {
        let Instant::At(from) = from else {
            return Err(TemporalError::OpenStart);
        };
        if Instant::At(from) > to {
            return Err(TemporalError::Inverted {
                from: Instant::At(from),
                to,
            });
        }
        Ok(Interval { from, to })
    }

    /// `[from, to]` with both ends finite.
    pub fn closed(from: Tick, to: Tick) -> Result<Interval, TemporalError> {
        Interval::new(Instant::At(from), Instant::At(to))
    }

    /// The open-ended interval `[from, Now]` of a live stage.
    pub fn until_now(from: Tick) -> Interval {
        Interval {
            from,
            to: Instant::Now,
        }
    }

    pub fn from(&self) -> Tick {
        self.from
    }

    pub fn to(&self) -> Instant {
        self.to
    }

    pub fn is_live(&self) -> bool {
        self.to == Instant::Now
    }

    /// Truncate the end to `to`; errors when that would invert the interval.
    pub fn with_to(&self, to: Instant) -> Result<Interval, TemporalError> {
        Interval::new(Instant::At(self.from), to)
    }

    /// Containment of a finite instant: `from <= t <= to`.
    pub fn at(&self, t: Tick) -> bool {
        self.from <= t && Instant::At(t) <= self.to
    }

    /// `t > from`: the interval starts strictly before the instant.
    pub fn starts_before(&self, t: Tick) -> bool {
        t > self.from
    }

    /// `t < to`: the interval finishes strictly after the instant.
    pub fn finishes_after(&self, t: Tick) -> bool {
        Instant::At(t) < self.to
    }

    /// `t < from`: the interval begins strictly after the instant.
    pub fn begins_after(&self, t: Tick) -> bool {
        t < self.from
    }

    /// The interval ends strictly before the window starts: `to < t1`.
    pub fn before(&self, window: &Interval) -> bool {
        self.to < Instant::At(window.from)
    }

    /// The interval begins strictly after the window ends: `t2 < from`.
    pub fn after(&self, window: &Interval) -> bool {
        window.to < Instant::At(self.from)
    }

    /// The window encloses the interval: `t1 <= from AND t2 >= to`.
    pub fn during(&self, window: &Interval) -> bool {
        window.from <= self.from && window.to >= self.to
    }

    /// The interval encloses the window: `t1 >= from AND t2 <= to`.
    pub fn covers(&self, window: &Interval) -> bool {
        window.from >= self.from && window.to <= self.to
    }

    /// Proper overlap in either direction, endpoints strict:
    /// `(t1 < from AND t2 > from AND t2 < to) OR (t1 > from AND t2 > to AND t1 < to)`.
    pub fn overlaps(&self, window: &Interval) -> bool {
        let (f, t) = (Instant::At(self.from), self.to);
        let (t1, t2) = (Instant::At(window.from), window.to);
        (t1 < f && t2 > f && t2 < t) || (t1 > f && t2 > t && t1 < t)
    }

    /// Shared endpoint: `t1 = to OR t2 = from`.
    pub fn meets(&self, window: &Interval) -> bool {
        Instant::At(window.from) == self.to || window.to == Instant::At(self.from)
    }

    /// The interval where both intersect: `[max(from), min(to)]` when
    /// non-empty under the closed reading, with `Now` as maximum.
    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let from = self.from.max(other.from);
        let to = self.to.min(other.to);
        if Instant::At(from) <= to {
            Some(Interval { from, to })
        } else {
            None
        }
    }

    /// True when the two intervals overlap or are adjacent (`a.to + 1 = b.from`),
    /// i.e. their union is a single contiguous interval.
    pub fn mergeable(&self, other: &Interval) -> bool {
        let (a, b) = if self.from <= other.from {
            (self, other)
        } else {
            (other, self)
        };
        match a.to {
            Instant::Now => true,
            Instant::At(t) => b.from <= t.saturating_add(1),
        }
    }

    /// The contiguous union of two mergeable intervals.
    pub fn merge(&self, other: &Interval) -> Option<Interval> {
        if !self.mergeable(other) {
            return None;
        }
        Some(Interval {
            from: self.from.min(other.from),
            to: self.to.max(other.to),
        })
    }

    /// The tick set `{from, ..., to}` with `Now` read as `now`.
    pub fn ticks(&self, now: Tick) -> impl Iterator<Item = Tick> {
        self.from..=self.to.materialize(now)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.from, self.to)
    }
}

/// A keyed, interval-stamped row: the generic carrier for coalescing.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalRow {
    pub key: Vec<Value>,
    pub interval: Interval,
}

impl TemporalRow {
    pub fn new(key: Vec<Value>, interval: Interval) -> TemporalRow {
        TemporalRow { key, interval }
    }
}

/// Merge rows with equal keys whose intervals overlap, meet at a shared
/// endpoint or are adjacent, into maximal intervals. Order-independent and
/// idempotent; the per-tick key sets are preserved exactly.
pub fn coalesce(rows: &[TemporalRow]) -> Vec<TemporalRow> {
    coalesce_by(rows, |r| r.key.clone(), |r| r.interval, TemporalRow::new)
}

/// Coalescing over any row representation: `key` extracts the grouping key,
/// `interval` the stamp, `rebuild` reassembles a merged row.
pub fn coalesce_by<R, K, FK, FI, FR>(rows: &[R], key: FK, interval: FI, rebuild: FR) -> Vec<R>
where
    K: PartialEq + Clone,
    FK: Fn(&R) -> K,
    FI: Fn(&R) -> Interval,
    FR: Fn(K, Interval) -> R,
{
    // Group rows by key, preserving first-seen key order.
    let mut groups: Vec<(K, Vec<Interval>)> = Vec::new();
    for row in rows {
        let k = key(row);
        let iv = interval(row);
        match groups.iter_mut().find(|(gk, _)| *gk == k) {
            Some((_, ivs)) => ivs.push(iv),
            None => groups.push((k, vec![iv])),
        }
    }
    let mut out = Vec::new();
    for (k, mut ivs) in groups {
        ivs.sort_by_key(|iv| (iv.from(), iv.to()));
        let mut merged: Vec<Interval> = Vec::new();
        for iv in ivs {
            match merged.last_mut() {
                Some(last) if last.mergeable(&iv) => *last = last.merge(&iv).unwrap(),
                _ => merged.push(iv),
            }
        }
        for iv in merged {
            out.push(rebuild(k.clone(), iv));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: Tick, b: Tick) -> Interval {
        Interval::closed(a, b).unwrap()
    }

    fn row(id: &str, i: Interval) -> TemporalRow {
        TemporalRow::new(vec![Value::Str(id.into())], i)
    }

    #[test]
    fn instant_order_treats_now_as_maximum() {
        assert!(Instant::At(1_000_000) < Instant::Now);
        assert_eq!(Instant::Now, Instant::Now);
        assert!(Instant::At(3) < Instant::At(4));
    }

    #[test]
    fn pred_is_defined_for_positive_finite_ticks() {
        assert_eq!(Instant::At(5).pred(), Some(Instant::At(4)));
        assert_eq!(Instant::At(0).pred(), None);
        assert_eq!(Instant::Now.pred(), None);
    }

    #[test]
    fn interval_invariants() {
        assert!(Interval::closed(5, 4).is_err());
        assert!(Interval::new(Instant::Now, Instant::Now).is_err());
        assert!(Interval::until_now(9).is_live());
    }

    #[test]
    fn iintersection_examples() {
        assert_eq!(iv(10, 20).intersection(&iv(15, 30)), Some(iv(15, 20)));
        assert_eq!(iv(0, 10).intersection(&iv(20, 30)), None);
        // Now participates as maximum.
        assert_eq!(
            Interval::until_now(51).intersection(&iv(0, 100)),
            Some(iv(51, 100))
        );
    }

    #[test]
    fn instant_predicates() {
        assert!(iv(10, 20).at(15));
        assert!(!iv(10, 20).at(21));
        assert!(!Interval::until_now(10).starts_before(10));
        assert!(Interval::until_now(10).starts_before(11));
        assert!(iv(10, 20).finishes_after(19));
        assert!(!iv(10, 20).finishes_after(20));
        assert!(iv(10, 20).begins_after(9));
    }

    #[test]
    fn interval_predicates() {
        assert!(iv(10, 20).during(&iv(0, 100)));
        assert!(iv(10, 20).meets(&iv(20, 50)));
        assert!(iv(10, 20).meets(&iv(0, 10)));
        // Shared start fails the strict OVERLAPS clauses; MEETS classifies touch.
        assert!(!iv(10, 20).overlaps(&iv(10, 30)));
        assert!(iv(10, 20).overlaps(&iv(15, 30)));
        assert!(iv(10, 20).overlaps(&iv(0, 15)));
        assert!(iv(0, 9).before(&iv(10, 20)));
        assert!(!iv(0, 10).before(&iv(10, 20)));
        assert!(iv(30, 40).after(&iv(10, 20)));
        assert!(iv(0, 100).covers(&iv(51, 100)));
    }

    #[test]
    fn during_covers_converse() {
        let pairs = [
            (iv(3, 7), iv(1, 9)),
            (iv(0, 5), iv(0, 5)),
            (iv(2, 3), iv(4, 9)),
        ];
        for (i, w) in pairs {
            assert_eq!(i.during(&w), w.covers(&i));
        }
    }

    #[test]
    fn coalesce_merges_adjacent() {
        let rows = vec![row("c1p3", iv(40, 50)), row("c1p3", iv(51, 100))];
        let out = coalesce(&rows);
        assert_eq!(out, vec![row("c1p3", iv(40, 100))]);
    }

    #[test]
    fn coalesce_keeps_gaps_and_singletons() {
        let rows = vec![row("x", iv(0, 10)), row("x", iv(12, 20))];
        assert_eq!(coalesce(&rows), rows);
        let single = vec![row("y", iv(10, 20))];
        assert_eq!(coalesce(&single), single);
    }

    #[test]
    fn coalesce_respects_keys() {
        let rows = vec![row("a", iv(0, 10)), row("b", iv(11, 20))];
        assert_eq!(coalesce(&rows).len(), 2);
    }

    #[test]
    fn coalesce_handles_now() {
        let rows = vec![row("a", Interval::until_now(30)), row("a", iv(10, 29))];
        let out = coalesce(&rows);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].interval.from(), 10);
        assert!(out[0].interval.is_live());
    }
}
