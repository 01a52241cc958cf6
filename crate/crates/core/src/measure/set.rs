use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MeasureError, Point};

/// An interval of `[0,1]` with per-endpoint openness. A closed interval with
/// `lo == hi` is a single point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Point,
    pub hi: Point,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi && !self.is_empty()
    }

    pub fn contains(&self, x: Point) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }
}

/// A finite union of intervals and points in `[0,1]`, kept canonical:
/// components sorted, pairwise disjoint, and never touching (touching
/// pieces are merged, degenerate intervals are points).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeasurableSet {
    components: Vec<Interval>,
}

impl MeasurableSet {
    pub fn empty() -> MeasurableSet {
        MeasurableSet::default()
    }

    /// The whole space `[0,1]`.
    pub fn unit() -> MeasurableSet {
        MeasurableSet::interval(Point::ZERO, Point::ONE, true, true)
    }

    /// The open interior `(0,1)`.
    pub fn interior() -> MeasurableSet {
        MeasurableSet::interval(Point::ZERO, Point::ONE, false, false)
    }

    pub fn interval(lo: Point, hi: Point, lo_closed: bool, hi_closed: bool) -> MeasurableSet {
        MeasurableSet::from_components(vec![Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }])
    }

    /// Open interval with linear endpoints.
    pub fn open(lo: f64, hi: f64) -> Result<MeasurableSet, MeasureError> {
        Ok(MeasurableSet::interval(
            Point::new(lo)?,
            Point::new(hi)?,
            false,
            false,
        ))
    }

    /// Closed interval with linear endpoints.
    pub fn closed(lo: f64, hi: f64) -> Result<MeasurableSet, MeasureError> {
        Ok(MeasurableSet::interval(
            Point::new(lo)?,
            Point::new(hi)?,
            true,
            true,
        ))
    }

    pub fn singleton(x: Point) -> MeasurableSet {
        MeasurableSet::interval(x, x, true, true)
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(points: I) -> MeasurableSet {
        MeasurableSet::from_components(
            points
                .into_iter()
                .map(|p| Interval {
                    lo: p,
                    hi: p,
                    lo_closed: true,
                    hi_closed: true,
                })
                .collect(),
        )
    }

    fn from_components(mut parts: Vec<Interval>) -> MeasurableSet {
        parts.retain(|c| !c.is_empty());
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Interval> = Vec::with_capacity(parts.len());
        for next in parts {
            if let Some(cur) = out.last_mut() {
                let touches =
                    next.lo < cur.hi || (next.lo == cur.hi && (cur.hi_closed || next.lo_closed));
                if touches {
                    if next.lo == cur.lo {
                        cur.lo_closed |= next.lo_closed;
                    }
                    if next.hi > cur.hi {
                        cur.hi = next.hi;
                        cur.hi_closed = next.hi_closed;
                    } else if next.hi == cur.hi {
                        cur.hi_closed |= next.hi_closed;
                    }
                    continue;
                }
            }
            out.push(next);
        }
        MeasurableSet { components: out }
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    /// Non-degenerate interval components.
    pub fn intervals(&self) -> impl Iterator<Item = &Interval> {
        self.components.iter().filter(|c| !c.is_point())
    }

    /// Isolated points.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.components
            .iter()
            .filter(|c| c.is_point())
            .map(|c| c.lo)
    }

    pub fn contains(&self, x: Point) -> bool {
        let idx = self.components.partition_point(|c| c.lo <= x);
        idx > 0 && self.components[idx - 1].contains(x)
    }

    pub fn union(&self, other: &MeasurableSet) -> MeasurableSet {
        let mut parts = self.components.clone();
        parts.extend_from_slice(&other.components);
        MeasurableSet::from_components(parts)
    }

    /// Complement relative to `[0,1]`.
    pub fn complement(&self) -> MeasurableSet {
        let mut parts = Vec::new();
        let mut cursor = Point::ZERO;
        let mut cursor_closed = true;
        for c in &self.components {
            parts.push(Interval {
                lo: cursor,
                hi: c.lo,
                lo_closed: cursor_closed,
                hi_closed: !c.lo_closed,
            });
            cursor = c.hi;
            cursor_closed = !c.hi_closed;
        }
        parts.push(Interval {
            lo: cursor,
            hi: Point::ONE,
            lo_closed: cursor_closed,
            hi_closed: true,
        });
        MeasurableSet::from_components(parts)
    }

    pub fn intersection(&self, other: &MeasurableSet) -> MeasurableSet {
        self.complement().union(&other.complement()).complement()
    }

    /// `self \ other`.
    pub fn difference(&self, other: &MeasurableSet) -> MeasurableSet {
        self.intersection(&other.complement())
    }

    pub fn is_subset(&self, other: &MeasurableSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &MeasurableSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// The single interval this set consists of, if it is one.
    pub fn as_single_interval(&self) -> Option<&Interval> {
        match self.components.as_slice() {
            [only] if !only.is_point() => Some(only),
            _ => None,
        }
    }
}

impl fmt::Display for MeasurableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "∅");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            if c.is_point() {
                write!(f, "{{{}}}", c.lo)?;
            } else {
                let l = if c.lo_closed { '[' } else { '(' };
                let r = if c.hi_closed { ']' } else { ')' };
                write!(f, "{l}{}, {}{r}", c.lo, c.hi)?;
            }
        }
        Ok(())
    }
}

/// Wire form: `{"intervals":[[lo,hi,lo_closed,hi_closed],...],"points":[...]}`
/// with linear-domain endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetJson {
    pub intervals: Vec<(f64, f64, bool, bool)>,
    pub points: Vec<f64>,
}

impl From<&MeasurableSet> for SetJson {
    fn from(set: &MeasurableSet) -> SetJson {
        SetJson {
            intervals: set
                .intervals()
                .map(|c| (c.lo.value(), c.hi.value(), c.lo_closed, c.hi_closed))
                .collect(),
            points: set.points().map(Point::value).collect(),
        }
    }
}

impl TryFrom<SetJson> for MeasurableSet {
    type Error = MeasureError;

    fn try_from(json: SetJson) -> Result<MeasurableSet, MeasureError> {
        let mut parts = Vec::with_capacity(json.intervals.len() + json.points.len());
        for (lo, hi, lo_closed, hi_closed) in json.intervals {
            parts.push(Interval {
                lo: Point::new(lo)?,
                hi: Point::new(hi)?,
                lo_closed,
                hi_closed,
            });
        }
        for p in json.points {
            let p = Point::new(p)?;
            parts.push(Interval {
                lo: p,
                hi: p,
                lo_closed: true,
                hi_closed: true,
            });
        }
        Ok(MeasurableSet::from_components(parts))
    }
}

impl Serialize for MeasurableSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SetJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasurableSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<MeasurableSet, D::Error> {
        let json = SetJson::deserialize(d)?;
        MeasurableSet::try_from(json).map_err(serde::de::Error::custom)
    }
}
