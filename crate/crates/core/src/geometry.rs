//! Closed intervals over the extended reals and axis-aligned rectangles.
//!
//! Rectangles serve as flows (admissible derivative vectors of a mode) and
//! as guards (admissible states for taking an edge). Hulls are component-wise
//! bounding boxes, which contain the true convex hull of their inputs.
//!
//! All comparisons are exact. The only tolerance in the crate is the
//! optional `eps` accepted by the membership helpers, and it defaults to 0.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn singular(value: f64) -> Self {
        debug_assert!(value.is_finite());
        Interval { lo: value, hi: value }
    }

    pub fn full() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_singular(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }

    pub fn contains_eps(&self, value: f64, eps: f64) -> bool {
        self.lo - eps <= value && value <= self.hi + eps
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// The common part of both intervals, if any.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Lexicographic total order on `(lo, hi)`, used for canonical sorting.
    pub fn total_cmp(&self, other: &Interval) -> Ordering {
        self.lo
            .total_cmp(&other.lo)
            .then_with(|| self.hi.total_cmp(&other.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_singular() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", fmt_bound(self.lo), fmt_bound(self.hi))
        }
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BoundRepr {
    Num(f64),
    Str(String),
}

impl BoundRepr {
    fn into_f64<E: de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            BoundRepr::Num(v) => Ok(v),
            BoundRepr::Str(s) => match s.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(E::custom(format!("invalid bound {other:?}"))),
            },
        }
    }
}

struct Bound(f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&Bound(self.lo))?;
        t.serialize_element(&Bound(self.hi))?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (lo, hi) = <(BoundRepr, BoundRepr)>::deserialize(d)?;
        let (lo, hi) = (lo.into_f64()?, hi.into_f64()?);
        Interval::new(lo, hi).map_err(de::Error::custom)
    }
}

/// An n-dimensional axis-aligned rectangle, the product of `n` intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct Rect {
    dims: Vec<Interval>,
}

impl TryFrom<Vec<Interval>> for Rect {
    type Error = Error;

    fn try_from(dims: Vec<Interval>) -> Result<Self> {
        Rect::new(dims)
    }
}

impl From<Rect> for Vec<Interval> {
    fn from(r: Rect) -> Self {
        r.dims
    }
}

impl Rect {
    pub fn new(dims: Vec<Interval>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Rect { dims })
    }

    /// Builds a rectangle from `(lo, hi)` pairs.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        let dims = bounds
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Rect::new(dims)
    }

    /// The degenerate rectangle containing exactly `x`.
    pub fn singular(x: &[f64]) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite point {x:?}")));
        }
        Rect::new(x.iter().map(|&v| Interval::singular(v)).collect())
    }

    /// The unconstrained rectangle `(-inf, inf)^n`. As a guard it never
    /// blocks a transition; under `box_hull` it is absorbing.
    pub fn full(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Rect {
            dims: vec![Interval::full(); n],
        })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.dims
    }

    pub fn interval(&self, d: usize) -> Interval {
        self.dims[d]
    }

    pub fn is_full(&self) -> bool {
        self.dims.iter().all(|i| *i == Interval::full())
    }

    pub fn is_bounded(&self) -> bool {
        self.dims.iter().all(Interval::is_bounded)
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found,
            });
        }
        Ok(())
    }

    pub fn contains_point(&self, x: &[f64]) -> Result<bool> {
        self.contains_point_eps(x, 0.0)
    }

    pub fn contains_point_eps(&self, x: &[f64], eps: f64) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(self
            .dims
            .iter()
            .zip(x)
            .all(|(i, &v)| i.contains_eps(v, eps)))
    }

    /// Component-wise bounding box of a nonempty set of rectangles.
    pub fn box_hull<'a, I>(rects: I) -> Result<Rect>
    where
        I: IntoIterator<Item = &'a Rect>,
    {
        let mut iter = rects.into_iter();
        let mut acc = iter.next().ok_or(Error::EmptyHull)?.clone();
        for r in iter {
            acc.hull_with(r)?;
        }
        Ok(acc)
    }

    /// Grows `self` in place to the bounding box of `self` and `other`.
    pub fn hull_with(&mut self, other: &Rect) -> Result<()> {
        self.check_dim(other.dim())?;
        for (a, b) in self.dims.iter_mut().zip(&other.dims) {
            *a = a.hull(b);
        }
        Ok(())
    }

    /// The common part of both rectangles, if any.
    pub fn intersect(&self, other: &Rect) -> Result<Option<Rect>> {
        self.check_dim(other.dim())?;
        let dims: Option<Vec<Interval>> = self.dims.iter().zip(&other.dims).map(|(a, b)| a.intersect(b)).collect();
        Ok(dims.map(|dims| Rect { dims }))
    }

    /// `x + delay * self`, the set of states reachable from `x` after
    /// `delay` time units under any rate in `self`.
    pub fn scale_translate(&self, x: &[f64], delay: f64) -> Result<Rect> {
        self.check_dim(x.len())?;
        if !(delay >= 0.0) || !delay.is_finite() {
            return Err(Error::InvalidDelay(delay));
        }
        if delay == 0.0 {
            return Rect::singular(x);
        }
        let dims = self
            .dims
            .iter()
            .zip(x)
            .map(|(i, &v)| Interval {
                lo: v + delay * i.lo,
                hi: v + delay * i.hi,
            })
            .collect();
        Ok(Rect { dims })
    }

    pub fn is_subset(&self, other: &Rect) -> Result<bool> {
        self.check_dim(other.dim())?;
        Ok(self.dims.iter().zip(&other.dims).all(|(a, b)| a.is_subset(b)))
    }

    /// Whether a delay of `delay` from `from` can end in `to` under some
    /// rate in `self`.
    ///
    /// A dimension is admitted when the observed rate `(to - from) / delay`
    /// lies in the interval, or when `to` lies in `from + delay * [lo, hi]`.
    /// Both tests are exact; together they accept rates recovered by
    /// division as well as points produced by multiplication, which can
    /// disagree by one rounding step.
    pub fn admits_delay(&self, from: &[f64], to: &[f64], delay: f64, eps: f64) -> Result<bool> {
        self.check_dim(from.len())?;
        self.check_dim(to.len())?;
        if !(delay >= 0.0) || !delay.is_finite() {
            return Err(Error::InvalidDelay(delay));
        }
        Ok(self
            .dims
            .iter()
            .zip(from.iter().zip(to))
            .all(|(i, (&a, &b))| {
                if delay == 0.0 {
                    return (b - a).abs() <= eps;
                }
                let rate = (b - a) / delay;
                if i.contains(rate) {
                    return true;
                }
                let reach = Interval {
                    lo: a + delay * i.lo,
                    hi: a + delay * i.hi,
                };
                reach.contains_eps(b, eps)
            }))
    }

    /// Lexicographic total order over the component intervals.
    pub fn total_cmp(&self, other: &Rect) -> Ordering {
        for (a, b) in self.dims.iter().zip(&other.dims) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.dims.len().cmp(&other.dims.len())
    }

    /// Shrinks every bounded, non-degenerate interval symmetrically so its
    /// width becomes `(1 - fraction)` of the original.
    pub fn shrunk(&self, fraction: f64) -> Rect {
        let dims = self
            .dims
            .iter()
            .map(|i| {
                if !i.is_bounded() || i.is_singular() {
                    return *i;
                }
                let cut = i.width() * fraction / 2.0;
                Interval {
                    lo: i.lo + cut,
                    hi: i.hi - cut,
                }
            })
            .collect();
        Rect { dims }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.dims.iter().enumerate() {
            if k > 0 {
                f.write_str("x")?;
            }
            if i.is_singular() {
                write!(f, "[{}]", i.lo)?;
            } else {
                write!(f, "{i}")?;
            }
        }
        Ok(())
    }
}

/// Singular rate rectangle `(to - from) / delay` for a delay transition.
pub fn solve(from: &[f64], to: &[f64], delay: f64) -> Result<Rect> {
    if from.len() != to.len() {
        return Err(Error::DimensionMismatch {
            expected: from.len(),
            found: to.len(),
        });
    }
    if delay == 0.0 {
        return Err(Error::ZeroDelay);
    }
    if !(delay > 0.0) || !delay.is_finite() {
        return Err(Error::InvalidDelay(delay));
    }
    let rates: Vec<f64> = from.iter().zip(to).map(|(a, b)| (b - a) / delay).collect();
    Rect::singular(&rates)
}
