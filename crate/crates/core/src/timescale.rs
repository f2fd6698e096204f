//! Bounded time scales as finite unions of closed intervals and isolated
//! points, their jump operators, and sampling onto finite grids.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// Default absolute tolerance used when matching a query point to the scale.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-12;

/// Points closer than this are collapsed when sampling.
pub const MERGE_TOL: f64 = 1e-12;

/// A closed interval `[lo, hi]`; `lo == hi` is an isolated point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Segment<T> {
    pub fn point(p: T) -> Self {
        Segment { lo: p, hi: p }
    }

    pub fn interval(lo: T, hi: T) -> Self {
        Segment { lo, hi }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightClass {
    RightDense,
    RightScattered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftClass {
    LeftDense,
    LeftScattered,
}

/// Right and left classification of a point of a time scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointClass {
    pub right: RightClass,
    pub left: LeftClass,
}

/// A bounded time scale: ordered, disjoint closed segments.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScale<T> {
    segments: Vec<Segment<T>>,
    tol: T,
}

impl<T: Scalar> TimeScale<T> {
    /// Builds a time scale from segments given in any order.
    ///
    /// Segments must be finite, have `lo <= hi` and be pairwise disjoint.
    /// A scale consisting of a single point is accepted here (it arises from
    /// repeated truncation); problems reject it separately.
    pub fn new(mut segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidTimeScale("no segments".into()));
        }
        for s in &segments {
            if !s.lo.is_finite() || !s.hi.is_finite() {
                return Err(Error::InvalidTimeScale("non-finite endpoint".into()));
            }
            if s.lo > s.hi {
                return Err(Error::InvalidTimeScale(format!(
                    "interval [{}, {}] has lo > hi",
                    s.lo, s.hi
                )));
            }
        }
        segments.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
        for w in segments.windows(2) {
            if w[0].hi >= w[1].lo {
                return Err(Error::InvalidTimeScale(format!(
                    "segments [{}, {}] and [{}, {}] overlap or touch",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(TimeScale {
            segments,
            tol: lit(DEFAULT_MEMBERSHIP_TOL),
        })
    }

    /// Discrete scale made of the given isolated points.
    pub fn from_points(points: &[T]) -> Result<Self> {
        Self::new(points.iter().map(|&p| Segment::point(p)).collect())
    }

    pub fn interval(lo: T, hi: T) -> Result<Self> {
        Self::new(vec![Segment::interval(lo, hi)])
    }

    /// Parses the literal syntax `item;item;...` where an item is a point
    /// `p` or an interval `[l,r]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for raw in text.split(';') {
            let item = raw.trim();
            if item.is_empty() {
                return Err(Error::InvalidTimeScale(format!("empty item in `{text}`")));
            }
            if let Some(inner) = item.strip_prefix('[') {
                let inner = inner.strip_suffix(']').ok_or_else(|| {
                    Error::InvalidTimeScale(format!("unterminated interval `{item}`"))
                })?;
                let (l, r) = inner.split_once(',').ok_or_else(|| {
                    Error::InvalidTimeScale(format!("interval `{item}` needs two endpoints"))
                })?;
                segments.push(Segment::interval(parse_num(l)?, parse_num(r)?));
            } else {
                segments.push(Segment::point(parse_num(item)?));
            }
        }
        Self::new(segments)
    }

    /// Sets the absolute tolerance used to accept query points.
    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn min(&self) -> T {
        self.segments[0].lo
    }

    pub fn max(&self) -> T {
        self.segments[self.segments.len() - 1].hi
    }

    pub fn is_discrete(&self) -> bool {
        self.segments.iter().all(Segment::is_point)
    }

    pub fn contains(&self, t: T) -> bool {
        self.locate(t).is_some()
    }

    /// Segment index and the query snapped onto the scale.
    fn locate(&self, t: T) -> Option<(usize, T)> {
        if !t.is_finite() {
            return None;
        }
        // first segment whose upper end is not below t - tol
        let idx = self.segments.partition_point(|s| s.hi + self.tol < t);
        let s = self.segments.get(idx)?;
        if (t - s.lo).abs() <= self.tol {
            Some((idx, s.lo))
        } else if (t - s.hi).abs() <= self.tol {
            Some((idx, s.hi))
        } else if s.lo < t && t < s.hi {
            Some((idx, t))
        } else {
            None
        }
    }

    fn locate_or_err(&self, t: T) -> Result<(usize, T)> {
        self.locate(t).ok_or(Error::NotInTimeScale(to_f64(t)))
    }

    /// Forward jump operator.
    pub fn sigma(&self, t: T) -> Result<T> {
        let (j, s) = self.locate_or_err(t)?;
        let seg = self.segments[j];
        if s < seg.hi {
            Ok(s)
        } else if j + 1 < self.segments.len() {
            Ok(self.segments[j + 1].lo)
        } else {
            Ok(s)
        }
    }

    /// Backward jump operator.
    pub fn rho(&self, t: T) -> Result<T> {
        let (j, s) = self.locate_or_err(t)?;
        let seg = self.segments[j];
        if s > seg.lo {
            Ok(s)
        } else if j > 0 {
            Ok(self.segments[j - 1].hi)
        } else {
            Ok(s)
        }
    }

    pub fn graininess(&self, t: T) -> Result<T> {
        let (_, s) = self.locate_or_err(t)?;
        Ok(self.sigma(s)? - s)
    }

    pub fn classify(&self, t: T) -> Result<PointClass> {
        let (_, s) = self.locate_or_err(t)?;
        let right = if self.sigma(s)? > s {
            RightClass::RightScattered
        } else {
            RightClass::RightDense
        };
        let left = if self.rho(s)? < s {
            LeftClass::LeftScattered
        } else {
            LeftClass::LeftDense
        };
        Ok(PointClass { right, left })
    }

    /// Removes the tail `(rho(b), b]`.
    pub fn truncate_k(&self) -> Result<Self> {
        if self.segments.len() == 1 && self.segments[0].is_point() {
            return Err(Error::DegenerateScale(
                "truncating a single-point time scale leaves it empty".into(),
            ));
        }
        let b = self.max();
        let rb = self.rho(b)?;
        if rb == b {
            return Ok(self.clone());
        }
        // b is left-scattered, so the last segment is the isolated point b
        let segments = self.segments[..self.segments.len() - 1].to_vec();
        Ok(TimeScale {
            segments,
            tol: self.tol,
        })
    }

    /// Samples the scale onto a grid: isolated points and interval endpoints
    /// are kept exactly and each interval `[l, r]` is split into
    /// `ceil((r - l) / resolution)` equal steps.
    pub fn sample(&self, resolution: T) -> Result<GridTimeScale<T>> {
        if !(resolution > T::zero()) || !resolution.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        let merge: T = lit(MERGE_TOL);
        let mut points: Vec<T> = Vec::new();
        let mut dense: Vec<bool> = Vec::new();
        let mut push = |p: T, d: bool| {
            if let Some(&last) = points.last() {
                if p - last <= merge {
                    return;
                }
            }
            points.push(p);
            dense.push(d);
        };
        for s in &self.segments {
            if s.is_point() {
                push(s.lo, false);
                continue;
            }
            let steps = ((s.hi - s.lo) / resolution).ceil();
            let steps = steps.to_usize().unwrap_or(1).max(1);
            let n: T = T::from_usize(steps).unwrap();
            push(s.lo, true);
            for i in 1..steps {
                let frac = T::from_usize(i).unwrap() / n;
                push(s.lo + (s.hi - s.lo) * frac, true);
            }
            push(s.hi, true);
        }
        GridTimeScale::with_flags(points, dense)
    }
}

fn parse_num<T: Scalar>(s: &str) -> Result<T> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidTimeScale(format!("invalid number `{}`", s.trim())))?;
    T::from_f64(v).ok_or_else(|| Error::InvalidTimeScale(format!("number `{s}` out of range")))
}

impl<T: Scalar> fmt::Display for TimeScale<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            if s.is_point() {
                write!(f, "{}", s.lo)?;
            } else {
                write!(f, "[{},{}]", s.lo, s.hi)?;
            }
        }
        Ok(())
    }
}

/// A finite, strictly increasing sample of a time scale.
///
/// On the grid `sigma(t_i) = t_{i+1}` and `mu(t_N) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTimeScale<T> {
    points: Vec<T>,
    dense: Vec<bool>,
}

impl<T: Scalar> GridTimeScale<T> {
    /// A grid of isolated points (no dense flags).
    pub fn new(points: Vec<T>) -> Result<Self> {
        let dense = vec![false; points.len()];
        Self::with_flags(points, dense)
    }

    pub fn with_flags(points: Vec<T>, dense: Vec<bool>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::DegenerateScale("grid has no points".into()));
        }
        if dense.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: dense.len(),
            });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidTimeScale("non-finite grid point".into()));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidTimeScale(
                "grid points must be strictly increasing".into(),
            ));
        }
        Ok(GridTimeScale { points, dense })
    }

    /// Number of points, `N + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn point(&self, i: usize) -> T {
        self.points[i]
    }

    pub fn dense_flags(&self) -> &[bool] {
        &self.dense
    }

    /// True when no point was sampled from a continuum.
    pub fn is_discrete(&self) -> bool {
        self.dense.iter().all(|d| !d)
    }

    pub fn start(&self) -> T {
        self.points[0]
    }

    pub fn end(&self) -> T {
        self.points[self.points.len() - 1]
    }

    /// Graininess at index `i`; zero at the last point.
    pub fn mu(&self, i: usize) -> T {
        if i + 1 < self.points.len() {
            self.points[i + 1] - self.points[i]
        } else {
            T::zero()
        }
    }

    pub fn min_mu(&self) -> T {
        (0..self.steps())
            .map(|i| self.mu(i))
            .fold(T::infinity(), T::min)
    }

    /// The grid without its last point.
    pub fn truncate_k(&self) -> Result<Self> {
        if self.points.len() < 2 {
            return Err(Error::DegenerateScale(
                "cannot truncate a single-point grid".into(),
            ));
        }
        let n = self.points.len() - 1;
        Ok(GridTimeScale {
            points: self.points[..n].to_vec(),
            dense: self.dense[..n].to_vec(),
        })
    }

    pub(crate) fn require_steps(&self, min_points: usize) -> Result<()> {
        if self.points.len() < min_points {
            return Err(Error::DegenerateScale(format!(
                "grid has {} point(s), at least {min_points} required",
                self.points.len()
            )));
        }
        Ok(())
    }

    /// Checks that `other` has the same points up to `tol`.
    pub fn check_matches(&self, other: &[T], tol: T) -> Result<()> {
        if other.len() != self.points.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} points, found {}",
                self.points.len(),
                other.len()
            )));
        }
        for (i, (&p, &q)) in self.points.iter().zip(other).enumerate() {
            let scale = T::one().max(p.abs());
            if (p - q).abs() > tol * scale {
                return Err(Error::GridMismatch(format!(
                    "point {i}: expected t = {p}, found {q}"
                )));
            }
        }
        Ok(())
    }
}
