//! Sup-norm arithmetic on truncated elements of `c0` and `c`.
//!
//! A [`SeqVec`] stores the first `d` coordinates exactly and describes
//! everything beyond them by a [`Tail`]: either a null envelope
//! (`sup_{k>=d} |x_k| <= bound`) or a convergent tail around a known limit
//! (`sup_{k>=d} |x_k - limit| <= bound`, and `x_k -> limit`). A `SeqVec`
//! therefore stands for a *set* of sequences, and norms and distances come
//! back as [`NormInterval`]s enclosing the value for every member of the set.
//!
//! Coordinates are 0-indexed.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Scalar = Complex64;

/// Default number of explicitly stored coordinates.
pub const DEFAULT_HEAD_DIM: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    NullEnvelope { bound: f64 },
    ConvergentLimit { limit: Scalar, bound: f64 },
}

impl Tail {
    pub fn bound(&self) -> f64 {
        match *self {
            Tail::NullEnvelope { bound } | Tail::ConvergentLimit { bound, .. } => bound,
        }
    }

    /// The value the tail coordinates approach (0 for a null envelope).
    pub fn center(&self) -> Scalar {
        match *self {
            Tail::NullEnvelope { .. } => Scalar::new(0.0, 0.0),
            Tail::ConvergentLimit { limit, .. } => limit,
        }
    }

    /// Upper bound on `sup_{k>=d} |x_k|`.
    pub fn sup_hi(&self) -> f64 {
        self.center().norm() + self.bound()
    }

    /// True when every represented sequence is a null sequence.
    pub fn is_null(&self) -> bool {
        self.center() == Scalar::new(0.0, 0.0)
    }

    fn with_bound(self, bound: f64) -> Tail {
        match self {
            Tail::NullEnvelope { .. } => Tail::NullEnvelope { bound },
            Tail::ConvergentLimit { limit, .. } => Tail::ConvergentLimit { limit, bound },
        }
    }
}

/// Closed interval `[lo, hi]` enclosing a sup-norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormInterval {
    pub lo: f64,
    pub hi: f64,
}

impl NormInterval {
    pub fn exact(v: f64) -> Self {
        NormInterval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn encloses(&self, other: &NormInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeqVec {
    head: Vec<Scalar>,
    tail: Tail,
}

fn finite(z: Scalar) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl SeqVec {
    pub fn new(head: Vec<Scalar>, tail: Tail) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::Config("sequence head must have at least one coordinate".into()));
        }
        if let Some(k) = head.iter().position(|z| !finite(*z)) {
            return Err(Error::Config(format!("head coordinate {k} is not finite")));
        }
        let bound = tail.bound();
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::Config(format!("tail bound must be finite and >= 0, got {bound}")));
        }
        if !finite(tail.center()) {
            return Err(Error::Config("tail limit is not finite".into()));
        }
        Ok(SeqVec { head, tail })
    }

    pub(crate) fn from_parts(head: Vec<Scalar>, tail: Tail) -> Self {
        debug_assert!(!head.is_empty());
        SeqVec { head, tail }
    }

    pub fn zeros(d: usize) -> Self {
        SeqVec::from_parts(vec![Scalar::new(0.0, 0.0); d.max(1)], Tail::NullEnvelope { bound: 0.0 })
    }

    /// The constant sequence `(1, 1, ...)`.
    pub fn ones(d: usize) -> Self {
        SeqVec::from_parts(
            vec![Scalar::new(1.0, 0.0); d.max(1)],
            Tail::ConvergentLimit { limit: Scalar::new(1.0, 0.0), bound: 0.0 },
        )
    }

    /// The standard basis vector `e_k`; the head is widened to include `k`.
    pub fn basis(k: usize, d: usize) -> Self {
        let mut head = vec![Scalar::new(0.0, 0.0); d.max(k + 1)];
        head[k] = Scalar::new(1.0, 0.0);
        SeqVec::from_parts(head, Tail::NullEnvelope { bound: 0.0 })
    }

    /// A finitely supported vector (exact, zero tail).
    pub fn finite(coords: Vec<Scalar>) -> Result<Self> {
        SeqVec::new(coords, Tail::NullEnvelope { bound: 0.0 })
    }

    pub fn head(&self) -> &[Scalar] {
        &self.head
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn dim(&self) -> usize {
        self.head.len()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.tail.bound() == 0.0 && self.tail.is_null() && self.head.iter().all(|z| *z == Scalar::new(0.0, 0.0))
    }

    /// Certified enclosure of the sup-norm of every represented sequence.
    pub fn sup_norm(&self) -> NormInterval {
        let head_max = self.head.iter().map(|z| z.norm()).fold(0.0, f64::max);
        // A convergent tail has sup >= |limit|.
        let tail_lo = self.tail.center().norm();
        let tail_hi = self.tail.sup_hi();
        NormInterval { lo: head_max.max(tail_lo), hi: head_max.max(tail_hi) }
    }

    /// `alpha * self + beta * other`.
    ///
    /// Heads of different length are aligned by exact padding when the
    /// shorter tail has zero bound; otherwise the longer head is truncated.
    pub fn combine(alpha: Scalar, v: &SeqVec, beta: Scalar, w: &SeqVec) -> SeqVec {
        let (v, w) = align(v, w);
        let head = v
            .head
            .iter()
            .zip(&w.head)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        let bound = alpha.norm() * v.tail.bound() + beta.norm() * w.tail.bound();
        let tail = match (v.tail, w.tail) {
            (Tail::NullEnvelope { .. }, Tail::NullEnvelope { .. }) => Tail::NullEnvelope { bound },
            _ => Tail::ConvergentLimit { limit: alpha * v.tail.center() + beta * w.tail.center(), bound },
        };
        SeqVec::from_parts(head, tail)
    }

    pub fn sub(&self, other: &SeqVec) -> SeqVec {
        SeqVec::combine(Scalar::new(1.0, 0.0), self, Scalar::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &SeqVec) -> SeqVec {
        SeqVec::combine(Scalar::new(1.0, 0.0), self, Scalar::new(1.0, 0.0), other)
    }

    pub fn scale(&self, alpha: Scalar) -> SeqVec {
        let head = self.head.iter().map(|z| alpha * z).collect();
        let bound = alpha.norm() * self.tail.bound();
        let tail = match self.tail {
            Tail::NullEnvelope { .. } => Tail::NullEnvelope { bound },
            Tail::ConvergentLimit { limit, .. } => Tail::ConvergentLimit { limit: alpha * limit, bound },
        };
        SeqVec::from_parts(head, tail)
    }

    pub fn dist(&self, other: &SeqVec) -> NormInterval {
        self.sub(other).sup_norm()
    }

    /// Keep the first `d_new` coordinates and fold the rest into the tail.
    pub fn truncate(&self, d_new: usize) -> SeqVec {
        let d_new = d_new.clamp(1, self.dim());
        if d_new == self.dim() {
            return self.clone();
        }
        let center = self.tail.center();
        let dropped = self.head[d_new..].iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
        let bound = self.tail.bound().max(dropped);
        SeqVec::from_parts(self.head[..d_new].to_vec(), self.tail.with_bound(bound))
    }

    /// Widen the head to `d_new` coordinates. Only possible without loss
    /// when the tail bound is zero (all tail coordinates equal the center).
    pub fn extend_exact(&self, d_new: usize) -> Option<SeqVec> {
        if d_new <= self.dim() {
            return Some(self.clone());
        }
        if self.tail.bound() != 0.0 {
            return None;
        }
        let mut head = self.head.clone();
        head.resize(d_new, self.tail.center());
        Some(SeqVec::from_parts(head, self.tail))
    }
}

fn align<'a>(v: &'a SeqVec, w: &'a SeqVec) -> (std::borrow::Cow<'a, SeqVec>, std::borrow::Cow<'a, SeqVec>) {
    use std::borrow::Cow;
    match v.dim().cmp(&w.dim()) {
        std::cmp::Ordering::Equal => (Cow::Borrowed(v), Cow::Borrowed(w)),
        std::cmp::Ordering::Less => match v.extend_exact(w.dim()) {
            Some(v2) => (Cow::Owned(v2), Cow::Borrowed(w)),
            None => (Cow::Borrowed(v), Cow::Owned(w.truncate(v.dim()))),
        },
        std::cmp::Ordering::Greater => match w.extend_exact(v.dim()) {
            Some(w2) => (Cow::Borrowed(v), Cow::Owned(w2)),
            None => (Cow::Owned(v.truncate(w.dim())), Cow::Borrowed(w)),
        },
    }
}

/// Free-function form of [`SeqVec::sup_norm`].
pub fn sup_norm_interval(v: &SeqVec) -> NormInterval {
    v.sup_norm()
}

/// Free-function form of [`SeqVec::dist`].
pub fn dist_interval(v: &SeqVec, w: &SeqVec) -> NormInterval {
    v.dist(w)
}
