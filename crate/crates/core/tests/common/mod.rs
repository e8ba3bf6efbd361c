//! Oracles shared by the integration tests. They compute the same
//! quantities as the library by unrelated routes: integer phase arithmetic
//! for the dyadic diagonals, naive repeated multiplication for matrices.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DVector;
use orbitlab::linalg::{CMatrix, CVector};
use orbitlab::seqspace::Scalar;

/// Coordinates beyond this index lie within `2^-58` of the limit for every
/// exponent below `2^62`.
pub const N_MAX: u32 = 120;

/// `a_n = exp(2 pi i r / q) exp(2 pi i / 2^(n+1))`.
#[derive(Clone, Copy, Debug)]
pub struct DyadicOracle {
    pub r: u128,
    pub q: u128,
}

impl DyadicOracle {
    pub fn plain() -> Self {
        DyadicOracle { r: 0, q: 1 }
    }

    pub fn rooted(q: u64) -> Self {
        DyadicOracle { r: 1, q: q as u128 }
    }

    /// Phase of `a_n^k` as `num / den` turns, `0 <= num < den`.
    fn phase(&self, n: u32, k: u64) -> (u128, u128) {
        let p = 1u128 << (n + 1);
        let den = self.q * p;
        let k = k as u128;
        let num = ((k % self.q) * self.r % self.q) * p + self.q * (k % p);
        (num % den, den)
    }

    fn chord_turns(diff: u128, den: u128) -> f64 {
        let d = diff % den;
        let d = d.min(den - d);
        2.0 * (PI * d as f64 / den as f64).sin()
    }

    /// `|a_n^i - a_n^j|`.
    pub fn chord(&self, n: u32, i: u64, j: u64) -> f64 {
        let (a, den) = self.phase(n, i);
        let (b, _) = self.phase(n, j);
        Self::chord_turns(a + den - b, den)
    }

    /// `lim_n |a_n^i - a_n^j|`.
    pub fn chord_limit(&self, i: u64, j: u64) -> f64 {
        let a = (i as u128 % self.q) * self.r % self.q;
        let b = (j as u128 % self.q) * self.r % self.q;
        Self::chord_turns(a + self.q - b, self.q)
    }

    /// Enclosure of `||T^i y - T^j y||` for `y = 1` (`step = None`) or
    /// `y = (T^s - I) 1` (`step = Some(s)`).
    pub fn distance(&self, step: Option<u64>, i: u64, j: u64) -> (f64, f64) {
        let factor = |n: Option<u32>| match (step, n) {
            (None, _) => 1.0,
            (Some(s), Some(n)) => self.chord(n, s, 0),
            (Some(s), None) => self.chord_limit(s, 0),
        };
        let mut lo = self.chord_limit(i, j) * factor(None);
        for n in 0..=N_MAX {
            lo = lo.max(self.chord(n, i, j) * factor(Some(n)));
        }
        (lo, lo + 1e-12)
    }

    /// `a_n^k - 1`, evaluated from the signed phase for accuracy.
    pub fn minus_one(&self, n: u32, k: u64) -> Scalar {
        let (num, den) = self.phase(n, k);
        let signed = if num > den / 2 { -((den - num) as f64) } else { num as f64 };
        let th = 2.0 * PI * signed / den as f64;
        let half = (th / 2.0).sin();
        Scalar::new(-2.0 * half * half, th.sin())
    }
}

/// `x, T x, ..., T^{len-1} x` by repeated multiplication.
pub fn naive_orbit(t: &CMatrix, x: &CVector, len: usize) -> Vec<CVector> {
    let mut out = Vec::with_capacity(len);
    let mut v = x.clone();
    for _ in 0..len {
        let next = t * &v;
        out.push(v);
        v = next;
    }
    out
}

pub fn inf_norm(v: &DVector<Scalar>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
