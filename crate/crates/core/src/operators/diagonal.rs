//! Diagonal multiplication operators `T(x_n) = (a_n x_n)` on `c` and `c0`.
//!
//! The dyadic rule `a_n = root * exp(2 pi i num / 2^(n+1))` reduces every
//! power `a_n^k` to a pair of integer residues (`k * root.num mod root.den`
//! and `k * num mod 2^(n+1)`), so phases never accumulate rounding error and
//! equal residues give bit-identical values.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqspace::{Scalar, SeqVec, Tail};

/// `exp(2 pi i num / den)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RootOfUnity {
    pub num: i64,
    pub den: u64,
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity { num: 0, den: 1 };

    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Config("root of unity denominator must be >= 1".into()));
        }
        Ok(RootOfUnity { num: num.rem_euclid(den as i64), den })
    }

    fn residue(&self, k: u64) -> u64 {
        ((k as i128 * self.num as i128).rem_euclid(self.den as i128)) as u64
    }

    pub fn pow(&self, k: u64) -> Scalar {
        phase_value(PhaseKey { root: self.residue(k), dyadic: 0, exp: 0 }, self.den)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DiagonalRule {
    /// `a_n = root * exp(2 pi i num / 2^(n+1))`, limit `root`.
    DyadicPhase { num: i64, root: RootOfUnity },
    /// Explicit head entries; beyond them `|a_n - limit| <= tail_drift`.
    /// With `unimodular` set, `|a_n| = 1` is asserted for every `n`.
    Explicit { entries: Vec<Scalar>, tail_drift: f64, unimodular: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalOperator {
    pub rule: DiagonalRule,
    pub limit_b: Scalar,
}

/// Exact description of `a_n^k`: root residue plus dyadic residue modulo
/// `2^exp` (raw product when the modulus does not fit in 126 bits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhaseKey {
    root: u64,
    dyadic: i128,
    exp: u32,
}

fn dyadic_residue(kn: i128, exp: u32) -> i128 {
    if exp <= 126 {
        kn.rem_euclid(1i128 << exp)
    } else {
        kn
    }
}

fn dyadic_fraction(r: i128, exp: u32) -> f64 {
    (r as f64) * 2f64.powi(-(exp as i32))
}

fn phase_value(key: PhaseKey, den: u64) -> Scalar {
    // Quarter turns are produced exactly.
    let quarter_root = (4 * key.root as u128).is_multiple_of(den as u128);
    let quarter_dyadic = if key.exp <= 2 {
        true
    } else if key.exp <= 126 {
        key.dyadic & ((1i128 << (key.exp - 2)) - 1) == 0
    } else {
        key.dyadic == 0
    };
    if quarter_root && quarter_dyadic {
        let q1 = (4 * key.root as u128 / den as u128) as i128;
        let q2 = if key.exp == 0 {
            0
        } else if key.exp <= 126 {
            (key.dyadic << 2) >> key.exp
        } else {
            0
        };
        return match (q1 + q2).rem_euclid(4) {
            0 => Scalar::new(1.0, 0.0),
            1 => Scalar::new(0.0, 1.0),
            2 => Scalar::new(-1.0, 0.0),
            _ => Scalar::new(0.0, -1.0),
        };
    }
    let mut f = key.root as f64 / den as f64 + dyadic_fraction(key.dyadic, key.exp);
    f -= f.round();
    Scalar::from_polar(1.0, 2.0 * PI * f)
}

fn powu(z: Scalar, mut k: u64) -> Scalar {
    let mut base = z;
    let mut acc = Scalar::new(1.0, 0.0);
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

impl DiagonalOperator {
    pub fn dyadic(num: i64, root: RootOfUnity) -> Result<Self> {
        if num == 0 {
            return Err(Error::Config("dyadic rule needs num != 0".into()));
        }
        Ok(DiagonalOperator { rule: DiagonalRule::DyadicPhase { num, root }, limit_b: root.pow(1) })
    }

    /// `a_n = (-1)^sign_flip * exp(2 pi i num / 2^(n+1))`.
    pub fn dyadic_signed(num: i64, sign_flip: bool) -> Result<Self> {
        let root = if sign_flip { RootOfUnity::new(1, 2)? } else { RootOfUnity::ONE };
        Self::dyadic(num, root)
    }

    pub fn explicit(entries: Vec<Scalar>, limit_b: Scalar, tail_drift: f64, unimodular: bool) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("explicit diagonal needs at least one entry".into()));
        }
        if !(tail_drift.is_finite() && tail_drift >= 0.0) {
            return Err(Error::Config("tail_drift must be finite and >= 0".into()));
        }
        if entries.iter().chain(std::iter::once(&limit_b)).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Config("diagonal entries must be finite".into()));
        }
        if unimodular {
            if let Some(n) = entries.iter().position(|z| (z.norm() - 1.0).abs() > 1e-12) {
                return Err(Error::Config(format!("entry {n} is not unimodular")));
            }
            if (limit_b.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Config("limit is not unimodular".into()));
            }
        }
        Ok(DiagonalOperator { rule: DiagonalRule::Explicit { entries, tail_drift, unimodular }, limit_b })
    }

    /// The inverse rule (negated phases); only for unimodular dyadic rules.
    pub fn inverse(&self) -> Option<DiagonalOperator> {
        match self.rule {
            DiagonalRule::DyadicPhase { num, root } => {
                let inv_root = RootOfUnity::new(-root.num, root.den).ok()?;
                DiagonalOperator::dyadic(-num, inv_root).ok()
            }
            DiagonalRule::Explicit { .. } => None,
        }
    }

    pub fn is_unimodular(&self) -> bool {
        match &self.rule {
            DiagonalRule::DyadicPhase { .. } => true,
            DiagonalRule::Explicit { unimodular, .. } => *unimodular,
        }
    }

    pub fn is_dyadic(&self) -> bool {
        matches!(self.rule, DiagonalRule::DyadicPhase { .. })
    }

    /// Number of coordinates for which the entries are known exactly
    /// (`None`: all of them).
    pub fn known_len(&self) -> Option<usize> {
        match &self.rule {
            DiagonalRule::DyadicPhase { .. } => None,
            DiagonalRule::Explicit { entries, .. } => Some(entries.len()),
        }
    }

    fn key(&self, n: usize, k: u64) -> Option<PhaseKey> {
        match self.rule {
            DiagonalRule::DyadicPhase { num, root } => {
                let exp = n as u32 + 1;
                Some(PhaseKey { root: root.residue(k), dyadic: dyadic_residue(k as i128 * num as i128, exp), exp })
            }
            DiagonalRule::Explicit { .. } => None,
        }
    }

    fn root_den(&self) -> u64 {
        match self.rule {
            DiagonalRule::DyadicPhase { root, .. } => root.den,
            DiagonalRule::Explicit { .. } => 1,
        }
    }

    pub fn entry(&self, n: usize) -> Scalar {
        self.entry_power(n, 1)
    }

    /// `a_n^k`. For explicit rules `n` must be below the entry count.
    pub fn entry_power(&self, n: usize, k: u64) -> Scalar {
        match &self.rule {
            DiagonalRule::DyadicPhase { .. } => phase_value(self.key(n, k).unwrap(), self.root_den()),
            DiagonalRule::Explicit { entries, .. } => powu(entries[n], k),
        }
    }

    /// `b^k`.
    pub fn limit_power(&self, k: u64) -> Scalar {
        match self.rule {
            DiagonalRule::DyadicPhase { root, .. } => root.pow(k),
            DiagonalRule::Explicit { .. } => powu(self.limit_b, k),
        }
    }

    /// `|a_n - 1| == 0` decided exactly for dyadic rules.
    pub fn entry_is_one(&self, n: usize) -> bool {
        self.entry(n) == Scalar::new(1.0, 0.0)
    }

    /// Upper bound on `sup_{n >= d} |a_n^k|`.
    fn tail_modulus(&self, k: u64) -> f64 {
        match &self.rule {
            DiagonalRule::DyadicPhase { .. } => 1.0,
            DiagonalRule::Explicit { tail_drift, unimodular, .. } => {
                if *unimodular {
                    1.0
                } else {
                    (self.limit_b.norm() + tail_drift).powf(k as f64)
                }
            }
        }
    }

    /// Upper bound on `sup_{n >= d} |a_n^k - b^k|`.
    pub fn tail_drift(&self, d: usize, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match &self.rule {
            DiagonalRule::DyadicPhase { num, .. } => {
                let kn = k as i128 * *num as i128;
                let mag = kn.unsigned_abs();
                let mut best: f64 = 0.0;
                let mut n = d;
                loop {
                    let exp = n as u32 + 1;
                    // Once |kn| <= 2^n the reduced fraction is kn / 2^(n+1) and
                    // the drift decreases from here on.
                    let settled = n >= 127 || mag <= (1u128 << n);
                    let f = dyadic_fraction(dyadic_residue(kn, exp), exp);
                    let f = f - f.round();
                    best = best.max(2.0 * (PI * f).sin().abs());
                    if settled {
                        break;
                    }
                    n += 1;
                }
                best.min(2.0)
            }
            DiagonalRule::Explicit { tail_drift, unimodular, .. } => {
                let b = self.limit_b.norm();
                let big_a = b + tail_drift;
                if *unimodular {
                    (k as f64 * tail_drift).min(2.0)
                } else {
                    let lip = k as f64 * tail_drift * big_a.max(b).powf(k as f64 - 1.0);
                    lip.min(big_a.powf(k as f64) + b.powf(k as f64))
                }
            }
        }
    }

    fn prepare(&self, v: &SeqVec) -> SeqVec {
        match self.known_len() {
            Some(len) if v.dim() > len => v.truncate(len),
            _ => v.clone(),
        }
    }

    pub fn apply_power(&self, k: u64, v: &SeqVec) -> SeqVec {
        self.combination(&[(k, Scalar::new(1.0, 0.0))], v)
    }

    /// `sum_j c_j T^{k_j} v`, evaluated with terms merged by exponent and,
    /// per coordinate, by exact phase.
    pub fn combination(&self, terms: &[(u64, Scalar)], v: &SeqVec) -> SeqVec {
        let v = self.prepare(v);
        let mut merged: BTreeMap<u64, Scalar> = BTreeMap::new();
        for &(k, c) in terms {
            *merged.entry(k).or_insert(Scalar::new(0.0, 0.0)) += c;
        }
        merged.retain(|_, c| *c != Scalar::new(0.0, 0.0));
        let d = v.dim();
        let zero = Scalar::new(0.0, 0.0);
        let mut head = vec![zero; d];
        for (n, slot) in head.iter_mut().enumerate() {
            let x = v.head()[n];
            if x == zero {
                continue;
            }
            let factor = if self.is_dyadic() {
                let mut by_phase: BTreeMap<PhaseKey, Scalar> = BTreeMap::new();
                for (&k, &c) in &merged {
                    *by_phase.entry(self.key(n, k).unwrap()).or_insert(zero) += c;
                }
                by_phase
                    .into_iter()
                    .filter(|(_, c)| *c != zero)
                    .map(|(key, c)| c * phase_value(key, self.root_den()))
                    .fold(zero, |acc, t| acc + t)
            } else {
                merged.iter().map(|(&k, &c)| c * self.entry_power(n, k)).fold(zero, |acc, t| acc + t)
            };
            *slot = factor * x;
        }
        let tail = v.tail();
        let beta = tail.bound();
        let lim = tail.center();
        let mut bound = 0.0;
        for (&k, &c) in &merged {
            bound += c.norm() * (self.tail_modulus(k) * beta + self.tail_drift(d, k) * lim.norm());
        }
        let new_tail = match tail {
            Tail::NullEnvelope { .. } => Tail::NullEnvelope { bound },
            Tail::ConvergentLimit { .. } => {
                let limit_factor = if self.is_dyadic() {
                    let mut by_root: BTreeMap<u64, Scalar> = BTreeMap::new();
                    if let DiagonalRule::DyadicPhase { root, .. } = self.rule {
                        for (&k, &c) in &merged {
                            *by_root.entry(root.residue(k)).or_insert(zero) += c;
                        }
                    }
                    by_root
                        .into_iter()
                        .filter(|(_, c)| *c != zero)
                        .map(|(r, c)| c * phase_value(PhaseKey { root: r, dyadic: 0, exp: 0 }, self.root_den()))
                        .fold(zero, |acc, t| acc + t)
                } else {
                    merged.iter().map(|(&k, &c)| c * self.limit_power(k)).fold(zero, |acc, t| acc + t)
                };
                Tail::ConvergentLimit { limit: limit_factor * lim, bound }
            }
        };
        SeqVec::from_parts(head, new_tail)
    }

    /// Cesaro mean `(1/N) sum_{j<N} T^j v` via the closed-form geometric sum.
    pub fn cesaro_mean(&self, v: &SeqVec, big_n: u64) -> SeqVec {
        let v = self.prepare(v);
        let nf = big_n as f64;
        let one = Scalar::new(1.0, 0.0);
        let geo = |a: Scalar, a_n: Scalar| -> Scalar {
            if a == one {
                one
            } else {
                (a_n - one) / (nf * (a - one))
            }
        };
        let head = v
            .head()
            .iter()
            .enumerate()
            .map(|(n, x)| geo(self.entry(n), self.entry_power(n, big_n)) * x)
            .collect();
        let d = v.dim();
        let tail = v.tail();
        // |c_n(N) - c_b(N)| <= max_{j<N} |a_n^j - b^j|, monotone in j on the
        // settled range.
        let drift = if big_n <= 1 {
            0.0
        } else {
            match self.rule {
                DiagonalRule::DyadicPhase { num, .. } => {
                    let top = (big_n - 1) as u128 * num.unsigned_abs() as u128;
                    if d >= 127 || top <= (1u128 << d) {
                        self.tail_drift(d, big_n - 1)
                    } else {
                        2.0
                    }
                }
                DiagonalRule::Explicit { unimodular, .. } => {
                    if unimodular {
                        self.tail_drift(d, big_n - 1)
                    } else {
                        (0..big_n).map(|j| self.tail_drift(d, j)).fold(0.0, f64::max)
                    }
                }
            }
        };
        let modulus = (0..big_n.min(64)).map(|j| self.tail_modulus(j)).fold(1.0, f64::max);
        let bound = modulus * tail.bound() + drift * tail.center().norm();
        let new_tail = match tail {
            Tail::NullEnvelope { .. } => Tail::NullEnvelope { bound },
            Tail::ConvergentLimit { limit, .. } => {
                let b = self.limit_b;
                let factor = geo(b, self.limit_power(big_n));
                Tail::ConvergentLimit { limit: factor * limit, bound }
            }
        };
        SeqVec::from_parts(head, new_tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    #[test]
    fn first_entry_is_minus_one() {
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        assert_eq!(t.entry(0), c(-1.0, 0.0));
        assert_eq!(t.entry(1), c(0.0, 1.0));
        let e0 = SeqVec::basis(0, 4);
        let img = t.apply_power(1, &e0);
        assert_eq!(img.head()[0], c(-1.0, 0.0));
    }

    #[test]
    fn power_of_two_flips_coordinate() {
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        for k in 0..40 {
            assert_eq!(t.entry_power(k, 1u64 << k), c(-1.0, 0.0), "k={k}");
        }
    }

    #[test]
    fn huge_exponents_stay_exact() {
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        let k = (1u64 << 62) + (1u64 << 61);
        // 2^62 + 2^61 = 3 * 2^61: coordinate 61 turns by 3 * pi.
        assert_eq!(t.entry_power(61, k), c(-1.0, 0.0));
        assert_eq!(t.entry_power(60, k), c(1.0, 0.0));
    }

    #[test]
    fn semigroup_law_is_bitwise() {
        let t = DiagonalOperator::dyadic_signed(3, true).unwrap();
        let v = SeqVec::ones(20);
        let a = t.apply_power(37 + 91, &v);
        let b = t.apply_power(37, &t.apply_power(91, &v));
        // Both routes reduce to the same residues only through the merged
        // combination; compose through coordinates and compare values.
        for n in 0..20 {
            assert!((a.head()[n] - b.head()[n]).norm() < 1e-15);
        }
        let exact = t.combination(&[(37 + 91, c(1.0, 0.0))], &v);
        assert_eq!(exact, a);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        let inv = t.inverse().unwrap();
        for n in 0..30 {
            for k in [1u64, 5, 1000, 1 << 40] {
                let prod = t.entry_power(n, k) * inv.entry_power(n, k);
                assert!((prod - c(1.0, 0.0)).norm() < 1e-15);
            }
        }
        // Exact residues: T^k T^{-k} on coordinate n has residue 0.
        let key_sum = t.key(5, 77).unwrap().dyadic + inv.key(5, 77).unwrap().dyadic;
        assert_eq!(key_sum.rem_euclid(1 << 6), 0);
    }

    #[test]
    fn tail_drift_matches_brute_force() {
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        for d in [4usize, 10, 20] {
            for k in [1u64, 3, 17, 1000, 123_456] {
                let brute = (d..d + 200)
                    .map(|n| (t.entry_power(n, k) - t.limit_power(k)).norm())
                    .fold(0.0, f64::max);
                let closed = t.tail_drift(d, k);
                assert!(closed + 1e-15 >= brute, "d={d} k={k}: {closed} < {brute}");
                assert!(closed <= brute + 1e-12, "d={d} k={k}: {closed} vs {brute}");
            }
        }
    }

    #[test]
    fn combination_cancels_exactly() {
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        let v = SeqVec::ones(48);
        let terms = [(10u64, c(1.0, 0.0)), (3, c(-1.0, 0.0)), (10, c(-1.0, 0.0)), (3, c(1.0, 0.0))];
        let z = t.combination(&terms, &v);
        assert!(z.is_exact_zero());
    }

    #[test]
    fn difference_of_ones_orbit() {
        // (I - T) 1 has coordinates 1 - a_n and limit 0.
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        let v = SeqVec::ones(8);
        let w = t.combination(&[(0, c(1.0, 0.0)), (1, c(-1.0, 0.0))], &v);
        for n in 0..8 {
            let expect = c(1.0, 0.0) - Scalar::from_polar(1.0, 2.0 * PI / 2f64.powi(n as i32 + 1));
            assert!((w.head()[n] - expect).norm() < 1e-15);
        }
        assert_eq!(w.tail().center(), c(0.0, 0.0));
    }

    #[test]
    fn explicit_matches_dyadic_on_head() {
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        let entries: Vec<Scalar> = (0..10).map(|n| t.entry(n)).collect();
        let e = DiagonalOperator::explicit(entries, c(1.0, 0.0), t.tail_drift(10, 1), true).unwrap();
        let v = SeqVec::ones(10);
        let a = t.apply_power(1, &v);
        let b = e.apply_power(1, &v);
        assert_eq!(a.head(), b.head());
    }

    #[test]
    fn cesaro_closed_form_at_alternating_coordinate() {
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        let m = t.cesaro_mean(&SeqVec::ones(16), 64);
        assert_eq!(m.head()[0], c(0.0, 0.0));
        assert_eq!(m.tail().center(), c(1.0, 0.0));
    }
}
