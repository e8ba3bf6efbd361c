//! The shift `(Tf)(t) = f(t + a)` on bounded uniformly continuous
//! `c0`-valued functions, acting on the orbit of `x(t)_n = sin(t / 2^n)`.
//!
//! Only pairwise distances are needed downstream, and those have closed
//! forms. For coordinate `n` and lag `h`,
//!
//! ```text
//! sin((t + h) / 2^n) - sin(t / 2^n) = 2 sin(h / 2^(n+1)) cos((2t + h) / 2^(n+1))
//! ```
//!
//! so the sup over `t` of the coordinate difference is `2 |sin(h / 2^(n+1))|`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqspace::{Scalar, SeqVec, Tail};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Example1Operator {
    pub a: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Orbit,
    /// Orbit of `(T^m - I) x`.
    DiffOrbit { m: u64 },
}

/// Sampling plan for the grid oracle. Each coordinate `n <= n_max` is
/// sampled at `steps` equally spaced points over one period `2 pi 2^n`
/// of its `t`-dependence, shifted by `t_offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub steps: usize,
    pub n_max: usize,
    pub t_offset: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { steps: 4096, n_max: 40, t_offset: 0.0 }
    }
}

/// `sup_n weight(n) |sin(u / 2^(n+1))|` for a constant weight, scanning
/// until the argument enters `[0, pi/2]` where the terms decrease.
fn dyadic_sine_sup(u: f64, mut weight: impl FnMut(usize) -> f64) -> f64 {
    let u = u.abs();
    let mut best: f64 = 0.0;
    let mut n = 0usize;
    loop {
        let arg = u / 2f64.powi(n as i32 + 1);
        best = best.max(weight(n) * arg.sin().abs());
        if arg <= FRAC_PI_2 {
            break;
        }
        n += 1;
    }
    best
}

impl Example1Operator {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Config(format!("shift step must be finite and > 0, got {a}")));
        }
        Ok(Example1Operator { a })
    }

    fn lag(&self, p: u64, q: u64) -> f64 {
        (p.abs_diff(q)) as f64 * self.a
    }

    /// `||T^p x - T^q x||`.
    pub fn orbit_distance(&self, p: u64, q: u64) -> f64 {
        if p == q {
            return 0.0;
        }
        dyadic_sine_sup(self.lag(p, q), |_| 2.0)
    }

    /// `||T^p y - T^q y||` with `y = (T^m - I) x`.
    pub fn diff_orbit_distance_m(&self, p: u64, q: u64, m: u64) -> f64 {
        if p == q || m == 0 {
            return 0.0;
        }
        let h = self.lag(p, q);
        let ma = m as f64 * self.a;
        // Both factors decrease once both arguments are at most pi/2.
        let u = h.max(ma);
        let mut best: f64 = 0.0;
        let mut n = 0usize;
        loop {
            let s = 2f64.powi(n as i32 + 1);
            best = best.max(4.0 * (ma / s).sin().abs() * (h / s).sin().abs());
            if u / s <= FRAC_PI_2 {
                break;
            }
            n += 1;
        }
        best
    }

    pub fn diff_orbit_distance(&self, p: u64, q: u64) -> f64 {
        self.diff_orbit_distance_m(p, q, 1)
    }

    pub fn distance(&self, which: Which, p: u64, q: u64) -> f64 {
        match which {
            Which::Orbit => self.orbit_distance(p, q),
            Which::DiffOrbit { m } => self.diff_orbit_distance_m(p, q, m),
        }
    }

    /// `sup_t |(T^m - I) x (t)_n| = 2 |sin(m a / 2^(n+1))|`.
    pub fn diff_amplitude(&self, m: u64, n: usize) -> f64 {
        2.0 * (m as f64 * self.a / 2f64.powi(n as i32 + 1)).sin().abs()
    }

    /// Decreasing envelope `tau(n) = sup_{k >= n} 2 |sin(m a / 2^(k+1))|`.
    pub fn diff_envelope(&self, m: u64, n: usize) -> f64 {
        let ma = m as f64 * self.a;
        let mut best: f64 = 0.0;
        let mut k = n;
        loop {
            let arg = ma / 2f64.powi(k as i32 + 1);
            best = best.max(2.0 * arg.sin().abs());
            if arg <= FRAC_PI_2 {
                break;
            }
            k += 1;
        }
        best
    }

    /// Coordinate amplitudes of every member `T^p (T^m - I) x` as a sequence
    /// vector: coordinate `n` holds `sup_t |.|`, identical for all `p`
    /// because the shift only translates `t`.
    pub fn diff_amplitude_profile(&self, m: u64, d: usize) -> SeqVec {
        let head = (0..d.max(1)).map(|n| Scalar::new(self.diff_amplitude(m, n), 0.0)).collect();
        SeqVec::from_parts(head, Tail::NullEnvelope { bound: self.diff_envelope(m, d.max(1)) })
    }

    /// Sampled lower bound for the distance, evaluating the sine
    /// coordinates directly on a grid in `t`.
    pub fn grid_oracle(&self, p: u64, q: u64, which: Which, grid: GridSpec) -> f64 {
        if p == q {
            return 0.0;
        }
        let a = self.a;
        let (pa, qa) = (p as f64 * a, q as f64 * a);
        let coord = |t: f64, shift: f64, n: usize| -> f64 {
            let s = 2f64.powi(n as i32);
            match which {
                Which::Orbit => ((t + shift) / s).sin(),
                Which::DiffOrbit { m } => ((t + shift + m as f64 * a) / s).sin() - ((t + shift) / s).sin(),
            }
        };
        let h = (pa - qa).abs();
        let mut best: f64 = 0.0;
        for n in 0..=grid.n_max {
            let s = 2f64.powi(n as i32);
            // |sin A - sin B| <= |A - B|: skip coordinates that cannot beat
            // the running maximum.
            let lip = match which {
                Which::Orbit => h / s,
                Which::DiffOrbit { m } => (2.0 * h / s).min(2.0 * m as f64 * a / s),
            };
            if lip.min(2.0) <= best {
                continue;
            }
            let period = 2.0 * PI * s;
            for j in 0..grid.steps {
                let t = grid.t_offset + period * j as f64 / grid.steps as f64;
                best = best.max((coord(t, pa, n) - coord(t, qa, n)).abs());
            }
        }
        best
    }
}
