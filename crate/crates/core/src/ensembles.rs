//! Random power-bounded matrices `T = S (U + N) S^{-1}` with a known
//! reversible/stable splitting, for construct-then-recover testing.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{orthonormalize, schur, singular_values, CMatrix};
use crate::operators::MatrixOperator;
use crate::seqspace::Scalar;

/// Minimal angular gap between unitary eigenvalues.
const PHASE_GAP: f64 = 0.2;
pub const MAX_COND: f64 = 10.0;
pub const STABLE_RADIUS: f64 = 0.9;

pub struct Constructed {
    pub operator: MatrixOperator,
    /// Orthonormal basis of the span of the first `rv_dim` columns of `S`.
    pub rv_basis: CMatrix,
    pub st_basis: CMatrix,
    pub rv_dim: usize,
    pub st_dim: usize,
    pub cond_s: f64,
    /// A peripheral Jordan block was injected; the operator is not power-bounded.
    pub defective: bool,
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Scalar::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix the phases of R's diagonal so that Q is Haar distributed.
    let phases = CMatrix::from_fn(n, n, |i, j| if i == j { r[(i, i)] / r[(i, i)].norm() } else { Scalar::new(0.0, 0.0) });
    q * phases
}

/// Unit-modulus eigenvalues pairwise at least `PHASE_GAP` apart in angle.
fn spaced_phases<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let mut th: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        th.sort_by(f64::total_cmp);
        let wrap = th.first().map_or(0.0, |f| f + std::f64::consts::TAU) - th.last().copied().unwrap_or(0.0);
        if k < 2 || (th.windows(2).all(|w| w[1] - w[0] >= PHASE_GAP) && wrap >= PHASE_GAP) {
            return th;
        }
    }
}

fn random_stable<R: Rng>(rng: &mut R, k: usize) -> CMatrix {
    let g = gaussian_matrix(rng, k, k);
    let (_, tri) = schur(&g);
    let rho = tri.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let target = rng.random_range(0.1..STABLE_RADIUS);
    if rho == 0.0 {
        g
    } else {
        g * Scalar::new(target / rho, 0.0)
    }
}

/// Random `S` with condition number in `[1, MAX_COND]`.
fn random_similarity<R: Rng>(rng: &mut R, n: usize) -> (CMatrix, f64) {
    let q1 = random_unitary(rng, n);
    let q2 = random_unitary(rng, n);
    let kappa = rng.random_range(1.0..MAX_COND);
    let sig = CMatrix::from_fn(n, n, |i, j| {
        if i != j {
            Scalar::new(0.0, 0.0)
        } else if n == 1 {
            Scalar::new(1.0, 0.0)
        } else {
            Scalar::new(kappa.powf(i as f64 / (n - 1) as f64), 0.0)
        }
    });
    let s = q1 * sig * q2;
    let sv = singular_values(&s);
    let cond = sv[0] / sv[sv.len() - 1];
    (s, cond)
}

/// `rv_dim` in `1..=4`, `st_dim` in `0..=4`, total at most `max_dim`.
pub fn random_power_bounded<R: Rng>(rng: &mut R, max_dim: usize, inject_jordan: bool) -> Constructed {
    let max_dim = max_dim.max(if inject_jordan { 2 } else { 1 });
    let lo = if inject_jordan { 2 } else { 1 };
    let rv_dim = rng.random_range(lo..=4.min(max_dim));
    let st_dim = rng.random_range(0..=4.min(max_dim - rv_dim));
    let n = rv_dim + st_dim;

    let th = spaced_phases(rng, rv_dim);
    let mut u = CMatrix::zeros(rv_dim, rv_dim);
    for (i, t) in th.iter().enumerate() {
        u[(i, i)] = Scalar::from_polar(1.0, *t);
    }
    if inject_jordan {
        // Defective unimodular eigenvalue: a 2x2 Jordan block.
        u[(1, 1)] = u[(0, 0)];
        u[(0, 1)] = Scalar::new(1.0, 0.0);
    } else {
        let v = random_unitary(rng, rv_dim);
        u = &v * u * v.adjoint();
    }
    let mut block = CMatrix::zeros(n, n);
    block.view_mut((0, 0), (rv_dim, rv_dim)).copy_from(&u);
    if st_dim > 0 {
        block.view_mut((rv_dim, rv_dim), (st_dim, st_dim)).copy_from(&random_stable(rng, st_dim));
    }
    let (s, cond_s) = random_similarity(rng, n);
    let s_inv = s.clone().try_inverse().expect("well-conditioned by construction");
    let t = &s * block * s_inv;
    Constructed {
        operator: MatrixOperator::new(t).expect("dimension within limits"),
        rv_basis: orthonormalize(&s.columns(0, rv_dim).into_owned()),
        st_basis: orthonormalize(&s.columns(rv_dim, st_dim).into_owned()),
        rv_dim,
        st_dim,
        cond_s,
        defective: inject_jordan,
    }
}
