//! Dense complex helpers: Schur reordering, triangular Sylvester solves and
//! spectral projections built from them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::seqspace::Scalar;

pub type CMatrix = DMatrix<Scalar>;
pub type CVector = DVector<Scalar>;

/// Induced sup-norm (maximum absolute row sum).
pub fn inf_norm(a: &CMatrix) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_inf_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Complex Schur form `a = q * t * q^H` with `t` upper triangular.
pub fn schur(a: &CMatrix) -> (CMatrix, CMatrix) {
    let (q, mut t) = nalgebra::linalg::Schur::new(a.clone()).unpack();
    let n = t.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = Scalar::new(0.0, 0.0);
        }
    }
    (q, t)
}

/// Swap the diagonal entries `k` and `k + 1` of an upper triangular `t`
/// with a unitary rotation, updating the Schur vectors `q`.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let a = t[(k, k)];
    let b = t[(k, k + 1)];
    let c = t[(k + 1, k + 1)];
    // Eigenvector of the 2x2 block for eigenvalue c.
    let (mut v1, mut v2) = (b, c - a);
    let nv = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if nv == 0.0 {
        return;
    }
    v1 /= nv;
    v2 /= nv;
    // G = [[v1, -conj(v2)], [v2, conj(v1)]] is unitary with first column v.
    let g11 = v1;
    let g12 = -v2.conj();
    let g21 = v2;
    let g22 = v1.conj();
    // Columns k, k+1 of t and q: X <- X G.
    for i in 0..n {
        let x = t[(i, k)];
        let y = t[(i, k + 1)];
        t[(i, k)] = x * g11 + y * g21;
        t[(i, k + 1)] = x * g12 + y * g22;
        let x = q[(i, k)];
        let y = q[(i, k + 1)];
        q[(i, k)] = x * g11 + y * g21;
        q[(i, k + 1)] = x * g12 + y * g22;
    }
    // Rows k, k+1 of t: X <- G^H X.
    for j in 0..n {
        let x = t[(k, j)];
        let y = t[(k + 1, j)];
        t[(k, j)] = g11.conj() * x + g21.conj() * y;
        t[(k + 1, j)] = g12.conj() * x + g22.conj() * y;
    }
    t[(k + 1, k)] = Scalar::new(0.0, 0.0);
    // Restore the exact eigenvalues on the diagonal.
    t[(k, k)] = c;
    t[(k + 1, k + 1)] = a;
}

/// Reorder a Schur form so that diagonal entries selected by `pick` come
/// first (stable within both groups). Returns the number selected.
pub fn reorder_schur(q: &mut CMatrix, t: &mut CMatrix, pick: impl Fn(Scalar) -> bool) -> usize {
    let n = t.nrows();
    let mut placed = 0;
    for j in 0..n {
        if pick(t[(j, j)]) {
            let mut k = j;
            while k > placed {
                swap_adjacent(q, t, k - 1);
                k -= 1;
            }
            placed += 1;
        }
    }
    placed
}

/// Solve `a x - x b = c` for upper triangular `a` (r x r) and `b` (s x s).
pub fn solve_triangular_sylvester(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<CMatrix> {
    let r = a.nrows();
    let s = b.nrows();
    let mut sep = f64::INFINITY;
    for i in 0..r {
        for j in 0..s {
            sep = sep.min((a[(i, i)] - b[(j, j)]).norm());
        }
    }
    if r > 0 && s > 0 && sep < 1e-8 {
        return Err(Error::SylvesterIllConditioned { separation: sep });
    }
    let mut x = CMatrix::zeros(r, s);
    for j in 0..s {
        // (a - b_jj) x_j = c_j + sum_{k<j} x_k b_kj
        let mut rhs: Vec<Scalar> = (0..r).map(|i| c[(i, j)]).collect();
        for k in 0..j {
            let bkj = b[(k, j)];
            if bkj != Scalar::new(0.0, 0.0) {
                for (i, v) in rhs.iter_mut().enumerate() {
                    *v += x[(i, k)] * bkj;
                }
            }
        }
        let mu = b[(j, j)];
        for i in (0..r).rev() {
            let mut acc = rhs[i];
            for k in (i + 1)..r {
                acc -= a[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / (a[(i, i)] - mu);
        }
    }
    Ok(x)
}

/// Spectral projection onto the invariant subspace of the eigenvalues
/// selected by `pick`, along the complementary invariant subspace.
#[derive(Clone, Debug)]
pub struct SpectralProjection {
    pub projection: CMatrix,
    /// Orthonormal basis of the range.
    pub range_basis: CMatrix,
    /// Basis of the kernel (not orthonormal).
    pub kernel_basis: CMatrix,
    /// Reordered Schur factors: `a = q * t * q^H`, selected block first.
    pub q: CMatrix,
    pub t: CMatrix,
    pub selected: usize,
    /// Solution of the decoupling equation.
    pub coupling: CMatrix,
}

pub fn spectral_projection(a: &CMatrix, pick: impl Fn(Scalar) -> bool) -> Result<SpectralProjection> {
    let n = a.nrows();
    let (mut q, mut t) = schur(a);
    let r = reorder_schur(&mut q, &mut t, pick);
    let s = n - r;
    let t11 = t.view((0, 0), (r, r)).into_owned();
    let t22 = t.view((r, r), (s, s)).into_owned();
    let t12 = t.view((0, r), (r, s)).into_owned();
    let x = solve_triangular_sylvester(&t11, &t22, &(-t12))?;
    // In Schur coordinates P = [[I, -X], [0, 0]].
    let mut ps = CMatrix::zeros(n, n);
    for i in 0..r {
        ps[(i, i)] = Scalar::new(1.0, 0.0);
        for j in 0..s {
            ps[(i, r + j)] = -x[(i, j)];
        }
    }
    let projection = &q * ps * q.adjoint();
    let range_basis = q.columns(0, r).into_owned();
    let mut ks = CMatrix::zeros(n, s);
    for j in 0..s {
        for i in 0..r {
            ks[(i, j)] = x[(i, j)];
        }
        ks[(r + j, j)] = Scalar::new(1.0, 0.0);
    }
    let kernel_basis = &q * ks;
    Ok(SpectralProjection { projection, range_basis, kernel_basis, q, t, selected: r, coupling: x })
}

/// Orthonormal basis of the column span (thin QR).
pub fn orthonormalize(a: &CMatrix) -> CMatrix {
    if a.ncols() == 0 {
        return a.clone();
    }
    a.clone().qr().q()
}

/// Sine of the largest principal angle between two column spans.
pub fn max_principal_sine(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.ncols() == 0 && b.ncols() == 0 {
        return 0.0;
    }
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    let resid = &qb - &qa * (qa.adjoint() * &qb);
    spectral_norm(&resid)
}

/// Eigenvectors of an upper triangular matrix whose diagonal is
/// semisimple. Entries coupling numerically equal eigenvalues are dropped.
pub fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let mut v = CMatrix::zeros(n, n);
    for j in 0..n {
        let lam = t[(j, j)];
        v[(j, j)] = Scalar::new(1.0, 0.0);
        for i in (0..j).rev() {
            let mut acc = Scalar::new(0.0, 0.0);
            for k in (i + 1)..=j {
                acc += t[(i, k)] * v[(k, j)];
            }
            let d = t[(i, i)] - lam;
            v[(i, j)] = if d.norm() < 1e-10 { Scalar::new(0.0, 0.0) } else { -acc / d };
        }
        let nrm = v.column(j).norm();
        v.column_mut(j).scale_mut(1.0 / nrm);
    }
    v
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}
