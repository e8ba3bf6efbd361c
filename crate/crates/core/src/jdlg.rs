//! Splitting of a power-bounded operator into its reversible part
//! (unimodular eigenvalues) and its stable part (orbits tending to zero).
//!
//! For matrices the projection is computed from a reordered complex Schur
//! form: with `T = Q [[R11, R12], [0, R22]] Q^H` and the peripheral
//! eigenvalues collected in `R11`, the solution `X` of
//! `R11 X - X R22 = -R12` gives `P = Q [[I, -X], [0, 0]] Q^H`.
//! Diagonal operators with unimodular entries have no stable part on the
//! null sequences, so their projection is the identity mask on `c0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius, identity, inf_norm, schur, singular_values, spectral_projection, triangular_eigenvectors, CMatrix,
    CVector,
};
use crate::operators::{BoundProvenance, DiagonalOperator, MatrixOperator, Operator, PowerBound};
use crate::seqspace::{Scalar, SeqVec, Tail};

pub const DEFAULT_TOL: f64 = 1e-9;
/// Eigenvalues closer than this are treated as one cluster.
const CLUSTER_RADIUS: f64 = 1e-5;
/// Rank decisions with a larger condition number are reported as ambiguous.
const AMBIGUITY_CONDITION: f64 = 1e6;
/// Probe horizon for the restricted operator and its inverse.
const RV_PROBE: u64 = 128;
/// Probe horizon for plain powers.
const POWER_PROBE: u64 = 512;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeripheralEig {
    pub lambda: Scalar,
    pub algebraic_mult: usize,
    pub geometric_mult: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSplit {
    pub peripheral_eigs: Vec<PeripheralEig>,
    pub stable_spectral_radius: f64,
    pub tol_unimodular: f64,
    #[serde(skip)]
    peripheral_members: Vec<Scalar>,
}

impl SpectralSplit {
    pub fn peripheral_count(&self) -> usize {
        self.peripheral_members.len()
    }
}

fn cluster(eigs: &[Scalar]) -> Vec<Vec<usize>> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eigs[i] - eigs[j]).norm() <= CLUSTER_RADIUS {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Classify the spectrum of `t` and certify power-boundedness.
pub fn check_power_bounded(t: &MatrixOperator, tol: f64) -> Result<SpectralSplit> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::Config(format!("unimodularity tolerance must lie in [1e-12, 1e-6], got {tol:e}")));
    }
    let (_, tri) = schur(&t.matrix);
    let n = tri.nrows();
    let eigs: Vec<Scalar> = (0..n).map(|i| tri[(i, i)]).collect();
    let mut peripheral = Vec::new();
    let mut members = Vec::new();
    let mut stable_radius: f64 = 0.0;
    for group in cluster(&eigs) {
        let mean = group.iter().map(|&i| eigs[i]).sum::<Scalar>() / group.len() as f64;
        let modulus = mean.norm();
        if modulus > 1.0 + tol {
            return Err(Error::NotPowerBounded(format!("eigenvalue {mean} has modulus {modulus:.12} > 1")));
        }
        if modulus < 1.0 - tol {
            for &i in &group {
                stable_radius = stable_radius.max(eigs[i].norm());
            }
            continue;
        }
        let alg = group.len();
        let shifted = &t.matrix - identity(n) * mean;
        let s = singular_values(&shifted);
        let s1 = s[0];
        let thr = tol * s1.max(1.0);
        let s_star = s[n - alg];
        let geo = s.iter().filter(|&&v| v <= thr).count().min(alg);
        if s_star > thr {
            let kappa = s1 / s_star;
            if kappa <= AMBIGUITY_CONDITION {
                return Err(Error::NotPowerBounded(format!(
                    "peripheral eigenvalue {mean} is defective (algebraic {alg}, geometric {geo})"
                )));
            }
            return Err(Error::TolAmbiguous(format!(
                "rank decision for eigenvalue {mean} has condition {kappa:.3e}"
            )));
        }
        peripheral.push(PeripheralEig { lambda: mean, algebraic_mult: alg, geometric_mult: alg });
        members.extend(group.iter().map(|&i| eigs[i]));
    }
    peripheral.sort_by(|a, b| a.lambda.arg().total_cmp(&b.lambda.arg()));
    Ok(SpectralSplit { peripheral_eigs: peripheral, stable_spectral_radius: stable_radius, tol_unimodular: tol, peripheral_members: members })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    Matrix(CMatrix),
    /// Identity on the null sequences; undefined off them.
    DiagonalMask,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitResiduals {
    pub idempotence: f64,
    pub commutation: f64,
}

#[derive(Clone, Debug)]
pub struct JdlgSplit {
    pub projection: Projection,
    pub rv_basis: CMatrix,
    pub st_basis: CMatrix,
    pub spectral: Option<SpectralSplit>,
    pub power_bound: PowerBound,
    pub doubly_power_bounded: bool,
    pub projection_norm: f64,
    pub residuals: SplitResiduals,
    /// Largest probed `||(T|rv)^{+-n}||`, `n <= 128`.
    pub rv_probe_max: f64,
    pub notes: Vec<String>,
}

fn is_null_sequence(v: &SeqVec) -> bool {
    v.tail().center() == Scalar::new(0.0, 0.0)
}

impl JdlgSplit {
    pub fn project(&self, v: &SeqVec) -> Result<SeqVec> {
        match &self.projection {
            Projection::Matrix(p) => {
                let x = coords(v, p.nrows())?;
                Ok(MatrixOperator::from_coords(&(p * x)))
            }
            Projection::DiagonalMask => {
                if !is_null_sequence(v) {
                    return Err(Error::ProjectionUnavailable(
                        "the projection is only defined on null sequences".into(),
                    ));
                }
                Ok(SeqVec::from_parts(v.head().to_vec(), Tail::NullEnvelope { bound: v.tail().bound() }))
            }
        }
    }

    /// `(I - P) v`.
    pub fn complement(&self, v: &SeqVec) -> Result<SeqVec> {
        match &self.projection {
            Projection::Matrix(p) => {
                let x = coords(v, p.nrows())?;
                Ok(MatrixOperator::from_coords(&(&x - p * &x)))
            }
            Projection::DiagonalMask => {
                self.project(v)?;
                Ok(SeqVec::zeros(v.dim()))
            }
        }
    }

    pub fn is_identity_on_domain(&self) -> bool {
        matches!(self.projection, Projection::DiagonalMask)
    }
}

/// Rows of a complex matrix as `[re, im]` pairs.
pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

/// Serializable view of a split.
#[derive(Clone, Debug, Serialize)]
pub struct JdlgSummary {
    pub kind: &'static str,
    /// `None` for the diagonal case, where `P` is the identity on `c0`.
    pub projection: Option<Vec<Vec<[f64; 2]>>>,
    pub rv_basis: Vec<Vec<[f64; 2]>>,
    pub st_basis: Vec<Vec<[f64; 2]>>,
    pub rv_dim: usize,
    pub st_dim: usize,
    pub spectral: Option<SpectralSplit>,
    pub power_bound: PowerBound,
    pub doubly_power_bounded: bool,
    pub projection_norm: f64,
    pub residuals: SplitResiduals,
    pub rv_probe_max: f64,
    pub notes: Vec<String>,
}

impl JdlgSplit {
    pub fn summary(&self) -> JdlgSummary {
        let (kind, projection) = match &self.projection {
            Projection::Matrix(p) => ("matrix", Some(matrix_rows(p))),
            Projection::DiagonalMask => ("diagonal", None),
        };
        JdlgSummary {
            kind,
            projection,
            rv_basis: matrix_rows(&self.rv_basis),
            st_basis: matrix_rows(&self.st_basis),
            rv_dim: self.rv_basis.ncols(),
            st_dim: self.st_basis.ncols(),
            spectral: self.spectral.clone(),
            power_bound: self.power_bound,
            doubly_power_bounded: self.doubly_power_bounded,
            projection_norm: self.projection_norm,
            residuals: self.residuals,
            rv_probe_max: self.rv_probe_max,
            notes: self.notes.clone(),
        }
    }
}

fn coords(v: &SeqVec, n: usize) -> Result<CVector> {
    let t = v.tail();
    if t.bound() != 0.0 || t.center() != Scalar::new(0.0, 0.0) || v.dim() < n || v.head()[n..].iter().any(|z| z.norm() != 0.0) {
        return Err(Error::DimensionMismatch { expected: n, got: v.dim() });
    }
    Ok(CVector::from_iterator(n, v.head().iter().take(n).copied()))
}

/// `sup_n ||T^n (I - P)||` for a stable part: once `||S_n|| <= 1`, every
/// later `S_{qn + r} = S_n^q S_r` is dominated by an earlier iterate.
fn stable_sup(t: &CMatrix, comp: &CMatrix) -> Result<f64> {
    let mut s = comp.clone();
    let mut best = inf_norm(&s);
    let mut n = 0u64;
    loop {
        s = t * s;
        n += 1;
        let v = inf_norm(&s);
        if v <= 1.0 {
            return Ok(best);
        }
        best = best.max(v);
        if n > (1 << 20) {
            return Err(Error::TolAmbiguous("stable part does not contract within 2^20 steps".into()));
        }
    }
}

fn max_probe_power(t: &CMatrix, horizon: u64) -> f64 {
    let mut p = identity(t.nrows());
    let mut best = 1.0f64;
    for _ in 0..horizon {
        p = t * p;
        best = best.max(inf_norm(&p));
    }
    best
}

struct MatrixAnalysis {
    split: SpectralSplit,
    projection: CMatrix,
    rv_basis: CMatrix,
    st_basis: CMatrix,
    bound: f64,
    rv_probe_max: f64,
}

fn analyse_matrix(t: &MatrixOperator, tol: f64) -> Result<MatrixAnalysis> {
    let split = check_power_bounded(t, tol)?;
    let members = split.peripheral_members.clone();
    let sp = spectral_projection(&t.matrix, |z| members.contains(&z))?;
    let n = t.dim;
    let r = sp.selected;
    let proj = sp.projection.clone();
    let comp = identity(n) - &proj;

    let mut periph = 0.0;
    let mut rv_bound = 0.0;
    let mut rv_probe_max: f64 = 0.0;
    if r > 0 {
        let b = sp.range_basis.clone();
        let r11 = sp.t.view((0, 0), (r, r)).into_owned();
        let w = triangular_eigenvectors(&r11);
        let w_inv = w
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::TolAmbiguous("peripheral eigenvectors are numerically dependent".into()))?;
        // P = B C with C = [I, -X] Q^H.
        let mut cs = CMatrix::zeros(r, n);
        for i in 0..r {
            cs[(i, i)] = Scalar::new(1.0, 0.0);
            for j in 0..(n - r) {
                cs[(i, r + j)] = -sp.coupling[(i, j)];
            }
        }
        let c = cs * sp.q.adjoint();
        let bw = &b * &w;
        periph = inf_norm(&bw) * inf_norm(&(&w_inv * c));
        rv_bound = inf_norm(&bw) * inf_norm(&(&w_inv * b.adjoint()));
        let r11_inv = r11
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::TolAmbiguous("reversible block is singular".into()))?;
        let (mut fwd, mut bwd) = (identity(r), identity(r));
        for _ in 0..RV_PROBE {
            fwd = &r11 * fwd;
            bwd = &r11_inv * bwd;
            let f = inf_norm(&(&b * &fwd * b.adjoint()));
            let g = inf_norm(&(&b * &bwd * b.adjoint()));
            rv_probe_max = rv_probe_max.max(f).max(g);
        }
    }
    let stable = if r < n { stable_sup(&t.matrix, &comp)? } else { 0.0 };
    let probes = max_probe_power(&t.matrix, POWER_PROBE);
    let bound = [1.0, periph + stable, inf_norm(&proj), rv_bound, rv_probe_max, probes]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(MatrixAnalysis {
        split,
        projection: proj,
        rv_basis: sp.range_basis,
        st_basis: sp.kernel_basis,
        bound,
        rv_probe_max,
    })
}

/// Power bound for a matrix: spectral certificate when the split exists,
/// otherwise the largest probed `||T^n||`, `n <= 512`.
pub fn matrix_power_bound(t: &MatrixOperator, tol: f64) -> Result<PowerBound> {
    match analyse_matrix(t, tol) {
        Ok(a) => Ok(PowerBound { m: a.bound, provenance: BoundProvenance::SpectralCertificate }),
        Err(Error::TolAmbiguous(_)) | Err(Error::SylvesterIllConditioned { .. }) => {
            Ok(PowerBound { m: max_probe_power(&t.matrix, POWER_PROBE), provenance: BoundProvenance::ProbeOnly })
        }
        Err(e) => Err(e),
    }
}

pub fn jdlg_project(t: &MatrixOperator) -> Result<JdlgSplit> {
    jdlg_project_tol(t, DEFAULT_TOL)
}

pub fn jdlg_project_tol(t: &MatrixOperator, tol: f64) -> Result<JdlgSplit> {
    let a = analyse_matrix(t, tol)?;
    let n = t.dim;
    let p = &a.projection;
    let residuals = SplitResiduals {
        idempotence: frobenius(&(p * p - p)),
        commutation: frobenius(&(p * &t.matrix - &t.matrix * p)),
    };
    let doubly = a.st_basis.ncols() == 0;
    let mut notes = Vec::new();
    if a.rv_probe_max > a.bound {
        notes.push(format!("restricted power probe {:.6e} exceeds M", a.rv_probe_max));
    }
    Ok(JdlgSplit {
        projection_norm: inf_norm(p),
        projection: Projection::Matrix(a.projection.clone()),
        rv_basis: a.rv_basis,
        st_basis: if doubly { CMatrix::zeros(n, 0) } else { a.st_basis },
        spectral: Some(a.split),
        power_bound: PowerBound { m: a.bound, provenance: BoundProvenance::SpectralCertificate },
        doubly_power_bounded: doubly,
        residuals,
        rv_probe_max: a.rv_probe_max,
        notes,
    })
}

/// Number of leading coordinates on which `a_n != b` is checked.
const DIAGONAL_HEAD_CHECK: usize = 64;

pub fn diagonal_jdlg(t: &DiagonalOperator) -> Result<JdlgSplit> {
    if !t.is_unimodular() {
        return Err(Error::UnsupportedDiagonal("entries are not unimodular".into()));
    }
    let check = t.known_len().unwrap_or(DIAGONAL_HEAD_CHECK);
    if let Some(n) = (0..check).find(|&n| t.entry(n) == t.limit_b) {
        return Err(Error::UnsupportedDiagonal(format!("entry {n} equals the limit")));
    }
    Ok(JdlgSplit {
        projection: Projection::DiagonalMask,
        rv_basis: CMatrix::zeros(0, 0),
        st_basis: CMatrix::zeros(0, 0),
        spectral: None,
        power_bound: PowerBound { m: 1.0, provenance: BoundProvenance::ExactUnimodular },
        doubly_power_bounded: true,
        projection_norm: 1.0,
        residuals: SplitResiduals { idempotence: 0.0, commutation: 0.0 },
        rv_probe_max: 1.0,
        notes: vec![
            "almost periodic vectors are the null sequences; the stable part is trivial".into(),
            "membership of a given vector is decided by the mean-ergodicity probe, not assumed".into(),
        ],
    })
}

/// Split for any supported operator.
pub fn split_for(op: &Operator) -> Result<JdlgSplit> {
    match op {
        Operator::Diagonal(t) => diagonal_jdlg(t),
        Operator::Matrix(t) => jdlg_project(t),
        Operator::Example1(_) => Err(Error::Unsupported("no projection is computed for the shift operator".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConvergenceVerdict {
    Converged,
    NotConverged,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub verdict: ConvergenceVerdict,
    /// `||s_n + (I - P) x||` for `n = 0..=n_max` (upper bounds).
    pub residuals: Vec<f64>,
    pub limit_norm: f64,
    /// Geometric rate fitted to the running-sup envelope on the second half.
    pub fitted_rate: Option<f64>,
}

/// Least-squares slope of `ln r_n` over the second half of the curve.
fn fit_rate(res: &[f64]) -> Option<f64> {
    let n_max = res.len() - 1;
    let mut env = res.to_vec();
    for i in (0..n_max).rev() {
        env[i] = env[i].max(env[i + 1]);
    }
    let pts: Vec<(f64, f64)> = (n_max / 2..=n_max)
        .filter(|&i| env[i] > 1e-300)
        .map(|i| (i as f64, env[i].ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some((sxy / sxx).exp())
}

pub fn stable_part_convergence(op: &Operator, split: &JdlgSplit, x: &SeqVec, n_max: u64, tol: f64) -> Result<ConvergenceReport> {
    if n_max < 16 {
        return Err(Error::Config("stable-part convergence needs n_max >= 16".into()));
    }
    let residuals: Vec<f64> = match (op, &split.projection) {
        (Operator::Matrix(t), Projection::Matrix(p)) => {
            let xv = t.to_coords(x)?;
            let comp = &xv - p * &xv;
            let mut cur = comp.clone();
            let mut out = Vec::with_capacity(n_max as usize + 1);
            out.push(crate::linalg::vec_inf_norm(&cur));
            for _ in 0..n_max {
                cur = &t.matrix * cur;
                out.push(crate::linalg::vec_inf_norm(&cur));
            }
            out
        }
        (Operator::Diagonal(_), Projection::DiagonalMask) => {
            let one = Scalar::new(1.0, 0.0);
            (0..=n_max)
                .map(|n| {
                    let d = op.combination(&[(n, one), (0, -one)], x)?;
                    Ok(split.complement(&d)?.sup_norm().hi)
                })
                .collect::<Result<Vec<f64>>>()?
        }
        _ => return Err(Error::Precondition("split does not belong to this operator".into())),
    };
    let limit_norm = match &split.projection {
        Projection::Matrix(_) => residuals[0],
        Projection::DiagonalMask => 0.0,
    };
    let last = residuals[n_max as usize];
    let mid = residuals[n_max as usize / 2];
    let verdict = if last < tol {
        ConvergenceVerdict::Converged
    } else if last >= mid * (1.0 - 1e-12) {
        ConvergenceVerdict::NotConverged
    } else {
        ConvergenceVerdict::Inconclusive
    };
    let fitted_rate = fit_rate(&residuals);
    Ok(ConvergenceReport { verdict, residuals, limit_norm, fitted_rate })
}

/// Largest supported averaging length.
pub const MAX_CESARO: u64 = 1 << 20;

/// `A_N x = (1/N) sum_{n<N} T^n x`.
pub fn cesaro_mean(op: &Operator, x: &SeqVec, big_n: u64) -> Result<SeqVec> {
    if big_n == 0 || big_n > MAX_CESARO {
        return Err(Error::HorizonExceeded { requested: big_n, max: MAX_CESARO });
    }
    match op {
        Operator::Diagonal(t) => Ok(t.cesaro_mean(x, big_n)),
        Operator::Matrix(t) => {
            let xv = t.to_coords(x)?;
            let mut cur = xv.clone();
            let mut acc = xv;
            for _ in 1..big_n {
                cur = &t.matrix * cur;
                acc += &cur;
            }
            Ok(MatrixOperator::from_coords(&(acc / Scalar::new(big_n as f64, 0.0))))
        }
        Operator::Example1(_) => Err(Error::Unsupported("Cesaro means of the shift are not computed".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErgodicityVerdict {
    MeanErgodic,
    NotMeanErgodic,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CesaroRow {
    pub n: u64,
    pub norm_lo: f64,
    pub norm_hi: f64,
    /// Lower bound on the distance to the pointwise-limit candidate.
    pub dist_to_candidate: f64,
    pub tail_limit: Option<Scalar>,
    pub coordinate1: Option<f64>,
    pub coordinate1_bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErgodicityReport {
    pub verdict: ErgodicityVerdict,
    pub rows: Vec<CesaroRow>,
    /// `||A_{N_i} x - A_{N_{i+1}} x||` lower bounds.
    pub consecutive_distances: Vec<f64>,
    pub dim_fixed_space_head: usize,
    pub separating_functional: String,
}

pub fn mean_ergodicity_probe(op: &Operator, x: &SeqVec, n_list: &[u64]) -> Result<ErgodicityReport> {
    if n_list.len() < 4 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("N list must be strictly increasing with at least 4 entries".into()));
    }
    let one = Scalar::new(1.0, 0.0);
    let (candidate, dim_fixed, coord1_gap, functional) = match op {
        Operator::Diagonal(t) => {
            let head: Vec<Scalar> = x
                .head()
                .iter()
                .enumerate()
                .map(|(n, z)| if t.entry_is_one(n) { *z } else { Scalar::new(0.0, 0.0) })
                .collect();
            let fixed = (0..x.dim()).filter(|&n| t.entry_is_one(n)).count();
            let gap = if x.dim() > 1 && !t.entry_is_one(1) { Some((t.entry(1) - one).norm()) } else { None };
            let functional = if t.limit_b == one && x.tail().center() != Scalar::new(0.0, 0.0) {
                "lim: the limit functional is fixed by the adjoint and equals lim(x) on every Cesaro mean, \
                 while the pointwise limit of the means is the zero sequence"
                    .to_string()
            } else {
                "none detected".to_string()
            };
            (SeqVec::from_parts(head, Tail::NullEnvelope { bound: 0.0 }), fixed, gap, functional)
        }
        Operator::Matrix(t) => {
            let split = check_power_bounded(t, DEFAULT_TOL)?;
            let fixed: usize = split
                .peripheral_eigs
                .iter()
                .filter(|e| (e.lambda - one).norm() <= CLUSTER_RADIUS)
                .map(|e| e.geometric_mult)
                .sum();
            let sp = spectral_projection(&t.matrix, |z| (z - one).norm() <= CLUSTER_RADIUS)?;
            let xv = t.to_coords(x)?;
            (MatrixOperator::from_coords(&(&sp.projection * xv)), fixed, None, "not needed in finite dimension".into())
        }
        Operator::Example1(_) => return Err(Error::Unsupported("Cesaro means of the shift are not computed".into())),
    };
    let rows_means: Vec<(u64, SeqVec)> = n_list
        .par_iter()
        .map(|&n| cesaro_mean(op, x, n).map(|m| (n, m)))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<CesaroRow> = rows_means
        .iter()
        .map(|(n, m)| {
            let norm = m.sup_norm();
            CesaroRow {
                n: *n,
                norm_lo: norm.lo,
                norm_hi: norm.hi,
                dist_to_candidate: m.dist(&candidate).lo,
                tail_limit: match m.tail() {
                    Tail::ConvergentLimit { limit, .. } => Some(limit),
                    Tail::NullEnvelope { .. } => None,
                },
                coordinate1: (m.dim() > 1).then(|| m.head()[1].norm()),
                coordinate1_bound: coord1_gap.map(|g| 2.0 / (*n as f64 * g)),
            }
        })
        .collect();
    let consecutive_distances = rows_means.windows(2).map(|w| w[0].1.dist(&w[1].1).lo).collect();
    let r: Vec<f64> = rows.iter().map(|row| row.dist_to_candidate).collect();
    let (rmin, rmax) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let first = r[0];
    let last = *r.last().unwrap();
    let verdict = if rmax <= 1e-9 || last <= first / 4.0 {
        ErgodicityVerdict::MeanErgodic
    } else if rmin > 1e-9 && rmin >= 0.5 * rmax {
        ErgodicityVerdict::NotMeanErgodic
    } else {
        ErgodicityVerdict::Inconclusive
    };
    Ok(ErgodicityReport { verdict, rows, consecutive_distances, dim_fixed_space_head: dim_fixed, separating_functional: functional })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    fn mat(rows: &[&[f64]]) -> MatrixOperator {
        let v: Vec<Vec<Scalar>> = rows.iter().map(|r| r.iter().map(|&x| c(x, 0.0)).collect()).collect();
        MatrixOperator::from_rows(&v).unwrap()
    }

    #[test]
    fn identity_is_peripheral() {
        let s = check_power_bounded(&MatrixOperator::identity(3).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(s.peripheral_eigs.len(), 1);
        assert_eq!(s.peripheral_eigs[0].algebraic_mult, 3);
        assert_eq!(s.peripheral_eigs[0].geometric_mult, 3);
        assert_eq!(s.stable_spectral_radius, 0.0);
    }

    #[test]
    fn jordan_block_is_rejected() {
        let r = check_power_bounded(&mat(&[&[1.0, 1.0], &[0.0, 1.0]]), DEFAULT_TOL);
        assert!(matches!(r, Err(Error::NotPowerBounded(_))));
    }

    #[test]
    fn expanding_is_rejected() {
        let r = check_power_bounded(&mat(&[&[1.1]]), DEFAULT_TOL);
        assert!(matches!(r, Err(Error::NotPowerBounded(_))));
    }

    #[test]
    fn diag_one_half() {
        let t = mat(&[&[1.0, 0.0], &[0.0, 0.5]]);
        let s = jdlg_project(&t).unwrap();
        let Projection::Matrix(p) = &s.projection else { panic!() };
        assert!((p[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14);
        assert!(!s.doubly_power_bounded);
        let op = Operator::Matrix(t);
        let x = SeqVec::finite(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let rep = stable_part_convergence(&op, &s, &x, 40, 1e-9).unwrap();
        for (n, r) in rep.residuals.iter().enumerate() {
            assert!((r - 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
        assert_eq!(rep.verdict, ConvergenceVerdict::Converged);
        assert!((rep.fitted_rate.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn transient_matrix_bound() {
        let t = mat(&[&[0.9, 1.0], &[0.0, 0.9]]);
        let b = matrix_power_bound(&t, DEFAULT_TOL).unwrap();
        assert_eq!(b.provenance, BoundProvenance::SpectralCertificate);
        let mut p = identity(2);
        for _ in 0..512 {
            p = &t.matrix * p;
            assert!(inf_norm(&p) <= b.m + 1e-12);
        }
    }

    #[test]
    fn diagonal_split_is_identity_on_c0() {
        let t = DiagonalOperator::dyadic_signed(1, false).unwrap();
        let s = diagonal_jdlg(&t).unwrap();
        assert!(s.doubly_power_bounded);
        let op = Operator::Diagonal(t);
        let one = SeqVec::ones(16);
        let y = op.combination(&[(1, c(1.0, 0.0)), (0, c(-1.0, 0.0))], &one).unwrap();
        let py = s.project(&y).unwrap();
        assert_eq!(py.head(), y.head());
        assert!(matches!(s.project(&one), Err(Error::ProjectionUnavailable(_))));
    }

    #[test]
    fn non_unimodular_diagonal_is_unsupported() {
        let t = DiagonalOperator::explicit(vec![c(0.5, 0.0)], c(0.5, 0.0), 0.0, false).unwrap();
        assert!(matches!(diagonal_jdlg(&t), Err(Error::UnsupportedDiagonal(_))));
    }

    #[test]
    fn ones_are_not_mean_ergodic() {
        let op = Operator::Diagonal(DiagonalOperator::dyadic_signed(1, false).unwrap());
        let ns: Vec<u64> = (4..=12).map(|k| 1u64 << k).collect();
        let rep = mean_ergodicity_probe(&op, &SeqVec::ones(48), &ns).unwrap();
        assert_eq!(rep.verdict, ErgodicityVerdict::NotMeanErgodic);
        assert_eq!(rep.dim_fixed_space_head, 0);
        for row in &rep.rows {
            assert!(row.norm_lo >= 1.0);
        }
    }

    #[test]
    fn identity_is_mean_ergodic() {
        let op = Operator::Matrix(MatrixOperator::identity(2).unwrap());
        let x = SeqVec::finite(vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let rep = mean_ergodicity_probe(&op, &x, &[1, 2, 4, 8]).unwrap();
        assert_eq!(rep.verdict, ErgodicityVerdict::MeanErgodic);
    }
}
