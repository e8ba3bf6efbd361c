//! Extraction of a sequence spanning a copy of `c0` from a vector whose
//! difference orbit is relatively compact while its orbit is not.
//!
//! The search follows the classical construction:
//!
//! 1. find a separated subsequence `n_k` of the orbit and a margin `delta`;
//! 2. set `k_1 = n_2 - n_1`;
//! 3. at stage `m`, look for two members of the subsequence whose orbit
//!    points of all vectors `P(T^{sum F} x - x)`, `F` a subset of
//!    `{1..m}`, agree within `1/(M 2^m)`, and take their gap as `k_{m+1}`;
//! 4. verify the Bessaga-Pelczynski hypotheses for
//!    `x_i = P(T^{k_i} x - x)`: norms bounded below and all subset sums
//!    bounded.
//!
//! Every existence step is a bounded search; running out of horizon is the
//! reportable `Exhausted` outcome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compactness::{verdict, AnalysisConfig, CompactnessVerdict, PointFamily, Verdict};
use crate::error::{Error, Result};
use crate::families::{diff_family, orbit_family};
use crate::jdlg::{stable_part_convergence, ConvergenceReport, ConvergenceVerdict, JdlgSplit, Projection};
use crate::operators::{DiagonalOperator, Operator};
use crate::seqspace::{NormInterval, Scalar, SeqVec};

/// Slack for the numerical comparisons in the certificate.
pub const TOL_NUM: f64 = 1e-9;
/// Default search horizon for dyadic diagonals (exact phases up to 2^63).
pub const DYADIC_HORIZON: u64 = 1 << 62;
pub const GENERIC_HORIZON: u64 = 1 << 12;
/// Extra head coordinates beyond the bit length of the horizon.
const HEAD_MARGIN: usize = 48;

const ONE: Scalar = Scalar::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubsetCheck {
    pub exhaustive_up_to: usize,
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for SubsetCheck {
    fn default() -> Self {
        SubsetCheck { exhaustive_up_to: 12, random_samples: 256, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessConfig {
    /// Largest exponent searched; defaults by operator family.
    pub horizon: Option<u64>,
    pub m_target: usize,
    pub delta_floor: f64,
    pub margin: f64,
    /// Use this orbit separation instead of the packing search.
    pub separation_override: Option<f64>,
    pub subset_check: SubsetCheck,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            horizon: None,
            m_target: 8,
            delta_floor: 1e-6,
            margin: 0.1,
            separation_override: None,
            subset_check: SubsetCheck::default(),
        }
    }
}

impl WitnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_target == 0 || self.m_target > 16 {
            return Err(Error::Config("m_target must lie in 1..=16".into()));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return Err(Error::Config("margin must lie in [0, 1)".into()));
        }
        if !(self.delta_floor > 0.0) {
            return Err(Error::Config("delta_floor must be positive".into()));
        }
        if let Some(h) = self.horizon {
            if h <= self.m_target as u64 {
                return Err(Error::Config("horizon must exceed m_target".into()));
            }
        }
        if let Some(s) = self.separation_override {
            if !(s > 0.0) {
                return Err(Error::Config("separation_override must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn horizon_for(&self, op: &Operator) -> u64 {
        self.horizon.unwrap_or(match op {
            Operator::Diagonal(t) if t.is_dyadic() => DYADIC_HORIZON,
            _ => GENERIC_HORIZON,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessState {
    #[serde(rename = "M")]
    pub m: f64,
    pub delta: f64,
    pub n_subseq: Vec<u64>,
    pub k_seq: Vec<u64>,
    /// Stage `m` (1-based) stored at position `m - 1`.
    pub sigma_residuals: Vec<f64>,
    /// `||P(T^{k_i} x - x)||` lower bounds.
    pub norms: Vec<f64>,
    pub head_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PbigResult {
    pub delta0: f64,
    pub delta: f64,
    pub separation: f64,
    pub n_subseq: Vec<u64>,
    pub trimmed_prefix: usize,
    pub orbit_verdict: Verdict,
    pub d1_verdict: Verdict,
    pub convergence: ConvergenceVerdict,
}

/// Inputs of one pipeline run. The starting vector's
/// head is widened so that every exponent in the horizon stays resolved.
pub struct Context<'a> {
    pub op: &'a Operator,
    pub split: &'a JdlgSplit,
    pub x: SeqVec,
    pub horizon: u64,
    pub m_bound: f64,
}

impl<'a> Context<'a> {
    pub fn new(op: &'a Operator, split: &'a JdlgSplit, x: &SeqVec, horizon: u64) -> Self {
        let bits = 64 - horizon.leading_zeros() as usize;
        let want = x.dim().max(bits + HEAD_MARGIN);
        let x = match op {
            Operator::Diagonal(t) if t.known_len().is_none() => x.extend_exact(want).unwrap_or_else(|| x.clone()),
            _ => x.clone(),
        };
        Context { op, split, x, horizon, m_bound: split.power_bound.m.max(split.projection_norm).max(1.0) }
    }

    /// `P(T^k x - x)`.
    pub fn vector(&self, k: u64) -> Result<SeqVec> {
        self.split.project(&self.op.combination(&[(k, ONE), (0, -ONE)], &self.x)?)
    }

    /// `P(T^{k+s} x - T^k x - T^s x + x) = T^k v_s - v_s` with exact
    /// cancellation where the operator allows it.
    fn shifted_residual(&self, k: u64, s: u64) -> Result<NormInterval> {
        if s == 0 {
            return Ok(NormInterval::exact(0.0));
        }
        let w = self.op.combination(&[(k + s, ONE), (k, -ONE), (s, -ONE), (0, ONE)], &self.x)?;
        Ok(self.split.project(&w)?.sup_norm())
    }

    fn diagonal(&self) -> Option<&DiagonalOperator> {
        match self.op {
            Operator::Diagonal(t) if t.is_unimodular() => Some(t),
            _ => None,
        }
    }

    /// Exponents offered to the separation and alignment searches.
    pub fn candidates(&self) -> Vec<u64> {
        match self.op {
            Operator::Diagonal(t) if t.is_dyadic() => std::iter::once(0)
                .chain((0..63).map(|j| 1u64 << j))
                .filter(|&k| k < self.horizon)
                .collect(),
            _ => (0..self.horizon.min(GENERIC_HORIZON)).collect(),
        }
    }
}

pub fn pbig_extract(ctx: &Context, cfg: &WitnessConfig, acfg: &AnalysisConfig) -> Result<PbigResult> {
    if matches!(ctx.op, Operator::Example1(_)) {
        return Err(Error::Unsupported("the witness search needs a sequence-space operator".into()));
    }
    let h_max = acfg.max_horizon();
    let d1 = verdict(&diff_family(ctx.op, &ctx.x, 1, h_max, acfg.head_dim)?, acfg)?;
    if !d1.verdict.is_compact() {
        return Err(Error::Precondition(format!("(T - I)x is not almost periodic: {:?}", d1.verdict)));
    }
    let conv: ConvergenceReport = stable_part_convergence(ctx.op, ctx.split, &ctx.x, 64, 1e-9)?;
    if conv.verdict != ConvergenceVerdict::Converged {
        return Err(Error::Precondition("(I - P)(T^n - I)x does not converge".into()));
    }
    let mut ocfg = acfg.clone();
    if let Some(s) = cfg.separation_override {
        ocfg.delta_override = Some(s);
    }
    let orbit: CompactnessVerdict = verdict(&orbit_family(ctx.op, &ctx.x, h_max)?, &ocfg)?;
    if orbit.verdict != Verdict::NotCompactEvidence {
        return Err(Error::NoSeparation(format!("orbit verdict {:?}", orbit.verdict)));
    }
    let pack = orbit.packing.as_ref().expect("separated orbits carry a packing");
    let separation = cfg.separation_override.map_or(pack.verified_delta, |s| s.min(pack.verified_delta));
    let delta0 = separation / 2.0;
    let delta = delta0 * (1.0 - cfg.margin);
    if delta < cfg.delta_floor {
        return Err(Error::NoSeparation(format!("separation {separation:e} is below the floor")));
    }

    // Separated subsequence of the P-parts among the candidate exponents.
    let cand = ctx.candidates();
    // ||P(T^q x - T^p x)|| >= ||P(T^{q-p} x - x)|| / M on the reversible part.
    let lag_metric = |lag: u64| {
        let n = ctx.vector(lag).map(|v| v.sup_norm()).unwrap_or(NormInterval { lo: 0.0, hi: f64::INFINITY });
        NormInterval { lo: n.lo / ctx.m_bound, hi: n.hi * ctx.m_bound }
    };
    let mut pfam = PointFamily::by_lag("p_orbit", lag_metric);
    if cand.len() as u64 != cand.last().map_or(0, |&l| l + 1) {
        pfam = pfam.with_indices(cand.clone());
    }
    let view = pfam.view(ctx.horizon.min(cand.last().map_or(0, |&l| l + 1)));
    let mut picked: Vec<usize> = Vec::new();
    for i in 0..view.len() {
        if picked.iter().all(|&j| view.dist(i, j).lo >= 2.0 * delta) {
            picked.push(i);
        }
    }
    let n_subseq: Vec<u64> = picked.iter().map(|&i| view.index(i)).collect();
    if n_subseq.len() < 2 {
        return Err(Error::NoSeparation("fewer than two separated exponents within the horizon".into()));
    }
    let trimmed_prefix = match ctx.split.projection {
        Projection::DiagonalMask => 0,
        Projection::Matrix(_) => trim_prefix(ctx, &n_subseq, delta)?,
    };
    Ok(PbigResult {
        delta0,
        delta,
        separation,
        n_subseq: n_subseq[trimmed_prefix..].to_vec(),
        trimmed_prefix,
        orbit_verdict: orbit.verdict,
        d1_verdict: d1.verdict,
        convergence: conv.verdict,
    })
}

/// Drop the shortest prefix after which the stable parts `(I - P) T^n x`
/// are pairwise closer than `delta`.
fn trim_prefix(ctx: &Context, seq: &[u64], delta: f64) -> Result<usize> {
    let parts: Vec<SeqVec> = seq
        .iter()
        .map(|&n| ctx.split.complement(&ctx.op.apply_power(n, &ctx.x)?))
        .collect::<Result<Vec<_>>>()?;
    for start in 0..seq.len() {
        let ok = (start..seq.len()).all(|i| (i + 1..seq.len()).all(|j| parts[i].dist(&parts[j]).hi < delta));
        if ok {
            return Ok(start);
        }
    }
    Ok(seq.len())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultapResult {
    /// Members of one cell with consecutive gaps at least `gap_min`.
    pub indices: Vec<u64>,
    /// Verified `max_i ||T^{n'_2} v_i - T^{n'_1} v_i||` for the first pair.
    pub achieved: f64,
}

/// Upper bound for `max_i ||T^h v_i - v_i||` on a unimodular diagonal, from
/// the coordinatewise maxima `V_n = max_i |v_{i,n}|`.
struct FastAlign<'t> {
    t: &'t DiagonalOperator,
    v_max: Vec<f64>,
    tail_max: f64,
}

impl FastAlign<'_> {
    fn bound(&self, h: u64) -> f64 {
        let d = self.v_max.len();
        let mut best: f64 = 0.0;
        for (n, &v) in self.v_max.iter().enumerate() {
            if v > best / 2.0 {
                best = best.max(v * (self.t.entry_power(n, h) - ONE).norm());
            }
        }
        let far = (self.t.tail_drift(d, h) + (self.t.limit_power(h) - ONE).norm()).min(2.0);
        best.max(self.tail_max * far)
    }
}

pub fn multap_refine(ctx: &Context, vectors: &[SeqVec], n_seq: &[u64], tol: f64, gap_min: u64) -> Result<MultapResult> {
    if !(tol > 0.0) {
        return Err(Error::Config("tol must be positive".into()));
    }
    let exact = |p: u64, q: u64| -> f64 {
        vectors
            .iter()
            .map(|v| {
                let w = ctx.op.combination(&[(q, ONE), (p, -ONE)], v).map(|w| w.sup_norm().hi);
                w.unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    };
    let fast = ctx.diagonal().map(|t| {
        let d = vectors.iter().map(|v| v.dim()).min().unwrap_or(1);
        let v_max = (0..d).map(|n| vectors.iter().map(|v| v.head()[n].norm()).fold(0.0, f64::max)).collect();
        let tail_max = vectors.iter().map(|v| v.tail().sup_hi()).fold(0.0, f64::max);
        FastAlign { t, v_max, tail_max }
    });
    let metric = |p: u64, q: u64| -> f64 {
        match &fast {
            Some(f) => f.bound(q.abs_diff(p)),
            None => exact(p.min(q), p.max(q)),
        }
    };
    // Cells of radius tol/2 around greedy centers.
    let mut centers: Vec<usize> = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for (i, &n) in n_seq.iter().enumerate() {
        match centers.iter().position(|&c| metric(n_seq[c], n) <= tol / 2.0) {
            Some(c) => cells[c].push(i),
            None => {
                centers.push(i);
                cells.push(vec![i]);
            }
        }
    }
    let mut best: Option<(u64, Vec<u64>, f64)> = None;
    for cell in &cells {
        let mut chain: Vec<u64> = Vec::new();
        for &i in cell {
            if chain.last().is_none_or(|&l| n_seq[i] - l >= gap_min) {
                chain.push(n_seq[i]);
            }
        }
        if chain.len() < 2 {
            continue;
        }
        let achieved = exact(chain[0], chain[1]);
        if achieved > tol {
            continue;
        }
        if best.as_ref().is_none_or(|b| chain[1] < b.0) {
            best = Some((chain[1], chain, achieved));
        }
    }
    match best {
        Some((_, indices, achieved)) => Ok(MultapResult { indices, achieved }),
        None => {
            let mut best_tol = f64::INFINITY;
            for (a, &p) in n_seq.iter().enumerate() {
                for &q in &n_seq[a + 1..] {
                    if q - p >= gap_min {
                        best_tol = best_tol.min(metric(p, q));
                    }
                }
            }
            Err(Error::Exhausted { stage: 0, best_tol, partial: None })
        }
    }
}

fn subset_sum(ks: &[u64], mask: u64) -> u64 {
    ks.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &k)| k).sum()
}

pub fn build_k_sequence(ctx: &Context, pbig: &PbigResult, cfg: &WitnessConfig) -> Result<WitnessState> {
    let m_bound = ctx.m_bound;
    let floor = pbig.delta / m_bound;
    let seq = &pbig.n_subseq;
    let mut state = WitnessState {
        m: m_bound,
        delta: pbig.delta,
        n_subseq: seq.clone(),
        k_seq: Vec::new(),
        sigma_residuals: Vec::new(),
        norms: Vec::new(),
        head_dim: ctx.x.dim(),
    };
    // k_1: first gap of the separated subsequence with a large enough P-part.
    let mut k1 = None;
    'outer: for (a, &p) in seq.iter().enumerate() {
        for &q in &seq[a + 1..] {
            let nrm = ctx.vector(q - p)?.sup_norm().lo;
            if nrm > floor {
                k1 = Some((q - p, nrm));
                break 'outer;
            }
        }
    }
    let (k1, n1) = k1.ok_or(Error::Exhausted { stage: 1, best_tol: f64::INFINITY, partial: None })?;
    state.k_seq.push(k1);
    state.norms.push(n1);

    for m in 1..cfg.m_target {
        let sums: Vec<u64> = (0..1u64 << m).map(|mask| subset_sum(&state.k_seq, mask)).collect();
        let vectors: Vec<SeqVec> = sums.par_iter().map(|&s| ctx.vector(s)).collect::<Result<Vec<_>>>()?;
        let tol = 1.0 / (m_bound * 2f64.powi(m as i32));
        let gap_min = state.k_seq[m - 1] + 1;
        let refined = match multap_refine(ctx, &vectors, seq, tol, gap_min) {
            Ok(r) => r,
            Err(Error::Exhausted { best_tol, .. }) => {
                return Err(Error::Exhausted { stage: m, best_tol, partial: Some(Box::new(state)) });
            }
            Err(e) => return Err(e),
        };
        let k_next = refined.indices[1] - refined.indices[0];
        let nrm = ctx.vector(k_next)?.sup_norm().lo;
        if nrm < floor - TOL_NUM {
            return Err(Error::BpViolation(format!("stage {m}: ||P(T^k x - x)|| = {nrm:e} below delta/M")));
        }
        // Post-hoc residual over every subset F of {1..m}.
        let sigma = sums
            .par_iter()
            .map(|&s| ctx.shifted_residual(k_next, s).map(|r| r.hi))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        state.k_seq.push(k_next);
        state.norms.push(nrm);
        state.sigma_residuals.push(sigma);
    }
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasisConstants {
    pub c_low: f64,
    pub c_high: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct C0CopyCertificate {
    #[serde(skip)]
    pub x_vectors: Vec<SeqVec>,
    pub x_norms: Vec<f64>,
    pub norm_lower: f64,
    pub delta_over_m: f64,
    pub partial_sum_bound: f64,
    #[serde(rename = "M_prime")]
    pub m_prime: f64,
    pub basis_constants: BasisConstants,
    pub subsets_checked: usize,
    pub sign_patterns_checked: usize,
}

/// `sum_{j >= 2} 2^{1 - i_j} + M ||x|| + M^2 ||x||` for the 1-based
/// indices `i_1 < i_2 < ...` of `mask`.
fn partial_sum_budget(mask: u64, m_bound: f64, x_norm: f64) -> f64 {
    let idx: Vec<i32> = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
    idx.iter().skip(1).map(|&i| 2f64.powi(1 - i)).sum::<f64>() + m_bound * x_norm + m_bound * m_bound * x_norm
}

fn masked_sum(xs: &[SeqVec], coeffs: impl Iterator<Item = (usize, f64)>) -> SeqVec {
    let mut acc = SeqVec::zeros(xs[0].dim());
    for (i, c) in coeffs {
        if c != 0.0 {
            acc = SeqVec::combine(ONE, &acc, Scalar::new(c, 0.0), &xs[i]);
        }
    }
    acc
}

pub fn bp_certificate(ctx: &Context, state: &WitnessState, cfg: &WitnessConfig) -> Result<C0CopyCertificate> {
    let m = state.k_seq.len();
    if m < 4 {
        return Err(Error::Precondition(format!("need at least 4 exponents, have {m}")));
    }
    let xs: Vec<SeqVec> = state.k_seq.iter().map(|&k| ctx.vector(k)).collect::<Result<Vec<_>>>()?;
    let x_norms: Vec<f64> = xs.iter().map(|v| v.sup_norm().lo).collect();
    let norm_lower = x_norms.iter().copied().fold(f64::INFINITY, f64::min);
    let delta_over_m = state.delta / state.m;
    if norm_lower < delta_over_m - TOL_NUM {
        return Err(Error::BpViolation(format!("min ||x_i|| = {norm_lower:e} < delta/M = {delta_over_m:e}")));
    }
    let x_norm = ctx.x.sup_norm().hi;
    let m_bound = state.m;

    // Subsets: all of size <= exhaustive_up_to, plus random larger ones.
    let sc = &cfg.subset_check;
    let mut masks: Vec<u64> = (1..1u64 << m).filter(|s| s.count_ones() as usize <= sc.exhaustive_up_to).collect();
    if m > sc.exhaustive_up_to {
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        for _ in 0..sc.random_samples {
            let mut s = 0u64;
            while (s.count_ones() as usize) <= sc.exhaustive_up_to {
                s |= 1 << rng.random_range(0..m);
            }
            masks.push(s);
        }
    }
    let checked: Vec<(u64, f64, f64)> = masks
        .par_iter()
        .map(|&s| {
            let sum = masked_sum(&xs, (0..m).map(|i| (i, if s >> i & 1 == 1 { 1.0 } else { 0.0 })));
            (s, sum.sup_norm().hi, partial_sum_budget(s, m_bound, x_norm))
        })
        .collect();
    if let Some((s, val, budget)) = checked.iter().find(|(_, v, b)| *v > b + TOL_NUM) {
        let members: Vec<usize> = (0..m).filter(|i| s >> i & 1 == 1).map(|i| i + 1).collect();
        return Err(Error::BpViolation(format!("subset {members:?}: ||sum|| = {val:e} exceeds {budget:e}")));
    }
    let partial_sum_bound = checked.iter().map(|c| c.1).fold(0.0, f64::max);
    let m_prime = partial_sum_budget((1u64 << m) - 1, m_bound, x_norm);

    // Sign patterns in {-1, 0, 1}^m.
    let patterns: Vec<Vec<f64>> = if m <= 8 {
        (1..3usize.pow(m as u32))
            .map(|mut code| {
                (0..m)
                    .map(|_| {
                        let digit = code % 3;
                        code /= 3;
                        digit as f64 - 1.0
                    })
                    .collect()
            })
            .filter(|p: &Vec<f64>| p.iter().any(|&a| a != 0.0))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed ^ 0x5157_6e5f);
        (0..sc.random_samples.max(1))
            .map(|_| loop {
                let p: Vec<f64> = (0..m).map(|_| rng.random_range(-1i32..=1) as f64).collect();
                if p.iter().any(|&a| a != 0.0) {
                    break p;
                }
            })
            .collect()
    };
    let values: Vec<NormInterval> = patterns
        .par_iter()
        .map(|p| masked_sum(&xs, p.iter().copied().enumerate()).sup_norm())
        .collect();
    let c_low = values.iter().map(|v| v.lo).fold(f64::INFINITY, f64::min);
    let c_high = values.iter().map(|v| v.hi).fold(0.0, f64::max);
    if !(c_low > 0.0) {
        return Err(Error::BpViolation("a sign combination vanishes".into()));
    }
    Ok(C0CopyCertificate {
        x_vectors: xs,
        x_norms,
        norm_lower,
        delta_over_m,
        partial_sum_bound,
        m_prime,
        basis_constants: BasisConstants { c_low, c_high },
        subsets_checked: masks.len(),
        sign_patterns_checked: patterns.len(),
    })
}

/// `||(T^{n+m} x - T^n x) - sum_{j<m} (T^{n+j+1} x - T^{n+j} x)||` (upper end).
pub fn telescope_check(op: &Operator, x: &SeqVec, n: u64, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Config("m must be >= 1".into()));
    }
    match op {
        Operator::Diagonal(_) => {
            let mut terms = vec![(n + m, ONE), (n, -ONE)];
            for j in 0..m {
                terms.push((n + j + 1, -ONE));
                terms.push((n + j, ONE));
            }
            Ok(op.combination(&terms, x)?.sup_norm().hi)
        }
        Operator::Matrix(t) => {
            let xv = t.to_coords(x)?;
            let exps: Vec<u64> = (n..=n + m).collect();
            let orbit = t.orbit_vec(&xv, &exps)?;
            let lhs = &orbit[m as usize] - &orbit[0];
            let mut rhs = crate::linalg::CVector::zeros(t.dim);
            for j in 0..m as usize {
                rhs += &orbit[j + 1] - &orbit[j];
            }
            Ok(crate::linalg::vec_inf_norm(&(lhs - rhs)))
        }
        Operator::Example1(_) => Err(Error::Unsupported("telescoping needs a sequence-space operator".into())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessOutcome {
    pub pbig: PbigResult,
    pub state: WitnessState,
    pub certificate: C0CopyCertificate,
}

pub fn run_pipeline(op: &Operator, x: &SeqVec, cfg: &WitnessConfig, acfg: &AnalysisConfig) -> Result<WitnessOutcome> {
    cfg.validate()?;
    acfg.validate()?;
    let split = crate::jdlg::split_for(op)?;
    let ctx = Context::new(op, &split, x, cfg.horizon_for(op));
    let pbig = pbig_extract(&ctx, cfg, acfg)?;
    if ctx.diagonal().is_none() {
        return Err(Error::Unsupported("alignment search is implemented for unimodular diagonals".into()));
    }
    let state = build_k_sequence(&ctx, &pbig, cfg)?;
    let certificate = bp_certificate(&ctx, &state, cfg)?;
    Ok(WitnessOutcome { pbig, state, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic() -> Operator {
        Operator::Diagonal(DiagonalOperator::dyadic_signed(1, false).unwrap())
    }

    #[test]
    fn telescoping_is_exact_for_dyadic_phases() {
        let op = dyadic();
        let x = SeqVec::ones(48);
        for (n, m) in [(0u64, 1u64), (3, 5), (1000, 24), (1 << 10, 1 << 10)] {
            assert_eq!(telescope_check(&op, &x, n, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn budget_matches_hand_count() {
        // Indices {1, 3}: 2^{1-3} + M + M^2 with M = 1, ||x|| = 1.
        assert_eq!(partial_sum_budget(0b101, 1.0, 1.0), 0.25 + 2.0);
        assert_eq!(partial_sum_budget(0b1, 1.0, 1.0), 2.0);
    }

    #[test]
    fn zero_vectors_align_immediately() {
        let op = dyadic();
        let split = crate::jdlg::split_for(&op).unwrap();
        let ctx = Context::new(&op, &split, &SeqVec::ones(48), 1 << 20);
        let zeros = vec![SeqVec::zeros(48)];
        let r = multap_refine(&ctx, &zeros, &[0, 1, 2, 3, 4, 5], 1e-3, 2).unwrap();
        assert_eq!(&r.indices[..2], &[0, 2]);
        assert_eq!(r.achieved, 0.0);
    }

    #[test]
    fn dyadic_ones_completes_all_stages() {
        let op = dyadic();
        let out = run_pipeline(&op, &SeqVec::ones(48), &WitnessConfig::default(), &AnalysisConfig::default()).unwrap();
        assert_eq!(out.state.k_seq.len(), 8);
        assert!(out.state.k_seq.windows(2).all(|w| w[1] > w[0]));
        for (i, s) in out.state.sigma_residuals.iter().enumerate() {
            assert!(*s <= 0.5f64.powi(i as i32 + 1) + 1e-9);
        }
        assert!(out.certificate.partial_sum_bound <= out.certificate.m_prime);
        assert!(out.certificate.basis_constants.c_low > 0.0);
    }

    #[test]
    fn starved_horizon_is_exhausted() {
        let op = dyadic();
        let cfg = WitnessConfig { horizon: Some(16), ..Default::default() };
        let r = run_pipeline(&op, &SeqVec::ones(48), &cfg, &AnalysisConfig::default());
        assert!(matches!(r, Err(Error::Exhausted { .. })), "{r:?}");
    }
}
