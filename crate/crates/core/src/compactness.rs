//! Evidence-graded relative-compactness analysis of indexed point families.
//!
//! Greedy epsilon-nets and delta-packings are computed in ascending index
//! order, so every result is deterministic and the net for a shorter
//! horizon is a prefix of the net for a longer one. Packings use the lower
//! end of each distance interval and coverings the upper end.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqspace::{NormInterval, Scalar, SeqVec};

type LagFn<'a> = Box<dyn Fn(u64) -> NormInterval + Send + Sync + 'a>;
type PairFn<'a> = Box<dyn Fn(u64, u64) -> NormInterval + Send + Sync + 'a>;
type MemberFn<'a> = Box<dyn Fn(u64) -> SeqVec + Send + Sync + 'a>;

pub enum FamilyMetric<'a> {
    /// `dist(p, q)` depends only on `|p - q|`.
    Lag(LagFn<'a>),
    Pair(PairFn<'a>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum IndexSet {
    /// `0, 1, ..., horizon - 1`.
    Range,
    /// The listed (ascending) indices below the horizon.
    Explicit(Vec<u64>),
}

/// Decreasing bound `|x_n| <= tau(n)` for every family member.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEnvelope {
    /// `tau(0..d)`.
    pub head: Vec<f64>,
    /// Bound for every coordinate `n >= d`.
    pub beyond: f64,
    /// `tau(n) -> 0` holds analytically.
    pub vanishes: bool,
    pub description: String,
}

impl TailEnvelope {
    pub fn tau(&self, n: usize) -> f64 {
        self.head.get(n).copied().unwrap_or(self.beyond)
    }

    pub fn scaled(&self, factor: f64, description: impl Into<String>) -> TailEnvelope {
        TailEnvelope {
            head: self.head.iter().map(|t| t * factor).collect(),
            beyond: self.beyond * factor,
            vanishes: self.vanishes,
            description: description.into(),
        }
    }
}

pub struct PointFamily<'a> {
    pub label: String,
    pub index_set: IndexSet,
    pub metric: FamilyMetric<'a>,
    pub members: Option<MemberFn<'a>>,
    pub envelope: Option<TailEnvelope>,
}

impl<'a> PointFamily<'a> {
    pub fn by_lag(label: impl Into<String>, f: impl Fn(u64) -> NormInterval + Send + Sync + 'a) -> Self {
        PointFamily {
            label: label.into(),
            index_set: IndexSet::Range,
            metric: FamilyMetric::Lag(Box::new(f)),
            members: None,
            envelope: None,
        }
    }

    pub fn by_pair(label: impl Into<String>, f: impl Fn(u64, u64) -> NormInterval + Send + Sync + 'a) -> Self {
        PointFamily {
            label: label.into(),
            index_set: IndexSet::Range,
            metric: FamilyMetric::Pair(Box::new(f)),
            members: None,
            envelope: None,
        }
    }

    /// Family given by its members; distances are `dist_interval`.
    pub fn from_members(label: impl Into<String>, f: impl Fn(u64) -> SeqVec + Send + Sync + Clone + 'a) -> Self {
        let g = f.clone();
        PointFamily {
            label: label.into(),
            index_set: IndexSet::Range,
            metric: FamilyMetric::Pair(Box::new(move |p, q| g(p).dist(&g(q)))),
            members: Some(Box::new(f)),
            envelope: None,
        }
    }

    pub fn with_members(mut self, f: impl Fn(u64) -> SeqVec + Send + Sync + 'a) -> Self {
        self.members = Some(Box::new(f));
        self
    }

    pub fn with_envelope(mut self, env: TailEnvelope) -> Self {
        self.envelope = Some(env);
        self
    }

    pub fn with_indices(mut self, idx: Vec<u64>) -> Self {
        self.index_set = IndexSet::Explicit(idx);
        self
    }

    pub fn indices(&self, horizon: u64) -> Vec<u64> {
        match &self.index_set {
            IndexSet::Range => (0..horizon).collect(),
            IndexSet::Explicit(v) => v.iter().copied().filter(|&i| i < horizon).collect(),
        }
    }

    /// Distance oracle restricted to the indices below `horizon`.
    pub fn view(&self, horizon: u64) -> FamilyView<'_, 'a> {
        let idx = self.indices(horizon);
        let lag_table = match (&self.metric, &self.index_set) {
            (FamilyMetric::Lag(f), IndexSet::Range) => Some((0..horizon).into_par_iter().map(f).collect()),
            _ => None,
        };
        FamilyView { family: self, idx, lag_table }
    }
}

pub struct FamilyView<'f, 'a> {
    family: &'f PointFamily<'a>,
    idx: Vec<u64>,
    lag_table: Option<Vec<NormInterval>>,
}

impl FamilyView<'_, '_> {
    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn index(&self, i: usize) -> u64 {
        self.idx[i]
    }

    /// Distance between the points at positions `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> NormInterval {
        if i == j {
            return NormInterval { lo: 0.0, hi: 0.0 };
        }
        let (p, q) = (self.idx[i], self.idx[j]);
        if let Some(t) = &self.lag_table {
            return t[p.abs_diff(q) as usize];
        }
        match &self.family.metric {
            FamilyMetric::Lag(f) => f(p.abs_diff(q)),
            FamilyMetric::Pair(f) => f(p.min(q), p.max(q)),
        }
    }
}

/// Greedy net: positions of the centers and, per position, the verified
/// covering distance (`hi` to the first earlier center within `eps`).
struct NetScan {
    centers: Vec<usize>,
    cover: Vec<f64>,
}

fn net_scan(view: &FamilyView, eps: f64) -> NetScan {
    let mut centers: Vec<usize> = Vec::new();
    let mut cover = vec![0.0; view.len()];
    for (i, slot) in cover.iter_mut().enumerate() {
        let mut near = None;
        for &c in &centers {
            if view.dist(i, c).lo <= eps {
                near = Some(c);
                break;
            }
        }
        match near {
            None => centers.push(i),
            Some(_) => {
                let mut best = f64::INFINITY;
                for &c in &centers {
                    let hi = view.dist(i, c).hi;
                    best = best.min(hi);
                    if hi <= eps {
                        break;
                    }
                }
                *slot = best;
            }
        }
    }
    NetScan { centers, cover }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetResult {
    pub eps: f64,
    pub horizon: u64,
    pub centers: Vec<u64>,
    /// Largest verified distance from a point to its covering center.
    pub covering_radius: f64,
    pub covered: bool,
}

pub fn greedy_net(family: &PointFamily, eps: f64, horizon: u64) -> Result<NetResult> {
    if !(eps > 0.0) {
        return Err(Error::Config("eps must be positive".into()));
    }
    let view = family.view(horizon);
    let scan = net_scan(&view, eps);
    let covering_radius = scan.cover.iter().copied().fold(0.0, f64::max);
    Ok(NetResult {
        eps,
        horizon,
        centers: scan.centers.iter().map(|&i| view.index(i)).collect(),
        covering_radius,
        covered: covering_radius <= eps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingResult {
    pub delta: f64,
    pub horizon: u64,
    pub witnesses: Vec<u64>,
    /// Smallest pairwise lower distance among the witnesses.
    pub min_pairwise_distance: f64,
}

fn packing_scan(view: &FamilyView, delta: f64, cap: Option<usize>) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::new();
    for i in 0..view.len() {
        if cap.is_some_and(|k| picked.len() >= k) {
            break;
        }
        if picked.iter().all(|&j| view.dist(i, j).lo >= delta) {
            picked.push(i);
        }
    }
    picked
}

fn min_pairwise(view: &FamilyView, pos: &[usize]) -> f64 {
    let mut m = f64::INFINITY;
    for (a, &i) in pos.iter().enumerate() {
        for &j in &pos[a + 1..] {
            m = m.min(view.dist(i, j).lo);
        }
    }
    m
}

pub fn greedy_packing(family: &PointFamily, delta: f64, horizon: u64, k_target: usize) -> Result<PackingResult> {
    if !(delta > 0.0) {
        return Err(Error::Config("delta must be positive".into()));
    }
    let view = family.view(horizon);
    Ok(packing_on_view(&view, delta, horizon, Some(k_target)))
}

fn packing_on_view(view: &FamilyView, delta: f64, horizon: u64, cap: Option<usize>) -> PackingResult {
    let pos = packing_scan(view, delta, cap);
    let min_pairwise_distance = min_pairwise(view, &pos);
    assert!(pos.len() < 2 || min_pairwise_distance >= delta, "packing verification failed");
    PackingResult { delta, horizon, witnesses: pos.iter().map(|&i| view.index(i)).collect(), min_pairwise_distance }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntropyFlag {
    Stable,
    Growing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyRow {
    pub eps: f64,
    pub horizon: u64,
    pub net_size: usize,
    pub covering_radius: f64,
    pub flag: EntropyFlag,
}

fn validate_grids(eps_grid: &[f64], horizons: &[u64]) -> Result<()> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0)) || eps_grid.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Config("eps_grid must be positive and strictly descending".into()));
    }
    if horizons.is_empty() || horizons[0] == 0 || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("horizons must be positive and strictly ascending".into()));
    }
    Ok(())
}

fn top_half(len: usize) -> std::ops::Range<usize> {
    len / 2..len
}

pub fn entropy_table(family: &PointFamily, eps_grid: &[f64], horizons: &[u64]) -> Result<Vec<EntropyRow>> {
    validate_grids(eps_grid, horizons)?;
    let h_max = *horizons.last().unwrap();
    let view = family.view(h_max);
    let per_eps: Vec<Vec<EntropyRow>> = eps_grid
        .par_iter()
        .map(|&eps| {
            let scan = net_scan(&view, eps);
            let rows: Vec<(u64, usize, f64)> = horizons
                .iter()
                .map(|&h| {
                    let n_pts = view.idx.partition_point(|&i| i < h);
                    let size = scan.centers.partition_point(|&c| c < n_pts);
                    let radius = scan.cover[..n_pts].iter().copied().fold(0.0, f64::max);
                    (h, size, radius)
                })
                .collect();
            let top = &rows[top_half(rows.len())];
            let flag = if top.iter().all(|r| r.1 == top[0].1) { EntropyFlag::Stable } else { EntropyFlag::Growing };
            rows.into_iter()
                .map(|(horizon, net_size, covering_radius)| EntropyRow { eps, horizon, net_size, covering_radius, flag })
                .collect()
        })
        .collect();
    Ok(per_eps.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TailCertificate {
    CompactCertified { certificate: String, max_tau: f64 },
    Rejected { member: u64, coordinate: Option<usize>, reason: String },
}

impl TailCertificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, TailCertificate::CompactCertified { .. })
    }
}

/// Relative slack absorbing rounding in `|a^k z|` against `|z|`.
const ENVELOPE_SLACK: f64 = 1e-12;

pub fn tail_uniform_certificate(family: &PointFamily, envelope: &TailEnvelope, horizon: u64) -> Result<TailCertificate> {
    let members = family
        .members
        .as_ref()
        .ok_or_else(|| Error::Precondition("the family carries no sequence data".into()))?;
    if !envelope.vanishes {
        return Ok(TailCertificate::Rejected { member: 0, coordinate: None, reason: "envelope is not known to vanish".into() });
    }
    if envelope.head.windows(2).any(|w| w[1] > w[0]) || envelope.head.last().is_some_and(|&t| envelope.beyond > t) {
        return Ok(TailCertificate::Rejected { member: 0, coordinate: None, reason: "envelope is not decreasing".into() });
    }
    let idx = family.indices(horizon);
    let found = idx.par_iter().find_map_first(|&k| {
        let v = members(k);
        if v.tail().center() != Scalar::new(0.0, 0.0) {
            return Some(TailCertificate::Rejected { member: k, coordinate: None, reason: "member has a nonzero limit".into() });
        }
        for (n, z) in v.head().iter().enumerate() {
            if z.norm() > envelope.tau(n) * (1.0 + ENVELOPE_SLACK) {
                return Some(TailCertificate::Rejected {
                    member: k,
                    coordinate: Some(n),
                    reason: format!("|x_n| = {:.6e} exceeds tau(n) = {:.6e}", z.norm(), envelope.tau(n)),
                });
            }
        }
        if v.tail().bound() > envelope.tau(v.dim()) * (1.0 + ENVELOPE_SLACK) {
            return Some(TailCertificate::Rejected {
                member: k,
                coordinate: Some(v.dim()),
                reason: format!("tail bound {:.6e} exceeds tau(d) = {:.6e}", v.tail().bound(), envelope.tau(v.dim())),
            });
        }
        None
    });
    if let Some(rej) = found {
        return Ok(rej);
    }
    let max_tau = envelope.head.iter().copied().fold(envelope.beyond, f64::max);
    Ok(TailCertificate::CompactCertified {
        certificate: format!(
            "bounded (sup tau = {max_tau:.6e}) with uniformly small tails ({}) implies totally bounded in c0",
            envelope.description
        ),
        max_tau,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub eps_grid: Vec<f64>,
    pub horizons: Vec<u64>,
    #[serde(rename = "K_min")]
    pub k_min: usize,
    /// Packing size sought when searching for the separation.
    pub k_target: usize,
    /// Fixed separation instead of the bisection search.
    pub delta_override: Option<f64>,
    pub head_dim: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            eps_grid: vec![2.0, 1.0, 0.5, 0.25, 0.125],
            horizons: vec![1 << 8, 1 << 9, 1 << 10, 1 << 11, 1 << 12],
            k_min: 32,
            k_target: 64,
            delta_override: None,
            head_dim: crate::seqspace::DEFAULT_HEAD_DIM,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        validate_grids(&self.eps_grid, &self.horizons)?;
        if self.k_min < 2 {
            return Err(Error::Config("K_min must be at least 2".into()));
        }
        if self.head_dim == 0 {
            return Err(Error::Config("head_dim must be positive".into()));
        }
        if let Some(d) = self.delta_override {
            if !(d > 0.0) {
                return Err(Error::Config("delta_override must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn max_horizon(&self) -> u64 {
        *self.horizons.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CompactCertified,
    CompactEvidence,
    NotCompactEvidence,
    Unknown,
}

impl Verdict {
    pub fn is_compact(self) -> bool {
        matches!(self, Verdict::CompactCertified | Verdict::CompactEvidence)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingWitness {
    pub delta: f64,
    pub witness_indices: Vec<u64>,
    /// Verified pairwise lower bound.
    pub verified_delta: f64,
    /// Uncapped greedy packing size at each upper-half horizon.
    pub growth: Vec<(u64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessVerdict {
    pub family: String,
    pub verdict: Verdict,
    pub entropy_table: Vec<EntropyRow>,
    pub packing: Option<PackingWitness>,
    pub tail_certificate: Option<TailCertificate>,
    pub certificate: String,
}

const DELTA_SHRINK: f64 = 0.9;
const DELTA_SHRINK_STEPS: i32 = 6;

/// Largest `delta` among the lower distances from the first point for which
/// the capped greedy packing reaches `target`.
fn search_delta(view: &FamilyView, target: usize) -> Option<f64> {
    if view.len() < 2 {
        return None;
    }
    let mut cand: Vec<f64> = (1..view.len()).map(|j| view.dist(0, j).lo).filter(|d| *d > 0.0).collect();
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let reaches = |d: f64| packing_scan(view, d, Some(target)).len() >= target;
    if cand.is_empty() || !reaches(cand[0]) {
        return None;
    }
    let (mut lo, mut hi) = (0usize, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if reaches(cand[mid]) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Some(cand[lo])
}

pub fn verdict(family: &PointFamily, cfg: &AnalysisConfig) -> Result<CompactnessVerdict> {
    cfg.validate()?;
    let h_max = cfg.max_horizon();
    let table = entropy_table(family, &cfg.eps_grid, &cfg.horizons)?;

    let tail_certificate = match (&family.members, &family.envelope) {
        (Some(_), Some(env)) => Some(tail_uniform_certificate(family, env, h_max)?),
        _ => None,
    };
    if let Some(TailCertificate::CompactCertified { certificate, .. }) = &tail_certificate {
        return Ok(CompactnessVerdict {
            family: family.label.clone(),
            verdict: Verdict::CompactCertified,
            entropy_table: table,
            packing: None,
            certificate: certificate.clone(),
            tail_certificate,
        });
    }

    let view = family.view(h_max);
    let target = cfg.k_target.max(cfg.k_min);
    // Candidate separations: the override, or the largest delta reaching
    // the target, then K_min, then geometrically smaller values. The first
    // candidate whose packing keeps growing with the horizon is kept.
    let candidates: Vec<f64> = match cfg.delta_override {
        Some(d) => vec![d],
        None => {
            let mut c: Vec<f64> = [search_delta(&view, target), search_delta(&view, cfg.k_min)].into_iter().flatten().collect();
            if let Some(&last) = c.last() {
                c.extend((1..=DELTA_SHRINK_STEPS).map(|j| last * DELTA_SHRINK.powi(j)));
            }
            c
        }
    };
    let mut packing: Option<PackingWitness> = None;
    for delta in candidates {
        let capped = packing_on_view(&view, delta, h_max, Some(target));
        let growth: Vec<(u64, usize)> = cfg.horizons[top_half(cfg.horizons.len())]
            .iter()
            .map(|&h| (h, packing_scan(&family.view(h), delta, None).len()))
            .collect();
        let p = PackingWitness {
            delta,
            verified_delta: capped.min_pairwise_distance,
            witness_indices: capped.witnesses,
            growth,
        };
        let grows = p.witness_indices.len() >= cfg.k_min && p.growth.windows(2).all(|w| w[1].1 > w[0].1);
        if packing.is_none() || grows {
            packing = Some(p);
        }
        if grows {
            break;
        }
    }
    let growing = packing.as_ref().is_some_and(|p| {
        p.witness_indices.len() >= cfg.k_min && p.growth.windows(2).all(|w| w[1].1 > w[0].1)
    });
    let all_stable = table.iter().all(|r| r.flag == EntropyFlag::Stable);
    let (verdict, certificate) = if growing {
        let p = packing.as_ref().unwrap();
        (
            Verdict::NotCompactEvidence,
            format!(
                "{} points pairwise >= {:.10} apart; packing count grows with the horizon",
                p.witness_indices.len(),
                p.verified_delta
            ),
        )
    } else if all_stable {
        (Verdict::CompactEvidence, "net sizes stable over the upper half of the horizons for every eps".to_string())
    } else {
        (Verdict::Unknown, "neither stable nets nor a growing separated set".to_string())
    };
    Ok(CompactnessVerdict { family: family.label.clone(), verdict, entropy_table: table, packing, tail_certificate, certificate })
}
