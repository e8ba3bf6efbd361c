//! End-to-end runs of the worked examples and a randomized matrix suite.
//! Each run yields a `GalleryReport` whose parity checks pair an observed
//! value with the threshold it must meet.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compactness::{entropy_table, verdict, AnalysisConfig, CompactnessVerdict, EntropyFlag, EntropyRow, PointFamily, Verdict};
use crate::ensembles::{gaussian_matrix, random_power_bounded};
use crate::error::{Error, Result};
use crate::families::{diff_family, diff_family_metric_only, orbit_family};
use crate::jdlg::{
    jdlg_project, mean_ergodicity_probe, split_for, stable_part_convergence, ConvergenceReport, ConvergenceVerdict,
    ErgodicityReport, ErgodicityVerdict, JdlgSummary,
};
use crate::linalg::max_principal_sine;
use crate::operators::{DiagonalOperator, Example1Operator, GridSpec, MatrixOperator, Operator, RootOfUnity, Which};
use crate::seqspace::{NormInterval, Scalar, SeqVec};
use crate::witness::{pbig_extract, run_pipeline, telescope_check, Context, WitnessConfig, WitnessOutcome};

pub const TELESCOPE_TOL: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const ANGLE_TOL: f64 = 1e-7;
pub const GRID_TOL: f64 = 1e-4;
pub const SIGMA_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GalleryConfig {
    pub analysis: AnalysisConfig,
    pub witness: WitnessConfig,
    pub head_dim: usize,
    /// Step of the shift example.
    pub a: f64,
    pub grid: GridSpec,
    pub grid_pairs: usize,
    pub grid_max_lag: u64,
    pub stable_eps: Vec<f64>,
    pub stable_horizons: Vec<u64>,
    pub cesaro_ns: Vec<u64>,
    /// Horizons for the per-trial analyses of the matrix suite.
    pub suite_horizons: Vec<u64>,
    pub trials: usize,
    pub jordan_trials: usize,
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for GalleryConfig {
    fn default() -> Self {
        GalleryConfig {
            analysis: AnalysisConfig::default(),
            witness: WitnessConfig::default(),
            head_dim: crate::seqspace::DEFAULT_HEAD_DIM,
            a: 1.0,
            grid: GridSpec::default(),
            grid_pairs: 1000,
            grid_max_lag: 1 << 12,
            stable_eps: vec![1.0, 0.5, 0.25],
            stable_horizons: vec![1 << 10, 1 << 11, 1 << 12],
            cesaro_ns: (4..=12).map(|k| 1u64 << k).collect(),
            suite_horizons: vec![64, 128, 256],
            trials: 100,
            jordan_trials: 10,
            max_dim: 8,
            seed: 42,
        }
    }
}

impl GalleryConfig {
    pub fn validate(&self) -> Result<()> {
        self.analysis.validate()?;
        self.witness.validate()?;
        if self.head_dim < 2 {
            return Err(Error::Config("head_dim must be at least 2".into()));
        }
        if self.trials == 0 || self.trials > 10_000 {
            return Err(Error::Config("trials must lie in 1..=10000".into()));
        }
        if self.max_dim == 0 || self.max_dim > 8 {
            return Err(Error::Config("max_dim must lie in 1..=8".into()));
        }
        if self.grid.steps < 2 || self.grid_max_lag == 0 {
            return Err(Error::Config("grid needs at least 2 steps and a positive lag range".into()));
        }
        Ok(())
    }

    fn suite_analysis(&self) -> AnalysisConfig {
        AnalysisConfig { horizons: self.suite_horizons.clone(), ..self.analysis.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParityCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(checks: &mut Vec<ParityCheck>, name: &str, passed: bool, detail: String) {
    checks.push(ParityCheck { name: name.to_string(), passed, detail });
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub k_seq: Vec<u64>,
    pub sigma_residuals: Vec<f64>,
    pub norm_lower: f64,
    pub delta_over_m: f64,
    #[serde(rename = "M_prime")]
    pub m_prime: f64,
    pub partial_sum_bound: f64,
    pub basis_constants: crate::witness::BasisConstants,
    pub subsets_checked: usize,
    pub sign_patterns_checked: usize,
    pub x_norms: Vec<f64>,
    pub n_subseq: Vec<u64>,
    pub head_dim: usize,
}

impl From<&WitnessOutcome> for WitnessSummary {
    fn from(o: &WitnessOutcome) -> Self {
        let c = &o.certificate;
        WitnessSummary {
            delta: o.state.delta,
            m: o.state.m,
            k_seq: o.state.k_seq.clone(),
            sigma_residuals: o.state.sigma_residuals.clone(),
            norm_lower: c.norm_lower,
            delta_over_m: c.delta_over_m,
            m_prime: c.m_prime,
            partial_sum_bound: c.partial_sum_bound,
            basis_constants: c.basis_constants,
            subsets_checked: c.subsets_checked,
            sign_patterns_checked: c.sign_patterns_checked,
            x_norms: c.x_norms.clone(),
            n_subseq: o.state.n_subseq.clone(),
            head_dim: o.state.head_dim,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub dim: usize,
    pub rv_dim: usize,
    pub st_dim: usize,
    pub cond_s: f64,
    pub idempotence: f64,
    pub commutation: f64,
    pub rv_angle: f64,
    pub st_angle: f64,
    pub power_bound: f64,
    pub convergence: Option<ConvergenceVerdict>,
    pub telescope_max: f64,
    pub orbit_verdict: Option<Verdict>,
    pub d1_verdict: Option<Verdict>,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JordanOutcome {
    pub trial: usize,
    pub dim: usize,
    pub rejected: bool,
    pub outcome: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub trials: Vec<TrialOutcome>,
    pub passed: usize,
    pub jordan: Vec<JordanOutcome>,
    pub jordan_rejected: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GalleryReport {
    pub example_id: String,
    pub operator: String,
    pub verdicts: BTreeMap<String, CompactnessVerdict>,
    pub jdlg: Option<JdlgSummary>,
    pub convergence: Option<ConvergenceReport>,
    pub ergodicity: Option<ErgodicityReport>,
    pub witness: Option<WitnessSummary>,
    pub suite: Option<SuiteSummary>,
    /// Extra entropy tables keyed by label (CSV output).
    pub tables: BTreeMap<String, Vec<EntropyRow>>,
    pub checks: Vec<ParityCheck>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl GalleryReport {
    fn new(example_id: &str, operator: String) -> Self {
        GalleryReport {
            example_id: example_id.to_string(),
            operator,
            verdicts: BTreeMap::new(),
            jdlg: None,
            convergence: None,
            ergodicity: None,
            witness: None,
            suite: None,
            tables: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            passed: false,
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn failed_checks(&self) -> Vec<&ParityCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn verified_delta(v: &CompactnessVerdict) -> (f64, usize) {
    v.packing.as_ref().map_or((0.0, 0), |p| (p.verified_delta, p.witness_indices.len()))
}

pub fn run_example1(cfg: &GalleryConfig) -> Result<GalleryReport> {
    cfg.validate()?;
    let e = Example1Operator::new(cfg.a)?;
    let op = Operator::Example1(e);
    let mut rep = GalleryReport::new("example1", format!("shift by a = {} on the closed-form orbit family", cfg.a));
    let token = SeqVec::ones(1);
    let h = cfg.analysis.max_horizon();

    let orbit = verdict(&orbit_family(&op, &token, h)?, &cfg.analysis)?;
    let (delta, count) = verified_delta(&orbit);
    let separated = 4.0 * cfg.a >= std::f64::consts::PI;
    check(
        &mut rep.checks,
        "orbit_not_compact",
        orbit.verdict == Verdict::NotCompactEvidence && (!separated || delta >= SQRT_2 - 1e-9),
        format!("verdict {:?}, verified delta {delta:.10}, {count} witnesses", orbit.verdict),
    );
    rep.verdicts.insert("orbit".into(), orbit);

    let diff = verdict(&diff_family(&op, &token, 1, h, cfg.head_dim)?, &cfg.analysis)?;
    check(&mut rep.checks, "diff_orbit_compact", diff.verdict.is_compact(), format!("verdict {:?}", diff.verdict));
    rep.verdicts.insert("diff_m1".into(), diff);

    let table = entropy_table(&diff_family_metric_only(e, 1), &cfg.stable_eps, &cfg.stable_horizons)?;
    let stable = table.iter().all(|r| r.flag == EntropyFlag::Stable);
    let sizes: Vec<String> = table.iter().map(|r| format!("{}@{}:{}", r.eps, r.horizon, r.net_size)).collect();
    check(&mut rep.checks, "diff_entropy_stable", stable, sizes.join(" "));
    rep.tables.insert("diff_m1_closed_form".into(), table);

    let env_ok = (0..cfg.head_dim).all(|n| e.diff_envelope(1, n) <= cfg.a / 2f64.powi(n as i32) * (1.0 + 1e-15));
    check(&mut rep.checks, "envelope_below_a_over_2n", env_ok, format!("tau(n) <= a/2^n for n < {}", cfg.head_dim));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<(u64, u64, Which)> = (0..cfg.grid_pairs)
        .map(|i| {
            let p = rng.random_range(0..cfg.grid_max_lag);
            let q = rng.random_range(0..cfg.grid_max_lag);
            (p, q, if i % 2 == 0 { Which::Orbit } else { Which::DiffOrbit { m: 1 } })
        })
        .collect();
    let worst = pairs
        .par_iter()
        .map(|&(p, q, w)| (e.distance(w, p, q) - e.grid_oracle(p, q, w, cfg.grid)).abs())
        .reduce(|| 0.0, f64::max);
    check(&mut rep.checks, "grid_oracle_agreement", worst <= GRID_TOL, format!("max deviation {worst:.3e} over {} pairs", cfg.grid_pairs));

    rep.notes.push("the shift is an isometry with isometric inverse, hence doubly power-bounded (M = 1)".into());
    rep.notes.push(format!("unit-lag orbit distance {:.8}", e.orbit_distance(0, 1)));
    Ok(rep.finish())
}

pub fn run_diagonal_c(cfg: &GalleryConfig) -> Result<GalleryReport> {
    cfg.validate()?;
    let t = DiagonalOperator::dyadic(1, RootOfUnity::ONE)?;
    let op = Operator::Diagonal(t.clone());
    let x = SeqVec::ones(cfg.head_dim);
    let d = cfg.head_dim;
    let h = cfg.analysis.max_horizon();
    let mut rep = GalleryReport::new("diagonal-c", "diagonal a_n = exp(2 pi i / 2^(n+1)) on c, x = 1".into());
    let split = split_for(&op)?;
    rep.jdlg = Some(split.summary());

    let y = crate::families::difference_vector(&op, &x, 1)?;
    let ny = y.sup_norm();
    check(&mut rep.checks, "diff_norm_is_two", ny.lo == 2.0 && ny.hi == 2.0, format!("||(T - I)1|| in [{}, {}]", ny.lo, ny.hi));

    let d1_family = diff_family(&op, &x, 1, h, d)?;
    let env = d1_family.envelope.clone();
    let d1 = verdict(&d1_family, &cfg.analysis)?;
    let env_match = env.as_ref().is_some_and(|env| (0..d).all(|n| (env.tau(n) - (t.entry(n) - Scalar::new(1.0, 0.0)).norm()).abs() <= 1e-15));
    check(
        &mut rep.checks,
        "d1_certified",
        d1.verdict == Verdict::CompactCertified && env_match,
        format!("verdict {:?}; envelope equals |a_n - 1|: {env_match}", d1.verdict),
    );
    rep.verdicts.insert("diff_m1".into(), d1);

    let orbit = verdict(&orbit_family(&op, &x, h)?, &cfg.analysis)?;
    let (delta, count) = verified_delta(&orbit);
    check(
        &mut rep.checks,
        "orbit_not_compact",
        orbit.verdict == Verdict::NotCompactEvidence && delta >= SQRT_2 * (1.0 - 1e-6),
        format!("verdict {:?}, verified delta {delta:.10}, {count} witnesses", orbit.verdict),
    );
    rep.verdicts.insert("orbit".into(), orbit);

    // Powers-of-two witnesses T^{2^k} 1, k <= d - 2.
    let ladder: Vec<u64> = (0..=(d as u64 - 2).min(62)).map(|k| 1u64 << k).collect();
    let vs: Vec<SeqVec> = ladder.iter().map(|&k| t.apply_power(k, &x)).collect();
    let mut ladder_min = f64::INFINITY;
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            ladder_min = ladder_min.min(vs[i].dist(&vs[j]).lo);
        }
    }
    let t2 = t.clone();
    let x2 = x.clone();
    let lf = PointFamily::from_members("ladder", move |k| t2.apply_power(k, &x2)).with_indices(ladder.clone());
    let lp = crate::compactness::greedy_packing(&lf, SQRT_2 * (1.0 - 1e-6), u64::MAX, ladder.len())?;
    check(
        &mut rep.checks,
        "ladder_separation",
        ladder_min >= SQRT_2 - 1e-12 && lp.witnesses.len() >= 10,
        format!("min pairwise distance {ladder_min:.10} over {} powers of two; packing size {}", ladder.len(), lp.witnesses.len()),
    );

    let erg = mean_ergodicity_probe(&op, &x, &cfg.cesaro_ns)?;
    let rows_ok = erg.rows.iter().all(|r| {
        r.norm_lo >= 1.0 && r.coordinate1.zip(r.coordinate1_bound).is_some_and(|(c, b)| c <= b + 1e-15)
    });
    let bound_ok = erg.rows.iter().all(|r| r.coordinate1_bound.is_some_and(|b| b <= 2.0 / (r.n as f64 * SQRT_2) + 1e-15));
    check(
        &mut rep.checks,
        "not_mean_ergodic",
        erg.verdict == ErgodicityVerdict::NotMeanErgodic && rows_ok && bound_ok,
        format!("verdict {:?}; ||A_N 1|| >= 1 with |coordinate 1| <= 2/(N sqrt 2) on all rows: {}", erg.verdict, rows_ok && bound_ok),
    );
    rep.ergodicity = Some(erg);

    let conv = stable_part_convergence(&op, &split, &x, 64, 1e-9)?;
    check(&mut rep.checks, "stable_part_trivial", conv.verdict == ConvergenceVerdict::Converged, "I - P = 0".into());
    rep.convergence = Some(conv);

    match run_pipeline(&op, &x, &cfg.witness, &cfg.analysis) {
        Ok(out) => {
            let s = &out.state;
            let sig_ok = s.sigma_residuals.iter().enumerate().all(|(i, r)| *r <= 0.5f64.powi(i as i32 + 1) + SIGMA_SLACK);
            let c = &out.certificate;
            check(&mut rep.checks, "witness_stages", s.k_seq.len() == cfg.witness.m_target, format!("{} exponents", s.k_seq.len()));
            check(&mut rep.checks, "sigma_residuals", sig_ok, format!("{:?}", s.sigma_residuals));
            check(
                &mut rep.checks,
                "norm_floor",
                c.norm_lower >= c.delta_over_m - SIGMA_SLACK,
                format!("min ||x_i|| = {} vs delta/M = {}", c.norm_lower, c.delta_over_m),
            );
            check(
                &mut rep.checks,
                "partial_sums_bounded",
                c.partial_sum_bound <= c.m_prime + SIGMA_SLACK,
                format!("{} subsets, max {} vs M' = {}", c.subsets_checked, c.partial_sum_bound, c.m_prime),
            );
            check(&mut rep.checks, "basis_lower_constant", c.basis_constants.c_low > 0.0, format!("c_low = {}", c.basis_constants.c_low));
            rep.witness = Some(WitnessSummary::from(&out));
        }
        Err(e) => check(&mut rep.checks, "witness_stages", false, e.to_string()),
    }

    // The separation sqrt 2 of the powers-of-two witnesses gives delta0 = sqrt(2)/2.
    let wcfg = WitnessConfig { separation_override: Some(SQRT_2), ..cfg.witness.clone() };
    let ctx = Context::new(&op, &split, &x, wcfg.horizon_for(&op));
    let pb = pbig_extract(&ctx, &wcfg, &cfg.analysis)?;
    check(
        &mut rep.checks,
        "delta_from_root_two_separation",
        (pb.delta - 0.9 * SQRT_2 / 2.0).abs() < 1e-12 && pb.trimmed_prefix == 0,
        format!("delta = {:.6}, trimmed prefix {}", pb.delta, pb.trimmed_prefix),
    );
    rep.notes.push("the entries are dyadic phases so that all powers are exact".into());
    rep.notes.push("the projection is the identity on c0 and the stable part is trivial".into());
    Ok(rep.finish())
}

pub fn run_mth_root(m: u64, cfg: &GalleryConfig) -> Result<GalleryReport> {
    if m < 2 {
        return Err(Error::Config("m must be at least 2".into()));
    }
    cfg.validate()?;
    let b = RootOfUnity::new(1, m)?;
    let t = DiagonalOperator::dyadic(1, b)?;
    let op = Operator::Diagonal(t.clone());
    let x = SeqVec::ones(cfg.head_dim);
    let h = cfg.analysis.max_horizon();
    let mut rep = GalleryReport::new("mth-root", format!("diagonal a_n = b exp(2 pi i / 2^(n+1)), b = exp(2 pi i / {m}), x = 1"));

    let dm = verdict(&diff_family(&op, &x, m, h, cfg.head_dim)?, &cfg.analysis)?;
    check(&mut rep.checks, "dm_certified", dm.verdict == Verdict::CompactCertified, format!("verdict {:?}", dm.verdict));
    rep.verdicts.insert(format!("diff_m{m}"), dm);

    let d1 = verdict(&diff_family(&op, &x, 1, h, cfg.head_dim)?, &cfg.analysis)?;
    check(&mut rep.checks, "d1_not_compact", d1.verdict == Verdict::NotCompactEvidence, format!("verdict {:?}", d1.verdict));
    rep.verdicts.insert("diff_m1".into(), d1);

    // Tail limits of T^k (T - I) 1 are b^k (b - 1).
    let y = crate::families::difference_vector(&op, &x, 1)?;
    let diam = (1..m)
        .map(|k| t.apply_power(k, &y).dist(&y))
        .fold(NormInterval::exact(0.0), |a, d| if d.lo > a.lo { d } else { a });
    let lim = (b.pow(1) - Scalar::new(1.0, 0.0)).norm();
    let expect = (1..m).map(|k| (b.pow(k) - Scalar::new(1.0, 0.0)).norm() * lim).fold(0.0, f64::max);
    check(
        &mut rep.checks,
        "d1_diameter",
        diam.lo >= expect - 1e-6 && (m != 2 || diam.lo >= 4.0 - 1e-6),
        format!("diameter lower bound {:.10} (tail limits give {:.10})", diam.lo, expect),
    );
    rep.notes.push(
        "the equivalence of compact D_m and compact D_1 needs a space without c0; here E = c contains c0".into(),
    );
    rep.notes.push("D_1 is tested at x = 1; for null sequences x the set D_1 is relatively compact".into());
    Ok(rep.finish())
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> SeqVec {
    let g = gaussian_matrix(rng, n, 1);
    MatrixOperator::from_coords(&g.column(0).into_owned())
}

fn matrix_trial(i: usize, cfg: &GalleryConfig, acfg: &AnalysisConfig) -> TrialOutcome {
    let mut rng = trial_rng(cfg.seed, i as u64);
    let c = random_power_bounded(&mut rng, cfg.max_dim, false);
    let x = random_vector(&mut rng, c.operator.dim);
    let mut out = TrialOutcome {
        trial: i,
        dim: c.operator.dim,
        rv_dim: c.rv_dim,
        st_dim: c.st_dim,
        cond_s: c.cond_s,
        idempotence: f64::NAN,
        commutation: f64::NAN,
        rv_angle: f64::NAN,
        st_angle: f64::NAN,
        power_bound: f64::NAN,
        convergence: None,
        telescope_max: f64::NAN,
        orbit_verdict: None,
        d1_verdict: None,
        passed: false,
        error: None,
    };
    let res = (|| -> Result<()> {
        let split = jdlg_project(&c.operator)?;
        out.idempotence = split.residuals.idempotence;
        out.commutation = split.residuals.commutation;
        out.rv_angle = max_principal_sine(&split.rv_basis, &c.rv_basis);
        out.st_angle = max_principal_sine(&split.st_basis, &c.st_basis);
        out.power_bound = split.power_bound.m;
        let op = Operator::Matrix(c.operator.clone());
        out.convergence = Some(stable_part_convergence(&op, &split, &x, 256, 1e-9)?.verdict);
        let mut tmax: f64 = 0.0;
        for n in 0..=16u64 {
            for m in 1..=6u64 {
                tmax = tmax.max(telescope_check(&op, &x, n, m)?);
            }
        }
        out.telescope_max = tmax;
        let h = acfg.max_horizon();
        out.orbit_verdict = Some(verdict(&orbit_family(&op, &x, h)?, acfg)?.verdict);
        out.d1_verdict = Some(verdict(&diff_family(&op, &x, 1, h, acfg.head_dim)?, acfg)?.verdict);
        Ok(())
    })();
    match res {
        Ok(()) => {
            out.passed = out.idempotence <= RESIDUAL_TOL
                && out.commutation <= RESIDUAL_TOL
                && out.rv_angle <= ANGLE_TOL
                && out.st_angle <= ANGLE_TOL
                && out.convergence == Some(ConvergenceVerdict::Converged)
                && out.telescope_max <= TELESCOPE_TOL
                && out.orbit_verdict.is_some_and(Verdict::is_compact)
                && out.d1_verdict.is_some_and(Verdict::is_compact);
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

fn jordan_trial(i: usize, cfg: &GalleryConfig) -> JordanOutcome {
    let mut rng = trial_rng(cfg.seed ^ 0x4a6f_7264_616e, i as u64);
    let c = random_power_bounded(&mut rng, cfg.max_dim, true);
    let r = crate::jdlg::check_power_bounded(&c.operator, crate::jdlg::DEFAULT_TOL);
    let (rejected, outcome) = match r {
        Err(Error::NotPowerBounded(msg)) => (true, format!("NOT_POWER_BOUNDED: {msg}")),
        Err(e) => (false, e.to_string()),
        Ok(_) => (false, "accepted".into()),
    };
    JordanOutcome { trial: i, dim: c.operator.dim, rejected, outcome }
}

pub fn run_matrix_suite(cfg: &GalleryConfig) -> Result<GalleryReport> {
    cfg.validate()?;
    let acfg = cfg.suite_analysis();
    acfg.validate()?;
    let mut rep = GalleryReport::new("matrix-suite", format!("random S (U + N) S^-1, dim <= {}", cfg.max_dim));
    let trials: Vec<TrialOutcome> = (0..cfg.trials).into_par_iter().map(|i| matrix_trial(i, cfg, &acfg)).collect();
    let jordan: Vec<JordanOutcome> = (0..cfg.jordan_trials).into_par_iter().map(|i| jordan_trial(i, cfg)).collect();
    let passed = trials.iter().filter(|t| t.passed).count();
    let jordan_rejected = jordan.iter().filter(|j| j.rejected).count();
    check(&mut rep.checks, "trials_pass", passed == trials.len(), format!("{passed}/{} trials pass", trials.len()));
    check(
        &mut rep.checks,
        "jordan_rejected",
        jordan_rejected == jordan.len(),
        format!("{jordan_rejected}/{} defective trials rejected", jordan.len()),
    );
    rep.notes.push("finite-dimensional spaces contain no copy of c0, so orbit and D_1 must both be compact".into());
    rep.suite = Some(SuiteSummary { seed: cfg.seed, trials, passed, jordan, jordan_rejected });
    Ok(rep.finish())
}
