//! Command-line front end: `orbitlab <decompose|analyze|witness|gallery|lemma>`.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::compactness::{verdict, AnalysisConfig, CompactnessVerdict, PointFamily};
use crate::error::{Error, ExitCode, Result};
use crate::families::{diff_family, orbit_family};
use crate::gallery::{run_diagonal_c, run_example1, run_matrix_suite, run_mth_root, GalleryConfig, GalleryReport, WitnessSummary};
use crate::jdlg::split_for;
use crate::operators::{DiagonalOperator, Operator, OperatorSpec, RootOfUnity};
use crate::output::{entropy_csv, packing_csv, write_atomic, write_json};
use crate::seqspace::{Scalar, SeqVec, Tail};
use crate::witness::{multap_refine, pbig_extract, run_pipeline, telescope_check, Context, WitnessConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailSpec {
    Null {
        #[serde(default)]
        bound: f64,
    },
    Limit {
        limit: [f64; 2],
        #[serde(default)]
        bound: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorSpec {
    Ones,
    Basis { index: usize },
    Coords { values: Vec<[f64; 2]>, tail: TailSpec },
}

impl VectorSpec {
    /// Vectors for matrices are finitely supported in the first `dim`
    /// coordinates; for diagonals the head has length `head_dim`.
    pub fn build(&self, op: &Operator, head_dim: usize) -> Result<SeqVec> {
        let one = Scalar::new(1.0, 0.0);
        match (self, op) {
            (VectorSpec::Ones, Operator::Matrix(t)) => SeqVec::finite(vec![one; t.dim]),
            (VectorSpec::Ones, _) => Ok(SeqVec::ones(head_dim)),
            (VectorSpec::Basis { index }, Operator::Matrix(t)) => {
                if *index >= t.dim {
                    return Err(Error::Config(format!("basis index {index} out of range for dimension {}", t.dim)));
                }
                Ok(SeqVec::basis(*index, t.dim))
            }
            (VectorSpec::Basis { index }, _) => Ok(SeqVec::basis(*index, head_dim.max(index + 1))),
            (VectorSpec::Coords { values, tail }, _) => {
                if values.is_empty() {
                    return Err(Error::Config("coords needs at least one value".into()));
                }
                let head: Vec<Scalar> = values.iter().map(|z| Scalar::new(z[0], z[1])).collect();
                let tail = match tail {
                    TailSpec::Null { bound } => Tail::NullEnvelope { bound: *bound },
                    TailSpec::Limit { limit, bound } => Tail::ConvergentLimit { limit: Scalar::new(limit[0], limit[1]), bound: *bound },
                };
                SeqVec::new(head, tail)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Orbit,
    Diff { m: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GalleryId {
    Example1,
    DiagonalC,
    MthRoot,
    MatrixSuite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LemmaName {
    Telescoping,
    Multap,
    Pbig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GallerySection {
    pub id: GalleryId,
    #[serde(default)]
    pub m: Option<u64>,
    #[serde(default)]
    pub config: GalleryConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSection {
    pub name: LemmaName,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    100
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    #[serde(default)]
    pub vector: Option<VectorSpec>,
    #[serde(default)]
    pub analysis: Option<AnalysisConfig>,
    #[serde(default)]
    pub witness: Option<WitnessConfig>,
    #[serde(default)]
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub gallery: Option<GallerySection>,
    #[serde(default)]
    pub lemma: Option<LemmaSection>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            Error::Config(format!("at `{}` (line {}, column {}): {inner}", e.path(), inner.line(), inner.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn analysis(&self) -> Result<AnalysisConfig> {
        let a = self.analysis.clone().unwrap_or_default();
        a.validate()?;
        Ok(a)
    }

    fn operator(&self) -> Result<Operator> {
        self.operator.as_ref().ok_or_else(|| Error::Config("`operator` is required".into()))?.build()
    }

    fn vector(&self, op: &Operator, head_dim: usize) -> Result<SeqVec> {
        match (op, &self.vector) {
            // The shift acts on a fixed closed-form vector; only `ones` is meaningful.
            (Operator::Example1(_), None) => Ok(SeqVec::ones(1)),
            (_, Some(v)) => v.build(op, head_dim),
            (_, None) => Err(Error::Config("`vector` is required".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Orbit,
    Diff,
}

#[derive(Debug, Parser)]
#[command(name = "orbitlab", version, about = "Orbit compactness, spectral splitting and c0-copy witnesses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `out_dir` in the configuration; default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every random choice (overrides the configuration).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral splitting and power bound of the operator.
    Decompose(Common),
    /// Compactness verdict for the orbit or a difference orbit.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Family to analyse (overrides `target` in the configuration).
        #[arg(long, value_enum)]
        target: Option<TargetArg>,
        /// Difference step for `--target diff`.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Extract exponents and verify the basic-sequence conditions.
    Witness(Common),
    /// Run a worked example end to end.
    Gallery {
        #[command(flatten)]
        common: Common,
        /// Example to run (overrides `gallery.id`).
        #[arg(long, value_enum)]
        id: Option<GalleryId>,
        /// Root order for `mth-root` (overrides `gallery.m`).
        #[arg(long)]
        m: Option<u64>,
    },
    /// Randomized property runs of the building blocks.
    Lemma {
        #[command(flatten)]
        common: Common,
        /// Building block to exercise (overrides `lemma.name`).
        #[arg(long, value_enum)]
        name: Option<LemmaName>,
        /// Number of randomized trials (overrides `lemma.trials`).
        #[arg(long)]
        trials: Option<usize>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Decompose(c) | Command::Witness(c) => c,
            Command::Analyze { common, .. } | Command::Gallery { common, .. } | Command::Lemma { common, .. } => common,
        }
    }
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn error_json(e: &Error) -> serde_json::Value {
    let mut v = json!({
        "status": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code() as i32,
    });
    if let Error::Exhausted { stage, best_tol, partial } = e {
        v["stage"] = json!(stage);
        v["best_tol"] = json!(best_tol);
        v["partial"] = serde_json::to_value(partial).unwrap_or(serde_json::Value::Null);
    }
    v
}

/// Output of one command. The primary JSON document travels with any CSV
/// tables and with the exit code it maps to.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub json_name: &'static str,
    pub json: serde_json::Value,
    pub tables: Vec<(String, Vec<u8>)>,
    pub exit: ExitCode,
}

impl Artifacts {
    fn ok(json_name: &'static str, json: serde_json::Value) -> Self {
        Artifacts { json_name, json, tables: Vec::new(), exit: ExitCode::Success }
    }

    fn failure(json_name: &'static str, e: &Error) -> Self {
        Artifacts { json_name, json: error_json(e), tables: Vec::new(), exit: e.exit_code() }
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        write_json(&out.join(self.json_name), &self.json)?;
        for (name, bytes) in &self.tables {
            write_atomic(&out.join(name), bytes)?;
        }
        Ok(())
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Config(format!("serialization failed: {e}")))
}

pub fn cmd_decompose(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let op = cfg.operator()?;
    Ok(match split_for(&op) {
        Ok(split) => Artifacts::ok("report.json", json!({"status": "OK", "operator": op.kind(), "jdlg": split.summary()})),
        Err(e) => Artifacts::failure("report.json", &e),
    })
}

/// Per-witness minimum distance to the other witnesses.
fn packing_rows(family: &PointFamily, v: &CompactnessVerdict, horizon: u64) -> Vec<(usize, u64, f64)> {
    let Some(p) = &v.packing else { return Vec::new() };
    let view = family.view(horizon);
    let pos: Vec<usize> = p
        .witness_indices
        .iter()
        .map(|w| (0..view.len()).find(|&i| view.index(i) == *w).expect("witness within horizon"))
        .collect();
    pos.iter()
        .enumerate()
        .map(|(k, &i)| {
            let d = pos.iter().filter(|&&j| j != i).map(|&j| view.dist(i, j).lo).fold(f64::INFINITY, f64::min);
            (k, p.witness_indices[k], if d.is_finite() { d } else { 0.0 })
        })
        .collect()
}

pub fn cmd_analyze(cfg: &ExperimentConfig, target: TargetSpec) -> Result<Artifacts> {
    let acfg = cfg.analysis()?;
    let op = cfg.operator()?;
    let x = cfg.vector(&op, acfg.head_dim)?;
    let h = acfg.max_horizon();
    let family = match target {
        TargetSpec::Orbit => orbit_family(&op, &x, h),
        TargetSpec::Diff { m } => diff_family(&op, &x, m, h, acfg.head_dim),
    }
    .map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Precondition(other.to_string()),
    })?;
    let v = verdict(&family, &acfg)?;
    let mut a = Artifacts::ok("verdict.json", to_value(&v)?);
    a.tables.push(("entropy.csv".into(), entropy_csv(&v.entropy_table)?));
    a.tables.push(("packing.csv".into(), packing_csv(&packing_rows(&family, &v, h))?));
    Ok(a)
}

pub fn cmd_witness(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Artifacts> {
    let acfg = cfg.analysis()?;
    let op = cfg.operator()?;
    let x = cfg.vector(&op, acfg.head_dim)?;
    let mut wcfg = cfg.witness.clone().unwrap_or_default();
    if let Some(s) = seed {
        wcfg.subset_check.seed = s;
    }
    Ok(match run_pipeline(&op, &x, &wcfg, &acfg) {
        Ok(o) => {
            let mut v = to_value(&WitnessSummary::from(&o))?;
            v["status"] = json!("OK");
            Artifacts::ok("certificate.json", v)
        }
        Err(e @ Error::Config(_)) => return Err(e),
        Err(e) => Artifacts::failure("certificate.json", &e),
    })
}

fn gallery_config(cfg: &ExperimentConfig, section: Option<&GallerySection>, seed: Option<u64>) -> GalleryConfig {
    let mut g = section.map(|s| s.config.clone()).unwrap_or_default();
    if let Some(a) = &cfg.analysis {
        g.analysis = a.clone();
    }
    if let Some(w) = &cfg.witness {
        g.witness = w.clone();
    }
    if let Some(s) = seed {
        g.seed = s;
        g.witness.subset_check.seed = s;
    }
    g
}

fn gallery_tables(rep: &GalleryReport) -> Result<Vec<(String, Vec<u8>)>> {
    let mut tables = Vec::new();
    for (label, v) in &rep.verdicts {
        tables.push((format!("entropy_{label}.csv"), entropy_csv(&v.entropy_table)?));
        if let Some(p) = &v.packing {
            let rows: Vec<(usize, u64, f64)> =
                p.witness_indices.iter().enumerate().map(|(k, &w)| (k, w, p.verified_delta)).collect();
            tables.push((format!("packing_{label}.csv"), packing_csv(&rows)?));
        }
    }
    for (label, t) in &rep.tables {
        tables.push((format!("entropy_{label}.csv"), entropy_csv(t)?));
    }
    Ok(tables)
}

pub fn run_gallery(cfg: &ExperimentConfig, id: Option<GalleryId>, m: Option<u64>, seed: Option<u64>) -> Result<GalleryReport> {
    let section = cfg.gallery.as_ref();
    let id = id.or(section.map(|s| s.id)).ok_or_else(|| Error::Config("gallery id is required".into()))?;
    let g = gallery_config(cfg, section, seed.or(cfg.seed));
    match id {
        GalleryId::Example1 => run_example1(&g),
        GalleryId::DiagonalC => run_diagonal_c(&g),
        GalleryId::MthRoot => {
            let m = m.or(section.and_then(|s| s.m)).ok_or_else(|| Error::Config("mth-root needs m".into()))?;
            run_mth_root(m, &g)
        }
        GalleryId::MatrixSuite => run_matrix_suite(&g),
    }
}

pub fn cmd_gallery(cfg: &ExperimentConfig, id: Option<GalleryId>, m: Option<u64>, seed: Option<u64>) -> Result<Artifacts> {
    let rep = run_gallery(cfg, id, m, seed)?;
    for c in rep.failed_checks() {
        eprintln!("parity check failed: {}: {}", c.name, c.detail);
    }
    Ok(Artifacts {
        json_name: "report.json",
        json: to_value(&rep)?,
        tables: gallery_tables(&rep)?,
        exit: if rep.passed { ExitCode::Success } else { ExitCode::ParityFailure },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaTrial {
    pub trial: usize,
    pub description: String,
    pub outcome: String,
    pub residual: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub name: LemmaName,
    pub seed: u64,
    pub trials: Vec<LemmaTrial>,
    pub passed: usize,
    pub expected_negative: usize,
    pub all_passed: bool,
}

fn trial_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i as u64);
    r
}

fn lemma_telescoping(trials: usize, seed: u64) -> Result<Vec<LemmaTrial>> {
    let dyadic = Operator::Diagonal(DiagonalOperator::dyadic(1, RootOfUnity::ONE)?);
    let ones = SeqVec::ones(48);
    (0..trials)
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let n = rng.random_range(0..=16u64);
            let m = rng.random_range(1..=6u64);
            if i % 10 == 9 {
                let n = rng.random_range(0..=1024u64);
                let m = rng.random_range(1..=1024u64);
                let r = telescope_check(&dyadic, &ones, n, m)?;
                return Ok(LemmaTrial {
                    trial: i,
                    description: format!("dyadic phases, n = {n}, m = {m}"),
                    outcome: "evaluated".into(),
                    residual: Some(r),
                    passed: r == 0.0,
                });
            }
            let c = crate::ensembles::random_power_bounded(&mut rng, 8, false);
            let g = crate::ensembles::gaussian_matrix(&mut rng, c.operator.dim, 1);
            let x = crate::operators::MatrixOperator::from_coords(&g.column(0).into_owned());
            let r = telescope_check(&Operator::Matrix(c.operator.clone()), &x, n, m)?;
            Ok(LemmaTrial {
                trial: i,
                description: format!("random matrix of dimension {}, n = {n}, m = {m}", c.operator.dim),
                outcome: "evaluated".into(),
                residual: Some(r),
                passed: r <= crate::gallery::TELESCOPE_TOL,
            })
        })
        .collect()
}

fn lemma_multap(trials: usize, seed: u64, base: Option<(Operator, SeqVec)>) -> Result<Vec<LemmaTrial>> {
    let mut rows = Vec::new();
    for i in 0..trials {
        let mut rng = trial_rng(seed, i);
        let (op, x) = match &base {
            Some((op, x)) => (op.clone(), x.clone()),
            None => {
                let num = 2 * rng.random_range(0..4i64) + 1;
                (Operator::Diagonal(DiagonalOperator::dyadic(num, RootOfUnity::ONE)?), SeqVec::ones(48))
            }
        };
        let split = split_for(&op)?;
        let ctx = Context::new(&op, &split, &x, WitnessConfig::default().horizon_for(&op));
        let n_seq = ctx.candidates();
        let k = 1 + i % 4;
        let vectors: Vec<SeqVec> = if i == 0 {
            vec![SeqVec::zeros(ctx.x.dim())]
        } else {
            (0..k).map(|_| ctx.vector(rng.random_range(1..64u64))).collect::<Result<Vec<_>>>()?
        };
        let tol = 0.5f64.powi(1 + (i % 8) as i32);
        let gap_min = rng.random_range(1..16u64);
        let description = format!("{} vectors, tol = 2^-{}, gap_min = {gap_min}", vectors.len(), 1 + i % 8);
        match multap_refine(&ctx, &vectors, &n_seq, tol, gap_min) {
            Ok(r) => {
                // Re-verify the returned pair exactly.
                let (p, q) = (r.indices[0], r.indices[1]);
                let mut worst: f64 = 0.0;
                for v in &vectors {
                    let w = op.combination(&[(q, Scalar::new(1.0, 0.0)), (p, Scalar::new(-1.0, 0.0))], v)?;
                    worst = worst.max(w.sup_norm().hi);
                }
                let gaps_ok = r.indices.windows(2).all(|w| w[1] - w[0] >= gap_min);
                rows.push(LemmaTrial {
                    trial: i,
                    description,
                    outcome: format!("pair ({p}, {q})"),
                    residual: Some(worst),
                    passed: worst <= tol && gaps_ok,
                });
            }
            Err(Error::Exhausted { best_tol, .. }) => rows.push(LemmaTrial {
                trial: i,
                description,
                outcome: format!("EXHAUSTED (best tol {best_tol:e})"),
                residual: None,
                passed: true,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

fn lemma_pbig(trials: usize, seed: u64, base: Option<(Operator, SeqVec)>, acfg: &AnalysisConfig) -> Result<Vec<LemmaTrial>> {
    let mut rows = Vec::new();
    for i in 0..trials {
        let mut rng = trial_rng(seed, i);
        let (op, x, label) = match &base {
            Some((op, x)) => (op.clone(), x.clone(), "configured operator".to_string()),
            None => match i % 3 {
                0 => {
                    let num = 2 * rng.random_range(0..4i64) + 1;
                    (Operator::Diagonal(DiagonalOperator::dyadic(num, RootOfUnity::ONE)?), SeqVec::ones(48), format!("dyadic phases, num = {num}"))
                }
                1 => {
                    let d = rng.random_range(1..=4usize);
                    let op = Operator::Matrix(crate::operators::MatrixOperator::identity(d)?);
                    (op, SeqVec::finite(vec![Scalar::new(1.0, 0.0); d])?, format!("identity of dimension {d}"))
                }
                _ => {
                    let c = crate::ensembles::random_power_bounded(&mut rng, 6, false);
                    let g = crate::ensembles::gaussian_matrix(&mut rng, c.operator.dim, 1);
                    let x = crate::operators::MatrixOperator::from_coords(&g.column(0).into_owned());
                    let d = c.operator.dim;
                    (Operator::Matrix(c.operator), x, format!("random power-bounded matrix of dimension {d}"))
                }
            },
        };
        let split = split_for(&op)?;
        let wcfg = WitnessConfig::default();
        let ctx = Context::new(&op, &split, &x, wcfg.horizon_for(&op));
        let row = match pbig_extract(&ctx, &wcfg, acfg) {
            Ok(p) => {
                let mut worst = f64::INFINITY;
                for (a, &u) in p.n_subseq.iter().enumerate() {
                    for &v in &p.n_subseq[a + 1..] {
                        let d = ctx.vector(v - u)?.sup_norm().lo / ctx.m_bound;
                        worst = worst.min(d);
                    }
                }
                LemmaTrial {
                    trial: i,
                    description: label,
                    outcome: format!("delta = {:.6}, {} exponents", p.delta, p.n_subseq.len()),
                    residual: Some(worst),
                    passed: worst >= p.delta,
                }
            }
            Err(e @ (Error::NoSeparation(_) | Error::Precondition(_))) => LemmaTrial {
                trial: i,
                description: label,
                outcome: format!("expected negative: {}", e.kind()),
                residual: None,
                passed: true,
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(rows)
}

pub fn run_lemma(cfg: &ExperimentConfig, name: Option<LemmaName>, trials: Option<usize>, seed: Option<u64>) -> Result<LemmaReport> {
    let section = cfg.lemma.as_ref();
    let name = name.or(section.map(|s| s.name)).ok_or_else(|| Error::Config("lemma name is required".into()))?;
    let trials = trials.or(section.map(|s| s.trials)).unwrap_or_else(default_trials);
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let acfg = cfg.analysis()?;
    let base = match &cfg.operator {
        Some(spec) => {
            let op = spec.build()?;
            let x = match &cfg.vector {
                Some(v) => v.build(&op, acfg.head_dim)?,
                None => VectorSpec::Ones.build(&op, acfg.head_dim)?,
            };
            Some((op, x))
        }
        None => None,
    };
    let rows = match name {
        LemmaName::Telescoping => lemma_telescoping(trials, seed)?,
        LemmaName::Multap => lemma_multap(trials, seed, base)?,
        LemmaName::Pbig => lemma_pbig(trials, seed, base, &acfg)?,
    };
    let passed = rows.iter().filter(|r| r.passed).count();
    let expected_negative = rows.iter().filter(|r| r.outcome.starts_with("expected negative")).count();
    Ok(LemmaReport { name, seed, all_passed: passed == rows.len(), passed, expected_negative, trials: rows })
}

pub fn cmd_lemma(cfg: &ExperimentConfig, name: Option<LemmaName>, trials: Option<usize>, seed: Option<u64>) -> Result<Artifacts> {
    let rep = run_lemma(cfg, name, trials, seed)?;
    let exit = if rep.all_passed { ExitCode::Success } else { ExitCode::ParityFailure };
    Ok(Artifacts { json_name: "results.json", json: to_value(&rep)?, tables: Vec::new(), exit })
}

/// A command with its command-line overrides.
#[derive(Clone, Debug)]
pub enum Request {
    Decompose,
    Analyze { target: Option<TargetArg>, m: Option<u64> },
    Witness,
    Gallery { id: Option<GalleryId>, m: Option<u64> },
    Lemma { name: Option<LemmaName>, trials: Option<usize> },
}

fn resolve_target(target: Option<TargetArg>, m: Option<u64>, cfg: Option<TargetSpec>) -> Result<TargetSpec> {
    match (target, m, cfg) {
        (Some(TargetArg::Orbit), _, _) => Ok(TargetSpec::Orbit),
        (Some(TargetArg::Diff), Some(m), _) => Ok(TargetSpec::Diff { m }),
        (Some(TargetArg::Diff), None, Some(TargetSpec::Diff { m })) => Ok(TargetSpec::Diff { m }),
        (Some(TargetArg::Diff), None, _) => Ok(TargetSpec::Diff { m: 1 }),
        (None, Some(m), _) => Ok(TargetSpec::Diff { m }),
        (None, None, Some(t)) => Ok(t),
        (None, None, None) => Err(Error::Config("analysis target is required (--target or `target`)".into())),
    }
}

/// Run a command in memory.
pub fn execute(req: &Request, cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Artifacts> {
    let seed = seed.or(cfg.seed);
    match req {
        Request::Decompose => cmd_decompose(cfg),
        Request::Analyze { target, m } => cmd_analyze(cfg, resolve_target(*target, *m, cfg.target)?),
        Request::Witness => cmd_witness(cfg, seed),
        Request::Gallery { id, m } => cmd_gallery(cfg, *id, *m, seed),
        Request::Lemma { name, trials } => cmd_lemma(cfg, *name, *trials, seed),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("ORBITLAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        // A second initialization (as in tests) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

impl Command {
    pub fn request(&self) -> Request {
        match self {
            Command::Decompose(_) => Request::Decompose,
            Command::Analyze { target, m, .. } => Request::Analyze { target: *target, m: *m },
            Command::Witness(_) => Request::Witness,
            Command::Gallery { id, m, .. } => Request::Gallery { id: *id, m: *m },
            Command::Lemma { name, trials, .. } => Request::Lemma { name: *name, trials: *trials },
        }
    }
}

/// Dispatch a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    configure_threads();
    let common = cli.command.common().clone();
    let result = ExperimentConfig::load(&common.config).and_then(|cfg| {
        let out = out_dir(&common, &cfg);
        let a = execute(&cli.command.request(), &cfg, common.seed)?;
        a.write(&out)?;
        if a.exit != ExitCode::Success {
            if let Some(msg) = a.json.get("message").and_then(|m| m.as_str()) {
                eprintln!("{msg}");
            }
        }
        Ok(a.exit as i32)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code() as i32
        }
    }
}
