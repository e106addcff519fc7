//! Benchmark harness: strategies × oracle draws × budgets, scored by the
//! uncertain volume and by the accuracy of a classifier trained on the
//! design.
//!
//! Adaptive strategies are run once per draw to the largest budget and every
//! smaller budget is read off the trace prefix.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::monotone::{DesignState, Label, LabeledPoint, UnitPoint};
use crate::oracle::{arctan_mu_range, sample_input, OracleSpec, Oracle};
use crate::rng::{self, derive_seed};
use crate::static_designs::{integer_root, StaticDesignSpec, StaticKind};
use crate::strategy::{snap_to_domain, Designer, StepRecord, StrategyKind, StrategySpec};
use crate::svc::Classifier;
use crate::volume::uncertain_volume_auto;

/// A static or sequential design, as named in plans and result tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Sg,
    Si,
    Mc,
    Lhd,
    Amc,
    Gg,
    Ag,
    Gi,
    Ai,
    Ale,
}

impl DesignKind {
    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Sg => "sg",
            DesignKind::Si => "si",
            DesignKind::Mc => "mc",
            DesignKind::Lhd => "lhd",
            DesignKind::Amc => "amc",
            DesignKind::Gg => "gg",
            DesignKind::Ag => "ag",
            DesignKind::Gi => "gi",
            DesignKind::Ai => "ai",
            DesignKind::Ale => "ale",
        }
    }

    pub fn adaptive(self) -> Option<StrategyKind> {
        Some(match self {
            DesignKind::Amc => StrategyKind::Amc,
            DesignKind::Gg => StrategyKind::Gg,
            DesignKind::Ag => StrategyKind::Ag,
            DesignKind::Gi => StrategyKind::Gi,
            DesignKind::Ai => StrategyKind::Ai,
            DesignKind::Ale => StrategyKind::Ale,
            _ => return None,
        })
    }

    pub fn static_kind(self) -> Option<StaticKind> {
        Some(match self {
            DesignKind::Sg => StaticKind::Sg,
            DesignKind::Si => StaticKind::Si,
            DesignKind::Mc => StaticKind::Mc,
            DesignKind::Lhd => StaticKind::Lhd,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanStrategy {
    pub kind: DesignKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amc_max_attempts: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ale_candidate_grid: Option<usize>,
}

impl From<DesignKind> for PlanStrategy {
    fn from(kind: DesignKind) -> Self {
        Self {
            kind,
            amc_max_attempts: None,
            ale_candidate_grid: None,
        }
    }
}

/// Which oracles a plan draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum OracleFamily {
    /// Arctan contours with `μ` uniform on `mu_range` (default: the
    /// calibrated range for `p`).
    Arctan {
        p: usize,
        draws: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu_range: Option<(f64, f64)>,
    },
    /// Random monotone staircases.
    Staircase { p: usize, resolution: usize, draws: usize },
    /// One fixed oracle, repeated `draws` times with fresh design seeds.
    Fixed { oracle: OracleSpec, draws: usize },
}

impl OracleFamily {
    pub fn draws(&self) -> usize {
        match self {
            OracleFamily::Arctan { draws, .. }
            | OracleFamily::Staircase { draws, .. }
            | OracleFamily::Fixed { draws, .. } => *draws,
        }
    }

    fn set_draws(&mut self, n: usize) {
        match self {
            OracleFamily::Arctan { draws, .. }
            | OracleFamily::Staircase { draws, .. }
            | OracleFamily::Fixed { draws, .. } => *draws = n,
        }
    }

    pub fn dimension(&self) -> Result<usize> {
        match self {
            OracleFamily::Arctan { p, .. } | OracleFamily::Staircase { p, .. } => Ok(*p),
            OracleFamily::Fixed { oracle, .. } => oracle.dimension(),
        }
    }

    /// The oracle of draw `index`.
    pub fn draw(&self, master_seed: u64, index: usize) -> Result<OracleSpec> {
        let seed = derive_seed(master_seed, 10, index as u64);
        Ok(match self {
            OracleFamily::Arctan { p, mu_range, .. } => {
                let (lo, hi) = mu_range
                    .or_else(|| arctan_mu_range(*p))
                    .ok_or_else(|| Error::usage(format!("no calibrated mu range for p = {p}")))?;
                let u: f64 = rng::seeded(seed).gen();
                OracleSpec::ArctanContour {
                    p: *p,
                    mu: lo + (hi - lo) * u,
                }
            }
            OracleFamily::Staircase { p, resolution, .. } => OracleSpec::Staircase {
                p: *p,
                resolution: *resolution,
                seed,
            },
            OracleFamily::Fixed { oracle, .. } => oracle.clone(),
        })
    }
}

/// Settings applied by [`ExperimentPlan::at_full_scale`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullScale {
    pub draws: usize,
    pub test_points: usize,
}

fn default_test_points() -> usize {
    100_000
}

fn default_parallelism() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default)]
    pub name: String,
    pub oracle: OracleFamily,
    pub strategies: Vec<PlanStrategy>,
    pub budgets: Vec<usize>,
    #[serde(default = "default_test_points")]
    pub test_points: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Fit a classifier at every checkpoint and report its accuracy.
    #[serde(default = "default_true")]
    pub classifier: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full: Option<FullScale>,
}

impl ExperimentPlan {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn at_full_scale(mut self) -> Self {
        if let Some(full) = self.full.clone() {
            self.oracle.set_draws(full.draws);
            self.test_points = full.test_points;
        }
        self
    }

    /// Every problem with the plan.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errors = Vec::new();
        if self.budgets.is_empty() {
            errors.push("budgets is empty".to_string());
        }
        if self.budgets.first() == Some(&0) {
            errors.push("budgets must be positive".into());
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            errors.push("budgets must be strictly increasing".into());
        }
        if self.test_points == 0 {
            errors.push("test_points must be positive".into());
        }
        if self.parallelism == 0 {
            errors.push("parallelism must be positive".into());
        }
        if self.oracle.draws() == 0 {
            errors.push("the oracle family needs at least one draw".into());
        }
        match &self.oracle {
            OracleFamily::Arctan { p, mu_range, .. } => {
                if *p == 0 {
                    errors.push("oracle dimension must be positive".into());
                } else if mu_range.is_none() && arctan_mu_range(*p).is_none() {
                    errors.push(format!("no calibrated mu range for p = {p}; give mu_range"));
                }
                if let Some((lo, hi)) = mu_range {
                    if !(lo <= hi) {
                        errors.push("mu_range must be ordered".into());
                    }
                }
            }
            OracleFamily::Staircase { p, resolution, .. } => {
                if *p == 0 {
                    errors.push("oracle dimension must be positive".into());
                }
                if *resolution < 2 {
                    errors.push("staircase resolution must be at least 2".into());
                }
            }
            OracleFamily::Fixed { oracle, .. } => {
                if let Err(e) = oracle.build() {
                    errors.push(format!("oracle: {e}"));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for s in &self.strategies {
            if !seen.insert(s.kind) {
                errors.push(format!("strategy {} is listed twice", s.kind.name()));
            }
            if s.amc_max_attempts == Some(0) {
                errors.push(format!("{}: amc_max_attempts must be positive", s.kind.name()));
            }
            if s.ale_candidate_grid == Some(0) {
                errors.push(format!("{}: ale_candidate_grid must be positive", s.kind.name()));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// One (strategy, oracle, budget) measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub strategy: String,
    pub p: usize,
    pub oracle_id: String,
    pub n: usize,
    /// Empty on error rows.
    pub v_uncertain: Option<f64>,
    pub accuracy: Option<f64>,
    /// Kernel width, `majority` for the fallback rule, `none` without a
    /// classifier, or `error:<message>`.
    pub gamma: String,
    pub wall_time_ms: u64,
}

impl ResultRow {
    pub fn is_error(&self) -> bool {
        self.gamma.starts_with("error:")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub rows: Vec<ResultRow>,
    pub errors: usize,
    /// Seed of every oracle draw, in draw order.
    pub draw_seeds: Vec<u64>,
}

/// Fraction of `test_points` uniform inputs on which `predict` agrees with
/// the oracle.
pub fn accuracy_eval(
    predict: &(dyn Fn(&UnitPoint) -> Label + Sync),
    oracle: &dyn Oracle,
    test_points: usize,
    seed: u64,
) -> Result<f64> {
    if test_points == 0 {
        return Err(Error::usage("test_points must be positive"));
    }
    let mut rng = rng::seeded(seed);
    let xs: Vec<UnitPoint> = (0..test_points)
        .map(|_| sample_input(oracle.domain(), oracle.dimension(), &mut rng))
        .collect();
    let correct = xs
        .par_iter()
        .map(|x| Ok(usize::from(predict(x) == oracle.evaluate(x)?)))
        .sum::<Result<usize>>()?;
    Ok(correct as f64 / test_points as f64)
}

/// Predicts from dominance where the label is certain and from the
/// classifier elsewhere. Used only to check the accuracy–volume coupling.
pub struct HybridPredictor<'a> {
    pub state: &'a DesignState,
    pub classifier: &'a Classifier,
}

impl HybridPredictor<'_> {
    pub fn predict(&self, x: &UnitPoint) -> Label {
        match self.state.classify(x).ok().and_then(|c| c.label()) {
            Some(l) => l,
            None => self.classifier.predict(x),
        }
    }
}

/// Running fraction of negative labels after each evaluation.
pub fn negative_proportion_track(trace: &[StepRecord]) -> Vec<f64> {
    let mut neg = 0usize;
    trace
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if r.label == Label::Negative {
                neg += 1;
            }
            neg as f64 / (i + 1) as f64
        })
        .collect()
}

struct Job {
    draw: usize,
    strategy: PlanStrategy,
    slot: usize,
}

fn score(
    plan: &ExperimentPlan,
    oracle: &dyn Oracle,
    data: &[LabeledPoint],
    draw: usize,
    seed: u64,
) -> Result<(f64, Option<f64>, String)> {
    let state = DesignState::from_observations(oracle.dimension(), data)?;
    let v = uncertain_volume_auto(&state, seed)?.v_uncertain;
    if !plan.classifier {
        return Ok((v, None, "none".into()));
    }
    let test_seed = derive_seed(plan.master_seed, 30, draw as u64);
    let (accuracy, gamma) = match dedup(data) {
        d if d.is_empty() => (None, "majority".to_string()),
        d => {
            let c = Classifier::train(&d, derive_seed(seed, 1, data.len() as u64))?;
            let acc = accuracy_eval(&|x| c.predict(x), oracle, plan.test_points, test_seed)?;
            (
                Some(acc),
                c.gamma().map_or_else(|| "majority".to_string(), |g| g.to_string()),
            )
        }
    };
    Ok((v, accuracy, gamma))
}

/// Keeps the first observation of every point (static lattice designs may
/// repeat points after snapping).
fn dedup(data: &[LabeledPoint]) -> Vec<LabeledPoint> {
    let mut seen = std::collections::HashSet::new();
    data.iter().filter(|d| seen.insert(d.point.clone())).cloned().collect()
}

fn run_job(plan: &ExperimentPlan, job: &Job) -> Vec<ResultRow> {
    let name = job.strategy.kind.name().to_string();
    let seed = derive_seed(plan.master_seed, 20 + job.slot as u64, job.draw as u64);
    let spec = match plan.oracle.draw(plan.master_seed, job.draw) {
        Ok(s) => s,
        Err(e) => return vec![error_row(&name, 0, "unbuilt", 0, &e)],
    };
    let oracle = match spec.build() {
        Ok(o) => o,
        Err(e) => return vec![error_row(&name, 0, "unbuilt", 0, &e)],
    };
    let p = oracle.dimension();
    let id = oracle.id();
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut push = |n: usize, data: Result<Vec<LabeledPoint>>| {
        let row = data
            .and_then(|d| score(plan, oracle.as_ref(), &d, job.draw, seed))
            .map(|(v, accuracy, gamma)| ResultRow {
                strategy: name.clone(),
                p,
                oracle_id: id.clone(),
                n,
                v_uncertain: Some(v),
                accuracy,
                gamma,
                wall_time_ms: start.elapsed().as_millis() as u64,
            })
            .unwrap_or_else(|e| error_row(&name, p, &id, n, &e));
        rows.push(row);
    };
    let max_budget = plan.budgets.last().copied().unwrap_or(0);
    if let Some(kind) = job.strategy.kind.adaptive() {
        let mut s = StrategySpec::new(kind, p, max_budget, seed);
        if let Some(a) = job.strategy.amc_max_attempts {
            s.amc_max_attempts = a;
        }
        s.ale_candidate_grid = job.strategy.ale_candidate_grid;
        let trace: Result<Vec<StepRecord>> = (|| {
            let mut d = Designer::for_oracle(s, oracle.as_ref())?;
            d.run(oracle.as_ref())?;
            Ok(d.history().to_vec())
        })();
        match trace {
            Ok(trace) => {
                for &n in &plan.budgets {
                    let prefix = &trace[..n.min(trace.len())];
                    push(n, Ok(prefix.iter().map(|r| LabeledPoint::new(r.point.clone(), r.label)).collect()));
                }
            }
            Err(e) => rows.push(error_row(&name, p, &id, max_budget, &e)),
        }
    } else {
        let kind = job.strategy.kind.static_kind().expect("static design");
        let evaluate = |pts: Vec<UnitPoint>| -> Result<Vec<LabeledPoint>> {
            pts.into_iter()
                .map(|x| {
                    let x = snap_to_domain(x, oracle.domain());
                    Ok(LabeledPoint::new(x.clone(), oracle.evaluate(&x)?))
                })
                .collect()
        };
        match kind {
            StaticKind::Mc => {
                // nested: every budget is a prefix of one uniform sequence
                let mut r = rng::seeded(seed);
                let all: Vec<UnitPoint> = (0..max_budget)
                    .map(|_| sample_input(oracle.domain(), p, &mut r))
                    .collect();
                match evaluate(all) {
                    Ok(all) => {
                        for &n in &plan.budgets {
                            push(n, Ok(all[..n].to_vec()));
                        }
                    }
                    Err(e) => rows.push(error_row(&name, p, &id, max_budget, &e)),
                }
            }
            _ => {
                for &n in &plan.budgets {
                    let grid = matches!(kind, StaticKind::Sg | StaticKind::Si);
                    if grid && integer_root(n, p).map_or(true, |m| kind == StaticKind::Sg && m < 2) {
                        continue;
                    }
                    let spec = StaticDesignSpec {
                        kind,
                        dimension: p,
                        n,
                        seed: derive_seed(seed, 2, n as u64),
                    };
                    push(n, spec.generate().and_then(evaluate));
                }
            }
        }
    }
    rows
}

fn error_row(strategy: &str, p: usize, oracle_id: &str, n: usize, e: &Error) -> ResultRow {
    ResultRow {
        strategy: strategy.into(),
        p,
        oracle_id: oracle_id.into(),
        n,
        v_uncertain: None,
        accuracy: None,
        gamma: format!("error:{e}"),
        wall_time_ms: 0,
    }
}

/// Runs every strategy on every oracle draw.
pub fn run_plan(plan: &ExperimentPlan) -> Result<BenchOutput> {
    if let Err(errors) = plan.validate() {
        return Err(Error::usage(format!("invalid plan:\n  {}", errors.join("\n  "))));
    }
    let draws = plan.oracle.draws();
    let jobs: Vec<Job> = (0..draws)
        .flat_map(|draw| {
            plan.strategies.iter().enumerate().map(move |(slot, s)| Job {
                draw,
                strategy: s.clone(),
                slot,
            })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.parallelism)
        .build()
        .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))?;
    let per_job: Vec<(usize, usize, Vec<ResultRow>)> = pool.install(|| {
        jobs.par_iter()
            .map(|j| (j.slot, j.draw, run_job(plan, j)))
            .collect()
    });
    let mut keyed: Vec<(usize, usize, ResultRow)> = per_job
        .into_iter()
        .flat_map(|(slot, draw, rows)| rows.into_iter().map(move |r| (slot, draw, r)))
        .collect();
    keyed.sort_by(|a, b| (a.0, a.1, a.2.n).cmp(&(b.0, b.1, b.2.n)));
    let rows: Vec<ResultRow> = keyed.into_iter().map(|(_, _, r)| r).collect();
    let errors = rows.iter().filter(|r| r.is_error()).count();
    Ok(BenchOutput {
        rows,
        errors,
        draw_seeds: (0..draws).map(|d| derive_seed(plan.master_seed, 10, d as u64)).collect(),
    })
}

/// Mean uncertain volume per (strategy, n) over non-error rows.
pub fn mean_volumes(rows: &[ResultRow]) -> BTreeMap<(String, usize), f64> {
    let mut acc: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for r in rows {
        if let Some(v) = r.v_uncertain {
            let e = acc.entry((r.strategy.clone(), r.n)).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect()
}

/// Mean accuracy per (strategy, n) over rows that have one.
pub fn mean_accuracies(rows: &[ResultRow]) -> BTreeMap<(String, usize), f64> {
    let mut acc: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for r in rows {
        if let Some(a) = r.accuracy {
            let e = acc.entry((r.strategy.clone(), r.n)).or_default();
            e.0 += a;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub plan: ExperimentPlan,
    pub master_seed: u64,
    pub draw_seeds: Vec<u64>,
    pub software_version: String,
    /// SHA-256 of the CSV with the wall-time column removed.
    pub determinism_hash: String,
    pub rows: usize,
    pub errors: usize,
    pub notes: Vec<String>,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// CSV bytes for the rows (header included even when empty).
pub fn rows_to_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record([
        "strategy",
        "p",
        "oracle_id",
        "n",
        "v_uncertain",
        "accuracy",
        "gamma",
        "wall_time_ms",
    ])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Hash of the rows with wall time excluded.
pub fn determinism_hash(rows: &[ResultRow]) -> Result<String> {
    let stripped: Vec<ResultRow> = rows
        .iter()
        .map(|r| ResultRow {
            wall_time_ms: 0,
            ..r.clone()
        })
        .collect();
    Ok(hex::encode(Sha256::digest(rows_to_csv(&stripped)?)))
}

/// Writes the CSV and its JSON sidecar; returns the sidecar.
pub fn emit_results(output: &BenchOutput, plan: &ExperimentPlan, path: impl AsRef<Path>) -> Result<Sidecar> {
    let path = path.as_ref();
    fs::write(path, rows_to_csv(&output.rows)?)?;
    let mut notes = vec![
        "gamma chosen by stratified 5-fold cross-validation over 2^k/p, k = -6..6".to_string(),
        "adaptive budgets are prefixes of one run per draw; LHD is drawn afresh per budget".to_string(),
        "SG and SI appear only at budgets that are perfect p-th powers".to_string(),
    ];
    if plan.strategies.iter().any(|s| s.kind == DesignKind::Ale) {
        notes.push("ALE starts from a plain seeded Latin hypercube of 10p points".into());
    }
    let sidecar = Sidecar {
        plan: plan.clone(),
        master_seed: plan.master_seed,
        draw_seeds: output.draw_seeds.clone(),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        determinism_hash: determinism_hash(&output.rows)?,
        rows: output.rows.len(),
        errors: output.errors,
        notes,
    };
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(sidecar)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?)
}
