//! Sequential designs.
//!
//! A [`Designer`] alternates [`Designer::suggest`] and [`Designer::record`];
//! both the in-process driver [`run_strategy`] and the session service are
//! thin loops around it, so a campaign answered by a person replays exactly
//! like one answered by an oracle.

pub mod ale;
pub mod amc;
pub mod grid;

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::{DesignState, Label, LabeledPoint, UnitPoint};
use crate::oracle::{Domain, Oracle};
use crate::rng::{self, derive_seed, Rng};
use crate::static_designs::{StaticDesignSpec, StaticKind};
use crate::svc::MIN_PER_CLASS;

pub use ale::ALE_MAX_CANDIDATES;
pub use amc::{amc_evaluations, DEFAULT_MAX_ATTEMPTS};
pub use grid::{ag_select, next_candidate_set, GridFamily};

/// Grid levels with more points than this are not generated.
pub const MAX_LEVEL_POINTS: u128 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Amc,
    Gg,
    Ag,
    Gi,
    Ai,
    Ale,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Amc,
        StrategyKind::Gg,
        StrategyKind::Ag,
        StrategyKind::Gi,
        StrategyKind::Ai,
        StrategyKind::Ale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Amc => "amc",
            StrategyKind::Gg => "gg",
            StrategyKind::Ag => "ag",
            StrategyKind::Gi => "gi",
            StrategyKind::Ai => "ai",
            StrategyKind::Ale => "ale",
        }
    }

    pub fn grid_family(self) -> Option<GridFamily> {
        match self {
            StrategyKind::Gg | StrategyKind::Ag => Some(GridFamily::Full),
            StrategyKind::Gi | StrategyKind::Ai => Some(GridFamily::Inner),
            _ => None,
        }
    }

    /// Whether candidates are pruned after every evaluation (AG, AI) rather
    /// than only when a level is regenerated (GG, GI).
    pub fn prunes_every_step(self) -> bool {
        matches!(self, StrategyKind::Ag | StrategyKind::Ai)
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::usage(format!("unknown strategy `{s}`; expected amc, gg, ag, gi, ai or ale")))
    }
}

fn default_attempts() -> u64 {
    DEFAULT_MAX_ATTEMPTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub dimension: usize,
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_attempts")]
    pub amc_max_attempts: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ale_candidate_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ale_initial_design: Option<StaticDesignSpec>,
}

impl StrategySpec {
    pub fn new(kind: StrategyKind, dimension: usize, budget: usize, seed: u64) -> Self {
        Self {
            kind,
            dimension,
            budget,
            seed,
            amc_max_attempts: DEFAULT_MAX_ATTEMPTS,
            ale_candidate_grid: None,
            ale_initial_design: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::usage("dimension must be positive"));
        }
        if self.amc_max_attempts == 0 {
            return Err(Error::usage("amc_max_attempts must be at least 1"));
        }
        if self.ale_candidate_grid == Some(0) {
            return Err(Error::usage("ale_candidate_grid must be positive"));
        }
        if let Some(d) = &self.ale_initial_design {
            if d.dimension != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    actual: d.dimension,
                });
            }
        }
        Ok(())
    }

    /// The initial design ALE evaluates before its first entropy step:
    /// a seeded Latin hypercube of `10p` points unless overridden.
    pub fn ale_initial(&self) -> StaticDesignSpec {
        self.ale_initial_design.clone().unwrap_or(StaticDesignSpec {
            kind: StaticKind::Lhd,
            dimension: self.dimension,
            n: 10 * self.dimension,
            seed: derive_seed(self.seed, 1, 0),
        })
    }
}

/// One evaluation of a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based evaluation counter.
    pub index: usize,
    pub point: UnitPoint,
    pub label: Label,
    /// Size of the pool the point was chosen from (candidate set, entropy
    /// grid, or zero for initial-design points).
    pub candidates_before: usize,
    /// Candidates dropped as certain, or proposals rejected, since the
    /// previous evaluation.
    pub skipped_since_last: u64,
    /// Grid level the point belongs to (zero for non-grid strategies).
    pub level_at_step: u32,
}

/// Why a design stopped proposing points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Completion {
    /// No lawful point is uncertain at any grid resolution checked: either
    /// every lawful point of a finite domain is classified, or two
    /// consecutive grid levels produced no candidate.
    Certified,
    /// Adaptive Monte Carlo rejected its full attempt budget in a row.
    Converged,
    BudgetExhausted,
    /// The next grid level is too large to generate.
    ResolutionLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Suggestion {
    Evaluate { point: UnitPoint },
    Complete { reason: Completion },
}

#[derive(Clone, Debug, PartialEq)]
struct Pending {
    point: UnitPoint,
    candidates_before: usize,
    skipped: u64,
    level: u32,
}

/// Drives one sequential design.
#[derive(Clone, Debug)]
pub struct Designer {
    spec: StrategySpec,
    state: DesignState,
    domain: Option<Domain>,
    rng: Rng,
    pending: Option<Pending>,
    skipped: u64,
    level: u32,
    empty_levels: u32,
    initial: VecDeque<UnitPoint>,
    history: Vec<StepRecord>,
    finished: Option<Completion>,
}

impl Designer {
    pub fn new(spec: StrategySpec, domain: Option<Domain>) -> Result<Self> {
        spec.validate()?;
        if let Some(d) = &domain {
            if d.dimension() != spec.dimension {
                return Err(Error::DimensionMismatch {
                    expected: spec.dimension,
                    actual: d.dimension(),
                });
            }
        }
        let mut state = DesignState::new(spec.dimension)?;
        let family = spec.kind.grid_family();
        if let Some(f) = family {
            state.level = f.first_level();
        }
        let initial = if spec.kind == StrategyKind::Ale {
            let design = spec.ale_initial().generate()?;
            design
                .into_iter()
                .map(|x| snap_to_domain(x, domain.as_ref()))
                .collect()
        } else {
            VecDeque::new()
        };
        Ok(Self {
            rng: rng::seeded(spec.seed),
            level: family.map_or(0, GridFamily::first_level),
            spec,
            state,
            domain,
            pending: None,
            skipped: 0,
            empty_levels: 0,
            initial,
            history: Vec::new(),
            finished: None,
        })
    }

    /// A designer for `oracle`, using its domain.
    pub fn for_oracle(spec: StrategySpec, oracle: &dyn Oracle) -> Result<Self> {
        if oracle.dimension() != spec.dimension {
            return Err(Error::DimensionMismatch {
                expected: spec.dimension,
                actual: oracle.dimension(),
            });
        }
        Self::new(spec, oracle.domain().cloned())
    }

    pub fn spec(&self) -> &StrategySpec {
        &self.spec
    }

    pub fn state(&self) -> &DesignState {
        &self.state
    }

    pub fn history(&self) -> &[StepRecord] {
        &self.history
    }

    pub fn pending(&self) -> Option<&UnitPoint> {
        self.pending.as_ref().map(|p| &p.point)
    }

    pub fn completion(&self) -> Option<Completion> {
        self.finished
    }

    /// The next point to evaluate. Calling it again before [`record`]
    /// returns the same point.
    ///
    /// [`record`]: Designer::record
    pub fn suggest(&mut self) -> Result<Suggestion> {
        if let Some(p) = &self.pending {
            return Ok(Suggestion::Evaluate {
                point: p.point.clone(),
            });
        }
        if let Some(reason) = self.finished {
            return Ok(Suggestion::Complete { reason });
        }
        if self.history.len() >= self.spec.budget {
            return Ok(Suggestion::Complete {
                reason: Completion::BudgetExhausted,
            });
        }
        let next = match self.spec.kind {
            StrategyKind::Gg | StrategyKind::Gi | StrategyKind::Ag | StrategyKind::Ai => self.next_grid()?,
            StrategyKind::Amc => self.next_amc()?,
            StrategyKind::Ale => self.next_ale()?,
        };
        match next {
            Ok(p) => {
                let point = p.point.clone();
                self.pending = Some(p);
                Ok(Suggestion::Evaluate { point })
            }
            Err(reason) => {
                self.finished = Some(reason);
                Ok(Suggestion::Complete { reason })
            }
        }
    }

    /// Records the outcome of the pending suggestion.
    ///
    /// A contradictory label fails with [`Error::NonMonotone`] and leaves the
    /// designer unchanged.
    pub fn record(&mut self, label: Label) -> Result<StepRecord> {
        let Some(p) = self.pending.clone() else {
            return Err(Error::SessionState("no suggestion is awaiting an outcome".into()));
        };
        let obs = LabeledPoint::new(p.point.clone(), label);
        let pruned = if self.spec.kind.prunes_every_step() {
            self.state.insert_observation(obs)?
        } else {
            self.state.record(obs)?;
            0
        };
        self.pending = None;
        self.skipped = pruned as u64;
        let rec = StepRecord {
            index: self.history.len() + 1,
            point: p.point,
            label,
            candidates_before: p.candidates_before,
            skipped_since_last: p.skipped,
            level_at_step: p.level,
        };
        self.history.push(rec.clone());
        Ok(rec)
    }

    /// Suggests, evaluates with the oracle and records. Returns `None` once
    /// the design is complete.
    pub fn step(&mut self, oracle: &dyn Oracle) -> Result<Option<StepRecord>> {
        match self.suggest()? {
            Suggestion::Complete { .. } => Ok(None),
            Suggestion::Evaluate { point } => {
                let label = oracle.evaluate(&point).map_err(|e| match e {
                    e @ (Error::Oracle { .. } | Error::DimensionMismatch { .. }) => e,
                    other => Error::Oracle {
                        point: point.clone(),
                        message: other.to_string(),
                    },
                })?;
                self.record(label).map(Some)
            }
        }
    }

    /// Steps until the design completes; returns the reason.
    pub fn run(&mut self, oracle: &dyn Oracle) -> Result<Completion> {
        while self.step(oracle)?.is_some() {}
        match self.suggest()? {
            Suggestion::Complete { reason } => Ok(reason),
            Suggestion::Evaluate { .. } => unreachable!("step returned None while a point is pending"),
        }
    }

    fn pending_from(&mut self, point: UnitPoint, candidates_before: usize, level: u32) -> Pending {
        let skipped = std::mem::take(&mut self.skipped);
        Pending {
            point,
            candidates_before,
            skipped,
            level,
        }
    }

    fn finite_domain_settled(&self) -> Result<bool> {
        let Some(points) = self.domain.as_ref().and_then(Domain::points) else {
            return Ok(false);
        };
        for x in &points {
            if self.state.classify_unchecked(x)?.is_unknown() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn next_grid(&mut self) -> Result<std::result::Result<Pending, Completion>> {
        let family = self.spec.kind.grid_family().expect("grid strategy");
        loop {
            if !self.state.candidates.is_empty() {
                let before = self.state.candidates.len();
                let idx = if self.spec.kind.prunes_every_step() {
                    let x = ag_select(&self.state.candidates)?;
                    self.state
                        .candidates
                        .binary_search_by(|c| c.lex_cmp(&x))
                        .expect("selected point is a candidate")
                } else {
                    self.rng.gen_range(0..before)
                };
                let x = self.state.candidates.remove(idx);
                let level = self.level;
                return Ok(Ok(self.pending_from(x, before, level)));
            }
            if self.finite_domain_settled()? {
                return Ok(Err(Completion::Certified));
            }
            let next_level = self.state.level;
            if family.level_size(next_level, self.spec.dimension) > MAX_LEVEL_POINTS {
                return Ok(Err(Completion::ResolutionLimit));
            }
            let regen = next_candidate_set(&mut self.state, family, self.domain.as_ref())?;
            self.level = regen.level;
            self.skipped += (regen.level_points - regen.candidates.len()) as u64;
            if regen.candidates.is_empty() {
                self.empty_levels += 1;
                if self.domain.as_ref().map_or(true, |d| !d.is_finite()) && self.empty_levels >= 2 {
                    return Ok(Err(Completion::Certified));
                }
            } else {
                self.empty_levels = 0;
            }
        }
    }

    fn next_amc(&mut self) -> Result<std::result::Result<Pending, Completion>> {
        if self.finite_domain_settled()? {
            return Ok(Err(Completion::Certified));
        }
        match amc::draw_unknown(&self.state, self.domain.as_ref(), self.spec.amc_max_attempts, &mut self.rng)? {
            amc::Draw::Accepted { point, rejected } => {
                self.skipped += rejected;
                Ok(Ok(self.pending_from(point, 0, 0)))
            }
            amc::Draw::Exhausted { .. } => Ok(Err(Completion::Converged)),
        }
    }

    fn next_ale(&mut self) -> Result<std::result::Result<Pending, Completion>> {
        if let Some(x) = self.initial.pop_front() {
            return Ok(Ok(self.pending_from(x, 0, 0)));
        }
        let neg = self.state.count(Label::Negative);
        let pos = self.state.count(Label::Positive);
        if neg < MIN_PER_CLASS || pos < MIN_PER_CLASS {
            return self.next_amc();
        }
        let seed = derive_seed(self.spec.seed, 2, self.history.len() as u64);
        let model = ale::fit_model(self.state.evaluated(), seed)?;
        let cands = ale::candidates(
            self.spec.dimension,
            self.spec.ale_candidate_grid,
            self.domain.as_ref(),
            self.state.evaluated(),
            &mut self.rng,
        );
        match ale::select_max_entropy(&model, &cands) {
            Some(i) => {
                let n = cands.len();
                let x = cands.into_iter().nth(i).expect("index in range");
                Ok(Ok(self.pending_from(x, n, 0)))
            }
            None => Ok(Err(Completion::Certified)),
        }
    }
}

/// Moves a point to the nearest lawful value on every discrete axis.
pub(crate) fn snap_to_domain(x: UnitPoint, domain: Option<&Domain>) -> UnitPoint {
    let Some(d) = domain else { return x };
    let coords = x
        .coords()
        .iter()
        .zip(d.axes())
        .map(|(c, axis)| match axis {
            None => *c,
            Some(values) => *values
                .iter()
                .min_by(|a, b| (*a - c).abs().total_cmp(&(*b - c).abs()))
                .unwrap_or(c),
        })
        .collect();
    UnitPoint::from_unchecked(coords)
}

/// Runs `spec` against `oracle` until the budget is spent or the design
/// completes, returning the trace.
pub fn run_strategy(spec: &StrategySpec, oracle: &dyn Oracle) -> Result<Vec<StepRecord>> {
    let mut d = Designer::for_oracle(spec.clone(), oracle)?;
    d.run(oracle)?;
    Ok(d.history)
}

/// Writes a trace as newline-delimited JSON.
pub fn write_trace(mut w: impl Write, trace: &[StepRecord]) -> Result<()> {
    for r in trace {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace(r: impl BufRead) -> Result<Vec<StepRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Replays a trace into a design state.
pub fn state_from_trace(dimension: usize, trace: &[StepRecord]) -> Result<DesignState> {
    let obs: Vec<LabeledPoint> = trace
        .iter()
        .map(|r| LabeledPoint::new(r.point.clone(), r.label))
        .collect();
    DesignState::from_observations(dimension, &obs)
}
