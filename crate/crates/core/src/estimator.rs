//! Monte Carlo estimates of `λ±_{a,b}[m, M)` and their comparison with
//! classifier verdicts.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::classifier::{decide, ClassifyError, Verdict, VerdictValue};
use crate::defaults;
use crate::model::LevyModel;
use crate::rng::{derive_seed, path_rng};
use crate::sampler::{plan, ExitSimulator, Outcome, PlanHints, SamplerError, Scheme, SimPlan};
use crate::window::ExitQuery;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("horizon {horizon} does not reach past the window start {m}")]
    HorizonBelowWindow { horizon: f64, m: f64 },
    #[error("{id}: zero verdict needs the exact scheme, plan uses {scheme}")]
    SchemeMismatch { id: String, scheme: Scheme },
    #[error("path count must be positive")]
    NoPaths,
    #[error("confidence parameter alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Query(#[from] ClassifyError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

/// How path chunks are scheduled. Results are identical either way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool; falls back to sequential without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    up: u64,
    down: u64,
    censored: u64,
    outside: u64,
    exit_time_sum: f64,
    exits: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.up += other.up;
        self.down += other.down;
        self.censored += other.censored;
        self.outside += other.outside;
        self.exit_time_sum += other.exit_time_sum;
        self.exits += other.exits;
        self
    }
}

/// Two-sided Wilson score interval for `hits` successes out of `n`.
pub fn wilson_interval(hits: u64, n: u64, alpha: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitEstimate {
    pub query: ExitQuery,
    pub n_paths: u64,
    /// Up exits with exit time in the window.
    pub hits_up: u64,
    pub hits_down: u64,
    pub n_censored: u64,
    /// Exits before the horizon whose time falls outside the window.
    pub n_out_of_window: u64,
    pub p_up_hat: f64,
    pub p_down_hat: f64,
    pub ci_up: (f64, f64),
    pub ci_down: (f64, f64),
    pub alpha: f64,
    pub horizon: f64,
    /// Mean exit time over uncensored paths, window or not.
    pub mean_exit_time: Option<f64>,
    pub scheme: Scheme,
}

impl ExitEstimate {
    pub fn ci_half_width_up(&self) -> f64 {
        0.5 * (self.ci_up.1 - self.ci_up.0)
    }

    pub fn ci_half_width_down(&self) -> f64 {
        0.5 * (self.ci_down.1 - self.ci_down.0)
    }
}

/// Runs `n` paths and counts window exits at each barrier.
pub fn estimate(model: &LevyModel, query: &ExitQuery, n: u64, plan: &SimPlan, seed: u64, alpha: f64) -> Result<ExitEstimate, EstimateError> {
    estimate_with(model, query, n, plan, seed, alpha, Execution::default())
}

pub fn estimate_with(
    model: &LevyModel,
    query: &ExitQuery,
    n: u64,
    plan: &SimPlan,
    seed: u64,
    alpha: f64,
    execution: Execution,
) -> Result<ExitEstimate, EstimateError> {
    query.validate().map_err(ClassifyError::InvalidQuery)?;
    if n == 0 {
        return Err(EstimateError::NoPaths);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EstimateError::InvalidAlpha(alpha));
    }
    if plan.horizon <= query.m {
        return Err(EstimateError::HorizonBelowWindow {
            horizon: plan.horizon,
            m: query.m,
        });
    }
    let sim = ExitSimulator::new(model, plan)?;
    let chunk_tally = |chunk: u64| {
        let start = chunk * defaults::CHUNK;
        let end = (start + defaults::CHUNK).min(n);
        let mut tally = Tally::default();
        for path in start..end {
            let record = sim.run(query.a, query.b, &mut path_rng(seed, path));
            match record.outcome {
                Outcome::Censored { .. } => tally.censored += 1,
                Outcome::Up { time, .. } | Outcome::Down { time, .. } => {
                    tally.exits += 1;
                    tally.exit_time_sum += time;
                    let up = matches!(record.outcome, Outcome::Up { .. });
                    match (query.contains_time(time), up) {
                        (true, true) => tally.up += 1,
                        (true, false) => tally.down += 1,
                        (false, _) => tally.outside += 1,
                    }
                }
            }
        }
        tally
    };
    let chunks = n.div_ceil(defaults::CHUNK);
    let per_chunk: Vec<Tally> = match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..chunks).into_par_iter().map(chunk_tally).collect()
        }
        _ => (0..chunks).map(chunk_tally).collect(),
    };
    // merge in chunk order so the floating-point sum is schedule independent
    let total = per_chunk.into_iter().fold(Tally::default(), Tally::merge);
    let nf = n as f64;
    Ok(ExitEstimate {
        query: *query,
        n_paths: n,
        hits_up: total.up,
        hits_down: total.down,
        n_censored: total.censored,
        n_out_of_window: total.outside,
        p_up_hat: total.up as f64 / nf,
        p_down_hat: total.down as f64 / nf,
        ci_up: wilson_interval(total.up, n, alpha),
        ci_down: wilson_interval(total.down, n, alpha),
        alpha,
        horizon: plan.horizon,
        mean_exit_time: (total.exits > 0).then(|| total.exit_time_sum / total.exits as f64),
        scheme: plan.scheme,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McOutcome {
    HitObserved,
    NoHit,
}

impl fmt::Display for McOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            McOutcome::HitObserved => "hit-observed",
            McOutcome::NoHit => "no-hit",
        })
    }
}

/// `HitObserved` iff both barriers were hit inside the window.
pub fn positivity(estimate: &ExitEstimate) -> McOutcome {
    if estimate.hits_up >= 1 && estimate.hits_down >= 1 {
        McOutcome::HitObserved
    } else {
        McOutcome::NoHit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Consistent,
    Contradiction,
    Inconclusive,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Consistent => "consistent",
            CheckStatus::Contradiction => "contradiction",
            CheckStatus::Inconclusive => "inconclusive",
        })
    }
}

fn status(verdict: VerdictValue, outcome: McOutcome, scheme: Scheme) -> CheckStatus {
    match (verdict, outcome) {
        (VerdictValue::Zero, McOutcome::HitObserved) if scheme.is_exact() => CheckStatus::Contradiction,
        (VerdictValue::Zero, McOutcome::HitObserved) => CheckStatus::Inconclusive,
        (VerdictValue::Zero, McOutcome::NoHit) => CheckStatus::Consistent,
        (VerdictValue::Positive, McOutcome::HitObserved) => CheckStatus::Consistent,
        (VerdictValue::Positive, McOutcome::NoHit) => CheckStatus::Inconclusive,
        (VerdictValue::Unknown, _) => CheckStatus::Inconclusive,
    }
}

/// One model/query pair to verify.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckCase {
    pub id: String,
    pub model: LevyModel,
    pub query: ExitQuery,
    pub hints: PlanHints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckRow {
    pub id: String,
    pub model: LevyModel,
    pub verdict: Verdict,
    pub outcome: McOutcome,
    pub status: CheckStatus,
    pub plan: SimPlan,
    /// Seed of this row's path streams.
    pub seed: u64,
    pub estimate: ExitEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub paths: u64,
    pub seed: u64,
    pub alpha: f64,
    pub rows: Vec<CrossCheckRow>,
}

impl CrossCheckReport {
    pub fn contradictions(&self) -> usize {
        self.rows.iter().filter(|r| r.status == CheckStatus::Contradiction).count()
    }
}

/// Plans a case, refusing zero verdicts that only an approximate scheme could test.
pub fn plan_case(case: &CheckCase) -> Result<(Verdict, SimPlan), EstimateError> {
    let verdict = decide(&case.model, &case.query)?;
    let mut hints = case.hints;
    hints.horizon = Some(hints.horizon.unwrap_or_else(|| defaults::horizon_for(&case.query)));
    let plan = plan(&case.model, case.query.a, case.query.b, &hints)?;
    if verdict.value == VerdictValue::Zero && !plan.scheme.is_exact() {
        return Err(EstimateError::SchemeMismatch {
            id: case.id.clone(),
            scheme: plan.scheme,
        });
    }
    Ok((verdict, plan))
}

/// Estimates every case and compares the outcome with its verdict.
pub fn cross_check(cases: &[CheckCase], n: u64, alpha: f64, seed: u64) -> Result<CrossCheckReport, EstimateError> {
    cross_check_with(cases, n, alpha, seed, Execution::default())
}

pub fn cross_check_with(cases: &[CheckCase], n: u64, alpha: f64, seed: u64, execution: Execution) -> Result<CrossCheckReport, EstimateError> {
    // validate everything before spending time on simulation
    let planned = cases.iter().map(plan_case).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(cases.len());
    for (index, (case, (verdict, plan))) in cases.iter().zip(planned).enumerate() {
        let row_seed = derive_seed(seed, index as u64);
        let estimate = estimate_with(&case.model, &case.query, n, &plan, row_seed, alpha, execution)?;
        let outcome = positivity(&estimate);
        rows.push(CrossCheckRow {
            id: case.id.clone(),
            model: case.model.clone(),
            verdict,
            outcome,
            status: status(verdict.value, outcome, plan.scheme),
            plan,
            seed: row_seed,
            estimate,
        });
    }
    Ok(CrossCheckReport {
        paths: n,
        seed,
        alpha,
        rows,
    })
}
