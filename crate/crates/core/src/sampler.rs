//! First-exit simulation from the annulus `(-b, a)`.
//!
//! Finite-activity models without a Gaussian part are simulated event by
//! event: between jumps the path is linear, so a drift-driven crossing is
//! solved in closed form and recorded exactly on the barrier. Models with a
//! Gaussian part (native or substituted for small jumps) are advanced on a
//! uniform grid with the jump instants superposed; exits are detected at grid
//! points and jump instants only.

use std::fmt;
use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::defaults;
use crate::model::{Drift, JumpLaw, LevyModel, MeasureSpec, ModelError};
use crate::rng::path_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExactFiniteActivity,
    GridDiffusion,
    TruncatedInfiniteActivity,
}

impl Scheme {
    pub fn is_exact(self) -> bool {
        self == Scheme::ExactFiniteActivity
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::ExactFiniteActivity => "exact-finite-activity",
            Scheme::GridDiffusion => "grid-diffusion",
            Scheme::TruncatedInfiniteActivity => "truncated-infinite-activity",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "exact-finite-activity" => Ok(Scheme::ExactFiniteActivity),
            "grid" | "grid-diffusion" => Ok(Scheme::GridDiffusion),
            "truncated" | "truncated-infinite-activity" => Ok(Scheme::TruncatedInfiniteActivity),
            other => Err(format!("unknown scheme {other:?}")),
        }
    }
}

/// Optional overrides for [`plan`]. Unset fields take the documented defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanHints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian_substitution: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    pub scheme: Scheme,
    /// Truncation level; `TruncatedInfiniteActivity` only.
    pub delta: Option<f64>,
    /// Grid step; present iff a Gaussian component is simulated.
    pub dt: Option<f64>,
    pub gaussian_substitution: bool,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("scheme {requested} cannot simulate this model: {reason}")]
    IncompatibleScheme { requested: Scheme, reason: &'static str },
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn automatic_scheme(model: &LevyModel) -> Scheme {
    if !model.is_finite_activity() {
        Scheme::TruncatedInfiniteActivity
    } else if model.sigma2() > 0.0 {
        Scheme::GridDiffusion
    } else {
        Scheme::ExactFiniteActivity
    }
}

fn incompatibility(model: &LevyModel, scheme: Scheme) -> Option<&'static str> {
    match scheme {
        Scheme::ExactFiniteActivity if model.sigma2() > 0.0 => Some("model has a Gaussian part"),
        Scheme::ExactFiniteActivity if !model.is_finite_activity() => Some("model has infinite activity"),
        Scheme::GridDiffusion if !model.is_finite_activity() => Some("model has infinite activity"),
        Scheme::GridDiffusion if model.sigma2() == 0.0 => Some("model has no Gaussian part"),
        Scheme::TruncatedInfiniteActivity if model.is_finite_activity() => Some("model has finite activity"),
        _ => None,
    }
}

/// Truncation level such that the dropped small jumps have standard deviation
/// below `SMALL_JUMP_STD_FRACTION · min(a, b)` over the horizon.
fn truncation_without_substitution(measure: &MeasureSpec, a: f64, b: f64, horizon: f64) -> f64 {
    let target = defaults::SMALL_JUMP_STD_FRACTION * a.min(b);
    let mut delta = a.min(b);
    while delta > defaults::MIN_TRUNCATION && (horizon * measure.truncated_second_moment(delta)).sqrt() >= target {
        delta *= 0.5;
    }
    delta.max(defaults::MIN_TRUNCATION)
}

/// Chooses a simulation scheme and its parameters for exits from `(-b, a)`.
pub fn plan(model: &LevyModel, a: f64, b: f64, hints: &PlanHints) -> Result<SimPlan, SamplerError> {
    if !(a > 0.0 && b > 0.0) {
        return Err(SamplerError::InvalidPlan(format!("barriers must be positive, got a={a} b={b}")));
    }
    let scheme = match hints.scheme {
        Some(requested) => {
            if let Some(reason) = incompatibility(model, requested) {
                return Err(SamplerError::IncompatibleScheme { requested, reason });
            }
            requested
        }
        None => automatic_scheme(model),
    };
    let horizon = hints.horizon.unwrap_or(defaults::HORIZON);
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(SamplerError::InvalidPlan(format!("horizon must be finite and > 0, got {horizon}")));
    }
    let (delta, gaussian_substitution) = match scheme {
        Scheme::TruncatedInfiniteActivity => {
            let gaussian = hints.gaussian_substitution.unwrap_or(true);
            let delta = match hints.delta {
                Some(d) => d,
                // substituted jumps keep their variance, so only the coarser jump/grid
                // resolution constraint applies
                None if gaussian => defaults::SUBSTITUTION_TRUNCATION_FRACTION * a.min(b),
                None => truncation_without_substitution(model.measure(), a, b, horizon),
            };
            if !(delta.is_finite() && delta > 0.0) {
                return Err(SamplerError::InvalidPlan(format!("delta must be finite and > 0, got {delta}")));
            }
            (Some(delta), gaussian)
        }
        _ => (None, false),
    };
    let gaussian_part = model.sigma2() > 0.0 || gaussian_substitution;
    let dt = if gaussian_part {
        let dt = hints.dt.unwrap_or(defaults::DT);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SamplerError::InvalidPlan(format!("dt must be finite and > 0, got {dt}")));
        }
        Some(dt)
    } else {
        None
    };
    Ok(SimPlan {
        scheme,
        delta,
        dt,
        gaussian_substitution,
        horizon,
    })
}

/// Finite-activity surrogate keeping jumps with `|x| ≥ delta`.
///
/// With `gaussian` the variance of the removed jumps is added to `σ²`.
/// Finite-variation models keep `γ₀`; infinite-variation models move the
/// compensator of the jumps in `[delta, 1]` into the new slope.
pub fn substitute_model(model: &LevyModel, delta: f64, gaussian: bool) -> Result<LevyModel, ModelError> {
    if model.is_finite_activity() {
        return Err(ModelError::NotInfiniteActivity);
    }
    let measure = model.measure();
    let sigma2 = if gaussian {
        model.sigma2() + measure.truncated_second_moment(delta)
    } else {
        model.sigma2()
    };
    let gamma0 = match model.drift() {
        Drift::Gamma0(g) => g,
        Drift::Center(center) => center - measure.first_moment_between(delta, 1.0),
    };
    let truncated = MeasureSpec::Truncated {
        delta,
        base: Box::new(measure.clone()),
    };
    LevyModel::new(sigma2, truncated, Drift::Gamma0(gamma0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Up { time: f64, value: f64 },
    Down { time: f64, value: f64 },
    Censored { horizon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitRecord {
    pub outcome: Outcome,
    pub scheme: Scheme,
}

impl ExitRecord {
    pub fn time(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Up { time, .. } | Outcome::Down { time, .. } => Some(time),
            Outcome::Censored { .. } => None,
        }
    }

    /// Checks `Up ⇒ value ≥ a`, `Down ⇒ value ≤ -b` and `T ∈ [0, horizon]`.
    pub fn is_well_formed(&self, a: f64, b: f64, horizon: f64) -> bool {
        match self.outcome {
            Outcome::Up { time, value } => value >= a && (0.0..=horizon).contains(&time),
            Outcome::Down { time, value } => value <= -b && (0.0..=horizon).contains(&time),
            Outcome::Censored { horizon: h } => h == horizon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathEvent {
    Start,
    Grid,
    /// Position just after a jump.
    Jump,
    Exit,
    Censored,
}

/// Receives path points as the simulator produces them.
pub trait PathObserver {
    fn observe(&mut self, time: f64, value: f64, event: PathEvent);
}

impl PathObserver for () {
    #[inline(always)]
    fn observe(&mut self, _: f64, _: f64, _: PathEvent) {}
}

/// Collects `(time, value, event)` triples.
#[derive(Debug, Default, Clone)]
pub struct PathTrace {
    pub points: Vec<(f64, f64, PathEvent)>,
}

impl PathObserver for PathTrace {
    fn observe(&mut self, time: f64, value: f64, event: PathEvent) {
        self.points.push((time, value, event));
    }
}

impl PathTrace {
    pub fn jump_count_until(&self, t: f64) -> usize {
        self.points
            .iter()
            .filter(|(time, _, e)| *e == PathEvent::Jump && *time <= t)
            .count()
    }

    /// Writes one `time value` pair per line.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (t, x, _) in &self.points {
            writeln!(out, "{t} {x}")?;
        }
        Ok(())
    }
}

/// A model and plan prepared for repeated path simulation.
#[derive(Debug, Clone)]
pub struct ExitSimulator {
    plan: SimPlan,
    slope: f64,
    sigma: f64,
    jumps: JumpLaw,
}

impl ExitSimulator {
    pub fn new(model: &LevyModel, plan: &SimPlan) -> Result<Self, SamplerError> {
        if let Some(reason) = incompatibility(model, plan.scheme) {
            return Err(SamplerError::IncompatibleScheme {
                requested: plan.scheme,
                reason,
            });
        }
        let effective = match plan.scheme {
            Scheme::TruncatedInfiniteActivity => {
                let delta = plan
                    .delta
                    .ok_or_else(|| SamplerError::InvalidPlan("truncation level missing".into()))?;
                substitute_model(model, delta, plan.gaussian_substitution)?
            }
            _ => model.clone(),
        };
        let slope = effective.gamma0().expect("simulated models have finite variation");
        let sigma = effective.sigma2().sqrt();
        if sigma > 0.0 && plan.dt.is_none() {
            return Err(SamplerError::InvalidPlan("grid step missing for a Gaussian component".into()));
        }
        let jumps = effective.measure().large_jump_law(0.0)?;
        Ok(ExitSimulator {
            plan: *plan,
            slope,
            sigma,
            jumps,
        })
    }

    pub fn plan(&self) -> &SimPlan {
        &self.plan
    }

    /// Rate of the simulated jumps.
    pub fn jump_rate(&self) -> f64 {
        self.jumps.rate()
    }

    pub fn run<R: Rng + ?Sized>(&self, a: f64, b: f64, rng: &mut R) -> ExitRecord {
        self.run_observed(a, b, rng, &mut ())
    }

    pub fn run_observed<R: Rng + ?Sized, O: PathObserver>(&self, a: f64, b: f64, rng: &mut R, obs: &mut O) -> ExitRecord {
        obs.observe(0.0, 0.0, PathEvent::Start);
        let outcome = if self.sigma > 0.0 {
            self.run_grid(a, b, rng, obs)
        } else {
            self.run_events(a, b, rng, obs)
        };
        match outcome {
            Outcome::Up { time, value } | Outcome::Down { time, value } => obs.observe(time, value, PathEvent::Exit),
            Outcome::Censored { horizon } => obs.observe(horizon, f64::NAN, PathEvent::Censored),
        }
        ExitRecord {
            outcome,
            scheme: self.plan.scheme,
        }
    }

    fn next_wait<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let rate = self.jumps.rate();
        if rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / rate
        } else {
            f64::INFINITY
        }
    }

    fn run_events<R: Rng + ?Sized, O: PathObserver>(&self, a: f64, b: f64, rng: &mut R, obs: &mut O) -> Outcome {
        let horizon = self.plan.horizon;
        let slope = self.slope;
        let (mut t, mut x) = (0.0_f64, 0.0_f64);
        loop {
            let wait = self.next_wait(rng);
            let to_barrier = if slope > 0.0 {
                (a - x) / slope
            } else if slope < 0.0 {
                (-b - x) / slope
            } else {
                f64::INFINITY
            };
            if to_barrier <= wait {
                let time = t + to_barrier;
                if time > horizon {
                    return Outcome::Censored { horizon };
                }
                return if slope > 0.0 {
                    Outcome::Up { time, value: a }
                } else {
                    Outcome::Down { time, value: -b }
                };
            }
            let time = t + wait;
            if time > horizon {
                return Outcome::Censored { horizon };
            }
            t = time;
            x += slope * wait;
            x += self.jumps.sample(rng);
            obs.observe(t, x, PathEvent::Jump);
            if x >= a {
                return Outcome::Up { time: t, value: x };
            }
            if x <= -b {
                return Outcome::Down { time: t, value: x };
            }
        }
    }

    fn run_grid<R: Rng + ?Sized, O: PathObserver>(&self, a: f64, b: f64, rng: &mut R, obs: &mut O) -> Outcome {
        let horizon = self.plan.horizon;
        let dt = self.plan.dt.expect("grid step checked at construction");
        let (slope, sigma) = (self.slope, self.sigma);
        let (mut t, mut x) = (0.0_f64, 0.0_f64);
        let mut step: u64 = 0;
        let mut next_jump = self.next_wait(rng);
        let exit = |t: f64, x: f64| {
            if x >= a {
                Some(Outcome::Up { time: t, value: x })
            } else if x <= -b {
                Some(Outcome::Down { time: t, value: x })
            } else {
                None
            }
        };
        loop {
            let grid_time = ((step + 1) as f64 * dt).min(horizon);
            let jump_first = next_jump <= grid_time;
            let target = if jump_first { next_jump } else { grid_time };
            let h = target - t;
            let z: f64 = StandardNormal.sample(rng);
            x += slope * h + sigma * h.sqrt() * z;
            t = target;
            if let Some(out) = exit(t, x) {
                return out;
            }
            if jump_first {
                x += self.jumps.sample(rng);
                obs.observe(t, x, PathEvent::Jump);
                if let Some(out) = exit(t, x) {
                    return out;
                }
                next_jump = t + self.next_wait(rng);
            } else {
                step += 1;
                obs.observe(t, x, PathEvent::Grid);
                if t >= horizon {
                    return Outcome::Censored { horizon };
                }
            }
        }
    }
}

/// Simulates path `path` of the campaign seeded by `seed`.
pub fn simulate_exit(model: &LevyModel, a: f64, b: f64, plan: &SimPlan, seed: u64, path: u64) -> Result<ExitRecord, SamplerError> {
    let sim = ExitSimulator::new(model, plan)?;
    Ok(sim.run(a, b, &mut path_rng(seed, path)))
}
