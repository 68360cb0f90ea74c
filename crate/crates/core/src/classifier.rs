//! Exact predicates on Lévy triplets describing when the two exit-time laws
//! `λ⁺_{a,b}` and `λ⁻_{a,b}` are simultaneously non-zero on a time window.
//!
//! All predicates are pure boolean functions of the triplet metadata. The
//! window decision procedure [`decide`] composes them, adding the sharp
//! thresholds available for one-sided finite-variation models.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{LevyModel, Side};
use crate::window::ExitQuery;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    IncreasingSubordinator,
    DecreasingSubordinator,
    NotMonotone,
    ZeroProcess,
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::IncreasingSubordinator => "increasing-subordinator",
            Monotonicity::DecreasingSubordinator => "decreasing-subordinator",
            Monotonicity::NotMonotone => "not-monotone",
            Monotonicity::ZeroProcess => "zero-process",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictValue {
    Positive,
    Zero,
    Unknown,
}

impl fmt::Display for VerdictValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictValue::Positive => "positive",
            VerdictValue::Zero => "zero",
            VerdictValue::Unknown => "unknown",
        })
    }
}

/// Which branch of the decision procedure produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleTag {
    #[serde(rename = "zero-process")]
    ZeroProcess,
    /// `X` or `-X` is a subordinator.
    #[serde(rename = "prop1.monotone")]
    Monotone,
    #[serde(rename = "prop1")]
    ProperExit,
    #[serde(rename = "prop2")]
    ExitBefore,
    /// One-sided jumps against the drift, window `[0, M)`: `a'/|γ₀| < M`.
    #[serde(rename = "prop3.threshold")]
    HittingTimeThreshold,
    #[serde(rename = "prop4")]
    Confinable,
    #[serde(rename = "prop5")]
    ExitAfter,
    /// Drift with a jump gap against it, window `[m, ∞)`: `m|γ₀| < a'` or `a+b > W`.
    #[serde(rename = "prop6.threshold")]
    GapThreshold,
    /// As [`RuleTag::GapThreshold`], for a model that also jumps with the drift.
    #[serde(rename = "prop6.threshold.two-sided")]
    GapThresholdTwoSided,
    #[serde(rename = "corollary")]
    FullSupport,
    /// A containing window already decides zero.
    #[serde(rename = "window.monotone")]
    WindowMonotone,
    #[serde(rename = "unknown.gap")]
    UnknownGap,
}

impl RuleTag {
    pub const ALL: [RuleTag; 12] = [
        RuleTag::ZeroProcess,
        RuleTag::Monotone,
        RuleTag::ProperExit,
        RuleTag::ExitBefore,
        RuleTag::HittingTimeThreshold,
        RuleTag::Confinable,
        RuleTag::ExitAfter,
        RuleTag::GapThreshold,
        RuleTag::GapThresholdTwoSided,
        RuleTag::FullSupport,
        RuleTag::WindowMonotone,
        RuleTag::UnknownGap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleTag::ZeroProcess => "zero-process",
            RuleTag::Monotone => "prop1.monotone",
            RuleTag::ProperExit => "prop1",
            RuleTag::ExitBefore => "prop2",
            RuleTag::HittingTimeThreshold => "prop3.threshold",
            RuleTag::Confinable => "prop4",
            RuleTag::ExitAfter => "prop5",
            RuleTag::GapThreshold => "prop6.threshold",
            RuleTag::GapThresholdTwoSided => "prop6.threshold.two-sided",
            RuleTag::FullSupport => "corollary",
            RuleTag::WindowMonotone => "window.monotone",
            RuleTag::UnknownGap => "unknown.gap",
        }
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: VerdictValue,
    pub reason: RuleTag,
}

impl Verdict {
    fn positive(reason: RuleTag) -> Self {
        Verdict {
            value: VerdictValue::Positive,
            reason,
        }
    }

    fn zero(reason: RuleTag) -> Self {
        Verdict {
            value: VerdictValue::Zero,
            reason,
        }
    }

    fn iff(cond: bool, reason: RuleTag) -> Self {
        if cond {
            Verdict::positive(reason)
        } else {
            Verdict::zero(reason)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

fn is_zero_process(model: &LevyModel) -> bool {
    model.sigma2() == 0.0
        && !model.measure().charges(Side::Neg)
        && !model.measure().charges(Side::Pos)
        && model.gamma0() == Some(0.0)
}

/// Whether the paths of `X` (for `Side::Pos`) or `-X` (for `Side::Neg`) are non-decreasing.
fn monotone_towards(model: &LevyModel, side: Side) -> bool {
    match model.gamma0() {
        Some(g) => model.sigma2() == 0.0 && !model.measure().charges(side.opposite()) && side.sign() * g >= 0.0,
        None => false,
    }
}

pub fn monotonicity(model: &LevyModel) -> Monotonicity {
    if is_zero_process(model) {
        Monotonicity::ZeroProcess
    } else if monotone_towards(model, Side::Pos) {
        Monotonicity::IncreasingSubordinator
    } else if monotone_towards(model, Side::Neg) {
        Monotonicity::DecreasingSubordinator
    } else {
        Monotonicity::NotMonotone
    }
}

fn gaussian_or_infinite_variation(model: &LevyModel) -> bool {
    model.sigma2() > 0.0 || !model.has_finite_variation()
}

fn charges_both(model: &LevyModel) -> bool {
    model.measure().charges(Side::Neg) && model.measure().charges(Side::Pos)
}

/// Finite-variation clause shared by [`confinable`], [`exit_support_unbounded`] and
/// [`exit_support_full`]: the drift is either zero or can be undone by arbitrarily
/// small jumps against it.
fn drift_compensable(model: &LevyModel, zero_drift_ok: bool) -> bool {
    match model.gamma0() {
        Some(0.0) => zero_drift_ok,
        Some(g) if g > 0.0 => model.measure().zero_in_support(Side::Neg),
        Some(_) => model.measure().zero_in_support(Side::Pos),
        None => false,
    }
}

/// `λ⁺[0,∞) ∧ λ⁻[0,∞) > 0`: neither `X` nor `-X` is a subordinator.
pub fn exits_proper(model: &LevyModel) -> bool {
    if gaussian_or_infinite_variation(model) || charges_both(model) {
        return true;
    }
    let measure = model.measure();
    let g = model.gamma0().unwrap_or(0.0);
    (measure.charges(Side::Pos) && g < 0.0) || (measure.charges(Side::Neg) && g > 0.0)
}

/// `λ⁺[0,M) ∧ λ⁻[0,M) > 0` for every `M > 0`.
pub fn zero_in_exit_support(model: &LevyModel) -> bool {
    charges_both(model) || gaussian_or_infinite_variation(model)
}

/// `P(sup_{[0,M]} |X| < ε) > 0` for all `M, ε > 0`.
pub fn confinable(model: &LevyModel) -> bool {
    gaussian_or_infinite_variation(model) || drift_compensable(model, true)
}

/// `λ⁺[m,∞) ∧ λ⁻[m,∞) > 0` for all `a, b > 0` and `m ≥ 0`.
pub fn exit_support_unbounded(model: &LevyModel) -> bool {
    gaussian_or_infinite_variation(model) || drift_compensable(model, charges_both(model))
}

/// `λ⁺[m,M) ∧ λ⁻[m,M) > 0` for all `a, b > 0` and `0 ≤ m < M ≤ ∞`.
pub fn exit_support_full(model: &LevyModel) -> bool {
    gaussian_or_infinite_variation(model) || (charges_both(model) && drift_compensable(model, true))
}

/// All classifier predicates for one model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateVector {
    pub monotonicity: Monotonicity,
    pub proper: bool,
    pub before: bool,
    pub after: bool,
    pub full: bool,
    pub confinable: bool,
}

impl PredicateVector {
    pub fn of(model: &LevyModel) -> Self {
        PredicateVector {
            monotonicity: monotonicity(model),
            proper: exits_proper(model),
            before: zero_in_exit_support(model),
            after: exit_support_unbounded(model),
            full: exit_support_full(model),
            confinable: confinable(model),
        }
    }

    /// The four exit condition sets, in the order (proper, before, after, full).
    pub fn exit_conditions(&self) -> [bool; 4] {
        [self.proper, self.before, self.after, self.full]
    }
}

impl fmt::Display for PredicateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "proper={} before={} after={} full={} confinable={}",
            self.proper, self.before, self.after, self.full, self.confinable
        )
    }
}

/// Decides whether `λ⁺_{a,b}[m,M) ∧ λ⁻_{a,b}[m,M) > 0`.
pub fn decide(model: &LevyModel, query: &ExitQuery) -> Result<Verdict, ClassifyError> {
    query.validate().map_err(ClassifyError::InvalidQuery)?;
    Ok(decide_window(model, query.a, query.b, query.m, query.upper))
}

fn decide_window(model: &LevyModel, a: f64, b: f64, m: f64, upper: f64) -> Verdict {
    match monotonicity(model) {
        Monotonicity::ZeroProcess => return Verdict::zero(RuleTag::ZeroProcess),
        Monotonicity::IncreasingSubordinator | Monotonicity::DecreasingSubordinator => {
            return Verdict::zero(RuleTag::Monotone)
        }
        Monotonicity::NotMonotone => {}
    }
    let bounded = upper.is_finite();
    match (m == 0.0, bounded) {
        (true, false) => Verdict::iff(exits_proper(model), RuleTag::ProperExit),
        (true, true) => decide_from_start(model, a, b, upper),
        (false, false) => decide_until_forever(model, a, b, m),
        (false, true) => {
            if exit_support_full(model) {
                return Verdict::positive(RuleTag::FullSupport);
            }
            let head = decide_from_start(model, a, b, upper);
            let tail = decide_until_forever(model, a, b, m);
            if head.value == VerdictValue::Zero || tail.value == VerdictValue::Zero {
                Verdict::zero(RuleTag::WindowMonotone)
            } else {
                Verdict {
                    value: VerdictValue::Unknown,
                    reason: RuleTag::UnknownGap,
                }
            }
        }
    }
}

/// Window `[0, M)` with `M < ∞`, for a non-monotone model.
fn decide_from_start(model: &LevyModel, a: f64, b: f64, upper: f64) -> Verdict {
    if zero_in_exit_support(model) {
        return Verdict::positive(RuleTag::ExitBefore);
    }
    // Non-monotone and not covered above: σ² = 0, finite variation, jumps on one
    // side only and a non-zero drift pointing the other way.
    let g = model.gamma0().expect("finite variation");
    debug_assert!(g != 0.0 && model.sigma2() == 0.0);
    debug_assert!(!model.measure().charges(if g > 0.0 { Side::Pos } else { Side::Neg }));
    let drift_side_barrier = if g > 0.0 { a } else { b };
    Verdict::iff(drift_side_barrier / g.abs() < upper, RuleTag::HittingTimeThreshold)
}

/// Window `[m, ∞)` with `m > 0`, for a non-monotone model.
fn decide_until_forever(model: &LevyModel, a: f64, b: f64, m: f64) -> Verdict {
    if exit_support_unbounded(model) {
        return Verdict::positive(RuleTag::ExitAfter);
    }
    // Not covered above: σ² = 0, finite variation, γ₀ ≠ 0, and the jumps against
    // the drift stay a distance W > 0 away from the origin.
    let g = model.gamma0().expect("finite variation");
    debug_assert!(g != 0.0 && model.sigma2() == 0.0);
    let (against, drift_side_barrier) = if g > 0.0 { (Side::Neg, a) } else { (Side::Pos, b) };
    let gap = model
        .measure()
        .support_gap(against)
        .expect("non-monotone model jumps against its drift");
    debug_assert!(!gap.zero_in_support);
    let tag = if model.measure().charges(against.opposite()) {
        RuleTag::GapThresholdTwoSided
    } else {
        RuleTag::GapThreshold
    };
    Verdict::iff(m * g.abs() < drift_side_barrier || a + b > gap.distance, tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MeasureSpec, PowerSide};

    fn fv(measure: MeasureSpec, g: f64) -> LevyModel {
        LevyModel::finite_variation(0.0, measure, g).unwrap()
    }

    fn m_a() -> LevyModel {
        fv(MeasureSpec::atoms(&[(-2.0, 1.0)]), 1.0)
    }

    fn symmetric_power(alpha: f64) -> LevyModel {
        let side = PowerSide::new(1.0, alpha, 1.0);
        LevyModel::new(0.0, MeasureSpec::power_law(side, side), crate::model::Drift::Center(0.0)).unwrap()
    }

    fn q(a: f64, b: f64, m: f64, upper: f64) -> ExitQuery {
        ExitQuery::new(a, b, m, upper).unwrap()
    }

    #[test]
    fn monotonicity_examples() {
        let up = MeasureSpec::atoms(&[(1.0, 1.0)]);
        assert_eq!(monotonicity(&fv(up.clone(), 0.0)), Monotonicity::IncreasingSubordinator);
        assert_eq!(monotonicity(&fv(up, -1.0)), Monotonicity::NotMonotone);
        assert_eq!(monotonicity(&LevyModel::brownian(1.0)), Monotonicity::NotMonotone);
        assert_eq!(monotonicity(&fv(MeasureSpec::Zero, 0.0)), Monotonicity::ZeroProcess);
        assert_eq!(monotonicity(&fv(MeasureSpec::Zero, -3.0)), Monotonicity::DecreasingSubordinator);
    }

    #[test]
    fn exits_proper_examples() {
        assert!(exits_proper(&m_a()));
        assert!(!exits_proper(&fv(MeasureSpec::atoms(&[(1.0, 1.0)]), 0.0)));
        assert!(exits_proper(&fv(MeasureSpec::atoms(&[(-1.0, 1.0), (1.0, 1.0)]), 0.0)));
    }

    #[test]
    fn zero_in_exit_support_examples() {
        assert!(!zero_in_exit_support(&m_a()));
        assert!(zero_in_exit_support(&symmetric_power(1.5)));
        assert!(zero_in_exit_support(&LevyModel::brownian(1.0)));
    }

    #[test]
    fn confinable_examples() {
        assert!(!confinable(&m_a()));
        assert!(confinable(&fv(MeasureSpec::exponential(1.0, 1.0, Side::Neg), 1.0)));
        assert!(confinable(&fv(MeasureSpec::atoms(&[(-1.0, 1.0), (1.0, 1.0)]), 0.0)));
    }

    #[test]
    fn exit_support_unbounded_examples() {
        assert!(exit_support_unbounded(&fv(MeasureSpec::atoms(&[(-1.0, 1.0), (1.0, 1.0)]), 0.0)));
        assert!(!exit_support_unbounded(&fv(MeasureSpec::atoms(&[(-2.0, 1.0), (2.0, 1.0)]), 1.0)));
        assert!(exit_support_unbounded(&fv(MeasureSpec::exponential(1.0, 1.0, Side::Pos), -1.0)));
    }

    #[test]
    fn exit_support_full_examples() {
        assert!(exit_support_full(&fv(MeasureSpec::atoms(&[(-1.0, 1.0), (1.0, 1.0)]), 0.0)));
        assert!(!exit_support_full(&fv(MeasureSpec::exponential(1.0, 1.0, Side::Neg), 1.0)));
        assert!(exit_support_full(&symmetric_power(1.2)));
    }

    #[test]
    fn decide_examples() {
        let model = m_a();
        let v = decide(&model, &q(1.0, 1.0, 0.0, 0.5)).unwrap();
        assert_eq!(v, Verdict::zero(RuleTag::HittingTimeThreshold));
        let v = decide(&model, &q(1.0, 1.0, 1.0, f64::INFINITY)).unwrap();
        assert_eq!(v, Verdict::zero(RuleTag::GapThreshold));
        let v = decide(&model, &q(1.0, 1.0, 0.5, 1.5)).unwrap();
        assert_eq!(v.value, VerdictValue::Unknown);
        assert_eq!(v.reason, RuleTag::UnknownGap);

        let cp = fv(MeasureSpec::atoms(&[(-1.0, 1.0), (1.0, 1.0)]), 0.0);
        let v = decide(&cp, &q(0.5, 0.5, 1.0, 2.0)).unwrap();
        assert_eq!(v, Verdict::positive(RuleTag::FullSupport));
    }

    #[test]
    fn threshold_boundaries_are_strict() {
        let model = m_a();
        // a/γ₀ = 1 = M: strict inequality fails
        assert_eq!(decide(&model, &q(1.0, 1.0, 0.0, 1.0)).unwrap().value, VerdictValue::Zero);
        assert_eq!(decide(&model, &q(1.0, 1.0, 0.0, 1.0 + 1e-12)).unwrap().value, VerdictValue::Positive);
        // m γ₀ just below a
        assert_eq!(
            decide(&model, &q(1.0, 1.0, 1.0 - 1e-12, f64::INFINITY)).unwrap().value,
            VerdictValue::Positive
        );
        // a + b just above W = 2
        assert_eq!(
            decide(&model, &q(1.0, 1.0 + 1e-12, 5.0, f64::INFINITY)).unwrap().value,
            VerdictValue::Positive
        );
    }

    #[test]
    fn mirrored_threshold_uses_drift_side_barrier() {
        let model = m_a().mirrored();
        // drift -1 reaches -b = -3 at t = 3
        assert_eq!(decide(&model, &q(1.0, 3.0, 0.0, 2.9)).unwrap().value, VerdictValue::Zero);
        assert_eq!(decide(&model, &q(1.0, 3.0, 0.0, 3.1)).unwrap().value, VerdictValue::Positive);
    }

    #[test]
    fn two_sided_gap_is_flagged() {
        let model = fv(MeasureSpec::atoms(&[(-2.0, 1.0), (2.0, 1.0)]), 1.0);
        let v = decide(&model, &q(1.0, 1.0, 1.0, f64::INFINITY)).unwrap();
        assert_eq!(v, Verdict::zero(RuleTag::GapThresholdTwoSided));
    }

    #[test]
    fn monotone_and_zero_process() {
        let sub = fv(MeasureSpec::atoms(&[(1.0, 1.0)]), 1.0);
        assert_eq!(
            decide(&sub, &q(1.0, 1.0, 0.0, f64::INFINITY)).unwrap(),
            Verdict::zero(RuleTag::Monotone)
        );
        let zero = fv(MeasureSpec::Zero, 0.0);
        assert_eq!(
            decide(&zero, &q(1.0, 1.0, 0.0, 1.0)).unwrap(),
            Verdict::zero(RuleTag::ZeroProcess)
        );
    }

    #[test]
    fn window_monotone_branch() {
        let v = decide(&m_a(), &q(1.0, 1.0, 0.2, 0.8)).unwrap();
        assert_eq!(v, Verdict::zero(RuleTag::WindowMonotone));
    }

    #[test]
    fn invalid_queries_rejected() {
        let bad = ExitQuery {
            a: 1.0,
            b: 0.0,
            m: 0.0,
            upper: 1.0,
        };
        assert!(matches!(decide(&m_a(), &bad), Err(ClassifyError::InvalidQuery(_))));
        let bad = ExitQuery {
            a: 1.0,
            b: 1.0,
            m: 2.0,
            upper: 2.0,
        };
        assert!(decide(&m_a(), &bad).is_err());
    }
}
