//! Built-in witness models and the verification scenario set.

use crate::classifier::PredicateVector;
use crate::model::{LevyModel, MeasureSpec, PowerSide, Side};
use crate::scenario::Scenario;
use crate::window::ExitQuery;

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub name: &'static str,
    pub description: &'static str,
    pub model: LevyModel,
}

impl Witness {
    pub fn predicates(&self) -> PredicateVector {
        PredicateVector::of(&self.model)
    }
}

fn fv(measure: MeasureSpec, gamma0: f64) -> LevyModel {
    LevyModel::finite_variation(0.0, measure, gamma0).expect("catalog models are valid")
}

fn q(a: f64, b: f64, m: f64, upper: f64) -> ExitQuery {
    ExitQuery::new(a, b, m, upper).expect("catalog queries are valid")
}

/// Drift +1 with jumps of -2 at rate 1.
pub fn drift_up_jump_down() -> LevyModel {
    fv(MeasureSpec::atoms(&[(-2.0, 1.0)]), 1.0)
}

/// Six models whose predicate vectors separate every pair of the exit conditions.
pub fn witnesses() -> Vec<Witness> {
    vec![
        Witness {
            name: "monotone-drifting",
            description: "jumps of +1, drift +1: increasing subordinator",
            model: fv(MeasureSpec::atoms(&[(1.0, 1.0)]), 1.0),
        },
        Witness {
            name: "monotone-confinable",
            description: "jumps of +1, no drift: increasing subordinator that can sit still",
            model: fv(MeasureSpec::atoms(&[(1.0, 1.0)]), 0.0),
        },
        Witness {
            name: "prop1-not-prop2",
            description: "jumps of +1, drift -1: both exits possible, neither before every time nor after",
            model: fv(MeasureSpec::atoms(&[(1.0, 1.0)]), -1.0),
        },
        Witness {
            name: "prop2-not-prop5",
            description: "jumps of ±2, drift +1: exits early on both sides, no late down exit",
            model: fv(MeasureSpec::atoms(&[(-2.0, 1.0), (2.0, 1.0)]), 1.0),
        },
        Witness {
            name: "prop5-not-prop2",
            description: "exponential positive jumps, drift -1: both exits arbitrarily late, not arbitrarily early",
            model: fv(MeasureSpec::exponential(1.0, 1.0, Side::Pos), -1.0),
        },
        Witness {
            name: "corollary",
            description: "jumps of ±1, no drift: both exit laws charge every window",
            model: fv(MeasureSpec::atoms(&[(-1.0, 1.0), (1.0, 1.0)]), 0.0),
        },
    ]
}

/// Model/query rows exercising every branch of the decision procedure.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let inf = f64::INFINITY;
    let tempered = PowerSide::new(1.0, 1.5, 1.0);
    vec![
        Scenario::new("zero-process", fv(MeasureSpec::Zero, 0.0), vec![q(1.0, 1.0, 0.0, inf)]),
        Scenario::new(
            "subordinator",
            fv(MeasureSpec::atoms(&[(1.0, 1.0)]), 1.0),
            vec![q(1.0, 1.0, 0.0, inf)],
        ),
        Scenario::new(
            "drift-up-jump-down",
            drift_up_jump_down(),
            vec![
                q(1.0, 1.0, 0.0, inf),
                q(1.0, 1.0, 0.0, 0.5),
                q(1.0, 1.0, 0.0, 1.5),
                q(1.0, 1.0, 1.0, inf),
                q(1.0, 1.0, 0.5, inf),
                q(1.5, 1.0, 2.0, inf),
                q(1.0, 1.0, 0.2, 0.8),
                q(1.0, 1.0, 0.5, 1.5),
            ],
        ),
        Scenario::new(
            "drift-down-jump-up",
            fv(MeasureSpec::atoms(&[(2.0, 1.0)]), -1.0),
            vec![q(1.0, 1.0, 0.0, 0.5), q(1.0, 1.0, 0.0, 1.5)],
        ),
        Scenario::new(
            "symmetric-unit-jumps",
            fv(MeasureSpec::atoms(&[(-1.0, 1.0), (1.0, 1.0)]), 0.0),
            vec![q(0.5, 0.5, 0.0, 1.0), q(0.5, 0.5, 1.0, inf), q(0.5, 0.5, 1.0, 2.0)],
        ),
        Scenario::new(
            "symmetric-gap-drift-up",
            fv(MeasureSpec::atoms(&[(-2.0, 1.0), (2.0, 1.0)]), 1.0),
            vec![q(1.0, 1.0, 0.0, 0.5), q(1.0, 1.0, 1.0, inf)],
        ),
        Scenario::new(
            "exponential-up-drift-down",
            fv(MeasureSpec::exponential(1.0, 1.0, Side::Pos), -1.0),
            vec![q(1.0, 1.0, 0.5, inf)],
        ),
        Scenario::new(
            "brownian",
            LevyModel::brownian(1.0),
            vec![q(0.5, 0.5, 0.0, 1.0), q(0.5, 0.5, 1.0, inf)],
        ),
        Scenario::new(
            "tempered-stable",
            LevyModel::new(0.0, MeasureSpec::power_law(tempered, tempered), crate::model::Drift::Center(0.0))
                .expect("catalog models are valid"),
            vec![q(0.5, 0.5, 0.0, 1.0)],
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{decide, RuleTag, VerdictValue};

    #[test]
    fn witness_vectors() {
        let v: Vec<[bool; 4]> = witnesses().iter().map(|w| w.predicates().exit_conditions()).collect();
        assert_eq!(v[0], [false, false, false, false]);
        assert_eq!(v[1], [false, false, false, false]);
        assert_eq!(v[2], [true, false, false, false]);
        assert_eq!(v[3], [true, true, false, false]);
        assert_eq!(v[4], [true, false, true, false]);
        assert_eq!(v[5], [true, true, true, true]);
        assert!(!witnesses()[0].predicates().confinable);
        assert!(witnesses()[1].predicates().confinable);
    }

    #[test]
    fn builtin_rows_cover_every_decision_branch() {
        let mut seen = Vec::new();
        for s in builtin_scenarios() {
            for query in &s.queries {
                seen.push(decide(&s.model, query).unwrap());
            }
        }
        for tag in RuleTag::ALL {
            if tag == RuleTag::Confinable {
                continue;
            }
            assert!(seen.iter().any(|v| v.reason == tag), "{tag} not covered");
        }
        assert!(seen.iter().any(|v| v.value == VerdictValue::Unknown));
    }
}
