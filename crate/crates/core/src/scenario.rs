//! Model and scenario documents (TOML, schema `levy-exit/1`).
//!
//! A model file:
//!
//! ```toml
//! schema = "levy-exit/1"
//!
//! [model]
//! sigma2 = 0.0
//! drift = { gamma0 = 1.0 }
//!
//! [model.measure]
//! family = "atoms"
//! atoms = [{ x = -2.0, rate = 1.0 }]
//! ```
//!
//! Measure families, one example each:
//!
//! ```toml
//! measure = { family = "zero" }
//! measure = { family = "atoms", atoms = [{ x = -1.0, rate = 1.0 }, { x = 1.0, rate = 1.0 }] }
//! measure = { family = "compound-poisson", rate = 2.0, jumps = { kind = "uniform", lo = 0.5, hi = 1.5 } }
//! measure = { family = "compound-poisson", rate = 1.0, jumps = { kind = "exponential", scale = 1.0, sign = "pos" } }
//! measure = { family = "compound-poisson", rate = 1.0, jumps = { kind = "mixture", components = [
//!     { weight = 1.0, dist = { kind = "exponential", scale = 0.5, sign = "neg" } },
//!     { weight = 3.0, dist = { kind = "uniform", lo = 1.0, hi = 2.0 } },
//! ] } }
//! measure = { family = "power-law", pos = { c = 1.0, alpha = 1.5, theta = 1.0 }, neg = { c = 0.5, alpha = 0.5 } }
//! measure = { family = "sum", parts = [{ family = "atoms", atoms = [{ x = -2.0, rate = 1.0 }] },
//!                                      { family = "power-law", pos = { c = 1.0, alpha = 0.5, theta = 1.0 } }] }
//! measure = { family = "truncated", delta = 0.01, base = { family = "power-law", pos = { c = 1.0, alpha = 1.2 } } }
//! ```
//!
//! Infinite-variation models (power-law index ≥ 1) take `drift = { center = b }`
//! instead of `gamma0`.
//!
//! A scenario file holds one or more `[[scenario]]` tables, each with a
//! unique `name`, a `model`, a list of `queries` (`a`, `b`, `m`, `M`; `M`
//! may be `inf`) and an optional `campaign` table.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::CheckCase;
use crate::model::LevyModel;
use crate::sampler::{PlanHints, Scheme};
use crate::window::ExitQuery;

pub const SCHEMA: &str = "levy-exit/1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FileError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema: expected \"{SCHEMA}\", found {0:?}")]
    Schema(String),
    #[error("scenario[{index}].name: duplicate name {name:?}")]
    DuplicateName { index: usize, name: String },
    #[error("scenario[{index}].queries[{query}]: {message}")]
    InvalidQuery { index: usize, query: usize, message: String },
    #[error("scenario[{index}].queries: at least one query is required")]
    NoQueries { index: usize },
}

/// Per-scenario campaign parameters; unset fields use [`crate::defaults`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian_substitution: Option<bool>,
}

impl Campaign {
    pub fn hints(&self) -> PlanHints {
        PlanHints {
            scheme: self.scheme,
            dt: self.dt,
            delta: self.delta,
            gaussian_substitution: self.gaussian_substitution,
            horizon: self.horizon,
        }
    }

    fn is_default(&self) -> bool {
        *self == Campaign::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub model: LevyModel,
    pub queries: Vec<ExitQuery>,
    #[serde(default, skip_serializing_if = "Campaign::is_default")]
    pub campaign: Campaign,
}

impl Scenario {
    pub fn new(name: impl Into<String>, model: LevyModel, queries: Vec<ExitQuery>) -> Self {
        Scenario {
            name: name.into(),
            model,
            queries,
            campaign: Campaign::default(),
        }
    }

    /// One check case per query, identified as `name#index`.
    pub fn cases(&self) -> Vec<CheckCase> {
        self.queries
            .iter()
            .enumerate()
            .map(|(i, q)| CheckCase {
                id: format!("{}#{i}", self.name),
                model: self.model.clone(),
                query: *q,
                hints: self.campaign.hints(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ScenarioDoc {
    schema: String,
    #[serde(rename = "scenario")]
    scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelDoc {
    schema: String,
    model: LevyModel,
}

fn check_schema(found: &str) -> Result<(), FileError> {
    if found == SCHEMA {
        Ok(())
    } else {
        Err(FileError::Schema(found.to_string()))
    }
}

pub fn parse_model(text: &str) -> Result<LevyModel, FileError> {
    let doc: ModelDoc = toml::from_str(text).map_err(|e| FileError::Parse(e.to_string()))?;
    check_schema(&doc.schema)?;
    Ok(doc.model)
}

pub fn model_to_toml(model: &LevyModel) -> String {
    let doc = ModelDoc {
        schema: SCHEMA.to_string(),
        model: model.clone(),
    };
    toml::to_string(&doc).expect("models serialize to TOML")
}

pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>, FileError> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| FileError::Parse(e.to_string()))?;
    check_schema(&doc.schema)?;
    let mut names = HashSet::new();
    for (index, s) in doc.scenarios.iter().enumerate() {
        if !names.insert(s.name.clone()) {
            return Err(FileError::DuplicateName {
                index,
                name: s.name.clone(),
            });
        }
        if s.queries.is_empty() {
            return Err(FileError::NoQueries { index });
        }
        for (query, q) in s.queries.iter().enumerate() {
            q.validate().map_err(|message| FileError::InvalidQuery { index, query, message })?;
        }
    }
    Ok(doc.scenarios)
}

pub fn scenarios_to_toml(scenarios: &[Scenario]) -> String {
    let doc = ScenarioDoc {
        schema: SCHEMA.to_string(),
        scenarios: scenarios.to_vec(),
    };
    toml::to_string(&doc).expect("scenarios serialize to TOML")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Drift, MeasureSpec};

    const M_A: &str = r#"
schema = "levy-exit/1"

[model]
sigma2 = 0.0
drift = { gamma0 = 1.0 }

[model.measure]
family = "atoms"
atoms = [{ x = -2.0, rate = 1.0 }]
"#;

    #[test]
    fn parses_model_file() {
        let m = parse_model(M_A).unwrap();
        assert_eq!(m.drift(), Drift::Gamma0(1.0));
        assert_eq!(m.measure(), &MeasureSpec::atoms(&[(-2.0, 1.0)]));
        assert_eq!(parse_model(&model_to_toml(&m)).unwrap(), m);
    }

    #[test]
    fn every_documented_family_parses() {
        let families = [
            r#"{ family = "zero" }"#,
            r#"{ family = "atoms", atoms = [{ x = -1.0, rate = 1.0 }, { x = 1.0, rate = 1.0 }] }"#,
            r#"{ family = "compound-poisson", rate = 2.0, jumps = { kind = "uniform", lo = 0.5, hi = 1.5 } }"#,
            r#"{ family = "compound-poisson", rate = 1.0, jumps = { kind = "exponential", scale = 1.0, sign = "pos" } }"#,
            r#"{ family = "compound-poisson", rate = 1.0, jumps = { kind = "mixture", components = [ { weight = 1.0, dist = { kind = "exponential", scale = 0.5, sign = "neg" } }, { weight = 3.0, dist = { kind = "uniform", lo = 1.0, hi = 2.0 } } ] } }"#,
            r#"{ family = "power-law", pos = { c = 1.0, alpha = 0.5, theta = 1.0 }, neg = { c = 0.5, alpha = 0.5 } }"#,
            r#"{ family = "sum", parts = [{ family = "atoms", atoms = [{ x = -2.0, rate = 1.0 }] }, { family = "power-law", pos = { c = 1.0, alpha = 0.5, theta = 1.0 } }] }"#,
            r#"{ family = "truncated", delta = 0.01, base = { family = "power-law", pos = { c = 1.0, alpha = 0.5 } } }"#,
        ];
        for f in families {
            let text = format!("schema = \"levy-exit/1\"\n[model]\ndrift = {{ gamma0 = 0.0 }}\nmeasure = {f}\n");
            let m = parse_model(&text).unwrap_or_else(|e| panic!("{f}: {e}"));
            assert_eq!(parse_model(&model_to_toml(&m)).unwrap(), m);
        }
        let iv = "schema = \"levy-exit/1\"\n[model]\ndrift = { center = 0.0 }\nmeasure = { family = \"power-law\", pos = { c = 1.0, alpha = 1.5, theta = 1.0 } }\n";
        assert!(parse_model(iv).is_ok());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = M_A.replace("rate = 1.0", "rate = -1.0");
        let err = parse_model(&bad).unwrap_err().to_string();
        assert!(err.contains("atoms[0].rate"), "{err}");
        assert!(err.contains("line"), "{err}");

        let bad = M_A.replace("levy-exit/1", "levy-exit/0");
        assert!(matches!(parse_model(&bad), Err(FileError::Schema(_))));
    }

    #[test]
    fn scenario_checks() {
        let text = r#"
schema = "levy-exit/1"
[[scenario]]
name = "bm"
model = { sigma2 = 1.0, drift = { gamma0 = 0.0 } }
queries = [{ a = 1.0, b = 1.0, M = inf }]
[[scenario]]
name = "bm"
model = { sigma2 = 1.0, drift = { gamma0 = 0.0 } }
queries = [{ a = 1.0, b = 1.0 }]
"#;
        assert!(matches!(parse_scenarios(text), Err(FileError::DuplicateName { index: 1, .. })));
        let text = text.replacen("name = \"bm\"", "name = \"bm2\"", 1).replace("M = inf", "m = 2.0, M = 1.0");
        assert!(matches!(parse_scenarios(&text), Err(FileError::InvalidQuery { index: 0, query: 0, .. })));
    }
}
