//! Exit queries: an annulus `(-b, a)` and a time window `[m, M)`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitQuery {
    /// Upper barrier distance.
    pub a: f64,
    /// Lower barrier distance; the annulus is `(-b, a)`.
    pub b: f64,
    #[serde(default)]
    pub m: f64,
    /// Window end `M`; `+∞` allowed.
    #[serde(
        rename = "M",
        default = "unbounded",
        serialize_with = "ser_window_end",
        deserialize_with = "de_window_end"
    )]
    pub upper: f64,
}

fn unbounded() -> f64 {
    f64::INFINITY
}

fn ser_window_end<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WindowEnd {
    Number(f64),
    Text(String),
}

fn de_window_end<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match WindowEnd::deserialize(d)? {
        WindowEnd::Number(v) => Ok(v),
        WindowEnd::Text(t) if matches!(t.as_str(), "inf" | "+inf" | "infinity") => Ok(f64::INFINITY),
        WindowEnd::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
    }
}

impl ExitQuery {
    pub fn new(a: f64, b: f64, m: f64, upper: f64) -> Result<Self, String> {
        let q = ExitQuery { a, b, m, upper };
        q.validate()?;
        Ok(q)
    }

    /// `[0, ∞)` on the annulus `(-b, a)`.
    pub fn whole_line(a: f64, b: f64) -> Self {
        ExitQuery {
            a,
            b,
            m: 0.0,
            upper: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(format!("a must be finite and > 0, got {}", self.a));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(format!("b must be finite and > 0, got {}", self.b));
        }
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(format!("m must be finite and >= 0, got {}", self.m));
        }
        if self.upper.is_nan() || self.upper <= self.m {
            return Err(format!("need m < M, got m={} M={}", self.m, self.upper));
        }
        Ok(())
    }

    pub fn contains_time(&self, t: f64) -> bool {
        self.m <= t && t < self.upper
    }

    /// Same window on the mirrored annulus `(-a, b)`.
    pub fn mirrored(&self) -> Self {
        ExitQuery {
            a: self.b,
            b: self.a,
            ..*self
        }
    }
}

impl fmt::Display for ExitQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} b={} window=[{}, {})", self.a, self.b, self.m, self.upper)
    }
}
