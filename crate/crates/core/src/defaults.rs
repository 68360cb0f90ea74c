//! Campaign defaults, in one place.
//!
//! | setting                     | value                      |
//! |-----------------------------|----------------------------|
//! | paths per estimate          | 100 000                    |
//! | confidence level            | 1 − 0.05                   |
//! | grid step                   | 1e-4                       |
//! | horizon, window `[m, ∞)`    | 16 · max(m, 1)             |
//! | horizon, window `[m, M)`    | M                          |
//! | campaign seed               | 42                         |

use crate::window::ExitQuery;

pub const PATHS: u64 = 100_000;
pub const ALPHA: f64 = 0.05;
pub const DT: f64 = 1e-4;
pub const SEED: u64 = 42;
/// Horizon used by [`crate::sampler::plan`] when none is given.
pub const HORIZON: f64 = 16.0;

/// Without Gaussian substitution, dropped small jumps may carry at most this
/// fraction of `min(a, b)` as standard deviation over the horizon.
pub const SMALL_JUMP_STD_FRACTION: f64 = 1e-3;
/// With Gaussian substitution, jumps below this fraction of `min(a, b)` become Gaussian.
pub const SUBSTITUTION_TRUNCATION_FRACTION: f64 = 1e-2;
pub const MIN_TRUNCATION: f64 = 1e-12;

/// Paths per work unit; also the unit of the deterministic merge order.
pub const CHUNK: u64 = 1024;

/// Simulation horizon for a query: the window end when finite, else `16 · max(m, 1)`.
pub fn horizon_for(query: &ExitQuery) -> f64 {
    if query.upper.is_finite() {
        query.upper
    } else {
        16.0 * query.m.max(1.0)
    }
}
