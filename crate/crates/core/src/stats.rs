//! Small Monte Carlo helpers.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Largest reported CI half-width.
pub const CI_CAP: f64 = 0.5;

/// A binomial proportion estimate with its normal-approximation CI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        assert!(successes <= trials);
        Proportion { successes, trials }
    }

    pub fn from_flags<I: IntoIterator<Item = bool>>(flags: I) -> Self {
        let (mut s, mut n) = (0, 0);
        for b in flags {
            n += 1;
            s += b as u64;
        }
        Proportion::new(s, n)
    }

    pub fn estimate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    /// Wald half-width `z·sqrt(p(1-p)/n)`, capped at 0.5. A sample of fewer
    /// than two trials carries the cap.
    pub fn ci_half_width(&self) -> f64 {
        if self.trials < 2 {
            return CI_CAP;
        }
        let p = self.estimate();
        (Z95 * (p * (1.0 - p) / self.trials as f64).sqrt()).min(CI_CAP)
    }
}
