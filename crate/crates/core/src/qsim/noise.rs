use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};

/// Per-gate depolarizing strengths. `p1` follows every single-qubit gate on
/// its qubit, `p2` follows every two-qubit gate on its pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    pub const NOISELESS: NoiseModel = NoiseModel { p1: 0.0, p2: 0.0 };

    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for p in [p1, p2] {
            if !(0.0..=1.0).contains(&p) {
                return Err(QbmError::InvalidProbability(p));
            }
        }
        Ok(Self { p1, p2 })
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0
    }
}
