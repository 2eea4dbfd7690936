use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Working precision and escalation policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub bits: u32,
    pub max_escalations: u32,
    pub escalation_factor: u32,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { bits: 128, max_escalations: 4, escalation_factor: 2 }
    }
}

impl PrecisionConfig {
    pub fn new(bits: u32) -> Result<Self> {
        let cfg = PrecisionConfig { bits, ..Default::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits < 64 {
            return Err(invalid(format!("precision must be >= 64 bits, got {}", self.bits)));
        }
        if self.escalation_factor < 2 {
            return Err(invalid("escalation factor must be >= 2"));
        }
        Ok(())
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        PrecisionConfig { bits, ..*self }
    }

    /// The precisions tried by [`escalate`], starting at `bits`.
    pub fn schedule(&self) -> impl Iterator<Item = u32> + '_ {
        let mut bits = self.bits;
        (0..=self.max_escalations).map(move |i| {
            if i > 0 {
                bits = bits.saturating_mul(self.escalation_factor);
            }
            bits
        })
    }
}

/// Runs `attempt` at increasing precision until it returns `Some`.
///
/// `Ok(None)` and [`Error::DivisionByZero`] both mean "not decided at this
/// precision"; any other error is returned as is. Returns the value and the
/// precision at which it was decided.
pub fn escalate<T>(cfg: &PrecisionConfig, mut attempt: impl FnMut(u32) -> Result<Option<T>>) -> Result<(T, u32)> {
    cfg.validate()?;
    let mut last = cfg.bits;
    for bits in cfg.schedule() {
        last = bits;
        match attempt(bits) {
            Ok(Some(v)) => return Ok((v, bits)),
            Ok(None) | Err(Error::DivisionByZero) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Indeterminate { bits: last, escalations: cfg.max_escalations })
}
