//! Adaptive Monte Carlo: uniform proposals, evaluating only those whose
//! label is still unknown.

use crate::error::Result;
use crate::monotone::{DesignState, LabeledPoint, UnitPoint};
use crate::oracle::{sample_input, Domain, Oracle};
use crate::rng::{self, Rng};

/// Default cap on rejected proposals per step.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// Outcome of one proposal loop.
#[derive(Clone, Debug, PartialEq)]
pub enum Draw {
    Accepted { point: UnitPoint, rejected: u64 },
    Exhausted { rejected: u64 },
}

pub fn draw_unknown(
    state: &DesignState,
    domain: Option<&Domain>,
    max_attempts: u64,
    rng: &mut Rng,
) -> Result<Draw> {
    let p = state.dimension();
    for rejected in 0..max_attempts {
        let x = sample_input(domain, p, rng);
        if state.classify_unchecked(&x)?.is_unknown() {
            return Ok(Draw::Accepted { point: x, rejected });
        }
    }
    Ok(Draw::Exhausted {
        rejected: max_attempts,
    })
}

/// Number of evaluations adaptive Monte Carlo makes in its first `tries`
/// proposals (accepted and rejected alike).
pub fn amc_evaluations(oracle: &dyn Oracle, tries: u64, seed: u64) -> Result<u64> {
    let mut state = DesignState::new(oracle.dimension())?;
    let mut rng = rng::seeded(seed);
    let mut evaluations = 0;
    for _ in 0..tries {
        let x = sample_input(oracle.domain(), oracle.dimension(), &mut rng);
        if state.classify_unchecked(&x)?.is_unknown() {
            let label = oracle.evaluate(&x)?;
            state.record(LabeledPoint::new(x, label))?;
            evaluations += 1;
        }
    }
    Ok(evaluations)
}
