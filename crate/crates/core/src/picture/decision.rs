use serde::{Deserialize, Serialize};

use super::PictureError;
use crate::trust::Opinion;

/// Uncertainty above which more collection is requested before deciding.
pub const DEFAULT_U_MAX: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Act,
    Hold,
    CollectMore,
}

/// Required expected probability: `1 - min(inaction / (inaction + action), 0.5)`.
/// Two zero risks count as a ratio of 0.
pub fn evidence_threshold(risk_of_inaction: f64, risk_of_action: f64) -> f64 {
    let total = risk_of_inaction + risk_of_action;
    let ratio = if total > 0.0 { risk_of_inaction / total } else { 0.0 };
    1.0 - ratio.min(0.5)
}

/// Too uncertain → CollectMore; enough evidence and inaction riskier than
/// action → Act; otherwise Hold.
pub fn decision_support(
    opinion: &Opinion,
    risk_of_inaction: f64,
    risk_of_action: f64,
    u_max: f64,
) -> Result<Decision, PictureError> {
    for (name, r) in [("risk_of_inaction", risk_of_inaction), ("risk_of_action", risk_of_action)] {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(PictureError::DomainError(format!("{name} must be a non-negative number, got {r}")));
        }
    }
    if opinion.uncertainty > u_max {
        return Ok(Decision::CollectMore);
    }
    if opinion.expected() >= evidence_threshold(risk_of_inaction, risk_of_action) && risk_of_inaction > risk_of_action {
        return Ok(Decision::Act);
    }
    Ok(Decision::Hold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuous_collects_more() {
        assert_eq!(decision_support(&Opinion::vacuous(0.5), 1.0, 0.0, DEFAULT_U_MAX).unwrap(), Decision::CollectMore);
    }

    #[test]
    fn dominant_evidence_acts() {
        assert_eq!(decision_support(&Opinion::certain(0.5), 2.0, 1.0, DEFAULT_U_MAX).unwrap(), Decision::Act);
        assert_eq!(decision_support(&Opinion::certain(0.5), 1.0, 2.0, DEFAULT_U_MAX).unwrap(), Decision::Hold);
    }

    #[test]
    fn negative_risk_rejected() {
        assert!(decision_support(&Opinion::certain(0.5), -1.0, 0.0, DEFAULT_U_MAX).is_err());
        assert!(decision_support(&Opinion::certain(0.5), f64::NAN, 0.0, DEFAULT_U_MAX).is_err());
    }
}
