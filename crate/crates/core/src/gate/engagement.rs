use serde::{Deserialize, Serialize};

use super::{PerceptionState, Protection};

use Protection::{NotProtected as N, Protected as P};

/// Decision-error table for protective weapon systems:
/// `(truth, operator, machine, state, consequence)`.
pub const ENGAGEMENT_TABLE: [(Protection, Protection, Protection, &str, &str); 8] = [
    (P, P, P, "Correct protection", "Protection achieved"),
    (P, P, N, "Correct protection", "Protection achieved as human prohibits machine to engage."),
    (P, N, P, "Correct protection", "Protection achieved as machine prohibits engagement"),
    (P, N, N, "Protection fail", "Protection failure"),
    (N, P, P, "False protection", "Military objective not achieved"),
    (N, P, N, "False protection", "Military objective not achieved as human prohibits machine to engage"),
    (N, N, P, "False protection", "Military objective not achieved as machine prohibits engagement"),
    (N, N, N, "Unprotected", "Military objective achieved within IHL/ILAC-boundaries"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngagementCase {
    pub truth: Protection,
    pub operator: PerceptionState,
    pub machine: PerceptionState,
    pub state: String,
    pub consequence: String,
    /// Engagement proceeds only when operator and machine both see no protection.
    pub engaged: bool,
}

/// Looks up the table row for the triple. Total over all eight inputs.
pub fn resolve_engagement(truth: Protection, operator: &PerceptionState, machine: &PerceptionState) -> EngagementCase {
    let (op, m) = (operator.assessment, machine.assessment);
    let (.., state, consequence) = ENGAGEMENT_TABLE
        .iter()
        .find(|(t, o, mm, ..)| *t == truth && *o == op && *mm == m)
        .expect("table covers every triple");
    EngagementCase {
        truth,
        operator: operator.clone(),
        machine: machine.clone(),
        state: (*state).to_owned(),
        consequence: (*consequence).to_owned(),
        engaged: op == N && m == N,
    }
}
