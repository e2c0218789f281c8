use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{fuse_averaging_all, DiversityModel, Opinion, Profiles, TrustError, DEFAULT_BASE_RATE};
use crate::crypto::Digest;

/// A source's opinion about one hypothesis, backed by a ledger entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub source_id: String,
    pub hypothesis_id: String,
    pub opinion: Opinion,
    #[serde(default)]
    pub cost: f64,
    pub ledger_digest: Digest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTrace {
    pub source_id: String,
    pub ledger_digest: Digest,
    pub trust: f64,
    pub opinion: Opinion,
    pub discounted: Opinion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTrace {
    /// Smallest source id of the cluster.
    pub cluster: String,
    pub reports: Vec<ReportTrace>,
    pub fused: Opinion,
}

/// Every intermediate opinion of one fusion, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionTrace {
    pub hypothesis_id: Option<String>,
    pub clusters: Vec<ClusterTrace>,
    /// Running cumulative result after each cluster.
    pub cumulative: Vec<Opinion>,
    pub result: Opinion,
}

pub fn fuse_hypothesis(reports: &[Report], profiles: &Profiles, model: &DiversityModel) -> Result<Opinion, TrustError> {
    fuse_hypothesis_traced(reports, profiles, model).map(|t| t.result)
}

/// Discount each report by its source's trust, average within clusters, then
/// fuse clusters cumulatively in lexicographic order. Sources unknown to the
/// model form their own cluster; sources without a profile have trust 0.5.
pub fn fuse_hypothesis_traced(
    reports: &[Report],
    profiles: &Profiles,
    model: &DiversityModel,
) -> Result<FusionTrace, TrustError> {
    let Some(first) = reports.first() else {
        let v = Opinion::vacuous(DEFAULT_BASE_RATE);
        return Ok(FusionTrace { hypothesis_id: None, clusters: Vec::new(), cumulative: Vec::new(), result: v });
    };
    for r in reports {
        r.opinion.validate()?;
        if r.hypothesis_id != first.hypothesis_id {
            return Err(TrustError::HypothesisMismatch(first.hypothesis_id.clone(), r.hypothesis_id.clone()));
        }
        if r.opinion.base_rate != first.opinion.base_rate {
            return Err(TrustError::BaseRateMismatch(first.opinion.base_rate, r.opinion.base_rate));
        }
    }

    let mut groups: BTreeMap<String, Vec<ReportTrace>> = BTreeMap::new();
    for r in reports {
        let key = match model.cluster_of(&r.source_id) {
            Some(i) => model.clusters[i][0].clone(),
            None => r.source_id.clone(),
        };
        let trust = profiles.trust(&r.source_id);
        groups.entry(key).or_default().push(ReportTrace {
            source_id: r.source_id.clone(),
            ledger_digest: r.ledger_digest,
            trust,
            opinion: r.opinion,
            discounted: r.opinion.discount(trust)?,
        });
    }

    let base_rate = first.opinion.base_rate;
    let mut acc = Opinion::vacuous(base_rate);
    let mut clusters = Vec::with_capacity(groups.len());
    let mut cumulative = Vec::with_capacity(groups.len());
    for (cluster, mut traces) in groups {
        // Canonical order makes the float arithmetic independent of input order.
        traces.sort_by(|a, b| {
            (&a.source_id, a.ledger_digest)
                .cmp(&(&b.source_id, b.ledger_digest))
                .then_with(|| opinion_key(&a.opinion).cmp(&opinion_key(&b.opinion)))
        });
        let discounted: Vec<Opinion> = traces.iter().map(|t| t.discounted).collect();
        let fused = fuse_averaging_all(&discounted)?;
        acc = acc.fuse_cumulative(&fused)?;
        cumulative.push(acc);
        clusters.push(ClusterTrace { cluster, reports: traces, fused });
    }
    Ok(FusionTrace { hypothesis_id: Some(first.hypothesis_id.clone()), clusters, cumulative, result: acc })
}

fn opinion_key(o: &Opinion) -> [u64; 3] {
    [o.belief.to_bits(), o.disbelief.to_bits(), o.uncertainty.to_bits()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trust::SourceProfile;

    fn report(source: &str, o: Opinion) -> Report {
        Report {
            source_id: source.into(),
            hypothesis_id: "h".into(),
            opinion: o,
            cost: 1.0,
            ledger_digest: Digest::of(source.as_bytes()),
        }
    }

    #[test]
    fn single_fully_trusted_report_passes_through() {
        let o = Opinion::new(0.7, 0.1, 0.2, 0.5).unwrap();
        // Evidence counts never reach t = 1; an unprofiled source has t = 0.5.
        assert_eq!(o.discount(1.0).unwrap(), o);
        let profiles = Profiles::new();
        let model = DiversityModel::singletons(["s"]);
        let fused = fuse_hypothesis(&[report("s", o)], &profiles, &model).unwrap();
        assert_eq!(fused, o.discount(0.5).unwrap());
    }

    #[test]
    fn empty_is_vacuous() {
        let r = fuse_hypothesis(&[], &Profiles::new(), &DiversityModel::singletons([])).unwrap();
        assert_eq!(r, Opinion::vacuous(0.5));
    }

    #[test]
    fn mismatched_hypotheses_rejected() {
        let o = Opinion::vacuous(0.5);
        let mut b = report("b", o);
        b.hypothesis_id = "other".into();
        let err = fuse_hypothesis(&[report("a", o), b], &Profiles::new(), &DiversityModel::singletons([])).unwrap_err();
        assert_eq!(err.code(), "HypothesisMismatch");
    }

    #[test]
    fn duplicates_in_one_cluster_count_once() {
        let o = Opinion::new(0.6, 0.1, 0.3, 0.5).unwrap();
        let profiles: Profiles =
            ["a", "b", "c"].iter().map(|id| SourceProfile::new(*id, vec![1.0]).with_evidence(5, 1)).collect();
        let model =
            DiversityModel { clusters: vec![vec!["a".into(), "b".into(), "c".into()]], similarity_threshold: 0.9 };
        let one = fuse_hypothesis(&[report("a", o)], &profiles, &model).unwrap();
        let many = fuse_hypothesis(&[report("a", o), report("b", o), report("c", o)], &profiles, &model).unwrap();
        assert!((one.belief - many.belief).abs() < 1e-12);
        assert!((one.uncertainty - many.uncertainty).abs() < 1e-12);
    }

    #[test]
    fn trace_serializes() {
        let o = Opinion::new(0.6, 0.1, 0.3, 0.5).unwrap();
        let t = fuse_hypothesis_traced(
            &[report("a", o), report("b", o)],
            &Profiles::new(),
            &DiversityModel::singletons([]),
        )
        .unwrap();
        assert_eq!(t.clusters.len(), 2);
        assert_eq!(t.cumulative.last(), Some(&t.result));
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["clusters"][0]["reports"][0]["trust"], 0.5);
    }
}
