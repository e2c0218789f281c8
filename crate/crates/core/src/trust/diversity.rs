use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{SourceProfile, TrustError};

/// Partition of known sources into groups expected to report alike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityModel {
    /// Each cluster sorted by source id; clusters sorted by their first id.
    pub clusters: Vec<Vec<String>>,
    pub similarity_threshold: f64,
}

impl DiversityModel {
    /// Every source alone in its own cluster.
    pub fn singletons<'a>(ids: impl IntoIterator<Item = &'a str>) -> DiversityModel {
        let mut ids: Vec<String> = ids.into_iter().map(str::to_owned).collect();
        ids.sort();
        ids.dedup();
        DiversityModel { clusters: ids.into_iter().map(|id| vec![id]).collect(), similarity_threshold: 1.0 }
    }

    pub fn cluster_of(&self, source_id: &str) -> Option<usize> {
        self.clusters.iter().position(|c| c.binary_search_by(|x| x.as_str().cmp(source_id)).is_ok())
    }

    pub fn same_cluster(&self, a: &str, b: &str) -> bool {
        a == b || matches!((self.cluster_of(a), self.cluster_of(b)), (Some(x), Some(y)) if x == y)
    }
}

/// Cosine similarity. Two zero vectors are identical (1); a zero vector is
/// unrelated to any non-zero one (0).
pub fn cosine_similarity(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    match (nx == 0.0, ny == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => (dot / (nx * ny)).clamp(-1.0, 1.0),
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Single-linkage clustering: two sources share a cluster iff a chain of
/// pairwise similarities `>= threshold` connects them.
pub fn cluster_sources<'a>(
    profiles: impl IntoIterator<Item = &'a SourceProfile>,
    threshold: f64,
) -> Result<DiversityModel, TrustError> {
    let mut profiles: Vec<&SourceProfile> = profiles.into_iter().collect();
    profiles.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    profiles.dedup_by(|a, b| a.source_id == b.source_id);
    if let Some(first) = profiles.first() {
        let expected = first.features.len();
        if let Some(bad) = profiles.iter().find(|p| p.features.len() != expected) {
            return Err(TrustError::DimensionMismatch {
                source_id: bad.source_id.clone(),
                expected,
                found: bad.features.len(),
            });
        }
    }
    let n = profiles.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if cosine_similarity(&profiles[i].features, &profiles[j].features) >= threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                // Root at the smaller index so roots are lexicographically first.
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(profiles[i].source_id.clone());
    }
    Ok(DiversityModel { clusters: groups.into_values().collect(), similarity_threshold: threshold })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub profile: SourceProfile,
    pub cost: f64,
}

fn distance(model: &DiversityModel, a: &SourceProfile, b: &SourceProfile) -> f64 {
    if model.same_cluster(&a.source_id, &b.source_id) {
        0.0
    } else {
        1.0 - cosine_similarity(&a.features, &b.features)
    }
}

/// Greedy budgeted selection. Each step takes the affordable candidate with the
/// highest `trust * (1 + min distance to those already chosen)`; the first pick
/// is by trust alone. Ties go to the smaller source id. Sources in the same
/// cluster are at distance 0.
pub fn select_sources(candidates: &[Candidate], model: &DiversityModel, budget: f64) -> Vec<String> {
    let mut pool: Vec<&Candidate> = candidates.iter().filter(|c| c.cost.is_finite() && c.cost >= 0.0).collect();
    pool.sort_by(|a, b| a.profile.source_id.cmp(&b.profile.source_id));
    pool.dedup_by(|a, b| a.profile.source_id == b.profile.source_id);
    let mut chosen: Vec<&Candidate> = Vec::new();
    let mut remaining = if budget.is_finite() { budget.max(0.0) } else { 0.0 };
    loop {
        let mut best: Option<(f64, usize)> = None;
        for (i, c) in pool.iter().enumerate() {
            if c.cost > remaining {
                continue;
            }
            let t = c.profile.trust();
            let score = if chosen.is_empty() {
                t
            } else {
                let d = chosen.iter().map(|s| distance(model, &c.profile, &s.profile)).fold(f64::INFINITY, f64::min);
                t * (1.0 + d)
            };
            // Pool is id-sorted, so strict improvement keeps the smaller id on ties.
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, i));
            }
        }
        let Some((_, i)) = best else { break };
        let pick = pool.remove(i);
        remaining -= pick.cost;
        chosen.push(pick);
    }
    chosen.into_iter().map(|c| c.profile.source_id.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(id: &str, f: &[f64]) -> SourceProfile {
        SourceProfile::new(id, f.to_vec())
    }

    #[test]
    fn cosine_edges() {
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[0.0, 0.0]), 1.0);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert!((cosine_similarity(&[1.0, 1.0], &[2.0, 2.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_vectors_share_a_cluster() {
        let ps = [p("b", &[1.0, 2.0]), p("a", &[1.0, 2.0]), p("c", &[1.0, 2.0])];
        let m = cluster_sources(&ps, 0.99).unwrap();
        assert_eq!(m.clusters, vec![vec!["a", "b", "c"]]);
    }

    #[test]
    fn orthogonal_vectors_are_singletons() {
        let ps = [p("x", &[1.0, 0.0, 0.0]), p("y", &[0.0, 1.0, 0.0]), p("z", &[0.0, 0.0, 1.0])];
        let m = cluster_sources(&ps, 0.9).unwrap();
        assert_eq!(m.clusters.len(), 3);
        assert_eq!(m.cluster_of("y"), Some(1));
        assert_eq!(m.cluster_of("w"), None);
    }

    #[test]
    fn dimension_mismatch() {
        let ps = [p("x", &[1.0]), p("y", &[1.0, 0.0])];
        assert!(matches!(cluster_sources(&ps, 0.5), Err(TrustError::DimensionMismatch { .. })));
    }

    #[test]
    fn selection_edges() {
        let c =
            vec![Candidate { profile: p("a", &[1.0]), cost: 1.0 }, Candidate { profile: p("b", &[1.0]), cost: 5.0 }];
        let m = DiversityModel::singletons(["a", "b"]);
        assert!(select_sources(&c, &m, 0.0).is_empty());
        assert_eq!(select_sources(&c, &m, 2.0), vec!["a"]);
    }

    #[test]
    fn first_pick_is_most_trusted_then_diverse() {
        let c = vec![
            Candidate { profile: p("a", &[1.0, 0.0]).with_evidence(9, 0), cost: 1.0 },
            Candidate { profile: p("b", &[1.0, 0.0]).with_evidence(8, 0), cost: 1.0 },
            Candidate { profile: p("c", &[0.0, 1.0]).with_evidence(4, 1), cost: 1.0 },
        ];
        let m = cluster_sources(c.iter().map(|c| &c.profile), 0.9).unwrap();
        assert_eq!(select_sources(&c, &m, 2.0), vec!["a", "c"]);
    }
}
