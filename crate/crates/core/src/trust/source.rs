use std::collections::BTreeMap;

use chrono::{DateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use super::{Opinion, TrustError, DEFAULT_BASE_RATE};

/// Feedback counts against later observed ground truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub confirmed: u64,
    pub refuted: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Confirmed,
    Refuted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceProfile {
    pub source_id: String,
    pub features: Vec<f64>,
    #[serde(default)]
    pub evidence: Evidence,
}

impl SourceProfile {
    pub fn new(source_id: impl Into<String>, features: Vec<f64>) -> SourceProfile {
        SourceProfile { source_id: source_id.into(), features, evidence: Evidence::default() }
    }

    pub fn with_evidence(mut self, confirmed: u64, refuted: u64) -> SourceProfile {
        self.evidence = Evidence { confirmed, refuted };
        self
    }

    /// Laplace-rule trust `(r + 1) / (r + s + 2)`.
    pub fn trust(&self) -> f64 {
        let Evidence { confirmed: r, refuted: s } = self.evidence;
        (r as f64 + 1.0) / (r as f64 + s as f64 + 2.0)
    }

    /// Opinion about the source's reliability implied by its feedback record.
    pub fn reliability_opinion(&self) -> Opinion {
        let Evidence { confirmed: r, refuted: s } = self.evidence;
        let total = r as f64 + s as f64 + 2.0;
        Opinion {
            belief: r as f64 / total,
            disbelief: s as f64 / total,
            uncertainty: 2.0 / total,
            base_rate: DEFAULT_BASE_RATE,
        }
    }
}

pub fn feedback(profile: &SourceProfile, outcome: Outcome) -> SourceProfile {
    let mut p = profile.clone();
    match outcome {
        Outcome::Confirmed => p.evidence.confirmed += 1,
        Outcome::Refuted => p.evidence.refuted += 1,
    }
    p
}

/// Categorical source attributes prior to encoding.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceAttributes {
    #[serde(default)]
    pub affiliation: Option<String>,
    #[serde(default)]
    pub alliances: Vec<String>,
    #[serde(default)]
    pub nationality: Option<String>,
    /// Location of the report, `[latitude, longitude]`.
    #[serde(default)]
    pub location: Option<[f64; 2]>,
    #[serde(default)]
    pub report_time: Option<DateTime<Utc>>,
    #[serde(default)]
    pub expertise: Vec<String>,
}

/// Encoding of attributes into a numeric feature vector: categorical values
/// one-hot (multi-hot for lists), location bucketed to a grid cell, time to the
/// hour of day. Values outside the vocabulary encode as zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    #[serde(default)]
    pub affiliations: Vec<String>,
    #[serde(default)]
    pub alliances: Vec<String>,
    #[serde(default)]
    pub nationalities: Vec<String>,
    #[serde(default)]
    pub expertise: Vec<String>,
    /// Grid cell ids of the form `"{row}:{col}"` with `row = floor(lat / cell)`.
    #[serde(default)]
    pub cells: Vec<String>,
    #[serde(default = "default_cell_deg")]
    pub grid_cell_deg: f64,
}

fn default_cell_deg() -> f64 {
    0.1
}

impl Default for Codebook {
    fn default() -> Self {
        Codebook {
            affiliations: Vec::new(),
            alliances: Vec::new(),
            nationalities: Vec::new(),
            expertise: Vec::new(),
            cells: Vec::new(),
            grid_cell_deg: default_cell_deg(),
        }
    }
}

impl Codebook {
    pub fn dimension(&self) -> usize {
        self.affiliations.len()
            + self.alliances.len()
            + self.nationalities.len()
            + self.cells.len()
            + 24
            + self.expertise.len()
    }

    pub fn cell_id(&self, latitude: f64, longitude: f64) -> String {
        let row = (latitude / self.grid_cell_deg).floor() as i64;
        let col = (longitude / self.grid_cell_deg).floor() as i64;
        format!("{row}:{col}")
    }

    pub fn encode(&self, attrs: &SourceAttributes) -> Vec<f64> {
        fn one_hot(vocab: &[String], values: &[&str], out: &mut Vec<f64>) {
            out.extend(vocab.iter().map(|v| if values.contains(&v.as_str()) { 1.0 } else { 0.0 }));
        }
        let mut out = Vec::with_capacity(self.dimension());
        one_hot(&self.affiliations, &attrs.affiliation.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
        one_hot(&self.alliances, &attrs.alliances.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
        one_hot(&self.nationalities, &attrs.nationality.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
        let cell = attrs.location.map(|[lat, lon]| self.cell_id(lat, lon));
        one_hot(&self.cells, &cell.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
        let hour = attrs.report_time.map(|t| t.hour() as usize);
        out.extend((0..24).map(|h| if hour == Some(h) { 1.0 } else { 0.0 }));
        one_hot(&self.expertise, &attrs.expertise.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
        out
    }
}

/// Registry file entry: either explicit features or attributes to encode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub source_id: String,
    #[serde(default)]
    pub attributes: Option<SourceAttributes>,
    #[serde(default)]
    pub features: Option<Vec<f64>>,
    #[serde(default)]
    pub evidence: Evidence,
}

/// JSON registry of source profiles and the codebook used to encode them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceRegistry {
    #[serde(default)]
    pub codebook: Codebook,
    #[serde(default)]
    pub sources: Vec<SourceRecord>,
}

impl SourceRegistry {
    pub fn from_json(text: &str) -> Result<SourceRegistry, TrustError> {
        serde_json::from_str(text).map_err(|e| TrustError::Registry(e.to_string()))
    }

    pub fn profiles(&self) -> Result<Profiles, TrustError> {
        let mut out = Profiles::new();
        for rec in &self.sources {
            let features = match (&rec.features, &rec.attributes) {
                (Some(f), _) => f.clone(),
                (None, Some(a)) => self.codebook.encode(a),
                (None, None) => vec![0.0; self.codebook.dimension()],
            };
            out.insert(SourceProfile { source_id: rec.source_id.clone(), features, evidence: rec.evidence });
        }
        Ok(out)
    }
}

/// Source profiles keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Profiles(BTreeMap<String, SourceProfile>);

impl Profiles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, profile: SourceProfile) {
        self.0.insert(profile.source_id.clone(), profile);
    }

    pub fn get(&self, id: &str) -> Option<&SourceProfile> {
        self.0.get(id)
    }

    /// Trust of a source; unknown sources get the uninformed 0.5.
    pub fn trust(&self, id: &str) -> f64 {
        self.0.get(id).map_or(0.5, SourceProfile::trust)
    }

    pub fn apply_feedback(&mut self, id: &str, outcome: Outcome) -> &SourceProfile {
        let entry = self.0.entry(id.to_owned()).or_insert_with(|| SourceProfile::new(id, Vec::new()));
        *entry = feedback(entry, outcome);
        entry
    }

    pub fn iter(&self) -> impl Iterator<Item = &SourceProfile> {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<SourceProfile> for Profiles {
    fn from_iter<T: IntoIterator<Item = SourceProfile>>(iter: T) -> Self {
        let mut p = Profiles::new();
        for x in iter {
            p.insert(x);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn fresh_source_is_uninformed() {
        let p = SourceProfile::new("x", vec![]);
        assert_eq!(p.trust(), 0.5);
        let o = p.reliability_opinion();
        assert_eq!((o.belief, o.disbelief, o.uncertainty), (0.0, 0.0, 1.0));
    }

    #[test]
    fn laplace_rule() {
        let p = SourceProfile::new("x", vec![]).with_evidence(8, 2);
        assert_eq!(p.trust(), 9.0 / 12.0);
        let o = p.reliability_opinion();
        assert!(o.is_valid());
        assert_eq!(o.belief, 8.0 / 12.0);
    }

    #[test]
    fn feedback_moves_trust() {
        let p = SourceProfile::new("x", vec![]).with_evidence(3, 1);
        assert!(feedback(&p, Outcome::Confirmed).trust() > p.trust());
        assert!(feedback(&p, Outcome::Refuted).trust() < p.trust());
    }

    #[test]
    fn codebook_encoding() {
        let cb = Codebook {
            affiliations: vec!["icrc".into(), "army".into()],
            alliances: vec!["blue".into()],
            nationalities: vec!["ch".into(), "ye".into()],
            expertise: vec!["medical".into(), "engineering".into()],
            cells: vec!["153:442".into()],
            grid_cell_deg: 0.1,
        };
        let attrs = SourceAttributes {
            affiliation: Some("icrc".into()),
            alliances: vec![],
            nationality: Some("ch".into()),
            location: Some([15.35, 44.21]),
            report_time: Some(Utc.with_ymd_and_hms(2026, 1, 1, 13, 45, 0).unwrap()),
            expertise: vec!["medical".into(), "unknown".into()],
        };
        let f = cb.encode(&attrs);
        assert_eq!(f.len(), cb.dimension());
        assert_eq!(&f[..6], &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(f[6 + 13], 1.0);
        assert_eq!(f.iter().sum::<f64>(), 5.0);
    }

    #[test]
    fn registry_json() {
        let text = r#"{
            "codebook": {"affiliations": ["icrc", "ngo"]},
            "sources": [
                {"source_id": "a", "attributes": {"affiliation": "icrc"}, "evidence": {"confirmed": 4, "refuted": 0}},
                {"source_id": "b", "features": [0.0, 1.0]}
            ]
        }"#;
        let reg = SourceRegistry::from_json(text).unwrap();
        let profiles = reg.profiles().unwrap();
        assert_eq!(profiles.get("a").unwrap().features.len(), 26);
        assert_eq!(profiles.get("b").unwrap().features, vec![0.0, 1.0]);
        assert_eq!(profiles.trust("a"), 5.0 / 6.0);
        assert_eq!(profiles.trust("nobody"), 0.5);
    }
}
