use chrono::{DurationRound, TimeDelta};
use rand::Rng;

use super::geo::KM_PER_DEG;
use super::PictureError;
use crate::codec::{GeoShape, WfMessage};
use crate::crypto::Digest;

/// Stable per-scenario pseudonyms for civilian originators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pseudonymizer {
    salt: String,
}

impl Pseudonymizer {
    pub fn new(salt: impl Into<String>) -> Self {
        Pseudonymizer { salt: salt.into() }
    }

    pub fn pseudonym(&self, originator_id: &str) -> String {
        let d = Digest::of_parts(&[b"pause-pseudonym", self.salt.as_bytes(), originator_id.as_bytes()]);
        format!("anon-{}", d.short())
    }
}

/// One Laplace(0, scale) draw by inverse CDF.
pub fn laplace<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    loop {
        let u: f64 = rng.gen::<f64>() - 0.5;
        let tail = 1.0 - 2.0 * u.abs();
        if tail > 0.0 {
            return -scale * u.signum() * tail.ln();
        }
    }
}

/// Replaces the originator with a pseudonym, truncates the timestamp to the
/// hour and perturbs latitude and longitude by independent Laplace noise of
/// scale `1/epsilon` km. Category, subject and references are untouched.
pub fn anonymize<R: Rng + ?Sized>(
    message: &WfMessage,
    epsilon: f64,
    pseudonyms: &Pseudonymizer,
    rng: &mut R,
) -> Result<WfMessage, PictureError> {
    let geometry = message.geometry.ok_or(PictureError::MissingGeometry)?;
    if !(epsilon > 0.0) {
        return Err(PictureError::DomainError(format!("epsilon {epsilon} must be positive")));
    }
    let scale_km = 1.0 / epsilon;
    let lat = geometry.latitude();
    let dlat = laplace(rng, scale_km) / KM_PER_DEG;
    let dlon = laplace(rng, scale_km) / (KM_PER_DEG * lat.to_radians().cos().max(1e-6));
    let new_lat = (lat + dlat).clamp(-90.0, 90.0);
    let mut new_lon = geometry.longitude() + dlon;
    if !(-180.0..=180.0).contains(&new_lon) {
        new_lon = (new_lon + 180.0).rem_euclid(360.0) - 180.0;
    }
    let mut out = message.clone();
    out.originator_id = pseudonyms.pseudonym(&message.originator_id);
    out.timestamp = message.timestamp.duration_trunc(TimeDelta::hours(1)).expect("hour truncation");
    out.geometry = Some(GeoShape::new(new_lat, new_lon, geometry.radius_m));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::MessageCategory;
    use chrono::{TimeZone, Timelike, Utc};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn civ() -> WfMessage {
        WfMessage::new("civ-42", MessageCategory::StatusSignal, 2, Utc.with_ymd_and_hms(2026, 3, 1, 8, 47, 13).unwrap())
            .at(15.35, 44.2, 100)
    }

    #[test]
    fn deterministic_under_seed() {
        let p = Pseudonymizer::new("s1");
        let a = anonymize(&civ(), 1.0, &p, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = anonymize(&civ(), 1.0, &p, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.timestamp.minute(), 0);
        assert_eq!(a.timestamp.hour(), 8);
        assert!(a.originator_id.starts_with("anon-"));
        assert_eq!((a.category, a.subject_code, a.reference_indicator), (civ().category, 2, civ().reference_indicator));
    }

    #[test]
    fn pseudonyms_depend_on_salt() {
        assert_eq!(Pseudonymizer::new("x").pseudonym("a"), Pseudonymizer::new("x").pseudonym("a"));
        assert_ne!(Pseudonymizer::new("x").pseudonym("a"), Pseudonymizer::new("y").pseudonym("a"));
    }

    #[test]
    fn rejects_bad_input() {
        let p = Pseudonymizer::new("s");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = civ();
        assert_eq!(anonymize(&m, 0.0, &p, &mut rng).unwrap_err().code(), "DomainError");
        m.geometry = None;
        assert_eq!(anonymize(&m, 1.0, &p, &mut rng).unwrap_err(), PictureError::MissingGeometry);
    }
}
