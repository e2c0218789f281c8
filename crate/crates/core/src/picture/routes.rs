use serde::{Deserialize, Serialize};

use super::{geo, EntityTrack, PictureError, TrackKind};

/// Default distance-decay length of threat influence.
pub const DEFAULT_LAMBDA_KM: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteOption {
    pub route_id: String,
    /// `[latitude, longitude]` points.
    pub polyline: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatContribution {
    pub track_id: String,
    pub severity: f64,
    pub expected: f64,
    pub distance_km: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRisk {
    pub route_id: String,
    pub risk: f64,
    pub contributions: Vec<ThreatContribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskAssessment {
    pub lambda_km: f64,
    /// In input order.
    pub routes: Vec<RouteRisk>,
    pub chosen: String,
}

impl RiskAssessment {
    pub fn risk_of(&self, route_id: &str) -> Option<f64> {
        self.routes.iter().find(|r| r.route_id == route_id).map(|r| r.risk)
    }
}

/// Risk of each route as the sum over threat tracks of
/// `severity * E * exp(-distance / lambda)`, with distance the minimum
/// great-circle distance from the route to the threat. The least risky route
/// is chosen, ties going to the smallest route id.
pub fn assess_routes<'a>(
    routes: &[RouteOption],
    tracks: impl IntoIterator<Item = &'a EntityTrack>,
    lambda_km: f64,
) -> Result<RiskAssessment, PictureError> {
    if routes.is_empty() {
        return Err(PictureError::EmptyRoutes);
    }
    if !(lambda_km > 0.0) || !lambda_km.is_finite() {
        return Err(PictureError::DomainError(format!("lambda_km {lambda_km} must be positive")));
    }
    if let Some(r) = routes.iter().find(|r| r.polyline.len() < 2) {
        return Err(PictureError::InvalidRoute(r.route_id.clone()));
    }
    let threats: Vec<&EntityTrack> = tracks.into_iter().filter(|t| t.kind == TrackKind::Threat).collect();
    let mut assessed = Vec::with_capacity(routes.len());
    for route in routes {
        let contributions: Vec<ThreatContribution> = threats
            .iter()
            .map(|t| {
                let severity = t.severity.unwrap_or(0.0);
                let expected = t.opinion.expected();
                let distance_km = geo::distance_to_polyline_km(t.position(), &route.polyline);
                ThreatContribution {
                    track_id: t.track_id.clone(),
                    severity,
                    expected,
                    distance_km,
                    contribution: severity * expected * (-distance_km / lambda_km).exp(),
                }
            })
            .collect();
        let risk = contributions.iter().map(|c| c.contribution).sum();
        assessed.push(RouteRisk { route_id: route.route_id.clone(), risk, contributions });
    }
    let chosen = assessed
        .iter()
        .min_by(|a, b| a.risk.total_cmp(&b.risk).then_with(|| a.route_id.cmp(&b.route_id)))
        .map(|r| r.route_id.clone())
        .expect("routes non-empty");
    Ok(RiskAssessment { lambda_km, routes: assessed, chosen })
}
