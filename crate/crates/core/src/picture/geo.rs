//! Spherical-earth helpers. Coordinates are `[latitude, longitude]` in degrees.

pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Kilometres per degree of latitude on the spherical earth.
pub const KM_PER_DEG: f64 = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;

type Vec3 = [f64; 3];

fn to_vec(p: [f64; 2]) -> Vec3 {
    let (lat, lon) = (p[0].to_radians(), p[1].to_radians());
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Central angle between two unit vectors, stable for small and large angles.
fn angle(a: Vec3, b: Vec3) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// Great-circle distance in kilometres.
pub fn distance_km(a: [f64; 2], b: [f64; 2]) -> f64 {
    EARTH_RADIUS_KM * angle(to_vec(a), to_vec(b))
}

/// Minimum great-circle distance from `p` to the minor arc `a`-`b`.
pub fn distance_to_segment_km(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (pv, av, bv) = (to_vec(p), to_vec(a), to_vec(b));
    let n = cross(av, bv);
    let nn = norm(n);
    let endpoints = angle(pv, av).min(angle(pv, bv));
    if nn < 1e-15 {
        return EARTH_RADIUS_KM * endpoints;
    }
    let n = [n[0] / nn, n[1] / nn, n[2] / nn];
    let off = dot(pv, n);
    let c = [pv[0] - off * n[0], pv[1] - off * n[1], pv[2] - off * n[2]];
    // The foot of the perpendicular lies on the arc iff it is between a and b.
    if norm(c) > 1e-15 && dot(cross(av, c), n) >= 0.0 && dot(cross(c, bv), n) >= 0.0 {
        EARTH_RADIUS_KM * off.abs().clamp(-1.0, 1.0).asin().min(endpoints)
    } else {
        EARTH_RADIUS_KM * endpoints
    }
}

/// Minimum great-circle distance from `p` to a polyline.
pub fn distance_to_polyline_km(p: [f64; 2], line: &[[f64; 2]]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [only] => distance_km(p, *only),
        _ => line.windows(2).map(|w| distance_to_segment_km(p, w[0], w[1])).fold(f64::INFINITY, f64::min),
    }
}
