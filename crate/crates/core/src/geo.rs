//! Great-circle geometry on a spherical Earth.
//!
//! Distances are short (catchment radii under a few miles), so the
//! spherical model is more than accurate enough; what matters for group
//! assignment is that the same formula and radius are used everywhere.

/// Mean Earth radius in statute miles.
pub const EARTH_RADIUS_MI: f64 = 3958.8;

/// Statute miles per kilometre.
pub const MILES_PER_KM: f64 = 0.621371;

/// Great-circle distance in miles between two (lat, lon) points given in
/// decimal degrees, via the haversine formula.
pub fn haversine_miles(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();

    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_MI * a.sqrt().min(1.0).asin()
}

/// Point reached by travelling `distance_mi` from (lat, lon) along an
/// initial bearing (radians, clockwise from north). Used by the synthetic
/// survey generator to place homes at controlled distances from a station.
pub fn destination_point(lat: f64, lon: f64, bearing_rad: f64, distance_mi: f64) -> (f64, f64) {
    let delta = distance_mi / EARTH_RADIUS_MI;
    let phi1 = lat.to_radians();
    let lambda1 = lon.to_radians();

    let phi2 = (phi1.sin() * delta.cos() + phi1.cos() * delta.sin() * bearing_rad.cos()).asin();
    let lambda2 = lambda1
        + (bearing_rad.sin() * delta.sin() * phi1.cos())
            .atan2(delta.cos() - phi1.sin() * phi2.sin());

    (phi2.to_degrees(), lambda2.to_degrees())
}
