use serde::{Deserialize, Serialize};

use super::model::{Asset, Casualty, Facility, Location};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance on a spherical Earth.
pub fn haversine_km(a: Location, b: Location) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Flight legs of a single mission, in hours.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TripLegs {
    pub pickup_hours: f64,
    pub delivery_hours: f64,
    pub total_hours: f64,
    /// Distance flown including the return to the asset's base, km.
    pub round_trip_km: f64,
}

impl TripLegs {
    pub fn compute(p: &Casualty, a: &Asset, f: &Facility) -> Self {
        let to_casualty = haversine_km(a.location, p.location);
        let to_facility = haversine_km(p.location, f.location);
        let home = haversine_km(f.location, a.location);
        let pickup_hours = to_casualty / a.speed;
        let delivery_hours = to_facility / a.speed;
        TripLegs {
            pickup_hours,
            delivery_hours,
            total_hours: pickup_hours + delivery_hours,
            round_trip_km: to_casualty + to_facility + home,
        }
    }

    /// Total time as a fraction of `t_max`; zero when `t_max` is zero.
    pub fn normalized(&self, t_max: f64) -> f64 {
        if t_max > 0.0 {
            self.total_hours / t_max
        } else {
            0.0
        }
    }
}
