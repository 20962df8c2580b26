//! Geographic helpers for turning bus coordinates into per-direction line
//! lengths.

/// Mean earth radius in km, used by the equirectangular projection.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Signed east/north lengths (km) of the displacement from `(lat_i, lon_i)`
/// to `(lat_j, lon_j)`, both in degrees.
///
/// Uses an equirectangular projection around the mean latitude: east is the
/// `+xi_E` direction, north is `+xi_N`. A westward displacement therefore
/// yields a negative east length.
pub fn east_north_lengths(lat_i: f64, lon_i: f64, lat_j: f64, lon_j: f64) -> (f64, f64) {
    let mean_lat = 0.5 * (lat_i + lat_j);
    let east = EARTH_RADIUS_KM * (lon_j - lon_i).to_radians() * mean_lat.to_radians().cos();
    let north = EARTH_RADIUS_KM * (lat_j - lat_i).to_radians();
    (east, north)
}
