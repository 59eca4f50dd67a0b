//! Decibel and dBm conversions used across the pattern and power code.

#[allow(unused_imports)]
use num_traits::Float;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to dB; zero maps to negative infinity.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    30.0 + 10.0 * watts.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn test_db_roundtrip() {
        for &db in &[-30.0, -3.0, 0.0, 8.0, 52.0] {
            assert_relative_eq!(linear_to_db(db_to_linear(db)), db, epsilon = 1e-12);
        }
    }

    #[test]
    fn test_dbm_reference_points() {
        assert_relative_eq!(dbm_to_watts(30.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watts(52.0), 158.48931924611142, max_relative = 1e-15);
        assert_relative_eq!(watts_to_dbm(200.0), 53.010299956639813, max_relative = 1e-15);
    }

    #[test]
    fn test_zero_power_maps_to_negative_infinity() {
        assert_eq!(linear_to_db(0.0), f64::NEG_INFINITY);
    }
}
