//! Small unit helpers: dB ↔ linear conversions and cyclic angle arithmetic.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Power ratio in dB to a linear power factor.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power factor to dB. Zero maps to `-inf`.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Gain in dB to a linear amplitude factor (20 dB per decade).
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Linear amplitude factor to dB.
pub fn amplitude_to_db(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}

/// Wrap an azimuth into [0°, 360°).
pub fn wrap_az_deg(az_deg: f64) -> f64 {
    let mut a = az_deg % 360.0;
    if a < 0.0 {
        a += 360.0;
    }
    // -1e-18 % 360 rounds to 360.0 after the correction above.
    if a >= 360.0 {
        a -= 360.0;
    }
    a
}

/// Signed cyclic difference `a - b` folded into (-180°, 180°].
pub fn signed_angle_diff_deg(a_deg: f64, b_deg: f64) -> f64 {
    let mut d = (a_deg - b_deg) % 360.0;
    if d <= -180.0 {
        d += 360.0;
    } else if d > 180.0 {
        d -= 360.0;
    }
    d
}

/// Absolute cyclic distance between two azimuths, in [0°, 180°].
pub fn cyclic_distance_deg(a_deg: f64, b_deg: f64) -> f64 {
    signed_angle_diff_deg(a_deg, b_deg).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_linear_roundtrip() {
        for db in [-180.0, -30.0, 0.0, 3.0, 65.0] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
        assert!((db_to_linear(3.0103) - 2.0).abs() < 1e-4);
        assert!((db_to_amplitude(-40.0) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_power_is_minus_inf_db() {
        assert!(linear_to_db(0.0).is_infinite());
        assert!(linear_to_db(0.0) < 0.0);
    }

    #[test]
    fn azimuth_wrapping() {
        assert_eq!(wrap_az_deg(0.0), 0.0);
        assert_eq!(wrap_az_deg(360.0), 0.0);
        assert_eq!(wrap_az_deg(-10.0), 350.0);
        assert_eq!(wrap_az_deg(725.0), 5.0);
    }

    #[test]
    fn cyclic_differences() {
        assert!((signed_angle_diff_deg(10.0, 350.0) - 20.0).abs() < 1e-12);
        assert!((signed_angle_diff_deg(350.0, 10.0) + 20.0).abs() < 1e-12);
        assert!((cyclic_distance_deg(0.0, 180.0) - 180.0).abs() < 1e-12);
        assert!((cyclic_distance_deg(90.0, 90.0)).abs() < 1e-12);
    }
}
