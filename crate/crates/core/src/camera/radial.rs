//! One-parameter division model for radial distortion.
//!
//! Forward: `m_d = 2m / (1 + sqrt(1 - 4 xi |m|^2))`.
//! Inverse: `m = m_d / (1 + xi |m_d|^2)`.
//! All points are in dimensionless sensor coordinates.

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub fn distort_radial(m: Vector2<f64>, xi: f64) -> Result<Vector2<f64>> {
    let radicand = 1.0 - 4.0 * xi * m.norm_squared();
    if radicand < 0.0 || !radicand.is_finite() {
        return Err(Error::ModelDomain(format!(
            "radial distortion undefined at ({}, {}) for xi = {xi}",
            m.x, m.y
        )));
    }
    Ok(m * (2.0 / (1.0 + radicand.sqrt())))
}

pub fn undistort_radial(m_d: Vector2<f64>, xi: f64) -> Result<Vector2<f64>> {
    let denom = 1.0 + xi * m_d.norm_squared();
    if denom.abs() < 1e-12 || !denom.is_finite() {
        return Err(Error::ModelDomain(format!(
            "radial undistortion singular at ({}, {}) for xi = {xi}",
            m_d.x, m_d.y
        )));
    }
    Ok(m_d / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const XI_SIM: f64 = -1.0 / 64.0;

    #[test]
    fn origin_is_fixed() {
        for xi in [0.0, XI_SIM, 0.1, -3.0] {
            assert_eq!(
                distort_radial(Vector2::zeros(), xi).unwrap(),
                Vector2::zeros()
            );
            assert_eq!(
                undistort_radial(Vector2::zeros(), xi).unwrap(),
                Vector2::zeros()
            );
        }
    }

    #[test]
    fn zero_xi_is_identity() {
        let m = Vector2::new(0.5, 0.5);
        assert_eq!(distort_radial(m, 0.0).unwrap(), m);
        assert_eq!(undistort_radial(m, 0.0).unwrap(), m);
    }

    #[test]
    fn unit_radius_with_simulation_xi() {
        let md = distort_radial(Vector2::new(1.0, 0.0), XI_SIM).unwrap();
        // closed-form inverse must map back to |m| = 1
        let r = md.x / (1.0 + XI_SIM * md.x * md.x);
        assert!((r - 1.0).abs() < 1e-9);
        assert!((md.x - 0.984_845_004_941_284_2).abs() < 1e-12);
        assert_eq!(md.y, 0.0);
    }

    #[test]
    fn negative_radicand_rejected() {
        assert!(distort_radial(Vector2::new(2.0, 0.0), 0.1).is_err());
        assert!(undistort_radial(Vector2::new(2.0, 0.0), -0.25).is_err());
    }

    #[test]
    fn random_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for xi in [0.0, XI_SIM, -0.05] {
            for _ in 0..1000 {
                let p = Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let back = distort_radial(undistort_radial(p, xi).unwrap(), xi).unwrap();
                assert!((back - p).norm() < 1e-9);
            }
        }
    }
}
