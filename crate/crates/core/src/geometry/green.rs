use serde::{Deserialize, Serialize};

use super::metric::Metric;
use super::point::{chordal, SpherePoint, COLLISION_TOL};

/// Normalization data of the Green's function: the constant E(h) fixing
/// zero omega_h-average, a global upper bound C_G, and the largest observed
/// normalization residual from the probe check.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GreenConstant {
    pub e: f64,
    pub c_g: f64,
    pub residual: f64,
}

/// Green's function G_h(z, w) = 2 log[z, w] - Phi(z) - Phi(w) + E(h), where
/// [z, w] is the chordal distance. Chart-free and equal to the local formula
/// 2 log|z - w| - phi(z) - phi(w) + E(h) in any common chart.
///
/// Returns NEG_INFINITY on collision (chordal distance below tolerance);
/// callers choose exclusion or truncation.
pub fn green(metric: &Metric, gc: &GreenConstant, z: SpherePoint, w: SpherePoint) -> f64 {
    let d = chordal(z, w);
    if d <= COLLISION_TOL {
        return f64::NEG_INFINITY;
    }
    2.0 * d.ln() - metric.perturbation_at(z) - metric.perturbation_at(w) + gc.e
}

/// Truncated kernel G_h ∨ (-M); continuous across the diagonal.
pub fn green_truncated(
    metric: &Metric,
    gc: &GreenConstant,
    z: SpherePoint,
    w: SpherePoint,
    m: f64,
) -> f64 {
    green(metric, gc, z, w).max(-m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compute_green_constant, sphere_quadrature};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    fn fs_setup() -> (Metric, GreenConstant) {
        let metric = Metric::fubini_study();
        let quad = sphere_quadrature(&metric, 128).unwrap();
        let gc = compute_green_constant(&metric, &quad).unwrap();
        (metric, gc)
    }

    #[test]
    fn fs_normalization_constant_is_one() {
        let (_, gc) = fs_setup();
        assert_abs_diff_eq!(gc.e, 1.0, epsilon = 1e-6);
        assert!(gc.residual < 1e-6, "residual {}", gc.residual);
    }

    #[test]
    fn fs_antipodal_value() {
        let (metric, gc) = fs_setup();
        let zero = SpherePoint::from_z(Complex64::new(0.0, 0.0));
        let inf = SpherePoint::infinity();
        assert_abs_diff_eq!(green(&metric, &gc, zero, inf), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn symmetry_on_random_pairs() {
        let (metric, gc) = fs_setup();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let z = SpherePoint::from_z(Complex64::new(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0));
            let w = SpherePoint::from_z(Complex64::new(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0));
            let a = green(&metric, &gc, z, w);
            let b = green(&metric, &gc, w, z);
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn diagonal_expansion_has_finite_limit() {
        // G(z, z + delta) - 2 log|delta| -> -2 phi_0(z) + E as delta -> 0
        let metric = Metric::bump(0.1);
        let quad = sphere_quadrature(&metric, 128).unwrap();
        let gc = compute_green_constant(&metric, &quad).unwrap();
        let z0 = Complex64::new(0.4, -0.3);
        let z = SpherePoint::from_z(z0);
        let expected = -2.0 * metric.phi_canonical(z) + gc.e;
        let mut prev = f64::NAN;
        for k in 3..7 {
            let delta = 10f64.powi(-k);
            let w = SpherePoint::from_z(z0 + Complex64::new(delta, 0.0));
            let v = green(&metric, &gc, z, w) - 2.0 * delta.ln();
            if k > 3 {
                assert!((v - expected).abs() < (prev - expected).abs() + 1e-12);
            }
            prev = v;
        }
        assert_abs_diff_eq!(prev, expected, epsilon = 1e-5);
    }

    #[test]
    fn truncation_behaviour() {
        let (metric, gc) = fs_setup();
        let z = SpherePoint::from_z(Complex64::new(0.3, 0.3));
        assert_eq!(green_truncated(&metric, &gc, z, z, 7.5), -7.5);
        let zero = SpherePoint::from_z(Complex64::new(0.0, 0.0));
        let inf = SpherePoint::infinity();
        assert_abs_diff_eq!(green_truncated(&metric, &gc, zero, inf, 5.0), 1.0, epsilon = 1e-6);
        // non-increasing... value of G^M is non-decreasing in M toward G? G^M = max(G, -M):
        // as M grows the truncated value can only move down toward G.
        let w = SpherePoint::from_z(Complex64::new(0.3, 0.300001));
        let g1 = green_truncated(&metric, &gc, z, w, 5.0);
        let g2 = green_truncated(&metric, &gc, z, w, 15.0);
        let g3 = green_truncated(&metric, &gc, z, w, 50.0);
        assert!(g1 >= g2 && g2 >= g3);
        assert!(g3 >= green(&metric, &gc, z, w));
    }

    #[test]
    fn green_bounded_by_c_g() {
        let metric = Metric::kh_flat(0.30);
        let quad = sphere_quadrature(&metric, 128).unwrap();
        let gc = compute_green_constant(&metric, &quad).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..500 {
            let z = SpherePoint::from_z(Complex64::new(rng.gen::<f64>() * 6.0 - 3.0, rng.gen::<f64>() * 6.0 - 3.0));
            let w = SpherePoint::from_z(Complex64::new(rng.gen::<f64>() * 6.0 - 3.0, rng.gen::<f64>() * 6.0 - 3.0));
            assert!(green(&metric, &gc, z, w) <= gc.c_g);
        }
    }
}
