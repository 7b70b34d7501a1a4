use num_complex::Complex64;
use rayon::prelude::*;

use super::green::{green, GreenConstant};
use super::metric::Metric;
use super::point::{Chart, SpherePoint};
use crate::error::{Error, Result};
use crate::num::{gauss_legendre_ab, pairwise_sum, smooth_step};

/// Log-radius half-width of the partition-of-unity band across the equator.
const PARTITION_TAU: f64 = 0.4;

/// Quadrature for integrals over the sphere: two polar tensor grids (radial
/// Gauss-Legendre x uniform angular), one per chart, blended by a smooth
/// partition of unity across the equator.
///
/// `base` holds positive chart-area weights (partition included); `density`
/// holds the omega_h density relative to chart area at each node, so
/// `int f d(omega_h) = sum base * density * f`. For a Kaehler metric the
/// products are positive probability weights.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    pub nodes: Vec<SpherePoint>,
    pub base: Vec<f64>,
    pub density: Vec<f64>,
}

impl SphereQuadrature {
    /// Probability weights for omega_h (base x density).
    pub fn weights(&self) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.density)
            .map(|(b, d)| b * d)
            .collect()
    }

    /// Integral of `f` against omega_h.
    pub fn integrate(&self, f: impl Fn(SpherePoint) -> f64 + Sync) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(&self.base)
            .zip(&self.density)
            .map(|((&p, &b), &d)| b * d * f(p))
            .collect();
        pairwise_sum(&terms)
    }

    /// Integral of `f` against the Fubini-Study form.
    pub fn integrate_fs(&self, f: impl Fn(SpherePoint) -> f64 + Sync) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(&self.base)
            .map(|(&p, &b)| {
                // FS density in the node's own chart equals (1/pi)(1+|coord|^2)^{-2}
                let fs = (1.0 / std::f64::consts::PI) / (1.0 + p.coord.norm_sqr()).powi(2);
                b * fs * f(p)
            })
            .collect();
        pairwise_sum(&terms)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Partition weight of the chart that owns a node at chart radius r: 1 well
/// inside the chart disk, 0 past the equator band, chi_0 + chi_1 = 1.
fn partition(r: f64) -> f64 {
    if r < 1e-300 {
        return 1.0;
    }
    smooth_step(0.5 - r.ln() / (2.0 * PARTITION_TAU))
}

/// Two-chart tensor quadrature for omega_h at the given resolution
/// (radial and angular node counts per chart). Minimum resolution 8.
pub fn sphere_quadrature(metric: &Metric, resolution: usize) -> Result<SphereQuadrature> {
    if resolution < 8 {
        return Err(Error::Resolution(format!(
            "resolution {resolution} < 8"
        )));
    }
    let r_max = PARTITION_TAU.exp();
    let (xr, wr) = gauss_legendre_ab(resolution, 0.0, r_max);
    let n_t = resolution;
    let dth = std::f64::consts::TAU / n_t as f64;

    let mut nodes = Vec::with_capacity(2 * resolution * n_t);
    let mut base = Vec::with_capacity(nodes.capacity());
    for chart in [Chart::Zero, Chart::Inf] {
        for (i, &r) in xr.iter().enumerate() {
            let chi = partition(r);
            if chi == 0.0 {
                continue;
            }
            for j in 0..n_t {
                let th = dth * (j as f64 + 0.5);
                nodes.push(SpherePoint {
                    chart,
                    coord: Complex64::from_polar(r, th),
                });
                base.push(r * wr[i] * dth * chi);
            }
        }
    }
    let density: Vec<f64> = nodes
        .par_iter()
        .map(|&p| {
            // density is defined in the canonical chart; convert to the node's own
            // chart area: for |coord| > 1 the canonical chart is the other one and
            // areas differ by |coord|^(-4)... nodes here satisfy |coord| <= e^tau,
            // so only a thin band converts.
            density_in_own_chart(metric, p)
        })
        .collect();
    Ok(SphereQuadrature {
        nodes,
        base,
        density,
    })
}

/// omega_h density relative to Lebesgue area of the chart the point is STORED in.
fn density_in_own_chart(metric: &Metric, p: SpherePoint) -> f64 {
    let canon = p.canonical();
    let d = metric.curvature_density(canon);
    if canon.chart == p.chart {
        d
    } else {
        // area transforms by |dz_canon/dz_own|^2 = |coord_own|^{-4}
        d / p.coord.norm().powi(4)
    }
}

/// Quadrature whose node pattern is centered at `center` via the Fubini-Study
/// isometry t -> (t + c)/(1 - conj(c) t) in the center's canonical chart;
/// radial clustering at the probe makes integrands with a log singularity at
/// `center` integrable to high accuracy.
pub fn sphere_quadrature_centered(
    metric: &Metric,
    resolution: usize,
    center: SpherePoint,
) -> Result<SphereQuadrature> {
    let plain = sphere_quadrature(metric, resolution)?;
    let c = center.canonical();
    let cc = c.coord;
    let scale = 1.0 + cc.norm_sqr();

    let mut nodes = Vec::with_capacity(plain.len());
    let mut base = Vec::with_capacity(plain.len());
    for (i, &v) in plain.nodes.iter().enumerate() {
        // value of v in the center's chart, with the area factor of that change
        let (t, f1) = if v.chart == c.chart {
            (v.coord, 1.0)
        } else {
            // dA(1/u) = |u|^{-4} dA(u)
            (v.coord.inv(), v.coord.norm().powi(-4))
        };
        let num = t + cc;
        let den = 1.0 - cc.conj() * t;
        // pick the representation that avoids dividing by the smaller magnitude
        let (p, f2) = if num.norm() <= den.norm() {
            (
                SpherePoint {
                    chart: c.chart,
                    coord: num / den,
                },
                (scale / den.norm_sqr()).powi(2),
            )
        } else {
            (
                SpherePoint {
                    chart: c.chart.other(),
                    coord: den / num,
                },
                (scale / num.norm_sqr()).powi(2),
            )
        };
        nodes.push(p);
        base.push(plain.base[i] * f1 * f2);
    }
    let density: Vec<f64> = nodes
        .par_iter()
        .map(|&p| density_in_own_chart(metric, p))
        .collect();
    Ok(SphereQuadrature {
        nodes,
        base,
        density,
    })
}

/// Compute the Green normalization constant E(h) and global bound C_G.
///
/// E(h) = 1 + int Phi omega_FS + int Phi omega_h (both integrands smooth).
/// The normalization residual int G(z, .) omega_h at each probe is evaluated
/// with a probe-centered quadrature; the largest residual is reported.
pub fn compute_green_constant(metric: &Metric, quad: &SphereQuadrature) -> Result<GreenConstant> {
    let i_fs = quad.integrate_fs(|p| metric.perturbation_at(p));
    let i_h = quad.integrate(|p| metric.perturbation_at(p));
    let e = 1.0 + i_fs + i_h;

    // global upper bound: G <= E + 2 max(-Phi); small margin covers off-node maxima
    let max_neg_phi = quad
        .nodes
        .iter()
        .map(|&p| -metric.perturbation_at(p))
        .fold(0.0f64, f64::max);
    let c_g = e + 2.0 * max_neg_phi + 1e-3;

    let gc = GreenConstant {
        e,
        c_g,
        residual: 0.0,
    };

    // residual check at fixed probes
    let probes = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.31, 0.17),
        Complex64::new(-0.62, 0.40),
        Complex64::new(1.10, 0.05),
        Complex64::new(0.97, -0.83),
    ];
    let res_quad = quad.len().clamp(4096, 40_000);
    let n_side = ((res_quad / 2) as f64).sqrt() as usize;
    let residuals: Vec<f64> = probes
        .par_iter()
        .map(|&z| {
            let p = SpherePoint::from_z(z);
            let q = sphere_quadrature_centered(metric, n_side.max(96), p)?;
            let terms: Vec<f64> = q
                .nodes
                .iter()
                .zip(&q.base)
                .zip(&q.density)
                .map(|((&w, &b), &d)| b * d * green(metric, &gc, p, w))
                .collect();
            Ok(pairwise_sum(&terms).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let residual = residuals.iter().cloned().fold(0.0f64, f64::max);
    if residual > 1e-3 {
        return Err(Error::Resolution(format!(
            "green normalization residual {residual:.3e} exceeds 1e-3; raise resolution"
        )));
    }
    Ok(GreenConstant { e, c_g, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mass_is_one_for_all_builtin_metrics() {
        for (metric, tol) in [
            (Metric::fubini_study(), 1e-10),
            (Metric::bump(0.1), 1e-9),
            (Metric::kh_flat(0.30), 3e-6),
        ] {
            let q = sphere_quadrature(&metric, 128).unwrap();
            assert_abs_diff_eq!(q.integrate(|_| 1.0), 1.0, epsilon = tol);
        }
    }

    #[test]
    fn base_weights_positive_and_fs_weights_probability() {
        let q = sphere_quadrature(&Metric::fubini_study(), 64).unwrap();
        assert!(q.base.iter().all(|&b| b > 0.0));
        let w = q.weights();
        assert!(w.iter().all(|&x| x > 0.0));
        assert_abs_diff_eq!(pairwise_sum(&w), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn fs_moment_beta_integral() {
        // int |z|^2/(1+|z|^2) d omega_FS = 1/2 (Beta integral)
        let q = sphere_quadrature(&Metric::fubini_study(), 128).unwrap();
        let v = q.integrate(|p| {
            let z = p.coord_in(Chart::Zero);
            match z {
                Some(z) => z.norm_sqr() / (1.0 + z.norm_sqr()),
                None => 1.0, // limit at infinity
            }
        });
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn doubling_resolution_shrinks_error() {
        // self-convergence on a fixed smooth integrand for the bump metric
        let metric = Metric::bump(0.1);
        let f = |p: SpherePoint| {
            let c = p.canonical().coord;
            (c.re * 1.3 + 0.2 * c.im).sin() / p.sqn()
        };
        let v64 = sphere_quadrature(&metric, 64).unwrap().integrate(f);
        let v128 = sphere_quadrature(&metric, 128).unwrap().integrate(f);
        let v256 = sphere_quadrature(&metric, 256).unwrap().integrate(f);
        let e1 = (v64 - v256).abs();
        let e2 = (v128 - v256).abs();
        assert!(e2 * 4.0 <= e1 + 1e-14, "e1={e1:.3e} e2={e2:.3e}");
    }

    #[test]
    fn resolution_floor_enforced() {
        assert!(sphere_quadrature(&Metric::fubini_study(), 4).is_err());
    }
}
