//! The Gaussian ensemble for a weight/measure pair (h, nu) at degree N:
//! monomial Gram matrix under the weighted inner product, its Cholesky
//! orthonormalization, coefficient sampling and zero extraction, and the
//! Bernstein-Markov diagnostic.

mod bm;
mod roots;

pub use bm::bernstein_markov_ratio;
pub use roots::{
    coefficients_from_roots, companion_roots, horner, roots, vieta_roundtrip_residual, ZeroConfig,
    DEGREE_DROP_TOL,
};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Chart, Metric, SpherePoint, SphereQuadrature};
use crate::linalg::{cholesky_upper, cholesky_upper_dd, invert_upper, CMat};
use crate::num::{CDd, Dd};

/// The reference measure nu: probability weights on nodes of its support K.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceMeasure {
    pub nodes: Vec<SpherePoint>,
    pub weights: Vec<f64>,
}

impl ReferenceMeasure {
    /// Uniform probability measure on the unit circle (Kac-Hammersley nu).
    pub fn uniform_circle(n: usize) -> ReferenceMeasure {
        let nodes = (0..n)
            .map(|k| {
                SpherePoint::from_z(Complex64::from_polar(
                    1.0,
                    std::f64::consts::TAU * k as f64 / n as f64,
                ))
            })
            .collect();
        ReferenceMeasure {
            nodes,
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// nu = omega_h from a sphere quadrature (positive weights required).
    pub fn from_quadrature(q: &SphereQuadrature) -> Result<ReferenceMeasure> {
        let weights = q.weights();
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::Descriptor(
                "curvature quadrature has non-positive weights; not a probability measure".into(),
            ));
        }
        Ok(ReferenceMeasure {
            nodes: q.nodes.clone(),
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Per-node scaled monomial rows B[i][j] = z_i^j e^{-N phi(z_i)/2} sqrt(w_i),
/// evaluated in log space so nodes far in chart 1 never overflow.
struct ScaledMonomials {
    rows: Vec<Complex64>,
    n_nodes: usize,
    dim: usize,
}

fn scaled_monomials(metric: &Metric, nu: &ReferenceMeasure, n: usize) -> Result<ScaledMonomials> {
    let dim = n + 1;
    let n_nodes = nu.len();
    let mut rows = vec![Complex64::new(0.0, 0.0); n_nodes * dim];
    let chunks: Vec<(usize, Vec<Complex64>)> = (0..n_nodes)
        .into_par_iter()
        .map(|i| {
            let p = nu.nodes[i];
            let z = p.coord_in(Chart::Zero).ok_or(Error::SupportAtInfinity)?;
            let phi = metric.phi(p, Chart::Zero).map_err(|_| Error::SupportAtInfinity)?;
            let logr = if z.norm() > 0.0 { z.norm().ln() } else { f64::NEG_INFINITY };
            let arg = z.arg();
            let sw = nu.weights[i].sqrt();
            let mut row = Vec::with_capacity(dim);
            for j in 0..dim {
                let mag = if logr.is_finite() {
                    (j as f64 * logr - 0.5 * n as f64 * phi).exp()
                } else if j == 0 {
                    (-0.5 * n as f64 * phi).exp()
                } else {
                    0.0
                };
                row.push(Complex64::from_polar(mag * sw, j as f64 * arg));
            }
            Ok((i, row))
        })
        .collect::<Result<_>>()?;
    for (i, row) in chunks {
        rows[i * dim..(i + 1) * dim].copy_from_slice(&row);
    }
    Ok(ScaledMonomials { rows, n_nodes, dim })
}

/// Monomial Gram matrix <z^j, z^k> = sum_i w_i z_i^j conj(z_i)^k e^{-N phi(z_i)}.
pub fn gram(metric: &Metric, nu: &ReferenceMeasure, n: usize) -> Result<CMat> {
    let b = scaled_monomials(metric, nu, n)?;
    let dim = b.dim;
    let mut g = CMat::zeros(dim);
    let cols: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            // column j of G: sum_i conj(B[i][k]) B[i][j] for k <= j (Hermitian)
            let mut col = vec![Complex64::new(0.0, 0.0); dim];
            for k in 0..=j {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..b.n_nodes {
                    acc += b.rows[i * dim + k].conj() * b.rows[i * dim + j];
                }
                col[k] = acc;
            }
            col
        })
        .collect();
    for j in 0..dim {
        for k in 0..=j {
            let v = cols[j][k];
            g.set(k, j, v);
            g.set(j, k, v.conj());
        }
    }
    Ok(g)
}

/// Result of orthonormalizing the monomial basis.
#[derive(Clone, Debug)]
pub struct Orthonormalization {
    /// Upper-triangular map from monomial to orthonormal coordinates:
    /// psi_k = sum_j transform[j][k] z^j, transform^H gram transform = I.
    pub transform: CMat,
    /// log |det transform| = -1/2 log det(gram).
    pub logdet_transform: f64,
    /// Leading coefficient of psi_N.
    pub k_n: f64,
    /// Crude condition estimate of the scaled gram (ratio of extreme Cholesky pivots squared).
    pub condition: f64,
    /// True when the double-double assembly path was used.
    pub extended_precision: bool,
}

/// Cholesky-based orthonormalization with diagonal scaling; falls back to a
/// double-double assembly of the scaled gram when the f64 pivot fails or the
/// condition estimate exceeds 1e14.
pub fn orthonormalize(
    metric: &Metric,
    nu: &ReferenceMeasure,
    n: usize,
    g: &CMat,
) -> Result<Orthonormalization> {
    let dim = g.n;
    let d: Vec<f64> = (0..dim).map(|j| g.at(j, j).re).collect();
    if d.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NotPositiveDefinite { rank: 0, dim });
    }
    let mut c = CMat::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            c.set(i, j, g.at(i, j) / (d[i].sqrt() * d[j].sqrt()));
        }
    }
    let (uc, extended) = match cholesky_upper(&c) {
        Ok(u) => {
            let cond = pivot_condition(&u);
            if cond > 1e14 {
                (cholesky_scaled_dd(metric, nu, n, &d)?, true)
            } else {
                (u, false)
            }
        }
        Err(_) => (cholesky_scaled_dd(metric, nu, n, &d)?, true),
    };
    let condition = pivot_condition(&uc);

    // full factor U with G = U^H U: U = U_c * diag(sqrt d)
    let mut u = CMat::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            u.set(i, j, uc.at(i, j) * d[j].sqrt());
        }
    }
    let transform = invert_upper(&u);
    // log|det T| = -sum log U_jj = -(sum log Uc_jj + 1/2 sum log d_j)
    let logdet_transform: f64 = -(0..dim)
        .map(|j| uc.at(j, j).re.ln() + 0.5 * d[j].ln())
        .sum::<f64>();
    let k_n = transform.at(dim - 1, dim - 1).re;
    Ok(Orthonormalization {
        transform,
        logdet_transform,
        k_n,
        condition,
        extended_precision: extended,
    })
}

fn pivot_condition(u: &CMat) -> f64 {
    let mut mx = 0.0f64;
    let mut mn = f64::INFINITY;
    for j in 0..u.n {
        let p = u.at(j, j).re;
        mx = mx.max(p);
        mn = mn.min(p);
    }
    (mx / mn).powi(2)
}

/// Double-double assembly of the diagonally scaled gram, then Cholesky in DD.
fn cholesky_scaled_dd(
    metric: &Metric,
    nu: &ReferenceMeasure,
    n: usize,
    d: &[f64],
) -> Result<CMat> {
    let b = scaled_monomials(metric, nu, n)?;
    let dim = b.dim;
    let cols: Vec<Vec<CDd>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![CDd::ZERO; dim];
            for k in 0..=j {
                let mut acc = CDd::ZERO;
                for i in 0..b.n_nodes {
                    let a = b.rows[i * dim + k];
                    let bb = b.rows[i * dim + j];
                    acc = acc.add(CDd::from_f64(a.re, -a.im).mul(CDd::from_f64(bb.re, bb.im)));
                }
                let scale = Dd::from(1.0).div(Dd::from(d[k].sqrt()).mul(Dd::from(d[j].sqrt())));
                col[k] = acc.scale(scale);
            }
            col
        })
        .collect();
    let mut c = vec![CDd::ZERO; dim * dim];
    for j in 0..dim {
        for k in 0..=j {
            c[k * dim + j] = cols[j][k];
            c[j * dim + k] = cols[j][k].conj();
        }
    }
    let u = cholesky_upper_dd(&c, dim)?;
    let mut out = CMat::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            out.set(
                i,
                j,
                Complex64::new(u[i * dim + j].re.to_f64(), u[i * dim + j].im.to_f64()),
            );
        }
    }
    Ok(out)
}

/// A fully constructed ensemble.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub metric: Metric,
    pub nu: ReferenceMeasure,
    pub n: usize,
    pub gram: CMat,
    pub ortho: Orthonormalization,
}

impl Ensemble {
    pub fn build(metric: Metric, nu: ReferenceMeasure, n: usize) -> Result<Ensemble> {
        if n < 1 {
            return Err(Error::Descriptor("degree must be >= 1".into()));
        }
        let g = gram(&metric, &nu, n)?;
        let ortho = orthonormalize(&metric, &nu, n, &g)?;
        Ok(Ensemble {
            metric,
            nu,
            n,
            gram: g,
            ortho,
        })
    }

    /// log det(gram) (real; the gram is Hermitian positive definite).
    pub fn logdet_gram(&self) -> f64 {
        -2.0 * self.ortho.logdet_transform
    }

    /// Draw the orthonormal-basis coefficients of one section:
    /// iid standard circular complex gaussians (E|c_j|^2 = 1).
    pub fn sample_coefficients(&self, rng: &mut ChaCha12Rng) -> Vec<Complex64> {
        let s = 0.5f64.sqrt();
        (0..=self.n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re * s, im * s)
            })
            .collect()
    }

    /// Monomial coefficients of s = sum_k c_k psi_k.
    pub fn monomial_coefficients(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let t = &self.ortho.transform;
        (0..=self.n)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in j..=self.n {
                    acc += t.at(j, k) * coeffs[k];
                }
                acc
            })
            .collect()
    }

    /// Sample one section with the per-trial RNG stream and extract its zeros.
    pub fn sample(&self, seed: u64, trial: u64) -> Result<(Vec<Complex64>, ZeroConfig)> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let c = self.sample_coefficients(&mut rng);
        let mono = self.monomial_coefficients(&c);
        let zeros = roots(&mono)?;
        Ok((mono, zeros))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::geometry::sphere_quadrature;

    fn lgamma(x: f64) -> f64 {
        // Stirling series; exact enough for factorial ratios in tests
        statistical_lgamma(x)
    }

    fn statistical_lgamma(x: f64) -> f64 {
        // Lanczos approximation
        let g = 7.0;
        let c = [
            0.99999999999980993,
            676.5203681218851,
            -1259.1392167224028,
            771.32342877765313,
            -176.61502916214059,
            12.507343278686905,
            -0.13857109526572012,
            9.9843695780195716e-6,
            1.5056327351493116e-7,
        ];
        if x < 0.5 {
            let pi = std::f64::consts::PI;
            return (pi / (pi * x).sin()).ln() - statistical_lgamma(1.0 - x);
        }
        let x = x - 1.0;
        let mut a = c[0];
        let t = x + g + 0.5;
        for (i, &ci) in c.iter().enumerate().skip(1) {
            a += ci / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }

    #[test]
    fn kh_gram_is_identity() {
        let metric = Metric::kh_flat(0.30);
        let nu = ReferenceMeasure::uniform_circle(1024);
        for n in [1usize, 5, 20] {
            let g = gram(&metric, &nu, n).unwrap();
            for i in 0..=n {
                for j in 0..=n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!((g.at(i, j) - expect).norm(), 0.0, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn fs_gram_matches_beta_integrals() {
        let metric = Metric::fubini_study();
        let q = sphere_quadrature(&metric, 96).unwrap();
        let nu = ReferenceMeasure::from_quadrature(&q).unwrap();
        let n = 2;
        let g = gram(&metric, &nu, n).unwrap();
        let expect = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0];
        for j in 0..=n {
            assert_abs_diff_eq!(g.at(j, j).re, expect[j], epsilon = 1e-8);
            for k in 0..=n {
                if k != j {
                    assert_abs_diff_eq!(g.at(j, k).norm(), 0.0, epsilon = 1e-10);
                }
                // Hermitian symmetry is exact by construction
                assert_eq!(g.at(j, k), g.at(k, j).conj());
            }
        }
    }

    #[test]
    fn orthonormalization_identities() {
        let metric = Metric::fubini_study();
        let q = sphere_quadrature(&metric, 96).unwrap();
        let nu = ReferenceMeasure::from_quadrature(&q).unwrap();
        let ens = Ensemble::build(metric, nu, 2).unwrap();
        // k_2 = sqrt(3) for the FS ensemble at N = 2
        assert_abs_diff_eq!(ens.ortho.k_n, 3.0f64.sqrt(), epsilon = 1e-7);
        // T^H G T = I
        let t = &ens.ortho.transform;
        let g = &ens.gram;
        let dim = g.n;
        for i in 0..dim {
            for j in 0..dim {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    for l in 0..dim {
                        s += t.at(k, i).conj() * g.at(k, l) * t.at(l, j);
                    }
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn kh_orthonormalization_is_trivial() {
        let metric = Metric::kh_flat(0.30);
        let nu = ReferenceMeasure::uniform_circle(512);
        let ens = Ensemble::build(metric, nu, 20).unwrap();
        assert_abs_diff_eq!(ens.ortho.logdet_transform, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(ens.ortho.k_n, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn fs_logdet_matches_factorials_at_n_100() {
        let metric = Metric::fubini_study();
        let q = sphere_quadrature(&metric, 128).unwrap();
        let nu = ReferenceMeasure::from_quadrature(&q).unwrap();
        let n = 100;
        let ens = Ensemble::build(metric, nu, n).unwrap();
        let exact: f64 = (0..=n)
            .map(|j| {
                lgamma(j as f64 + 1.0) + lgamma((n - j) as f64 + 1.0) - lgamma(n as f64 + 2.0)
            })
            .sum();
        assert_abs_diff_eq!(ens.logdet_gram(), exact, epsilon = 1e-6 * exact.abs());
        assert!(!ens.ortho.extended_precision, "scaled f64 path should suffice for FS");
    }

    #[test]
    fn gaussian_moments() {
        let metric = Metric::kh_flat(0.30);
        let nu = ReferenceMeasure::uniform_circle(64);
        let ens = Ensemble::build(metric, nu, 3).unwrap();
        let trials = 100_000;
        let mut mean = Complex64::new(0.0, 0.0);
        let mut e_cc = Complex64::new(0.0, 0.0);
        let mut e_cbar = Complex64::new(0.0, 0.0);
        let mut e_norm = 0.0;
        let mut rng = ChaCha12Rng::seed_from_u64(123);
        for _ in 0..trials {
            let c = ens.sample_coefficients(&mut rng);
            mean += c[0];
            e_cc += c[0] * c[1];
            e_cbar += c[0] * c[1].conj();
            e_norm += c[2].norm_sqr();
        }
        let t = trials as f64;
        assert!((mean / t).norm() < 0.02);
        assert!((e_cc / t).norm() < 0.02);
        assert!((e_cbar / t).norm() < 0.02);
        assert!((e_norm / t - 1.0).abs() < 0.02);
    }

    #[test]
    fn kh_roots_concentrate_near_unit_circle() {
        let metric = Metric::kh_flat(0.30);
        let nu = ReferenceMeasure::uniform_circle(512);
        let ens = Ensemble::build(metric, nu, 100).unwrap();
        let mut near = 0usize;
        let mut total = 0usize;
        let mut worst_res = 0.0f64;
        for trial in 0..100 {
            let (_, cfg) = ens.sample(777, trial).unwrap();
            worst_res = worst_res.max(cfg.residual);
            for p in &cfg.roots {
                total += 1;
                let r = match p.chart {
                    Chart::Zero => p.coord.norm(),
                    Chart::Inf => {
                        if p.coord.norm() > 0.0 {
                            1.0 / p.coord.norm()
                        } else {
                            f64::INFINITY
                        }
                    }
                };
                if (r - 1.0).abs() < 0.1 {
                    near += 1;
                }
            }
        }
        assert!(worst_res < 1e-8, "root residual {worst_res}");
        let frac = near as f64 / total as f64;
        assert!(frac >= 0.9, "only {frac} of roots near the circle");
    }
}
