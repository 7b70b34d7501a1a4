//! Bernstein-Markov diagnostic: how fast sup-norms on K can beat L^2(nu) norms.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use super::{horner, Ensemble};
use crate::error::Result;
use crate::geometry::{Chart, SpherePoint};

/// Weighted sup of |s| over K samples: max |p(z)| e^{-N phi(z)/2}, evaluated
/// through the reversed polynomial outside the unit disk to avoid overflow.
pub fn weighted_sup(ens: &Ensemble, mono: &[Complex64], k_samples: &[SpherePoint]) -> f64 {
    let n = ens.n as f64;
    k_samples
        .par_iter()
        .map(|&p| {
            let z = match p.coord_in(Chart::Zero) {
                Some(z) => z,
                None => {
                    // at infinity: |s|_{h^N} limit is |lead| e^{-N phi_1(inf)/2}
                    let phi1 = ens.metric.phi(p, Chart::Inf).unwrap_or(f64::INFINITY);
                    return mono[ens.n].norm() * (-0.5 * n * phi1).exp();
                }
            };
            let phi = ens.metric.phi(p, Chart::Zero).unwrap();
            if z.norm() <= 1.0 {
                horner(mono, z).norm() * (-0.5 * n * phi).exp()
            } else {
                let rev: Vec<Complex64> = mono.iter().rev().cloned().collect();
                let q = horner(&rev, z.inv()).norm();
                // |p(z)| = |q(1/z)| |z|^N
                q * (n * z.norm().ln() - 0.5 * n * phi).exp()
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// Max over random sections of sup_K ||s||_{h^N} / ||s||_{G_N}, with the L^2
/// norm read off the orthonormal coordinates. Returns (max ratio, (1/N) log max ratio).
pub fn bernstein_markov_ratio(
    ens: &Ensemble,
    k_samples: &[SpherePoint],
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut max_ratio = 0.0f64;
    for trial in 0..trials {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let c = ens.sample_coefficients(&mut rng);
        let mono = ens.monomial_coefficients(&c);
        let l2 = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let sup = weighted_sup(ens, &mono, k_samples);
        max_ratio = max_ratio.max(sup / l2);
    }
    Ok((max_ratio, max_ratio.ln() / ens.n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::ReferenceMeasure;
    use crate::geometry::{sphere_quadrature, Metric};

    #[test]
    fn kh_ratio_bounded_by_szego_kernel() {
        let metric = Metric::kh_flat(0.30);
        let nu = ReferenceMeasure::uniform_circle(512);
        for n in [10usize, 20, 40] {
            let ens = Ensemble::build(metric.clone(), nu.clone(), n).unwrap();
            let k: Vec<_> = nu.nodes.clone();
            let (ratio, _) = bernstein_markov_ratio(&ens, &k, 40, 7).unwrap();
            assert!(
                ratio <= ((n + 1) as f64).sqrt() + 1e-9,
                "N={n}: ratio {ratio} exceeds sqrt(N+1)"
            );
        }
    }

    #[test]
    fn log_ratio_rate_decreases_for_both_presets() {
        let cases: Vec<(Metric, ReferenceMeasure, Vec<SpherePoint>)> = {
            let kh = Metric::kh_flat(0.30);
            let nu_kh = ReferenceMeasure::uniform_circle(512);
            let k_kh = nu_kh.nodes.clone();
            let fs = Metric::fubini_study();
            let q = sphere_quadrature(&fs, 64).unwrap();
            let nu_fs = ReferenceMeasure::from_quadrature(&q).unwrap();
            let k_fs = q.nodes.clone();
            vec![(kh, nu_kh, k_kh), (fs, nu_fs, k_fs)]
        };
        for (metric, nu, k) in cases {
            let mut prev = f64::INFINITY;
            for n in [10usize, 20, 40, 80] {
                let ens = Ensemble::build(metric.clone(), nu.clone(), n).unwrap();
                let (ratio, rate) = bernstein_markov_ratio(&ens, &k, 20, 19).unwrap();
                // FS kernel diagonal is N+1: (1/N) log ratio <= (1/N) (1/2) log(N+1)
                assert!(
                    rate <= 0.5 * ((n + 1) as f64).ln() / n as f64 + 1e-9,
                    "rate {rate} too large at N={n} (ratio {ratio})"
                );
                assert!(rate <= prev + 1e-12, "rate not decreasing at N={n}");
                prev = rate;
            }
        }
    }
}
