use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::point::{Chart, SpherePoint};
use crate::error::{Error, Result};
use crate::num::smooth_step;

/// Smooth global perturbation `Phi` of the Fubini-Study weight. Every metric is
/// stored as h = h_FS e^{-Phi}, so the chart-0 potential is
/// phi_0(z) = log(1 + |z|^2) + Phi(z), which extends smoothly across infinity.
#[derive(Clone, Debug)]
pub enum Perturbation {
    /// Phi = 0: the Fubini-Study metric.
    Zero,
    /// Flat weight (phi = 0) on an annulus around the unit circle, Fubini-Study
    /// away from it: Phi = -m(|z|) log(1+|z|^2) with m a C^6 radial bump that is
    /// 1 for |log r| <= a1 and 0 for |log r| >= a2.
    KhFlat { a1: f64, a2: f64 },
    /// First spherical harmonic bump: Phi = amp * Re(z)/(1+|z|^2).
    Bump { amp: f64 },
    /// Phi sampled on a two-chart polar grid, bilinear in (r, theta) per chart.
    Grid(GridSamples),
}

/// Samples of Phi on a two-chart polar grid: value[chart][i * n_theta + j] at
/// radius (i+1/2)/n_r * (1+pad) and angle 2 pi j / n_theta.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSamples {
    pub n_r: usize,
    pub n_theta: usize,
    pub values: [Vec<f64>; 2],
}

/// JSON descriptor for metric profiles.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricDescriptor {
    Fs,
    KhFlat {
        #[serde(default = "default_smoothing")]
        smoothing_radius: f64,
    },
    Bump {
        #[serde(default = "default_amp")]
        amp: f64,
    },
    Grid(GridSamples),
}

fn default_smoothing() -> f64 {
    0.30
}

fn default_amp() -> f64 {
    0.1
}

/// A smooth Hermitian metric on O(1), stored relative to Fubini-Study.
#[derive(Clone, Debug)]
pub struct Metric {
    perturbation: Perturbation,
}

impl Metric {
    pub fn fubini_study() -> Metric {
        Metric {
            perturbation: Perturbation::Zero,
        }
    }

    /// Kac-Hammersley extension: flat on the annulus |log r| <= smoothing_radius,
    /// Fubini-Study for |log r| >= smoothing_radius + 1.2.
    pub fn kh_flat(smoothing_radius: f64) -> Metric {
        Metric {
            perturbation: Perturbation::KhFlat {
                a1: smoothing_radius,
                a2: smoothing_radius + 1.2,
            },
        }
    }

    pub fn bump(amp: f64) -> Metric {
        Metric {
            perturbation: Perturbation::Bump { amp },
        }
    }

    pub fn from_descriptor(d: &MetricDescriptor) -> Result<Metric> {
        match d {
            MetricDescriptor::Fs => Ok(Metric::fubini_study()),
            MetricDescriptor::KhFlat { smoothing_radius } => {
                if *smoothing_radius <= 0.0 || *smoothing_radius > 2.0 {
                    return Err(Error::Descriptor(format!(
                        "smoothing_radius {smoothing_radius} outside (0, 2]"
                    )));
                }
                Ok(Metric::kh_flat(*smoothing_radius))
            }
            MetricDescriptor::Bump { amp } => Ok(Metric::bump(*amp)),
            MetricDescriptor::Grid(g) => {
                if g.n_r < 2 || g.n_theta < 4 {
                    return Err(Error::Descriptor("grid too small".into()));
                }
                if g.values[0].len() != g.n_r * g.n_theta || g.values[1].len() != g.n_r * g.n_theta {
                    return Err(Error::Descriptor("grid sample count mismatch".into()));
                }
                Ok(Metric {
                    perturbation: Perturbation::Grid(g.clone()),
                })
            }
        }
    }

    pub fn is_fubini_study(&self) -> bool {
        matches!(self.perturbation, Perturbation::Zero)
    }

    /// The global perturbation Phi at a point.
    pub fn perturbation_at(&self, p: SpherePoint) -> f64 {
        let p = p.canonical();
        match &self.perturbation {
            Perturbation::Zero => 0.0,
            Perturbation::KhFlat { a1, a2 } => {
                // radius in chart-0 terms
                let r0 = p.coord.norm();
                let logr = match p.chart {
                    Chart::Zero => {
                        if r0 < 1e-300 {
                            return 0.0;
                        }
                        r0.ln()
                    }
                    Chart::Inf => {
                        if r0 < 1e-300 {
                            return 0.0;
                        }
                        -r0.ln()
                    }
                };
                let u = logr.abs();
                if u >= *a2 {
                    return 0.0;
                }
                let m = smooth_step((a2 - u) / (a2 - a1));
                // -m * log(1+|z|^2) where z is the chart-0 coordinate; for a chart-1
                // point w: log(1+1/|w|^2) = log(1+|w|^2) - 2 log|w|
                let log1pz2 = match p.chart {
                    Chart::Zero => r0.norm_sqr_log1p(),
                    Chart::Inf => r0.norm_sqr_log1p() - 2.0 * r0.ln(),
                };
                -m * log1pz2
            }
            Perturbation::Bump { amp } => {
                // Re(z)/(1+|z|^2) is chart-symmetric: same formula in either chart.
                amp * p.coord.re / (1.0 + p.coord.norm_sqr())
            }
            Perturbation::Grid(g) => grid_eval(g, p),
        }
    }

    /// Chart potential phi_chart: log(1 + |coord|^2) + Phi in either chart
    /// (the transition rule phi_1(w) = phi_0(1/w) + log|w|^2 is built in).
    pub fn phi(&self, p: SpherePoint, chart: Chart) -> Result<f64> {
        let c = p
            .coord_in(chart)
            .ok_or(Error::PointAtInfinity)?;
        Ok(c.norm().norm_sqr_log1p() + self.perturbation_at(p))
    }

    /// Potential in the point's canonical chart.
    pub fn phi_canonical(&self, p: SpherePoint) -> f64 {
        let p = p.canonical();
        p.coord.norm().norm_sqr_log1p() + self.perturbation_at(p)
    }

    /// Density of omega_h relative to Lebesgue area in the point's canonical chart:
    /// (1/4 pi) Laplacian of phi. The FS part is analytic; Phi is differenced.
    pub fn curvature_density(&self, p: SpherePoint) -> f64 {
        let p = p.canonical();
        let fs = (1.0 / std::f64::consts::PI) / (1.0 + p.coord.norm_sqr()).powi(2);
        match self.perturbation {
            Perturbation::Zero => fs,
            _ => {
                let h = 1e-4;
                let c = p.chart;
                let z = p.coord;
                let at = |dz: Complex64| {
                    self.perturbation_at(SpherePoint { chart: c, coord: z + dz }.canonical())
                };
                let lap = (at(Complex64::new(h, 0.0))
                    + at(Complex64::new(-h, 0.0))
                    + at(Complex64::new(0.0, h))
                    + at(Complex64::new(0.0, -h))
                    - 4.0 * self.perturbation_at(p))
                    / (h * h);
                fs + lap / (4.0 * std::f64::consts::PI)
            }
        }
    }
}

trait NormLog1p {
    fn norm_sqr_log1p(self) -> f64;
}

impl NormLog1p for f64 {
    /// log(1 + r^2) for a radius r.
    fn norm_sqr_log1p(self) -> f64 {
        (self * self).ln_1p()
    }
}

fn grid_eval(g: &GridSamples, p: SpherePoint) -> f64 {
    let p = p.canonical();
    let pad = 1.0 + 2e-9;
    let r = (p.coord.norm() / pad).min(1.0 - 1e-12);
    let th = p.coord.arg().rem_euclid(std::f64::consts::TAU);
    let nr = g.n_r as f64;
    let nt = g.n_theta as f64;
    // sample locations at radius (i+1/2)/n_r, angle 2 pi j / n_theta
    let x = (r * nr - 0.5).clamp(0.0, nr - 1.0);
    let i0 = (x.floor() as usize).min(g.n_r - 1);
    let i1 = (i0 + 1).min(g.n_r - 1);
    let fx = x - i0 as f64;
    let y = th / std::f64::consts::TAU * nt;
    let j0 = (y.floor() as usize) % g.n_theta;
    let j1 = (j0 + 1) % g.n_theta;
    let fy = y - y.floor();
    let v = &g.values[p.chart.index()];
    let v00 = v[i0 * g.n_theta + j0];
    let v01 = v[i0 * g.n_theta + j1];
    let v10 = v[i1 * g.n_theta + j0];
    let v11 = v[i1 * g.n_theta + j1];
    (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) + fx * ((1.0 - fy) * v10 + fy * v11)
}
