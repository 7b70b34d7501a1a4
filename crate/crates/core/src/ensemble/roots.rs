//! Polynomial root extraction: Aberth-Ehrlich iteration with a balanced
//! companion-matrix fallback, plus the elementary-symmetric (Vieta) round trip.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::linalg::{hessenberg_eigenvalues, CMat};

/// Relative threshold below which a leading coefficient counts as vanished
/// (degree drop; the missing roots sit at infinity).
pub const DEGREE_DROP_TOL: f64 = 1e-13;

/// Zero set of a sampled section: roots as sphere points (roots at infinity
/// allowed) plus the normalized evaluation residual max_j |s(root_j)|.
#[derive(Clone, Debug)]
pub struct ZeroConfig {
    pub roots: Vec<SpherePoint>,
    pub residual: f64,
}

impl ZeroConfig {
    pub fn n(&self) -> usize {
        self.roots.len()
    }

    pub fn finite_roots(&self) -> Option<Vec<Complex64>> {
        self.roots
            .iter()
            .map(|p| p.coord_in(crate::geometry::Chart::Zero))
            .collect()
    }
}

/// Horner evaluation of p(z) = sum coeffs[k] z^k.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn horner_deriv(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of the polynomial with the given monomial coefficients
/// (constant first). Degree drops produce roots at infinity.
pub fn roots(coeffs: &[Complex64]) -> Result<ZeroConfig> {
    let norm = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if norm == 0.0 || coeffs.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let n_nominal = coeffs.len() - 1;
    // effective degree after trimming the vanished leading coefficients
    let mut deg = n_nominal;
    while deg > 0 && coeffs[deg].norm() < DEGREE_DROP_TOL * norm {
        deg -= 1;
    }
    let at_infinity = n_nominal - deg;
    let trimmed = &coeffs[..=deg];

    let mut finite = if deg == 0 {
        Vec::new()
    } else {
        match aberth(trimmed, 400, 1e-14) {
            Ok(r) => r,
            Err(_) => companion_roots(trimmed)?,
        }
    };
    // Newton polish on the trimmed polynomial
    for r in finite.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner_deriv(trimmed, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    let residual = normalized_residual(coeffs, &finite);
    let mut pts: Vec<SpherePoint> = finite.into_iter().map(SpherePoint::from_z).collect();
    pts.extend((0..at_infinity).map(|_| SpherePoint::infinity()));
    Ok(ZeroConfig {
        roots: pts,
        residual,
    })
}

/// max over finite roots of |p(r)| (1+|r|^2)^{-deg/2} / ||coeffs||_2 —
/// a chart-safe evaluation residual.
fn normalized_residual(coeffs: &[Complex64], finite: &[Complex64]) -> f64 {
    let l2 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let deg = coeffs.len() as f64 - 1.0;
    finite
        .iter()
        .map(|&r| {
            let v = if r.norm() <= 1.0 {
                horner(coeffs, r).norm() / (1.0 + r.norm_sqr()).powf(deg / 2.0)
            } else {
                // evaluate the reversed polynomial at 1/r to avoid overflow
                let rev: Vec<Complex64> = coeffs.iter().rev().cloned().collect();
                let q = horner(&rev, r.inv()).norm();
                q * (r.norm_sqr() / (1.0 + r.norm_sqr())).powf(deg / 2.0)
            };
            v / l2
        })
        .fold(0.0f64, f64::max)
}

/// Aberth-Ehrlich simultaneous iteration from scaled-circle initial guesses.
fn aberth(coeffs: &[Complex64], max_iter: usize, tol: f64) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    // deflate exact zero roots at the origin for stability
    let mut k0 = 0;
    while k0 < deg && coeffs[k0].norm() == 0.0 {
        k0 += 1;
    }
    if k0 > 0 {
        let inner = &coeffs[k0..];
        let mut r = aberth(inner, max_iter, tol)?;
        r.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(k0));
        return Ok(r);
    }
    let radius = (coeffs[0].norm() / lead.norm()).powf(1.0 / deg as f64);
    let radius = radius.clamp(1e-8, 1e8);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            Complex64::from_polar(
                radius,
                std::f64::consts::TAU * k as f64 / deg as f64 + 0.4,
            )
        })
        .collect();
    for _ in 0..max_iter {
        let mut max_step = 0.0f64;
        let zs = z.clone();
        for i in 0..deg {
            let (p, dp) = horner_deriv(coeffs, zs[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 { p / dp } else { p };
            let mut sum = Complex64::new(0.0, 0.0);
            for (j, &zj) in zs.iter().enumerate() {
                if j != i {
                    let d = zs[i] - zj;
                    if d.norm() > 1e-300 {
                        sum += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * sum;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            if !step.re.is_finite() || !step.im.is_finite() {
                return Err(Error::RootFinding("non-finite Aberth step".into()));
            }
            z[i] = zs[i] - step;
            let rel = step.norm() / zs[i].norm().max(1.0);
            max_step = max_step.max(rel);
        }
        if max_step < tol {
            return Ok(z);
        }
    }
    Err(Error::RootFinding("Aberth stalled".into()))
}

/// Roots as eigenvalues of the balanced companion matrix (QR fallback and the
/// independent oracle used in tests).
pub fn companion_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let n = deg;
    let mut h = CMat::zeros(n);
    for i in 1..n {
        h.set(i, i - 1, Complex64::new(1.0, 0.0));
    }
    for i in 0..n {
        h.set(i, n - 1, -coeffs[i] / lead);
    }
    // diagonal balancing by powers of 2
    let mut d = vec![1.0f64; n];
    for _ in 0..8 {
        let mut done = true;
        for i in 0..n {
            let mut rnorm = 0.0;
            let mut cnorm = 0.0;
            for j in 0..n {
                if j != i {
                    rnorm += h.at(i, j).norm();
                    cnorm += h.at(j, i).norm();
                }
            }
            if rnorm == 0.0 || cnorm == 0.0 {
                continue;
            }
            let mut f = 1.0f64;
            let mut c = cnorm;
            while c < rnorm / 2.0 {
                c *= 2.0;
                f *= 2.0;
            }
            while c > rnorm * 2.0 {
                c /= 2.0;
                f /= 2.0;
            }
            if f != 1.0 {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    h.set(i, j, h.at(i, j) / f);
                    h.set(j, i, h.at(j, i) * f);
                }
            }
        }
        if done {
            break;
        }
    }
    hessenberg_eigenvalues(h, 60 * n)
}

/// Monic coefficients from roots by the elementary-symmetric recurrence
/// (Vieta direction): returns [c_0, ..., c_{n-1}, 1].
pub fn coefficients_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); roots.len() + 1];
    c[0] = Complex64::new(1.0, 0.0);
    let mut deg = 0;
    for &r in roots {
        deg += 1;
        c[deg] = c[deg - 1];
        for k in (1..deg).rev() {
            let prev = c[k - 1];
            c[k] = prev - r * c[k];
        }
        c[0] = -r * c[0];
    }
    c
}

/// Relative sup-norm mismatch between the monic polynomial built from the
/// roots and the given coefficients (after making them monic).
pub fn vieta_roundtrip_residual(coeffs: &[Complex64], config: &ZeroConfig) -> Option<f64> {
    let finite = config.finite_roots()?;
    let rebuilt = coefficients_from_roots(&finite);
    let lead = coeffs.last()?;
    if lead.norm() == 0.0 {
        return None;
    }
    let scaled: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let norm = scaled.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let diff = rebuilt
        .iter()
        .zip(&scaled)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    Some(diff / norm)
}
