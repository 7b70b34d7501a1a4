//! Polar cell geometry for measure grids: tilings of a disk by annular wedges,
//! cell self-energies of the logarithmic kernel, and cell-pair averages.

use num_complex::Complex64;

use crate::geometry::Chart;
use crate::num::gauss_legendre_ab;

/// One cell of a polar tiling, in the coordinates of `chart`.
/// `Wedge` cells are 2-D annular sectors; `Arc` cells are 1-D circle segments
/// (used for curve grids such as the unit circle).
#[derive(Clone, Debug)]
pub enum PolarCell {
    Wedge {
        chart: Chart,
        r0: f64,
        r1: f64,
        th0: f64,
        th1: f64,
    },
    Arc {
        chart: Chart,
        radius: f64,
        th0: f64,
        th1: f64,
    },
}

impl PolarCell {
    pub fn chart(&self) -> Chart {
        match self {
            PolarCell::Wedge { chart, .. } | PolarCell::Arc { chart, .. } => *chart,
        }
    }

    /// Chart-coordinate area (zero for arcs).
    pub fn area(&self) -> f64 {
        match self {
            PolarCell::Wedge { r0, r1, th0, th1, .. } => 0.5 * (r1 * r1 - r0 * r0) * (th1 - th0),
            PolarCell::Arc { .. } => 0.0,
        }
    }

    /// Centroid of the cell in its own chart coordinates.
    pub fn centroid(&self) -> Complex64 {
        match self {
            PolarCell::Wedge { r0, r1, th0, th1, .. } => {
                let beta = th1 - th0;
                let rr = if r1 - r0 > 0.0 {
                    (2.0 / 3.0) * (r1.powi(3) - r0.powi(3)) / (r1 * r1 - r0 * r0)
                } else {
                    0.5 * (r0 + r1)
                };
                let sinc = if beta > 0.0 {
                    (0.5 * beta).sin() / (0.5 * beta)
                } else {
                    1.0
                };
                Complex64::from_polar(rr * sinc, 0.5 * (th0 + th1))
            }
            PolarCell::Arc { radius, th0, th1, .. } => {
                Complex64::from_polar(*radius, 0.5 * (th0 + th1))
            }
        }
    }

    /// Equal-measure radius: disk radius for wedges, half arc-length for arcs.
    pub fn model_radius(&self) -> f64 {
        match self {
            PolarCell::Wedge { .. } => (self.area() / std::f64::consts::PI).sqrt(),
            PolarCell::Arc { radius, th0, th1, .. } => 0.5 * radius * (th1 - th0),
        }
    }

    /// Cell-average of ln|z - w| over cell x cell (chart coordinates).
    /// Wedges use the exact boundary-integral reduction; arcs use the uniform
    /// segment value ln(len) - 3/2.
    pub fn self_avg_ln(&self) -> f64 {
        match self {
            PolarCell::Wedge { r0, r1, th0, th1, .. } => {
                if *r0 <= 0.0 && (th1 - th0 - std::f64::consts::TAU).abs() < 1e-12 {
                    // full disk: exact
                    return r1.ln() - 0.25;
                }
                wedge_self_avg_ln(*r0, *r1, th1 - th0)
            }
            PolarCell::Arc { radius, th0, th1, .. } => {
                let len = radius * (th1 - th0);
                len.ln() - 1.5
            }
        }
    }

    /// Quadrature nodes/weights over the cell for pair averaging
    /// (GL x GL for wedges; GL along the arc for arcs). Weights sum to the
    /// cell's measure (area, or arc length normalized out by the caller).
    pub fn quad_nodes(&self, k: usize) -> (Vec<Complex64>, Vec<f64>) {
        match self {
            PolarCell::Wedge { r0, r1, th0, th1, .. } => {
                let (rs, wr) = gauss_legendre_ab(k, *r0, *r1);
                let (ts, wt) = gauss_legendre_ab(k, *th0, *th1);
                let mut z = Vec::with_capacity(k * k);
                let mut w = Vec::with_capacity(k * k);
                for (i, &r) in rs.iter().enumerate() {
                    for (j, &t) in ts.iter().enumerate() {
                        z.push(Complex64::from_polar(r, t));
                        w.push(wr[i] * r * wt[j]);
                    }
                }
                (z, w)
            }
            PolarCell::Arc { radius, th0, th1, .. } => {
                let (ts, wt) = gauss_legendre_ab(k, *th0, *th1);
                let z = ts.iter().map(|&t| Complex64::from_polar(*radius, t)).collect();
                (z, wt)
            }
        }
    }
}

/// Average of ln|z - w| over the square of an annular wedge [r0,r1] x [0,beta],
/// via V(z) = contour integral of grad F . n with F = |w-z|^2 (ln|w-z| - 1)/4.
pub fn wedge_self_avg_ln(r0: f64, r1: f64, beta: f64) -> f64 {
    let kout = 28;
    let kb = 40;
    let (rs, wr) = gauss_legendre_ab(kout, r0, r1);
    let (ts, wt) = gauss_legendre_ab(kout, 0.0, beta);
    let area = 0.5 * (r1 * r1 - r0 * r0) * beta;
    let mut acc = 0.0;
    for (i, &r) in rs.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            let z = Complex64::from_polar(r, t);
            acc += wr[i] * r * wt[j] * newtonian_potential_wedge(z, r0, r1, beta, kb);
        }
    }
    acc / (area * area)
}

/// V(z) = int over the wedge of ln|z - w| dA(w), z strictly inside.
fn newtonian_potential_wedge(z: Complex64, r0: f64, r1: f64, beta: f64, k: usize) -> f64 {
    let grad_f = |w: Complex64| -> Complex64 {
        let d = w - z;
        d * (2.0 * d.norm().ln() - 1.0) / 4.0
    };
    let mut total = 0.0;
    // outer arc, outward normal e^{i t}
    let (ts, wt) = gauss_legendre_ab(k, 0.0, beta);
    for (j, &t) in ts.iter().enumerate() {
        let n = Complex64::from_polar(1.0, t);
        total += wt[j] * (grad_f(r1 * n) * n.conj()).re * r1;
    }
    // inner arc, outward normal -e^{i t}
    if r0 > 0.0 {
        for (j, &t) in ts.iter().enumerate() {
            let n = Complex64::from_polar(1.0, t);
            total -= wt[j] * (grad_f(r0 * n) * n.conj()).re * r0;
        }
    }
    // radial edges at t = 0 (outward normal -i) and t = beta (outward normal i e^{i beta})
    if (beta - std::f64::consts::TAU).abs() > 1e-12 {
        let (rs, wr) = gauss_legendre_ab(k, r0, r1);
        let n0 = Complex64::new(0.0, -1.0);
        let n1 = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, beta);
        for (i, &r) in rs.iter().enumerate() {
            total += wr[i] * (grad_f(Complex64::new(r, 0.0)) * n0.conj()).re;
            total += wr[i] * (grad_f(Complex64::from_polar(r, beta)) * n1.conj()).re;
        }
    }
    total
}

/// Square-ish equal-aspect polar tiling of the disk of radius `radius`:
/// ring j covers [j d, (j+1) d] with 8j + 4 wedges (d = radius / rings).
pub fn disk_tiling(chart: Chart, radius: f64, rings: usize) -> Vec<PolarCell> {
    let d = radius / rings as f64;
    let mut cells = Vec::new();
    for j in 0..rings {
        let r0 = j as f64 * d;
        let r1 = r0 + d;
        let n_t = 8 * j + 4;
        let beta = std::f64::consts::TAU / n_t as f64;
        for t in 0..n_t {
            cells.push(PolarCell::Wedge {
                chart,
                r0,
                r1,
                th0: beta * t as f64,
                th1: beta * (t as f64 + 1.0),
            });
        }
    }
    cells
}

/// Uniform ring of 1-D arc cells on the circle of given radius.
pub fn circle_arcs(chart: Chart, radius: f64, n: usize) -> Vec<PolarCell> {
    let beta = std::f64::consts::TAU / n as f64;
    (0..n)
        .map(|t| PolarCell::Arc {
            chart,
            radius,
            th0: beta * t as f64,
            th1: beta * (t as f64 + 1.0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn disk_self_energy_exact() {
        // full disk radius a: average ln = ln a - 1/4
        let c = PolarCell::Wedge {
            chart: Chart::Zero,
            r0: 0.0,
            r1: 0.7,
            th0: 0.0,
            th1: std::f64::consts::TAU,
        };
        assert_abs_diff_eq!(c.self_avg_ln(), 0.7f64.ln() - 0.25, epsilon = 1e-12);
        // and the boundary-integral route agrees on the same shape
        let v = wedge_self_avg_ln(0.0, 0.7, std::f64::consts::TAU);
        assert_abs_diff_eq!(v, 0.7f64.ln() - 0.25, epsilon = 1e-6);
    }

    #[test]
    fn tiling_covers_disk_area() {
        let cells = disk_tiling(Chart::Zero, 1.0, 12);
        let total: f64 = cells.iter().map(|c| c.area()).sum();
        assert_abs_diff_eq!(total, std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn wedge_centroid_first_moment_vanishes() {
        let c = PolarCell::Wedge {
            chart: Chart::Zero,
            r0: 0.3,
            r1: 0.4,
            th0: 0.1,
            th1: 0.35,
        };
        let (z, w) = c.quad_nodes(12);
        let area: f64 = w.iter().sum();
        let mean: Complex64 = z.iter().zip(&w).map(|(&zi, &wi)| zi * wi).sum::<Complex64>() / area;
        assert_abs_diff_eq!((mean - c.centroid()).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(area, c.area(), epsilon = 1e-14);
    }

    #[test]
    fn arc_model() {
        let cells = circle_arcs(Chart::Zero, 1.0, 512);
        let len = std::f64::consts::TAU / 512.0;
        assert_abs_diff_eq!(cells[0].self_avg_ln(), len.ln() - 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(cells[0].model_radius(), 0.5 * len, epsilon = 1e-15);
    }
}
