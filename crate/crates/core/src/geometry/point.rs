use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Canonical-form slack: a point is kept in the chart where |coord| <= 1 + CHART_EPS.
pub const CHART_EPS: f64 = 1e-9;

/// Chordal distance below which two points count as the same point.
pub const COLLISION_TOL: f64 = 1e-13;

/// The two affine charts: `Zero` covers C (coordinate z), `Inf` covers the
/// sphere minus the origin (coordinate w = 1/z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Zero,
    Inf,
}

impl Chart {
    pub fn index(self) -> usize {
        match self {
            Chart::Zero => 0,
            Chart::Inf => 1,
        }
    }

    pub fn other(self) -> Chart {
        match self {
            Chart::Zero => Chart::Inf,
            Chart::Inf => Chart::Zero,
        }
    }
}

/// A point of the Riemann sphere, stored as a chart index plus the chart coordinate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpherePoint {
    pub chart: Chart,
    pub coord: Complex64,
}

impl SpherePoint {
    /// Point from a chart-0 coordinate, canonicalized.
    pub fn from_z(z: Complex64) -> SpherePoint {
        SpherePoint {
            chart: Chart::Zero,
            coord: z,
        }
        .canonical()
    }

    /// Point from a coordinate in the given chart, canonicalized.
    pub fn new(chart: Chart, coord: Complex64) -> SpherePoint {
        SpherePoint { chart, coord }.canonical()
    }

    /// The point at infinity (chart-1 coordinate 0).
    pub fn infinity() -> SpherePoint {
        SpherePoint {
            chart: Chart::Inf,
            coord: Complex64::new(0.0, 0.0),
        }
    }

    /// Canonical form: the chart in which |coord| <= 1 + CHART_EPS.
    pub fn canonical(self) -> SpherePoint {
        if self.coord.norm() > 1.0 + CHART_EPS {
            SpherePoint {
                chart: self.chart.other(),
                coord: self.coord.inv(),
            }
        } else {
            self
        }
    }

    /// Coordinate in the requested chart; `None` if the point is the chart's missing point.
    pub fn coord_in(self, chart: Chart) -> Option<Complex64> {
        if self.chart == chart {
            Some(self.coord)
        } else if self.coord.norm() == 0.0 {
            None
        } else {
            Some(self.coord.inv())
        }
    }

    /// True when this is the point at infinity (within canonical-form tolerance).
    pub fn is_infinity(self) -> bool {
        self.chart == Chart::Inf && self.coord.norm() < 1e-300
    }

    /// 1 + |z|^2 in the canonical chart (chordal normalization factor).
    pub fn sqn(self) -> f64 {
        1.0 + self.canonical().coord.norm_sqr()
    }
}

impl PartialEq for SpherePoint {
    fn eq(&self, other: &Self) -> bool {
        chordal(*self, *other) <= COLLISION_TOL
    }
}

/// Chordal distance [z, w] in [0, 1]; 1 at antipodes. Stable in all chart combinations:
/// same chart |z - w|, opposite charts |z w - 1|, each over sqrt((1+|z|^2)(1+|w|^2)).
pub fn chordal(a: SpherePoint, b: SpherePoint) -> f64 {
    let a = a.canonical();
    let b = b.canonical();
    let num = if a.chart == b.chart {
        (a.coord - b.coord).norm()
    } else {
        (a.coord * b.coord - 1.0).norm()
    };
    num / (a.sqn() * b.sqn()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn canonical_moves_large_coords_to_other_chart() {
        let p = SpherePoint::new(Chart::Zero, Complex64::new(4.0, 0.0));
        assert_eq!(p.chart, Chart::Inf);
        assert_abs_diff_eq!(p.coord.re, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn equality_uses_canonical_form() {
        let a = SpherePoint::new(Chart::Zero, Complex64::new(2.0, 0.0));
        let b = SpherePoint::new(Chart::Inf, Complex64::new(0.5, 0.0));
        assert_eq!(a, b);
    }

    #[test]
    fn chordal_antipodes_and_cross_chart() {
        let zero = SpherePoint::from_z(Complex64::new(0.0, 0.0));
        let inf = SpherePoint::infinity();
        assert_abs_diff_eq!(chordal(zero, inf), 1.0, epsilon = 1e-15);
        // |z| = 1 to origin: 1/sqrt(2)
        let one = SpherePoint::from_z(Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(chordal(zero, one), 0.5f64.sqrt(), epsilon = 1e-15);
        // cross-chart consistency for a generic pair
        let a = SpherePoint::from_z(Complex64::new(0.8, 0.1));
        let b = SpherePoint::new(Chart::Inf, Complex64::new(0.9, -0.4));
        let b_in_zero = SpherePoint::from_z(b.coord.inv());
        assert_abs_diff_eq!(chordal(a, b), chordal(a, b_in_zero), epsilon = 1e-12);
    }
}
