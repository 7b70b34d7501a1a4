//! Points on the Riemann sphere in two affine charts, Hermitian metrics on the
//! degree-1 bundle, curvature, Green's functions and sphere quadrature.

mod green;
mod metric;
mod point;
mod quadrature;

pub use green::{green, green_truncated, GreenConstant};
pub use metric::{Metric, MetricDescriptor, Perturbation};
pub use point::{chordal, Chart, SpherePoint, CHART_EPS, COLLISION_TOL};
pub use quadrature::{compute_green_constant, sphere_quadrature, sphere_quadrature_centered, SphereQuadrature};
