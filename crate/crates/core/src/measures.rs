//! Probability measures on the sphere (weighted grids and atomic zero sets)
//! and the potential-theoretic functionals built on the Green's function:
//! potentials, Green and logarithmic energies, the sup-potential J, and the
//! rate functionals I and I-tilde.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{chordal, green, Chart, GreenConstant, Metric, SpherePoint, COLLISION_TOL};
use crate::num::pairwise_sum;

/// Truncation level used when a potential is evaluated exactly on an atom.
pub const DEFAULT_M_DIAG: f64 = 40.0;

/// Self-energy model of one grid cell: a 2-D disk of the given radius or a
/// 1-D arc (curve segment) of the given half-length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CellModel {
    Disk { radius: f64 },
    Arc { half_len: f64 },
}

impl CellModel {
    /// Cell average of ln|z - w| over cell x cell in chart coordinates.
    pub fn self_avg_ln(self) -> f64 {
        match self {
            CellModel::Disk { radius } => radius.ln() - 0.25,
            CellModel::Arc { half_len } => (2.0 * half_len).ln() - 1.5,
        }
    }
}

/// A probability measure given by weighted nodes with per-node cell models.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridMeasure {
    pub points: Vec<SpherePoint>,
    pub weights: Vec<f64>,
    pub cells: Vec<CellModel>,
}

impl GridMeasure {
    pub fn new(points: Vec<SpherePoint>, weights: Vec<f64>, cells: Vec<CellModel>) -> GridMeasure {
        assert_eq!(points.len(), weights.len());
        assert_eq!(points.len(), cells.len());
        GridMeasure {
            points,
            weights,
            cells,
        }
    }

    /// Uniform measure on the circle of radius r (n nodes, arc cells).
    pub fn uniform_circle(r: f64, n: usize) -> GridMeasure {
        let half = std::f64::consts::PI * r / n as f64;
        let points = (0..n)
            .map(|k| {
                SpherePoint::from_z(Complex64::from_polar(
                    r,
                    std::f64::consts::TAU * k as f64 / n as f64,
                ))
            })
            .collect();
        GridMeasure {
            points,
            weights: vec![1.0 / n as f64; n],
            cells: vec![CellModel::Arc { half_len: half }; n],
        }
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The empirical measure of a zero set: equal weight 1/N atoms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<SpherePoint>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<SpherePoint>) -> AtomicMeasure {
        AtomicMeasure { atoms }
    }

    pub fn n(&self) -> usize {
        self.atoms.len()
    }
}

/// Borrowed view over either measure kind.
#[derive(Clone, Copy)]
pub enum MeasureRef<'a> {
    Grid(&'a GridMeasure),
    Atomic(&'a AtomicMeasure),
}

impl<'a> MeasureRef<'a> {
    pub fn len(self) -> usize {
        match self {
            MeasureRef::Grid(g) => g.len(),
            MeasureRef::Atomic(a) => a.n(),
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    fn point(self, i: usize) -> SpherePoint {
        match self {
            MeasureRef::Grid(g) => g.points[i],
            MeasureRef::Atomic(a) => a.atoms[i],
        }
    }

    fn weight(self, i: usize) -> f64 {
        match self {
            MeasureRef::Grid(g) => g.weights[i],
            MeasureRef::Atomic(a) => 1.0 / a.n() as f64,
        }
    }

    fn cell(self, i: usize) -> Option<CellModel> {
        match self {
            MeasureRef::Grid(g) => Some(g.cells[i]),
            MeasureRef::Atomic(_) => None,
        }
    }
}

impl<'a> From<&'a GridMeasure> for MeasureRef<'a> {
    fn from(g: &'a GridMeasure) -> Self {
        MeasureRef::Grid(g)
    }
}

impl<'a> From<&'a AtomicMeasure> for MeasureRef<'a> {
    fn from(a: &'a AtomicMeasure) -> Self {
        MeasureRef::Atomic(a)
    }
}

/// Dense sampling of a compact set K with its fill distance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompactSupport {
    pub points: Vec<SpherePoint>,
    pub fill_distance: f64,
}

impl CompactSupport {
    /// The unit-circle support sampled at n nodes.
    pub fn circle(r: f64, n: usize) -> CompactSupport {
        let points = (0..n)
            .map(|k| {
                SpherePoint::from_z(Complex64::from_polar(
                    r,
                    std::f64::consts::TAU * k as f64 / n as f64,
                ))
            })
            .collect();
        CompactSupport {
            points,
            fill_distance: std::f64::consts::PI * r / n as f64,
        }
    }
}

/// Decomposed rate-function value.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateValue {
    /// -1/2 E_h(mu)
    pub energy_term: f64,
    /// J^{h,K}(mu) = sup_K U
    pub sup_term: f64,
    /// I = energy_term + sup_term
    pub i: f64,
    /// I - E0
    pub i_tilde: f64,
    pub e0: f64,
}

/// Kernel value for a node pair, falling back to the cell self-average on the
/// diagonal (or truncation when no cell model is available).
fn pair_kernel(
    metric: &Metric,
    gc: &GreenConstant,
    x: SpherePoint,
    cx: Option<CellModel>,
    y: SpherePoint,
    cy: Option<CellModel>,
) -> f64 {
    let d = chordal(x, y);
    if d > COLLISION_TOL {
        return 2.0 * d.ln() - metric.perturbation_at(x) - metric.perturbation_at(y) + gc.e;
    }
    let rho = -2.0 * metric.phi_canonical(x) + gc.e;
    match cx.or(cy) {
        Some(cell) => 2.0 * cell.self_avg_ln() + rho,
        None => -DEFAULT_M_DIAG,
    }
}

/// Green's potential U^mu_h(z) = sum_i w_i G_h(z, x_i).
///
/// A z colliding with a node uses the node's cell self-average (grids) or the
/// truncated kernel at DEFAULT_M_DIAG (atoms). Always <= C_G for probability
/// measures.
pub fn potential<'a, M: Into<MeasureRef<'a>>>(
    metric: &Metric,
    gc: &GreenConstant,
    mu: M,
    z: SpherePoint,
) -> f64 {
    let mu = mu.into();
    let terms: Vec<f64> = (0..mu.len())
        .into_par_iter()
        .map(|i| mu.weight(i) * pair_kernel(metric, gc, z, None, mu.point(i), mu.cell(i)))
        .collect();
    pairwise_sum(&terms)
}

/// Green's energy E_h(mu).
///
/// Grid measures include the diagonal through the per-cell model; atomic
/// measures use the strict off-diagonal sum (the finite-N energy of a zero
/// configuration). Distinct coincident atoms are an error in strict mode.
pub fn green_energy<'a, M: Into<MeasureRef<'a>>>(
    metric: &Metric,
    gc: &GreenConstant,
    mu: M,
) -> Result<f64> {
    let mu = mu.into();
    let n = mu.len();
    let atomic = matches!(mu, MeasureRef::Atomic(_));
    let rows: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = mu.point(i);
            let wi = mu.weight(i);
            let mut terms = Vec::with_capacity(n);
            for j in 0..n {
                if i == j {
                    if atomic {
                        continue;
                    }
                    terms.push(
                        wi * wi
                            * pair_kernel(metric, gc, xi, mu.cell(i), xi, mu.cell(i)),
                    );
                    continue;
                }
                let d = chordal(xi, mu.point(j));
                if d <= COLLISION_TOL && atomic {
                    return Err(Error::Collision { dist: d });
                }
                terms.push(
                    wi * mu.weight(j)
                        * pair_kernel(metric, gc, xi, mu.cell(i), mu.point(j), mu.cell(j)),
                );
            }
            Ok(pairwise_sum(&terms))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&rows))
}

/// Truncated Green's energy with kernel G ∨ (-m); diagonal excluded for atoms,
/// cell model replaced by max(model, -m) for grids.
pub fn green_energy_truncated<'a, M: Into<MeasureRef<'a>>>(
    metric: &Metric,
    gc: &GreenConstant,
    mu: M,
    m: f64,
) -> f64 {
    let mu = mu.into();
    let n = mu.len();
    let atomic = matches!(mu, MeasureRef::Atomic(_));
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = mu.point(i);
            let wi = mu.weight(i);
            let mut terms = Vec::with_capacity(n);
            for j in 0..n {
                if i == j && atomic {
                    terms.push(wi * wi * (-m));
                    continue;
                }
                let v = pair_kernel(metric, gc, xi, mu.cell(i), mu.point(j), mu.cell(j));
                terms.push(wi * mu.weight(j) * v.max(-m));
            }
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows)
}

/// Logarithmic energy Sigma(mu) = double integral of ln|z - w|, chart-0
/// coordinates, same diagonal policy as `green_energy`.
pub fn log_energy<'a, M: Into<MeasureRef<'a>>>(mu: M) -> Result<f64> {
    let mu = mu.into();
    let n = mu.len();
    let atomic = matches!(mu, MeasureRef::Atomic(_));
    let zs: Vec<Complex64> = (0..n)
        .map(|i| mu.point(i).coord_in(Chart::Zero).ok_or(Error::SupportAtInfinity))
        .collect::<Result<_>>()?;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut terms = Vec::with_capacity(n);
            for j in 0..n {
                if i == j {
                    if atomic {
                        continue;
                    }
                    let diag = mu.cell(i).map(|c| c.self_avg_ln()).unwrap_or(-DEFAULT_M_DIAG);
                    terms.push(mu.weight(i) * mu.weight(i) * diag);
                    continue;
                }
                let d = (zs[i] - zs[j]).norm();
                let v = if d > COLLISION_TOL {
                    d.ln()
                } else {
                    mu.cell(i)
                        .or(mu.cell(j))
                        .map(|c| c.self_avg_ln())
                        .unwrap_or(-DEFAULT_M_DIAG)
                };
                terms.push(mu.weight(i) * mu.weight(j) * v);
            }
            pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&rows))
}

/// J^{h,K}(mu) = sup over K's sample nodes of the potential.
pub fn sup_potential<'a, M: Into<MeasureRef<'a>> + Copy>(
    metric: &Metric,
    gc: &GreenConstant,
    mu: M,
    k: &CompactSupport,
) -> f64 {
    let mu_ref: MeasureRef = mu.into();
    k.points
        .par_iter()
        .map(|&y| {
            let terms: Vec<f64> = (0..mu_ref.len())
                .map(|i| {
                    mu_ref.weight(i)
                        * pair_kernel(metric, gc, y, None, mu_ref.point(i), mu_ref.cell(i))
                })
                .collect();
            pairwise_sum(&terms)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Assemble the rate value I = -1/2 E_h + J and its recentering I - E0.
pub fn rate<'a, M: Into<MeasureRef<'a>> + Copy>(
    metric: &Metric,
    gc: &GreenConstant,
    mu: M,
    k: &CompactSupport,
    e0: f64,
) -> Result<RateValue> {
    let energy = green_energy(metric, gc, mu)?;
    let sup = sup_potential(metric, gc, mu, k);
    let i = -0.5 * energy + sup;
    Ok(RateValue {
        energy_term: -0.5 * energy,
        sup_term: sup,
        i,
        i_tilde: i - e0,
        e0,
    })
}

/// Affine-chart form of the rate function:
/// -Sigma(mu) + sup_{z in K} (2 int ln|z - w| dmu(w) - phi_0(z)).
/// Differs from `rate(...).i` by the mu-independent constant E(h)/2.
pub fn rate_local<'a, M: Into<MeasureRef<'a>> + Copy>(
    metric: &Metric,
    mu: M,
    k: &CompactSupport,
) -> Result<f64> {
    let mu_ref: MeasureRef = mu.into();
    let sigma = log_energy(mu)?;
    let n = mu_ref.len();
    let zs: Vec<Complex64> = (0..n)
        .map(|i| mu_ref.point(i).coord_in(Chart::Zero).ok_or(Error::SupportAtInfinity))
        .collect::<Result<_>>()?;
    let sup = k
        .points
        .par_iter()
        .map(|&y| {
            let zy = match y.coord_in(Chart::Zero) {
                Some(z) => z,
                None => return f64::NEG_INFINITY,
            };
            let terms: Vec<f64> = (0..n)
                .map(|i| {
                    let d = (zy - zs[i]).norm();
                    let v = if d > COLLISION_TOL {
                        2.0 * d.ln()
                    } else {
                        2.0 * mu_ref
                            .cell(i)
                            .map(|c| c.self_avg_ln())
                            .unwrap_or(-DEFAULT_M_DIAG)
                    };
                    mu_ref.weight(i) * v
                })
                .collect();
            pairwise_sum(&terms) - metric.phi(y, Chart::Zero).unwrap_or(f64::INFINITY)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(-sigma + sup)
}

/// Energy-form pairing <mu, nu>_h = double integral of G_h d(mu) d(nu),
/// cross terms by point evaluation (coincident pairs use the cell model).
pub fn energy_cross<'a, 'b, A: Into<MeasureRef<'a>>, B: Into<MeasureRef<'b>>>(
    metric: &Metric,
    gc: &GreenConstant,
    a: A,
    b: B,
) -> f64 {
    let a = a.into();
    let b = b.into();
    let rows: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let terms: Vec<f64> = (0..b.len())
                .map(|j| {
                    a.weight(i)
                        * b.weight(j)
                        * pair_kernel(metric, gc, a.point(i), a.cell(i), b.point(j), b.cell(j))
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows)
}

/// <mu - nu, mu - nu>_h for probability measures mu, nu; non-positive up to
/// discretization, and metric-independent. Its negative is the squared
/// concentration distance.
pub fn energy_form_distance<'a, 'b, A: Into<MeasureRef<'a>> + Copy, B: Into<MeasureRef<'b>> + Copy>(
    metric: &Metric,
    gc: &GreenConstant,
    a: A,
    b: B,
) -> Result<f64> {
    let ea = green_energy(metric, gc, a)?;
    let eb = green_energy(metric, gc, b)?;
    let cross = energy_cross(metric, gc, a, b);
    Ok(ea + eb - 2.0 * cross)
}
