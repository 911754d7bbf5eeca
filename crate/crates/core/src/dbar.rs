//! Solvers for `du/dzbar = G` on the disk.
//!
//! [`CauchySolver`] discretizes the solid Cauchy transform
//! `u(z) = -(1/pi) int_D G(zeta) / (zeta - z) dA(zeta)`. [`NxSolver`]
//! evaluates the bounded solution built from an exponential kernel,
//!
//! ```text
//! v(z) = (i/pi) int_D (1 - |zeta|^2) / |1 - conj(zeta) z|^2
//!        exp( int_{|w| >= |zeta|} (K(w, zeta) - K(w, z)) |g(w)| dA(w) ) |g(zeta)| dA(zeta),
//! K(w, x) = (1 + conj(w) x) / (1 - conj(w) x),
//! ```
//!
//! whose boundary values are controlled by the p-Carleson norm of
//! `|g|^2 (1 - |z|^2)^p dA`. Only its boundary values are used.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carleson::{box_norm, CarlesonEstimate, MeasureDensity};
use crate::disk::{DiskGrid, Quadrature};
use crate::error::{Error, Result};
use crate::funcspace::{AnalyticFn, SmoothField, Wirtinger, FD_STEP};
use crate::par;
use crate::qp::{boundary_seminorm, gradient_criterion, TrigInterpolant};

/// Step used for the local Taylor data of the right-hand side.
pub const TAYLOR_STEP: f64 = 1e-4;

/// Default kernel-evaluation budget of the exponential-kernel solver.
pub const DEFAULT_NX_BUDGET: f64 = 5e9;

pub const DEFAULT_NX_POINTS: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Quadrature rule for the weakly singular Cauchy kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauchyScheme {
    /// Plain node sum with the cell containing `z` left out. Piecewise
    /// analytic in `z`, so finite-difference residuals do not see the rhs.
    DropCell,
    /// Subtracts the first-order Taylor polynomial of `G` at `z` and adds
    /// its transform in closed form; second order.
    #[default]
    Corrected,
}

/// Precomputed node data for repeated Cauchy-transform evaluation of one
/// right-hand side.
pub struct CauchySolver {
    rhs: SmoothField,
    grid: DiskGrid,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    /// `w_i G(zeta_i) / pi`.
    scaled: Vec<Complex64>,
    scheme: CauchyScheme,
}

/// Rings of the grid whose cells are replaced by a finer rule near the
/// origin in the corrected scheme.
pub const CENTRE_RINGS: usize = 2;

/// Nodes and weights for the corrected scheme: the grid outside the disk
/// `|zeta| < grid.ring_edge(CENTRE_RINGS)`, and inside it a polar rule
/// uniform in `r` with nearly square cells. The plain grid leaves a
/// node-free hole around the origin that the Taylor correction cannot
/// bridge.
fn corrected_rule(grid: &DiskGrid) -> (Vec<Complex64>, Vec<f64>) {
    let na = grid.n_angular();
    let start = grid.index(CENTRE_RINGS, 0);
    let mut nodes = grid.nodes()[start..].to_vec();
    let mut weights = grid.weights()[start..].to_vec();
    let rho = grid.ring_edge(CENTRE_RINGS);
    let m = (grid.n_radial() / 4).max(16);
    let dr = rho / m as f64;
    for i in 0..m {
        let (r0, r1) = (i as f64 * dr, (i + 1) as f64 * dr);
        let r = (0.5 * (r0 * r0 + r1 * r1)).sqrt();
        let count = ((TAU * (i as f64 + 0.5)).ceil() as usize).clamp(6, na);
        let w = PI * (r1 * r1 - r0 * r0) / count as f64;
        // rotate alternate rings by half a sector
        let phase = if i % 2 == 0 { 0.5 } else { 0.0 };
        for k in 0..count {
            nodes.push(Complex64::from_polar(r, TAU * (k as f64 + phase) / count as f64));
            weights.push(w);
        }
    }
    (nodes, weights)
}

/// One transform value with the singular-node bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyValue {
    pub value: Complex64,
    /// Node excluded from the sum, if `z` fell on or in its cell; an index
    /// into [`CauchySolver::nodes`].
    pub excluded_node: Option<usize>,
    /// Quadrature weight of the excluded node: a bound for the bias is
    /// `|G| * excluded_weight / (pi * dist)`.
    pub excluded_weight: f64,
}

impl CauchySolver {
    pub fn new(rhs: &SmoothField, grid: &DiskGrid, scheme: CauchyScheme) -> Result<Self> {
        let (nodes, weights) = match scheme {
            CauchyScheme::DropCell => (grid.nodes().to_vec(), grid.weights().to_vec()),
            CauchyScheme::Corrected => corrected_rule(grid),
        };
        let values = par::map(nodes.len(), |i| rhs.eval(nodes[i]));
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                z: nodes[i],
                message: "right-hand side is not finite".into(),
            });
        }
        let scaled = values
            .iter()
            .zip(&weights)
            .map(|(g, w)| g * (w / PI))
            .collect();
        Ok(Self {
            rhs: rhs.clone(),
            grid: grid.clone(),
            nodes,
            weights,
            scaled,
            scheme,
        })
    }

    pub fn scheme(&self) -> CauchyScheme {
        self.scheme
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_detailed(z)?.value)
    }

    pub fn eval_detailed(&self, z: Complex64) -> Result<CauchyValue> {
        if !(z.norm() <= 1.0 + 1e-12) {
            return Err(Error::OutsideDisk {
                what: "Cauchy transform evaluation point",
                z,
            });
        }
        let nodes = &self.nodes;
        let weights = &self.weights;
        match self.scheme {
            CauchyScheme::DropCell => {
                let skip = self.grid.cell_of(z);
                let sum = par::sum_c64(nodes.len(), |i| {
                    if Some(i) == skip {
                        ZERO
                    } else {
                        self.scaled[i] / (nodes[i] - z)
                    }
                });
                Ok(CauchyValue {
                    value: -sum,
                    excluded_node: skip,
                    excluded_weight: skip.map_or(0.0, |i| weights[i]),
                })
            }
            CauchyScheme::Corrected => {
                let g = self.rhs.eval(z);
                let gz = self.rhs.wirtinger_unguarded(z, Wirtinger::Dz, TAYLOR_STEP);
                let gzb = self
                    .rhs
                    .wirtinger_unguarded(z, Wirtinger::Dzbar, TAYLOR_STEP);
                if !(g.is_finite() && gz.is_finite() && gzb.is_finite()) {
                    return Err(Error::Evaluation {
                        z,
                        message: "right-hand side or its derivatives not finite".into(),
                    });
                }
                let sum = par::sum_c64(nodes.len(), |i| {
                    let d = nodes[i] - z;
                    if d.norm() < 1e-14 {
                        return ZERO;
                    }
                    let taylor = (g + gz * d + gzb * d.conj()) * (weights[i] / PI);
                    (self.scaled[i] - taylor) / d
                });
                let zb = z.conj();
                let value = g * zb - gz - gzb * zb * zb * 0.5 - sum;
                let hit = self.coincident_rule_node(z);
                Ok(CauchyValue {
                    value,
                    excluded_node: hit,
                    excluded_weight: hit.map_or(0.0, |i| weights[i]),
                })
            }
        }
    }

    /// Quadrature nodes actually summed over; equal to the grid nodes for
    /// [`CauchyScheme::DropCell`].
    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn coincident_rule_node(&self, z: Complex64) -> Option<usize> {
        let outer = self.grid.len() - self.grid.index(CENTRE_RINGS, 0);
        if z.norm() >= self.grid.ring_edge(CENTRE_RINGS) {
            let start = self.grid.index(CENTRE_RINGS, 0);
            return coincident(&self.grid, z).map(|i| i - start);
        }
        (outer..self.nodes.len()).find(|&i| (self.nodes[i] - z).norm() < 1e-14)
    }

    /// Values at many points, in order.
    pub fn eval_many(&self, points: &[Complex64]) -> Result<Vec<Complex64>> {
        par::map(points.len(), |i| self.eval(points[i]))
            .into_iter()
            .collect()
    }
}

fn coincident(grid: &DiskGrid, z: Complex64) -> Option<usize> {
    grid.cell_of(z)
        .filter(|&i| (grid.nodes()[i] - z).norm() < 1e-14)
}

/// One-shot Cauchy transform of `rhs` at `z`.
pub fn cauchy_solve(
    rhs: &SmoothField,
    grid: &DiskGrid,
    z: Complex64,
    scheme: CauchyScheme,
) -> Result<CauchyValue> {
    CauchySolver::new(rhs, grid, scheme)?.eval_detailed(z)
}

/// `max |d/dzbar u(z) - G(z)|` over `points`, with the central-difference
/// stencil of step `h`.
pub fn dbar_residual<U>(
    solution: U,
    rhs: &SmoothField,
    points: &[Complex64],
    h: f64,
) -> Result<f64>
where
    U: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    if let Some(&z) = points.iter().find(|z| !(1.0 - z.norm() > 2.0 * h)) {
        return Err(Error::StepTooLarge { z, h });
    }
    let residuals = par::map(points.len(), |i| -> Result<f64> {
        let z = points[i];
        let stencil = [
            z + h,
            z - h,
            z + Complex64::new(0.0, h),
            z - Complex64::new(0.0, h),
        ];
        let mut vals = [ZERO; 4];
        for (v, s) in vals.iter_mut().zip(stencil) {
            *v = solution(s)?;
        }
        let i = Complex64::new(0.0, 1.0);
        let d = ((vals[0] - vals[1]) + i * (vals[2] - vals[3])) / (4.0 * h);
        Ok((d - rhs.eval(z)).norm())
    });
    let mut worst = 0.0_f64;
    for r in residuals {
        worst = worst.max(r?);
    }
    Ok(worst)
}

/// Data of a d-bar problem with a pointwise bound `|G| <= |g|`; the bounded
/// solver only sees the modulus `|g|`.
#[derive(Debug, Clone)]
pub struct DbarProblem {
    pub rhs: SmoothField,
    /// `|g|`, so that `lambda = |g|^2 (1 - |z|^2)^p dA`.
    pub modulus: MeasureDensity,
    pub p: f64,
}

impl DbarProblem {
    pub fn lambda(&self) -> MeasureDensity {
        self.modulus.squared().weighted(self.p)
    }
}

/// Kernel evaluations needed for `points` values on a grid of `n` nodes.
pub fn nx_cost(n: usize, points: usize) -> f64 {
    let n = n as f64;
    n * (n + 1.0) / 2.0 + points as f64 * 2.0 * n
}

/// Exponential-kernel solver with the inner integrals over `{|w| >= |zeta|}`
/// precomputed for every outer node.
pub struct NxSolver {
    grid: DiskGrid,
    /// `|g|` at the nodes.
    modulus: Vec<f64>,
    /// `int_{|w| >= |zeta|} K(w, zeta) |g(w)| dA(w)` at every node `zeta`.
    inner: Vec<Complex64>,
}

impl NxSolver {
    /// Prepares the solver for `points` later evaluations; fails when the
    /// total work exceeds `budget` kernel evaluations.
    pub fn new(modulus: &MeasureDensity, grid: &DiskGrid, points: usize, budget: f64) -> Result<Self> {
        let cost = nx_cost(grid.len(), points);
        if cost > budget {
            return Err(Error::CostBudget { cost, budget });
        }
        let m = modulus.sample(grid)?;
        let (nr, na) = (grid.n_radial(), grid.n_angular());
        let radii = grid.radii();
        let mass: Vec<f64> = m
            .iter()
            .zip(grid.weights())
            .map(|(g, w)| g * w)
            .collect();
        let dtheta = TAU / na as f64;

        // The grid is a polar product, so K(w, zeta) between rings depends
        // only on the sector offset and each ring pair is a cyclic
        // convolution.
        let rows: Vec<Vec<Complex64>> = par::map(nr, |r| {
            let mut acc = vec![ZERO; na];
            let mut table = vec![ZERO; na];
            for r2 in r..nr {
                let ring_mass = &mass[r2 * na..(r2 + 1) * na];
                if ring_mass.iter().all(|&c| c == 0.0) {
                    continue;
                }
                let rho = radii[r] * radii[r2];
                for (d, t) in table.iter_mut().enumerate() {
                    let x = Complex64::from_polar(rho, d as f64 * dtheta);
                    *t = (ONE + x) / (ONE - x);
                }
                for (k, a) in acc.iter_mut().enumerate() {
                    let mut s = ZERO;
                    for (k2, &c) in ring_mass.iter().enumerate() {
                        let d = if k >= k2 { k - k2 } else { k + na - k2 };
                        s += table[d] * c;
                    }
                    *a += s;
                }
            }
            acc
        });
        Ok(Self {
            grid: grid.clone(),
            modulus: m,
            inner: rows.into_iter().flatten().collect(),
        })
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() <= 1.0 + 1e-12) {
            return Err(Error::OutsideDisk {
                what: "bounded-solver evaluation point",
                z,
            });
        }
        let nodes = self.grid.nodes();
        let weights = self.grid.weights();
        let (nr, na) = (self.grid.n_radial(), self.grid.n_angular());

        // Suffix sums over rings of int K(w, z) |g(w)| dA(w).
        let ring_totals: Vec<Complex64> = par::map(nr, |r| {
            (r * na..(r + 1) * na)
                .map(|i| {
                    let c = self.modulus[i] * weights[i];
                    if c == 0.0 {
                        return ZERO;
                    }
                    let x = nodes[i].conj() * z;
                    (ONE + x) / (ONE - x) * c
                })
                .sum()
        });
        let mut outer_from = vec![ZERO; nr + 1];
        for r in (0..nr).rev() {
            outer_from[r] = outer_from[r + 1] + ring_totals[r];
        }

        let sum = par::sum_c64(nodes.len(), |i| {
            let g = self.modulus[i];
            if g == 0.0 {
                return ZERO;
            }
            let zeta = nodes[i];
            let poisson = (1.0 - zeta.norm_sqr()) / (ONE - zeta.conj() * z).norm_sqr();
            let exponent = self.inner[i] - outer_from[i / na];
            exponent.exp() * (poisson * g * weights[i])
        });
        let v = Complex64::new(0.0, 1.0 / PI) * sum;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                z,
                message: "exponential kernel overflowed".into(),
            })
        }
    }
}

/// Boundary certificates of the bounded solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NxCertificates {
    pub linf_boundary: f64,
    pub qp_boundary_seminorm: f64,
    /// Box norm of `lambda = |g|^2 (1 - |z|^2)^p dA`.
    pub carleson_input_norm: f64,
    /// `linf_boundary / carleson_input_norm^(1/2)`; zero for a zero input.
    pub constant: f64,
    pub carleson: CarlesonEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NxSolution {
    /// Evaluation points `e^{2 pi i k / m}`.
    pub points: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub certificates: NxCertificates,
}

impl NxSolution {
    /// Trigonometric interpolant of the boundary samples.
    pub fn interpolant(&self) -> Result<TrigInterpolant> {
        TrigInterpolant::from_samples(&self.values)
    }
}

/// Settings for [`nx_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NxOptions {
    pub boundary_points: usize,
    pub budget: f64,
    pub arc_level: u32,
    pub n_quad: usize,
}

impl Default for NxOptions {
    fn default() -> Self {
        Self {
            boundary_points: DEFAULT_NX_POINTS,
            budget: DEFAULT_NX_BUDGET,
            arc_level: 6,
            n_quad: 64,
        }
    }
}

/// Bounded solution at `boundary_points` equispaced points of the circle,
/// with its certificates.
pub fn nx_solve(problem: &DbarProblem, grid: &DiskGrid, options: &NxOptions) -> Result<NxSolution> {
    let m = options.boundary_points;
    let solver = NxSolver::new(&problem.modulus, grid, m, options.budget)?;
    let points: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64))
        .collect();
    let values = points
        .iter()
        .map(|&z| solver.eval(z))
        .collect::<Result<Vec<_>>>()?;
    let linf_boundary = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let carleson = box_norm(&problem.lambda(), problem.p, grid, options.arc_level)?;
    let interp = TrigInterpolant::from_samples(&values)?;
    let ext = interp.harmonic_extension();
    let qp = boundary_seminorm(|z| ext.eval(z), problem.p, options.arc_level.min(4), options.n_quad)?;
    let constant = if carleson.value > 0.0 {
        linf_boundary / carleson.value.sqrt()
    } else {
        0.0
    };
    Ok(NxSolution {
        points,
        values,
        certificates: NxCertificates {
            linf_boundary,
            qp_boundary_seminorm: qp.value_sq.sqrt(),
            carleson_input_norm: carleson.value,
            constant,
            carleson,
        },
    })
}

/// Gradient criterion for `v f` with `v` the harmonic extension of the
/// boundary samples and `f` each battery function: finite values are
/// evidence that `v` multiplies Q_p into Q_p of the circle.
pub fn nx_multiplier_evidence(
    solution: &NxSolution,
    battery: &[(String, AnalyticFn)],
    p: f64,
    grid: &DiskGrid,
    max_level: u32,
) -> Result<Vec<(String, f64)>> {
    let v = solution.interpolant()?.harmonic_extension();
    battery
        .iter()
        .map(|(label, f)| {
            let field = v.mul(&SmoothField::from_analytic(f));
            let report = gradient_criterion(&field, p, grid, max_level, FD_STEP)?;
            Ok((label.clone(), report.estimate.value))
        })
        .collect()
}
