//! Constructive solution of the ideal problem `sum f_j g_j = g^3`.
//!
//! Under the size condition `|g|^2 <= S = sum |f_l|^2` the smooth quotients
//! `psi_j = g conj(f_j) / S` satisfy `sum psi_j f_j = g`. Correcting
//! `g^2 psi_j` by solutions of `d/dzbar b_jk = g psi_j d/dzbar psi_k` gives
//! analytic
//!
//! ```text
//! g_j = g^2 psi_j + sum_k (b_jk - b_kj) f_k,
//! ```
//!
//! and the antisymmetric correction drops out of `sum f_j g_j`. Only the
//! differences `a_jk = b_jk - b_kj` (`j < k`) are solved for, with
//! right-hand side `G_jk - G_kj`, `G_jk = g psi_j d/dzbar psi_k`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carleson::{box_norm_from_samples, default_a_samples};
use crate::dbar::{nx_solve, CauchyScheme, CauchySolver, DbarProblem, NxCertificates, NxOptions};
use crate::disk::{sunflower_points, BoundaryGrid, DiskGrid, Quadrature};
use crate::error::{Error, Result};
use crate::funcspace::{wirtinger_stencil, AnalyticFn, SmoothField, Wirtinger};
use crate::par;
use crate::qp::{multiplier_test, qp_norm, standard_battery, MultiplierReport, QpNormReport, TrigInterpolant};
use crate::carleson::MeasureDensity;

/// Sums of squares below this level are treated as common zeros.
pub const DEGENERATE_LEVEL: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Data and solutions in `H^inf` intersected with Q_p.
    #[default]
    BanachAlgebra,
    /// Data and solutions in the multiplier algebra of Q_p.
    Multiplier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Cauchy transform for the corrections.
    #[default]
    Cauchy,
    /// Cauchy transform for the corrections, plus boundary certificates
    /// from the exponential-kernel solver for every pair.
    Nx,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub identity: f64,
    pub analyticity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-4,
            analyticity: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WolffProblem {
    pub p: f64,
    pub f: Vec<AnalyticFn>,
    pub g: AnalyticFn,
    pub mode: Mode,
    pub tolerances: Tolerances,
}

impl WolffProblem {
    pub fn new(p: f64, f: Vec<AnalyticFn>, g: AnalyticFn, mode: Mode) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
        }
        if f.is_empty() {
            return Err(Error::InvalidArgument("at least one generator f_j is required".into()));
        }
        Ok(Self {
            p,
            f,
            g,
            mode,
            tolerances: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    /// Joint scale `c` with `c sup|f_j| <= 1` and `c sup|g| <= 1`, from the
    /// boundary maximum.
    pub fn normalization(&self, boundary: &BoundaryGrid) -> f64 {
        let sup = boundary
            .nodes()
            .iter()
            .flat_map(|&z| self.f.iter().chain(std::iter::once(&self.g)).map(move |h| h.eval(z).norm()))
            .fold(1.0_f64, f64::max);
        1.0 / sup
    }

    fn scaled(&self, c: f64) -> Self {
        let k = Complex64::new(c, 0.0);
        Self {
            p: self.p,
            f: self.f.iter().map(|h| h.scale(k)).collect(),
            g: self.g.scale(k),
            mode: self.mode,
            tolerances: self.tolerances,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub size_ok: bool,
    /// Minimum of `sum |f_l|^2` over the checked points.
    pub min_corona_level: f64,
    pub corona_point: Complex64,
    /// Point maximizing `|g|^2 - sum |f_l|^2`.
    pub worst_point: Complex64,
    pub worst_excess: f64,
    pub degenerate: bool,
    pub points_checked: usize,
}

/// Checks the size condition at every disk and boundary node and at the
/// zeros of the generators in the closed disk.
pub fn validate(problem: &WolffProblem, grid: &DiskGrid, boundary: &BoundaryGrid) -> ValidationReport {
    let mut points: Vec<Complex64> = grid.nodes().iter().chain(boundary.nodes()).copied().collect();
    for f in &problem.f {
        points.extend(f.zeros().into_iter().filter(|z| z.norm() <= 1.0 + 1e-9));
    }
    let levels: Vec<(f64, f64)> = par::map(points.len(), |i| {
        let z = points[i];
        let s: f64 = problem.f.iter().map(|f| f.eval(z).norm_sqr()).sum();
        (s, problem.g.eval(z).norm_sqr() - s)
    });
    let mut min_level = (f64::INFINITY, 0);
    let mut worst = (f64::NEG_INFINITY, 0);
    for (i, &(s, excess)) in levels.iter().enumerate() {
        if s < min_level.0 {
            min_level = (s, i);
        }
        if excess > worst.0 {
            worst = (excess, i);
        }
    }
    let size_ok = levels
        .iter()
        .all(|&(s, excess)| excess <= 1e-12 * s.max(1.0));
    ValidationReport {
        size_ok,
        min_corona_level: min_level.0,
        corona_point: points[min_level.1],
        worst_point: points[worst.1],
        worst_excess: worst.0,
        degenerate: min_level.0 < DEGENERATE_LEVEL,
        points_checked: points.len(),
    }
}

/// `psi_j` and its Wirtinger derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiPoint {
    pub s: f64,
    pub g: Complex64,
    pub dg: Complex64,
    pub f: Vec<Complex64>,
    pub df: Vec<Complex64>,
    pub psi: Vec<Complex64>,
    pub dz: Vec<Complex64>,
    pub dzbar: Vec<Complex64>,
}

impl PsiPoint {
    /// `|grad psi_j|^2 = 2 |d psi_j|^2 + 2 |dbar psi_j|^2`.
    pub fn grad_sq(&self, j: usize) -> f64 {
        2.0 * self.dz[j].norm_sqr() + 2.0 * self.dzbar[j].norm_sqr()
    }

    /// `G_jk = g psi_j dbar psi_k`.
    pub fn g_jk(&self, j: usize, k: usize) -> Complex64 {
        self.g * self.psi[j] * self.dzbar[k]
    }

    pub fn sum_df_sq(&self) -> f64 {
        self.df.iter().map(|d| d.norm_sqr()).sum()
    }
}

/// Closed-form evaluators for `psi_j` and its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSystem {
    f: Vec<AnalyticFn>,
    g: AnalyticFn,
}

impl PsiSystem {
    pub fn new(problem: &WolffProblem) -> Self {
        Self {
            f: problem.f.clone(),
            g: problem.g.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn eval(&self, z: Complex64) -> Result<PsiPoint> {
        let (g, dg) = self.g.eval_with_derivative(z);
        let (f, df): (Vec<Complex64>, Vec<Complex64>) =
            self.f.iter().map(|h| h.eval_with_derivative(z)).unzip();
        let s: f64 = f.iter().map(|v| v.norm_sqr()).sum();
        if !(s >= DEGENERATE_LEVEL) {
            return Err(Error::DegenerateInput { z, level: s });
        }
        // sum f_l conj(f_l') and sum f_l' conj(f_l)
        let cross_bar: Complex64 = f.iter().zip(&df).map(|(a, b)| a * b.conj()).sum();
        let cross: Complex64 = f.iter().zip(&df).map(|(a, b)| b * a.conj()).sum();
        let s2 = s * s;
        let psi = f.iter().map(|fj| g * fj.conj() / s).collect();
        let dzbar = f
            .iter()
            .zip(&df)
            .map(|(fj, dfj)| g * dfj.conj() / s - g * fj.conj() * cross_bar / s2)
            .collect();
        let dz = f
            .iter()
            .map(|fj| dg * fj.conj() / s - g * fj.conj() * cross / s2)
            .collect();
        Ok(PsiPoint {
            s,
            g,
            dg,
            f,
            df,
            psi,
            dz,
            dzbar,
        })
    }

    /// `psi_j` as a field with closed-form Wirtinger derivatives.
    pub fn psi_field(&self, j: usize) -> SmoothField {
        let (a, b, c) = (self.clone(), self.clone(), self.clone());
        SmoothField::new(move |z| a.eval(z).map_or(nan(), |p| p.psi[j])).with_wirtinger(
            move |z| b.eval(z).map_or(nan(), |p| p.dz[j]),
            move |z| c.eval(z).map_or(nan(), |p| p.dzbar[j]),
        )
    }

    /// Right-hand side `G_jk - G_kj` of the equation for `b_jk - b_kj`.
    pub fn pair_rhs(&self, j: usize, k: usize) -> SmoothField {
        let sys = self.clone();
        SmoothField::new(move |z| {
            sys.eval(z)
                .map_or(nan(), |p| p.g_jk(j, k) - p.g_jk(k, j))
        })
    }
}

fn nan() -> Complex64 {
    Complex64::new(f64::NAN, f64::NAN)
}

/// Settings of [`solve_ideal`] and [`verify_solution`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub scheme: CauchyScheme,
    pub arc_level: u32,
    /// Boundary samples for validation, normalization and surrogates.
    pub boundary_samples: usize,
    /// Interior check grid for the identity residual.
    pub check_grid: (usize, usize),
    pub analyticity_points: usize,
    pub analyticity_radius: f64,
    pub fd_step: f64,
    pub nx: NxOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            scheme: CauchyScheme::Corrected,
            arc_level: 9,
            boundary_samples: 256,
            check_grid: (32, 128),
            analyticity_points: 200,
            analyticity_radius: 0.9,
            fd_step: 1e-4,
            nx: NxOptions::default(),
        }
    }
}

/// Certificates of one antisymmetric pair from the exponential-kernel
/// solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCertificate {
    pub j: usize,
    pub k: usize,
    pub certificates: NxCertificates,
}

/// Everything reported about a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub accepted: bool,
    /// Names of the certificates that failed.
    pub failing: Vec<String>,
    pub validation: ValidationReport,
    /// Joint scale applied to the data before solving.
    pub scale: f64,
    pub identity_residual: f64,
    pub analyticity_residual: f64,
    pub sup_norms: Vec<f64>,
    /// Q_p norms of polynomial surrogates of the `g_j` built from boundary
    /// samples.
    pub qp_reports: Vec<QpNormReport>,
    /// Share of boundary energy of each `g_j` in negative frequencies.
    pub surrogate_negative_energy: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input_multiplier_reports: Option<Vec<MultiplierReport>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub multiplier_reports: Option<Vec<MultiplierReport>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nx_certificates: Option<Vec<PairCertificate>>,
}

/// Pointwise access to candidate solutions `g_1..g_n`.
pub trait SolutionEvaluator: Sync {
    fn n(&self) -> usize;
    /// All `g_j(z)` at once.
    fn eval_all(&self, z: Complex64) -> Result<Vec<Complex64>>;
}

struct Pair {
    j: usize,
    k: usize,
    solver: CauchySolver,
}

/// The assembled `g_j` with their report.
pub struct IdealSolution {
    problem: WolffProblem,
    scaled: WolffProblem,
    scale: f64,
    psi: PsiSystem,
    pairs: Vec<Pair>,
    pub report: SolutionReport,
}

impl SolutionEvaluator for IdealSolution {
    fn n(&self) -> usize {
        self.problem.n()
    }

    fn eval_all(&self, z: Complex64) -> Result<Vec<Complex64>> {
        let pt = self.psi.eval(z)?;
        let g2 = pt.g * pt.g;
        let mut out: Vec<Complex64> = pt.psi.iter().map(|p| g2 * p).collect();
        for pair in &self.pairs {
            let a = pair.solver.eval(z)?;
            out[pair.j] += a * pt.f[pair.k];
            out[pair.k] -= a * pt.f[pair.j];
        }
        let inv = 1.0 / (self.scale * self.scale);
        Ok(out.into_iter().map(|v| v * inv).collect())
    }
}

impl IdealSolution {
    pub fn problem(&self) -> &WolffProblem {
        &self.problem
    }

    pub fn eval(&self, j: usize, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_all(z)?[j])
    }

    /// `psi_j` of the normalized problem (equal to that of the original).
    pub fn psi(&self) -> &PsiSystem {
        &self.psi
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The antisymmetric corrections `b_jk - b_kj` at `z`, for `j < k`.
    pub fn corrections(&self, z: Complex64) -> Result<Vec<((usize, usize), Complex64)>> {
        let inv = 1.0 / self.scale;
        self.pairs
            .iter()
            .map(|p| Ok(((p.j, p.k), p.solver.eval(z)? * inv)))
            .collect()
    }

    /// The normalized problem actually solved.
    pub fn normalized_problem(&self) -> &WolffProblem {
        &self.scaled
    }
}

/// Builds the `g_j` and checks them.
pub fn solve_ideal(
    problem: &WolffProblem,
    solver: SolverKind,
    grid: &DiskGrid,
    options: &SolveOptions,
) -> Result<IdealSolution> {
    let boundary = BoundaryGrid::new(options.boundary_samples)?;
    let validation = validate(problem, grid, &boundary);
    if !validation.size_ok {
        let z = validation.worst_point;
        let corona: f64 = problem.f.iter().map(|f| f.eval(z).norm_sqr()).sum();
        return Err(Error::SizeCondition {
            z,
            g_sq: problem.g.eval(z).norm_sqr(),
            corona,
        });
    }
    if validation.degenerate {
        return Err(Error::DegenerateInput {
            z: validation.corona_point,
            level: validation.min_corona_level,
        });
    }
    let scale = problem.normalization(&boundary);
    let scaled = problem.scaled(scale);
    let psi = PsiSystem::new(&scaled);
    let n = problem.n();

    let index: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| ((j + 1)..n).map(move |k| (j, k)))
        .collect();
    let pairs = index
        .iter()
        .map(|&(j, k)| {
            Ok(Pair {
                j,
                k,
                solver: CauchySolver::new(&psi.pair_rhs(j, k), grid, options.scheme)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let nx_certificates = match solver {
        SolverKind::Cauchy => None,
        SolverKind::Nx => Some(
            index
                .iter()
                .map(|&(j, k)| {
                    let rhs = psi.pair_rhs(j, k);
                    let r = rhs.clone();
                    let problem = DbarProblem {
                        rhs,
                        modulus: MeasureDensity::new(move |z| r.eval(z).norm()),
                        p: scaled.p,
                    };
                    Ok(PairCertificate {
                        j,
                        k,
                        certificates: nx_solve(&problem, grid, &options.nx)?.certificates,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };

    let mut solution = IdealSolution {
        problem: problem.clone(),
        scaled,
        scale,
        psi,
        pairs,
        report: SolutionReport {
            accepted: false,
            failing: Vec::new(),
            validation,
            scale,
            identity_residual: 0.0,
            analyticity_residual: 0.0,
            sup_norms: Vec::new(),
            qp_reports: Vec::new(),
            surrogate_negative_energy: Vec::new(),
            input_multiplier_reports: None,
            multiplier_reports: None,
            nx_certificates,
        },
    };

    let (check_r, check_a) = options.check_grid;
    let check_grid = DiskGrid::new(check_r, check_a, grid.grading())?;
    let mut check_points: Vec<Complex64> = check_grid.nodes().to_vec();
    check_points.extend(boundary.nodes());
    let (identity_residual, sup_norms) = identity_and_sup(problem, &solution, &check_points)?;
    let analyticity_points = sunflower_points(options.analyticity_points, options.analyticity_radius);
    let analyticity_residual = analyticity(&solution, &analyticity_points, options.fd_step)?;

    // Polynomial surrogates from boundary samples.
    let samples = par::map(boundary.len(), |i| solution.eval_all(boundary.nodes()[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut surrogates = Vec::with_capacity(n);
    let mut negative = Vec::with_capacity(n);
    for j in 0..n {
        let values: Vec<Complex64> = samples.iter().map(|v| v[j]).collect();
        let interp = TrigInterpolant::from_samples(&values)?;
        let total = interp.total_energy();
        negative.push(if total > 0.0 {
            interp.negative_energy() / total
        } else {
            0.0
        });
        surrogates.push(interp.analytic_part()?);
    }
    let a_samples = default_a_samples();
    let qp_reports = surrogates
        .iter()
        .map(|s| qp_norm(s, problem.p, grid, &boundary, &a_samples))
        .collect::<Result<Vec<_>>>()?;

    let mut failing = Vec::new();
    if !(identity_residual <= problem.tolerances.identity) {
        failing.push("identity".to_string());
    }
    if !(analyticity_residual <= problem.tolerances.analyticity) {
        failing.push("analyticity".to_string());
    }

    if problem.mode == Mode::Multiplier {
        let battery = multiplier_battery(problem);
        let level = options.arc_level;
        let inputs = problem
            .f
            .iter()
            .chain(std::iter::once(&problem.g))
            .map(|h| multiplier_test(h, problem.p, &battery, grid, &boundary, level))
            .collect::<Result<Vec<_>>>()?;
        let outputs = surrogates
            .iter()
            .map(|h| multiplier_test(h, problem.p, &battery, grid, &boundary, level))
            .collect::<Result<Vec<_>>>()?;
        if !inputs.iter().all(|r| r.is_multiplier_evidence) {
            failing.push("input_multiplier".to_string());
        }
        if !outputs.iter().all(|r| r.is_multiplier_evidence) {
            failing.push("multiplier".to_string());
        }
        solution.report.input_multiplier_reports = Some(inputs);
        solution.report.multiplier_reports = Some(outputs);
    }

    let report = &mut solution.report;
    report.identity_residual = identity_residual;
    report.analyticity_residual = analyticity_residual;
    report.sup_norms = sup_norms;
    report.qp_reports = qp_reports;
    report.surrogate_negative_energy = negative;
    report.accepted = failing.is_empty();
    report.failing = failing;
    Ok(solution)
}

/// Standard battery plus the problem's own generators and `g`.
pub fn multiplier_battery(problem: &WolffProblem) -> Vec<(String, AnalyticFn)> {
    let mut battery = standard_battery();
    for (j, f) in problem.f.iter().enumerate() {
        battery.push((format!("f_{}", j + 1), f.clone()));
    }
    battery.push(("g".into(), problem.g.clone()));
    battery
}

fn identity_and_sup<S: SolutionEvaluator + ?Sized>(
    problem: &WolffProblem,
    solution: &S,
    points: &[Complex64],
) -> Result<(f64, Vec<f64>)> {
    let rows = par::map(points.len(), |i| -> Result<(f64, Vec<f64>)> {
        let z = points[i];
        let values = solution.eval_all(z)?;
        let lhs: Complex64 = problem
            .f
            .iter()
            .zip(&values)
            .map(|(f, gj)| f.eval(z) * gj)
            .sum();
        let g = problem.g.eval(z);
        Ok(((lhs - g * g * g).norm(), values.iter().map(|v| v.norm()).collect()))
    });
    let mut residual = 0.0_f64;
    let mut sup = vec![0.0_f64; solution.n()];
    for row in rows {
        let (r, mags) = row?;
        residual = residual.max(r);
        for (s, m) in sup.iter_mut().zip(mags) {
            *s = s.max(m);
        }
    }
    Ok((residual, sup))
}

fn analyticity<S: SolutionEvaluator + ?Sized>(solution: &S, points: &[Complex64], h: f64) -> Result<f64> {
    if let Some(&z) = points.iter().find(|z| !(1.0 - z.norm() > 2.0 * h)) {
        return Err(Error::StepTooLarge { z, h });
    }
    let rows = par::map(points.len(), |i| -> Result<f64> {
        let z = points[i];
        let stencil = [
            z + h,
            z - h,
            z + Complex64::new(0.0, h),
            z - Complex64::new(0.0, h),
        ];
        let vals = stencil
            .iter()
            .map(|&s| solution.eval_all(s))
            .collect::<Result<Vec<_>>>()?;
        let i_unit = Complex64::new(0.0, 1.0);
        Ok((0..solution.n())
            .map(|j| {
                ((vals[0][j] - vals[1][j]) + i_unit * (vals[2][j] - vals[3][j])).norm() / (4.0 * h)
            })
            .fold(0.0, f64::max))
    });
    let mut worst = 0.0_f64;
    for r in rows {
        worst = worst.max(r?);
    }
    Ok(worst)
}

/// Box norms and pointwise constants of the gradient estimates for one
/// `psi_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityBounds {
    pub j: usize,
    /// Box norm of `|g^2 grad psi_j|^2 (1 - |z|^2)^p`.
    pub g2_grad_psi: f64,
    /// Box norm of `|grad(g^2 psi_j)|^2 (1 - |z|^2)^p`.
    pub grad_g2_psi: f64,
    /// `max |g^2 grad psi_j|^2 / (|g'|^2 + sum |f_l'|^2)` over the nodes.
    pub pointwise_k: f64,
}

/// Observed constants of the pointwise Wirtinger bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WirtingerBounds {
    /// `max |dbar psi_j|^2 S / sum |f_l'|^2`.
    pub k1: f64,
    /// `max |grad psi_j|^2 S / (|g'|^2 + sum |f_l'|^2)`.
    pub k2: f64,
    /// `max |G_jk|^2 / sum |f_l'|^2`.
    pub k_g: f64,
}

/// The three box estimates of the multiplier case for one `psi_j`, each
/// maximized over the battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierEstimates {
    pub j: usize,
    /// `|g^2 psi_j grad f|^2 (1 - |z|^2)^p`.
    pub g2_psi_grad_f: f64,
    /// `|f psi_j grad g^2|^2 (1 - |z|^2)^p`.
    pub f_psi_grad_g2: f64,
    /// `|f g^2 grad psi_j|^2 (1 - |z|^2)^p`.
    pub f_g2_grad_psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub accepted: bool,
    pub failing: Vec<String>,
    pub identity_residual: f64,
    pub analyticity_residual: f64,
    pub points_checked: usize,
    pub density_bounds: Vec<DensityBounds>,
    pub wirtinger_bounds: WirtingerBounds,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub multiplier_estimates: Option<Vec<MultiplierEstimates>>,
}

/// Re-checks a candidate solution on point sets disjoint from those used by
/// [`solve_ideal`], and evaluates the gradient estimates behind the
/// construction.
pub fn verify_solution<S: SolutionEvaluator + ?Sized>(
    problem: &WolffProblem,
    solution: &S,
    grid: &DiskGrid,
    options: &SolveOptions,
) -> Result<CertificationReport> {
    if solution.n() != problem.n() {
        return Err(Error::InvalidArgument(format!(
            "solution has {} components for {} generators",
            solution.n(),
            problem.n()
        )));
    }
    // four times as many interior points as the solve-time check grid
    let (check_r, check_a) = options.check_grid;
    let count = 4 * check_r * check_a;
    let m = options.boundary_samples;
    let mut points: Vec<Complex64> = sunflower_points(count, 0.999)
        .into_iter()
        .map(|z| z * Complex64::from_polar(1.0, 0.5))
        .collect();
    points.extend((0..m).map(|k| Complex64::from_polar(1.0, TAU * (k as f64 + 0.5) / m as f64)));
    let (identity_residual, _) = identity_and_sup(problem, solution, &points)?;
    let analyticity_points: Vec<Complex64> =
        sunflower_points(options.analyticity_points, options.analyticity_radius * 0.97)
            .into_iter()
            .map(|z| z * Complex64::from_polar(1.0, 1.0))
            .collect();
    let analyticity_residual = analyticity(solution, &analyticity_points, options.fd_step)?;

    let psi = PsiSystem::new(problem);
    let nodes = grid.nodes();
    let n = problem.n();
    let p = problem.p;
    let level = options.arc_level;
    let at_nodes = par::map(nodes.len(), |i| psi.eval(nodes[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let weight: Vec<f64> = nodes.iter().map(|z| (1.0 - z.norm_sqr()).powf(p)).collect();

    let mut density_bounds = Vec::with_capacity(n);
    for j in 0..n {
        let g2_grad: Vec<f64> = at_nodes
            .iter()
            .map(|pt| (pt.g * pt.g).norm_sqr() * pt.grad_sq(j))
            .collect();
        let a: Vec<f64> = g2_grad.iter().zip(&weight).map(|(d, w)| d * w).collect();
        let b: Vec<f64> = at_nodes
            .iter()
            .zip(&weight)
            .map(|(pt, w)| {
                let d = 2.0 * pt.g * pt.dg * pt.psi[j] + pt.g * pt.g * pt.dz[j];
                let dbar = pt.g * pt.g * pt.dzbar[j];
                (2.0 * d.norm_sqr() + 2.0 * dbar.norm_sqr()) * w
            })
            .collect();
        let pointwise_k = at_nodes
            .iter()
            .zip(&g2_grad)
            .map(|(pt, &num)| ratio(num, pt.dg.norm_sqr() + pt.sum_df_sq()))
            .fold(0.0, f64::max);
        density_bounds.push(DensityBounds {
            j,
            g2_grad_psi: box_norm_from_samples(&a, p, grid, level)?.value,
            grad_g2_psi: box_norm_from_samples(&b, p, grid, level)?.value,
            pointwise_k,
        });
    }

    let mut bounds = WirtingerBounds {
        k1: 0.0,
        k2: 0.0,
        k_g: 0.0,
    };
    for pt in &at_nodes {
        let df = pt.sum_df_sq();
        for j in 0..n {
            bounds.k1 = bounds.k1.max(ratio(pt.dzbar[j].norm_sqr() * pt.s, df));
            bounds.k2 = bounds.k2.max(ratio(pt.grad_sq(j) * pt.s, pt.dg.norm_sqr() + df));
            for k in 0..n {
                bounds.k_g = bounds.k_g.max(ratio(pt.g_jk(j, k).norm_sqr(), df));
            }
        }
    }

    let multiplier_estimates = if problem.mode == Mode::Multiplier {
        let battery = multiplier_battery(problem);
        let fvals: Vec<Vec<(Complex64, Complex64)>> = battery
            .iter()
            .map(|(_, f)| nodes.iter().map(|&z| f.eval_with_derivative(z)).collect())
            .collect();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let mut est = MultiplierEstimates {
                j,
                g2_psi_grad_f: 0.0,
                f_psi_grad_g2: 0.0,
                f_g2_grad_psi: 0.0,
            };
            for fv in &fvals {
                let mut e1 = Vec::with_capacity(nodes.len());
                let mut e2 = Vec::with_capacity(nodes.len());
                let mut e3 = Vec::with_capacity(nodes.len());
                for ((pt, &(f, df)), w) in at_nodes.iter().zip(fv).zip(&weight) {
                    let g2 = pt.g * pt.g;
                    // analytic h has |grad h|^2 = 2 |h'|^2
                    e1.push((g2 * pt.psi[j]).norm_sqr() * 2.0 * df.norm_sqr() * w);
                    e2.push((f * pt.psi[j]).norm_sqr() * 2.0 * (2.0 * pt.g * pt.dg).norm_sqr() * w);
                    e3.push((f * g2).norm_sqr() * pt.grad_sq(j) * w);
                }
                est.g2_psi_grad_f = est.g2_psi_grad_f.max(box_norm_from_samples(&e1, p, grid, level)?.value);
                est.f_psi_grad_g2 = est.f_psi_grad_g2.max(box_norm_from_samples(&e2, p, grid, level)?.value);
                est.f_g2_grad_psi = est.f_g2_grad_psi.max(box_norm_from_samples(&e3, p, grid, level)?.value);
            }
            out.push(est);
        }
        Some(out)
    } else {
        None
    };

    let mut failing = Vec::new();
    if !(identity_residual <= problem.tolerances.identity) {
        failing.push("identity".to_string());
    }
    if !(analyticity_residual <= problem.tolerances.analyticity) {
        failing.push("analyticity".to_string());
    }
    let finite = density_bounds
        .iter()
        .all(|d| d.g2_grad_psi.is_finite() && d.grad_g2_psi.is_finite() && d.pointwise_k.is_finite());
    if !finite {
        failing.push("density_bounds".to_string());
    }
    if let Some(est) = &multiplier_estimates {
        let finite = est
            .iter()
            .all(|e| e.g2_psi_grad_f.is_finite() && e.f_psi_grad_g2.is_finite() && e.f_g2_grad_psi.is_finite());
        if !finite {
            failing.push("multiplier_estimates".to_string());
        }
    }
    Ok(CertificationReport {
        accepted: failing.is_empty(),
        failing,
        identity_residual,
        analyticity_residual,
        points_checked: points.len() + analyticity_points.len(),
        density_bounds,
        wirtinger_bounds: bounds,
        multiplier_estimates,
    })
}

/// `num / den`, with `0 / 0` read as 0.
fn ratio(num: f64, den: f64) -> f64 {
    if num <= 1e-300 {
        0.0
    } else {
        num / den
    }
}

/// `d/dzbar` of `g^2 psi_j + sum_k (b_jk - b_kj) f_k` with every `dbar b`
/// replaced by its exact right-hand side. Vanishes identically.
pub fn symbolic_dbar_gj(pt: &PsiPoint, j: usize) -> Complex64 {
    let n = pt.psi.len();
    let mut total = pt.g * pt.g * pt.dzbar[j];
    for k in 0..n {
        total += (pt.g_jk(j, k) - pt.g_jk(k, j)) * pt.f[k];
    }
    total
}

/// Finite-difference `d/dzbar psi_j`, for checking the closed forms.
pub fn psi_dzbar_fd(psi: &PsiSystem, j: usize, z: Complex64, h: f64) -> Complex64 {
    let f = |w: Complex64| psi.eval(w).map_or(ZERO, |p| p.psi[j]);
    wirtinger_stencil(&f, z, h, Wirtinger::Dzbar)
}
