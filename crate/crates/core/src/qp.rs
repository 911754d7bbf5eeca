//! Q_p norms on the disk and on the circle, the gradient criterion for
//! boundary membership, and finite-battery multiplier evidence.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carleson::{box_norm_from_samples, CarlesonEstimate, MeasureDensity};
use crate::disk::{dyadic_arcs, Arc, BoundaryGrid, DiskGrid, MoebiusMap, Quadrature};
use crate::error::{Error, Result};
use crate::funcspace::{AnalyticFn, SmoothField};
use crate::par;

/// Smallest tensor rule for the boundary double integral: the excluded
/// diagonal cells then hold at most 10% of the square.
pub const MIN_BOUNDARY_QUAD: usize = 10;

/// Share of weighted mass that may be dropped near the circle before a
/// coverage warning is raised.
pub const COVERAGE_WARNING: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpNormReport {
    /// `int |f|^2 dsigma`.
    pub boundary_l2: f64,
    /// `max_a int |f'|^2 (1 - |phi_a|^2)^p dA` over the sampled centres.
    pub seminorm_sq: f64,
    pub norm: f64,
    pub attaining_a: Complex64,
}

/// Q_p norm of `f`, with the supremum over Moebius centres replaced by a
/// maximum over `a_samples`.
pub fn qp_norm(
    f: &AnalyticFn,
    p: f64,
    grid: &DiskGrid,
    boundary: &BoundaryGrid,
    a_samples: &[Complex64],
) -> Result<QpNormReport> {
    check_open_exponent(p)?;
    let maps = a_samples
        .iter()
        .map(|&a| MoebiusMap::new(a))
        .collect::<Result<Vec<_>>>()?;
    if maps.is_empty() {
        return Err(Error::InvalidArgument("no Moebius centres given".into()));
    }
    let boundary_l2 = boundary
        .nodes()
        .iter()
        .zip(boundary.weights())
        .map(|(&z, w)| f.eval(z).norm_sqr() * w)
        .sum::<f64>();

    let nodes = grid.nodes();
    let weights = grid.weights();
    let grad: Vec<f64> = par::map(nodes.len(), |i| {
        f.eval_with_derivative(nodes[i]).1.norm_sqr() * weights[i]
    });
    let values: Vec<f64> = maps
        .iter()
        .map(|phi| {
            par::sum_f64(nodes.len(), |i| {
                if grad[i] == 0.0 {
                    return 0.0;
                }
                let w = phi.eval(nodes[i]);
                grad[i] * (1.0 - w.norm_sqr()).max(0.0).powf(p)
            })
        })
        .collect();
    let (best, seminorm_sq) = par::argmax(&values).expect("non-empty");
    Ok(QpNormReport {
        boundary_l2,
        seminorm_sq,
        norm: (boundary_l2 + seminorm_sq).sqrt(),
        attaining_a: maps[best].center(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySeminormReport {
    /// `max_I |I|^-p int_I int_I |f(xi) - f(eta)|^2 / |xi - eta|^(2-p) |dxi| |deta|`.
    pub value_sq: f64,
    pub boundary_l2: f64,
    pub witness_arc: Arc,
    pub arc_level: u32,
    pub n_quad: usize,
}

/// Boundary double-integral seminorm over the dyadic arc family.
///
/// Each arc carries an `n_quad`-point midpoint rule in arc length (radians);
/// the diagonal cells, where the kernel is singular, are skipped.
pub fn boundary_seminorm<F>(
    f_boundary: F,
    p: f64,
    arc_level: u32,
    n_quad: usize,
) -> Result<BoundarySeminormReport>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    check_open_exponent(p)?;
    if n_quad < MIN_BOUNDARY_QUAD {
        return Err(Error::InvalidArgument(format!(
            "n_quad = {n_quad} leaves less than 90% of each arc square after removing the diagonal; need >= {MIN_BOUNDARY_QUAD}"
        )));
    }
    let boundary_l2 = (0..n_quad)
        .map(|k| {
            f_boundary(Complex64::from_polar(1.0, TAU * (k as f64 + 0.5) / n_quad as f64))
                .norm_sqr()
        })
        .sum::<f64>()
        / n_quad as f64;

    let arcs = dyadic_arcs(arc_level);
    let values: Vec<f64> = par::map(arcs.len(), |a| {
        let arc = arcs[a];
        let step = arc.width() / n_quad as f64;
        let points: Vec<Complex64> = (0..n_quad)
            .map(|k| Complex64::from_polar(1.0, arc.start_angle() + (k as f64 + 0.5) * step))
            .collect();
        let values: Vec<Complex64> = points.iter().map(|&z| f_boundary(z)).collect();
        let mut total = 0.0;
        for i in 0..n_quad {
            for j in (i + 1)..n_quad {
                let num = (values[i] - values[j]).norm_sqr();
                if num > 0.0 {
                    total += num / (points[i] - points[j]).norm().powf(2.0 - p);
                }
            }
        }
        2.0 * total * step * step / arc.length.powf(p)
    });
    let (best, value_sq) = par::argmax(&values).expect("the full arc is always present");
    Ok(BoundarySeminormReport {
        value_sq,
        boundary_l2,
        witness_arc: arcs[best],
        arc_level,
        n_quad,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCriterionReport {
    pub estimate: CarlesonEstimate,
    pub excluded_nodes: usize,
    /// Share of `(1 - |z|^2)^p dA` mass on the excluded nodes.
    pub excluded_mass_fraction: f64,
    pub coverage_warning: bool,
}

/// Box norm of `|grad F|^2 (1 - |z|^2)^p dA`. A finite value certifies that
/// the boundary values of `F` belong to Q_p of the circle.
///
/// Fields without closed-form derivatives are differentiated with step `h`;
/// nodes within `2h` of the circle are then excluded and their share of the
/// weighted area is reported.
pub fn gradient_criterion(
    extension: &SmoothField,
    p: f64,
    grid: &DiskGrid,
    max_level: u32,
    h: f64,
) -> Result<GradientCriterionReport> {
    check_open_exponent(p)?;
    let nodes = grid.nodes();
    let weights = grid.weights();
    let closed = extension.has_closed_form_derivatives();
    let excluded: Vec<bool> = nodes
        .iter()
        .map(|z| !closed && !(1.0 - z.norm() > 2.0 * h))
        .collect();
    let samples = par::map(nodes.len(), |i| {
        if excluded[i] {
            Ok(0.0)
        } else {
            let z = nodes[i];
            let g = extension.grad_sq(z, h)?;
            Ok(g * (1.0 - z.norm_sqr()).powf(p))
        }
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let weight = |i: usize| (1.0 - nodes[i].norm_sqr()).powf(p) * weights[i];
    let total = par::sum_f64(nodes.len(), weight);
    let dropped = par::sum_f64(nodes.len(), |i| if excluded[i] { weight(i) } else { 0.0 });
    let excluded_mass_fraction = dropped / total;
    Ok(GradientCriterionReport {
        estimate: box_norm_from_samples(&samples, p, grid, max_level)?,
        excluded_nodes: excluded.iter().filter(|&&e| e).count(),
        excluded_mass_fraction,
        coverage_warning: excluded_mass_fraction > COVERAGE_WARNING,
    })
}

/// Trigonometric interpolant of equispaced boundary samples at angles
/// `2 pi k / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigInterpolant {
    /// Coefficients of `e^{int}` for `n = 0..=m/2`.
    positive: Vec<Complex64>,
    /// Coefficients of `e^{-int}` for `n = 1..=m/2` (index `n - 1`).
    negative: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn from_samples(values: &[Complex64]) -> Result<Self> {
        let m = values.len();
        if m < 4 {
            return Err(Error::InvalidArgument(format!(
                "need at least 4 boundary samples, got {m}"
            )));
        }
        let coeff = |n: i64| -> Complex64 {
            values
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -TAU * (n * k as i64) as f64 / m as f64))
                .sum::<Complex64>()
                / m as f64
        };
        let half = m / 2;
        let mut positive: Vec<Complex64> = (0..=half).map(|n| coeff(n as i64)).collect();
        let mut negative: Vec<Complex64> = (1..=half).map(|n| coeff(-(n as i64))).collect();
        if m.is_multiple_of(2) {
            // The Nyquist mode is shared evenly between +m/2 and -m/2.
            positive[half] *= 0.5;
            negative[half - 1] *= 0.5;
        }
        Ok(Self { positive, negative })
    }

    /// Samples `f` at `m` equispaced points and interpolates.
    pub fn sample<F>(f: F, m: usize) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let values: Vec<Complex64> = (0..m)
            .map(|k| f(Complex64::from_polar(1.0, TAU * k as f64 / m as f64)))
            .collect();
        Self::from_samples(&values)
    }

    /// Energy `sum |c_n|^2` in the negative frequencies.
    pub fn negative_energy(&self) -> f64 {
        self.negative.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.positive.iter().map(|c| c.norm_sqr()).sum::<f64>() + self.negative_energy()
    }

    /// The analytic part `sum_{n >= 0} c_n z^n` as a polynomial.
    pub fn analytic_part(&self) -> Result<AnalyticFn> {
        AnalyticFn::poly(self.positive.clone())
    }

    /// Harmonic extension `sum c_n z^n + sum c_{-n} conj(z)^n`, which is the
    /// Poisson integral of the interpolant, with closed-form derivatives.
    pub fn harmonic_extension(&self) -> SmoothField {
        let (pos, neg) = (self.positive.clone(), self.negative.clone());
        let value = move |z: Complex64| horner(&pos, z) + z.conj() * horner(&neg, z.conj());
        let pos_d: Vec<Complex64> = self
            .positive
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c * n as f64)
            .collect();
        let neg_d: Vec<Complex64> = self
            .negative
            .iter()
            .enumerate()
            .map(|(n, c)| c * (n + 1) as f64)
            .collect();
        SmoothField::new(value).with_wirtinger(
            move |z| horner(&pos_d, z),
            move |z| horner(&neg_d, z.conj()),
        )
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Poisson integral of a boundary function from `m` equispaced samples.
///
/// The extension is the Poisson integral of the trigonometric interpolant of
/// the samples. Away from the circle it agrees with direct quadrature of the
/// Poisson kernel ([`poisson_kernel_sum`]); near the circle it stays smooth,
/// where the kernel sum would alias.
pub fn poisson_extension<F>(f_boundary: F, m: usize) -> Result<SmoothField>
where
    F: Fn(Complex64) -> Complex64,
{
    Ok(TrigInterpolant::sample(f_boundary, m)?.harmonic_extension())
}

/// Direct quadrature `sum_k (1/m) (1 - |z|^2) / |zeta_k - z|^2 f(zeta_k)`.
pub fn poisson_kernel_sum(samples: &[Complex64], z: Complex64) -> Complex64 {
    let m = samples.len();
    let t = 1.0 - z.norm_sqr();
    samples
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let zeta = Complex64::from_polar(1.0, TAU * k as f64 / m as f64);
            v * (t / (zeta - z).norm_sqr())
        })
        .sum::<Complex64>()
        / m as f64
}

/// Canonical probe functions: `1, z, z^2`, the Blaschke factor with zero
/// `1/2`, and `(2 + z)/3`.
pub fn standard_battery() -> Vec<(String, AnalyticFn)> {
    let c = |re: f64| Complex64::new(re, 0.0);
    vec![
        ("1".into(), AnalyticFn::constant(c(1.0))),
        ("z".into(), AnalyticFn::identity()),
        (
            "z^2".into(),
            AnalyticFn::poly(vec![c(0.0), c(0.0), c(1.0)]).expect("degree 2"),
        ),
        (
            "blaschke(0.5)".into(),
            AnalyticFn::blaschke(&[c(0.5)]).expect("zero inside the disk"),
        ),
        (
            "(2+z)/3".into(),
            AnalyticFn::poly(vec![c(2.0 / 3.0), c(1.0 / 3.0)]).expect("degree 1"),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryEntry {
    pub label: String,
    pub constant: f64,
    /// Same box norm two arc levels coarser.
    pub coarse_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    /// Finite-battery evidence only; never a membership proof.
    pub is_multiplier_evidence: bool,
    pub worst_constant: f64,
    pub sup_norm: f64,
    /// Largest ratio of a battery constant to its value two arc levels
    /// coarser. Values near 1 indicate saturation under refinement.
    pub growth: f64,
    pub battery: Vec<BatteryEntry>,
}

/// Multiplier growth above this ratio per two arc levels is read as
/// blow-up.
pub const MAX_MULTIPLIER_GROWTH: f64 = 2.0;

/// Evidence that `g` multiplies Q_p into itself: `g` is bounded, and for
/// every battery function `f` the measure `|f|^2 |g'|^2 (1 - |z|^2)^p dA` has
/// a p-Carleson box norm that stays put under arc refinement.
pub fn multiplier_test(
    g: &AnalyticFn,
    p: f64,
    battery: &[(String, AnalyticFn)],
    grid: &DiskGrid,
    boundary: &BoundaryGrid,
    max_level: u32,
) -> Result<MultiplierReport> {
    check_open_exponent(p)?;
    if battery.is_empty() {
        return Err(Error::InvalidArgument("multiplier battery is empty".into()));
    }
    if max_level < 2 {
        return Err(Error::InvalidArgument(
            "multiplier test compares arc levels L and L - 2; need L >= 2".into(),
        ));
    }
    let nodes = grid.nodes();
    let sup_norm = nodes
        .iter()
        .chain(boundary.nodes())
        .map(|&z| g.eval(z).norm())
        .fold(0.0_f64, f64::max);
    let dg: Vec<f64> = par::map(nodes.len(), |i| {
        let z = nodes[i];
        g.eval_with_derivative(z).1.norm_sqr() * (1.0 - z.norm_sqr()).powf(p)
    });

    let mut entries = Vec::with_capacity(battery.len());
    for (label, f) in battery {
        let samples: Vec<f64> = par::map(nodes.len(), |i| f.eval(nodes[i]).norm_sqr() * dg[i]);
        let constant = box_norm_from_samples(&samples, p, grid, max_level)?.value;
        let coarse_constant = box_norm_from_samples(&samples, p, grid, max_level - 2)?.value;
        entries.push(BatteryEntry {
            label: label.clone(),
            constant,
            coarse_constant,
        });
    }
    let worst_constant = entries.iter().map(|e| e.constant).fold(0.0, f64::max);
    let growth = entries
        .iter()
        .map(|e| {
            if e.constant == 0.0 {
                1.0
            } else {
                e.constant / e.coarse_constant
            }
        })
        .fold(1.0, f64::max);
    Ok(MultiplierReport {
        is_multiplier_evidence: sup_norm.is_finite()
            && worst_constant.is_finite()
            && growth <= MAX_MULTIPLIER_GROWTH,
        worst_constant,
        sup_norm,
        growth,
        battery: entries,
    })
}

/// Density `|f'|^2 (1 - |z|^2)^p` of the measure attached to `f`.
pub fn derivative_density(f: &AnalyticFn, p: f64) -> MeasureDensity {
    let f = f.clone();
    MeasureDensity::new(move |z| {
        f.eval_with_derivative(z).1.norm_sqr() * (1.0 - z.norm_sqr()).max(0.0).powf(p)
    })
}

fn check_open_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p must lie in (0, 1), got {p}")))
    }
}
