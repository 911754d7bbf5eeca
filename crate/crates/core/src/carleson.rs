//! p-Carleson measures `dmu = h dA`: the box norm over Carleson squares, its
//! Moebius-invariant equivalent, and the weighted kernel integral used to
//! compare them.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc as Shared;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disk::{arcs_at_level, Arc, DiskGrid, Quadrature};
use crate::error::{Error, Result};
use crate::par;

/// Minimum number of node rings that must fall inside the thinnest box.
pub const MIN_RINGS_PER_BOX: usize = 4;

pub const DEFAULT_ARC_LEVEL: u32 = 10;

/// Nonnegative density `h` of a measure `dmu = h dA`.
#[derive(Clone)]
pub struct MeasureDensity {
    eval: Shared<dyn Fn(Complex64) -> f64 + Send + Sync>,
}

impl fmt::Debug for MeasureDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MeasureDensity")
    }
}

impl MeasureDensity {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        Self { eval: Shared::new(f) }
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c)
    }

    /// `h(z) (1 - |z|^2)^p`.
    pub fn weighted(&self, p: f64) -> Self {
        let h = self.eval.clone();
        Self::new(move |z| h(z) * (1.0 - z.norm_sqr()).max(0.0).powf(p))
    }

    /// Pointwise square `h(z)^2`.
    pub fn squared(&self) -> Self {
        let h = self.eval.clone();
        Self::new(move |z| {
            let v = h(z);
            v * v
        })
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        (self.eval)(z)
    }

    /// Values at every grid node; negative or non-finite values are errors.
    pub fn sample(&self, grid: &DiskGrid) -> Result<Vec<f64>> {
        let nodes = grid.nodes();
        let values = par::map(nodes.len(), |i| self.eval(nodes[i]));
        check_samples(nodes, &values)?;
        Ok(values)
    }
}

fn check_samples(nodes: &[Complex64], values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        Some(i) => Err(Error::NegativeDensity {
            z: nodes[i],
            value: values[i],
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Box,
    Invariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_radial: usize,
    pub n_angular: usize,
    pub grading: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub arc_level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_samples: Option<usize>,
}

impl Resolution {
    fn of(grid: &DiskGrid) -> Self {
        Self {
            n_radial: grid.n_radial(),
            n_angular: grid.n_angular(),
            grading: grid.grading(),
            arc_level: None,
            a_samples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Arc(Arc),
    Point(Complex64),
}

/// A lower bound for a Carleson-type supremum, with the candidate that
/// attained it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub resolution: Resolution,
    pub witness: Witness,
}

/// Checks that boxes over arcs of level `max_level` resolve on the grid.
pub fn check_box_resolution(grid: &DiskGrid, max_level: u32) -> Result<()> {
    let length = 0.5f64.powi(max_level as i32);
    let rings = grid.rings_in_band(length);
    if rings < MIN_RINGS_PER_BOX {
        return Err(Error::Resolution {
            level: max_level,
            radial_levels: rings,
            required: MIN_RINGS_PER_BOX,
        });
    }
    if (grid.n_angular() as f64) * length < 1.0 {
        return Err(Error::DegenerateGrid(format!(
            "arcs at level {max_level} are narrower than one of the {} angular sectors",
            grid.n_angular()
        )));
    }
    Ok(())
}

/// Finest arc level, at most [`DEFAULT_ARC_LEVEL`], whose boxes resolve on
/// the grid.
pub fn max_arc_level(grid: &DiskGrid) -> u32 {
    (0..=DEFAULT_ARC_LEVEL)
        .rev()
        .find(|&l| check_box_resolution(grid, l).is_ok())
        .unwrap_or(0)
}

/// `max_I mu(S(I)) / |I|^p` over the dyadic and half-shifted arcs up to
/// `max_level`. Box mass is the weight of the nodes inside the box.
pub fn box_norm(
    density: &MeasureDensity,
    p: f64,
    grid: &DiskGrid,
    max_level: u32,
) -> Result<CarlesonEstimate> {
    check_exponent(p)?;
    check_box_resolution(grid, max_level)?;
    let samples = density.sample(grid)?;
    box_norm_from_samples(&samples, p, grid, max_level)
}

/// [`box_norm`] for density values already sampled at the grid nodes.
pub fn box_norm_from_samples(
    samples: &[f64],
    p: f64,
    grid: &DiskGrid,
    max_level: u32,
) -> Result<CarlesonEstimate> {
    check_exponent(p)?;
    check_box_resolution(grid, max_level)?;
    if samples.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "{} density samples for a grid of {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    check_samples(grid.nodes(), samples)?;

    // tail[i][k]: mass of sector k on rings i.. outward.
    let (nr, na) = (grid.n_radial(), grid.n_angular());
    let weights = grid.weights();
    let mut tail = vec![0.0; (nr + 1) * na];
    for i in (0..nr).rev() {
        for k in 0..na {
            let idx = grid.index(i, k);
            tail[i * na + k] = tail[(i + 1) * na + k] + samples[idx] * weights[idx];
        }
    }

    let mut arcs = Vec::new();
    let mut ratios = Vec::new();
    for level in 0..=max_level {
        let level_arcs = if level == 0 {
            vec![Arc::full()]
        } else {
            arcs_at_level(level)
        };
        let length = 0.5f64.powi(level as i32);
        let first_ring = nr - grid.rings_in_band(length);
        let row = &tail[first_ring * na..(first_ring + 1) * na];
        let scale = length.powf(p);
        for arc in level_arcs {
            let mass: f64 = grid
                .angles()
                .iter()
                .zip(row)
                .filter(|(t, _)| arc.contains_angle(**t))
                .map(|(_, m)| m)
                .sum();
            ratios.push(mass / scale);
            arcs.push(arc);
        }
    }
    let (best, value) = par::argmax(&ratios).expect("the full arc is always present");
    let mut resolution = Resolution::of(grid);
    resolution.arc_level = Some(max_level);
    Ok(CarlesonEstimate {
        value,
        kind: EstimateKind::Box,
        resolution,
        witness: Witness::Arc(arcs[best]),
    })
}

/// Default Moebius centres: the origin plus 16 angles on each of the radii
/// `1 - 2^-j`, `j = 1..=8`.
pub fn default_a_samples() -> Vec<Complex64> {
    a_samples(8, 16)
}

/// The origin plus `n_angles` equispaced points on each radius `1 - 2^-j`,
/// `j = 1..=n_radii`.
pub fn a_samples(n_radii: usize, n_angles: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    for j in 1..=n_radii {
        let r = 1.0 - 0.5f64.powi(j as i32);
        for k in 0..n_angles {
            out.push(Complex64::from_polar(r, TAU * k as f64 / n_angles as f64));
        }
    }
    out
}

/// `((1 - |a|^2) / |1 - conj(a) z|^2)^p`.
pub fn invariant_kernel(a: Complex64, z: Complex64, p: f64) -> f64 {
    let d = (Complex64::new(1.0, 0.0) - a.conj() * z).norm_sqr();
    ((1.0 - a.norm_sqr()) / d).powf(p)
}

/// `max_a int ((1 - |a|^2) / |1 - conj(a) z|^2)^p dmu(z)` over `a_samples`.
pub fn invariant_norm(
    density: &MeasureDensity,
    p: f64,
    grid: &DiskGrid,
    a_samples: &[Complex64],
) -> Result<CarlesonEstimate> {
    check_exponent(p)?;
    let samples = density.sample(grid)?;
    invariant_norm_from_samples(&samples, p, grid, a_samples)
}

pub fn invariant_norm_from_samples(
    samples: &[f64],
    p: f64,
    grid: &DiskGrid,
    a_samples: &[Complex64],
) -> Result<CarlesonEstimate> {
    if a_samples.is_empty() {
        return Err(Error::InvalidArgument("no Moebius centres given".into()));
    }
    if let Some(&a) = a_samples.iter().find(|a| !(a.norm() < 1.0)) {
        return Err(Error::OutsideDisk {
            what: "Moebius centre",
            z: a,
        });
    }
    let nodes = grid.nodes();
    let weights = grid.weights();
    let mass: Vec<f64> = samples.iter().zip(weights).map(|(h, w)| h * w).collect();
    let values: Vec<f64> = a_samples
        .iter()
        .map(|&a| {
            par::sum_f64(nodes.len(), |i| {
                if mass[i] == 0.0 {
                    0.0
                } else {
                    invariant_kernel(a, nodes[i], p) * mass[i]
                }
            })
        })
        .collect();
    let (best, value) = par::argmax(&values).expect("non-empty");
    let mut resolution = Resolution::of(grid);
    resolution.a_samples = Some(a_samples.len());
    Ok(CarlesonEstimate {
        value,
        kind: EstimateKind::Invariant,
        resolution,
        witness: Witness::Point(a_samples[best]),
    })
}

/// `[int (1 - |w|^2)^t / |1 - conj(w) z|^(2 + t + c) dA(w)] (1 - |z|^2)^c`.
///
/// Bounded above and below independently of `z`. Only `t > -1` is accepted:
/// for `t <= -1` the weight `(1 - |w|^2)^t` is not integrable.
pub fn weighted_kernel_ratio(z: Complex64, t: f64, c: f64, grid: &DiskGrid) -> Result<f64> {
    if !(t > -1.0) {
        return Err(Error::InvalidArgument(format!(
            "t = {t}: the weighted kernel integral needs t > -1 for (1-|w|^2)^t to be integrable"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDisk { what: "z", z });
    }
    let nodes = grid.nodes();
    let weights = grid.weights();
    let exponent = 0.5 * (2.0 + t + c);
    let integral = par::sum_f64(nodes.len(), |i| {
        let w = nodes[i];
        let d = (Complex64::new(1.0, 0.0) - w.conj() * z).norm_sqr();
        (1.0 - w.norm_sqr()).powf(t) / d.powf(exponent) * weights[i]
    });
    Ok(integral * (1.0 - z.norm_sqr()).powf(c))
}

/// Comparison of the Carleson norm of `h dA` with the p-Carleson norm of
/// `h^2 (1 - |z|^2)^p dA`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonComparison {
    pub carleson: f64,
    pub p_carleson: f64,
    /// `carleson / (1 + p_carleson^(1/2))`.
    pub constant: f64,
}

pub fn compare_carleson_norms(
    h: &MeasureDensity,
    p: f64,
    grid: &DiskGrid,
    max_level: u32,
) -> Result<CarlesonComparison> {
    let carleson = box_norm(h, 1.0, grid, max_level)?.value;
    let p_carleson = box_norm(&h.squared().weighted(p), p, grid, max_level)?.value;
    Ok(CarlesonComparison {
        carleson,
        p_carleson,
        constant: carleson / (1.0 + p_carleson.sqrt()),
    })
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p must lie in (0, 1], got {p}")))
    }
}
