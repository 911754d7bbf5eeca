//! Geometry of the unit disk: disk automorphisms, boundary arcs, Carleson
//! boxes and the polar quadrature grids every integral is discretized on.
//!
//! Conventions used throughout the crate:
//!
//! * `dA` is Lebesgue area measure, so `DiskGrid` weights sum to `pi`.
//! * `dsigma` is normalized arc measure, so `BoundaryGrid` weights sum to 1.
//! * Arc lengths `|I|` are normalized: the whole circle has length 1.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// The disk automorphism `z -> (a - z) / (1 - conj(a) z)`.
///
/// It is an involution exchanging `0` and `a`, and maps the unit circle onto
/// itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    a: Complex64,
}

impl MoebiusMap {
    pub fn new(a: Complex64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::OutsideDisk { what: "Moebius parameter", z: a });
        }
        Ok(Self { a })
    }

    pub fn center(&self) -> Complex64 {
        self.a
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.a - z) / (Complex64::new(1.0, 0.0) - self.a.conj() * z)
    }

    /// `1 - |phi_a(z)|^2` in the factored form
    /// `(1 - |a|^2)(1 - |z|^2) / |1 - conj(a) z|^2`, which avoids the
    /// cancellation of the direct formula near the circle.
    pub fn one_minus_abs_sq(&self, z: Complex64) -> f64 {
        let denom = (Complex64::new(1.0, 0.0) - self.a.conj() * z).norm_sqr();
        (1.0 - self.a.norm_sqr()) * (1.0 - z.norm_sqr()) / denom
    }
}

pub fn moebius_eval(a: Complex64, z: Complex64) -> Result<Complex64> {
    Ok(MoebiusMap::new(a)?.eval(z))
}

/// A boundary arc `I`, given by its center angle and normalized length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center_angle: f64,
    pub length: f64,
}

impl Arc {
    pub fn new(center_angle: f64, length: f64) -> Result<Self> {
        if !(length > 0.0 && length <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "arc length must lie in (0, 1], got {length}"
            )));
        }
        Ok(Self {
            center_angle,
            length,
        })
    }

    pub fn full() -> Self {
        Self {
            center_angle: PI,
            length: 1.0,
        }
    }

    /// Angular width in radians.
    pub fn width(&self) -> f64 {
        TAU * self.length
    }

    pub fn start_angle(&self) -> f64 {
        self.center_angle - 0.5 * self.width()
    }

    /// Half-open membership `[start, start + width)` modulo `2 pi`.
    pub fn contains_angle(&self, theta: f64) -> bool {
        if self.length >= 1.0 {
            return true;
        }
        (theta - self.start_angle()).rem_euclid(TAU) < self.width()
    }

    /// The two halves of this arc.
    pub fn children(&self) -> [Arc; 2] {
        let q = 0.25 * self.width();
        let length = 0.5 * self.length;
        [
            Arc {
                center_angle: self.center_angle - q,
                length,
            },
            Arc {
                center_angle: self.center_angle + q,
                length,
            },
        ]
    }
}

/// The Carleson square `S(I) = { r e^{it} : 1 - |I| < r < 1, e^{it} in I }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlesonBox {
    pub arc: Arc,
}

impl CarlesonBox {
    pub fn new(arc: Arc) -> Self {
        Self { arc }
    }

    pub fn inner_radius(&self) -> f64 {
        1.0 - self.arc.length
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        r > self.inner_radius() && r < 1.0 && self.arc.contains_angle(z.arg())
    }
}

/// Dyadic arcs of lengths `2^-l`, `l = 0..=max_level`, together with the
/// family shifted by half an arc at every level.
///
/// At level 0 the shifted arc is the full circle again and is dropped, so
/// the count is `1 + sum_{l=1}^{L} 2^{l+1}`.
pub fn dyadic_arcs(max_level: u32) -> Vec<Arc> {
    let mut arcs = vec![Arc::full()];
    for level in 1..=max_level {
        arcs.extend(arcs_at_level(level));
    }
    arcs
}

/// Arcs of one level (dyadic first, then half-shifted).
pub fn arcs_at_level(level: u32) -> Vec<Arc> {
    if level == 0 {
        return vec![Arc::full()];
    }
    let count = 1usize << level;
    let length = 1.0 / count as f64;
    let step = TAU * length;
    let dyadic = (0..count).map(|k| Arc {
        center_angle: (k as f64 + 0.5) * step,
        length,
    });
    let shifted = (0..count).map(|k| Arc {
        center_angle: (k as f64 + 1.0) * step,
        length,
    });
    dyadic.chain(shifted).collect()
}

/// Anything that can integrate a pointwise evaluator by weighted summation.
pub trait Quadrature {
    fn nodes(&self) -> &[Complex64];
    fn weights(&self) -> &[f64];

    fn len(&self) -> usize {
        self.nodes().len()
    }

    fn is_empty(&self) -> bool {
        self.nodes().is_empty()
    }
}

/// Polar product grid on the open disk, graded toward the circle.
///
/// Radial cells are uniform in `u in [0, 1]` under the map
/// `r^2 = 1 - (1 - u)^grading`; each node sits at the `r^2`-midpoint of its
/// cell and carries the exact cell area as weight. Nodes are stored
/// ring-major: index `i * n_angular + k`.
#[derive(Debug, Clone)]
pub struct DiskGrid {
    n_radial: usize,
    n_angular: usize,
    grading: f64,
    /// Cell edges in `s = r^2`, length `n_radial + 1`.
    s_edges: Vec<f64>,
    radii: Vec<f64>,
    angles: Vec<f64>,
    ring_weights: Vec<f64>,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
}

impl DiskGrid {
    pub fn new(n_radial: usize, n_angular: usize, grading: f64) -> Result<Self> {
        if n_radial < 4 || n_angular < 4 {
            return Err(Error::DegenerateGrid(format!(
                "need at least 4 radial and 4 angular cells, got {n_radial} x {n_angular}"
            )));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(Error::DegenerateGrid(format!(
                "grading exponent must be >= 1, got {grading}"
            )));
        }
        let s_edges: Vec<f64> = (0..=n_radial)
            .map(|e| {
                let u = e as f64 / n_radial as f64;
                1.0 - (1.0 - u).powf(grading)
            })
            .collect();
        let radii: Vec<f64> = s_edges
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1])).sqrt())
            .collect();
        let dtheta = TAU / n_angular as f64;
        let angles: Vec<f64> = (0..n_angular).map(|k| (k as f64 + 0.5) * dtheta).collect();
        let mut ring_weights: Vec<f64> = s_edges
            .windows(2)
            .map(|w| PI * (w[1] - w[0]) / n_angular as f64)
            .collect();
        let total: f64 = ring_weights.iter().sum::<f64>() * n_angular as f64;
        for w in &mut ring_weights {
            *w *= PI / total;
        }

        let mut nodes = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        for (i, &r) in radii.iter().enumerate() {
            for &t in &angles {
                nodes.push(Complex64::from_polar(r, t));
                weights.push(ring_weights[i]);
            }
        }
        Ok(Self {
            n_radial,
            n_angular,
            grading,
            s_edges,
            radii,
            angles,
            ring_weights,
            nodes,
            weights,
        })
    }

    pub fn n_radial(&self) -> usize {
        self.n_radial
    }

    pub fn n_angular(&self) -> usize {
        self.n_angular
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Node radius of every ring, increasing.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn ring_weight(&self, ring: usize) -> f64 {
        self.ring_weights[ring]
    }

    pub fn index(&self, ring: usize, sector: usize) -> usize {
        ring * self.n_angular + sector
    }

    pub fn ring_of(&self, index: usize) -> usize {
        index / self.n_angular
    }

    /// Index of the node whose cell contains `z`, or `None` outside the
    /// open disk.
    pub fn cell_of(&self, z: Complex64) -> Option<usize> {
        let s = z.norm_sqr();
        if !(s < 1.0) {
            return None;
        }
        let ring = self.s_edges.partition_point(|&e| e <= s).saturating_sub(1);
        let ring = ring.min(self.n_radial - 1);
        let theta = z.arg().rem_euclid(TAU);
        let sector = ((theta / TAU * self.n_angular as f64) as usize).min(self.n_angular - 1);
        Some(self.index(ring, sector))
    }

    /// Outer radius of the cell boundary between rings `ring - 1` and `ring`.
    pub fn ring_edge(&self, ring: usize) -> f64 {
        self.s_edges[ring].sqrt()
    }

    /// Number of node rings lying strictly inside the radial band `(1 - length, 1)`.
    pub fn rings_in_band(&self, length: f64) -> usize {
        let inner = 1.0 - length;
        self.radii.iter().filter(|&&r| r > inner).count()
    }

    /// A representative cell diameter, `sqrt(pi / N)`.
    pub fn mean_spacing(&self) -> f64 {
        (PI / self.nodes.len() as f64).sqrt()
    }

    /// Same layout with both resolutions doubled.
    pub fn refined(&self) -> Result<Self> {
        Self::new(2 * self.n_radial, 2 * self.n_angular, self.grading)
    }
}

impl Quadrature for DiskGrid {
    fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Equispaced nodes on the unit circle at angles `2 pi k / n`, each with
/// weight `1 / n` (normalized arc measure).
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
}

impl BoundaryGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::DegenerateGrid(format!(
                "boundary grid needs at least 4 nodes, got {n}"
            )));
        }
        let nodes = (0..n)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
            .collect();
        Ok(Self {
            nodes,
            weights: vec![1.0 / n as f64; n],
        })
    }
}

impl Quadrature for BoundaryGrid {
    fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

pub fn build_grids(
    n_radial: usize,
    n_angular: usize,
    grading: f64,
) -> Result<(DiskGrid, BoundaryGrid)> {
    Ok((
        DiskGrid::new(n_radial, n_angular, grading)?,
        BoundaryGrid::new(n_angular)?,
    ))
}

/// Weighted sum of `integrand` over the grid.
pub fn integrate<Q, F>(grid: &Q, integrand: F) -> Complex64
where
    Q: Quadrature + ?Sized,
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let nodes = grid.nodes();
    let weights = grid.weights();
    par::sum_c64(nodes.len(), |i| integrand(nodes[i]) * weights[i])
}

/// Like [`integrate`], for evaluators that can fail. The first failing node
/// (in node order) is reported.
pub fn try_integrate<Q, F, E>(grid: &Q, integrand: F) -> Result<Complex64>
where
    Q: Quadrature + ?Sized,
    F: Fn(Complex64) -> std::result::Result<Complex64, E> + Sync + Send,
    E: std::fmt::Display + Send,
{
    let nodes = grid.nodes();
    let values = par::map(nodes.len(), |i| integrand(nodes[i]));
    let mut weighted = Vec::with_capacity(values.len());
    for (i, v) in values.into_iter().enumerate() {
        match v {
            Ok(v) => weighted.push(v * grid.weights()[i]),
            Err(e) => {
                return Err(Error::Evaluation {
                    z: nodes[i],
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(par::sum_c64(weighted.len(), |i| weighted[i]))
}

/// Deterministic interior sample points: a sunflower (Vogel) spiral of
/// `count` points in the disk of radius `r_max`, starting at the origin.
pub fn sunflower_points(count: usize, r_max: f64) -> Vec<Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let r = r_max * (k as f64 / count.max(1) as f64).sqrt();
            Complex64::from_polar(r, k as f64 * golden)
        })
        .collect()
}
