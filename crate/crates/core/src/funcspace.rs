//! Functions analytic on a neighbourhood of the closed disk, stored by exact
//! coefficients, and smooth (non-analytic) fields built from them.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 256;

/// Default finite-difference step for Wirtinger derivatives.
pub const FD_STEP: f64 = 1e-5;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense polynomial `a_0 + a_1 z + ... + a_d z^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        while coeffs.len() > 1 && coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        if coeffs.len() - 1 > MAX_DEGREE {
            return Err(Error::DegreeOverflow {
                degree: coeffs.len() - 1,
                max: MAX_DEGREE,
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::constant(ZERO);
        }
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(ZERO)
                    + other.coeffs.get(k).copied().unwrap_or(ZERO)
            })
            .collect();
        Poly::new(coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        let degree = self.degree() + other.degree();
        if degree > MAX_DEGREE {
            return Err(Error::DegreeOverflow {
                degree,
                max: MAX_DEGREE,
            });
        }
        let mut coeffs = vec![ZERO; degree + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    /// All complex roots (Aberth-Ehrlich iteration). Empty for constants.
    pub fn roots(&self) -> Vec<Complex64> {
        aberth_roots(&self.coeffs)
    }
}

fn aberth_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let lead = coeffs[d];
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();
    let poly = Poly {
        coeffs: monic.clone(),
    };
    // Cauchy bound gives a safe initial radius.
    let bound = 1.0
        + monic[..d]
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
    let radius = 0.5 * bound;
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / d as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut max_step = 0.0_f64;
        for i in 0..d {
            let (p, dp) = poly.eval_with_derivative(z[i]);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| ONE / (z[i] - z[j]))
                .sum();
            let step = ratio / (ONE - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

/// A function analytic on a neighbourhood of the closed unit disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticFn {
    Poly(Poly),
    /// `num / den` with `den` zero-free on the closed disk.
    Rational { num: Poly, den: Poly },
}

impl AnalyticFn {
    pub fn poly(coeffs: Vec<Complex64>) -> Result<Self> {
        Ok(AnalyticFn::Poly(Poly::new(coeffs)?))
    }

    pub fn constant(c: Complex64) -> Self {
        AnalyticFn::Poly(Poly::constant(c))
    }

    pub fn identity() -> Self {
        AnalyticFn::Poly(Poly {
            coeffs: vec![ZERO, ONE],
        })
    }

    /// Rational function; rejects denominators with a zero in `|z| <= 1`.
    pub fn rational(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        let num = Poly::new(num)?;
        let den = Poly::new(den)?;
        let min_modulus = den
            .roots()
            .iter()
            .map(|r| r.norm())
            .fold(f64::INFINITY, f64::min);
        if den.is_zero() || min_modulus <= 1.0 + 1e-12 {
            return Err(Error::DenominatorVanishes {
                min_modulus: if den.is_zero() { 0.0 } else { min_modulus },
            });
        }
        Ok(AnalyticFn::Rational { num, den })
    }

    /// Finite Blaschke product `prod (|a|/a) (a - z) / (1 - conj(a) z)`; a
    /// zero at the origin contributes the factor `z`.
    pub fn blaschke(zeros: &[Complex64]) -> Result<Self> {
        let mut num = Poly::constant(ONE);
        let mut den = Poly::constant(ONE);
        for &a in zeros {
            if !(a.norm() < 1.0) {
                return Err(Error::OutsideDisk {
                    what: "Blaschke zero",
                    z: a,
                });
            }
            if a == ZERO {
                num = num.mul(&Poly::new(vec![ZERO, ONE])?)?;
            } else {
                let phase = a.norm() / a;
                num = num.mul(&Poly::new(vec![phase * a, -phase])?)?;
                den = den.mul(&Poly::new(vec![ONE, -a.conj()])?)?;
            }
        }
        if den.degree() == 0 {
            Ok(AnalyticFn::Poly(num))
        } else {
            Ok(AnalyticFn::Rational { num, den })
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            AnalyticFn::Poly(p) => p.eval(z),
            AnalyticFn::Rational { num, den } => num.eval(z) / den.eval(z),
        }
    }

    /// Value and exact first derivative.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        match self {
            AnalyticFn::Poly(p) => p.eval_with_derivative(z),
            AnalyticFn::Rational { num, den } => {
                let (n, dn) = num.eval_with_derivative(z);
                let (d, dd) = den.eval_with_derivative(z);
                (n / d, (dn * d - n * dd) / (d * d))
            }
        }
    }

    pub fn eval_derivs(&self, z: Complex64, order: u8) -> Result<Complex64> {
        match order {
            0 => Ok(self.eval(z)),
            1 => Ok(self.eval_with_derivative(z).1),
            _ => Err(Error::InvalidArgument(format!(
                "derivative order must be 0 or 1, got {order}"
            ))),
        }
    }

    /// The exact derivative as a new function.
    pub fn derivative(&self) -> Result<AnalyticFn> {
        match self {
            AnalyticFn::Poly(p) => Ok(AnalyticFn::Poly(p.derivative())),
            AnalyticFn::Rational { num, den } => {
                let top = num
                    .derivative()
                    .mul(den)?
                    .add(&num.mul(&den.derivative())?.scale(-ONE))?;
                Ok(AnalyticFn::Rational {
                    num: top,
                    den: den.mul(den)?,
                })
            }
        }
    }

    pub fn add(&self, other: &AnalyticFn) -> Result<AnalyticFn> {
        use AnalyticFn::*;
        match (self, other) {
            (Poly(a), Poly(b)) => Ok(Poly(a.add(b)?)),
            (Poly(p), Rational { num, den }) | (Rational { num, den }, Poly(p)) => Ok(Rational {
                num: num.add(&p.mul(den)?)?,
                den: den.clone(),
            }),
            (Rational { num: n1, den: d1 }, Rational { num: n2, den: d2 }) => {
                if d1 == d2 {
                    Ok(Rational {
                        num: n1.add(n2)?,
                        den: d1.clone(),
                    })
                } else {
                    Ok(Rational {
                        num: n1.mul(d2)?.add(&n2.mul(d1)?)?,
                        den: d1.mul(d2)?,
                    })
                }
            }
        }
    }

    pub fn mul(&self, other: &AnalyticFn) -> Result<AnalyticFn> {
        use AnalyticFn::*;
        match (self, other) {
            (Poly(a), Poly(b)) => Ok(Poly(a.mul(b)?)),
            (Poly(p), Rational { num, den }) | (Rational { num, den }, Poly(p)) => Ok(Rational {
                num: num.mul(p)?,
                den: den.clone(),
            }),
            (Rational { num: n1, den: d1 }, Rational { num: n2, den: d2 }) => Ok(Rational {
                num: n1.mul(n2)?,
                den: d1.mul(d2)?,
            }),
        }
    }

    pub fn scale(&self, c: Complex64) -> AnalyticFn {
        match self {
            AnalyticFn::Poly(p) => AnalyticFn::Poly(p.scale(c)),
            AnalyticFn::Rational { num, den } => AnalyticFn::Rational {
                num: num.scale(c),
                den: den.clone(),
            },
        }
    }

    /// Zeros of the function (roots of the numerator).
    pub fn zeros(&self) -> Vec<Complex64> {
        match self {
            AnalyticFn::Poly(p) => p.roots(),
            AnalyticFn::Rational { num, .. } => num.roots(),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, AnalyticFn::Rational { .. })
    }
}

pub type ComplexEval = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A smooth complex field on the disk given by a closed-form evaluator,
/// optionally with closed-form Wirtinger derivatives.
#[derive(Clone)]
pub struct SmoothField {
    value: ComplexEval,
    dz: Option<ComplexEval>,
    dzbar: Option<ComplexEval>,
}

impl fmt::Debug for SmoothField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothField")
            .field("closed_form_derivatives", &self.has_closed_form_derivatives())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wirtinger {
    Dz,
    Dzbar,
}

impl SmoothField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(f),
            dz: None,
            dzbar: None,
        }
    }

    pub fn with_wirtinger<A, B>(mut self, dz: A, dzbar: B) -> Self
    where
        A: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        B: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.dz = Some(Arc::new(dz));
        self.dzbar = Some(Arc::new(dzbar));
        self
    }

    pub fn from_analytic(f: &AnalyticFn) -> Self {
        let a = f.clone();
        let b = f.clone();
        SmoothField::new(move |z| a.eval(z))
            .with_wirtinger(move |z| b.eval_with_derivative(z).1, |_| ZERO)
    }

    /// `z -> conj(f(z))`, whose only non-zero Wirtinger derivative is
    /// `d/dzbar = conj(f'(z))`.
    pub fn conj_of(f: &AnalyticFn) -> Self {
        let a = f.clone();
        let b = f.clone();
        SmoothField::new(move |z| a.eval(z).conj())
            .with_wirtinger(|_| ZERO, move |z| b.eval_with_derivative(z).1.conj())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.value)(z)
    }

    pub fn evaluator(&self) -> ComplexEval {
        self.value.clone()
    }

    pub fn has_closed_form_derivatives(&self) -> bool {
        self.dz.is_some() && self.dzbar.is_some()
    }

    /// Closed-form derivative when available, otherwise the central
    /// difference stencil of [`wirtinger_fd`] with step `h`.
    pub fn wirtinger(&self, z: Complex64, which: Wirtinger, h: f64) -> Result<Complex64> {
        let closed = match which {
            Wirtinger::Dz => &self.dz,
            Wirtinger::Dzbar => &self.dzbar,
        };
        match closed {
            Some(d) => Ok(d(z)),
            None => wirtinger_fd(self, z, h, which),
        }
    }

    /// Closed-form derivative when available, otherwise the stencil without
    /// the boundary guard (for fields defined beyond the circle).
    pub fn wirtinger_unguarded(&self, z: Complex64, which: Wirtinger, h: f64) -> Complex64 {
        let closed = match which {
            Wirtinger::Dz => &self.dz,
            Wirtinger::Dzbar => &self.dzbar,
        };
        match closed {
            Some(d) => d(z),
            None => wirtinger_stencil(&*self.value, z, h, which),
        }
    }

    /// `|grad F|^2 = 2|F_z|^2 + 2|F_zbar|^2` (equal to `|F_x|^2 + |F_y|^2`).
    pub fn grad_sq(&self, z: Complex64, h: f64) -> Result<f64> {
        let dz = self.wirtinger(z, Wirtinger::Dz, h)?;
        let dzbar = self.wirtinger(z, Wirtinger::Dzbar, h)?;
        Ok(2.0 * dz.norm_sqr() + 2.0 * dzbar.norm_sqr())
    }

    /// Pointwise product, with the product rule when both factors carry
    /// closed-form derivatives.
    pub fn mul(&self, other: &SmoothField) -> SmoothField {
        let (a, b) = (self.value.clone(), other.value.clone());
        let prod = SmoothField::new(move |z| a(z) * b(z));
        match (&self.dz, &self.dzbar, &other.dz, &other.dzbar) {
            (Some(adz), Some(adzb), Some(bdz), Some(bdzb)) => {
                let (a1, b1, a2, b2) = (
                    self.value.clone(),
                    other.value.clone(),
                    self.value.clone(),
                    other.value.clone(),
                );
                let (adz, bdz, adzb, bdzb) = (adz.clone(), bdz.clone(), adzb.clone(), bdzb.clone());
                prod.with_wirtinger(
                    move |z| adz(z) * b1(z) + a1(z) * bdz(z),
                    move |z| adzb(z) * b2(z) + a2(z) * bdzb(z),
                )
            }
            _ => prod,
        }
    }
}

/// Central-difference Wirtinger derivative:
/// `d/dzbar ~ [(F(z+h) - F(z-h)) + i (F(z+ih) - F(z-ih))] / (4h)`, and
/// `d/dz` with the opposite sign on the imaginary stencil.
pub fn wirtinger_fd(field: &SmoothField, z: Complex64, h: f64, which: Wirtinger) -> Result<Complex64> {
    if !(h > 0.0) || !(1.0 - z.norm() > 2.0 * h) {
        return Err(Error::StepTooLarge { z, h });
    }
    Ok(wirtinger_stencil(&*field.value, z, h, which))
}

/// The same stencil without the boundary guard, for evaluators defined on a
/// neighbourhood of the closed disk.
pub fn wirtinger_stencil<F>(f: &F, z: Complex64, h: f64, which: Wirtinger) -> Complex64
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let dx = f(z + h) - f(z - h);
    let dy = f(z + Complex64::new(0.0, h)) - f(z - Complex64::new(0.0, h));
    let i = Complex64::new(0.0, 1.0);
    match which {
        Wirtinger::Dzbar => (dx + i * dy) / (4.0 * h),
        Wirtinger::Dz => (dx - i * dy) / (4.0 * h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn blaschke_at_origin_is_identity() {
        let b = AnalyticFn::blaschke(&[ZERO]).unwrap();
        assert_eq!(b, AnalyticFn::identity());
    }

    #[test]
    fn blaschke_is_unimodular_on_circle() {
        let b = AnalyticFn::blaschke(&[c(0.5, 0.0)]).unwrap();
        for k in 0..100 {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 100.0);
            assert!((b.eval(z).norm() - 1.0).abs() < 1e-12);
        }
        assert!(b.eval(c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn blaschke_rejects_zero_on_circle() {
        assert!(AnalyticFn::blaschke(&[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn rational_rejects_vanishing_denominator() {
        // 1 / (z - 0.5)
        let err = AnalyticFn::rational(vec![ONE], vec![c(-0.5, 0.0), ONE]).unwrap_err();
        assert!(matches!(err, Error::DenominatorVanishes { .. }));
        // 1 / (z - 1) vanishes on the circle.
        assert!(AnalyticFn::rational(vec![ONE], vec![-ONE, ONE]).is_err());
        assert!(AnalyticFn::rational(vec![ONE], vec![c(-2.0, 0.0), ONE]).is_ok());
    }

    #[test]
    fn poly_eval_and_derivative() {
        let f = AnalyticFn::poly(vec![ONE, c(-0.5, 0.0)]).unwrap();
        assert!((f.eval(ONE) - c(0.5, 0.0)).norm() < 1e-15);
        let sq = AnalyticFn::poly(vec![ZERO, ZERO, ONE]).unwrap();
        assert!((sq.eval_derivs(c(0.3, 0.0), 1).unwrap() - c(0.6, 0.0)).norm() < 1e-15);
        let k = AnalyticFn::constant(c(3.0, 1.0));
        assert_eq!(k.eval_derivs(c(0.2, 0.7), 1).unwrap(), ZERO);
        assert!(k.eval_derivs(ZERO, 2).is_err());
    }

    #[test]
    fn rational_derivative_matches_central_difference() {
        let b = AnalyticFn::blaschke(&[c(0.5, 0.0)]).unwrap();
        let h = 1e-5;
        let fd = (b.eval(c(h, 0.0)) - b.eval(c(-h, 0.0))) / (2.0 * h);
        assert!((b.eval_derivs(ZERO, 1).unwrap() - fd).norm() < 1e-8);
        // The symbolic derivative agrees with the pointwise quotient rule.
        let d = b.derivative().unwrap();
        let z = c(0.1, -0.4);
        assert!((d.eval(z) - b.eval_with_derivative(z).1).norm() < 1e-13);
    }

    #[test]
    fn algebra_examples() {
        let z = AnalyticFn::identity();
        assert_eq!(
            z.mul(&z).unwrap(),
            AnalyticFn::poly(vec![ZERO, ZERO, ONE]).unwrap()
        );
        let f = AnalyticFn::poly(vec![c(1.0, 2.0), c(0.0, -1.0), c(0.25, 0.0)]).unwrap();
        let zero = f.add(&f.scale(-ONE)).unwrap();
        match zero {
            AnalyticFn::Poly(p) => assert!(p.is_zero()),
            _ => panic!("poly + poly must stay a polynomial"),
        }
        let g = AnalyticFn::poly(vec![c(2.0 / 3.0, 0.0), c(1.0 / 3.0, 0.0)]).unwrap();
        let g3 = g.mul(&g).unwrap().mul(&g).unwrap();
        assert!((g3.eval(ONE) - ONE).norm() < 1e-15);
    }

    #[test]
    fn rational_representation_is_sticky() {
        let b = AnalyticFn::blaschke(&[c(0.5, 0.0)]).unwrap();
        let z = AnalyticFn::identity();
        assert!(b.mul(&z).unwrap().is_rational());
        assert!(z.add(&b).unwrap().is_rational());
        let s = b.add(&b).unwrap();
        let p = c(0.3, 0.2);
        assert!((s.eval(p) - 2.0 * b.eval(p)).norm() < 1e-14);
    }

    #[test]
    fn degree_overflow_is_an_error() {
        let p = AnalyticFn::poly(vec![ONE; 200]).unwrap();
        assert!(matches!(p.mul(&p), Err(Error::DegreeOverflow { .. })));
        assert!(AnalyticFn::poly(vec![ONE; 300]).is_err());
    }

    #[test]
    fn roots_of_known_polynomial() {
        // (z - 0.5)(z + 2i)(z - 3)
        let p = Poly::new(vec![c(-0.5, 0.0), ONE])
            .unwrap()
            .mul(&Poly::new(vec![c(0.0, 2.0), ONE]).unwrap())
            .unwrap()
            .mul(&Poly::new(vec![c(-3.0, 0.0), ONE]).unwrap())
            .unwrap();
        let mut roots = p.roots();
        roots.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        assert!((roots[0] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((roots[1] - c(0.0, -2.0)).norm() < 1e-12);
        assert!((roots[2] - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn wirtinger_examples() {
        let conj = SmoothField::new(|z: Complex64| z.conj());
        let d = wirtinger_fd(&conj, c(0.2, 0.0), 1e-4, Wirtinger::Dzbar).unwrap();
        assert!((d - ONE).norm() < 1e-7);
        let sq = SmoothField::new(|z: Complex64| z * z);
        let d = wirtinger_fd(&sq, c(0.2, 0.1), 1e-4, Wirtinger::Dzbar).unwrap();
        assert!(d.norm() < 1e-7);
        let modsq = SmoothField::new(|z: Complex64| Complex64::new(z.norm_sqr(), 0.0));
        let d = wirtinger_fd(&modsq, c(0.3, 0.0), 1e-4, Wirtinger::Dzbar).unwrap();
        assert!((d - c(0.3, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn wirtinger_guard_near_boundary() {
        let f = SmoothField::new(|z| z);
        assert!(matches!(
            wirtinger_fd(&f, c(0.99995, 0.0), 1e-4, Wirtinger::Dz),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn gradient_convention_matches_real_coordinates() {
        // F(x, y) = x^2 y + i sin(x)
        let f = SmoothField::new(|z: Complex64| Complex64::new(z.re * z.re * z.im, z.re.sin()));
        let z = c(0.31, -0.22);
        let h = 1e-5;
        let fx = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
        let fy = (f.eval(z + c(0.0, h)) - f.eval(z - c(0.0, h))) / (2.0 * h);
        let real = fx.norm_sqr() + fy.norm_sqr();
        assert!((f.grad_sq(z, h).unwrap() - real).abs() < 1e-5);
    }

    #[test]
    fn closed_form_conjugate_derivative() {
        let f = AnalyticFn::poly(vec![ZERO, c(1.0, 1.0), c(0.0, 2.0)]).unwrap();
        let field = SmoothField::conj_of(&f);
        let z = c(0.4, 0.1);
        let closed = field.wirtinger(z, Wirtinger::Dzbar, FD_STEP).unwrap();
        let fd = wirtinger_fd(&field, z, FD_STEP, Wirtinger::Dzbar).unwrap();
        assert!((closed - fd).norm() < 1e-8);
        assert!((closed - f.eval_derivs(z, 1).unwrap().conj()).norm() < 1e-15);
    }
}
