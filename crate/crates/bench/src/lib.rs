//! Fixtures shared by the benchmarks.

use qpw_core::disk::sunflower_points;
use qpw_core::{AnalyticFn, Complex64, Mode, SmoothField, WolffProblem};

/// Two generators `z` and `(1 - z)/2` with `g = 0.3`.
pub fn two_generators() -> WolffProblem {
    let half = Complex64::new(0.5, 0.0);
    WolffProblem::new(
        0.5,
        vec![AnalyticFn::identity(), AnalyticFn::poly(vec![half, -half]).unwrap()],
        AnalyticFn::constant(Complex64::new(0.3, 0.0)),
        Mode::BanachAlgebra,
    )
    .unwrap()
}

/// Smooth non-analytic right-hand side `z zbar + exp(zbar)`.
pub fn smooth_rhs() -> SmoothField {
    SmoothField::new(|z: Complex64| z * z.conj() + z.conj().exp())
}

/// Single Blaschke factor with zero at `1/2`.
pub fn blaschke() -> AnalyticFn {
    AnalyticFn::blaschke(&[Complex64::new(0.5, 0.0)]).unwrap()
}

/// Moebius centres for Q_p norm maxima.
pub fn centres(count: usize) -> Vec<Complex64> {
    sunflower_points(count, 0.9)
}
