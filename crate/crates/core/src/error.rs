use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} must lie in the open unit disk, got {z}")]
    OutsideDisk { what: &'static str, z: Complex64 },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("denominator vanishes on the closed disk (nearest zero has modulus {min_modulus:.6})")]
    DenominatorVanishes { min_modulus: f64 },

    #[error("degree {degree} exceeds the configured maximum {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("finite-difference step {h} too large at {z}: need 1 - |z| > 2h")]
    StepTooLarge { z: Complex64, h: f64 },

    #[error("density is negative or not finite at {z}: {value}")]
    NegativeDensity { z: Complex64, value: f64 },

    #[error(
        "resolution mismatch: boxes at arc level {level} contain only {radial_levels} radial node levels (need >= {required})"
    )]
    Resolution {
        level: u32,
        radial_levels: usize,
        required: usize,
    },

    #[error("cost {cost:.3e} kernel evaluations exceeds budget {budget:.3e}")]
    CostBudget { cost: f64, budget: f64 },

    #[error("degenerate input: sum of |f_l|^2 = {level:.3e} at {z} (common zero of the generators)")]
    DegenerateInput { z: Complex64, level: f64 },

    #[error(
        "size condition |g|^2 <= sum |f_j|^2 fails at {z}: |g|^2 = {g_sq:.6e} exceeds sum |f_j|^2 = {corona:.6e}"
    )]
    SizeCondition { z: Complex64, g_sq: f64, corona: f64 },

    #[error("evaluation failed at {z}: {message}")]
    Evaluation { z: Complex64, message: String },
}
