//! Problem specification files.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use qpw_core::carleson::MeasureDensity;
use qpw_core::{AnalyticFn, DiskGrid, Mode, SolverKind, Tolerances, WolffProblem};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub p: f64,
    pub functions: Vec<FunctionSpec>,
    /// Name of the right-hand side `g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// Names of the generators `f_1..f_n`, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub f: Vec<String>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc_level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FunctionKind,
}

/// Complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case")]
pub enum FunctionKind {
    /// Coefficients in increasing powers of `z`.
    Poly(Vec<Complex64>),
    Rational {
        num: Vec<Complex64>,
        den: Vec<Complex64>,
    },
    /// Zeros of a finite Blaschke product.
    Blaschke(Vec<Complex64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_radial: usize,
    pub n_angular: usize,
    pub grading: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_radial: 128,
            n_angular: 512,
            grading: 2.0,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<DiskGrid> {
        DiskGrid::new(self.n_radial, self.n_angular, self.grading).context("grid")
    }
}

/// Density of a measure `mu = w dA` for the `carleson` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Constant { value: f64 },
    /// `|f'|^2 (1 - |z|^2)^p`.
    Derivative { function: String },
    /// `|f|^2`.
    Modulus { function: String },
}

/// Parses `RxA`, e.g. `128x512`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize)> {
    let (r, a) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("expected RxA, got {s:?}"))?;
    Ok((
        r.trim().parse().with_context(|| format!("radial count in {s:?}"))?,
        a.trim().parse().with_context(|| format!("angular count in {s:?}"))?,
    ))
}

impl ProblemSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ProblemSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("schema error at {path}: {}", e.into_inner())
        })?;
        spec.check_names()?;
        Ok(spec)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        Self::parse(&value.to_string())
    }

    fn check_names(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (i, f) in self.functions.iter().enumerate() {
            if let Some(j) = seen.insert(f.name.as_str(), i) {
                bail!("schema error at functions[{i}].name: {:?} already defined at functions[{j}]", f.name);
            }
        }
        for (i, name) in self.f.iter().enumerate() {
            if !seen.contains_key(name.as_str()) {
                bail!("schema error at f[{i}]: unknown function {name:?}");
            }
        }
        if let Some(g) = &self.g {
            if !seen.contains_key(g.as_str()) {
                bail!("schema error at g: unknown function {g:?}");
            }
        }
        match &self.density {
            Some(DensitySpec::Derivative { function } | DensitySpec::Modulus { function })
                if !seen.contains_key(function.as_str()) =>
            {
                bail!("schema error at density.function: unknown function {function:?}")
            }
            _ => Ok(()),
        }
    }

    pub fn check_open_p(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            bail!("schema error at p: must lie in (0, 1), got {}", self.p);
        }
        Ok(())
    }

    pub fn function(&self, name: &str) -> Result<AnalyticFn> {
        let (i, spec) = self
            .functions
            .iter()
            .enumerate()
            .find(|(_, f)| f.name == name)
            .ok_or_else(|| anyhow!("unknown function {name:?}"))?;
        let built = match &spec.kind {
            FunctionKind::Poly(c) => AnalyticFn::poly(c.clone()),
            FunctionKind::Rational { num, den } => AnalyticFn::rational(num.clone(), den.clone()),
            FunctionKind::Blaschke(zeros) => AnalyticFn::blaschke(zeros),
        };
        built.with_context(|| format!("functions[{i}] ({name})"))
    }

    pub fn named_functions(&self) -> Result<Vec<(String, AnalyticFn)>> {
        self.functions
            .iter()
            .map(|f| Ok((f.name.clone(), self.function(&f.name)?)))
            .collect()
    }

    pub fn problem(&self) -> Result<WolffProblem> {
        self.check_open_p()?;
        if self.f.is_empty() {
            bail!("schema error at f: at least one generator is required");
        }
        let g = self
            .g
            .as_deref()
            .ok_or_else(|| anyhow!("schema error at g: missing right-hand side"))?;
        let f = self.f.iter().map(|n| self.function(n)).collect::<Result<Vec<_>>>()?;
        Ok(WolffProblem::new(self.p, f, self.function(g)?, self.mode)?.with_tolerances(self.tolerances))
    }

    pub fn density(&self) -> Result<MeasureDensity> {
        let spec = self
            .density
            .as_ref()
            .ok_or_else(|| anyhow!("schema error at density: missing"))?;
        Ok(match spec {
            DensitySpec::Constant { value } => {
                if !(*value >= 0.0 && value.is_finite()) {
                    bail!("schema error at density.value: must be finite and non-negative");
                }
                MeasureDensity::constant(*value)
            }
            DensitySpec::Derivative { function } => {
                qpw_core::qp::derivative_density(&self.function(function)?, self.p)
            }
            DensitySpec::Modulus { function } => {
                let f = self.function(function)?;
                MeasureDensity::new(move |z| f.eval(z).norm_sqr())
            }
        })
    }

    /// SHA-256 of the canonical (sorted-key) JSON form.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("spec serializes");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}
