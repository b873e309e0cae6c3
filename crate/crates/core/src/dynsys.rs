//! Discrete-time maps `x ↦ f(x; params)` on a box in ℝᵐ.
//!
//! The built-in family covers the Bernoulli shift, Baker's transformation,
//! the two one-parameter Tinkerbell slices and the logistic map. Custom maps
//! come from [`crate::mapdsl`] and share the same [`MapSystem`] surface.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mapdsl::CustomMap;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 5] = ["bernoulli", "baker", "tinkerbell_a", "tinkerbell_b", "logistic"];

/// Tinkerbell constants `(c1, c2, c3, c4)` shared by both one-parameter slices.
pub const TINKERBELL_CONSTANTS: [f64; 4] = [-0.3, -0.6, 2.0, 0.5];

/// Axis-aligned box `[lows[k], highs[k]]` for every axis `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lows: Vec<f64>,
    highs: Vec<f64>,
}

impl Domain {
    pub fn new(lows: Vec<f64>, highs: Vec<f64>) -> Result<Self> {
        if lows.is_empty() || lows.len() != highs.len() {
            return Err(Error::InvalidConfig(format!(
                "domain needs matching non-empty bounds, got {} lows and {} highs",
                lows.len(),
                highs.len()
            )));
        }
        for (k, (lo, hi)) in lows.iter().zip(&highs).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(format!(
                    "domain axis {k}: need finite bounds with low < high, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lows, highs })
    }

    pub fn unit(dimension: usize) -> Self {
        Self {
            lows: vec![0.0; dimension],
            highs: vec![1.0; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.lows.len()
    }

    pub fn lows(&self) -> &[f64] {
        &self.lows
    }

    pub fn highs(&self) -> &[f64] {
        &self.highs
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lows.iter().zip(&self.highs))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lows
            .iter()
            .zip(&self.highs)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (lo, hi)) in self.lows.iter().zip(&self.highs).enumerate() {
            if k > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "[{lo:?}, {hi:?}]")?;
        }
        Ok(())
    }
}

/// How a Jacobian was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Analytic,
    /// Central finite differences with `h = 1e-6 * max(1, |x_k|)`.
    Numeric,
}

#[derive(Clone)]
enum Rule {
    Bernoulli,
    Baker,
    Logistic,
    /// `constants` with the parameter substituted into `free_slot`.
    Tinkerbell {
        free_slot: usize,
    },
    Custom(Arc<CustomMap>),
}

/// A named map with its domain, parameter slots and step rule.
///
/// Values are immutable and cheap to clone; share them freely across threads.
#[derive(Clone)]
pub struct MapSystem {
    name: String,
    domain: Domain,
    param_names: Vec<String>,
    default_params: Vec<f64>,
    default_x0: Vec<f64>,
    rule: Rule,
}

impl fmt::Debug for MapSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapSystem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("param_names", &self.param_names)
            .finish_non_exhaustive()
    }
}

impl MapSystem {
    pub(crate) fn custom(
        name: String,
        domain: Domain,
        param_names: Vec<String>,
        default_params: Vec<f64>,
        default_x0: Vec<f64>,
        map: CustomMap,
    ) -> Self {
        Self {
            name,
            domain,
            param_names,
            default_params,
            default_x0,
            rule: Rule::Custom(Arc::new(map)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|p| p == name)
    }

    /// Parameter values used when a caller does not set them explicitly.
    pub fn default_params(&self) -> &[f64] {
        &self.default_params
    }

    /// Initial point used when a caller does not supply one.
    pub fn default_x0(&self) -> &[f64] {
        &self.default_x0
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.rule, Rule::Custom(_))
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_names.len() {
            return Err(Error::ParamCount {
                expected: self.param_names.len(),
                found: params.len(),
            });
        }
        Ok(())
    }

    fn check_state(&self, len: usize) -> Result<()> {
        if len != self.dimension() {
            return Err(Error::Dimension {
                expected: self.dimension(),
                found: len,
            });
        }
        Ok(())
    }

    /// Writes `f(x; params)` into `out`.
    pub fn step(&self, x: &[f64], params: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_state(x.len())?;
        self.check_state(out.len())?;
        self.check_params(params)?;
        self.apply(x, params, out);
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteResult)
        }
    }

    pub fn step_vec(&self, x: &[f64], params: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dimension()];
        self.step(x, params, &mut out)?;
        Ok(out)
    }

    fn apply(&self, x: &[f64], params: &[f64], out: &mut [f64]) {
        match &self.rule {
            Rule::Bernoulli => {
                let a = params[0];
                out[0] = if x[0] <= 0.5 {
                    2.0 * a * x[0]
                } else {
                    a * (2.0 * x[0] - 1.0)
                };
            }
            Rule::Baker => {
                let a = params[0];
                if x[0] <= 0.5 {
                    out[0] = 2.0 * a * x[0];
                    out[1] = 0.5 * a * x[1];
                } else {
                    out[0] = a * (2.0 * x[0] - 1.0);
                    out[1] = 0.5 * a * (x[1] + 1.0);
                }
            }
            Rule::Logistic => {
                out[0] = params[0] * x[0] * (1.0 - x[0]);
            }
            Rule::Tinkerbell { free_slot } => {
                let [c1, c2, c3, c4] = tinkerbell_constants(*free_slot, params[0]);
                let (x1, x2) = (x[0], x[1]);
                out[0] = x1 * x1 - x2 * x2 + c1 * x1 + c2 * x2;
                out[1] = 2.0 * x1 * x2 + c3 * x1 + c4 * x2;
            }
            Rule::Custom(map) => map.eval_into(x, params, out),
        }
    }

    /// The kind of derivative [`MapSystem::jacobian`] yields, or `None` when
    /// the map has no derivative support.
    pub fn derivative(&self) -> Option<Derivative> {
        match &self.rule {
            Rule::Custom(map) if !map.has_jacobian() => None,
            Rule::Custom(_) => Some(Derivative::Numeric),
            _ => Some(Derivative::Analytic),
        }
    }

    /// Writes the row-major `m×m` Jacobian of the step at `x` into `out`.
    pub fn jacobian(&self, x: &[f64], params: &[f64], out: &mut [f64]) -> Result<Derivative> {
        let m = self.dimension();
        self.check_state(x.len())?;
        self.check_params(params)?;
        if out.len() != m * m {
            return Err(Error::Dimension {
                expected: m * m,
                found: out.len(),
            });
        }
        let kind = self.derivative().ok_or_else(|| Error::NoJacobian(self.name.clone()))?;
        match &self.rule {
            Rule::Bernoulli => out[0] = 2.0 * params[0],
            Rule::Baker => {
                out.copy_from_slice(&[2.0 * params[0], 0.0, 0.0, 0.5 * params[0]]);
            }
            Rule::Logistic => out[0] = params[0] * (1.0 - 2.0 * x[0]),
            Rule::Tinkerbell { free_slot } => {
                let [c1, c2, c3, c4] = tinkerbell_constants(*free_slot, params[0]);
                let (x1, x2) = (x[0], x[1]);
                out.copy_from_slice(&[2.0 * x1 + c1, -2.0 * x2 + c2, 2.0 * x2 + c3, 2.0 * x1 + c4]);
            }
            Rule::Custom(_) => self.central_differences(x, params, out)?,
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(kind)
        } else {
            Err(Error::NonFiniteResult)
        }
    }

    pub fn jacobian_matrix(&self, x: &[f64], params: &[f64]) -> Result<(Vec<f64>, Derivative)> {
        let m = self.dimension();
        let mut out = vec![0.0; m * m];
        let kind = self.jacobian(x, params, &mut out)?;
        Ok((out, kind))
    }

    fn central_differences(&self, x: &[f64], params: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.dimension();
        let mut probe = x.to_vec();
        let mut plus = vec![0.0; m];
        let mut minus = vec![0.0; m];
        for k in 0..m {
            let h = 1e-6 * x[k].abs().max(1.0);
            probe[k] = x[k] + h;
            self.step(&probe, params, &mut plus)?;
            probe[k] = x[k] - h;
            self.step(&probe, params, &mut minus)?;
            probe[k] = x[k];
            for row in 0..m {
                out[row * m + k] = (plus[row] - minus[row]) / (2.0 * h);
            }
        }
        Ok(())
    }

    /// Axis on which the step is exactly the binary shift `x ↦ 2x mod 1`
    /// for these parameters (Bernoulli and Baker at `a = 1`).
    ///
    /// In binary floating point that shift discards one mantissa bit per step,
    /// so every orbit collapses onto 0 within ~55 steps. The orbit generator
    /// uses this hook to run such axes on an extended bit expansion instead.
    pub fn doubling_axis(&self, params: &[f64]) -> Option<usize> {
        match self.rule {
            Rule::Bernoulli | Rule::Baker if params.first() == Some(&1.0) => Some(0),
            _ => None,
        }
    }
}

fn tinkerbell_constants(free_slot: usize, value: f64) -> [f64; 4] {
    let mut c = TINKERBELL_CONSTANTS;
    c[free_slot] = value;
    c
}

/// Looks up one of the built-in maps by name.
pub fn builtin(name: &str) -> Result<MapSystem> {
    let unit = |m| Domain::unit(m);
    let tinkerbell_domain = || Domain {
        lows: vec![-1.2, -0.7],
        highs: vec![0.4, 0.3],
    };
    let (domain, param, default_param, x0, rule) = match name {
        "bernoulli" => (unit(1), "a", 1.0, vec![0.3], Rule::Bernoulli),
        "baker" => (unit(2), "a", 1.0, vec![0.3, 0.3], Rule::Baker),
        "logistic" => (unit(1), "r", 4.0, vec![0.3], Rule::Logistic),
        "tinkerbell_a" => (
            tinkerbell_domain(),
            "a",
            0.9,
            vec![0.1, 0.1],
            Rule::Tinkerbell { free_slot: 0 },
        ),
        "tinkerbell_b" => (
            tinkerbell_domain(),
            "b",
            2.0,
            vec![0.1, 0.1],
            Rule::Tinkerbell { free_slot: 2 },
        ),
        other => return Err(Error::UnknownMap(other.to_string())),
    };
    Ok(MapSystem {
        name: name.to_string(),
        domain,
        param_names: vec![param.to_string()],
        default_params: vec![default_param],
        default_x0: x0,
        rule,
    })
}
