//! Lyapunov exponents along an orbit.
//!
//! The spectrum is the growth rate of the singular values of the Jacobian
//! product `J_n = Df(x(n)) ⋯ Df(x(1))`. Forming `J_n` directly overflows for
//! any positive exponent, so an orthonormal frame `Q` is pushed through each
//! step instead: `J(x(k))·Q = Q'R` with `R` upper triangular with positive
//! diagonal, and `λ_k = (1/n) Σ log R_kk`.

use crate::dynsys::{Derivative, MapSystem};
use crate::error::{Error, Result};
use crate::estimator::{generate_orbit, Orbit, OrbitConfig, Outcome};

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSpectrum {
    /// Sorted descending; `-inf` marks exponents of collapsed frame directions.
    pub exponents: Vec<f64>,
    pub n_used: usize,
    pub numeric_jacobian: bool,
}

impl LyapunovSpectrum {
    pub fn max(&self) -> f64 {
        self.exponents[0]
    }
}

fn require_jacobian(map: &MapSystem) -> Result<Derivative> {
    map.derivative()
        .ok_or_else(|| Error::NoJacobian(map.name().to_string()))
}

/// `(1/n) Σ log |f'(x(k))|` over the first `n` states of the counted window.
/// A vanishing derivative anywhere gives `-inf`.
pub fn lyapunov_1d(map: &MapSystem, params: &[f64], cfg: &OrbitConfig) -> Result<Outcome<f64>> {
    if map.dimension() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: map.dimension(),
        });
    }
    require_jacobian(map)?;
    let orbit = match generate_orbit(map, params, cfg)? {
        Outcome::Bounded(o) => o,
        Outcome::Diverged { step } => return Ok(Outcome::Diverged { step }),
    };
    let mut d = [0.0];
    let mut sum = 0.0;
    for x in orbit.iter().take(cfg.n) {
        map.jacobian(x, params, &mut d)?;
        if d[0] == 0.0 {
            return Ok(Outcome::Bounded(f64::NEG_INFINITY));
        }
        sum += d[0].abs().ln();
    }
    Ok(Outcome::Bounded(sum / cfg.n as f64))
}

/// Full spectrum via QR re-orthonormalization every `renorm_every` steps.
pub fn lyapunov_spectrum(
    map: &MapSystem,
    params: &[f64],
    cfg: &OrbitConfig,
    renorm_every: usize,
) -> Result<Outcome<LyapunovSpectrum>> {
    require_jacobian(map)?;
    if renorm_every == 0 {
        return Err(Error::InvalidConfig("renorm_every must be at least 1".into()));
    }
    match generate_orbit(map, params, cfg)? {
        Outcome::Bounded(orbit) => spectrum_along(map, params, &orbit, cfg.n, renorm_every).map(Outcome::Bounded),
        Outcome::Diverged { step } => Ok(Outcome::Diverged { step }),
    }
}

/// Spectrum from the Jacobians at the first `n` states of `orbit`.
pub fn spectrum_along(
    map: &MapSystem,
    params: &[f64],
    orbit: &Orbit,
    n: usize,
    renorm_every: usize,
) -> Result<LyapunovSpectrum> {
    let kind = require_jacobian(map)?;
    if n == 0 || n > orbit.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot use {n} states of an orbit with {} states",
            orbit.len()
        )));
    }
    if renorm_every == 0 {
        return Err(Error::InvalidConfig("renorm_every must be at least 1".into()));
    }
    let m = map.dimension();
    let mut frame = Frame::identity(m);
    let mut jac = vec![0.0; m * m];
    for (k, x) in orbit.iter().take(n).enumerate() {
        map.jacobian(x, params, &mut jac)?;
        frame.push(&jac);
        if (k + 1) % renorm_every == 0 || k + 1 == n {
            frame.orthonormalize();
        }
        if frame.live == 0 {
            break;
        }
    }
    let mut exponents: Vec<f64> = (0..m)
        .map(|c| {
            if c < frame.live {
                frame.log_growth[c] / n as f64
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    Ok(LyapunovSpectrum {
        exponents,
        n_used: n,
        numeric_jacobian: kind == Derivative::Numeric,
    })
}

/// Column-major `m×m` frame; only the first `live` columns are tracked.
struct Frame {
    m: usize,
    cols: Vec<f64>,
    scratch: Vec<f64>,
    log_growth: Vec<f64>,
    live: usize,
}

impl Frame {
    fn identity(m: usize) -> Self {
        let mut cols = vec![0.0; m * m];
        for i in 0..m {
            cols[i * m + i] = 1.0;
        }
        Self {
            m,
            cols,
            scratch: vec![0.0; m],
            log_growth: vec![0.0; m],
            live: m,
        }
    }

    fn col(&self, c: usize) -> &[f64] {
        &self.cols[c * self.m..(c + 1) * self.m]
    }

    /// `Q ← J·Q` for a row-major `J`.
    fn push(&mut self, jac: &[f64]) {
        let m = self.m;
        for c in 0..self.live {
            for (row, out) in self.scratch.iter_mut().enumerate() {
                *out = (0..m).map(|k| jac[row * m + k] * self.cols[c * m + k]).sum();
            }
            self.cols[c * m..(c + 1) * m].copy_from_slice(&self.scratch);
        }
    }

    /// Modified Gram–Schmidt with one re-orthogonalization pass. Adds
    /// `log R_cc` to each live column's growth; a column that vanishes ends
    /// tracking for it and every column after it.
    fn orthonormalize(&mut self) {
        let m = self.m;
        for c in 0..self.live {
            for _ in 0..2 {
                for p in 0..c {
                    let dot: f64 = self.col(p).iter().zip(self.col(c)).map(|(a, b)| a * b).sum();
                    for i in 0..m {
                        self.cols[c * m + i] -= dot * self.cols[p * m + i];
                    }
                }
            }
            let norm = self.col(c).iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm.is_nan() || norm <= 0.0 {
                self.live = c;
                return;
            }
            self.log_growth[c] += norm.ln();
            for v in &mut self.cols[c * m..(c + 1) * m] {
                *v /= norm;
            }
        }
    }
}
