//! One-parameter sweeps of the chaos degree and Lyapunov spectrum.
//!
//! Row `i` of a sweep over `[lo, hi]` with `points` rows uses
//! `lo + i·(hi − lo)/(points − 1)`. Rows share nothing, run on a rayon pool
//! and are returned in index order, so the result does not depend on the
//! worker count.

use rayon::prelude::*;

use crate::dynsys::MapSystem;
use crate::error::{Error, Result};
use crate::estimator::{count_transitions, ecd, generate_orbit, EcdResult, LogBase, OrbitConfig, Outcome};
use crate::lyapunov::{spectrum_along, LyapunovSpectrum};
use crate::partition::GridPartition;

/// Default sweep resolution.
pub const DEFAULT_POINTS: usize = 740;

/// The swept parameter and its range for each built-in map.
pub fn default_range(map_name: &str) -> Option<(&'static str, f64, f64)> {
    match map_name {
        "bernoulli" | "baker" => Some(("a", 0.0, 1.0)),
        "tinkerbell_a" => Some(("a", -1.2, 0.9)),
        "tinkerbell_b" => Some(("b", 1.9, 2.9)),
        "logistic" => Some(("r", 3.0, 4.0)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Analyses {
    pub ecd: bool,
    pub lyapunov: bool,
}

impl Analyses {
    pub const ALL: Analyses = Analyses {
        ecd: true,
        lyapunov: true,
    };
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub map: MapSystem,
    pub param: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Values for every parameter slot; the swept slot is overwritten per row.
    pub base_params: Vec<f64>,
    pub orbit: OrbitConfig,
    pub partition: GridPartition,
    pub analyses: Analyses,
    pub log_base: LogBase,
    pub renorm_every: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<usize> {
        let slot = self.map.param_index(&self.param).ok_or_else(|| {
            Error::InvalidConfig(format!("map `{}` has no parameter `{}`", self.map.name(), self.param))
        })?;
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidConfig(format!(
                "sweep range needs lo < hi, got {}:{}",
                self.lo, self.hi
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidConfig("a sweep needs at least 2 points".into()));
        }
        if !(self.analyses.ecd || self.analyses.lyapunov) {
            return Err(Error::InvalidConfig("no analyses selected".into()));
        }
        if self.renorm_every == 0 {
            return Err(Error::InvalidConfig("renorm_every must be at least 1".into()));
        }
        if self.analyses.lyapunov && self.map.derivative().is_none() {
            return Err(Error::NoJacobian(self.map.name().to_string()));
        }
        if self.partition.domain().dimension() != self.map.dimension() {
            return Err(Error::Dimension {
                expected: self.map.dimension(),
                found: self.partition.domain().dimension(),
            });
        }
        self.map.check_params(&self.base_params)?;
        self.orbit.validate(self.map.dimension())?;
        Ok(slot)
    }

    pub fn param_value(&self, index: usize) -> f64 {
        if index + 1 == self.points {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * index as f64 / (self.points - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowStatus {
    Ok,
    Diverged {
        step: usize,
    },
    /// Part of the orbit left the partition box.
    Overflow,
}

impl RowStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Diverged { .. } => "diverged",
            RowStatus::Overflow => "overflow",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub param_value: f64,
    pub ecd: Option<EcdResult>,
    pub lyapunov: Option<LyapunovSpectrum>,
    pub status: RowStatus,
    pub overflow_fraction: f64,
}

/// ECD and/or spectrum at one parameter point, both from a single orbit.
pub fn analyze_point(
    map: &MapSystem,
    params: &[f64],
    orbit_cfg: &OrbitConfig,
    partition: &GridPartition,
    analyses: Analyses,
    log_base: LogBase,
    renorm_every: usize,
) -> Result<Outcome<(Option<EcdResult>, Option<LyapunovSpectrum>)>> {
    let orbit = match generate_orbit(map, params, orbit_cfg)? {
        Outcome::Bounded(o) => o,
        Outcome::Diverged { step } => return Ok(Outcome::Diverged { step }),
    };
    let ecd_result = if analyses.ecd {
        Some(ecd(&count_transitions(&orbit, partition)?, log_base)?)
    } else {
        None
    };
    let spectrum = if analyses.lyapunov {
        Some(spectrum_along(map, params, &orbit, orbit_cfg.n, renorm_every)?)
    } else {
        None
    };
    Ok(Outcome::Bounded((ecd_result, spectrum)))
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let slot = cfg.validate()?;
    let row = |index: usize| -> Result<SweepRow> {
        let param_value = cfg.param_value(index);
        let mut params = cfg.base_params.clone();
        params[slot] = param_value;
        let outcome = analyze_point(
            &cfg.map,
            &params,
            &cfg.orbit,
            &cfg.partition,
            cfg.analyses,
            cfg.log_base,
            cfg.renorm_every,
        )?;
        Ok(match outcome {
            Outcome::Bounded((ecd, lyapunov)) => {
                let overflow_fraction = ecd.map_or(0.0, |e| e.overflow_fraction);
                SweepRow {
                    index,
                    param_value,
                    ecd,
                    lyapunov,
                    status: if overflow_fraction > 0.0 {
                        RowStatus::Overflow
                    } else {
                        RowStatus::Ok
                    },
                    overflow_fraction,
                }
            }
            Outcome::Diverged { step } => SweepRow {
                index,
                param_value,
                ecd: None,
                lyapunov: None,
                status: RowStatus::Diverged { step },
                overflow_fraction: 0.0,
            },
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..cfg.points).into_par_iter().map(row).collect())
}
