//! Orbit generation, transition counting and the entropic chaos degree.
//!
//! For a counted window `x(k), k = t+1 ..= t+n` (after `t` transient steps)
//! the joint table holds `r_ij = #{k : x(k) ∈ A_i, x(k+1) ∈ A_j} / n`. Both
//! marginals come from that table: `p_i = Σ_j r_ij` and `p̄_j = Σ_i r_ij`.
//! The chaos degree is
//!
//! ```text
//! D = S(p̄) − I(p; Λ*) = −Σ_j p̄_j log p̄_j − Σ_ij r_ij log(r_ij / (p_i p̄_j))
//!   = Σ_ij r_ij log(p_i / r_ij)
//! ```
//!
//! the conditional entropy of the next cell given the current one.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynsys::MapSystem;
use crate::error::{Error, Result};
use crate::partition::GridPartition;

pub const DEFAULT_TRANSIENT: usize = 1000;
pub const DEFAULT_STEPS: usize = 100_000;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    E,
    Two,
}

impl LogBase {
    /// `ln(base)`; divide natural-log quantities by this.
    pub fn ln(self) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::E => "e",
            LogBase::Two => "2",
        })
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            other => Err(Error::InvalidConfig(format!(
                "log base must be `e` or `2`, got `{other}`"
            ))),
        }
    }
}

/// Initial point, burn-in and window length of an orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitConfig {
    pub x0: Vec<f64>,
    /// Steps discarded before the counted window.
    pub transient: usize,
    /// Counted steps; `n + 1` states are recorded.
    pub n: usize,
    /// Sup-norm bound beyond which the orbit counts as diverged.
    pub escape_radius: f64,
    /// Run exact binary-shift axes (see [`MapSystem::doubling_axis`]) on a
    /// bit register instead of collapsing floating-point doubling.
    pub exact_shift: bool,
}

impl OrbitConfig {
    pub fn new(x0: Vec<f64>, transient: usize, n: usize) -> Self {
        Self {
            x0,
            transient,
            n,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            exact_shift: true,
        }
    }

    /// Default window (transient 1000, n = 100000) from the map's default x0.
    pub fn for_map(map: &MapSystem) -> Self {
        Self::new(map.default_x0().to_vec(), DEFAULT_TRANSIENT, DEFAULT_STEPS)
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        if self.x0.len() != dimension {
            return Err(Error::Dimension {
                expected: dimension,
                found: self.x0.len(),
            });
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.escape_radius.is_nan() || self.escape_radius <= 0.0 {
            return Err(Error::InvalidConfig("escape radius must be positive".into()));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(())
    }
}

/// Either a finished computation or the step at which the orbit escaped.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    Bounded(T),
    /// Index `k` of the first state `x(k)` that was non-finite or left the
    /// escape radius.
    Diverged {
        step: usize,
    },
}

impl<T> Outcome<T> {
    pub fn bounded(self) -> Option<T> {
        match self {
            Outcome::Bounded(v) => Some(v),
            Outcome::Diverged { .. } => None,
        }
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, Outcome::Diverged { .. })
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Outcome<U> {
        match self {
            Outcome::Bounded(v) => Outcome::Bounded(f(v)),
            Outcome::Diverged { step } => Outcome::Diverged { step },
        }
    }
}

/// Recorded states `x(t+1) ..= x(t+n+1)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    dimension: usize,
    first_step: usize,
    states: Vec<f64>,
}

impl Orbit {
    pub fn from_states(dimension: usize, first_step: usize, states: Vec<f64>) -> Result<Self> {
        if dimension == 0 || !states.len().is_multiple_of(dimension) || states.len() < 2 * dimension {
            return Err(Error::InvalidConfig("an orbit needs at least two whole states".into()));
        }
        Ok(Self {
            dimension,
            first_step,
            states,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Iteration index of the first recorded state.
    pub fn first_step(&self) -> usize {
        self.first_step
    }

    /// Number of recorded states (`n + 1`).
    pub fn len(&self) -> usize {
        self.states.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.dimension)
    }
}

/// Exact orbit of `x ↦ 2x mod 1`: a 64-bit window onto the binary expansion
/// of the current point. Each step shifts one bit out and one fresh bit in
/// from a ChaCha stream seeded by the starting value, i.e. the orbit of a
/// point agreeing with `x0` in every represented bit.
struct ShiftRegister {
    axis: usize,
    window: u64,
    rng: ChaCha8Rng,
    pool: u64,
    left: u32,
}

impl ShiftRegister {
    fn new(axis: usize, x0: f64) -> Option<Self> {
        if !(0.0..1.0).contains(&x0) {
            return None;
        }
        Some(Self {
            axis,
            window: (x0 * 18_446_744_073_709_551_616.0) as u64,
            rng: ChaCha8Rng::seed_from_u64(x0.to_bits()),
            pool: 0,
            left: 0,
        })
    }

    fn value(&self) -> f64 {
        let v = self.window as f64 * (1.0 / 18_446_744_073_709_551_616.0);
        // The true point exceeds 0.5 whenever the leading bit is set; keep the
        // rounded view on the same branch.
        if self.window >> 63 == 1 && v <= 0.5 {
            f64::from_bits(0.5f64.to_bits() + 1)
        } else {
            v
        }
    }

    fn advance(&mut self) -> f64 {
        if self.left == 0 {
            self.pool = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.pool & 1;
        self.pool >>= 1;
        self.left -= 1;
        self.window = (self.window << 1) | bit;
        self.value()
    }
}

fn escaped(x: &[f64], radius: f64) -> bool {
    x.iter().any(|v| !v.is_finite() || v.abs() > radius)
}

/// Iterates `transient` steps, then records `n + 1` states.
pub fn generate_orbit(map: &MapSystem, params: &[f64], cfg: &OrbitConfig) -> Result<Outcome<Orbit>> {
    let m = map.dimension();
    map.check_params(params)?;
    cfg.validate(m)?;
    if escaped(&cfg.x0, cfg.escape_radius) {
        return Ok(Outcome::Diverged { step: 0 });
    }
    let mut shift = if cfg.exact_shift {
        map.doubling_axis(params)
            .and_then(|axis| ShiftRegister::new(axis, cfg.x0[axis]))
    } else {
        None
    };

    let mut cur = cfg.x0.clone();
    if let Some(reg) = &shift {
        cur[reg.axis] = reg.value();
    }
    let mut next = vec![0.0; m];
    let recorded = cfg.n + 1;
    let mut states = Vec::with_capacity(recorded * m);
    for t in 1..=cfg.transient + recorded {
        match map.step(&cur, params, &mut next) {
            Ok(()) => {}
            Err(Error::NonFiniteResult) => return Ok(Outcome::Diverged { step: t }),
            Err(e) => return Err(e),
        }
        if let Some(reg) = shift.as_mut() {
            next[reg.axis] = reg.advance();
        }
        if escaped(&next, cfg.escape_radius) {
            return Ok(Outcome::Diverged { step: t });
        }
        std::mem::swap(&mut cur, &mut next);
        if t > cfg.transient {
            states.extend_from_slice(&cur);
        }
    }
    Ok(Outcome::Bounded(Orbit {
        dimension: m,
        first_step: cfg.transient + 1,
        states,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub count: u64,
}

/// Sparse joint counts of consecutive cell pairs, sorted by `(from, to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCounts {
    entries: Vec<Transition>,
    total: u64,
    overflow_hits: u64,
}

impl TransitionCounts {
    /// Counts `(i, j)` pairs; `overflow_cell` marks the id whose pairs are
    /// tallied in `overflow_hits`.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>, overflow_cell: Option<usize>) -> Self {
        let mut keys: Vec<(usize, usize)> = pairs.into_iter().collect();
        let total = keys.len() as u64;
        let overflow_hits = overflow_cell.map_or(0, |o| keys.iter().filter(|(i, j)| *i == o || *j == o).count() as u64);
        keys.sort_unstable();
        let mut entries: Vec<Transition> = Vec::new();
        for (from, to) in keys {
            match entries.last_mut() {
                Some(t) if t.from == from && t.to == to => t.count += 1,
                _ => entries.push(Transition { from, to, count: 1 }),
            }
        }
        Self {
            entries,
            total,
            overflow_hits,
        }
    }

    /// Pairs each cell with its successor in `cells`.
    pub fn from_cells(cells: &[usize], overflow_cell: Option<usize>) -> Self {
        Self::from_pairs(cells.windows(2).map(|w| (w[0], w[1])), overflow_cell)
    }

    pub fn entries(&self) -> &[Transition] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn overflow_hits(&self) -> u64 {
        self.overflow_hits
    }

    pub fn get(&self, from: usize, to: usize) -> u64 {
        self.entries
            .binary_search_by(|t| (t.from, t.to).cmp(&(from, to)))
            .map_or(0, |i| self.entries[i].count)
    }

    /// Row sums `n·p_i`, sorted by cell.
    pub fn input_marginal(&self) -> Vec<(usize, u64)> {
        let mut out: Vec<(usize, u64)> = Vec::new();
        for t in &self.entries {
            match out.last_mut() {
                Some((c, n)) if *c == t.from => *n += t.count,
                _ => out.push((t.from, t.count)),
            }
        }
        out
    }

    /// Column sums `n·p̄_j`, sorted by cell.
    pub fn output_marginal(&self) -> Vec<(usize, u64)> {
        let mut cols: Vec<(usize, u64)> = self.entries.iter().map(|t| (t.to, t.count)).collect();
        cols.sort_unstable_by_key(|&(c, _)| c);
        let mut out: Vec<(usize, u64)> = Vec::new();
        for (cell, count) in cols {
            match out.last_mut() {
                Some((c, n)) if *c == cell => *n += count,
                _ => out.push((cell, count)),
            }
        }
        out
    }
}

/// Counts transitions `(cell(x(k)), cell(x(k+1)))` along the whole orbit.
pub fn count_transitions(orbit: &Orbit, partition: &GridPartition) -> Result<TransitionCounts> {
    let cells = orbit
        .iter()
        .map(|x| partition.cell_index(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionCounts::from_cells(&cells, Some(partition.overflow_cell())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcdResult {
    /// Chaos degree `D`, in `[0, shannon_out]`.
    pub ecd: f64,
    /// `S(p̄)`.
    pub shannon_out: f64,
    /// `I(p; Λ*)`.
    pub mutual_info: f64,
    /// `Σ r_ij log(p_i / r_ij)` before clamping to `shannon_out`.
    pub conditional_entropy: f64,
    /// Support size of `p̄`.
    pub occupied_cells: usize,
    pub overflow_fraction: f64,
    pub log_base: LogBase,
}

impl EcdResult {
    /// `|(S − I) − D|`; zero up to rounding.
    pub fn identity_gap(&self) -> f64 {
        ((self.shannon_out - self.mutual_info) - self.ecd).abs()
    }
}

/// Chaos degree of a joint count table.
pub fn ecd(counts: &TransitionCounts, log_base: LogBase) -> Result<EcdResult> {
    if counts.total == 0 {
        return Err(Error::EmptyCounts);
    }
    let n = counts.total as f64;
    let rows = counts.input_marginal();
    let cols = counts.output_marginal();
    let col_count = |cell: usize| -> f64 {
        let i = cols.binary_search_by_key(&cell, |&(c, _)| c).expect("column present");
        cols[i].1 as f64
    };

    // `0.0 - s` rather than `-s` so a one-cell distribution gives +0.0
    let shannon_out = 0.0
        - cols
            .iter()
            .map(|&(_, c)| {
                let q = c as f64 / n;
                q * q.ln()
            })
            .sum::<f64>();

    let mut mutual = 0.0;
    let mut conditional = 0.0;
    let mut row = rows.iter().peekable();
    for t in &counts.entries {
        while row.peek().is_some_and(|&&(c, _)| c < t.from) {
            row.next();
        }
        let p_count = row.peek().expect("row present").1 as f64;
        let r_count = t.count as f64;
        let r = r_count / n;
        mutual += r * (r_count * n / (p_count * col_count(t.to))).ln();
        conditional += r * (p_count / r_count).ln();
    }

    let scale = log_base.ln();
    let shannon_out = shannon_out / scale;
    let conditional_entropy = conditional / scale;
    Ok(EcdResult {
        // Each term of the conditional form is non-negative, so D >= 0 holds
        // exactly; the upper bound S(p̄) only up to rounding.
        ecd: conditional_entropy.min(shannon_out),
        shannon_out,
        mutual_info: mutual / scale,
        conditional_entropy,
        occupied_cells: cols.len(),
        overflow_fraction: counts.overflow_hits as f64 / n,
        log_base,
    })
}

/// Orbit → counts → chaos degree.
pub fn ecd_pipeline(
    map: &MapSystem,
    params: &[f64],
    partition: &GridPartition,
    cfg: &OrbitConfig,
    log_base: LogBase,
) -> Result<Outcome<EcdResult>> {
    if partition.domain().dimension() != map.dimension() {
        return Err(Error::Dimension {
            expected: map.dimension(),
            found: partition.domain().dimension(),
        });
    }
    match generate_orbit(map, params, cfg)? {
        Outcome::Bounded(orbit) => {
            let counts = count_transitions(&orbit, partition)?;
            Ok(Outcome::Bounded(ecd(&counts, log_base)?))
        }
        Outcome::Diverged { step } => Ok(Outcome::Diverged { step }),
    }
}
