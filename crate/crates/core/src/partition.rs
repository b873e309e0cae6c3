//! Uniform grid partitions of a domain box.
//!
//! Regular cells along axis `k` are `[low + i·w, low + (i+1)·w)` with the last
//! cell closed at `high`. Cells are linearized row-major (axis 0 slowest).
//! Every finite point outside the box lands in one extra overflow cell whose
//! id is [`GridPartition::overflow_cell`].

use crate::dynsys::Domain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridPartition {
    domain: Domain,
    cells_per_axis: Vec<usize>,
    widths: Vec<f64>,
    regular: usize,
}

impl GridPartition {
    pub fn new(domain: Domain, cells_per_axis: Vec<usize>) -> Result<Self> {
        if cells_per_axis.len() != domain.dimension() {
            return Err(Error::Dimension {
                expected: domain.dimension(),
                found: cells_per_axis.len(),
            });
        }
        if cells_per_axis.contains(&0) {
            return Err(Error::InvalidConfig("every axis needs at least one cell".into()));
        }
        let regular = cells_per_axis
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .filter(|&r| r < u32::MAX as usize)
            .ok_or_else(|| Error::InvalidConfig("partition has too many cells".into()))?;
        let widths: Vec<f64> = domain
            .lows()
            .iter()
            .zip(domain.highs())
            .zip(&cells_per_axis)
            .map(|((lo, hi), &c)| (hi - lo) / c as f64)
            .collect();
        if widths.iter().any(|w| w.is_nan() || *w <= 0.0) {
            return Err(Error::InvalidConfig("cell width underflows to zero".into()));
        }
        Ok(Self {
            domain,
            cells_per_axis,
            widths,
            regular,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells_per_axis
    }

    pub fn regular_cells(&self) -> usize {
        self.regular
    }

    /// Regular cells plus the overflow cell.
    pub fn total_cells(&self) -> usize {
        self.regular + 1
    }

    pub fn overflow_cell(&self) -> usize {
        self.regular
    }

    /// Lower edge of cell `i` along `axis`.
    fn edge(&self, axis: usize, i: usize) -> f64 {
        self.domain.lows()[axis] + i as f64 * self.widths[axis]
    }

    fn axis_index(&self, axis: usize, v: f64) -> usize {
        let n = self.cells_per_axis[axis];
        let lo = self.domain.lows()[axis];
        let mut i = (((v - lo) / self.widths[axis]).floor() as usize).min(n - 1);
        // keep the index consistent with edges computed by `edge`
        while i > 0 && v < self.edge(axis, i) {
            i -= 1;
        }
        while i + 1 < n && v >= self.edge(axis, i + 1) {
            i += 1;
        }
        i
    }

    /// Cell id of `x`: a regular cell when `x` lies in the box, otherwise the
    /// overflow cell.
    pub fn cell_index(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.domain.dimension() {
            return Err(Error::Dimension {
                expected: self.domain.dimension(),
                found: x.len(),
            });
        }
        let mut id = 0usize;
        let mut outside = false;
        for (axis, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteInput);
            }
            if v < self.domain.lows()[axis] || v > self.domain.highs()[axis] {
                outside = true;
                continue;
            }
            id = id * self.cells_per_axis[axis] + self.axis_index(axis, v);
        }
        Ok(if outside { self.overflow_cell() } else { id })
    }

    /// Per-axis indices of a regular cell.
    pub fn unravel(&self, cell: usize) -> Option<Vec<usize>> {
        if cell >= self.regular {
            return None;
        }
        let mut rest = cell;
        let mut out = vec![0; self.cells_per_axis.len()];
        for (axis, &n) in self.cells_per_axis.iter().enumerate().rev() {
            out[axis] = rest % n;
            rest /= n;
        }
        Some(out)
    }

    /// `(lows, highs)` of a regular cell; the last cell on each axis is closed
    /// at the domain's upper bound.
    pub fn cell_bounds(&self, cell: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let idx = self.unravel(cell)?;
        let lows = idx.iter().enumerate().map(|(a, &i)| self.edge(a, i)).collect();
        let highs = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                if i + 1 == self.cells_per_axis[a] {
                    self.domain.highs()[a]
                } else {
                    self.edge(a, i + 1)
                }
            })
            .collect();
        Some((lows, highs))
    }
}

/// Default grid for each built-in map: 2000 cells on `[0,1]` for the
/// Bernoulli shift, 100×100 for Baker's transformation, 160×100 (0.01 cells)
/// for both Tinkerbell slices. The logistic map reuses the Bernoulli grid.
pub fn default_partition(map_name: &str) -> Result<GridPartition> {
    let map = crate::dynsys::builtin(map_name)?;
    let cells = match map_name {
        "bernoulli" | "logistic" => vec![2000],
        "baker" => vec![100, 100],
        _ => vec![160, 100],
    };
    GridPartition::new(map.domain().clone(), cells)
}
