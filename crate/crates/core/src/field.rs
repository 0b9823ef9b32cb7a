//! Complex amplitude sampled on a uniform grid.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::trapezoid;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledField {
    /// First grid point (m, or the conjugate unit for momentum fields).
    pub x0: f64,
    /// Grid spacing.
    pub dx: f64,
    #[serde(skip)]
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(x0: f64, dx: f64, values: Vec<Complex64>) -> Self {
        SampledField { x0, dx, values }
    }

    /// Samples `f` on `n` points spanning `[lo, hi]`.
    pub fn sample(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let dx = (hi - lo) / (n.max(2) - 1) as f64;
        let values = (0..n).map(|i| f(lo + dx * i as f64)).collect();
        SampledField { x0: lo, dx, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `∫|Ψ|² dx` by the trapezoid rule.
    pub fn norm_sqr(&self) -> f64 {
        trapezoid(&self.intensity(), self.dx)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest boundary magnitude relative to the peak. Small values mean the
    /// grid holds the whole field.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 || self.is_empty() {
            return 0.0;
        }
        let first = self.values[0].norm();
        let last = self.values[self.len() - 1].norm();
        first.max(last) / peak
    }

    pub fn same_grid(&self, other: &SampledField) -> bool {
        self.len() == other.len()
            && (self.x0 - other.x0).abs() <= 1e-12 * self.dx.abs()
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx.abs()
    }

    pub fn check_same_grid(&self, other: &SampledField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::domain("fields are sampled on different grids"))
        }
    }
}
