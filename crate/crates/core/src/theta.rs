//! Truncated multidimensional Riemann theta sums, the equivalence between
//! uniform slit lattices and theta sums, and finite-band NLSE fields.
//!
//! Convention: `Θ_M(Γ, y) = Σ_{a ∈ [−M, M]^n} exp(−π aᵀΓa + 2π yᵀa)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::build_gaussian_form;
use crate::numeric::ComplexNeumaier;
use crate::setup::{Setup, Source};

/// Largest number of lattice terms a partial sum may enumerate.
pub const TERM_CAP: u64 = 1 << 24;

/// Terms evaluated per parallel block.
const BLOCK: u64 = 1 << 16;

/// `|Θ|` below which a denominator is treated as a pole.
pub const POLE_THRESHOLD: f64 = 1e-12;

fn term_count(dim: usize, m: u32) -> Option<u64> {
    (2 * m as u64 + 1).checked_pow(dim as u32)
}

/// Lattice point number `idx` in lexicographic order, first coordinate
/// slowest.
fn lattice_point(idx: u64, dim: usize, m: u32, out: &mut [f64]) {
    let side = 2 * m as u64 + 1;
    let mut r = idx;
    for slot in out[..dim].iter_mut().rev() {
        *slot = (r % side) as f64 - m as f64;
        r /= side;
    }
}

/// `Θ_M(Γ, y)` with compensated summation in lexicographic order. The
/// result does not depend on the thread count.
pub fn theta_partial_sum(gamma: &DMatrix<Complex64>, y: &[Complex64], m: u32) -> Result<Complex64> {
    let dim = y.len();
    if gamma.nrows() != dim || gamma.ncols() != dim {
        return Err(Error::domain(format!(
            "period matrix is {}×{} but the argument has {dim} entries",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    let count = term_count(dim, m)
        .filter(|&c| c <= TERM_CAP)
        .ok_or_else(|| Error::domain(format!("(2·{m}+1)^{dim} lattice terms exceed the cap {TERM_CAP}")))?;
    let pi = std::f64::consts::PI;
    let term = |a: &[f64]| -> Complex64 {
        let mut quad = Complex64::new(0.0, 0.0);
        let mut lin = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            if a[r] == 0.0 {
                continue;
            }
            lin += y[r] * a[r];
            for s in 0..dim {
                quad += gamma[(r, s)] * a[r] * a[s];
            }
        }
        (-pi * quad + 2.0 * pi * lin).exp()
    };
    let mut acc = ComplexNeumaier::new();
    let mut start = 0;
    while start < count {
        let end = (start + BLOCK).min(count);
        let block: Vec<Complex64> = (start..end)
            .into_par_iter()
            .map_init(
                || vec![0.0; dim],
                |a, idx| {
                    lattice_point(idx, dim, m, a);
                    term(a)
                },
            )
            .collect();
        block.iter().for_each(|t| acc.add(*t));
        start = end;
    }
    Ok(acc.value())
}

/// A partial sum and its change from `M` to `M + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaValue {
    pub value: Complex64,
    pub truncation_delta: f64,
}

pub fn theta_with_delta(gamma: &DMatrix<Complex64>, y: &[Complex64], m: u32) -> Result<ThetaValue> {
    let value = theta_partial_sum(gamma, y, m)?;
    let next = theta_partial_sum(gamma, y, m + 1)?;
    Ok(ThetaValue {
        value,
        truncation_delta: (next - value).norm(),
    })
}

/// Theta-sum description of the sensor intensity of a uniform slit
/// lattice: `I(x) = e^{2Ax²} |Υ|² |Θ_M(Γ̂, y(x))|²` with `Γ̂ = −DHD/π` and
/// `y(x) = x D h / (2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaMapping {
    pub gamma: DMatrix<Complex64>,
    /// Lattice spacing `Δx_j` of every plane.
    pub spacing: Vec<f64>,
    pub h_vector: Vec<Complex64>,
    pub a: f64,
    pub upsilon: Complex64,
    pub m: u32,
}

impl ThetaMapping {
    pub fn argument(&self, x: f64) -> Vec<Complex64> {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.h_vector
            .iter()
            .zip(&self.spacing)
            .map(|(h, d)| x * d * h / two_pi)
            .collect()
    }

    pub fn prefactor(&self, x: f64) -> f64 {
        (2.0 * self.a * x * x).exp() * self.upsilon.norm_sqr()
    }

    pub fn intensity(&self, x: f64) -> Result<f64> {
        Ok(self.prefactor(x) * theta_partial_sum(&self.gamma, &self.argument(x), self.m)?.norm_sqr())
    }

    /// Smallest eigenvalue of the real part of the symmetrized `Γ̂`.
    pub fn min_eigenvalue(&self) -> f64 {
        let re = self.gamma.map(|z| z.re);
        let sym = (&re + re.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }
}

/// Maps a Gaussian-source setup whose planes each hold `2M + 1` equal-width
/// slits at `a Δx_j`, `a ∈ [−M, M]`, onto a theta sum.
pub fn map_uniform_setup(setup: &Setup) -> Result<ThetaMapping> {
    if !matches!(setup.source, Source::Gaussian { .. }) {
        return Err(Error::domain("the theta mapping needs a Gaussian source"));
    }
    let k = setup.planes.first().map(|p| p.slits.len()).ok_or_else(|| Error::domain("no slit planes"))?;
    if k % 2 == 0 {
        return Err(Error::domain("plane 1 must hold an odd number of slits"));
    }
    let m = (k / 2) as u32;
    let mut spacing = Vec::with_capacity(setup.planes.len());
    for (j, plane) in setup.planes.iter().enumerate() {
        let s = &plane.slits;
        if s.len() != k {
            return Err(Error::domain(format!("plane {} holds {} slits, expected {k}", j + 1, s.len())));
        }
        if !plane.has_uniform_width() {
            return Err(Error::domain(format!("plane {} has unequal slit widths", j + 1)));
        }
        let dx = if k > 1 { (s[k - 1].center_m - s[0].center_m) / (k - 1) as f64 } else { 1.0 };
        let off = s.iter().enumerate().any(|(i, sl)| {
            let expect = (i as f64 - m as f64) * dx;
            (sl.center_m - expect).abs() > 1e-9 * dx.abs()
        });
        if off || !(dx > 0.0) {
            return Err(Error::domain(format!("plane {} slit centres are not a symmetric lattice", j + 1)));
        }
        spacing.push(dx);
    }
    let form = build_gaussian_form(setup, 0)?;
    let pi = std::f64::consts::PI;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        spacing.len(),
        spacing.iter().map(|&v| Complex64::new(v, 0.0)),
    ));
    let gamma = -(&d * &form.h_matrix * &d) / Complex64::new(pi, 0.0);
    Ok(ThetaMapping {
        gamma,
        spacing,
        h_vector: form.h_vector.iter().copied().collect(),
        a: form.a,
        upsilon: form.upsilon(),
        m,
    })
}

/// Finite-band data of the nonlinear Schrödinger equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiemannSpectrum {
    /// Real symmetric positive-definite period matrix, row by row.
    pub y: Vec<Vec<f64>>,
    pub k: Vec<f64>,
    pub omega: Vec<f64>,
    pub delta_minus: Vec<f64>,
    pub delta_plus: Vec<f64>,
    pub k0: f64,
    pub omega0: f64,
    /// `q(x₀, t₀)`.
    pub q0: Complex64,
}

impl RiemannSpectrum {
    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn period_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if self.y.len() != n || self.y.iter().any(|r| r.len() != n) {
            return Err(Error::domain(format!("period matrix must be {n}×{n}")));
        }
        for v in [&self.omega, &self.delta_minus, &self.delta_plus] {
            if v.len() != n {
                return Err(Error::domain(format!("spectral vectors must have {n} entries")));
            }
        }
        let y = DMatrix::from_fn(n, n, |r, c| self.y[r][c]);
        if (&y - y.transpose()).abs().max() > 1e-12 {
            return Err(Error::domain("period matrix is not symmetric"));
        }
        if n > 0 && y.clone().symmetric_eigenvalues().min() <= 0.0 {
            return Err(Error::domain("period matrix is not positive definite"));
        }
        Ok(y)
    }

    fn argument(&self, x: f64, t: f64, delta: &[f64]) -> Vec<Complex64> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        (0..self.dim())
            .map(|j| Complex64::new(0.0, half_pi * (self.k[j] * x + self.omega[j] * t + delta[j])))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NlseValue {
    pub q: Complex64,
    /// `|q_{M+1} − q_M|`.
    pub truncation_delta: f64,
}

fn nlse_at(spec: &RiemannSpectrum, gamma: &DMatrix<Complex64>, x: f64, t: f64, m: u32) -> Result<Complex64> {
    let num = theta_partial_sum(gamma, &spec.argument(x, t, &spec.delta_minus), m)?;
    let den = theta_partial_sum(gamma, &spec.argument(x, t, &spec.delta_plus), m)?;
    if den.norm() < POLE_THRESHOLD {
        return Err(Error::singular(format!("theta denominator vanishes at x = {x}, t = {t}")));
    }
    let carrier = Complex64::from_polar(1.0, spec.k0 * x - spec.omega0 * t);
    Ok(spec.q0 * carrier * num / den)
}

/// `q(x, t) = q₀ e^{i(k₀x − ω₀t)} Θ(Y, y⁻)/Θ(Y, y⁺)` with
/// `y^± = i(π/2)(k x + ω t + δ^±)`.
pub fn nlse_field(spec: &RiemannSpectrum, x: f64, t: f64, m: u32) -> Result<NlseValue> {
    let y = spec.period_matrix()?;
    let gamma = y.map(|v| Complex64::new(v, 0.0));
    let q = nlse_at(spec, &gamma, x, t, m)?;
    let next = nlse_at(spec, &gamma, x, t, m + 1)?;
    Ok(NlseValue {
        q,
        truncation_delta: (next - q).norm(),
    })
}
