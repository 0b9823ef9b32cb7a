//! Approximation of arbitrary slit masks by sums of centred Gaussians,
//! `G(x) ≈ Σ a_i exp(−x²/(2β_i²))`.
//!
//! Amplitudes enter linearly and are solved exactly for given widths. The
//! widths are searched in log space by Nelder-Mead from several starts.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Log-spaced starting widths per fit.
const STARTS: usize = 8;
const MAX_ITERS: u64 = 4000;
/// Ridge weight relative to the mean diagonal of the normal matrix.
const RIDGE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixtureComponent {
    pub amplitude: f64,
    pub width_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianMixtureMask {
    pub components: Vec<MixtureComponent>,
    /// Root-mean-square residual on the fit samples.
    pub residual_rms: f64,
}

impl GaussianMixtureMask {
    pub fn eval(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.amplitude * (-x * x / (2.0 * c.width_m * c.width_m)).exp())
            .sum()
    }
}

struct Residual<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
}

impl Residual<'_> {
    fn design(&self, widths: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.xs.len(), widths.len(), |r, c| {
            let x = self.xs[r];
            (-x * x / (2.0 * widths[c] * widths[c])).exp()
        })
    }

    /// Least-squares amplitudes and RMS residual for fixed widths.
    ///
    /// A small ridge term stops nearly equal widths from cancelling each
    /// other with huge amplitudes.
    fn solve(&self, widths: &[f64]) -> (Vec<f64>, f64) {
        let a = self.design(widths);
        let y = DVector::from_column_slice(self.ys);
        let mut normal = a.transpose() * &a;
        let ridge = RIDGE * normal.trace() / widths.len() as f64;
        for i in 0..widths.len() {
            normal[(i, i)] += ridge;
        }
        let amps = normal
            .svd(true, true)
            .solve(&(a.transpose() * &y), 1e-14)
            .unwrap_or_else(|_| DVector::zeros(widths.len()));
        let r = &a * &amps - y;
        let rms = (r.norm_squared() / self.xs.len() as f64).sqrt();
        (amps.iter().copied().collect(), rms)
    }
}

impl CostFunction for Residual<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, log_widths: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let widths: Vec<f64> = log_widths.iter().map(|l| l.exp()).collect();
        Ok(self.solve(&widths).1)
    }
}

struct Search {
    log_widths: Vec<f64>,
    rms: f64,
    converged: bool,
    iterations: u64,
}

fn search(problem: Residual<'_>, start: Vec<f64>) -> Result<Search> {
    let n = start.len();
    let mut simplex = vec![start.clone()];
    for i in 0..n {
        let mut v = start.clone();
        v[i] += 0.3;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-13)
        .map_err(|e| Error::domain(e.to_string()))?;
    let res = Executor::new(problem, solver)
        .configure(|s| s.max_iters(MAX_ITERS))
        .run()
        .map_err(|e| Error::domain(e.to_string()))?;
    let state = res.state();
    let converged = matches!(
        state.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::SolverConverged)
    );
    Ok(Search {
        log_widths: state.get_best_param().cloned().unwrap_or(start),
        rms: state.get_best_cost(),
        converged,
        iterations: state.get_iter(),
    })
}

/// Fits `k` centred Gaussians to the mask samples `(x, G(x))`.
///
/// Every `k' < k` is fitted first and its widths warm-start the next size,
/// so the residual never grows with `k`. Returns
/// [`Error::NoConvergence`] carrying the best fit if no start converged.
pub fn fit_gaussian_mixture(samples: &[(f64, f64)], k: usize) -> Result<GaussianMixtureMask> {
    if k == 0 {
        return Err(Error::domain("mixture needs at least one component"));
    }
    if samples.len() < 2 * k {
        return Err(Error::domain("too few samples for the requested mixture"));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let span = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut spacing = f64::INFINITY;
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    for w in sorted.windows(2) {
        if w[1] > w[0] {
            spacing = spacing.min(w[1] - w[0]);
        }
    }
    if !(span > 0.0) || !spacing.is_finite() {
        return Err(Error::domain("mask samples must cover a non-zero extent"));
    }
    let (lo, hi) = (spacing.max(span * 1e-3).ln(), span.ln());

    let mut previous: Option<Vec<f64>> = None;
    let mut best = None;
    for size in 1..=k {
        let mut starts: Vec<Vec<f64>> = (0..STARTS)
            .map(|s| {
                let t = s as f64 / (STARTS - 1) as f64;
                let base = lo + t * (hi - lo);
                (0..size).map(|i| base + 0.7 * (i as f64 - (size - 1) as f64 / 2.0)).collect()
            })
            .collect();
        if let Some(prev) = &previous {
            for s in 0..STARTS {
                let t = s as f64 / (STARTS - 1) as f64;
                let mut v = prev.clone();
                v.push(lo + t * (hi - lo));
                starts.push(v);
            }
        }
        let mut round: Option<Search> = None;
        for start in starts {
            let found = search(Residual { xs: &xs, ys: &ys }, start)?;
            if round.as_ref().is_none_or(|r| found.rms < r.rms) {
                round = Some(found);
            }
        }
        let round = round.expect("at least one start");
        previous = Some(round.log_widths.clone());
        best = Some(round);
    }
    let best = best.expect("k ≥ 1");
    let widths: Vec<f64> = best.log_widths.iter().map(|l| l.exp()).collect();
    let (amps, rms) = Residual { xs: &xs, ys: &ys }.solve(&widths);
    let mut components: Vec<MixtureComponent> = amps
        .iter()
        .zip(&widths)
        .map(|(&amplitude, &width_m)| MixtureComponent { amplitude, width_m })
        .collect();
    components.sort_by(|a, b| a.width_m.total_cmp(&b.width_m));
    if !best.converged {
        return Err(Error::NoConvergence {
            iterations: best.iterations as usize,
            best_rms: rms,
            best: components.iter().map(|c| (c.amplitude, c.width_m)).collect(),
        });
    }
    Ok(GaussianMixtureMask {
        components,
        residual_rms: rms,
    })
}
