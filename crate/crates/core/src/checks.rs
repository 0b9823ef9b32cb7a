//! Cross-checks between independent evaluations of the same setup.
//!
//! Each check returns a [`Check`] row holding the measured error and the
//! tolerance it is held to.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine;
use crate::error::Result;
use crate::form::{self, ThreePlaneParams};
use crate::oracle::{self, OraclePlan};
use crate::setup::{Setup, Source};
use crate::theta;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Set when the check does not apply to the setup.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl Check {
    pub fn measured(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            error,
            tolerance,
            pass: error < tolerance,
            skipped: None,
        }
    }

    pub fn skipped(name: impl Into<String>, why: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            error: f64::NAN,
            tolerance: f64::NAN,
            pass: true,
            skipped: Some(why.into()),
        }
    }

    pub fn line(&self) -> String {
        match &self.skipped {
            Some(why) => format!("SKIP {}: {why}", self.name),
            None => format!(
                "{} {}: error {:.3e} (tolerance {:.1e})",
                if self.pass { "PASS" } else { "FAIL" },
                self.name,
                self.error,
                self.tolerance
            ),
        }
    }
}

fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let peak = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        diff / peak
    } else {
        diff
    }
}

/// Closed-form sensor amplitude against quadrature propagation at the
/// configured sensor samples, without phase alignment.
pub fn oracle_sensor(setup: &Setup, tolerance: f64) -> Result<Check> {
    let s = setup.sensor;
    let n = (s.k_max - s.k_min + 1) as usize;
    if n < 2 {
        return Ok(Check::skipped("oracle", "sensor needs at least two samples"));
    }
    let range = (s.k_min as f64 * s.ts_m, s.k_max as f64 * s.ts_m, n);
    let reference = oracle::propagate_setup(setup, range, &OraclePlan::default())?;
    let closed = engine::sensor_field(setup, &reference.xs())?;
    let rep = oracle::compare_values(&closed, &reference.values, false);
    Ok(Check::measured("oracle", rep.linf_rel, tolerance))
}

/// Evenly spread path indices, at most `limit` of them.
pub fn sample_paths(setup: &Setup, limit: u64) -> Vec<u64> {
    let count = setup.path_count();
    if count <= limit {
        return (0..count).collect();
    }
    let mut v: Vec<u64> = (0..limit).map(|i| i * (count - 1) / (limit - 1).max(1)).collect();
    v.dedup();
    v
}

/// Iterated path amplitude against the quadratic-form evaluation at the
/// sensor samples, for up to `limit` paths.
pub fn iterative_vs_form(setup: &Setup, limit: u64, tolerance: f64) -> Result<Check> {
    if setup.segments.iter().any(|s| s.is_degenerate()) {
        return Ok(Check::skipped("quadratic-form", "a section has b = 0"));
    }
    let xs = setup.sensor.positions();
    let worst = sample_paths(setup, limit)
        .par_iter()
        .map(|&n| -> Result<f64> {
            let state = engine::path_state(setup, n)?;
            let centers: Vec<f64> = setup.path_slits(n).iter().map(|s| s.center_m).collect();
            let direct: Vec<Complex64> = xs.iter().map(|&x| state.amplitude(x)).collect();
            let regrouped: Vec<Complex64> = match setup.source {
                Source::Gaussian { .. } => {
                    let f = form::build_gaussian_form(setup, n)?;
                    xs.iter().map(|&x| f.evaluate(&centers, x)).collect()
                }
                Source::HermiteGaussian { .. } => {
                    let f = form::build_hg_form(setup, n)?;
                    xs.iter().map(|&x| f.evaluate(&centers, x)).collect()
                }
            };
            Ok(max_rel(&regrouped, &direct))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Check::measured("quadratic-form", worst, tolerance))
}

/// Rows for `H`, `h`, `Υ` and `A + iB` of the two-plane closed polynomials
/// against the recursion, on path 0.
pub fn three_plane_polynomials(setup: &Setup, tolerance: f64) -> Result<Vec<Check>> {
    let names = ["polynomials.H", "polynomials.h", "polynomials.upsilon", "polynomials.A+iB"];
    let sigma0 = match setup.source {
        Source::Gaussian { sigma0_m } => sigma0_m,
        _ => return Ok(names.iter().map(|n| Check::skipped(*n, "needs a Gaussian source")).collect()),
    };
    if setup.planes.len() != 2 || setup.segments.iter().any(|s| s.is_degenerate() || s.oscillator.is_some()) {
        return Ok(names
            .iter()
            .map(|n| Check::skipped(*n, "needs two slit planes and b ≠ 0 sections"))
            .collect());
    }
    let slits = setup.path_slits(0);
    let p = ThreePlaneParams {
        beta1: slits[0].width_m,
        beta2: slits[1].width_m,
        sigma0,
        m01: setup.segments[0].matrix,
        m12: setup.segments[1].matrix,
        m23: setup.segments[2].matrix,
    };
    let (t, f) = (form::evaluate_three_plane_polynomials(&p)?, form::build_gaussian_form(setup, 0)?);
    Ok(polynomial_errors(&t, &f)
        .iter()
        .zip(names)
        .map(|(&e, n)| Check::measured(n, e, tolerance))
        .collect())
}

/// Relative errors of `H`, `h`, `Υ` (up to sign) and `A + iB`.
pub fn polynomial_errors(t: &form::ThreePlaneValues, f: &form::QuadraticForm) -> [f64; 4] {
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(f64::MIN_POSITIVE);
    let h_scale = f.h_matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut eh = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            eh = eh.max((t.h_matrix[r][c] - f.h_matrix[(r, c)]).norm() / h_scale);
        }
    }
    let ev = (0..2).map(|r| rel(t.h_vector[r], f.h_vector[r])).fold(0.0, f64::max);
    let u = f.upsilon();
    let eu = rel(t.upsilon, u).min(rel(-t.upsilon, u));
    let eq = rel(t.quadratic, Complex64::new(f.a, f.b));
    [eh, ev, eu, eq]
}

/// Sensor intensity from the theta sum against the path sum at `points`
/// sensor samples spread over the sensor range.
pub fn theta_equivalence(setup: &Setup, points: usize, tolerance: f64) -> Result<Check> {
    let map = match theta::map_uniform_setup(setup) {
        Ok(m) => m,
        Err(e) => return Ok(Check::skipped("theta", e.to_string())),
    };
    let all = setup.sensor.positions();
    let xs: Vec<f64> = (0..points.min(all.len()))
        .map(|i| all[i * (all.len() - 1) / (points - 1).max(1)])
        .collect();
    let direct = engine::sensor_field(setup, &xs)?;
    let mut worst = 0.0f64;
    for (x, d) in xs.iter().zip(&direct) {
        let i = d.norm_sqr();
        let lhs = i / map.prefactor(*x);
        let rhs = theta::theta_partial_sum(&map.gamma, &map.argument(*x), map.m)?.norm_sqr();
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
    }
    Ok(Check::measured("theta", worst, tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::free_space;
    use crate::setup::{DiffractionPlane, Slit};

    fn lattice() -> Setup {
        let l = 650e-9;
        let m = [free_space(0.04, l).unwrap(), free_space(0.03, l).unwrap(), free_space(0.002, l).unwrap()];
        let planes = vec![DiffractionPlane::uniform(3, 25e-6, 6e-6), DiffractionPlane::uniform(3, 30e-6, 7e-6)];
        let mut s = Setup::from_matrices(Source::Gaussian { sigma0_m: 30e-6 }, planes, &m, l).unwrap();
        s.sensor.ts_m = 2e-6;
        s.sensor.k_min = -50;
        s.sensor.k_max = 50;
        s
    }

    #[test]
    fn checks_pass_on_a_lattice() {
        let s = lattice();
        assert!(oracle_sensor(&s, 1e-5).unwrap().pass);
        assert!(iterative_vs_form(&s, 9, 1e-10).unwrap().pass);
        assert!(theta_equivalence(&s, 32, 1e-8).unwrap().pass);
    }

    #[test]
    fn theta_is_skipped_off_lattice() {
        let mut s = lattice();
        s.planes[0] = DiffractionPlane::new(vec![Slit::new(0.0, 5e-6), Slit::new(9e-6, 5e-6)]);
        assert!(theta_equivalence(&s, 8, 1e-8).unwrap().skipped.is_some());
    }
}
