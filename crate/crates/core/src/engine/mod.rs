//! Per-path closed-form recursions and their superposition.
//!
//! Each path is a pure function of the setup and its index, so paths are
//! evaluated in parallel. Amplitudes are then reduced per sample point in
//! path-index order with compensated summation, which keeps results
//! bit-identical for any thread count.

pub mod gaussian;
pub mod hermite;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::ComplexNeumaier;
use crate::setup::{Setup, Slit, Source};

pub use gaussian::GaussianPathState;
pub use hermite::HgPathState;

/// Paths evaluated per parallel batch.
const BATCH: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathState {
    Gaussian(GaussianPathState),
    Hg(HgPathState),
}

impl PathState {
    pub fn amplitude(&self, x: f64) -> Complex64 {
        match self {
            PathState::Gaussian(s) => s.amplitude(x),
            PathState::Hg(s) => s.amplitude(x),
        }
    }

    pub fn masked(&self, slit: &Slit) -> PathState {
        match self {
            PathState::Gaussian(s) => PathState::Gaussian(s.masked(slit)),
            PathState::Hg(s) => PathState::Hg(s.masked(slit)),
        }
    }
}

/// State arriving at plane `slits.len() + 1` after crossing the given slit
/// indices (zero-based) on planes `1 ..= slits.len()`.
pub fn propagate_path(setup: &Setup, slits: &[usize]) -> Result<PathState> {
    if slits.len() > setup.planes.len() {
        return Err(Error::domain("more slit indices than planes"));
    }
    let first = &setup.segments[0];
    let mut state = match setup.source {
        Source::Gaussian { sigma0_m } => PathState::Gaussian(gaussian::init_gaussian(sigma0_m, first)?),
        Source::HermiteGaussian { w0_m, order } => PathState::Hg(hermite::init_hg(w0_m, order, first)?),
    };
    for (j, &i) in slits.iter().enumerate() {
        let slit = setup.planes[j]
            .slits
            .get(i)
            .ok_or_else(|| Error::domain(format!("slit {i} does not exist on plane {}", j + 1)))?;
        let seg = &setup.segments[j + 1];
        state = match state {
            PathState::Gaussian(s) => PathState::Gaussian(gaussian::diffract_step(&s, slit, seg)?),
            PathState::Hg(s) => PathState::Hg(hermite::diffract_step(&s, slit, seg)?),
        };
    }
    Ok(state)
}

/// Sensor-plane state of path `n`.
pub fn path_state(setup: &Setup, n: u64) -> Result<PathState> {
    propagate_path(setup, &setup.path_digits(n))
}

/// Number of slit sequences reaching plane `plane` (1-based; the sensor is
/// `planes.len() + 1`).
pub fn paths_to_plane(setup: &Setup, plane: usize) -> u64 {
    setup.radices()[..plane - 1]
        .iter()
        .map(|&k| k as u64)
        .product()
}

fn prefix_digits(setup: &Setup, plane: usize, mut n: u64) -> Vec<usize> {
    let radices = &setup.radices()[..plane - 1];
    let mut digits = vec![0; radices.len()];
    for (slot, &k) in digits.iter_mut().zip(radices).rev() {
        *slot = (n % k as u64) as usize;
        n /= k as u64;
    }
    digits
}

/// States of every path arriving at `plane`, in path-index order.
pub fn states_at_plane(setup: &Setup, plane: usize) -> Result<Vec<PathState>> {
    check_plane(setup, plane)?;
    let count = paths_to_plane(setup, plane);
    (0..count)
        .into_par_iter()
        .map(|n| propagate_path(setup, &prefix_digits(setup, plane, n)))
        .collect()
}

fn check_plane(setup: &Setup, plane: usize) -> Result<()> {
    if plane == 0 || plane > setup.planes.len() + 1 {
        return Err(Error::domain(format!(
            "plane {plane} outside 1..={}",
            setup.planes.len() + 1
        )));
    }
    setup.check_path_cap()
}

/// `Σ_n Ψ_n(x)` over the given states, summed in order.
pub fn superpose(states: &[PathState], xs: &[f64]) -> Vec<Complex64> {
    let mut acc = vec![ComplexNeumaier::new(); xs.len()];
    accumulate(&mut acc, states, xs);
    acc.iter().map(|a| a.value()).collect()
}

fn accumulate(acc: &mut [ComplexNeumaier], states: &[PathState], xs: &[f64]) {
    acc.par_iter_mut().zip(xs.par_iter()).for_each(|(a, &x)| {
        for s in states {
            a.add(s.amplitude(x));
        }
    });
}

/// Total field arriving at `plane`, sampled at `xs`. Paths are generated in
/// batches so memory stays bounded for large path counts.
pub fn field_at_plane(setup: &Setup, plane: usize, xs: &[f64]) -> Result<Vec<Complex64>> {
    check_plane(setup, plane)?;
    let count = paths_to_plane(setup, plane);
    let mut acc = vec![ComplexNeumaier::new(); xs.len()];
    let mut start = 0u64;
    while start < count {
        let end = (start + BATCH as u64).min(count);
        let batch: Vec<PathState> = (start..end)
            .into_par_iter()
            .map(|n| propagate_path(setup, &prefix_digits(setup, plane, n)))
            .collect::<Result<_>>()?;
        accumulate(&mut acc, &batch, xs);
        start = end;
    }
    Ok(acc.iter().map(|a| a.value()).collect())
}

/// Total sensor-plane field at `xs`.
pub fn sensor_field(setup: &Setup, xs: &[f64]) -> Result<Vec<Complex64>> {
    field_at_plane(setup, setup.planes.len() + 1, xs)
}

/// Intensity samples `I[k] = |Ψ_N(k T_s)|²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensorSamples {
    pub ts_m: f64,
    pub k_min: i64,
    pub k_max: i64,
    pub positions: Vec<f64>,
    pub intensity: Vec<f64>,
    #[serde(skip)]
    pub amplitude: Option<Vec<Complex64>>,
}

pub fn sample_sensor(setup: &Setup, keep_amplitude: bool) -> Result<SensorSamples> {
    let positions = setup.sensor.positions();
    let amp = sensor_field(setup, &positions)?;
    Ok(SensorSamples {
        ts_m: setup.sensor.ts_m,
        k_min: setup.sensor.k_min,
        k_max: setup.sensor.k_max,
        intensity: amp.iter().map(|z| z.norm_sqr()).collect(),
        positions,
        amplitude: keep_amplitude.then_some(amp),
    })
}

/// Neuron output `O = Σ_i G(Y_i, β_i, x_N) Ψ_N(x_N)` for output masks `Y_i`
/// on the sensor plane.
pub fn neuron_output(setup: &Setup, outputs: &[Slit], x: f64) -> Result<Complex64> {
    let field = sensor_field(setup, &[x])?[0];
    let gain: f64 = crate::numeric::sum_f64(outputs.iter().map(|s| s.mask(x)));
    Ok(field * gain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics;
    use crate::setup::DiffractionPlane;

    fn toy(planes: Vec<DiffractionPlane>) -> Setup {
        let lambda = 650e-9;
        let fs = |l| optics::free_space(l, lambda).unwrap();
        let mats: Vec<_> = (0..=planes.len()).map(|j| fs(0.05 + 0.02 * j as f64)).collect();
        Setup::from_matrices(Source::Gaussian { sigma0_m: 30e-6 }, planes, &mats, lambda).unwrap()
    }

    #[test]
    fn single_slit_has_no_interference() {
        let setup = toy(vec![DiffractionPlane::new(vec![Slit::new(5e-6, 10e-6)])]);
        let xs = [-1e-4, 0.0, 2e-4];
        let total = sensor_field(&setup, &xs).unwrap();
        let lone = path_state(&setup, 0).unwrap();
        for (x, t) in xs.iter().zip(&total) {
            assert_eq!(*t, lone.amplitude(*x));
        }
    }

    #[test]
    fn duplicated_slit_doubles_amplitude() {
        let s = Slit::new(5e-6, 10e-6);
        let one = toy(vec![DiffractionPlane::new(vec![s])]);
        let two = toy(vec![DiffractionPlane::new(vec![s, s])]);
        let xs = [-1e-4, 3e-5];
        let a = sensor_field(&one, &xs).unwrap();
        let b = sensor_field(&two, &xs).unwrap();
        for (a, b) in a.iter().zip(&b) {
            assert_eq!(*b, 2.0 * a);
            assert_eq!(b.norm_sqr(), 4.0 * a.norm_sqr());
        }
    }

    #[test]
    fn neuron_matches_four_path_sum() {
        let setup = toy(vec![
            DiffractionPlane::new(vec![Slit::new(-2e-5, 8e-6), Slit::new(2e-5, 8e-6)]),
            DiffractionPlane::new(vec![Slit::new(-3e-5, 9e-6), Slit::new(3e-5, 9e-6)]),
        ]);
        let x = 1.7e-5;
        let outputs = [Slit::new(0.0, 2e-5), Slit::new(1e-5, 3e-5)];
        let o = neuron_output(&setup, &outputs, x).unwrap();
        let mut paths = Complex64::new(0.0, 0.0);
        for n in 0..4 {
            paths += path_state(&setup, n).unwrap().amplitude(x);
        }
        let brute = paths * (outputs[0].mask(x) + outputs[1].mask(x));
        assert!((o - brute).norm() < 1e-13 * brute.norm());
        let single = neuron_output(&setup, &outputs[..1], x).unwrap();
        let doubled = neuron_output(&setup, &[outputs[0], outputs[0]], x).unwrap();
        assert_eq!(doubled, 2.0 * single);
    }
}
