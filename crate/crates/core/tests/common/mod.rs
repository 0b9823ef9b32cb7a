//! Random setups shared by the integration tests and the acceptance checks.
#![allow(dead_code)]

use mpdsim::optics::{self, LctMatrix};
use mpdsim::setup::{DiffractionPlane, Setup, Slit, Source};
use rand::Rng;

pub const WAVELENGTH: f64 = 650e-9;

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

pub fn random_plane(rng: &mut impl Rng) -> DiffractionPlane {
    let k = rng.random_range(1..=4);
    DiffractionPlane::new(
        (0..k)
            .map(|_| Slit::new(rng.random_range(-60e-6..60e-6), rng.random_range(5e-6..15e-6)))
            .collect(),
    )
}

/// Free space, or free space, lens and free space.
pub fn random_section(rng: &mut impl Rng) -> LctMatrix {
    if rng.random_bool(0.5) {
        optics::free_space(rng.random_range(0.01..0.06), WAVELENGTH).unwrap()
    } else {
        optics::compose_chain(&[
            optics::free_space(rng.random_range(0.005..0.03), WAVELENGTH).unwrap(),
            optics::lens(rng.random_range(0.02..0.06), WAVELENGTH).unwrap(),
            optics::free_space(rng.random_range(0.005..0.03), WAVELENGTH).unwrap(),
        ])
    }
}

pub fn random_source(rng: &mut impl Rng) -> Source {
    if rng.random_bool(0.5) {
        Source::Gaussian { sigma0_m: rng.random_range(15e-6..40e-6) }
    } else {
        Source::HermiteGaussian {
            w0_m: rng.random_range(40e-6..120e-6),
            order: rng.random_range(0..=4),
        }
    }
}

/// `planes` slit planes with random sections and a short last leg, sensed
/// at 1 µm over ±150 µm.
pub fn random_setup(rng: &mut impl Rng, source: Source, planes: usize) -> Setup {
    let p: Vec<DiffractionPlane> = (0..planes).map(|_| random_plane(rng)).collect();
    let mut m: Vec<LctMatrix> = (0..planes).map(|_| random_section(rng)).collect();
    m.push(optics::free_space(rng.random_range(0.001..0.005), WAVELENGTH).unwrap());
    let mut s = Setup::from_matrices(source, p, &m, WAVELENGTH).unwrap();
    s.sensor.ts_m = 1e-6;
    s.sensor.k_min = -150;
    s.sensor.k_max = 150;
    s
}

/// A unit-determinant matrix with `b` on the scale of centimetres of free space.
pub fn random_lct(rng: &mut impl Rng) -> LctMatrix {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let a = sign * rng.random_range(0.3..1.5);
    let d = rng.random_range(-1.5..1.5);
    let b = if rng.random_bool(0.5) { 1.0 } else { -1.0 } * rng.random_range(5e-9..5e-8);
    LctMatrix::new(a, b, (a * d - 1.0) / b, d).unwrap()
}
