//! The two-plane benchmark cascade: a 650 nm source, 11 slits on plane 1,
//! 27 slits on plane 2 and a sensor 0.9 cm behind it, with either lens
//! sections or plain free space between the planes.
//!
//! Plane-1 slits sit on the intensity maxima of the order-10
//! Hermite-Gaussian source after the lens section, with widths proportional
//! to the local spacing of those maxima.

use argmin::core::{CostFunction, Executor};
use argmin::solver::brent::BrentOpt;
use serde::Serialize;

use crate::engine::hermite;
use crate::error::{Error, Result};
use crate::optics::{self, LctMatrix};
use crate::setup::{DiffractionPlane, Element, OpticsEntry, Segment, Sensor, SetupConfig, Slit, Source};

pub const WAVELENGTH_M: f64 = 650e-9;
pub const SIGMA0_M: f64 = 20e-6;
pub const W0_M: f64 = 200e-6;
pub const HG_ORDER: u32 = 10;
/// Plane-1 slit width over the mean spacing of neighbouring maxima.
pub const WIDTH_RATIO: f64 = 0.195;
pub const PLANE2_SLITS: usize = 27;
pub const PLANE2_SPACING_M: f64 = 40e-6;
pub const PLANE2_WIDTH_M: f64 = 8e-6;

/// Free-space distances between consecutive planes.
pub const PLANE_GAPS_M: [f64; 3] = [0.315, 0.3075, 0.009];
/// Distance from the plane before each lens to that lens.
pub const LENS_OFFSET_M: f64 = 0.21;
pub const FOCAL_M: f64 = 0.063;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Gaussian,
    HermiteGaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OpticsKind {
    /// A thin lens inside each of the first two gaps.
    Lens,
    FreeSpace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Branch {
    pub source: SourceKind,
    pub optics: OpticsKind,
}

impl Branch {
    pub const ALL: [Branch; 4] = [
        Branch { source: SourceKind::HermiteGaussian, optics: OpticsKind::Lens },
        Branch { source: SourceKind::HermiteGaussian, optics: OpticsKind::FreeSpace },
        Branch { source: SourceKind::Gaussian, optics: OpticsKind::Lens },
        Branch { source: SourceKind::Gaussian, optics: OpticsKind::FreeSpace },
    ];

    pub fn name(&self) -> &'static str {
        match (self.source, self.optics) {
            (SourceKind::HermiteGaussian, OpticsKind::Lens) => "hg_lens",
            (SourceKind::HermiteGaussian, OpticsKind::FreeSpace) => "hg_free_space",
            (SourceKind::Gaussian, OpticsKind::Lens) => "gaussian_lens",
            (SourceKind::Gaussian, OpticsKind::FreeSpace) => "gaussian_free_space",
        }
    }

    /// Reference detection probabilities `P_E(1..=3)`.
    pub fn reference_detection(&self) -> [f64; 3] {
        match (self.source, self.optics) {
            (SourceKind::HermiteGaussian, OpticsKind::Lens) => [1.0, 0.515, 0.202],
            (SourceKind::HermiteGaussian, OpticsKind::FreeSpace) => [1.0, 0.042, 0.0062],
            (SourceKind::Gaussian, OpticsKind::Lens) => [1.0, 0.35, 0.124],
            (SourceKind::Gaussian, OpticsKind::FreeSpace) => [1.0, 0.077, 0.0161],
        }
    }

    /// Reference Wigner negative volumes `V(1..=3)`.
    pub fn reference_negative_volume(&self) -> [f64; 3] {
        match (self.source, self.optics) {
            (SourceKind::HermiteGaussian, OpticsKind::Lens) => [1.076, 1.47, 2.17],
            (SourceKind::HermiteGaussian, OpticsKind::FreeSpace) => [1.076, 1.28, 1.25],
            (SourceKind::Gaussian, OpticsKind::Lens) => [0.0, 0.842, 1.426],
            (SourceKind::Gaussian, OpticsKind::FreeSpace) => [0.0, 1.21, 0.93],
        }
    }

    pub fn source(&self) -> Source {
        match self.source {
            SourceKind::Gaussian => Source::Gaussian { sigma0_m: SIGMA0_M },
            SourceKind::HermiteGaussian => Source::HermiteGaussian { w0_m: W0_M, order: HG_ORDER },
        }
    }

    /// The three sections as element chains.
    pub fn optics(&self) -> Vec<OpticsEntry> {
        let fs = |l: f64| Element::FreeSpace { length_m: l };
        let lensed = |gap: f64| {
            OpticsEntry::Chain(vec![
                fs(LENS_OFFSET_M),
                Element::Lens { focal_m: FOCAL_M },
                fs(gap - LENS_OFFSET_M),
            ])
        };
        let last = OpticsEntry::Single(fs(PLANE_GAPS_M[2]));
        match self.optics {
            OpticsKind::Lens => vec![lensed(PLANE_GAPS_M[0]), lensed(PLANE_GAPS_M[1]), last],
            OpticsKind::FreeSpace => vec![
                OpticsEntry::Single(fs(PLANE_GAPS_M[0])),
                OpticsEntry::Single(fs(PLANE_GAPS_M[1])),
                last,
            ],
        }
    }

    pub fn config(&self) -> Result<SetupConfig> {
        Ok(SetupConfig {
            source: self.source(),
            planes: vec![first_plane()?, second_plane()],
            optics: self.optics(),
            wavelength_m: WAVELENGTH_M,
            sensor: Sensor {
                ts_m: 2e-6,
                k_min: -300,
                k_max: 300,
            },
            path_cap: None,
        })
    }
}

/// Section from the source to plane 1 through the lens.
pub fn lens_section_to_first_plane() -> Result<LctMatrix> {
    Ok(optics::compose_chain(&[
        optics::free_space(LENS_OFFSET_M, WAVELENGTH_M)?,
        optics::lens(FOCAL_M, WAVELENGTH_M)?,
        optics::free_space(PLANE_GAPS_M[0] - LENS_OFFSET_M, WAVELENGTH_M)?,
    ]))
}

struct NegIntensity<'a>(&'a hermite::HgPathState);

impl CostFunction for NegIntensity<'_> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, x: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok(-self.0.amplitude(*x).norm_sqr())
    }
}

/// Intensity maxima above 1 % of the peak of the order-10 source after the
/// lens section, ascending.
pub fn first_plane_maxima() -> Result<Vec<f64>> {
    let seg = Segment::lct(lens_section_to_first_plane()?);
    let state = hermite::init_hg(W0_M, HG_ORDER, &seg)?;
    let step = 0.25e-6;
    let n = 4801;
    let xs: Vec<f64> = (0..n).map(|i| -600e-6 + step * i as f64).collect();
    let int: Vec<f64> = xs.iter().map(|&x| state.amplitude(x).norm_sqr()).collect();
    let peak = int.iter().cloned().fold(0.0, f64::max);
    let mut maxima = Vec::new();
    for i in 1..n - 1 {
        if int[i] > int[i - 1] && int[i] >= int[i + 1] && int[i] > 0.01 * peak {
            let solver = BrentOpt::new(xs[i - 1], xs[i + 1]).set_tolerance(1e-14, 1e-16);
            let res = Executor::new(NegIntensity(&state), solver)
                .configure(|s| s.max_iters(200))
                .run()
                .map_err(|e| Error::domain(e.to_string()))?;
            maxima.push(argmin::core::State::get_best_param(res.state()).copied().unwrap_or(xs[i]));
        }
    }
    Ok(maxima)
}

/// Slits on the maxima with `β_i = 0.195 w_i`, `w_i` the mean distance to
/// the neighbouring maxima (one-sided at the ends).
pub fn first_plane() -> Result<DiffractionPlane> {
    let x = first_plane_maxima()?;
    if x.len() < 2 {
        return Err(Error::domain("fewer than two intensity maxima"));
    }
    let k = x.len();
    let slits = (0..k)
        .map(|i| {
            let w = match i {
                0 => x[1] - x[0],
                _ if i == k - 1 => x[k - 1] - x[k - 2],
                _ => (x[i + 1] - x[i - 1]) / 2.0,
            };
            Slit::new(x[i], WIDTH_RATIO * w)
        })
        .collect();
    Ok(DiffractionPlane::new(slits))
}

pub fn second_plane() -> DiffractionPlane {
    DiffractionPlane::uniform(PLANE2_SLITS, PLANE2_SPACING_M, PLANE2_WIDTH_M)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eleven_symmetric_maxima() {
        let x = first_plane_maxima().unwrap();
        assert_eq!(x.len(), 11);
        for i in 0..11 {
            assert!((x[i] + x[10 - i]).abs() < 1e-9, "{x:?}");
        }
        assert!(x[5].abs() < 1e-9);
    }

    #[test]
    fn benchmark_is_valid_with_297_paths() {
        for b in Branch::ALL {
            let cfg = b.config().unwrap();
            assert!(cfg.validate().is_ok(), "{:?}", cfg.validate());
            assert_eq!(cfg.resolve().unwrap().path_count(), 297);
        }
    }
}
