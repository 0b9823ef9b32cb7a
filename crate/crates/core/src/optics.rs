//! Linear canonical transform matrices, their kernels, and the lens/free-space
//! realization of an arbitrary matrix.
//!
//! Units are SI throughout. `b` carries m², `c` carries m⁻², so the kernel
//! exponent `π/b (d x₁² − 2 x₁ x₀ + a x₀²)` is dimensionless. The constant
//! propagation phase `exp(ikz)` is common to every path and is dropped.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{phase_minus_quarter, sqrt_recip_real};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const DET_TOL: f64 = 1e-12;

/// Unit-determinant real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LctMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl LctMatrix {
    pub const IDENTITY: LctMatrix = LctMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds a matrix, rejecting it if `ad − bc` is not 1 to within `1e-12`
    /// relative to the size of the products involved.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = LctMatrix { a, b, c, d };
        let err = m.det_error();
        if !err.is_finite() || err > DET_TOL {
            return Err(Error::domain(format!(
                "matrix ({a}, {b}, {c}, {d}) has determinant {} (relative error {err:.3e})",
                m.det()
            )));
        }
        Ok(m)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `|ad − bc − 1|` scaled by the magnitude of the two products.
    pub fn det_error(&self) -> f64 {
        let scale = (self.a * self.d).abs().max((self.b * self.c).abs()).max(1.0);
        (self.det() - 1.0).abs() / scale
    }

    /// `self` applied after `first`, i.e. the product `self · first`.
    pub fn after(&self, first: &LctMatrix) -> LctMatrix {
        compose(self, first)
    }

    pub fn inverse(&self) -> LctMatrix {
        LctMatrix {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn max_abs_diff(&self, other: &LctMatrix) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Kernel value `K(x₁, x₀)` for `b ≠ 0`:
    /// `e^{−iπ/4} sqrt(1/b) exp(iπ/b (d x₁² − 2 x₁ x₀ + a x₀²))`.
    pub fn kernel(&self, x1: f64, x0: f64) -> Complex64 {
        let phase = PI / self.b * (self.d * x1 * x1 - 2.0 * x1 * x0 + self.a * x0 * x0);
        self.kernel_prefactor() * Complex64::from_polar(1.0, phase)
    }

    /// `e^{−iπ/4} sqrt(1/b)` with the principal root.
    pub fn kernel_prefactor(&self) -> Complex64 {
        phase_minus_quarter() * sqrt_recip_real(self.b)
    }
}

/// Matrix product `m2 · m1` (apply `m1` first).
pub fn compose(m2: &LctMatrix, m1: &LctMatrix) -> LctMatrix {
    LctMatrix {
        a: m2.a * m1.a + m2.b * m1.c,
        b: m2.a * m1.b + m2.b * m1.d,
        c: m2.c * m1.a + m2.d * m1.c,
        d: m2.c * m1.b + m2.d * m1.d,
    }
}

/// Composes a chain given in propagation order (first element acts first).
pub fn compose_chain(chain: &[LctMatrix]) -> LctMatrix {
    chain
        .iter()
        .fold(LctMatrix::IDENTITY, |acc, m| compose(m, &acc))
}

fn check_wavelength(wavelength: f64) -> Result<()> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    Ok(())
}

/// Free-space section of length `length` (m): `(1, λL, 0, 1)`.
pub fn free_space(length: f64, wavelength: f64) -> Result<LctMatrix> {
    check_wavelength(wavelength)?;
    if !(length >= 0.0 && length.is_finite()) {
        return Err(Error::domain(format!(
            "free-space length must be non-negative, got {length}"
        )));
    }
    Ok(LctMatrix {
        a: 1.0,
        b: wavelength * length,
        c: 0.0,
        d: 1.0,
    })
}

/// Thin lens of focal length `focal` (m): `(1, 0, −1/(λf), 1)`.
/// An infinite focal length gives the identity.
pub fn lens(focal: f64, wavelength: f64) -> Result<LctMatrix> {
    check_wavelength(wavelength)?;
    if focal == 0.0 || focal.is_nan() {
        return Err(Error::domain("lens focal length must be nonzero"));
    }
    let c = if focal.is_infinite() {
        0.0
    } else {
        -1.0 / (wavelength * focal)
    };
    Ok(LctMatrix {
        a: 1.0,
        b: 0.0,
        c,
        d: 1.0,
    })
}

/// Fractional Fourier transform of angle `alpha` (rad).
pub fn frft(alpha: f64) -> LctMatrix {
    let (s, c) = alpha.sin_cos();
    LctMatrix {
        a: c,
        b: s,
        c: -s,
        d: c,
    }
}

/// Coordinate scaling `x → a x`: `(a, 0, 0, 1/a)`.
pub fn scale(a: f64) -> Result<LctMatrix> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::domain("scale factor must be finite and nonzero"));
    }
    Ok(LctMatrix {
        a,
        b: 0.0,
        c: 0.0,
        d: 1.0 / a,
    })
}

/// Chirp multiplication by `exp(iπ c x²)`: `(1, 0, c, 1)`.
pub fn chirp(c: f64) -> LctMatrix {
    LctMatrix {
        a: 1.0,
        b: 0.0,
        c,
        d: 1.0,
    }
}

/// Photon constants derived from the wavelength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonConstants {
    pub wavelength: f64,
    /// Equivalent mass `2πħ/(λc)` (kg).
    pub mass: f64,
    /// Angular frequency `2πc/λ` (rad/s).
    pub omega: f64,
}

impl PhotonConstants {
    pub fn new(wavelength: f64) -> Result<Self> {
        check_wavelength(wavelength)?;
        Ok(PhotonConstants {
            wavelength,
            mass: 2.0 * PI * HBAR / (wavelength * SPEED_OF_LIGHT),
            omega: 2.0 * PI * SPEED_OF_LIGHT / wavelength,
        })
    }
}

/// Relative distance of `ωt` from the nearest multiple of π, below which the
/// oscillator kernel is treated as degenerate.
const HO_DEGENERATE_TOL: f64 = 1e-12;

/// Whether `ωt` sits on a multiple of π, where the oscillator kernel collapses
/// to a (possibly reflected) identity.
pub fn oscillator_is_degenerate(t: f64, consts: &PhotonConstants) -> bool {
    let phase = consts.omega * t;
    let k = (phase / PI).round();
    (phase - k * PI).abs() <= HO_DEGENERATE_TOL * phase.abs().max(1.0)
}

/// Harmonic-oscillator evolution for a duration `t` (s):
/// `(cos ωt, 2πħ t sin ωt / m, −m sin ωt /(2πħ t), cos ωt)`.
pub fn harmonic_oscillator(t: f64, consts: &PhotonConstants) -> Result<LctMatrix> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "oscillator duration must be positive, got {t}"
        )));
    }
    if oscillator_is_degenerate(t, consts) {
        return Err(Error::singular(format!(
            "omega*t = {:.6e} is a multiple of pi; the section reduces to a (reflected) identity, \
             merge the slit masks of the adjacent planes instead",
            consts.omega * t
        )));
    }
    let (s, c) = (consts.omega * t).sin_cos();
    let scale = 2.0 * PI * HBAR * t / consts.mass;
    Ok(LctMatrix {
        a: c,
        b: scale * s,
        c: -s / scale,
        d: c,
    })
}

/// Quadratic graded-index medium of length `d_gri` with profile parameter
/// `chi` and scale `lambda_chi`: `(cos α, λχ sin α, −sin α/λχ, cos α)`, `α = d/χ`.
pub fn graded_index(d_gri: f64, chi: f64, lambda_chi: f64) -> Result<LctMatrix> {
    if !(chi > 0.0) {
        return Err(Error::domain("graded-index parameter chi must be positive"));
    }
    if lambda_chi == 0.0 || !lambda_chi.is_finite() {
        return Err(Error::domain("graded-index scale must be finite and nonzero"));
    }
    let (s, c) = (d_gri / chi).sin_cos();
    Ok(LctMatrix {
        a: c,
        b: lambda_chi * s,
        c: -s / lambda_chi,
        d: c,
    })
}

/// Free space, thin lens, free space realization of a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeElementRealization {
    /// Free-space length before the lens (m).
    pub la: f64,
    /// Focal length (m).
    pub focal: f64,
    /// Free-space length after the lens (m).
    pub lb: f64,
    /// Both lengths non-negative and the focal length finite.
    pub physical: bool,
}

impl ThreeElementRealization {
    /// Product `FS(L_b) · Lens(f) · FS(L_a)`.
    ///
    /// The free-space factors are built directly so that unphysical (negative)
    /// lengths still recompose.
    pub fn recompose(&self, wavelength: f64) -> LctMatrix {
        let fs = |l: f64| LctMatrix {
            a: 1.0,
            b: wavelength * l,
            c: 0.0,
            d: 1.0,
        };
        let lens = LctMatrix {
            a: 1.0,
            b: 0.0,
            c: -1.0 / (wavelength * self.focal),
            d: 1.0,
        };
        compose(&fs(self.lb), &compose(&lens, &fs(self.la)))
    }
}

/// Finds `L_a, f, L_b` with `FS(L_b)·Lens(f)·FS(L_a) = M`:
/// `f = −1/(λc)`, `L_b = (1 − a) f`, `L_a = (1 − d) f`.
pub fn realize_three_element(m: &LctMatrix, wavelength: f64) -> Result<ThreeElementRealization> {
    check_wavelength(wavelength)?;
    if m.c == 0.0 {
        return Err(Error::domain(
            "matrix has c = 0: no lens power, not realizable with a single lens",
        ));
    }
    let focal = -1.0 / (wavelength * m.c);
    let lb = (1.0 - m.a) * focal;
    let la = (1.0 - m.d) * focal;
    Ok(ThreeElementRealization {
        la,
        focal,
        lb,
        physical: la >= 0.0 && lb >= 0.0 && focal.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: f64 = 650e-9;

    #[test]
    fn free_space_entries() {
        assert_eq!(free_space(0.0, LAMBDA).unwrap(), LctMatrix::IDENTITY);
        let m = free_space(0.315, LAMBDA).unwrap();
        assert!((m.b - 2.0475e-7).abs() < 1e-20);
        let m = free_space(0.009, LAMBDA).unwrap();
        assert!((m.b - 5.85e-9).abs() < 1e-22);
        assert!(free_space(-1.0, LAMBDA).is_err());
    }

    #[test]
    fn lens_entries() {
        let m = lens(0.063, LAMBDA).unwrap();
        assert!((m.c + 1.0 / (650e-9 * 0.063)).abs() < 1e-6);
        assert!((m.c - (-2.4420e7)).abs() / 2.4420e7 < 1e-4);
        assert_eq!(lens(f64::INFINITY, LAMBDA).unwrap(), LctMatrix::IDENTITY);
        let back = compose(&lens(-0.063, LAMBDA).unwrap(), &m);
        assert!(back.max_abs_diff(&LctMatrix::IDENTITY) < 1e-9);
        assert!(lens(0.0, LAMBDA).is_err());
    }

    #[test]
    fn frft_group() {
        assert!(frft(0.0).max_abs_diff(&LctMatrix::IDENTITY) < 1e-15);
        let ft = frft(PI / 2.0);
        assert!(ft.max_abs_diff(&LctMatrix { a: 0.0, b: 1.0, c: -1.0, d: 0.0 }) < 1e-15);
        let four = compose_chain(&[ft, ft, ft, ft]);
        assert!(four.max_abs_diff(&LctMatrix::IDENTITY) < 1e-15);
        let (a1, a2) = (0.37, 1.91);
        assert!(compose(&frft(a1), &frft(a2)).max_abs_diff(&frft(a1 + a2)) < 1e-12);
    }

    #[test]
    fn scale_cases() {
        assert_eq!(scale(1.0).unwrap(), LctMatrix::IDENTITY);
        let id = compose(&scale(0.5).unwrap(), &scale(2.0).unwrap());
        assert_eq!(id, LctMatrix::IDENTITY);
        let parity = scale(-1.0).unwrap();
        assert_eq!(parity.det(), 1.0);
        assert!(scale(0.0).is_err());
    }

    #[test]
    fn oscillator_quarter_period_and_degenerate() {
        let k = PhotonConstants::new(LAMBDA).unwrap();
        assert!((k.mass * LAMBDA * SPEED_OF_LIGHT - 2.0 * PI * HBAR).abs() / (2.0 * PI * HBAR) < 1e-12);
        let quarter = PI / 2.0 / k.omega;
        let m = harmonic_oscillator(quarter, &k).unwrap();
        assert!(m.a.abs() < 1e-9 && m.d.abs() < 1e-9);
        assert!((m.b - LAMBDA * SPEED_OF_LIGHT * quarter).abs() / m.b < 1e-9);
        let half = PI / k.omega;
        assert!(matches!(harmonic_oscillator(half, &k), Err(Error::Singular(_))));
    }

    #[test]
    fn oscillator_matches_graded_index() {
        let k = PhotonConstants::new(LAMBDA).unwrap();
        for t in [1.3e-16, 7.77e-16, 2.2e-15, 1e-9 + 1.1e-16] {
            let ho = harmonic_oscillator(t, &k).unwrap();
            let lam_chi = 2.0 * PI * HBAR * t / k.mass;
            let gri = graded_index(k.omega * t, 1.0, lam_chi).unwrap();
            assert!((ho.a - gri.a).abs() < 1e-12);
            assert!((ho.d - gri.d).abs() < 1e-12);
            assert!((ho.b - gri.b).abs() <= 1e-12 * ho.b.abs());
            assert!((ho.c - gri.c).abs() <= 1e-12 * ho.c.abs());
        }
    }

    #[test]
    fn three_element_two_f_transformer() {
        let ft = frft(PI / 2.0);
        let r = realize_three_element(&ft, LAMBDA).unwrap();
        assert!((r.focal - 1.0 / LAMBDA).abs() / r.focal < 1e-12);
        assert!((r.la - r.focal).abs() / r.focal < 1e-12);
        assert!((r.lb - r.focal).abs() / r.focal < 1e-12);
        assert!(r.physical);
        assert!(realize_three_element(&LctMatrix::IDENTITY, LAMBDA).is_err());
    }

    #[test]
    fn three_factor_product_by_hand() {
        let m = compose_chain(&[
            free_space(0.21, LAMBDA).unwrap(),
            lens(0.063, LAMBDA).unwrap(),
            free_space(0.105, LAMBDA).unwrap(),
        ]);
        // [[1, λLb],[0,1]]·[[1,0],[-1/(λf),1]]·[[1,λLa],[0,1]] written out by hand
        let (la, lb, f) = (0.21, 0.105, 0.063);
        let a = 1.0 - lb / f;
        let b = LAMBDA * (la + lb - la * lb / f);
        let c = -1.0 / (LAMBDA * f);
        let d = 1.0 - la / f;
        assert!((m.a - a).abs() < 1e-14);
        assert!((m.b - b).abs() < 1e-20);
        assert!((m.c - c).abs() / c.abs() < 1e-14);
        assert!((m.d - d).abs() < 1e-14);
        assert!((m.a + 2.0 / 3.0).abs() < 1e-12);
        assert!((m.b + 0.035 * LAMBDA).abs() < 1e-20);
    }

    #[test]
    fn kernel_prefactor_branch() {
        let m = LctMatrix { a: 1.0, b: -4.0, c: 0.0, d: 1.0 };
        let p = m.kernel_prefactor();
        let expected = Complex64::new(0.0, 0.5) * phase_minus_quarter();
        assert!((p - expected).norm() < 1e-15);
    }
}
