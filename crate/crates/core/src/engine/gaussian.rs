//! Closed-form recursion for paths of a Gaussian source.
//!
//! A path amplitude on plane `j` is `χ exp((A + iB) x² + (C + iD) x)`. The
//! constant `χ` is kept as a complex logarithm so that large cancelling
//! exponents from off-axis slits never underflow.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{phase_minus_quarter, psqrt, sqrt_recip_real, I};
use crate::optics::LctMatrix;
use crate::setup::{OscillatorSection, Segment, Slit};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPathState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// `ln χ` of the accumulated constant factor.
    pub ln_chi: Complex64,
}

impl GaussianPathState {
    /// The source profile itself, before any section.
    pub fn source(sigma0: f64) -> Self {
        GaussianPathState {
            a: -1.0 / (2.0 * sigma0 * sigma0),
            b: 0.0,
            c: 0.0,
            d: 0.0,
            ln_chi: Complex64::new(-0.5 * (sigma0 * PI.sqrt()).ln(), 0.0),
        }
    }

    pub fn quadratic(&self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }

    pub fn linear(&self) -> Complex64 {
        Complex64::new(self.c, self.d)
    }

    pub fn chi(&self) -> Complex64 {
        self.ln_chi.exp()
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        (self.ln_chi + self.quadratic() * x * x + self.linear() * x).exp()
    }

    /// Multiplies by the slit mask `exp(−(x − X)²/(2β²))`.
    pub fn masked(&self, slit: &Slit) -> Self {
        let s2 = slit.width_m * slit.width_m;
        let x = slit.center_m;
        GaussianPathState {
            a: self.a - 0.5 / s2,
            c: self.c + x / s2,
            ln_chi: self.ln_chi - x * x / (2.0 * s2),
            ..*self
        }
    }

    /// `‖Ψ‖²` in closed form.
    pub fn norm_sqr(&self) -> f64 {
        let two_a = 2.0 * self.a;
        (2.0 * self.ln_chi.re + self.c * self.c / (-two_a)).exp() * (PI / -two_a).sqrt()
    }

    fn check(self) -> Result<Self> {
        if !(self.a < 0.0) || !self.b.is_finite() || !self.c.is_finite() || !self.d.is_finite() {
            return Err(Error::singular(format!(
                "path state lost normalizability (A = {}, B = {})",
                self.a, self.b
            )));
        }
        if !self.ln_chi.re.is_finite() || !self.ln_chi.im.is_finite() {
            return Err(Error::singular("path constant is not finite"));
        }
        Ok(self)
    }
}

/// Step-local coefficients of one slit-and-section update. They depend on
/// `(A, B)`, the slit width and the section, never on `(C, D)` or the slit
/// center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianStepCoeffs {
    pub p1: Complex64,
    pub p2: Complex64,
    pub p3: Complex64,
    pub p4: f64,
    pub p5: f64,
    pub zeta_c: f64,
    pub zeta_d: f64,
    pub sqrt_xi: Complex64,
    pub a_next: f64,
    pub b_next: f64,
}

/// Initial state on plane 1 for a section with `b ≠ 0`.
pub fn init_gaussian(sigma0: f64, segment: &Segment) -> Result<GaussianPathState> {
    if segment.is_degenerate() {
        return diffract_degenerate(&GaussianPathState::source(sigma0), &segment.matrix);
    }
    let state = match segment.oscillator {
        Some(ho) => init_oscillator(sigma0, &ho),
        None => init_lct(sigma0, &segment.matrix),
    };
    state.check()
}

fn init_lct(sigma0: f64, m: &LctMatrix) -> GaussianPathState {
    let (a, b, d) = (m.a, m.b, m.d);
    let s2 = sigma0 * sigma0;
    let s4 = s2 * s2;
    let den = 4.0 * PI * PI * a * a * s4 + b * b;
    let a0 = -2.0 * PI * PI * s2 / den;
    let b0 = PI * d / b - 4.0 * PI.powi(3) * a * s4 / (b * den);
    let p0 = Complex64::new(-0.5 / s2, PI * a / b);
    let norm = 1.0 / (sigma0 * PI.sqrt()).sqrt();
    let chi = norm * phase_minus_quarter() * sqrt_recip_real(b) * psqrt(PI / -p0);
    GaussianPathState {
        a: a0,
        b: b0,
        c: 0.0,
        d: 0.0,
        ln_chi: chi.ln(),
    }
}

fn init_oscillator(sigma0: f64, ho: &OscillatorSection) -> GaussianPathState {
    let (sa, ca) = ho.alpha.sin_cos();
    let (lam, m) = (ho.lambda, ho.mass_hat);
    let s2 = sigma0 * sigma0;
    let s4 = s2 * s2;
    let a0 = -m * m * s2 / (2.0 * ca * ca * m * m * s4 + 2.0 * lam * lam);
    let b0 = ca * m * (lam * lam - sa * sa * m * m * s4)
        / (2.0 * lam * (ca * ca * m * m * s4 + lam * lam));
    // The kernel prefactor is split as e^{-iπ/4} sqrt(m̂/(2πλ)) so that the
    // branch agrees with the matrix form for either sign of sin α.
    let p0 = Complex64::new(-0.5 / s2, m * ca / (2.0 * lam));
    let norm = 1.0 / (sigma0 * PI.sqrt()).sqrt();
    let chi = norm
        * phase_minus_quarter()
        * sqrt_recip_real(2.0 * PI * lam / m)
        * psqrt(PI / -p0);
    GaussianPathState {
        a: a0,
        b: b0,
        c: 0.0,
        d: 0.0,
        ln_chi: chi.ln(),
    }
}

/// Coefficients for masking with a slit of width `s` and crossing `segment`.
pub fn step_coeffs(a: f64, b: f64, s: f64, segment: &Segment) -> Result<GaussianStepCoeffs> {
    match segment.oscillator {
        Some(ho) => step_coeffs_oscillator(a, b, s, &ho),
        None => step_coeffs_lct(a, b, s, &segment.matrix),
    }
}

fn step_coeffs_lct(a_st: f64, b_st: f64, s: f64, m: &LctMatrix) -> Result<GaussianStepCoeffs> {
    let (a, b, d) = (m.a, m.b, m.d);
    if b == 0.0 {
        return Err(Error::singular("closed-form step needs b ≠ 0"));
    }
    let s2 = s * s;
    let s4 = s2 * s2;
    let lam = Complex64::new(b * a_st, b * b_st + PI * a);
    let rho = 4.0 * s4 * (a_st * a_st + b_st * b_st) - 4.0 * a_st * s2 + 1.0;
    let zeta = b * b * rho + 4.0 * PI * a * s4 * (PI * a + 2.0 * b_st * b);
    if !(zeta.abs() > 0.0) || !zeta.is_finite() {
        return Err(Error::singular(format!("degenerate step denominator ζ = {zeta}")));
    }
    let a_next = 2.0 * PI * PI * s2 * (2.0 * a_st * s2 - 1.0) / zeta;
    let b_next = PI * (d * zeta - 4.0 * PI * s4 * (PI * a + b_st * b)) / (b * zeta);
    let zeta_c = 4.0 * PI * s2 * (PI * a + b_st * b) / zeta;
    let zeta_d = 2.0 * PI * b * (2.0 * a_st * s2 - 1.0) / zeta;
    let varsigma = b * (b - 2.0 * s2 * lam.conj());
    let p3 = varsigma / zeta;
    let p2 = s2 * p3 / 2.0;
    let p1 = lam * (b - 2.0 * s2 * lam.conj()) / zeta;
    // sqrt(ξ) with ξ = 2πs²/(i(b − 2s²λ̃)), split along the kernel prefactor.
    let p = (2.0 * s2 * lam - b) / (2.0 * s2 * b);
    let sqrt_xi = phase_minus_quarter() * sqrt_recip_real(b) * psqrt(PI / -p);
    Ok(GaussianStepCoeffs {
        p1,
        p2,
        p3,
        p4: s2 * zeta_c,
        p5: -s2 * zeta_d,
        zeta_c,
        zeta_d,
        sqrt_xi,
        a_next,
        b_next,
    })
}

fn step_coeffs_oscillator(
    a_st: f64,
    b_st: f64,
    s: f64,
    ho: &OscillatorSection,
) -> Result<GaussianStepCoeffs> {
    let (sa, ca) = ho.alpha.sin_cos();
    let (lam, m) = (ho.lambda, ho.mass_hat);
    let s2 = s * s;
    let s4 = s2 * s2;
    let rho = 4.0 * s4 * (a_st * a_st + b_st * b_st) - 4.0 * a_st * s2 + 1.0;
    let zeta = 4.0 * b_st * s4 * ca * lam * m + s4 * ca * ca * m * m + lam * lam * rho;
    if !(zeta.abs() > 0.0) || !zeta.is_finite() {
        return Err(Error::singular(format!("degenerate step denominator ζ = {zeta}")));
    }
    let a_next = s2 * m * m * (2.0 * a_st * s2 - 1.0) / (2.0 * zeta);
    let cos2 = (2.0 * ho.alpha).cos();
    let b_next = m * (2.0 * b_st * s4 * cos2 * m + ca * lam * rho) / (2.0 * zeta)
        - s4 * m * m * m * ca * sa * sa / (2.0 * lam * zeta);
    let varsigma =
        s2 * (ca * m + 2.0 * lam * Complex64::new(b_st, -a_st)) + I * lam;
    let p1 = -(2.0 * lam * Complex64::new(a_st, b_st) + I * ca * m) / (2.0 * I * varsigma);
    let p3 = -lam / (I * varsigma);
    let p2 = s2 * p3 / 2.0;
    let zeta_c = s2 * m * (2.0 * b_st * lam + ca * m) / zeta;
    let zeta_d = lam * m * (2.0 * a_st * s2 - 1.0) / zeta;
    let p = Complex64::new(a_st - 0.5 / s2, b_st + m * ca / (2.0 * lam));
    let sqrt_xi =
        phase_minus_quarter() * sqrt_recip_real(2.0 * PI * lam / m) * psqrt(PI / -p);
    Ok(GaussianStepCoeffs {
        p1,
        p2,
        p3,
        p4: s2 * zeta_c,
        p5: -s2 * zeta_d,
        zeta_c,
        zeta_d,
        sqrt_xi,
        a_next,
        b_next,
    })
}

/// Applies `slit` and then `segment`.
pub fn diffract_step(
    state: &GaussianPathState,
    slit: &Slit,
    segment: &Segment,
) -> Result<GaussianPathState> {
    if segment.is_degenerate() {
        return diffract_degenerate(&state.masked(slit), &segment.matrix);
    }
    let k = step_coeffs(state.a, state.b, slit.width_m, segment)?;
    let x = slit.center_m;
    let q = state.linear();
    let ln_chi = state.ln_chi + k.sqrt_xi.ln() + k.p1 * x * x + k.p2 * q * q + k.p3 * q * x;
    GaussianPathState {
        a: k.a_next,
        b: k.b_next,
        c: k.zeta_c * x + k.p4 * state.c + k.p5 * state.d,
        d: k.zeta_d * x - k.p5 * state.c + k.p4 * state.d,
        ln_chi,
    }
    .check()
}

/// A `b = 0` section `(a, 0, c, 1/a)`, applied as `scale(a)` then `chirp(c/a)`.
pub fn diffract_degenerate(state: &GaussianPathState, m: &LctMatrix) -> Result<GaussianPathState> {
    if m.b != 0.0 {
        return Err(Error::domain("degenerate section must have b = 0"));
    }
    if m.a == 0.0 {
        return Err(Error::domain("degenerate section with a = 0"));
    }
    scaled(state, m.a).map(|s| chirped(&s, m.c / m.a))
}

/// `Ψ(x) → Ψ(x/a)/√a`.
pub fn scaled(state: &GaussianPathState, a: f64) -> Result<GaussianPathState> {
    if a == 0.0 {
        return Err(Error::domain("scale factor must be nonzero"));
    }
    if a == 1.0 {
        return Ok(*state);
    }
    Ok(GaussianPathState {
        a: state.a / (a * a),
        b: state.b / (a * a),
        c: state.c / a,
        d: state.d / a,
        ln_chi: state.ln_chi - 0.5 * Complex64::new(a, 0.0).ln(),
    })
}

/// `Ψ(x) → e^{iπcx²} Ψ(x)`.
pub fn chirped(state: &GaussianPathState, c: f64) -> GaussianPathState {
    GaussianPathState {
        b: state.b + PI * c,
        ..*state
    }
}

/// The same update derived directly from the Gaussian integral, without the
/// real-valued bookkeeping. Used to cross-check the recursion.
pub fn diffract_step_direct(
    state: &GaussianPathState,
    slit: &Slit,
    m: &LctMatrix,
) -> GaussianPathState {
    let masked = state.masked(slit);
    let alpha = masked.quadratic() + I * PI * m.a / m.b;
    let beta0 = masked.linear();
    let quad = I * PI * m.d / m.b + PI * PI / (m.b * m.b * alpha);
    let lin = I * PI * beta0 / (m.b * alpha);
    let pref = phase_minus_quarter() * sqrt_recip_real(m.b) * psqrt(PI / -alpha);
    GaussianPathState {
        a: quad.re,
        b: quad.im,
        c: lin.re,
        d: lin.im,
        ln_chi: masked.ln_chi + pref.ln() - beta0 * beta0 / (4.0 * alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{self, PhotonConstants};

    fn seg(a: f64, b: f64, d: f64) -> Segment {
        Segment::lct(LctMatrix::new(a, b, (a * d - 1.0) / b, d).unwrap())
    }

    fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
        (x - y).norm() <= tol * x.norm().max(y.norm())
    }

    #[test]
    fn recursion_matches_direct_integral() {
        let st = init_gaussian(20e-6, &seg(-0.6, -2.3e-8, 0.4)).unwrap();
        for &(a, b, d) in &[(0.7, 1.3e-7, 1.1), (-1.2, -4.0e-8, 0.3), (0.0, 2.0e-7, 0.5)] {
            let slit = Slit::new(37e-6, 9e-6);
            let m = seg(a, b, d);
            let s1 = diffract_step(&st, &slit, &m).unwrap();
            let s2 = diffract_step_direct(&st, &slit, &m.matrix);
            for x in [-1e-4, 0.0, 3e-5, 2e-4] {
                assert!(close(s1.amplitude(x), s2.amplitude(x), 1e-11));
            }
        }
    }

    #[test]
    fn wide_slit_equals_composed_section() {
        let lambda = 650e-9;
        let m1 = optics::free_space(0.1, lambda).unwrap();
        let m2 = optics::free_space(0.2, lambda).unwrap();
        let st = init_gaussian(20e-6, &Segment::lct(m1)).unwrap();
        let wide = Slit::new(0.0, 1e3);
        let stepped = diffract_step(&st, &wide, &Segment::lct(m2)).unwrap();
        let direct = init_gaussian(20e-6, &Segment::lct(optics::compose(&m2, &m1))).unwrap();
        for x in [-3e-4, 0.0, 1e-4] {
            assert!(close(stepped.amplitude(x), direct.amplitude(x), 1e-9));
        }
    }

    #[test]
    fn oscillator_column_matches_matrix_column() {
        let consts = PhotonConstants::new(650e-9).unwrap();
        let period = 2.0 * PI / consts.omega;
        for frac in [0.13, 0.37, 0.61, 0.83] {
            let ho = Segment::oscillator(frac * period, &consts).unwrap();
            let lct = Segment::lct(ho.matrix);
            let g1 = init_gaussian(20e-6 * 1e-3, &ho).unwrap();
            let g2 = init_gaussian(20e-6 * 1e-3, &lct).unwrap();
            let slit = Slit::new(3e-9, 7e-9);
            let s1 = diffract_step(&g1, &slit, &ho).unwrap();
            let s2 = diffract_step(&g2, &slit, &lct).unwrap();
            for x in [-2e-8, 0.0, 1e-8] {
                assert!(close(g1.amplitude(x), g2.amplitude(x), 1e-10), "init {frac}");
                assert!(close(s1.amplitude(x), s2.amplitude(x), 1e-10), "step {frac}");
            }
        }
    }

    #[test]
    fn degenerate_sections() {
        let st = GaussianPathState {
            a: -3.0,
            b: 1.2,
            c: 0.4,
            d: -0.7,
            ln_chi: Complex64::new(0.1, 0.3),
        };
        assert_eq!(scaled(&st, 1.0).unwrap(), st);
        let back = chirped(&chirped(&st, 0.8), -0.8);
        assert!((back.b - st.b).abs() < 1e-15);
        let round = scaled(&scaled(&st, 2.0).unwrap(), 0.5).unwrap();
        assert!(close(round.amplitude(0.37), st.amplitude(0.37), 1e-14));
        let m = LctMatrix::new(2.0, 0.0, 0.3, 0.5).unwrap();
        let out = diffract_degenerate(&st, &m).unwrap();
        let x: f64 = 0.21;
        let expect = st.amplitude(x / 2.0) * (I * PI * 0.3 * 0.5 * x * x).exp() / 2f64.sqrt();
        assert!(close(out.amplitude(x), expect, 1e-14));
    }

    #[test]
    fn square_root_of_xi_is_principal() {
        let (a_st, b_st, s) = (-1.1e9, 3.0e8, 8e-6);
        for &(a, b, d) in &[(0.4, 2e-7, 0.9), (-0.7, -3e-8, 1.3)] {
            let k = step_coeffs(a_st, b_st, s, &seg(a, b, d)).unwrap();
            let lam = Complex64::new(b * a_st, b * b_st + PI * a);
            let xi = 2.0 * PI * s * s / (I * (b - 2.0 * s * s * lam));
            assert!(close(k.sqrt_xi * k.sqrt_xi, xi, 1e-12));
            assert!(close(k.sqrt_xi, psqrt(xi), 1e-12));
        }
    }
}
