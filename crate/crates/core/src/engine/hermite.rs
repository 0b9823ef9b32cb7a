//! Closed-form recursion for paths of a Hermite-Gaussian source.
//!
//! A path amplitude is `χ exp(u x² + v x) H_l(g x + h)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{factorial, hermite, phase_minus_quarter, psqrt, sqrt_recip_real, I};
use crate::optics::LctMatrix;
use crate::setup::{Segment, Slit};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HgPathState {
    pub u: Complex64,
    pub v: Complex64,
    pub g: Complex64,
    pub h: Complex64,
    pub order: u32,
    /// `ln χ`.
    pub ln_chi: Complex64,
}

impl HgPathState {
    /// The source profile itself.
    pub fn source(w0: f64, order: u32) -> Self {
        let norm = 2f64.powf(0.25) / (w0 * 2f64.powi(order as i32) * factorial(order)).sqrt();
        HgPathState {
            u: Complex64::new(-PI / (w0 * w0), 0.0),
            v: Complex64::new(0.0, 0.0),
            g: Complex64::new((2.0 * PI).sqrt() / w0, 0.0),
            h: Complex64::new(0.0, 0.0),
            order,
            ln_chi: Complex64::new(norm.ln(), 0.0),
        }
    }

    pub fn chi(&self) -> Complex64 {
        self.ln_chi.exp()
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        (self.ln_chi + self.u * x * x + self.v * x).exp() * hermite(self.order, self.g * x + self.h)
    }

    pub fn masked(&self, slit: &Slit) -> Self {
        let s2 = slit.width_m * slit.width_m;
        let x = slit.center_m;
        HgPathState {
            u: self.u - 0.5 / s2,
            v: self.v + x / s2,
            ln_chi: self.ln_chi - x * x / (2.0 * s2),
            ..*self
        }
    }

    fn check(self) -> Result<Self> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !(self.u.re < 0.0) {
            return Err(Error::singular(format!(
                "path state lost normalizability (Re u = {})",
                self.u.re
            )));
        }
        if ![self.u, self.v, self.g, self.h, self.ln_chi].into_iter().all(finite) {
            return Err(Error::singular("path state is not finite"));
        }
        Ok(self)
    }
}

/// Step-local coefficients of one slit-and-section update. They depend on
/// `u`, `g`, the slit width and the section.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HgStepCoeffs {
    pub tau_a: Complex64,
    pub tau: Complex64,
    pub gamma: Complex64,
    pub u_next: Complex64,
    pub v_a: Complex64,
    pub g_next: Complex64,
    pub h_a: Complex64,
    pub h_b: Complex64,
    pub h_c: Complex64,
    pub theta_a: Complex64,
    pub theta_b: Complex64,
    pub theta_c: Complex64,
    /// Constant factor `e^{-iπ/4} sqrt(1/b) sqrt(−2πs²b/τ) w^l`, `w = √Γ/√τ`.
    pub prefactor: Complex64,
}

pub fn init_hg(w0: f64, order: u32, segment: &Segment) -> Result<HgPathState> {
    let m = &segment.matrix;
    if segment.is_degenerate() {
        return diffract_degenerate(&HgPathState::source(w0, order), m);
    }
    let (a, b, d) = (m.a, m.b, m.d);
    let w2 = w0 * w0;
    let w4 = w2 * w2;
    let den = a * a * w4 + b * b;
    let g = Complex64::new((2.0 * PI * w2 / den).sqrt(), 0.0);
    let u = Complex64::new(-PI * w2 / den, PI * d / b - PI * a * w4 / (b * den));
    let p = Complex64::new(-PI / w2, PI * a / b);
    let w = Complex64::new(a * w2, -b) / den.sqrt();
    let norm = 2f64.powf(0.25) / (w0 * 2f64.powi(order as i32) * factorial(order)).sqrt();
    let chi = norm
        * phase_minus_quarter()
        * sqrt_recip_real(b)
        * psqrt(PI / -p)
        * w.powu(order);
    HgPathState {
        u,
        v: Complex64::new(0.0, 0.0),
        g,
        h: Complex64::new(0.0, 0.0),
        order,
        ln_chi: chi.ln(),
    }
    .check()
}

pub fn step_coeffs(u: Complex64, g: Complex64, order: u32, s: f64, m: &LctMatrix) -> Result<HgStepCoeffs> {
    let (a, b, d) = (m.a, m.b, m.d);
    if b == 0.0 {
        return Err(Error::singular("closed-form step needs b ≠ 0"));
    }
    let s2 = s * s;
    let tau_a = b * u + I * PI * a;
    let tau = -b + 2.0 * s2 * tau_a;
    let gamma = 2.0 * s2 * b * g * g + tau;
    if tau.norm() == 0.0 || gamma.norm() == 0.0 {
        return Err(Error::singular("degenerate step denominator (τ or Γ vanishes)"));
    }
    let st = psqrt(tau);
    let sg = psqrt(gamma);
    let u_next = (2.0 * PI * PI * s2 + I * PI * d * tau) / (b * tau);
    let v_a = 2.0 * PI * I / tau;
    let g_next = 2.0 * I * PI * s2 * g / (st * sg);
    let h_a = st / sg;
    let h_b = -b * g / (st * sg);
    let h_c = -s2 * b * g / (st * sg);
    let theta_a = -s2 * b / (2.0 * tau);
    let theta_b = -b / tau;
    let theta_c = -tau_a / tau;
    let w = sg / st;
    let prefactor = phase_minus_quarter()
        * sqrt_recip_real(b)
        * psqrt(-2.0 * PI * s2 * b / tau)
        * w.powu(order);
    Ok(HgStepCoeffs {
        tau_a,
        tau,
        gamma,
        u_next,
        v_a,
        g_next,
        h_a,
        h_b,
        h_c,
        theta_a,
        theta_b,
        theta_c,
        prefactor,
    })
}

pub fn diffract_step(state: &HgPathState, slit: &Slit, segment: &Segment) -> Result<HgPathState> {
    let m = &segment.matrix;
    if segment.is_degenerate() {
        return diffract_degenerate(&state.masked(slit), m);
    }
    let k = step_coeffs(state.u, state.g, state.order, slit.width_m, m)?;
    let x = slit.center_m;
    let s2 = slit.width_m * slit.width_m;
    let v = state.v;
    let ln_chi = state.ln_chi
        + k.prefactor.ln()
        + k.theta_a * v * v
        + k.theta_b * v * x
        + k.theta_c * x * x;
    HgPathState {
        u: k.u_next,
        v: k.v_a * (x + s2 * v),
        g: k.g_next,
        h: state.h * k.h_a + k.h_b * x + k.h_c * v,
        order: state.order,
        ln_chi,
    }
    .check()
}

/// A `b = 0` section `(a, 0, c, 1/a)`, applied as `scale(a)` then `chirp(c/a)`.
pub fn diffract_degenerate(state: &HgPathState, m: &LctMatrix) -> Result<HgPathState> {
    if m.b != 0.0 {
        return Err(Error::domain("degenerate section must have b = 0"));
    }
    if m.a == 0.0 {
        return Err(Error::domain("degenerate section with a = 0"));
    }
    let a = m.a;
    let mut out = *state;
    if a != 1.0 {
        out.u = state.u / (a * a);
        out.v = state.v / a;
        out.g = state.g / a;
        out.ln_chi = state.ln_chi - 0.5 * Complex64::new(a, 0.0).ln();
    }
    out.u += I * PI * m.c / a;
    Ok(out)
}

/// Both sides of `∫ exp(−(x−y)²/2) H_l(a x/√2) dx = √(2π) (1−a²)^{l/2} H_l(a y/√(2(1−a²)))`,
/// the left side by the trapezoid rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermiteIntegral {
    pub quadrature: f64,
    pub closed_form: f64,
    /// `∫ exp(−(x−y)²/2) |H_l(a x/√2)| dx`, the size of the cancelling terms.
    pub magnitude: f64,
}

impl HermiteIntegral {
    pub fn rel_error(&self) -> f64 {
        (self.quadrature - self.closed_form).abs() / self.closed_form.abs().max(1e-3 * self.magnitude).max(f64::MIN_POSITIVE)
    }
}

pub fn hermite_integral(order: u32, a: f64, y: f64) -> Result<HermiteIntegral> {
    if !(a.abs() < 1.0) {
        return Err(Error::domain(format!("the identity needs |a| < 1, got {a}")));
    }
    let half = 40.0 + (2.0 * order as f64 + 1.0).sqrt();
    let xs = crate::numeric::linspace(y - half, y + half, 16001);
    let dx = xs[1] - xs[0];
    let terms: Vec<f64> = xs
        .iter()
        .map(|&x| (-(x - y) * (x - y) / 2.0).exp() * hermite(order, Complex64::new(a * x / 2f64.sqrt(), 0.0)).re)
        .collect();
    let abs: Vec<f64> = terms.iter().map(|t| t.abs()).collect();
    let s = 1.0 - a * a;
    let closed = (2.0 * PI).sqrt() * s.powf(order as f64 / 2.0)
        * hermite(order, Complex64::new(a * y / (2.0 * s).sqrt(), 0.0)).re;
    Ok(HermiteIntegral {
        quadrature: crate::numeric::trapezoid(&terms, dx),
        closed_form: closed,
        magnitude: crate::numeric::trapezoid(&abs, dx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::gaussian;

    #[test]
    fn hermite_integral_identity() {
        for l in 0..=10 {
            for &(a, y) in &[(0.3, 0.7), (-0.8, 2.5), (0.95, -1.2), (0.0, 3.0)] {
                let r = hermite_integral(l, a, y).unwrap();
                assert!(r.rel_error() < 1e-10, "{l} {a} {y} {r:?}");
            }
        }
        assert!(hermite_integral(2, 1.0, 0.0).is_err());
    }

    fn seg(a: f64, b: f64, d: f64) -> Segment {
        Segment::lct(LctMatrix::new(a, b, (a * d - 1.0) / b, d).unwrap())
    }

    #[test]
    fn order_zero_matches_gaussian_recursion() {
        let sigma = 20e-6;
        let w0 = sigma * (2.0 * PI).sqrt();
        let segs = [seg(0.8, 1.2e-7, 0.6), seg(-0.5, -6e-8, 1.4), seg(1.0, 5.85e-9, 1.0)];
        let slits = [Slit::new(-31e-6, 9e-6), Slit::new(47e-6, 6e-6)];
        let mut g = gaussian::init_gaussian(sigma, &segs[0]).unwrap();
        let mut h = init_hg(w0, 0, &segs[0]).unwrap();
        for (slit, s) in slits.iter().zip(&segs[1..]) {
            g = gaussian::diffract_step(&g, slit, s).unwrap();
            h = diffract_step(&h, slit, s).unwrap();
        }
        for x in [-1e-4, -1e-5, 0.0, 4e-5] {
            let (a, b) = (g.amplitude(x), h.amplitude(x));
            assert!((a - b).norm() < 1e-10 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn degenerate_scale_round_trip() {
        let st = HgPathState::source(1.0, 3);
        let two = LctMatrix::new(2.0, 0.0, 0.0, 0.5).unwrap();
        let half = LctMatrix::new(0.5, 0.0, 0.0, 2.0).unwrap();
        let back = diffract_degenerate(&diffract_degenerate(&st, &two).unwrap(), &half).unwrap();
        for x in [-0.7, 0.1, 1.3] {
            assert!((back.amplitude(x) - st.amplitude(x)).norm() < 1e-14);
        }
    }
}
