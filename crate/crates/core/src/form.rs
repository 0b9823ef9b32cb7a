//! Explicit quadratic-form representation of a path amplitude as a function of
//! the slit centers it crosses, and the closed rational polynomials for the
//! three-section Gaussian case.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::engine::{gaussian, hermite};
use crate::error::{Error, Result};
use crate::numeric::{binomial, hermite as hermite_poly, ComplexNeumaier};
use crate::optics::LctMatrix;
use crate::setup::{Setup, Source};

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `Ψ(x) = Υ exp(Xᵀ H X) exp((A + iB) x²) exp((hᵀX) x)` with `X` the slit
/// centers of the path.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    pub ln_upsilon: Complex64,
    pub a: f64,
    pub b: f64,
    pub h_matrix: CMat,
    pub h_vector: CVec,
}

impl QuadraticForm {
    pub fn upsilon(&self) -> Complex64 {
        self.ln_upsilon.exp()
    }

    pub fn exponent(&self, centers: &[f64], x: f64) -> Complex64 {
        let xv = CVec::from_iterator(centers.len(), centers.iter().map(|&v| c(v)));
        let quad = (xv.transpose() * &self.h_matrix * &xv)[(0, 0)];
        let lin = (self.h_vector.transpose() * &xv)[(0, 0)];
        quad + Complex64::new(self.a, self.b) * x * x + lin * x
    }

    pub fn evaluate(&self, centers: &[f64], x: f64) -> Complex64 {
        (self.ln_upsilon + self.exponent(centers, x)).exp()
    }
}

fn require_closed_form(setup: &Setup) -> Result<()> {
    if setup.segments.iter().any(|s| s.is_degenerate()) {
        return Err(Error::domain(
            "the quadratic form needs b ≠ 0 on every section",
        ));
    }
    Ok(())
}

/// Quadratic form of path `n` for a Gaussian source.
pub fn build_gaussian_form(setup: &Setup, n: u64) -> Result<QuadraticForm> {
    let sigma0 = match setup.source {
        Source::Gaussian { sigma0_m } => sigma0_m,
        _ => return Err(Error::domain("Gaussian form needs a Gaussian source")),
    };
    require_closed_form(setup)?;
    let slits = setup.path_slits(n);
    let dim = slits.len();
    let init = gaussian::init_gaussian(sigma0, &setup.segments[0])?;
    let (mut a, mut b) = (init.a, init.b);
    let mut ln_upsilon = init.ln_chi;
    let mut h = CMat::zeros(dim, dim);
    // ladder[k] = real 2-vector coefficient of X_k in (C, D) on the current plane.
    let mut ladder: Vec<[f64; 2]> = Vec::with_capacity(dim);
    for (j, slit) in slits.iter().enumerate() {
        let k = gaussian::step_coeffs(a, b, slit.width_m, &setup.segments[j + 1])?;
        ln_upsilon += k.sqrt_xi.ln();
        h[(j, j)] += k.p1;
        let w: Vec<Complex64> = ladder.iter().map(|v| Complex64::new(v[0], v[1])).collect();
        for (r, wr) in w.iter().enumerate() {
            for (s, ws) in w.iter().enumerate() {
                h[(r, s)] += k.p2 * wr * ws;
            }
            h[(j, r)] += k.p3 * wr;
        }
        for v in ladder.iter_mut() {
            *v = [k.p4 * v[0] + k.p5 * v[1], -k.p5 * v[0] + k.p4 * v[1]];
        }
        ladder.push([k.zeta_c, k.zeta_d]);
        a = k.a_next;
        b = k.b_next;
    }
    let h_vector = CVec::from_iterator(dim, ladder.iter().map(|v| Complex64::new(v[0], v[1])));
    // Entries above the diagonal in the last column never receive a term.
    debug_assert!((0..dim.saturating_sub(1)).all(|r| h[(r, dim - 1)] == c(0.0)));
    Ok(QuadraticForm {
        ln_upsilon,
        a,
        b,
        h_matrix: h,
        h_vector,
    })
}

/// `Ψ(x) = Υ exp(XᵀHX) exp(u x²) exp((γᵀX) x) H_l(g x + ηᵀX)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HgQuadraticForm {
    pub ln_upsilon: Complex64,
    pub h_matrix: CMat,
    pub gamma: CVec,
    pub eta: CVec,
    pub u: Complex64,
    pub g: Complex64,
    pub order: u32,
}

impl HgQuadraticForm {
    pub fn upsilon(&self) -> Complex64 {
        self.ln_upsilon.exp()
    }

    fn dots(&self, centers: &[f64]) -> (Complex64, Complex64, Complex64) {
        let xv = CVec::from_iterator(centers.len(), centers.iter().map(|&v| c(v)));
        let quad = (xv.transpose() * &self.h_matrix * &xv)[(0, 0)];
        let lin = (self.gamma.transpose() * &xv)[(0, 0)];
        let arg = (self.eta.transpose() * &xv)[(0, 0)];
        (quad, lin, arg)
    }

    pub fn evaluate(&self, centers: &[f64], x: f64) -> Complex64 {
        let (quad, lin, arg) = self.dots(centers);
        (self.ln_upsilon + quad + self.u * x * x + lin * x).exp()
            * hermite_poly(self.order, self.g * x + arg)
    }
}

/// Quadratic form of path `n` for a Hermite-Gaussian source.
pub fn build_hg_form(setup: &Setup, n: u64) -> Result<HgQuadraticForm> {
    let (w0, order) = match setup.source {
        Source::HermiteGaussian { w0_m, order } => (w0_m, order),
        _ => return Err(Error::domain("Hermite-Gaussian form needs a Hermite-Gaussian source")),
    };
    require_closed_form(setup)?;
    let slits = setup.path_slits(n);
    let dim = slits.len();
    let init = hermite::init_hg(w0, order, &setup.segments[0])?;
    let (mut u, mut g) = (init.u, init.g);
    let mut ln_upsilon = init.ln_chi;
    let mut h = CMat::zeros(dim, dim);
    // gamma_star = coefficients of X in v on the current plane.
    let mut gamma_star = CVec::zeros(dim);
    let mut coeffs = Vec::with_capacity(dim);
    let mut ladders = Vec::with_capacity(dim);
    for (j, slit) in slits.iter().enumerate() {
        let s2 = slit.width_m * slit.width_m;
        let k = hermite::step_coeffs(u, g, order, slit.width_m, &setup.segments[j + 1].matrix)?;
        ln_upsilon += k.prefactor.ln();
        for r in 0..j {
            for s in 0..j {
                h[(r, s)] += k.theta_a * gamma_star[r] * gamma_star[s];
            }
            h[(j, r)] += k.theta_b * gamma_star[r];
        }
        h[(j, j)] += k.theta_c;
        ladders.push(gamma_star.clone());
        let mut next = gamma_star.map(|z| z * s2);
        next[j] += c(1.0);
        gamma_star = next * k.v_a;
        u = k.u_next;
        g = k.g_next;
        coeffs.push(k);
    }
    // η = Σ_j Ξ_j γ*^{(j)} + ε with ε_j = h_b,j ∏_{m>j} h_a,m and
    // Ξ_j = h_c,j+1 ∏_{k≥j+2} h_a,k, where γ*^{(j)} is the v-ladder entering
    // step j+1.
    let tail = |from: usize| -> Complex64 {
        coeffs[from..].iter().fold(c(1.0), |acc, k| acc * k.h_a)
    };
    let mut eta = CVec::zeros(dim);
    for j in 0..dim {
        eta[j] += coeffs[j].h_b * tail(j + 1);
        if j + 1 < dim {
            eta += &ladders[j + 1] * (coeffs[j + 1].h_c * tail(j + 2));
        }
    }
    Ok(HgQuadraticForm {
        ln_upsilon,
        h_matrix: h,
        gamma: gamma_star,
        eta,
        u,
        g,
        order,
    })
}

/// Result of the binomial-expansion evaluation for uniform slit widths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformHgReport {
    pub positions: Vec<f64>,
    #[serde(skip)]
    pub amplitude: Vec<Complex64>,
    #[serde(skip)]
    pub direct: Vec<Complex64>,
    /// `max |expansion − direct| / max |direct|`.
    pub max_rel_diff: f64,
}

/// Evaluates the total sensor field from a single path-independent form,
/// expanding `H_l(gx + ηᵀX) = Σ_k C(l,k) H_k(gx) (2ηᵀX)^{l−k}`, and compares
/// it with the direct path sum.
pub fn uniform_hg_form(setup: &Setup, xs: &[f64]) -> Result<UniformHgReport> {
    if !setup.uniform_widths() {
        return Err(Error::domain("uniform slit widths are required on every plane"));
    }
    setup.check_path_cap()?;
    let form = build_hg_form(setup, 0)?;
    let l = form.order;
    let count = setup.path_count();
    let dots: Vec<(Complex64, Complex64, Complex64)> = (0..count)
        .map(|n| {
            let centers: Vec<f64> = setup.path_slits(n).iter().map(|s| s.center_m).collect();
            form.dots(&centers)
        })
        .collect();
    let amplitude: Vec<Complex64> = xs
        .iter()
        .map(|&x| {
            let hk = crate::numeric::hermite_all(l, form.g * x);
            let mut total = ComplexNeumaier::new();
            for k in 0..=l {
                let mut s = ComplexNeumaier::new();
                for &(quad, lin, arg) in &dots {
                    s.add((quad + lin * x).exp() * (2.0 * arg).powu(l - k));
                }
                total.add(binomial(l, k) * hk[k as usize] * s.value());
            }
            (form.ln_upsilon + form.u * x * x).exp() * total.value()
        })
        .collect();
    let direct = crate::engine::sensor_field(setup, xs)?;
    let peak = direct.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = amplitude
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(UniformHgReport {
        positions: xs.to_vec(),
        amplitude,
        direct,
        max_rel_diff: if peak > 0.0 { diff / peak } else { diff },
    })
}

/// Parameters of the three-section, two-plane Gaussian case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreePlaneParams {
    pub beta1: f64,
    pub beta2: f64,
    pub sigma0: f64,
    pub m01: LctMatrix,
    pub m12: LctMatrix,
    pub m23: LctMatrix,
}

/// Quantities assembled from the closed rational polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreePlaneValues {
    pub h_matrix: [[Complex64; 2]; 2],
    pub h_vector: [Complex64; 2],
    /// Determined up to the sign of the square root.
    pub upsilon: Complex64,
    pub quadratic: Complex64,
}

/// Evaluates the closed rational polynomials in `(β₁, β₂, σ₀)` for two slit
/// planes and three sections.
pub fn evaluate_three_plane_polynomials(p: &ThreePlaneParams) -> Result<ThreePlaneValues> {
    if [p.m01.b, p.m12.b, p.m23.b].contains(&0.0) {
        return Err(Error::domain("every section needs b ≠ 0"));
    }
    let i = Complex64::i();
    let pi = c(PI);
    let (a01, b01, d01) = (c(p.m01.a), c(p.m01.b), c(p.m01.d));
    let (a12, b12, d12) = (c(p.m12.a), c(p.m12.b), c(p.m12.d));
    let (a23, b23, d23) = (c(p.m23.a), c(p.m23.b), c(p.m23.d));
    let be1 = c(p.beta1);
    let be2 = c(p.beta2);
    let s0 = c(p.sigma0);
    let sq = |z: Complex64| z * z;
    let p2 = sq(pi);
    let p3 = p2 * pi;
    let p4 = p2 * p2;
    let b1_2 = sq(be1);
    let b1_4 = sq(b1_2);
    let b2_2 = sq(be2);
    let b2_4 = sq(b2_2);
    let s0_2 = sq(s0);
    let s0_4 = sq(s0_2);

    let q11 = a12 * b01 + b12 * d01;
    let q12 = a23 * b12 + b23 * d12;
    let q7 = -b01 * b23 + a12 * b01 * q12 + b12 * d01 * q12;
    let q10 = sq(b12 * q12 - a01 * q7);
    let q13 = sq(b12) * sq(d01) * b1_2 + 2.0 * a12 * b01 * b12 * d01 * b1_2 + (sq(a12) * b1_2 + b2_2) * sq(b01);
    let q14 = 2.0 * b1_2 * p2 * b2_2 + sq(b12);
    let q19 = a01 * a12 * b01 - b12 + a01 * b12 * d01;
    let q15 = a01 * b01 * b12 - 2.0 * i * b1_2 * q19 * pi;
    let q23 = b23 * q11 * b1_2 + a23 * b2_2 * b01 * b12 + b2_2 * b01 * b23 * d12;
    let q16 = -4.0 * i * b1_2 * q7 * p2 * b2_2 + b01 * sq(b12) * b23 * i + 2.0 * b12 * pi * q23;
    let q17 = a01 * q23 - b1_2 * b12 * b23;
    let q18 = 2.0 * pi * q19 * b1_2 + a01 * b01 * b12 * i;
    let q20 = sq(b01) + 4.0 * p2 * s0_2 * (b1_2 + sq(a01) * s0_2);
    let q24 = sq(a12) * sq(b01) * b1_4 + sq(b12) * sq(d01) * b1_4 + 2.0 * a12 * b01 * b12 * d01 * b1_4
        + 2.0 * b2_2 * sq(b01) * b1_2
        + b2_4 * sq(b01) * sq(d12);
    let q25 = b23 * d12 * d23 + b12 * (a23 * d23 - 1.0);
    let q26 = b23 * d12 * d23 - b12;
    let q27 = b12 - 2.0 * b23 * d12 * d23;
    let q28 = q13 * sq(a01) - 2.0 * b1_2 * b12 * q11 * a01 + b1_2 * sq(b12);
    let q3 = b23 * d23 * sq(q11) * b1_4 + 2.0 * b2_2 * sq(b01) * b23 * d23 * b1_2 + b2_4 * sq(b01) * d12 * q26;
    let q2 = sq(a23) * sq(b01) * sq(b12) * d23 * b2_4 - a23 * sq(b01) * b12 * q27 * b2_4 + b23 * q3;
    let q1 = sq(b12) * sq(b23) * d23 * b1_4 - 2.0 * a01 * b12 * sq(b23) * q11 * d23 * b1_4 + sq(a01) * q2;
    let q4 = b12 * (b12 - q12 * d23) - a01 * b12 * q11 + a01 * d23 * q7;
    let q5 = -b01 * b23 * d23 + a12 * b01 * q25 + b12 * d01 * q25;
    let q6 = (b1_2 * sq(b23) + b2_2 * sq(q12)) * d23 - b2_2 * b12 * q12;
    let q8 = sq(a23) * sq(b01) * sq(b12) * b2_4 + 2.0 * a23 * sq(b01) * b12 * b23 * d12 * b2_4 + sq(b23) * q24;
    let q9 = 4.0 * p2 * (b1_2 * sq(b23) + b2_2 * sq(q12)) * b2_2 + sq(b12) * sq(b23);
    let q21 = sq(b12) * sq(b23) * b1_4 - 2.0 * a01 * b12 * sq(b23) * q11 * b1_4 + sq(a01) * q8;
    let q22 = 16.0 * b1_4 * p4 * q10 * b2_4 + sq(a01) * sq(b01) * sq(sq(b12)) * sq(b23) + 4.0 * sq(b12) * p2 * q21;
    let q30 = 4.0 * p2 * q19 * (a01 * q7 - b12 * q12) * b1_4 + sq(a01) * sq(b01) * sq(b12) * q12;
    let q29 = 4.0 * sq(b01) * p2 * q11 * q7 * b1_4
        + sq(sq(b01)) * sq(b12) * q12
        + 4.0 * p2 * s0_2 * (2.0 * b1_2 * sq(b01) * q12 * sq(b12) + q30 * s0_2);

    let pol1 = pi
        * (-2.0 * i * b01 * q7 * pi * b2_2
            - 2.0 * pi * (2.0 * pi * (a01 * q7 - b12 * q12) * b2_2 + b12 * b23 * i * q19) * s0_2
            + b01 * b12 * b23 * q11);
    let pol2 = 2.0
        * pi
        * (4.0 * b1_2 * p2 * (a01 * q7 - b12 * q12) * b2_2 - a01 * b01 * sq(b12) * b23
            + 2.0 * b12 * i * pi * q17)
        * s0_2
        + b01 * (4.0 * b1_2 * i * p2 * q7 * b2_2 + b01 * sq(b12) * b23 * (-i) - 2.0 * b12 * q23 * pi);
    let pol3 = -2.0 * b01 * b12 * b23 * pi * (2.0 * a01 * pi * s0_2 + b01 * i);
    let pol4 = pi
        * (b01 * (b01 * b12 * q12 - 2.0 * i * b1_2 * q7 * pi)
            - 2.0 * pi * (2.0 * pi * (a01 * q7 - b12 * q12) * b1_2 + a01 * b01 * b12 * i * q12) * s0_2);
    let bracket = sq(b12) * sq(sq(b01))
        + 4.0 * b1_2 * p2 * q13 * sq(b01)
        + 4.0 * p2 * s0_2 * (2.0 * b1_2 * q14 * sq(b01) + (4.0 * p2 * q28 * b1_2 + sq(a01) * sq(b01) * sq(b12)) * s0_2);
    let pol5 = -4.0 * b2_2 * sq(b01) * b12 * sq(b12) * b23 * p2 * q20 * bracket;
    let pol13 = (16.0 * b1_4 * p4 * sq(q7) * b2_4 + sq(b01) * sq(sq(b12)) * sq(b23) + 4.0 * sq(b12) * p2 * q8) * sq(b01)
        + 4.0 * p2 * s0_2 * (2.0 * b1_2 * sq(b01) * q9 * sq(b12) + q22 * s0_2);
    let pol6 = (4.0 * sq(b01) * p2 * sq(q11) * b1_4
        + sq(sq(b01)) * sq(b12)
        + 4.0 * p2 * s0_2 * (2.0 * b1_2 * sq(b01) * sq(b12) + (4.0 * p2 * sq(q19) * b1_4 + sq(a01) * sq(b01) * sq(b12)) * s0_2))
        * pol13;
    let pol7 = 16.0 * b1_2 * b2_4 * b01 * b12 * p4 * (4.0 * a01 * p2 * q19 * s0_4 + sq(b01) * q11) * q29;
    let pol10 = i
        * b1_2
        * b2_2
        * b01
        * b12
        * s0
        * (b01 - 2.0 * i * a01 * pi * s0_2)
        * (b01 * (b01 * b12 - 2.0 * i * b1_2 * q11 * pi) - 2.0 * pi * q18 * s0_2);
    let pol8 = -8.0 * b1_2 * b2_2 * b01 * sq(b12) * b23 * p3 * (4.0 * a01 * p2 * q19 * s0_4 + sq(b01) * q11) * bracket;
    let pol9 = -8.0 * b2_4 * sq(b01) * sq(b12) * p3 * q20 * q29;
    let pol12 = 2.0
        * b2_2
        * sq(b12)
        * p2
        * (-4.0 * b1_2 * q13 * p2 * sq(b01) - 8.0 * b1_2 * p2 * q14 * s0_2 * sq(b01)
            - 4.0 * (4.0 * p4 * q28 * b1_2 + sq(a01) * sq(b01) * sq(b12) * p2) * s0_4
            - sq(sq(b01)) * sq(b12));
    let pol11 = (2.0 * a01 * pi * s0_2 + b01 * i)
        * (2.0 * pi * q15 * s0_2 + b01 * (2.0 * pi * q11 * b1_2 + b01 * b12 * i))
        * (b01 * q16
            - 2.0
                * pi
                * (4.0 * b1_2 * p2 * (a01 * q7 - b12 * q12) * b2_2 - a01 * b01 * sq(b12) * b23
                    + 2.0 * b12 * i * pi * q17)
                * s0_2);
    let pol14 = 4.0
        * p3
        * s0_2
        * (s0_2
            * (sq(a01) * sq(b01) * sq(sq(b12)) * sq(b23) * d23
                + 16.0 * p4 * b1_4 * b2_4 * q4 * (a01 * q7 - b12 * q12)
                + 4.0 * p2 * sq(b12) * q1)
            + 2.0 * b1_2 * sq(b01) * sq(b12) * (4.0 * p2 * b2_2 * q6 + sq(b12) * sq(b23) * d23))
        + pi * sq(b01) * (16.0 * p4 * b1_4 * b2_4 * q5 * q7 + sq(b01) * sq(sq(b12)) * sq(b23) * d23 + 4.0 * p2 * sq(b12) * q2);

    for (name, v) in [("pol2", pol2), ("pol6", pol6), ("pol11", pol11), ("pol13", pol13)] {
        if v.norm() == 0.0 {
            return Err(Error::singular(format!("{name} vanishes")));
        }
    }
    let zero = c(0.0);
    let phase = Complex64::from_polar(1.0, 0.75 * PI);
    Ok(ThreePlaneValues {
        h_matrix: [[pol1 / pol2, zero], [pol3 / (i * pol2), pol4 / pol2]],
        h_vector: [(pol5 + i * pol8) / pol6, (pol7 + i * pol9) / pol6],
        upsilon: -2.0 * phase * 2f64.sqrt() * PI.powf(1.25) * (pol10 / pol11).sqrt(),
        quadratic: pol12 / pol13 + i * pol14 / (b23 * pol13),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;
    use crate::setup::{DiffractionPlane, Slit};

    fn lct(a: f64, b: f64, d: f64) -> LctMatrix {
        LctMatrix::new(a, b, (a * d - 1.0) / b, d).unwrap()
    }

    fn setup(source: Source) -> Setup {
        let planes = vec![
            DiffractionPlane::new(vec![Slit::new(-2e-5, 6e-6), Slit::new(1.5e-5, 6e-6)]),
            DiffractionPlane::new(vec![Slit::new(-1e-5, 9e-6), Slit::new(3e-5, 9e-6)]),
            DiffractionPlane::new(vec![Slit::new(0.0, 7e-6), Slit::new(2e-5, 7e-6)]),
        ];
        let mats = [lct(0.7, 8e-8, 1.1), lct(-0.4, -5e-8, 0.9), lct(1.2, 6e-8, 0.6), lct(1.0, 1e-8, 1.0)];
        Setup::from_matrices(source, planes, &mats, 650e-9).unwrap()
    }

    #[test]
    fn gaussian_form_matches_iteration() {
        let s = setup(Source::Gaussian { sigma0_m: 2e-5 });
        for n in 0..s.path_count() {
            let f = build_gaussian_form(&s, n).unwrap();
            let st = engine::path_state(&s, n).unwrap();
            let centers: Vec<f64> = s.path_slits(n).iter().map(|v| v.center_m).collect();
            for x in [-3e-5, 0.0, 2e-5] {
                let (a, b) = (f.evaluate(&centers, x), st.amplitude(x));
                assert!((a - b).norm() < 1e-10 * b.norm(), "{a} {b}");
            }
        }
    }

    #[test]
    fn single_plane_form() {
        let planes = vec![DiffractionPlane::new(vec![Slit::new(1e-5, 8e-6)])];
        let mats = [lct(0.7, 8e-8, 1.1), lct(1.0, 3e-8, 1.0)];
        let s = Setup::from_matrices(Source::Gaussian { sigma0_m: 2e-5 }, planes, &mats, 650e-9).unwrap();
        let f = build_gaussian_form(&s, 0).unwrap();
        let init = gaussian::init_gaussian(2e-5, &s.segments[0]).unwrap();
        let k = gaussian::step_coeffs(init.a, init.b, 8e-6, &s.segments[1]).unwrap();
        assert_eq!(f.h_matrix[(0, 0)], k.p1);
        assert_eq!(f.h_vector[0], Complex64::new(k.zeta_c, k.zeta_d));
    }

    #[test]
    fn hg_form_matches_iteration() {
        let s = setup(Source::HermiteGaussian { w0_m: 5e-5, order: 3 });
        for n in 0..s.path_count() {
            let f = build_hg_form(&s, n).unwrap();
            let st = engine::path_state(&s, n).unwrap();
            let centers: Vec<f64> = s.path_slits(n).iter().map(|v| v.center_m).collect();
            for x in [-3e-5, 0.0, 2e-5] {
                let (a, b) = (f.evaluate(&centers, x), st.amplitude(x));
                assert!((a - b).norm() < 1e-10 * b.norm(), "{a} {b}");
            }
        }
    }

    #[test]
    fn uniform_expansion_matches_path_sum() {
        let planes = vec![DiffractionPlane::uniform(2, 3e-5, 8e-6), DiffractionPlane::uniform(2, 2e-5, 6e-6)];
        let mats = [lct(0.7, 8e-8, 1.1), lct(-0.4, -5e-8, 0.9), lct(1.0, 1e-8, 1.0)];
        let s = Setup::from_matrices(Source::HermiteGaussian { w0_m: 5e-5, order: 2 }, planes, &mats, 650e-9).unwrap();
        let xs: Vec<f64> = (-20..=20).map(|k| k as f64 * 2e-6).collect();
        let rep = uniform_hg_form(&s, &xs).unwrap();
        assert!(rep.max_rel_diff < 1e-10, "{}", rep.max_rel_diff);
    }

    #[test]
    fn three_plane_polynomials_match_form() {
        let (beta1, beta2, sigma0) = (7e-6, 9e-6, 2e-5);
        let p = ThreePlaneParams {
            beta1,
            beta2,
            sigma0,
            m01: lct(0.7, 8e-8, 1.1),
            m12: lct(-0.4, -5e-8, 0.9),
            m23: lct(1.2, 6e-8, 0.6),
        };
        let t = evaluate_three_plane_polynomials(&p).unwrap();
        let planes = vec![
            DiffractionPlane::new(vec![Slit::new(0.0, beta1)]),
            DiffractionPlane::new(vec![Slit::new(0.0, beta2)]),
        ];
        let s = Setup::from_matrices(Source::Gaussian { sigma0_m: sigma0 }, planes, &[p.m01, p.m12, p.m23], 650e-9).unwrap();
        let f = build_gaussian_form(&s, 0).unwrap();
        let close = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-9 * b.norm().max(1e-300);
        assert!(close(t.quadratic, Complex64::new(f.a, f.b)), "{} {}", t.quadratic, Complex64::new(f.a, f.b));
        for r in 0..2 {
            for col in 0..2 {
                let scale = f.h_matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!((t.h_matrix[r][col] - f.h_matrix[(r, col)]).norm() <= 1e-9 * scale, "H{r}{col}: {} {}", t.h_matrix[r][col], f.h_matrix[(r, col)]);
            }
        }
        let u = f.upsilon();
        assert!(close(t.upsilon, u) || close(-t.upsilon, u), "{} {}", t.upsilon, u);
        // The closed-form linear coefficients disagree with the recursion.
        let worst = (0..2).map(|r| (t.h_vector[r] - f.h_vector[r]).norm() / f.h_vector[r].norm()).fold(0.0, f64::max);
        assert!(worst > 1e-9);
    }
}
