//! Phase-space and probability diagnostics of fields and path states.
//!
//! Momentum and Wigner transforms use `p = ħκ` with `κ` the angular spatial
//! frequency. Detection probabilities of path sums are exact: pairwise path
//! overlaps are Gaussian integrals, and Hermite factors are integrated by
//! Gauss-Hermite quadrature after completing the square, which is exact for
//! the polynomial degrees involved.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::engine::{self, PathState};
use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::numeric::{hermite, psqrt, ComplexNeumaier, Neumaier};
use crate::optics::{LctMatrix, HBAR};
use crate::setup::{Setup, Source};

/// Boundary magnitude, relative to the peak, above which a field is clipped.
pub const CLIP_RATIO: f64 = 1e-8;

/// Default samples per axis for Wigner grids.
pub const DEFAULT_WIGNER_POINTS: usize = 1024;

fn clip_warning(field: &SampledField) -> Option<String> {
    let r = field.edge_ratio();
    (r > CLIP_RATIO).then(|| format!("field is clipped at the grid boundary (edge/peak = {r:.2e})"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentumField {
    /// Samples over `p` in kg·m/s.
    pub field: SampledField,
    pub warning: Option<String>,
}

/// `Φ(p) = (2πħ)^{-1/2} ∫ Ψ(x) e^{−ipx/ħ} dx` on the FFT momentum grid,
/// `p_k = 2πħk/(NΔx)` for `k = −N/2 .. N/2−1`.
///
/// The discrete transform is unitary: `Σ|Φ|²Δp = Σ|Ψ|²Δx`.
pub fn momentum_transform(field: &SampledField) -> MomentumField {
    let n = field.len();
    let dp = 2.0 * PI * HBAR / (n as f64 * field.dx);
    let mut buf = field.values.clone();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let half = (n / 2) as i64;
    let scale = field.dx / (2.0 * PI * HBAR).sqrt();
    let values = (0..n as i64)
        .map(|j| {
            let k = j - half;
            let p = k as f64 * dp;
            let idx = k.rem_euclid(n as i64) as usize;
            // The grid starts at x0, not at the origin.
            buf[idx] * scale * Complex64::from_polar(1.0, -p * field.x0 / HBAR)
        })
        .collect();
    MomentumField {
        field: SampledField::new(-(half as f64) * dp, dp, values),
        warning: clip_warning(field),
    }
}

/// Real Wigner values on a rectangular `(x, p)` grid, stored row by row in
/// `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WignerGrid {
    pub x0: f64,
    pub dx: f64,
    pub p0: f64,
    pub dp: f64,
    pub nx: usize,
    pub np: usize,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub warning: Option<String>,
}

impl WignerGrid {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.np + ip]
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x0 + self.dx * ix as f64
    }

    pub fn p(&self, ip: usize) -> f64 {
        self.p0 + self.dp * ip as f64
    }

    /// `∫∫ W dx dp`.
    pub fn total(&self) -> f64 {
        let mut acc = Neumaier::new();
        for w in &self.values {
            acc.add(*w);
        }
        acc.value() * self.dx * self.dp
    }

    pub fn abs_total(&self) -> f64 {
        let mut acc = Neumaier::new();
        for w in &self.values {
            acc.add(w.abs());
        }
        acc.value() * self.dx * self.dp
    }

    /// `∫ W dp` at every `x`.
    pub fn position_marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.np)
            .map(|row| {
                let mut acc = Neumaier::new();
                row.iter().for_each(|w| acc.add(*w));
                acc.value() * self.dp
            })
            .collect()
    }

    /// Rows `x, p, W` (or `x, p, ħW` when scaled).
    pub fn to_csv(&self, hbar_scaled: bool) -> String {
        let mut out = String::from(if hbar_scaled { "x_m,p_kg_m_s,hbar_w\n" } else { "x_m,p_kg_m_s,w\n" });
        let s = if hbar_scaled { HBAR } else { 1.0 };
        for ix in 0..self.nx {
            for ip in 0..self.np {
                out.push_str(&format!("{},{},{}\n", fmt(self.x(ix)), fmt(self.p(ip)), fmt(s * self.at(ix, ip))));
            }
        }
        out
    }
}

/// `W(x, p) = (πħ)^{-1} ∫ Ψ*(x + y) Ψ(x − y) e^{2ipy/ħ} dy`.
///
/// The lag `y` runs over grid multiples, so the momentum grid is
/// `p_k = πħk/(NΔx)`, half the FFT spacing. Fields must be sampled at twice
/// their bandwidth for the result to be alias free.
pub fn wigner(field: &SampledField) -> Result<WignerGrid> {
    let n = field.len();
    if n < 4 {
        return Err(Error::domain("Wigner transform needs at least four samples"));
    }
    let psi = &field.values;
    let half = n / 2;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = vec![Complex64::new(0.0, 0.0); n];
            // Lags −N/2 + 1 ..= N/2 − 1; the unpaired −N/2 lag is dropped so
            // the sequence stays Hermitian and the transform real.
            let reach = (half - 1).min(i).min(n - 1 - i);
            for m in 0..=reach {
                let v = psi[i + m].conj() * psi[i - m];
                r[m] = v;
                if m > 0 {
                    r[n - m] = v.conj();
                }
            }
            fft.process(&mut r);
            let peak = r.iter().fold(0.0f64, |a, z| a.max(z.re.abs()));
            let imag = r.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
            let scale = field.dx / (PI * HBAR);
            // Reorder k = −N/2 .. N/2 − 1.
            let row = (0..n).map(|j| r[(j + n - half) % n].re * scale).collect();
            (row, if peak > 0.0 { imag / peak } else { 0.0 })
        })
        .collect();
    let worst_imag = rows.iter().fold(0.0f64, |a, r| a.max(r.1));
    if worst_imag > 1e-10 {
        return Err(Error::Verification(format!(
            "Wigner transform has imaginary residue {worst_imag:.2e}"
        )));
    }
    let dp = PI * HBAR / (n as f64 * field.dx);
    Ok(WignerGrid {
        x0: field.x0,
        dx: field.dx,
        p0: -(half as f64) * dp,
        dp,
        nx: n,
        np: n,
        values: rows.into_iter().flat_map(|r| r.0).collect(),
        warning: clip_warning(field),
    })
}

/// `V = (∫∫|W̄| − 1)/2` with `W̄ = W / ∫∫W` normalized to unit weight.
pub fn negative_volume(w: &WignerGrid) -> f64 {
    let total = w.total();
    if total == 0.0 {
        return 0.0;
    }
    (w.abs_total() / total - 1.0) / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeReport {
    pub volume: f64,
    /// Same quantity with twice the samples.
    pub refined: f64,
    pub delta: f64,
    pub converged: bool,
    /// `∫∫W`, the detection probability of the field.
    pub weight: f64,
    pub warning: Option<String>,
}

/// Negative volume of the field `f` on `[lo, hi]` with `n` and `2n` points.
/// Converged when the two differ by less than `0.005`.
pub fn negative_volume_checked(
    f: impl Fn(&[f64]) -> Result<Vec<Complex64>>,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<VolumeReport> {
    let at = |n: usize| -> Result<(f64, WignerGrid)> {
        let xs = crate::numeric::linspace(lo, hi, n);
        let field = SampledField::new(lo, xs[1] - xs[0], f(&xs)?);
        let w = wigner(&field)?;
        Ok((negative_volume(&w), w))
    };
    let (volume, w) = at(n)?;
    let (refined, _) = at(2 * n)?;
    Ok(VolumeReport {
        volume,
        refined,
        delta: (refined - volume).abs(),
        converged: (refined - volume).abs() < 0.005,
        weight: w.total(),
        warning: w.warning,
    })
}

/// Maps a phase-space point through the section `m`. Positions are in
/// metres and momenta in kg·m/s, so `b` and `c` act through the spatial
/// frequency `p/(2πħ)`.
pub fn map_phase_space(m: &LctMatrix, x: f64, p: f64) -> (f64, f64) {
    let nu = p / (2.0 * PI * HBAR);
    let (x1, nu1) = (m.a * x + m.b * nu, m.c * x + m.d * nu);
    (x1, nu1 * 2.0 * PI * HBAR)
}

/// `P_E = ∫|Ψ|² dx` of a sampled field.
pub fn detection_probability(field: &SampledField) -> f64 {
    field.norm_sqr()
}

/// Exponent pieces of a path amplitude `exp(ln χ + q x² + ℓ x) P(x)`, with
/// `P` a Hermite factor `H_l(g x + h)` or one.
#[derive(Clone, Copy, Debug)]
struct Envelope {
    ln_chi: Complex64,
    q: Complex64,
    l: Complex64,
    hermite: Option<(Complex64, Complex64, u32)>,
}

impl Envelope {
    fn of(s: &PathState) -> Envelope {
        match s {
            PathState::Gaussian(g) => Envelope {
                ln_chi: g.ln_chi,
                q: g.quadratic(),
                l: g.linear(),
                hermite: None,
            },
            PathState::Hg(h) => Envelope {
                ln_chi: h.ln_chi,
                q: h.u,
                l: h.v,
                hermite: Some((h.g, h.h, h.order)),
            },
        }
    }

    fn order(&self) -> u32 {
        self.hermite.map_or(0, |h| h.2)
    }

    fn poly(&self, x: Complex64) -> Complex64 {
        match self.hermite {
            Some((g, h, l)) => hermite(l, g * x + h),
            None => Complex64::new(1.0, 0.0),
        }
    }

    /// `P(x)*` continued analytically off the real line.
    fn poly_conj(&self, x: Complex64) -> Complex64 {
        match self.hermite {
            Some((g, h, l)) => hermite(l, g.conj() * x + h.conj()),
            None => Complex64::new(1.0, 0.0),
        }
    }
}

/// Gauss-Hermite nodes and weights for `∫ e^{−t²} f(t) dt`, exact for
/// polynomials of degree `< 2n` (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            ((i.max(j)) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `⟨a|b⟩ = ∫ Ψ_a* Ψ_b dx` in closed form.
pub fn overlap(a: &PathState, b: &PathState) -> Complex64 {
    overlap_env(&Envelope::of(a), &Envelope::of(b), None)
}

fn overlap_env(a: &Envelope, b: &Envelope, rule: Option<&(Vec<f64>, Vec<f64>)>) -> Complex64 {
    let alpha = a.q.conj() + b.q;
    let beta = a.l.conj() + b.l;
    let s = psqrt(-alpha);
    let xc = -beta / (2.0 * alpha);
    let log = a.ln_chi.conj() + b.ln_chi - beta * beta / (4.0 * alpha);
    let pref = log.exp() / s;
    if a.hermite.is_none() && b.hermite.is_none() {
        return pref * PI.sqrt();
    }
    let owned;
    let (t, w) = match rule {
        Some(r) => r,
        None => {
            owned = gauss_hermite(((a.order() + b.order()) / 2 + 1) as usize);
            &owned
        }
    };
    let mut acc = ComplexNeumaier::new();
    for (&ti, &wi) in t.iter().zip(w) {
        let x = xc + ti / s;
        acc.add(wi * a.poly_conj(x) * b.poly(x));
    }
    pref * acc.value()
}

/// `P_{E,n} = ‖Ψ_n‖²` of one path.
pub fn path_magnitude(s: &PathState) -> Result<f64> {
    let e = Envelope::of(s);
    if !(e.q.re < 0.0) {
        return Err(Error::singular("path state is not normalizable"));
    }
    Ok(overlap_env(&e, &e, None).re)
}

/// `‖Σ_n Ψ_n‖²` from pairwise overlaps, reduced in path order.
pub fn detection_probability_states(states: &[PathState]) -> Result<f64> {
    let env: Vec<Envelope> = states.iter().map(Envelope::of).collect();
    if env.iter().any(|e| !(e.q.re < 0.0)) {
        return Err(Error::singular("path state is not normalizable"));
    }
    let max_order = env.iter().map(|e| e.order()).max().unwrap_or(0);
    let rule = gauss_hermite((max_order + 1) as usize);
    let rows: Vec<f64> = (0..env.len())
        .into_par_iter()
        .map(|m| {
            let mut acc = Neumaier::new();
            acc.add(overlap_env(&env[m], &env[m], Some(&rule)).re);
            for n in m + 1..env.len() {
                acc.add(2.0 * overlap_env(&env[m], &env[n], Some(&rule)).re);
            }
            acc.value()
        })
        .collect();
    let mut acc = Neumaier::new();
    rows.iter().for_each(|r| acc.add(*r));
    Ok(acc.value())
}

/// `P_E(j)` for `j = 1 ..= N`: the weight of the field arriving at each
/// plane, the sensor last. The first entry is the source norm.
pub fn detection_profile(setup: &Setup) -> Result<Vec<f64>> {
    (1..=setup.planes.len() + 1)
        .map(|j| detection_probability_states(&engine::states_at_plane(setup, j)?))
        .collect()
}

/// `P_{E,n}(j)` of every path arriving at `plane`, in path order.
pub fn path_magnitudes(setup: &Setup, plane: usize) -> Result<Vec<f64>> {
    let states = engine::states_at_plane(setup, plane)?;
    states.par_iter().map(path_magnitude).collect()
}

/// Range holding every path arriving at `plane`: each envelope centre
/// `±(7 + √(2l+1))` intensity widths.
pub fn plane_extent(setup: &Setup, plane: usize) -> Result<(f64, f64)> {
    let states = engine::states_at_plane(setup, plane)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in &states {
        let e = Envelope::of(s);
        let a = e.q.re;
        if !(a < 0.0) {
            return Err(Error::singular("path state is not normalizable"));
        }
        let center = -e.l.re / (2.0 * a);
        let width = 1.0 / (-2.0 * a).sqrt();
        let reach = (7.0 + (2.0 * e.order() as f64 + 1.0).sqrt()) * width;
        lo = lo.min(center - reach);
        hi = hi.max(center + reach);
    }
    Ok((lo, hi))
}

/// Field arriving at `plane` on `n` samples of `[lo, hi]`.
pub fn plane_field(setup: &Setup, plane: usize, lo: f64, hi: f64, n: usize) -> Result<SampledField> {
    let xs = crate::numeric::linspace(lo, hi, n);
    let values = engine::field_at_plane(setup, plane, &xs)?;
    Ok(SampledField::new(lo, xs[1] - xs[0], values))
}

/// Field sampler over a slice of positions.
pub type FieldFn<'a> = Box<dyn Fn(&[f64]) -> Result<Vec<Complex64>> + Sync + 'a>;

/// The source profile, or the field leaving plane `plane − 1` through its
/// slits. Every section is symplectic, so this field has the same Wigner
/// negative volume as the one arriving at `plane`, while staying confined
/// to the slit extent.
pub fn departing_field_fn(setup: &Setup, plane: usize) -> Result<(FieldFn<'_>, (f64, f64))> {
    if plane == 0 || plane > setup.planes.len() + 1 {
        return Err(Error::domain(format!("plane {plane} outside 1..={}", setup.planes.len() + 1)));
    }
    if plane == 1 {
        let src = setup.source;
        let h = src.support_half_width();
        let f = move |xs: &[f64]| -> Result<Vec<Complex64>> {
            Ok(xs.iter().map(|&x| Complex64::new(src.amplitude(x), 0.0)).collect())
        };
        return Ok((Box::new(f), (-h, h)));
    }
    let prev = plane - 1;
    let (alo, ahi) = plane_extent(setup, prev)?;
    let (slo, shi) = setup.planes[prev - 1].extent();
    let range = (alo.max(slo), ahi.min(shi));
    let f = move |xs: &[f64]| -> Result<Vec<Complex64>> {
        let arriving = engine::field_at_plane(setup, prev, xs)?;
        let mask = &setup.planes[prev - 1];
        Ok(arriving.iter().zip(xs).map(|(v, &x)| v * mask.mask(x)).collect())
    };
    Ok((Box::new(f), range))
}

/// Wigner negative volume of the field arriving at `plane`, evaluated on the
/// departing field of the previous plane with `n` and `2n` samples.
pub fn plane_negative_volume(setup: &Setup, plane: usize, n: usize) -> Result<VolumeReport> {
    let (f, (lo, hi)) = departing_field_fn(setup, plane)?;
    negative_volume_checked(f, lo, hi, n)
}

/// Rows `x, Re Ψ, Im Ψ, |Ψ|²`.
pub fn field_csv(field: &SampledField) -> String {
    let mut out = String::from("x_m,re,im,intensity\n");
    for (i, v) in field.values.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", fmt(field.x(i)), fmt(v.re), fmt(v.im), fmt(v.norm_sqr())));
    }
    out
}

/// Rows `n, s_1 … s_j, magnitude` with 1-based slit indices.
pub fn path_magnitudes_csv(setup: &Setup, plane: usize, magnitudes: &[f64]) -> String {
    let depth = plane - 1;
    let mut out = String::from("n");
    for j in 1..=depth {
        out.push_str(&format!(",s{j}"));
    }
    out.push_str(",magnitude\n");
    let radices = &setup.radices()[..depth];
    for (n, m) in magnitudes.iter().enumerate() {
        out.push_str(&n.to_string());
        let digits = crate::setup::path_index_map(radices, n as u64).expect("index in range");
        for d in digits {
            out.push_str(&format!(",{d}"));
        }
        out.push_str(&format!(",{}\n", fmt(*m)));
    }
    out
}

/// Floats with 17 significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Profile of a normalized source, used by tests and examples.
pub fn source_field(source: &Source, n: usize) -> SampledField {
    let h = source.support_half_width();
    SampledField::sample(-h, h, n, |x| Complex64::new(source.amplitude(x), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics;
    use crate::setup::{DiffractionPlane, Slit};

    fn gaussian(sigma: f64, center: f64, n: usize, half: f64) -> SampledField {
        let norm = 1.0 / (sigma * PI.sqrt()).sqrt();
        SampledField::sample(-half, half, n, |x| {
            Complex64::new(norm * (-(x - center).powi(2) / (2.0 * sigma * sigma)).exp(), 0.0)
        })
    }

    #[test]
    fn momentum_of_gaussian() {
        let sigma = 20e-6;
        let f = gaussian(sigma, 0.0, 2048, 300e-6);
        let m = momentum_transform(&f);
        let rect = |s: &SampledField| s.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * s.dx;
        assert!((rect(&m.field) - rect(&f)).abs() < 1e-10 * rect(&f));
        // |Φ(p)|² ∝ exp(−p²σ²/ħ²); width ħ/σ and peak at zero.
        let peak = m.field.intensity().iter().cloned().fold(0.0, f64::max);
        let i0 = m.field.len() / 2;
        assert_eq!(m.field.x(i0), 0.0);
        assert_eq!(m.field.values[i0].norm_sqr(), peak);
        let p = HBAR / sigma;
        let k = (p / m.field.dx).round() as usize;
        let expect = (-(m.field.x(i0 + k) * sigma / HBAR).powi(2)).exp();
        assert!((m.field.values[i0 + k].norm_sqr() / peak - expect).abs() < 1e-9);
    }

    #[test]
    fn shift_gives_linear_phase() {
        let a = momentum_transform(&gaussian(20e-6, 0.0, 1024, 300e-6));
        let b = momentum_transform(&gaussian(20e-6, 40e-6, 1024, 300e-6));
        for i in [500, 512, 530] {
            let p = a.field.x(i);
            let expect = a.field.values[i] * Complex64::from_polar(1.0, -p * 40e-6 / HBAR);
            assert!((b.field.values[i] - expect).norm() < 1e-9 * a.field.values[512].norm());
        }
    }

    #[test]
    fn gaussian_wigner_is_nonnegative_with_exact_marginal() {
        let f = gaussian(20e-6, 10e-6, 512, 200e-6);
        let w = wigner(&f).unwrap();
        let min = w.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = w.values.iter().cloned().fold(0.0, f64::max);
        assert!(min > -1e-9 * max);
        for (m, v) in w.position_marginal().iter().zip(&f.values) {
            assert!((m - v.norm_sqr()).abs() < 1e-10 * max * w.dp * 512.0);
        }
        assert!(negative_volume(&w).abs() < 1e-3);
    }

    #[test]
    fn odd_state_is_negative_at_origin() {
        let src = Source::HermiteGaussian { w0_m: 200e-6, order: 1 };
        let w = wigner(&source_field(&src, 513)).unwrap();
        let centre = w.at(256, 256);
        assert!((w.x(256)).abs() < 1e-15 && w.p(256) == 0.0);
        assert!((centre * PI * HBAR + 1.0).abs() < 1e-6, "{}", centre * PI * HBAR);
    }

    #[test]
    fn gauss_hermite_integrates_even_moments() {
        let (t, w) = gauss_hermite(5);
        let m = |k: i32| t.iter().zip(&w).map(|(t, w)| w * t.powi(k)).sum::<f64>();
        assert!((m(0) - PI.sqrt()).abs() < 1e-13);
        assert!((m(2) - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!((m(8) - 105.0 * PI.sqrt() / 16.0).abs() < 1e-11);
    }

    fn toy(source: Source) -> Setup {
        let lambda = 650e-9;
        let m = vec![
            optics::compose_chain(&[optics::free_space(0.1, lambda).unwrap(), optics::lens(0.06, lambda).unwrap(), optics::free_space(0.05, lambda).unwrap()]),
            optics::free_space(0.08, lambda).unwrap(),
        ];
        let planes = vec![DiffractionPlane::new(vec![Slit::new(-30e-6, 9e-6), Slit::new(10e-6, 6e-6), Slit::new(45e-6, 12e-6)])];
        Setup::from_matrices(source, planes, &m, lambda).unwrap()
    }

    #[test]
    fn closed_form_probabilities_match_quadrature() {
        for src in [Source::Gaussian { sigma0_m: 25e-6 }, Source::HermiteGaussian { w0_m: 80e-6, order: 3 }] {
            let setup = toy(src);
            let profile = detection_profile(&setup).unwrap();
            assert!((profile[0] - 1.0).abs() < 1e-12, "{profile:?}");
            for plane in [1, 2] {
                let (lo, hi) = plane_extent(&setup, plane).unwrap();
                let f = plane_field(&setup, plane, lo, hi, 40001).unwrap();
                let q = detection_probability(&f);
                assert!((q - profile[plane - 1]).abs() < 1e-8 * q, "{q} {profile:?}");
            }
            let states = engine::states_at_plane(&setup, 2).unwrap();
            let (lo, hi) = plane_extent(&setup, 2).unwrap();
            for s in &states {
                let f = SampledField::sample(lo, hi, 40001, |x| s.amplitude(x));
                let q = f.norm_sqr();
                assert!((q - path_magnitude(s).unwrap()).abs() < 1e-8 * q);
            }
        }
    }

    #[test]
    fn departing_field_preserves_negative_volume() {
        // A short free-space hop keeps the arriving field resolvable, so both
        // routes can be compared directly.
        let lambda = 650e-9;
        let m = vec![optics::free_space(0.02, lambda).unwrap(), optics::free_space(0.002, lambda).unwrap()];
        let planes = vec![DiffractionPlane::new(vec![Slit::new(-40e-6, 10e-6), Slit::new(30e-6, 12e-6)])];
        let setup = Setup::from_matrices(Source::Gaussian { sigma0_m: 40e-6 }, planes, &m, lambda).unwrap();
        let via_mask = plane_negative_volume(&setup, 2, 512).unwrap();
        let (lo, hi) = plane_extent(&setup, 2).unwrap();
        let direct = negative_volume(&wigner(&plane_field(&setup, 2, lo, hi, 1024).unwrap()).unwrap());
        assert!(via_mask.volume > 0.05);
        assert!((via_mask.volume - direct).abs() < 5e-3, "{} {direct}", via_mask.volume);
    }
}
