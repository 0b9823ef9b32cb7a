//! Brute-force reference propagation by direct trapezoid quadrature of the
//! diffraction kernels. Shares no code with the closed-form engine beyond the
//! setup description, so it can arbitrate branch and sign conventions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::numeric::{ComplexNeumaier, I};
use crate::optics::{LctMatrix, PhotonConstants, HBAR};
use crate::setup::{DiffractionPlane, Segment, Setup};

/// Default number of oracle samples per plane.
pub const DEFAULT_POINTS: usize = 8192;

/// Largest admitted phase advance per sample, in cycles.
const NYQUIST_FRACTION: f64 = 0.25;

/// Largest admitted integrand bandwidth times spacing.
const ALIAS_FRACTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    Lct(LctMatrix),
    /// Fresnel propagation over `length_m`.
    FreeSpace { length_m: f64, wavelength_m: f64 },
    /// Oscillator kernel over `duration_s`.
    Oscillator { duration_s: f64, constants: PhotonConstants },
    /// Free propagation of a particle of mass `mass_kg` for `duration_s`.
    Massive { mass_kg: f64, duration_s: f64 },
}

impl Kernel {
    pub fn from_segment(segment: &Segment, constants: &PhotonConstants) -> Kernel {
        match segment.oscillator {
            Some(ho) => Kernel::Oscillator {
                duration_s: ho.duration,
                constants: *constants,
            },
            None => Kernel::Lct(segment.matrix),
        }
    }

    /// `(prefactor, p_out, p_cross, p_in)` with the kernel equal to
    /// `prefactor · exp(i (p_out x₁² + p_cross x₁ x₀ + p_in x₀²))`.
    fn coefficients(&self) -> Result<(Complex64, f64, f64, f64)> {
        match *self {
            Kernel::Lct(m) => {
                if m.b == 0.0 {
                    return Err(Error::domain("quadrature needs b ≠ 0"));
                }
                let pref = (Complex64::new(0.0, m.b)).inv().sqrt();
                let k = PI / m.b;
                Ok((pref, k * m.d, -2.0 * k, k * m.a))
            }
            Kernel::FreeSpace { length_m, wavelength_m } => {
                let q = length_m * wavelength_m;
                let pref = (I * q).inv().sqrt();
                let k = PI / q;
                Ok((pref, k, -2.0 * k, k))
            }
            Kernel::Oscillator { duration_s, constants } => {
                let (s, c) = (constants.omega * duration_s).sin_cos();
                let den = HBAR * duration_s * s;
                let pref = (constants.mass / (2.0 * PI * I * den)).sqrt();
                let k = constants.mass / (2.0 * den);
                Ok((pref, k * c, -2.0 * k, k * c))
            }
            Kernel::Massive { mass_kg, duration_s } => {
                let den = HBAR * duration_s;
                let pref = (mass_kg / (2.0 * PI * I * den)).sqrt();
                let k = mass_kg / (2.0 * den);
                Ok((pref, k, -2.0 * k, k))
            }
        }
    }

    pub fn eval(&self, x1: f64, x0: f64) -> Result<Complex64> {
        let (pref, po, pc, pi) = self.coefficients()?;
        Ok(pref * Complex64::from_polar(1.0, po * x1 * x1 + pc * x1 * x0 + pi * x0 * x0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleOutput {
    pub field: SampledField,
    pub norm_in: f64,
    pub norm_out: f64,
}

/// Bandwidth (cycles per unit length) holding all but a `1e-24` fraction of
/// the sampled field energy. A field that is under-sampled reports a value
/// near the grid Nyquist limit.
fn field_bandwidth(field: &SampledField) -> f64 {
    let n = field.len();
    let mut buf = field.values.clone();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    // Energy by |frequency index|, highest first.
    let mut by_index = vec![0.0; n / 2 + 1];
    for (k, z) in buf.iter().enumerate() {
        by_index[k.min(n - k)] += z.norm_sqr();
    }
    let mut tail = 0.0;
    for k in (0..by_index.len()).rev() {
        tail += by_index[k];
        if tail > 1e-24 * total {
            return k as f64 / (n as f64 * field.dx);
        }
    }
    0.0
}

/// `Ψ_out(x₁) = ∫ K(x₁, x₀) Ψ(x₀) dx₀` by the trapezoid rule.
///
/// Refuses when the integrand would be under-sampled and reports the number
/// of input samples that would be required.
pub fn quadrature_propagate(
    field: &SampledField,
    kernel: &Kernel,
    out_lo: f64,
    out_hi: f64,
    out_n: usize,
) -> Result<OracleOutput> {
    let (pref, po, pc, pi) = kernel.coefficients()?;
    let in_lo = field.x0;
    let in_hi = field.x(field.len() - 1);
    let x_in = in_lo.abs().max(in_hi.abs());
    let x_out = out_lo.abs().max(out_hi.abs());
    // Phase rate of the kernel in x₀ is |2 p_in x₀ + p_cross x₁| rad per unit.
    let kernel_rate = (2.0 * pi.abs() * x_in + pc.abs() * x_out) / (2.0 * PI);
    // The kernel chirp may advance at most a quarter cycle per sample, and
    // the integrand spectrum must stay clear of the first trapezoid alias.
    let band = field_bandwidth(field);
    let need_dx = (NYQUIST_FRACTION / kernel_rate).min(ALIAS_FRACTION / (kernel_rate + band));
    if field.dx >= need_dx {
        let required = ((in_hi - in_lo) / need_dx).ceil() as usize + 1;
        return Err(Error::Grid {
            msg: format!(
                "input spacing {:.3e} too coarse for the kernel chirp (need < {:.3e})",
                field.dx, need_dx
            ),
            required,
        });
    }
    let xs_in = field.xs();
    let dx = field.dx;
    let n_in = field.len();
    let template = SampledField::sample(out_lo, out_hi, out_n, |_| Complex64::new(0.0, 0.0));
    let values: Vec<Complex64> = (0..out_n)
        .into_par_iter()
        .map(|k| {
            let x1 = template.x(k);
            let mut acc = ComplexNeumaier::new();
            for (i, (&x0, &psi)) in xs_in.iter().zip(&field.values).enumerate() {
                let w = if i == 0 || i == n_in - 1 { 0.5 } else { 1.0 };
                let phase = pc * x1 * x0 + pi * x0 * x0;
                acc.add(psi * Complex64::from_polar(w, phase));
            }
            acc.value() * dx * pref * Complex64::from_polar(1.0, po * x1 * x1)
        })
        .collect();
    let out = SampledField::new(template.x0, template.dx, values);
    Ok(OracleOutput {
        norm_in: field.norm_sqr(),
        norm_out: out.norm_sqr(),
        field: out,
    })
}

/// Which slits of a plane to apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlitSelector {
    Single(usize),
    All,
}

pub fn apply_slit_plane(
    field: &SampledField,
    plane: &DiffractionPlane,
    selector: SlitSelector,
) -> Result<SampledField> {
    let mask = |x: f64| -> Result<f64> {
        Ok(match selector {
            SlitSelector::All => plane.mask(x),
            SlitSelector::Single(i) => plane
                .slits
                .get(i)
                .ok_or_else(|| Error::domain(format!("no slit {i} on plane")))?
                .mask(x),
        })
    };
    let values = field
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| mask(field.x(i)).map(|m| v * m))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledField::new(field.x0, field.dx, values))
}

/// Error measures between a field and a reference on the same grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub linf_abs: f64,
    pub linf_rel: f64,
    pub l2_abs: f64,
    pub l2_rel: f64,
    pub phase_aligned: bool,
}

/// Compares `a` against the reference `b`. With `align_phase`, `a` is first
/// rotated so that its phase matches `b` at the largest-magnitude sample.
pub fn compare(a: &SampledField, b: &SampledField, align_phase: bool) -> Result<ErrorReport> {
    a.check_same_grid(b)?;
    Ok(compare_values(&a.values, &b.values, align_phase))
}

pub fn compare_values(a: &[Complex64], b: &[Complex64], align_phase: bool) -> ErrorReport {
    let rot = if align_phase {
        let k = (0..b.len())
            .max_by(|&i, &j| b[i].norm().total_cmp(&b[j].norm()))
            .unwrap_or(0);
        if a.is_empty() || a[k].norm() == 0.0 || b[k].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            let r = b[k] / a[k];
            r / r.norm()
        }
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut linf: f64 = 0.0;
    let mut peak: f64 = 0.0;
    let mut l2 = 0.0;
    let mut l2_ref = 0.0;
    for (x, y) in a.iter().zip(b) {
        let e = (x * rot - y).norm();
        linf = linf.max(e);
        peak = peak.max(y.norm());
        l2 += e * e;
        l2_ref += y.norm_sqr();
    }
    let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    ErrorReport {
        linf_abs: linf,
        linf_rel: rel(linf, peak),
        l2_abs: l2.sqrt(),
        l2_rel: rel(l2.sqrt(), l2_ref.sqrt()),
        phase_aligned: align_phase,
    }
}

/// Grid policy for the full oracle pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OraclePlan {
    /// Samples per slit width on slit planes.
    pub samples_per_width: f64,
    /// Upper bound on samples per plane.
    pub max_points: usize,
}

impl Default for OraclePlan {
    fn default() -> Self {
        OraclePlan {
            samples_per_width: 8.0,
            max_points: 4 * DEFAULT_POINTS,
        }
    }
}

fn plane_grid(plane: &DiffractionPlane, plan: &OraclePlan) -> (f64, f64, usize) {
    let (lo, hi) = plane.extent();
    let beta = plane
        .slits
        .iter()
        .map(|s| s.width_m)
        .fold(f64::INFINITY, f64::min);
    let n = (((hi - lo) / (beta / plan.samples_per_width)).ceil() as usize + 1).max(64);
    (lo, hi, n)
}

/// Full-interference reference: the source is propagated plane by plane
/// through the sum of all slit masks, then to the sensor samples `xs`
/// (which must be uniformly spaced).
pub fn propagate_setup(setup: &Setup, sensor: (f64, f64, usize), plan: &OraclePlan) -> Result<SampledField> {
    propagate_selected(setup, &vec![SlitSelector::All; setup.planes.len()], sensor, plan)
}

/// Reference propagation keeping one selector per plane (a single path when
/// every selector is `Single`).
pub fn propagate_selected(
    setup: &Setup,
    selectors: &[SlitSelector],
    sensor: (f64, f64, usize),
    plan: &OraclePlan,
) -> Result<SampledField> {
    if selectors.len() != setup.planes.len() {
        return Err(Error::domain("one selector per plane is required"));
    }
    let consts = setup.constants;
    let src = setup.source;
    let kernel0 = Kernel::from_segment(&setup.segments[0], &consts);
    // Field on plane j sampled with n points: a pure function of the previous
    // masked field, so any plane can be re-sampled when the next section
    // needs a finer input grid.
    let mut prev: Box<dyn Fn(usize) -> Result<SampledField>> = Box::new(move |n| {
        Ok(SampledField::sample(
            -src.support_half_width(),
            src.support_half_width(),
            n,
            |x| Complex64::new(src.amplitude(x), 0.0),
        ))
    });
    let mut prev_n = 512;
    let mut prev_kernel = kernel0;
    for j in 0..=setup.planes.len() {
        let out = if j < setup.planes.len() {
            plane_grid(&setup.planes[j], plan)
        } else {
            sensor
        };
        let kernel = prev_kernel;
        let mut n = prev_n;
        let arrived = loop {
            let input = prev(n)?;
            match quadrature_propagate(&input, &kernel, out.0, out.1, out.2) {
                Ok(o) => break o.field,
                Err(Error::Grid { required, .. }) if required <= plan.max_points && required > n => {
                    n = required + required / 4;
                }
                Err(e) => return Err(e),
            }
        };
        if j == setup.planes.len() {
            return Ok(arrived);
        }
        let plane = setup.planes[j].clone();
        let selector = selectors[j];
        let masked = apply_slit_plane(&arrived, &plane, selector)?;
        let last_input = prev(n)?;
        prev = Box::new(move |m| {
            if m == out.2 {
                return Ok(masked.clone());
            }
            let o = quadrature_propagate(&last_input, &kernel, out.0, out.1, m)?;
            apply_slit_plane(&o.field, &plane, selector)
        });
        prev_n = out.2;
        prev_kernel = Kernel::from_segment(&setup.segments[j + 1], &consts);
    }
    unreachable!("the sensor section returns")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics;
    use crate::setup::Source;

    fn gaussian(sigma: f64, n: usize) -> SampledField {
        let src = Source::Gaussian { sigma0_m: sigma };
        let h = src.support_half_width();
        SampledField::sample(-h, h, n, |x| Complex64::new(src.amplitude(x), 0.0))
    }

    #[test]
    fn free_space_semigroup_and_unitarity() {
        let lambda = 650e-9;
        let f = gaussian(20e-6, 1024);
        let k1 = Kernel::FreeSpace { length_m: 0.01, wavelength_m: lambda };
        let k2 = Kernel::FreeSpace { length_m: 0.02, wavelength_m: lambda };
        let k12 = Kernel::FreeSpace { length_m: 0.03, wavelength_m: lambda };
        let a = quadrature_propagate(&f, &k1, -6e-4, 6e-4, 2048).unwrap();
        assert!((a.norm_out - a.norm_in).abs() < 1e-6);
        let b = quadrature_propagate(&a.field, &k2, -3e-4, 3e-4, 256).unwrap();
        let c = quadrature_propagate(&f, &k12, -3e-4, 3e-4, 256).unwrap();
        let rep = compare(&b.field, &c.field, false).unwrap();
        assert!(rep.linf_rel < 1e-6, "{rep:?}");
    }

    #[test]
    fn refuses_undersampled_input() {
        let f = gaussian(20e-6, 64);
        let k = Kernel::Lct(optics::free_space(0.001, 650e-9).unwrap());
        match quadrature_propagate(&f, &k, -1e-3, 1e-3, 16) {
            Err(Error::Grid { required, .. }) => assert!(required > 64),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn near_identity_kernel() {
        let src = Source::Gaussian { sigma0_m: 1.0 };
        let f = SampledField::sample(-4.0, 4.0, 2_000_001, |x| Complex64::new(src.amplitude(x), 0.0));
        let k = Kernel::Lct(LctMatrix::new(1.0, 1e-4, 0.0, 1.0).unwrap());
        let out = quadrature_propagate(&f, &k, -1.5, 1.5, 5).unwrap();
        let expect = SampledField::sample(-1.5, 1.5, 5, |x| Complex64::new(src.amplitude(x), 0.0));
        assert!(compare(&out.field, &expect, false).unwrap().linf_abs < 1e-4);
    }

    #[test]
    fn phase_alignment() {
        let a = SampledField::sample(-1.0, 1.0, 11, |x| Complex64::new((-x * x).exp(), 0.0));
        let rot = Complex64::from_polar(1.0, 0.7);
        let b = SampledField::new(a.x0, a.dx, a.values.iter().map(|v| v * rot).collect());
        assert_eq!(compare(&a, &a, false).unwrap().linf_abs, 0.0);
        assert!(compare(&a, &b, false).unwrap().linf_rel > 0.1);
        assert!(compare(&a, &b, true).unwrap().linf_rel < 1e-15);
    }

    #[test]
    fn disjoint_slits_add_norms() {
        let f = SampledField::sample(-1.0, 1.0, 4001, |_| Complex64::new(1.0, 0.0));
        let plane = DiffractionPlane::new(vec![
            crate::setup::Slit::new(-0.5, 0.02),
            crate::setup::Slit::new(0.5, 0.02),
        ]);
        let all = apply_slit_plane(&f, &plane, SlitSelector::All).unwrap().norm_sqr();
        let n0 = apply_slit_plane(&f, &plane, SlitSelector::Single(0)).unwrap().norm_sqr();
        let n1 = apply_slit_plane(&f, &plane, SlitSelector::Single(1)).unwrap().norm_sqr();
        assert!((all - n0 - n1).abs() < 1e-10);
    }
}
