//! Experiment description: source, slit planes, optical sections between
//! planes, and sensor sampling. Includes the JSON document format, validation,
//! and the path-index mapping.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::MAX_HERMITE_ORDER;
use crate::optics::{self, LctMatrix, PhotonConstants, HBAR};

/// Default upper bound on the number of enumerated paths.
pub const DEFAULT_PATH_CAP: u64 = 1 << 24;

/// Source wave function at plane 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    /// `exp(−x²/(2σ₀²)) / sqrt(σ₀ √π)`.
    Gaussian { sigma0_m: f64 },
    /// `2^{1/4}/sqrt(W₀ 2^l l!) exp(−π x²/W₀²) H_l(√(2π) x/W₀)`.
    HermiteGaussian { w0_m: f64, order: u32 },
}

impl Source {
    /// Hermite-Gaussian source equivalent to a Gaussian of width `sigma0`
    /// (order 0, `W₀ = σ₀ √(2π)`).
    pub fn hg_equivalent_of_gaussian(sigma0: f64) -> Source {
        Source::HermiteGaussian {
            w0_m: sigma0 * (2.0 * std::f64::consts::PI).sqrt(),
            order: 0,
        }
    }

    /// Source amplitude at `x`.
    pub fn amplitude(&self, x: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Source::Gaussian { sigma0_m: s } => {
                (-x * x / (2.0 * s * s)).exp() / (s * PI.sqrt()).sqrt()
            }
            Source::HermiteGaussian { w0_m: w, order: l } => {
                let norm = 2f64.powf(0.25)
                    / (w * 2f64.powi(l as i32) * crate::numeric::factorial(l)).sqrt();
                let z = (2.0 * PI).sqrt() * x / w;
                let h = crate::numeric::hermite(l, num_complex::Complex64::new(z, 0.0)).re;
                norm * (-PI * x * x / (w * w)).exp() * h
            }
        }
    }

    /// A half-width beyond which the source amplitude is negligible (m).
    pub fn support_half_width(&self) -> f64 {
        match *self {
            Source::Gaussian { sigma0_m } => 9.0 * sigma0_m,
            Source::HermiteGaussian { w0_m, order } => {
                let sigma = w0_m / (2.0 * std::f64::consts::PI).sqrt();
                sigma * ((2.0 * order as f64 + 1.0).sqrt() + 8.0)
            }
        }
    }
}

/// Gaussian amplitude slit `exp(−(x − X)²/(2β²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    pub center_m: f64,
    pub width_m: f64,
}

impl Slit {
    pub fn new(center_m: f64, width_m: f64) -> Self {
        Slit { center_m, width_m }
    }

    pub fn mask(&self, x: f64) -> f64 {
        let u = (x - self.center_m) / self.width_m;
        (-0.5 * u * u).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffractionPlane {
    pub slits: Vec<Slit>,
}

impl DiffractionPlane {
    pub fn new(slits: Vec<Slit>) -> Self {
        let mut p = DiffractionPlane { slits };
        p.canonicalize();
        p
    }

    /// `count` slits of equal width centred on `spacing · (i − (count−1)/2)`.
    pub fn uniform(count: usize, spacing: f64, width: f64) -> Self {
        let mid = (count as f64 - 1.0) / 2.0;
        DiffractionPlane::new(
            (0..count)
                .map(|i| Slit::new(spacing * (i as f64 - mid), width))
                .collect(),
        )
    }

    /// Stable sort by center. Idempotent.
    pub fn canonicalize(&mut self) {
        self.slits
            .sort_by(|a, b| a.center_m.total_cmp(&b.center_m));
    }

    /// Sum of all slit masks at `x`.
    pub fn mask(&self, x: f64) -> f64 {
        self.slits.iter().map(|s| s.mask(x)).sum()
    }

    pub fn has_uniform_width(&self) -> bool {
        self.slits
            .windows(2)
            .all(|w| w[0].width_m == w[1].width_m)
    }

    /// Range `[min(X − 8β), max(X + 8β)]` covered by the slits.
    pub fn extent(&self) -> (f64, f64) {
        let lo = self
            .slits
            .iter()
            .map(|s| s.center_m - 8.0 * s.width_m)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .slits
            .iter()
            .map(|s| s.center_m + 8.0 * s.width_m)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// One optical element of a section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Element {
    FreeSpace { length_m: f64 },
    Lens { focal_m: f64 },
    /// Fractional Fourier transform; `order` is the rotation angle in radians.
    Frft { order: f64 },
    Scale { a: f64 },
    Chirp { c: f64 },
    Abcd { a: f64, b: f64, c: f64, d: f64 },
    /// Oscillator (graded-index) evolution for `duration_s` seconds.
    HarmonicOscillator { duration_s: f64 },
}

impl Element {
    pub fn matrix(&self, consts: &PhotonConstants) -> Result<LctMatrix> {
        let lambda = consts.wavelength;
        match *self {
            Element::FreeSpace { length_m } => optics::free_space(length_m, lambda),
            Element::Lens { focal_m } => optics::lens(focal_m, lambda),
            Element::Frft { order } => Ok(optics::frft(order)),
            Element::Scale { a } => optics::scale(a),
            Element::Chirp { c } => Ok(optics::chirp(c)),
            Element::Abcd { a, b, c, d } => LctMatrix::new(a, b, c, d),
            Element::HarmonicOscillator { duration_s } => {
                optics::harmonic_oscillator(duration_s, consts)
            }
        }
    }
}

/// One entry of the `optics` list: a single element or a chain applied in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpticsEntry {
    Single(Element),
    Chain(Vec<Element>),
}

impl OpticsEntry {
    pub fn elements(&self) -> &[Element] {
        match self {
            OpticsEntry::Single(e) => std::slice::from_ref(e),
            OpticsEntry::Chain(v) => v,
        }
    }
}

/// Sensor sampling `x = k T_s` for `k ∈ [k_min, k_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub ts_m: f64,
    pub k_min: i64,
    pub k_max: i64,
}

impl Sensor {
    pub fn positions(&self) -> Vec<f64> {
        (self.k_min..=self.k_max)
            .map(|k| k as f64 * self.ts_m)
            .collect()
    }
}

/// The JSON experiment document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetupConfig {
    pub source: Source,
    pub planes: Vec<DiffractionPlane>,
    pub optics: Vec<OpticsEntry>,
    pub wavelength_m: f64,
    pub sensor: Sensor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_cap: Option<u64>,
}

impl SetupConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: SetupConfig = serde_json::from_str(text)?;
        cfg.canonicalize();
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn canonicalize(&mut self) {
        for p in &mut self.planes {
            p.canonicalize();
        }
    }

    pub fn cap(&self) -> u64 {
        self.path_cap.unwrap_or(DEFAULT_PATH_CAP)
    }

    /// Lists every violated invariant. An empty report means the
    /// configuration can be simulated.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let consts = PhotonConstants::new(self.wavelength_m);
        if consts.is_err() {
            v.push(format!("wavelength_m must be positive, got {}", self.wavelength_m));
        }
        match self.source {
            Source::Gaussian { sigma0_m } => {
                if !(sigma0_m > 0.0 && sigma0_m.is_finite()) {
                    v.push(format!("source.sigma0_m must be positive, got {sigma0_m}"));
                }
            }
            Source::HermiteGaussian { w0_m, order } => {
                if !(w0_m > 0.0 && w0_m.is_finite()) {
                    v.push(format!("source.w0_m must be positive, got {w0_m}"));
                }
                if order > MAX_HERMITE_ORDER {
                    v.push(format!(
                        "source.order {order} exceeds the supported maximum {MAX_HERMITE_ORDER}"
                    ));
                }
            }
        }
        if self.planes.is_empty() {
            v.push("at least one slit plane is required".to_string());
        }
        for (j, plane) in self.planes.iter().enumerate() {
            if plane.slits.is_empty() {
                v.push(format!("planes[{j}] has no slits"));
            }
            for (i, s) in plane.slits.iter().enumerate() {
                if !(s.width_m > 0.0 && s.width_m.is_finite()) {
                    v.push(format!(
                        "planes[{j}].slits[{i}].width_m must be positive, got {}",
                        s.width_m
                    ));
                }
                if !s.center_m.is_finite() {
                    v.push(format!("planes[{j}].slits[{i}].center_m is not finite"));
                }
            }
            if plane
                .slits
                .windows(2)
                .any(|w| w[1].center_m < w[0].center_m)
            {
                v.push(format!("planes[{j}] slit centers are not sorted"));
            }
        }
        if self.optics.len() != self.planes.len() + 1 {
            v.push(format!(
                "optics has {} sections, expected {} (one per plane plus the sensor leg)",
                self.optics.len(),
                self.planes.len() + 1
            ));
        }
        if let Ok(consts) = &consts {
            for (j, entry) in self.optics.iter().enumerate() {
                if entry.elements().is_empty() {
                    v.push(format!("optics[{j}] is an empty chain"));
                }
                for (e, el) in entry.elements().iter().enumerate() {
                    if let Err(err) = el.matrix(consts) {
                        v.push(format!("optics[{j}][{e}]: {err}"));
                    }
                }
            }
        }
        let count = path_count(&self.radices());
        if count >= self.cap() as u128 {
            v.push(format!(
                "path count {count} is not below the cap {} (raise path_cap to override)",
                self.cap()
            ));
        }
        if !(self.sensor.ts_m > 0.0 && self.sensor.ts_m.is_finite()) {
            v.push(format!("sensor.ts_m must be positive, got {}", self.sensor.ts_m));
        }
        if self.sensor.k_min > self.sensor.k_max {
            v.push("sensor.k_min exceeds sensor.k_max".to_string());
        }
        ValidationReport { violations: v }
    }

    pub fn radices(&self) -> Vec<usize> {
        self.planes.iter().map(|p| p.slits.len()).collect()
    }

    /// Validates and converts to the resolved model used by the engine.
    pub fn resolve(&self) -> Result<Setup> {
        let report = self.validate();
        if !report.is_ok() {
            return Err(Error::Validation(report.violations.join("; ")));
        }
        let consts = PhotonConstants::new(self.wavelength_m)?;
        let segments = self
            .optics
            .iter()
            .map(|entry| Segment::from_elements(entry.elements(), &consts))
            .collect::<Result<Vec<_>>>()?;
        Ok(Setup {
            source: self.source,
            planes: self.planes.clone(),
            segments,
            constants: consts,
            sensor: self.sensor,
            path_cap: self.cap(),
        })
    }
}

/// Result of [`SetupConfig::validate`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Oscillator parameters of a section that consists of one oscillator element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorSection {
    /// Duration `t` (s).
    pub duration: f64,
    /// `α = ω t`.
    pub alpha: f64,
    /// `λ_j = ħ t`.
    pub lambda: f64,
    /// `m̂ = m_λ / sin α`.
    pub mass_hat: f64,
}

/// An optical section between two planes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub matrix: LctMatrix,
    /// Present when the section is a single oscillator element, in which case
    /// the engine uses the oscillator-form recursion.
    pub oscillator: Option<OscillatorSection>,
}

impl Segment {
    pub fn lct(matrix: LctMatrix) -> Self {
        Segment {
            matrix,
            oscillator: None,
        }
    }

    pub fn oscillator(duration: f64, consts: &PhotonConstants) -> Result<Self> {
        let matrix = optics::harmonic_oscillator(duration, consts)?;
        let alpha = consts.omega * duration;
        Ok(Segment {
            matrix,
            oscillator: Some(OscillatorSection {
                duration,
                alpha,
                lambda: HBAR * duration,
                mass_hat: consts.mass / alpha.sin(),
            }),
        })
    }

    pub fn from_elements(elements: &[Element], consts: &PhotonConstants) -> Result<Self> {
        if let [Element::HarmonicOscillator { duration_s }] = elements {
            return Segment::oscillator(*duration_s, consts);
        }
        let mats = elements
            .iter()
            .map(|e| e.matrix(consts))
            .collect::<Result<Vec<_>>>()?;
        Ok(Segment::lct(optics::compose_chain(&mats)))
    }

    /// A `b = 0` section (pure scaling and chirp).
    pub fn is_degenerate(&self) -> bool {
        self.matrix.b == 0.0
    }
}

/// Resolved experiment consumed by the path engine.
#[derive(Clone, Debug, PartialEq)]
pub struct Setup {
    pub source: Source,
    pub planes: Vec<DiffractionPlane>,
    /// `planes.len() + 1` sections: source→plane 1, …, last plane→sensor.
    pub segments: Vec<Segment>,
    pub constants: PhotonConstants,
    pub sensor: Sensor,
    pub path_cap: u64,
}

impl Setup {
    /// Builds a setup from plain matrices.
    pub fn from_matrices(
        source: Source,
        planes: Vec<DiffractionPlane>,
        matrices: &[LctMatrix],
        wavelength: f64,
    ) -> Result<Self> {
        if matrices.len() != planes.len() + 1 {
            return Err(Error::validation(format!(
                "{} sections given for {} planes",
                matrices.len(),
                planes.len()
            )));
        }
        let mut planes = planes;
        for p in &mut planes {
            p.canonicalize();
        }
        Ok(Setup {
            source,
            planes,
            segments: matrices.iter().copied().map(Segment::lct).collect(),
            constants: PhotonConstants::new(wavelength)?,
            sensor: Sensor {
                ts_m: 1e-6,
                k_min: -64,
                k_max: 64,
            },
            path_cap: DEFAULT_PATH_CAP,
        })
    }

    /// Number of planes including source and sensor (`N + 1` in 0-based
    /// indexing: planes `0 ..= N`).
    pub fn n_sensor_index(&self) -> usize {
        self.planes.len() + 1
    }

    pub fn radices(&self) -> Vec<usize> {
        self.planes.iter().map(|p| p.slits.len()).collect()
    }

    pub fn path_count(&self) -> u64 {
        path_count(&self.radices()).min(u64::MAX as u128) as u64
    }

    /// Zero-based slit index on each plane for path `n`.
    pub fn path_digits(&self, n: u64) -> Vec<usize> {
        mixed_radix_digits(&self.radices(), n)
    }

    /// The slits traversed by path `n`, one per plane.
    pub fn path_slits(&self, n: u64) -> Vec<Slit> {
        self.path_digits(n)
            .iter()
            .zip(&self.planes)
            .map(|(&i, p)| p.slits[i])
            .collect()
    }

    pub fn check_path_cap(&self) -> Result<()> {
        let count = path_count(&self.radices());
        if count >= self.path_cap as u128 {
            return Err(Error::validation(format!(
                "path count {count} is not below the cap {}",
                self.path_cap
            )));
        }
        Ok(())
    }

    pub fn uniform_widths(&self) -> bool {
        self.planes.iter().all(|p| p.has_uniform_width())
    }
}

/// `∏ K_j`, exact.
pub fn path_count(radices: &[usize]) -> u128 {
    radices
        .iter()
        .fold(1u128, |acc, &k| acc.saturating_mul(k as u128))
}

fn mixed_radix_digits(radices: &[usize], mut n: u64) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (slot, &k) in digits.iter_mut().zip(radices).rev() {
        *slot = (n % k as u64) as usize;
        n /= k as u64;
    }
    digits
}

/// Slit indices (1-based) of path `n`. Plane 1 varies slowest.
pub fn path_index_map(radices: &[usize], n: u64) -> Result<Vec<usize>> {
    let total = path_count(radices);
    if radices.contains(&0) || (n as u128) >= total {
        return Err(Error::domain(format!(
            "path index {n} out of range for {total} paths"
        )));
    }
    Ok(mixed_radix_digits(radices, n)
        .into_iter()
        .map(|d| d + 1)
        .collect())
}

/// Inverse of [`path_index_map`].
pub fn path_number(radices: &[usize], slits: &[usize]) -> Result<u64> {
    if slits.len() != radices.len() {
        return Err(Error::domain("slit list length does not match plane count"));
    }
    let mut n: u64 = 0;
    for (&s, &k) in slits.iter().zip(radices) {
        if s == 0 || s > k {
            return Err(Error::domain(format!("slit index {s} outside 1..={k}")));
        }
        n = n * k as u64 + (s - 1) as u64;
    }
    Ok(n)
}
