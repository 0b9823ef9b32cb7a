//! Small numerical helpers shared by the engine, the oracle and the analysis code.

use num_complex::Complex64;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `exp(-i pi / 4)`.
pub fn phase_minus_quarter() -> Complex64 {
    Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)
}

/// Principal square root with the cut on the negative real axis.
///
/// A negative zero imaginary part is folded to `+0.0` first, so the result for
/// a negative real input is always `+i sqrt(|z|)`.
pub fn psqrt(z: Complex64) -> Complex64 {
    let z = if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    };
    z.sqrt()
}

/// Principal `sqrt(1/b)` for a real nonzero `b`.
pub fn sqrt_recip_real(b: f64) -> Complex64 {
    if b > 0.0 {
        Complex64::new((1.0 / b).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-1.0 / b).sqrt())
    }
}

/// Neumaier compensated accumulator for `f64`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Neumaier accumulator for complex values (independent real/imaginary parts).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn sum_f64(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

pub fn sum_c64(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    let mut acc = ComplexNeumaier::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Largest supported Hermite order.
pub const MAX_HERMITE_ORDER: u32 = 30;

/// Physicists' Hermite polynomial `H_n(z)` by the three-term recurrence.
pub fn hermite(n: u32, z: Complex64) -> Complex64 {
    let mut h0 = Complex64::new(1.0, 0.0);
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * z;
    for k in 1..n {
        let h2 = 2.0 * z * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// All `H_0(z) ..= H_n(z)`.
pub fn hermite_all(n: u32, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Complex64::new(1.0, 0.0));
    if n == 0 {
        return out;
    }
    out.push(2.0 * z);
    for k in 1..n as usize {
        let next = 2.0 * z * out[k] - 2.0 * k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let dx = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| lo + dx * i as f64).collect()
        }
    }
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let mut acc = Neumaier::new();
            acc.add(0.5 * values[0]);
            for v in &values[1..n - 1] {
                acc.add(*v);
            }
            acc.add(0.5 * values[n - 1]);
            acc.value() * dx
        }
    }
}

/// Relative difference `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: Complex64, b: Complex64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let vals = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum_f64(vals), 2.0);
    }

    #[test]
    fn hermite_low_orders() {
        let z = Complex64::new(0.3, -0.7);
        assert!((hermite(2, z) - (4.0 * z * z - 2.0)).norm() < 1e-14);
        let h3 = 8.0 * z * z * z - 12.0 * z;
        assert!((hermite(3, z) - h3).norm() < 1e-13);
        let all = hermite_all(5, z);
        for (k, h) in all.iter().enumerate() {
            assert!((hermite(k as u32, z) - h).norm() < 1e-12);
        }
    }

    #[test]
    fn sqrt_of_negative_real_has_positive_imag() {
        let r = psqrt(Complex64::new(-4.0, -0.0));
        assert_eq!(r, Complex64::new(0.0, 2.0));
        assert_eq!(sqrt_recip_real(-0.25), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn binomial_row() {
        let row: Vec<f64> = (0..=5).map(|k| binomial(5, k)).collect();
        assert_eq!(row, vec![1.0, 5.0, 10.0, 10.0, 5.0, 1.0]);
    }
}
