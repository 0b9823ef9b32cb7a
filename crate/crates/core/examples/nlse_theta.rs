//! Finite-band solution of the nonlinear Schrödinger equation from a ratio
//! of theta sums, with the truncation change from `M` to `M + 1`.

use mpdsim::theta::{self, RiemannSpectrum};
use num_complex::Complex64;

fn main() -> mpdsim::Result<()> {
    let spec = RiemannSpectrum {
        y: vec![vec![1.0, 0.2], vec![0.2, 0.8]],
        k: vec![1.0, 1.5],
        omega: vec![0.4, -0.3],
        delta_minus: vec![0.3, 0.1],
        delta_plus: vec![-0.2, 0.4],
        k0: 1.0,
        omega0: 0.2,
        q0: Complex64::new(1.0, 0.0),
    };
    for m in [1, 2, 4] {
        let v = theta::nlse_field(&spec, 0.7, 0.3, m)?;
        println!("M = {m}  q = {:.12}  Δ = {:.2e}", v.q, v.truncation_delta);
    }
    let one = theta::theta_with_delta(
        &nalgebra::DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
        &[Complex64::new(0.0, 0.0)],
        1,
    )?;
    println!("Θ_1(1, 0) = {:.7}  (1 + 2e^-π = {:.7})", one.value.re, 1.0 + 2.0 * (-std::f64::consts::PI).exp());
    Ok(())
}
