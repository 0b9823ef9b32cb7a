//! Fitting a flat-topped aperture `exp(−(x/w)⁴)` with sums of centred
//! Gaussian slits.

use mpdsim::mixture::fit_gaussian_mixture;
use mpdsim::numeric::linspace;
use mpdsim::Error;

fn main() -> mpdsim::Result<()> {
    let w = 10e-6;
    let samples: Vec<(f64, f64)> = linspace(-30e-6, 30e-6, 401)
        .into_iter()
        .map(|x| (x, (-(x / w).powi(4)).exp()))
        .collect();
    for k in 1..=4 {
        match fit_gaussian_mixture(&samples, k) {
            Ok(fit) => {
                println!("K = {k}: rms {:.4}", fit.residual_rms);
                for c in &fit.components {
                    println!("    a = {:>8.4}, β = {:.3} µm", c.amplitude, c.width_m * 1e6);
                }
            }
            Err(Error::NoConvergence { best_rms, .. }) => println!("K = {k}: no convergence, best rms {best_rms:.4}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
