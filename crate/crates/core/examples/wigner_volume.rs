//! Wigner negative volume of Gaussian and Hermite-Gaussian sources, and the
//! exactness of the position marginal.

use mpdsim::analysis;
use mpdsim::Source;

fn main() -> mpdsim::Result<()> {
    let sources = [
        Source::Gaussian { sigma0_m: 20e-6 },
        Source::HermiteGaussian { w0_m: 200e-6, order: 1 },
        Source::HermiteGaussian { w0_m: 200e-6, order: 10 },
    ];
    for src in sources {
        let field = analysis::source_field(&src, 1024);
        let w = analysis::wigner(&field)?;
        let marginal = w.position_marginal();
        let err = marginal
            .iter()
            .zip(&field.values)
            .map(|(m, v)| (m - v.norm_sqr()).abs())
            .fold(0.0, f64::max);
        println!(
            "{src:?}\n    V = {:.4}  ∫∫W = {:.6}  marginal error {err:.2e}",
            analysis::negative_volume(&w),
            w.total()
        );
    }
    Ok(())
}
