//! An order-0 Hermite-Gaussian source with `W₀ = σ₀√(2π)` reproduces the
//! Gaussian pipeline, and the Hermite integral identity behind the
//! Hermite-Gaussian recursion holds for every order up to 10.

use mpdsim::benchmark::Branch;
use mpdsim::engine::{self, hermite};
use mpdsim::Source;

fn main() -> mpdsim::Result<()> {
    let branch = Branch::ALL[2];
    let gaussian = branch.config()?.resolve()?;
    let mut twin = gaussian.clone();
    if let Source::Gaussian { sigma0_m } = gaussian.source {
        twin.source = Source::hg_equivalent_of_gaussian(sigma0_m);
    }
    let xs = gaussian.sensor.positions();
    let a = engine::sensor_field(&gaussian, &xs)?;
    let b = engine::sensor_field(&twin, &xs)?;
    let peak = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let worst = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max) / peak;
    println!("{}: Gaussian vs order-0 twin, max relative difference {worst:.2e}", branch.name());

    for l in [1, 4, 10] {
        let r = hermite::hermite_integral(l, 0.6, 1.3)?;
        println!("l = {l:>2}: quadrature {:.12e}  closed form {:.12e}  rel {:.1e}", r.quadrature, r.closed_form, r.rel_error());
    }
    Ok(())
}
