//! A diffractive neuron: the sensor field weighted by Gaussian output masks,
//! compared with the explicit sum over the four paths of a 2×2 cascade.

use mpdsim::optics::free_space;
use mpdsim::setup::{DiffractionPlane, Setup, Slit, Source};
use mpdsim::engine;

fn main() -> mpdsim::Result<()> {
    let l = 650e-9;
    let planes = vec![
        DiffractionPlane::new(vec![Slit::new(-20e-6, 8e-6), Slit::new(20e-6, 8e-6)]),
        DiffractionPlane::new(vec![Slit::new(-30e-6, 9e-6), Slit::new(30e-6, 9e-6)]),
    ];
    let m = [free_space(0.05, l)?, free_space(0.07, l)?, free_space(0.09, l)?];
    let setup = Setup::from_matrices(Source::Gaussian { sigma0_m: 30e-6 }, planes, &m, l)?;
    let outputs = [Slit::new(-60e-6, 15e-6), Slit::new(60e-6, 15e-6)];

    for x in [-60e-6, 0.0, 60e-6] {
        let o = engine::neuron_output(&setup, &outputs, x)?;
        let by_paths: num_complex::Complex64 = (0..4).map(|n| engine::path_state(&setup, n).unwrap().amplitude(x)).sum::<num_complex::Complex64>()
            * outputs.iter().map(|s| s.mask(x)).sum::<f64>();
        println!("x = {:>5.0} µm  O = {o:.6e}  |O|² = {:.6e}  four paths {by_paths:.6e}", x * 1e6, o.norm_sqr());
    }
    Ok(())
}
