//! Sensor intensity of a uniform slit lattice written as a partial
//! multidimensional theta sum.

use mpdsim::optics::free_space;
use mpdsim::setup::{DiffractionPlane, Setup, Source};
use mpdsim::{engine, theta};

fn main() -> mpdsim::Result<()> {
    let l = 650e-9;
    let planes = vec![DiffractionPlane::uniform(5, 25e-6, 6e-6), DiffractionPlane::uniform(5, 30e-6, 7e-6)];
    let m = [free_space(0.04, l)?, free_space(0.03, l)?, free_space(0.002, l)?];
    let setup = Setup::from_matrices(Source::Gaussian { sigma0_m: 30e-6 }, planes, &m, l)?;

    let map = theta::map_uniform_setup(&setup)?;
    println!("Γ = {:.4}", map.gamma);
    println!("M = {}, smallest eigenvalue of Re Γ {:.4}", map.m, map.min_eigenvalue());
    for x in [-80e-6, -20e-6, 0.0, 35e-6] {
        let direct = engine::sensor_field(&setup, &[x])?[0].norm_sqr();
        let via_theta = map.intensity(x)?;
        println!("x = {:>6.1} µm  path sum {direct:.8e}  theta {via_theta:.8e}", x * 1e6);
    }
    Ok(())
}
