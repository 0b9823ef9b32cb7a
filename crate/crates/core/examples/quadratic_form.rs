//! The sensor amplitude of one path regrouped as a quadratic form in the
//! slit centres, checked against the plane-by-plane recursion.

use mpdsim::optics::free_space;
use mpdsim::setup::{DiffractionPlane, Setup, Slit, Source};
use mpdsim::{engine, form};

fn main() -> mpdsim::Result<()> {
    let l = 650e-9;
    let planes = vec![
        DiffractionPlane::new(vec![Slit::new(-30e-6, 8e-6), Slit::new(30e-6, 8e-6)]),
        DiffractionPlane::new(vec![Slit::new(-20e-6, 6e-6), Slit::new(0.0, 6e-6), Slit::new(25e-6, 7e-6)]),
    ];
    let m = [free_space(0.05, l)?, free_space(0.04, l)?, free_space(0.003, l)?];
    let setup = Setup::from_matrices(Source::Gaussian { sigma0_m: 25e-6 }, planes, &m, l)?;

    let n = 4;
    let f = form::build_gaussian_form(&setup, n)?;
    println!("path {n}: slits {:?}", setup.path_slits(n));
    println!("H = {:.4e}", f.h_matrix);
    println!("h = {:.4e}", f.h_vector);
    println!("Υ = {:.4e}, A + iB = {:.4e} + {:.4e}i", f.upsilon(), f.a, f.b);

    let centers: Vec<f64> = setup.path_slits(n).iter().map(|s| s.center_m).collect();
    let state = engine::path_state(&setup, n)?;
    for x in [-50e-6, 0.0, 40e-6] {
        let (a, b) = (f.evaluate(&centers, x), state.amplitude(x));
        println!("x = {:>6.1} µm  form {a:.6e}  recursion {b:.6e}  rel {:.1e}", x * 1e6, (a - b).norm() / b.norm());
    }
    Ok(())
}
