//! ABCD algebra of the optical sections: composition, fractional Fourier
//! transforms, and realizing a matrix with free space and one lens.

use mpdsim::optics::{self, compose_chain};

fn main() -> mpdsim::Result<()> {
    let lambda = 650e-9;
    let f = 0.063;

    // Free space f, lens f, free space f is an optical Fourier transform.
    let two_f = compose_chain(&[
        optics::free_space(f, lambda)?,
        optics::lens(f, lambda)?,
        optics::free_space(f, lambda)?,
    ]);
    println!("2f system       {two_f:?}  det {:.3e}", two_f.det_error());

    // Two quarter turns make a parity flip.
    let flip = optics::frft(std::f64::consts::FRAC_PI_2).after(&optics::frft(std::f64::consts::FRAC_PI_2));
    println!("frft(π/2)²      {flip:?}");

    let r = optics::realize_three_element(&two_f, lambda)?;
    println!("realization     L_a = {:.4} m, f = {:.4} m, L_b = {:.4} m, physical {}", r.la, r.focal, r.lb, r.physical);
    println!("recompose error {:.3e}", r.recompose(lambda).max_abs_diff(&two_f));

    let b0 = optics::scale(2.0)?.after(&optics::chirp(3.0));
    println!("b = 0 section   {b0:?}");
    Ok(())
}
