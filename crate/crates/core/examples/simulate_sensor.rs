//! Sensor intensity of a configuration file, plus the detection probability
//! at every plane.
//!
//! `cargo run --example simulate_sensor -- crates/core/fixtures/gaussian_lens.json`

use mpdsim::{analysis, engine, SetupConfig};

fn main() -> mpdsim::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "crates/core/fixtures/gaussian_lens.json".into());
    let setup = SetupConfig::load(path.as_ref())?.resolve()?;
    println!("{} paths through {} planes", setup.path_count(), setup.planes.len());

    let s = engine::sample_sensor(&setup, false)?;
    let (k_peak, peak) = s
        .intensity
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    println!("peak intensity {peak:.4e} at x = {:.2} µm", s.positions[k_peak] * 1e6);

    // Coarse profile, every 40th sample.
    for (x, i) in s.positions.iter().zip(&s.intensity).step_by(40) {
        let bar = "#".repeat((60.0 * i / peak).round() as usize);
        println!("{:>8.1} µm {bar}", x * 1e6);
    }
    println!("P_E per plane {:?}", analysis::detection_profile(&setup)?);
    Ok(())
}
