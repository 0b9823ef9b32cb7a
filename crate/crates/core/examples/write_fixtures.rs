//! Writes the four benchmark configurations and two uniform-lattice
//! configurations as JSON into the directory given on the command line.
//!
//! `cargo run --example write_fixtures -- crates/core/fixtures`

use std::path::PathBuf;

use mpdsim::benchmark::Branch;
use mpdsim::setup::{DiffractionPlane, Element, OpticsEntry, Sensor, SetupConfig, Source};

fn lattice(planes: usize) -> SetupConfig {
    let fs = |l: f64| OpticsEntry::Single(Element::FreeSpace { length_m: l });
    let mut optics: Vec<OpticsEntry> = (0..planes).map(|j| fs(0.04 - 0.01 * j as f64)).collect();
    optics.push(fs(0.002));
    SetupConfig {
        source: Source::Gaussian { sigma0_m: 30e-6 },
        planes: (0..planes).map(|j| DiffractionPlane::uniform(3, 25e-6 + 5e-6 * j as f64, 6e-6)).collect(),
        optics,
        wavelength_m: 650e-9,
        sensor: Sensor { ts_m: 2e-6, k_min: -60, k_max: 60 },
        path_cap: None,
    }
}

fn main() -> mpdsim::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).expect("usage: write_fixtures <dir>"));
    std::fs::create_dir_all(&dir)?;
    for b in Branch::ALL {
        let path = dir.join(format!("{}.json", b.name()));
        b.config()?.save(&path)?;
        println!("{}", path.display());
    }
    for (name, n) in [("lattice_one_plane", 1), ("lattice_two_planes", 2)] {
        let path = dir.join(format!("{name}.json"));
        lattice(n).save(&path)?;
        println!("{}", path.display());
    }
    Ok(())
}
