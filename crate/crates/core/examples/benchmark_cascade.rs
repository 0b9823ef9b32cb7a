//! Detection probabilities and Wigner negative volumes on the three planes
//! of the two-plane benchmark cascade, next to the reference values.

use std::time::Instant;

use mpdsim::analysis;
use mpdsim::benchmark::Branch;

fn main() -> mpdsim::Result<()> {
    for branch in Branch::ALL {
        let t = Instant::now();
        let setup = branch.config()?.resolve()?;
        let pe = analysis::detection_profile(&setup)?;
        let v: Vec<f64> = (1..=3)
            .map(|j| analysis::plane_negative_volume(&setup, j, 1024).map(|r| r.volume))
            .collect::<mpdsim::Result<_>>()?;
        println!("{:<20} P_E {:?}  reference {:?}", branch.name(), round(&pe), branch.reference_detection());
        println!("{:<20} V   {:?}  reference {:?}  ({:.2?})", "", round(&v), branch.reference_negative_volume(), t.elapsed());
    }
    Ok(())
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}
