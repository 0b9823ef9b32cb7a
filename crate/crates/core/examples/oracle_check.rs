//! Closed-form sensor field against brute-force quadrature propagation for
//! the four benchmark branches, without phase alignment.

use mpdsim::benchmark::Branch;
use mpdsim::{engine, oracle};

fn main() -> mpdsim::Result<()> {
    for b in Branch::ALL {
        let setup = b.config()?.resolve()?;
        let reference = oracle::propagate_setup(&setup, (-600e-6, 600e-6, 601), &oracle::OraclePlan::default())?;
        let closed = engine::sensor_field(&setup, &reference.xs())?;
        let rep = oracle::compare_values(&closed, &reference.values, false);
        println!("{:<20} L∞ rel {:.2e}  L2 rel {:.2e}", b.name(), rep.linf_rel, rep.l2_rel);
    }
    Ok(())
}
