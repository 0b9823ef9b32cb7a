//! Path counts of large cascades in bits: the closed-form virtual qubit
//! number per gain, and the constant-ratio model.

use mpdsim::scaling;

fn main() -> mpdsim::Result<()> {
    println!("exact count, L = 5, m = 8, k = 3: {:?}", scaling::n_paths(5, 8, 3)?);
    for g in [-5.0, -1.0, 0.0, 1.0, 3.0] {
        let rows = scaling::sweep(&[g], 1..=200, 1.0);
        let first = |f: fn(&scaling::SweepRow) -> bool| rows.iter().find(|r| f(r)).map(|r| r.l);
        println!(
            "G = {g:>4}: q_path(50) = {:>7.1}, reaches 66 at L = {:?}, 100 at L = {:?}",
            rows[49].q_path,
            first(|r| r.crossed_66),
            first(|r| r.crossed_100)
        );
    }
    let ratio = scaling::ratio_sweep(4.0, 1..=80);
    let hit = ratio.iter().find(|r| r.first_100).expect("reached");
    println!("ratio 4: 2^100 paths after L = {} planes (N = {})", hit.l, hit.planes);
    Ok(())
}
