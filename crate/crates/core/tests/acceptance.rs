//! Acceptance checks. Prints one PASS or FAIL line per criterion and a
//! summary; see the README for what each criterion measures.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use mpdsim::benchmark::Branch;
use mpdsim::engine::hermite;
use mpdsim::form::{self, ThreePlaneParams};
use mpdsim::oracle::{self, OraclePlan};
use mpdsim::setup::{DiffractionPlane, Setup, Slit, Source};
use mpdsim::{analysis, checks, engine, scaling, SetupConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = fn() -> mpdsim::Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> mpdsim::Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn load(name: &str) -> mpdsim::Result<Setup> {
    SetupConfig::load(&fixture(name))?.resolve()
}

fn detection() -> mpdsim::Result<Outcome> {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut lines = Vec::new();
    for b in Branch::ALL {
        let t = Instant::now();
        let pe = analysis::detection_profile(&load(b.name())?)?;
        slowest = slowest.max(t.elapsed());
        for (g, w) in pe.iter().zip(b.reference_detection()) {
            worst = worst.max((g - w).abs());
        }
        lines.push(format!("{} [{:.4}, {:.4}, {:.4}]", b.name(), pe[0], pe[1], pe[2]));
    }
    outcome(
        worst <= 0.01 && slowest < Duration::from_secs(10),
        format!("max |ΔP_E| {worst:.4} (≤ 0.01), slowest branch {slowest:.2?}; {}", lines.join(", ")),
    )
}

fn negative_volume() -> mpdsim::Result<Outcome> {
    let t = Instant::now();
    let (mut source_err, mut later_err) = (0.0f64, 0.0f64);
    let mut gaussian_source = 0.0f64;
    for b in Branch::ALL {
        let setup = load(b.name())?;
        let reference = b.reference_negative_volume();
        for j in 1..=3 {
            let v = analysis::plane_negative_volume(&setup, j, analysis::DEFAULT_WIGNER_POINTS)?.volume;
            let e = (v - reference[j - 1]).abs();
            match (j, b.source) {
                (1, mpdsim::benchmark::SourceKind::Gaussian) => gaussian_source = gaussian_source.max(v.abs()),
                (1, _) => source_err = source_err.max(e),
                _ => later_err = later_err.max(e),
            }
        }
    }
    let elapsed = t.elapsed();
    outcome(
        gaussian_source < 1e-3 && source_err <= 0.01 && later_err <= 0.1 && elapsed < Duration::from_secs(60),
        format!(
            "Gaussian source |V| {gaussian_source:.1e} (< 1e-3), order-10 source |ΔV| {source_err:.4} (≤ 0.01), \
             planes 2-3 max |ΔV| {later_err:.3} (≤ 0.1), {elapsed:.2?}"
        ),
    )
}

fn oracle_error(setup: &Setup) -> mpdsim::Result<f64> {
    let s = setup.sensor;
    let n = (s.k_max - s.k_min + 1) as usize;
    let reference = oracle::propagate_setup(setup, (s.k_min as f64 * s.ts_m, s.k_max as f64 * s.ts_m, n), &OraclePlan::default())?;
    let closed = engine::sensor_field(setup, &reference.xs())?;
    Ok(oracle::compare_values(&closed, &reference.values, false).linf_rel)
}

fn oracle_equivalence() -> mpdsim::Result<Outcome> {
    let mut worst = 0.0f64;
    for b in Branch::ALL {
        worst = worst.max(oracle_error(&load(b.name())?)?);
    }
    let branches = worst;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..20 {
        let src = random_source(&mut rng);
        let setup = random_setup(&mut rng, src, 1 + i % 3);
        worst = worst.max(oracle_error(&setup)?);
    }
    outcome(
        worst < 1e-5,
        format!("raw L∞ rel: benchmark branches {branches:.2e}, with 20 random cascades {worst:.2e} (< 1e-5)"),
    )
}

fn iterative_vs_matrix() -> mpdsim::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let src = random_source(&mut rng);
        let setup = random_setup(&mut rng, src, 1 + i % 4);
        let n = rng.random_range(0..setup.path_count());
        let state = engine::path_state(&setup, n)?;
        let centers: Vec<f64> = setup.path_slits(n).iter().map(|s| s.center_m).collect();
        let xs = setup.sensor.positions();
        let direct: Vec<_> = xs.iter().map(|&x| state.amplitude(x)).collect();
        let regrouped: Vec<_> = match src {
            Source::Gaussian { .. } => {
                let f = form::build_gaussian_form(&setup, n)?;
                xs.iter().map(|&x| f.evaluate(&centers, x)).collect()
            }
            Source::HermiteGaussian { .. } => {
                let f = form::build_hg_form(&setup, n)?;
                xs.iter().map(|&x| f.evaluate(&centers, x)).collect()
            }
        };
        let peak = direct.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let diff = direct.iter().zip(&regrouped).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(diff / peak);
    }
    outcome(worst < 1e-10, format!("1000 paths over 1 to 4 slit planes, max rel {worst:.2e} (< 1e-10)"))
}

fn polynomials() -> mpdsim::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = [0.0f64; 4];
    for _ in 0..1000 {
        let p = ThreePlaneParams {
            beta1: rng.random_range(3e-6..20e-6),
            beta2: rng.random_range(3e-6..20e-6),
            sigma0: rng.random_range(10e-6..50e-6),
            m01: random_lct(&mut rng),
            m12: random_lct(&mut rng),
            m23: random_lct(&mut rng),
        };
        let planes = vec![
            DiffractionPlane::new(vec![Slit::new(0.0, p.beta1)]),
            DiffractionPlane::new(vec![Slit::new(0.0, p.beta2)]),
        ];
        let setup = Setup::from_matrices(Source::Gaussian { sigma0_m: p.sigma0 }, planes, &[p.m01, p.m12, p.m23], WAVELENGTH)?;
        let e = checks::polynomial_errors(&form::evaluate_three_plane_polynomials(&p)?, &form::build_gaussian_form(&setup, 0)?);
        for k in 0..4 {
            worst[k] = worst[k].max(e[k]);
        }
    }
    outcome(
        worst.iter().all(|&e| e < 1e-9),
        format!(
            "1000 parameter sets, max rel: H {:.1e}, h {:.1e}, Υ {:.1e}, A+iB {:.1e} (< 1e-9)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn theta_equivalence() -> mpdsim::Result<Outcome> {
    let mut worst = 0.0f64;
    let mut applied = 0;
    for name in ["lattice_one_plane", "lattice_two_planes"] {
        let c = checks::theta_equivalence(&load(name)?, 32, 1e-8)?;
        if c.skipped.is_none() {
            applied += 1;
            worst = worst.max(c.error);
        }
    }
    outcome(
        applied == 2 && worst < 1e-8,
        format!("K = 3 lattices with one and two slit planes at 32 points, max rel {worst:.2e} (< 1e-8)"),
    )
}

fn scaling_identities() -> mpdsim::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let p = scaling::ScalingParams {
            l: rng.random_range(1..400),
            m_star: rng.random_range(-1.0..6.0),
            k_star: rng.random_range(-1.0..6.0),
            s_star: rng.random_range(0.0..6.0),
            r_star: rng.random_range(0.0..6.0),
        };
        worst = worst.max((scaling::virtual_qubits(&p) - scaling::effective_paths(&p)?).abs());
    }
    let gain = scaling::sweep(&[0.0], 1..=100, 1.0);
    let first_66 = gain.iter().find(|r| r.crossed_66).map(|r| r.l);
    let ratio = scaling::ratio_sweep(4.0, 1..=100);
    let first_100: Vec<_> = ratio.iter().filter(|r| r.first_100).map(|r| r.planes).collect();
    outcome(
        worst < 1e-9 && first_66.is_some() && first_100 == [51],
        format!(
            "closed form vs log2 count max |Δ| {worst:.1e} (< 1e-9); G = 0 flags q_path ≥ 66 from L = {}; \
             ratio 4 flags 2^100 at N = {first_100:?}",
            first_66.map_or("never".to_string(), |l| l.to_string())
        ),
    )
}

fn hg_degeneracy() -> mpdsim::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut setups: Vec<Setup> = vec![load("gaussian_lens")?, load("gaussian_free_space")?];
    for i in 0..20 {
        let s = Source::Gaussian { sigma0_m: rng.random_range(15e-6..40e-6) };
        setups.push(random_setup(&mut rng, s, 1 + i % 3));
    }
    for g in &setups {
        let Source::Gaussian { sigma0_m } = g.source else { unreachable!() };
        let mut h = g.clone();
        h.source = Source::hg_equivalent_of_gaussian(sigma0_m);
        let xs = g.sensor.positions();
        let (a, b) = (engine::sensor_field(g, &xs)?, engine::sensor_field(&h, &xs)?);
        let peak = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max) / peak);
    }
    let mut identity = 0.0f64;
    for l in 0..=10 {
        for _ in 0..10 {
            let r = hermite::hermite_integral(l, rng.random_range(-0.95..0.95), rng.random_range(-4.0..4.0))?;
            identity = identity.max(r.rel_error());
        }
    }
    outcome(
        worst < 1e-9 && identity < 1e-8,
        format!("order-0 twin max rel {worst:.1e} (< 1e-9); Hermite integral identity l ≤ 10 max rel {identity:.1e} (< 1e-8)"),
    )
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .map(|d| {
            d.filter_map(|e| e.ok())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    v.sort();
    v
}

fn determinism() -> mpdsim::Result<Outcome> {
    let dir = std::env::temp_dir().join(format!("mpdsim-acceptance-{}", std::process::id()));
    let config = fixture("hg_lens");
    let mut runs = Vec::new();
    for t in ["1", "4", "8"] {
        let out = dir.join(format!("threads-{t}"));
        let status = Command::new(env!("CARGO_BIN_EXE_mpdsim"))
            .args(["--threads", t, "simulate", "--config"])
            .arg(&config)
            .arg("--out-dir")
            .arg(&out)
            .status()?;
        if !status.success() {
            return outcome(false, format!("simulate with {t} threads exited with {status}"));
        }
        runs.push(read_dir(&out));
    }
    let _ = std::fs::remove_dir_all(&dir);
    let files = runs[0].len();
    outcome(
        files > 0 && runs.iter().all(|r| *r == runs[0]),
        format!("{files} output files compared across 1, 4 and 8 threads"),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("benchmark detection probabilities", detection),
        ("Wigner negative volumes", negative_volume),
        ("closed form vs quadrature oracle", oracle_equivalence),
        ("recursion vs quadratic form", iterative_vs_matrix),
        ("two-plane closed polynomials", polynomials),
        ("theta-sum intensity", theta_equivalence),
        ("path-count scaling", scaling_identities),
        ("Hermite-Gaussian degeneracy", hg_degeneracy),
        ("thread-count determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        failed += usize::from(!o.pass);
        println!("{} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
}
