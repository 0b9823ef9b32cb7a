//! Path-count arithmetic for large cascades: `L` planes where plane `j`
//! carries `j·m·k` slits, with per-plane energy loss `s` and path pruning
//! `r`. Everything is kept in `log₂` because counts reach hundreds of bits.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `log₂((L−1)!)`.
pub fn log2_factorial_prev(l: u32) -> f64 {
    ln_gamma(l as f64) / std::f64::consts::LN_2
}

/// Total path count `(L−1)! m^{L−1} k^L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathCount {
    pub log2: f64,
    /// Exact value when it fits below `2⁶³`.
    pub exact: Option<u64>,
}

pub fn n_paths(l: u32, m: u64, k: u64) -> Result<PathCount> {
    if l == 0 {
        return Err(Error::domain("at least one plane is needed"));
    }
    if m == 0 || k == 0 {
        return Err(Error::domain("slit counts must be positive"));
    }
    let log2 = log2_factorial_prev(l) + (l - 1) as f64 * (m as f64).log2() + l as f64 * (k as f64).log2();
    let mut exact: Option<u128> = Some(1);
    for i in 1..l as u128 {
        exact = exact.and_then(|v| v.checked_mul(i * m as u128));
    }
    for _ in 0..l {
        exact = exact.and_then(|v| v.checked_mul(k as u128));
    }
    Ok(PathCount {
        log2,
        exact: exact.filter(|&v| v < 1u128 << 63).map(|v| v as u64),
    })
}

/// Exponent form: `s = 2^{s*}`, `r = 2^{r*}`, `m = 4·2^{m*}`, `k = 2^{k*}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingParams {
    pub l: u32,
    pub m_star: f64,
    pub k_star: f64,
    pub s_star: f64,
    pub r_star: f64,
}

impl ScalingParams {
    pub fn m(&self) -> f64 {
        4.0 * self.m_star.exp2()
    }

    pub fn k(&self) -> f64 {
        self.k_star.exp2()
    }

    pub fn s(&self) -> f64 {
        self.s_star.exp2()
    }

    pub fn r(&self) -> f64 {
        self.r_star.exp2()
    }

    pub fn gain(&self) -> f64 {
        self.m_star + self.k_star - self.s_star - self.r_star
    }
}

/// `log₂` of the effective path count `N_path / (s r)^L`, computed from the
/// raw factors.
pub fn effective_paths(p: &ScalingParams) -> Result<f64> {
    if p.l == 0 {
        return Err(Error::domain("at least one plane is needed"));
    }
    let l = p.l as f64;
    Ok(log2_factorial_prev(p.l) + (l - 1.0) * p.m().log2() + l * p.k().log2() - l * (p.s() * p.r()).log2())
}

/// Virtual qubit number `q = log₂((L−1)!) − 2 − m* + L(2 + G)`.
pub fn virtual_qubits(p: &ScalingParams) -> f64 {
    log2_factorial_prev(p.l) - 2.0 - p.m_star + p.l as f64 * (2.0 + p.gain())
}

/// Path count of a recent superconducting-processor sampling experiment.
pub const REFERENCE_QUBITS: f64 = 66.0;
pub const TARGET_QUBITS: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub l: u32,
    pub gain: f64,
    pub q_path: f64,
    pub crossed_66: bool,
    pub crossed_100: bool,
}

/// `q_path(L)` for every gain `G` with `m* = m_star`, `k* = G − m_star`,
/// `s* = r* = 0`.
pub fn sweep(gains: &[f64], ls: std::ops::RangeInclusive<u32>, m_star: f64) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &g in gains {
        for l in ls.clone() {
            let p = ScalingParams {
                l,
                m_star,
                k_star: g - m_star,
                s_star: 0.0,
                r_star: 0.0,
            };
            let q = virtual_qubits(&p);
            rows.push(SweepRow {
                l,
                gain: g,
                q_path: q,
                crossed_66: q >= REFERENCE_QUBITS,
                crossed_100: q >= TARGET_QUBITS,
            });
        }
    }
    rows
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("L,G,q_path,crossed_66,crossed_100\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.l,
            crate::analysis::fmt(r.gain),
            crate::analysis::fmt(r.q_path),
            r.crossed_66,
            r.crossed_100
        ));
    }
    out
}

/// Effective paths growing by `r̃/s` per plane: `log₂ = L log₂(r̃/s)` after
/// `L` diffraction planes (`N = L + 1` planes with the sensor).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub l: u32,
    pub planes: u32,
    pub log2_paths: f64,
    /// First row reaching `2^100` paths.
    pub first_100: bool,
}

pub fn ratio_sweep(ratio: f64, ls: std::ops::RangeInclusive<u32>) -> Vec<RatioRow> {
    let mut seen = false;
    ls.map(|l| {
        let q = l as f64 * ratio.log2();
        let first = !seen && q >= TARGET_QUBITS;
        seen |= first;
        RatioRow {
            l,
            planes: l + 1,
            log2_paths: q,
            first_100: first,
        }
    })
    .collect()
}

pub fn ratio_csv(rows: &[RatioRow]) -> String {
    let mut out = String::from("L,N,log2_paths,first_100\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.l, r.planes, crate::analysis::fmt(r.log2_paths), r.first_100));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_counts() {
        assert_eq!(n_paths(1, 8, 5).unwrap().exact, Some(5));
        assert_eq!(n_paths(3, 8, 2).unwrap().exact, Some(1024));
        for l in 1..=20 {
            for m in 1..=16 {
                for k in 1..=16 {
                    let c = n_paths(l, m, k).unwrap();
                    if let Some(e) = c.exact {
                        assert!((c.log2 - (e as f64).log2()).abs() < 1e-9, "{l} {m} {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn ten_plane_example() {
        let p = ScalingParams { l: 10, m_star: 1.0, k_star: 2.0, s_star: 1.0, r_star: 1.0 };
        let expect = 362_880f64.log2() - 3.0 + 30.0;
        assert!((effective_paths(&p).unwrap() - expect).abs() < 1e-12);
        assert!((virtual_qubits(&p) - expect).abs() < 1e-12);
    }

    #[test]
    fn ratio_four_reaches_100_bits_at_51_planes() {
        let rows = ratio_sweep(4.0, 1..=80);
        let first: Vec<_> = rows.iter().filter(|r| r.first_100).collect();
        assert_eq!(first.len(), 1);
        assert_eq!(first[0].planes, 51);
    }

    #[test]
    fn gain_rows_are_monotone_for_nonnegative_gain() {
        let rows = sweep(&[0.0, 1.0, 3.0], 1..=80, 1.0);
        for w in rows.windows(2) {
            if w[0].gain == w[1].gain {
                assert!(w[1].q_path >= w[0].q_path);
            }
        }
        // Even a strongly negative gain reaches hundreds of bits by L = 100.
        let hundreds = sweep(&[-5.0], 100..=100, 1.0)[0].q_path;
        assert!(hundreds > 200.0, "{hundreds}");
    }

    proptest! {
        #[test]
        fn closed_form_equals_log_of_count(
            l in 1u32..400,
            m_star in -1.0f64..6.0,
            k_star in -1.0f64..6.0,
            s_star in 0.0f64..6.0,
            r_star in 0.0f64..6.0,
        ) {
            let p = ScalingParams { l, m_star, k_star, s_star, r_star };
            let a = virtual_qubits(&p);
            let b = effective_paths(&p).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}
