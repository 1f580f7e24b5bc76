//! Honest-time computation and nested Monte Carlo verification of the
//! recovery formula `X_T = E[X_inf 1_{g < T} | F_T]` and the supremum
//! identity `P(g_k >= t | F_t) = 1 ^ (M_t / k)`.
//!
//! The fixture is a Brownian motion started at `start`, absorbed at 0, with
//! `X = (k - M)^+` bounded in `[0, k]`. Inner continuations stop at the
//! absorbing barriers 0 and k rather than at a horizon, so the limit value
//! is exact: hitting 0 first means the level-k set is never revisited.

use crate::generators::{GeneratorKind, GeneratorSpec};
use crate::grid::TimeGrid;
use crate::path::SigmaDecomposition;
use crate::rng::StreamKey;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Last grid time at which the path or its left limit sits at zero (within
/// `tol`; `tol = 0` gives exact-zero semantics). Returns 0 when only the
/// initial zero exists.
pub fn honest_time(d: &SigmaDecomposition, tol: f64) -> f64 {
    let mut g = 0.0;
    for i in (0..d.x.len()).rev() {
        if d.x.post()[i].abs() <= tol || d.x.pre()[i].abs() <= tol {
            g = d.grid().time(i);
            break;
        }
    }
    g
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub theorem: String,
    pub k: f64,
    pub start: f64,
    #[serde(rename = "T")]
    pub t_checkpoint: f64,
    pub n_outer: usize,
    pub n_inner: usize,
    /// Mean over outer paths of |X_T - inner estimate|.
    pub mean_abs_error: f64,
    /// Mean over outer paths of 3 * inner standard error.
    pub mean_bound: f64,
    /// Mean and max deviation of the inner estimates from the analytic
    /// barrier-hitting oracle (identical to X_T on this fixture).
    pub oracle_mean_abs_dev: f64,
    pub oracle_max_dev: f64,
    pub pass: bool,
}

/// Walk from `m` until the first grid value <= 0 or >= k.
/// Returns true when 0 is hit first (the level-k set is never revisited).
fn hits_zero_first(stream: StreamKey, sqrt_dt: f64, mut m: f64, k: f64) -> bool {
    debug_assert!(m > 0.0 && m < k);
    let mut step = 1u64;
    loop {
        m += sqrt_dt * stream.normal_at(step);
        if m <= 0.0 {
            return true;
        }
        if m >= k {
            return false;
        }
        step += 1;
        // Exit times from (0, k) have geometric tails; a trillion steps only
        // happens if something is broken.
        assert!(step < 1_000_000_000_000, "runaway inner continuation");
    }
}

/// Per-outer-path pieces shared by both checks.
struct InnerEstimate {
    value: f64,
    stderr: f64,
}

/// Estimate `P(hit 0 before k)` from `m`, scaled by `scale`.
fn inner_absorption_estimate(
    key: StreamKey,
    sqrt_dt: f64,
    m: f64,
    k: f64,
    n_inner: usize,
    scale: f64,
) -> InnerEstimate {
    let hits: usize = (0..n_inner)
        .map(|j| hits_zero_first(key.child(j as u64), sqrt_dt, m, k) as usize)
        .sum();
    let p = hits as f64 / n_inner as f64;
    InnerEstimate {
        value: scale * p,
        stderr: scale * (p * (1.0 - p) / n_inner as f64).sqrt(),
    }
}

fn validate_levels(k: f64, start: f64) -> Result<()> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::InvalidArgument(format!("level k must be positive, got {k}")));
    }
    if !start.is_finite() || start <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "start level must be positive, got {start}"
        )));
    }
    Ok(())
}

/// Verify the recovery formula on `X = (k - M)^+` at `T = grid.horizon()`.
///
/// Each outer path evolves the absorbed martingale to `T`; the inner batch
/// estimates `E[X_inf 1_{g < T} | F_T] = k P(hit 0 before k | M_T)` and is
/// compared against `X_T` and the ruin oracle `k (1 - M_T / k)`.
pub fn recovery_check(
    grid: &Arc<TimeGrid>,
    k: f64,
    start: f64,
    n_outer: usize,
    n_inner: usize,
    seed: u64,
) -> Result<RecoveryReport> {
    validate_levels(k, start)?;
    if start >= k {
        return Err(Error::InvalidArgument(format!(
            "need 0 < start < k, got start {start}, k {k}"
        )));
    }
    let spec = GeneratorSpec::new(GeneratorKind::AbsorbedBmMartingale).with_start_level(start);
    let sqrt_dt = grid.sqrt_dt();
    let n = grid.steps();
    let base = StreamKey::new(seed);
    let rows: Vec<(f64, f64, f64, f64)> = (0..n_outer)
        .into_par_iter()
        .map(|o| {
            let outer_key = base.child(o as u64);
            let d = spec.generate(grid, outer_key).expect("validated spec");
            let m_t = d.m.post()[n];
            let x_t = (k - m_t).max(0.0);
            let est = if m_t == 0.0 {
                // Absorbed: no continuation can revisit level k.
                InnerEstimate {
                    value: k,
                    stderr: 0.0,
                }
            } else if m_t >= k {
                // Already at or above k at time T: the event g >= T is certain.
                InnerEstimate {
                    value: 0.0,
                    stderr: 0.0,
                }
            } else {
                inner_absorption_estimate(outer_key.child(u64::MAX), sqrt_dt, m_t, k, n_inner, k)
            };
            let oracle = (k - m_t).clamp(0.0, k);
            (
                (x_t - est.value).abs(),
                3.0 * est.stderr,
                (est.value - oracle).abs(),
                est.stderr,
            )
        })
        .collect();
    let nf = n_outer as f64;
    let mean_abs_error = rows.iter().map(|r| r.0).sum::<f64>() / nf;
    let mean_bound = rows.iter().map(|r| r.1).sum::<f64>() / nf;
    let oracle_mean_abs_dev = rows.iter().map(|r| r.2).sum::<f64>() / nf;
    let oracle_max_dev = rows.iter().map(|r| r.2).fold(0.0f64, f64::max);
    let pass = mean_abs_error <= mean_bound && oracle_mean_abs_dev <= mean_bound;
    Ok(RecoveryReport {
        theorem: "recovery".into(),
        k,
        start,
        t_checkpoint: grid.horizon(),
        n_outer,
        n_inner,
        mean_abs_error,
        mean_bound,
        oracle_mean_abs_dev,
        oracle_max_dev,
        pass,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupremumReport {
    pub theorem: String,
    pub k: f64,
    pub start: f64,
    pub t: f64,
    pub n_outer: usize,
    pub n_inner: usize,
    pub mean_abs_error: f64,
    pub mean_bound: f64,
    /// Number of outer paths resolved exactly at a boundary state.
    pub exact_boundary_count: usize,
    pub pass: bool,
}

/// Verify `P(g_k >= t | F_t) = 1 ^ (M_t / k)` at checkpoint `t`.
///
/// At `t = 0` the state is deterministic, so a single inner batch of size
/// `n_inner` is used. Boundary states are exact: an absorbed path reports
/// probability 0, a path at or above `k` reports 1, with no simulation.
pub fn supremum_identity_check(
    grid: &Arc<TimeGrid>,
    k: f64,
    start: f64,
    t: f64,
    n_outer: usize,
    n_inner: usize,
    seed: u64,
) -> Result<SupremumReport> {
    validate_levels(k, start)?;
    let sqrt_dt = grid.sqrt_dt();
    let base = StreamKey::new(seed);

    let estimate_at = |m_t: f64, key: StreamKey| -> (f64, f64, bool) {
        let formula = (m_t / k).min(1.0);
        if m_t == 0.0 {
            (0.0 - formula, 0.0, true)
        } else if m_t >= k {
            (1.0 - formula, 0.0, true)
        } else {
            let est = inner_absorption_estimate(key, sqrt_dt, m_t, k, n_inner, 1.0);
            // hit 0 first <=> never returns to level k, so P(g_k >= t) is the
            // complementary probability.
            ((1.0 - est.value) - formula, 3.0 * est.stderr, false)
        }
    };

    let rows: Vec<(f64, f64, bool)> = if t == 0.0 {
        vec![estimate_at(start, base.child(0))]
    } else {
        let t_idx = grid.index_of_time(t)?;
        let spec = GeneratorSpec::new(GeneratorKind::AbsorbedBmMartingale).with_start_level(start);
        (0..n_outer)
            .into_par_iter()
            .map(|o| {
                let outer_key = base.child(o as u64);
                let d = spec.generate(grid, outer_key).expect("validated spec");
                estimate_at(d.m.post()[t_idx], outer_key.child(u64::MAX))
            })
            .collect()
    };
    let nf = rows.len() as f64;
    let mean_abs_error = rows.iter().map(|r| r.0.abs()).sum::<f64>() / nf;
    let mean_bound = rows.iter().map(|r| r.1).sum::<f64>() / nf;
    let exact_boundary_count = rows.iter().filter(|r| r.2).count();
    // Boundary rows are exact; when every row is exact the bound is zero and
    // the error must be zero too.
    let pass = mean_abs_error <= mean_bound || rows.iter().all(|r| r.2 && r.0 == 0.0);
    Ok(SupremumReport {
        theorem: "supremum".into(),
        k,
        start,
        t,
        n_outer: rows.len(),
        n_inner,
        mean_abs_error,
        mean_bound,
        exact_boundary_count,
        pass,
    })
}
