//! Seeded generators producing certified class members with their exact
//! discrete decompositions attached.
//!
//! Exact-zero discipline: whenever a construction intends `X = 0` or
//! `X_- = 0` (absorption, waiting at zero, reset landing, pre-injection
//! state), the stored value is exactly `0.0`. Carrier integrals can then be
//! evaluated without tolerance.
//!
//! Gaussian increments come from a counter scheme keyed by
//! `(master_seed, member, step)`, so members can be produced in parallel and
//! regenerated in isolation bit-for-bit.

use crate::grid::TimeGrid;
use crate::path::{CadlagPath, SigmaDecomposition};
use crate::rng::StreamKey;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// sign with the `sgn(0) := +1` convention used in the Tanaka integrand.
#[inline]
pub(crate) fn sgn_plus(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    AbsBm,
    Drawdown,
    Reset,
    Injection,
    SigmaG,
    AbsorbedBmMartingale,
}

impl GeneratorKind {
    pub fn id(&self) -> &'static str {
        match self {
            GeneratorKind::AbsBm => "abs_bm",
            GeneratorKind::Drawdown => "drawdown",
            GeneratorKind::Reset => "reset",
            GeneratorKind::Injection => "injection",
            GeneratorKind::SigmaG => "sigma_g",
            GeneratorKind::AbsorbedBmMartingale => "absorbed_bm_martingale",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Ok(match id {
            "abs_bm" => GeneratorKind::AbsBm,
            "drawdown" => GeneratorKind::Drawdown,
            "reset" => GeneratorKind::Reset,
            "injection" => GeneratorKind::Injection,
            "sigma_g" => GeneratorKind::SigmaG,
            "absorbed_bm_martingale" => GeneratorKind::AbsorbedBmMartingale,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown generator_id '{other}'"
                )))
            }
        })
    }
}

/// Generator identity plus its parameters. Event times must lie strictly
/// inside `(0, T)`; they are snapped to the nearest grid point and the
/// snapped indices must be strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub generator_id: GeneratorKind,
    #[serde(default)]
    pub reset_times: Vec<f64>,
    #[serde(default)]
    pub injection_times: Vec<f64>,
    #[serde(default)]
    pub injection_sizes: Vec<f64>,
    #[serde(default = "default_start_level")]
    pub start_level: f64,
}

fn default_start_level() -> f64 {
    1.0
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind) -> Self {
        GeneratorSpec {
            generator_id: kind,
            reset_times: Vec::new(),
            injection_times: Vec::new(),
            injection_sizes: Vec::new(),
            start_level: default_start_level(),
        }
    }

    pub fn with_resets(mut self, times: &[f64]) -> Self {
        self.reset_times = times.to_vec();
        self
    }

    pub fn with_injections(mut self, times: &[f64], sizes: &[f64]) -> Self {
        self.injection_times = times.to_vec();
        self.injection_sizes = sizes.to_vec();
        self
    }

    pub fn with_start_level(mut self, level: f64) -> Self {
        self.start_level = level;
        self
    }

    pub fn params_json(&self) -> BTreeMap<String, serde_json::Value> {
        let mut map = BTreeMap::new();
        if !self.reset_times.is_empty() {
            map.insert("reset_times".into(), serde_json::json!(self.reset_times));
        }
        if !self.injection_times.is_empty() {
            map.insert(
                "injection_times".into(),
                serde_json::json!(self.injection_times),
            );
            map.insert(
                "injection_sizes".into(),
                serde_json::json!(self.injection_sizes),
            );
        }
        if self.generator_id == GeneratorKind::AbsorbedBmMartingale {
            map.insert("start_level".into(), serde_json::json!(self.start_level));
        }
        map
    }

    /// Generate one member from an explicit stream key.
    pub fn generate(&self, grid: &Arc<TimeGrid>, stream: StreamKey) -> Result<SigmaDecomposition> {
        match self.generator_id {
            GeneratorKind::AbsBm => Ok(gen_abs_bm(grid, stream)),
            GeneratorKind::Drawdown => Ok(gen_drawdown(grid, stream)),
            GeneratorKind::Reset => {
                let resets = snap_event_times(grid, &self.reset_times)?;
                Ok(gen_reset(grid, stream, &resets))
            }
            GeneratorKind::Injection => {
                let events = injection_events(grid, &self.injection_times, &self.injection_sizes)?;
                Ok(gen_jump_process(grid, stream, &events))
            }
            GeneratorKind::SigmaG => {
                let events = merged_events(
                    grid,
                    &self.reset_times,
                    &self.injection_times,
                    &self.injection_sizes,
                )?;
                Ok(gen_jump_process(grid, stream, &events))
            }
            GeneratorKind::AbsorbedBmMartingale => {
                gen_absorbed_bm_martingale(grid, stream, self.start_level)
            }
        }
    }
}

/// N independent members plus the metadata needed to rebuild any of them.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub master_seed: u64,
    pub generator_id: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub spec: GeneratorSpec,
    pub members: Vec<SigmaDecomposition>,
}

/// Key for ensemble member `k` under `master_seed`.
pub fn member_key(master_seed: u64, k: usize) -> StreamKey {
    StreamKey::new(master_seed).child(k as u64)
}

pub fn regenerate_member(
    spec: &GeneratorSpec,
    grid: &Arc<TimeGrid>,
    master_seed: u64,
    k: usize,
) -> Result<SigmaDecomposition> {
    spec.generate(grid, member_key(master_seed, k))
}

pub fn build_ensemble(
    spec: &GeneratorSpec,
    grid: &Arc<TimeGrid>,
    master_seed: u64,
    count: usize,
) -> Result<PathEnsemble> {
    // Validate parameters once up front so per-member generation cannot fail.
    spec.generate(grid, member_key(master_seed, 0))?;
    let members: Vec<SigmaDecomposition> = (0..count)
        .into_par_iter()
        .map(|k| {
            spec.generate(grid, member_key(master_seed, k))
                .expect("validated spec")
        })
        .collect();
    Ok(PathEnsemble {
        master_seed,
        generator_id: spec.generator_id.id().to_string(),
        params: spec.params_json(),
        spec: spec.clone(),
        members,
    })
}

/// Map every member of a (virtual) ensemble through `f` in parallel without
/// holding more than the in-flight members in memory. Output order is by
/// member index, so downstream reductions are scheduling-independent.
pub fn map_members<T: Send>(
    spec: &GeneratorSpec,
    grid: &Arc<TimeGrid>,
    master_seed: u64,
    count: usize,
    f: impl Fn(usize, SigmaDecomposition) -> T + Sync,
) -> Result<Vec<T>> {
    spec.generate(grid, member_key(master_seed, 0))?;
    Ok((0..count)
        .into_par_iter()
        .map(|k| {
            let d = spec
                .generate(grid, member_key(master_seed, k))
                .expect("validated spec");
            f(k, d)
        })
        .collect())
}

fn snap_event_times(grid: &Arc<TimeGrid>, times: &[f64]) -> Result<Vec<usize>> {
    let mut idxs = Vec::with_capacity(times.len());
    for &t in times {
        if !t.is_finite() || t <= 0.0 || t >= grid.horizon() {
            return Err(Error::InvalidArgument(format!(
                "event time {t} must lie strictly inside (0, {})",
                grid.horizon()
            )));
        }
        let idx = grid.index_of_time(t)?;
        if idx == 0 {
            return Err(Error::InvalidArgument(format!(
                "event time {t} snaps to the grid origin"
            )));
        }
        idxs.push(idx);
    }
    for w in idxs.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(
                "snapped event times must be strictly increasing".into(),
            ));
        }
    }
    Ok(idxs)
}

#[derive(Debug, Clone, Copy)]
enum JumpEvent {
    /// Predictable drift jump landing the path exactly at zero (charges C).
    Reset,
    /// Predictable jump of the given size off an exact zero (charges V).
    Inject(f64),
}

fn injection_events(
    grid: &Arc<TimeGrid>,
    times: &[f64],
    sizes: &[f64],
) -> Result<Vec<(usize, JumpEvent)>> {
    if times.len() != sizes.len() {
        return Err(Error::InvalidArgument(format!(
            "injection_times ({}) and injection_sizes ({}) differ in length",
            times.len(),
            sizes.len()
        )));
    }
    for &a in sizes {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "injection sizes must be positive, got {a}"
            )));
        }
    }
    let idxs = snap_event_times(grid, times)?;
    Ok(idxs
        .into_iter()
        .zip(sizes.iter())
        .map(|(i, &a)| (i, JumpEvent::Inject(a)))
        .collect())
}

fn merged_events(
    grid: &Arc<TimeGrid>,
    reset_times: &[f64],
    injection_times: &[f64],
    injection_sizes: &[f64],
) -> Result<Vec<(usize, JumpEvent)>> {
    let resets = snap_event_times(grid, reset_times)?;
    let injections = injection_events(grid, injection_times, injection_sizes)?;
    let mut events: Vec<(usize, JumpEvent)> = resets
        .into_iter()
        .map(|i| (i, JumpEvent::Reset))
        .chain(injections)
        .collect();
    events.sort_by_key(|(i, _)| *i);
    for w in events.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidArgument(format!(
                "reset and injection snap to the same grid index {}",
                w[0].0
            )));
        }
    }
    Ok(events)
}

/// `X = |B|` with the Tanaka decomposition: `M = sum sgn(B_{i-1}) dB_i`
/// (with `sgn(0) := +1`), `A = X - M` taken as the residual, `C = A`,
/// `V = 0`. The path is continuous, so left limits equal values.
fn gen_abs_bm(grid: &Arc<TimeGrid>, stream: StreamKey) -> SigmaDecomposition {
    let n = grid.steps();
    let sq = grid.sqrt_dt();
    let mut b = 0.0f64;
    let mut m = 0.0f64;
    let mut xs = vec![0.0; n + 1];
    let mut ms = vec![0.0; n + 1];
    let mut as_ = vec![0.0; n + 1];
    for i in 1..=n {
        let db = sq * stream.normal_at(i as u64);
        let s = sgn_plus(b);
        b += db;
        m += s * db;
        xs[i] = b.abs();
        ms[i] = m;
        as_[i] = xs[i] - m;
    }
    let g = Arc::clone(grid);
    let x = CadlagPath::continuous(g.clone(), xs).unwrap();
    let m = CadlagPath::continuous(g.clone(), ms).unwrap();
    let a = CadlagPath::continuous(g.clone(), as_).unwrap();
    let c = a.clone();
    let v = CadlagPath::zeros(g);
    SigmaDecomposition {
        x,
        m,
        a,
        c,
        v,
        martingale_fixture: false,
    }
}

/// Drawdown `X = S - B` of a Brownian motion below its running maximum `S`:
/// `M = -B`, `A = C = S`, `V = 0`. `A` is non-decreasing exactly and charges
/// only steps on which the maximum increases, where `X` lands exactly at 0.
fn gen_drawdown(grid: &Arc<TimeGrid>, stream: StreamKey) -> SigmaDecomposition {
    let n = grid.steps();
    let sq = grid.sqrt_dt();
    let mut b = 0.0f64;
    let mut smax = 0.0f64;
    let mut xs = vec![0.0; n + 1];
    let mut ms = vec![0.0; n + 1];
    let mut as_ = vec![0.0; n + 1];
    for i in 1..=n {
        b += sq * stream.normal_at(i as u64);
        if b > smax {
            smax = b;
        }
        ms[i] = -b;
        as_[i] = smax;
        xs[i] = smax - b;
    }
    let g = Arc::clone(grid);
    let x = CadlagPath::continuous(g.clone(), xs).unwrap();
    let m = CadlagPath::continuous(g.clone(), ms).unwrap();
    let a = CadlagPath::continuous(g.clone(), as_).unwrap();
    let c = a.clone();
    let v = CadlagPath::zeros(g);
    SigmaDecomposition {
        x,
        m,
        a,
        c,
        v,
        martingale_fixture: false,
    }
}

/// Brownian motion with predictable resets: at each snapped reset index the
/// drift `C` jumps by `-X_-`, landing `X` exactly at 0, after which the
/// Brownian motion keeps running. `V = 0`, so membership is of the
/// `{X = 0}`-carrier type but the charges sit at left limits that are a.s.
/// nonzero.
fn gen_reset(grid: &Arc<TimeGrid>, stream: StreamKey, resets: &[usize]) -> SigmaDecomposition {
    let n = grid.steps();
    let sq = grid.sqrt_dt();
    let mut b = 0.0f64;
    let mut c = 0.0f64;
    let mut x_pre = vec![0.0; n + 1];
    let mut x_post = vec![0.0; n + 1];
    let mut ms = vec![0.0; n + 1];
    let mut c_pre = vec![0.0; n + 1];
    let mut c_post = vec![0.0; n + 1];
    let mut next_reset = 0usize;
    for i in 1..=n {
        b += sq * stream.normal_at(i as u64);
        ms[i] = b;
        c_pre[i] = c;
        x_pre[i] = b + c;
        if next_reset < resets.len() && resets[next_reset] == i {
            next_reset += 1;
            // c := -b makes b + c exactly zero.
            c = -b;
            x_post[i] = 0.0;
        } else {
            x_post[i] = x_pre[i];
        }
        c_post[i] = c;
    }
    let g = Arc::clone(grid);
    let x = CadlagPath::from_parts(g.clone(), x_pre, x_post).unwrap();
    let m = CadlagPath::continuous(g.clone(), ms).unwrap();
    let c = CadlagPath::from_parts(g.clone(), c_pre, c_post).unwrap();
    let a = c.clone();
    let v = CadlagPath::zeros(g);
    SigmaDecomposition {
        x,
        m,
        a,
        c,
        v,
        martingale_fixture: false,
    }
}

/// Shared engine for the injection and mixed-event generators.
///
/// The path starts at 0 and waits there (martingale frozen) until an
/// injection lifts it off zero; it then diffuses until the first grid value
/// <= 0, where it is clamped to exactly 0 and waits again. A reset event
/// while running charges `C` by `-X_-` and lands the path at 0; injections
/// land `V`-charges off an exact zero. Events arriving in the wrong state
/// (injection while running, reset while waiting) are skipped so that every
/// recorded charge sits on its carrier exactly.
fn gen_jump_process(
    grid: &Arc<TimeGrid>,
    stream: StreamKey,
    events: &[(usize, JumpEvent)],
) -> SigmaDecomposition {
    let n = grid.steps();
    let sq = grid.sqrt_dt();
    let mut x = 0.0f64; // exact 0.0 whenever waiting
    let mut m = 0.0f64;
    let mut c = 0.0f64;
    let mut v = 0.0f64;
    let mut a = 0.0f64;
    let mut running = false;

    let mut x_pre = vec![0.0; n + 1];
    let mut x_post = vec![0.0; n + 1];
    let mut ms = vec![0.0; n + 1];
    let mut c_pre = vec![0.0; n + 1];
    let mut c_post = vec![0.0; n + 1];
    let mut v_pre = vec![0.0; n + 1];
    let mut v_post = vec![0.0; n + 1];
    let mut a_pre = vec![0.0; n + 1];
    let mut a_post = vec![0.0; n + 1];

    let mut next_event = 0usize;
    for i in 1..=n {
        let db = sq * stream.normal_at(i as u64);
        // Continuous phase of the step.
        if running {
            let cand = x + db;
            if cand <= 0.0 {
                // Absorbed inside the interval: the stopped martingale gave
                // back exactly x, and the left limit at t_i is already 0.
                m -= x;
                x = 0.0;
                running = false;
            } else {
                x = cand;
                m += db;
            }
        }
        x_pre[i] = x;
        c_pre[i] = c;
        v_pre[i] = v;
        a_pre[i] = a;
        // Jump phase.
        if next_event < events.len() && events[next_event].0 == i {
            let (_, ev) = events[next_event];
            next_event += 1;
            match ev {
                JumpEvent::Reset => {
                    if running {
                        let j = -x; // lands exactly at zero
                        c += j;
                        a += j;
                        x = 0.0;
                        running = false;
                    }
                }
                JumpEvent::Inject(size) => {
                    if !running {
                        v += size;
                        a += size;
                        x = size; // x was exactly 0.0, so X_post = size exactly
                        running = true;
                    }
                }
            }
        }
        x_post[i] = x;
        ms[i] = m;
        c_post[i] = c;
        v_post[i] = v;
        a_post[i] = a;
    }

    let g = Arc::clone(grid);
    let x = CadlagPath::from_parts(g.clone(), x_pre, x_post).unwrap();
    let m = CadlagPath::continuous(g.clone(), ms).unwrap();
    let c = CadlagPath::from_parts(g.clone(), c_pre, c_post).unwrap();
    let v = CadlagPath::from_parts(g.clone(), v_pre, v_post).unwrap();
    let a = if events.iter().all(|(_, e)| matches!(e, JumpEvent::Inject(_))) {
        // Pure injection process: A coincides with V bit-for-bit.
        v.clone()
    } else {
        CadlagPath::from_parts(g, a_pre, a_post).unwrap()
    };
    SigmaDecomposition {
        x,
        m,
        a,
        c,
        v,
        martingale_fixture: false,
    }
}

/// Nonnegative martingale fixture: Brownian motion started at `start_level`,
/// absorbed at its first grid value <= 0 (clamped to exactly 0 and frozen).
/// Stored as `X = M` with `A = C = V = 0`; `M_0 != 0`, so the bundle is
/// flagged as a martingale fixture rather than a class member.
fn gen_absorbed_bm_martingale(
    grid: &Arc<TimeGrid>,
    stream: StreamKey,
    start_level: f64,
) -> Result<SigmaDecomposition> {
    if !start_level.is_finite() || start_level <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "start_level must be positive, got {start_level}"
        )));
    }
    let n = grid.steps();
    let sq = grid.sqrt_dt();
    let mut m = start_level;
    let mut absorbed = false;
    let mut post = vec![0.0; n + 1];
    post[0] = start_level;
    for (step, slot) in post.iter_mut().enumerate().skip(1) {
        let db = sq * stream.normal_at(step as u64);
        if !absorbed {
            let cand = m + db;
            if cand <= 0.0 {
                absorbed = true;
                m = 0.0;
            } else {
                m = cand;
            }
        }
        *slot = m;
    }
    let g = Arc::clone(grid);
    let x = CadlagPath::continuous(g.clone(), post).unwrap();
    let m = x.clone();
    Ok(SigmaDecomposition {
        x,
        m,
        a: CadlagPath::zeros(g.clone()),
        c: CadlagPath::zeros(g.clone()),
        v: CadlagPath::zeros(g),
        martingale_fixture: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean_var, normal_cdf};

    fn grid(horizon: f64, steps: usize) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::new(horizon, steps).unwrap())
    }

    fn key(seed: u64, k: usize) -> StreamKey {
        member_key(seed, k)
    }

    #[test]
    fn abs_bm_initial_conditions_and_positivity() {
        let g = grid(1.0, 500);
        let d = GeneratorSpec::new(GeneratorKind::AbsBm)
            .generate(&g, key(1, 0))
            .unwrap();
        assert_eq!(d.x.post()[0], 0.0);
        assert_eq!(d.m.post()[0], 0.0);
        assert!(d.x.post().iter().all(|&x| x >= 0.0));
        d.check_invariants().unwrap();
        // A is the residual by construction, non-decreasing up to rounding.
        for i in 0..=500 {
            assert_eq!(d.a.post()[i], d.x.post()[i] - d.m.post()[i]);
        }
        for i in 1..=500 {
            assert!(d.a.step(i) >= -1e-12, "A decreased at {i}: {}", d.a.step(i));
        }
    }

    #[test]
    fn abs_bm_local_time_mean_matches_folded_normal_oracle() {
        // E A_1 = E|B_1| = sqrt(2/pi); the grid endpoint is exactly N(0,1).
        let g = grid(1.0, 1000);
        let n = 2000;
        let spec = GeneratorSpec::new(GeneratorKind::AbsBm);
        let finals: Vec<f64> = map_members(&spec, &g, 11, n, |_, d| {
            let last = d.a.post()[1000];
            assert!((d.a.total_variation() - last).abs() < 1e-10 * (1.0 + last));
            last
        })
        .unwrap();
        let (mean, var) = mean_var(&finals);
        let target = (2.0 / std::f64::consts::PI).sqrt();
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - target).abs() <= 3.0 * se,
            "mean {mean} vs {target} (se {se})"
        );
    }

    #[test]
    fn drawdown_nondecreasing_drift_and_zero_landing() {
        let g = grid(1.0, 2000);
        let d = GeneratorSpec::new(GeneratorKind::Drawdown)
            .generate(&g, key(5, 3))
            .unwrap();
        assert_eq!(d.x.post()[0], 0.0);
        assert!(d.a.is_nondecreasing());
        d.check_invariants().unwrap();
        // Wherever the max increases, X lands exactly at zero.
        for i in 1..=2000 {
            if d.a.post()[i] > d.a.post()[i - 1] {
                assert_eq!(d.x.post()[i], 0.0);
            }
        }
    }

    #[test]
    fn reset_lands_exactly_at_zero_with_predictable_jumps() {
        let g = grid(1.0, 1000);
        let spec = GeneratorSpec::new(GeneratorKind::Reset).with_resets(&[0.3, 0.7]);
        let d = spec.generate(&g, key(9, 2)).unwrap();
        d.check_invariants().unwrap();
        for &i in &[300usize, 700] {
            assert_eq!(d.x.post()[i], 0.0);
            assert_ne!(d.x.pre()[i], 0.0);
            let jump = d.c.post()[i] - d.c.pre()[i];
            let regen = -d.x.pre()[i];
            assert!((jump - regen).abs() <= 1e-12 * (1.0 + regen.abs()));
        }
    }

    #[test]
    fn reset_with_no_events_is_pure_brownian_motion() {
        let g = grid(1.0, 200);
        let d = GeneratorSpec::new(GeneratorKind::Reset)
            .generate(&g, key(2, 0))
            .unwrap();
        assert_eq!(d.a.total_variation(), 0.0);
        for i in 0..=200 {
            assert_eq!(d.x.post()[i], d.m.post()[i]);
        }
    }

    #[test]
    fn injection_charges_off_exact_zero() {
        let g = grid(1.0, 1000);
        let spec =
            GeneratorSpec::new(GeneratorKind::Injection).with_injections(&[0.2, 0.6], &[1.0, 1.0]);
        let d = spec.generate(&g, key(7, 1)).unwrap();
        d.check_invariants().unwrap();
        // First injection always fires from the initial waiting state.
        assert_eq!(d.x.pre()[200], 0.0);
        assert_eq!(d.x.post()[200], 1.0);
        assert!(d.x.post().iter().all(|&x| x >= 0.0));
        assert!(d.x.pre().iter().all(|&x| x >= 0.0));
        // A and V are the same path object.
        assert_eq!(d.a, d.v);
        assert_eq!(d.c.total_variation(), 0.0);
    }

    #[test]
    fn injection_wrong_state_is_skipped() {
        // Second injection so close that absorption is unlikely: most paths
        // skip it and V has a single charge.
        let g = grid(1.0, 1000);
        let spec = GeneratorSpec::new(GeneratorKind::Injection)
            .with_injections(&[0.2, 0.201], &[5.0, 5.0]);
        let d = spec.generate(&g, key(3, 0)).unwrap();
        let n_charges = (1..=1000)
            .filter(|&i| d.v.post()[i] != d.v.pre()[i])
            .count();
        assert_eq!(n_charges, 1);
        d.check_invariants().unwrap();
    }

    #[test]
    fn sigma_g_places_charges_on_mixed_carriers() {
        let g = grid(1.0, 1000);
        let spec = GeneratorSpec::new(GeneratorKind::SigmaG)
            .with_resets(&[0.3, 0.7])
            .with_injections(&[0.2, 0.6], &[1.0, 1.0]);
        let d = spec.generate(&g, key(21, 4)).unwrap();
        d.check_invariants().unwrap();
        for i in 1..=1000 {
            let cj = d.c.post()[i] - d.c.pre()[i];
            let vj = d.v.post()[i] - d.v.pre()[i];
            if cj != 0.0 {
                assert_eq!(d.x.post()[i], 0.0, "C charge off the zero set at {i}");
            }
            if vj != 0.0 {
                assert_eq!(d.x.pre()[i], 0.0, "V charge off the left-zero set at {i}");
            }
        }
        assert!(d.x.post().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn sigma_g_empty_events_reduces_to_brownian_motion() {
        let g = grid(1.0, 100);
        let d = GeneratorSpec::new(GeneratorKind::SigmaG)
            .generate(&g, key(2, 0))
            .unwrap();
        // With no events the path never leaves the waiting state.
        assert!(d.x.post().iter().all(|&x| x == 0.0));
        assert_eq!(d.a.total_variation(), 0.0);
    }

    #[test]
    fn absorbed_bm_clamps_exactly_and_respects_reflection_oracle() {
        let g = grid(25.0, 25_000);
        let spec = GeneratorSpec::new(GeneratorKind::AbsorbedBmMartingale).with_start_level(1.0);
        let n = 10_000;
        let absorbed: Vec<f64> = map_members(&spec, &g, 33, n, |_, d| {
            assert_eq!(d.m.post()[0], 1.0);
            assert!(d.m.post().iter().all(|&x| x >= 0.0));
            if d.m.post()[25_000] == 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let (p_hat, var) = mean_var(&absorbed);
        let se = (var / n as f64).sqrt();
        let p_true = 2.0 * normal_cdf(-1.0 / 5.0);
        assert!(
            (p_hat - p_true).abs() <= 3.0 * se + 0.004,
            "absorption prob {p_hat} vs oracle {p_true} (se {se})"
        );
    }

    #[test]
    fn absorbed_bm_rejects_nonpositive_start() {
        let g = grid(1.0, 10);
        let spec = GeneratorSpec::new(GeneratorKind::AbsorbedBmMartingale).with_start_level(0.0);
        assert!(spec.generate(&g, key(1, 0)).is_err());
    }

    #[test]
    fn event_time_validation() {
        let g = grid(1.0, 1000);
        for bad in [&[0.0][..], &[1.0], &[-0.1], &[1.3]] {
            let spec = GeneratorSpec::new(GeneratorKind::Reset).with_resets(bad);
            assert!(spec.generate(&g, key(0, 0)).is_err());
        }
        // Colliding snapped times.
        let spec = GeneratorSpec::new(GeneratorKind::Reset).with_resets(&[0.5, 0.5001]);
        assert!(spec.generate(&g, key(0, 0)).is_err());
        // Mismatched injection arrays.
        let spec = GeneratorSpec::new(GeneratorKind::Injection).with_injections(&[0.5], &[]);
        assert!(spec.generate(&g, key(0, 0)).is_err());
        // Nonpositive sizes.
        let spec = GeneratorSpec::new(GeneratorKind::Injection).with_injections(&[0.5], &[0.0]);
        assert!(spec.generate(&g, key(0, 0)).is_err());
        // Overlapping reset/injection for the mixed generator.
        let spec = GeneratorSpec::new(GeneratorKind::SigmaG)
            .with_resets(&[0.5])
            .with_injections(&[0.5], &[1.0]);
        assert!(spec.generate(&g, key(0, 0)).is_err());
    }

    #[test]
    fn every_generator_satisfies_the_bundle_invariants() {
        let g = grid(1.0, 600);
        let specs = [
            GeneratorSpec::new(GeneratorKind::AbsBm),
            GeneratorSpec::new(GeneratorKind::Drawdown),
            GeneratorSpec::new(GeneratorKind::Reset).with_resets(&[0.3, 0.7]),
            GeneratorSpec::new(GeneratorKind::Injection).with_injections(&[0.2, 0.6], &[1.0, 1.0]),
            GeneratorSpec::new(GeneratorKind::SigmaG)
                .with_resets(&[0.3, 0.7])
                .with_injections(&[0.2, 0.6], &[1.0, 1.0]),
            GeneratorSpec::new(GeneratorKind::AbsorbedBmMartingale).with_start_level(1.0),
        ];
        for spec in &specs {
            map_members(spec, &g, 77, 30, |k, d| {
                d.check_invariants()
                    .unwrap_or_else(|e| panic!("{:?} member {k}: {e}", spec.generator_id));
            })
            .unwrap();
        }
    }

    #[test]
    fn members_regenerate_bit_exactly() {
        let g = grid(1.0, 400);
        let spec = GeneratorSpec::new(GeneratorKind::SigmaG)
            .with_resets(&[0.3, 0.7])
            .with_injections(&[0.2, 0.6], &[1.0, 1.0]);
        let ens = build_ensemble(&spec, &g, 99, 16).unwrap();
        for k in [0usize, 7, 15] {
            let re = regenerate_member(&spec, &g, 99, k).unwrap();
            assert_eq!(ens.members[k], re);
        }
    }
}
