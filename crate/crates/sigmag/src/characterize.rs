//! Characterization-martingale functionals and ensemble martingale tests.
//!
//! Each class has a functional of the decomposition that is a local
//! martingale exactly when the drift sits on the matching carrier:
//!
//! * continuous drift: `F(A) - F'(A) X`,
//! * `{X = 0}` carrier: jump terms weighted by the post value `X_s`,
//! * `{X_- = 0}` carrier: jump terms weighted by the left limit `X_{s-}`,
//! * mixed carrier: `C`-jumps weighted by `X_s`, `V`-jumps by `X_{s-}`,
//!
//! all evaluated at the continuous part of the drift. Feeding a process to
//! the wrong functional leaves a predictable bias in the increments, which
//! the z-test picks up with power growing like sqrt(paths).

use crate::path::{CadlagPath, SigmaDecomposition};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionId {
    Poly1,
    Poly2,
    Poly3,
    Exp,
}

impl TestFunctionId {
    pub fn id(&self) -> &'static str {
        match self {
            TestFunctionId::Poly1 => "poly1",
            TestFunctionId::Poly2 => "poly2",
            TestFunctionId::Poly3 => "poly3",
            TestFunctionId::Exp => "exp",
        }
    }

    pub fn from_id(s: &str) -> Result<Self> {
        Ok(match s {
            "poly1" => TestFunctionId::Poly1,
            "poly2" => TestFunctionId::Poly2,
            "poly3" => TestFunctionId::Poly3,
            "exp" => TestFunctionId::Exp,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown test function '{other}'"
                )))
            }
        })
    }
}

/// A C^2 test function with exact first and second derivatives.
#[derive(Debug, Clone, Copy)]
pub struct TestFunction {
    pub id: TestFunctionId,
}

impl TestFunction {
    pub fn new(id: TestFunctionId) -> Self {
        TestFunction { id }
    }

    pub fn f(&self, x: f64) -> f64 {
        match self.id {
            TestFunctionId::Poly1 => x,
            TestFunctionId::Poly2 => x * x,
            TestFunctionId::Poly3 => x * x * x,
            TestFunctionId::Exp => x.exp(),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self.id {
            TestFunctionId::Poly1 => 1.0,
            TestFunctionId::Poly2 => 2.0 * x,
            TestFunctionId::Poly3 => 3.0 * x * x,
            TestFunctionId::Exp => x.exp(),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self.id {
            TestFunctionId::Poly1 => 0.0,
            TestFunctionId::Poly2 => 2.0,
            TestFunctionId::Poly3 => 6.0 * x,
            TestFunctionId::Exp => x.exp(),
        }
    }
}

/// Shared evaluator:
/// `F(W^c) - F'(W^c) X + sum [F'(W^c) - F''(W^c) X_post] dC_jumps +
/// sum [F'(W^c) - F''(W^c) X_pre] dV_jumps`, with `W = C + V` and `W^c`
/// obtained by removing the recorded jumps (never by thresholding).
fn functional_core(
    x: &CadlagPath,
    c: &CadlagPath,
    v: &CadlagPath,
    tf: TestFunction,
) -> CadlagPath {
    let n = x.len();
    let mut pre = vec![0.0; n];
    let mut post = vec![0.0; n];
    let mut s = 0.0f64; // cumulative jump terms
    let mut wc = c.post()[0] + v.post()[0]; // continuous part of W = C + V
    pre[0] = tf.f(wc) - tf.d1(wc) * x.post()[0];
    post[0] = pre[0];
    for i in 1..n {
        let jc = c.jump(i);
        let jv = v.jump(i);
        // W^c accumulates only the continuous increments of W; for
        // pure-jump drifts each increment subtracts identical floats and
        // W^c stays at exactly zero.
        wc += (c.pre()[i] + v.pre()[i]) - (c.post()[i - 1] + v.post()[i - 1]);
        pre[i] = tf.f(wc) - tf.d1(wc) * x.pre()[i] + s;
        if jc != 0.0 {
            s += (tf.d1(wc) - tf.d2(wc) * x.post()[i]) * jc;
        }
        if jv != 0.0 {
            s += (tf.d1(wc) - tf.d2(wc) * x.pre()[i]) * jv;
        }
        post[i] = tf.f(wc) - tf.d1(wc) * x.post()[i] + s;
    }
    CadlagPath::from_parts(Arc::clone(x.grid()), pre, post).unwrap()
}

/// Continuous-drift functional `F(A) - F'(A) X`. Errors when the drift has
/// jumps beyond 1e-12 (wrong regime).
pub fn functional_sigma_nik(d: &SigmaDecomposition, tf: TestFunction) -> Result<CadlagPath> {
    let n = d.x.len();
    for i in 1..n {
        if d.a.jump(i).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "drift jumps at index {i} (size {}); the continuous-drift functional does not apply",
                d.a.jump(i)
            )));
        }
    }
    let mut pre = vec![0.0; n];
    let mut post = vec![0.0; n];
    for i in 0..n {
        pre[i] = tf.f(d.a.pre()[i]) - tf.d1(d.a.pre()[i]) * d.x.pre()[i];
        post[i] = tf.f(d.a.post()[i]) - tf.d1(d.a.post()[i]) * d.x.post()[i];
    }
    Ok(CadlagPath::from_parts(Arc::clone(d.grid()), pre, post).unwrap())
}

/// `{X = 0}`-carrier functional: all drift jumps weighted by the post value.
pub fn functional_sigma(d: &SigmaDecomposition, tf: TestFunction) -> CadlagPath {
    let zeros = CadlagPath::zeros(Arc::clone(d.grid()));
    functional_core(&d.x, &d.a, &zeros, tf)
}

/// `{X_- = 0}`-carrier functional: all drift jumps weighted by the left limit.
pub fn functional_sigma_r(d: &SigmaDecomposition, tf: TestFunction) -> CadlagPath {
    let zeros = CadlagPath::zeros(Arc::clone(d.grid()));
    functional_core(&d.x, &zeros, &d.a, tf)
}

/// Mixed-carrier functional using the stored `C`/`V` split.
pub fn functional_sigma_g(d: &SigmaDecomposition, tf: TestFunction) -> CadlagPath {
    functional_core(&d.x, &d.c, &d.v, tf)
}

/// Configuration of the ensemble martingale z-test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleTestConfig {
    /// Checkpoint times; increments are tested over every ordered pair.
    pub checkpoints: Vec<f64>,
    pub z_threshold: f64,
}

impl MartingaleTestConfig {
    /// Quartile checkpoints and the default threshold of 4, sized for the
    /// two dozen simultaneous comparisons of the default table.
    pub fn default_for(horizon: f64) -> Self {
        MartingaleTestConfig {
            checkpoints: vec![horizon / 4.0, horizon / 2.0, 3.0 * horizon / 4.0, horizon],
            z_threshold: 4.0,
        }
    }
}

pub const TEST_STATISTIC_IDS: [&str; 4] = ["one", "x", "x_squared", "above_median"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZRow {
    pub s: f64,
    pub t: f64,
    pub h: String,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleTestReport {
    pub checkpoints: Vec<f64>,
    pub n_paths: usize,
    pub z_threshold: f64,
    pub rows: Vec<ZRow>,
    pub max_abs_z: f64,
    pub pass: bool,
}

impl MartingaleTestReport {
    /// JSON value with non-finite z sentinels clamped to +/-1e308 so the
    /// report stays valid JSON.
    pub fn json_value(&self) -> serde_json::Value {
        let clamp = |z: f64| {
            if z.is_finite() {
                z
            } else {
                1e308_f64.copysign(z)
            }
        };
        serde_json::json!({
            "checkpoints": self.checkpoints,
            "n_paths": self.n_paths,
            "z_threshold": self.z_threshold,
            "table": self.rows.iter().map(|r| serde_json::json!({
                "s": r.s, "t": r.t, "h": r.h, "z": clamp(r.z),
            })).collect::<Vec<_>>(),
            "max_abs_z": clamp(self.max_abs_z),
            "pass": self.pass,
        })
    }
}

/// z-test on per-member functional values sampled at the checkpoints.
///
/// `functional_samples[k][j]` is the functional of member `k` at checkpoint
/// `j`; `base_samples[k][j]` the underlying `X` there (used by the test
/// statistics `h`). For each pair `s < t` and each `h`, the statistic is
/// `mean[(N_t - N_s) h_s] / (stdev / sqrt(n))`. Zero variance with nonzero
/// mean yields an infinite-z sentinel (an automatic fail).
pub fn martingale_test_from_samples(
    functional_samples: &[Vec<f64>],
    base_samples: &[Vec<f64>],
    cfg: &MartingaleTestConfig,
) -> Result<MartingaleTestReport> {
    let n_paths = functional_samples.len();
    if n_paths < 100 {
        return Err(Error::InvalidArgument(format!(
            "martingale test needs at least 100 paths, got {n_paths}"
        )));
    }
    if base_samples.len() != n_paths {
        return Err(Error::InvalidArgument(
            "functional and base ensembles differ in size".into(),
        ));
    }
    let n_cp = cfg.checkpoints.len();
    if n_cp < 2 {
        return Err(Error::InvalidArgument(
            "need at least two checkpoints".into(),
        ));
    }
    // Ensemble medians of X at each checkpoint, for the indicator statistic.
    let mut medians = vec![0.0; n_cp];
    let mut buf = vec![0.0; n_paths];
    for j in 0..n_cp {
        for (k, row) in base_samples.iter().enumerate() {
            buf[k] = row[j];
        }
        buf.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians[j] = buf[n_paths / 2];
    }

    let mut rows = Vec::new();
    let mut max_abs_z = 0.0f64;
    for si in 0..n_cp {
        for ti in (si + 1)..n_cp {
            for h_id in TEST_STATISTIC_IDS {
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for k in 0..n_paths {
                    let incr = functional_samples[k][ti] - functional_samples[k][si];
                    let xs = base_samples[k][si];
                    let h = match h_id {
                        "one" => 1.0,
                        "x" => xs,
                        "x_squared" => xs * xs,
                        "above_median" => {
                            if xs > medians[si] {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        _ => unreachable!(),
                    };
                    let u = incr * h;
                    sum += u;
                    sumsq += u * u;
                }
                let nf = n_paths as f64;
                let mean = sum / nf;
                let var = ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0);
                let z = if var == 0.0 {
                    if mean == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY.copysign(mean)
                    }
                } else {
                    mean / (var.sqrt() / nf.sqrt())
                };
                max_abs_z = max_abs_z.max(z.abs());
                rows.push(ZRow {
                    s: cfg.checkpoints[si],
                    t: cfg.checkpoints[ti],
                    h: h_id.to_string(),
                    z,
                });
            }
        }
    }
    Ok(MartingaleTestReport {
        checkpoints: cfg.checkpoints.clone(),
        n_paths,
        z_threshold: cfg.z_threshold,
        rows,
        max_abs_z,
        pass: max_abs_z <= cfg.z_threshold,
    })
}

/// Convenience wrapper taking whole paths.
pub fn martingale_test(
    functionals: &[CadlagPath],
    bases: &[CadlagPath],
    cfg: &MartingaleTestConfig,
) -> Result<MartingaleTestReport> {
    if functionals.is_empty() {
        return Err(Error::InvalidArgument("empty ensemble".into()));
    }
    let grid = functionals[0].grid();
    let idxs: Vec<usize> = cfg
        .checkpoints
        .iter()
        .map(|&t| grid.index_of_time(t))
        .collect::<Result<_>>()?;
    let take = |p: &CadlagPath| idxs.iter().map(|&i| p.post()[i]).collect::<Vec<f64>>();
    let n_samples: Vec<Vec<f64>> = functionals.iter().map(&take).collect();
    let x_samples: Vec<Vec<f64>> = bases.iter().map(&take).collect();
    martingale_test_from_samples(&n_samples, &x_samples, cfg)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignTestRow {
    pub s: f64,
    pub t: f64,
    pub mean_increment: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignTestReport {
    pub checkpoints: Vec<f64>,
    pub n_paths: usize,
    pub rows: Vec<SignTestRow>,
    pub pass: bool,
}

/// One-sided submartingale test: mean increments of the sampled paths must
/// not fall below `-3 stderr` over any checkpoint pair.
pub fn submartingale_sign_test(
    samples: &[Vec<f64>],
    checkpoints: &[f64],
) -> Result<SignTestReport> {
    let n_paths = samples.len();
    if n_paths < 100 {
        return Err(Error::InvalidArgument(format!(
            "sign test needs at least 100 paths, got {n_paths}"
        )));
    }
    let n_cp = checkpoints.len();
    let mut rows = Vec::new();
    let mut pass = true;
    for si in 0..n_cp {
        for ti in (si + 1)..n_cp {
            let incrs: Vec<f64> = samples.iter().map(|row| row[ti] - row[si]).collect();
            let (mean, var) = crate::stats::mean_var(&incrs);
            let stderr = (var / n_paths as f64).sqrt();
            if mean < -3.0 * stderr {
                pass = false;
            }
            rows.push(SignTestRow {
                s: checkpoints[si],
                t: checkpoints[ti],
                mean_increment: mean,
                stderr,
            });
        }
    }
    Ok(SignTestReport {
        checkpoints: checkpoints.to_vec(),
        n_paths,
        rows,
        pass,
    })
}
