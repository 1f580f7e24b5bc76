//! Path transformations: drift splitting, balayage, Tanaka positive and
//! negative parts, products, multiplicative decomposition, drift-function
//! scaling, and local-time estimation.
//!
//! All transforms use predictable evaluation: the continuous increment into
//! `t_i` is weighted by information at `t_{i-1}` (the previous post value),
//! the jump at `t_i` by the left limit at `t_i`.

use crate::generators::sgn_plus;
use crate::path::{integrate_weighted, CadlagPath, SigmaDecomposition};
use crate::{Error, Result};
use std::sync::Arc;

/// Indicator arrays for the random sets `{X = 0}`, `{X_- = 0}` and their
/// union, at a given tolerance (`tol = 0` gives exact-zero semantics).
#[derive(Debug, Clone)]
pub struct ZeroSetIndicators {
    pub at_zero: Vec<bool>,
    pub left_zero: Vec<bool>,
    pub either_zero: Vec<bool>,
    pub tol: f64,
}

pub fn zero_set(d: &SigmaDecomposition, tol: f64) -> Result<ZeroSetIndicators> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be non-negative, got {tol}"
        )));
    }
    let at_zero: Vec<bool> = d.x.post().iter().map(|&x| x.abs() <= tol).collect();
    let left_zero: Vec<bool> = d.x.pre().iter().map(|&x| x.abs() <= tol).collect();
    let either_zero = at_zero
        .iter()
        .zip(&left_zero)
        .map(|(&a, &l)| a || l)
        .collect();
    Ok(ZeroSetIndicators {
        at_zero,
        left_zero,
        either_zero,
        tol,
    })
}

/// Result of splitting a drift by its carrier: `C` collects charges at
/// `{X = 0}`, `V` charges at `{X != 0 = X_-}`, and `residual` whatever sits
/// on neither carrier (identically zero on inputs with exact-zero charges).
#[derive(Debug, Clone)]
pub struct DriftSplit {
    pub c: CadlagPath,
    pub v: CadlagPath,
    pub residual: CadlagPath,
}

/// Split the total drift `A` of `d` by the exact zero pattern of `X`.
/// Every increment (continuous part and jump of each step) is assigned in
/// full to exactly one of the three outputs, so
/// `C + V + residual = A` increment-by-increment.
pub fn drift_split(d: &SigmaDecomposition) -> DriftSplit {
    let n = d.x.len();
    let g = d.grid();
    let mut c_pre = vec![0.0; n];
    let mut c_post = vec![0.0; n];
    let mut v_pre = vec![0.0; n];
    let mut v_post = vec![0.0; n];
    let mut r_pre = vec![0.0; n];
    let mut r_post = vec![0.0; n];
    let mut c_acc = 0.0f64;
    let mut v_acc = 0.0f64;
    let mut r_acc = 0.0f64;
    fn assign(at0: bool, left0: bool, amount: f64, c: &mut f64, v: &mut f64, r: &mut f64) {
        if at0 {
            *c += amount;
        } else if left0 {
            *v += amount;
        } else {
            *r += amount;
        }
    }
    for i in 1..n {
        let at0 = d.x.post()[i] == 0.0;
        let left0 = d.x.pre()[i] == 0.0;
        // Continuous charge of the step, then the jump, bucketed by the same
        // indicator pattern at t_i.
        assign(at0, left0, d.a.cont(i), &mut c_acc, &mut v_acc, &mut r_acc);
        c_pre[i] = c_acc;
        v_pre[i] = v_acc;
        r_pre[i] = r_acc;
        assign(at0, left0, d.a.jump(i), &mut c_acc, &mut v_acc, &mut r_acc);
        c_post[i] = c_acc;
        v_post[i] = v_acc;
        r_post[i] = r_acc;
    }
    DriftSplit {
        c: CadlagPath::from_parts(Arc::clone(g), c_pre, c_post).unwrap(),
        v: CadlagPath::from_parts(Arc::clone(g), v_pre, v_post).unwrap(),
        residual: CadlagPath::from_parts(Arc::clone(g), r_pre, r_post).unwrap(),
    }
}

/// Balayage transform: freeze a weight at the last zero of `X` and carry the
/// whole decomposition along.
///
/// `weights[i]` is the weight value at grid index `i` (a functional of the
/// path history up to `i`). With `gamma[i]` the last index `j <= i` at which
/// `X` sits exactly at zero (0 if none), the output is
/// `Y_post[i] = weights[gamma[i]] * X_post[i]`, and each component increment
/// into `t_i` is weighted by the frozen `weights[gamma[i-1]]`, which makes
/// the decomposition telescope exactly onto `Y`.
pub fn balayage(d: &SigmaDecomposition, weights: &[f64]) -> Result<SigmaDecomposition> {
    let n = d.x.len();
    if weights.len() != n {
        return Err(Error::InvalidArgument(format!(
            "weight array length {} does not match grid ({n} points)",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidArgument(
            "balayage weights must be finite".into(),
        ));
    }
    let mut last = 0usize;
    let gamma: Vec<usize> = d
        .x
        .post()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x == 0.0 {
                last = i;
            }
            last
        })
        .collect();
    let g = d.grid();
    let mut y_pre = vec![0.0; n];
    let mut y_post = vec![0.0; n];
    y_pre[0] = weights[0] * d.x.post()[0];
    y_post[0] = y_pre[0];
    for i in 1..n {
        y_pre[i] = weights[gamma[i - 1]] * d.x.pre()[i];
        y_post[i] = weights[gamma[i]] * d.x.post()[i];
    }
    let frozen = |p: &CadlagPath, start: f64| {
        integrate_weighted(
            p,
            start,
            |i| weights[gamma[i - 1]],
            |i| weights[gamma[i - 1]],
        )
    };
    let m = frozen(&d.m, weights[0] * d.m.post()[0]);
    let c = frozen(&d.c, weights[0] * d.c.post()[0]);
    let v = frozen(&d.v, weights[0] * d.v.post()[0]);
    let a = frozen(&d.a, weights[0] * d.a.post()[0]);
    Ok(SigmaDecomposition {
        x: CadlagPath::from_parts(Arc::clone(g), y_pre, y_post).unwrap(),
        m,
        a,
        c,
        v,
        martingale_fixture: d.martingale_fixture,
    })
}

/// Tanaka decomposition of the positive and negative parts.
#[derive(Debug, Clone)]
pub struct TanakaSplit {
    pub plus: SigmaDecomposition,
    pub minus: SigmaDecomposition,
}

/// Split `X` into `X^+` and `X^-`, each with a full decomposition.
///
/// For the positive part: the martingale collects `1_{X_- > 0} dM`; the
/// upward jump sum `sum 1_{X_- <= 0} X^+` charges `{X^+_- = 0}` and goes to
/// `V`; the downward jump sum `sum 1_{X_- > 0} X^-` charges `{X^+ = 0}` and
/// goes to `C` together with `1_{X_- > 0} dC` and the local-time residual.
/// The residual is computed by subtraction, step by step, so the output
/// decomposition adds up to `X^+` by construction; the negative part is the
/// positive part of the negated input.
pub fn tanaka_split(d: &SigmaDecomposition) -> TanakaSplit {
    TanakaSplit {
        plus: positive_part(d),
        minus: positive_part(&d.neg()),
    }
}

fn positive_part(d: &SigmaDecomposition) -> SigmaDecomposition {
    let n = d.x.len();
    let g = d.grid();
    let plus_x = d.x.pos_part();

    let mut m_pre = vec![0.0; n];
    let mut m_post = vec![0.0; n];
    let mut v_pre = vec![0.0; n];
    let mut v_post = vec![0.0; n];
    let mut c_pre = vec![0.0; n];
    let mut c_post = vec![0.0; n];
    // X_0^+ itself seeds the drift at index 0 (zero for class members).
    c_pre[0] = plus_x.post()[0];
    c_post[0] = c_pre[0];

    for i in 1..n {
        let w_cont = if d.x.post()[i - 1] > 0.0 { 1.0 } else { 0.0 };
        let w_jump = if d.x.pre()[i] > 0.0 { 1.0 } else { 0.0 };

        let m_cont = w_cont * d.m.cont(i);
        let m_jump = w_jump * d.m.jump(i);
        let c_exp_cont = w_cont * d.c.cont(i);
        let c_exp_jump = w_jump * d.c.jump(i);
        // Jump sums: both vanish identically except at genuine zero-crossing
        // jumps, because 1_{x<=0} x^+ = 0 and 1_{x>0} x^- = 0 pointwise.
        let y_term = if d.x.pre()[i] <= 0.0 {
            d.x.post()[i].max(0.0)
        } else {
            0.0
        };
        let z_term = if d.x.pre()[i] > 0.0 {
            (-d.x.post()[i]).max(0.0)
        } else {
            0.0
        };

        // Residuals absorb what the explicit terms miss (the discrete local
        // time accrues in the continuous residual).
        let r_cont = (plus_x.pre()[i] - plus_x.post()[i - 1]) - m_cont - c_exp_cont;
        let r_jump = (plus_x.post()[i] - plus_x.pre()[i]) - m_jump - c_exp_jump - y_term - z_term;

        m_pre[i] = m_post[i - 1] + m_cont;
        m_post[i] = m_pre[i] + m_jump;
        v_pre[i] = v_post[i - 1];
        v_post[i] = v_pre[i] + y_term;
        c_pre[i] = c_post[i - 1] + c_exp_cont + r_cont;
        c_post[i] = c_pre[i] + c_exp_jump + z_term + r_jump;
    }

    let m = CadlagPath::from_parts(Arc::clone(g), m_pre, m_post).unwrap();
    let c = CadlagPath::from_parts(Arc::clone(g), c_pre, c_post).unwrap();
    let v = CadlagPath::from_parts(Arc::clone(g), v_pre, v_post).unwrap();
    let a = c.add(&v).unwrap();
    SigmaDecomposition {
        x: plus_x,
        m,
        a,
        c,
        v,
        martingale_fixture: d.martingale_fixture,
    }
}

/// Product of two decompositions with vanishing cross covariation.
#[derive(Debug, Clone)]
pub struct ProductResult {
    pub decomp: SigmaDecomposition,
    /// Sampled cross quadratic covariation `sum dM1 dM2`.
    pub covariation: f64,
    /// Three standard errors of the covariation sum.
    pub covariation_bound: f64,
    /// Sup of `|Y - (M + C + V)|`: the discrete integration-by-parts
    /// remainder `sum dX1 dX2` left with the caller.
    pub additivity_residual_sup: f64,
}

pub fn product(d1: &SigmaDecomposition, d2: &SigmaDecomposition) -> Result<ProductResult> {
    if d1.grid().as_ref() != d2.grid().as_ref() {
        return Err(Error::InvalidArgument(
            "product inputs live on different grids".into(),
        ));
    }
    let n = d1.x.len();
    // Orthogonality precondition: the sampled covariation must be
    // statistically indistinguishable from zero.
    let terms: Vec<f64> = (1..n).map(|i| d1.m.step(i) * d2.m.step(i)).collect();
    let sum: f64 = terms.iter().sum();
    let mean = sum / terms.len() as f64;
    let var = terms
        .iter()
        .map(|&t| (t - mean) * (t - mean))
        .sum::<f64>()
        / (terms.len() as f64 - 1.0).max(1.0);
    let bound = 3.0 * (terms.len() as f64 * var).sqrt();
    if sum.abs() > bound {
        return Err(Error::Precondition {
            what: "cross quadratic covariation must vanish".into(),
            measured: sum,
        });
    }

    let y = d1.x.zip_with(&d2.x, |a, b| a * b)?;
    let cross = |p1: &CadlagPath, p2: &CadlagPath| -> CadlagPath {
        // d(X1 X2) drift/martingale pieces: X1_- dP2 + X2_- dP1 with
        // predictable evaluation on both factors.
        let part_a = integrate_weighted(p2, 0.0, |i| d1.x.post()[i - 1], |i| d1.x.pre()[i]);
        let part_b = integrate_weighted(p1, 0.0, |i| d2.x.post()[i - 1], |i| d2.x.pre()[i]);
        part_a.add(&part_b).unwrap()
    };
    let m = cross(&d1.m, &d2.m);
    let c = cross(&d1.c, &d2.c);
    let v = cross(&d1.v, &d2.v);
    let a = c.add(&v).unwrap();
    let resid = y
        .sub(&m)
        .and_then(|p| p.sub(&c))
        .and_then(|p| p.sub(&v))
        .unwrap();
    let additivity_residual_sup = resid.sup_abs();
    Ok(ProductResult {
        decomp: SigmaDecomposition {
            x: y,
            m,
            a,
            c,
            v,
            martingale_fixture: d1.martingale_fixture || d2.martingale_fixture,
        },
        covariation: sum,
        covariation_bound: bound,
        additivity_residual_sup,
    })
}

/// Multiplicative decomposition `X = Gamma * W - 1` of a nonnegative input.
#[derive(Debug, Clone)]
pub struct MultDecomposition {
    /// `Gamma = exp(C)`.
    pub gamma: CadlagPath,
    /// `W = exp(-C)(X + 1)`, bundled with its martingale part
    /// `1 + int exp(-C_-) dM` and drift `l = int exp(-C_-) dV` (carried by
    /// `{X_- = 0}`). `W_0 = 1`, so the bundle is flagged as a fixture.
    pub w: SigmaDecomposition,
}

/// The identity `Gamma * W - 1 = X` is enforced exactly by construction of
/// `W.x`. The internal split `W = m + l` telescopes exactly only when `C`
/// has no jumps; with C-jumps the convexity gap of `exp` stays inside `W.x`.
pub fn mult_decomposition(d: &SigmaDecomposition) -> Result<MultDecomposition> {
    let min_x = d
        .x
        .pre()
        .iter()
        .chain(d.x.post().iter())
        .fold(f64::INFINITY, |m, &x| m.min(x));
    if min_x < -1e-10 {
        return Err(Error::InvalidArgument(format!(
            "multiplicative decomposition needs a nonnegative input, min X = {min_x}"
        )));
    }
    let gamma = d.c.map(f64::exp);
    let wx = d
        .x
        .zip_with(&d.c, |x, c| (-c).exp() * (x + 1.0))
        .unwrap();
    let w0 = wx.post()[0];
    let weighted = |p: &CadlagPath, start: f64| {
        integrate_weighted(
            p,
            start,
            |i| (-d.c.post()[i - 1]).exp(),
            |i| (-d.c.pre()[i]).exp(),
        )
    };
    let m = weighted(&d.m, w0);
    let l = weighted(&d.v, 0.0);
    let g = d.grid();
    Ok(MultDecomposition {
        gamma,
        w: SigmaDecomposition {
            x: wx,
            m,
            a: l.clone(),
            c: CadlagPath::zeros(Arc::clone(g)),
            v: l,
            martingale_fixture: true,
        },
    })
}

/// Scale a decomposition by a bounded function of its `C` component:
/// `Y = f(C) X`, with drift `A' = int f(C_-) d(C + V)` and martingale part
/// `int f(C_-) dM`. Because `C` only moves on the zero set of `X`, the
/// left-limit weight equals the weight frozen at the last zero and the
/// decomposition telescopes exactly onto `Y` for certified inputs.
pub fn scale_by_drift_function(
    d: &SigmaDecomposition,
    f: impl Fn(f64) -> f64,
) -> Result<SigmaDecomposition> {
    let n = d.x.len();
    let g = d.grid();
    let f_post: Vec<f64> = d.c.post().iter().map(|&c| f(c)).collect();
    let f_pre: Vec<f64> = d.c.pre().iter().map(|&c| f(c)).collect();
    if f_post.iter().chain(f_pre.iter()).any(|w| !w.is_finite()) {
        return Err(Error::InvalidArgument(
            "drift function returned a non-finite value on the range of C".into(),
        ));
    }
    let mut y_pre = vec![0.0; n];
    let mut y_post = vec![0.0; n];
    for i in 0..n {
        y_pre[i] = f_pre[i] * d.x.pre()[i];
        y_post[i] = f_post[i] * d.x.post()[i];
    }
    let weighted = |p: &CadlagPath, start: f64| {
        integrate_weighted(p, start, |i| f_post[i - 1], |i| f_pre[i])
    };
    let m = weighted(&d.m, f_post[0] * d.m.post()[0]);
    let c = weighted(&d.c, f_post[0] * d.c.post()[0]);
    let v = weighted(&d.v, f_post[0] * d.v.post()[0]);
    let a = c.add(&v).unwrap();
    Ok(SigmaDecomposition {
        x: CadlagPath::from_parts(Arc::clone(g), y_pre, y_post).unwrap(),
        m,
        a,
        c,
        v,
        martingale_fixture: d.martingale_fixture,
    })
}

/// Two estimators of the local time at zero.
#[derive(Debug, Clone)]
pub struct LocalTimeEstimates {
    /// `|X_t| - |X_0| - int sgn(X_-) dM`, the Tanaka residual (sgn(0) := +1).
    pub tanaka: CadlagPath,
    /// `(2 eps)^-1 sum 1_{|X| <= eps} (dX)^2`, the occupation estimator.
    pub occupation: CadlagPath,
}

pub fn local_time(d: &SigmaDecomposition, eps: f64) -> Result<LocalTimeEstimates> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let n = d.x.len();
    let g = d.grid();
    let x0_abs = d.x.post()[0].abs();
    let mut t_pre = vec![0.0; n];
    let mut t_post = vec![0.0; n];
    let mut acc = 0.0f64; // running sgn-weighted martingale integral
    let mut occ = vec![0.0; n];
    let inv = 1.0 / (2.0 * eps);
    for i in 1..n {
        acc += sgn_plus(d.x.post()[i - 1]) * d.m.cont(i);
        t_pre[i] = d.x.pre()[i].abs() - x0_abs - acc;
        acc += sgn_plus(d.x.pre()[i]) * d.m.jump(i);
        t_post[i] = d.x.post()[i].abs() - x0_abs - acc;
        let dx = d.x.step(i);
        occ[i] = occ[i - 1]
            + if d.x.post()[i - 1].abs() <= eps {
                inv * dx * dx
            } else {
                0.0
            };
    }
    Ok(LocalTimeEstimates {
        tanaka: CadlagPath::from_parts(Arc::clone(g), t_pre, t_post).unwrap(),
        occupation: CadlagPath::continuous(Arc::clone(g), occ).unwrap(),
    })
}
