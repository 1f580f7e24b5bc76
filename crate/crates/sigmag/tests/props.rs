//! Property tests over randomly built staircase paths and decompositions.

use proptest::prelude::*;
use sigmag::classify::class_diagnostics;
use sigmag::path::{stieltjes_integral, CadlagPath, SigmaDecomposition};
use sigmag::pathops::{balayage, product, tanaka_split};
use sigmag::TimeGrid;
use std::sync::Arc;

fn grid(steps: usize) -> Arc<TimeGrid> {
    Arc::new(TimeGrid::new(1.0, steps).unwrap())
}

/// Staircase path built from per-step (continuous, jump) increments.
fn staircase(incs: &[(f64, f64)]) -> CadlagPath {
    let g = grid(incs.len());
    let mut pre = vec![0.0; incs.len() + 1];
    let mut post = vec![0.0; incs.len() + 1];
    for (i, &(c, j)) in incs.iter().enumerate() {
        pre[i + 1] = post[i] + c;
        post[i + 1] = pre[i + 1] + j;
    }
    CadlagPath::from_parts(g, pre, post).unwrap()
}

fn inc_strategy(steps: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), steps..=steps)
}

/// Random decomposition with additivity exact by construction: martingale
/// moves continuously, drift components jump, and some jumps land or leave
/// exact zeros.
fn decomposition(
    m_incs: &[f64],
    c_jumps: &[f64],
    v_jumps: &[f64],
) -> SigmaDecomposition {
    let n = m_incs.len();
    let g = grid(n);
    let mut m_post = vec![0.0; n + 1];
    let mut c_pre = vec![0.0; n + 1];
    let mut c_post = vec![0.0; n + 1];
    let mut v_pre = vec![0.0; n + 1];
    let mut v_post = vec![0.0; n + 1];
    let mut x_pre = vec![0.0; n + 1];
    let mut x_post = vec![0.0; n + 1];
    for i in 1..=n {
        m_post[i] = m_post[i - 1] + m_incs[i - 1];
        c_pre[i] = c_post[i - 1];
        v_pre[i] = v_post[i - 1];
        c_post[i] = c_pre[i] + c_jumps[i - 1];
        v_post[i] = v_pre[i] + v_jumps[i - 1];
        x_pre[i] = m_post[i] + c_pre[i] + v_pre[i];
        x_post[i] = m_post[i] + c_post[i] + v_post[i];
    }
    let m = CadlagPath::continuous(g.clone(), m_post).unwrap();
    let c = CadlagPath::from_parts(g.clone(), c_pre, c_post).unwrap();
    let v = CadlagPath::from_parts(g.clone(), v_pre, v_post).unwrap();
    let a = c.add(&v).unwrap();
    let x = CadlagPath::from_parts(g, x_pre, x_post).unwrap();
    SigmaDecomposition {
        x,
        m,
        a,
        c,
        v,
        martingale_fixture: false,
    }
}

proptest! {
    #[test]
    fn total_variation_is_subadditive(incs_a in inc_strategy(24), incs_b in inc_strategy(24)) {
        let p = staircase(&incs_a);
        let q = staircase(&incs_b);
        let sum = p.add(&q).unwrap();
        prop_assert!(sum.total_variation() <= p.total_variation() + q.total_variation() + 1e-9);
    }

    #[test]
    fn stieltjes_unit_weight_recovers_monotone_increase(
        incs in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 16..=16)
    ) {
        let p = staircase(&incs);
        prop_assert!(p.is_nondecreasing());
        let i = stieltjes_integral(&vec![1.0; p.len()], &p).unwrap();
        let expect = p.post()[p.len() - 1] - p.post()[0];
        prop_assert!((i.post()[p.len() - 1] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn tanaka_pointwise_identities_hold_on_random_decompositions(
        m_incs in prop::collection::vec(-1.0f64..1.0, 20..=20),
        c_jumps in prop::collection::vec(-1.0f64..1.0, 20..=20),
        v_jumps in prop::collection::vec(-1.0f64..1.0, 20..=20),
    ) {
        let d = decomposition(&m_incs, &c_jumps, &v_jumps);
        let ts = tanaka_split(&d);
        for i in 0..d.x.len() {
            prop_assert_eq!(ts.plus.x.post()[i] - ts.minus.x.post()[i], d.x.post()[i]);
            prop_assert_eq!(ts.plus.x.post()[i] + ts.minus.x.post()[i], d.x.post()[i].abs());
        }
        // The residual bookkeeping keeps both bundles additive.
        for i in 0..d.x.len() {
            let gap = ts.plus.x.post()[i] - ts.plus.m.post()[i]
                - ts.plus.c.post()[i] - ts.plus.v.post()[i];
            prop_assert!(gap.abs() <= 1e-9 * (1.0 + ts.plus.x.post()[i].abs()));
        }
    }

    #[test]
    fn balayage_unit_weight_is_identity(
        m_incs in prop::collection::vec(-1.0f64..1.0, 16..=16),
        c_jumps in prop::collection::vec(-1.0f64..1.0, 16..=16),
    ) {
        let d = decomposition(&m_incs, &c_jumps, &[0.0; 16]);
        let out = balayage(&d, &vec![1.0; d.x.len()]).unwrap();
        prop_assert_eq!(out.x.post(), d.x.post());
        for i in 0..d.x.len() {
            prop_assert!((out.m.post()[i] - d.m.post()[i]).abs() <= 1e-12 * (1.0 + d.m.post()[i].abs()));
        }
    }

    #[test]
    fn leakage_is_monotone_in_tol(
        m_incs in prop::collection::vec(-1.0f64..1.0, 20..=20),
        c_jumps in prop::collection::vec(-1.0f64..1.0, 20..=20),
        v_jumps in prop::collection::vec(-1.0f64..1.0, 20..=20),
        tol_a in 0.0f64..1.0,
        tol_b in 0.0f64..1.0,
    ) {
        let d = decomposition(&m_incs, &c_jumps, &v_jumps);
        let (lo, hi) = if tol_a <= tol_b { (tol_a, tol_b) } else { (tol_b, tol_a) };
        let r_lo = class_diagnostics(&d, lo);
        let r_hi = class_diagnostics(&d, hi);
        prop_assert!(r_hi.leakage_sigma <= r_lo.leakage_sigma + 1e-12);
        prop_assert!(r_hi.leakage_sigma_r <= r_lo.leakage_sigma_r + 1e-12);
        prop_assert!(r_hi.leakage_sigma_g <= r_lo.leakage_sigma_g + 1e-12);
    }

    #[test]
    fn product_is_symmetric(
        m1 in prop::collection::vec(-0.5f64..0.5, 16..=16),
        m2 in prop::collection::vec(-0.5f64..0.5, 16..=16),
        c1 in prop::collection::vec(-0.5f64..0.5, 16..=16),
        v2 in prop::collection::vec(-0.5f64..0.5, 16..=16),
    ) {
        let d1 = decomposition(&m1, &c1, &[0.0; 16]);
        let d2 = decomposition(&m2, &[0.0; 16], &v2);
        if let (Ok(p12), Ok(p21)) = (product(&d1, &d2), product(&d2, &d1)) {
            prop_assert_eq!(p12.decomp.x.post(), p21.decomp.x.post());
            for i in 0..p12.decomp.m.len() {
                let gap = p12.decomp.m.post()[i] - p21.decomp.m.post()[i];
                prop_assert!(gap.abs() <= 1e-12 * (1.0 + p12.decomp.m.post()[i].abs()));
            }
        }
    }
}
