//! Class-membership diagnostics: how much of the drift's variation escapes
//! each candidate carrier set.

use crate::path::SigmaDecomposition;
use serde::{Deserialize, Serialize};

/// Leakage fractions in `[0, 1]` for the three carriers, normalized by the
/// total variation of the drift (zero drift reports zero leakage: membership
/// is vacuous).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub generator: Option<String>,
    pub tol: f64,
    pub leakage_sigma: f64,
    pub leakage_sigma_r: f64,
    pub leakage_sigma_g: f64,
    pub tv_drift: f64,
    pub verdicts: ClassVerdicts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVerdicts {
    pub sigma: bool,
    pub sigma_r: bool,
    pub sigma_g: bool,
}

/// Measure drift charges escaping each carrier.
///
/// A charge at step `i` (continuous increment or jump of `A`) counts as
/// leaked for (Sigma) when `|X_post[i]| > tol`, for (Sigma^r) when
/// `|X_pre[i]| > tol`, and for (Sigma^g) when `|X_post[i] * X_pre[i]| > tol`.
/// Verdicts use threshold `1e-6` for exact-zero inputs (`tol = 0`) and
/// `min(1, 10 sqrt(dt))` for tolerance inputs.
pub fn class_diagnostics(d: &SigmaDecomposition, tol: f64) -> ClassReport {
    let n = d.x.len();
    let mut tv = 0.0f64;
    let mut leak_s = 0.0f64;
    let mut leak_r = 0.0f64;
    let mut leak_g = 0.0f64;
    for i in 1..n {
        let post = d.x.post()[i];
        let pre = d.x.pre()[i];
        let off_post = post.abs() > tol;
        let off_pre = pre.abs() > tol;
        let off_prod = (post * pre).abs() > tol;
        for charge in [d.a.cont(i).abs(), d.a.jump(i).abs()] {
            tv += charge;
            if off_post {
                leak_s += charge;
            }
            if off_pre {
                leak_r += charge;
            }
            if off_prod {
                leak_g += charge;
            }
        }
    }
    let den = tv.max(1e-15);
    let leakage_sigma = leak_s / den;
    let leakage_sigma_r = leak_r / den;
    let leakage_sigma_g = leak_g / den;
    let dt = d.grid().dt();
    let threshold = if tol == 0.0 {
        1e-6
    } else {
        (10.0 * dt.sqrt()).min(1.0)
    };
    ClassReport {
        generator: None,
        tol,
        leakage_sigma,
        leakage_sigma_r,
        leakage_sigma_g,
        tv_drift: tv,
        verdicts: ClassVerdicts {
            sigma: leakage_sigma <= threshold,
            sigma_r: leakage_sigma_r <= threshold,
            sigma_g: leakage_sigma_g <= threshold,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{member_key, GeneratorKind, GeneratorSpec};
    use crate::grid::TimeGrid;
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::new(1.0, n).unwrap())
    }

    #[test]
    fn sigma_g_generator_has_exact_sigma_g_carrier() {
        let g = grid(1000);
        let spec = GeneratorSpec::new(GeneratorKind::SigmaG)
            .with_resets(&[0.3, 0.7])
            .with_injections(&[0.2, 0.6], &[1.0, 1.0]);
        let d = spec.generate(&g, member_key(1, 0)).unwrap();
        let rep = class_diagnostics(&d, 0.0);
        assert_eq!(rep.leakage_sigma_g, 0.0);
        assert!(rep.leakage_sigma > 0.0);
        assert!(rep.leakage_sigma_r > 0.0);
        assert!(rep.verdicts.sigma_g);
        assert!(!rep.verdicts.sigma);
    }

    #[test]
    fn zero_drift_reports_vacuous_membership() {
        let g = grid(200);
        let d = GeneratorSpec::new(GeneratorKind::Reset)
            .generate(&g, member_key(2, 0))
            .unwrap();
        let rep = class_diagnostics(&d, 0.0);
        assert_eq!(rep.leakage_sigma, 0.0);
        assert_eq!(rep.leakage_sigma_r, 0.0);
        assert_eq!(rep.leakage_sigma_g, 0.0);
        assert_eq!(rep.tv_drift, 0.0);
    }

    #[test]
    fn injection_leaks_everything_off_the_post_carrier() {
        let g = grid(1000);
        let spec =
            GeneratorSpec::new(GeneratorKind::Injection).with_injections(&[0.2, 0.6], &[1.0, 1.0]);
        let d = spec.generate(&g, member_key(3, 0)).unwrap();
        let rep = class_diagnostics(&d, 0.0);
        assert_eq!(rep.leakage_sigma_r, 0.0);
        assert_eq!(rep.leakage_sigma, 1.0);
        assert_eq!(rep.leakage_sigma_g, 0.0);
    }

    #[test]
    fn drawdown_drift_charges_sit_exactly_on_the_zero_set() {
        // The running max increases only when X lands exactly at zero, so
        // leakage vanishes even at the scaled tolerance.
        let g = grid(1000);
        let d = GeneratorSpec::new(GeneratorKind::Drawdown)
            .generate(&g, member_key(6, 0))
            .unwrap();
        let tol = 2.0 * g.dt().sqrt();
        let rep = class_diagnostics(&d, tol);
        assert!(rep.leakage_sigma < 1e-2);
        assert_eq!(rep.leakage_sigma, 0.0);
    }

    #[test]
    fn reset_charges_leak_off_the_left_limit_carrier() {
        let g = grid(1000);
        let spec = GeneratorSpec::new(GeneratorKind::Reset).with_resets(&[0.3, 0.7]);
        for k in 0..16 {
            let d = spec.generate(&g, member_key(7, k)).unwrap();
            let rep = class_diagnostics(&d, 0.0);
            assert!(rep.leakage_sigma_r > 0.5, "member {k}: {}", rep.leakage_sigma_r);
            assert_eq!(rep.leakage_sigma, 0.0);
        }
    }

    #[test]
    fn leakage_is_monotone_in_tol_and_nested() {
        let g = grid(1000);
        let spec = GeneratorSpec::new(GeneratorKind::AbsBm);
        let d = spec.generate(&g, member_key(4, 0)).unwrap();
        let mut prev = [f64::INFINITY; 3];
        for tol in [0.0, 0.5 * g.sqrt_dt(), 2.0 * g.sqrt_dt(), 10.0 * g.sqrt_dt()] {
            let rep = class_diagnostics(&d, tol);
            let cur = [rep.leakage_sigma, rep.leakage_sigma_r, rep.leakage_sigma_g];
            for k in 0..3 {
                assert!(cur[k] <= prev[k] + 1e-12, "tol {tol}: leakage grew");
            }
            assert!(
                rep.leakage_sigma_g
                    <= rep.leakage_sigma.min(rep.leakage_sigma_r) + 1e-12
            );
            prev = cur;
        }
    }
}
