//! Cadlag paths with explicit left limits, decomposition bundles, and
//! elementary path calculus.
//!
//! A path stores two aligned arrays: `pre[i]` is the left limit at `t_i` and
//! `post[i]` the value at `t_i`. Jumps live exactly at grid points
//! (`jump(i) = post[i] - pre[i]`); diffusive motion lives strictly inside
//! intervals, so `pre[i]` is the value reached continuously from
//! `post[i-1]`. There is no jump at time zero: `pre[0] == post[0]`.

use crate::grid::TimeGrid;
use crate::{Error, Result};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath {
    grid: Arc<TimeGrid>,
    pre: Vec<f64>,
    post: Vec<f64>,
}

impl CadlagPath {
    /// Build from explicit pre/jump arrays. Lengths must be `steps + 1` and
    /// `pre[0]` must equal `post[0]`.
    pub fn from_parts(grid: Arc<TimeGrid>, pre: Vec<f64>, post: Vec<f64>) -> Result<Self> {
        if pre.len() != grid.len() || post.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "path length {} / {} does not match grid ({} points)",
                pre.len(),
                post.len(),
                grid.len()
            )));
        }
        if pre[0] != post[0] {
            return Err(Error::InvalidArgument(format!(
                "no jump at time zero allowed: pre[0] = {}, post[0] = {}",
                pre[0], post[0]
            )));
        }
        Ok(CadlagPath { grid, pre, post })
    }

    /// A continuous path: left limits coincide with values everywhere.
    pub fn continuous(grid: Arc<TimeGrid>, post: Vec<f64>) -> Result<Self> {
        let pre = post.clone();
        Self::from_parts(grid, pre, post)
    }

    pub fn zeros(grid: Arc<TimeGrid>) -> Self {
        let n = grid.len();
        CadlagPath {
            grid,
            pre: vec![0.0; n],
            post: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn pre(&self) -> &[f64] {
        &self.pre
    }

    pub fn post(&self) -> &[f64] {
        &self.post
    }

    pub fn len(&self) -> usize {
        self.post.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Continuous increment over `(t_{i-1}, t_i)`, for `i >= 1`.
    #[inline]
    pub fn cont(&self, i: usize) -> f64 {
        self.pre[i] - self.post[i - 1]
    }

    /// Jump attributed to `t_i` (zero at `i = 0` by construction).
    #[inline]
    pub fn jump(&self, i: usize) -> f64 {
        self.post[i] - self.pre[i]
    }

    /// Full increment `post[i] - post[i-1]`, for `i >= 1`.
    #[inline]
    pub fn step(&self, i: usize) -> f64 {
        self.post[i] - self.post[i - 1]
    }

    /// Total variation along the grid: sum of |continuous increment| + |jump|.
    pub fn total_variation(&self) -> f64 {
        let mut tv = 0.0;
        for i in 1..self.post.len() {
            tv += self.cont(i).abs() + self.jump(i).abs();
        }
        tv
    }

    pub fn is_nondecreasing(&self) -> bool {
        (1..self.post.len()).all(|i| self.cont(i) >= 0.0 && self.jump(i) >= 0.0)
    }

    /// Non-decreasing up to a per-step slack (for residual-defined paths
    /// whose increments carry rounding dust).
    pub fn is_nondecreasing_within(&self, slack: f64) -> bool {
        (1..self.post.len()).all(|i| self.cont(i) >= -slack && self.jump(i) >= -slack)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> CadlagPath {
        CadlagPath {
            grid: Arc::clone(&self.grid),
            pre: self.pre.iter().map(|&x| f(x)).collect(),
            post: self.post.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn neg(&self) -> CadlagPath {
        self.map(|x| -x)
    }

    /// Positive part, taken pointwise on both arrays.
    pub fn pos_part(&self) -> CadlagPath {
        self.map(|x| if x > 0.0 { x } else { 0.0 })
    }

    pub fn zip_with(&self, other: &CadlagPath, f: impl Fn(f64, f64) -> f64) -> Result<CadlagPath> {
        if self.grid.as_ref() != other.grid.as_ref() {
            return Err(Error::InvalidArgument(
                "paths live on different grids".into(),
            ));
        }
        Ok(CadlagPath {
            grid: Arc::clone(&self.grid),
            pre: self
                .pre
                .iter()
                .zip(&other.pre)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            post: self
                .post
                .iter()
                .zip(&other.post)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &CadlagPath) -> Result<CadlagPath> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CadlagPath) -> Result<CadlagPath> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn sup_abs(&self) -> f64 {
        self.pre
            .iter()
            .chain(self.post.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

/// Accumulate a path from per-step weights: the continuous increment into
/// `t_i` is weighted by `w_cont(i)` and the jump at `t_i` by `w_jump(i)`.
/// This is the predictable-evaluation workhorse behind the path transforms.
pub(crate) fn integrate_weighted(
    p: &CadlagPath,
    start: f64,
    mut w_cont: impl FnMut(usize) -> f64,
    mut w_jump: impl FnMut(usize) -> f64,
) -> CadlagPath {
    let n = p.len();
    let mut pre = vec![0.0; n];
    let mut post = vec![0.0; n];
    pre[0] = start;
    post[0] = start;
    for i in 1..n {
        pre[i] = post[i - 1] + w_cont(i) * p.cont(i);
        post[i] = pre[i] + w_jump(i) * p.jump(i);
    }
    CadlagPath {
        grid: Arc::clone(&p.grid),
        pre,
        post,
    }
}

/// Cumulative Stieltjes sum `I[i] = sum_{j<=i} h[j] * dP(j)`, where both the
/// continuous increment into `t_j` and the jump at `t_j` are weighted by
/// `h[j]`. Predictable (left-limit) evaluation is obtained by passing the
/// integrand's pre array as `h`.
pub fn stieltjes_integral(h: &[f64], p: &CadlagPath) -> Result<CadlagPath> {
    if h.len() != p.len() {
        return Err(Error::InvalidArgument(format!(
            "integrand length {} does not match path length {}",
            h.len(),
            p.len()
        )));
    }
    Ok(integrate_weighted(p, 0.0, |i| h[i], |i| h[i]))
}

/// Decomposition bundle `X = M + A` with drift split `A = C + V`, all on one
/// grid. `martingale_fixture` marks auxiliary fixtures whose martingale part
/// does not start at zero (they are not class members).
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaDecomposition {
    pub x: CadlagPath,
    pub m: CadlagPath,
    pub a: CadlagPath,
    pub c: CadlagPath,
    pub v: CadlagPath,
    pub martingale_fixture: bool,
}

impl SigmaDecomposition {
    pub fn grid(&self) -> &Arc<TimeGrid> {
        self.x.grid()
    }

    pub fn steps(&self) -> usize {
        self.grid().steps()
    }

    /// Negate every component; zero sets are unchanged.
    pub fn neg(&self) -> SigmaDecomposition {
        SigmaDecomposition {
            x: self.x.neg(),
            m: self.m.neg(),
            a: self.a.neg(),
            c: self.c.neg(),
            v: self.v.neg(),
            martingale_fixture: self.martingale_fixture,
        }
    }

    /// Check the bundle invariants at their stated tolerances. Returns the
    /// first violation found.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.x.len();
        for p in [&self.m, &self.a, &self.c, &self.v] {
            if p.len() != n || p.grid().as_ref() != self.grid().as_ref() {
                return Err(Error::InvalidArgument("component grids differ".into()));
            }
        }
        if !self.martingale_fixture {
            if self.m.post()[0] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "M must start at zero, got {}",
                    self.m.post()[0]
                )));
            }
            if self.a.post()[0] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "A must start at zero, got {}",
                    self.a.post()[0]
                )));
            }
        }
        for i in 0..n {
            let tol = 1e-10 * (1.0 + self.x.post()[i].abs());
            let post_gap = self.x.post()[i] - self.m.post()[i] - self.a.post()[i];
            if post_gap.abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "X = M + A fails at index {i}: gap {post_gap}"
                )));
            }
            let pre_gap = self.x.pre()[i] - self.m.pre()[i] - self.a.pre()[i];
            if pre_gap.abs() > 1e-10 * (1.0 + self.x.pre()[i].abs()) {
                return Err(Error::InvalidArgument(format!(
                    "X_- = M_- + A_- fails at index {i}: gap {pre_gap}"
                )));
            }
            let split_gap = self.a.post()[i] - self.c.post()[i] - self.v.post()[i];
            if split_gap.abs() > 1e-10 * (1.0 + self.a.post()[i].abs()) {
                return Err(Error::InvalidArgument(format!(
                    "A = C + V fails at index {i}: gap {split_gap}"
                )));
            }
            if !self.x.post()[i].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite value at index {i}"
                )));
            }
        }
        if !self.a.total_variation().is_finite() {
            return Err(Error::InvalidArgument("drift has unbounded variation".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::new(1.0, n).unwrap())
    }

    #[test]
    fn constant_path_has_zero_variation() {
        let p = CadlagPath::continuous(grid(10), vec![3.5; 11]).unwrap();
        assert_eq!(p.total_variation(), 0.0);
    }

    #[test]
    fn staircase_with_two_unit_jumps() {
        let g = grid(4);
        let pre = vec![0.0, 0.0, 0.0, 1.0, 2.0];
        let post = vec![0.0, 0.0, 1.0, 2.0, 2.0];
        let p = CadlagPath::from_parts(g, pre, post).unwrap();
        assert_eq!(p.total_variation(), 2.0);
        assert!(p.is_nondecreasing());
    }

    #[test]
    fn jump_at_zero_rejected() {
        let g = grid(2);
        assert!(CadlagPath::from_parts(g, vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = grid(4);
        assert!(CadlagPath::continuous(g.clone(), vec![0.0; 3]).is_err());
        let p = CadlagPath::zeros(g);
        assert!(stieltjes_integral(&[1.0; 3], &p).is_err());
    }

    #[test]
    fn stieltjes_zero_integrand() {
        let g = grid(8);
        let p = CadlagPath::continuous(g, (0..9).map(|i| i as f64).collect()).unwrap();
        let i = stieltjes_integral(&[0.0; 9], &p).unwrap();
        assert!(i.post().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn stieltjes_unit_integrand_recovers_total_increase() {
        let g = grid(5);
        let pre = vec![0.0, 0.5, 1.0, 2.5, 3.0, 4.0];
        let post = vec![0.0, 1.0, 2.5, 2.5, 4.0, 4.5];
        let p = CadlagPath::from_parts(g, pre, post).unwrap();
        assert!(p.is_nondecreasing());
        let i = stieltjes_integral(&[1.0; 6], &p).unwrap();
        let expect = p.post()[5] - p.post()[0];
        assert!((i.post()[5] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }
}
