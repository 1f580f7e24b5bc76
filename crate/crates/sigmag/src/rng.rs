//! Counter-based Gaussian streams for reproducible parallel simulation.
//!
//! Every draw is a pure function of `(key, counter)`, so ensemble members,
//! inner Monte Carlo batches and steps can be generated in any order (or in
//! parallel) with bit-identical results. Keys are derived hierarchically:
//! `StreamKey::new(seed).child(member)` for ensemble members,
//! `.child(outer).child(inner)` for nested continuations.
//!
//! The mixer is the splitmix64 finalizer; normals come from Box-Muller on two
//! counter-indexed uniforms (cosine branch only, one normal per counter).

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key of one deterministic Gaussian stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey(mix64(seed ^ GOLDEN))
    }

    /// Derive an independent sub-stream (member, outer path, inner path, ...).
    pub fn child(self, idx: u64) -> Self {
        StreamKey(mix64(
            self.0 ^ mix64(idx.wrapping_mul(0xA24B_AED4_963E_E407).wrapping_add(GOLDEN)),
        ))
    }

    #[inline(always)]
    fn word(self, ctr: u64) -> u64 {
        mix64(self.0.wrapping_add(ctr.wrapping_mul(GOLDEN)))
    }

    /// Uniform on (0, 1], indexed by counter.
    #[inline(always)]
    pub fn uniform_at(self, ctr: u64) -> f64 {
        // 53 significant bits, shifted into (0, 1] so ln() is always finite.
        ((self.word(ctr) >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw, a pure function of `(key, step)`.
    #[inline(always)]
    pub fn normal_at(self, step: u64) -> f64 {
        let u1 = self.uniform_at(2 * step);
        let u2 = self.uniform_at(2 * step + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
