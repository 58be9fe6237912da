//! Counter-based random number generation for reproducible instances.
//!
//! All problem generators and randomized test suites draw from SplitMix64,
//! fixed here so that any implementation in any language can reproduce the
//! exact same instance data from `(family, params, seed)`.
//!
//! SplitMix64 (Steele, Lea & Flood, 2014) applied to a 64-bit counter:
//!
//! ```text
//! counter_k = seed + (k+1) * 0x9E3779B97F4A7C15        (wrapping)
//! z = counter_k
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9             (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB             (wrapping)
//! output_k = z ^ (z >> 31)
//! ```
//!
//! Uniform doubles take the top 53 bits: `u = output >> 11; u * 2^-53`.
//! Gaussians use the Box-Muller transform on two consecutive uniforms,
//! returning both values in order.

const GAMMA: u64 = 0x9E3779B97F4A7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    cached_gaussian: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed, cached_gaussian: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(g) = self.cached_gaussian.take() {
            return g;
        }
        // Avoid u1 = 0 so the logarithm stays finite.
        let u1 = (self.next_f64()).max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_gaussian = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn gaussian_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_gaussian()).collect()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}
