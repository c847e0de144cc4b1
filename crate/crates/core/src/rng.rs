//! Deterministic pseudo-random numbers.
//!
//! Every randomized operation in the toolkit draws from [`SplitMix64`] so that
//! outputs are reproducible bit-for-bit from a seed, independent of platform
//! and of external crate versions.

/// SplitMix64 generator (Steele, Lea & Flood).
///
/// Passes BigCrush as a 64-bit mixer and is trivially seedable, which is all
/// the toolkit needs: initial-condition perturbations, search sampling, and
/// synthetic test data.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare_normal: None,
        }
    }

    /// Independent stream derived from `(seed, stream)`.
    ///
    /// Used when one logical seed must drive several unrelated draws
    /// (per-system perturbations, per-trial configurations) without the
    /// streams overlapping.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut mixer = SplitMix64::new(seed ^ stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
        // burn a few outputs so near-identical (seed, stream) pairs decorrelate
        mixer.next_u64();
        mixer.next_u64();
        mixer
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `[0, n)`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // modulo bias is negligible for the small n used here, but rejection
        // sampling keeps draws exact
        let bound = n as u64;
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % bound) as usize;
            }
        }
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.index(items.len())]
    }

    /// Standard normal via Box-Muller, caching the spare deviate.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = self.next_f64();
            if u > 0.0 {
                let v = self.next_f64();
                let r = (-2.0 * u.ln()).sqrt();
                let theta = 2.0 * std::f64::consts::PI * v;
                self.spare_normal = Some(r * theta.sin());
                return r * theta.cos();
            }
        }
    }
}
