//! Seeded pseudorandom band-limited test paths.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{FracError, SampledPath, TimeGrid};

/// Deterministic generator used by every seeded battery.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `v(t) = c₀ + Σ_m (a_m cos(mπt/T) + b_m sin(mπt/T)) / m`, or the pure sine
/// part `Σ_m b_m sin(mπt/(2T)) / m` when a zero initial value is required.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimited {
    t_max: f64,
    offset: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    zero_start: bool,
}

impl BandLimited {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, t_max: f64, modes: usize, zero_start: bool) -> Self {
        let mut draw = || rng.gen_range(-1.0..=1.0);
        let offset = if zero_start { 0.0 } else { draw() };
        let mut cos = Vec::with_capacity(modes);
        let mut sin = Vec::with_capacity(modes);
        for _ in 0..modes {
            cos.push(if zero_start { 0.0 } else { draw() });
            sin.push(draw());
        }
        Self {
            t_max,
            offset,
            cos,
            sin,
            zero_start,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let base = if self.zero_start {
            std::f64::consts::PI * t / (2.0 * self.t_max)
        } else {
            std::f64::consts::PI * t / self.t_max
        };
        let mut v = self.offset;
        for (m, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = (m + 1) as f64;
            v += (c * (k * base).cos() + s * (k * base).sin()) / k;
        }
        v
    }

    pub fn sample(&self, grid: TimeGrid) -> Result<SampledPath, FracError> {
        SampledPath::from_fn(grid, |t| self.eval(t))
    }
}
