use serde::Serialize;

use super::norms::{l2_norm, sobolev_slobodecki_norm, NormFlavor};
use super::operators::frac_integral;
use super::sampling::{seeded_rng, BandLimited};
use super::{FracError, FracOrder, TimeGrid};

/// Extremal ratios `‖J^γ v‖_{H_γ} / ‖v‖_{L²}` over a seeded sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub gamma: f64,
    pub samples: usize,
    pub seed: u64,
    pub min: f64,
    pub max: f64,
}

impl RatioReport {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

const PROBE_MODES: usize = 6;

/// Empirical witness of the two-sided bound between `‖J^γ v‖_{H_γ}` and `‖v‖_{L²}`.
pub fn norm_equivalence_probe(
    order: FracOrder,
    sample_count: usize,
    grid: TimeGrid,
    seed: u64,
) -> Result<RatioReport, FracError> {
    if sample_count < 10 {
        return Err(FracError::InvalidArgument(format!(
            "at least 10 samples required, got {sample_count}"
        )));
    }
    if order.value() <= 0.0 {
        return Err(FracError::InvalidOrder(order.value()));
    }
    let mut rng = seeded_rng(seed);
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    for _ in 0..sample_count {
        let v = BandLimited::random(&mut rng, grid.t_max(), PROBE_MODES, false).sample(grid)?;
        let jv = frac_integral(order, &v)?;
        let ratio = sobolev_slobodecki_norm(order.value(), &jv, NormFlavor::ZeroTrace)? / l2_norm(&v);
        min = min.min(ratio);
        max = max.max(ratio);
    }
    Ok(RatioReport {
        gamma: order.value(),
        samples: sample_count,
        seed,
        min,
        max,
    })
}
