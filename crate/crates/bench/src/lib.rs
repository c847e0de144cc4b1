//! Shared builders for the benchmark targets.

use tsbench_core::rng::SplitMix64;
use tsbench_core::series::TimeSeries;

/// Coupled AR(2) channels with cross-channel feedback, long enough for
/// realistic fitting and analysis workloads.
pub fn coupled_series(seed: u64, channels: usize, len: usize) -> TimeSeries {
    let mut rng = SplitMix64::new(seed);
    let mut values = vec![vec![0.0f64; len]; channels];
    for t in 2..len {
        for c in 0..channels {
            let other = (c + 1) % channels;
            let v = 0.6 * values[c][t - 1] - 0.2 * values[c][t - 2]
                + 0.25 * values[other][t - 1]
                + rng.normal();
            values[c][t] = v;
        }
    }
    TimeSeries::from_channels("bench", values, 0.0).unwrap()
}
