//! Shared fixtures for the benchmark targets.

use macdisp_core::channel::Channel;

/// The 2x2x2 channel the benchmarks exercise: user 1 flips the output,
/// user 2 perturbs the noise level.
pub fn fixture_channel() -> Channel {
    let w = vec![0.9, 0.1, 0.8, 0.2, 0.1, 0.9, 0.2, 0.8];
    Channel::new(2, 2, 2, w).unwrap()
}
