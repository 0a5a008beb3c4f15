//! Fixtures shared by the benchmarks.

use restriction_lab::acceptance::{cone_corpus, sphere_chain_setup, ConeDensity};
use restriction_lab::slicing::ChainSetup;
use restriction_lab::{Complex64, EvalGrid, SampledDensity, SurfaceDescriptor, WeightedSamples};

/// Unit density on the circle with `nodes` periodic nodes.
pub fn circle_density(nodes: usize) -> SampledDensity {
    SampledDensity::sample(&SurfaceDescriptor::circle(), &[nodes], None, |_| Complex64::new(1.0, 0.0)).expect("circle samples")
}

pub fn eval_box(half: f64, res: usize) -> EvalGrid {
    EvalGrid::cube(2, half, res)
}

/// Deterministic pseudo-random samples without pulling in an RNG.
pub fn samples(n: usize) -> WeightedSamples {
    let mut x: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    let (v, w): (Vec<f64>, Vec<f64>) = (0..n).map(|_| (next() * 2.0 - 1.0, next() + 1e-3)).unzip();
    WeightedSamples::new(v, w).expect("finite samples")
}

pub fn chain_fixture(count: usize) -> (ChainSetup, Vec<(String, ConeDensity)>) {
    (sphere_chain_setup(), cone_corpus(7, count, 0.5, 2.0))
}
