//! Shared inputs for the benchmarks.

use mif_core::synth::example1;
use mif_core::{smoothing_kernel, FilterKernel, FilterKind, GridSignal};

/// Mixture from the two-mode example at the given side length.
pub fn mixture(size: usize) -> GridSignal {
    example1(size).expect("valid size").mixture
}

/// Default smoothing kernel with the same support radius on both axes.
pub fn kernel_2d(radius: usize) -> FilterKernel {
    let base = FilterKind::default().prepare().expect("default filter");
    smoothing_kernel(&base, &[radius, radius]).expect("valid radius")
}
