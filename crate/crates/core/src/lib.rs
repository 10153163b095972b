//! Multidimensional Iterative Filtering (MIF) for signals on regular grids of
//! any dimension.
//!
//! A signal is split into intrinsic mode functions (IMFs) by repeatedly
//! subtracting a moving average whose support is chosen from the signal's
//! own extrema density. The moving-average kernels are built from 1D
//! profiles on `[-1, 1]`, notably the steady state of a Fokker-Planck
//! equation, lifted to k dimensions radially or ellipsoidally.
//!
//! ```
//! use mif_core::{mif, reconstruct, GridSignal, MifConfig};
//!
//! let signal = GridSignal::from_fn(vec![128], |i| {
//!     let x = i[0] as f64 / 128.0;
//!     (2.0 * std::f64::consts::PI * 20.0 * x).sin() + (2.0 * std::f64::consts::PI * 2.0 * x).sin()
//! })?;
//! let dec = mif(&signal, &MifConfig::default())?;
//! let back = reconstruct(&dec)?;
//! assert!(back.sub(&signal)?.max_abs() < 1e-12);
//! # Ok::<(), mif_core::Error>(())
//! ```
//!
//! The [`hyperspectral`] module applies the decomposition to target
//! detection in hyperspectral cubes.

pub mod decompose;
pub mod error;
pub mod filters;
pub mod grid;
pub mod hyperspectral;
mod spectral;
pub mod synth;

pub use decompose::{
    fluctuation, mif, moving_average, reconstruct, sift, sift_with, Boundary, ConvolutionStrategy, Decomposition,
    ImfInfo, MifConfig, MovingAverage, SiftOutcome, StopCriteria,
};
pub use error::{Error, Result};
pub use filters::{
    build_gfp, double_average_filter, ellipsoid_average, estimate_support_radii, periodic_spectrum,
    smoothing_kernel, solve_fp_filter, spectrum_bounds, BaseShape, Filter1D, FilterKernel, FilterKind, FpParams,
    SupportRule,
};
pub use grid::{
    count_extrema, extrema_stats, load_grid, save_grid, ExtremaStats, GridFormat, GridSignal,
};
pub use hyperspectral::{
    ace_classify, count_isolated, covariance, load_cube, load_signature, postprocess_map, preprocess_cube,
    save_cube, save_signature, AceMap, Covariance, HyperCube, TargetSignature,
};
