//! Multidimensional Iterative Filtering.
//!
//! The moving average `L f(x) = sum_t f(x + t) w(t)` is applied either by
//! direct summation or through the FFT. Under the symmetric boundary the
//! signal is extended by half-sample mirroring, which makes it periodic with
//! period `2 N` per axis; the kernel is folded onto that period, so both
//! paths compute the same operator.
//!
//! [`sift`] iterates `f <- f - L f` until the relative change drops below the
//! threshold; [`mif`] peels off one IMF per outer iteration, re-estimating
//! the filter support from the current residual each time.

use std::collections::HashMap;

use log::{debug, warn};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filters::{estimate_support_radii, smoothing_kernel, FilterKernel, FilterKind, SupportRule};
use crate::grid::{extrema_stats, increment, l2_norm, strides, ExtremaStats, GridSignal};
use crate::spectral::NdFft;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    Periodic,
    /// Half-sample mirror extension: `f[-1] = f[0]`, `f[N] = f[N - 1]`.
    #[default]
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionStrategy {
    /// Pick by estimated cost.
    #[default]
    Auto,
    Direct,
    Spectral,
}

/// Kernels with a spectral minimum below this are reported.
const SPECTRUM_WARN: f64 = -1e-6;

/// The moving-average operator for fixed dims, kernel and boundary.
///
/// Building it prepares either the index tables for direct summation or the
/// kernel spectrum, so repeated application inside the sifting loop costs
/// only the convolution itself.
pub struct MovingAverage {
    dims: Vec<usize>,
    kernel: FilterKernel,
    plan: Plan,
}

enum Plan {
    Direct {
        /// Per axis, `table[x * (2 r + 1) + t + r]` is the stride-scaled
        /// source index of `x + t`.
        tables: Vec<Vec<usize>>,
        taps: Vec<(Vec<usize>, f64)>,
    },
    Spectral {
        fft: NdFft,
        /// Kernel eigenvalues divided by the transform length.
        spectrum: Vec<f64>,
        /// Extended-grid cell to source cell.
        gather: Vec<usize>,
        /// Source cell to extended-grid cell.
        scatter: Vec<usize>,
    },
}

impl MovingAverage {
    pub fn new(
        dims: &[usize],
        kernel: &FilterKernel,
        boundary: Boundary,
        strategy: ConvolutionStrategy,
    ) -> Result<Self> {
        if dims.len() != kernel.ndim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}-D kernel", dims.len()),
                found: format!("{}-D kernel", kernel.ndim()),
            });
        }
        if boundary == Boundary::Periodic {
            for (axis, (&n, e)) in dims.iter().zip(kernel.shape()).enumerate() {
                if e > n {
                    return Err(Error::KernelTooLarge { axis, kernel: e, signal: n });
                }
            }
        }
        let periods: Vec<usize> = match boundary {
            Boundary::Periodic => dims.to_vec(),
            Boundary::Symmetric => dims.iter().map(|n| 2 * n).collect(),
        };
        let volume: usize = dims.iter().product();
        let ext_volume: usize = periods.iter().product();
        let taps = kernel.nonzero();
        let use_direct = match strategy {
            ConvolutionStrategy::Direct => true,
            ConvolutionStrategy::Spectral => false,
            ConvolutionStrategy::Auto => {
                let direct_cost = (taps.len() * volume) as f64;
                let fft_cost = 6.0 * ext_volume as f64 * (ext_volume as f64).log2().max(1.0);
                direct_cost <= fft_cost
            }
        };
        let plan = if use_direct {
            direct_plan(dims, kernel, boundary, taps)
        } else {
            spectral_plan(dims, &periods, boundary, taps)
        };
        if let Plan::Spectral { spectrum, .. } = &plan {
            let scale = ext_volume as f64;
            let min = spectrum.iter().fold(f64::INFINITY, |m, &v| m.min(v * scale));
            if min < SPECTRUM_WARN {
                warn!("moving-average kernel has negative eigenvalue {min:e}; sifting may diverge");
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            kernel: kernel.clone(),
            plan,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kernel(&self) -> &FilterKernel {
        &self.kernel
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.plan, Plan::Spectral { .. })
    }

    pub fn apply(&self, signal: &GridSignal) -> Result<GridSignal> {
        if signal.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: format!("{:?}", self.dims),
                found: format!("{:?}", signal.dims()),
            });
        }
        Ok(GridSignal::from_parts(self.dims.clone(), self.apply_values(signal.values())))
    }

    fn apply_values(&self, values: &[f64]) -> Vec<f64> {
        match &self.plan {
            Plan::Direct { tables, taps } => apply_direct(&self.dims, &self.kernel, tables, taps, values),
            Plan::Spectral {
                fft,
                spectrum,
                gather,
                scatter,
            } => {
                let mut buf: Vec<Complex64> = gather.par_iter().map(|&i| Complex64::new(values[i], 0.0)).collect();
                fft.forward(&mut buf);
                buf.par_iter_mut().zip(spectrum.par_iter()).for_each(|(z, s)| *z *= s);
                fft.inverse(&mut buf);
                scatter.par_iter().map(|&j| buf[j].re).collect()
            }
        }
    }
}

fn extend_index(x: isize, n: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Periodic => x.rem_euclid(n as isize) as usize,
        Boundary::Symmetric => {
            let j = x.rem_euclid(2 * n as isize) as usize;
            if j < n {
                j
            } else {
                2 * n - 1 - j
            }
        }
    }
}

fn direct_plan(dims: &[usize], kernel: &FilterKernel, boundary: Boundary, taps: Vec<(Vec<isize>, f64)>) -> Plan {
    let strides = strides(dims);
    let tables = dims
        .iter()
        .zip(kernel.radii())
        .zip(&strides)
        .map(|((&n, &r), &stride)| {
            let r = r as isize;
            (0..n as isize)
                .flat_map(|x| (-r..=r).map(move |t| extend_index(x + t, n, boundary) * stride))
                .collect()
        })
        .collect();
    let taps = taps
        .into_iter()
        .map(|(offset, w)| {
            let cols = offset
                .iter()
                .zip(kernel.radii())
                .map(|(&t, &r)| (t + r as isize) as usize)
                .collect();
            (cols, w)
        })
        .collect();
    Plan::Direct { tables, taps }
}

fn apply_direct(
    dims: &[usize],
    kernel: &FilterKernel,
    tables: &[Vec<usize>],
    taps: &[(Vec<usize>, f64)],
    values: &[f64],
) -> Vec<f64> {
    let k = dims.len();
    let last = dims[k - 1];
    let widths: Vec<usize> = kernel.shape();
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(last).enumerate().for_each(|(row, chunk)| {
        // Multi-index of the row over all axes but the last.
        let mut idx = vec![0usize; k];
        let mut rem = row;
        for a in (0..k - 1).rev() {
            idx[a] = rem % dims[a];
            rem /= dims[a];
        }
        for (x, slot) in chunk.iter_mut().enumerate() {
            idx[k - 1] = x;
            let mut acc = 0.0;
            for (cols, w) in taps {
                let mut src = 0;
                for a in 0..k {
                    src += tables[a][idx[a] * widths[a] + cols[a]];
                }
                acc += w * values[src];
            }
            *slot = acc;
        }
    });
    out
}

fn spectral_plan(
    dims: &[usize],
    periods: &[usize],
    boundary: Boundary,
    taps: Vec<(Vec<isize>, f64)>,
) -> Plan {
    let fft = NdFft::new(periods);
    let ext_volume = fft.len();

    let mut folded = vec![Complex64::default(); ext_volume];
    for (offset, w) in &taps {
        let mut flat = 0;
        for (&t, &p) in offset.iter().zip(periods) {
            flat = flat * p + t.rem_euclid(p as isize) as usize;
        }
        folded[flat].re += w;
    }
    fft.forward(&mut folded);
    // Correlation with a kernel that is symmetric per axis: the transform is
    // real and equals that of the convolution.
    let scale = 1.0 / ext_volume as f64;
    let spectrum = folded.into_iter().map(|z| z.re * scale).collect();

    let src_strides = strides(dims);
    let mut idx = vec![0usize; periods.len()];
    let gather = (0..ext_volume)
        .map(|_| {
            let src = idx
                .iter()
                .zip(dims)
                .zip(&src_strides)
                .map(|((&j, &n), &s)| extend_index(j as isize, n, boundary) * s)
                .sum();
            increment(&mut idx, periods);
            src
        })
        .collect();
    let ext_strides = strides(periods);
    let mut idx = vec![0usize; dims.len()];
    let scatter = (0..dims.iter().product::<usize>())
        .map(|_| {
            let j = idx.iter().zip(&ext_strides).map(|(&i, &s)| i * s).sum();
            increment(&mut idx, dims);
            j
        })
        .collect();
    Plan::Spectral {
        fft,
        spectrum,
        gather,
        scatter,
    }
}

/// `L f`, with the strategy chosen by cost.
pub fn moving_average(signal: &GridSignal, kernel: &FilterKernel, boundary: Boundary) -> Result<GridSignal> {
    MovingAverage::new(signal.dims(), kernel, boundary, ConvolutionStrategy::Auto)?.apply(signal)
}

/// `f - L f`.
pub fn fluctuation(signal: &GridSignal, kernel: &FilterKernel, boundary: Boundary) -> Result<GridSignal> {
    signal.sub(&moving_average(signal, kernel, boundary)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    /// Sifting stops once `||f_{n+1} - f_n|| / ||f_n||` falls below this.
    pub inner_delta: f64,
    pub max_inner_iters: usize,
    pub max_imfs: usize,
    /// The outer loop runs while the mean extrema count is at least this.
    pub outer_extrema_threshold: f64,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self {
            inner_delta: 0.01,
            max_inner_iters: 200,
            max_imfs: 20,
            outer_extrema_threshold: 2.0,
        }
    }
}

impl StopCriteria {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_delta > 0.0 && self.inner_delta < 1.0) {
            return Err(Error::InvalidInput(format!("inner_delta must lie in (0, 1), got {}", self.inner_delta)));
        }
        if self.max_inner_iters == 0 || self.max_imfs == 0 {
            return Err(Error::InvalidInput("iteration caps must be at least 1".into()));
        }
        if !self.outer_extrema_threshold.is_finite() {
            return Err(Error::InvalidInput("outer_extrema_threshold must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiftOutcome {
    pub imf: GridSignal,
    pub iterations: usize,
    pub final_delta: f64,
}

/// Runs the inner loop with a prepared operator.
pub fn sift_with(signal: &GridSignal, op: &MovingAverage, stop: &StopCriteria) -> Result<SiftOutcome> {
    stop.validate()?;
    if signal.dims() != op.dims() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", op.dims()),
            found: format!("{:?}", signal.dims()),
        });
    }
    let dims = signal.dims().to_vec();
    let mut f = signal.values().to_vec();
    let mut norm = l2_norm(&f);
    let len = f.len();
    let zero = |iterations, final_delta| SiftOutcome {
        imf: GridSignal::from_parts(dims.clone(), vec![0.0; len]),
        iterations,
        final_delta,
    };
    if norm == 0.0 {
        return Ok(zero(1, 0.0));
    }
    let mut delta = f64::INFINITY;
    for n in 1..=stop.max_inner_iters {
        let smooth = op.apply_values(&f);
        delta = l2_norm(&smooth) / norm;
        f.par_iter_mut().zip(smooth.par_iter()).for_each(|(a, b)| *a -= b);
        if delta < stop.inner_delta {
            return Ok(SiftOutcome {
                imf: GridSignal::from_parts(dims, f),
                iterations: n,
                final_delta: delta,
            });
        }
        norm = l2_norm(&f);
        if norm == 0.0 {
            return Ok(zero(n, delta));
        }
    }
    Ok(SiftOutcome {
        imf: GridSignal::from_parts(dims, f),
        iterations: stop.max_inner_iters,
        final_delta: delta,
    })
}

pub fn sift(signal: &GridSignal, kernel: &FilterKernel, stop: &StopCriteria, boundary: Boundary) -> Result<SiftOutcome> {
    let op = MovingAverage::new(signal.dims(), kernel, boundary, ConvolutionStrategy::Auto)?;
    sift_with(signal, &op, stop)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MifConfig {
    pub filter: FilterKind,
    pub support: SupportRule,
    pub stop: StopCriteria,
    pub boundary: Boundary,
    pub strategy: ConvolutionStrategy,
}

/// Metadata of one extracted IMF.
#[derive(Debug, Clone, PartialEq)]
pub struct ImfInfo {
    /// Support radii estimated from the residual.
    pub support_radii: Vec<usize>,
    /// Radii of the moving-average kernel actually applied.
    pub kernel_radii: Vec<usize>,
    pub iterations: usize,
    pub final_delta: f64,
    /// Extrema statistics of the residual the IMF was extracted from.
    pub extrema: ExtremaStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub imfs: Vec<GridSignal>,
    pub info: Vec<ImfInfo>,
    pub remainder: GridSignal,
}

/// Residuals below this fraction of the input are treated as zero.
const ZERO_RESIDUAL: f64 = 1e-14;

pub fn mif(signal: &GridSignal, config: &MifConfig) -> Result<Decomposition> {
    config.stop.validate()?;
    let base = config.filter.prepare()?;
    let dims = signal.dims().to_vec();
    let input_max = signal.max_abs();
    let mut residual = signal.clone();
    let mut imfs = Vec::new();
    let mut info = Vec::new();
    let mut operators: HashMap<Vec<usize>, MovingAverage> = HashMap::new();

    while imfs.len() < config.stop.max_imfs {
        if residual.max_abs() <= ZERO_RESIDUAL * input_max {
            break;
        }
        let extrema = extrema_stats(&residual);
        if extrema.total_mean < config.stop.outer_extrema_threshold {
            break;
        }
        let estimated = match estimate_support_radii(&residual, config.support.xi, config.support.spherical) {
            Ok(r) => r,
            Err(Error::TrendSignal) => break,
            Err(e) => return Err(e),
        };
        let support_radii: Vec<usize> = estimated
            .iter()
            .zip(&dims)
            .map(|(&r, &n)| r.min(max_support_radius(n, config.boundary)))
            .collect();
        if !operators.contains_key(&support_radii) {
            let kernel = smoothing_kernel(&base, &support_radii)?;
            let op = MovingAverage::new(&dims, &kernel, config.boundary, config.strategy)?;
            operators.insert(support_radii.clone(), op);
        }
        let op = &operators[&support_radii];
        let outcome = sift_with(&residual, op, &config.stop)?;
        debug!(
            "imf {}: support {:?}, {} iterations, delta {:e}",
            imfs.len() + 1,
            support_radii,
            outcome.iterations,
            outcome.final_delta
        );
        residual = residual.sub(&outcome.imf)?;
        info.push(ImfInfo {
            support_radii,
            kernel_radii: op.kernel().radii().to_vec(),
            iterations: outcome.iterations,
            final_delta: outcome.final_delta,
            extrema,
        });
        imfs.push(outcome.imf);
    }
    Ok(Decomposition {
        imfs,
        info,
        remainder: residual,
    })
}

/// The largest support radius whose moving-average kernel (twice as wide)
/// still fits the boundary policy.
fn max_support_radius(n: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Symmetric => n.max(1),
        Boundary::Periodic => ((n.saturating_sub(1)) / 4).max(1),
    }
}

/// Sum of all IMFs and the remainder.
pub fn reconstruct(dec: &Decomposition) -> Result<GridSignal> {
    let mut acc: Option<GridSignal> = None;
    for imf in &dec.imfs {
        acc = Some(match acc {
            None => imf.clone(),
            Some(a) => a.add(imf)?,
        });
    }
    match acc {
        None => Ok(dec.remainder.clone()),
        Some(a) => a.add(&dec.remainder),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{build_gfp, solve_fp_filter};
    use crate::grid::count_extrema;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn fp_kernel(radii: &[usize]) -> FilterKernel {
        let base = solve_fp_filter(101, 1.0, 1.0).unwrap();
        build_gfp(&base, radii).unwrap().self_correlate()
    }

    /// Real DFT of a symmetric kernel wrapped onto `n` samples at frequency
    /// `xi`, by direct summation.
    fn kernel_dft_1d(k: &FilterKernel, n: usize, xi: usize) -> f64 {
        k.nonzero()
            .iter()
            .map(|(t, w)| w * (2.0 * PI * (xi as f64) * t[0] as f64 / n as f64).cos())
            .sum()
    }

    fn cosine(n: usize, xi: usize) -> GridSignal {
        GridSignal::from_fn(vec![n], |i| (2.0 * PI * (xi * i[0]) as f64 / n as f64).cos()).unwrap()
    }

    fn max_diff(a: &GridSignal, b: &GridSignal) -> f64 {
        a.values().iter().zip(b.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    fn random_signal(rng: &mut ChaCha8Rng, dims: Vec<usize>) -> GridSignal {
        GridSignal::from_fn(dims, |_| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn constant_is_fixed_point() {
        let k = fp_kernel(&[3, 2]);
        for boundary in [Boundary::Periodic, Boundary::Symmetric] {
            let c = GridSignal::constant(vec![20, 17], 2.5).unwrap();
            let out = moving_average(&c, &k, boundary).unwrap();
            assert!(max_diff(&out, &c) < 1e-14);
            assert!(fluctuation(&c, &k, boundary).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn cosine_scaled_by_kernel_dft() {
        let n = 64;
        let k = fp_kernel(&[5]);
        for xi in [1, 3, 7, 16] {
            let w_hat = kernel_dft_1d(&k, n, xi);
            let f = cosine(n, xi);
            let l = moving_average(&f, &k, Boundary::Periodic).unwrap();
            let s = fluctuation(&f, &k, Boundary::Periodic).unwrap();
            for i in 0..n {
                assert!((l.values()[i] - w_hat * f.values()[i]).abs() < 1e-12);
                assert!((s.values()[i] - (1.0 - w_hat) * f.values()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn delta_reproduces_kernel() {
        let k = fp_kernel(&[2, 3]);
        let dims = vec![16, 20];
        let center = [7usize, 9usize];
        let f = GridSignal::from_fn(dims, |i| if i == center { 1.0 } else { 0.0 }).unwrap();
        for strategy in [ConvolutionStrategy::Direct, ConvolutionStrategy::Spectral] {
            let op = MovingAverage::new(f.dims(), &k, Boundary::Periodic, strategy).unwrap();
            let out = op.apply(&f).unwrap();
            for r in 0..16 {
                for c in 0..20 {
                    let t = [center[0] as isize - r as isize, center[1] as isize - c as isize];
                    let expected = k.weight(&t);
                    assert!((out.get(&[r, c]).unwrap() - expected).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn symmetric_boundary_matches_explicit_mirror() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_signal(&mut rng, vec![9, 6]);
        let k = fp_kernel(&[4, 5]);
        let mirror = |x: isize, n: isize| -> usize {
            let mut x = x;
            loop {
                if x < 0 {
                    x = -x - 1;
                } else if x >= n {
                    x = 2 * n - 1 - x;
                } else {
                    return x as usize;
                }
            }
        };
        let nz = k.nonzero();
        for strategy in [ConvolutionStrategy::Direct, ConvolutionStrategy::Spectral] {
            let op = MovingAverage::new(f.dims(), &k, Boundary::Symmetric, strategy).unwrap();
            let out = op.apply(&f).unwrap();
            for r in 0..9 {
                for c in 0..6 {
                    let expected: f64 = nz
                        .iter()
                        .map(|(t, w)| w * f.get(&[mirror(r as isize + t[0], 9), mirror(c as isize + t[1], 6)]).unwrap())
                        .sum();
                    assert!((out.get(&[r, c]).unwrap() - expected).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn periodic_rejects_large_kernel() {
        let k = fp_kernel(&[4]);
        let f = GridSignal::zeros(vec![16]).unwrap();
        assert!(matches!(
            moving_average(&f, &k, Boundary::Periodic),
            Err(Error::KernelTooLarge { axis: 0, kernel: 17, signal: 16 })
        ));
        assert!(moving_average(&f, &k, Boundary::Symmetric).is_ok());
        let g = GridSignal::zeros(vec![16, 16]).unwrap();
        assert!(matches!(moving_average(&g, &k, Boundary::Symmetric), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn translation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_signal(&mut rng, vec![24, 18]);
        let shifted = GridSignal::from_fn(vec![24, 18], |i| f.get(&[(i[0] + 5) % 24, (i[1] + 2) % 18]).unwrap()).unwrap();
        let k = fp_kernel(&[3, 4]);
        let a = moving_average(&f, &k, Boundary::Periodic).unwrap();
        let b = moving_average(&shifted, &k, Boundary::Periodic).unwrap();
        for r in 0..24 {
            for c in 0..18 {
                let x = a.get(&[(r + 5) % 24, (c + 2) % 18]).unwrap();
                assert!((x - b.get(&[r, c]).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sift_of_zero() {
        let k = fp_kernel(&[3]);
        let out = sift(&GridSignal::zeros(vec![32]).unwrap(), &k, &StopCriteria::default(), Boundary::Periodic).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.imf.max_abs(), 0.0);
    }

    #[test]
    fn sift_single_mode_ratio() {
        let n = 128;
        let xi = 6;
        let k = fp_kernel(&[6]);
        let w_hat = kernel_dft_1d(&k, n, xi);
        assert!(w_hat > 0.0 && w_hat < 1.0, "{w_hat}");
        let f = cosine(n, xi);
        for iters in 1..5 {
            let stop = StopCriteria {
                inner_delta: 1e-9,
                max_inner_iters: iters,
                ..StopCriteria::default()
            };
            let out = sift(&f, &k, &stop, Boundary::Periodic).unwrap();
            assert_eq!(out.iterations, iters);
            let ratio = (1.0 - w_hat).powi(iters as i32);
            for (a, b) in out.imf.values().iter().zip(f.values()) {
                assert!((a - ratio * b).abs() < 1e-12);
            }
            // Relative change of each step is the constant w_hat.
            assert!((out.final_delta - w_hat).abs() < 1e-12);
        }
    }

    #[test]
    fn sift_two_modes_keeps_fast_one() {
        let n = 256;
        let k = fp_kernel(&[10]);
        let (slow, fast) = (2, 40);
        let w_slow = kernel_dft_1d(&k, n, slow);
        let w_fast = kernel_dft_1d(&k, n, fast);
        assert!(w_slow > 0.9 && w_fast.abs() < 1e-2, "{w_slow} {w_fast}");
        let f = cosine(n, slow).add(&cosine(n, fast)).unwrap();
        let out = sift(&f, &k, &StopCriteria::default(), Boundary::Periodic).unwrap();
        // Per-mode recursion: after n steps each mode is scaled by (1 - w)^n.
        let it = out.iterations as i32;
        let expected = cosine(n, slow)
            .scale((1.0 - w_slow).powi(it))
            .unwrap()
            .add(&cosine(n, fast).scale((1.0 - w_fast).powi(it)).unwrap())
            .unwrap();
        assert!(max_diff(&out.imf, &expected) < 1e-10);
        assert!(max_diff(&out.imf, &cosine(n, fast)) < 0.05);
    }

    #[test]
    fn smooth_norm_non_increasing_during_sift() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_signal(&mut rng, vec![32, 32]);
        let op = MovingAverage::new(f.dims(), &fp_kernel(&[3, 3]), Boundary::Periodic, ConvolutionStrategy::Auto).unwrap();
        let mut g = f.clone();
        let mut last = f64::INFINITY;
        for _ in 0..20 {
            let l = op.apply(&g).unwrap();
            let norm = l.l2_norm();
            assert!(norm <= last * (1.0 + 1e-12));
            last = norm;
            g = g.sub(&l).unwrap();
        }
    }

    #[test]
    fn mif_of_constant() {
        let c = GridSignal::constant(vec![32, 32], 4.0).unwrap();
        let dec = mif(&c, &MifConfig::default()).unwrap();
        assert!(dec.imfs.is_empty());
        assert_eq!(dec.remainder, c);
        assert_eq!(reconstruct(&dec).unwrap(), c);
    }

    #[test]
    fn mif_single_sheet() {
        let n = 128;
        let f = GridSignal::from_fn(vec![n, n], |i| {
            (2.0 * PI * 3.0 * (i[0] as f64 + 0.5) / n as f64).cos() * (2.0 * PI * 2.0 * (i[1] as f64 + 0.5) / n as f64).cos()
        })
        .unwrap();
        assert!(extrema_stats(&f).total_mean >= 2.0);
        let dec = mif(&f, &MifConfig::default()).unwrap();
        assert!(!dec.imfs.is_empty());
        let lo = n / 10;
        let hi = n - lo;
        let (mut err, mut norm) = (0.0, 0.0);
        for r in lo..hi {
            for c in lo..hi {
                let d = dec.imfs[0].get(&[r, c]).unwrap() - f.get(&[r, c]).unwrap();
                err += d * d;
                norm += f.get(&[r, c]).unwrap().powi(2);
            }
        }
        assert!((err / norm).sqrt() < 0.1, "{}", (err / norm).sqrt());
    }

    #[test]
    fn mif_stops_on_extrema_threshold() {
        // A single bump: each lane has one extremum at most.
        let f = GridSignal::from_fn(vec![40], |i| (-(i[0] as f64 - 20.0).powi(2) / 30.0).exp()).unwrap();
        assert_eq!(count_extrema(f.values()), 1);
        let dec = mif(&f, &MifConfig::default()).unwrap();
        assert!(dec.imfs.is_empty());
    }

    #[test]
    fn mif_respects_imf_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_signal(&mut rng, vec![128]);
        let config = MifConfig {
            stop: StopCriteria { max_imfs: 2, ..StopCriteria::default() },
            ..MifConfig::default()
        };
        let dec = mif(&f, &config).unwrap();
        assert_eq!(dec.imfs.len(), 2);
        assert_eq!(dec.info.len(), 2);
        assert!(dec.info[0].support_radii[0] <= dec.info[1].support_radii[0]);
    }

    #[test]
    fn reconstruct_is_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_signal(&mut rng, vec![64]);
        let mut dec = mif(&f, &MifConfig::default()).unwrap();
        assert!(dec.imfs.len() >= 2);
        let a = reconstruct(&dec).unwrap();
        dec.imfs.reverse();
        let b = reconstruct(&dec).unwrap();
        assert!(max_diff(&a, &b) <= 1e-12 * f.max_abs());
        assert!(max_diff(&a, &f) <= 1e-12 * f.max_abs());
    }

    #[test]
    fn stop_criteria_validation() {
        assert!(StopCriteria::default().validate().is_ok());
        for bad in [
            StopCriteria { inner_delta: 0.0, ..Default::default() },
            StopCriteria { inner_delta: 1.0, ..Default::default() },
            StopCriteria { max_inner_iters: 0, ..Default::default() },
            StopCriteria { max_imfs: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn linearity(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_signal(&mut rng, vec![12, 15]);
            let g = random_signal(&mut rng, vec![12, 15]);
            let k = fp_kernel(&[2, 3]);
            for boundary in [Boundary::Periodic, Boundary::Symmetric] {
                let lhs = moving_average(&f.scale(a).unwrap().add(&g.scale(b).unwrap()).unwrap(), &k, boundary).unwrap();
                let rhs = moving_average(&f, &k, boundary).unwrap().scale(a).unwrap()
                    .add(&moving_average(&g, &k, boundary).unwrap().scale(b).unwrap()).unwrap();
                let scale = (a.abs() + b.abs()).max(1e-300);
                prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * scale);
            }
        }

        #[test]
        fn strategies_agree(seed in any::<u64>(), n0 in 5usize..20, n1 in 5usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_signal(&mut rng, vec![n0, n1]);
            let k = fp_kernel(&[(n0 - 1) / 4, (n1 - 1) / 4]);
            for boundary in [Boundary::Periodic, Boundary::Symmetric] {
                let d = MovingAverage::new(f.dims(), &k, boundary, ConvolutionStrategy::Direct).unwrap().apply(&f).unwrap();
                let s = MovingAverage::new(f.dims(), &k, boundary, ConvolutionStrategy::Spectral).unwrap().apply(&f).unwrap();
                prop_assert!(max_diff(&d, &s) < 1e-12);
            }
        }
    }
}
