//! Dense k-dimensional real signals.
//!
//! [`GridSignal`] is the container for the input signal, every IMF and the
//! remainder. Values are stored row-major (last axis fastest) and are always
//! finite. The module also provides 1D slicing and the slice-based extrema
//! statistics that drive support selection and the outer-loop stopping rule.

mod io;

pub use io::{decode_native, encode_native, load_grid, parse_csv, save_grid, to_csv, GridFormat};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl GridSignal {
    /// Builds a signal, validating the shape and that every value is finite.
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected = checked_volume(&dims)?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected: format!("{expected} values for dims {dims:?}"),
                found: format!("{} values", values.len()),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let n = checked_volume(&dims)?;
        Ok(Self {
            dims,
            values: vec![0.0; n],
        })
    }

    pub fn constant(dims: Vec<usize>, value: f64) -> Result<Self> {
        let n = checked_volume(&dims)?;
        Self::new(dims, vec![value; n])
    }

    /// Samples `f` at every multi-index, in row-major order.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let n = checked_volume(&dims)?;
        let mut values = Vec::with_capacity(n);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..n {
            values.push(f(&idx));
            increment(&mut idx, &dims);
        }
        Self::new(dims, values)
    }

    /// Internal constructor for values produced by finite arithmetic on
    /// already validated signals.
    pub(crate) fn from_parts(dims: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), dims.iter().product::<usize>());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { dims, values }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    pub fn flat_index(&self, index: &[usize]) -> Option<usize> {
        if index.len() != self.dims.len() {
            return None;
        }
        let mut flat = 0;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i >= d {
                return None;
            }
            flat = flat * d + i;
        }
        Some(flat)
    }

    pub fn get(&self, index: &[usize]) -> Option<f64> {
        self.flat_index(index).map(|i| self.values[i])
    }

    pub fn same_shape(&self, other: &GridSignal) -> bool {
        self.dims == other.dims
    }

    fn check_shape(&self, other: &GridSignal) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: format!("{:?}", self.dims),
                found: format!("{:?}", other.dims),
            })
        }
    }

    /// Element-wise `self + other`.
    pub fn add(&self, other: &GridSignal) -> Result<GridSignal> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &GridSignal) -> Result<GridSignal> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Result<GridSignal> {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridSignal> {
        GridSignal::new(self.dims.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &GridSignal, f: impl Fn(f64, f64) -> f64) -> Result<GridSignal> {
        self.check_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        GridSignal::new(self.dims.clone(), values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.values)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Copies the 1D slice running along `axis`, with the remaining axes held
    /// at `fixed` (given in axis order, skipping `axis`).
    pub fn slice_1d(&self, axis: usize, fixed: &[usize]) -> Result<Vec<f64>> {
        let k = self.ndim();
        if axis >= k {
            return Err(Error::OutOfRange(format!("axis {axis} for a {k}-d signal")));
        }
        if fixed.len() != k - 1 {
            return Err(Error::OutOfRange(format!(
                "expected {} fixed indices, got {}",
                k - 1,
                fixed.len()
            )));
        }
        let mut index = Vec::with_capacity(k);
        let mut rest = fixed.iter();
        for a in 0..k {
            if a == axis {
                index.push(0);
            } else {
                let &i = rest.next().expect("length checked");
                if i >= self.dims[a] {
                    return Err(Error::OutOfRange(format!(
                        "index {i} on axis {a} with extent {}",
                        self.dims[a]
                    )));
                }
                index.push(i);
            }
        }
        let start = self.flat_index(&index).expect("validated");
        let stride = self.strides()[axis];
        Ok((0..self.dims[axis])
            .map(|i| self.values[start + i * stride])
            .collect())
    }

    /// Cells `(i, n-1-i)` of a square 2D grid, top-right to bottom-left.
    pub fn anti_diagonal(&self) -> Result<Vec<f64>> {
        match self.dims.as_slice() {
            &[rows, cols] if rows == cols => Ok((0..rows)
                .map(|i| self.values[i * cols + (cols - 1 - i)])
                .collect()),
            _ => Err(Error::InvalidInput(format!(
                "anti-diagonal needs a square 2D grid, got dims {:?}",
                self.dims
            ))),
        }
    }

    /// Calls `f` once for every 1D lane along `axis`, in row-major order of
    /// the remaining axes.
    pub fn for_each_lane(&self, axis: usize, mut f: impl FnMut(&[f64])) {
        let n = self.dims[axis];
        let inner: usize = self.dims[axis + 1..].iter().product();
        let outer: usize = self.dims[..axis].iter().product();
        let mut lane = vec![0.0; n];
        for o in 0..outer {
            let base = o * n * inner;
            for j in 0..inner {
                for (i, slot) in lane.iter_mut().enumerate() {
                    *slot = self.values[base + j + i * inner];
                }
                f(&lane);
            }
        }
    }
}

/// Mean strict-extrema counts over all 1D slices, per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaStats {
    pub per_axis_mean_count: Vec<f64>,
    pub total_mean: f64,
}

/// Counts strict interior local extrema of a sequence.
///
/// Runs of equal values are collapsed to a single sample first, so a plateau
/// maximum counts once. Endpoints never count.
pub fn count_extrema(series: &[f64]) -> usize {
    let mut count = 0;
    // Sign of the last nonzero step.
    let mut last_step = 0i8;
    for pair in series.windows(2) {
        let step = if pair[1] > pair[0] {
            1
        } else if pair[1] < pair[0] {
            -1
        } else {
            continue;
        };
        if last_step != 0 && step != last_step {
            count += 1;
        }
        last_step = step;
    }
    count
}

pub fn extrema_stats(signal: &GridSignal) -> ExtremaStats {
    let k = signal.ndim();
    let per_axis_mean_count: Vec<f64> = (0..k)
        .map(|axis| {
            let mut total = 0usize;
            let mut lanes = 0usize;
            signal.for_each_lane(axis, |lane| {
                total += count_extrema(lane);
                lanes += 1;
            });
            total as f64 / lanes as f64
        })
        .collect();
    let total_mean = per_axis_mean_count.iter().sum::<f64>() / k as f64;
    ExtremaStats {
        per_axis_mean_count,
        total_mean,
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * dims[a + 1];
    }
    strides
}

/// Advances a row-major multi-index; wraps to all zeros after the last cell.
pub(crate) fn increment(idx: &mut [usize], dims: &[usize]) {
    for a in (0..dims.len()).rev() {
        idx[a] += 1;
        if idx[a] < dims[a] {
            return;
        }
        idx[a] = 0;
    }
}

pub(crate) fn l2_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn checked_volume(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidInput("signal needs at least one axis".into()));
    }
    if let Some(a) = dims.iter().position(|&d| d == 0) {
        return Err(Error::InvalidInput(format!("axis {a} has zero extent")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidInput(format!("dims {dims:?} overflow")))
}
