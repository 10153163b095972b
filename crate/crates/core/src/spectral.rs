//! Multidimensional complex FFT over row-major buffers.
//!
//! Each axis is transformed by gathering its lanes into a contiguous scratch
//! buffer, running the 1D plans in parallel and scattering back. Results do
//! not depend on the thread count.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Target number of complex values handed to one rayon task.
const TASK_VALUES: usize = 1 << 13;

pub(crate) struct NdFft {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl NdFft {
    pub fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dims: dims.to_vec(),
            forward: dims.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized inverse transform.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len());
        let mut scratch = Vec::new();
        for (axis, plan) in plans.iter().enumerate() {
            transform_axis(data, &self.dims, axis, plan.as_ref(), &mut scratch);
        }
    }
}

fn transform_axis(
    data: &mut [Complex64],
    dims: &[usize],
    axis: usize,
    plan: &dyn Fft<f64>,
    scratch: &mut Vec<Complex64>,
) {
    let n = dims[axis];
    if n == 1 {
        return;
    }
    let inner: usize = dims[axis + 1..].iter().product();
    let lines_per_task = (TASK_VALUES / n).max(1);
    if inner == 1 {
        data.par_chunks_mut(n * lines_per_task)
            .for_each(|chunk| plan.process(chunk));
        return;
    }
    scratch.resize(data.len(), Complex64::default());
    {
        let src: &[Complex64] = data;
        scratch
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(line, out)| {
                let base = (line / inner) * n * inner + line % inner;
                for (i, slot) in out.iter_mut().enumerate() {
                    *slot = src[base + i * inner];
                }
            });
    }
    scratch
        .par_chunks_mut(n * lines_per_task)
        .for_each(|chunk| plan.process(chunk));
    let src: &[Complex64] = scratch;
    data.par_chunks_mut(inner)
        .enumerate()
        .for_each(|(row, out)| {
            let (o, i) = (row / n, row % n);
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = src[(o * inner + j) * n + i];
            }
        });
}

/// Smallest integer `>= n` whose only prime factors are 2, 3 and 5.
pub(crate) fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}
