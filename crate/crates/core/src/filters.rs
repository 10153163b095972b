//! Filter construction.
//!
//! A [`Filter1D`] is a compactly supported, nonnegative, symmetric profile on
//! `[-1, 1]` with unit trapezoidal mass. Two profiles are available: the
//! steady state of a Fokker-Planck equation ([`solve_fp_filter`]) and the
//! triangular double-average filter ([`double_average_filter`]).
//!
//! [`build_gfp`] lifts a profile to a k-dimensional kernel by evaluating it
//! at the ellipsoidal radius `rho(t) = sqrt(sum_a (t_a / r_a)^2)`, which gives
//! rotationally symmetric kernels for equal radii and ellipsoidal ones
//! otherwise. The lifted kernel of a smooth bump has negative spectral lobes,
//! so the moving average used by the decomposition is its self-correlation
//! ([`FilterKernel::self_correlate`]), whose periodic spectrum is `|V|^2`.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{extrema_stats, increment, GridSignal};
use crate::spectral::{fast_len, NdFft};

/// Tolerance on unit mass for profiles and kernels.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Filter1D {
    samples: Vec<f64>,
}

impl Filter1D {
    /// Validates a sampled profile and rescales it to unit trapezoidal mass.
    ///
    /// The profile must have odd length `>= 3`, be nonnegative, vanish at
    /// both endpoints and be exactly symmetric.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidInput(format!("profile length {n} must be odd and >= 3")));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(format!("profile sample {i} is negative or non-finite")));
        }
        if samples[0] != 0.0 || samples[n - 1] != 0.0 {
            return Err(Error::InvalidInput("profile must vanish at both endpoints".into()));
        }
        if (0..n / 2).any(|i| samples[i] != samples[n - 1 - i]) {
            return Err(Error::InvalidInput("profile is not symmetric".into()));
        }
        let mass = trapezoid(&samples);
        if mass <= 0.0 {
            return Err(Error::InvalidInput("profile has zero mass".into()));
        }
        for s in &mut samples {
            *s /= mass;
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing on `[-1, 1]`.
    pub fn step(&self) -> f64 {
        2.0 / (self.samples.len() - 1) as f64
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.samples)
    }

    /// Linear interpolation on the sample grid; zero outside `[-1, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        if !(-1.0..=1.0).contains(&x) {
            return 0.0;
        }
        let last = self.samples.len() - 1;
        let pos = (x + 1.0) * 0.5 * last as f64;
        let i = (pos.floor() as usize).min(last - 1);
        let frac = pos - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }

    /// Standard deviation of the profile viewed as a density.
    pub fn std_dev(&self) -> f64 {
        let h = self.step();
        let second: Vec<f64> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let x = -1.0 + i as f64 * h;
                s * x * x
            })
            .collect();
        trapezoid(&second).sqrt()
    }
}

fn trapezoid(samples: &[f64]) -> f64 {
    let n = samples.len();
    let h = 2.0 / (n - 1) as f64;
    let inner: f64 = samples.iter().sum::<f64>() - 0.5 * (samples[0] + samples[n - 1]);
    h * inner
}

/// Parameters of the Fokker-Planck profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpParams {
    /// Drift weight.
    pub alpha: f64,
    /// Diffusion weight.
    pub beta: f64,
    /// Odd number of samples on `[-1, 1]`, at least 33.
    pub grid_points: usize,
}

impl Default for FpParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            grid_points: 201,
        }
    }
}

const FP_MAX_STEPS: usize = 10_000;
const FP_TOLERANCE: f64 = 1e-12;
const FP_MAX_DT: f64 = 1e6;

/// Steady-state density of the Fokker-Planck evolution
///
/// ```text
/// dp/dt = -alpha d/dx (h p) + beta d/dx (g^2 dp/dx),   h(x) = -x,  g(x) = 1 - x^2
/// ```
///
/// on `[-1, 1]`, normalized to unit mass. The drift points inward and the
/// diffusion vanishes at the boundary, so the steady state is the smooth
/// bump `exp(-alpha / (2 beta (1 - x^2)))`, which is unimodal for every
/// positive `(alpha, beta)` and widens as `beta / alpha` grows.
///
/// The equation is discretized by conservative finite volumes with
/// exponentially fitted (Scharfetter-Gummel) fluxes on the interior nodes;
/// the endpoint samples are held at zero with no flux through the outer
/// half-cells. Time stepping is backward Euler starting from a uniform
/// density with a diffusive CFL step that doubles every step. The loop stops
/// once the relative L1 change per unit time drops below `1e-12`, or below
/// the round-off floor of the discrete operator when that is larger.
pub fn solve_fp_filter(grid_points: usize, alpha: f64, beta: f64) -> Result<Filter1D> {
    if grid_points < 33 || grid_points % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "grid_points must be odd and >= 33, got {grid_points}"
        )));
    }
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }

    let n = grid_points;
    let h = 2.0 / (n - 1) as f64;
    let m = n - 2;

    // Flux between interior unknowns j and j + 1 is
    // right[j] * p[j] - left[j] * p[j + 1].
    let mut right = vec![0.0; m - 1];
    let mut left = vec![0.0; m - 1];
    for j in 0..m - 1 {
        let x = -1.0 + (j as f64 + 1.5) * h;
        let g = 1.0 - x * x;
        let diffusion = beta * g * g;
        let peclet = -alpha * x * h / diffusion;
        right[j] = diffusion / h * bernoulli(-peclet);
        left[j] = diffusion / h * bernoulli(peclet);
    }
    // Tridiagonal generator A of dp/dt = A p.
    let lower: Vec<f64> = (0..m).map(|i| if i > 0 { right[i - 1] / h } else { 0.0 }).collect();
    let upper: Vec<f64> = (0..m).map(|i| if i + 1 < m { left[i] / h } else { 0.0 }).collect();
    let diag: Vec<f64> = (0..m)
        .map(|i| {
            let inflow = if i > 0 { left[i - 1] } else { 0.0 };
            let outflow = if i + 1 < m { right[i] } else { 0.0 };
            -(inflow + outflow) / h
        })
        .collect();
    let op_norm = diag.iter().fold(0.0f64, |acc, d| acc.max(2.0 * d.abs()));
    let tolerance = FP_TOLERANCE.max(64.0 * f64::EPSILON * op_norm);

    let mut p = vec![1.0 / (m as f64 * h); m];
    let mut dt = h * h / (2.0 * beta);
    let mut rate = f64::INFINITY;
    let mut converged = false;
    let mut steps = 0;
    while steps < FP_MAX_STEPS {
        steps += 1;
        let sub: Vec<f64> = lower.iter().map(|v| -dt * v).collect();
        let sup: Vec<f64> = upper.iter().map(|v| -dt * v).collect();
        let main: Vec<f64> = diag.iter().map(|v| 1.0 - dt * v).collect();
        let mut next = solve_tridiagonal(&sub, &main, &sup, &p);
        for v in &mut next {
            *v = v.max(0.0);
        }
        let mass: f64 = p.iter().sum();
        let change: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        rate = change / (dt * mass);
        let next_mass: f64 = next.iter().sum();
        let scale = 1.0 / (next_mass * h);
        p = next.into_iter().map(|v| v * scale).collect();
        if rate < tolerance {
            converged = true;
            break;
        }
        dt = (2.0 * dt).min(FP_MAX_DT);
    }
    if !converged {
        return Err(Error::NonConvergence { steps, residual: rate });
    }

    let mut samples = Vec::with_capacity(n);
    samples.push(0.0);
    samples.extend_from_slice(&p);
    samples.push(0.0);
    for i in 0..n / 2 {
        let mean = 0.5 * (samples[i] + samples[n - 1 - i]);
        samples[i] = mean;
        samples[n - 1 - i] = mean;
    }
    Filter1D::new(samples)
}

/// `z / (exp(z) - 1)`, continuous at zero.
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-10 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// Thomas algorithm; stable here because the matrix is column diagonally
/// dominant.
fn solve_tridiagonal(sub: &[f64], main: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = main.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / main[0];
    d[0] = rhs[0] / main[0];
    for i in 1..n {
        let denom = main[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Triangular profile on `2 * half_width + 1` samples: the self-convolution
/// of a uniform filter.
pub fn double_average_filter(half_width_samples: usize) -> Result<Filter1D> {
    if half_width_samples == 0 {
        return Err(Error::InvalidInput("half width must be at least 1".into()));
    }
    let m = half_width_samples as i64;
    Filter1D::new((0..=2 * m).map(|i| (m - (i - m).abs()) as f64).collect())
}

/// A k-dimensional kernel on the box `[-r_a, r_a]` per axis.
///
/// Invariants: nonnegative weights summing to one, zero outside the
/// ellipsoid with semi-axes `radii`, and symmetric under reflection of any
/// single axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterKernel {
    radii: Vec<usize>,
    weights: Vec<f64>,
}

impl FilterKernel {
    pub fn from_weights(radii: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.contains(&0) {
            return Err(Error::InvalidInput(format!("kernel radii must be positive, got {radii:?}")));
        }
        let shape: Vec<usize> = radii.iter().map(|r| 2 * r + 1).collect();
        let volume: usize = shape.iter().product();
        if weights.len() != volume {
            return Err(Error::DimensionMismatch {
                expected: format!("{volume} weights"),
                found: format!("{}", weights.len()),
            });
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput(format!("weight {i} is negative or non-finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidInput(format!("weights sum to {sum}, expected 1")));
        }
        let kernel = Self { radii, weights };
        let radii_f: Vec<f64> = kernel.radii.iter().map(|&r| r as f64).collect();
        for (i, offset) in kernel.offsets().enumerate() {
            let w = kernel.weights[i];
            if w != 0.0 && rho_squared(&offset, &radii_f) > 1.0 {
                return Err(Error::InvalidInput(format!("nonzero weight outside support at {offset:?}")));
            }
            for a in 0..offset.len() {
                let mut mirrored = offset.clone();
                mirrored[a] = -mirrored[a];
                if kernel.weight(&mirrored) != w {
                    return Err(Error::InvalidInput(format!("kernel not symmetric at {offset:?}")));
                }
            }
        }
        Ok(kernel)
    }

    pub fn radii(&self) -> &[usize] {
        &self.radii
    }

    pub fn ndim(&self) -> usize {
        self.radii.len()
    }

    /// Box extents `2 r_a + 1`.
    pub fn shape(&self) -> Vec<usize> {
        self.radii.iter().map(|r| 2 * r + 1).collect()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at a signed offset; zero outside the box.
    pub fn weight(&self, offset: &[isize]) -> f64 {
        let mut flat = 0usize;
        for (&t, &r) in offset.iter().zip(&self.radii) {
            let r = r as isize;
            if t < -r || t > r {
                return 0.0;
            }
            flat = flat * (2 * r as usize + 1) + (t + r) as usize;
        }
        self.weights[flat]
    }

    /// Signed offsets of every box cell, row-major.
    pub fn offsets(&self) -> impl Iterator<Item = Vec<isize>> + '_ {
        let shape = self.shape();
        let volume: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        (0..volume).map(move |_| {
            let offset = idx
                .iter()
                .zip(&self.radii)
                .map(|(&i, &r)| i as isize - r as isize)
                .collect();
            increment(&mut idx, &shape);
            offset
        })
    }

    /// Nonzero cells as `(offset, weight)`, row-major.
    pub fn nonzero(&self) -> Vec<(Vec<isize>, f64)> {
        self.offsets()
            .zip(&self.weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(o, &w)| (o, w))
            .collect()
    }

    pub fn to_grid(&self) -> GridSignal {
        GridSignal::from_parts(self.shape(), self.weights.clone())
    }

    /// The autocorrelation `w(t) = sum_s v(s) v(s + t)`, a kernel with twice
    /// the radii whose periodic spectrum is `|V|^2`.
    pub fn self_correlate(&self) -> FilterKernel {
        let out_radii: Vec<usize> = self.radii.iter().map(|r| 2 * r).collect();
        let nonzero = self.nonzero();
        let raw = if nonzero.len() <= 3000 {
            self.autocorrelation_direct(&nonzero, &out_radii)
        } else {
            self.autocorrelation_fft(&out_radii)
        };
        finish_kernel(out_radii, raw)
    }

    fn autocorrelation_direct(&self, nonzero: &[(Vec<isize>, f64)], out_radii: &[usize]) -> Vec<f64> {
        let shape: Vec<usize> = out_radii.iter().map(|r| 2 * r + 1).collect();
        let mut out = vec![0.0; shape.iter().product()];
        for (s, vs) in nonzero {
            for (u, vu) in nonzero {
                let mut flat = 0;
                for a in 0..s.len() {
                    flat = flat * shape[a] + (u[a] - s[a] + out_radii[a] as isize) as usize;
                }
                out[flat] += vs * vu;
            }
        }
        out
    }

    fn autocorrelation_fft(&self, out_radii: &[usize]) -> Vec<f64> {
        let lens: Vec<usize> = out_radii.iter().map(|r| fast_len(2 * r + 1)).collect();
        let fft = NdFft::new(&lens);
        let mut buf = vec![Complex64::default(); fft.len()];
        for (offset, w) in self.nonzero() {
            buf[wrapped_index(&offset, &lens)] = Complex64::new(w, 0.0);
        }
        fft.forward(&mut buf);
        buf.par_iter_mut().for_each(|z| *z = Complex64::new(z.norm_sqr(), 0.0));
        fft.inverse(&mut buf);
        let scale = 1.0 / fft.len() as f64;
        let shape: Vec<usize> = out_radii.iter().map(|r| 2 * r + 1).collect();
        let mut idx = vec![0usize; shape.len()];
        (0..shape.iter().product::<usize>())
            .map(|_| {
                let offset: Vec<isize> = idx
                    .iter()
                    .zip(out_radii)
                    .map(|(&i, &r)| i as isize - r as isize)
                    .collect();
                increment(&mut idx, &shape);
                buf[wrapped_index(&offset, &lens)].re * scale
            })
            .collect()
    }
}

/// Clips round-off negatives, zeroes cells outside the ellipsoid, enforces
/// exact per-axis reflection symmetry and renormalizes.
fn finish_kernel(radii: Vec<usize>, raw: Vec<f64>) -> FilterKernel {
    let shape: Vec<usize> = radii.iter().map(|r| 2 * r + 1).collect();
    let radii_f: Vec<f64> = radii.iter().map(|&r| r as f64).collect();
    let mut weights = vec![0.0; raw.len()];
    let mut idx = vec![0usize; shape.len()];
    for w in weights.iter_mut() {
        let offset: Vec<isize> = idx
            .iter()
            .zip(&radii)
            .map(|(&i, &r)| i as isize - r as isize)
            .collect();
        if rho_squared(&offset, &radii_f) <= 1.0 {
            // canonical representative: all offsets nonnegative
            let mut flat = 0;
            for a in 0..shape.len() {
                flat = flat * shape[a] + (offset[a].unsigned_abs() + radii[a]);
            }
            *w = raw[flat].max(0.0);
        }
        increment(&mut idx, &shape);
    }
    normalize(&mut weights);
    FilterKernel { radii, weights }
}

fn normalize(weights: &mut [f64]) {
    let sum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= sum;
    }
}

fn rho_squared(offset: &[isize], radii: &[f64]) -> f64 {
    offset
        .iter()
        .zip(radii)
        .map(|(&t, &r)| {
            let u = t as f64 / r;
            u * u
        })
        .sum()
}

fn wrapped_index(offset: &[isize], lens: &[usize]) -> usize {
    let mut flat = 0;
    for (&t, &n) in offset.iter().zip(lens) {
        flat = flat * n + t.rem_euclid(n as isize) as usize;
    }
    flat
}

/// Lifts `base` to k dimensions: `w(t) = base(rho(t))` for `rho(t) <= 1`,
/// zero elsewhere, normalized to unit sum.
pub fn build_gfp(base: &Filter1D, radii: &[usize]) -> Result<FilterKernel> {
    lift(radii, |rho| base.eval(rho))
}

/// Uniform weights on the ellipsoid with semi-axes `radii`.
pub fn ellipsoid_average(radii: &[usize]) -> Result<FilterKernel> {
    lift(radii, |_| 1.0)
}

fn lift(radii: &[usize], profile: impl Fn(f64) -> f64) -> Result<FilterKernel> {
    if radii.is_empty() {
        return Err(Error::InvalidInput("kernel needs at least one axis".into()));
    }
    if radii.contains(&0) {
        return Err(Error::InvalidInput(format!("degenerate radius 0 in {radii:?}")));
    }
    let radii = radii.to_vec();
    let radii_f: Vec<f64> = radii.iter().map(|&r| r as f64).collect();
    let shape: Vec<usize> = radii.iter().map(|r| 2 * r + 1).collect();
    let mut idx = vec![0usize; shape.len()];
    let mut weights: Vec<f64> = (0..shape.iter().product::<usize>())
        .map(|_| {
            let offset: Vec<isize> = idx
                .iter()
                .zip(&radii)
                .map(|(&i, &r)| i as isize - r as isize)
                .collect();
            increment(&mut idx, &shape);
            let rho2 = rho_squared(&offset, &radii_f);
            if rho2 <= 1.0 {
                profile(rho2.sqrt())
            } else {
                0.0
            }
        })
        .collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidInput(format!("profile vanishes on the grid for radii {radii:?}")));
    }
    normalize(&mut weights);
    Ok(FilterKernel { radii, weights })
}

/// Which 1D shape the moving-average kernel is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    FokkerPlanck(FpParams),
    /// Uniform average over the ellipsoid, applied twice.
    DoubleAverage,
}

impl Default for FilterKind {
    fn default() -> Self {
        FilterKind::FokkerPlanck(FpParams::default())
    }
}

/// A prepared filter shape, ready to be scaled to any support.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseShape {
    Profile(Filter1D),
    Flat,
}

impl FilterKind {
    pub fn prepare(&self) -> Result<BaseShape> {
        match self {
            FilterKind::FokkerPlanck(p) => {
                Ok(BaseShape::Profile(solve_fp_filter(p.grid_points, p.alpha, p.beta)?))
            }
            FilterKind::DoubleAverage => Ok(BaseShape::Flat),
        }
    }
}

/// The moving-average kernel for a support estimate: the shape lifted to
/// `support_radii` and correlated with itself, so the result has radii
/// `2 * support_radii`.
///
/// A profile vanishing at its endpoints lifted to radius 1 is a unit
/// impulse, so profile radii are raised to at least 2.
pub fn smoothing_kernel(base: &BaseShape, support_radii: &[usize]) -> Result<FilterKernel> {
    let single = match base {
        BaseShape::Profile(profile) => {
            let radii: Vec<usize> = support_radii.iter().map(|&r| r.max(2)).collect();
            build_gfp(profile, &radii)?
        }
        BaseShape::Flat => ellipsoid_average(support_radii)?,
    };
    Ok(single.self_correlate())
}

/// Support selection rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportRule {
    /// Multiplier applied to the mean spacing between extrema.
    pub xi: f64,
    /// Replace per-axis radii by their rounded mean.
    pub spherical: bool,
}

impl Default for SupportRule {
    fn default() -> Self {
        Self {
            xi: 1.6,
            spherical: false,
        }
    }
}

/// Per-axis support radii from the mean extrema count along each axis.
///
/// For an axis with `m_a > 0` mean extrema, `radius_a = max(1, round(xi *
/// dims[a] / m_a))`. Axes without extrema take the largest radius of the
/// oscillating axes. Fails with [`Error::TrendSignal`] when no axis
/// oscillates.
pub fn estimate_support_radii(signal: &GridSignal, xi: f64, spherical: bool) -> Result<Vec<usize>> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::InvalidInput(format!("xi must be positive, got {xi}")));
    }
    let stats = extrema_stats(signal);
    let raw: Vec<Option<f64>> = stats
        .per_axis_mean_count
        .iter()
        .zip(signal.dims())
        .map(|(&m, &d)| (m > 0.0).then(|| xi * d as f64 / m))
        .collect();
    let fallback = raw
        .iter()
        .flatten()
        .copied()
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
        .ok_or(Error::TrendSignal)?;
    let real: Vec<f64> = raw.iter().map(|r| r.unwrap_or(fallback)).collect();
    let to_radius = |r: f64| (r.round() as usize).max(1);
    if spherical {
        let mean = real.iter().sum::<f64>() / real.len() as f64;
        Ok(vec![to_radius(mean); real.len()])
    } else {
        Ok(real.into_iter().map(to_radius).collect())
    }
}

/// Eigenvalues of the periodic moving-average operator on a grid of `dims`:
/// the real DFT of the kernel wrapped onto that grid, row-major by
/// frequency.
pub fn periodic_spectrum(kernel: &FilterKernel, dims: &[usize]) -> Result<Vec<f64>> {
    if dims.len() != kernel.ndim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} axes", kernel.ndim()),
            found: format!("{} axes", dims.len()),
        });
    }
    for (axis, (&n, e)) in dims.iter().zip(kernel.shape()).enumerate() {
        if e > n {
            return Err(Error::KernelTooLarge { axis, kernel: e, signal: n });
        }
    }
    let fft = NdFft::new(dims);
    let mut buf = vec![Complex64::default(); fft.len()];
    for (offset, w) in kernel.nonzero() {
        buf[wrapped_index(&offset, dims)] += Complex64::new(w, 0.0);
    }
    fft.forward(&mut buf);
    Ok(buf.into_iter().map(|z| z.re).collect())
}

/// `(min, max)` of [`periodic_spectrum`].
pub fn spectrum_bounds(kernel: &FilterKernel, dims: &[usize]) -> Result<(f64, f64)> {
    let spec = periodic_spectrum(kernel, dims)?;
    Ok(spec
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))))
}
