//! Synthetic test signals with known components.
//!
//! Every generator returns the mixture together with its ground truth, and
//! the mixture is the exact floating-point sum of the components.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::GridSignal;
use crate::hyperspectral::{HyperCube, TargetSignature};

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub mixture: GridSignal,
    /// Ordered from the fastest oscillation to the slowest.
    pub components: Vec<GridSignal>,
}

fn check_size(size: usize) -> Result<()> {
    if size < 64 {
        return Err(Error::InvalidInput(format!("synthetic grids need size >= 64, got {size}")));
    }
    Ok(())
}

fn mix(components: Vec<GridSignal>) -> Result<Synthetic> {
    let mut mixture = components[0].clone();
    for c in &components[1..] {
        mixture = mixture.add(c)?;
    }
    Ok(Synthetic { mixture, components })
}

/// Two damped tones travelling along the diagonal.
///
/// With `x = col / n`, `y = (n - 1 - row) / n` and `s = x + y`:
///
/// ```text
/// high = (1 + s/2) exp(-0.3 s) sin(2 pi 8 s)
/// low  = 2 exp(-0.4 s) sin(2 pi 1.5 s)
/// ```
pub fn example1(size: usize) -> Result<Synthetic> {
    check_size(size)?;
    let n = size as f64;
    let s = |i: &[usize]| i[1] as f64 / n + (n - 1.0 - i[0] as f64) / n;
    let high = GridSignal::from_fn(vec![size, size], |i| {
        let s = s(i);
        (1.0 + 0.5 * s) * (-0.3 * s).exp() * (2.0 * PI * 8.0 * s).sin()
    })?;
    let low = GridSignal::from_fn(vec![size, size], |i| {
        let s = s(i);
        2.0 * (-0.4 * s).exp() * (2.0 * PI * 1.5 * s).sin()
    })?;
    mix(vec![high, low])
}

/// Triangle wave with period 1 and range `[-1, 1]`.
fn triangle(p: f64) -> f64 {
    2.0 * (2.0 * (p - (p + 0.5).floor())).abs() - 1.0
}

/// A chirped triangle wave plus a smooth plane wave.
///
/// With `x = row / n`, `y = col / n` and `u = x + y / 2`:
///
/// ```text
/// rough  = tri(12 u + 2 u^2) (1 + 0.3 y)
/// smooth = 1.5 sin(2 pi 1.5 (0.6 x + 0.8 y))
/// ```
pub fn example2(size: usize) -> Result<Synthetic> {
    check_size(size)?;
    let n = size as f64;
    let rough = GridSignal::from_fn(vec![size, size], |i| {
        let (x, y) = (i[0] as f64 / n, i[1] as f64 / n);
        let u = x + 0.5 * y;
        triangle(12.0 * u + 2.0 * u * u) * (1.0 + 0.3 * y)
    })?;
    let smooth = GridSignal::from_fn(vec![size, size], |i| {
        let (x, y) = (i[0] as f64 / n, i[1] as f64 / n);
        1.5 * (2.0 * PI * 1.5 * (0.6 * x + 0.8 * y)).sin()
    })?;
    mix(vec![rough, smooth])
}

pub const CUBE_SIZE: usize = 64;
pub const CUBE_CHANNELS: usize = 16;
pub const CUBE_SPIKES: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCube {
    pub cube: HyperCube,
    pub target: TargetSignature,
    /// Pixels carrying the full target signature.
    pub block: Vec<(usize, usize)>,
    /// Single pixels carrying a partial target signature.
    pub spikes: Vec<(usize, usize)>,
}

/// A 64x64x16 scene: a spatially modulated background spectrum, a second
/// weaker spectral pattern, Gaussian noise, a 4x4 block of target pixels
/// and 30 isolated pixels with a fraction of the target added.
pub fn synthetic_cube(seed: u64) -> Result<SyntheticCube> {
    let (n, d) = (CUBE_SIZE, CUBE_CHANNELS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.03).expect("valid normal");

    let lambda: Vec<f64> = (0..d).map(|c| c as f64).collect();
    let background: Vec<f64> = lambda.iter().map(|l| 1.0 + 0.5 * (0.4 * l).sin()).collect();
    let secondary: Vec<f64> = lambda.iter().map(|l| (0.9 * l).cos()).collect();
    let target: Vec<f64> = lambda.iter().map(|l| (-0.5 * ((l - 8.0) / 1.5).powi(2)).exp()).collect();

    let mut values = Vec::with_capacity(n * n * d);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
            let a = 0.6 + 0.4 * (2.0 * PI * (0.7 * x + 0.4 * y)).sin();
            let g = 0.2 * (2.0 * PI * (0.3 * x - 0.9 * y)).cos();
            for c in 0..d {
                values.push(a * background[c] + g * secondary[c] + noise.sample(&mut rng));
            }
        }
    }

    let block: Vec<(usize, usize)> = (30..34).flat_map(|i| (40..44).map(move |j| (i, j))).collect();
    for &(i, j) in &block {
        for c in 0..d {
            values[(i * n + j) * d + c] += target[c];
        }
    }

    let near_block = |i: usize, j: usize| (i as f64 - 31.5).abs() < 6.0 && (j as f64 - 41.5).abs() < 6.0;
    let mut spikes: Vec<(usize, usize)> = Vec::with_capacity(CUBE_SPIKES);
    while spikes.len() < CUBE_SPIKES {
        let i = rng.random_range(2..n - 2);
        let j = rng.random_range(2..n - 2);
        if near_block(i, j) || spikes.iter().any(|&(p, q)| p.abs_diff(i) < 3 && q.abs_diff(j) < 3) {
            continue;
        }
        spikes.push((i, j));
    }
    for &(i, j) in &spikes {
        let strength = rng.random_range(0.3..1.0);
        for c in 0..d {
            values[(i * n + j) * d + c] += strength * target[c];
        }
    }

    Ok(SyntheticCube {
        cube: HyperCube::new(n, n, d, values)?,
        target: TargetSignature::new(target)?,
        block,
        spikes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixtures_are_exact_sums() {
        for ex in [example1(64).unwrap(), example2(64).unwrap()] {
            assert_eq!(ex.components.len(), 2);
            let sum = ex.components[0].add(&ex.components[1]).unwrap();
            assert_eq!(sum, ex.mixture);
        }
    }

    #[test]
    fn small_sizes_rejected() {
        assert!(example1(63).is_err());
        assert!(example2(10).is_err());
    }

    #[test]
    fn triangle_wave_values() {
        assert_eq!(triangle(0.0), -1.0);
        assert_eq!(triangle(0.5), 1.0);
        assert_eq!(triangle(0.25), 0.0);
        assert_eq!(triangle(1.75), 0.0);
    }

    /// Largest absolute second difference along rows, normalized by the
    /// largest first difference.
    fn kink_ratio(g: &GridSignal) -> f64 {
        let n = g.dims()[1];
        let (mut d1, mut d2) = (0.0f64, 0.0f64);
        for r in 0..g.dims()[0] {
            let row = g.slice_1d(1, &[r]).unwrap();
            for c in 1..n - 1 {
                d1 = d1.max((row[c + 1] - row[c]).abs());
                d2 = d2.max((row[c + 1] - 2.0 * row[c] + row[c - 1]).abs());
            }
        }
        d2 / d1
    }

    #[test]
    fn rough_component_has_kinks() {
        let ex = example2(256).unwrap();
        let rough = kink_ratio(&ex.components[0]);
        let smooth = kink_ratio(&ex.components[1]);
        assert!(rough > 1.0, "{rough}");
        assert!(smooth < 0.1, "{smooth}");
    }

    #[test]
    fn cube_is_deterministic() {
        let a = synthetic_cube(5).unwrap();
        let b = synthetic_cube(5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.cube, synthetic_cube(6).unwrap().cube);
        assert_eq!(a.block.len(), 16);
        assert_eq!(a.spikes.len(), CUBE_SPIKES);
    }
}
