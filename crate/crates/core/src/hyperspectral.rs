//! Hyperspectral target detection with the adaptive coherence estimator.
//!
//! For pixel signature `s`, target `t` and background covariance `S`:
//!
//! ```text
//! ace(s) = (s' S^-1 t)^2 / ((t' S^-1 t) (s' S^-1 s))
//! ```
//!
//! `S` is factored once as `L L'`; each pixel then costs one triangular
//! solve, and the score is the squared cosine between the whitened vectors.
//! MIF enters twice: removing the first IMF from every channel before
//! scoring, and from the score map afterwards.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::decompose::{mif, MifConfig, StopCriteria};
use crate::error::{Error, Result};
use crate::grid::GridSignal;

const MAGIC: &[u8; 4] = b"MIFH";
const VERSION: u8 = 0x01;

/// Scores may exceed 1 by this much through rounding.
pub const SCORE_SLACK: f64 = 1e-9;

/// An `h x v` image with `d` channels, stored channel-minor: the signature
/// of pixel `(i, j)` is `values[(i * v + j) * d..][..d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    h: usize,
    v: usize,
    d: usize,
    values: Vec<f64>,
}

impl HyperCube {
    pub fn new(h: usize, v: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if h == 0 || v == 0 {
            return Err(Error::InvalidInput(format!("cube needs at least one pixel, got {h}x{v}")));
        }
        if d < 2 {
            return Err(Error::InvalidInput(format!("cube needs at least 2 channels, got {d}")));
        }
        let expected = h
            .checked_mul(v)
            .and_then(|p| p.checked_mul(d))
            .ok_or_else(|| Error::InvalidInput("cube size overflows".into()))?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected: format!("{expected} values for {h}x{v}x{d}"),
                found: values.len().to_string(),
            });
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { h, v, d, values })
    }

    pub fn from_fn(h: usize, v: usize, d: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(h * v * d);
        for i in 0..h {
            for j in 0..v {
                for c in 0..d {
                    values.push(f(i, j, c));
                }
            }
        }
        Self::new(h, v, d, values)
    }

    /// Stacks `d` equally shaped 2D channels.
    pub fn from_channels(channels: &[GridSignal]) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::InvalidInput("no channels".into()))?;
        let &[h, v] = first.dims() else {
            return Err(Error::InvalidInput("channels must be 2D".into()));
        };
        let d = channels.len();
        if let Some(bad) = channels.iter().find(|c| c.dims() != first.dims()) {
            return Err(Error::DimensionMismatch {
                expected: format!("{:?}", first.dims()),
                found: format!("{:?}", bad.dims()),
            });
        }
        let mut values = vec![0.0; h * v * d];
        for (c, channel) in channels.iter().enumerate() {
            for (p, &x) in channel.values().iter().enumerate() {
                values[p * d + c] = x;
            }
        }
        Self::new(h, v, d, values)
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn signature(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.v + j) * self.d;
        &self.values[start..start + self.d]
    }

    /// Signatures in row-major pixel order.
    pub fn signatures(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn channel(&self, c: usize) -> Result<GridSignal> {
        if c >= self.d {
            return Err(Error::OutOfRange(format!("channel {c} of {}", self.d)));
        }
        let values = self.signatures().map(|s| s[c]).collect();
        GridSignal::new(vec![self.h, self.v], values)
    }

    /// Per-pixel mean over channels.
    pub fn mean_image(&self) -> GridSignal {
        let values = self.signatures().map(|s| s.iter().sum::<f64>() / self.d as f64).collect();
        GridSignal::from_parts(vec![self.h, self.v], values)
    }
}

pub fn encode_cube(cube: &HyperCube) -> Vec<u8> {
    let mut out = Vec::with_capacity(17 + 8 * cube.values.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    for n in [cube.h, cube.v, cube.d] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for x in &cube.values {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_cube(bytes: &[u8]) -> Result<HyperCube> {
    if bytes.len() < 17 {
        return Err(Error::parse(format!("byte {}", bytes.len()), "truncated cube header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::parse("byte 0", "bad magic, expected \"MIFH\""));
    }
    if bytes[4] != VERSION {
        return Err(Error::parse("byte 4", format!("unsupported version {}", bytes[4])));
    }
    let read_u32 = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
    let (h, v, d) = (read_u32(5), read_u32(9), read_u32(13));
    let count = h
        .checked_mul(v)
        .and_then(|p| p.checked_mul(d))
        .ok_or_else(|| Error::parse("byte 5", "cube size overflows"))?;
    let payload = &bytes[17..];
    if count.checked_mul(8) != Some(payload.len()) {
        return Err(Error::parse(
            "byte 17",
            format!("payload holds {} bytes, {h}x{v}x{d} needs {}", payload.len(), count.saturating_mul(8)),
        ));
    }
    let mut values = Vec::with_capacity(count);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let x = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        if !x.is_finite() {
            return Err(Error::parse(format!("byte {}", 17 + 8 * i), "non-finite value"));
        }
        values.push(x);
    }
    HyperCube::new(h, v, d, values)
}

pub fn load_cube(path: impl AsRef<Path>) -> Result<HyperCube> {
    decode_cube(&fs::read(path)?)
}

pub fn save_cube(cube: &HyperCube, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_cube(cube))?;
    Ok(())
}

/// A nonzero target spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSignature {
    values: Vec<f64>,
}

impl TargetSignature {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if values.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidInput("target signature must be nonzero".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One line of comma-separated reals.
pub fn parse_signature(text: &str) -> Result<TargetSignature> {
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::parse("line 1", "empty signature file"))?;
    let values = line
        .split(',')
        .enumerate()
        .map(|(c, field)| {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(format!("line 1:column {}", c + 1), format!("not a number: {:?}", field.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    TargetSignature::new(values)
}

pub fn signature_to_csv(target: &TargetSignature) -> String {
    let fields: Vec<String> = target.values.iter().map(|x| format!("{x:?}")).collect();
    format!("{}\n", fields.join(","))
}

pub fn load_signature(path: impl AsRef<Path>) -> Result<TargetSignature> {
    parse_signature(&fs::read_to_string(path)?)
}

pub fn save_signature(target: &TargetSignature, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, signature_to_csv(target))?;
    Ok(())
}

/// Per-pixel detection scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AceMap {
    scores: GridSignal,
}

impl AceMap {
    pub fn from_grid(scores: GridSignal) -> Result<Self> {
        if scores.ndim() != 2 {
            return Err(Error::InvalidInput("score map must be 2D".into()));
        }
        if let Some(index) = scores.values().iter().position(|&x| !(0.0..=1.0 + SCORE_SLACK).contains(&x)) {
            return Err(Error::OutOfRange(format!("score at flat index {index} outside [0, 1]")));
        }
        Ok(Self { scores })
    }

    pub fn grid(&self) -> &GridSignal {
        &self.scores
    }

    pub fn into_grid(self) -> GridSignal {
        self.scores
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores.get(&[i, j]).expect("pixel in range")
    }
}

/// A dense symmetric `d x d` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    d: usize,
    values: Vec<f64>,
}

impl Covariance {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", d * d),
                found: values.len().to_string(),
            });
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        for r in 0..d {
            for c in 0..r {
                if values[r * d + c] != values[c * d + r] {
                    return Err(Error::InvalidInput(format!("matrix not symmetric at ({r}, {c})")));
                }
            }
        }
        Ok(Self { d, values })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.d + c]
    }

    pub fn trace(&self) -> f64 {
        (0..self.d).map(|i| self.get(i, i)).sum()
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::factor(self)
    }
}

/// Lower-triangular `L` with `L L' = S`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    d: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn factor(matrix: &Covariance) -> Result<Self> {
        let d = matrix.d;
        let mut lower = vec![0.0; d * d];
        for j in 0..d {
            let mut pivot = matrix.get(j, j);
            for k in 0..j {
                pivot -= lower[j * d + k] * lower[j * d + k];
            }
            if !(pivot > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
            }
            let diag = pivot.sqrt();
            lower[j * d + j] = diag;
            for i in j + 1..d {
                let mut s = matrix.get(i, j);
                for k in 0..j {
                    s -= lower[i * d + k] * lower[j * d + k];
                }
                lower[i * d + j] = s / diag;
            }
        }
        Ok(Self { d, lower })
    }

    /// Solves `L y = b`.
    pub fn whiten(&self, b: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lower[i * d + k] * y[k];
            }
            y[i] = s / self.lower[i * d + i];
        }
        y
    }

    fn min_pivot(&self) -> f64 {
        (0..self.d).map(|i| self.lower[i * self.d + i].powi(2)).fold(f64::INFINITY, f64::min)
    }
}

/// Pivots below this fraction of the mean variance mark a singular matrix.
const SINGULAR_RATIO: f64 = 1e-13;

/// Mean-centered sample covariance over all pixels, plus
/// `ridge * trace / d` on the diagonal.
///
/// Fails with [`Error::SingularCovariance`] when the result is numerically
/// singular, which for `ridge = 0` happens whenever the signatures span
/// fewer than `d` dimensions.
pub fn covariance(cube: &HyperCube, ridge: f64) -> Result<Covariance> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::InvalidInput(format!("ridge must be nonnegative, got {ridge}")));
    }
    let n = cube.h * cube.v;
    if n < 2 {
        return Err(Error::InvalidInput("covariance needs at least 2 pixels".into()));
    }
    let d = cube.d;
    let mut mean = vec![0.0; d];
    for s in cube.signatures() {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut sums = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for s in cube.signatures() {
        for c in 0..d {
            centered[c] = s[c] - mean[c];
        }
        for r in 0..d {
            for c in 0..=r {
                sums[r * d + c] += centered[r] * centered[c];
            }
        }
    }
    let mut values = vec![0.0; d * d];
    for r in 0..d {
        for c in 0..=r {
            let x = sums[r * d + c] / (n - 1) as f64;
            values[r * d + c] = x;
            values[c * d + r] = x;
        }
    }
    let mean_variance = (0..d).map(|i| values[i * d + i]).sum::<f64>() / d as f64;
    for i in 0..d {
        values[i * d + i] += ridge * mean_variance;
    }
    let cov = Covariance::new(d, values)?;
    match cov.cholesky() {
        Ok(chol) if chol.min_pivot() > SINGULAR_RATIO * mean_variance => Ok(cov),
        _ => Err(Error::SingularCovariance),
    }
}

/// Scores every pixel against `target`. All-zero pixels score 0.
pub fn ace_classify(cube: &HyperCube, target: &TargetSignature, cov: &Covariance) -> Result<AceMap> {
    if target.len() != cube.d || cov.d != cube.d {
        return Err(Error::DimensionMismatch {
            expected: format!("{} channels", cube.d),
            found: format!("signature {}, covariance {}", target.len(), cov.d),
        });
    }
    let chol = cov.cholesky()?;
    let t = chol.whiten(&target.values);
    let tt = dot(&t, &t);
    let scores: Vec<f64> = cube
        .values
        .par_chunks_exact(cube.d)
        .map(|s| {
            let x = chol.whiten(s);
            let xx = dot(&x, &x);
            if xx == 0.0 {
                return 0.0;
            }
            let xt = dot(&x, &t);
            (xt * xt) / (tt * xx)
        })
        .collect();
    AceMap::from_grid(GridSignal::new(vec![cube.h, cube.v], scores)?)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn first_imf_removed(signal: &GridSignal, config: &MifConfig) -> Result<GridSignal> {
    let config = MifConfig {
        stop: StopCriteria {
            max_imfs: 1,
            ..config.stop
        },
        ..*config
    };
    let dec = mif(signal, &config)?;
    match dec.imfs.first() {
        Some(imf) => signal.sub(imf),
        None => Ok(signal.clone()),
    }
}

/// Removes the first IMF from every channel independently.
pub fn preprocess_cube(cube: &HyperCube, config: &MifConfig) -> Result<HyperCube> {
    let channels = (0..cube.d)
        .into_par_iter()
        .map(|c| first_imf_removed(&cube.channel(c)?, config))
        .collect::<Result<Vec<_>>>()?;
    HyperCube::from_channels(&channels)
}

/// Removes the first IMF from the score map and clamps to `[0, 1]`.
pub fn postprocess_map(map: &AceMap, config: &MifConfig) -> Result<AceMap> {
    let smoothed = first_imf_removed(&map.scores, config)?;
    AceMap::from_grid(smoothed.map(|x| x.clamp(0.0, 1.0))?)
}

/// Number of pixels above `threshold` with no 8-connected neighbour above
/// it.
pub fn count_isolated(map: &AceMap, threshold: f64) -> usize {
    let dims = map.scores.dims();
    let (h, v) = (dims[0] as isize, dims[1] as isize);
    let hot = |i: isize, j: isize| i >= 0 && j >= 0 && i < h && j < v && map.get(i as usize, j as usize) > threshold;
    let mut count = 0;
    for i in 0..h {
        for j in 0..v {
            if !hot(i, j) {
                continue;
            }
            let lonely = (-1..=1).all(|di| (-1..=1).all(|dj| (di == 0 && dj == 0) || !hot(i + di, j + dj)));
            if lonely {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    fn identity(d: usize) -> Covariance {
        Covariance::new(d, (0..d * d).map(|i| if i % (d + 1) == 0 { 1.0 } else { 0.0 }).collect()).unwrap()
    }

    #[test]
    fn cube_layout_is_channel_minor() {
        let cube = HyperCube::from_fn(2, 3, 4, |i, j, c| (100 * i + 10 * j + c) as f64).unwrap();
        assert_eq!(cube.signature(1, 2), &[120.0, 121.0, 122.0, 123.0]);
        assert_eq!(cube.values()[(1 * 3 + 2) * 4 + 3], 123.0);
        let ch = cube.channel(2).unwrap();
        assert_eq!(ch.get(&[1, 0]).unwrap(), 102.0);
        let channels: Vec<_> = (0..4).map(|c| cube.channel(c).unwrap()).collect();
        assert_eq!(HyperCube::from_channels(&channels).unwrap(), cube);
    }

    #[test]
    fn cube_validation() {
        assert!(HyperCube::new(2, 2, 1, vec![0.0; 4]).is_err());
        assert!(HyperCube::new(2, 2, 2, vec![0.0; 7]).is_err());
        assert!(matches!(HyperCube::new(1, 1, 2, vec![0.0, f64::NAN]), Err(Error::NonFinite { index: 1 })));
    }

    #[test]
    fn cube_file_round_trip() {
        let cube = HyperCube::from_fn(3, 2, 5, |i, j, c| (i as f64 - 0.3 * j as f64) * (c as f64 + 0.25)).unwrap();
        let bytes = encode_cube(&cube);
        assert_eq!(&bytes[..5], b"MIFH\x01");
        assert_eq!(&bytes[5..9], &3u32.to_le_bytes());
        assert_eq!(&bytes[13..17], &5u32.to_le_bytes());
        assert_eq!(decode_cube(&bytes).unwrap(), cube);
        assert!(decode_cube(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_cube(&bad).unwrap_err().to_string().contains("byte 0"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.mifh");
        save_cube(&cube, &path).unwrap();
        assert_eq!(load_cube(&path).unwrap(), cube);
    }

    #[test]
    fn signature_round_trip() {
        let t = TargetSignature::new(vec![0.1, -2.5, 1e-7]).unwrap();
        assert_eq!(parse_signature(&signature_to_csv(&t)).unwrap(), t);
        assert!(parse_signature("0,0,0").is_err());
        assert!(parse_signature("1,x").unwrap_err().to_string().contains("column 2"));
    }

    #[test]
    fn identical_pixels_are_singular() {
        let cube = HyperCube::from_fn(4, 4, 3, |_, _, c| c as f64 + 1.0).unwrap();
        assert!(matches!(covariance(&cube, 0.0), Err(Error::SingularCovariance)));
        // Rank-deficient: two channels always equal.
        let cube = HyperCube::from_fn(5, 5, 3, |i, j, c| if c < 2 { (i * j) as f64 } else { i as f64 - j as f64 }).unwrap();
        assert!(matches!(covariance(&cube, 0.0), Err(Error::SingularCovariance)));
        assert!(covariance(&cube, 1e-6).is_ok());
    }

    #[test]
    fn covariance_of_independent_channels_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let cube = HyperCube::from_fn(100, 100, 2, |_, _, _| normal.sample(&mut rng)).unwrap();
        let cov = covariance(&cube, 0.0).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let expected = if r == c { 1.0 } else { 0.0 };
                assert!((cov.get(r, c) - expected).abs() < 0.05);
            }
        }
        assert_eq!(cov.get(0, 1), cov.get(1, 0));
    }

    #[test]
    fn covariance_matches_two_pass_oracle() {
        let cube = HyperCube::from_fn(3, 3, 2, |i, j, c| ((i * 3 + j) as f64).powi(c as i32 + 1)).unwrap();
        // x = 0..8, y = x^2 over 9 pixels: var x = 60 / 8, cov = 480 / 8,
        // var y = (8772 - 204^2 / 9) / 8.
        let cov = covariance(&cube, 0.0).unwrap();
        assert!((cov.get(0, 0) - 7.5).abs() < 1e-12);
        assert!((cov.get(0, 1) - 60.0).abs() < 1e-12);
        assert!((cov.get(1, 1) - 518.5).abs() < 1e-10);
        let ridged = covariance(&cube, 0.5).unwrap();
        let shift = 0.5 * (7.5 + 518.5) / 2.0;
        assert!((ridged.get(0, 0) - 7.5 - shift).abs() < 1e-10);
        assert_eq!(ridged.get(0, 1), cov.get(0, 1));
    }

    #[test]
    fn ace_basic_cases() {
        let cube = HyperCube::new(1, 3, 2, vec![0.0, 1.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        let target = TargetSignature::new(vec![1.0, 0.0]).unwrap();
        let map = ace_classify(&cube, &target, &identity(2)).unwrap();
        assert_eq!(map.get(0, 0), 0.0);
        assert!((map.get(0, 1) - 1.0).abs() < 1e-15);
        assert_eq!(map.get(0, 2), 0.0);
    }

    #[test]
    fn ace_rejects_mismatch_and_indefinite() {
        let cube = HyperCube::new(1, 1, 2, vec![1.0, 1.0]).unwrap();
        let target = TargetSignature::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(ace_classify(&cube, &target, &identity(2)), Err(Error::DimensionMismatch { .. })));
        let indefinite = Covariance::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        let target = TargetSignature::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(ace_classify(&cube, &target, &indefinite), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn cholesky_reproduces_matrix() {
        let m = Covariance::new(3, vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.5, 0.6, 1.5, 3.0]).unwrap();
        let chol = m.cholesky().unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let x: f64 = (0..3).map(|k| chol.lower[r * 3 + k] * chol.lower[c * 3 + k]).sum();
                assert!((x - m.get(r, c)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_channels_pass_through_preprocessing() {
        let cube = HyperCube::from_fn(32, 32, 3, |_, _, c| c as f64 * 2.0 - 1.0).unwrap();
        assert_eq!(preprocess_cube(&cube, &MifConfig::default()).unwrap(), cube);
        let map = AceMap::from_grid(GridSignal::constant(vec![32, 32], 0.4).unwrap()).unwrap();
        assert_eq!(postprocess_map(&map, &MifConfig::default()).unwrap(), map);
    }

    fn interior_rel_l2(a: &GridSignal, b: &GridSignal) -> f64 {
        let dims = a.dims();
        let (lo0, hi0) = (dims[0] / 10, dims[0] - dims[0] / 10);
        let (lo1, hi1) = (dims[1] / 10, dims[1] - dims[1] / 10);
        let (mut err, mut norm) = (0.0, 0.0);
        for i in lo0..hi0 {
            for j in lo1..hi1 {
                let (x, y) = (a.get(&[i, j]).unwrap(), b.get(&[i, j]).unwrap());
                err += (x - y).powi(2);
                norm += y * y;
            }
        }
        (err / norm).sqrt()
    }

    #[test]
    fn preprocessing_removes_checker() {
        let n = 64;
        let trend = |i: usize, j: usize| 2.0 + (2.0 * PI * (i as f64 + 0.5 * j as f64) / (1.5 * n as f64)).sin();
        let cube = HyperCube::from_fn(n, n, 2, |i, j, c| {
            let checker = if (i + j) % 2 == 0 { 0.3 } else { -0.3 };
            trend(i, j) * (1.0 + c as f64) + checker
        })
        .unwrap();
        let out = preprocess_cube(&cube, &MifConfig::default()).unwrap();
        for c in 0..2 {
            let expected = GridSignal::from_fn(vec![n, n], |p| trend(p[0], p[1]) * (1.0 + c as f64)).unwrap();
            let err = interior_rel_l2(&out.channel(c).unwrap(), &expected);
            assert!(err <= 0.2, "channel {c}: {err}");
        }
    }

    #[test]
    fn preprocessing_is_idempotent_on_smooth_cubes() {
        let n = 48;
        let cube = HyperCube::from_fn(n, n, 2, |i, j, c| {
            1.0 + 0.2 * (i as f64 / n as f64) + 0.1 * c as f64 * (j as f64 / n as f64).powi(2)
        })
        .unwrap();
        let once = preprocess_cube(&cube, &MifConfig::default()).unwrap();
        let twice = preprocess_cube(&once, &MifConfig::default()).unwrap();
        let diff = once.values().iter().zip(twice.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = once.values().iter().fold(0.0f64, |m, a| m.max(a.abs()));
        assert!(diff <= 1e-6 * scale, "{diff}");
    }

    #[test]
    fn postprocessing_shrinks_spikes() {
        let n = 64;
        let spikes = [(10usize, 12usize), (40, 50), (25, 33), (55, 7)];
        let background = |i: usize, j: usize| {
            0.3 + 0.1 * (2.0 * PI * 3.0 * i as f64 / n as f64).sin() * (2.0 * PI * 2.0 * j as f64 / n as f64).cos()
        };
        let grid = GridSignal::from_fn(vec![n, n], |p| {
            background(p[0], p[1]) + if spikes.contains(&(p[0], p[1])) { 0.6 } else { 0.0 }
        })
        .unwrap();
        let map = AceMap::from_grid(grid).unwrap();
        let out = postprocess_map(&map, &MifConfig::default()).unwrap();
        for &(i, j) in &spikes {
            let before = map.get(i, j) - background(i, j);
            let after = out.get(i, j) - background(i, j);
            assert!(after < before, "spike ({i}, {j}): {after} >= {before}");
        }
        assert!(out.grid().values().iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn isolated_pixel_count() {
        let mut g = GridSignal::zeros(vec![6, 6]).unwrap().into_values();
        for idx in [0usize, 14, 15, 33] {
            g[idx] = 0.9;
        }
        g[21] = 0.85; // diagonal neighbour of 14
        let map = AceMap::from_grid(GridSignal::new(vec![6, 6], g).unwrap()).unwrap();
        assert_eq!(count_isolated(&map, 0.8), 2);
    }
}
