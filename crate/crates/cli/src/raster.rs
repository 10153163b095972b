//! Grayscale rasters as binary PGM (P5).

use std::fs;
use std::path::Path;

use mif_core::GridSignal;

use crate::CliError;

pub struct Gray {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Gray {
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_pgm()).map_err(|e| CliError::io(path, e))
    }
}

fn require_2d(grid: &GridSignal) -> Result<(usize, usize), CliError> {
    match grid.dims() {
        &[rows, cols] => Ok((rows, cols)),
        dims => Err(CliError::Config(format!("raster output needs a 2D grid, got dims {dims:?}"))),
    }
}

/// Linear min-max map to 0..=255; a constant grid renders as 128.
pub fn heatmap(grid: &GridSignal) -> Result<Gray, CliError> {
    let (rows, cols) = require_2d(grid)?;
    let (lo, hi) = grid.min_max();
    let pixels = grid
        .values()
        .iter()
        .map(|&v| {
            if hi > lo {
                (255.0 * (v - lo) / (hi - lo)).round() as u8
            } else {
                128
            }
        })
        .collect();
    Ok(Gray {
        width: cols,
        height: rows,
        pixels,
    })
}

/// Detection scores: 1 renders black, 0 white.
pub fn score_map(grid: &GridSignal) -> Result<Gray, CliError> {
    let (rows, cols) = require_2d(grid)?;
    let pixels = grid
        .values()
        .iter()
        .map(|&s| (255.0 * (1.0 - s.clamp(0.0, 1.0))).round() as u8)
        .collect();
    Ok(Gray {
        width: cols,
        height: rows,
        pixels,
    })
}

const PLOT_HEIGHT: usize = 128;

/// Black polyline on white, one column per sample.
pub fn line_plot(values: &[f64]) -> Gray {
    let width = values.len().max(1);
    let mut pixels = vec![255u8; width * PLOT_HEIGHT];
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let row_of = |v: f64| -> usize {
        if hi > lo {
            let t = (v - lo) / (hi - lo);
            ((1.0 - t) * (PLOT_HEIGHT - 1) as f64).round() as usize
        } else {
            PLOT_HEIGHT / 2
        }
    };
    let mut previous: Option<usize> = None;
    for (x, &v) in values.iter().enumerate() {
        let y = row_of(v);
        let (a, b) = match previous {
            Some(p) => (p.min(y), p.max(y)),
            None => (y, y),
        };
        for row in a..=b {
            pixels[row * width + x] = 0;
        }
        previous = Some(y);
    }
    Gray {
        width,
        height: PLOT_HEIGHT,
        pixels,
    }
}
