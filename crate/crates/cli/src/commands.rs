use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use mif_core::hyperspectral::save_signature;
use mif_core::synth::{example1, example2, synthetic_cube};
use mif_core::{
    ace_classify, count_isolated, covariance, extrema_stats, load_cube, load_grid, load_signature, mif,
    postprocess_map, preprocess_cube, reconstruct, save_cube, save_grid, GridFormat, GridSignal,
};

use crate::config::RunConfig;
use crate::raster;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SynthKind {
    Example1,
    Example2,
    Cube,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RenderMode {
    Heatmap,
    Section,
}

/// Relative max-norm reconstruction error accepted by `--verify`.
const VERIFY_TOLERANCE: f64 = 1e-10;

/// Threshold used for the isolated-detection count in ACE reports.
const DETECTION_THRESHOLD: f64 = 0.8;

fn output_dir(config: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_grid(grid: &GridSignal, path: PathBuf, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    save_grid(grid, &path, GridFormat::Native)?;
    written.push(path);
    Ok(())
}

fn axis_label(axis: usize) -> String {
    match axis {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        a => format!("a{a}"),
    }
}

pub fn synth(kind: SynthKind, size: usize, config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = output_dir(config)?;
    let mut written = Vec::new();
    match kind {
        SynthKind::Example1 | SynthKind::Example2 => {
            let ex = if kind == SynthKind::Example1 { example1(size)? } else { example2(size)? };
            write_grid(&ex.mixture, dir.join("mixture.mifg"), &mut written)?;
            for (i, c) in ex.components.iter().enumerate() {
                write_grid(c, dir.join(format!("component{}.mifg", i + 1)), &mut written)?;
            }
        }
        SynthKind::Cube => {
            let scene = synthetic_cube(config.seed)?;
            let cube_path = dir.join("cube.mifh");
            save_cube(&scene.cube, &cube_path)?;
            written.push(cube_path);
            let target_path = dir.join("target.csv");
            save_signature(&scene.target, &target_path)?;
            written.push(target_path);
            let (h, v) = (scene.cube.h(), scene.cube.v());
            let labels = GridSignal::from_fn(vec![h, v], |p| {
                let px = (p[0], p[1]);
                if scene.block.contains(&px) {
                    1.0
                } else if scene.spikes.contains(&px) {
                    2.0
                } else {
                    0.0
                }
            })?;
            write_grid(&labels, dir.join("labels.mifg"), &mut written)?;
        }
    }
    info!("synth {kind:?}: wrote {} files", written.len());
    Ok(written)
}

/// Decomposes `input`, writes `imf_<k>.mifg` and `remainder.mifg`, and
/// returns the key=value report (also written to `report.txt`).
pub fn decompose(input: &Path, verify: bool, config: &RunConfig) -> Result<String, CliError> {
    let signal = load_grid(input, GridFormat::from_path(input))?;
    let dec = mif(&signal, &config.mif_config())?;
    let dir = output_dir(config)?;
    let mut written = Vec::new();
    for (k, imf) in dec.imfs.iter().enumerate() {
        write_grid(imf, dir.join(format!("imf_{}.mifg", k + 1)), &mut written)?;
    }
    write_grid(&dec.remainder, dir.join("remainder.mifg"), &mut written)?;

    let recon = reconstruct(&dec)?;
    let scale = signal.max_abs();
    let error = recon.sub(&signal)?.max_abs() / if scale > 0.0 { scale } else { 1.0 };

    let mut report = String::new();
    let dims: Vec<String> = signal.dims().iter().map(|d| d.to_string()).collect();
    writeln!(report, "input={}", input.display()).unwrap();
    writeln!(report, "dims={}", dims.join("x")).unwrap();
    writeln!(report, "imfs={}", dec.imfs.len()).unwrap();
    for (k, info) in dec.info.iter().enumerate() {
        let key = format!("imf.{}", k + 1);
        for (a, r) in info.support_radii.iter().enumerate() {
            writeln!(report, "{key}.radius.{}={r}", axis_label(a)).unwrap();
        }
        for (a, r) in info.kernel_radii.iter().enumerate() {
            writeln!(report, "{key}.kernel_radius.{}={r}", axis_label(a)).unwrap();
        }
        writeln!(report, "{key}.iterations={}", info.iterations).unwrap();
        writeln!(report, "{key}.final_delta={:e}", info.final_delta).unwrap();
        for (a, m) in info.extrema.per_axis_mean_count.iter().enumerate() {
            writeln!(report, "{key}.extrema.{}={m}", axis_label(a)).unwrap();
        }
        writeln!(report, "{key}.extrema.mean={}", info.extrema.total_mean).unwrap();
    }
    writeln!(report, "remainder.extrema.mean={}", extrema_stats(&dec.remainder).total_mean).unwrap();
    writeln!(report, "remainder.max_abs={:e}", dec.remainder.max_abs()).unwrap();
    writeln!(report, "reconstruction.rel_error={error:e}").unwrap();
    let report_path = dir.join("report.txt");
    fs::write(&report_path, &report).map_err(|e| CliError::io(&report_path, e))?;

    if verify && !(error <= VERIFY_TOLERANCE) {
        return Err(CliError::Verification(format!(
            "reconstruction error {error:e} exceeds {VERIFY_TOLERANCE:e}"
        )));
    }
    Ok(report)
}

pub struct AceOptions {
    pub preprocess: bool,
    pub postprocess: bool,
    pub name: String,
}

/// Scores the cube, writes `<name>.mifg` and `<name>.pgm`, returns a
/// key=value summary.
pub fn ace(cube_path: &Path, signature_path: &Path, options: &AceOptions, config: &RunConfig) -> Result<String, CliError> {
    let mut cube = load_cube(cube_path)?;
    let target = load_signature(signature_path)?;
    let mif_config = config.mif_config();
    if options.preprocess {
        cube = preprocess_cube(&cube, &mif_config)?;
    }
    let cov = covariance(&cube, config.ace_ridge)?;
    let mut map = ace_classify(&cube, &target, &cov)?;
    if options.postprocess {
        map = postprocess_map(&map, &mif_config)?;
    }

    let dir = output_dir(config)?;
    let scores_path = dir.join(format!("{}.mifg", options.name));
    save_grid(map.grid(), &scores_path, GridFormat::Native)?;
    let raster_path = dir.join(format!("{}.pgm", options.name));
    raster::score_map(map.grid())?.save(&raster_path)?;

    let (_, max) = map.grid().min_max();
    let mut report = String::new();
    writeln!(report, "pixels={}", map.grid().len()).unwrap();
    writeln!(report, "channels={}", cube.d()).unwrap();
    writeln!(report, "preprocess={}", options.preprocess).unwrap();
    writeln!(report, "postprocess={}", options.postprocess).unwrap();
    writeln!(report, "max_score={max}").unwrap();
    writeln!(report, "isolated_above_{DETECTION_THRESHOLD}={}", count_isolated(&map, DETECTION_THRESHOLD)).unwrap();
    writeln!(report, "scores={}", scores_path.display()).unwrap();
    writeln!(report, "raster={}", raster_path.display()).unwrap();
    Ok(report)
}

pub struct SectionSpec {
    pub axis: Option<usize>,
    pub at: Vec<usize>,
    pub anti_diagonal: bool,
    pub plot: bool,
}

pub fn render(
    grid_path: &Path,
    mode: RenderMode,
    section: &SectionSpec,
    output: Option<&Path>,
    config: &RunConfig,
) -> Result<Vec<PathBuf>, CliError> {
    let grid = load_grid(grid_path, GridFormat::from_path(grid_path))?;
    let stem = grid_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "grid".into());
    let dir = output_dir(config)?;
    let mut written = Vec::new();
    match mode {
        RenderMode::Heatmap => {
            let path = output.map(Path::to_path_buf).unwrap_or_else(|| dir.join(format!("{stem}.pgm")));
            raster::heatmap(&grid)?.save(&path)?;
            written.push(path);
        }
        RenderMode::Section => {
            let values = extract_section(&grid, section)?;
            let path = output
                .map(Path::to_path_buf)
                .unwrap_or_else(|| dir.join(format!("{stem}.section.txt")));
            let mut text = String::new();
            for (i, v) in values.iter().enumerate() {
                writeln!(text, "{i} {v:?}").unwrap();
            }
            fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            if section.plot {
                let plot_path = path.with_extension("pgm");
                raster::line_plot(&values).save(&plot_path)?;
                written.push(path);
                written.push(plot_path);
            } else {
                written.push(path);
            }
        }
    }
    Ok(written)
}

fn extract_section(grid: &GridSignal, spec: &SectionSpec) -> Result<Vec<f64>, CliError> {
    if spec.anti_diagonal {
        return Ok(grid.anti_diagonal()?);
    }
    let k = grid.ndim();
    let axis = spec.axis.unwrap_or(k - 1);
    if axis >= k {
        return Err(CliError::Config(format!("axis {axis} out of range for a {k}-D grid")));
    }
    let fixed: Vec<usize> = if spec.at.is_empty() {
        (0..k).filter(|&a| a != axis).map(|a| grid.dims()[a] / 2).collect()
    } else {
        spec.at.clone()
    };
    Ok(grid.slice_1d(axis, &fixed)?)
}
