use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use stdpp::{
    build_spectral_approx, estimate_intensity, estimate_kfun, estimate_pcf, fit_min_contrast, kfun_theoretical,
    pcf_theoretical, sample_poisson_replicate, sample_stdpp_replicate, validate_existence, BandwidthSpec, FitOptions,
    KMethod, KernelModel, PointPattern, Statistic, SummaryCurve, Window,
};

use crate::config::{Format, Process, RunConfig};

/// What a successful command reports back to `main`.
pub enum Outcome {
    Success,
    /// The command ran but its domain-level answer is negative.
    Rejected,
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn prepare_output(config: &RunConfig) -> anyhow::Result<PathBuf> {
    let dir = config.output_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn curve_text(curve: &SummaryCurve, format: Format) -> String {
    match format {
        Format::Csv => curve.to_csv(),
        Format::Json => curve.to_json() + "\n",
    }
}

pub fn run_validate(config: &RunConfig) -> anyhow::Result<Outcome> {
    let model = config.model.as_ref().expect("checked on load");
    let report = validate_existence(model);
    match config.format {
        Format::Json => {
            let out = json!({
                "family": model.family_name(),
                "valid": report.valid,
                "rho": report.rho,
                "rho_max": report.rho_max,
                "phi_max": report.phi_max,
            });
            print!("{}", to_json_line(&out));
        }
        Format::Csv => {
            println!("family: {}", model.family_name());
            println!("valid: {}", report.valid);
            println!("rho: {}", report.rho);
            println!("rho_max: {}", report.rho_max);
            println!("phi_max: {}", report.phi_max);
        }
    }
    Ok(if report.valid {
        Outcome::Success
    } else {
        Outcome::Rejected
    })
}

pub fn run_curves(config: &RunConfig) -> anyhow::Result<Outcome> {
    let models: Vec<KernelModel> = if config.models.is_empty() {
        config.model.iter().copied().collect()
    } else {
        config.models.clone()
    };
    let grid = config.grid.as_ref().expect("checked on load").build()?;
    let dir = prepare_output(config)?;
    let ext = config.format.extension();
    let mut index = Vec::new();
    for (i, model) in models.iter().enumerate() {
        let g = pcf_theoretical(model, &grid, config.inversion.as_ref())
            .with_context(|| format!("pair correlation for setting {i}"))?;
        let g_file = format!("g_{i}.{ext}");
        write_file(&dir.join(&g_file), &curve_text(&g, config.format))?;
        let mut entry = json!({"setting": i, "model": model, "g": g_file});
        if config.include_k {
            let method = match model {
                KernelModel::SeparableGaussExp(_) => KMethod::ClosedForm,
                _ => KMethod::Quadrature,
            };
            let k = kfun_theoretical(model, &grid, method).with_context(|| format!("K-function for setting {i}"))?;
            let k_file = format!("K_{i}.{ext}");
            write_file(&dir.join(&k_file), &curve_text(&k, config.format))?;
            entry["K"] = json!(k_file);
        }
        index.push(entry);
    }
    write_file(
        &dir.join("curves.json"),
        &to_json_line(&json!({"version": stdpp::VERSION, "settings": index})),
    )?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct ReplicateRecord {
    replicate: u64,
    seed: u64,
    stream: u64,
    file: String,
    points: usize,
}

pub fn run_simulate(config: &RunConfig) -> anyhow::Result<Outcome> {
    let model = config.model.as_ref().expect("checked on load");
    let window = config.window.expect("checked on load");
    let seed = config.seed;
    let replicates = config.replicates as u64;

    let (patterns, process_info) = match config.process {
        Process::Stdpp => {
            let approx = build_spectral_approx(model, &window, &config.spectral)?;
            log::info!(
                "{} modes, truncation mass {:e}, expected count {}",
                approx.modes.len(),
                approx.truncation_mass,
                approx.expected_count()
            );
            let patterns = (0..replicates)
                .into_par_iter()
                .map(|r| sample_stdpp_replicate(&approx, seed, r))
                .collect::<stdpp::Result<Vec<_>>>()?;
            let info = json!({
                "process": "stdpp",
                "modes": approx.modes.len(),
                "truncation_mass": approx.truncation_mass,
                "expected_count": approx.expected_count(),
                "simulation_window": approx.simulation_window,
            });
            (patterns, info)
        }
        Process::Poisson => {
            let rho = model.intensity()?;
            let patterns = (0..replicates)
                .into_par_iter()
                .map(|r| sample_poisson_replicate(rho, &window, seed, r))
                .collect::<stdpp::Result<Vec<_>>>()?;
            let info = json!({
                "process": "poisson",
                "intensity": rho,
                "expected_count": rho * window.volume(),
            });
            (patterns, info)
        }
    };

    let dir = prepare_output(config)?;
    let records = patterns
        .par_iter()
        .enumerate()
        .map(|(r, pattern)| {
            let r = r as u64;
            let file = format!("pattern_{r:04}.csv");
            write_file(&dir.join(&file), &pattern.to_csv())?;
            let sidecar = json!({
                "replicate": r,
                "seed": seed,
                "stream": r,
                "points": pattern.len(),
                "window": pattern.window(),
                "provenance": pattern.seed_provenance(),
            });
            write_file(&dir.join(format!("pattern_{r:04}.json")), &to_json_line(&sidecar))?;
            Ok(ReplicateRecord {
                replicate: r,
                seed,
                stream: r,
                file,
                points: pattern.len(),
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let manifest = json!({
        "version": stdpp::VERSION,
        "model": model,
        "window": window,
        "grid": config.grid,
        "seed": seed,
        "cutoff": config.spectral.cutoff,
        "padding": config.spectral.padding,
        "tolerance": config.spectral.tolerance,
        "simulation": process_info,
        "replicates": records,
        "config": config,
    });
    write_file(&dir.join("manifest.json"), &to_json_line(&manifest))?;
    Ok(Outcome::Success)
}

fn read_patterns(config: &RunConfig) -> anyhow::Result<Vec<PointPattern>> {
    let window: Window = config.window.expect("checked on load");
    config
        .inputs
        .iter()
        .map(|path| {
            let text = fs::read_to_string(path).with_context(|| format!("reading pattern {}", path.display()))?;
            PointPattern::from_csv(&text, window, path.display().to_string())
                .with_context(|| format!("in pattern file {}", path.display()))
        })
        .collect()
}

pub fn run_summarize(config: &RunConfig) -> anyhow::Result<Outcome> {
    let patterns = read_patterns(config)?;
    let grid = config.grid.as_ref().expect("checked on load").build()?;
    let statistics = config
        .statistics
        .clone()
        .unwrap_or_else(|| vec![Statistic::K, Statistic::G]);
    let dir = prepare_output(config)?;
    let ext = config.format.extension();
    let mut listing = json!({
        "version": stdpp::VERSION,
        "inputs": config.inputs,
        "intensities": patterns.iter().map(estimate_intensity).collect::<stdpp::Result<Vec<_>>>()?,
    });
    for statistic in statistics {
        let (prefix, curves) = match statistic {
            Statistic::K => (
                "khat",
                patterns
                    .par_iter()
                    .map(|p| estimate_kfun(p, &grid))
                    .collect::<stdpp::Result<Vec<_>>>()?,
            ),
            Statistic::G => (
                "ghat",
                patterns
                    .par_iter()
                    .map(|p| {
                        let bw = config.bandwidth.unwrap_or_else(|| BandwidthSpec::rule_of_thumb(p));
                        estimate_pcf(p, &grid, &bw)
                    })
                    .collect::<stdpp::Result<Vec<_>>>()?,
            ),
        };
        let mut files = Vec::new();
        for (i, curve) in curves.iter().enumerate() {
            let file = format!("{prefix}_{i}.{ext}");
            write_file(&dir.join(&file), &curve_text(curve, config.format))?;
            files.push(file);
        }
        let pooled = SummaryCurve::mean(&curves, "pooled")?;
        let file = format!("{prefix}_pooled.{ext}");
        write_file(&dir.join(&file), &curve_text(&pooled, config.format))?;
        listing[prefix] = json!({"per_pattern": files, "pooled": file});
    }
    write_file(&dir.join("summary.json"), &to_json_line(&listing))?;
    Ok(Outcome::Success)
}

pub fn run_fit(config: &RunConfig) -> anyhow::Result<Outcome> {
    let patterns = read_patterns(config)?;
    let grid = config.grid.as_ref().expect("checked on load").build()?;
    let family = config.family.expect("checked on load");
    let bounds = config.bounds.expect("checked on load");
    let options = FitOptions {
        bandwidth: config.bandwidth.or(config.fit.bandwidth),
        ..config.fit
    };
    let result = fit_min_contrast(&patterns, family, &bounds, config.statistic, &grid, &options)?;
    let dir = prepare_output(config)?;
    write_file(&dir.join("fit.json"), &to_json_line(&result))?;
    println!(
        "alpha_s={} alpha_t={} rho={} contrast={:e} converged={}",
        result.alpha_s, result.alpha_t, result.rho, result.contrast, result.converged
    );
    if !result.converged {
        log::warn!(
            "optimizer stopped after {} evaluations without converging",
            result.evaluations
        );
        if config.strict {
            eprintln!("error: minimum-contrast fit did not converge");
            return Ok(Outcome::Rejected);
        }
    }
    Ok(Outcome::Success)
}
