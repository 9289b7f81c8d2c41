use std::io::Write;
use std::path::{Path, PathBuf};

use tnc_core::curvature::{
    display_normalize, gaussian_curvature_map, mean_curvature_map, normal_curvature_map, tnc_map,
};
use tnc_core::io::{read_image, read_raw, write_image8, write_png16, write_raw};
use tnc_core::metrics::{l1_error, linf_error, mean_squared_error, psnr, ssim, SsimParams};
use tnc_core::synth::{add_gaussian_noise, make_pattern};
use tnc_core::{DirectionSet, IterationReport, PatternSpec, ScalarField, SolverConfig, TncSolver};

use crate::args::{CurvatureArgs, CurvatureKind, DenoiseArgs, MetricsArgs, SourceArgs, SynthArgs};
use crate::error::CliError;
use crate::manifest::{finite, load_config, InputSource, Noise, Quality, RunManifest};

pub const DENOISED_PNG: &str = "denoised.png";
pub const DENOISED_RAW: &str = "denoised.raw";
pub const HISTORY_CSV: &str = "history.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Outputs are written into a hidden sibling directory and renamed into
/// place on commit, so a failed run leaves no partial files behind.
struct Staging {
    dir: PathBuf,
    out: PathBuf,
    created_out: bool,
    names: Vec<String>,
    committed: bool,
}

impl Staging {
    fn new(out: &Path) -> Result<Self, CliError> {
        let created_out = !out.exists();
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let dir = out.join(format!(".tnc-staging-{}", std::process::id()));
        let staging = Self {
            dir,
            out: out.to_path_buf(),
            created_out,
            names: Vec::new(),
            committed: false,
        };
        std::fs::create_dir_all(&staging.dir).map_err(|e| CliError::io(&staging.dir, e))?;
        Ok(staging)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.dir.join(name)
    }

    fn commit(mut self) -> Result<(), CliError> {
        for name in &self.names {
            let target = self.out.join(name);
            std::fs::rename(self.dir.join(name), &target).map_err(|e| CliError::io(target, e))?;
        }
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.dir);
        if !self.committed && self.created_out {
            let _ = std::fs::remove_dir(&self.out);
        }
    }
}

fn with_path(path: &Path, e: tnc_core::Error) -> CliError {
    match e {
        tnc_core::Error::Io(source) => CliError::io(path, source),
        other => other.into(),
    }
}

/// Loads a `.raw` dump (unit spacing) or a grayscale raster.
pub fn load_field(path: &Path) -> Result<ScalarField, CliError> {
    let result = if path.extension().is_some_and(|e| e == "raw") {
        read_raw(path, 1.0)
    } else {
        read_image(path)
    };
    result.map_err(|e| with_path(path, e))
}

/// Writes by extension: `.png` 16-bit, `.pgm` 8-bit, `.raw` float dump.
pub fn save_field(field: &ScalarField, path: &Path) -> Result<(), CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let result = match ext {
        "png" => write_png16(field, path),
        "pgm" => write_image8(field, path),
        "raw" => write_raw(field, path),
        _ => {
            return Err(CliError::Usage(format!(
                "{}: output must end in .png, .pgm or .raw",
                path.display()
            )))
        }
    };
    result.map_err(|e| with_path(path, e))
}

fn source_of(args: &SourceArgs) -> Result<(InputSource, Option<Noise>), CliError> {
    let input = match (&args.input, args.pattern) {
        (Some(path), None) => {
            let abs = std::fs::canonicalize(path).map_err(|e| CliError::io(path, e))?;
            InputSource::File { path: abs }
        }
        (None, Some(kind)) => InputSource::Pattern {
            spec: PatternSpec::new(kind, args.rows, args.cols),
        },
        _ => return Err(CliError::Usage("exactly one of --input or --pattern is required".into())),
    };
    let noise = args.sigma.map(|sigma| Noise { sigma, seed: args.seed });
    Ok((input, noise))
}

/// Returns the (possibly noisy) input and the clean field it came from.
fn materialize(input: &InputSource, noise: Option<Noise>) -> Result<(ScalarField, ScalarField), CliError> {
    let clean = match input {
        InputSource::File { path } => load_field(path)?,
        InputSource::Pattern { spec } => make_pattern(spec)?,
    };
    let noisy = match noise {
        Some(n) => add_gaussian_noise(&clean, n.sigma, n.seed)?,
        None => clean.clone(),
    };
    Ok((noisy, clean))
}

/// A fully resolved denoise run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPlan {
    pub input: InputSource,
    pub noise: Option<Noise>,
    pub reference: Option<PathBuf>,
    pub config: SolverConfig,
    pub raw_output: bool,
}

impl RunPlan {
    pub fn from_args(args: &DenoiseArgs) -> Result<Self, CliError> {
        if let Some(path) = &args.manifest {
            if !args.source.is_empty() || !args.solver.is_empty() || args.config.is_some() || args.reference.is_some() {
                return Err(CliError::Usage(
                    "--manifest cannot be combined with input, noise or solver options".into(),
                ));
            }
            let m = RunManifest::load(path)?;
            return Ok(Self {
                input: m.input,
                noise: m.noise,
                reference: m.reference,
                config: m.config,
                raw_output: m.raw_output || args.raw,
            });
        }
        let (input, noise) = source_of(&args.source)?;
        let base = match &args.config {
            Some(path) => load_config(path)?,
            None => SolverConfig::default(),
        };
        let reference = match &args.reference {
            Some(p) => Some(std::fs::canonicalize(p).map_err(|e| CliError::io(p, e))?),
            None => None,
        };
        Ok(Self {
            input,
            noise,
            reference,
            config: args.solver.apply(base),
            raw_output: args.raw,
        })
    }
}

fn write_history(path: &Path, reports: &[IterationReport]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["iter", "energy", "relative_change", "wall_time_s"])
        .map_err(|e| csv_error(path, e))?;
    for r in reports {
        w.write_record([
            r.iter.to_string(),
            r.energy.to_string(),
            r.relative_change.to_string(),
            r.wall_time.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Runs the solver and writes all artifacts into `out_dir`.
pub fn execute(plan: &RunPlan, out_dir: &Path) -> Result<RunManifest, CliError> {
    let (f, clean) = materialize(&plan.input, plan.noise)?;
    let reference = match &plan.reference {
        Some(p) => Some(load_field(p)?),
        None => match plan.input {
            InputSource::Pattern { .. } => Some(clean),
            InputSource::File { .. } => None,
        },
    };
    let solver = TncSolver::new(f.spec(), plan.config.clone())?;
    let out = solver.run(&f)?;

    let quality = match &reference {
        Some(r) => {
            let params = SsimParams::default();
            Some(Quality {
                reference: plan.reference.clone(),
                psnr_input: finite(psnr(&f, r, 1.0)?),
                psnr: finite(psnr(&out.u, r, 1.0)?),
                ssim_input: finite(ssim(&f, r, &params)?),
                ssim: finite(ssim(&out.u, r, &params)?),
            })
        }
        None => None,
    };

    let mut staging = Staging::new(out_dir)?;
    let png = staging.path(DENOISED_PNG);
    save_field(&out.u, &png)?;
    let mut artifacts = vec![DENOISED_PNG.to_string()];
    if plan.raw_output {
        let raw = staging.path(DENOISED_RAW);
        save_field(&out.u, &raw)?;
        artifacts.push(DENOISED_RAW.to_string());
    }
    write_history(&staging.path(HISTORY_CSV), &out.reports)?;

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        input: plan.input.clone(),
        noise: plan.noise,
        reference: plan.reference.clone(),
        config: plan.config.clone(),
        raw_output: plan.raw_output,
        out_dir: std::fs::canonicalize(out_dir).map_err(|e| CliError::io(out_dir, e))?,
        artifacts,
        history: HISTORY_CSV.to_string(),
        iterations: out.reports.len(),
        converged: out.converged,
        initial_energy: finite(out.state.initial_energy),
        final_energy: out.reports.iter().rev().map(|r| r.energy).find(|e| e.is_finite()),
        wall_time_s: out.reports.last().map_or(0.0, |r| r.wall_time),
        quality,
    };
    let mpath = staging.path(MANIFEST_JSON);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&mpath, text + "\n").map_err(|e| CliError::io(&mpath, e))?;
    staging.commit()?;
    Ok(manifest)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "inf".to_string(), |v| format!("{v:.4}"))
}

pub fn denoise(args: &DenoiseArgs) -> Result<(), CliError> {
    let plan = RunPlan::from_args(args)?;
    let m = execute(&plan, &args.out_dir)?;
    if !args.quiet {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(
            out,
            "iterations {} converged {} energy {} -> {} ({:.2} s)",
            m.iterations,
            m.converged,
            fmt_opt(m.initial_energy),
            fmt_opt(m.final_energy),
            m.wall_time_s
        );
        if let Some(q) = &m.quality {
            let _ = writeln!(
                out,
                "psnr {} -> {} dB, ssim {} -> {}",
                fmt_opt(q.psnr_input),
                fmt_opt(q.psnr),
                fmt_opt(q.ssim_input),
                fmt_opt(q.ssim)
            );
        }
        let _ = writeln!(out, "wrote {}", args.out_dir.display());
    }
    Ok(())
}

pub fn curvature_field(v: &ScalarField, kind: CurvatureKind, theta: f64, ndirs: usize) -> Result<ScalarField, CliError> {
    Ok(match kind {
        CurvatureKind::Mc => mean_curvature_map(v),
        CurvatureKind::Gc => gaussian_curvature_map(v),
        CurvatureKind::Normal => normal_curvature_map(v, theta),
        CurvatureKind::Tnc => tnc_map(v, &DirectionSet::new(ndirs)?),
    })
}

pub fn curvature(args: &CurvatureArgs) -> Result<(), CliError> {
    let (input, noise) = source_of(&args.source)?;
    let (f, _) = materialize(&input, noise)?;
    let map = curvature_field(&f, args.kind, args.theta, args.ndirs)?;
    let mut staging = Staging::new(&args.out_dir)?;
    let name = args.kind.name();
    save_field(&map, &staging.path(&format!("{name}.raw")))?;
    save_field(&display_normalize(&map), &staging.path(&format!("{name}.png")))?;
    staging.commit()?;
    let (lo, hi) = map.min_max();
    println!("{name} min {lo:.6e} max {hi:.6e}");
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let clean = make_pattern(&PatternSpec::new(args.pattern, args.rows, args.cols))?;
    let f = add_gaussian_noise(&clean, args.sigma, args.seed)?;
    let parent = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = args
        .out
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::Usage(format!("{}: not a file name", args.out.display())))?;
    let mut staging = Staging::new(&parent)?;
    save_field(&f, &staging.path(name))?;
    staging.commit()
}

pub fn metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let u = load_field(&args.input)?;
    let r = load_field(&args.reference)?;
    let psnr_db = psnr(&u, &r, 1.0)?;
    let values = [
        ("psnr", psnr_db),
        ("ssim", ssim(&u, &r, &SsimParams::default())?),
        ("mse", mean_squared_error(&u, &r)?),
        ("l1", l1_error(&u, &r)?),
        ("linf", linf_error(&u, &r)?),
    ];
    if args.json {
        let obj: serde_json::Map<String, serde_json::Value> = values
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::json!(finite(*v))))
            .collect();
        println!("{}", serde_json::Value::Object(obj));
    } else {
        for (k, v) in values {
            println!("{k} {v}");
        }
    }
    Ok(())
}
