//! Command-line surface: argument parsing and the subcommand drivers.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use isoasym::fields::io::{load_iaf1, write_csv};
use isoasym::fields::Tolerance;
use isoasym::{Error, Result};
use serde_json::json;

use crate::config::{GridConfig, PipelineConfig, ReparamConfig, RunConfig, ToleranceConfig};
use crate::pipeline::{source_of, Pipeline, Source};
use crate::report::{exit_code, sha256_file, sha256_hex, Provenance, RunReport, EXIT_OK};
use crate::verify::{convergence, load_all, Equation};

const DEFAULT_OUT: &str = "isoasym-out";

#[derive(Parser, Debug)]
#[command(
    name = "isoasym",
    version,
    about = "Isothermally asymptotic surfaces: generate, verify, transform, reconstruct, export"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Absolute sup-norm tolerance (overrides the configuration).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Grid as nx,ny,h,x0,y0 (overrides the configuration).
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct StageFlags {
    #[arg(long)]
    pub dual: bool,
    #[arg(long)]
    pub backlund: bool,
    /// JSON file with a reparametrization block (`f`, `g`, `target`).
    #[arg(long, value_name = "FILE")]
    pub reparam: Option<PathBuf>,
    /// Corner state r, r_x, r_y, r_xy for the Bäcklund seed.
    #[arg(long, value_delimiter = ',', value_name = "R,RX,RY,RXY", allow_negative_numbers = true)]
    pub r0_init: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Full pipeline as configured; stage flags switch extra stages on.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stages: StageFlags,
        #[arg(long)]
        reconstruct: bool,
        #[arg(long)]
        lelieuvre: bool,
    },
    /// Generate a family, verify it and dump its fields.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Built-in example parameters for this family (when no --config).
        #[arg(long)]
        family: Option<String>,
    },
    /// Check field dumps against an equation.
    Verify {
        #[arg(long, value_enum)]
        equation: Equation,
        /// IAF1 files in the order the equation expects.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// The same fields on a grid with half the spacing.
        #[arg(long, num_args = 1..)]
        fine: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Dual, Bäcklund and reparametrization transforms.
    Transform {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stages: StageFlags,
        /// p, V, W as IAF1 files instead of a generated family.
        #[arg(long, num_args = 3, value_names = ["P", "V", "W"])]
        fields: Option<Vec<PathBuf>>,
    },
    /// Projective (and optionally Lelieuvre) reconstruction to OBJ + CSV.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long, num_args = 3, value_names = ["P", "V", "W"])]
        fields: Option<Vec<PathBuf>>,
        #[arg(long)]
        lelieuvre: bool,
    },
    /// Convert IAF1 dumps to `x,y,value` CSV.
    Export {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Directory for the CSV files (default: next to each input).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the JSON schema of the run configuration.
    Schema,
    /// Print an example configuration for a family.
    Example { family: String },
}

pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.kind())
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run { common, stages, reconstruct, lelieuvre } => {
            let mut cfg = load_config(&common, None)?;
            apply_stages(&mut cfg.pipeline, &stages)?;
            cfg.pipeline.reconstruct |= reconstruct;
            cfg.pipeline.lelieuvre |= lelieuvre;
            run_config("run", &common, cfg)
        }
        Command::Generate { common, family } => {
            let mut cfg = load_config(&common, family.as_deref())?;
            cfg.pipeline = PipelineConfig { r0_init: cfg.pipeline.r0_init, ..PipelineConfig::default() };
            run_config("generate", &common, cfg)
        }
        Command::Transform { common, stages, fields } => {
            if !stages.dual && !stages.backlund && stages.reparam.is_none() {
                return Err(Error::InvalidParameter("transform needs --dual, --backlund or --reparam".into()));
            }
            let base = PipelineConfig::default();
            match fields {
                Some(files) => {
                    let mut p = base;
                    apply_stages(&mut p, &stages)?;
                    run_fields("transform", &common, &files, p)
                }
                None => {
                    let mut cfg = load_config(&common, None)?;
                    let mut p = PipelineConfig { r0_init: cfg.pipeline.r0_init, ..base };
                    apply_stages(&mut p, &stages)?;
                    cfg.pipeline = p;
                    run_config("transform", &common, cfg)
                }
            }
        }
        Command::Reconstruct { common, fields, lelieuvre } => {
            let p = PipelineConfig { reconstruct: true, lelieuvre, ..PipelineConfig::default() };
            match fields {
                Some(files) => run_fields("reconstruct", &common, &files, p),
                None => {
                    let mut cfg = load_config(&common, None)?;
                    cfg.pipeline = p;
                    run_config("reconstruct", &common, cfg)
                }
            }
        }
        Command::Verify { equation, files, fine, out, tol } => verify(equation, &files, &fine, out.as_deref(), tol),
        Command::Export { files, out } => export(&files, out.as_deref()),
        Command::Schema => {
            print!("{}", crate::config::schema_json());
            Ok(EXIT_OK)
        }
        Command::Example { family } => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::example(&family)?).expect("config serializes"));
            Ok(EXIT_OK)
        }
    }
}

fn load_config(common: &Common, family: Option<&str>) -> Result<RunConfig> {
    let mut cfg = match (&common.config, family) {
        (Some(path), None) => RunConfig::load(path)?,
        (None, Some(f)) => RunConfig::example(f)?,
        (Some(_), Some(_)) => return Err(Error::InvalidParameter("give either --config or --family".into())),
        (None, None) => return Err(Error::InvalidParameter("--config is required".into())),
    };
    if let Some(g) = &common.grid {
        cfg.grid = GridConfig::parse(g)?;
    }
    if let Some(t) = common.tol {
        cfg.tolerance = ToleranceConfig::Absolute { sup: t };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply_stages(p: &mut PipelineConfig, flags: &StageFlags) -> Result<()> {
    p.dual |= flags.dual;
    p.backlund |= flags.backlund;
    if let Some(path) = &flags.reparam {
        let text = fs::read_to_string(path)?;
        let rp: ReparamConfig =
            serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
        rp.f.validate()?;
        rp.g.validate()?;
        rp.target.to_grid()?;
        p.reparam = Some(rp);
    }
    if let Some(v) = &flags.r0_init {
        p.r0_init = <[f64; 4]>::try_from(v.as_slice()).map_err(|_| {
            Error::InvalidParameter(format!("--r0-init takes 4 comma-separated values, got {}", v.len()))
        })?;
    }
    Ok(())
}

fn tolerance_of(tol: Option<f64>) -> Result<Tolerance> {
    match tol {
        None => Ok(Tolerance::Default),
        Some(t) if t > 0.0 && t.is_finite() => Ok(Tolerance::Absolute(t)),
        Some(t) => Err(Error::InvalidParameter(format!("--tol must be positive, got {t}"))),
    }
}

fn out_dir(common: &Common, cfg: Option<&RunConfig>) -> PathBuf {
    common.out.clone().or_else(|| cfg.and_then(|c| c.output.clone())).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn run_config(command: &str, common: &Common, mut cfg: RunConfig) -> Result<i32> {
    let out = out_dir(common, Some(&cfg));
    // The output location is not part of the run's identity.
    cfg.output = None;
    let canonical = cfg.canonical_json();
    let prov = Provenance::new(sha256_hex(canonical.as_bytes()));
    let value: serde_json::Value = serde_json::from_str(&canonical).expect("canonical config is JSON");
    let report = RunReport::new(command, prov, value);
    let pipeline = Pipeline {
        source: source_of(&cfg)?,
        stages: cfg.pipeline.clone(),
        tolerance: cfg.tolerance.tolerance(),
        out: &out,
    };
    finish(report, &pipeline)
}

fn run_fields(command: &str, common: &Common, files: &[PathBuf], stages: PipelineConfig) -> Result<i32> {
    if common.config.is_some() || common.grid.is_some() {
        return Err(Error::InvalidParameter("--fields takes its grid from the files; drop --config/--grid".into()));
    }
    let tol = tolerance_of(common.tol)?;
    let out = out_dir(common, None);
    let fields = load_all(files)?;
    let tol_cfg = match tol {
        Tolerance::Default => ToleranceConfig::Default,
        Tolerance::Absolute(sup) => ToleranceConfig::Absolute { sup },
    };
    let names: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
    let value = json!({ "fields": names, "pipeline": stages, "tolerance": tol_cfg });
    let mut prov = Provenance::new(sha256_hex(value.to_string().as_bytes()));
    for (name, path) in names.iter().zip(files) {
        prov.inputs.insert(name.clone(), sha256_file(path)?);
    }
    let report = RunReport::new(command, prov, value);
    let mut it = fields.into_iter();
    let (p, v, w) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    let pipeline = Pipeline { source: Source::Fields { p, v, w }, stages, tolerance: tol, out: &out };
    finish(report, &pipeline)
}

fn finish(mut report: RunReport, pipeline: &Pipeline) -> Result<i32> {
    let result = pipeline.execute(&mut report);
    report.finish(result.as_ref().err());
    fs::create_dir_all(pipeline.out)?;
    fs::write(pipeline.out.join("report.json"), report.to_json())?;
    summarize(&report);
    Ok(report.exit_code)
}

fn summarize(report: &RunReport) {
    for c in &report.checks {
        let worst = c.report.equations.iter().fold(0.0f64, |m, e| m.max(e.sup));
        let mark = match (c.passed, c.informational) {
            (true, _) => "ok  ",
            (false, true) => "info",
            (false, false) => "FAIL",
        };
        println!("{:<28} {mark} sup={worst:.3e}", c.name);
    }
    for h in &report.holonomy {
        println!(
            "{:<28} {} defect={:.3e}",
            format!("holonomy.{}", h.name),
            if h.passed { "ok  " } else { "FAIL" },
            h.defect
        );
    }
    if let Some(f) = &report.family {
        if let Some(k) = f.notes.get("kappa") {
            println!("kappa = {k}");
        }
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    println!("status: {} (exit {})", report.status, report.exit_code);
}

fn verify(
    equation: Equation,
    files: &[PathBuf],
    fine: &[PathBuf],
    out: Option<&Path>,
    tol: Option<f64>,
) -> Result<i32> {
    let tol = tolerance_of(tol)?;
    let names: Vec<String> = files.iter().chain(fine).map(|p| p.display().to_string()).collect();
    let tol_cfg = match tol {
        Tolerance::Default => ToleranceConfig::Default,
        Tolerance::Absolute(sup) => ToleranceConfig::Absolute { sup },
    };
    let value = json!({ "equation": equation, "files": names, "tolerance": tol_cfg });
    let mut prov = Provenance::new(sha256_hex(value.to_string().as_bytes()));
    for (name, path) in names.iter().zip(files.iter().chain(fine)) {
        prov.inputs.insert(name.clone(), sha256_file(path)?);
    }
    let mut report = RunReport::new("verify", prov, value);
    let result = (|| -> Result<()> {
        let coarse = equation.evaluate(&load_all(files)?)?;
        report.check(equation.name(), coarse.clone(), tol);
        if !fine.is_empty() {
            let fine = equation.evaluate(&load_all(fine)?)?;
            report.convergence = Some(convergence(&coarse, &fine)?);
            report.check(&format!("{}.fine", equation.name()), fine, tol);
        }
        Ok(())
    })();
    report.finish(result.as_ref().err());
    for c in &report.checks {
        for e in &c.report.equations {
            println!("{:<10} {:<14} sup={:.6e} l2={:.6e} scale={:.3e}", c.name, e.name, e.sup, e.l2, e.scale);
        }
    }
    if let Some(c) = &report.convergence {
        println!("ratio={:.4} order={:.3}", c.ratio, c.order);
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    println!("status: {} (exit {})", report.status, report.exit_code);
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), report.to_json())?;
    }
    Ok(report.exit_code)
}

fn export(files: &[PathBuf], out: Option<&Path>) -> Result<i32> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let mut targets = Vec::new();
    for path in files {
        let field = load_iaf1(path).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            e => e,
        })?;
        let target = match out {
            Some(dir) => dir.join(Path::new(path.file_name().unwrap_or_default()).with_extension("csv")),
            None => path.with_extension("csv"),
        };
        if targets.contains(&target) {
            return Err(Error::InvalidParameter(format!("two inputs map to {}", target.display())));
        }
        let mut w = std::io::BufWriter::new(fs::File::create(&target)?);
        write_csv(&field, &mut w)?;
        println!("{} -> {}", path.display(), target.display());
        targets.push(target);
    }
    Ok(EXIT_OK)
}
