//! Command-line interface and the three commands behind it.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use tnnr::{
    solve, spectral_singular_values, structured_mask, synth_instance, table1_preset, CompletionLoss, Config,
    ConvergenceTrace, MaskKind, MuMode, ObservationMask, Penalty, Regularizer, SolveOutput, Tensor, WeightMode,
};

use crate::error::BenchError;
use crate::io;
use crate::metrics::{psnr, ssim};
use crate::report::{aggregate, mask_hash, Aggregate, ConfigEcho, Metrics, RunReport};
use crate::texture::bundled_texture;

/// Default penalty weight for synthetic problems.
pub const SYNTH_LAMBDA: f64 = 5.0;
/// Default penalty weight for image data in `[0, 1]`.
pub const IMAGE_LAMBDA: f64 = 20.0;

#[derive(Debug, Parser)]
#[command(name = "tnnr-bench", version, about = "Low-tubal-rank tensor completion experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a random low-tubal-rank tensor from a uniform sample.
    Synth(SynthArgs),
    /// Complete an image tensor and score it against the original.
    Inpaint(InpaintArgs),
    /// Run several regularizers on identical data and masks; CSV output.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Penalty weight [default: 5 for synth, 20 for image commands]
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 0.49)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.49)]
    pub theta2: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Lipschitz constant of the loss gradient used by the step rule
    #[arg(long, default_value_t = 2.0)]
    pub lf: f64,
    /// Fixed step parameter instead of the automatic one
    #[arg(long)]
    pub mu: Option<f64>,
    /// identity | power23 | power:P | smooth23:EPS | smooth:P,EPS
    #[arg(long, default_value = "smooth23:1e-6")]
    pub penalty: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Stopping tolerance [default: 1e-3 relative error for synth, 1e-4 relative change otherwise]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Directory for reports, traces and recovered tensors
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub n1: usize,
    #[arg(long, default_value_t = 50)]
    pub n2: usize,
    #[arg(long, default_value_t = 50)]
    pub n3: usize,
    #[arg(long, default_value_t = 5)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.8)]
    pub sr: f64,
    /// tnnr | tnn | pstnn[:N] | ttnn[:N] | wtnn:EPS | wsp:P,C,EPS
    #[arg(long, default_value = "tnnr")]
    pub preset: String,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Execute the runs concurrently
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input tensor file (TNS3); the bundled 64x64x3 texture when absent
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Mask file (MSK3); overrides --mask-kind
    #[arg(long)]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InpaintArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// uniform:SR | rect:I,J,H,W | grid:P,T
    #[arg(long, default_value = "uniform:0.5")]
    pub mask_kind: String,
    #[arg(long, default_value = "tnnr")]
    pub preset: String,
    /// Where to write the recovered tensor (TNS3)
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Mask geometries; repeat the flag or separate with ';'
    #[arg(long, default_value = "uniform:0.5", value_delimiter = ';')]
    pub mask_kind: Vec<String>,
    /// Comma-separated regularizers
    #[arg(long, default_value = "tnnr,tnn,pstnn:3", value_delimiter = ',')]
    pub presets: Vec<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn usage(e: impl std::fmt::Display) -> BenchError {
    BenchError::Usage(e.to_string())
}

impl SolverArgs {
    /// Solver configuration; `ground_truth` selects the stopping rule.
    pub fn config(&self, default_lambda: f64, ground_truth: bool) -> Result<Config, BenchError> {
        let penalty: Penalty<f64> = self.penalty.parse().map_err(usage)?;
        let defaults = Config::default();
        let cfg = Config {
            lambda: self.lambda.unwrap_or(default_lambda),
            theta1: self.theta1,
            theta2: self.theta2,
            epsilon: self.epsilon,
            lf: self.lf,
            mu_mode: self.mu.map_or(MuMode::Auto, MuMode::Fixed),
            max_iters: self.max_iters,
            tol_rel_change: match (ground_truth, self.tol) {
                (false, Some(t)) => t,
                _ => defaults.tol_rel_change,
            },
            tol_ground_truth: match (ground_truth, self.tol) {
                (true, Some(t)) => Some(t),
                _ => defaults.tol_ground_truth,
            },
            penalty,
            seed: self.seed,
            theta_schedule: None,
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

fn echo(cfg: &Config, dims: tnnr::Dims, rank: Option<usize>, mask: &str, m: &ObservationMask, preset: &str, ground_truth: bool) -> ConfigEcho {
    ConfigEcho {
        dims: [dims.0, dims.1, dims.2],
        rank,
        mask: mask.to_string(),
        sampling_ratio: m.sampling_ratio(),
        lambda: cfg.lambda,
        theta1: cfg.theta1,
        theta2: cfg.theta2,
        epsilon: cfg.epsilon,
        lf: cfg.lf,
        mu: cfg.mu(),
        mu_mode: match cfg.mu_mode {
            MuMode::Auto => "auto".into(),
            MuMode::Fixed(_) => "fixed".into(),
        },
        max_iters: cfg.max_iters,
        tol_rel_change: cfg.tol_rel_change,
        tol_ground_truth: if ground_truth { cfg.tol_ground_truth } else { None },
        penalty: cfg.penalty.to_string(),
        preset: preset.to_string(),
        seed: cfg.seed,
    }
}

fn parse_regularizer(s: &str) -> Result<Regularizer<f64>, BenchError> {
    s.parse().map_err(usage)
}

fn weight_mode(reg: Regularizer<f64>, x0: &Tensor) -> Result<WeightMode<f64>, BenchError> {
    Ok(match reg {
        Regularizer::Tnnr => WeightMode::Adaptive,
        Regularizer::Preset(p) => {
            // reweighted presets freeze their weights at the starting point
            let reference = spectral_singular_values(x0)?;
            WeightMode::Static(table1_preset(p, x0.dims(), Some(&reference))?)
        }
    })
}

/// Solve the completion problem for `data` observed on `mask`.
pub fn run_completion(
    data: &Tensor,
    mask: &ObservationMask,
    cfg: &Config,
    reg: Regularizer<f64>,
    ground_truth: bool,
) -> Result<SolveOutput<f64>, BenchError> {
    let loss = CompletionLoss::new(mask.clone(), data)?;
    let x0 = loss.observed().clone();
    let mode = weight_mode(reg, &x0)?;
    Ok(solve(x0, cfg, mode, &loss, ground_truth.then_some(data))?)
}

/// Map `x` by the affine transform sending `reference`'s range to `[0, 1]`.
fn to_unit_range(x: &Tensor, reference: &Tensor) -> Tensor {
    let lo = reference.as_slice().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = reference.as_slice().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    x.map(|v| (v - lo) / span)
}

fn metrics_of(out: &SolveOutput<f64>, reference: &Tensor, normalize: bool) -> Result<Metrics, BenchError> {
    let (x, r) = if normalize {
        (to_unit_range(&out.x, reference), to_unit_range(reference, reference))
    } else {
        (out.x.clone(), reference.clone())
    };
    Ok(Metrics {
        psnr: psnr(&x, &r, 1.0)?,
        ssim: ssim(&x, &r)?,
        rel_error: out.x.relative_error(reference)?,
        iterations: out.iterations,
        seconds: out.trace.last().map_or(0.0, |t| t.seconds),
    })
}

fn ensure_dir(dir: &Path) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), BenchError> {
    fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

fn write_trace(dir: Option<&Path>, name: &str, trace: &ConvergenceTrace) -> Result<Option<String>, BenchError> {
    let Some(dir) = dir else { return Ok(None) };
    ensure_dir(dir)?;
    let path = dir.join(name);
    write_text(&path, &trace.to_csv())?;
    Ok(Some(path.display().to_string()))
}

/// Persist the trace of a diverged run before reporting the failure.
fn keep_divergence_trace(err: BenchError, dir: Option<&Path>, name: &str) -> BenchError {
    if let BenchError::Solver(tnnr::Error::Divergence { trace, .. }) = &err {
        match write_trace(dir, name, trace) {
            Ok(Some(path)) => log::error!("trace of the diverged run written to {path}"),
            Ok(None) => eprint!("{}", trace.to_csv()),
            Err(e) => log::error!("could not write trace: {e}"),
        }
    }
    err
}

#[derive(Debug, Serialize)]
pub struct SynthOutput {
    pub runs: Vec<RunReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Aggregate>,
}

pub fn cmd_synth(args: &SynthArgs) -> Result<SynthOutput, BenchError> {
    if args.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let reg = parse_regularizer(&args.preset)?;
    let base = args.solver.config(SYNTH_LAMBDA, true)?;
    let out_dir = args.solver.out.as_deref();
    let one = |run: usize| -> Result<RunReport, BenchError> {
        let seed = base.seed + run as u64;
        let cfg = Config { seed, ..base.clone() };
        let inst = synth_instance::<f64>(args.n1, args.n2, args.n3, args.rank, args.sr, seed).map_err(usage)?;
        let trace_name = format!("trace_seed{seed}.csv");
        let out = run_completion(&inst.m_true, &inst.mask, &cfg, reg, true)
            .map_err(|e| keep_divergence_trace(e, out_dir, &trace_name))?;
        let mask_label = format!("uniform:{}", args.sr);
        Ok(RunReport {
            command: "synth".into(),
            config: echo(&cfg, inst.m_true.dims(), Some(args.rank), &mask_label, &inst.mask, &args.preset, true),
            metrics: metrics_of(&out, &inst.m_true, true)?,
            stop: out.stop.to_string(),
            mask_hash: mask_hash(&inst.mask),
            trace_path: write_trace(out_dir, &trace_name, &out.trace)?,
        })
    };
    let runs: Vec<RunReport> = if args.parallel {
        (0..args.runs).into_par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        (0..args.runs).map(one).collect::<Result<_, _>>()?
    };
    let aggregate = if args.runs > 1 { aggregate(&runs) } else { None };
    let output = SynthOutput { runs, aggregate };
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_text(&dir.join("report.json"), &to_json(&output)?)?;
    }
    Ok(output)
}

fn load_data(data: &DataArgs) -> Result<Tensor, BenchError> {
    match &data.input {
        Some(path) => io::read_tensor(path),
        None => Ok(bundled_texture()),
    }
}

fn load_mask(data: &DataArgs, kind: &str, dims: tnnr::Dims, seed: u64) -> Result<(ObservationMask, String), BenchError> {
    if let Some(path) = &data.mask {
        let m = io::read_mask(path)?;
        if m.dims() != dims {
            return Err(BenchError::Format(format!("mask dims {:?} do not match data {dims:?}", m.dims())));
        }
        return Ok((m, path.display().to_string()));
    }
    let kind: MaskKind = kind.parse().map_err(usage)?;
    Ok((structured_mask(kind, dims, seed).map_err(usage)?, kind.to_string()))
}

pub fn cmd_inpaint(args: &InpaintArgs) -> Result<RunReport, BenchError> {
    let reg = parse_regularizer(&args.preset)?;
    let cfg = args.solver.config(IMAGE_LAMBDA, false)?;
    let original = load_data(&args.data)?;
    let (mask, mask_label) = load_mask(&args.data, &args.mask_kind, original.dims(), cfg.seed)?;
    let out_dir = args.solver.out.as_deref();
    let out = run_completion(&original, &mask, &cfg, reg, false)
        .map_err(|e| keep_divergence_trace(e, out_dir, "trace.csv"))?;
    if let Some(path) = &args.output {
        io::write_tensor(path, &out.x)?;
    }
    let report = RunReport {
        command: "inpaint".into(),
        config: echo(&cfg, original.dims(), None, &mask_label, &mask, &args.preset, false),
        metrics: metrics_of(&out, &original, false)?,
        stop: out.stop.to_string(),
        mask_hash: mask_hash(&mask),
        trace_path: write_trace(out_dir, "trace.csv", &out.trace)?,
    };
    if let Some(dir) = out_dir {
        io::write_tensor(&dir.join("recovered.tns"), &out.x)?;
        write_text(&dir.join("report.json"), &to_json(&report)?)?;
    }
    Ok(report)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub mask: String,
    pub mask_hash: String,
    pub preset: String,
    pub metrics: Metrics,
    /// 1 for the best PSNR among rows sharing the mask.
    pub rank: usize,
}

pub const COMPARE_HEADER: &str = "mask,mask_hash,preset,psnr,ssim,rel_error,iters,seconds,rank";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for r in rows {
        let m = &r.metrics;
        let psnr = if m.psnr.is_infinite() { "inf".to_string() } else { format!("{:.6}", m.psnr) };
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6e},{},{:.3},{}\n",
            csv_field(&r.mask), r.mask_hash, r.preset, psnr, m.ssim, m.rel_error, m.iterations, m.seconds, r.rank
        ));
    }
    out
}

pub fn cmd_compare(args: &CompareArgs) -> Result<Vec<CompareRow>, BenchError> {
    if args.presets.is_empty() || args.mask_kind.is_empty() {
        return Err(usage("need at least one preset and one mask"));
    }
    let regs: Vec<Regularizer<f64>> = args.presets.iter().map(|p| parse_regularizer(p)).collect::<Result<_, _>>()?;
    let cfg = args.solver.config(IMAGE_LAMBDA, false)?;
    let original = load_data(&args.data)?;
    let out_dir = args.solver.out.as_deref();
    let mut rows = Vec::new();
    for kind in &args.mask_kind {
        let (mask, label) = load_mask(&args.data, kind, original.dims(), cfg.seed)?;
        let hash = mask_hash(&mask);
        let mut group = Vec::new();
        for (name, &reg) in args.presets.iter().zip(&regs) {
            let trace_name = format!("trace_{}_{}.csv", sanitize(&label), sanitize(name));
            let out = run_completion(&original, &mask, &cfg, reg, false)
                .map_err(|e| keep_divergence_trace(e, out_dir, &trace_name))?;
            write_trace(out_dir, &trace_name, &out.trace)?;
            group.push(CompareRow {
                mask: label.clone(),
                mask_hash: hash.clone(),
                preset: name.clone(),
                metrics: metrics_of(&out, &original, false)?,
                rank: 0,
            });
        }
        let mut order: Vec<usize> = (0..group.len()).collect();
        order.sort_by(|&a, &b| group[b].metrics.psnr.total_cmp(&group[a].metrics.psnr).then(a.cmp(&b)));
        for (place, &idx) in order.iter().enumerate() {
            group[idx].rank = place + 1;
        }
        rows.extend(group);
    }
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_text(&dir.join("compare.csv"), &compare_csv(&rows))?;
    }
    Ok(rows)
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, BenchError> {
    serde_json::to_string_pretty(value).map_err(|e| BenchError::Format(e.to_string()))
}

/// Execute a parsed command line and return what goes to stdout.
pub fn run(cli: &Cli) -> Result<String, BenchError> {
    match &cli.command {
        Command::Synth(a) => to_json(&cmd_synth(a)?),
        Command::Inpaint(a) => to_json(&cmd_inpaint(a)?),
        Command::Compare(a) => Ok(compare_csv(&cmd_compare(a)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("tnnr-bench").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn solver_flags_map_to_config() {
        let cli = parse(&["synth", "--lambda", "3", "--theta1", "0.2", "--theta2", "0.3", "--tol", "1e-5", "--mu", "9"]);
        let Command::Synth(a) = cli.command else { panic!() };
        let cfg = a.solver.config(SYNTH_LAMBDA, true).unwrap();
        assert_eq!(cfg.lambda, 3.0);
        assert_eq!(cfg.tol_ground_truth, Some(1e-5));
        assert_eq!(cfg.mu(), 9.0);
        let cfg = a.solver.config(SYNTH_LAMBDA, false).unwrap();
        assert_eq!(cfg.tol_rel_change, 1e-5);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let cli = parse(&["synth", "--theta1", "0.6"]);
        let Command::Synth(a) = cli.command else { panic!() };
        assert_eq!(a.solver.config(1.0, true).unwrap_err().exit_code(), 2);
        let cli = parse(&["inpaint", "--penalty", "cubic"]);
        let Command::Inpaint(a) = cli.command else { panic!() };
        assert_eq!(a.solver.config(1.0, false).unwrap_err().exit_code(), 2);
        assert!(Cli::try_parse_from(["tnnr-bench", "synth", "--n1", "x"]).is_err());
    }

    #[test]
    fn compare_lists_split() {
        let cli = parse(&["compare", "--presets", "tnnr,tnn,pstnn:3", "--mask-kind", "uniform:0.4;uniform:0.6"]);
        let Command::Compare(a) = cli.command else { panic!() };
        assert_eq!(a.presets, ["tnnr", "tnn", "pstnn:3"]);
        assert_eq!(a.mask_kind, ["uniform:0.4", "uniform:0.6"]);
    }

    #[test]
    fn compare_csv_layout() {
        let m = Metrics { psnr: f64::INFINITY, ssim: 1.0, rel_error: 0.0, iterations: 3, seconds: 0.5 };
        let rows = vec![CompareRow { mask: "grid:4,0".into(), mask_hash: "ab".into(), preset: "tnn".into(), metrics: m, rank: 1 }];
        let csv = compare_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(COMPARE_HEADER));
        let line = lines.next().unwrap();
        let rest = line.strip_prefix("\"grid:4,0\",").expect("mask label is quoted");
        let row: Vec<&str> = rest.split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!(row[2], "inf");
    }
}
