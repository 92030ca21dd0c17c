//! `grmat`: run the trace and class-probability experiments from the shell.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on
//! usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use grmat::char_derivative::{verify_image, ImageReport};
use grmat::conjugacy::{class_table, ClassRow};
use grmat::experiments::{
    chi_square_uniformity, run_fulman_consistency, run_onestep_check, run_single_trace, run_trace_congruence,
    run_trace_equidistribution, sample_matrices, ExperimentConfig, ExperimentError, Mode, TraceShape,
};
use grmat::groups::{enumerate_fq, sample_fq, Family, FamilyName, Section};
use grmat::hayes::{character_sum, hayes_characters, HayesModulus};
use grmat::poly::Poly;
use grmat::ring::Ring;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "grmat", version, about = "Trace statistics of classical groups over Galois rings", args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw Haar samples and write them out.
    Sample(Common),
    /// TV distance of the trace datum from uniform.
    Tv(Common),
    /// One-step conditional equidistribution over Lie fibers.
    Onestep(Common),
    /// Trace congruences `tr(M^i) = sigma(tr(M^{i/p}))`.
    Congruence {
        #[command(flatten)]
        common: Common,
        /// Largest power checked (default 2p^2).
        #[arg(long)]
        max_power: Option<usize>,
    },
    /// TV of a single power trace `tr(M^r)`.
    SingleTrace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        r: u64,
    },
    /// Class frequencies of the level-one group against the product formulas.
    Fulman(Common),
    /// Image of the characteristic-polynomial derivative at base points.
    ImageCheck(Common),
    /// Unit group and character orthogonality for a short-interval modulus.
    Hayes {
        #[command(flatten)]
        common: Common,
        /// Interval length.
        #[arg(long, default_value_t = 1)]
        l: usize,
        /// Modulus, e.g. `1*x^2` or `1 + 1*x`.
        #[arg(long, default_value = "1*x")]
        h: String,
    },
    /// Class table with exact probabilities, or chi-square uniformity with `--samples`.
    Enumerate {
        #[command(flatten)]
        common: Common,
        /// Test the sampler against the enumerated group instead.
        #[arg(long)]
        chi_square: bool,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// gl, sl, sp, so, so+, so- or u.
    #[arg(long, default_value = "gl")]
    family: FamilyName,
    /// Rank parameter (`Sp` acts on dimension 2n).
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    p: u32,
    /// Residue field degree.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Ring level: `GR(p^k, m)`.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Positive trace shape: `tr(M), ..., tr(M^d)`.
    #[arg(long, conflicts_with_all = ["d1", "powers"])]
    d: Option<usize>,
    /// Inverse powers of a two-sided shape.
    #[arg(long, requires = "d2", conflicts_with = "powers")]
    d1: Option<usize>,
    /// Positive powers of a two-sided shape.
    #[arg(long, requires = "d1")]
    d2: Option<usize>,
    /// Explicit comma-separated power list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    powers: Option<Vec<i64>>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Required in Monte-Carlo mode.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Montecarlo)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SectionArg::Standard)]
    section: SectionArg,
    /// Pass threshold for TV (default 2.5 times the noise level).
    #[arg(long)]
    tv_threshold: Option<f64>,
    /// Plain-text `key: value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Machine-readable output path, `-` for stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Montecarlo,
    Exact,
}

#[derive(ValueEnum, Clone, Copy)]
enum SectionArg {
    Standard,
    Perturbed,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

impl Common {
    fn shape(&self) -> TraceShape {
        match (&self.powers, self.d1, self.d2) {
            (Some(powers), _, _) => TraceShape::Powers { powers: powers.clone() },
            (None, Some(d1), Some(d2)) => TraceShape::TwoSided { d1, d2 },
            _ => TraceShape::Positive { d: self.d.unwrap_or(1) },
        }
    }

    /// The resolved experiment config; `seed_needed` enforces an explicit seed
    /// in Monte-Carlo mode.
    fn experiment(&self, seed_needed: bool) -> Result<ExperimentConfig, Usage> {
        let FamilyName(family, sign) = self.family;
        let mode = match self.mode {
            ModeArg::Montecarlo => Mode::Montecarlo,
            ModeArg::Exact => Mode::Exact,
        };
        if seed_needed && mode == Mode::Montecarlo && self.seed.is_none() {
            return Err(Usage("--seed is required in montecarlo mode".into()));
        }
        Ok(ExperimentConfig {
            sign,
            shape: self.shape(),
            samples: self.samples,
            seed: self.seed.unwrap_or(0),
            mode,
            section: match self.section {
                SectionArg::Standard => Section::Standard,
                SectionArg::Perturbed => Section::Perturbed,
            },
            workers: self.workers,
            tv_threshold: self.tv_threshold,
            ..ExperimentConfig::new(family, self.n, self.p, self.m, self.k)
        })
    }
}

/// A usage error: exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Experiment errors caused by the requested parameters count as usage errors.
fn usage_on_config(e: ExperimentError) -> anyhow::Error {
    match e {
        ExperimentError::Config(_) | ExperimentError::TooLarge(_) | ExperimentError::Group(_) => Usage(e.to_string()).into(),
        other => other.into(),
    }
}

/// A finished run: its pass flag, a one-line summary, the JSON body and flat CSV rows.
struct Outcome {
    pass: bool,
    summary: String,
    body: serde_json::Value,
    rows: Vec<serde_json::Value>,
}

impl Outcome {
    fn new<T: Serialize, R: Serialize>(pass: bool, summary: String, body: &T, rows: &[R]) -> Result<Outcome> {
        Ok(Outcome {
            pass,
            summary,
            body: serde_json::to_value(body)?,
            rows: rows.iter().map(serde_json::to_value).collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    command: &'a str,
    pass: bool,
    report: &'a serde_json::Value,
}

#[derive(Serialize)]
struct SampleRow {
    index: usize,
    matrix: String,
}

#[derive(Serialize)]
struct CellRow {
    cell: u128,
    count: u64,
}

#[derive(Serialize)]
struct ImageCheckReport<'a> {
    config: &'a ExperimentConfig,
    checked: usize,
    mismatches: usize,
    images: &'a [ImageReport],
    pass: bool,
}

#[derive(Serialize)]
struct HayesReport {
    config: ExperimentConfig,
    l: usize,
    modulus: String,
    unit_group_order: u64,
    characters: usize,
    orthogonality: bool,
    pass: bool,
}

#[derive(Serialize)]
struct ClassTable<'a> {
    config: &'a ExperimentConfig,
    classes: &'a [ClassRow],
}

fn run(command: &Command) -> Result<(String, &Common, Outcome)> {
    Ok(match command {
        Command::Sample(c) => {
            let cfg = c.experiment(true)?;
            let spec = cfg.group().map_err(usage_on_config)?;
            let mats = sample_matrices(&spec, cfg.section, cfg.seed, cfg.samples, cfg.workers);
            let rows: Vec<SampleRow> = mats.iter().enumerate().map(|(index, m)| SampleRow { index, matrix: m.to_text() }).collect();
            let summary = format!("{} samples from {}", rows.len(), spec.label());
            let body = serde_json::json!({ "config": cfg, "group": spec.label(), "samples": rows });
            ("sample".into(), c, Outcome::new(true, summary, &body, &rows)?)
        }
        Command::Tv(c) => {
            let cfg = c.experiment(true)?;
            cfg.validate_shape().map_err(usage_on_config)?;
            let rep = run_trace_equidistribution(&cfg).map_err(usage_on_config)?;
            let rows: Vec<CellRow> = rep.histogram.iter().map(|(&cell, &count)| CellRow { cell, count }).collect();
            let threshold = rep.threshold.map_or("none".into(), |t| format!("{t:.5}"));
            let summary = format!("{}: TV {:.5} over {} cells (noise {:.5}, threshold {threshold})", rep.group, rep.tv, rep.cell_count, rep.noise);
            ("tv".into(), c, Outcome::new(rep.pass, summary, &rep, &rows)?)
        }
        Command::Onestep(c) => {
            let cfg = c.experiment(true)?;
            let rep = run_onestep_check(&cfg).map_err(usage_on_config)?;
            let summary = format!("{}: {} base points, {} meet the hypothesis, fiber size {}", rep.group, rep.checked, rep.satisfied, rep.fiber_size);
            ("onestep".into(), c, Outcome::new(rep.pass, summary, &rep, &rep.entries)?)
        }
        Command::Congruence { common: c, max_power } => {
            let cfg = c.experiment(true)?;
            let rep = run_trace_congruence(&cfg, *max_power).map_err(usage_on_config)?;
            let summary = format!("{}: {} congruences over {} samples, {} violations", rep.group, rep.checks, rep.samples, rep.violations);
            ("congruence".into(), c, Outcome::new(rep.pass, summary, &rep, std::slice::from_ref(&rep))?)
        }
        Command::SingleTrace { common: c, r } => {
            let cfg = c.experiment(true)?;
            let rep = run_single_trace(&cfg, *r).map_err(usage_on_config)?;
            let pass = rep.tv.pass && rep.recursion != Some(false);
            let rows: Vec<CellRow> = rep.tv.histogram.iter().map(|(&cell, &count)| CellRow { cell, count }).collect();
            let summary = format!("{}: TV of tr(M^{r}) {:.5} (noise {:.5}), recursion {:?}", rep.tv.group, rep.tv.tv, rep.tv.noise, rep.recursion);
            ("single-trace".into(), c, Outcome::new(pass, summary, &rep, &rows)?)
        }
        Command::Fulman(c) => {
            let cfg = c.experiment(false)?;
            let rep = run_fulman_consistency(&cfg).map_err(usage_on_config)?;
            let pass = rep.pass && rep.orbit_check != Some(false);
            let summary = format!("{}: {} elements in {} class buckets, orbit check {:?}", rep.group, rep.order, rep.buckets.len(), rep.orbit_check);
            ("fulman".into(), c, Outcome::new(pass, summary, &rep, &rep.buckets)?)
        }
        Command::ImageCheck(c) => {
            let cfg = c.experiment(false)?;
            let spec = cfg.at_level_one().map_err(usage_on_config)?;
            let lie = spec.lie_algebra();
            let base = match cfg.mode {
                Mode::Exact => enumerate_fq(&spec, grmat::experiments::EXACT_LIMIT).map_err(|e| Usage(e.to_string()))?,
                Mode::Montecarlo => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    (0..cfg.samples).map(|_| sample_fq(&spec, &mut rng)).collect()
                }
            };
            let images = base.iter().map(|a0| verify_image(&spec, &lie, a0)).collect::<Result<Vec<_>, _>>()?;
            let mismatches = images.iter().filter(|r| !r.pass).count();
            let rep = ImageCheckReport { config: &cfg, checked: images.len(), mismatches, images: &images, pass: mismatches == 0 };
            let summary = format!("{}: {} base points, {mismatches} mismatches", spec.label(), images.len());
            ("image-check".into(), c, Outcome::new(rep.pass, summary, &rep, &images)?)
        }
        Command::Hayes { common: c, l, h } => {
            let cfg = c.experiment(false)?;
            let field = Ring::field(cfg.p, cfg.m).map_err(|e| Usage(e.to_string()))?;
            let modulus_poly = Poly::parse_in(&field, h).map_err(|e| Usage(e.to_string()))?;
            let modulus = HayesModulus::new(*l, &modulus_poly).map_err(|e| Usage(e.to_string()))?;
            let order = modulus.unit_group_order();
            let chars = hayes_characters(&modulus, 100_000)?;
            let reps: Vec<Poly> = modulus
                .unit_classes(100_000)?
                .iter()
                .map(|a| modulus.representative(a, l + modulus_poly.degree().max(0) as usize + 1))
                .collect::<Result<_, _>>()?;
            let orthogonality = chars.iter().all(|chi| {
                let s = character_sum(chi, &reps);
                if chi.is_trivial() { s.as_integer() == Some(order as i64) } else { s.is_zero() }
            });
            let pass = orthogonality && chars.len() as u64 == order;
            let rep = HayesReport { config: cfg, l: *l, modulus: modulus_poly.fmt_terms(), unit_group_order: order, characters: chars.len(), orthogonality, pass };
            let summary = format!("modulus ({l}, {}): unit group order {order}, {} characters, orthogonality {orthogonality}", rep.modulus, rep.characters);
            ("hayes".into(), c, Outcome::new(pass, summary, &rep, std::slice::from_ref(&rep))?)
        }
        Command::Enumerate { common: c, chi_square } => {
            if *chi_square {
                let cfg = c.experiment(true)?;
                let rep = chi_square_uniformity(&cfg, 0.001).map_err(usage_on_config)?;
                let summary = format!("{}: chi-square {:.2} on {} dof, p = {:.4}", rep.group, rep.statistic, rep.degrees_of_freedom, rep.p_value);
                ("enumerate".into(), c, Outcome::new(rep.pass, summary, &rep, std::slice::from_ref(&rep))?)
            } else {
                let cfg = c.experiment(false)?;
                let spec = cfg.at_level_one().map_err(usage_on_config)?;
                let field = if cfg.family == Family::U { spec.ring().clone() } else { spec.field().clone() };
                let classes = class_table(cfg.family, spec.dim(), spec.sign(), &field)?;
                let summary = format!("{}: {} class data", spec.label(), classes.len());
                let rep = ClassTable { config: &cfg, classes: &classes };
                ("enumerate".into(), c, Outcome::new(true, summary, &rep, &classes)?)
            }
        }
    })
}

trait LevelOne {
    fn at_level_one(&self) -> Result<grmat::groups::GroupSpec, ExperimentError>;
}

impl LevelOne for ExperimentConfig {
    fn at_level_one(&self) -> Result<grmat::groups::GroupSpec, ExperimentError> {
        ExperimentConfig { k: 1, ..self.clone() }.group()
    }
}

fn csv_text(rows: &[serde_json::Value]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = match rows.first() {
        Some(serde_json::Value::Object(o)) => o.keys().cloned().collect(),
        _ => vec![],
    };
    if !header.is_empty() {
        w.write_record(&header)?;
    }
    for row in rows {
        let cells: Vec<String> = header
            .iter()
            .map(|k| match &row[k] {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Null => String::new(),
                v => v.to_string(),
            })
            .collect();
        w.write_record(&cells)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn write_output(name: &str, common: &Common, out: &Outcome) -> Result<()> {
    let Some(path) = &common.out else {
        println!("{}", out.summary);
        return Ok(());
    };
    let text = match common.format {
        Format::Json => {
            let env = Envelope { schema_version: SCHEMA_VERSION, command: name, pass: out.pass, report: &out.body };
            serde_json::to_string_pretty(&env)? + "\n"
        }
        Format::Csv => csv_text(&out.rows)?,
    };
    if path.as_os_str() == "-" {
        eprintln!("{}", out.summary);
        print!("{text}");
    } else {
        println!("{}", out.summary);
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Turns `key: value` lines into `--key value` arguments.
fn config_args(path: &str) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read config {path}: {e}")))?;
    let mut args = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            bail!(Usage(format!("{path}:{}: expected `key: value`", i + 1)));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            bail!(Usage(format!("{path}:{}: nested config files are not supported", i + 1)));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            v => args.extend([format!("--{key}"), v.to_string()]),
        }
    }
    Ok(args)
}

/// Splices config-file arguments in right after the subcommand so that later
/// command-line flags override them.
fn expand_argv(argv: Vec<String>) -> Result<Vec<String>> {
    let pos = argv.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else { return Ok(argv) };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv.get(pos + 1).cloned().ok_or_else(|| Usage("--config needs a path".into()))?,
    };
    let extra = config_args(&path)?;
    let mut out = argv[..2.min(argv.len())].to_vec();
    out.extend(extra);
    out.extend(argv[2.min(argv.len())..].iter().cloned());
    Ok(out)
}

fn main() -> ExitCode {
    let argv = match expand_argv(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(&cli.command).and_then(|(name, common, out)| {
        write_output(&name, common, &out)?;
        Ok(out.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
