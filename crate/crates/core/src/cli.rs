//! `lmnet` command-line front end.
//!
//! Settings come from an optional `key = value` config file (`--config`)
//! and are overridden by same-named flags. Relative paths in a config file
//! resolve against the file's directory.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or config,
//! 3 snapshot incompatibility.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataset::{Dataset, Role};
use crate::error::{Error, Result};
use crate::experiment::{
    fit_points_csv, group_analysis, group_report_csv, hidden_size_search, mse, mse_of, parse_validation_csv, recall,
    recall_csv, tabulated_outputs, validation_csv, validation_rows, GroupMap, ValidationRow,
};
use crate::model::Model;
use crate::plot::{render_svg, Series};
use crate::trainer::{train_best, LmConfig};
use crate::Scaler;

pub const SCAN_CSV: &str = "scan.csv";
pub const SNAPSHOT_FILE: &str = "model.snapshot";
pub const HISTORY_CSV: &str = "history.csv";
pub const VALIDATION_REPORT: &str = "validation_report.csv";
pub const RECALL_REPORT: &str = "recall_report.csv";
pub const GROUP_REPORT: &str = "group_report.csv";
pub const FIT_POINTS: &str = "fit_points.csv";
pub const FIT_SIGMA_SVG: &str = "fit_sigma.svg";
pub const FIT_EPS_SVG: &str = "fit_eps.svg";

#[derive(Debug, Parser)]
#[command(
    name = "lmnet",
    version,
    about = "Levenberg-Marquardt perceptron surrogate for composite tensile properties"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan hidden sizes, keep the lowest training MSE, save its snapshot.
    Search(Flags),
    /// Train one hidden size and save its snapshot.
    Train(Flags),
    /// Write the validation table for a snapshot or tabulated outputs.
    Validate(Flags),
    /// Evaluate recall inputs and the group analysis.
    Recall(Flags),
    /// Plot actual vs simulated outputs from the validation table.
    Report(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub train_csv: Option<PathBuf>,
    #[arg(long)]
    pub validation_csv: Option<PathBuf>,
    #[arg(long)]
    pub recall_csv: Option<PathBuf>,
    /// Tabulated simulated outputs used by `validate` in place of a model.
    #[arg(long)]
    pub simulated_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Defaults to `<out-dir>/model.snapshot`.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Inclusive range `a,b`.
    #[arg(long)]
    pub hidden_range: Option<String>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mu0: Option<f64>,
    #[arg(long)]
    pub mu_inc: Option<f64>,
    #[arg(long)]
    pub mu_dec: Option<f64>,
    #[arg(long)]
    pub mu_max: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub emit_plot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train_csv: Option<PathBuf>,
    pub validation_csv: Option<PathBuf>,
    pub recall_csv: Option<PathBuf>,
    pub simulated_csv: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub snapshot: PathBuf,
    pub lm: LmConfig,
    pub hidden: usize,
    pub hidden_range: RangeInclusive<usize>,
    pub emit_plot: bool,
}

const KEYS: &[&str] = &[
    "train-csv",
    "validation-csv",
    "recall-csv",
    "simulated-csv",
    "out-dir",
    "snapshot",
    "hidden",
    "hidden-range",
    "restarts",
    "seed",
    "mu0",
    "mu-inc",
    "mu-dec",
    "mu-max",
    "max-epochs",
    "grad-tol",
    "emit-plot",
];

/// Parses `key = value` lines; `#` starts a comment line. Underscores in
/// keys are read as dashes.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
}

fn parse_range(v: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::Config(format!("invalid hidden-range `{v}`, expected a,b"));
    let (a, b) = v.split_once(',').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<RunConfig> {
        let (file, base) = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (parse_config_file(&text)?, base)
            }
            None => (BTreeMap::new(), PathBuf::new()),
        };
        let path_of = |flag: &Option<PathBuf>, key: &str| -> Option<PathBuf> {
            flag.clone().or_else(|| file.get(key).map(|v| base.join(v)))
        };
        fn value<T: std::str::FromStr + Clone>(
            file: &BTreeMap<String, String>,
            flag: &Option<T>,
            key: &str,
        ) -> Result<Option<T>> {
            match flag {
                Some(v) => Ok(Some(v.clone())),
                None => file.get(key).map(|v| parse_value(key, v)).transpose(),
            }
        }

        let defaults = LmConfig::default();
        let lm = LmConfig {
            mu0: value(&file, &flags.mu0, "mu0")?.unwrap_or(defaults.mu0),
            mu_inc: value(&file, &flags.mu_inc, "mu-inc")?.unwrap_or(defaults.mu_inc),
            mu_dec: value(&file, &flags.mu_dec, "mu-dec")?.unwrap_or(defaults.mu_dec),
            mu_max: value(&file, &flags.mu_max, "mu-max")?.unwrap_or(defaults.mu_max),
            max_epochs: value(&file, &flags.max_epochs, "max-epochs")?.unwrap_or(defaults.max_epochs),
            grad_tol: value(&file, &flags.grad_tol, "grad-tol")?.unwrap_or(defaults.grad_tol),
            seed: value(&file, &flags.seed, "seed")?.unwrap_or(defaults.seed),
            restarts: value(&file, &flags.restarts, "restarts")?.unwrap_or(defaults.restarts),
        };
        lm.validate()?;

        let hidden = value(&file, &flags.hidden, "hidden")?.unwrap_or(15);
        if hidden == 0 {
            return Err(Error::Config("hidden must be at least 1".into()));
        }
        let hidden_range = match flags
            .hidden_range
            .as_deref()
            .or(file.get("hidden-range").map(String::as_str))
        {
            Some(v) => parse_range(v)?,
            None => 10..=25,
        };
        let emit_plot = flags.emit_plot
            || match file.get("emit-plot").map(String::as_str) {
                None | Some("false") | Some("0") | Some("no") => false,
                Some("true") | Some("1") | Some("yes") => true,
                Some(v) => return Err(Error::Config(format!("invalid value `{v}` for `emit-plot`"))),
            };
        let out_dir = path_of(&flags.out_dir, "out-dir").unwrap_or_else(|| PathBuf::from("out"));
        let snapshot = path_of(&flags.snapshot, "snapshot").unwrap_or_else(|| out_dir.join(SNAPSHOT_FILE));
        Ok(RunConfig {
            train_csv: path_of(&flags.train_csv, "train-csv"),
            validation_csv: path_of(&flags.validation_csv, "validation-csv"),
            recall_csv: path_of(&flags.recall_csv, "recall-csv"),
            simulated_csv: path_of(&flags.simulated_csv, "simulated-csv"),
            out_dir,
            snapshot,
            lm,
            hidden,
            hidden_range,
            emit_plot,
        })
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
        path.as_deref()
            .ok_or_else(|| Error::Config(format!("`{key}` is not set")))
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn ensure_out_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.out_dir).map_err(|e| Error::io(&self.out_dir, e))
    }
}

fn read_dataset(path: &Path, role: Role) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dataset::parse_csv(&text, role)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

struct Prepared {
    scaler: Scaler,
    samples: crate::dataset::Samples,
}

/// Loads training data, augments it by reversed forces, and fits the scaler
/// on the augmented set.
fn prepare_training(cfg: &RunConfig) -> Result<Prepared> {
    let raw = read_dataset(cfg.require(&cfg.train_csv, "train-csv")?, Role::Training)?;
    if raw.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let augmented = raw.augment_reversed();
    let scaler = Scaler::fit(&augmented)?;
    let samples = scaler.scale(&augmented)?;
    Ok(Prepared { scaler, samples })
}

fn optional_validation(cfg: &RunConfig) -> Result<Option<Dataset>> {
    cfg.validation_csv
        .as_deref()
        .map(|p| read_dataset(p, Role::Validation))
        .transpose()
}

pub fn cmd_search(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let prep = prepare_training(cfg)?;
    let validation = optional_validation(cfg)?;
    let result = hidden_size_search(&cfg.lm, cfg.hidden_range.clone(), &prep.samples)?;

    let validation_mse = match &validation {
        Some(v) if !v.is_empty() => Some(
            result
                .records
                .iter()
                .map(|r| mse(&Model::new(r.params.clone(), prep.scaler), v))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    cfg.ensure_out_dir()?;
    write_file(&cfg.out(SCAN_CSV), &result.to_csv(validation_mse.as_deref()))?;
    let best = result.best();
    Model::new(best.params.clone(), prep.scaler).save(&cfg.snapshot)?;
    let _ = writeln!(out, "selected h={} train_mse={:.6}", best.hidden, best.mse);
    if let Some(v) = &validation_mse {
        let _ = writeln!(out, "validation_mse={:.6}", v[result.selected]);
    }
    Ok(())
}

pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let prep = prepare_training(cfg)?;
    let validation = optional_validation(cfg)?;
    let best = train_best(&cfg.lm, cfg.hidden, &prep.samples)?;
    let model = Model::new(best.trained.params.clone(), prep.scaler);
    cfg.ensure_out_dir()?;
    model.save(&cfg.snapshot)?;
    write_file(&cfg.out(HISTORY_CSV), &best.trained.history.to_csv())?;
    let _ = writeln!(
        out,
        "h={} seed={} train_mse={:.6} stop={} epochs={}",
        cfg.hidden,
        best.seed,
        best.mse,
        best.trained.state.stop.as_str(),
        best.trained.state.epoch
    );
    if let Some(v) = validation.filter(|v| !v.is_empty()) {
        let _ = writeln!(out, "validation_mse={:.6}", mse(&model, &v)?);
    }
    Ok(())
}

pub fn cmd_validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let validation = read_dataset(cfg.require(&cfg.validation_csv, "validation-csv")?, Role::Validation)?;
    if validation.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let simulated = match &cfg.simulated_csv {
        Some(path) => tabulated_outputs(&validation, &read_dataset(path, Role::Validation)?)?,
        None => Model::load(&cfg.snapshot)?.predict_all(&validation),
    };
    let rows = validation_rows(&validation, &simulated)?;
    cfg.ensure_out_dir()?;
    write_file(&cfg.out(VALIDATION_REPORT), &validation_csv(&rows))?;
    let _ = writeln!(out, "validation_mse={:.6}", mse_of(&validation, &simulated)?);
    if cfg.emit_plot {
        emit_plots(cfg, &rows)?;
    }
    Ok(())
}

pub fn cmd_recall(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let inputs = read_dataset(cfg.require(&cfg.recall_csv, "recall-csv")?, Role::RecallInput)?;
    let training = read_dataset(cfg.require(&cfg.train_csv, "train-csv")?, Role::Training)?;
    let model = Model::load(&cfg.snapshot)?;
    let keys = inputs.inputs();
    let groups = GroupMap::published().restricted_to(&keys);
    let rows = recall(&model, &keys, &groups);
    let entries = group_analysis(&rows, &groups, &training.group_means()?)?;
    cfg.ensure_out_dir()?;
    write_file(&cfg.out(RECALL_REPORT), &recall_csv(&rows))?;
    write_file(&cfg.out(GROUP_REPORT), &group_report_csv(&entries))?;
    let _ = writeln!(out, "recall_rows={} group_entries={}", rows.len(), entries.len());
    Ok(())
}

pub fn cmd_report(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let path = cfg.out(VALIDATION_REPORT);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let rows = parse_validation_csv(&text)?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    emit_plots(cfg, &rows)?;
    let _ = writeln!(out, "plotted {} specimens", rows.len());
    Ok(())
}

fn emit_plots(cfg: &RunConfig, rows: &[ValidationRow]) -> Result<()> {
    let column = |f: fn(&ValidationRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let (sa, ss) = (column(|r| r.sigma_actual), column(|r| r.sigma_sim));
    let (ea, es) = (column(|r| r.eps_actual), column(|r| r.eps_sim));
    cfg.ensure_out_dir()?;
    write_file(&cfg.out(FIT_POINTS), &fit_points_csv(rows))?;
    write_file(
        &cfg.out(FIT_SIGMA_SVG),
        &render_svg(&Series {
            title: "Tensile strength: actual vs simulated",
            y_label: "sigma_M [MPa]",
            actual: &sa,
            simulated: &ss,
        }),
    )?;
    write_file(
        &cfg.out(FIT_EPS_SVG),
        &render_svg(&Series {
            title: "Elongation at break: actual vs simulated",
            y_label: "eps_M [%]",
            actual: &ea,
            simulated: &es,
        }),
    )
}

/// Parses arguments, runs the command, and returns the process exit code.
/// Errors are written to stderr.
type Handler = fn(&RunConfig, &mut dyn Write) -> Result<()>;

pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (flags, cmd): (&Flags, Handler) = match &cli.command {
        Command::Search(f) => (f, cmd_search),
        Command::Train(f) => (f, cmd_train),
        Command::Validate(f) => (f, cmd_validate),
        Command::Recall(f) => (f, cmd_recall),
        Command::Report(f) => (f, cmd_report),
    };
    match RunConfig::resolve(flags).and_then(|cfg| cmd(&cfg, out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
