//! Command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use crate::config::{parse_document, Command, Format, RawConfig, RunConfig, Value};
use crate::error::{Error, Result};
use crate::fd::oracle_compare;
use crate::output::{num, opt_int, opt_num, Artifact};
use crate::potential::PotentialSpec;
use crate::reference::{compare_table1, compare_table2, TableComparison, FAST_TOLERANCE};
use crate::spectrum::{bracket_exceptional_point, convergence_table, scan_g, spectrum_report, SpectrumReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_DEVIATION: u8 = 3;

/// Harmonic-oscillator matrix spectra of PT-symmetric Hamiltonians.
///
/// Flags override values read from `--config`.
#[derive(Debug, Parser)]
#[command(name = "ptspectra", version)]
pub struct Cli {
    /// What to compute; overrides `command` in the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ahmed_cubic, exp_pt, shifted_ho or harmonic.
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    /// Basis sizes for `converge`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub grid_half_width: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub tol_abs: Option<f64>,
    #[arg(long)]
    pub tol_rel: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Couplings for `scan-g`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub g_values: Option<Vec<f64>>,
    /// Bisect for the exceptional point between two couplings.
    #[arg(long, num_args = 2, value_names = ["G_LOW", "G_HIGH"])]
    pub bracket: Option<Vec<f64>>,
    #[arg(long)]
    pub tol_g: Option<f64>,
    #[arg(long)]
    pub bracket_n: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Smaller sizes (300, 400) and 1e-3 acceptance tolerance.
    #[arg(long)]
    pub fast: bool,
    /// Exit with status 3 when a table row misses its tolerance.
    #[arg(long)]
    pub strict: bool,
}

impl Cli {
    /// Flag values as config entries.
    pub fn overrides(&self) -> RawConfig {
        let mut raw = RawConfig::new();
        let mut set = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                raw.insert(key.to_string(), v);
            }
        };
        let n = |v: Option<f64>| v.map(Value::Num);
        let z = |v: Option<usize>| v.map(|x| Value::Num(x as f64));
        set("command", self.command.map(|c| Value::Str(c.as_str().into())));
        set("potential", self.potential.clone().map(Value::Str));
        set("g", n(self.g));
        set("k", n(self.k));
        set("n1", z(self.n1));
        set("n2", z(self.n2));
        set(
            "sizes",
            self.sizes
                .as_ref()
                .map(|s| Value::List(s.iter().map(|&x| Value::Num(x as f64)).collect())),
        );
        set("levels", z(self.levels));
        set("grid_half_width", n(self.grid_half_width));
        set("grid_points", z(self.grid_points));
        set("tol_abs", n(self.tol_abs));
        set("tol_rel", n(self.tol_rel));
        set("delta", n(self.delta));
        set(
            "g_values",
            self.g_values.as_ref().map(|s| Value::List(s.iter().map(|&x| Value::Num(x)).collect())),
        );
        set(
            "bracket",
            self.bracket.as_ref().map(|s| Value::List(s.iter().map(|&x| Value::Num(x)).collect())),
        );
        set("tol_g", n(self.tol_g));
        set("bracket_n", z(self.bracket_n));
        set("output", self.output.as_ref().map(|p| Value::Str(p.display().to_string())));
        set(
            "format",
            self.format.map(|f| {
                Value::Str(match f {
                    Format::Csv => "csv".into(),
                    Format::Json => "json".into(),
                })
            }),
        );
        if self.fast {
            set("fast", Some(Value::Bool(true)));
        }
        if self.strict {
            set("strict", Some(Value::Bool(true)));
        }
        raw
    }

    /// Config file values with flags layered on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::InvalidInput(format!("cannot read config {}: {e}", path.display()))
                })?;
                parse_document(&text)?
            }
            None => RawConfig::new(),
        };
        raw.extend(self.overrides());
        RunConfig::from_raw(&raw)
    }
}

/// Result of a run: the artifact plus whether a table row missed its
/// tolerance or a scan point failed.
pub struct Outcome {
    pub artifact: Artifact,
    pub deviation: bool,
    pub failed_points: usize,
}

fn common_header(a: &mut Artifact, cfg: &RunConfig, potential: &PotentialSpec) {
    a.meta("tool", concat!("ptspectra ", env!("CARGO_PKG_VERSION")));
    a.meta("command", cfg.command);
    a.meta("potential", potential.name());
    if let Some(g) = potential.descriptor().g {
        a.meta("g", num(g));
    }
    if let Some(k) = potential.descriptor().k {
        a.meta("k", num(k));
    }
    a.meta("tol_abs", num(cfg.tolerances.tol_abs));
    a.meta("tol_rel", num(cfg.tolerances.tol_rel));
    a.meta("delta", num(cfg.tolerances.delta));
    a.meta("fast", cfg.fast);
}

fn tol_columns(cfg: &RunConfig) -> [String; 3] {
    [
        num(cfg.tolerances.tol_abs),
        num(cfg.tolerances.tol_rel),
        num(cfg.tolerances.delta),
    ]
}

fn with_tols(mut row: Vec<String>, cfg: &RunConfig) -> Vec<String> {
    row.extend(tol_columns(cfg));
    row
}

fn report_for(cfg: &RunConfig, potential: &PotentialSpec) -> Result<SpectrumReport> {
    spectrum_report(potential, cfg.n1, cfg.n2, &cfg.tolerances)
        .map_err(|e| e.context(format!("{} command", cfg.command)))
}

fn run_spectrum(cfg: &RunConfig, potential: &PotentialSpec) -> Result<Outcome> {
    let report = report_for(cfg, potential)?;
    let mut a = Artifact::new(vec![
        "quantum_number",
        "energy",
        "imag",
        "cross_size_delta",
        "parity_weight",
        "classification",
        "tol_abs",
        "tol_rel",
        "delta",
    ]);
    common_header(&mut a, cfg, potential);
    a.meta("sizes", format!("{}, {}", cfg.n1, cfg.n2));
    a.meta("converged_cutoff", opt_num(report.converged_cutoff));
    for l in &report.real_levels {
        a.push(with_tols(
            vec![
                l.quantum_number.to_string(),
                num(l.energy),
                num(l.imag_residue),
                num(l.cross_size_delta),
                opt_num(l.parity_weight),
                "real".into(),
            ],
            cfg,
        ));
    }
    for z in &report.complex_levels {
        a.push(with_tols(
            vec![String::new(), num(z.re), num(z.im), String::new(), String::new(), "complex".into()],
            cfg,
        ));
    }
    a.set_json(&report)?;
    Ok(Outcome {
        artifact: a,
        deviation: false,
        failed_points: 0,
    })
}

#[derive(Serialize)]
struct ScanOutput<'a> {
    scan: &'a crate::spectrum::GScanResult,
    bisection: Option<(f64, f64)>,
    bisection_size: Option<usize>,
}

fn run_scan(cfg: &RunConfig, potential: &PotentialSpec) -> Result<Outcome> {
    if !matches!(potential, PotentialSpec::AhmedCubicPT { .. }) {
        return Err(Error::InvalidInput("scan-g is defined for ahmed_cubic only".into()));
    }
    let scan = scan_g(&cfg.g_values, cfg.n1, cfg.n2, &cfg.tolerances)?;
    let bisection = match cfg.bracket {
        Some((lo, hi)) => Some(
            bracket_exceptional_point(lo, hi, cfg.bracket_n, cfg.tol_g, &cfg.tolerances)
                .map_err(|e| e.context("scan-g bisection"))?,
        ),
        None => None,
    };
    let mut a = Artifact::new(vec!["g", "real_count", "status", "tol_abs", "tol_rel", "delta"]);
    a.meta("tool", concat!("ptspectra ", env!("CARGO_PKG_VERSION")));
    a.meta("command", cfg.command);
    a.meta("potential", "ahmed_cubic");
    a.meta("tol_abs", num(cfg.tolerances.tol_abs));
    a.meta("tol_rel", num(cfg.tolerances.tol_rel));
    a.meta("delta", num(cfg.tolerances.delta));
    a.meta("sizes", format!("{}, {}", cfg.n1, cfg.n2));
    for (lo, hi) in &scan.merge_brackets {
        a.meta("merge_bracket", format!("{}, {}", num(*lo), num(*hi)));
    }
    if let Some((lo, hi)) = bisection {
        a.meta("bisection_size", cfg.bracket_n);
        a.meta("bisection_tol_g", num(cfg.tol_g));
        a.meta("bisection", format!("{}, {}", num(lo), num(hi)));
    }
    for (g, c) in scan.g_values.iter().zip(&scan.real_counts) {
        let status = if c.is_some() { "ok" } else { "failed" };
        a.push(with_tols(vec![num(*g), opt_int(*c), status.into()], cfg));
    }
    a.set_json(&ScanOutput {
        scan: &scan,
        bisection,
        bisection_size: bisection.map(|_| cfg.bracket_n),
    })?;
    Ok(Outcome {
        artifact: a,
        deviation: false,
        failed_points: scan.failures.len(),
    })
}

#[derive(Serialize)]
struct ConvergeRow {
    size: usize,
    levels: Vec<f64>,
}

fn run_converge(cfg: &RunConfig, potential: &PotentialSpec) -> Result<Outcome> {
    let table = convergence_table(potential, &cfg.sizes, &cfg.tolerances, cfg.levels)
        .map_err(|e| e.context("converge command"))?;
    let mut a = Artifact::new(vec!["size", "level_index", "energy", "tol_abs", "tol_rel", "delta"]);
    common_header(&mut a, cfg, potential);
    let sizes: Vec<String> = cfg.sizes.iter().map(|n| n.to_string()).collect();
    a.meta("sizes", sizes.join(", "));
    a.meta("levels", cfg.levels);
    for (n, levels) in &table {
        for (i, e) in levels.iter().enumerate() {
            a.push(with_tols(vec![n.to_string(), i.to_string(), num(*e)], cfg));
        }
    }
    let rows: Vec<ConvergeRow> = table
        .into_iter()
        .map(|(size, levels)| ConvergeRow { size, levels })
        .collect();
    a.set_json(&rows)?;
    Ok(Outcome {
        artifact: a,
        deviation: false,
        failed_points: 0,
    })
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    report: &'a SpectrumReport,
    grid: crate::fd::GridSpec,
    matches: &'a [crate::fd::OracleMatch],
}

fn run_oracle(cfg: &RunConfig, potential: &PotentialSpec) -> Result<Outcome> {
    let report = report_for(cfg, potential)?;
    let matches = oracle_compare(potential, &report, &cfg.grid).map_err(|e| e.context("oracle-compare command"))?;
    let mut a = Artifact::new(vec![
        "quantum_number",
        "energy_mdm",
        "energy_fd",
        "gap",
        "flagged",
        "beyond_grid",
        "tol_abs",
        "tol_rel",
        "delta",
    ]);
    common_header(&mut a, cfg, potential);
    a.meta("sizes", format!("{}, {}", cfg.n1, cfg.n2));
    a.meta("grid_half_width", num(cfg.grid.half_width));
    a.meta("grid_points", cfg.grid.points);
    for m in &matches {
        a.push(with_tols(
            vec![
                m.quantum_number.to_string(),
                num(m.energy_mdm),
                opt_num(m.energy_fd),
                opt_num(m.gap),
                m.flagged.to_string(),
                m.beyond_grid.to_string(),
            ],
            cfg,
        ));
    }
    a.set_json(&OracleOutput {
        report: &report,
        grid: cfg.grid,
        matches: &matches,
    })?;
    Ok(Outcome {
        artifact: a,
        deviation: false,
        failed_points: 0,
    })
}

#[derive(Serialize)]
struct TableOutput<'a> {
    comparison: &'a TableComparison,
    report: &'a SpectrumReport,
}

fn run_table(cfg: &RunConfig, potential: &PotentialSpec) -> Result<Outcome> {
    let report = report_for(cfg, potential)?;
    let tolerance = cfg.fast.then_some(FAST_TOLERANCE);
    let comparison = match cfg.command {
        Command::Table1 => compare_table1(&report, tolerance),
        _ => compare_table2(&report, tolerance),
    };
    let mut a = Artifact::new(vec![
        "kind",
        "label",
        "reference",
        "computed",
        "quantum_number",
        "parity_weight",
        "deviation",
        "tolerance",
        "pass",
        "provenance",
        "tol_abs",
        "tol_rel",
        "delta",
    ]);
    common_header(&mut a, cfg, potential);
    a.meta("sizes", format!("{}, {}", cfg.n1, cfg.n2));
    if let Some((found, expected)) = comparison.count_mismatch {
        a.meta("count_mismatch", format!("{found} converged levels, table lists {expected}"));
    }
    for r in &comparison.rows {
        a.push(with_tols(
            vec![
                "reference".into(),
                r.label.to_string(),
                num(r.reference),
                opt_num(r.computed),
                opt_int(r.quantum_number),
                opt_num(r.parity_weight),
                opt_num(r.deviation),
                num(r.tolerance),
                r.pass.to_string(),
                r.provenance.clone(),
            ],
            cfg,
        ));
    }
    for l in &comparison.interleaved_odd {
        a.push(with_tols(
            vec![
                "interleaved_odd".into(),
                String::new(),
                String::new(),
                num(l.energy),
                l.quantum_number.to_string(),
                opt_num(l.parity_weight),
                String::new(),
                String::new(),
                String::new(),
                "computed, not listed in the table".into(),
            ],
            cfg,
        ));
    }
    a.set_json(&TableOutput {
        comparison: &comparison,
        report: &report,
    })?;
    Ok(Outcome {
        deviation: !comparison.all_pass(),
        artifact: a,
        failed_points: 0,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let potential = cfg.potential_spec()?;
    match cfg.command {
        Command::Spectrum => run_spectrum(cfg, &potential),
        Command::ScanG => run_scan(cfg, &potential),
        Command::Converge => run_converge(cfg, &potential),
        Command::OracleCompare => run_oracle(cfg, &potential),
        Command::Table1 | Command::Table2 => run_table(cfg, &potential),
    }
}

/// Machine-readable error record printed to stderr.
pub fn error_record(err: &Error, command: Option<Command>) -> String {
    serde_json::json!({
        "error": err.kind(),
        "message": err.to_string(),
        "command": command.map(|c| c.as_str()),
    })
    .to_string()
}

fn fail(err: &Error, command: Option<Command>) -> ExitCode {
    eprintln!("{}", error_record(err, command));
    ExitCode::from(if err.is_config() { EXIT_CONFIG } else { EXIT_NUMERICAL })
}

pub fn main_with(cli: Cli) -> ExitCode {
    let cfg = match cli.resolve() {
        Ok(c) => c,
        Err(e) => return fail(&e, cli.command),
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e, Some(cfg.command)),
    };
    if let Err(e) = outcome.artifact.write(cfg.format, cfg.output.as_deref()) {
        return fail(&e, Some(cfg.command));
    }
    if outcome.failed_points > 0 {
        eprintln!(
            "{}",
            serde_json::json!({
                "error": "scan_point_failed",
                "message": format!("{} scan point(s) failed", outcome.failed_points),
                "command": cfg.command.as_str(),
            })
        );
        return ExitCode::from(EXIT_NUMERICAL);
    }
    if cfg.strict && outcome.deviation {
        eprintln!(
            "{}",
            serde_json::json!({
                "error": "acceptance_deviation",
                "message": "at least one table row is outside its tolerance",
                "command": cfg.command.as_str(),
            })
        );
        return ExitCode::from(EXIT_DEVIATION);
    }
    ExitCode::from(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ptspectra").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "command = spectrum\npotential = exp_pt\nn1 = 400\nn2 = 500\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = cli(&["--config", p, "--n2", "900"]).resolve().unwrap();
        assert_eq!((cfg.n1, cfg.n2), (400, 900));
        let cfg = cli(&["table1", "--config", p, "--potential", "ahmed_cubic"]).resolve().unwrap();
        assert_eq!(cfg.command, Command::Table1);
    }

    #[test]
    fn list_flags() {
        let cfg = cli(&["scan-g", "--g-values", "0.5,1.0", "--bracket", "2.2", "2.6"]).resolve().unwrap();
        assert_eq!(cfg.g_values, vec![0.5, 1.0]);
        assert_eq!(cfg.bracket, Some((2.2, 2.6)));
        let cfg = cli(&["converge", "--potential", "exp_pt", "--sizes", "100,200"]).resolve().unwrap();
        assert_eq!(cfg.sizes, vec![100, 200]);
    }

    #[test]
    fn spectrum_rows() {
        let cfg = cli(&["spectrum", "--potential", "harmonic", "--k", "0.25", "--n1", "100", "--n2", "150"])
            .resolve()
            .unwrap();
        let out = run(&cfg).unwrap();
        let rows = &out.artifact.rows;
        assert!(rows.len() > 20);
        for (i, r) in rows.iter().take(15).enumerate() {
            assert_eq!(r[0], i.to_string());
            assert!((r[1].parse::<f64>().unwrap() - (i as f64 + 0.5)).abs() < 1e-9);
            assert_eq!(r[5], "real");
            assert_eq!(r[8], num(1e-6));
        }
    }

    #[test]
    fn error_records_are_json() {
        let err = Error::MissingKey("command".into());
        let v: serde_json::Value = serde_json::from_str(&error_record(&err, None)).unwrap();
        assert_eq!(v["error"], "missing_key");
        assert!(err.is_config());
    }
}
