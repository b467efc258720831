//! Run configuration and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! command = "table1"          # strings may be quoted or bare words
//! potential = ahmed_cubic
//! g = 2.0
//! sizes = [300, 400, 500]     # lists hold numbers or strings
//! fast = true
//! ```
//!
//! Keys may appear once. Unknown keys, duplicate keys and values of the
//! wrong type are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::GridSpec;
use crate::potential::PotentialSpec;
use crate::reference::FAST_SIZES;
use crate::spectrum::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Num(f64),
    Bool(bool),
    List(Vec<Value>),
}

impl Value {
    fn type_name(&self) -> String {
        match self {
            Value::Str(s) => format!("string {s:?}"),
            Value::Num(v) => format!("number {v}"),
            Value::Bool(b) => format!("boolean {b}"),
            Value::List(_) => "list".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    ScanG,
    Converge,
    OracleCompare,
    Table1,
    Table2,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "spectrum" => Command::Spectrum,
            "scan-g" => Command::ScanG,
            "converge" => Command::Converge,
            "oracle-compare" => Command::OracleCompare,
            "table1" => Command::Table1,
            "table2" => Command::Table2,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::ScanG => "scan-g",
            Command::Converge => "converge",
            Command::OracleCompare => "oracle-compare",
            Command::Table1 => "table1",
            Command::Table2 => "table2",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub potential: String,
    pub g: Option<f64>,
    pub k: Option<f64>,
    pub n1: usize,
    pub n2: usize,
    /// Basis sizes for `converge`.
    pub sizes: Vec<usize>,
    /// Levels per size reported by `converge`.
    pub levels: usize,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub g_values: Vec<f64>,
    /// Optional exceptional-point bisection after a `scan-g`.
    pub bracket: Option<(f64, f64)>,
    pub tol_g: f64,
    pub bracket_n: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub fast: bool,
    pub strict: bool,
}

pub const KEYS: &[&str] = &[
    "command",
    "potential",
    "g",
    "k",
    "n1",
    "n2",
    "sizes",
    "levels",
    "grid_half_width",
    "grid_points",
    "tol_abs",
    "tol_rel",
    "delta",
    "g_values",
    "bracket",
    "tol_g",
    "bracket_n",
    "output",
    "format",
    "fast",
    "strict",
];

/// Parsed but untyped key/value pairs.
pub type RawConfig = BTreeMap<String, Value>;

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::ConfigSyntax {
        line,
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn is_bare_word(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_' || c == '/' || c == '.')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "_-./".contains(c))
}

fn parse_scalar(text: &str, line: usize) -> Result<Value> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix('"') {
        let inner = rest
            .strip_suffix('"')
            .ok_or_else(|| syntax(line, "unterminated string"))?;
        if inner.contains('"') {
            return Err(syntax(line, "stray quote inside string"));
        }
        return Ok(Value::Str(inner.to_string()));
    }
    match t {
        "" => return Err(syntax(line, "missing value")),
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    if let Ok(v) = t.parse::<f64>() {
        if !v.is_finite() {
            return Err(syntax(line, format!("non-finite number `{t}`")));
        }
        return Ok(Value::Num(v));
    }
    if is_bare_word(t) {
        return Ok(Value::Str(t.to_string()));
    }
    Err(syntax(line, format!("cannot parse value `{t}`")))
}

fn parse_value(text: &str, line: usize) -> Result<Value> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix('[') {
        let inner = rest
            .strip_suffix(']')
            .ok_or_else(|| syntax(line, "unterminated list"))?
            .trim();
        if inner.is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        let items = inner
            .split(',')
            .map(|item| {
                if item.contains('[') || item.contains(']') {
                    Err(syntax(line, "nested lists are not supported"))
                } else {
                    parse_scalar(item, line)
                }
            })
            .collect::<Result<_>>()?;
        return Ok(Value::List(items));
    }
    parse_scalar(t, line)
}

/// Parses a configuration document into raw key/value pairs.
pub fn parse_document(text: &str) -> Result<RawConfig> {
    let mut out = RawConfig::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| syntax(line, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
            return Err(syntax(line, format!("invalid key `{key}`")));
        }
        if !KEYS.contains(&key) {
            return Err(Error::UnknownKey(key.to_string()));
        }
        let value = parse_value(value, line)?;
        if out.insert(key.to_string(), value).is_some() {
            return Err(syntax(line, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

fn mismatch(key: &str, expected: &'static str, got: &Value) -> Error {
    Error::TypeMismatch {
        key: key.to_string(),
        expected,
        got: got.type_name(),
    }
}

struct Reader<'a>(&'a RawConfig);

impl Reader<'_> {
    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s.clone())),
            Some(v) => Err(mismatch(key, "string", v)),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Num(v)) => Ok(Some(*v)),
            Some(v) => Err(mismatch(key, "number", v)),
        }
    }

    fn size(&self, key: &str) -> Result<Option<usize>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Num(v)) if *v >= 0.0 && v.fract() == 0.0 && *v < 1e15 => Ok(Some(*v as usize)),
            Some(v) => Err(mismatch(key, "non-negative integer", v)),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(v) => Err(mismatch(key, "boolean", v)),
        }
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::List(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Num(x) => Ok(*x),
                    other => Err(mismatch(key, "list of numbers", other)),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(v) => Err(mismatch(key, "list of numbers", v)),
        }
    }

    fn sizes(&self, key: &str) -> Result<Option<Vec<usize>>> {
        let Some(nums) = self.numbers(key)? else {
            return Ok(None);
        };
        nums.iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 && v < 1e15 {
                    Ok(v as usize)
                } else {
                    Err(mismatch(key, "list of non-negative integers", &Value::Num(v)))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl RunConfig {
    /// Builds a validated config, filling documented defaults.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let r = Reader(raw);
        let command_name = r.string("command")?.ok_or_else(|| Error::MissingKey("command".into()))?;
        let command = Command::parse(&command_name).ok_or_else(|| Error::TypeMismatch {
            key: "command".into(),
            expected: "one of spectrum, scan-g, converge, oracle-compare, table1, table2",
            got: format!("{command_name:?}"),
        })?;
        let fast = r.boolean("fast")?.unwrap_or(false);
        let strict = r.boolean("strict")?.unwrap_or(false);

        let potential = match command {
            Command::Table1 | Command::ScanG => r.string("potential")?.unwrap_or_else(|| "ahmed_cubic".into()),
            Command::Table2 => r.string("potential")?.unwrap_or_else(|| "exp_pt".into()),
            _ => r.string("potential")?.ok_or_else(|| Error::MissingKey("potential".into()))?,
        };
        let g = r.number("g")?;
        let k = r.number("k")?;

        let (default_n1, default_n2) = match command {
            Command::Table1 | Command::Table2 if fast => FAST_SIZES,
            Command::Table1 | Command::Table2 => (700, 900),
            Command::ScanG => (400, 500),
            Command::Spectrum | Command::OracleCompare if fast => FAST_SIZES,
            _ => (150, 200),
        };
        let n1 = r.size("n1")?.unwrap_or(default_n1);
        let n2 = r.size("n2")?.unwrap_or(default_n2);
        let sizes = r.sizes("sizes")?.unwrap_or_else(|| vec![100, 200, 300, 400]);
        let levels = r.size("levels")?.unwrap_or(10);

        let grid = GridSpec {
            half_width: r.number("grid_half_width")?.unwrap_or(GridSpec::DEFAULT.half_width),
            points: r.size("grid_points")?.unwrap_or(GridSpec::DEFAULT.points),
        };

        let base = match PotentialSpec::from_name(&potential, g, k)? {
            PotentialSpec::Harmonic { .. } | PotentialSpec::ShiftedHO => Tolerances::ANALYTIC,
            _ => Tolerances::TABLE,
        };
        let tolerances = Tolerances {
            tol_abs: r.number("tol_abs")?.unwrap_or(base.tol_abs),
            tol_rel: r.number("tol_rel")?.unwrap_or(base.tol_rel),
            delta: r.number("delta")?.unwrap_or(base.delta),
        };

        let g_values = r.numbers("g_values")?.unwrap_or_else(|| vec![0.5, 1.0, 1.5, 2.0]);
        let bracket = match r.numbers("bracket")? {
            None => None,
            Some(v) if v.len() == 2 => Some((v[0], v[1])),
            Some(v) => {
                return Err(Error::TypeMismatch {
                    key: "bracket".into(),
                    expected: "list of two numbers",
                    got: format!("list of {}", v.len()),
                })
            }
        };
        let tol_g = r.number("tol_g")?.unwrap_or(1e-3);
        let bracket_n = r.size("bracket_n")?.unwrap_or(300);

        let output = r.string("output")?.map(PathBuf::from);
        let format = match r.string("format")?.as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => {
                return Err(Error::TypeMismatch {
                    key: "format".into(),
                    expected: "csv or json",
                    got: format!("{other:?}"),
                })
            }
        };

        let cfg = RunConfig {
            command,
            potential,
            g,
            k,
            n1,
            n2,
            sizes,
            levels,
            grid,
            tolerances,
            g_values,
            bracket,
            tol_g,
            bracket_n,
            output,
            format,
            fast,
            strict,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.potential_spec()?;
        if self.n1 >= self.n2 || self.n1 < 2 {
            return Err(invalid(format!("sizes must satisfy 2 ≤ n1 < n2, got ({}, {})", self.n1, self.n2)));
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return Err(invalid("converge sizes must be non-empty and each at least 2"));
        }
        self.tolerances.validate()?;
        self.grid.validate()?;
        if !(self.tol_g > 0.0) {
            return Err(invalid("tol_g must be positive"));
        }
        if self.command == Command::ScanG && self.g_values.is_empty() {
            return Err(invalid("g_values must not be empty"));
        }
        Ok(())
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        match self.command {
            Command::Table1 if self.potential != "ahmed_cubic" => {
                Err(invalid("table1 is defined for ahmed_cubic only"))
            }
            Command::Table2 if self.potential != "exp_pt" => Err(invalid("table2 is defined for exp_pt only")),
            Command::Table1 => Ok(PotentialSpec::ahmed_cubic(self.g.unwrap_or(2.0))),
            _ => PotentialSpec::from_name(&self.potential, self.g, self.k),
        }
    }
}

/// Parses a document and builds the config in one step.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    RunConfig::from_raw(&parse_document(text)?)
}
