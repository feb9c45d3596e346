//! Layered knob resolution: command-line flag, then `FLOQUET_*` environment
//! variable (both handled by clap), then the config file, then the default.
//! The config file is a flat TOML table whose keys are the long flag names.

use std::fmt;
use std::path::Path;

use clap::ArgMatches;
use toml::{Table, Value};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag, file, key or value; exit code 2.
    Config(String),
    /// Failure inside the numerics; exit code 3.
    Model(driven_impurity::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Model(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "ConfigError: {msg}"),
            CliError::Model(e) => write!(f, "{}: {e}", e.name()),
            CliError::Io(e) => write!(f, "IoError: {e}"),
        }
    }
}

impl From<driven_impurity::Error> for CliError {
    fn from(e: driven_impurity::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Model errors raised while validating knobs are configuration errors.
pub fn config_err(e: driven_impurity::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Resolved knobs of one command, with the echo used as the CSV preamble.
pub struct Layers<'a> {
    matches: &'a ArgMatches,
    file: Table,
    echo: Vec<(String, String)>,
}

impl<'a> Layers<'a> {
    /// Reads the config file (if any) and rejects keys that are not flags of
    /// the command.
    pub fn new(matches: &'a ArgMatches, command: &clap::Command) -> CliResult<Self> {
        let file = match matches.get_one::<String>("config") {
            Some(path) => load_table(Path::new(path))?,
            None => Table::new(),
        };
        let known: Vec<&str> = command
            .get_arguments()
            .filter_map(|a| a.get_long())
            .filter(|name| *name != "config")
            .collect();
        let mut unknown: Vec<&String> = file.keys().filter(|k| !known.contains(&k.as_str())).collect();
        unknown.sort();
        if let Some(k) = unknown.first() {
            return Err(CliError::Config(format!("unknown config key `{k}`")));
        }
        Ok(Layers {
            matches,
            file,
            echo: Vec::new(),
        })
    }

    fn record(&mut self, key: &str, shown: String) {
        self.echo.push((key.to_string(), shown));
    }

    fn flag<T: Clone + Send + Sync + 'static>(&self, key: &str) -> Option<T> {
        self.matches.get_one::<T>(key).cloned()
    }

    pub fn f64(&mut self, key: &str, default: f64) -> CliResult<f64> {
        let v = match self.flag::<f64>(key) {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(Value::Float(x)) => *x,
                Some(Value::Integer(i)) => *i as f64,
                Some(other) => return Err(type_error(key, "a number", other)),
                None => default,
            },
        };
        if !v.is_finite() {
            return Err(CliError::Config(format!("`{key}` must be finite")));
        }
        self.record(key, format!("{v}"));
        Ok(v)
    }

    pub fn usize(&mut self, key: &str, default: usize) -> CliResult<usize> {
        let v = match self.flag::<usize>(key) {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(Value::Integer(i)) if *i >= 0 => *i as usize,
                Some(other) => return Err(type_error(key, "a non-negative integer", other)),
                None => default,
            },
        };
        self.record(key, format!("{v}"));
        Ok(v)
    }

    pub fn opt_usize(&mut self, key: &str) -> CliResult<Option<usize>> {
        if self.flag::<usize>(key).is_none() && !self.file.contains_key(key) {
            self.record(key, "none".into());
            return Ok(None);
        }
        self.usize(key, 0).map(Some)
    }

    pub fn bool(&mut self, key: &str, default: bool) -> CliResult<bool> {
        let v = match self.flag::<bool>(key) {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(Value::Boolean(b)) => *b,
                Some(other) => return Err(type_error(key, "a boolean", other)),
                None => default,
            },
        };
        self.record(key, format!("{v}"));
        Ok(v)
    }

    pub fn string(&mut self, key: &str, default: &str) -> CliResult<String> {
        let v = match self.flag::<String>(key) {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(Value::String(s)) => s.clone(),
                Some(other) => return Err(type_error(key, "a string", other)),
                None => default.to_string(),
            },
        };
        self.record(key, v.clone());
        Ok(v)
    }

    /// Comma-separated list from a flag or string key, or a TOML array.
    pub fn list(&mut self, key: &str) -> CliResult<Option<Vec<f64>>> {
        let parsed = match self.flag::<String>(key) {
            Some(s) => Some(parse_list(key, &s)?),
            None => match self.file.get(key) {
                Some(Value::String(s)) => Some(parse_list(key, s)?),
                Some(Value::Array(items)) => Some(
                    items
                        .iter()
                        .map(|v| match v {
                            Value::Float(x) => Ok(*x),
                            Value::Integer(i) => Ok(*i as f64),
                            other => Err(type_error(key, "a list of numbers", other)),
                        })
                        .collect::<CliResult<Vec<f64>>>()?,
                ),
                Some(other) => return Err(type_error(key, "a list of numbers", other)),
                None => None,
            },
        };
        let shown = match &parsed {
            Some(v) => v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","),
            None => "none".into(),
        };
        self.record(key, shown);
        Ok(parsed)
    }

    pub fn output(&self) -> Option<String> {
        self.flag::<String>("output").or_else(|| match self.file.get("output") {
            Some(Value::String(s)) => Some(s.clone()),
            _ => None,
        })
    }

    pub fn echo(&self) -> &[(String, String)] {
        &self.echo
    }
}

fn parse_list(key: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{t}` as a number")))
        })
        .collect()
}

fn type_error(key: &str, want: &str, got: &Value) -> CliError {
    CliError::Config(format!("config key `{key}` must be {want}, got `{got}`"))
}

fn load_table(path: &Path) -> CliResult<Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let table: Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("cannot parse config file {}: {e}", path.display())))?;
    if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table()) {
        return Err(CliError::Config(format!("config file must be flat; `{k}` is a table")));
    }
    Ok(table)
}

/// `start, start + step, ..., stop` with the count rounded, so that grids
/// built from decimal steps land on the intended points.
pub fn grid(name: &str, start: f64, stop: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(CliError::Config(format!(
            "{name} grid needs step > 0 and max >= min, got [{start}, {stop}] step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(CliError::Config(format!("{name} grid has too many points")));
    }
    Ok((0..=n).map(|k| round12(start + k as f64 * step)).collect())
}

/// Rounds away the last bits of decimal grid arithmetic (`2.0 + 3*0.05`).
fn round12(x: f64) -> f64 {
    let s = format!("{x:.12}");
    s.parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_decimal_points() {
        let g = grid("T", 2.0, 3.5, 0.05).unwrap();
        assert_eq!(g.len(), 31);
        assert_eq!(g[23], 3.15);
        assert_eq!(*g.last().unwrap(), 3.5);
        assert_eq!(grid("T", 1.0, 1.0, 0.1).unwrap(), vec![1.0]);
        assert!(grid("T", 2.0, 1.0, 0.1).is_err());
        assert!(grid("T", 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn lists_parse() {
        assert_eq!(parse_list("T-list", "2, 2.5,3").unwrap(), vec![2.0, 2.5, 3.0]);
        assert!(parse_list("T-list", "2,x").is_err());
    }
}
