//! CSV tables headed by a `#` line carrying the resolved configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// Experimental coupling `J0` in um^-1.
pub const J0_SI: f64 = 0.144;

pub enum Field {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::F(x)
    }
}

impl From<i64> for Field {
    fn from(x: i64) -> Self {
        Field::I(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::I(x as i64)
    }
}

impl From<&str> for Field {
    fn from(x: &str) -> Self {
        Field::S(x.to_string())
    }
}

impl From<String> for Field {
    fn from(x: String) -> Self {
        Field::S(x)
    }
}

/// 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn render(f: &Field) -> String {
    match f {
        Field::F(x) => float(*x),
        Field::I(i) => i.to_string(),
        Field::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Field::S(s) => s.clone(),
    }
}

#[derive(Serialize)]
struct Header<'a> {
    command: &'a str,
    config: &'a RunConfig,
}

pub fn header_line(command: &str, config: &RunConfig) -> Result<String, CliError> {
    let json = serde_json::to_string(&Header { command, config }).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(format!("# {json}\n"))
}

/// Unit conversion for display.
#[derive(Debug, Clone, Copy)]
pub struct Units {
    pub si: bool,
}

impl Units {
    pub fn energy(&self, x: f64) -> f64 {
        if self.si {
            x * J0_SI
        } else {
            x
        }
    }

    pub fn time(&self, x: f64) -> f64 {
        if self.si {
            x / J0_SI
        } else {
            x
        }
    }

    pub fn energy_label(&self, name: &str) -> String {
        if self.si {
            format!("{name}_per_um")
        } else {
            format!("{name}_J0")
        }
    }

    pub fn time_label(&self, name: &str) -> String {
        if self.si {
            format!("{name}_um")
        } else {
            format!("{name}_per_J0")
        }
    }
}

pub struct Table {
    columns: Vec<String>,
    body: String,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            body: String::new(),
        }
    }

    pub fn row(&mut self, fields: Vec<Field>) {
        debug_assert_eq!(fields.len(), self.columns.len());
        let line: Vec<String> = fields.iter().map(render).collect();
        let _ = writeln!(self.body, "{}", line.join(","));
    }

    pub fn write(&self, dir: &Path, name: &str, command: &str, config: &RunConfig) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        let mut text = header_line(command, config)?;
        text.push_str(&self.columns.join(","));
        text.push('\n');
        text.push_str(&self.body);
        fs::write(dir.join(name), text)?;
        Ok(())
    }
}
