use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use serde_json::Value;

use crate::CliError;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Format {
    Csv,
    Json,
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(r) = n.as_f64().map(round12).and_then(serde_json::Number::from_f64) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn sink(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

/// A closed downstream pipe is not an error for a command-line tool.
fn quiet_pipe(r: io::Result<()>) -> Result<(), CliError> {
    match r {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

pub fn emit(path: &Option<PathBuf>, doc: &Value) -> Result<(), CliError> {
    let mut doc = doc.clone();
    round_value(&mut doc);
    let mut w = sink(path)?;
    quiet_pipe((|| {
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        w.flush()
    })())
}

pub fn emit_phase_csv(path: &Option<PathBuf>, rows: &[[f64; 4]], method: &str) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    quiet_pipe((|| {
        w.write_record(["energy", "phi", "alpha", "theta", "method"])?;
        for r in rows {
            let cells: Vec<String> = r.iter().map(|v| round12(*v).to_string()).collect();
            w.write_record(cells.iter().map(String::as_str).chain([method]))?;
        }
        w.flush()
    })())
}
