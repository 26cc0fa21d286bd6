//! Flat JSON reports and CSV tables.

use std::io::Write;
use std::path::Path;

use hslab_core::params::ProblemParams;
use hslab_core::quadrature::GridSpec;
use hslab_core::testgen::GENERATOR_NAME;
use serde_json::{Map, Value};

use crate::CliError;

/// Flat map of stable field names; keys serialize in sorted order.
#[derive(Debug, Default)]
pub struct Report(Map<String, Value>);

impl Report {
    pub fn new(command: &str, params: &ProblemParams, grid: &GridSpec, seed: u64) -> Self {
        let mut r = Report::default();
        r.text("command", command);
        r.text("version", env!("CARGO_PKG_VERSION"));
        r.int("n", params.n as u64);
        r.num("p", params.p);
        r.num("s", params.s);
        r.num("mu", params.mu);
        if let Some(q) = params.q {
            r.num("q", q);
        }
        r.num("p_star", params.p_star);
        r.num("p_star_s", params.p_star_s);
        r.num("mu1", params.mu1);
        r.grid(grid);
        r.int("seed", seed);
        r.text("generator", GENERATOR_NAME);
        r
    }

    pub fn grid(&mut self, grid: &GridSpec) {
        self.num("grid_r_min", grid.r_min);
        self.num("grid_r_max", grid.r_max);
        self.int("grid_m", grid.m as u64);
    }

    pub fn num(&mut self, key: &str, v: f64) {
        self.0.insert(
            key.into(),
            serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number),
        );
    }

    pub fn int(&mut self, key: &str, v: u64) {
        self.0.insert(key.into(), Value::from(v));
    }

    pub fn flag(&mut self, key: &str, v: bool) {
        self.0.insert(key.into(), Value::Bool(v));
    }

    pub fn text(&mut self, key: &str, v: &str) {
        self.0.insert(key.into(), Value::String(v.into()));
    }

    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        let text =
            serde_json::to_string_pretty(&self.0).map_err(|e| CliError::Io(e.to_string()))?;
        match path {
            Some(p) => std::fs::write(p, text + "\n")
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                writeln!(out, "{text}")?;
                Ok(())
            }
        }
    }
}

/// Number formatting shared by every table: shortest round-trip form.
pub fn cell(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_table(
    path: Option<&Path>,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(
            std::fs::File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
