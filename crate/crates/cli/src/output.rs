use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::{Format, OutputArgs};
use crate::error::CliError;

/// Version of the envelope layout described by `schema/report.schema.json`.
pub const SCHEMA_VERSION: &str = "1";

/// Printed with every `report` payload and in the README.
pub const LIMITATIONS: &str = "The g -> infinity Poisson limit and the q > g^K regime of the \
unconditional theorem cannot be instantiated at desk scale. The gap columns compare finite-genus \
census and random-matrix moments to lambda^n and carry no pass/fail threshold.";

#[derive(Debug, Serialize)]
pub struct Execution {
    pub workers: usize,
    pub duration_seconds: f64,
}

/// Everything needed to reproduce `payload`: rerunning `command` with
/// `parameters` yields the same payload bytes. `execution` is the only part
/// that varies between runs.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, P: Serialize> {
    pub schema_version: &'static str,
    pub command: &'a str,
    pub version: &'static str,
    pub parameters: Value,
    pub payload: &'a P,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub execution: Option<Execution>,
}

/// A CSV view of a payload: header plus rows.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub fn emit<P: Serialize>(
    out: &OutputArgs,
    command: &str,
    parameters: Value,
    payload: &P,
    table: impl FnOnce(&P) -> Table,
    execution: Execution,
) -> Result<(), CliError> {
    let bytes = match out.format {
        Format::Json => {
            let env = Envelope {
                schema_version: SCHEMA_VERSION,
                command,
                version: env!("CARGO_PKG_VERSION"),
                parameters,
                payload,
                execution: (!out.no_timing).then_some(execution),
            };
            let mut s = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Runtime(e.to_string()))?;
            s.push(b'\n');
            s
        }
        Format::Csv => {
            let t = table(payload);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.header).map_err(|e| CliError::Runtime(e.to_string()))?;
            for r in &t.rows {
                w.write_record(r).map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?
        }
    };
    match &out.out {
        Some(path) => write_file(path, &bytes),
        None => io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Runtime(format!("stdout: {e}"))),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}
