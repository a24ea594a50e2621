use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; `-` for stdout. Defaults to `<out-dir>/<command>.<ext>`
    /// when an output directory is set, stdout otherwise.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "AGETHRESH_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a C,
    result: &'a R,
}

impl OutputArgs {
    pub fn sink(&self, command: &str) -> Result<Box<dyn Write>> {
        let path = match (&self.output, &self.out_dir) {
            (Some(p), _) if p.as_os_str() == "-" => None,
            (Some(p), _) => Some(p.clone()),
            (None, Some(dir)) => {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
                Some(dir.join(format!("{command}.{}", self.format.extension())))
            }
            (None, None) => None,
        };
        Ok(match path {
            Some(p) => Box::new(BufWriter::new(create(&p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }

    /// JSON envelope, or CSV rows from `rows` when the format is CSV.
    pub fn emit<C: Serialize, R: Serialize, Row: Serialize>(
        &self,
        command: &str,
        config: &C,
        result: &R,
        rows: impl FnOnce() -> Vec<Row>,
    ) -> Result<()> {
        let mut out = self.sink(command)?;
        match self.format {
            Format::Json => {
                let env = Envelope {
                    schema_version: SCHEMA_VERSION,
                    command,
                    config,
                    result,
                };
                serde_json::to_writer_pretty(&mut out, &env)?;
                writeln!(out)?;
            }
            Format::Csv => write_csv(&mut out, &rows())?,
        }
        out.flush()?;
        Ok(())
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_csv<W: Write, Row: Serialize>(out: W, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
