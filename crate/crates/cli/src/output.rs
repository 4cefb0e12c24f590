use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "qmn-cli/1";

/// Common head of every JSON output.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, B> {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub config: &'a ExperimentConfig,
    #[serde(flatten)]
    pub body: B,
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    csv::WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::io(path, e.into()))
}

/// Collects the files of one command run in a fixed directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.root.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(&path, e.into()))?;
        w.write_all(b"\n")
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    /// Writes a header and rows of already formatted fields.
    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.root.join(name);
        let mut w = csv_writer(&path)?;
        let err = |e: csv::Error| CliError::io(&path, e.into());
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row).map_err(err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }
}
