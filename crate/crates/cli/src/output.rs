//! Output destinations and encodings.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::args::Format;
use crate::error::CliError;

/// Default output directory when `--output` is absent.
pub const OUT_DIR_ENV: &str = "RIDGE_ANOVA_OUT_DIR";

/// Where tables go. Files are created up front so an unwritable path fails
/// before any computation.
pub struct Sink {
    format: Format,
    target: Target,
}

enum Target {
    Stdout,
    File(PathBuf, BufWriter<File>),
}

fn create(path: &Path) -> Result<File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::usage(format!("cannot create directory {}: {e}", dir.display())))?;
    }
    File::create(path).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

impl Sink {
    pub fn open(output: Option<PathBuf>, format: Format, command: &str) -> Result<Self, CliError> {
        let path = output.or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|d| !d.is_empty())
                .map(|d| PathBuf::from(d).join(format!("{command}.{}", format.extension())))
        });
        let target = match path {
            None => Target::Stdout,
            Some(p) => {
                let f = create(&p)?;
                Target::File(p, BufWriter::new(f))
            }
        };
        Ok(Self { format, target })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// Path written to, if not stdout.
    pub fn path(&self) -> Option<&Path> {
        match &self.target {
            Target::Stdout => None,
            Target::File(p, _) => Some(p),
        }
    }

    pub fn write<T: Serialize>(self, rows: &[T]) -> Result<(), CliError> {
        let format = self.format;
        match self.target {
            Target::Stdout => encode(rows, format, io::stdout().lock()),
            Target::File(p, mut w) => {
                encode(rows, format, &mut w)?;
                w.flush().map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display())))
            }
        }
    }
}

impl Sink {
    /// Pre-rendered text, written as is.
    pub fn write_text(self, text: &str) -> Result<(), CliError> {
        match self.target {
            Target::Stdout => io::stdout().lock().write_all(text.as_bytes()).map_err(Into::into),
            Target::File(p, mut w) => w
                .write_all(text.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display()))),
        }
    }
}

pub fn encode<T: Serialize, W: Write>(rows: &[T], format: Format, mut out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => ridge_anova::table::write_csv(rows, out)?,
        Format::Jsonl => {
            for r in rows {
                serde_json::to_writer(&mut out, r).map_err(|e| CliError::usage(e.to_string()))?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// A plot file opened early for the same reason as [`Sink`].
pub struct PlotSink(Option<(PathBuf, File)>);

impl PlotSink {
    pub fn open(path: Option<PathBuf>) -> Result<Self, CliError> {
        Ok(Self(match path {
            None => None,
            Some(p) => {
                let f = create(&p)?;
                Some((p, f))
            }
        }))
    }

    pub fn wanted(&self) -> bool {
        self.0.is_some()
    }

    pub fn write(self, svg: impl FnOnce() -> String) -> Result<(), CliError> {
        if let Some((p, mut f)) = self.0 {
            f.write_all(svg().as_bytes())
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display())))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: f64,
        b: Option<f64>,
        name: &'static str,
    }

    #[test]
    fn jsonl_one_object_per_line() {
        let rows = [
            Row {
                a: 1.5,
                b: None,
                name: "x",
            },
            Row {
                a: 0.1,
                b: Some(2.0),
                name: "y",
            },
        ];
        let mut buf = Vec::new();
        encode(&rows, Format::Jsonl, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], r#"{"a":1.5,"b":null,"name":"x"}"#);
    }

    #[test]
    fn csv_header_and_empty_option() {
        let rows = [Row {
            a: 0.25,
            b: None,
            name: "z",
        }];
        let mut buf = Vec::new();
        encode(&rows, Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b,name\n0.25,,z\n");
    }
}
