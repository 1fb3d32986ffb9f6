use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use cavity_core::finite::format_float;

use crate::args::{Format, OutputArgs};

/// Where a report goes: an explicit file, a file named `stem` in the output
/// directory, or stdout.
pub struct Sink {
    pub format: Format,
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(args: &OutputArgs, stem: &str, jsonl: bool) -> Self {
        let ext = match (args.format, jsonl) {
            (Format::Csv, _) => "csv",
            (Format::Json, true) => "jsonl",
            (Format::Json, false) => "json",
        };
        let path = args
            .output
            .clone()
            .or_else(|| args.output_dir.as_ref().map(|d| d.join(format!("{stem}.{ext}"))));
        Self {
            format: args.format,
            path,
        }
    }

    /// Directory for side files such as failing instances.
    pub fn dir(&self) -> Option<&Path> {
        self.path
            .as_deref()
            .map(|p| p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")))
    }

    pub fn write(&self, text: &str) -> io::Result<()> {
        match &self.path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                fs::write(p, text)
            }
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

/// Pretty JSON with a trailing newline. `serde_json` prints the shortest
/// representation that parses back to the same `f64`.
pub fn json(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn json_line(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string(v).expect("values serialize");
    s.push('\n');
    s
}

/// CSV cell for a float: 17 significant digits, `inf`/`nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format_float(x)
    } else {
        x.to_string()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
