//! Output files. Every file carries provenance: result tables start with
//! `# `-prefixed lines, matrix files get a `.provenance.json` sidecar, and
//! SVG charts embed it in a comment.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fairrec::io::{format_sig, write_utility_csv};
use fairrec::lp::{FEASIBILITY_TOL, OPTIMALITY_TOL};
use fairrec::optimizer::nash::CERTIFICATE_TOL;
use fairrec::optimizer::SOLUTION_TOL;
use fairrec::UtilityMatrix;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub tolerances: Value,
    pub seeds: Vec<u64>,
}

impl Provenance {
    pub fn new(command: &str, config: &impl Serialize, seeds: Vec<u64>) -> Result<Self> {
        Ok(Self {
            tool: "fairrec",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            tolerances: json!({
                "lp_feasibility": FEASIBILITY_TOL,
                "lp_optimality": OPTIMALITY_TOL,
                "solution": SOLUTION_TOL,
                "concave_certificate": CERTIFICATE_TOL,
            }),
            seeds,
        })
    }

    fn preamble(&self, prefix: &str) -> String {
        format!(
            "{prefix}{} {} {}\n{prefix}config {}\n{prefix}tolerances {}\n{prefix}seeds {}\n",
            self.tool,
            self.version,
            self.command,
            self.config,
            self.tolerances,
            serde_json::to_string(&self.seeds).expect("seeds serialize")
        )
    }
}

/// Owner of one output directory.
pub struct OutputDir {
    root: PathBuf,
    provenance: Provenance,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path, provenance: Provenance) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            provenance,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes a result table. Cells are written as given; use [`num`] for
    /// numbers.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut text = self.provenance.preamble("# ");
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    /// Writes a utility matrix and its provenance sidecar.
    pub fn matrix(&mut self, name: &str, w: &UtilityMatrix, extra: Value) -> Result<()> {
        let mut buffer = Vec::new();
        write_utility_csv(&mut buffer, w)?;
        self.write(name, &buffer)?;
        let mut sidecar = serde_json::to_value(&self.provenance)?;
        sidecar["matrix"] = extra;
        let stem = name.trim_end_matches(".csv");
        self.write(
            &format!("{stem}.provenance.json"),
            (serde_json::to_string_pretty(&sidecar)? + "\n").as_bytes(),
        )
    }

    pub fn svg(&mut self, name: &str, body: &str) -> Result<()> {
        let comment = self.provenance.preamble("").replace("--", "- -");
        let text = body.replacen("<svg", &format!("<!--\n{comment}-->\n<svg"), 1);
        self.write(name, text.as_bytes())
    }

    /// Writes `provenance.json` listing every file written so far.
    pub fn finish(mut self) -> Result<Vec<String>> {
        let mut record = serde_json::to_value(&self.provenance)?;
        record["outputs"] = json!(self.written);
        let text = serde_json::to_string_pretty(&record)? + "\n";
        self.write("provenance.json", text.as_bytes())?;
        Ok(self.written)
    }
}

pub fn num(x: f64) -> String {
    format_sig(x)
}

/// Writes `error.json` into `dir`, creating it if needed. Failures here are
/// reported on stderr only.
pub fn write_error_record(dir: &Path, command: &str, kind: &str, code: u8, err: &anyhow::Error) {
    let record = json!({
        "tool": "fairrec",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "kind": kind,
        "exit_code": code,
        "message": err.to_string(),
        "causes": err.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>(),
    });
    let path = dir.join("error.json");
    let result = fs::create_dir_all(dir).and_then(|_| {
        fs::write(&path, serde_json::to_string_pretty(&record).expect("record serializes") + "\n")
    });
    if let Err(e) = result {
        eprintln!("could not write {}: {e}", path.display());
    }
}
