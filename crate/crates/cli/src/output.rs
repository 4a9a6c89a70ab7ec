//! Output files and the run manifest.
//!
//! Everything is rendered in memory first; files are only touched once the
//! whole run succeeded, and each lands through a temporary name so a failed
//! write never leaves a truncated CSV behind.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_err, Result};
use crate::settings::Settings;

/// Rendered files of one run, in write order.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
    /// Free-form lines echoed as `# note:` comments in the manifest.
    pub notes: Vec<String>,
    /// Human-readable summary printed to stdout.
    pub report: Vec<String>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, content: String) {
        self.files.push((name.into(), content));
    }
}

/// What produced a set of outputs. Written as a config file that replays the
/// run when passed back through `--config`.
#[derive(Debug)]
pub struct RunManifest<'a> {
    pub subcommand: &'a str,
    pub resolved: &'a Settings,
    pub master_seed: u64,
    pub outputs: Vec<String>,
    pub notes: &'a [String],
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

impl RunManifest<'_> {
    pub fn file_name(subcommand: &str) -> String {
        format!("{subcommand}.manifest")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# sparse-mimo run manifest\n");
        out.push_str(&format!("# master seed: {}\n", self.master_seed));
        for n in self.notes {
            out.push_str(&format!("# note: {n}\n"));
        }
        out.push_str(&format!("subcommand = {}\n", self.subcommand));
        out.push_str(&format!("tool_version = {VERSION}\n"));
        out.push_str(&format!("outputs = {}\n", self.outputs.join(",")));
        out.push_str(&self.resolved.to_text());
        out
    }
}

/// Writes all outputs plus the manifest into `dir`. Returns the paths.
pub fn write_all(dir: &Path, outputs: &Outputs, manifest: &RunManifest<'_>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files: Vec<(String, &str)> = outputs.files.iter().map(|(n, c)| (n.clone(), c.as_str())).collect();
    let manifest_text = manifest.to_text();
    files.push((RunManifest::file_name(manifest.subcommand), &manifest_text));

    let mut staged = Vec::new();
    for (name, content) in &files {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(e) = fs::write(&tmp, content) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(io_err(&tmp)(e));
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::new();
    for (tmp, dst) in staged {
        fs::rename(&tmp, &dst).map_err(io_err(&dst))?;
        written.push(dst);
    }
    Ok(written)
}
