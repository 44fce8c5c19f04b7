//! `--config` files and `*.runconfig.txt` sidecars.
//!
//! Both speak the same dialect: one `key=value` per line, `#` comments,
//! keys spelled like the long flags they stand for (underscores work too).
//! A sidecar written next to an output is therefore a complete recipe —
//! `stpat <subcommand> --config out.runconfig.txt` reruns it bit-for-bit.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use stpat::{Error, Result};

const SUBCOMMANDS: &[&str] = &["summary", "sim", "k", "lista", "localtest", "fit", "diag"];

/// Splices the contents of every `--config FILE` into argv right after the
/// subcommand. Explicit flags stay behind the injected ones, and the parser
/// lets later occurrences win, so the precedence is defaults < config files
/// (in order) < command line.
pub fn expand_argv(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(subpos) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv); // no subcommand: leave the usage error to the parser
    };
    let mut paths: Vec<PathBuf> = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(tok) = it.next() {
        if tok == "--config" {
            if let Some(v) = it.next() {
                paths.push(PathBuf::from(v));
            }
        } else if let Some(v) = tok.strip_prefix("--config=") {
            paths.push(PathBuf::from(v));
        }
    }
    if paths.is_empty() {
        return Ok(argv);
    }
    let mut injected = Vec::new();
    for path in &paths {
        for (key, value) in read_pairs(path)? {
            // `subcommand` documents the run, `config` would recurse
            if key == "subcommand" || key == "config" {
                continue;
            }
            match value.as_str() {
                "true" => injected.push(format!("--{key}")),
                "false" => {}
                _ => {
                    injected.push(format!("--{key}"));
                    injected.push(value);
                }
            }
        }
    }
    let mut out = argv;
    out.splice(subpos + 1..subpos + 1, injected);
    Ok(out)
}

fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "{}:{}: expected key=value, got `{line}`",
                path.display(),
                lineno + 1
            )));
        };
        pairs.push((key.trim().replace('_', "-"), value.trim().to_string()));
    }
    Ok(pairs)
}

/// The effective settings of a finished run, written next to each output
/// as `<output>.runconfig.txt`.
pub struct RunConfig {
    subcommand: &'static str,
    pairs: Vec<(String, String)>,
}

impl RunConfig {
    pub fn new(subcommand: &'static str) -> Self {
        RunConfig { subcommand, pairs: Vec::new() }
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.pairs.push((key.to_string(), value.to_string()));
    }

    pub fn push_opt<T: Display>(&mut self, key: &str, value: Option<&T>) {
        if let Some(v) = value {
            self.push(key, v);
        }
    }

    pub fn push_flag(&mut self, key: &str, on: bool) {
        if on {
            self.push(key, "true");
        }
    }

    pub fn write_beside(&self, output: &Path) -> Result<()> {
        let path = output.with_extension("runconfig.txt");
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut text = format!(
            "# rerun with: stpat {} --config {}\nsubcommand={}\n",
            self.subcommand, name, self.subcommand
        );
        for (k, v) in &self.pairs {
            text.push_str(k);
            text.push('=');
            text.push_str(v);
            text.push('\n');
        }
        std::fs::write(&path, text)?;
        Ok(())
    }
}
