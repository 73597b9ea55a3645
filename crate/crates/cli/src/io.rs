//! File conventions shared by the subcommands.
//!
//! A *completion file* holds one completion per line. A line that is a JSON
//! string literal is unquoted, which is how multi-line completions are
//! stored; any other line is taken verbatim. Blank lines are skipped.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Completions with their 1-based line numbers.
pub fn read_completions(path: &Path) -> Result<Vec<(usize, String)>> {
    Ok(read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, unquote(l)))
        .collect())
}

pub fn unquote(line: &str) -> String {
    if line.starts_with('"') {
        if let Ok(serde_json::Value::String(s)) = serde_json::from_str(line) {
            return s;
        }
    }
    line.to_owned()
}

/// Writes one completion as a line, quoting it when it spans lines or would
/// otherwise read back as a JSON string.
pub fn completion_line(s: &str) -> String {
    if s.contains('\n') || s.contains('\r') || s.starts_with('"') {
        serde_json::to_string(s).expect("string serialization cannot fail")
    } else {
        s.to_owned()
    }
}

/// Destination of a command's main output.
pub struct Output {
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(path: Option<PathBuf>) -> Self {
        Output { path }
    }

    pub fn write(&self, text: &str) -> Result<()> {
        match &self.path {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }

    pub fn json<T: serde::Serialize>(&self, value: &T) -> Result<()> {
        self.write(&(serde_json::to_string_pretty(value)? + "\n"))
    }
}
