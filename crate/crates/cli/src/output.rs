// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Artifact files: JSON envelopes, commented CSV tables and gnuplot scripts.
//! All writes go to a temporary file in the target directory and are renamed
//! into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const TOOL: &str = "lorentz-lab";

/// The fields every JSON artifact carries around its `result`.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub complete: bool,
    pub error: Option<String>,
    pub config: &'a C,
    pub certificate_sha256: Option<&'a str>,
    pub result: Option<R>,
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let target = self.path(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)
            .with_context(|| format!("temporary file in {}", self.dir.display()))?;
        tmp.write_all(contents.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target)
            .with_context(|| format!("renaming into {}", target.display()))?;
        Ok(target)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn write_json<C: Serialize, R: Serialize>(
        &self,
        name: &str,
        command: &str,
        config: &C,
        certificate_sha256: Option<&str>,
        result: Option<R>,
        error: Option<String>,
    ) -> Result<PathBuf> {
        let env = Envelope {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command,
            complete: error.is_none(),
            error,
            config,
            certificate_sha256,
            result,
        };
        let mut text = serde_json::to_string_pretty(&env)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// `body` is the CSV header plus rows; a `#` preamble records the command,
    /// the config and the certificate hash.
    pub fn write_csv<C: Serialize>(
        &self,
        name: &str,
        command: &str,
        config: &C,
        certificate_sha256: Option<&str>,
        complete: bool,
        body: &str,
    ) -> Result<PathBuf> {
        let mut text = format!("# {TOOL} {} {command}\n", env!("CARGO_PKG_VERSION"));
        text.push_str(&format!("# config: {}\n", serde_json::to_string(config)?));
        text.push_str(&format!(
            "# certificate_sha256: {}\n",
            certificate_sha256.unwrap_or("none")
        ));
        text.push_str(&format!("# complete: {complete}\n"));
        text.push_str(body);
        self.write(name, &text)
    }
}

/// Gnuplot script plotting columns `x:y` of a CSV written by [`OutDir::write_csv`].
pub fn gnuplot_script(csv: &str, title: &str, xlabel: &str, ylabel: &str, series: &[(usize, usize, &str)], log: bool) -> String {
    let mut s = String::new();
    s.push_str("# Data-only plot; run with `gnuplot -p <script>`.\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str(&format!("set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"));
    if log {
        s.push_str("set logscale xy\n");
    }
    s.push_str("set key left bottom\n");
    let plots: Vec<String> = series
        .iter()
        .map(|(x, y, label)| format!("'{csv}' every ::1 using {x}:{y} with linespoints title '{label}'"))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}
