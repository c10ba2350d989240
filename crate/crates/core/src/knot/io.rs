//! Knot file formats.
//!
//! * structured: `{"components": [[[x, y, z], ...], ...], "rest_edge_length": r, "meta": {...}}`
//! * plain: one `x y z` vertex per line, a blank line between components,
//!   `#` lines ignored. The rest length is the mean edge length.
//!
//! Numbers are written with the shortest representation that reads back to
//! the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PolyKnot;
use crate::error::{KnotError, Result};
use crate::geometry::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum KnotFormat {
    Structured,
    Plain,
}

impl KnotFormat {
    /// `.json` means structured; everything else is plain text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => KnotFormat::Structured,
            _ => KnotFormat::Plain,
        }
    }
}

/// Serialized form of the structured format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnotFile {
    pub components: Vec<Vec<Vec3>>,
    pub rest_edge_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl KnotFile {
    pub fn from_knot(knot: &PolyKnot, meta: Option<serde_json::Value>) -> Self {
        KnotFile { components: knot.to_components(), rest_edge_length: knot.rest_edge_length(), meta }
    }

    pub fn to_knot(&self) -> Result<PolyKnot> {
        PolyKnot::new(self.components.clone(), self.rest_edge_length)
    }
}

pub fn to_structured(knot: &PolyKnot, meta: Option<serde_json::Value>) -> String {
    serde_json::to_string_pretty(&KnotFile::from_knot(knot, meta)).expect("knot serialization cannot fail")
}

pub fn to_plain(knot: &PolyKnot) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# rest_edge_length {}", knot.rest_edge_length());
    for (c, comp) in knot.components().enumerate() {
        if c > 0 {
            out.push('\n');
        }
        for v in comp {
            let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
        }
    }
    out
}

pub fn parse_structured(text: &str, path: &Path) -> Result<PolyKnot> {
    let file: KnotFile =
        serde_json::from_str(text).map_err(|source| KnotError::Json { path: path.to_owned(), source })?;
    file.to_knot()
}

pub fn parse_plain(text: &str, path: &Path) -> Result<PolyKnot> {
    let mut components: Vec<Vec<Vec3>> = vec![];
    let mut current: Vec<Vec3> = vec![];
    let mut rest = None;
    let err = |line: usize, msg: String| KnotError::Parse { path: path.to_owned(), line, msg };

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            // our own writer records the rest length in a comment
            let mut words = comment.split_whitespace();
            if words.next() == Some("rest_edge_length") {
                if let Some(Ok(r)) = words.next().map(str::parse::<f64>) {
                    rest = Some(r);
                }
            }
            continue;
        }
        if line.is_empty() {
            if !current.is_empty() {
                components.push(std::mem::take(&mut current));
            }
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(idx + 1, format!("{e}")))?;
        if nums.len() != 3 {
            return Err(err(idx + 1, format!("expected 3 coordinates, found {}", nums.len())));
        }
        current.push(Vec3::new(nums[0], nums[1], nums[2]));
    }
    if !current.is_empty() {
        components.push(current);
    }
    if components.is_empty() {
        return Err(err(0, "no vertices".into()));
    }

    match rest {
        Some(r) => PolyKnot::new(components, r),
        None => {
            let provisional = PolyKnot::new(components, 1.0)?;
            let mean = provisional.total_length() / provisional.vertex_count() as f64;
            let mut knot = provisional;
            knot.set_rest_edge_length(mean);
            Ok(knot)
        }
    }
}

/// Reads a knot, detecting the format from the content.
pub fn load_knot(path: impl AsRef<Path>) -> Result<PolyKnot> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| KnotError::io(path, e))?;
    if text.trim_start().starts_with('{') {
        parse_structured(&text, path)
    } else {
        parse_plain(&text, path)
    }
}

pub fn save_knot(knot: &PolyKnot, path: impl AsRef<Path>, format: KnotFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        KnotFormat::Structured => to_structured(knot, None),
        KnotFormat::Plain => to_plain(knot),
    };
    fs::write(path, text).map_err(|e| KnotError::io(path, e))
}
