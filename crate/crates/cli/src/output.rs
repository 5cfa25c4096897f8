//! Output files. Everything is rendered in memory first and then written
//! atomically, so a failed run never leaves a half-written set behind.
//!
//! JSON floats are rounded to 12 significant digits; reruns of the same
//! configuration produce byte-identical files. Wall-clock timings are kept
//! out of the files for the same reason.

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::pipeline::{Diagnostics, RunResult};
use crate::svg::{render_scatter, visible_points};
use gapspec_core::bands::{Band, Gap};
use gapspec_core::certify::{Enclosure, PollutionReport, Refinement};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_significant(n.as_f64().expect("f64 number"));
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_rounded_json<T: Serialize>(x: &T) -> String {
    let mut v = serde_json::to_value(x).expect("output types serialize");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

/// `x` as it reads back from its rounded JSON form.
pub fn rounded<T: Serialize + DeserializeOwned>(x: &T) -> T {
    serde_json::from_str(&to_rounded_json(x)).expect("rounded JSON reads back")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnclosureRecord {
    pub raw: Enclosure,
    pub refinement: Refinement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnclosuresFile {
    pub schema: u32,
    pub digest: String,
    pub im_cutoff: f64,
    pub enclosures: Vec<EnclosureRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandsFile {
    pub schema: u32,
    pub digest: String,
    pub bands: Vec<Band>,
    pub known_up_to: Option<f64>,
    pub gaps: Vec<Gap>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counts {
    pub points: usize,
    pub finite_points: usize,
    pub points_in_window: usize,
    pub enclosures: usize,
    pub refined: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile<'a> {
    pub schema: u32,
    pub digest: &'a str,
    pub config: &'a RunConfig,
    pub dimension: usize,
    pub n: usize,
    pub counts: Counts,
    pub diagnostics: &'a Diagnostics,
    pub pollution: Option<&'a PollutionReport>,
}

pub fn enclosures_file(r: &RunResult) -> EnclosuresFile {
    EnclosuresFile {
        schema: SCHEMA_VERSION,
        digest: r.digest.clone(),
        im_cutoff: r.config.im_cutoff,
        enclosures: r
            .enclosures
            .iter()
            .zip(&r.refined)
            .map(|(raw, refinement)| EnclosureRecord { raw: *raw, refinement: *refinement })
            .collect(),
    }
}

pub fn bands_file(r: &RunResult) -> BandsFile {
    BandsFile {
        schema: SCHEMA_VERSION,
        digest: r.digest.clone(),
        bands: r.bands.bands().to_vec(),
        known_up_to: r.bands.known_up_to(),
        gaps: r.bands.all_gaps(),
    }
}

pub fn points_csv(r: &RunResult) -> String {
    let mut s = String::from("index,re,im,residual,conjugate_index\n");
    for (i, p) in r.points.iter().enumerate() {
        let conj = p.conjugate_index.map(|j| j.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{i},{:.11e},{:.11e},{:.11e},{conj}", p.mu.re, p.mu.im, p.residual);
    }
    s
}

pub fn report_json(r: &RunResult) -> String {
    let report = ReportFile {
        schema: SCHEMA_VERSION,
        digest: &r.digest,
        config: &r.config.raw,
        dimension: r.config.potential.dimension,
        n: r.n,
        counts: Counts {
            points: r.points.len(),
            finite_points: r.points.iter().filter(|p| p.mu.re.is_finite() && p.mu.im.is_finite()).count(),
            points_in_window: visible_points(&r.points, &r.config.window).count(),
            enclosures: r.enclosures.len(),
            refined: r.refined.iter().filter(|x| x.enclosure.refined).count(),
        },
        diagnostics: &r.diagnostics,
        pollution: r.pollution.as_ref(),
    };
    to_rounded_json(&report)
}

/// All output files as `(file name, contents)`, in write order.
pub fn render(r: &RunResult) -> Vec<(String, String)> {
    let o = &r.config.raw.outputs;
    vec![
        (o.points.clone(), points_csv(r)),
        (o.enclosures.clone(), to_rounded_json(&enclosures_file(r))),
        (o.bands.clone(), to_rounded_json(&bands_file(r))),
        (o.scatter.clone(), render_scatter(&r.points, &r.bands, &r.enclosures, &r.config.window)),
        (o.report.clone(), report_json(r)),
    ]
}

/// Writes every file to a temporary sibling, then renames them into place.
/// On failure the temporaries are removed and existing files are untouched
/// unless the rename step itself fails part-way.
pub fn write_atomic(dir: &Path, files: &[(String, String)]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let pid = std::process::id();
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(files.len());
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = std::fs::remove_file(tmp);
        }
    };
    for (name, contents) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp-{pid}"));
        if let Err(e) = std::fs::write(&tmp, contents) {
            let _ = std::fs::remove_file(&tmp);
            cleanup(&staged);
            return Err(e);
        }
        staged.push((tmp, target));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (i, (tmp, target)) in staged.iter().enumerate() {
        if let Err(e) = std::fs::rename(tmp, target) {
            cleanup(&staged[i..]);
            return Err(e);
        }
        written.push(target.clone());
    }
    Ok(written)
}

/// Renders and writes the output set into `dir`.
pub fn write_outputs(r: &RunResult, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    write_atomic(dir, &render(r))
}

pub fn read_enclosures(text: &str) -> serde_json::Result<EnclosuresFile> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_significant(0.123456789012345), 0.123456789012);
        assert_eq!(round_significant(-1.0e-300), -1.0e-300);
        assert_eq!(round_significant(0.0), 0.0);
        assert_eq!(round_significant(round_significant(std::f64::consts::PI)), round_significant(std::f64::consts::PI));
    }

    #[test]
    fn rounded_json_leaves_integers_alone() {
        let v = serde_json::json!({"a": 3, "b": [1.23456789012345678, 2.0], "c": null});
        let s = to_rounded_json(&v);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"], 3);
        assert_eq!(back["b"][0].as_f64().unwrap(), 1.23456789012);
        assert_eq!(back["b"][1].as_f64().unwrap(), 2.0);
    }

    #[test]
    fn failed_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![("a.txt".to_owned(), "x".to_owned()), ("sub/b.txt".to_owned(), "y".to_owned())];
        assert!(write_atomic(dir.path(), &files).is_err());
        let left: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert!(left.is_empty(), "{left:?}");
    }
}
