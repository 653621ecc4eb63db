//! CSV tables exchanged between pipeline stages: corpus manifests, feature
//! tables, label tables and raw ratings.
//!
//! Readers are header-driven, so optional columns may be omitted or
//! reordered. Writers emit a fixed column order and 17-significant-digit
//! numbers.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{column_names, FeatureVector, BASE_DIMS};
use crate::model::{fmt17, MosLabels, RatingMatrix};

/// Provenance of a manifest row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Source,
    Crop,
    Scale,
    Seam,
    Multi,
    External,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Source => "source",
            Method::Crop => "crop",
            Method::Scale => "scale",
            Method::Seam => "seam",
            Method::Multi => "multi",
            Method::External => "external",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "source" => Method::Source,
            "crop" => Method::Crop,
            "scale" => Method::Scale,
            "seam" => Method::Seam,
            "multi" => Method::Multi,
            "external" => Method::External,
            other => return Err(Error::Input(format!("unknown method '{other}'"))),
        })
    }
}

impl From<crate::retarget::Operator> for Method {
    fn from(op: crate::retarget::Operator) -> Self {
        use crate::retarget::Operator;
        match op {
            Operator::Crop => Method::Crop,
            Operator::Scale => Method::Scale,
            Operator::Seam => Method::Seam,
            Operator::Multi => Method::Multi,
        }
    }
}

/// Affine decoding of 16-bit PNG disparity maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisparityScaling {
    pub scale: f64,
    pub offset: f64,
}

impl Default for DisparityScaling {
    fn default() -> Self {
        Self {
            scale: 1.0 / 256.0,
            offset: -128.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub id: String,
    pub method: Method,
    pub left_path: PathBuf,
    pub right_path: PathBuf,
    pub disparity_path: Option<PathBuf>,
    pub mos: Option<MosLabels>,
    pub synthetic: bool,
    /// Source scene; falls back to the id when absent.
    pub scene: Option<String>,
    pub fiq: Vec<f64>,
    pub disparity_scaling: Option<DisparityScaling>,
}

impl ManifestRow {
    pub fn scene(&self) -> &str {
        self.scene.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

fn parse_f64(value: &str, what: &str, line: usize) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("line {line}: bad {what} '{value}'")))
}

fn optional_f64(value: Option<&str>, what: &str, line: usize) -> Result<Option<f64>> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => parse_f64(v, what, line).map(Some),
    }
}

struct Table {
    headers: Vec<String>,
    records: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_err(path, e))?;
        let headers = reader
            .headers()
            .map_err(|e| csv_err(path, e))?
            .iter()
            .map(|h| h.to_string())
            .collect();
        let records = reader
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| csv_err(path, e))?;
        Ok(Self { headers, records })
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, name: &str, path: &Path) -> Result<usize> {
        self.col(name)
            .ok_or_else(|| Error::Parse(format!("{}: missing column '{name}'", path.display())))
    }

    /// Columns named `<prefix>N`, ordered by N.
    fn numbered(&self, prefix: &str) -> Vec<usize> {
        let mut cols: Vec<(usize, usize)> = self
            .headers
            .iter()
            .enumerate()
            .filter_map(|(i, h)| {
                h.strip_prefix(prefix)
                    .and_then(|n| n.parse::<usize>().ok())
                    .map(|n| (n, i))
            })
            .collect();
        cols.sort();
        cols.into_iter().map(|(_, i)| i).collect()
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::Input(format!("duplicate id '{id}'")));
        }
    }
    Ok(())
}

/// Reads a manifest; relative paths are resolved against its directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let t = Table::read(path)?;
    let id = t.require("id", path)?;
    let method = t.col("method");
    let left = t.require("left_path", path)?;
    let right = t.require("right_path", path)?;
    let disp = t.col("disparity_path");
    let mos: Vec<Option<usize>> = ["mos_vc", "mos_iq", "mos_dq", "mos_ov"]
        .iter()
        .map(|c| t.col(c))
        .collect();
    let synthetic = t.col("synthetic_flag");
    let scene = t.col("scene");
    let dscale = t.col("disparity_scale");
    let doffset = t.col("disparity_offset");
    let fiq = t.numbered("fiq_");

    let mut rows = Vec::with_capacity(t.records.len());
    for (k, rec) in t.records.iter().enumerate() {
        let line = k + 2;
        let get = |c: Option<usize>| c.and_then(|c| rec.get(c)).filter(|v| !v.is_empty());
        let mos_values: Vec<Option<f64>> = ["mos_vc", "mos_iq", "mos_dq", "mos_ov"]
            .iter()
            .zip(&mos)
            .map(|(name, c)| optional_f64(get(*c), name, line))
            .collect::<Result<_>>()?;
        let labels = mos_values[0].map(|vc| MosLabels {
            vc,
            iq: mos_values[1],
            dq: mos_values[2],
            ov: mos_values[3],
        });
        if let Some(l) = &labels {
            l.validate()?;
        }
        let scaling = match (
            optional_f64(get(dscale), "disparity_scale", line)?,
            optional_f64(get(doffset), "disparity_offset", line)?,
        ) {
            (None, None) => None,
            (s, o) => {
                let d = DisparityScaling::default();
                Some(DisparityScaling {
                    scale: s.unwrap_or(d.scale),
                    offset: o.unwrap_or(d.offset),
                })
            }
        };
        rows.push(ManifestRow {
            id: get(Some(id))
                .ok_or_else(|| Error::Parse(format!("line {line}: empty id")))?
                .to_string(),
            method: get(method).map_or(Ok(Method::External), str::parse)?,
            left_path: resolve(base, get(Some(left)).unwrap_or_default()),
            right_path: resolve(base, get(Some(right)).unwrap_or_default()),
            disparity_path: get(disp).map(|p| resolve(base, p)),
            mos: labels,
            synthetic: matches!(get(synthetic), Some("1" | "true" | "yes")),
            scene: get(scene).map(String::from),
            fiq: fiq
                .iter()
                .map(|&c| parse_f64(rec.get(c).unwrap_or(""), "fiq value", line))
                .collect::<Result<_>>()?,
            disparity_scaling: scaling,
        });
    }
    check_unique(rows.iter().map(|r| r.id.as_str()))?;
    Ok(Manifest { rows })
}

fn relative_to(base: &Path, p: &Path) -> String {
    p.strip_prefix(base).unwrap_or(p).display().to_string()
}

fn write_records(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a manifest with paths relative to its directory where possible.
pub fn write_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let fiq = manifest.rows.iter().map(|r| r.fiq.len()).max().unwrap_or(0);
    let mut header: Vec<String> = [
        "id",
        "method",
        "left_path",
        "right_path",
        "disparity_path",
        "mos_vc",
        "mos_iq",
        "mos_dq",
        "mos_ov",
        "synthetic_flag",
        "scene",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=fiq).map(|i| format!("fiq_{i}")));
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let rows: Vec<Vec<String>> = manifest
        .rows
        .iter()
        .map(|r| {
            let mut rec = vec![
                r.id.clone(),
                r.method.to_string(),
                relative_to(base, &r.left_path),
                relative_to(base, &r.right_path),
                r.disparity_path
                    .as_deref()
                    .map(|p| relative_to(base, p))
                    .unwrap_or_default(),
                opt(r.mos.map(|m| m.vc)),
                opt(r.mos.and_then(|m| m.iq)),
                opt(r.mos.and_then(|m| m.dq)),
                opt(r.mos.and_then(|m| m.ov)),
                if r.synthetic { "1" } else { "0" }.to_string(),
                r.scene.clone().unwrap_or_default(),
            ];
            rec.extend(r.fiq.iter().map(|v| fmt17(*v)));
            rec.resize(header.len(), String::new());
            rec
        })
        .collect();
    write_records(path, &header, &rows)
}

/// One row of a feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub features: FeatureVector,
}

pub fn write_features(rows: &[FeatureRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let fiq = rows.iter().map(|r| r.features.fiq.len()).max().unwrap_or(0);
    if rows.iter().any(|r| r.features.fiq.len() != fiq) {
        return Err(Error::Input(
            "rows disagree on the number of external scores".into(),
        ));
    }
    let mut header = vec!["id".to_string()];
    header.extend(column_names(fiq));
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            std::iter::once(r.id.clone())
                .chain(r.features.to_vec().into_iter().map(fmt17))
                .collect()
        })
        .collect();
    write_records(path, &header, &records)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<FeatureRow>> {
    let path = path.as_ref();
    let t = Table::read(path)?;
    let id = t.require("id", path)?;
    let fiq_count = t.numbered("fiq_").len();
    let names = column_names(fiq_count);
    let cols = names
        .iter()
        .map(|n| t.require(n, path))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(t.records.len());
    for (k, rec) in t.records.iter().enumerate() {
        let values = cols
            .iter()
            .zip(&names)
            .map(|(&c, n)| parse_f64(rec.get(c).unwrap_or(""), n, k + 2))
            .collect::<Result<Vec<_>>>()?;
        debug_assert!(values.len() >= BASE_DIMS);
        rows.push(FeatureRow {
            id: rec.get(id).unwrap_or("").to_string(),
            features: FeatureVector::from_slice(&values)?,
        });
    }
    check_unique(rows.iter().map(|r| r.id.as_str()))?;
    Ok(rows)
}

/// Pre-aggregated labels keyed by id (`id,mos_vc[,mos_iq,mos_dq,mos_ov]`).
/// Any manifest with a `mos_vc` column also qualifies.
pub fn read_labels(path: impl AsRef<Path>) -> Result<HashMap<String, MosLabels>> {
    let path = path.as_ref();
    let t = Table::read(path)?;
    let id = t.require("id", path)?;
    let vc = t.require("mos_vc", path)?;
    let rest: Vec<Option<usize>> = ["mos_iq", "mos_dq", "mos_ov"]
        .iter()
        .map(|c| t.col(c))
        .collect();
    let mut out = HashMap::new();
    for (k, rec) in t.records.iter().enumerate() {
        let line = k + 2;
        let get = |c: Option<usize>| c.and_then(|c| rec.get(c)).filter(|v| !v.is_empty());
        let Some(v) = get(Some(vc)) else { continue };
        let labels = MosLabels {
            vc: parse_f64(v, "mos_vc", line)?,
            iq: optional_f64(get(rest[0]), "mos_iq", line)?,
            dq: optional_f64(get(rest[1]), "mos_dq", line)?,
            ov: optional_f64(get(rest[2]), "mos_ov", line)?,
        };
        labels.validate()?;
        let key = rec.get(id).unwrap_or("").to_string();
        if out.insert(key.clone(), labels).is_some() {
            return Err(Error::Input(format!("duplicate id '{key}'")));
        }
    }
    Ok(out)
}

/// Raw ratings (`id,subject_id,vc[,iq,dq,ov]`) as one matrix per aspect.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRatings {
    pub image_ids: Vec<String>,
    /// Aspect name (`vc`, `iq`, `dq`, `ov`) and its ratings.
    pub aspects: Vec<(String, RatingMatrix)>,
}

pub fn read_raw_ratings(path: impl AsRef<Path>) -> Result<RawRatings> {
    let path = path.as_ref();
    let t = Table::read(path)?;
    let id = t.require("id", path)?;
    let subject = t.require("subject_id", path)?;
    let aspects: Vec<(&str, usize)> = ["vc", "iq", "dq", "ov"]
        .iter()
        .filter_map(|a| t.col(a).map(|c| (*a, c)))
        .collect();
    if aspects.is_empty() {
        return Err(Error::Parse(format!(
            "{}: no rating columns",
            path.display()
        )));
    }
    let mut images: Vec<String> = Vec::new();
    let mut subjects: Vec<String> = Vec::new();
    let mut cells: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
    for (k, rec) in t.records.iter().enumerate() {
        let line = k + 2;
        let img = rec.get(id).unwrap_or("").to_string();
        let sub = rec.get(subject).unwrap_or("").to_string();
        let ii = images.iter().position(|x| *x == img).unwrap_or_else(|| {
            images.push(img.clone());
            images.len() - 1
        });
        let si = subjects.iter().position(|x| *x == sub).unwrap_or_else(|| {
            subjects.push(sub.clone());
            subjects.len() - 1
        });
        let values = aspects
            .iter()
            .map(|(a, c)| parse_f64(rec.get(*c).unwrap_or(""), a, line))
            .collect::<Result<Vec<_>>>()?;
        if cells.insert((si, ii), values).is_some() {
            return Err(Error::Input(format!(
                "line {line}: subject '{sub}' rated '{img}' twice"
            )));
        }
    }
    let mut out = Vec::new();
    for (a, (name, _)) in aspects.iter().enumerate() {
        let mut ratings = vec![vec![0.0; images.len()]; subjects.len()];
        for (s, row) in ratings.iter_mut().enumerate() {
            for (i, cell) in row.iter_mut().enumerate() {
                *cell = cells.get(&(s, i)).map(|v| v[a]).ok_or_else(|| {
                    Error::Input(format!(
                        "subject '{}' did not rate '{}'",
                        subjects[s], images[i]
                    ))
                })?;
            }
        }
        out.push((
            name.to_string(),
            RatingMatrix::new(subjects.clone(), ratings)?,
        ));
    }
    Ok(RawRatings {
        image_ids: images,
        aspects: out,
    })
}

/// Writes `id,mos_vc[,mos_iq,mos_dq,mos_ov]` from per-aspect scores.
pub fn write_mos(
    ids: &[String],
    aspects: &[(String, Vec<f64>)],
    path: impl AsRef<Path>,
) -> Result<()> {
    let header: Vec<String> = std::iter::once("id".to_string())
        .chain(aspects.iter().map(|(a, _)| format!("mos_{a}")))
        .collect();
    let rows: Vec<Vec<String>> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            std::iter::once(id.clone())
                .chain(aspects.iter().map(|(_, v)| fmt17(v[i])))
                .collect()
        })
        .collect();
    write_records(path.as_ref(), &header, &rows)
}

/// Writes a generic table whose first column is text and the rest numeric.
pub fn write_table(
    path: impl AsRef<Path>,
    header: &[&str],
    rows: &[(String, Vec<f64>)],
) -> Result<()> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(k, v)| {
            std::iter::once(k.clone())
                .chain(v.iter().map(|x| fmt17(*x)))
                .collect()
        })
        .collect();
    write_records(path.as_ref(), &header, &rows)
}
