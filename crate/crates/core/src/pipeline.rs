//! Batch stages: corpus synthesis and feature extraction over manifests.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::corpus::{FeatureRow, Manifest, ManifestRow, Method};
use crate::disparity::{estimate_disparity, BlockMatchParams};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureConfig};
use crate::imagecore::{
    load_disparity, load_image, save_disparity, save_gray_png, DisparityEncoding, DisparityMap,
    StereoPair,
};
use crate::model::{MosLabels, RatedSample};
use crate::retarget::{retarget, target_width_for, Operator, RetargetSpec, DEFAULT_RATIO};
use crate::synth::{synthetic_label, SceneSpec, SYNTHETIC_LABEL_NOISE};

const LEFT_SUFFIX: &str = "_left";
const RIGHT_SUFFIX: &str = "_right";
const DISP_SUFFIX: &str = "_disp";
const IMAGE_EXTS: [&str; 4] = ["png", "pgm", "ppm", "pnm"];

/// A source pair found in a directory: `<name>_left.*`, `<name>_right.*` and
/// optionally `<name>_disp.{pfm,png}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePair {
    pub name: String,
    pub left: PathBuf,
    pub right: PathBuf,
    pub disparity: Option<PathBuf>,
}

fn find_with_ext(dir: &Path, stem: &str, exts: &[&str]) -> Option<PathBuf> {
    exts.iter()
        .map(|e| dir.join(format!("{stem}.{e}")))
        .find(|p| p.is_file())
}

/// Lists source pairs in `dir`, sorted by name.
pub fn discover_sources(dir: &Path) -> Result<Vec<SourcePair>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let ext_ok = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTS.contains(&e.to_ascii_lowercase().as_str()));
        if let (true, Some(name)) = (ext_ok, stem.strip_suffix(LEFT_SUFFIX)) {
            names.push(name.to_string());
        }
    }
    names.sort();
    names.dedup();
    names
        .into_iter()
        .map(|name| {
            let left = find_with_ext(dir, &format!("{name}{LEFT_SUFFIX}"), &IMAGE_EXTS).unwrap();
            let right = find_with_ext(dir, &format!("{name}{RIGHT_SUFFIX}"), &IMAGE_EXTS)
                .ok_or_else(|| Error::Input(format!("source '{name}' has no right view")))?;
            let disparity = find_with_ext(dir, &format!("{name}{DISP_SUFFIX}"), &["pfm", "png"]);
            Ok(SourcePair {
                name,
                left,
                right,
                disparity,
            })
        })
        .collect()
}

/// Writes `count` synthetic source scenes (views as PNG, disparity as PFM).
pub fn generate_sources(
    dir: &Path,
    count: usize,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<Vec<SourcePair>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let name = format!("scene{i:03}");
            let spec = SceneSpec::random(
                width,
                height,
                seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
            );
            let (pair, dmap) = spec.render()?;
            let src = SourcePair {
                left: dir.join(format!("{name}{LEFT_SUFFIX}.png")),
                right: dir.join(format!("{name}{RIGHT_SUFFIX}.png")),
                disparity: Some(dir.join(format!("{name}{DISP_SUFFIX}.pfm"))),
                name,
            };
            save_gray_png(pair.left(), &src.left)?;
            save_gray_png(pair.right(), &src.right)?;
            save_disparity(
                &dmap,
                src.disparity.as_ref().unwrap(),
                DisparityEncoding::Pfm,
            )?;
            Ok(src)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub ratio: f64,
    pub seed: u64,
    pub synthetic_mos: bool,
    pub operators: Vec<Operator>,
    pub seam_gamma: f64,
    pub block_width: usize,
    pub block_match: BlockMatchParams,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            ratio: DEFAULT_RATIO,
            seed: 0,
            synthetic_mos: false,
            operators: Operator::ALL.to_vec(),
            seam_gamma: 1.0,
            block_width: crate::retarget::DEFAULT_BLOCK_WIDTH,
            block_match: BlockMatchParams::default(),
        }
    }
}

#[derive(Debug)]
pub struct SynthOutcome {
    pub manifest: Manifest,
    /// Sources that could not be processed, with the reason.
    pub failures: Vec<(String, Error)>,
}

fn load_pair(left: &Path, right: &Path) -> Result<StereoPair> {
    StereoPair::new(load_image(left)?, load_image(right)?)
}

/// Disparity from `path` when given, otherwise estimated by block matching.
/// The flag reports whether estimation ran.
pub fn disparity_or_estimate(
    pair: &StereoPair,
    path: Option<&Path>,
    encoding: (f64, f64),
    params: &BlockMatchParams,
) -> Result<(DisparityMap, bool)> {
    match path {
        Some(p) => Ok((load_disparity(p, encoding.0, encoding.1)?, false)),
        None => {
            let params = params.clipped_to_width(pair.width());
            Ok((estimate_disparity(pair, &params)?, true))
        }
    }
}

/// The map as stored in a PFM file.
fn f32_rounded(d: DisparityMap) -> Result<DisparityMap> {
    let (w, h) = (d.width(), d.height());
    DisparityMap::new(
        w,
        h,
        d.into_data().into_iter().map(|v| v as f32 as f64).collect(),
    )
}

fn synth_one(
    src: &SourcePair,
    out_dir: &Path,
    opts: &SynthOptions,
) -> Result<Vec<(ManifestRow, DisparityMap)>> {
    let pair = load_pair(&src.left, &src.right)?;
    let d = crate::corpus::DisparityScaling::default();
    let (dmap, _) = disparity_or_estimate(
        &pair,
        src.disparity.as_deref(),
        (d.scale, d.offset),
        &opts.block_match,
    )?;
    let target = target_width_for(pair.width(), opts.ratio)?;
    let mut rows = Vec::with_capacity(opts.operators.len());
    for &op in &opts.operators {
        let mut spec = RetargetSpec::new(op, target);
        spec.seam_gamma = opts.seam_gamma;
        spec.block_width = opts.block_width;
        let (out, out_d) = retarget(&pair, &dmap, &spec)?;
        let id = format!("{}_{}", src.name, op.name());
        let row = ManifestRow {
            left_path: out_dir.join(format!("{id}{LEFT_SUFFIX}.png")),
            right_path: out_dir.join(format!("{id}{RIGHT_SUFFIX}.png")),
            disparity_path: Some(out_dir.join(format!("{id}{DISP_SUFFIX}.pfm"))),
            id,
            method: Method::from(op),
            mos: None,
            synthetic: opts.synthetic_mos,
            scene: Some(src.name.clone()),
            fiq: Vec::new(),
            disparity_scaling: None,
        };
        save_gray_png(out.left(), &row.left_path)?;
        save_gray_png(out.right(), &row.right_path)?;
        save_disparity(
            &out_d,
            row.disparity_path.as_ref().unwrap(),
            DisparityEncoding::Pfm,
        )?;
        rows.push((row, f32_rounded(out_d)?));
    }
    Ok(rows)
}

/// Retargets every source with each operator and writes `manifest.csv` in
/// `out_dir`. Failing sources are reported and skipped.
pub fn synth_corpus(
    source_dir: &Path,
    out_dir: &Path,
    opts: &SynthOptions,
) -> Result<SynthOutcome> {
    let sources = discover_sources(source_dir)?;
    if sources.is_empty() {
        return Err(Error::Input(format!(
            "no source pairs in {}",
            source_dir.display()
        )));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let results: Vec<Result<Vec<(ManifestRow, DisparityMap)>>> = sources
        .par_iter()
        .map(|s| synth_one(s, out_dir, opts))
        .collect();

    let normal = Normal::new(0.0, SYNTHETIC_LABEL_NOISE).expect("valid noise scale");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut manifest = Manifest::default();
    let mut failures = Vec::new();
    for (src, res) in sources.iter().zip(results) {
        match res {
            Ok(rows) => {
                for (mut row, dmap) in rows {
                    if opts.synthetic_mos {
                        let noise = normal.sample(&mut rng);
                        row.mos = Some(MosLabels::comfort(synthetic_label(&dmap, noise)));
                    }
                    manifest.rows.push(row);
                }
            }
            Err(e) => failures.push((src.name.clone(), e)),
        }
    }
    crate::corpus::write_manifest(&manifest, out_dir.join("manifest.csv"))?;
    Ok(SynthOutcome { manifest, failures })
}

/// Result of extracting one manifest row.
#[derive(Debug)]
pub struct Extracted {
    pub row: FeatureRow,
    /// True when block matching stood in for a missing map.
    pub estimated: bool,
}

fn extract_row(
    row: &ManifestRow,
    config: &FeatureConfig,
    bm: &BlockMatchParams,
) -> Result<Extracted> {
    let pair = load_pair(&row.left_path, &row.right_path)?;
    let s = row.disparity_scaling.unwrap_or_default();
    let (dmap, estimated) = disparity_or_estimate(
        &pair,
        row.disparity_path.as_deref(),
        (s.scale, s.offset),
        bm,
    )?;
    let features = extract_features(&pair, &dmap, config, &row.fiq)?;
    Ok(Extracted {
        row: FeatureRow {
            id: row.id.clone(),
            features,
        },
        estimated,
    })
}

/// Extracts features for every row concurrently; results keep manifest order.
pub fn extract_manifest(
    manifest: &Manifest,
    config: &FeatureConfig,
    bm: &BlockMatchParams,
) -> Vec<Result<Extracted>> {
    manifest
        .rows
        .par_iter()
        .map(|r| extract_row(r, config, bm))
        .collect()
}

/// Pairs feature rows with manifest labels; rows without labels are dropped.
pub fn rated_samples(manifest: &Manifest, features: &[FeatureRow]) -> Result<Vec<RatedSample>> {
    let by_id: std::collections::HashMap<&str, &FeatureRow> =
        features.iter().map(|f| (f.id.as_str(), f)).collect();
    let mut out = Vec::new();
    for row in &manifest.rows {
        let Some(mos) = row.mos else { continue };
        let f = by_id
            .get(row.id.as_str())
            .ok_or_else(|| Error::Input(format!("no features for '{}'", row.id)))?;
        out.push(RatedSample {
            id: row.id.clone(),
            scene: row.scene().to_string(),
            method: row.method.to_string(),
            features: f.features.clone(),
            mos,
        });
    }
    Ok(out)
}
