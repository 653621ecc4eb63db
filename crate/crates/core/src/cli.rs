//! Command-line front end. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code: 0 on success, 1 for input errors
//! (including usage errors and partially failed batches), 2 for internal
//! failures.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::{
    read_features, read_labels, read_manifest, read_raw_ratings, write_features, write_mos,
    write_table, DisparityScaling, FeatureRow,
};
use crate::disparity::BlockMatchParams;
use crate::error::{Error, Result};
use crate::features::{ComfortZone, DidParams, DrParams, FeatureConfig, FeatureSet};
use crate::imagecore::{
    load_disparity, load_image, save_disparity, save_gray_png, DisparityEncoding, StereoPair,
};
use crate::model::{
    cross_validate, load_model, mos_from_ratings, pearson, serialize_model, train_svr, CvConfig,
    EvalReport, Kernel, MosReport, SvrParams, DEFAULT_REJECTION_THRESHOLD,
};
use crate::pipeline::{
    disparity_or_estimate, extract_manifest, generate_sources, rated_samples, synth_corpus,
    SynthOptions,
};
use crate::retarget::{retarget, target_width_for, Operator, RetargetSpec, DEFAULT_BLOCK_WIDTH};

#[derive(Debug, Parser)]
#[command(
    name = "stereo-comfort",
    version,
    about = "Visual comfort assessment for stereoscopic retargeted images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a disparity map from two views, or convert a stored map.
    Disparity(DisparityArgs),
    /// Apply one retargeting operator to one stereo pair.
    Retarget(RetargetArgs),
    /// Retarget every source pair with all four operators.
    Synth(SynthArgs),
    /// Compute feature vectors for every manifest row.
    Extract(ExtractArgs),
    /// Train an SVR model from a feature table and labels.
    Train(TrainArgs),
    /// Score a feature table with a trained model.
    Predict(PredictArgs),
    /// Repeated train/test evaluation per feature combination.
    Evaluate(EvaluateArgs),
    /// Compute MOS from raw ratings with subject screening.
    Mos(MosArgs),
}

#[derive(Debug, Args)]
struct PngScaleArgs {
    /// Scale of 16-bit PNG disparity maps.
    #[arg(long, default_value_t = DisparityScaling::default().scale)]
    disparity_scale: f64,
    /// Offset of 16-bit PNG disparity maps.
    #[arg(long, default_value_t = DisparityScaling::default().offset)]
    disparity_offset: f64,
}

#[derive(Debug, Args)]
struct MatchArgs {
    /// Block-matching window half size.
    #[arg(long, default_value_t = 4)]
    window: usize,
    /// Disparity search range.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true, default_values_t = [-128, 128])]
    range: Vec<i32>,
    /// Parabolic sub-pixel refinement.
    #[arg(long)]
    subpixel: bool,
}

impl MatchArgs {
    fn params(&self) -> Result<BlockMatchParams> {
        let p = BlockMatchParams {
            window_radius: self.window,
            search_min: self.range[0],
            search_max: self.range[1],
            subpixel: self.subpixel,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
struct DisparityArgs {
    #[arg(long, requires = "right", conflicts_with = "input")]
    left: Option<PathBuf>,
    #[arg(long, requires = "left")]
    right: Option<PathBuf>,
    /// Existing map to convert instead of estimating.
    #[arg(long, required_unless_present = "left")]
    input: Option<PathBuf>,
    /// Output map; `.pfm` or 16-bit `.png`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    matching: MatchArgs,
    #[command(flatten)]
    png: PngScaleArgs,
}

#[derive(Debug, Args)]
struct RetargetArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    /// Disparity map; estimated when absent.
    #[arg(long)]
    disparity: Option<PathBuf>,
    #[arg(long, default_value = "crop")]
    op: Operator,
    #[arg(long, default_value_t = crate::retarget::DEFAULT_RATIO, conflicts_with = "width")]
    ratio: f64,
    /// Target width in pixels.
    #[arg(long)]
    width: Option<usize>,
    /// Crop offsets for the left and right views.
    #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"])]
    offsets: Option<Vec<usize>>,
    /// Weight of the disparity-gradient term in seam energy.
    #[arg(long, default_value_t = 1.0)]
    seam_gamma: f64,
    #[arg(long, default_value_t = DEFAULT_BLOCK_WIDTH)]
    block_width: usize,
    /// Output directory for `left.png`, `right.png` and `disp.pfm`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    matching: MatchArgs,
    #[command(flatten)]
    png: PngScaleArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory of `<name>_left`, `<name>_right` and optional `<name>_disp` files.
    #[arg(long)]
    source: PathBuf,
    /// Output directory; receives the retargeted pairs and `manifest.csv`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = crate::retarget::DEFAULT_RATIO)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Attach synthetic (non-human) comfort labels derived from DR.
    #[arg(long)]
    synthetic_mos: bool,
    /// First write this many synthetic source scenes into `--source`.
    #[arg(long)]
    generate: Option<usize>,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 48)]
    height: usize,
    #[arg(long, default_value_t = 1.0)]
    seam_gamma: f64,
    #[command(flatten)]
    matching: MatchArgs,
}

#[derive(Debug, Args)]
struct FeatureArgs {
    #[arg(long, default_value_t = DrParams::default().alpha)]
    alpha: f64,
    #[arg(long, default_value_t = DrParams::default().beta)]
    beta: f64,
    #[arg(long, default_value_t = DidParams::default().lambda)]
    lambda: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = ComfortZone::default().d_min)]
    zone_min: f64,
    #[arg(long, default_value_t = ComfortZone::default().d_max)]
    zone_max: f64,
}

impl FeatureArgs {
    fn config(&self) -> Result<FeatureConfig> {
        let dr = DrParams {
            alpha: self.alpha,
            beta: self.beta,
            ..DrParams::default()
        };
        dr.validate()?;
        Ok(FeatureConfig {
            zone: ComfortZone::new(self.zone_min, self.zone_max)?,
            dr,
            did: DidParams::new(self.lambda)?,
        })
    }
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output feature table.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    features: FeatureArgs,
    #[command(flatten)]
    matching: MatchArgs,
}

#[derive(Debug, Args)]
struct SvrArgs {
    #[arg(long, default_value = "rbf")]
    kernel: Kernel,
    #[arg(long = "C", default_value_t = SvrParams::default().c)]
    c: f64,
    #[arg(long, default_value_t = SvrParams::default().epsilon)]
    eps: f64,
    /// RBF width; defaults to 1 / feature dimension.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SvrArgs {
    fn params(&self) -> SvrParams {
        SvrParams {
            kernel: self.kernel,
            c: self.c,
            epsilon: self.eps,
            gamma: self.gamma,
            seed: self.seed,
            ..SvrParams::default()
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Feature table written by `extract`.
    #[arg(long)]
    table: PathBuf,
    /// Labels: `id,mos_vc,...` (a manifest with labels also works).
    #[arg(long)]
    labels: PathBuf,
    /// Feature groups to train on.
    #[arg(long, default_value = "dr,bd,did,niq")]
    features: FeatureSet,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    svr: SvrArgs,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    table: PathBuf,
    /// Feature groups the model was trained on.
    #[arg(long, default_value = "dr,bd,did,niq")]
    features: FeatureSet,
    /// Output `id,score` table.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Precomputed feature table; extracted from the manifest when absent.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Feature combination; repeat for one report row each.
    #[arg(long)]
    features: Vec<FeatureSet>,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    /// Split per image instead of per scene.
    #[arg(long)]
    no_group: bool,
    /// Report CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    svr: SvrArgs,
    #[command(flatten)]
    feature_params: FeatureArgs,
    #[command(flatten)]
    matching: MatchArgs,
}

#[derive(Debug, Args)]
struct MosArgs {
    /// Raw ratings: `id,subject_id,vc[,iq,dq,ov]`.
    #[arg(long)]
    ratings: PathBuf,
    /// Output `id,mos_*` table.
    #[arg(long)]
    out: PathBuf,
    /// Screening threshold on leave-one-out PLCC.
    #[arg(long, default_value_t = DEFAULT_REJECTION_THRESHOLD)]
    threshold: f64,
    /// Per-subject agreement table.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Failure of a batch command where some rows succeeded.
#[derive(Debug)]
struct PartialFailure(usize);

enum Outcome {
    Done,
    Partial(PartialFailure),
}

/// Runs the tool with `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match std::panic::catch_unwind(|| execute(cli)) {
        Ok(Ok(Outcome::Done)) => 0,
        Ok(Ok(Outcome::Partial(PartialFailure(n)))) => {
            eprintln!("error: {n} row(s) failed");
            1
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                1
            } else {
                2
            }
        }
        Err(_) => 2,
    }
}

fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Disparity(a) => cmd_disparity(a),
        Command::Retarget(a) => cmd_retarget(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Mos(a) => cmd_mos(a),
    }
}

fn encoding_for(path: &Path, png: &PngScaleArgs) -> DisparityEncoding {
    DisparityEncoding::for_path(path, png.disparity_scale, png.disparity_offset)
}

fn cmd_disparity(a: DisparityArgs) -> Result<Outcome> {
    let dmap = match (&a.left, &a.right, &a.input) {
        (Some(l), Some(r), _) => {
            let pair = StereoPair::new(load_image(l)?, load_image(r)?)?;
            disparity_or_estimate(&pair, None, (0.0, 0.0), &a.matching.params()?)?.0
        }
        (_, _, Some(input)) => {
            load_disparity(input, a.png.disparity_scale, a.png.disparity_offset)?
        }
        _ => {
            return Err(Error::Input(
                "either --left/--right or --input is required".into(),
            ))
        }
    };
    save_disparity(&dmap, &a.out, encoding_for(&a.out, &a.png))?;
    Ok(Outcome::Done)
}

fn cmd_retarget(a: RetargetArgs) -> Result<Outcome> {
    let pair = StereoPair::new(load_image(&a.left)?, load_image(&a.right)?)?;
    let (dmap, estimated) = disparity_or_estimate(
        &pair,
        a.disparity.as_deref(),
        (a.png.disparity_scale, a.png.disparity_offset),
        &a.matching.params()?,
    )?;
    if estimated {
        eprintln!("warning: no disparity map given; estimated by block matching");
    }
    let target = match a.width {
        Some(w) => w,
        None => target_width_for(pair.width(), a.ratio)?,
    };
    let mut spec = RetargetSpec::new(a.op, target);
    spec.crop_offsets = a.offsets.map(|o| (o[0], o[1]));
    spec.seam_gamma = a.seam_gamma;
    spec.block_width = a.block_width;
    let (out, out_d) = retarget(&pair, &dmap, &spec)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    save_gray_png(out.left(), a.out.join("left.png"))?;
    save_gray_png(out.right(), a.out.join("right.png"))?;
    save_disparity(&out_d, a.out.join("disp.pfm"), DisparityEncoding::Pfm)?;
    Ok(Outcome::Done)
}

fn cmd_synth(a: SynthArgs) -> Result<Outcome> {
    if let Some(n) = a.generate {
        generate_sources(&a.source, n, a.width, a.height, a.seed)?;
    }
    let opts = SynthOptions {
        ratio: a.ratio,
        seed: a.seed,
        synthetic_mos: a.synthetic_mos,
        seam_gamma: a.seam_gamma,
        block_match: a.matching.params()?,
        ..SynthOptions::default()
    };
    let outcome = synth_corpus(&a.source, &a.out, &opts)?;
    for (name, e) in &outcome.failures {
        eprintln!("skipped {name}: {e}");
    }
    println!(
        "wrote {} pairs to {}",
        outcome.manifest.rows.len(),
        a.out.join("manifest.csv").display()
    );
    Ok(if outcome.failures.is_empty() {
        Outcome::Done
    } else {
        Outcome::Partial(PartialFailure(outcome.failures.len()))
    })
}

/// Extracts all rows, reporting failures; returns the successful rows.
fn extract_reporting(
    manifest: &crate::corpus::Manifest,
    config: &FeatureConfig,
    bm: &BlockMatchParams,
) -> (Vec<FeatureRow>, usize) {
    let mut rows = Vec::new();
    let mut failed = 0;
    for (m, res) in manifest
        .rows
        .iter()
        .zip(extract_manifest(manifest, config, bm))
    {
        match res {
            Ok(e) => {
                if e.estimated {
                    eprintln!(
                        "warning: {}: no disparity map; estimated by block matching",
                        m.id
                    );
                }
                rows.push(e.row);
            }
            Err(e) => {
                eprintln!("failed {}: {e}", m.id);
                failed += 1;
            }
        }
    }
    (rows, failed)
}

fn cmd_extract(a: ExtractArgs) -> Result<Outcome> {
    let manifest = read_manifest(&a.manifest)?;
    let (rows, failed) = extract_reporting(&manifest, &a.features.config()?, &a.matching.params()?);
    write_features(&rows, &a.out)?;
    Ok(if failed == 0 {
        Outcome::Done
    } else {
        Outcome::Partial(PartialFailure(failed))
    })
}

fn cmd_train(a: TrainArgs) -> Result<Outcome> {
    let table = read_features(&a.table)?;
    let labels = read_labels(&a.labels)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for row in &table {
        if let Some(l) = labels.get(&row.id) {
            x.push(row.features.select(&a.features));
            y.push(l.vc);
        }
    }
    if x.is_empty() {
        return Err(Error::Input("no feature row has a label".into()));
    }
    let model = train_svr(&x, &y, &a.svr.params())?;
    serialize_model(&model, &a.out)?;
    println!(
        "trained on {} samples, {} support vectors",
        x.len(),
        model.support_vectors.len()
    );
    Ok(Outcome::Done)
}

fn cmd_predict(a: PredictArgs) -> Result<Outcome> {
    let model = load_model(&a.model)?;
    let table = read_features(&a.table)?;
    let rows = table
        .iter()
        .map(|r| {
            Ok((
                r.id.clone(),
                vec![model.predict(&r.features.select(&a.features))?],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    write_table(&a.out, &["id", "score"], &rows)?;
    Ok(Outcome::Done)
}

/// Table rows used when no `--features` is given.
fn default_combinations(has_fiq: bool) -> Vec<FeatureSet> {
    let mut names = vec!["dr", "bd", "did", "niq", "dr,bd,did", "dr,bd,did,niq"];
    if has_fiq {
        names.push("dr,bd,did,fiq");
    }
    names
        .into_iter()
        .map(|n| n.parse().expect("valid feature set"))
        .collect()
}

/// Aligned text table with one row per feature combination.
pub fn format_report(reports: &[EvalReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.label.len())
        .max()
        .unwrap_or(0)
        .max("Features".len());
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$}  {:>8}  {:>8}  {:>8}  {:>8}",
        "Features", "PLCC", "SRCC", "KRCC", "RMSE"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<width$}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}",
            r.label, r.plcc.mean, r.srcc.mean, r.krcc.mean, r.rmse.mean
        );
    }
    s
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<Outcome> {
    let manifest = read_manifest(&a.manifest)?;
    let (features, failed) = match &a.table {
        Some(t) => (read_features(t)?, 0),
        None => extract_reporting(
            &manifest,
            &a.feature_params.config()?,
            &a.matching.params()?,
        ),
    };
    if failed > 0 {
        return Ok(Outcome::Partial(PartialFailure(failed)));
    }
    let samples = rated_samples(&manifest, &features)?;
    let has_fiq = samples.iter().all(|s| !s.features.fiq.is_empty()) && !samples.is_empty();
    let combos = if a.features.is_empty() {
        default_combinations(has_fiq)
    } else {
        a.features.clone()
    };
    let config = CvConfig {
        iterations: a.iters,
        train_fraction: a.split,
        seed: a.svr.seed,
        group_by_scene: !a.no_group,
    };
    let params = a.svr.params();
    let reports = combos
        .iter()
        .map(|set| cross_validate(&samples, set, &params, &config))
        .collect::<Result<Vec<_>>>()?;
    print!("{}", format_report(&reports));
    if let Some(out) = &a.out {
        let rows: Vec<(String, Vec<f64>)> = reports
            .iter()
            .map(|r| {
                (
                    r.label.clone(),
                    vec![
                        r.plcc.mean,
                        r.plcc.std,
                        r.srcc.mean,
                        r.srcc.std,
                        r.krcc.mean,
                        r.krcc.std,
                        r.rmse.mean,
                        r.rmse.std,
                        r.iterations as f64,
                        r.skipped as f64,
                    ],
                )
            })
            .collect();
        write_table(
            out,
            &[
                "features",
                "plcc",
                "plcc_std",
                "srcc",
                "srcc_std",
                "krcc",
                "krcc_std",
                "rmse",
                "rmse_std",
                "iterations",
                "skipped",
            ],
            &rows,
        )?;
    }
    Ok(Outcome::Done)
}

fn describe_screening(aspect: &str, r: &MosReport) -> String {
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    format!(
        "{aspect}: retained {} of {} subjects; rejected [{}]; PLCC avg {} min {} max {}\n",
        r.retained.len(),
        r.retained.len() + r.rejected.len(),
        r.rejected.join(", "),
        opt(r.average_plcc),
        opt(r.min_plcc),
        opt(r.max_plcc)
    )
}

fn cmd_mos(a: MosArgs) -> Result<Outcome> {
    let raw = read_raw_ratings(&a.ratings)?;
    let mut scores = Vec::new();
    let mut report_rows = Vec::new();
    for (aspect, matrix) in &raw.aspects {
        let r = mos_from_ratings(matrix, a.threshold)?;
        print!("{}", describe_screening(aspect, &r));
        for s in &r.agreement {
            report_rows.push((
                format!("{aspect}:{}", s.subject),
                vec![s.plcc.unwrap_or(f64::NAN), 0.0],
            ));
        }
        // Rejected subjects are scored against the final MOS.
        for name in &r.rejected {
            let k = matrix
                .subjects
                .iter()
                .position(|n| n == name)
                .expect("known subject");
            let plcc = pearson(&matrix.ratings[k], &r.mos).unwrap_or(f64::NAN);
            report_rows.push((format!("{aspect}:{name}"), vec![plcc, 1.0]));
        }
        scores.push((aspect.clone(), r.mos));
    }
    write_mos(&raw.image_ids, &scores, &a.out)?;
    if let Some(p) = &a.report {
        write_table(p, &["aspect_subject", "plcc", "rejected"], &report_rows)?;
    }
    Ok(Outcome::Done)
}
