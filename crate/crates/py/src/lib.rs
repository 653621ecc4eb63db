//! Python bindings. Images and disparity maps cross the boundary as flat
//! row-major lists of floats together with their width and height.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use stereo_comfort::disparity::{estimate_disparity, BlockMatchParams};
use stereo_comfort::features::{
    column_names, disparity_range_from_extremes, extract_features, jndd_threshold, ComfortZone,
    DidParams, DrParams, FeatureConfig,
};
use stereo_comfort::imagecore::{self, DisparityMap, GrayImage, StereoPair};
use stereo_comfort::model::{self, Kernel, RatingMatrix, SvrParams};
use stereo_comfort::retarget::{retarget as retarget_pair, Operator, RetargetSpec};
use stereo_comfort::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Convergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Raster = (usize, usize, Vec<f64>);
type Retargeted = (Vec<f64>, Vec<f64>, Vec<f64>, usize);

fn pair(left: Vec<f64>, right: Vec<f64>, width: usize, height: usize) -> PyResult<StereoPair> {
    StereoPair::new(
        GrayImage::new(width, height, left).map_err(to_py)?,
        GrayImage::new(width, height, right).map_err(to_py)?,
    )
    .map_err(to_py)
}

/// Loads an image as luma: `(width, height, values)`.
#[pyfunction]
fn load_image(path: &str) -> PyResult<Raster> {
    let img = imagecore::load_image(path).map_err(to_py)?;
    Ok((img.width(), img.height(), img.into_data()))
}

/// Loads a PFM or 16-bit PNG disparity map.
#[pyfunction]
#[pyo3(signature = (path, scale = 1.0 / 256.0, offset = -128.0))]
fn load_disparity(path: &str, scale: f64, offset: f64) -> PyResult<Raster> {
    let d = imagecore::load_disparity(path, scale, offset).map_err(to_py)?;
    Ok((d.width(), d.height(), d.into_data()))
}

/// SAD block-matching disparity, `d = x_left - x_right`.
#[pyfunction]
#[pyo3(signature = (left, right, width, height, window = 4, search_min = -128, search_max = 128))]
fn estimate(
    left: Vec<f64>,
    right: Vec<f64>,
    width: usize,
    height: usize,
    window: usize,
    search_min: i32,
    search_max: i32,
) -> PyResult<Vec<f64>> {
    let p = pair(left, right, width, height)?;
    let params = BlockMatchParams {
        window_radius: window,
        search_min,
        search_max,
        subpixel: false,
    };
    Ok(estimate_disparity(&p, &params).map_err(to_py)?.into_data())
}

/// Full feature vector in the order given by `feature_names()`.
#[pyfunction]
#[pyo3(signature = (left, right, disparity, width, height, alpha = 0.4, beta = 0.6, lam = 0.5, zone = 79.55, fiq = Vec::new()))]
#[allow(clippy::too_many_arguments)]
fn features(
    left: Vec<f64>,
    right: Vec<f64>,
    disparity: Vec<f64>,
    width: usize,
    height: usize,
    alpha: f64,
    beta: f64,
    lam: f64,
    zone: f64,
    fiq: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let p = pair(left, right, width, height)?;
    let d = DisparityMap::new(width, height, disparity).map_err(to_py)?;
    let config = FeatureConfig {
        zone: ComfortZone::symmetric(zone).map_err(to_py)?,
        dr: DrParams {
            alpha,
            beta,
            ..DrParams::default()
        },
        did: DidParams::new(lam).map_err(to_py)?,
    };
    Ok(extract_features(&p, &d, &config, &fiq)
        .map_err(to_py)?
        .to_vec())
}

#[pyfunction]
#[pyo3(signature = (fiq_count = 0))]
fn feature_names(fiq_count: usize) -> Vec<String> {
    column_names(fiq_count)
}

/// DR from the disparity extremes under a symmetric zone.
#[pyfunction]
#[pyo3(signature = (d_min, d_max, zone = 79.55, alpha = 0.4, beta = 0.6))]
fn disparity_range(d_min: f64, d_max: f64, zone: f64, alpha: f64, beta: f64) -> PyResult<f64> {
    let params = DrParams {
        alpha,
        beta,
        ..DrParams::default()
    };
    params.validate().map_err(to_py)?;
    let z = ComfortZone::symmetric(zone).map_err(to_py)?;
    Ok(disparity_range_from_extremes(d_min, d_max, &z, &params))
}

#[pyfunction]
fn jndd(d: f64) -> f64 {
    jndd_threshold(d)
}

/// Applies one operator; returns `(left, right, disparity, new_width)`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn retarget(
    left: Vec<f64>,
    right: Vec<f64>,
    disparity: Vec<f64>,
    width: usize,
    height: usize,
    op: &str,
    target_width: usize,
) -> PyResult<Retargeted> {
    let p = pair(left, right, width, height)?;
    let d = DisparityMap::new(width, height, disparity).map_err(to_py)?;
    let op: Operator = op.parse().map_err(to_py)?;
    let (out, out_d) =
        retarget_pair(&p, &d, &RetargetSpec::new(op, target_width)).map_err(to_py)?;
    let w = out.width();
    let (l, r) = out.into_views();
    Ok((l.into_data(), r.into_data(), out_d.into_data(), w))
}

/// PLCC, SRCC, KRCC and RMSE as a dict.
#[pyfunction]
fn correlation<'py>(
    py: Python<'py>,
    pred: Vec<f64>,
    mos: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let m = model::correlation_metrics(&pred, &mos).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("plcc", m.plcc)?;
    d.set_item("srcc", m.srcc)?;
    d.set_item("krcc", m.krcc)?;
    d.set_item("rmse", m.rmse)?;
    Ok(d)
}

/// MOS with leave-one-out subject screening. `ratings[s][i]` is subject
/// `s`'s score for image `i`.
#[pyfunction]
#[pyo3(signature = (subjects, ratings, threshold = 0.7))]
fn mos<'py>(
    py: Python<'py>,
    subjects: Vec<String>,
    ratings: Vec<Vec<f64>>,
    threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = RatingMatrix::new(subjects, ratings).map_err(to_py)?;
    let r = model::mos_from_ratings(&m, threshold).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("mos", r.mos)?;
    d.set_item("rejected", r.rejected)?;
    d.set_item("retained", r.retained)?;
    d.set_item("average_plcc", r.average_plcc)?;
    Ok(d)
}

/// A trained ε-SVR model.
#[pyclass(name = "SvrModel", frozen)]
struct PySvrModel(model::SvrModel);

#[pymethods]
impl PySvrModel {
    #[staticmethod]
    #[pyo3(signature = (x, y, kernel = "rbf", c = 10.0, epsilon = 0.1, gamma = None))]
    fn train(
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        kernel: &str,
        c: f64,
        epsilon: f64,
        gamma: Option<f64>,
    ) -> PyResult<Self> {
        let params = SvrParams {
            kernel: kernel.parse::<Kernel>().map_err(to_py)?,
            c,
            epsilon,
            gamma,
            ..SvrParams::default()
        };
        model::train_svr(&x, &y, &params).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        model::load_model(path).map(Self).map_err(to_py)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        model::serialize_model(&self.0, path).map_err(to_py)
    }

    fn predict(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        self.0.predict_many(&x).map_err(to_py)
    }

    #[getter]
    fn support_vector_count(&self) -> usize {
        self.0.support_vectors.len()
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.0.bias
    }
}

/// Runs the command-line tool in-process and returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    stereo_comfort::cli::run(std::iter::once("stereo-comfort".to_string()).chain(args))
}

#[pymodule]
fn stereo_comfort_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(load_image, m)?)?;
    m.add_function(wrap_pyfunction!(load_disparity, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(features, m)?)?;
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    m.add_function(wrap_pyfunction!(disparity_range, m)?)?;
    m.add_function(wrap_pyfunction!(jndd, m)?)?;
    m.add_function(wrap_pyfunction!(retarget, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(mos, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add_class::<PySvrModel>()?;
    Ok(())
}
