//! Score pooling, correlation metrics, subject screening and evaluation.

mod cv;
mod io;
mod metrics;
mod mos;
mod svr;

pub use cv::{
    cross_validate, make_splits, CvConfig, EvalReport, MosLabels, RatedSample, Split, Summary,
};
pub use io::{fmt17, load_model, model_from_str, model_to_string, serialize_model, MODEL_HEADER};
pub use metrics::{
    average_ranks, correlation_metrics, kendall_tau_b, pearson, rmse, spearman, CorrelationMetrics,
};
pub use mos::{
    mos_from_ratings, MosReport, RatingMatrix, SubjectAgreement, DEFAULT_REJECTION_THRESHOLD,
    MIN_SUBJECTS,
};
pub use svr::{
    train_svr, train_svr_with_report, Kernel, SolveReport, SvrModel, SvrParams, STD_FLOOR,
};
