//! Relevance judgments, P@k, interpolated 11-point recall-precision curves,
//! macro averaging and report files.

mod files;
mod metrics;

pub use files::{emit_report, parse_qrels, parse_run, Qrels, Run, RunEntry};
pub use metrics::{
    aggregate_judgments, evaluate, evaluate_query, interpolate_11pt, macro_average, precision_at,
    recall_precision_points, EvalReport, PrCurve, QueryEval, Verdict, RECALL_LEVELS,
};
