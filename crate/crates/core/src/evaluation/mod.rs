//! Benchmark metrics and the canary leakage audit.

mod benchmark;
mod canary;

pub use benchmark::{
    evaluate_snippet, load_tasks, run_benchmark, BenchmarkTask, EvalReport, TaskOutcome, TaskStatus, TestCase,
};
pub use canary::{
    inject_canaries, load_canaries, measure_leakage, CanaryError, CanarySpec, CategoryLeak, LeakageReport,
    PiiCategory,
};
