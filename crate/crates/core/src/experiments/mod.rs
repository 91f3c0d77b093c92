//! Studies built on the network engine: task benchmarks, convergence
//! tables, gradient-flow probes, k sweeps, rankings and significance tests.

mod report;
mod runs;
mod stats;
mod studies;
mod tasks;

pub use report::{
    gradflow_to_csv, rank_to_csv, read_csv_report, read_json_report, results_to_csv, strip_timing, write_json_report,
    write_report, write_text, CsvRow, Environment, JsonReport, ReportFormat, CSV_HEADER, GRADFLOW_HEADER,
};
pub use runs::{
    architecture_id, run_prepared, run_single, run_task, ExperimentSpec, RunResult, SeedRun, DEFAULT_HIDDEN,
    DEFAULT_SEEDS,
};
pub use stats::{
    competition_ranks, mean_ci95, paired_t_test, rank_functions, sample_std, t_quantile_975, Band, RankRow,
    RankTable, TTestResult, TaskScores,
};
pub use studies::{
    argbest, convergence_architectures, convergence_id, run_convergence_study, run_gradient_flow_probe, run_k_sweep,
    ConvergenceRecord, ConvergenceSpec, GradFlowSpec, GradientHealthRecord, KSweepResult, KSweepSpec, ProbeStage,
};
pub use tasks::{gradcheck_batch, prepare_task, task_data_available, task_for_loss, DataOptions, PreparedTask, TaskKind, MNIST_DESK_ROWS};
