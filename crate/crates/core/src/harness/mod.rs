//! Error measurement against the limit: initial-layer correction, stream
//! function, per-ε error rows, ε-sweeps and log-log rate fits.

mod layer;
mod metrics;
mod rate;
mod stream;
mod sweep;

pub use layer::InitialLayer;
pub use metrics::{
    error_report_em, error_report_thm11, error_report_thm12, ErrorRow, ErrorTable, MetricValue, TailModel,
};
pub use rate::{fit_points, fit_rate, RateFit};
pub use stream::{stream_function, stream_function_run, StreamAccumulator, StreamFunctionSeries};
pub use sweep::{eps_sweep, report_times, run_ladder, EpsRunDiagnostics, LimitRunDiagnostics, SweepResult};
