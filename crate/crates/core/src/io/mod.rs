//! File formats and the end-to-end assessment report.

mod csv_io;
mod pipeline;
mod plot;
mod report;

pub use csv_io::{read_csv, read_csv_from, write_csv, write_csv_to, CsvSpec};
pub use pipeline::{exit_code, run_assess, AssessOptions, EXIT_APPROPRIATE, EXIT_ERROR, EXIT_NOT_APPROPRIATE};
pub use plot::{emit_km_plot, render_km_csv, render_km_svg, PlotFormat};
pub use report::{
    format_sig, ConfigEcho, DatasetInfo, FittedModel, ModelRow, ParameterEstimate, ReceusReport,
    ReportDocument, ToolInfo, VisualEvidence, CLINICAL_JUDGMENT_PROMPT, REPORT_SCHEMA,
};
