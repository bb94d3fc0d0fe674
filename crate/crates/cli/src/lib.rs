//! Batch front end: reads a model description or a preset, prices the
//! option for both sides and renders a text report or CSV.

mod preset;
mod report;
mod run;

pub use preset::{Preset, EXAMPLE4, GRID_COSTS, GRID_STEPS};
pub use report::{csv, emit_csv, fixed4, fixed4_f64, Check, GridRow, Report, CSV_HEADER};
pub use run::{run, Input, Mode, Outputs, RunSpec, DUAL_BUDGET, EXPAND_BUDGET};
