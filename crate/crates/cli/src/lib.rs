//! Parameter sweeps over the bound library, CSV/SVG emission and the
//! figure datasets.

pub mod emit;
pub mod error;
pub mod figures;
pub mod gridfile;
pub mod sweep;

pub use emit::{emit_csv, emit_svg, write_csv, write_svg, SvgOptions};
pub use error::{CliError, Result};
pub use sweep::{parse_grid, run_sweep, BoundCurve, Family, PointFailure, Series, SeriesSpec, SweepSpec};
