//! The five comparison datasets: ellipsoid bounds below and above the
//! round sphere, and tube bounds for the three nontrivial spin structures.

use std::path::{Path, PathBuf};

use spinbound_core::{BoundKind, SpinStructure};

use crate::emit::{emit_csv, emit_svg_with, SvgOptions};
use crate::error::{CliError, Result};
use crate::sweep::{parse_grid, run_sweep, BoundCurve, SeriesSpec, SweepSpec};

pub struct Figure {
    pub name: &'static str,
    pub spec: SweepSpec,
    pub svg: SvgOptions,
}

fn ellipsoid_series() -> Vec<SeriesSpec> {
    vec![
        SeriesSpec::new(BoundKind::LowerLb),
        SeriesSpec::new(BoundKind::UpperH2),
        SeriesSpec::t1(0.5),
        SeriesSpec::t1(1.0),
    ]
}

fn svg(title: &str, y_max: Option<f64>) -> SvgOptions {
    SvgOptions {
        title: title.to_string(),
        y_max,
        ..SvgOptions::default()
    }
}

pub fn figure_specs(tol: f64) -> Result<Vec<Figure>> {
    let mut out = vec![
        Figure {
            name: "figure1",
            spec: SweepSpec::ellipsoid(parse_grid("0.05:0.95:19")?, ellipsoid_series()).with_tol(tol),
            svg: svg("ellipsoid, a < 1", Some(10.0)),
        },
        Figure {
            name: "figure2",
            spec: SweepSpec::ellipsoid(parse_grid("1:10:37")?, ellipsoid_series()).with_tol(tol),
            svg: svg("ellipsoid, a > 1", None),
        },
    ];
    let tube = [("figure3", (1, 0)), ("figure4", (0, 1)), ("figure5", (1, 1))];
    for (name, (e1, e2)) in tube {
        let spin = SpinStructure::new(e1, e2)?;
        let mut series = vec![
            SeriesSpec::new(BoundKind::TubeStar),
            SeriesSpec::new(BoundKind::TubeDstar),
        ];
        if name == "figure5" {
            series.push(SeriesSpec::new(BoundKind::TubeH2));
        }
        out.push(Figure {
            name,
            spec: SweepSpec::tube(1.0, parse_grid("0.02:0.98:49")?, series, spin)
                .with_tol(tol)
                .with_normalized(true),
            svg: svg(&format!("tube, spin structure {spin}"), Some(12.0)),
        });
    }
    Ok(out)
}

/// Compute all five figures and write `<name>.csv` and `<name>.svg` into
/// `dir`. Returns the curves in figure order.
pub fn write_figures(dir: impl AsRef<Path>, tol: f64) -> Result<Vec<(PathBuf, BoundCurve)>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for fig in figure_specs(tol)? {
        let curve = run_sweep(&fig.spec)?;
        let csv = dir.join(format!("{}.csv", fig.name));
        emit_csv(&curve, &csv)?;
        emit_svg_with(&curve, dir.join(format!("{}.svg", fig.name)), &fig.svg)?;
        written.push((csv, curve));
    }
    Ok(written)
}
