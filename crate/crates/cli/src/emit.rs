//! CSV and SVG writers for [`BoundCurve`].

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{CliError, Result};
use crate::sweep::BoundCurve;

/// Relative slack for the ordering re-check on top of the error estimates.
const ORDERING_SLACK: f64 = 1e-12;

fn cell(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.16e}")
    }
}

/// Every upper series must stay above `4 pi / vol` within its error estimate.
pub fn check_ordering(curve: &BoundCurve) -> Result<()> {
    let Some(lower) = &curve.genus_zero_lower else {
        return Ok(());
    };
    for s in curve.series.iter().filter(|s| !s.kind.is_lower()) {
        for ((&v, &e), (&lb, &param)) in s.values.iter().zip(&s.errors).zip(lower.iter().zip(&curve.params)) {
            if v.is_nan() || lb.is_nan() {
                continue;
            }
            if v + e < lb * (1.0 - ORDERING_SLACK) {
                return Err(CliError::Ordering {
                    label: s.label.clone(),
                    param,
                    value: v,
                    lower: lb,
                });
            }
        }
    }
    Ok(())
}

/// Header `param,<label>,<label>_err,...`, 17 significant digits, LF line
/// endings. Failed points are empty cells.
pub fn write_csv<W: Write>(curve: &BoundCurve, mut out: W) -> io::Result<()> {
    let mut header = String::from("param");
    for s in &curve.series {
        write!(header, ",{0},{0}_err", s.label).expect("write to String");
    }
    out.write_all(header.as_bytes())?;
    out.write_all(b"\n")?;
    for (i, &p) in curve.params.iter().enumerate() {
        let mut row = cell(p);
        for s in &curve.series {
            row.push(',');
            row.push_str(&cell(s.values[i]));
            row.push(',');
            row.push_str(&cell(s.errors[i]));
        }
        row.push('\n');
        out.write_all(row.as_bytes())?;
    }
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Re-check the genus-0 ordering, then write the CSV.
pub fn emit_csv(curve: &BoundCurve, path: impl AsRef<Path>) -> Result<()> {
    check_ordering(curve)?;
    write_file(path.as_ref(), |w| write_csv(curve, w))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    pub title: String,
    /// Clip the y axis at this value (in plotted units).
    pub y_max: Option<f64>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            width: 720.0,
            height: 480.0,
            title: String::new(),
            y_max: None,
        }
    }
}

const COLORS: [&str; 6] = ["#1f4e79", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e", "#566573"];
const DASHES: [&str; 6] = ["", "10 5", "3 3", "14 4 3 4", "6 2", "1 4"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Round tick spacing (1, 2 or 5 times a power of ten) giving about `n` ticks.
fn tick_step(span: f64, n: f64) -> f64 {
    let raw = span / n;
    let mag = 10f64.powf(raw.log10().floor());
    let m = raw / mag;
    let nice = if m < 1.5 {
        1.0
    } else if m < 3.5 {
        2.0
    } else if m < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let step = tick_step(hi - lo, 5.0);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.filter(|v| v.is_finite()).fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

fn y_label(curve: &BoundCurve) -> &'static str {
    match (curve.normalized, curve.pi2_units) {
        (true, true) => "λ₁² vol / π²",
        (true, false) => "λ₁² vol",
        _ => "λ₁²",
    }
}

/// One polyline per series with annotated axes and a legend.
pub fn write_svg<W: Write>(curve: &BoundCurve, mut out: W, opts: &SvgOptions) -> io::Result<()> {
    let unit = if curve.pi2_units { PI * PI } else { 1.0 };
    let (w, h) = (opts.width, opts.height);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let (mut x_lo, mut x_hi) = range(curve.params.iter().copied()).unwrap_or((0.0, 1.0));
    let (y_min, y_max) =
        range(curve.series.iter().flat_map(|s| s.values.iter().map(|v| v / unit))).unwrap_or((0.0, 1.0));
    let mut y_lo = y_min.min(0.0);
    let mut y_hi = opts.y_max.map_or(y_max, |m| y_max.min(m));
    if x_hi <= x_lo {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_hi <= y_lo {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| top + (y_hi - y.clamp(y_lo, y_hi)) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    if !opts.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            w / 2.0,
            escape(&opts.title)
        );
    }
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{left}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{0:.1}"/></g>"#,
        top + ph,
        left + pw
    );
    let (xt, xd) = ticks(x_lo, x_hi);
    for t in xt {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{0:.1}" x2="{x:.1}" y2="{1:.1}" stroke="black"/><text x="{x:.1}" y="{2:.1}" text-anchor="middle">{t:.xd$}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 18.0
        );
    }
    let (yt, yd) = ticks(y_lo, y_hi);
    for t in yt {
        let y = sy(t);
        let _ = writeln!(
            s,
            r#"<line x1="{0:.1}" y1="{y:.1}" x2="{left}" y2="{y:.1}" stroke="black"/><text x="{1:.1}" y="{2:.1}" text-anchor="end">{t:.yd$}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 10.0,
        escape(&curve.param_name)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0:.1}" text-anchor="middle" transform="rotate(-90 16 {0:.1})">{1}</text>"#,
        top + ph / 2.0,
        y_label(curve)
    );

    for (k, series) in curve.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let dash = DASHES[k % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let points: Vec<String> = curve
            .params
            .iter()
            .zip(&series.values)
            .filter(|(_, v)| v.is_finite())
            .map(|(&x, &v)| format!("{:.2},{:.2}", sx(x), sy(v / unit)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&series.label)
        );
        let ly = top + 12.0 + 16.0 * k as f64;
        let lx = left + pw - 190.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.5"{dash_attr}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 30.0,
            lx + 36.0,
            ly + 4.0,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    out.write_all(s.as_bytes())
}

pub fn emit_svg(curve: &BoundCurve, path: impl AsRef<Path>) -> Result<()> {
    emit_svg_with(curve, path, &SvgOptions::default())
}

pub fn emit_svg_with(curve: &BoundCurve, path: impl AsRef<Path>, opts: &SvgOptions) -> Result<()> {
    write_file(path.as_ref(), |w| write_svg(curve, w, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::SeriesSpec;
    use spinbound_core::BoundKind;

    fn toy() -> BoundCurve {
        let mut c = BoundCurve::empty("a", &[SeriesSpec::new(BoundKind::LowerLb), SeriesSpec::t1(1.0)]);
        c.params = vec![0.5, 1.0];
        c.series[0].values = vec![2.0, 1.0];
        c.series[0].errors = vec![0.0, 0.0];
        c.series[1].values = vec![3.0, f64::NAN];
        c.series[1].errors = vec![1e-12, f64::NAN];
        c.genus_zero_lower = Some(vec![2.0, 1.0]);
        c
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&toy(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(
            lines[0],
            "param,LOWER_LB,LOWER_LB_err,UPPER_T1[beta=1],UPPER_T1[beta=1]_err"
        );
        assert_eq!(lines[1], "5.0000000000000000e-1,2.0000000000000000e0,0.0000000000000000e0,3.0000000000000000e0,9.9999999999999998e-13");
        assert!(lines[2].ends_with(",,"));
        assert_eq!(lines[3], "");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-7, 6.02214076e23] {
            assert_eq!(cell(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn ordering_recheck() {
        let mut c = toy();
        assert!(check_ordering(&c).is_ok());
        c.series[1].values[0] = 1.5;
        assert!(matches!(check_ordering(&c), Err(CliError::Ordering { .. })));
        c.genus_zero_lower = None;
        assert!(check_ordering(&c).is_ok());
    }

    #[test]
    fn tick_steps() {
        assert_eq!(tick_step(1.0, 5.0), 0.2);
        assert_eq!(tick_step(10.0, 5.0), 2.0);
        assert_eq!(tick_step(30.0, 5.0), 5.0);
        let (t, d) = ticks(0.05, 0.95);
        assert_eq!(d, 1);
        assert_eq!(t.len(), 4);
        assert!((t[0] - 0.2).abs() < 1e-12 && (t[3] - 0.8).abs() < 1e-12);
    }
}
