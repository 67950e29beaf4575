//! Sweeps of one surface parameter with one series per requested bound.

use std::f64::consts::PI;

use rayon::prelude::*;
use spinbound_core::bounds::{
    classical_h2_bound, ellipsoid_beta1_closed_form, ellipsoid_beta_bound, extrinsic_bound_t1,
    intrinsic_sphere_bound_ellipsoid, lower_bound_genus0, torus_curvature_bound, torus_spin_bound_gradient,
    torus_spin_bound_ratio, torus_trivial_bound, torus_volume, tube_bound_dstar, tube_bound_star, tube_h2_closed_form,
    tube_trivial_bound_with, TrivialPrefactor,
};
use spinbound_core::geometry::{ellipsoid_volume, tube_lattice, tube_volume};
use spinbound_core::{
    BoundKind, BoundValue, ConformalFactorField, EllipsoidParam, Lattice2, SpinStructure, TestFunctionPair, TubeParam,
};

use crate::error::{CliError, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_BETA: f64 = 1.0;

/// The swept surface. The grid parameter is `a` for ellipsoids, `r kappa`
/// for tubes and a stretch factor applied to `v2` for tori.
#[derive(Debug, Clone)]
pub enum Family {
    Ellipsoid,
    Tube {
        kappa: f64,
        prefactor: TrivialPrefactor,
    },
    Torus {
        lattice: Lattice2,
        factor: ConformalFactorField,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Ellipsoid => "ELLIPSOID",
            Family::Tube { .. } => "TUBE",
            Family::Torus { .. } => "TORUS",
        }
    }

    pub fn param_name(&self) -> &'static str {
        match self {
            Family::Ellipsoid => "a",
            Family::Tube { .. } => "rk",
            Family::Torus { .. } => "stretch",
        }
    }

    fn accepts(&self, kind: BoundKind) -> bool {
        use BoundKind::*;
        match self {
            Family::Ellipsoid => matches!(kind, LowerLb | UpperH2 | UpperT1 | UpperT1Beta1Closed | UpperT2),
            Family::Tube { .. } => matches!(
                kind,
                TubeStar | TubeDstar | TubeH2 | TubeTrivial | UpperT3 | UpperT4Star | UpperT4Dstar | UpperT4Curv
            ),
            Family::Torus { .. } => matches!(kind, UpperT3 | UpperT4Star | UpperT4Dstar | UpperT4Curv),
        }
    }
}

/// One requested series: a bound kind, plus the exponent for `UPPER_T1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSpec {
    pub kind: BoundKind,
    pub beta: Option<f64>,
}

impl SeriesSpec {
    pub fn new(kind: BoundKind) -> Self {
        SeriesSpec {
            kind,
            beta: (kind == BoundKind::UpperT1).then_some(DEFAULT_BETA),
        }
    }

    /// `UPPER_T1` with test function `f = Delta_a^beta`.
    pub fn t1(beta: f64) -> Self {
        SeriesSpec {
            kind: BoundKind::UpperT1,
            beta: Some(beta),
        }
    }

    pub fn label(&self) -> String {
        match self.beta {
            Some(b) => format!("{}[beta={b}]", self.kind.label()),
            None => self.kind.label().to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: Family,
    pub grid: Vec<f64>,
    pub series: Vec<SeriesSpec>,
    /// Ignored by the ellipsoid family.
    pub spin: SpinStructure,
    pub tol: f64,
    /// Report `lambda_1^2 vol` instead of `lambda_1^2`.
    pub normalized: bool,
}

impl SweepSpec {
    pub fn new(family: Family, grid: Vec<f64>, series: Vec<SeriesSpec>) -> Self {
        SweepSpec {
            family,
            grid,
            series,
            spin: SpinStructure::TRIVIAL,
            tol: DEFAULT_TOL,
            normalized: false,
        }
    }

    pub fn ellipsoid(grid: Vec<f64>, series: Vec<SeriesSpec>) -> Self {
        SweepSpec::new(Family::Ellipsoid, grid, series)
    }

    pub fn tube(kappa: f64, grid: Vec<f64>, series: Vec<SeriesSpec>, spin: SpinStructure) -> Self {
        SweepSpec {
            spin,
            ..SweepSpec::new(
                Family::Tube {
                    kappa,
                    prefactor: TrivialPrefactor::default(),
                },
                grid,
                series,
            )
        }
    }

    pub fn torus(
        lattice: Lattice2,
        factor: ConformalFactorField,
        grid: Vec<f64>,
        series: Vec<SeriesSpec>,
        spin: SpinStructure,
    ) -> Self {
        SweepSpec {
            spin,
            ..SweepSpec::new(Family::Torus { lattice, factor }, grid, series)
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(CliError::spec("parameter grid is empty"));
        }
        if let Some(x) = self.grid.iter().find(|x| !x.is_finite()) {
            return Err(CliError::spec(format!("non-finite grid value {x}")));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::spec(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.series.is_empty() {
            return Err(CliError::spec("no bound kinds requested"));
        }
        let mut labels: Vec<String> = Vec::new();
        for s in &self.series {
            let label = s.label();
            if labels.contains(&label) {
                return Err(CliError::spec(format!("series {label} requested twice")));
            }
            labels.push(label);
            if !self.family.accepts(s.kind) {
                return Err(CliError::spec(format!(
                    "{} does not apply to {}",
                    s.kind,
                    self.family.name()
                )));
            }
            match (s.kind, s.beta) {
                (BoundKind::UpperT1, Some(b)) if b > 0.0 && b.is_finite() => {}
                (BoundKind::UpperT1, b) => {
                    return Err(CliError::spec(format!("UPPER_T1 needs a positive beta, got {b:?}")))
                }
                (_, Some(_)) => return Err(CliError::spec(format!("beta only applies to UPPER_T1, not {}", s.kind))),
                (_, None) => {}
            }
            if !matches!(self.family, Family::Ellipsoid) {
                let needs_trivial = matches!(s.kind, BoundKind::TubeTrivial | BoundKind::UpperT3);
                let any = s.kind == BoundKind::TubeH2;
                if !any && needs_trivial != self.spin.is_trivial() {
                    return Err(CliError::spec(format!(
                        "{} does not apply to spin structure {}",
                        s.kind, self.spin
                    )));
                }
            }
        }
        match &self.family {
            Family::Ellipsoid => {
                if let Some(a) = self.grid.iter().find(|&&a| !(a > 0.0)) {
                    return Err(CliError::spec(format!("ellipsoid parameter must be positive, got {a}")));
                }
            }
            Family::Tube { kappa, .. } => {
                if !(*kappa > 0.0 && kappa.is_finite()) {
                    return Err(CliError::spec(format!("kappa must be positive, got {kappa}")));
                }
                if let Some(rk) = self.grid.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
                    return Err(CliError::spec(format!("tube grid needs 0 < r kappa < 1, got {rk}")));
                }
            }
            Family::Torus { .. } => {
                if let Some(c) = self.grid.iter().find(|&&c| !(c > 0.0)) {
                    return Err(CliError::spec(format!("torus stretch must be positive, got {c}")));
                }
            }
        }
        Ok(())
    }
}

/// Parse `lo:hi:n` (inclusive, evenly spaced) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::spec(format!("bad number '{s}' in grid '{text}'")))
    };
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(CliError::spec(format!("grid '{text}' is not lo:hi:n")));
        };
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| CliError::spec(format!("bad point count in grid '{text}'")))?;
        match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n)
                .map(|i| {
                    if i + 1 == n {
                        hi
                    } else {
                        lo + (hi - lo) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<_>>()?
    };
    if grid.is_empty() {
        return Err(CliError::spec(format!("grid '{text}' has no points")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(CliError::spec(format!("grid '{text}' has non-finite points")));
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub kind: BoundKind,
    /// NaN where the point failed; see [`BoundCurve::failures`].
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub index: usize,
    pub param: f64,
    pub label: String,
    pub message: String,
    pub exit_code: u8,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundCurve {
    pub param_name: String,
    pub params: Vec<f64>,
    pub series: Vec<Series>,
    pub failures: Vec<PointFailure>,
    pub normalized: bool,
    /// Values are plotted in multiples of `pi^2`.
    pub pi2_units: bool,
    /// `4 pi / vol` (or `4 pi` when normalized) per point for genus-0
    /// surfaces; emission checks every upper series against it.
    pub genus_zero_lower: Option<Vec<f64>>,
}

impl BoundCurve {
    /// A curve with series headers and no points.
    pub fn empty(param_name: &str, series: &[SeriesSpec]) -> Self {
        BoundCurve {
            param_name: param_name.to_string(),
            series: series
                .iter()
                .map(|s| Series {
                    label: s.label(),
                    kind: s.kind,
                    values: Vec::new(),
                    errors: Vec::new(),
                })
                .collect(),
            ..BoundCurve::default()
        }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn series(&self, label: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.label == label)
    }
}

struct PointResult {
    values: Vec<std::result::Result<BoundValue, spinbound_core::Error>>,
    lower: Option<f64>,
}

fn normalize(v: BoundValue, vol: f64, normalized: bool) -> BoundValue {
    if normalized {
        v.to_normalized(vol)
    } else {
        v.to_unnormalized(vol)
    }
}

fn eval_ellipsoid(spec: &SweepSpec, a: f64) -> PointResult {
    let tol = spec.tol;
    let vol = EllipsoidParam::new(a).and_then(|_| ellipsoid_volume(a, tol));
    let values = spec
        .series
        .iter()
        .map(|s| {
            let vol = vol.clone()?;
            let e = EllipsoidParam::new(a)?;
            let v = match s.kind {
                BoundKind::LowerLb => lower_bound_genus0(vol)?,
                BoundKind::UpperH2 => classical_h2_bound(e, tol)?,
                BoundKind::UpperT1 => {
                    let beta = s.beta.unwrap_or(DEFAULT_BETA);
                    if beta > 0.5 {
                        ellipsoid_beta_bound(a, beta, tol)?
                    } else {
                        extrinsic_bound_t1(&e, &TestFunctionPair::ellipsoid_power(a, beta), tol)?
                    }
                }
                BoundKind::UpperT1Beta1Closed => ellipsoid_beta1_closed_form(a)?,
                BoundKind::UpperT2 => intrinsic_sphere_bound_ellipsoid(a, tol)?,
                other => unreachable!("{other} rejected by validation"),
            };
            Ok(normalize(v, vol, spec.normalized))
        })
        .collect();
    let lower = vol
        .ok()
        .map(|vol| if spec.normalized { 4.0 * PI } else { 4.0 * PI / vol });
    PointResult { values, lower }
}

fn eval_torus_kind(
    kind: BoundKind,
    h: &ConformalFactorField,
    lat: &Lattice2,
    s: SpinStructure,
    tol: f64,
) -> spinbound_core::Result<BoundValue> {
    match kind {
        BoundKind::UpperT3 => torus_trivial_bound(h, lat, tol),
        BoundKind::UpperT4Star => torus_spin_bound_ratio(h, lat, s, tol),
        BoundKind::UpperT4Dstar => torus_spin_bound_gradient(h, lat, s, tol),
        BoundKind::UpperT4Curv => torus_curvature_bound(h, lat, s, tol),
        other => unreachable!("{other} rejected by validation"),
    }
}

fn eval_tube(spec: &SweepSpec, kappa: f64, prefactor: TrivialPrefactor, rk: f64) -> PointResult {
    let tol = spec.tol;
    let values = spec
        .series
        .iter()
        .map(|s| {
            let t = TubeParam::new(kappa, rk / kappa)?;
            let v = match s.kind {
                BoundKind::TubeStar => tube_bound_star(&t, spec.spin)?,
                BoundKind::TubeDstar => tube_bound_dstar(&t, spec.spin)?,
                BoundKind::TubeH2 => tube_h2_closed_form(&t),
                BoundKind::TubeTrivial => tube_trivial_bound_with(&t, tol, prefactor)?,
                kind => eval_torus_kind(kind, &ConformalFactorField::tube(t), &tube_lattice(&t), spec.spin, tol)?,
            };
            Ok(normalize(v, tube_volume(&t), spec.normalized))
        })
        .collect();
    PointResult { values, lower: None }
}

fn eval_torus(spec: &SweepSpec, lattice: &Lattice2, h: &ConformalFactorField, stretch: f64) -> PointResult {
    let tol = spec.tol;
    let lat = Lattice2::new(lattice.v1, [stretch * lattice.v2[0], stretch * lattice.v2[1]]);
    let vol = lat.clone().and_then(|lat| torus_volume(h, &lat, tol));
    let values = spec
        .series
        .iter()
        .map(|s| {
            let lat = lat.clone()?;
            let v = eval_torus_kind(s.kind, h, &lat, spec.spin, tol)?;
            Ok(normalize(v, vol.clone()?, spec.normalized))
        })
        .collect();
    PointResult { values, lower: None }
}

/// Evaluate every requested series at every grid point. Points run in
/// parallel and are assembled in grid order; failures are recorded in the
/// curve and leave NaN in the affected cells.
pub fn run_sweep(spec: &SweepSpec) -> Result<BoundCurve> {
    spec.validate()?;
    let points: Vec<PointResult> = spec
        .grid
        .par_iter()
        .map(|&x| match &spec.family {
            Family::Ellipsoid => eval_ellipsoid(spec, x),
            Family::Tube { kappa, prefactor } => eval_tube(spec, *kappa, *prefactor, x),
            Family::Torus { lattice, factor } => eval_torus(spec, lattice, factor, x),
        })
        .collect();

    let mut curve = BoundCurve::empty(spec.family.param_name(), &spec.series);
    curve.params = spec.grid.clone();
    curve.normalized = spec.normalized;
    curve.pi2_units = spec.normalized && matches!(spec.family, Family::Tube { .. });
    if matches!(spec.family, Family::Ellipsoid) {
        curve.genus_zero_lower = Some(points.iter().map(|p| p.lower.unwrap_or(f64::NAN)).collect());
    }
    for (index, (point, &param)) in points.into_iter().zip(&spec.grid).enumerate() {
        for (series, result) in curve.series.iter_mut().zip(point.values) {
            let failure = |message: String, exit_code: u8| PointFailure {
                index,
                param,
                label: series.label.clone(),
                message,
                exit_code,
            };
            match result {
                Ok(v) if v.value.is_finite() && v.error.is_finite() => {
                    series.values.push(v.value);
                    series.errors.push(v.error);
                    continue;
                }
                Ok(v) => curve
                    .failures
                    .push(failure(format!("non-finite value {} ± {}", v.value, v.error), 3)),
                Err(e) => {
                    let code = CliError::from(e.clone()).exit_code();
                    curve.failures.push(failure(e.to_string(), code));
                }
            }
            series.values.push(f64::NAN);
            series.errors.push(f64::NAN);
        }
    }
    Ok(curve)
}
