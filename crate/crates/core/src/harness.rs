//! Parameter sweeps, closed-form verification campaigns and dataset export.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::channel::{NoiseKind, QuantumChannel};
use crate::error::{invalid, Error, Result};
use crate::fidelity::{
    closed_form_average_fidelity, closed_form_fidelity, AveragedProtocolMap, FidelityReport,
};
use crate::quadrature::{periodic_nodes, QuadratureSpec};
use crate::scalar::{KahanSum, Real};

/// Crate version recorded in every manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// CSV header, in column order.
pub const CSV_HEADER: [&str; 6] = ["kind", "param", "xi", "closed_form", "oracle", "deviation"];

/// State angle of the `{|0⟩, |1⟩}` encoding.
pub const XI_COMPUTATIONAL: f64 = 0.0;
/// State angle of the `{|+⟩, |−⟩}` encoding.
pub const XI_DIAGONAL: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    ClosedForm,
    Oracle,
    Both,
}

impl SweepMode {
    fn closed(self) -> bool {
        matches!(self, SweepMode::ClosedForm | SweepMode::Both)
    }

    fn oracle(self) -> bool {
        matches!(self, SweepMode::Oracle | SweepMode::Both)
    }
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" | "closed-form" => Ok(SweepMode::ClosedForm),
            "oracle" => Ok(SweepMode::Oracle),
            "both" => Ok(SweepMode::Both),
            other => Err(invalid(format!(
                "unknown mode '{other}', expected closed_form, oracle or both"
            ))),
        }
    }
}

/// State angle of a result row: a value in radians or the ξ-average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum XiValue<T> {
    Angle(T),
    Average,
}

impl<T: Real> fmt::Display for XiValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XiValue::Angle(x) => write!(f, "{x}"),
            XiValue::Average => f.write_str("avg"),
        }
    }
}

impl<T: Real> FromStr for XiValue<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "avg" {
            return Ok(XiValue::Average);
        }
        s.parse::<T>()
            .map(XiValue::Angle)
            .map_err(|_| Error::Parse(format!("xi value '{s}' is neither a number nor 'avg'")))
    }
}

impl<T: Real> Serialize for XiValue<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            XiValue::Angle(x) => x.serialize(s),
            XiValue::Average => s.serialize_str("avg"),
        }
    }
}

impl<'de, T: Real> Deserialize<'de> for XiValue<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<T> {
            Num(T),
            Text(String),
        }
        match Raw::<T>::deserialize(d)? {
            Raw::Num(x) => Ok(XiValue::Angle(x)),
            Raw::Text(t) if t == "avg" => Ok(XiValue::Average),
            Raw::Text(t) => Err(de::Error::custom(format!("unexpected xi '{t}'"))),
        }
    }
}

/// One output row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ResultRow<T> {
    pub kind: NoiseKind,
    pub param: T,
    pub xi: XiValue<T>,
    pub closed_form: Option<T>,
    pub oracle: Option<T>,
    pub deviation: Option<T>,
}

impl<T: Real> ResultRow<T> {
    pub fn new(
        kind: NoiseKind,
        param: T,
        xi: XiValue<T>,
        closed_form: Option<T>,
        oracle: Option<T>,
    ) -> Self {
        let deviation = match (closed_form, oracle) {
            (Some(c), Some(o)) => Some((c - o).abs()),
            _ => None,
        };
        Self {
            kind,
            param,
            xi,
            closed_form,
            oracle,
            deviation,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec<T> {
    pub kind: NoiseKind,
    pub param_grid: Vec<T>,
    pub xi_grid: Vec<T>,
    /// Append a ξ-averaged row after each parameter's ξ rows.
    pub include_average: bool,
    pub mode: SweepMode,
    pub quad: QuadratureSpec,
    pub seed: u64,
}

fn check_increasing<T: Real>(name: &str, grid: &[T]) -> Result<()> {
    if let Some(bad) = grid.iter().find(|v| !v.is_finite()) {
        return Err(invalid(format!("{name}: non-finite value {bad}")));
    }
    if let Some(w) = grid
        .windows(2)
        .find(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(invalid(format!(
            "{name}: values must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl<T: Real> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.param_grid.is_empty() {
            return Err(invalid("param_grid: must not be empty"));
        }
        check_increasing("param_grid", &self.param_grid)?;
        for &p in &self.param_grid {
            self.kind
                .validate_parameter(p)
                .map_err(|e| invalid(format!("param_grid: {e}")))?;
        }
        if self.xi_grid.is_empty() && !self.include_average {
            return Err(invalid(
                "xi_grid: must not be empty unless the average is requested",
            ));
        }
        check_increasing("xi_grid", &self.xi_grid)?;
        self.quad
            .validate()
            .map_err(|e| invalid(format!("quadrature: {e}")))
    }

    /// Rows the sweep will produce.
    pub fn row_count(&self) -> usize {
        self.param_grid.len() * (self.xi_grid.len() + usize::from(self.include_average))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolutions {
    pub rotation: usize,
    pub xi: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    pub resolutions: Resolutions,
    pub duration_ms: u64,
    /// Keyed by noise kind.
    pub max_abs_deviation: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_policy: Option<String>,
}

impl RunManifest {
    pub fn new(seed: u64, quad: &QuadratureSpec) -> Self {
        Self {
            version: VERSION.to_string(),
            seed,
            resolutions: Resolutions {
                rotation: quad.rotation_points,
                xi: quad.xi_points,
            },
            duration_ms: 0,
            max_abs_deviation: BTreeMap::new(),
            stage_policy: None,
        }
    }

    fn finish(mut self, started: Instant) -> Self {
        self.duration_ms = u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX);
        self
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutput<T> {
    pub rows: Vec<ResultRow<T>>,
    pub manifest: RunManifest,
}

/// ξ-average of a per-ξ function using the state-angle quadrature.
fn xi_mean<T: Real>(quad: &QuadratureSpec, f: impl Fn(T) -> Result<T>) -> Result<T> {
    let mut acc = KahanSum::new();
    for xi in periodic_nodes::<T>(quad.xi_points) {
        acc.add(f(xi)?);
    }
    Ok(acc.total() / T::lit(quad.xi_points as f64))
}

fn sweep_param<T: Real>(spec: &SweepSpec<T>, param: T) -> Result<Vec<ResultRow<T>>> {
    let kind = spec.kind;
    let map = if spec.mode.oracle() {
        let channel = QuantumChannel::from_noise(kind, param)?;
        Some(AveragedProtocolMap::new(&channel, &spec.quad)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(spec.xi_grid.len() + 1);
    for &xi in &spec.xi_grid {
        let closed = if spec.mode.closed() {
            Some(closed_form_fidelity(kind, param, xi)?)
        } else {
            None
        };
        let oracle = map.as_ref().map(|m| m.fidelity(xi)).transpose()?;
        rows.push(ResultRow::new(
            kind,
            param,
            XiValue::Angle(xi),
            closed,
            oracle,
        ));
    }
    if spec.include_average {
        let closed = if spec.mode.closed() {
            Some(closed_form_average_fidelity(kind, param)?)
        } else {
            None
        };
        let oracle = map
            .as_ref()
            .map(|m| xi_mean(&spec.quad, |xi| m.fidelity(xi)))
            .transpose()?;
        rows.push(ResultRow::new(
            kind,
            param,
            XiValue::Average,
            closed,
            oracle,
        ));
    }
    Ok(rows)
}

/// Evaluates the spec on its full grid.
///
/// Rows are ordered parameter-major, then by ξ, with the average row (when
/// requested) last for each parameter. Oracle values come from the
/// rotation-averaged protocol map at `spec.quad.rotation_points` per axis.
pub fn sweep<T: Real>(spec: &SweepSpec<T>) -> Result<SweepOutput<T>> {
    spec.validate()?;
    let started = Instant::now();
    let rows: Vec<ResultRow<T>> = spec
        .param_grid
        .par_iter()
        .map(|&p| sweep_param(spec, p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut manifest = RunManifest::new(spec.seed, &spec.quad);
    if let Some(max) = rows.iter().filter_map(|r| r.deviation).reduce(T::max) {
        manifest
            .max_abs_deviation
            .insert(spec.kind.to_string(), max.as_f64());
    }
    Ok(SweepOutput {
        rows,
        manifest: manifest.finish(started),
    })
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace<T: Real>(start: T, end: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / T::lit((n - 1) as f64);
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        end
                    } else {
                        start + step * T::lit(i as f64)
                    }
                })
                .collect()
        }
    }
}

/// Default parameter grid for figure sweeps: 101 points over [0, 1] for
/// AD/PD and over [0, 2π] for CD/CR.
pub fn default_sweep_grid<T: Real>(kind: NoiseKind) -> Vec<T> {
    let end = if kind.is_probabilistic() {
        T::one()
    } else {
        T::TAU()
    };
    linspace(T::zero(), end, 101)
}

/// Grids for a verification campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyGrids<T> {
    /// η grid for AD/PD.
    pub probability: Vec<T>,
    /// Φ/Θ grid for CD/CR.
    pub angle: Vec<T>,
    pub xi: Vec<T>,
}

impl<T: Real> Default for VerifyGrids<T> {
    /// η ∈ {0, 0.05, …, 1}; Φ, Θ, ξ ∈ {0, π/16, …, 2π}.
    fn default() -> Self {
        let angles = linspace(T::zero(), T::TAU(), 33);
        Self {
            probability: linspace(T::zero(), T::one(), 21),
            angle: angles.clone(),
            xi: angles,
        }
    }
}

impl<T: Real> VerifyGrids<T> {
    pub fn params_for(&self, kind: NoiseKind) -> &[T] {
        if kind.is_probabilistic() {
            &self.probability
        } else {
            &self.angle
        }
    }
}

/// Compares every closed form against the rotation-averaged oracle on the
/// given grids, one report per kind.
pub fn verify_formulas<T: Real>(
    kinds: &[NoiseKind],
    grids: &VerifyGrids<T>,
    quad: &QuadratureSpec,
) -> Result<Vec<FidelityReport<T>>> {
    quad.validate()?;
    check_increasing("xi grid", &grids.xi)?;
    kinds
        .iter()
        .map(|&kind| {
            let params = grids.params_for(kind).to_vec();
            check_increasing("parameter grid", &params)?;
            let per_param: Vec<(Vec<T>, Vec<T>)> = params
                .par_iter()
                .map(|&p| {
                    let map =
                        AveragedProtocolMap::new(&QuantumChannel::from_noise(kind, p)?, quad)?;
                    let mut closed = Vec::with_capacity(grids.xi.len());
                    let mut oracle = Vec::with_capacity(grids.xi.len());
                    for &xi in &grids.xi {
                        closed.push(closed_form_fidelity(kind, p, xi)?);
                        oracle.push(map.fidelity(xi)?);
                    }
                    Ok((closed, oracle))
                })
                .collect::<Result<_>>()?;
            let (closed, oracle) = per_param.into_iter().unzip();
            FidelityReport::from_grids(kind, params, grids.xi.clone(), closed, oracle)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(invalid(format!(
                "unknown format '{other}', expected csv or json"
            ))),
        }
    }
}

fn opt<T: Real>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV text with the fixed header. Numbers use the shortest representation
/// that parses back to the same value.
pub fn to_csv<T: Real>(rows: &[ResultRow<T>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.kind.to_string(),
            r.param.to_string(),
            r.xi.to_string(),
            opt(r.closed_form),
            opt(r.oracle),
            opt(r.deviation),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_csv<T: Real>(text: &str) -> Result<Vec<ResultRow<T>>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let num = |s: &str| -> Result<T> {
        s.parse::<T>()
            .map_err(|_| Error::Parse(format!("bad number '{s}'")))
    };
    let opt_num = |s: &str| -> Result<Option<T>> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s).map(Some)
        }
    };
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != CSV_HEADER.len() {
                return Err(Error::Parse(format!("row has {} fields", rec.len())));
            }
            Ok(ResultRow {
                kind: rec[0].parse()?,
                param: num(&rec[1])?,
                xi: rec[2].parse()?,
                closed_form: opt_num(&rec[3])?,
                oracle: opt_num(&rec[4])?,
                deviation: opt_num(&rec[5])?,
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct JsonDocument<T> {
    rows: Vec<ResultRow<T>>,
    manifest: RunManifest,
}

pub fn to_json<T: Real>(rows: &[ResultRow<T>], manifest: &RunManifest) -> Result<String> {
    let doc = JsonDocument {
        rows: rows.to_vec(),
        manifest: manifest.clone(),
    };
    serde_json::to_string_pretty(&doc)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_json<T: Real>(text: &str) -> Result<(Vec<ResultRow<T>>, RunManifest)> {
    let doc: JsonDocument<T> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((doc.rows, doc.manifest))
}

/// Renders rows in the requested format.
pub fn render<T: Real>(
    rows: &[ResultRow<T>],
    manifest: &RunManifest,
    format: ExportFormat,
) -> Result<String> {
    if rows.is_empty() {
        return Err(invalid("nothing to export: rows are empty"));
    }
    match format {
        ExportFormat::Csv => to_csv(rows),
        ExportFormat::Json => to_json(rows, manifest),
    }
}

/// Writes rows to `path`.
pub fn export<T: Real>(
    rows: &[ResultRow<T>],
    manifest: &RunManifest,
    format: ExportFormat,
    path: &Path,
) -> Result<()> {
    let text = render(rows, manifest, format)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
