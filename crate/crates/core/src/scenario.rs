//! Scenario files: schema, parsing with field-path diagnostics, validation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chart::{build_s2xt2, ChartPoint, FrameSpec, DIM};
use crate::connection::{Family, ParamCoeff, TorsionField};
use crate::grid::{AxisRange, GridSpec};

pub const SCENARIO_VERSION: i64 = 1;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const AXIS_NAMES: [&str; DIM] = ["theta", "phi", "x", "y"];

/// One problem with a scenario, located by field path and, for syntax
/// errors, by line and column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl Diagnostic {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { path: path.into(), message: message.into(), line: None, column: None }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "." } else { &self.path };
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{path} (line {l}, column {c}): {}", self.message),
            _ => write!(f, "{path}: {}", self.message),
        }
    }
}

fn default_radius() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// A torsion entry `T(e_i, e_j) ∋ (c0 + ca·a + cb·b) e_k`, indices 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub i: i64,
    pub j: i64,
    pub k: i64,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub ca: f64,
    #[serde(default)]
    pub cb: f64,
}

/// Either fixed `{a, b}` or `{"solve": true}`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametersSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<AxisSpec>,
}

impl GridInput {
    fn axes(&self) -> [Option<AxisSpec>; DIM] {
        [self.theta, self.phi, self.x, self.y]
    }
}

/// The scenario file as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub version: i64,
    pub manifold: String,
    #[serde(default = "default_radius")]
    pub radius: f64,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentSpec>,
    pub parameters: ParametersSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridInput>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Chart point `[θ, φ, x, y]` for pointwise quantities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; DIM]>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Fixed { a: f64, b: f64 },
    Solve,
}

/// A validated scenario, ready to run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub frame: FrameSpec,
    pub torsion: TorsionField<f64>,
    pub mode: Mode,
    pub grid: GridSpec,
    pub point: ChartPoint<f64>,
}

/// Parses JSON text; syntax and schema errors carry a field path and position.
pub fn parse_spec(text: &str) -> Result<ScenarioSpec, Vec<Diagnostic>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        vec![Diagnostic {
            path: if path == "." { String::new() } else { path },
            message: strip_position(&inner.to_string()),
            line: Some(inner.line()),
            column: Some(inner.column()),
        }]
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn check_finite(out: &mut Vec<Diagnostic>, path: &str, v: f64) -> bool {
    if !v.is_finite() {
        out.push(Diagnostic::at(path, "must be a finite number"));
        return false;
    }
    true
}

impl ScenarioSpec {
    /// All validation problems, empty iff the scenario can run.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        self.check().err().unwrap_or_default()
    }

    pub fn check(&self) -> Result<Scenario, Vec<Diagnostic>> {
        let mut out = Vec::new();
        if self.version != SCENARIO_VERSION {
            out.push(Diagnostic::at(
                "version",
                format!("unsupported version {}, expected {SCENARIO_VERSION}", self.version),
            ));
        }
        if self.manifold != "s2xt2" {
            out.push(Diagnostic::at("manifold", format!("unknown manifold \"{}\", expected \"s2xt2\"", self.manifold)));
        }
        if check_finite(&mut out, "radius", self.radius) && self.radius <= 0.0 {
            out.push(Diagnostic::at("radius", "must be positive"));
        }
        if check_finite(&mut out, "tolerance", self.tolerance) && self.tolerance <= 0.0 {
            out.push(Diagnostic::at("tolerance", "must be positive"));
        }

        let torsion = self.check_torsion(&mut out);
        let mode = self.check_parameters(&mut out);
        let grid = self.check_grid(&mut out);
        let point = match self.point {
            None => Some(ChartPoint::reference()),
            Some(c) => match ChartPoint::from_coords(c) {
                Ok(p) => Some(p),
                Err(e) => {
                    out.push(Diagnostic::at("point", e.to_string()));
                    None
                }
            },
        };
        let frame = if self.radius.is_finite() && self.radius > 0.0 { build_s2xt2(self.radius).ok() } else { None };

        match (out.is_empty(), frame, torsion, mode, grid, point) {
            (true, Some(frame), Some(torsion), Some(mode), Some(grid), Some(point)) => Ok(Scenario {
                spec: self.normalized(),
                frame,
                torsion,
                mode,
                grid,
                point,
            }),
            _ => Err(out),
        }
    }

    fn check_torsion(&self, out: &mut Vec<Diagnostic>) -> Option<TorsionField<f64>> {
        if self.family != Family::Custom {
            if !self.components.is_empty() {
                out.push(Diagnostic::at("components", "components are only allowed with family \"custom\""));
                return None;
            }
            return self.family.torsion();
        }
        let before = out.len();
        let mut entries = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (n, c) in self.components.iter().enumerate() {
            let path = format!("components[{n}]");
            let mut ok = true;
            for (name, v) in [("i", c.i), ("j", c.j), ("k", c.k)] {
                if !(1..=DIM as i64).contains(&v) {
                    out.push(Diagnostic::at(format!("{path}.{name}"), format!("index {v} outside 1..=4")));
                    ok = false;
                }
            }
            for (name, v) in [("c0", c.c0), ("ca", c.ca), ("cb", c.cb)] {
                ok &= check_finite(out, &format!("{path}.{name}"), v);
            }
            if c.i == c.j {
                out.push(Diagnostic::at(path.clone(), "torsion component must have i ≠ j"));
                ok = false;
            }
            if !ok {
                continue;
            }
            if !seen.insert((c.i.min(c.j), c.i.max(c.j), c.k)) {
                out.push(Diagnostic::at(
                    path,
                    format!("duplicate torsion component (i, j, k) = ({}, {}, {})", c.i, c.j, c.k),
                ));
                continue;
            }
            let idx = |v: i64| (v - 1) as usize;
            entries.push((idx(c.i), idx(c.j), idx(c.k), ParamCoeff::new(c.c0, c.ca, c.cb)));
        }
        if out.len() > before {
            return None;
        }
        match TorsionField::from_components(Family::Custom.name(), &entries) {
            Ok(t) => Some(t),
            Err(e) => {
                out.push(Diagnostic::at("components", e.to_string()));
                None
            }
        }
    }

    fn check_parameters(&self, out: &mut Vec<Diagnostic>) -> Option<Mode> {
        let p = &self.parameters;
        match (p.a, p.b, p.solve) {
            (None, None, Some(true)) => Some(Mode::Solve),
            (Some(a), Some(b), None | Some(false)) => {
                let ok = check_finite(out, "parameters.a", a) & check_finite(out, "parameters.b", b);
                ok.then_some(Mode::Fixed { a, b })
            }
            (Some(_), _, Some(true)) | (_, Some(_), Some(true)) => {
                out.push(Diagnostic::at("parameters", "give either fixed {a, b} or {\"solve\": true}, not both"));
                None
            }
            (None, _, _) if p.b.is_some() || p.solve != Some(true) => {
                out.push(Diagnostic::at("parameters.a", "missing; give {a, b} or {\"solve\": true}"));
                None
            }
            _ => {
                out.push(Diagnostic::at("parameters.b", "missing; give {a, b} or {\"solve\": true}"));
                None
            }
        }
    }

    fn check_grid(&self, out: &mut Vec<Diagnostic>) -> Option<GridSpec> {
        let mut grid = GridSpec::default();
        let Some(input) = &self.grid else {
            return Some(grid);
        };
        let before = out.len();
        for (n, axis) in input.axes().into_iter().enumerate() {
            let Some(axis) = axis else { continue };
            let path = format!("grid.{}", AXIS_NAMES[n]);
            if axis.count < 1 {
                out.push(Diagnostic::at(format!("{path}.count"), format!("must be at least 1, got {}", axis.count)));
            }
            let finite = check_finite(out, &format!("{path}.min"), axis.min) & check_finite(out, &format!("{path}.max"), axis.max);
            if finite && axis.min > axis.max {
                out.push(Diagnostic::at(path.clone(), "min must not exceed max"));
            }
            if finite && n == 0 && !(axis.min > 0.0 && axis.max < std::f64::consts::PI) {
                out.push(Diagnostic::at(path.clone(), "theta samples must lie strictly inside (0, π)"));
            }
            let count = axis.count.max(0) as usize;
            grid.axes[n] = if n == 0 {
                AxisRange::closed(axis.min, axis.max, count)
            } else {
                AxisRange::periodic(axis.min, axis.max, count)
            };
        }
        (out.len() == before).then_some(grid)
    }

    /// Defaults made explicit, so the echo re-runs identically.
    pub fn normalized(&self) -> ScenarioSpec {
        let mut spec = self.clone();
        let defaults = GridSpec::default();
        let given = self.grid.unwrap_or_default().axes();
        let axis = |n: usize| {
            Some(given[n].unwrap_or(AxisSpec {
                min: defaults.axes[n].min,
                max: defaults.axes[n].max,
                count: defaults.axes[n].count as i64,
            }))
        };
        spec.grid = Some(GridInput { theta: axis(0), phi: axis(1), x: axis(2), y: axis(3) });
        if spec.parameters.solve == Some(false) {
            spec.parameters.solve = None;
        }
        spec
    }
}

/// Parses and validates scenario text.
pub fn load_str(text: &str) -> Result<Scenario, Vec<Diagnostic>> {
    parse_spec(text)?.check()
}

/// Reads, parses and validates a scenario file.
pub fn load(path: &Path) -> Result<Scenario, Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![Diagnostic::at("", format!("cannot read {}: {e}", path.display()))])?;
    load_str(&text)
}

/// Diagnostics for a scenario file; empty iff it would run.
pub fn validate(path: &Path) -> Vec<Diagnostic> {
    load(path).err().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HARMONIC: &str = r#"{"version": 1, "manifold": "s2xt2", "family": "harmonic", "parameters": {"solve": true}}"#;

    fn messages(text: &str) -> Vec<Diagnostic> {
        load_str(text).err().unwrap_or_default()
    }

    #[test]
    fn well_formed_harmonic_scenario() {
        let s = load_str(HARMONIC).unwrap();
        assert_eq!(s.mode, Mode::Solve);
        assert_eq!(s.spec.radius, 1.0);
        assert_eq!(s.spec.tolerance, DEFAULT_TOLERANCE);
        assert_eq!(s.grid, GridSpec::default());
        assert!(s.torsion.is_totally_antisymmetric());
    }

    #[test]
    fn coincident_indices() {
        let d = messages(
            r#"{"version": 1, "manifold": "s2xt2", "family": "custom",
                "components": [{"i": 2, "j": 2, "k": 1, "ca": 1}], "parameters": {"a": 1, "b": 0}}"#,
        );
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "components[0]");
        assert_eq!(d[0].message, "torsion component must have i ≠ j");
    }

    #[test]
    fn duplicate_keys_including_swapped_pairs() {
        let d = messages(
            r#"{"version": 1, "manifold": "s2xt2", "family": "custom",
                "components": [{"i": 1, "j": 2, "k": 3, "ca": 1}, {"i": 2, "j": 1, "k": 3, "cb": 1}],
                "parameters": {"a": 1, "b": 0}}"#,
        );
        assert_eq!(d[0].path, "components[1]");
        assert!(d[0].message.starts_with("duplicate"));
    }

    #[test]
    fn negative_grid_count() {
        let d = messages(
            r#"{"version": 1, "manifold": "s2xt2", "family": "lc", "parameters": {"a": 0, "b": 0},
                "grid": {"phi": {"min": 0, "max": 1, "count": -2}}}"#,
        );
        assert_eq!(d[0].path, "grid.phi.count");
    }

    #[test]
    fn unknown_fields_are_located() {
        let d = messages(
            r#"{"version": 1, "manifold": "s2xt2", "family": "lc",
                "parameters": {"a": 0, "b": 0, "c": 1}}"#,
        );
        assert_eq!(d[0].path, "parameters.c");
        assert!(d[0].message.contains("unknown field"));
        assert_eq!(d[0].line, Some(2));
    }

    #[test]
    fn bad_values() {
        let d = messages(r#"{"version": 2, "manifold": "s3", "radius": -1, "family": "lc", "parameters": {"a": 0}}"#);
        let paths: Vec<_> = d.iter().map(|d| d.path.as_str()).collect();
        assert_eq!(paths, ["version", "manifold", "radius", "parameters.b"]);
        let d = messages(r#"{"version": 1, "manifold": "s2xt2", "family": "lc", "parameters": {"a": 0, "b": 0, "solve": true}}"#);
        assert_eq!(d[0].path, "parameters");
        let d = messages(r#"{"version": 1, "manifold": "s2xt2", "family": "paper", "parameters": {"solve": true}, "point": [0, 1, 1, 1]}"#);
        assert_eq!(d[0].path, "point");
        let d = messages(r#"{"version": 1, "manifold": "s2xt2", "family": "paper", "parameters": {"solve": true},
            "components": [{"i": 1, "j": 2, "k": 3}]}"#);
        assert_eq!(d[0].path, "components");
    }

    #[test]
    fn normalized_echo_round_trips() {
        let s = load_str(HARMONIC).unwrap();
        let text = serde_json::to_string(&s.spec).unwrap();
        let again = load_str(&text).unwrap();
        assert_eq!(again.spec, s.spec);
        assert_eq!(again.grid, s.grid);
    }

    #[test]
    fn unreadable_file() {
        let d = validate(Path::new("/nonexistent/scenario.json"));
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("cannot read"));
    }
}
