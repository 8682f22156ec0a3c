//! The scenario pipeline: frame → connection → curvature → harmonicity →
//! Einstein verdict → comparison, with internal cross-checks and output
//! writers.

use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use thiserror::Error;

use crate::chart::{ChartPoint, DIM};
use crate::connection::{assemble, flat_3form, ConnectionCoeffs, Family};
use crate::curvature::{riemann, riemann_fd_oracle, RicciMatrix, RiemannAtPoint};
use crate::einstein::{
    einstein_residual, fit_quadratic, fit_ricci_polynomials, solve_einstein, EinsteinVerdict, ParamPoly,
    RicciPolynomials, Status,
};
use crate::error::GeometryError;
use crate::exterior::{check_harmonic, HarmonicityReport};
use crate::reference::{compare, Comparison, PROBE_PARAMS};
use crate::scenario::{Mode, Scenario, ScenarioSpec};

/// AD and finite-difference curvature must agree within this bound.
pub const ORACLE_TOLERANCE: f64 = 1e-6;
/// Second fit point for the point-independence diagnostic.
pub const SECOND_POINT: [f64; DIM] = [2.2, 4.0, 0.5, 5.5];
/// Extra points at which Einstein solutions are re-checked against the raw engine.
pub const VERIFY_POINTS: [[f64; DIM]; 2] = [[0.7, 0.3, 1.1, 2.0], [2.2, 4.0, 0.5, 5.5]];

#[derive(Debug, Error)]
pub enum RunError {
    /// An internal consistency check failed; the named invariant did not hold.
    #[error("cross-check failed: {invariant}: {detail}")]
    CrossCheck { invariant: String, detail: String },
}

impl RunError {
    fn check(invariant: &str, detail: impl Into<String>) -> Self {
        RunError::CrossCheck { invariant: invariant.into(), detail: detail.into() }
    }
}

impl From<GeometryError> for RunError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::NonPolynomial { .. } => RunError::check("polynomial fit", e.to_string()),
            other => RunError::check("geometry", other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub timing: bool,
}

/// One off-diagonal entry of a pair table, indices 1-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairValue<V> {
    pub i: usize,
    pub j: usize,
    pub value: V,
}

fn pairs<V: Clone>(table: impl Fn(usize, usize) -> V) -> Vec<PairValue<V>> {
    let mut out = Vec::new();
    for i in 0..DIM {
        for j in 0..DIM {
            if i != j {
                out.push(PairValue { i: i + 1, j: j + 1, value: table(i, j) });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Tables {
    Numeric {
        ricci: RicciMatrix<f64>,
        sectional: Vec<PairValue<f64>>,
        biorthogonal: Vec<PairValue<f64>>,
    },
    Polynomial {
        ricci: [[ParamPoly<f64>; DIM]; DIM],
        ricci_text: [[String; DIM]; DIM],
        sectional: Vec<PairValue<ParamPoly<f64>>>,
        biorthogonal: Vec<PairValue<ParamPoly<f64>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicityPiece {
    /// `"T♭(a, b)"` in fixed mode; `"constant"`, `"a"`, `"b"` affine pieces when solving.
    pub piece: String,
    pub form: String,
    pub report: HarmonicityReport<f64>,
    pub harmonic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Harmonicity {
    TotallyAntisymmetric { pieces: Vec<HarmonicityPiece> },
    NotApplicable { note: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pointwise {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub residual: f64,
    pub einstein: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub verdict: EinsteinVerdict<f64>,
    /// Present in fixed mode: `(λ*, residual)` at the given parameters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointwise: Option<Pointwise>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointDependence {
    pub points: [[f64; DIM]; 2],
    pub max_coeff_diff: f64,
    pub point_independent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub invariant: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub total_ms: f64,
    pub stages_ms: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioSpec,
    pub mode: &'static str,
    pub point: [f64; DIM],
    /// Parameters used for pointwise tables.
    pub params: [f64; 2],
    pub tables: Tables,
    pub harmonicity: Harmonicity,
    pub verdict: Verdict,
    pub point_dependence: PointDependence,
    pub comparison: Comparison,
    pub cross_checks: Vec<CrossCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

struct Clock {
    on: bool,
    start: Instant,
    last: Instant,
    stages: Vec<(String, f64)>,
}

impl Clock {
    fn new(on: bool) -> Self {
        let now = Instant::now();
        Clock { on, start: now, last: now, stages: Vec::new() }
    }

    fn lap(&mut self, name: &str) {
        if self.on {
            let now = Instant::now();
            self.stages.push((name.to_string(), (now - self.last).as_secs_f64() * 1e3));
            self.last = now;
        }
    }

    fn finish(self) -> Option<Timing> {
        self.on.then(|| Timing { total_ms: self.start.elapsed().as_secs_f64() * 1e3, stages_ms: self.stages })
    }
}

fn sectional_polys(scenario: &Scenario, p: &ChartPoint<f64>, bi: bool) -> Result<RicciPolynomials<f64>, RunError> {
    let what = if bi { "biorthogonal curvature" } else { "sectional curvature" };
    Ok(fit_quadratic(what, |a, b| {
        let r = riemann(&assemble(&scenario.frame, &scenario.torsion, a, b), p);
        let entries = if bi { r.biorthogonal_table() } else { r.sectional_table() };
        Ok(RicciMatrix { entries })
    })?)
}

fn harmonicity(scenario: &Scenario, params: Option<(f64, f64)>) -> Result<Harmonicity, RunError> {
    if !scenario.torsion.is_totally_antisymmetric() {
        return Ok(Harmonicity::NotApplicable {
            note: "torsion is not totally antisymmetric: T♭ is not a 3-form, harmonicity is undefined".into(),
        });
    }
    let form_at = |a: f64, b: f64| flat_3form(&scenario.torsion, a, b).form.expect("antisymmetric torsion");
    let pieces = match params {
        Some((a, b)) => vec![("T♭(a, b)".to_string(), form_at(a, b))],
        None => {
            let c = form_at(0.0, 0.0);
            let fa = form_at(1.0, 0.0).sub(&c)?;
            let fb = form_at(0.0, 1.0).sub(&c)?;
            vec![("constant".to_string(), c), ("a".to_string(), fa), ("b".to_string(), fb)]
        }
    };
    let tol = scenario.spec.tolerance;
    let mut out = Vec::new();
    for (piece, form) in pieces {
        let report = check_harmonic::<f64>(&form, &scenario.frame, &scenario.grid)?;
        out.push(HarmonicityPiece { harmonic: report.is_harmonic(tol), piece, form: form_text(&form), report });
    }
    Ok(Harmonicity::TotallyAntisymmetric { pieces: out })
}

fn form_text(form: &crate::exterior::FrameForm) -> String {
    let terms: Vec<String> = form
        .terms()
        .map(|(idx, coeff)| {
            let idx: String = idx.iter().map(|&i| char::from(b'1' + i as u8)).collect();
            format!("({coeff}) e^{idx}")
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

// Absent options are skipped rather than written as null, so a null here can
// only come from a NaN or an infinity.
fn all_finite(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Null => false,
        serde_json::Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
        serde_json::Value::Array(a) => a.iter().all(all_finite),
        serde_json::Value::Object(o) => o.iter().all(|(k, v)| k == "timing" || all_finite(v)),
        _ => true,
    }
}

/// Runs a validated scenario.
pub fn run(scenario: &Scenario, opts: RunOptions) -> Result<RunReport, RunError> {
    let mut clock = Clock::new(opts.timing);
    let p = scenario.point;
    let tol = scenario.spec.tolerance;
    let (a, b) = match scenario.mode {
        Mode::Fixed { a, b } => (a, b),
        Mode::Solve => PROBE_PARAMS,
    };
    let conn: ConnectionCoeffs<f64> = assemble(&scenario.frame, &scenario.torsion, a, b);
    let curvature: RiemannAtPoint<f64> = riemann(&conn, &p);
    clock.lap("curvature");

    let mut checks = Vec::new();
    let oracle = riemann_fd_oracle(&conn, &p)
        .map_err(|e| RunError::check("riemann AD vs finite differences", e.to_string()))?;
    let gap = curvature.max_abs_diff(&oracle);
    checks.push(CrossCheck {
        invariant: "riemann AD vs finite differences".into(),
        value: gap,
        bound: ORACLE_TOLERANCE,
        passed: gap < ORACLE_TOLERANCE,
    });

    let polys = fit_ricci_polynomials(&scenario.torsion, &scenario.frame, &p)?;
    checks.push(CrossCheck {
        invariant: "polynomial fit held-out residual".into(),
        value: 0.0,
        bound: crate::einstein::FIT_TOLERANCE,
        passed: true,
    });
    let second = ChartPoint::from_coords(SECOND_POINT)?;
    let polys2 = fit_ricci_polynomials(&scenario.torsion, &scenario.frame, &second)?;
    let drift = polys.max_coeff_diff(&polys2);
    let point_dependence = PointDependence {
        points: [p.coords(), SECOND_POINT],
        max_coeff_diff: drift,
        point_independent: drift < tol,
    };
    clock.lap("fit");

    let tables = match scenario.mode {
        Mode::Fixed { .. } => Tables::Numeric {
            ricci: curvature.ricci(),
            sectional: pairs(|i, j| curvature.sectional(i, j).unwrap()),
            biorthogonal: pairs(|i, j| curvature.biorthogonal(i, j).unwrap()),
        },
        Mode::Solve => {
            let sec = sectional_polys(scenario, &p, false)?;
            let bi = sectional_polys(scenario, &p, true)?;
            Tables::Polynomial {
                ricci: polys.entries,
                ricci_text: std::array::from_fn(|i| std::array::from_fn(|j| polys.get(i, j).to_string())),
                sectional: pairs(|i, j| *sec.get(i, j)),
                biorthogonal: pairs(|i, j| *bi.get(i, j)),
            }
        }
    };
    clock.lap("tables");

    let harmonicity = harmonicity(
        scenario,
        match scenario.mode {
            Mode::Fixed { a, b } => Some((a, b)),
            Mode::Solve => None,
        },
    )?;
    clock.lap("harmonicity");

    let verdict = solve_einstein(&polys);
    let mut worst = 0.0f64;
    for s in &verdict.solutions {
        for q in std::iter::once(p.coords()).chain(VERIFY_POINTS) {
            let q = ChartPoint::from_coords(q)?;
            let ric = crate::curvature::ricci_trace(&assemble(&scenario.frame, &scenario.torsion, s.a, s.b), &q);
            for i in 0..DIM {
                for j in 0..DIM {
                    let target = if i == j { s.lambda } else { 0.0 };
                    worst = worst.max((ric.get(i, j) - target).abs());
                }
            }
        }
    }
    checks.push(CrossCheck {
        invariant: "Einstein solutions hold in the raw engine".into(),
        value: worst,
        bound: crate::einstein::SOLUTION_TOLERANCE,
        passed: worst < crate::einstein::SOLUTION_TOLERANCE,
    });
    let pointwise = match scenario.mode {
        Mode::Fixed { a, b } => {
            let (lambda, residual) = einstein_residual(&conn, &p);
            Some(Pointwise { a, b, lambda, residual, einstein: residual < tol })
        }
        Mode::Solve => None,
    };
    clock.lap("einstein");

    let family = scenario.spec.family;
    let comparison = compare(
        family,
        &conn,
        &p,
        (scenario.mode == Mode::Solve || family == Family::Lc).then_some(&polys),
        tol,
    );
    clock.lap("comparison");

    let mut report = RunReport {
        scenario: scenario.spec.clone(),
        mode: match scenario.mode {
            Mode::Fixed { .. } => "fixed",
            Mode::Solve => "solve",
        },
        point: p.coords(),
        params: [a, b],
        tables,
        harmonicity,
        verdict: Verdict { verdict, pointwise },
        point_dependence,
        comparison,
        cross_checks: Vec::new(),
        timing: None,
    };
    let finite = serde_json::to_value(&report).map(|v| all_finite(&v)).unwrap_or(false);
    checks.push(CrossCheck {
        invariant: "all report values finite".into(),
        value: if finite { 0.0 } else { 1.0 },
        bound: 0.5,
        passed: finite,
    });
    report.cross_checks = checks;
    if let Some(failed) = report.cross_checks.iter().find(|c| !c.passed) {
        return Err(RunError::check(
            &failed.invariant,
            format!("value {:e} exceeds bound {:e}", failed.value, failed.bound),
        ));
    }
    report.timing = clock.finish();
    Ok(report)
}

/// Pretty JSON with every float written to 17 significant digits.
struct Precise(PrettyFormatter<'static>);

impl Formatter for Precise {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialises any value as pretty JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialisation");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).chain([header[c].chars().count()]).max().unwrap())
        .collect();
    let line = |cells: Vec<String>| {
        let padded: Vec<String> =
            cells.iter().zip(&widths).map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
        padded.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(header.iter().map(|h| h.to_string()).collect()));
    let _ = writeln!(out, "{}", line(widths.iter().map(|w| "-".repeat(*w)).collect()));
    for r in rows {
        let _ = writeln!(out, "{}", line(r.clone()));
    }
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

/// Human-readable summary with aligned tables.
pub fn render_text(r: &RunReport) -> String {
    let mut out = String::new();
    let s = &r.scenario;
    let _ = writeln!(
        out,
        "family {}  mode {}  point (θ, φ, x, y) = ({}, {}, {}, {})",
        s.family.name(),
        r.mode,
        r.point[0],
        r.point[1],
        r.point[2],
        r.point[3]
    );
    let _ = writeln!(out);
    match &r.tables {
        Tables::Numeric { ricci, .. } => {
            let _ = writeln!(out, "Ricci at (a, b) = ({}, {})", r.params[0], r.params[1]);
            let rows: Vec<Vec<String>> = (0..DIM)
                .map(|i| std::iter::once(format!("e{}", i + 1)).chain((0..DIM).map(|j| num(ricci.get(i, j)))).collect())
                .collect();
            table(&mut out, &["", "e1", "e2", "e3", "e4"], &rows);
        }
        Tables::Polynomial { ricci_text, .. } => {
            let _ = writeln!(out, "Ricci polynomials in (a, b)");
            let rows: Vec<Vec<String>> = (0..DIM)
                .map(|i| std::iter::once(format!("e{}", i + 1)).chain(ricci_text[i].iter().cloned()).collect())
                .collect();
            table(&mut out, &["", "e1", "e2", "e3", "e4"], &rows);
        }
    }
    let _ = writeln!(out);
    let v = &r.verdict.verdict;
    let _ = writeln!(
        out,
        "Einstein verdict: {}",
        match v.status {
            Status::Solvable => "solvable",
            Status::Infeasible => "infeasible",
        }
    );
    for sol in &v.solutions {
        let _ = writeln!(out, "  a = {:.10}  b = {:.10}  λ = {:.10}  residual {:.2e}", sol.a, sol.b, sol.lambda, sol.residual);
    }
    if let Some(c) = &v.certificate {
        if let Some(bind) = &c.binding {
            let _ = writeln!(out, "  binding constraint {} = {} = 0 splits into {:?}", bind.entry, bind.polynomial, bind.branches.iter().map(|b| b.to_string()).collect::<Vec<_>>());
        }
        for k in &c.contradictions {
            let branch = k.branch.map(|b| format!("[{b}] ")).unwrap_or_default();
            let at = k.at.map(|[a, b]| format!("at (a, b) = ({a:.6}, {b:.6}) ")).unwrap_or_default();
            let val = |x: &Option<f64>| x.map(|v| format!(" ({v:.6})")).unwrap_or_default();
            let _ = writeln!(
                out,
                "  {branch}{at}{}{} vs {}{}",
                k.first.equation,
                val(&k.first.value),
                k.second.equation,
                val(&k.second.value)
            );
        }
    }
    if let Some(pw) = &r.verdict.pointwise {
        let _ = writeln!(out, "  pointwise: λ* = {:.10}, max |Ric − λ*g| = {:.3e}", pw.lambda, pw.residual);
    }
    let _ = writeln!(out);
    match &r.harmonicity {
        Harmonicity::TotallyAntisymmetric { pieces } => {
            let rows: Vec<Vec<String>> = pieces
                .iter()
                .map(|h| vec![h.piece.clone(), format!("{:.3e}", h.report.max_d), format!("{:.3e}", h.report.max_delta), h.harmonic.to_string()])
                .collect();
            let _ = writeln!(out, "Harmonicity of T♭ over {} grid points", pieces.first().map_or(0, |h| h.report.points));
            table(&mut out, &["piece", "sup|dω|", "sup|δω|", "harmonic"], &rows);
        }
        Harmonicity::NotApplicable { note } => {
            let _ = writeln!(out, "Harmonicity: {note}");
        }
    }
    let _ = writeln!(out);
    let c = &r.comparison;
    if c.total > 0 {
        let _ = writeln!(out, "Comparison with published values at (a, b) = ({}, {}): {}/{} match", c.params[0], c.params[1], c.matched, c.total);
        let rows: Vec<Vec<String>> = c
            .rows
            .iter()
            .map(|row| {
                vec![
                    format!("{:?}", row.stage).to_lowercase(),
                    row.quantity.clone(),
                    num(row.expected),
                    num(row.engine),
                    format!("{:.2e}", row.abs_diff),
                    if row.matches { "yes" } else { "NO" }.into(),
                ]
            })
            .collect();
        table(&mut out, &["stage", "quantity", "published", "engine", "|diff|", "match"], &rows);
        if !c.polynomial_rows.is_empty() {
            let _ = writeln!(out);
            let rows: Vec<Vec<String>> = c
                .polynomial_rows
                .iter()
                .map(|row| vec![row.entry.clone(), row.expected_text.clone(), row.engine_text.clone(), if row.matches { "yes" } else { "NO" }.into()])
                .collect();
            table(&mut out, &["entry", "published", "engine", "match"], &rows);
        }
        if let Some(d) = &c.first_deviation {
            let _ = writeln!(out, "first deviation: {} ({:?}): published {}, engine {}", d.quantity, d.stage, d.expected, d.engine);
        }
    }
    out
}
