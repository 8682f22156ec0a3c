//! Published closed forms for the built-in families, laid out along the
//! derivation chain (frame → torsion → connection → curvature → sectional →
//! Ricci) and compared value by value with the engine.
//!
//! The first row that disagrees localises where a hand derivation and the
//! first-principles computation part ways.

use serde::Serialize;

use crate::chart::{ChartPoint, DIM};
use crate::connection::{ConnectionCoeffs, Family};
use crate::curvature::riemann;
use crate::einstein::{ParamPoly, RicciPolynomials};
use crate::scalar::Scalar;

/// Parameters used for pointwise rows when the scenario solves for `(a, b)`.
pub const PROBE_PARAMS: (f64, f64) = (0.75, -0.5);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Frame,
    Torsion,
    Connection,
    Curvature,
    Sectional,
    Ricci,
}

/// What the engine evaluates for a row. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Probe {
    /// `c^k_ij`
    Bracket { k: usize, i: usize, j: usize },
    /// `T^k_ij`
    Torsion { k: usize, i: usize, j: usize },
    /// `Γ^k_ij` of the full connection.
    Gamma { k: usize, i: usize, j: usize },
    /// `g(R(e_i, e_j) e_k, e_l)`
    Operator { i: usize, j: usize, k: usize, l: usize },
    Sectional { i: usize, j: usize },
    Ricci { i: usize, j: usize },
}

/// Closed form in `(cot θ, a, b)`.
type Law = fn(f64, f64, f64) -> f64;

#[derive(Clone, Debug)]
pub struct ReferenceValue {
    pub stage: Stage,
    pub quantity: String,
    pub probe: Probe,
    law: Law,
}

impl ReferenceValue {
    pub fn expected(&self, cot: f64, a: f64, b: f64) -> f64 {
        (self.law)(cot, a, b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub stage: Stage,
    pub quantity: String,
    pub expected: f64,
    pub engine: f64,
    pub abs_diff: f64,
    #[serde(rename = "match")]
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolynomialRow {
    pub entry: String,
    pub expected: ParamPoly<f64>,
    pub engine: ParamPoly<f64>,
    pub expected_text: String,
    pub engine_text: String,
    pub max_coeff_diff: f64,
    #[serde(rename = "match")]
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deviation {
    pub stage: Stage,
    pub quantity: String,
    pub expected: String,
    pub engine: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub family: String,
    pub point: [f64; DIM],
    pub params: [f64; 2],
    pub tolerance: f64,
    pub rows: Vec<ComparisonRow>,
    pub polynomial_rows: Vec<PolynomialRow>,
    /// Earliest disagreement along the derivation chain, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_deviation: Option<Deviation>,
    pub matched: usize,
    pub total: usize,
}

fn e(n: usize) -> usize {
    n - 1
}

fn row(stage: Stage, quantity: impl Into<String>, probe: Probe, law: Law) -> ReferenceValue {
    ReferenceValue { stage, quantity: quantity.into(), probe, law }
}

fn torsion(i: usize, j: usize, k: usize, law: Law) -> ReferenceValue {
    row(
        Stage::Torsion,
        format!("T(e{i},e{j}) along e{k}"),
        Probe::Torsion { k: e(k), i: e(i), j: e(j) },
        law,
    )
}

fn nabla(i: usize, j: usize, k: usize, law: Law) -> ReferenceValue {
    row(
        Stage::Connection,
        format!("∇_e{i} e{j} along e{k}"),
        Probe::Gamma { k: e(k), i: e(i), j: e(j) },
        law,
    )
}

fn operator(i: usize, j: usize, k: usize, l: usize, law: Law) -> ReferenceValue {
    row(
        Stage::Curvature,
        format!("g(R(e{i},e{j})e{k}, e{l})"),
        Probe::Operator { i: e(i), j: e(j), k: e(k), l: e(l) },
        law,
    )
}

fn sectional(i: usize, j: usize, law: Law) -> ReferenceValue {
    row(Stage::Sectional, format!("K(e{i},e{j})"), Probe::Sectional { i: e(i), j: e(j) }, law)
}

fn ricci(i: usize, j: usize, law: Law) -> ReferenceValue {
    row(Stage::Ricci, format!("Ric{i}{j}"), Probe::Ricci { i: e(i), j: e(j) }, law)
}

fn zero(_: f64, _: f64, _: f64) -> f64 {
    0.0
}

fn off_diagonal_zeros(except: &[(usize, usize)]) -> Vec<ReferenceValue> {
    let mut out = Vec::new();
    for i in 1..=DIM {
        for j in 1..=DIM {
            if i != j && !except.contains(&(i, j)) {
                out.push(ricci(i, j, zero));
            }
        }
    }
    out
}

/// Claimed values for a built-in family, in derivation order.
pub fn reference_values(family: Family) -> Vec<ReferenceValue> {
    let mut rows = match family {
        Family::Paper => paper_values(),
        Family::Harmonic => harmonic_values(),
        Family::Lc => vec![
            sectional(1, 2, |_, _, _| 1.0),
            ricci(1, 1, |_, _, _| 1.0),
            ricci(2, 2, |_, _, _| 1.0),
            ricci(3, 3, zero),
            ricci(4, 4, zero),
        ],
        Family::Custom => Vec::new(),
    };
    rows.sort_by_key(|r| r.stage);
    rows
}

fn paper_values() -> Vec<ReferenceValue> {
    let mut rows = vec![
        row(
            Stage::Frame,
            "[e1,e2] along e2",
            Probe::Bracket { k: 1, i: 0, j: 1 },
            zero,
        ),
        torsion(1, 3, 4, |_, a, _| a),
        torsion(1, 4, 3, |_, a, _| -a),
        torsion(2, 3, 4, |_, _, b| b),
        torsion(2, 4, 3, |_, _, b| -b),
        torsion(3, 4, 1, |_, a, _| -a),
        torsion(3, 4, 2, |_, _, b| -b),
        nabla(1, 2, 2, |cot, _, _| cot),
        nabla(3, 2, 4, |_, _, b| -b),
        nabla(4, 2, 3, |_, _, b| b),
        operator(1, 3, 2, 3, |_, a, b| a * b),
        operator(1, 3, 2, 4, |cot, _, b| b * cot),
        operator(1, 4, 2, 4, |_, a, b| a * b),
        operator(1, 4, 2, 3, |cot, _, b| -b * cot),
        operator(3, 1, 2, 3, |_, a, b| a * b),
        operator(4, 1, 2, 4, |_, a, b| a * b),
        sectional(1, 2, |_, _, _| 1.0),
        sectional(1, 3, |_, a, _| a * a / 4.0),
        sectional(1, 4, |_, a, _| a * a / 4.0),
        sectional(2, 1, |_, _, _| 1.0),
        sectional(2, 3, |_, _, b| b * b / 4.0),
        sectional(2, 4, |_, _, b| b * b / 4.0),
        sectional(3, 1, |_, a, _| a * a / 4.0),
        sectional(3, 2, |_, _, b| b * b / 4.0),
        sectional(3, 4, |_, a, b| (a * a + b * b) / 4.0),
        sectional(4, 1, |_, a, _| a * a / 4.0),
        sectional(4, 2, |_, _, b| b * b / 4.0),
        sectional(4, 3, |_, a, b| (a * a + b * b) / 4.0),
        ricci(1, 2, |_, a, b| 2.0 * a * b),
        ricci(2, 1, |_, a, b| 2.0 * a * b),
    ];
    rows.extend(off_diagonal_zeros(&[(1, 2), (2, 1)]));
    rows.extend([
        ricci(1, 1, |_, a, _| 1.0 + a * a / 2.0),
        ricci(2, 2, |_, _, b| 1.0 + b * b / 2.0),
        ricci(3, 3, |_, a, b| (a * a + b * b) / 2.0),
        ricci(4, 4, |_, a, b| (a * a + b * b) / 2.0),
    ]);
    rows
}

fn harmonic_values() -> Vec<ReferenceValue> {
    let k12: Law = |_, a, b| 1.0 - a * a - b * b;
    let ka: Law = |_, a, _| -a * a;
    let kb: Law = |_, _, b| -b * b;
    let mut rows = vec![
        torsion(1, 2, 3, |_, a, _| a),
        torsion(1, 2, 4, |_, _, b| b),
        torsion(1, 3, 2, |_, a, _| -a),
        torsion(2, 3, 1, |_, a, _| a),
        torsion(1, 4, 2, |_, _, b| -b),
        torsion(2, 4, 1, |_, _, b| b),
        torsion(3, 4, 1, zero),
        torsion(3, 4, 2, zero),
        nabla(1, 2, 2, |cot, _, _| cot),
        nabla(1, 2, 3, |_, a, _| a),
        nabla(1, 2, 4, |_, _, b| b),
        nabla(3, 2, 1, |_, a, _| -a),
        nabla(4, 2, 1, |_, _, b| -b),
        operator(1, 2, 2, 1, k12),
        operator(1, 3, 2, 1, |cot, a, _| a * cot),
        operator(1, 4, 2, 1, |cot, _, b| b * cot),
        operator(3, 1, 2, 3, zero),
        operator(4, 1, 2, 4, zero),
        sectional(1, 2, k12),
        sectional(1, 3, ka),
        sectional(1, 4, kb),
        sectional(2, 1, k12),
        sectional(2, 3, ka),
        sectional(2, 4, kb),
        sectional(3, 1, ka),
        sectional(3, 2, ka),
        sectional(3, 4, zero),
        sectional(4, 1, kb),
        sectional(4, 2, kb),
        sectional(4, 3, zero),
    ];
    rows.extend(off_diagonal_zeros(&[]));
    rows.extend([
        ricci(1, 1, |_, a, b| 1.0 - 2.0 * a * a - 2.0 * b * b),
        ricci(2, 2, |_, a, b| 1.0 - 2.0 * a * a - 2.0 * b * b),
        ricci(3, 3, |_, a, _| -2.0 * a * a),
        ricci(4, 4, |_, _, b| -2.0 * b * b),
    ]);
    rows
}

/// Claimed Ricci polynomials, `None` for custom families.
pub fn reference_polynomials(family: Family) -> Option<[[ParamPoly<f64>; DIM]; DIM]> {
    let p = ParamPoly::<f64>::from_f64;
    let mut m = [[ParamPoly::<f64>::zero(); DIM]; DIM];
    match family {
        Family::Paper => {
            m[0][0] = p([1.0, 0.0, 0.0, 0.5, 0.0, 0.0]);
            m[1][1] = p([1.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
            m[2][2] = p([0.0, 0.0, 0.0, 0.5, 0.0, 0.5]);
            m[3][3] = m[2][2];
            m[0][1] = p([0.0, 0.0, 0.0, 0.0, 2.0, 0.0]);
            m[1][0] = m[0][1];
        }
        Family::Harmonic => {
            m[0][0] = p([1.0, 0.0, 0.0, -2.0, 0.0, -2.0]);
            m[1][1] = m[0][0];
            m[2][2] = p([0.0, 0.0, 0.0, -2.0, 0.0, 0.0]);
            m[3][3] = p([0.0, 0.0, 0.0, 0.0, 0.0, -2.0]);
        }
        Family::Lc => {
            m[0][0] = ParamPoly::constant(1.0);
            m[1][1] = ParamPoly::constant(1.0);
        }
        Family::Custom => return None,
    }
    Some(m)
}

fn engine_value<S: Scalar>(probe: Probe, conn: &ConnectionCoeffs<S>, p: &ChartPoint<S>) -> f64 {
    let v = match probe {
        Probe::Bracket { k, i, j } => conn.frame().structure_at(p)[k][i][j],
        Probe::Torsion { k, i, j } => conn.torsion_part()[k][i][j],
        Probe::Gamma { k, i, j } => conn.gamma_at(p)[k][i][j],
        Probe::Operator { i, j, k, l } => riemann(conn, p).lowered(i, j, k, l),
        Probe::Sectional { i, j } => riemann(conn, p).sectional(i, j).unwrap_or(S::nan()),
        Probe::Ricci { i, j } => riemann(conn, p).ricci().get(i, j),
    };
    v.to_f64_lossy()
}

/// Pointwise rows for `conn` (whose parameters are used in the closed forms).
pub fn compare_pointwise<S: Scalar>(
    family: Family,
    conn: &ConnectionCoeffs<S>,
    p: &ChartPoint<S>,
    tolerance: f64,
) -> Vec<ComparisonRow> {
    let (a, b) = conn.params();
    let (a, b) = (a.to_f64_lossy(), b.to_f64_lossy());
    let cot = 1.0 / p.theta().to_f64_lossy().tan();
    reference_values(family)
        .into_iter()
        .map(|r| {
            let expected = r.expected(cot, a, b);
            let engine = engine_value(r.probe, conn, p);
            let abs_diff = (expected - engine).abs();
            ComparisonRow {
                stage: r.stage,
                quantity: r.quantity,
                expected,
                engine,
                abs_diff,
                matches: abs_diff < tolerance,
            }
        })
        .collect()
}

/// Coefficient-wise rows for fitted polynomials.
pub fn compare_polynomials(family: Family, polys: &RicciPolynomials<f64>, tolerance: f64) -> Vec<PolynomialRow> {
    let Some(expected) = reference_polynomials(family) else {
        return Vec::new();
    };
    let mut rows = Vec::new();
    for i in 0..DIM {
        for j in 0..DIM {
            let (x, y) = (expected[i][j], *polys.get(i, j));
            let d = x.max_abs_diff(&y);
            rows.push(PolynomialRow {
                entry: format!("Ric{}{}", i + 1, j + 1),
                expected: x,
                engine: y,
                expected_text: x.to_string(),
                engine_text: y.to_string(),
                max_coeff_diff: d,
                matches: d < tolerance,
            });
        }
    }
    rows
}

/// Full comparison: pointwise rows and, when given, polynomial rows.
pub fn compare<S: Scalar>(
    family: Family,
    conn: &ConnectionCoeffs<S>,
    p: &ChartPoint<S>,
    polys: Option<&RicciPolynomials<f64>>,
    tolerance: f64,
) -> Comparison {
    let rows = compare_pointwise(family, conn, p, tolerance);
    let polynomial_rows = polys.map(|m| compare_polynomials(family, m, tolerance)).unwrap_or_default();
    let first_deviation = rows
        .iter()
        .find(|r| !r.matches)
        .map(|r| Deviation {
            stage: r.stage,
            quantity: r.quantity.clone(),
            expected: format!("{}", r.expected),
            engine: format!("{}", r.engine),
        })
        .or_else(|| {
            polynomial_rows.iter().find(|r| !r.matches).map(|r| Deviation {
                stage: Stage::Ricci,
                quantity: r.entry.clone(),
                expected: r.expected_text.clone(),
                engine: r.engine_text.clone(),
            })
        });
    let matched = rows.iter().filter(|r| r.matches).count() + polynomial_rows.iter().filter(|r| r.matches).count();
    let (a, b) = conn.params();
    Comparison {
        family: family.name().to_string(),
        point: p.coords().map(|c| c.to_f64_lossy()),
        params: [a.to_f64_lossy(), b.to_f64_lossy()],
        tolerance,
        total: rows.len() + polynomial_rows.len(),
        rows,
        polynomial_rows,
        first_deviation,
        matched,
    }
}
