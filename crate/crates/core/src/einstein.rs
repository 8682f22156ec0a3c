//! Quadratic parameter laws of Ricci entries and the Einstein condition `Ric = λg`.
//!
//! Every entry of the Ricci matrix of `∇^LC + T(a, b)` with `T` affine in
//! `(a, b)` is a polynomial of total degree at most two. The fit recovers its
//! six coefficients from exact interpolation; the solver eliminates `λ`
//! through diagonal differences and either returns every real solution in the
//! search box or a certificate of infeasibility.

use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::chart::{ChartPoint, FrameSpec, DIM};
use crate::connection::{assemble, ConnectionCoeffs, TorsionField};
use crate::curvature::{ricci_trace, RicciMatrix};
use crate::error::{GeometryError, Result};
use crate::scalar::{Coefficient, Scalar};

/// Held-out samples must be reproduced below this bound.
pub const FIT_TOLERANCE: f64 = 1e-9;
/// Fitted coefficients below this magnitude are snapped to zero.
pub const SNAP: f64 = 1e-10;
/// Reported solutions satisfy `max |Ric − λI| <` this bound.
pub const SOLUTION_TOLERANCE: f64 = 1e-9;
pub const SEARCH_HALF_WIDTH: f64 = 3.0;
pub const SEARCH_STEP: f64 = 0.05;
pub const DEDUP_RADIUS: f64 = 1e-6;

/// Monomial order of [`ParamPoly`] coefficients.
pub const MONOMIALS: [&str; 6] = ["1", "a", "b", "a^2", "ab", "b^2"];

const INTERPOLATION_NODES: [(f64, f64); 6] =
    [(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0)];
const HELD_OUT_NODES: [(f64, f64); 3] = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];

/// `c[0] + c[1]a + c[2]b + c[3]a² + c[4]ab + c[5]b²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamPoly<S> {
    pub coeffs: [S; 6],
}

impl<S: Scalar> ParamPoly<S> {
    pub fn new(coeffs: [S; 6]) -> Self {
        ParamPoly { coeffs }
    }

    pub fn zero() -> Self {
        Self::new([S::zero(); 6])
    }

    pub fn constant(c: S) -> Self {
        let mut p = Self::zero();
        p.coeffs[0] = c;
        p
    }

    pub fn from_f64(coeffs: [f64; 6]) -> Self {
        Self::new(coeffs.map(S::lit))
    }

    /// Coefficient by monomial name (`"1"`, `"a"`, `"b"`, `"a^2"`, `"ab"`, `"b^2"`).
    pub fn coefficient(&self, monomial: &str) -> Option<S> {
        MONOMIALS.iter().position(|m| *m == monomial).map(|i| self.coeffs[i])
    }

    pub fn eval(&self, a: S, b: S) -> S {
        let c = &self.coeffs;
        c[0] + c[1] * a + c[2] * b + c[3] * a * a + c[4] * a * b + c[5] * b * b
    }

    /// `(∂/∂a, ∂/∂b)` at `(a, b)`.
    pub fn gradient(&self, a: S, b: S) -> (S, S) {
        let c = &self.coeffs;
        let two = S::lit(2.0);
        (c[1] + two * c[3] * a + c[4] * b, c[2] + c[4] * a + two * c[5] * b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(std::array::from_fn(|i| self.coeffs[i] - other.coeffs[i]))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.abs() < S::lit(SNAP))
    }

    /// Constant value when every non-constant coefficient vanishes.
    pub fn as_constant(&self) -> Option<S> {
        self.coeffs[1..].iter().all(|c| c.abs() < S::lit(SNAP)).then_some(self.coeffs[0])
    }

    /// Index of the single non-constant monomial, if the polynomial is one.
    pub fn pure_monomial(&self) -> Option<usize> {
        let live: Vec<usize> = (0..6).filter(|&i| self.coeffs[i].abs() >= S::lit(SNAP)).collect();
        match live.as_slice() {
            [i] if *i > 0 => Some(*i),
            _ => None,
        }
    }

    /// Invariant under `a → −a`.
    pub fn is_even_in_a(&self) -> bool {
        self.coeffs[1].abs() < S::lit(SNAP) && self.coeffs[4].abs() < S::lit(SNAP)
    }

    /// Invariant under `b → −b`.
    pub fn is_even_in_b(&self) -> bool {
        self.coeffs[2].abs() < S::lit(SNAP) && self.coeffs[4].abs() < S::lit(SNAP)
    }

    /// Restriction to a coordinate line as `[c0, c1, c2]` in the free parameter.
    pub fn restrict(&self, branch: Branch) -> [S; 3] {
        let c = &self.coeffs;
        match branch {
            Branch::AZero => [c[0], c[2], c[5]],
            Branch::BZero => [c[0], c[1], c[3]],
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        (0..6).fold(S::zero(), |acc, i| acc.max((self.coeffs[i] - other.coeffs[i]).abs()))
    }

    fn snapped(mut self) -> Self {
        for c in self.coeffs.iter_mut() {
            if c.abs() < S::lit(SNAP) {
                *c = S::zero();
            }
        }
        self
    }
}

impl<S: Scalar> fmt::Display for ParamPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (c, m) in self.coeffs.iter().zip(MONOMIALS) {
            if *c == S::zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if *c < S::zero() { "-" } else { "+" };
            if out.is_empty() {
                if sign == "-" {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            if m == "1" {
                out.push_str(&format!("{mag}"));
            } else if mag == S::one() {
                out.push_str(m);
            } else {
                out.push_str(&format!("{mag}{m}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

impl<S: Scalar + Serialize> Serialize for ParamPoly<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut map = serializer.serialize_map(Some(6))?;
        for (m, c) in MONOMIALS.iter().zip(self.coeffs.iter()) {
            map.serialize_entry(m, c)?;
        }
        map.end()
    }
}

/// The 4×4 matrix of fitted Ricci polynomials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciPolynomials<S: Scalar + Serialize> {
    pub entries: [[ParamPoly<S>; DIM]; DIM],
}

impl<S: Scalar + Serialize> RicciPolynomials<S> {
    pub fn get(&self, i: usize, j: usize) -> &ParamPoly<S> {
        &self.entries[i][j]
    }

    pub fn eval(&self, a: S, b: S) -> RicciMatrix<S> {
        RicciMatrix {
            entries: std::array::from_fn(|i| std::array::from_fn(|j| self.entries[i][j].eval(a, b))),
        }
    }

    /// Largest coefficient difference over all entries.
    pub fn max_coeff_diff(&self, other: &Self) -> S {
        let mut worst = S::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                worst = worst.max(self.entries[i][j].max_abs_diff(&other.entries[i][j]));
            }
        }
        worst
    }

    pub fn is_even_in_a(&self) -> bool {
        self.entries.iter().flatten().all(ParamPoly::is_even_in_a)
    }

    pub fn is_even_in_b(&self) -> bool {
        self.entries.iter().flatten().all(ParamPoly::is_even_in_b)
    }

    fn equations(&self) -> Vec<Equation<S>> {
        let mut eqs = Vec::new();
        for i in 0..DIM {
            for j in 0..DIM {
                if i != j {
                    eqs.push(Equation { kind: EquationKind::OffDiagonal(i, j), poly: self.entries[i][j] });
                }
            }
        }
        for i in 1..DIM {
            eqs.push(Equation {
                kind: EquationKind::DiagonalGap(i),
                poly: self.entries[i][i].sub(&self.entries[0][0]),
            });
        }
        eqs
    }
}

/// Fits a quadratic law to every entry of `sample(a, b)`.
///
/// Six nodes determine the coefficients exactly; three more are held out and
/// must be reproduced within [`FIT_TOLERANCE`].
pub fn fit_quadratic<S, F>(what: &str, mut sample: F) -> Result<RicciPolynomials<S>>
where
    S: Scalar + Serialize,
    F: FnMut(S, S) -> Result<RicciMatrix<S>>,
{
    let mut values = Vec::with_capacity(INTERPOLATION_NODES.len());
    for (a, b) in INTERPOLATION_NODES {
        values.push(sample(S::lit(a), S::lit(b))?);
    }
    let half = S::lit(0.5);
    let entries: [[ParamPoly<S>; DIM]; DIM] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let [f00, fp0, fm0, f0p, f0m, fpp] = std::array::from_fn(|n| values[n].entries[i][j]);
            let ca = (fp0 - fm0) * half;
            let caa = (fp0 + fm0) * half - f00;
            let cb = (f0p - f0m) * half;
            let cbb = (f0p + f0m) * half - f00;
            let cab = fpp - f00 - ca - cb - caa - cbb;
            ParamPoly::new([f00, ca, cb, caa, cab, cbb])
        })
    });
    for (a, b) in HELD_OUT_NODES {
        let (sa, sb) = (S::lit(a), S::lit(b));
        let actual = sample(sa, sb)?;
        for i in 0..DIM {
            for j in 0..DIM {
                let residual = (entries[i][j].eval(sa, sb) - actual.entries[i][j]).abs();
                // Negated so that NaN counts as a failure.
                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                if !(residual < S::lit(FIT_TOLERANCE)) {
                    return Err(GeometryError::NonPolynomial {
                        what: format!("{what}, Ric{}{}", i + 1, j + 1),
                        residual: residual.to_f64_lossy(),
                        a,
                        b,
                    });
                }
            }
        }
    }
    Ok(RicciPolynomials { entries: entries.map(|row| row.map(ParamPoly::snapped)) })
}

/// Ricci entries of `∇^LC + family(a, b)` at `p` as polynomials in `(a, b)`.
pub fn fit_ricci_polynomials<C, S>(
    family: &TorsionField<C>,
    frame: &FrameSpec,
    p: &ChartPoint<S>,
) -> Result<RicciPolynomials<S>>
where
    C: Coefficient,
    S: Scalar + Serialize,
{
    fit_quadratic(family.label(), |a, b| Ok(ricci_trace(&assemble(frame, family, a, b), p)))
}

/// `(λ*, max |Ric − λ*I|)` with `λ* = tr(Ric)/4`.
pub fn einstein_residual<S: Scalar>(conn: &ConnectionCoeffs<S>, p: &ChartPoint<S>) -> (S, S) {
    matrix_residual(&ricci_trace(conn, p))
}

fn matrix_residual<S: Scalar>(ric: &RicciMatrix<S>) -> (S, S) {
    let lambda = ric.trace() / S::lit(DIM as f64);
    let mut worst = S::zero();
    for i in 0..DIM {
        for j in 0..DIM {
            let target = if i == j { lambda } else { S::zero() };
            worst = worst.max((ric.entries[i][j] - target).abs());
        }
    }
    (lambda, worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Solvable,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EinsteinSolution<S> {
    pub a: S,
    pub b: S,
    pub lambda: S,
    /// `max |Ric(a, b) − λI|` from the fitted polynomials.
    pub residual: S,
}

/// Coordinate line on which a pure-monomial off-diagonal constraint vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "a = 0")]
    AZero,
    #[serde(rename = "b = 0")]
    BZero,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::AZero => "a = 0",
            Branch::BZero => "b = 0",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContradictionKind {
    /// Two diagonal entries demand different values of `λ`.
    LambdaClash,
    /// An off-diagonal entry that must vanish does not.
    OffDiagonal,
    /// A univariate constraint has no real root.
    NoRealRoot,
    /// The grid search found no zero and no algebraic split applies.
    ResidualFloor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint<S> {
    pub equation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<S>,
}

/// A pair of constraints that cannot hold together.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contradiction<S> {
    pub kind: ContradictionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<[S; 2]>,
    pub first: Constraint<S>,
    pub second: Constraint<S>,
}

/// The off-diagonal constraint that splits the search into coordinate lines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Binding<S: Scalar + Serialize> {
    pub row: usize,
    pub col: usize,
    pub entry: String,
    pub poly: ParamPoly<S>,
    pub polynomial: String,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate<S: Scalar + Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binding: Option<Binding<S>>,
    pub contradictions: Vec<Contradiction<S>>,
    /// Smallest squared residual met by the grid search, and where.
    pub min_residual: S,
    pub min_at: [S; 2],
}

impl<S: Scalar + Serialize> Certificate<S> {
    /// Contradictions found on one branch.
    pub fn on_branch(&self, branch: Branch) -> impl Iterator<Item = &Contradiction<S>> {
        self.contradictions.iter().filter(move |c| c.branch == Some(branch))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EinsteinVerdict<S: Scalar + Serialize> {
    pub status: Status,
    pub solutions: Vec<EinsteinSolution<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate<S>>,
}

#[derive(Clone, Copy, Debug)]
enum EquationKind {
    OffDiagonal(usize, usize),
    DiagonalGap(usize),
}

#[derive(Clone, Copy, Debug)]
struct Equation<S> {
    kind: EquationKind,
    poly: ParamPoly<S>,
}

fn entry(i: usize, j: usize) -> String {
    format!("Ric{}{}", i + 1, j + 1)
}

fn sum_of_squares<S: Scalar>(eqs: &[Equation<S>], a: S, b: S) -> S {
    eqs.iter().fold(S::zero(), |acc, e| {
        let v = e.poly.eval(a, b);
        acc + v * v
    })
}

/// Levenberg–Marquardt on the residual vector of all equations.
fn polish<S: Scalar>(eqs: &[Equation<S>], mut a: S, mut b: S) -> (S, S) {
    let mut mu = S::lit(1e-3);
    let mut cost = sum_of_squares(eqs, a, b);
    for _ in 0..200 {
        if cost < S::lit(1e-30) {
            break;
        }
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (S::zero(), S::zero(), S::zero(), S::zero(), S::zero());
        for e in eqs {
            let r = e.poly.eval(a, b);
            let (da, db) = e.poly.gradient(a, b);
            jaa = jaa + da * da;
            jab = jab + da * db;
            jbb = jbb + db * db;
            ga = ga + da * r;
            gb = gb + db * r;
        }
        if ga.abs() + gb.abs() < S::lit(1e-300) {
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let (m00, m11) = (jaa + mu * (S::one() + jaa), jbb + mu * (S::one() + jbb));
            let det = m00 * m11 - jab * jab;
            if det == S::zero() || !det.is_finite() {
                mu = mu * S::lit(10.0);
                continue;
            }
            let sa = -(m11 * ga - jab * gb) / det;
            let sb = -(m00 * gb - jab * ga) / det;
            let (na, nb) = (a + sa, b + sb);
            let next = sum_of_squares(eqs, na, nb);
            if next < cost {
                a = na;
                b = nb;
                cost = next;
                mu = (mu * S::lit(0.1)).max(S::lit(1e-15));
                improved = true;
                break;
            }
            mu = mu * S::lit(10.0);
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

/// Real roots of `c0 + c1 t + c2 t²`, ascending; `None` when identically zero.
fn real_roots<S: Scalar>(c: [S; 3]) -> Option<Vec<S>> {
    let snap = S::lit(SNAP);
    let [c0, c1, c2] = c.map(|v| if v.abs() < snap { S::zero() } else { v });
    if c2 != S::zero() {
        let disc = c1 * c1 - S::lit(4.0) * c2 * c0;
        if disc < -snap {
            return Some(Vec::new());
        }
        let sq = disc.max(S::zero()).sqrt();
        let two = S::lit(2.0);
        let mut roots = vec![(-c1 - sq) / (two * c2), (-c1 + sq) / (two * c2)];
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
        roots.dedup_by(|x, y| (*x - *y).abs() < snap);
        Some(roots)
    } else if c1 != S::zero() {
        Some(vec![-c0 / c1])
    } else if c0 != S::zero() {
        Some(Vec::new())
    } else {
        None
    }
}

fn solution_at<S: Scalar + Serialize>(polys: &RicciPolynomials<S>, a: S, b: S) -> Option<EinsteinSolution<S>> {
    let (lambda, residual) = matrix_residual(&polys.eval(a, b));
    (residual < S::lit(SOLUTION_TOLERANCE)).then_some(EinsteinSolution { a, b, lambda, residual })
}

fn push_unique<S: Scalar>(list: &mut Vec<EinsteinSolution<S>>, s: EinsteinSolution<S>) {
    let r = S::lit(DEDUP_RADIUS);
    if !list.iter().any(|t| (t.a - s.a).abs() < r && (t.b - s.b).abs() < r) {
        list.push(s);
    }
}

/// Decides `Ric(a, b) = λ·I` over the fitted polynomials.
pub fn solve_einstein<S: Scalar + Serialize>(polys: &RicciPolynomials<S>) -> EinsteinVerdict<S> {
    let eqs = polys.equations();
    let steps = (2.0 * SEARCH_HALF_WIDTH / SEARCH_STEP).round() as usize;
    let node = |n: usize| S::lit(-SEARCH_HALF_WIDTH + SEARCH_STEP * n as f64);
    let n = steps + 1;
    let mut cost = vec![S::zero(); n * n];
    for ia in 0..n {
        for ib in 0..n {
            cost[ia * n + ib] = sum_of_squares(&eqs, node(ia), node(ib));
        }
    }

    let mut min_residual = cost[0];
    let mut min_at = [node(0), node(0)];
    let mut solutions = Vec::new();
    for ia in 0..n {
        for ib in 0..n {
            let here = cost[ia * n + ib];
            if here < min_residual {
                min_residual = here;
                min_at = [node(ia), node(ib)];
            }
            let is_basin = (ia.saturating_sub(1)..=(ia + 1).min(n - 1)).all(|ja| {
                (ib.saturating_sub(1)..=(ib + 1).min(n - 1)).all(|jb| cost[ja * n + jb] >= here)
            });
            if !is_basin {
                continue;
            }
            let (a, b) = polish(&eqs, node(ia), node(ib));
            if let Some(s) = solution_at(polys, a, b) {
                push_unique(&mut solutions, s);
            }
        }
    }

    complete_orbits(polys, &mut solutions);
    let mut certificate = None;
    if solutions.is_empty() {
        let (cert, extra) = certify(polys, &eqs, min_residual, min_at);
        for s in extra {
            push_unique(&mut solutions, s);
        }
        if solutions.is_empty() {
            certificate = Some(cert);
        }
    }
    solutions.sort_by(|x, y| (x.a, x.b).partial_cmp(&(y.a, y.b)).unwrap());
    EinsteinVerdict {
        status: if solutions.is_empty() { Status::Infeasible } else { Status::Solvable },
        solutions,
        certificate,
    }
}

fn complete_orbits<S: Scalar + Serialize>(polys: &RicciPolynomials<S>, solutions: &mut Vec<EinsteinSolution<S>>) {
    let (even_a, even_b) = (polys.is_even_in_a(), polys.is_even_in_b());
    for s in solutions.clone() {
        let mut images = Vec::new();
        if even_a {
            images.push((-s.a, s.b));
        }
        if even_b {
            images.push((s.a, -s.b));
        }
        if even_a && even_b {
            images.push((-s.a, -s.b));
        }
        for (a, b) in images {
            if let Some(t) = solution_at(polys, a, b) {
                push_unique(solutions, t);
            }
        }
    }
}

fn certify<S: Scalar + Serialize>(
    polys: &RicciPolynomials<S>,
    eqs: &[Equation<S>],
    min_residual: S,
    min_at: [S; 2],
) -> (Certificate<S>, Vec<EinsteinSolution<S>>) {
    let mut cert = Certificate { binding: None, contradictions: Vec::new(), min_residual, min_at };
    let mut extra = Vec::new();

    for e in eqs {
        if let Some(c) = e.poly.as_constant() {
            if c != S::zero() {
                cert.contradictions.push(describe(polys, e, None, None));
            }
        }
    }
    if !cert.contradictions.is_empty() {
        return (cert, extra);
    }

    let binding = eqs.iter().find_map(|e| match e.kind {
        EquationKind::OffDiagonal(i, j) => e.poly.pure_monomial().map(|m| (i, j, m, e.poly)),
        EquationKind::DiagonalGap(_) => None,
    });
    let Some((row, col, monomial, poly)) = binding else {
        cert.contradictions.push(Contradiction {
            kind: ContradictionKind::ResidualFloor,
            branch: None,
            at: Some(min_at),
            first: Constraint { equation: "sum of squared constraints".into(), value: Some(min_residual) },
            second: Constraint { equation: "sum of squared constraints = 0".into(), value: Some(S::zero()) },
        });
        return (cert, extra);
    };
    let branches = match MONOMIALS[monomial] {
        "a" | "a^2" => vec![Branch::AZero],
        "b" | "b^2" => vec![Branch::BZero],
        _ => vec![Branch::AZero, Branch::BZero],
    };
    cert.binding = Some(Binding {
        row,
        col,
        entry: entry(row, col),
        poly,
        polynomial: poly.to_string(),
        branches: branches.clone(),
    });

    let tol = S::lit(SOLUTION_TOLERANCE);
    for branch in branches {
        let pin = |t: S| match branch {
            Branch::AZero => (S::zero(), t),
            Branch::BZero => (t, S::zero()),
        };
        let leading = eqs.iter().find_map(|e| real_roots(e.poly.restrict(branch)).map(|r| (e, r)));
        let Some((lead, roots)) = leading else {
            continue;
        };
        if let Some(c) = constant_on(&lead.poly.restrict(branch)) {
            if c != S::zero() {
                let free = if branch == Branch::AZero { "b" } else { "a" };
                cert.contradictions.push(restricted_clash(polys, lead, branch, free));
                continue;
            }
        }
        if roots.is_empty() {
            let free = if branch == Branch::AZero { "b" } else { "a" };
            let restricted = restricted_display(&lead.poly.restrict(branch), free);
            cert.contradictions.push(Contradiction {
                kind: ContradictionKind::NoRealRoot,
                branch: Some(branch),
                at: None,
                first: Constraint { equation: format!("{} = 0", restricted), value: None },
                second: Constraint { equation: format!("{free} real"), value: None },
            });
            continue;
        }
        for t in roots {
            let (a, b) = pin(t);
            match eqs.iter().find(|e| e.poly.eval(a, b).abs() >= tol) {
                Some(failing) => cert.contradictions.push(describe(polys, failing, Some(branch), Some([a, b]))),
                None => {
                    if let Some(s) = solution_at(polys, a, b) {
                        extra.push(s);
                    }
                }
            }
        }
    }
    (cert, extra)
}

fn constant_on<S: Scalar>(c: &[S; 3]) -> Option<S> {
    (c[1].abs() < S::lit(SNAP) && c[2].abs() < S::lit(SNAP)).then_some(c[0])
}

/// A constraint that is a nonzero constant on the whole branch.
fn restricted_clash<S: Scalar + Serialize>(
    polys: &RicciPolynomials<S>,
    e: &Equation<S>,
    branch: Branch,
    free: &str,
) -> Contradiction<S> {
    let on_branch = |i: usize, j: usize| restricted_display(&polys.entries[i][j].restrict(branch), free);
    let (first, second) = match e.kind {
        EquationKind::DiagonalGap(i) => (
            Constraint { equation: format!("λ = {} = {}", entry(0, 0), on_branch(0, 0)), value: None },
            Constraint { equation: format!("λ = {} = {}", entry(i, i), on_branch(i, i)), value: None },
        ),
        EquationKind::OffDiagonal(i, j) => (
            Constraint { equation: format!("{} = 0", entry(i, j)), value: Some(S::zero()) },
            Constraint { equation: format!("{} = {}", entry(i, j), on_branch(i, j)), value: None },
        ),
    };
    let kind = match e.kind {
        EquationKind::DiagonalGap(_) => ContradictionKind::LambdaClash,
        EquationKind::OffDiagonal(..) => ContradictionKind::OffDiagonal,
    };
    Contradiction { kind, branch: Some(branch), at: None, first, second }
}

fn restricted_display<S: Scalar>(c: &[S; 3], free: &str) -> String {
    let as_poly = match free {
        "a" => ParamPoly::new([c[0], c[1], S::zero(), c[2], S::zero(), S::zero()]),
        _ => ParamPoly::new([c[0], S::zero(), c[1], S::zero(), S::zero(), c[2]]),
    };
    as_poly.snapped().to_string()
}

fn describe<S: Scalar + Serialize>(
    polys: &RicciPolynomials<S>,
    e: &Equation<S>,
    branch: Option<Branch>,
    at: Option<[S; 2]>,
) -> Contradiction<S> {
    let value = |i: usize, j: usize| match at {
        Some([a, b]) => polys.entries[i][j].eval(a, b),
        None => polys.entries[i][j].coeffs[0],
    };
    match e.kind {
        EquationKind::DiagonalGap(i) => Contradiction {
            kind: ContradictionKind::LambdaClash,
            branch,
            at,
            first: Constraint { equation: format!("λ = {}", entry(0, 0)), value: Some(value(0, 0)) },
            second: Constraint { equation: format!("λ = {}", entry(i, i)), value: Some(value(i, i)) },
        },
        EquationKind::OffDiagonal(i, j) => Contradiction {
            kind: ContradictionKind::OffDiagonal,
            branch,
            at,
            first: Constraint { equation: format!("{} = 0", entry(i, j)), value: Some(S::zero()) },
            second: Constraint { equation: entry(i, j), value: Some(value(i, j)) },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::build_s2xt2;
    use crate::connection::{harmonic_torsion, levi_civita, paper_torsion, zero_torsion};

    fn poly(c: [f64; 6]) -> ParamPoly<f64> {
        ParamPoly::from_f64(c)
    }

    #[test]
    fn display_and_lookup() {
        assert_eq!(poly([1.0, 0.0, 0.0, -2.0, 0.0, -2.0]).to_string(), "1 - 2a^2 - 2b^2");
        assert_eq!(poly([0.0, 0.0, 0.0, 0.0, -2.0, 0.0]).to_string(), "-2ab");
        assert_eq!(ParamPoly::<f64>::zero().to_string(), "0");
        assert_eq!(poly([0.0, 0.0, 0.0, 0.0, 2.0, 0.0]).coefficient("ab"), Some(2.0));
        assert_eq!(poly([0.0; 6]).coefficient("c"), None);
    }

    #[test]
    fn fit_recovers_an_exact_quadratic() {
        let target = poly([0.5, -1.0, 2.0, 0.25, -3.0, 1.5]);
        let fitted = fit_quadratic::<f64, _>("synthetic", |a, b| {
            let v = target.eval(a, b);
            Ok(RicciMatrix { entries: [[v; 4]; 4] })
        })
        .unwrap();
        assert!(fitted.get(2, 1).max_abs_diff(&target) < 1e-14);
    }

    #[test]
    fn fit_rejects_cubic_dependence() {
        let err = fit_quadratic::<f64, _>("cubic", |a, b| Ok(RicciMatrix { entries: [[a * a * b; 4]; 4] }));
        assert!(matches!(err, Err(GeometryError::NonPolynomial { .. })));
    }

    #[test]
    fn fitted_zero_torsion_is_constant() {
        let frame = build_s2xt2(1.0).unwrap();
        let p = ChartPoint::new(0.9, 0.1, 0.2, 0.3).unwrap();
        let polys = fit_ricci_polynomials(&zero_torsion::<f64>(), &frame, &p).unwrap();
        let diag = [1.0f64, 1.0, 0.0, 0.0];
        for i in 0..DIM {
            for j in 0..DIM {
                let expected = if i == j { diag[i] } else { 0.0 };
                assert!((polys.get(i, j).as_constant().unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    // First-principles values; see the symbolic oracle in the curvature tests.
    #[test]
    fn fitted_harmonic_family() {
        let frame = build_s2xt2(1.0).unwrap();
        let polys = fit_ricci_polynomials(&harmonic_torsion::<f64>(), &frame, &ChartPoint::<f64>::reference()).unwrap();
        let d = poly([1.0, 0.0, 0.0, -2.0, 0.0, -2.0]);
        assert!(polys.get(0, 0).max_abs_diff(&d) < 1e-9);
        assert!(polys.get(1, 1).max_abs_diff(&d) < 1e-9);
        assert!(polys.get(2, 2).max_abs_diff(&poly([0.0, 0.0, 0.0, -2.0, 0.0, 0.0])) < 1e-9);
        assert!(polys.get(3, 3).max_abs_diff(&poly([0.0, 0.0, 0.0, 0.0, 0.0, -2.0])) < 1e-9);
        assert!(polys.get(2, 3).max_abs_diff(&poly([0.0, 0.0, 0.0, 0.0, -2.0, 0.0])) < 1e-9);
        assert!(polys.get(0, 1).is_zero());
    }

    #[test]
    fn fitted_paper_family() {
        let frame = build_s2xt2(1.0).unwrap();
        let polys = fit_ricci_polynomials(&paper_torsion::<f64>(), &frame, &ChartPoint::<f64>::reference()).unwrap();
        assert!(polys.get(0, 1).max_abs_diff(&poly([0.0, 0.0, 0.0, 0.0, -2.0, 0.0])) < 1e-9);
        assert!(polys.get(0, 0).max_abs_diff(&poly([1.0, 0.0, 0.0, -2.0, 0.0, 0.0])) < 1e-9);
        let cot1 = 1.0 / 1.0f64.tan();
        assert!(polys.get(2, 3).max_abs_diff(&poly([0.0, -cot1, 0.0, 0.0, 0.0, 0.0])) < 1e-9);
    }

    #[test]
    fn solver_finds_a_planted_orbit() {
        // diag(a² − 1/2, b² − 1/2, 0, 0) with zero off-diagonals: λ = 0 at a² = b² = 1/2.
        let mut entries = [[ParamPoly::<f64>::zero(); 4]; 4];
        entries[0][0] = poly([-0.5, 0.0, 0.0, 1.0, 0.0, 0.0]);
        entries[1][1] = poly([-0.5, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let verdict = solve_einstein(&RicciPolynomials { entries });
        assert_eq!(verdict.status, Status::Solvable);
        assert_eq!(verdict.solutions.len(), 4);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for s in &verdict.solutions {
            assert!((s.a.abs() - h).abs() < 1e-9 && (s.b.abs() - h).abs() < 1e-9);
            assert!(s.lambda.abs() < 1e-9 && s.residual < 1e-9);
        }
    }

    #[test]
    fn solver_certifies_the_zero_torsion_family() {
        let frame = build_s2xt2(1.0).unwrap();
        let polys = fit_ricci_polynomials(&zero_torsion::<f64>(), &frame, &ChartPoint::<f64>::reference()).unwrap();
        let verdict = solve_einstein(&polys);
        assert_eq!(verdict.status, Status::Infeasible);
        let cert = verdict.certificate.unwrap();
        assert!(cert.binding.is_none());
        let clash = &cert.contradictions[0];
        assert_eq!(clash.kind, ContradictionKind::LambdaClash);
        assert!((clash.first.value.unwrap() - 1.0).abs() < 1e-12);
        assert!(clash.second.value.unwrap().abs() < 1e-12);
    }

    #[test]
    fn solver_certifies_the_paper_family() {
        let frame = build_s2xt2(1.0).unwrap();
        let polys = fit_ricci_polynomials(&paper_torsion::<f64>(), &frame, &ChartPoint::<f64>::reference()).unwrap();
        let verdict = solve_einstein(&polys);
        assert_eq!(verdict.status, Status::Infeasible);
        let cert = verdict.certificate.unwrap();
        let binding = cert.binding.as_ref().unwrap();
        assert_eq!((binding.row, binding.col), (0, 1));
        assert_eq!(binding.poly.pure_monomial(), Some(4));
        for branch in [Branch::AZero, Branch::BZero] {
            assert!(cert.on_branch(branch).any(|c| c.kind == ContradictionKind::LambdaClash));
        }
    }

    #[test]
    fn harmonic_family_is_not_einstein() {
        let frame = build_s2xt2(1.0).unwrap();
        let polys = fit_ricci_polynomials(&harmonic_torsion::<f64>(), &frame, &ChartPoint::<f64>::reference()).unwrap();
        let verdict = solve_einstein(&polys);
        assert_eq!(verdict.status, Status::Infeasible);
        let cert = verdict.certificate.unwrap();
        assert_eq!(cert.binding.unwrap().entry, "Ric34");
    }

    #[test]
    fn residual_examples() {
        let frame = build_s2xt2(1.0).unwrap();
        let p = ChartPoint::new(1.1, 0.0, 0.0, 0.0).unwrap();
        let (lambda, res) = einstein_residual(&levi_civita::<f64>(&frame), &p);
        assert!((lambda - 0.5).abs() < 1e-12 && (res - 0.5).abs() < 1e-12);
        let conn = assemble(&frame, &harmonic_torsion::<f64>(), 0.5, 0.5);
        let (lambda, res) = einstein_residual(&conn, &p);
        assert!((lambda + 0.25).abs() < 1e-12);
        // Diagonal deviation 0.25, off-diagonal Ric34 = −2ab = −0.5.
        assert!((res - 0.5).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (lambda, res) = einstein_residual(&assemble(&frame, &harmonic_torsion::<f64>(), h, h), &p);
        assert!((lambda + 1.0).abs() < 1e-12 && (res - 1.0).abs() < 1e-12);
    }
}
