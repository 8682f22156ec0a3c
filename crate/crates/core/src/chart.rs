//! Chart points, differentiable scalar fields, and orthonormal frame fields.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dual::Dual;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Manifold dimension. Only four-dimensional frames are supported.
pub const DIM: usize = 4;

/// Rank-3 frame table, indexed `[k][i][j]` unless stated otherwise.
pub type Table3<S> = [[[S; DIM]; DIM]; DIM];

pub(crate) fn table3<S: Copy>(v: S) -> Table3<S> {
    [[[v; DIM]; DIM]; DIM]
}

/// Coordinates `(θ, φ, x, y)` on the S²×T² chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint<S> {
    theta: S,
    phi: S,
    x: S,
    y: S,
}

impl<S: Scalar> ChartPoint<S> {
    /// Rejects θ outside the open interval (0, π) and non-finite coordinates.
    pub fn new(theta: S, phi: S, x: S, y: S) -> Result<Self> {
        if [theta, phi, x, y].iter().any(|v| !v.is_finite()) {
            return invalid("chart coordinates must be finite");
        }
        if !(theta > S::zero() && theta < S::PI()) {
            return invalid(format!("theta = {theta} outside the open interval (0, pi)"));
        }
        Ok(ChartPoint { theta, phi, x, y })
    }

    pub fn from_coords(c: [S; DIM]) -> Result<Self> {
        Self::new(c[0], c[1], c[2], c[3])
    }

    /// The generic interior point θ = φ = x = y = 1 used for single-point reports.
    pub fn reference() -> Self {
        let one = S::one();
        ChartPoint { theta: one, phi: one, x: one, y: one }
    }

    pub fn theta(&self) -> S {
        self.theta
    }
    pub fn phi(&self) -> S {
        self.phi
    }
    pub fn x(&self) -> S {
        self.x
    }
    pub fn y(&self) -> S {
        self.y
    }

    pub fn coords(&self) -> [S; DIM] {
        [self.theta, self.phi, self.x, self.y]
    }

    /// Same point with coordinate `axis` moved by `delta`.
    pub fn shifted(&self, axis: usize, delta: S) -> Result<Self> {
        if axis >= DIM {
            return invalid(format!("axis {axis} out of range 0..{DIM}"));
        }
        let mut c = self.coords();
        c[axis] = c[axis] + delta;
        Self::from_coords(c)
    }

    fn duals(&self) -> [Dual<S>; DIM] {
        self.coords().map(Dual::Real)
    }
}

#[derive(Debug)]
enum Node {
    Const(f64),
    Coord(usize),
    Add(ScalarField, ScalarField),
    Sub(ScalarField, ScalarField),
    Mul(ScalarField, ScalarField),
    Div(ScalarField, ScalarField),
    Neg(ScalarField),
    Sin(ScalarField),
    Cos(ScalarField),
    Tan(ScalarField),
    Cot(ScalarField),
    Sqrt(ScalarField),
    Powi(ScalarField, i32),
    /// Coordinate partial derivative, evaluated by forward-mode AD.
    Partial(ScalarField, usize),
}

/// A differentiable real function of the chart coordinates.
///
/// Fields are immutable expression trees shared by reference count. Values
/// and coordinate derivatives are obtained by evaluating the tree on dual
/// numbers; no finite differencing is involved. Constructors fold constants
/// and drop partial derivatives along coordinates a subtree does not read, so
/// identically vanishing fields are recognisable through [`ScalarField::is_zero`].
#[derive(Clone, Debug)]
pub struct ScalarField(Arc<Node>);

impl ScalarField {
    fn node(n: Node) -> Self {
        ScalarField(Arc::new(n))
    }

    pub fn constant(v: f64) -> Self {
        Self::node(Node::Const(v))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The coordinate function for `axis` (0 = θ, 1 = φ, 2 = x, 3 = y).
    pub fn coord(axis: usize) -> Result<Self> {
        if axis >= DIM {
            return invalid(format!("axis {axis} out of range 0..{DIM}"));
        }
        Ok(Self::node(Node::Coord(axis)))
    }

    pub fn theta() -> Self {
        Self::node(Node::Coord(0))
    }

    pub fn as_constant(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_constant() == Some(1.0)
    }

    /// Whether the tree reads coordinate `axis` anywhere.
    pub fn depends_on(&self, axis: usize) -> bool {
        match &*self.0 {
            Node::Const(_) => false,
            Node::Coord(a) => *a == axis,
            Node::Add(l, r) | Node::Sub(l, r) | Node::Mul(l, r) | Node::Div(l, r) => {
                l.depends_on(axis) || r.depends_on(axis)
            }
            Node::Neg(f)
            | Node::Sin(f)
            | Node::Cos(f)
            | Node::Tan(f)
            | Node::Cot(f)
            | Node::Sqrt(f)
            | Node::Powi(f, _)
            | Node::Partial(f, _) => f.depends_on(axis),
        }
    }

    fn unary(self, make: fn(ScalarField) -> Node, fold: fn(f64) -> f64) -> Self {
        match self.as_constant() {
            Some(v) => Self::constant(fold(v)),
            None => Self::node(make(self)),
        }
    }

    pub fn sin(self) -> Self {
        self.unary(Node::Sin, f64::sin)
    }
    pub fn cos(self) -> Self {
        self.unary(Node::Cos, f64::cos)
    }
    pub fn tan(self) -> Self {
        self.unary(Node::Tan, f64::tan)
    }
    pub fn cot(self) -> Self {
        self.unary(Node::Cot, |v| 1.0 / v.tan())
    }
    pub fn sqrt(self) -> Self {
        self.unary(Node::Sqrt, f64::sqrt)
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        if n == 1 {
            return self;
        }
        match self.as_constant() {
            Some(v) => Self::constant(v.powi(n)),
            None => Self::node(Node::Powi(self, n)),
        }
    }

    pub fn recip(self) -> Self {
        ScalarField::one() / self
    }

    pub fn scale(self, c: f64) -> Self {
        ScalarField::constant(c) * self
    }

    /// Coordinate partial derivative `∂f/∂x^axis` as a new field.
    pub fn partial(&self, axis: usize) -> Result<Self> {
        if axis >= DIM {
            return invalid(format!("axis {axis} out of range 0..{DIM}"));
        }
        Ok(self.partial_unchecked(axis))
    }

    pub(crate) fn partial_unchecked(&self, axis: usize) -> Self {
        match &*self.0 {
            Node::Coord(a) => Self::constant(if *a == axis { 1.0 } else { 0.0 }),
            _ if !self.depends_on(axis) => Self::zero(),
            _ => Self::node(Node::Partial(self.clone(), axis)),
        }
    }

    /// Evaluates on dual-number coordinates.
    pub fn eval_dual<S: Scalar>(&self, p: &[Dual<S>; DIM]) -> Dual<S> {
        match &*self.0 {
            Node::Const(v) => Dual::Real(S::lit(*v)),
            Node::Coord(a) => p[*a].clone(),
            Node::Add(l, r) => &l.eval_dual(p) + &r.eval_dual(p),
            Node::Sub(l, r) => &l.eval_dual(p) - &r.eval_dual(p),
            Node::Mul(l, r) => &l.eval_dual(p) * &r.eval_dual(p),
            Node::Div(l, r) => &l.eval_dual(p) / &r.eval_dual(p),
            Node::Neg(f) => -f.eval_dual(p),
            Node::Sin(f) => f.eval_dual(p).sin(),
            Node::Cos(f) => f.eval_dual(p).cos(),
            Node::Tan(f) => f.eval_dual(p).tan(),
            Node::Cot(f) => f.eval_dual(p).cot(),
            Node::Sqrt(f) => f.eval_dual(p).sqrt(),
            Node::Powi(f, n) => f.eval_dual(p).powi(*n),
            Node::Partial(f, axis) => {
                let tag = p.iter().map(Dual::tag).max().unwrap_or(0) + 1;
                let mut seeded = p.clone();
                seeded[*axis] = Dual::variable(p[*axis].clone(), tag);
                f.eval_dual(&seeded).derivative(tag)
            }
        }
    }

    pub fn eval<S: Scalar>(&self, p: &ChartPoint<S>) -> S {
        self.eval_dual(&p.duals()).value()
    }

    /// Exact first derivative along coordinate `axis` (forward-mode AD).
    pub fn eval_derivative<S: Scalar>(&self, p: &ChartPoint<S>, axis: usize) -> Result<S> {
        if axis >= DIM {
            return invalid(format!("axis {axis} out of range 0..{DIM}"));
        }
        Ok(self.derivative_unchecked(p, axis))
    }

    fn derivative_unchecked<S: Scalar>(&self, p: &ChartPoint<S>, axis: usize) -> S {
        if !self.depends_on(axis) {
            return S::zero();
        }
        let mut seeded = p.duals();
        seeded[axis] = Dual::variable(seeded[axis].clone(), 1);
        self.eval_dual(&seeded).derivative(1).value()
    }

    pub fn gradient<S: Scalar>(&self, p: &ChartPoint<S>) -> [S; DIM] {
        std::array::from_fn(|axis| self.derivative_unchecked(p, axis))
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; DIM] = ["theta", "phi", "x", "y"];
        match &*self.0 {
            Node::Const(v) => write!(f, "{v}"),
            Node::Coord(a) => write!(f, "{}", NAMES[*a]),
            Node::Add(l, r) => write!(f, "({l} + {r})"),
            Node::Sub(l, r) => write!(f, "({l} - {r})"),
            Node::Mul(l, r) => write!(f, "{l}*{r}"),
            Node::Div(l, r) => write!(f, "{l}/{r}"),
            Node::Neg(g) => write!(f, "-{g}"),
            Node::Sin(g) => write!(f, "sin({g})"),
            Node::Cos(g) => write!(f, "cos({g})"),
            Node::Tan(g) => write!(f, "tan({g})"),
            Node::Cot(g) => write!(f, "cot({g})"),
            Node::Sqrt(g) => write!(f, "sqrt({g})"),
            Node::Powi(g, n) => write!(f, "{g}^{n}"),
            Node::Partial(g, a) => write!(f, "d/d{}({g})", NAMES[*a]),
        }
    }
}

impl Add for ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(a + b),
            (Some(0.0), _) => rhs,
            (_, Some(0.0)) => self,
            _ => ScalarField::node(Node::Add(self, rhs)),
        }
    }
}

impl Sub for ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(a - b),
            (Some(0.0), _) => -rhs,
            (_, Some(0.0)) => self,
            _ => ScalarField::node(Node::Sub(self, rhs)),
        }
    }
}

impl Mul for ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: ScalarField) -> ScalarField {
        if self.is_zero() || rhs.is_zero() {
            return ScalarField::zero();
        }
        if self.is_one() {
            return rhs;
        }
        if rhs.is_one() {
            return self;
        }
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(a * b),
            _ => ScalarField::node(Node::Mul(self, rhs)),
        }
    }
}

impl Div for ScalarField {
    type Output = ScalarField;
    fn div(self, rhs: ScalarField) -> ScalarField {
        if self.is_zero() {
            return ScalarField::zero();
        }
        if rhs.is_one() {
            return self;
        }
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(a / b),
            _ => ScalarField::node(Node::Div(self, rhs)),
        }
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        match &*self.0 {
            Node::Const(v) => ScalarField::constant(-v),
            Node::Neg(inner) => inner.clone(),
            _ => ScalarField::node(Node::Neg(self)),
        }
    }
}

macro_rules! ref_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                self.clone().$m(rhs.clone())
            }
        }
    };
}
ref_binop!(Add, add);
ref_binop!(Sub, sub);
ref_binop!(Mul, mul);
ref_binop!(Div, div);

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        -self.clone()
    }
}

/// An orthonormal frame `{e_1..e_4}` on a four-dimensional chart.
///
/// `vectors[i][m]` is the `∂_m` component of `e_i`, `coframe[k][m]` the `dx^m`
/// component of `e^k`. Structure functions are derived once at construction:
/// `[e_i, e_j] = Σ_k c^k_ij e_k`, stored as `structure[k][i][j]`. The metric is
/// the identity in the frame and the orientation is `e_1 ∧ e_2 ∧ e_3 ∧ e_4`.
#[derive(Clone, Debug)]
pub struct FrameSpec {
    name: String,
    vectors: [[ScalarField; DIM]; DIM],
    coframe: [[ScalarField; DIM]; DIM],
    structure: [[[ScalarField; DIM]; DIM]; DIM],
}

impl FrameSpec {
    /// Builds a frame from its vector fields and the dual coframe.
    ///
    /// The caller guarantees that `coframe` is the pointwise inverse of
    /// `vectors`; see [`FrameSpec::duality_residual`].
    pub fn from_fields(
        name: impl Into<String>,
        vectors: [[ScalarField; DIM]; DIM],
        coframe: [[ScalarField; DIM]; DIM],
    ) -> Self {
        let mut frame = FrameSpec {
            name: name.into(),
            vectors,
            coframe,
            structure: std::array::from_fn(|_| {
                std::array::from_fn(|_| std::array::from_fn(|_| ScalarField::zero()))
            }),
        };
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                // Coordinate components of [e_i, e_j].
                let bracket: [ScalarField; DIM] = std::array::from_fn(|m| {
                    frame.directional(i, &frame.vectors[j][m])
                        - frame.directional(j, &frame.vectors[i][m])
                });
                for k in 0..DIM {
                    let c = (0..DIM).fold(ScalarField::zero(), |acc, m| {
                        acc + &frame.coframe[k][m] * &bracket[m]
                    });
                    frame.structure[k][j][i] = -&c;
                    frame.structure[k][i][j] = c;
                }
            }
        }
        frame
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `∂_m` component of `e_i`.
    pub fn vector(&self, i: usize, m: usize) -> &ScalarField {
        &self.vectors[i][m]
    }

    /// `dx^m` component of `e^k`.
    pub fn coframe(&self, k: usize, m: usize) -> &ScalarField {
        &self.coframe[k][m]
    }

    /// Structure function `c^k_ij`.
    pub fn structure(&self, k: usize, i: usize, j: usize) -> &ScalarField {
        &self.structure[k][i][j]
    }

    /// The field `e_i(f) = Σ_m e_i^m ∂_m f`.
    pub fn directional(&self, i: usize, f: &ScalarField) -> ScalarField {
        (0..DIM).fold(ScalarField::zero(), |acc, m| {
            let comp = &self.vectors[i][m];
            if comp.is_zero() {
                acc
            } else {
                acc + comp * &f.partial_unchecked(m)
            }
        })
    }

    /// `e_i(f)` evaluated at `p`: frame vector in coordinates dotted with the AD gradient.
    pub fn apply<S: Scalar>(&self, i: usize, f: &ScalarField, p: &ChartPoint<S>) -> S {
        (0..DIM).fold(S::zero(), |acc, m| {
            let comp = &self.vectors[i][m];
            if comp.is_zero() || !f.depends_on(m) {
                acc
            } else {
                acc + comp.eval(p) * f.derivative_unchecked(p, m)
            }
        })
    }

    pub fn structure_at<S: Scalar>(&self, p: &ChartPoint<S>) -> Table3<S> {
        let mut out = table3(S::zero());
        for k in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    out[k][i][j] = self.structure[k][i][j].eval(p);
                }
            }
        }
        out
    }

    /// `max |Σ_m e_i^m e^k_m − δ_ik|` at `p`.
    pub fn duality_residual<S: Scalar>(&self, p: &ChartPoint<S>) -> S {
        let mut worst = S::zero();
        for i in 0..DIM {
            for k in 0..DIM {
                let dot = (0..DIM).fold(S::zero(), |acc, m| {
                    acc + self.vectors[i][m].eval(p) * self.coframe[k][m].eval(p)
                });
                let target = if i == k { S::one() } else { S::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Largest Jacobi-identity defect
    /// `Σ_cyclic(ijk) [ e_i(c^m_jk) + Σ_l c^m_il c^l_jk ]` over all index choices at `p`.
    pub fn jacobi_residual<S: Scalar>(&self, p: &ChartPoint<S>) -> S {
        let c = self.structure_at(p);
        let mut worst = S::zero();
        for m in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        let mut total = S::zero();
                        for (a, b, d) in [(i, j, k), (j, k, i), (k, i, j)] {
                            total = total + self.apply(a, &self.structure[m][b][d], p);
                            for l in 0..DIM {
                                total = total + c[m][a][l] * c[l][b][d];
                            }
                        }
                        worst = worst.max(total.abs());
                    }
                }
            }
        }
        worst
    }
}

/// The product S²(radius) × T² with the orthonormal frame
/// `e1 = (1/r)∂_θ`, `e2 = 1/(r sin θ) ∂_φ`, `e3 = ∂_x`, `e4 = ∂_y`.
pub fn build_s2xt2(radius: f64) -> Result<FrameSpec> {
    if !(radius.is_finite() && radius > 0.0) {
        return invalid(format!("radius must be positive, got {radius}"));
    }
    let z = ScalarField::zero;
    let r = ScalarField::constant(radius);
    let sin = ScalarField::theta().sin();
    let vectors = [
        [r.clone().recip(), z(), z(), z()],
        [z(), (&r * &sin).recip(), z(), z()],
        [z(), z(), ScalarField::one(), z()],
        [z(), z(), z(), ScalarField::one()],
    ];
    let coframe = [
        [r.clone(), z(), z(), z()],
        [z(), &r * &sin, z(), z()],
        [z(), z(), ScalarField::one(), z()],
        [z(), z(), z(), ScalarField::one()],
    ];
    Ok(FrameSpec::from_fields("s2xt2", vectors, coframe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn at(theta: f64) -> ChartPoint<f64> {
        ChartPoint::new(theta, 0.4, 1.1, 2.3).unwrap()
    }

    #[test]
    fn theta_must_be_interior() {
        assert!(ChartPoint::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(ChartPoint::new(PI, 0.0, 0.0, 0.0).is_err());
        assert!(ChartPoint::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert!(ChartPoint::new(1e-3, 0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn cot_value_and_derivative() {
        let f = ScalarField::theta().cot();
        let p = at(PI / 4.0);
        assert!((f.eval(&p) - 1.0).abs() < 1e-15);
        assert!((f.eval_derivative(&p, 0).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let f = ScalarField::constant(5.0);
        let p = at(1.2);
        for axis in 0..DIM {
            assert_eq!(f.eval_derivative(&p, axis).unwrap(), 0.0);
        }
    }

    #[test]
    fn sin_derivative_is_cos() {
        let f = ScalarField::theta().sin();
        let d = f.eval_derivative(&at(1.0), 0).unwrap();
        assert!((d - 1.0f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn axis_out_of_range_is_rejected() {
        let f = ScalarField::theta();
        assert!(f.eval_derivative(&at(1.0), 4).is_err());
        assert!(ScalarField::coord(7).is_err());
    }

    #[test]
    fn nonpositive_radius_is_rejected() {
        assert!(build_s2xt2(0.0).is_err());
        assert!(build_s2xt2(-1.0).is_err());
        assert!(build_s2xt2(f64::INFINITY).is_err());
    }

    #[test]
    fn equator_structure_vanishes() {
        let frame = build_s2xt2(1.0).unwrap();
        let c = frame.structure_at(&at(PI / 2.0));
        for row in c.iter().flatten().flatten() {
            assert!(row.abs() < 1e-15);
        }
    }

    // Coordinate oracle: [e1, e2] for e1 = ∂θ/r, e2 = ∂φ/(r sinθ) is
    // (1/r) ∂θ(1/(r sinθ)) ∂φ = -(cotθ / r) e2.
    #[test]
    fn sphere_bracket_matches_coordinate_oracle() {
        for radius in [1.0, 2.0] {
            let frame = build_s2xt2(radius).unwrap();
            let theta = PI / 3.0;
            let c = frame.structure_at(&at(theta));
            let expected = -1.0 / theta.tan() / radius;
            assert!((c[1][0][1] - expected).abs() < 1e-14, "radius {radius}");
            assert!((c[1][1][0] + expected).abs() < 1e-14);
            for k in 0..DIM {
                for i in 0..DIM {
                    for j in 0..DIM {
                        if (k, i, j) != (1, 0, 1) && (k, i, j) != (1, 1, 0) {
                            assert_eq!(c[k][i][j], 0.0, "c^{k}_{i}{j}");
                        }
                    }
                }
            }
        }
        let one = build_s2xt2(1.0).unwrap().structure_at(&at(PI / 3.0));
        let two = build_s2xt2(2.0).unwrap().structure_at(&at(PI / 3.0));
        assert!((two[1][0][1] - 0.5 * one[1][0][1]).abs() < 1e-15);
        assert!((one[1][0][1] + 0.577_350_269_189_625_8).abs() < 1e-12);
    }

    #[test]
    fn torus_and_mixed_structure_is_identically_zero() {
        let frame = build_s2xt2(1.0).unwrap();
        for k in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    let sphere_block = i < 2 && j < 2 && k < 2;
                    if !sphere_block {
                        assert!(frame.structure(k, i, j).is_zero(), "c^{k}_{i}{j}");
                    }
                }
            }
        }
    }

    #[test]
    fn frame_and_coframe_are_dual() {
        let frame = build_s2xt2(1.7).unwrap();
        assert!(frame.duality_residual(&at(0.9)) < 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let f = ScalarField::theta().sin();
        let p = ChartPoint::new(1.0f32, 0.0, 0.0, 0.0).unwrap();
        assert!((f.eval_derivative(&p, 0).unwrap() - 1.0f32.cos()).abs() < 1e-6);
    }
}
