//! Levi-Civita connections, parametric torsion, and their sum.
//!
//! Connection coefficients follow `∇_{e_i} e_j = Σ_k Γ^k_ij e_k` and are stored
//! as `[k][i][j]`. A torsion field `T` enters additively,
//! `∇_X Y = ∇^LC_X Y + T(X, Y)`, so `Γ^k_ij = Γ^k_ij(LC) + T^k_ij`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chart::{table3, ChartPoint, FrameSpec, ScalarField, Table3, DIM};
use crate::error::{invalid, Result};
use crate::exterior::FrameForm;
use crate::grid::GridSpec;
use crate::scalar::{Coefficient, Scalar};

/// `c0 + ca·a + cb·b` in the calibration parameters `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamCoeff<C> {
    pub c0: C,
    pub ca: C,
    pub cb: C,
}

impl<C: Coefficient> ParamCoeff<C> {
    pub fn new(c0: C, ca: C, cb: C) -> Self {
        ParamCoeff { c0, ca, cb }
    }

    pub fn zero() -> Self {
        Self::new(C::zero(), C::zero(), C::zero())
    }

    /// `s·a`
    pub fn a(s: i64) -> Self {
        Self::new(C::zero(), C::from_i64(s), C::zero())
    }

    /// `s·b`
    pub fn b(s: i64) -> Self {
        Self::new(C::zero(), C::zero(), C::from_i64(s))
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.ca.is_zero() && self.cb.is_zero()
    }

    pub fn eval<S: Scalar>(&self, a: S, b: S) -> S {
        self.c0.to_scalar::<S>() + self.ca.to_scalar::<S>() * a + self.cb.to_scalar::<S>() * b
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.c0, -self.ca, -self.cb)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.c0 + o.c0, self.ca + o.ca, self.cb + o.cb)
    }
}

impl<C: Coefficient> fmt::Display for ParamCoeff<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (c, sym) in [(self.c0, ""), (self.ca, "a"), (self.cb, "b")] {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = if c == C::one().neg() { (true, None) } else if c == C::one() { (false, None) } else { (false, Some(c)) };
            let body = match (mag, sym) {
                (None, "") => "1".to_string(),
                (None, s) => s.to_string(),
                (Some(m), "") => format!("{m:?}"),
                (Some(m), s) => format!("{m:?}*{s}"),
            };
            match (out.is_empty(), neg) {
                (true, true) => out.push('-'),
                (false, true) => out.push_str(" - "),
                (false, false) => out.push_str(" + "),
                (true, false) => {}
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// Built-in torsion families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Zero torsion: the Levi-Civita connection itself.
    Lc,
    /// Block-mixing torsion `T(e1,e3) = a e4, …, T(e3,e4) = −a e1 − b e2`.
    Paper,
    /// Skew torsion whose 3-form is `a e^123 + b e^124`.
    Harmonic,
    /// User-supplied components.
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Lc => "lc",
            Family::Paper => "paper",
            Family::Harmonic => "harmonic",
            Family::Custom => "custom",
        }
    }

    pub fn builtins() -> [Family; 3] {
        [Family::Lc, Family::Paper, Family::Harmonic]
    }

    /// Torsion of a built-in family; `None` for [`Family::Custom`].
    pub fn torsion<C: Coefficient>(self) -> Option<TorsionField<C>> {
        match self {
            Family::Lc => Some(zero_torsion()),
            Family::Paper => Some(paper_torsion()),
            Family::Harmonic => Some(harmonic_torsion()),
            Family::Custom => None,
        }
    }
}

/// Frame components `T(e_i, e_j) = Σ_k T^k_ij e_k`, antisymmetric in `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionField<C> {
    label: String,
    components: [[[ParamCoeff<C>; DIM]; DIM]; DIM],
}

impl<C: Coefficient> TorsionField<C> {
    pub fn zero(label: impl Into<String>) -> Self {
        TorsionField {
            label: label.into(),
            components: [[[ParamCoeff::zero(); DIM]; DIM]; DIM],
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Sets `T^k_ij` and completes `T^k_ji = −T^k_ij`.
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: ParamCoeff<C>) -> Result<()> {
        if i >= DIM || j >= DIM || k >= DIM {
            return invalid(format!("torsion index ({i}, {j}, {k}) out of range 0..{DIM}"));
        }
        if i == j {
            return invalid("torsion component must have i != j");
        }
        self.components[k][i][j] = value;
        self.components[k][j][i] = value.neg();
        Ok(())
    }

    /// Builds a field from `(i, j, k, coeff)` entries, rejecting repeated `(i, j, k)`
    /// keys (including `(j, i, k)`, which the antisymmetric completion would overwrite).
    pub fn from_components(
        label: impl Into<String>,
        entries: &[(usize, usize, usize, ParamCoeff<C>)],
    ) -> Result<Self> {
        let mut field = Self::zero(label);
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j, k, c) in entries {
            if !seen.insert((i.min(j), i.max(j), k)) {
                return invalid(format!("duplicate torsion component ({i}, {j}, {k})"));
            }
            field.set(i, j, k, c)?;
        }
        Ok(field)
    }

    /// `T^k_ij`.
    pub fn component(&self, i: usize, j: usize, k: usize) -> ParamCoeff<C> {
        self.components[k][i][j]
    }

    /// Nonzero components with `i < j`, in lexicographic `(i, j, k)` order.
    pub fn nonzero_components(&self) -> Vec<(usize, usize, usize, ParamCoeff<C>)> {
        let mut out = Vec::new();
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                for k in 0..DIM {
                    let c = self.components[k][i][j];
                    if !c.is_zero() {
                        out.push((i, j, k, c));
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.nonzero_components().is_empty()
    }

    /// Numeric components `[k][i][j]` at `(a, b)`.
    pub fn at<S: Scalar>(&self, a: S, b: S) -> Table3<S> {
        let mut out = table3(S::zero());
        for k in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    out[k][i][j] = self.components[k][i][j].eval(a, b);
                }
            }
        }
        out
    }

    /// Exact check that `T♭_ijk = T^k_ij` is totally antisymmetric as a
    /// function of `(a, b)`.
    pub fn is_totally_antisymmetric(&self) -> bool {
        (0..DIM).all(|i| {
            (0..DIM).all(|j| {
                (0..DIM).all(|k| self.components[k][i][j] == self.components[j][i][k].neg())
            })
        })
    }
}

/// Torsion of the block-mixing family.
pub fn paper_torsion<C: Coefficient>() -> TorsionField<C> {
    let entries = [
        (0, 2, 3, ParamCoeff::a(1)),
        (0, 3, 2, ParamCoeff::a(-1)),
        (1, 2, 3, ParamCoeff::b(1)),
        (1, 3, 2, ParamCoeff::b(-1)),
        (2, 3, 0, ParamCoeff::a(-1)),
        (2, 3, 1, ParamCoeff::b(-1)),
    ];
    TorsionField::from_components(Family::Paper.name(), &entries).expect("valid built-in family")
}

/// Skew torsion with `T♭ = a e^123 + b e^124`.
pub fn harmonic_torsion<C: Coefficient>() -> TorsionField<C> {
    let entries = [
        (0, 1, 2, ParamCoeff::a(1)),
        (0, 1, 3, ParamCoeff::b(1)),
        (0, 2, 1, ParamCoeff::a(-1)),
        (1, 2, 0, ParamCoeff::a(1)),
        (0, 3, 1, ParamCoeff::b(-1)),
        (1, 3, 0, ParamCoeff::b(1)),
    ];
    TorsionField::from_components(Family::Harmonic.name(), &entries)
        .expect("valid built-in family")
}

pub fn zero_torsion<C: Coefficient>() -> TorsionField<C> {
    TorsionField::zero(Family::Lc.name())
}

/// The trilinear form `T♭(e_i, e_j, e_k) = g(T(e_i, e_j), e_k)` at fixed `(a, b)`.
#[derive(Clone, Debug)]
pub struct FlatForm<S> {
    /// `table[i][j][k] = T♭_ijk`.
    pub table: Table3<S>,
    pub totally_antisymmetric: bool,
    /// Present exactly when `totally_antisymmetric`.
    pub form: Option<FrameForm>,
}

pub fn flat_3form<C: Coefficient, S: Scalar>(torsion: &TorsionField<C>, a: S, b: S) -> FlatForm<S> {
    let comps = torsion.at(a, b);
    let mut table = table3(S::zero());
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                table[i][j][k] = comps[k][i][j];
            }
        }
    }
    let close = |x: S, y: S| (x - y).abs() <= S::lit(1e-12) * (S::one() + x.abs().max(y.abs()));
    let mut totally_antisymmetric = true;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                let t = table[i][j][k];
                if !(close(t, -table[j][i][k]) && close(t, -table[i][k][j])) {
                    totally_antisymmetric = false;
                }
            }
        }
    }
    let form = totally_antisymmetric.then(|| {
        let mut form = FrameForm::zero(3).expect("degree 3");
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                for k in (j + 1)..DIM {
                    let v = table[i][j][k].to_f64_lossy();
                    if v != 0.0 {
                        let term = FrameForm::monomial(ScalarField::constant(v), &[i, j, k])
                            .expect("valid indices");
                        form = form.add(&term).expect("same degree");
                    }
                }
            }
        }
        form
    });
    FlatForm { table, totally_antisymmetric, form }
}

/// Frame connection coefficients with their Levi-Civita and torsion parts kept apart.
#[derive(Clone, Debug)]
pub struct ConnectionCoeffs<S> {
    frame: Arc<FrameSpec>,
    label: String,
    lc: [[[ScalarField; DIM]; DIM]; DIM],
    torsion: Table3<S>,
    params: (S, S),
}

/// Levi-Civita coefficients from the orthonormal-frame Koszul formula
/// `2Γ^k_ij = c^k_ij − c^i_jk + c^j_ki`.
pub fn levi_civita<S: Scalar>(frame: &FrameSpec) -> ConnectionCoeffs<S> {
    let lc = std::array::from_fn(|k| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let sum = frame.structure(k, i, j) - frame.structure(i, j, k)
                    + frame.structure(j, k, i).clone();
                sum.scale(0.5)
            })
        })
    });
    ConnectionCoeffs {
        frame: Arc::new(frame.clone()),
        label: "levi-civita".into(),
        lc,
        torsion: table3(S::zero()),
        params: (S::zero(), S::zero()),
    }
}

/// `∇ = ∇^LC + T` at numeric parameters `(a, b)`.
pub fn assemble<C: Coefficient, S: Scalar>(
    frame: &FrameSpec,
    torsion: &TorsionField<C>,
    a: S,
    b: S,
) -> ConnectionCoeffs<S> {
    let mut conn = levi_civita(frame);
    conn.label = torsion.label().to_string();
    conn.torsion = torsion.at(a, b);
    conn.params = (a, b);
    conn
}

impl<S: Scalar> ConnectionCoeffs<S> {
    pub fn frame(&self) -> &FrameSpec {
        &self.frame
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> (S, S) {
        self.params
    }

    /// Levi-Civita part of `Γ^k_ij`.
    pub fn lc_part(&self, k: usize, i: usize, j: usize) -> &ScalarField {
        &self.lc[k][i][j]
    }

    /// Torsion part `T^k_ij`, constant over the chart.
    pub fn torsion_part(&self) -> &Table3<S> {
        &self.torsion
    }

    /// Full coefficient `Γ^k_ij` as a field.
    pub fn coefficient(&self, k: usize, i: usize, j: usize) -> ScalarField {
        &self.lc[k][i][j] + &ScalarField::constant(self.torsion[k][i][j].to_f64_lossy())
    }

    pub fn lc_at(&self, p: &ChartPoint<S>) -> Table3<S> {
        let mut out = table3(S::zero());
        for k in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    out[k][i][j] = self.lc[k][i][j].eval(p);
                }
            }
        }
        out
    }

    pub fn gamma_at(&self, p: &ChartPoint<S>) -> Table3<S> {
        let mut out = self.lc_at(p);
        for k in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    out[k][i][j] = out[k][i][j] + self.torsion[k][i][j];
                }
            }
        }
        out
    }

    /// `d[i][k][j][l] = e_i(Γ^k_jl)` by forward-mode AD.
    pub fn frame_derivatives_at(&self, p: &ChartPoint<S>) -> [Table3<S>; DIM] {
        let mut out = [table3(S::zero()); DIM];
        for (i, slot) in out.iter_mut().enumerate() {
            for k in 0..DIM {
                for j in 0..DIM {
                    for l in 0..DIM {
                        let f = &self.lc[k][j][l];
                        if !f.is_zero() {
                            slot[k][j][l] = self.frame.apply(i, f, p);
                        }
                    }
                }
            }
        }
        out
    }

    /// Same as [`Self::frame_derivatives_at`] with coordinate derivatives replaced by
    /// central differences of step `h`.
    pub fn frame_derivatives_fd(&self, p: &ChartPoint<S>, h: S) -> Result<[Table3<S>; DIM]> {
        let two = S::lit(2.0);
        let theta = p.theta();
        if !(theta - two * h > S::zero() && theta + two * h < S::PI()) {
            return invalid(format!(
                "point theta = {theta} is closer than 2*step = {} to the chart boundary",
                two * h
            ));
        }
        let mut coord_grad = [table3(S::zero()); DIM];
        for (m, slot) in coord_grad.iter_mut().enumerate() {
            let plus = self.lc_at(&p.shifted(m, h)?);
            let minus = self.lc_at(&p.shifted(m, -h)?);
            for k in 0..DIM {
                for j in 0..DIM {
                    for l in 0..DIM {
                        slot[k][j][l] = (plus[k][j][l] - minus[k][j][l]) / (two * h);
                    }
                }
            }
        }
        let mut out = [table3(S::zero()); DIM];
        for (i, slot) in out.iter_mut().enumerate() {
            let e: [S; DIM] = std::array::from_fn(|m| self.frame.vector(i, m).eval(p));
            for k in 0..DIM {
                for j in 0..DIM {
                    for l in 0..DIM {
                        slot[k][j][l] = (0..DIM)
                            .fold(S::zero(), |acc, m| acc + e[m] * coord_grad[m][k][j][l]);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `∇_{e_dir} Σ_j f^j e_j = Σ_j (e_dir(f^j) + Σ_k f^k Γ^j_{dir,k}) e_j` at `p`.
pub fn covariant_derivative<S: Scalar>(
    conn: &ConnectionCoeffs<S>,
    direction: usize,
    field: &[ScalarField; DIM],
    p: &ChartPoint<S>,
) -> Result<[S; DIM]> {
    if direction >= DIM {
        return invalid(format!("direction {direction} out of range 0..{DIM}"));
    }
    let gamma = conn.gamma_at(p);
    let values: [S; DIM] = std::array::from_fn(|k| field[k].eval(p));
    Ok(std::array::from_fn(|j| {
        let transport = (0..DIM).fold(S::zero(), |acc, k| acc + values[k] * gamma[j][direction][k]);
        conn.frame().apply(direction, &field[j], p) + transport
    }))
}

/// `max |Γ^k_ij + Γ^j_ik|` over the grid; zero exactly for metric connections.
pub fn metric_compatibility_residual<S: Scalar>(
    conn: &ConnectionCoeffs<S>,
    grid: &GridSpec,
) -> Result<S> {
    let mut worst = S::zero();
    for p in grid.points::<S>()? {
        let g = conn.gamma_at(&p);
        for k in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    worst = worst.max((g[k][i][j] + g[j][i][k]).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// `Tor(e_i, e_j) = ∇_i e_j − ∇_j e_i − [e_i, e_j]`, as `[k][i][j]`.
pub fn geometric_torsion<S: Scalar>(conn: &ConnectionCoeffs<S>, p: &ChartPoint<S>) -> Table3<S> {
    let g = conn.gamma_at(p);
    let c = conn.frame().structure_at(p);
    let mut out = table3(S::zero());
    for k in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                out[k][i][j] = g[k][i][j] - g[k][j][i] - c[k][i][j];
            }
        }
    }
    out
}
