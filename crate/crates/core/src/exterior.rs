//! Exterior algebra on the orthonormal coframe `{e^1..e^4}`.
//!
//! Basis forms `e^I = e^{i_1} ∧ … ∧ e^{i_k}` with `i_1 < … < i_k` are keyed by
//! the bit mask of `I`. Indices are zero-based throughout the library.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::chart::{ChartPoint, FrameSpec, ScalarField, DIM};
use crate::error::{invalid, Result};
use crate::grid::GridSpec;
use crate::scalar::Scalar;

const FULL: u8 = (1 << DIM) - 1;

fn bits(mask: u8) -> impl Iterator<Item = usize> {
    (0..DIM).filter(move |i| mask & (1 << i) != 0)
}

/// Sign of the permutation that sorts the concatenation `(I, J)` of two
/// disjoint increasing index lists.
fn merge_sign(a: u8, b: u8) -> f64 {
    let inversions: usize = bits(a).map(|i| bits(b).filter(|&j| i > j).count()).sum();
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A degree-`k` form with [`ScalarField`] coefficients over the coframe.
#[derive(Clone, Debug)]
pub struct FrameForm {
    degree: usize,
    terms: BTreeMap<u8, ScalarField>,
}

impl FrameForm {
    pub fn zero(degree: usize) -> Result<Self> {
        if degree > DIM {
            return invalid(format!("form degree {degree} exceeds dimension {DIM}"));
        }
        Ok(FrameForm { degree, terms: BTreeMap::new() })
    }

    pub fn scalar(f: ScalarField) -> Self {
        let mut form = FrameForm { degree: 0, terms: BTreeMap::new() };
        form.accumulate(0, f);
        form
    }

    /// `e^{i_1} ∧ … ∧ e^{i_k}` for arbitrary (unsorted) indices; repeated
    /// indices give the zero form.
    pub fn basis(indices: &[usize]) -> Result<Self> {
        if indices.len() > DIM {
            return invalid(format!("form degree {} exceeds dimension {DIM}", indices.len()));
        }
        let mut form = FrameForm::scalar(ScalarField::one());
        for &i in indices {
            if i >= DIM {
                return invalid(format!("coframe index {i} out of range 0..{DIM}"));
            }
            let mut e = FrameForm { degree: 1, terms: BTreeMap::new() };
            e.accumulate(1 << i, ScalarField::one());
            form = form.wedge(&e)?;
        }
        Ok(form)
    }

    /// `f · e^I` for strictly increasing `indices`.
    pub fn monomial(f: ScalarField, indices: &[usize]) -> Result<Self> {
        Ok(FrameForm::basis(indices)?.scale(&f))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Nonzero terms as `(sorted indices, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &ScalarField)> {
        self.terms.iter().map(|(m, f)| (bits(*m).collect(), f))
    }

    /// Coefficient of `e^I` for strictly increasing `indices`.
    pub fn coefficient(&self, indices: &[usize]) -> ScalarField {
        let mask = indices.iter().fold(0u8, |m, &i| m | (1 << i));
        self.terms.get(&mask).cloned().unwrap_or_else(ScalarField::zero)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, mask: u8, f: ScalarField) {
        if f.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&mask) {
            Some(prev) => prev + f,
            None => f,
        };
        if !sum.is_zero() {
            self.terms.insert(mask, sum);
        }
    }

    pub fn add(&self, other: &FrameForm) -> Result<FrameForm> {
        if self.degree != other.degree {
            return invalid(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            ));
        }
        let mut out = self.clone();
        for (m, f) in &other.terms {
            out.accumulate(*m, f.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> FrameForm {
        self.scale(&ScalarField::constant(-1.0))
    }

    pub fn sub(&self, other: &FrameForm) -> Result<FrameForm> {
        self.add(&other.neg())
    }

    pub fn scale(&self, f: &ScalarField) -> FrameForm {
        let mut out = FrameForm { degree: self.degree, terms: BTreeMap::new() };
        for (m, g) in &self.terms {
            out.accumulate(*m, f * g);
        }
        out
    }

    /// Graded-commutative product.
    pub fn wedge(&self, other: &FrameForm) -> Result<FrameForm> {
        let degree = self.degree + other.degree;
        if degree > DIM {
            return invalid(format!(
                "wedge of degrees {} and {} exceeds dimension {DIM}",
                self.degree, other.degree
            ));
        }
        let mut out = FrameForm { degree, terms: BTreeMap::new() };
        for (&a, f) in &self.terms {
            for (&b, g) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                out.accumulate(a | b, (f * g).scale(merge_sign(a, b)));
            }
        }
        Ok(out)
    }

    /// Hodge star for the identity metric and orientation `e^1 ∧ e^2 ∧ e^3 ∧ e^4`:
    /// `⋆e^I = sign(I, I^c) e^{I^c}`.
    pub fn hodge_star(&self) -> FrameForm {
        let mut out = FrameForm { degree: DIM - self.degree, terms: BTreeMap::new() };
        for (&m, f) in &self.terms {
            let comp = FULL & !m;
            out.accumulate(comp, f.clone().scale(merge_sign(m, comp)));
        }
        out
    }

    /// `d(e^I)` from `d e^k = −Σ_{i<j} c^k_ij e^i ∧ e^j` and the Leibniz rule.
    fn basis_derivative(mask: u8, frame: &FrameSpec) -> FrameForm {
        let degree = mask.count_ones() as usize + 1;
        let mut out = FrameForm { degree, terms: BTreeMap::new() };
        for (r, k) in bits(mask).enumerate() {
            let before = mask & ((1u8 << k) - 1);
            let after = mask & !((1u8 << (k + 1)) - 1);
            let position_sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            for p in 0..DIM {
                for q in (p + 1)..DIM {
                    let pq = (1u8 << p) | (1u8 << q);
                    if pq & (before | after) != 0 {
                        continue;
                    }
                    let c = frame.structure(k, p, q);
                    if c.is_zero() {
                        continue;
                    }
                    let sign = position_sign
                        * merge_sign(before, pq)
                        * merge_sign(before | pq, after);
                    out.accumulate(before | pq | after, c.clone().scale(-sign));
                }
            }
        }
        out
    }

    /// Exterior derivative with coefficient derivatives `e_i(f)` taken by AD.
    pub fn exterior_derivative(&self, frame: &FrameSpec) -> Result<FrameForm> {
        if self.degree >= DIM {
            return invalid("exterior derivative requires degree <= 3");
        }
        let mut out = FrameForm { degree: self.degree + 1, terms: BTreeMap::new() };
        for (&m, f) in &self.terms {
            for i in 0..DIM {
                if m & (1 << i) != 0 {
                    continue;
                }
                let ei_f = frame.directional(i, f);
                out.accumulate(m | (1 << i), ei_f.scale(merge_sign(1 << i, m)));
            }
            for (&mm, g) in &Self::basis_derivative(m, frame).terms {
                out.accumulate(mm, f * g);
            }
        }
        Ok(out)
    }

    /// `δ = −⋆d⋆`, the formal adjoint of `d` in dimension 4.
    pub fn codifferential(&self, frame: &FrameSpec) -> Result<FrameForm> {
        if self.degree == 0 {
            return invalid("codifferential requires degree >= 1");
        }
        Ok(self.hodge_star().exterior_derivative(frame)?.hodge_star().neg())
    }

    /// Coefficient values at `p`, keyed by sorted indices.
    pub fn eval_at<S: Scalar>(&self, p: &ChartPoint<S>) -> Vec<(Vec<usize>, S)> {
        self.terms().map(|(idx, f)| (idx, f.eval(p))).collect()
    }

    pub fn max_abs_at<S: Scalar>(&self, p: &ChartPoint<S>) -> S {
        self.terms
            .values()
            .fold(S::zero(), |acc, f| acc.max(f.eval(p).abs()))
    }

    pub fn max_abs_over<S: Scalar>(&self, points: &[ChartPoint<S>]) -> S {
        points.iter().fold(S::zero(), |acc, p| acc.max(self.max_abs_at(p)))
    }
}

/// Sup-norm residuals of `dα` and `δα` over a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicityReport<S> {
    pub max_d: S,
    pub max_delta: S,
    pub points: usize,
    pub grid: GridSpec,
}

impl<S: Scalar> HarmonicityReport<S> {
    pub fn is_harmonic(&self, tol: S) -> bool {
        self.max_d < tol && self.max_delta < tol
    }
}

pub fn check_harmonic<S: Scalar>(
    alpha: &FrameForm,
    frame: &FrameSpec,
    grid: &GridSpec,
) -> Result<HarmonicityReport<S>> {
    let points = grid.points::<S>()?;
    let max_d = if alpha.degree() < DIM {
        alpha.exterior_derivative(frame)?.max_abs_over(&points)
    } else {
        S::zero()
    };
    let max_delta = if alpha.degree() > 0 {
        alpha.codifferential(frame)?.max_abs_over(&points)
    } else {
        S::zero()
    };
    Ok(HarmonicityReport { max_d, max_delta, points: points.len(), grid: *grid })
}
