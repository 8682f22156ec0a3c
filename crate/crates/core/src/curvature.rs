//! Curvature of frame connections: Riemann, sectional, biorthogonal, Ricci.
//!
//! `R(X, Y)Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_{[X,Y]} Z` with the bracket term always
//! kept. In the frame this reads
//!
//! `R^l_kij = e_i(Γ^l_jk) − e_j(Γ^l_ik) + Σ_m (Γ^m_jk Γ^l_im − Γ^m_ik Γ^l_jm − c^m_ij Γ^l_mk)`.

use serde::Serialize;

use crate::chart::{ChartPoint, Table3, DIM};
use crate::connection::ConnectionCoeffs;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Default central-difference step of [`riemann_fd_oracle`].
pub const FD_STEP: f64 = 1e-5;

/// `components[l][k][i][j] = R^l_kij`, i.e. `R(e_i, e_j) e_k = Σ_l R^l_kij e_l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiemannAtPoint<S> {
    components: [[[[S; DIM]; DIM]; DIM]; DIM],
}

fn check_pair(i: usize, j: usize) -> Result<()> {
    if i >= DIM || j >= DIM {
        return invalid(format!("frame index pair ({i}, {j}) out of range 0..{DIM}"));
    }
    if i == j {
        return invalid("curvature of a plane needs two distinct frame vectors (i != j)");
    }
    Ok(())
}

/// The complementary index pair of `{i, j}` in increasing order.
pub fn complement(i: usize, j: usize) -> (usize, usize) {
    let mut rest = (0..DIM).filter(|&m| m != i && m != j);
    (rest.next().unwrap(), rest.next().unwrap())
}

impl<S: Scalar> RiemannAtPoint<S> {
    fn from_parts(gamma: &Table3<S>, derivs: &[Table3<S>; DIM], c: &Table3<S>) -> Self {
        let mut components = [[[[S::zero(); DIM]; DIM]; DIM]; DIM];
        for (l, block) in components.iter_mut().enumerate() {
            for (k, row) in block.iter_mut().enumerate() {
                for i in 0..DIM {
                    for j in 0..DIM {
                        let mut v = derivs[i][l][j][k] - derivs[j][l][i][k];
                        for m in 0..DIM {
                            v = v + gamma[m][j][k] * gamma[l][i][m]
                                - gamma[m][i][k] * gamma[l][j][m]
                                - c[m][i][j] * gamma[l][m][k];
                        }
                        row[i][j] = v;
                    }
                }
            }
        }
        RiemannAtPoint { components }
    }

    /// `R^l_kij`.
    pub fn component(&self, l: usize, k: usize, i: usize, j: usize) -> S {
        self.components[l][k][i][j]
    }

    /// Frame components of `R(e_i, e_j) e_k`.
    pub fn operator(&self, i: usize, j: usize, k: usize) -> [S; DIM] {
        std::array::from_fn(|l| self.components[l][k][i][j])
    }

    /// `g(R(e_i, e_j) e_k, e_l)`.
    pub fn lowered(&self, i: usize, j: usize, k: usize, l: usize) -> S {
        self.components[l][k][i][j]
    }

    /// `K(e_i, e_j) = g(R(e_i, e_j) e_j, e_i)`, unsymmetrised.
    pub fn sectional(&self, i: usize, j: usize) -> Result<S> {
        check_pair(i, j)?;
        Ok(self.lowered(i, j, j, i))
    }

    /// Mean of `K(e_i, e_j)` and `K(e_k, e_l)` for the complementary pair `k < l`.
    pub fn biorthogonal(&self, i: usize, j: usize) -> Result<S> {
        check_pair(i, j)?;
        let (k, l) = complement(i, j);
        Ok((self.lowered(i, j, j, i) + self.lowered(k, l, l, k)) / S::lit(2.0))
    }

    /// `Ric_ij = Σ_k g(R(e_k, e_i) e_j, e_k)`.
    pub fn ricci(&self) -> RicciMatrix<S> {
        let entries = std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..DIM).fold(S::zero(), |acc, k| acc + self.lowered(k, i, j, k)))
        });
        RicciMatrix { entries }
    }

    /// `Ric_jj = Σ_{i≠j} K(e_i, e_j)`.
    pub fn ricci_sectional_sum(&self) -> [S; DIM] {
        std::array::from_fn(|j| {
            (0..DIM)
                .filter(|&i| i != j)
                .fold(S::zero(), |acc, i| acc + self.lowered(i, j, j, i))
        })
    }

    /// All off-diagonal sectional curvatures, `[i][j] = K(e_i, e_j)`, zero on the diagonal.
    pub fn sectional_table(&self) -> [[S; DIM]; DIM] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { S::zero() } else { self.lowered(i, j, j, i) })
        })
    }

    pub fn biorthogonal_table(&self) -> [[S; DIM]; DIM] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { S::zero() } else { self.biorthogonal(i, j).unwrap() })
        })
    }

    /// `max |R^l_kij + R^l_kji|`.
    pub fn antisymmetry_residual(&self) -> S {
        let mut worst = S::zero();
        for l in 0..DIM {
            for k in 0..DIM {
                for i in 0..DIM {
                    for j in 0..DIM {
                        worst = worst.max((self.components[l][k][i][j] + self.components[l][k][j][i]).abs());
                    }
                }
            }
        }
        worst
    }

    /// `max |Σ_cyclic(ijk) R(e_i, e_j) e_k|` (first Bianchi identity, torsion-free case).
    pub fn bianchi_residual(&self) -> S {
        let mut worst = S::zero();
        for l in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        let s = self.components[l][k][i][j]
                            + self.components[l][i][j][k]
                            + self.components[l][j][k][i];
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// `max |g(R(e_i,e_j)e_k,e_l) − g(R(e_k,e_l)e_i,e_j)|`.
    pub fn pair_symmetry_residual(&self) -> S {
        let mut worst = S::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        worst = worst.max((self.lowered(i, j, k, l) - self.lowered(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        let a = self.components.iter().flatten().flatten().flatten();
        let b = other.components.iter().flatten().flatten().flatten();
        a.zip(b).fold(S::zero(), |acc, (x, y)| acc.max((*x - *y).abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RicciMatrix<S> {
    pub entries: [[S; DIM]; DIM],
}

impl<S: Scalar> RicciMatrix<S> {
    pub fn get(&self, i: usize, j: usize) -> S {
        self.entries[i][j]
    }

    pub fn diagonal(&self) -> [S; DIM] {
        std::array::from_fn(|i| self.entries[i][i])
    }

    pub fn trace(&self) -> S {
        self.diagonal().iter().fold(S::zero(), |acc, v| acc + *v)
    }

    /// `max |Ric_ij − Ric_ji|`.
    pub fn symmetry_residual(&self) -> S {
        let mut worst = S::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                worst = worst.max((self.entries[i][j] - self.entries[j][i]).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        let mut worst = S::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                worst = worst.max((self.entries[i][j] - other.entries[i][j]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_finite())
    }
}

/// Riemann tensor with `Γ`-derivatives from forward-mode AD.
pub fn riemann<S: Scalar>(conn: &ConnectionCoeffs<S>, p: &ChartPoint<S>) -> RiemannAtPoint<S> {
    RiemannAtPoint::from_parts(
        &conn.gamma_at(p),
        &conn.frame_derivatives_at(p),
        &conn.frame().structure_at(p),
    )
}

/// Independent recomputation with `Γ`-derivatives from central differences of step
/// [`FD_STEP`].
pub fn riemann_fd_oracle<S: Scalar>(
    conn: &ConnectionCoeffs<S>,
    p: &ChartPoint<S>,
) -> Result<RiemannAtPoint<S>> {
    riemann_fd_oracle_with_step(conn, p, S::lit(FD_STEP))
}

pub fn riemann_fd_oracle_with_step<S: Scalar>(
    conn: &ConnectionCoeffs<S>,
    p: &ChartPoint<S>,
    step: S,
) -> Result<RiemannAtPoint<S>> {
    let derivs = conn.frame_derivatives_fd(p, step)?;
    Ok(RiemannAtPoint::from_parts(
        &conn.gamma_at(p),
        &derivs,
        &conn.frame().structure_at(p),
    ))
}

pub fn sectional<S: Scalar>(conn: &ConnectionCoeffs<S>, p: &ChartPoint<S>, i: usize, j: usize) -> Result<S> {
    check_pair(i, j)?;
    riemann(conn, p).sectional(i, j)
}

pub fn biorthogonal<S: Scalar>(conn: &ConnectionCoeffs<S>, p: &ChartPoint<S>, i: usize, j: usize) -> Result<S> {
    check_pair(i, j)?;
    riemann(conn, p).biorthogonal(i, j)
}

pub fn ricci_trace<S: Scalar>(conn: &ConnectionCoeffs<S>, p: &ChartPoint<S>) -> RicciMatrix<S> {
    riemann(conn, p).ricci()
}

pub fn ricci_sectional_sum<S: Scalar>(conn: &ConnectionCoeffs<S>, p: &ChartPoint<S>) -> [S; DIM] {
    riemann(conn, p).ricci_sectional_sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::build_s2xt2;
    use crate::connection::{assemble, harmonic_torsion, levi_civita, paper_torsion};

    fn at(theta: f64) -> ChartPoint<f64> {
        ChartPoint::new(theta, 0.5, 2.0, 3.0).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn round_sphere_times_flat_torus() {
        let frame = build_s2xt2(1.0).unwrap();
        let r = riemann(&levi_civita::<f64>(&frame), &at(0.8));
        assert!(close(r.lowered(0, 1, 1, 0), 1.0));
        for l in 0..DIM {
            for k in 0..DIM {
                for i in 0..DIM {
                    for j in 0..DIM {
                        if [l, k, i, j].iter().any(|&m| m >= 2) {
                            assert!(r.component(l, k, i, j).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_of_radius_two_has_quarter_curvature() {
        let frame = build_s2xt2(2.0).unwrap();
        let k = sectional(&levi_civita::<f64>(&frame), &at(1.2), 0, 1).unwrap();
        assert!(close(k, 0.25));
    }

    #[test]
    fn zero_torsion_sectional_and_biorthogonal() {
        let conn = levi_civita::<f64>(&build_s2xt2(1.0).unwrap());
        let p = at(2.0);
        assert!(close(sectional(&conn, &p, 0, 1).unwrap(), 1.0));
        assert!(close(sectional(&conn, &p, 0, 2).unwrap(), 0.0));
        assert!(close(biorthogonal(&conn, &p, 0, 1).unwrap(), 0.5));
        assert!(close(biorthogonal(&conn, &p, 0, 2).unwrap(), 0.0));
        let ric = ricci_trace(&conn, &p);
        let expected = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0; 4], [0.0; 4]];
        for i in 0..DIM {
            for j in 0..DIM {
                assert!(close(ric.get(i, j), expected[i][j]));
            }
        }
        let diag = ricci_sectional_sum(&conn, &p);
        assert!(diag.iter().zip([1.0, 1.0, 0.0, 0.0]).all(|(x, y)| close(*x, y)));
    }

    #[test]
    fn coincident_indices_are_rejected() {
        let conn = levi_civita::<f64>(&build_s2xt2(1.0).unwrap());
        assert!(sectional(&conn, &at(1.0), 2, 2).is_err());
        assert!(biorthogonal(&conn, &at(1.0), 1, 1).is_err());
        assert!(sectional(&conn, &at(1.0), 0, 4).is_err());
    }

    #[test]
    fn operator_is_antisymmetric_and_vanishes_on_diagonal() {
        let frame = build_s2xt2(1.0).unwrap();
        let conn = assemble(&frame, &paper_torsion::<f64>(), 0.4, 1.1);
        let r = riemann(&conn, &at(0.7));
        assert!(r.antisymmetry_residual() < 1e-12);
        for i in 0..DIM {
            assert!(r.operator(i, i, 2).iter().all(|v| *v == 0.0));
        }
    }

    // Values below are frozen from a symbolic computation of the same
    // first-principles formula (standard frame, true brackets).
    #[test]
    fn harmonic_family_curvature() {
        let frame = build_s2xt2(1.0).unwrap();
        let (a, b) = (0.6, -0.35);
        let conn = assemble(&frame, &harmonic_torsion::<f64>(), a, b);
        let p = at(1.3);
        let r = riemann(&conn, &p);
        assert!(close(r.sectional(0, 1).unwrap(), 1.0 - a * a - b * b));
        assert!(close(r.sectional(0, 2).unwrap(), -a * a));
        assert!(close(r.sectional(0, 3).unwrap(), -b * b));
        assert!(close(r.sectional(1, 2).unwrap(), -a * a));
        assert!(close(r.sectional(1, 3).unwrap(), -b * b));
        assert!(close(r.sectional(2, 3).unwrap(), 0.0));
        let ric = r.ricci();
        let d = 1.0 - 2.0 * a * a - 2.0 * b * b;
        let expected = [
            [d, 0.0, 0.0, 0.0],
            [0.0, d, 0.0, 0.0],
            [0.0, 0.0, -2.0 * a * a, -2.0 * a * b],
            [0.0, 0.0, -2.0 * a * b, -2.0 * b * b],
        ];
        for i in 0..DIM {
            for j in 0..DIM {
                assert!(close(ric.get(i, j), expected[i][j]), "Ric[{i}][{j}]");
            }
        }
        let sums = r.ricci_sectional_sum();
        for j in 0..DIM {
            assert!(close(sums[j], ric.get(j, j)));
        }
        // K⊥(e1,e2) = (K12 + K34)/2 vanishes at a² = b² = 1/2.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let conn = assemble(&frame, &harmonic_torsion::<f64>(), h, h);
        assert!(biorthogonal(&conn, &p, 0, 1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn paper_family_curvature() {
        let frame = build_s2xt2(1.0).unwrap();
        let (a, b) = (0.7, -0.3);
        let theta = 1.0f64;
        let conn = assemble(&frame, &paper_torsion::<f64>(), a, b);
        let r = riemann(&conn, &at(theta));
        let cot = 1.0 / theta.tan();
        let s = a * a + b * b;
        let k_expected = [
            [0.0, 1.0, a * a, a * a],
            [1.0, 0.0, b * b, b * b],
            [-a * a, -b * b, 0.0, s],
            [-a * a, -b * b, s, 0.0],
        ];
        let k = r.sectional_table();
        for i in 0..DIM {
            for j in 0..DIM {
                assert!(close(k[i][j], k_expected[i][j]), "K[{i}][{j}]");
            }
        }
        let ric = r.ricci();
        let expected = [
            [1.0 - 2.0 * a * a, -2.0 * a * b, 0.0, 0.0],
            [-2.0 * a * b, 1.0 - 2.0 * b * b, 0.0, 0.0],
            [0.0, 0.0, 2.0 * s, -a * cot],
            [0.0, 0.0, a * cot, 2.0 * s],
        ];
        for i in 0..DIM {
            for j in 0..DIM {
                assert!(close(ric.get(i, j), expected[i][j]), "Ric[{i}][{j}]");
            }
        }
        // K⊥(e1,e2) = (1 + a² + b²)/2 > 0
        assert!(close(r.biorthogonal(0, 1).unwrap(), (1.0 + s) / 2.0));
        // R(e1,e3)e2 = ab e3
        let op = r.operator(0, 2, 1);
        assert!(close(op[2], a * b) && close(op[3], 0.0));
    }

    #[test]
    fn fd_oracle_agrees() {
        let frame = build_s2xt2(1.0).unwrap();
        let p = at(0.9);
        for conn in [
            levi_civita::<f64>(&frame),
            assemble(&frame, &paper_torsion::<f64>(), 1.2, -0.8),
            assemble(&frame, &harmonic_torsion::<f64>(), -0.5, 1.9),
        ] {
            let ad = riemann(&conn, &p);
            let fd = riemann_fd_oracle(&conn, &p).unwrap();
            assert!(ad.max_abs_diff(&fd) < 1e-6);
        }
        let lc = levi_civita::<f64>(&frame);
        assert!(riemann_fd_oracle(&lc, &at(1.5e-5)).is_err());
    }
}
