mod common;

use calibra::{
    assemble, build_s2xt2, harmonic_torsion, levi_civita, paper_torsion, ricci_trace, riemann, riemann_fd_oracle,
    Connection, Riemann, Torsion, DIM,
};
use calibra::connection::ParamCoeff;
use proptest::prelude::*;

#[test]
fn operator_antisymmetry() {
    let frame = build_s2xt2(1.0).unwrap();
    common::check(20, 30, (common::params(), common::point()), |((a, b), p)| {
        for t in [paper_torsion::<f64>(), harmonic_torsion()] {
            prop_assert!(riemann(&assemble(&frame, &t, a, b), &p).antisymmetry_residual() < 1e-12);
        }
        Ok(())
    });
}

#[test]
fn levi_civita_bianchi_and_pair_symmetry() {
    let frame = build_s2xt2(1.0).unwrap();
    let lc: Connection = levi_civita(&frame);
    common::check(21, 50, common::point(), |p| {
        let r = riemann(&lc, &p);
        prop_assert!(r.bianchi_residual() < 1e-9);
        prop_assert!(r.pair_symmetry_residual() < 1e-9);
        Ok(())
    });
}

#[test]
fn harmonic_ricci_is_symmetric_and_traces_agree() {
    let frame = build_s2xt2(1.0).unwrap();
    common::check(22, 20, (common::params(), common::point()), |((a, b), p)| {
        let r = riemann(&assemble(&frame, &harmonic_torsion::<f64>(), a, b), &p);
        let ric = r.ricci();
        prop_assert!(ric.symmetry_residual() < 1e-9);
        let sums = r.ricci_sectional_sum();
        for j in 0..DIM {
            prop_assert!((sums[j] - ric.get(j, j)).abs() < 1e-9);
        }
        let lc = riemann(&levi_civita::<f64>(&frame), &p);
        let (ric, sums) = (lc.ricci(), lc.ricci_sectional_sum());
        for j in 0..DIM {
            prop_assert!((sums[j] - ric.get(j, j)).abs() < 1e-9);
        }
        Ok(())
    });
}

/// For skew torsion `T♭`, the symmetric part of the Ricci tensor of
/// `∇^LC + T` is `Ric^LC_ij − Σ_kl T♭_ikl T♭_jkl`, independently of how `T`
/// varies. Checked against random constant 3-forms.
#[test]
fn skew_torsion_ricci_identity() {
    let radius = 1.4;
    let frame = build_s2xt2(radius).unwrap();
    let strategy = (prop::array::uniform4(-1.5..1.5f64), common::point());
    common::check(23, 40, strategy, |(w, p)| {
        // T♭ = w0 e^123 + w1 e^124 + w2 e^134 + w3 e^234
        let triples = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];
        let mut t = Torsion::zero("skew");
        for (&(i, j, k), &c) in triples.iter().zip(&w) {
            let v = ParamCoeff::new(c, 0.0, 0.0);
            t.set(i, j, k, v).unwrap();
            t.set(j, k, i, v).unwrap();
            t.set(k, i, j, v).unwrap();
        }
        prop_assert!(t.is_totally_antisymmetric());
        let flat = t.at(0.0, 0.0);
        let ric = ricci_trace(&assemble(&frame, &t, 0.0, 0.0), &p);
        for i in 0..DIM {
            for j in 0..DIM {
                let lc = if i == j && i < 2 { 1.0 / (radius * radius) } else { 0.0 };
                let mut tt = 0.0;
                for k in 0..DIM {
                    for l in 0..DIM {
                        tt += flat[l][i][k] * flat[l][j][k];
                    }
                }
                let sym = 0.5 * (ric.get(i, j) + ric.get(j, i));
                prop_assert!((sym - (lc - tt)).abs() < 1e-9, "Ric{}{}: {} vs {}", i + 1, j + 1, sym, lc - tt);
            }
        }
        Ok(())
    });
}

#[test]
fn automatic_and_finite_difference_curvature_agree() {
    let frame = build_s2xt2(1.0).unwrap();
    common::check(24, 20, (common::params(), common::point()), |((a, b), p)| {
        for conn in [
            levi_civita::<f64>(&frame),
            assemble(&frame, &paper_torsion::<f64>(), a, b),
            assemble(&frame, &harmonic_torsion::<f64>(), a, b),
        ] {
            let gap = riemann(&conn, &p).max_abs_diff(&riemann_fd_oracle(&conn, &p).unwrap());
            prop_assert!(gap < 1e-6, "{}: {gap:e}", conn.label());
        }
        Ok(())
    });
}

fn grid_spread(conn: &Connection) -> f64 {
    let points = common::default_grid_points();
    let base: Riemann = riemann(conn, &points[0]);
    points.iter().map(|p| riemann(conn, p).max_abs_diff(&base)).fold(0.0, f64::max)
}

#[test]
fn levi_civita_and_harmonic_curvature_are_point_independent() {
    let frame = build_s2xt2(1.0).unwrap();
    assert!(grid_spread(&levi_civita(&frame)) < 1e-9);
    common::check(25, 5, common::params(), |(a, b)| {
        prop_assert!(grid_spread(&assemble(&frame, &harmonic_torsion::<f64>(), a, b)) < 1e-9);
        Ok(())
    });
}

#[test]
fn paper_family_curvature_depends_on_theta() {
    // The block-mixing torsion is not parallel for ∇^LC: entries like Ric34 = −a cot θ remain.
    let frame = build_s2xt2(1.0).unwrap();
    let conn = assemble(&frame, &paper_torsion::<f64>(), 0.6, 0.4);
    assert!(grid_spread(&conn) > 0.1);
}
