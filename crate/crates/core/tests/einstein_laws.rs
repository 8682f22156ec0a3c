mod common;

use calibra::einstein::{fit_quadratic, Branch, ContradictionKind, Status};
use calibra::{
    build_s2xt2, fit_ricci_polynomials, harmonic_torsion, paper_torsion, solve_einstein, zero_torsion, ChartPoint,
    Point, Poly, Polys, Ricci, Torsion, DIM,
};
use proptest::prelude::*;

fn grid_sample(n: usize) -> Vec<Point> {
    let all = common::default_grid_points();
    let step = all.len() / n;
    (0..n).map(|i| all[i * step + i]).collect()
}

#[test]
fn fitted_polynomials_are_point_independent_for_parallel_families() {
    let frame = build_s2xt2(1.0).unwrap();
    let families: [Torsion; 2] = [zero_torsion(), harmonic_torsion()];
    for t in &families {
        let points = grid_sample(5);
        let base = fit_ricci_polynomials(t, &frame, &points[0]).unwrap();
        for p in &points[1..] {
            assert!(base.max_coeff_diff(&fit_ricci_polynomials(t, &frame, p).unwrap()) < 1e-9, "{}", t.label());
        }
    }
}

#[test]
fn quadratic_fit_is_exact() {
    let coeffs = prop::array::uniform6(-5.0..5.0f64);
    common::check(30, 50, coeffs, |c| {
        let target = Poly::new(c);
        let fitted: Polys = fit_quadratic("synthetic", |a, b| {
            let mut entries = [[0.0; DIM]; DIM];
            entries[1][3] = target.eval(a, b);
            Ok(Ricci { entries })
        })
        .unwrap();
        for (x, y) in fitted.get(1, 3).coeffs.iter().zip(&c) {
            prop_assert!((x - y).abs() < 1e-10 || (y.abs() < 1e-10 && *x == 0.0));
        }
        Ok(())
    });
}

#[test]
fn planted_solutions_are_found_exactly() {
    // diag(p − s, q − s, ..) with generic roots inside the box.
    let strategy = (0.2..2.5f64, 0.2..2.5f64);
    common::check(31, 12, strategy, |(ra, rb)| {
        let mut entries = [[Poly::zero(); DIM]; DIM];
        entries[0][0] = Poly::new([-ra * ra, 0.0, 0.0, 1.0, 0.0, 0.0]);
        entries[1][1] = Poly::new([-rb * rb, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let verdict = solve_einstein(&Polys { entries });
        prop_assert_eq!(verdict.status, Status::Solvable);
        prop_assert_eq!(verdict.solutions.len(), 4);
        for s in &verdict.solutions {
            prop_assert!((s.a.abs() - ra).abs() < 1e-8 && (s.b.abs() - rb).abs() < 1e-8);
            prop_assert!(s.residual < 1e-9);
        }
        Ok(())
    });
}

#[test]
fn paper_family_certificate_splits_on_ric12() {
    let frame = build_s2xt2(1.0).unwrap();
    for p in grid_sample(3) {
        let verdict = solve_einstein(&fit_ricci_polynomials(&paper_torsion::<f64>(), &frame, &p).unwrap());
        assert_eq!(verdict.status, Status::Infeasible);
        let cert = verdict.certificate.unwrap();
        let binding = cert.binding.as_ref().unwrap();
        assert_eq!(binding.entry, "Ric12");
        assert_eq!(binding.poly.coefficient("ab").map(f64::abs), Some(2.0));
        for branch in [Branch::AZero, Branch::BZero] {
            assert!(cert.on_branch(branch).any(|c| c.kind == ContradictionKind::LambdaClash));
        }
    }
}

#[test]
fn exact_rational_torsion_gives_the_same_fit() {
    let frame = build_s2xt2(1.0).unwrap();
    let p = ChartPoint::new(1.2, 0.0, 0.0, 0.0).unwrap();
    let exact = fit_ricci_polynomials(&harmonic_torsion::<num_rational::Rational64>(), &frame, &p).unwrap();
    let float = fit_ricci_polynomials(&harmonic_torsion::<f64>(), &frame, &p).unwrap();
    assert_eq!(exact.max_coeff_diff(&float), 0.0);
}
