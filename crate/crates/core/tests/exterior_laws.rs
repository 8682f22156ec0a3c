mod common;

use calibra::{build_s2xt2, FrameForm, FrameSpec, ScalarField, DIM};
use proptest::prelude::*;

fn subsets(k: usize) -> Vec<Vec<usize>> {
    (0u8..16)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..DIM).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Smooth coefficient built from a small vocabulary of chart functions.
fn coefficient() -> impl Strategy<Value = ScalarField> {
    let atom = (0usize..6, -2.0..2.0f64).prop_map(|(n, c)| {
        let t = ScalarField::theta();
        let base = match n {
            0 => t.clone().sin(),
            1 => t.clone().cos(),
            2 => ScalarField::coord(1).unwrap().cos(),
            3 => ScalarField::coord(2).unwrap().sin() * t.sin(),
            4 => ScalarField::coord(3).unwrap().cos() * ScalarField::coord(2).unwrap().cos(),
            _ => ScalarField::one(),
        };
        base.scale(c)
    });
    prop::collection::vec(atom, 1..3).prop_map(|v| v.into_iter().fold(ScalarField::zero(), |acc, f| acc + f))
}

fn form(k: usize) -> impl Strategy<Value = FrameForm> {
    let n = subsets(k).len();
    prop::collection::vec(prop::option::weighted(0.6, coefficient()), n).prop_map(move |coeffs| {
        let mut out = FrameForm::zero(k).unwrap();
        for (idx, c) in subsets(k).into_iter().zip(coeffs) {
            if let Some(c) = c {
                out = out.add(&FrameForm::monomial(c, &idx).unwrap()).unwrap();
            }
        }
        out
    })
}

fn frame() -> FrameSpec {
    build_s2xt2(1.0).unwrap()
}

#[test]
fn star_star_sign_law_on_every_basis_form() {
    for k in 0..=DIM {
        for idx in subsets(k) {
            let e = FrameForm::basis(&idx).unwrap();
            let sign = if (k * (DIM - k)).is_multiple_of(2) { 1.0 } else { -1.0 };
            let twice = e.hodge_star().hodge_star();
            assert_eq!(twice.coefficient(&idx).as_constant(), Some(sign), "basis {idx:?}");
            assert_eq!(twice.terms().count(), 1);
        }
    }
}

#[test]
fn inner_product_against_wedge_with_star() {
    let vol = [0, 1, 2, 3];
    for k in 0..=DIM {
        for i in subsets(k) {
            for j in subsets(k) {
                let w = FrameForm::basis(&i).unwrap().wedge(&FrameForm::basis(&j).unwrap().hodge_star()).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(w.coefficient(&vol).as_constant().unwrap_or(f64::NAN), expected, "{i:?} {j:?}");
            }
        }
    }
}

#[test]
fn leibniz_rule() {
    let frame = frame();
    let strategy = (0usize..3, 0usize..2).prop_flat_map(|(k, l)| (form(k), form(l), common::point()));
    common::check(3, 64, strategy, |(alpha, beta, p)| {
        let lhs = alpha.wedge(&beta).unwrap().exterior_derivative(&frame).unwrap();
        let sign = if alpha.degree() % 2 == 0 { 1.0 } else { -1.0 };
        let a = alpha.exterior_derivative(&frame).unwrap().wedge(&beta).unwrap();
        let b = alpha.wedge(&beta.exterior_derivative(&frame).unwrap()).unwrap().scale(&ScalarField::constant(sign));
        let rhs = a.add(&b).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs_at(&p) < 1e-9);
        Ok(())
    });
}

#[test]
fn d_squared_and_delta_squared_vanish_on_the_grid() {
    let frame = frame();
    let grid = common::default_grid_points();
    let strategy = (0usize..=2).prop_flat_map(form);
    common::check(4, 24, strategy, |alpha| {
        let dd = alpha.exterior_derivative(&frame).unwrap().exterior_derivative(&frame).unwrap();
        prop_assert!(dd.max_abs_over(&grid) < 1e-9);
        Ok(())
    });
    let strategy = (2usize..=4).prop_flat_map(form);
    common::check(5, 24, strategy, |alpha| {
        let dd = alpha.codifferential(&frame).unwrap().codifferential(&frame).unwrap();
        prop_assert!(dd.max_abs_over(&grid) < 1e-9);
        Ok(())
    });
}

#[test]
fn calibration_forms_are_harmonic() {
    let frame = frame();
    let grid = calibra::GridSpec::default();
    common::check(6, 10, common::params(), |(a, b)| {
        let omega = FrameForm::monomial(ScalarField::constant(a), &[0, 1, 2])
            .unwrap()
            .add(&FrameForm::monomial(ScalarField::constant(b), &[0, 1, 3]).unwrap())
            .unwrap();
        let report = calibra::check_harmonic::<f64>(&omega, &frame, &grid).unwrap();
        prop_assert!(report.is_harmonic(1e-9));
        Ok(())
    });
}
