#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use calibra::{ChartPoint, Point};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

/// Runs `test` on `cases` inputs drawn from `strategy` with a fixed seed.
pub fn check<S, F>(seed: u8, cases: u32, strategy: S, test: F)
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]);
    let mut runner = TestRunner::new_with_rng(config, rng);
    if let Err(e) = runner.run(&strategy, test) {
        panic!("{e}");
    }
}

/// Interior points away from the poles, where cot θ stays moderate.
pub fn point() -> impl Strategy<Value = Point> {
    (0.25..PI - 0.25, 0.0..TAU, 0.0..TAU, 0.0..TAU)
        .prop_map(|(t, p, x, y)| ChartPoint::new(t, p, x, y).unwrap())
}

pub fn params() -> impl Strategy<Value = (f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64)
}

pub fn default_grid_points() -> Vec<Point> {
    calibra::GridSpec::default().points().unwrap()
}
