//! Rectangular sampling grids over the chart.

use serde::{Deserialize, Serialize};

use crate::chart::{ChartPoint, DIM};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Sampling of one coordinate axis.
///
/// Periodic axes sample `[min, max)`; the others include both endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub periodic: bool,
}

impl AxisRange {
    pub fn closed(min: f64, max: f64, count: usize) -> Self {
        AxisRange { min, max, count, periodic: false }
    }

    pub fn periodic(min: f64, max: f64, count: usize) -> Self {
        AxisRange { min, max, count, periodic: true }
    }

    pub fn samples(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => {
                let steps = if self.periodic { n } else { n - 1 } as f64;
                let h = (self.max - self.min) / steps;
                (0..n).map(|i| self.min + h * i as f64).collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Axes in chart order θ, φ, x, y.
    pub axes: [AxisRange; DIM],
}

impl Default for GridSpec {
    /// θ ∈ [0.1, π − 0.1] × 5, φ ∈ [0, 2π) × 4, x, y ∈ [0, 2π) × 3.
    fn default() -> Self {
        use std::f64::consts::{PI, TAU};
        GridSpec {
            axes: [
                AxisRange::closed(0.1, PI - 0.1, 5),
                AxisRange::periodic(0.0, TAU, 4),
                AxisRange::periodic(0.0, TAU, 3),
                AxisRange::periodic(0.0, TAU, 3),
            ],
        }
    }
}

impl GridSpec {
    /// A grid consisting of the single point `p`.
    pub fn single<S: Scalar>(p: &ChartPoint<S>) -> Self {
        let c = p.coords().map(Scalar::to_f64_lossy);
        GridSpec {
            axes: c.map(|v| AxisRange::closed(v, v, 1)),
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All grid points in lexicographic (θ, φ, x, y) order.
    ///
    /// Fails when the grid is empty or a θ sample leaves (0, π).
    pub fn points<S: Scalar>(&self) -> Result<Vec<ChartPoint<S>>> {
        if self.is_empty() {
            return invalid("grid has no points");
        }
        let [t, p, x, y] = self.axes.map(|a| a.samples());
        let mut out = Vec::with_capacity(self.len());
        for &tv in &t {
            for &pv in &p {
                for &xv in &x {
                    for &yv in &y {
                        out.push(ChartPoint::new(S::lit(tv), S::lit(pv), S::lit(xv), S::lit(yv))?);
                    }
                }
            }
        }
        Ok(out)
    }
}
