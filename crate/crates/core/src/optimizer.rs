//! Tuning-parameter optimization.
//!
//! First order has the closed-form optimum `θ* = C11/C20` for every family.
//! Second order is searched numerically: a coarse grid scan (which always
//! includes the first-order optimum when it lies in the bracket) followed by
//! golden-section refinement around the best interior grid point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{EstimatorSpec, Family};
use crate::expansion::{mse_second_order, MomentProvider};
use crate::population::{DesignCoefficients, MomentSet};

pub const DEFAULT_BRACKET: (f64, f64) = (-5.0, 5.0);
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_GRID_POINTS: usize = 201;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumResult {
    pub family: Family,
    /// Optimal slope: α, gβ, w or k.
    pub theta_star: f64,
    /// The estimator at the optimum.
    pub spec: EstimatorSpec,
    pub mse_at_optimum: f64,
    pub order: u8,
    pub bracket_used: Option<(f64, f64)>,
    pub iterations: usize,
}

/// Closed-form first-order optimum. For the Khoshnevisan family only the
/// product `gβ` is identified; the returned spec uses `g = 1`.
pub fn first_order_optimum(
    family: Family,
    ms: &MomentSet,
    dc: &DesignCoefficients,
) -> Result<OptimumResult> {
    let (c20, c11, c02) = (ms.c(2, 0), ms.c(1, 1), ms.c(0, 2));
    if c20 == 0.0 {
        return Err(Error::DegenerateMoments);
    }
    let theta = c11 / c20;
    let mse = ms.ybar * ms.ybar * dc.l1 * (c02 - c11 * c11 / c20);
    Ok(OptimumResult {
        family,
        theta_star: theta,
        spec: SearchAxis::new(family, 1.0).spec_at(theta),
        mse_at_optimum: mse,
        order: 1,
        bracket_used: None,
        iterations: 0,
    })
}

/// Search settings for [`second_order_optimum_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub grid_points: usize,
    /// Fixed `g` for the Khoshnevisan family; the search runs over `β`.
    pub g: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            g: 1.0,
        }
    }
}

/// The scalar coordinate searched for each family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchAxis {
    family: Family,
    g: f64,
}

impl SearchAxis {
    pub fn new(family: Family, g: f64) -> Self {
        Self { family, g }
    }

    /// α, β (at fixed g), w, or λ = k along δ = 0.
    pub fn spec_at(&self, x: f64) -> EstimatorSpec {
        match self.family {
            Family::Chakrabarty => EstimatorSpec::Chakrabarty { alpha: x },
            Family::KhoshnevisanRatio => EstimatorSpec::KhoshnevisanRatio { g: self.g, beta: x },
            Family::SahaiRay => EstimatorSpec::SahaiRay { w: x },
            Family::Solanki => EstimatorSpec::Solanki {
                lambda: x,
                delta: 0.0,
            },
        }
    }

    /// Coordinate of the slope `θ`, if representable.
    pub fn coordinate_of_slope(&self, theta: f64) -> Option<f64> {
        match self.family {
            Family::KhoshnevisanRatio if self.g == 0.0 => None,
            Family::KhoshnevisanRatio => Some(theta / self.g),
            _ => Some(theta),
        }
    }
}

/// Second-order MSE (lemma provider) as a function of the search coordinate.
pub fn second_order_objective(
    family: Family,
    ms: &MomentSet,
    dc: &DesignCoefficients,
    g: f64,
) -> impl Fn(f64) -> f64 {
    let axis = SearchAxis::new(family, g);
    let mp = MomentProvider::lemma(ms.clone(), *dc);
    move |x| mse_second_order(&axis.spec_at(x), &mp)
}

pub fn second_order_optimum(
    family: Family,
    ms: &MomentSet,
    dc: &DesignCoefficients,
    bracket: (f64, f64),
    tol: f64,
) -> Result<OptimumResult> {
    second_order_optimum_with(family, ms, dc, bracket, tol, SearchOptions::default())
}

pub fn second_order_optimum_with(
    family: Family,
    ms: &MomentSet,
    dc: &DesignCoefficients,
    bracket: (f64, f64),
    tol: f64,
    options: SearchOptions,
) -> Result<OptimumResult> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if options.grid_points < 3 {
        return Err(Error::InvalidParameter(
            "grid needs at least 3 points".into(),
        ));
    }
    let axis = SearchAxis::new(family, options.g);
    let objective = second_order_objective(family, ms, dc, options.g);

    let mut xs = grid(lo, hi, options.grid_points);
    let seed = if ms.c(2, 0) != 0.0 {
        axis.coordinate_of_slope(ms.regression_slope())
    } else {
        None
    };
    if let Some(s) = seed.filter(|s| *s > lo && *s < hi) {
        // A seed almost on top of a grid point would leave a bracket narrower
        // than rounding noise in the objective, so it replaces that point
        // instead (the end points stay put).
        let step = (hi - lo) / (options.grid_points - 1) as f64;
        let at = xs.partition_point(|&x| x < s);
        let nearest = if at > 0 && s - xs[at - 1] < xs[at] - s {
            at - 1
        } else {
            at
        };
        if (xs[nearest] - s).abs() < 0.25 * step && nearest != 0 && nearest != xs.len() - 1 {
            xs[nearest] = s;
        } else if (xs[nearest] - s).abs() >= 0.25 * step {
            xs.insert(at, s);
        }
    }
    let values: Vec<f64> = xs.iter().map(|&x| objective(x)).collect();
    let best = argmin(&values);
    if best == 0 || best == xs.len() - 1 {
        return Err(Error::NoInteriorMinimum {
            at: xs[best],
            objective: values[best],
        });
    }

    let refined = golden_section(&objective, xs[best - 1], xs[best + 1], tol);
    let (x, fx) = if refined.value < values[best]
        || (refined.value == values[best] && refined.x < xs[best])
    {
        (refined.x, refined.value)
    } else {
        (xs[best], values[best])
    };
    let spec = axis.spec_at(x);
    Ok(OptimumResult {
        family,
        theta_star: spec.slope(),
        spec,
        mse_at_optimum: fx,
        order: 2,
        bracket_used: Some(bracket),
        iterations: refined.iterations,
    })
}

/// Two-parameter Solanki search over `(λ, δ) ∈ bracket²`: grid scan, then
/// alternating golden-section sweeps inside the neighbouring cells.
pub fn solanki_grid_optimum(
    ms: &MomentSet,
    dc: &DesignCoefficients,
    bracket: (f64, f64),
    tol: f64,
    grid_points: usize,
) -> Result<OptimumResult> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if grid_points < 3 {
        return Err(Error::InvalidParameter(
            "grid needs at least 3 points".into(),
        ));
    }
    let mp = MomentProvider::lemma(ms.clone(), *dc);
    let f =
        |lambda: f64, delta: f64| mse_second_order(&EstimatorSpec::Solanki { lambda, delta }, &mp);
    let axis = grid(lo, hi, grid_points);
    let mut best = (0, 0, f64::INFINITY);
    for (i, &lambda) in axis.iter().enumerate() {
        for (j, &delta) in axis.iter().enumerate() {
            let v = f(lambda, delta);
            if v < best.2 {
                best = (i, j, v);
            }
        }
    }
    let (i, j, mut value) = best;
    let last = grid_points - 1;
    if i == 0 || j == 0 || i == last || j == last {
        return Err(Error::NoInteriorMinimum {
            at: if i == 0 || i == last {
                axis[i]
            } else {
                axis[j]
            },
            objective: value,
        });
    }
    let (mut lambda, mut delta) = (axis[i], axis[j]);
    let mut iterations = 0;
    for _ in 0..8 {
        let r = golden_section(&|l| f(l, delta), axis[i - 1], axis[i + 1], tol);
        iterations += r.iterations;
        if r.value < value {
            lambda = r.x;
            value = r.value;
        }
        let r = golden_section(&|d| f(lambda, d), axis[j - 1], axis[j + 1], tol);
        iterations += r.iterations;
        if r.value < value {
            delta = r.x;
            value = r.value;
        }
    }
    let spec = EstimatorSpec::Solanki { lambda, delta };
    Ok(OptimumResult {
        family: Family::Solanki,
        theta_star: spec.slope(),
        spec,
        mse_at_optimum: value,
        order: 2,
        bracket_used: Some(bracket),
        iterations,
    })
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    let mut xs: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    xs[points - 1] = hi;
    xs
}

/// Index of the smallest value; ties go to the lowest index.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
struct GoldenResult {
    x: f64,
    value: f64,
    iterations: usize,
}

/// Golden-section search on `[a, b]` until the bracket is at most `tol` wide.
fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> GoldenResult {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while b - a > tol && iterations < 500 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    GoldenResult {
        x,
        value,
        iterations,
    }
}
