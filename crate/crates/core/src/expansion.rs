//! First- and second-order bias/MSE approximations.
//!
//! The engine derives every approximation from the shape coefficients
//! `h_1..h_4` and a [`MomentProvider`]. With `t = Ȳ(1 + e0) h(1 + e1)` the
//! relative error is
//!
//! ```text
//! (t − Ȳ)/Ȳ = e0 + Σ h_j e1^j + e0 Σ h_j e1^j
//! ```
//!
//! and "second order" keeps expectation terms of total degree ≤ 4.
//!
//! [`as_printed`] evaluates the published closed forms verbatim so the two
//! can be diffed by [`discrepancy_report`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{solanki_k, EstimatorSpec, Family};
use crate::numeric::relative_difference;
use crate::population::{DesignCoefficients, MomentSet};
use crate::sampling::MomentTable;

/// Relative tolerance used by [`discrepancy_report`] verdicts.
pub const DISCREPANCY_TOLERANCE: f64 = 1e-9;

/// Approximation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn as_u8(self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::InvalidParameter(format!(
                "order must be 1 or 2, got {v}"
            ))),
        }
    }
}

/// Which combination stands in for `E[e0² e1²]` in the lemma-based provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointFourthForm {
    /// `L3 C22 + 3 L4 (C20 C02 + C11²)`, the combination the published MSE
    /// expressions consume.
    #[default]
    Printed,
    /// `L3 C22 + L4 (C20 C02 + 2 C11²)`, exact under SRSWOR.
    Exact,
}

/// Source of the design moments `E[e0^a e1^b]`, `a + b ≤ 4`.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentProvider {
    Lemma {
        moments: MomentSet,
        design: DesignCoefficients,
        joint: JointFourthForm,
    },
    Enumerated(MomentTable),
}

impl MomentProvider {
    pub fn lemma(moments: MomentSet, design: DesignCoefficients) -> Self {
        MomentProvider::Lemma {
            moments,
            design,
            joint: JointFourthForm::default(),
        }
    }

    pub fn lemma_with(
        moments: MomentSet,
        design: DesignCoefficients,
        joint: JointFourthForm,
    ) -> Self {
        MomentProvider::Lemma {
            moments,
            design,
            joint,
        }
    }

    pub fn ybar(&self) -> f64 {
        match self {
            MomentProvider::Lemma { moments, .. } => moments.ybar,
            MomentProvider::Enumerated(t) => t.ybar,
        }
    }

    /// `E[e0^a e1^b]`. Panics if `a + b > 4`.
    pub fn moment(&self, a: usize, b: usize) -> f64 {
        match self {
            MomentProvider::Enumerated(t) => t.get(a, b),
            MomentProvider::Lemma {
                moments,
                design,
                joint,
            } => lemma_moment(moments, design, *joint, a, b),
        }
    }
}

/// Lemma forms of `E[e0^a e1^b]`. `e0` pairs with the y index of `C`,
/// `e1` with the attribute index.
pub fn lemma_moment(
    ms: &MomentSet,
    dc: &DesignCoefficients,
    joint: JointFourthForm,
    a: usize,
    b: usize,
) -> f64 {
    let c = |p: usize, q: usize| ms.c(p, q);
    match a + b {
        0 => 1.0,
        1 => 0.0,
        2 => dc.l1 * c(b, a),
        3 => dc.l2 * c(b, a),
        4 => {
            let pairing = match (a, b) {
                (0, 4) => 3.0 * c(2, 0) * c(2, 0),
                (1, 3) => 3.0 * c(2, 0) * c(1, 1),
                (2, 2) => match joint {
                    JointFourthForm::Printed => 3.0 * (c(2, 0) * c(0, 2) + c(1, 1) * c(1, 1)),
                    JointFourthForm::Exact => c(2, 0) * c(0, 2) + 2.0 * c(1, 1) * c(1, 1),
                },
                (3, 1) => 3.0 * c(0, 2) * c(1, 1),
                (4, 0) => 3.0 * c(0, 2) * c(0, 2),
                _ => unreachable!(),
            };
            dc.l3 * c(b, a) + dc.l4 * pairing
        }
        _ => panic!("moment ({a},{b}) exceeds total degree 4"),
    }
}

/// How an [`ApproxResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    EngineDerived,
    AsPrinted,
}

/// Bias (units of Ȳ) and MSE (units of Ȳ²) approximations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub bias1: f64,
    pub mse1: f64,
    pub bias2: Option<f64>,
    pub mse2: Option<f64>,
    pub method: Method,
}

/// `(bias1, mse1)`.
pub fn bias_mse_first_order(spec: &EstimatorSpec, mp: &MomentProvider) -> (f64, f64) {
    let [h1, h2, ..] = spec.h_coefficients();
    let ybar = mp.ybar();
    let e = |a, b| mp.moment(a, b);
    let bias = ybar * (h2 * e(0, 2) + h1 * e(1, 1));
    let mse = ybar * ybar * (e(2, 0) + h1 * h1 * e(0, 2) + 2.0 * h1 * e(1, 1));
    (bias, mse)
}

pub fn bias_second_order(spec: &EstimatorSpec, mp: &MomentProvider) -> f64 {
    let [h1, h2, h3, h4] = spec.h_coefficients();
    let e = |a, b| mp.moment(a, b);
    mp.ybar()
        * (h2 * e(0, 2) + h1 * e(1, 1) + h3 * e(0, 3) + h2 * e(1, 2) + h4 * e(0, 4) + h3 * e(1, 3))
}

/// `E[S²]` for `S = e0 + h1e1 + h2e1² + h1e0e1 + h3e1³ + h2e0e1²`, keeping
/// terms of total degree ≤ 4. The coefficients below are the exact
/// integer-coefficient expansion of that square.
pub fn mse_second_order(spec: &EstimatorSpec, mp: &MomentProvider) -> f64 {
    let [h1, h2, h3, _] = spec.h_coefficients();
    let e = |a, b| mp.moment(a, b);
    let ybar = mp.ybar();
    let degree2 = e(2, 0) + 2.0 * h1 * e(1, 1) + h1 * h1 * e(0, 2);
    let degree3 =
        (2.0 * h2 + 2.0 * h1 * h1) * e(1, 2) + 2.0 * h1 * e(2, 1) + 2.0 * h1 * h2 * e(0, 3);
    let degree4 = (h2 * h2 + 2.0 * h1 * h3) * e(0, 4)
        + (4.0 * h1 * h2 + 2.0 * h3) * e(1, 3)
        + (h1 * h1 + 2.0 * h2) * e(2, 2);
    ybar * ybar * (degree2 + degree3 + degree4)
}

/// All four engine-derived quantities.
pub fn engine_derived(spec: &EstimatorSpec, mp: &MomentProvider) -> ApproxResult {
    let (bias1, mse1) = bias_mse_first_order(spec, mp);
    ApproxResult {
        bias1,
        mse1,
        bias2: Some(bias_second_order(spec, mp)),
        mse2: Some(mse_second_order(spec, mp)),
        method: Method::EngineDerived,
    }
}

/// How the stray `α` inside the published Solanki constants `M` and `N` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaReading {
    /// `α` stands for `λ`.
    #[default]
    AsLambda,
    /// `α` is dropped (taken as zero).
    Omitted,
}

/// The published closed forms, evaluated as printed.
pub fn as_printed(
    spec: &EstimatorSpec,
    ms: &MomentSet,
    dc: &DesignCoefficients,
    order: Order,
) -> ApproxResult {
    as_printed_with(spec, ms, dc, order, AlphaReading::default())
}

pub fn as_printed_with(
    spec: &EstimatorSpec,
    ms: &MomentSet,
    dc: &DesignCoefficients,
    order: Order,
    reading: AlphaReading,
) -> ApproxResult {
    let c = |p: usize, q: usize| ms.c(p, q);
    let (l1, l2, l3, l4) = (dc.l1, dc.l2, dc.l3, dc.l4);
    let ybar = ms.ybar;
    let ybar2 = ybar * ybar;
    // recurring fourth-order combinations
    let q40 = l3 * c(4, 0) + 3.0 * l4 * c(2, 0) * c(2, 0);
    let q31 = l3 * c(3, 1) + 3.0 * l4 * c(2, 0) * c(1, 1);
    let q22 = l3 * c(2, 2) + 3.0 * l4 * (c(2, 0) * c(0, 2) + c(1, 1) * c(1, 1));

    let (bias1, mse1, bias2, mse2) = match *spec {
        EstimatorSpec::Chakrabarty { alpha: a } => {
            let bias1 = ybar * (0.5 * a * l1 * c(2, 0) - a * l1 * c(1, 1));
            let mse1 = ybar2 * (l1 * c(0, 2) + a * a * l1 * c(2, 0) - 2.0 * a * l1 * c(1, 1));
            let bias2 = ybar
                * (a / 2.0 * l1 * c(2, 0) - a * l1 * c(1, 1) - a / 6.0 * l2 * c(3, 0)
                    + a * l2 * c(2, 1)
                    - a / 6.0 * q31
                    + a / 24.0 * q40);
            let mse2 = ybar2
                * (l1 * c(0, 2) + a * a * l1 * c(2, 0)
                    - 2.0 * a * l1 * c(1, 1)
                    - a * a * l2 * c(3, 0)
                    + (2.0 * a * a + a) * l2 * c(2, 1)
                    - 2.0 * a * a * q31
                    + a * (a + 1.0) * q22
                    + 5.0 / 24.0 * a * a * q40);
            (bias1, mse1, bias2, mse2)
        }
        EstimatorSpec::KhoshnevisanRatio { g, beta: b } => {
            let bias1 = ybar * (g * (g + 1.0) / 2.0 * l1 * c(2, 0) - g * b * l1 * c(1, 1));
            let mse1 =
                ybar2 * (l1 * c(0, 2) + g * g * b * b * l1 * c(2, 0) - 2.0 * g * b * l1 * c(1, 1));
            let g2 = g * (g + 1.0) / 2.0;
            let g3 = g * (g + 1.0) * (g + 2.0) / 6.0;
            let g4 = g * (g + 1.0) * (g + 2.0) * (g + 3.0) / 24.0;
            let bias2 = ybar
                * (g2 * b * b * l1 * c(2, 0)
                    - g * b * l1 * c(1, 1)
                    - g2 * b * b * l2 * c(2, 1)
                    - g3 * b.powi(3) * l2 * c(3, 0)
                    - g3 * b.powi(3) * q31
                    + g4 * b.powi(4) * q40);
            let mse2 = ybar2
                * (l1 * c(0, 2) + g * g * b * b * l1 * c(2, 0)
                    - 2.0 * b * g * l1 * c(1, 1)
                    - b.powi(3) * g * g * (g + 1.0) * l2 * c(3, 0)
                    + g * (3.0 * g + 1.0) * b * b * l2 * c(2, 1)
                    - 2.0 * b * g * l2 * c(1, 2)
                    - (7.0 * g.powi(3) + 9.0 * g * g + 2.0 * g) / 3.0 * b.powi(3) * q31
                    + g * (2.0 * g + 1.0) * b * b * q22
                    + (2.0 * g.powi(3) + 9.0 * g * g + 10.0 * g + 3.0) / 6.0 * b.powi(4) * q40);
            (bias1, mse1, bias2, mse2)
        }
        EstimatorSpec::SahaiRay { w } => {
            let bias1 = ybar * (-w * (w - 1.0) / 2.0 * l1 * c(2, 0) - w * l1 * c(1, 1));
            let mse1 = ybar2 * (l1 * c(0, 2) + w * w * l1 * c(2, 0) - 2.0 * w * l1 * c(1, 1));
            let w2 = w * (w - 1.0) / 2.0;
            let w3 = w * (w - 1.0) * (w - 2.0) / 6.0;
            let w4 = w * (w - 1.0) * (w - 2.0) * (w - 3.0) / 24.0;
            let bias2 = ybar
                * (w2 * l1 * c(2, 0)
                    - w * l1 * c(1, 1)
                    - w2 * l2 * c(2, 1)
                    - w3 * l2 * c(3, 0)
                    - w3 * q31
                    - w4 * q40);
            let mse2 = ybar2
                * (l1 * c(0, 2) + w * w * l1 * c(2, 0)
                    - 2.0 * w * l1 * c(1, 1)
                    - w * w * (w - 1.0) * l2 * c(3, 0)
                    + w * (w + 1.0) * l2 * c(2, 1)
                    - 2.0 * w * l2 * c(1, 2)
                    + (5.0 * w.powi(3) - 3.0 * w * w - 2.0 * w) / 3.0 * q31
                    + w * q22
                    + (7.0 * w.powi(4) - 18.0 * w.powi(3) + 11.0 * w * w) / 24.0 * q40);
            (bias1, mse1, bias2, mse2)
        }
        EstimatorSpec::Solanki { lambda, delta } => {
            let k = solanki_k(lambda, delta);
            let (m, n) = solanki_printed_constants(lambda, delta, reading);
            let bias1 = ybar * (-k * (k - 1.0) / 2.0 * l1 * c(2, 0) - k * l1 * c(1, 1));
            let mse1 = ybar2 * (l1 * c(0, 2) + k * k * l1 * c(2, 0) - 2.0 * k * l1 * c(1, 1));
            let bias2 = ybar
                * (-k * (k - 1.0) / 2.0 * l1 * c(2, 0)
                    - k * l1 * c(1, 1)
                    - k * (k - 1.0) / 2.0 * l2 * c(2, 1)
                    - m * l2 * c(3, 0)
                    - m * q31
                    - n * q40);
            let mse2 = ybar2
                * (l1 * c(0, 2) + k * k * l1 * c(2, 0) - 2.0 * k * l1 * c(1, 1) + k * l2 * c(2, 1)
                    - 2.0 * k * l2 * c(1, 2)
                    + k * k * (k - 1.0) * l2 * c(3, 0)
                    + 2.0 * k * k * (k - 1.0) * q31
                    + k * q22
                    + (k * k - k).powi(2) / 4.0 * q40);
            (bias1, mse1, bias2, mse2)
        }
    };
    match order {
        Order::First => ApproxResult {
            bias1,
            mse1,
            bias2: None,
            mse2: None,
            method: Method::AsPrinted,
        },
        Order::Second => ApproxResult {
            bias1,
            mse1,
            bias2: Some(bias2),
            mse2: Some(mse2),
            method: Method::AsPrinted,
        },
    }
}

/// The published Solanki constants `(M, N)`.
pub fn solanki_printed_constants(lambda: f64, delta: f64, reading: AlphaReading) -> (f64, f64) {
    let a = match reading {
        AlphaReading::AsLambda => lambda,
        AlphaReading::Omitted => 0.0,
    };
    let d = delta;
    let l = lambda;
    let m = 0.5
        * ((d.powi(3) - 6.0 * d * d) / 24.0
            + a * (d * d - 2.0 * d) / 4.0
            + l * (l - 1.0) / 2.0 * d
            + l * (l - 1.0) * (l - 2.0) / 3.0);
    let n = 0.125
        * ((d.powi(4) - 12.0 * d.powi(3) + 12.0 * d * d) / 48.0
            + a * (d.powi(3) - 6.0 * d) / 6.0
            + l * (l - 1.0) / 2.0 * (d * d - 2.0 * d)
            + l * (l - 1.0) * (l - 2.0) * (l - 3.0) / 3.0);
    (m, n)
}

/// Bias/MSE quantity being compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Bias1,
    Mse1,
    Bias2,
    Mse2,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [
        Quantity::Bias1,
        Quantity::Mse1,
        Quantity::Bias2,
        Quantity::Mse2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Bias1 => "bias1",
            Quantity::Mse1 => "mse1",
            Quantity::Bias2 => "bias2",
            Quantity::Mse2 => "mse2",
        }
    }

    fn pick(self, r: &ApproxResult) -> f64 {
        match self {
            Quantity::Bias1 => r.bias1,
            Quantity::Mse1 => r.mse1,
            Quantity::Bias2 => r.bias2.unwrap_or(f64::NAN),
            Quantity::Mse2 => r.mse2.unwrap_or(f64::NAN),
        }
    }
}

/// Published equation number for a family and quantity.
pub fn equation_label(family: Family, quantity: Quantity) -> &'static str {
    use Family::*;
    use Quantity::*;
    match (quantity, family) {
        (Bias1, Chakrabarty) => "4.1",
        (Bias1, KhoshnevisanRatio) => "4.2",
        (Bias1, SahaiRay) => "4.3",
        (Bias1, Solanki) => "4.5",
        (Mse1, Chakrabarty) => "4.6",
        (Mse1, KhoshnevisanRatio) => "4.7",
        (Mse1, SahaiRay) => "4.8",
        (Mse1, Solanki) => "4.10",
        (Bias2, Chakrabarty) => "5.2",
        (Bias2, KhoshnevisanRatio) => "5.3",
        (Bias2, SahaiRay) => "5.4",
        (Bias2, Solanki) => "5.6",
        (Mse2, Chakrabarty) => "5.7",
        (Mse2, KhoshnevisanRatio) => "5.8",
        (Mse2, SahaiRay) => "5.9",
        (Mse2, Solanki) => "5.11",
    }
}

/// Equation label used for the alternative reading of the Solanki constants.
pub const SOLANKI_ALPHA_OMITTED_LABEL: &str = "5.6 (alpha omitted)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
}

/// One engine-vs-printed comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyEntry {
    pub family: Family,
    pub parameter: BTreeMap<String, f64>,
    pub quantity: Quantity,
    pub engine: f64,
    pub printed: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub verdict: Verdict,
    pub equation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub tolerance: f64,
    pub entries: Vec<DiscrepancyEntry>,
}

impl DiscrepancyReport {
    /// Equation labels with at least one mismatch, in first-seen order.
    pub fn mismatched_equations(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if e.verdict == Verdict::Mismatch && !out.contains(&e.equation) {
                out.push(e.equation.clone());
            }
        }
        out
    }

    /// Equation labels whose every entry matches.
    pub fn matched_equations(&self) -> Vec<String> {
        let mismatched = self.mismatched_equations();
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !mismatched.contains(&e.equation) && !out.contains(&e.equation) {
                out.push(e.equation.clone());
            }
        }
        out
    }

    pub fn entries_for<'a>(
        &'a self,
        equation: &'a str,
    ) -> impl Iterator<Item = &'a DiscrepancyEntry> {
        self.entries.iter().filter(move |e| e.equation == equation)
    }

    pub fn merge(&mut self, other: DiscrepancyReport) {
        self.entries.extend(other.entries);
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:<28} {:<6} {:>8} {:>16} {:>16} {:>11} verdict",
            "family", "parameter", "qty", "eq", "engine", "printed", "rel_diff"
        );
        for e in &self.entries {
            let params: Vec<String> = e
                .parameter
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            let _ = writeln!(
                out,
                "{:<20} {:<28} {:<6} {:>8} {:>16.9e} {:>16.9e} {:>11.3e} {}",
                e.family.name(),
                params.join(","),
                e.quantity.name(),
                e.equation,
                e.engine,
                e.printed,
                e.rel_diff,
                match e.verdict {
                    Verdict::Match => "match",
                    Verdict::Mismatch => "MISMATCH",
                }
            );
        }
        let _ = writeln!(
            out,
            "mismatched equations: {}",
            self.mismatched_equations().join(", ")
        );
        out
    }
}

/// Compares engine-derived (lemma provider) and printed values on every
/// grid point and quantity.
pub fn discrepancy_report(
    ms: &MomentSet,
    dc: &DesignCoefficients,
    grid: &[EstimatorSpec],
) -> Result<DiscrepancyReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("discrepancy grid is empty".into()));
    }
    let mp = MomentProvider::lemma(ms.clone(), *dc);
    let mut entries = Vec::new();
    for spec in grid {
        let engine = engine_derived(spec, &mp);
        let printed = as_printed(spec, ms, dc, Order::Second);
        for quantity in Quantity::ALL {
            entries.push(entry(
                spec,
                quantity,
                quantity.pick(&engine),
                quantity.pick(&printed),
                equation_label(spec.family(), quantity).to_string(),
            ));
        }
        if spec.family() == Family::Solanki {
            let alt = as_printed_with(spec, ms, dc, Order::Second, AlphaReading::Omitted);
            entries.push(entry(
                spec,
                Quantity::Bias2,
                Quantity::Bias2.pick(&engine),
                Quantity::Bias2.pick(&alt),
                SOLANKI_ALPHA_OMITTED_LABEL.to_string(),
            ));
        }
    }
    Ok(DiscrepancyReport {
        tolerance: DISCREPANCY_TOLERANCE,
        entries,
    })
}

fn entry(
    spec: &EstimatorSpec,
    quantity: Quantity,
    engine: f64,
    printed: f64,
    equation: String,
) -> DiscrepancyEntry {
    let rel_diff = relative_difference(engine, printed);
    DiscrepancyEntry {
        family: spec.family(),
        parameter: spec.params(),
        quantity,
        engine,
        printed,
        abs_diff: (engine - printed).abs(),
        rel_diff,
        verdict: if rel_diff <= DISCREPANCY_TOLERANCE {
            Verdict::Match
        } else {
            Verdict::Mismatch
        },
        equation,
    }
}

/// A small default grid: five parameter values per family.
pub fn default_grid() -> Vec<EstimatorSpec> {
    let mut grid = Vec::new();
    for alpha in [-0.5, 0.3, 0.8, 1.0, 1.7] {
        grid.push(EstimatorSpec::Chakrabarty { alpha });
    }
    for beta in [-0.4, 0.3, 0.5, 0.7, 1.3] {
        grid.push(EstimatorSpec::KhoshnevisanRatio { g: 1.5, beta });
    }
    for w in [-0.6, 0.25, 0.5, 1.4, 2.3] {
        grid.push(EstimatorSpec::SahaiRay { w });
    }
    for (lambda, delta) in [(-0.3, 0.4), (0.2, 0.5), (0.5, 1.0), (1.1, -0.6), (1.6, 2.0)] {
        grid.push(EstimatorSpec::Solanki { lambda, delta });
    }
    grid
}
