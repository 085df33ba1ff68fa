//! Lemma-versus-enumeration audits.
//!
//! Every deviation is scaled by the matching absolute moment
//! `E[|e0|^a |e1|^b]`, so exact zeros (e.g. `E[e1³]` at `P = 1/2`) are judged
//! against the size of the terms being averaged rather than against zero.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimator::EstimatorSpec;
use crate::expansion::{
    bias_second_order, lemma_moment, mse_second_order, JointFourthForm, MomentProvider,
};
use crate::numeric::relative_difference;
use crate::population::{design_coefficients, moments, DesignCoefficients, MomentSet, Population};
use crate::sampling::{enumerate_exact, DegeneratePolicy, MomentTable, DEFAULT_ENUMERATION_CAP};
use crate::synth::{synthesize, SynthParams};

/// Tolerance for the exact second/third-order lemma forms.
pub const LEMMA_TOLERANCE: f64 = 1e-12;
/// A fourth-order form "matches" enumeration within this scaled deviation.
pub const FOURTH_ORDER_EXACT: f64 = 1e-10;
/// Minimum agreement required of the (0,4) and (1,3) forms.
pub const FOURTH_ORDER_REQUIRED: f64 = 1e-6;
/// Tolerance for second-order engine values against enumeration.
pub const POLYNOMIAL_TOLERANCE: f64 = 1e-10;

/// Moments `(a, b)` whose lemma forms are exact under SRSWOR.
pub const LOW_ORDER_MOMENTS: [(usize, usize); 6] = [(2, 0), (1, 1), (0, 2), (1, 2), (2, 1), (0, 3)];

/// A synthetic population together with the sample size to audit it at.
#[derive(Debug, Clone)]
pub struct AuditCase {
    pub label: String,
    pub population: Population,
    pub sample_size: usize,
}

/// Seeded small populations: `N ∈ [6, 14]`, `n ∈ [2, N − 2]`, random attribute
/// count and point-biserial correlation.
pub fn sweep_cases(count: usize, seed: u64) -> Result<Vec<AuditCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let size: usize = rng.random_range(6..=14);
        let ones: usize = rng.random_range(1..size);
        let n: usize = rng.random_range(2..=size - 2);
        let rho: f64 = rng.random_range(-0.8..0.8);
        let params = SynthParams::from_targets(size, ones as f64 / size as f64, 10.0, 0.5, rho)?;
        let population = synthesize(&params, rng.random())?;
        cases.push(AuditCase {
            label: format!("synthetic-{i:02}"),
            population,
            sample_size: n,
        });
    }
    Ok(cases)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub a: usize,
    pub b: usize,
    pub form: String,
    pub enumerated: f64,
    pub formula: f64,
    /// `|enumerated − formula| / E[|e0|^a |e1|^b]`.
    pub deviation: f64,
}

fn scaled_deviation(table: &MomentTable, a: usize, b: usize, value: f64) -> f64 {
    let scale = table.absolute(a, b);
    let diff = (table.get(a, b) - value).abs();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Evaluates a candidate closed form from population moments.
pub type FormEvaluator = fn(&MomentSet, &DesignCoefficients) -> f64;

/// Name and evaluator of each fourth-order candidate form.
pub fn fourth_order_candidates() -> Vec<((usize, usize), &'static str, FormEvaluator)> {
    vec![
        ((0, 4), "L3*C40 + 3*L4*C20^2", |ms, dc| {
            lemma_moment(ms, dc, JointFourthForm::Printed, 0, 4)
        }),
        ((1, 3), "L3*C31 + 3*L4*C20*C11", |ms, dc| {
            lemma_moment(ms, dc, JointFourthForm::Printed, 1, 3)
        }),
        ((2, 2), "L3*C22 + 3*L4*(C20*C02 + C11^2)", |ms, dc| {
            lemma_moment(ms, dc, JointFourthForm::Printed, 2, 2)
        }),
        ((2, 2), "L3*C40 + 3*L4*C20", |ms, dc| {
            dc.l3 * ms.c(4, 0) + 3.0 * dc.l4 * ms.c(2, 0)
        }),
        ((2, 2), "L3*C22 + L4*(C20*C02 + 2*C11^2)", |ms, dc| {
            lemma_moment(ms, dc, JointFourthForm::Exact, 2, 2)
        }),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCheck {
    pub w: f64,
    pub quantity: String,
    pub engine: f64,
    pub exact: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseAudit {
    pub label: String,
    pub population_size: usize,
    pub sample_size: usize,
    pub subsets: u128,
    pub low_order: Vec<MomentCheck>,
    pub fourth_order: Vec<MomentCheck>,
    pub polynomial: Vec<PolynomialCheck>,
}

/// Audits one population at one sample size.
pub fn audit_case(case: &AuditCase) -> Result<CaseAudit> {
    let pop = &case.population;
    let n = case.sample_size;
    let table = MomentTable::enumerate(pop, n, DEFAULT_ENUMERATION_CAP)?;
    let ms = moments(pop);
    let dc = design_coefficients(pop.size(), n)?;

    let low_order = LOW_ORDER_MOMENTS
        .iter()
        .map(|&(a, b)| {
            let formula = lemma_moment(&ms, &dc, JointFourthForm::Printed, a, b);
            MomentCheck {
                a,
                b,
                form: format!("L{}*C{}{}", a + b - 1, b, a),
                enumerated: table.get(a, b),
                formula,
                deviation: scaled_deviation(&table, a, b, formula),
            }
        })
        .collect();

    let fourth_order = fourth_order_candidates()
        .into_iter()
        .map(|((a, b), form, eval)| {
            let formula = eval(&ms, &dc);
            MomentCheck {
                a,
                b,
                form: form.to_string(),
                enumerated: table.get(a, b),
                formula,
                deviation: scaled_deviation(&table, a, b, formula),
            }
        })
        .collect();

    let provider = MomentProvider::Enumerated(table.clone());
    let mut polynomial = Vec::new();
    for w in [1.0, 2.0] {
        let spec = EstimatorSpec::SahaiRay { w };
        let exact = enumerate_exact(pop, n, &spec, DegeneratePolicy::Abort)?;
        for (quantity, engine, truth) in [
            ("bias2", bias_second_order(&spec, &provider), exact.bias),
            ("mse2", mse_second_order(&spec, &provider), exact.mse),
        ] {
            polynomial.push(PolynomialCheck {
                w,
                quantity: quantity.to_string(),
                engine,
                exact: truth,
                rel_diff: relative_difference(engine, truth),
            });
        }
    }

    Ok(CaseAudit {
        label: case.label.clone(),
        population_size: pop.size(),
        sample_size: n,
        subsets: table.subsets,
        low_order,
        fourth_order,
        polynomial,
    })
}

/// Sweep-wide verdict for one fourth-order candidate form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourthOrderVerdict {
    pub a: usize,
    pub b: usize,
    pub form: String,
    pub max_deviation: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSweep {
    pub cases: Vec<CaseAudit>,
    pub max_low_order_deviation: f64,
    pub fourth_order_verdicts: Vec<FourthOrderVerdict>,
}

impl LemmaSweep {
    pub fn low_order_passes(&self) -> bool {
        self.max_low_order_deviation <= LEMMA_TOLERANCE
    }

    /// The (0,4) and (1,3) moments each have a candidate within 1e-6.
    pub fn fourth_order_passes(&self) -> bool {
        [(0, 4), (1, 3)].iter().all(|&(a, b)| {
            self.fourth_order_verdicts
                .iter()
                .any(|v| v.a == a && v.b == b && v.max_deviation <= FOURTH_ORDER_REQUIRED)
        })
    }

    pub fn verdict_table(&self) -> String {
        let mut out = format!(
            "{:<8} {:<36} {:>14}  verdict\n",
            "moment", "form", "max_dev"
        );
        for v in &self.fourth_order_verdicts {
            out.push_str(&format!(
                "({},{})    {:<36} {:>14.3e}  {}\n",
                v.a, v.b, v.form, v.max_deviation, v.verdict
            ));
        }
        out
    }
}

/// Runs [`audit_case`] on every case and summarizes the fourth-order forms.
pub fn lemma_sweep(cases: &[AuditCase]) -> Result<LemmaSweep> {
    let audits: Vec<CaseAudit> = cases.iter().map(audit_case).collect::<Result<_>>()?;
    let max_low = audits
        .iter()
        .flat_map(|c| c.low_order.iter().map(|m| m.deviation))
        .fold(0.0, f64::max);
    let fourth_order_verdicts = fourth_order_candidates()
        .into_iter()
        .enumerate()
        .map(|(k, ((a, b), form, _))| {
            let max_deviation = audits
                .iter()
                .map(|c| c.fourth_order[k].deviation)
                .fold(0.0, f64::max);
            let verdict = if max_deviation <= FOURTH_ORDER_EXACT {
                "exact"
            } else if max_deviation <= FOURTH_ORDER_REQUIRED {
                "approximate"
            } else {
                "mismatch"
            };
            FourthOrderVerdict {
                a,
                b,
                form: form.to_string(),
                max_deviation,
                verdict: verdict.to_string(),
            }
        })
        .collect();
    Ok(LemmaSweep {
        cases: audits,
        max_low_order_deviation: max_low,
        fourth_order_verdicts,
    })
}
