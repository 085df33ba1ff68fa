use std::fmt::Write as _;

use attrest::expansion::lemma_moment;
use attrest::sampling::enumerate_exact_capped;
use attrest::{
    engine_derived, ApproxResult, EstimatorSpec, ExactResult, Family, JointFourthForm,
    MomentProvider, MomentTable,
};
use serde::Serialize;

use super::{describe, load, resolve, Outcome, ParameterSource, PopulationSummary};
use crate::args::EnumerateArgs;
use crate::error::CliError;
use crate::report::{num, opt_num, Report};

/// One design moment by enumeration next to its lemma forms.
#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub a: usize,
    pub b: usize,
    pub enumerated: f64,
    pub lemma: f64,
    /// Alternative joint fourth-order form, for `a + b = 4`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma_alternative: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerateRow {
    pub family: Family,
    pub label: &'static str,
    pub spec: EstimatorSpec,
    pub parameter_source: ParameterSource,
    pub exact: ExactResult,
    pub engine_enumerated: ApproxResult,
    pub engine_lemma: ApproxResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerateResults {
    pub population: PopulationSummary,
    pub subsets: u128,
    pub moments: Vec<MomentRow>,
    pub rows: Vec<EnumerateRow>,
}

pub fn enumerate(args: &EnumerateArgs) -> Result<Outcome, CliError> {
    let loaded = load(&args.population)?;
    let (ms, dc) = (&loaded.moments, &loaded.design);
    let n = args.population.n;
    let resolved = resolve(&args.estimators, args.order, ms, dc, &args.search)?;
    let table = MomentTable::enumerate(&loaded.population, n, args.cap)?;

    let mut moments = Vec::new();
    for degree in 2..=4 {
        for a in 0..=degree.min(2) {
            let b = degree - a;
            moments.push(MomentRow {
                a,
                b,
                enumerated: table.get(a, b),
                lemma: lemma_moment(ms, dc, JointFourthForm::Printed, a, b),
                lemma_alternative: (degree == 4)
                    .then(|| lemma_moment(ms, dc, JointFourthForm::Exact, a, b)),
            });
        }
    }

    let enumerated = MomentProvider::Enumerated(table.clone());
    let lemma = MomentProvider::lemma(ms.clone(), *dc);
    let mut rows = Vec::with_capacity(resolved.len());
    for r in resolved {
        let exact =
            enumerate_exact_capped(&loaded.population, n, &r.spec, args.policy.into(), args.cap)?;
        rows.push(EnumerateRow {
            family: r.spec.family(),
            label: r.spec.family().label(),
            spec: r.spec,
            parameter_source: r.source,
            exact,
            engine_enumerated: engine_derived(&r.spec, &enumerated),
            engine_lemma: engine_derived(&r.spec, &lemma),
        });
    }

    let results = EnumerateResults {
        population: PopulationSummary::new(ms, dc),
        subsets: table.subsets,
        moments,
        rows,
    };
    let report = Report::new("enumerate", args, None, vec![loaded.digest], results);
    let text = report.render(args.output.format, to_text)?;
    Ok(Outcome::success(text, args.output.output.clone()))
}

fn to_text(results: &EnumerateResults) -> String {
    let mut out = results.population.to_text();
    let _ = writeln!(out, "subsets enumerated: {}", results.subsets);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<8} {:>16} {:>16} {:>16}",
        "E[e0^a e1^b]", "enumerated", "lemma", "alternative"
    );
    for m in &results.moments {
        let _ = writeln!(
            out,
            "({},{})        {:>16} {:>16} {:>16}",
            m.a,
            m.b,
            num(m.enumerated),
            num(m.lemma),
            opt_num(m.lemma_alternative)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<4} {:<28} {:>14} {:>14} {:>14} {:>14} {:>10}",
        "est", "parameters", "exact bias", "exact mse", "bias2 (enum)", "mse2 (enum)", "skipped"
    );
    for row in &results.rows {
        let _ = writeln!(
            out,
            "{:<4} {:<28} {:>14} {:>14} {:>14} {:>14} {:>10}",
            row.label,
            describe(&row.spec),
            num(row.exact.bias),
            num(row.exact.mse),
            opt_num(row.engine_enumerated.bias2),
            opt_num(row.engine_enumerated.mse2),
            row.exact.degenerate_count
        );
    }
    out
}
