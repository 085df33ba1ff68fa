use std::fmt::Write as _;

use attrest::expansion::AlphaReading;
use attrest::sampling::DEFAULT_ENUMERATION_CAP;
use attrest::{
    as_printed, bias_mse_first_order, engine_derived, enumerate_exact, ApproxResult, EstimatorSpec,
    ExactResult, Family, Method, MomentProvider, MomentTable, Order,
};
use serde::Serialize;

use super::{describe, load, resolve, Outcome, ParameterSource, PopulationSummary};
use crate::args::{AnalyzeArgs, Provider};
use crate::error::CliError;
use crate::report::{num, opt_num, Report};

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeRow {
    pub family: Family,
    pub label: &'static str,
    pub spec: EstimatorSpec,
    pub parameter_source: ParameterSource,
    pub engine: ApproxResult,
    pub printed: ApproxResult,
    /// Solanki only: printed values with the stray α in M and N dropped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_alpha_omitted: Option<ApproxResult>,
    /// Exact values by enumeration (enumerate provider only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeResults {
    pub population: PopulationSummary,
    pub provider: Provider,
    pub order: u8,
    pub rows: Vec<AnalyzeRow>,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let loaded = load(&args.population)?;
    let (ms, dc) = (&loaded.moments, &loaded.design);
    let resolved = resolve(&args.estimators, args.order, ms, dc, &args.search)?;
    let order = Order::try_from(args.order).map_err(|e| CliError::Usage(e.to_string()))?;

    let provider = match args.provider {
        Provider::Lemma => MomentProvider::lemma(ms.clone(), *dc),
        Provider::Enumerate => MomentProvider::Enumerated(MomentTable::enumerate(
            &loaded.population,
            args.population.n,
            DEFAULT_ENUMERATION_CAP,
        )?),
    };

    let mut rows = Vec::with_capacity(resolved.len());
    for r in resolved {
        let engine = match order {
            Order::First => {
                let (bias1, mse1) = bias_mse_first_order(&r.spec, &provider);
                ApproxResult {
                    bias1,
                    mse1,
                    bias2: None,
                    mse2: None,
                    method: Method::EngineDerived,
                }
            }
            Order::Second => engine_derived(&r.spec, &provider),
        };
        let printed = as_printed(&r.spec, ms, dc, order);
        let printed_alpha_omitted = (r.spec.family() == Family::Solanki && order == Order::Second)
            .then(|| {
                attrest::expansion::as_printed_with(&r.spec, ms, dc, order, AlphaReading::Omitted)
            });
        let exact = match args.provider {
            Provider::Enumerate => Some(enumerate_exact(
                &loaded.population,
                args.population.n,
                &r.spec,
                args.policy.into(),
            )?),
            Provider::Lemma => None,
        };
        rows.push(AnalyzeRow {
            family: r.spec.family(),
            label: r.spec.family().label(),
            spec: r.spec,
            parameter_source: r.source,
            engine,
            printed,
            printed_alpha_omitted,
            exact,
        });
    }

    let results = AnalyzeResults {
        population: PopulationSummary::new(ms, dc),
        provider: args.provider,
        order: args.order,
        rows,
    };
    let report = Report::new("analyze", args, None, vec![loaded.digest], results);
    let text = report.render(args.output.format, to_text)?;
    Ok(Outcome::success(text, args.output.output.clone()))
}

fn to_text(results: &AnalyzeResults) -> String {
    let mut out = results.population.to_text();
    let provider = match results.provider {
        Provider::Lemma => "engine/lemma",
        Provider::Enumerate => "engine/enum",
    };
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<4} {:<28} {:<15} {:>14} {:>14} {:>14} {:>14}",
        "est", "parameters", "method", "bias1", "mse1", "bias2", "mse2"
    );
    for row in &results.rows {
        let params = format!(
            "{} [{}]",
            describe(&row.spec),
            source_tag(row.parameter_source)
        );
        let line = |out: &mut String, label: &str, params: &str, method: &str, r: &ApproxResult| {
            let _ = writeln!(
                out,
                "{:<4} {:<28} {:<15} {:>14} {:>14} {:>14} {:>14}",
                label,
                params,
                method,
                num(r.bias1),
                num(r.mse1),
                opt_num(r.bias2),
                opt_num(r.mse2)
            );
        };
        line(&mut out, row.label, &params, provider, &row.engine);
        line(&mut out, "", "", "printed", &row.printed);
        if let Some(alt) = &row.printed_alpha_omitted {
            line(&mut out, "", "", "printed(a=0)", alt);
        }
        if let Some(exact) = &row.exact {
            let _ = writeln!(
                out,
                "{:<4} {:<28} {:<15} {:>14} {:>14}   degenerate {} of {} samples skipped",
                "",
                "",
                "exact",
                num(exact.bias),
                num(exact.mse),
                exact.degenerate_count,
                exact.subsets
            );
        }
    }
    out
}

fn source_tag(source: ParameterSource) -> &'static str {
    match source {
        ParameterSource::Given => "given",
        ParameterSource::OptimalOrder1 => "opt1",
        ParameterSource::OptimalOrder2 => "opt2",
    }
}
