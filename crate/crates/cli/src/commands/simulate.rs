use std::fmt::Write as _;

use attrest::{
    engine_derived, simulate as run_simulation, ApproxResult, EstimatorSpec, Family,
    MomentProvider, SimulationOptions, SimulationReport,
};
use serde::Serialize;

use super::{describe, load, resolve, Outcome, ParameterSource, PopulationSummary};
use crate::args::SimulateArgs;
use crate::error::CliError;
use crate::report::{num, Report};

/// `|empirical − model| / se` for each approximation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Standardized {
    pub bias1: f64,
    pub bias2: f64,
    pub mse1: f64,
    pub mse2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateRow {
    pub family: Family,
    pub label: &'static str,
    pub spec: EstimatorSpec,
    pub parameter_source: ParameterSource,
    pub simulation: SimulationReport,
    pub model: ApproxResult,
    pub standardized: Standardized,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateResults {
    pub population: PopulationSummary,
    pub rows: Vec<SimulateRow>,
}

pub fn simulate(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let loaded = load(&args.population)?;
    let (ms, dc) = (&loaded.moments, &loaded.design);
    let resolved = resolve(&args.estimators, args.order, ms, dc, &args.search)?;
    let mp = MomentProvider::lemma(ms.clone(), *dc);

    let mut options = SimulationOptions::new(args.replicates, args.seed).policy(args.policy.into());
    if let Some(threads) = args.threads {
        options = options.threads(threads);
    }

    let mut rows = Vec::with_capacity(resolved.len());
    for r in resolved {
        let simulation = run_simulation(&loaded.population, args.population.n, &r.spec, options)?;
        let model = engine_derived(&r.spec, &mp);
        let z = |empirical: f64, model: f64, se: f64| (empirical - model).abs() / se;
        let standardized = Standardized {
            bias1: z(simulation.empirical_bias, model.bias1, simulation.se_bias),
            bias2: z(
                simulation.empirical_bias,
                model.bias2.unwrap_or(f64::NAN),
                simulation.se_bias,
            ),
            mse1: z(simulation.empirical_mse, model.mse1, simulation.se_mse),
            mse2: z(
                simulation.empirical_mse,
                model.mse2.unwrap_or(f64::NAN),
                simulation.se_mse,
            ),
        };
        rows.push(SimulateRow {
            family: r.spec.family(),
            label: r.spec.family().label(),
            spec: r.spec,
            parameter_source: r.source,
            simulation,
            model,
            standardized,
        });
    }

    let results = SimulateResults {
        population: PopulationSummary::new(ms, dc),
        rows,
    };
    let report = Report::new(
        "simulate",
        args,
        Some(args.seed),
        vec![loaded.digest],
        results,
    );
    let text = report.render(args.output.format, to_text)?;
    Ok(Outcome::success(text, args.output.output.clone()))
}

fn to_text(results: &SimulateResults) -> String {
    let mut out = results.population.to_text();
    let skipped: usize = results
        .rows
        .iter()
        .map(|r| r.simulation.degenerate_count)
        .sum();
    if skipped > 0 {
        let _ = writeln!(
            out,
            "WARNING: {skipped} degenerate samples were skipped; empirical values condition on non-degenerate samples"
        );
    }
    for row in &results.rows {
        let s = &row.simulation;
        let m = &row.model;
        let z = &row.standardized;
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{} {} ({})",
            row.label,
            row.family,
            describe(&row.spec)
        );
        let _ = writeln!(
            out,
            "  replicates {}  degenerate skipped {}  effective {}",
            s.replicates,
            s.degenerate_count,
            s.effective_replicates()
        );
        let _ = writeln!(
            out,
            "  {:<6} {:>14} {:>12} {:>14} {:>8} {:>14} {:>8}",
            "", "empirical", "se", "order 1", "|z|", "order 2", "|z|"
        );
        let _ = writeln!(
            out,
            "  {:<6} {:>14} {:>12} {:>14} {:>8.2} {:>14} {:>8.2}",
            "bias",
            num(s.empirical_bias),
            num(s.se_bias),
            num(m.bias1),
            z.bias1,
            num(m.bias2.unwrap_or(f64::NAN)),
            z.bias2
        );
        let _ = writeln!(
            out,
            "  {:<6} {:>14} {:>12} {:>14} {:>8.2} {:>14} {:>8.2}",
            "mse",
            num(s.empirical_mse),
            num(s.se_mse),
            num(m.mse1),
            z.mse1,
            num(m.mse2.unwrap_or(f64::NAN)),
            z.mse2
        );
    }
    out
}
