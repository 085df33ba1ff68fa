use std::fmt::Write as _;

use attrest::optimizer::{second_order_optimum_with, solanki_grid_optimum, SearchOptions};
use attrest::{first_order_optimum, Error, Family, OptimumResult};
use serde::Serialize;

use super::{describe, load, Outcome, PopulationSummary};
use crate::args::OptimizeArgs;
use crate::error::CliError;
use crate::report::{num, Report};

/// Result of a numerical search: an interior optimum or a flagged boundary.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    Interior(OptimumResult),
    Boundary { at: f64, objective: f64 },
}

impl SearchOutcome {
    fn from_result(r: attrest::Result<OptimumResult>) -> Result<Self, CliError> {
        match r {
            Ok(opt) => Ok(SearchOutcome::Interior(opt)),
            Err(Error::NoInteriorMinimum { at, objective }) => {
                Ok(SearchOutcome::Boundary { at, objective })
            }
            Err(e) => Err(e.into()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeRow {
    pub family: Family,
    pub label: &'static str,
    pub first_order: OptimumResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_order: Option<SearchOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResults {
    pub population: PopulationSummary,
    pub rows: Vec<OptimizeRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solanki_plane: Option<SearchOutcome>,
}

pub fn optimize(args: &OptimizeArgs) -> Result<Outcome, CliError> {
    let loaded = load(&args.population)?;
    let (ms, dc) = (&loaded.moments, &loaded.design);
    let families = if args.families.is_empty() {
        Family::ALL.to_vec()
    } else {
        args.families.clone()
    };
    if args.g == 0.0 && families.contains(&Family::KhoshnevisanRatio) {
        return Err(CliError::Usage(
            "g = 0 leaves the Khoshnevisan slope unidentified".into(),
        ));
    }
    let options = SearchOptions {
        grid_points: args.grid_points,
        g: args.g,
    };
    let (bracket, tol) = (args.search.bracket, args.search.tol);

    let mut rows = Vec::with_capacity(families.len());
    for family in families {
        let mut first_order = first_order_optimum(family, ms, dc)?;
        if family == Family::KhoshnevisanRatio {
            first_order.spec = attrest::EstimatorSpec::KhoshnevisanRatio {
                g: args.g,
                beta: first_order.theta_star / args.g,
            };
        }
        let second_order = if args.order == 2 {
            Some(SearchOutcome::from_result(second_order_optimum_with(
                family, ms, dc, bracket, tol, options,
            ))?)
        } else {
            None
        };
        rows.push(OptimizeRow {
            family,
            label: family.label(),
            first_order,
            second_order,
        });
    }
    let solanki_plane = if args.solanki_plane {
        Some(SearchOutcome::from_result(solanki_grid_optimum(
            ms,
            dc,
            bracket,
            tol,
            args.grid_points,
        ))?)
    } else {
        None
    };

    let results = OptimizeResults {
        population: PopulationSummary::new(ms, dc),
        rows,
        solanki_plane,
    };
    let report = Report::new("optimize", args, None, vec![loaded.digest], results);
    let text = report.render(args.output.format, to_text)?;
    Ok(Outcome::success(text, args.output.output.clone()))
}

fn outcome_text(outcome: &SearchOutcome) -> String {
    match outcome {
        SearchOutcome::Interior(opt) => format!(
            "theta*={} ({}) mse2={} iterations={}",
            num(opt.theta_star),
            describe(&opt.spec),
            num(opt.mse_at_optimum),
            opt.iterations
        ),
        SearchOutcome::Boundary { at, objective } => format!(
            "NO INTERIOR MINIMUM: best grid point is the boundary {} (mse2={})",
            num(*at),
            num(*objective)
        ),
    }
}

fn to_text(results: &OptimizeResults) -> String {
    let mut out = results.population.to_text();
    for row in &results.rows {
        let _ = writeln!(out);
        let f = &row.first_order;
        let _ = writeln!(out, "{} {}", row.label, row.family);
        let _ = writeln!(
            out,
            "  order 1: theta*={} ({}) mse1={}",
            num(f.theta_star),
            describe(&f.spec),
            num(f.mse_at_optimum)
        );
        if let Some(second) = &row.second_order {
            let _ = writeln!(out, "  order 2: {}", outcome_text(second));
        }
    }
    if let Some(plane) = &results.solanki_plane {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "t4 solanki over (lambda, delta): {}",
            outcome_text(plane)
        );
    }
    out
}
