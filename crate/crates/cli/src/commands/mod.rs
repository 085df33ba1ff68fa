//! Subcommand implementations. Each returns the rendered report; nothing is
//! printed here.

mod analyze;
mod enumerate;
mod optimize;
mod simulate;
mod synth;
mod verify;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use attrest::optimizer::{second_order_optimum_with, SearchAxis, SearchOptions};
use attrest::population::MAX_MOMENT_ORDER;
use attrest::{
    design_coefficients, first_order_optimum, moments, read_population, DesignCoefficients,
    EstimatorSpec, Family, MomentSet, Population,
};
use serde::Serialize;

use crate::args::{EstimatorArgs, PopulationArgs, SearchArgs};
use crate::error::{exit, CliError};
use crate::report::{num, read_input, InputDigest};

pub use analyze::analyze;
pub use enumerate::enumerate;
pub use optimize::optimize;
pub use simulate::simulate;
pub use synth::synth;
pub use verify::verify;

/// A finished command: the report text, where it goes, and the exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: String,
    pub destination: Option<PathBuf>,
    pub exit_code: u8,
}

impl Outcome {
    pub fn success(report: String, destination: Option<PathBuf>) -> Self {
        Self {
            report,
            destination,
            exit_code: exit::SUCCESS,
        }
    }
}

/// A loaded population with its moments and design coefficients.
pub struct Loaded {
    pub population: Population,
    pub digest: InputDigest,
    pub moments: MomentSet,
    pub design: DesignCoefficients,
}

pub fn load(args: &PopulationArgs) -> Result<Loaded, CliError> {
    let (bytes, digest) = read_input(&args.input)?;
    let population = read_population(bytes.as_slice())
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.input.display())))?;
    let design = design_coefficients(population.size(), args.n)?;
    let moments = moments(&population);
    Ok(Loaded {
        population,
        digest,
        moments,
        design,
    })
}

/// Where an estimator's parameters came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterSource {
    Given,
    OptimalOrder1,
    OptimalOrder2,
}

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub spec: EstimatorSpec,
    pub source: ParameterSource,
}

/// Turns `--family/--param/--optimal` into concrete estimators.
pub fn resolve(
    args: &EstimatorArgs,
    order: u8,
    ms: &MomentSet,
    dc: &DesignCoefficients,
    search: &SearchArgs,
) -> Result<Vec<Resolved>, CliError> {
    let families = args.families();
    let params: BTreeMap<String, f64> = args.params.iter().cloned().collect();
    if args.optimal {
        if let Some(name) = params.keys().find(|k| k.as_str() != "g") {
            return Err(CliError::Usage(format!(
                "--param {name} conflicts with --optimal (only g may be fixed)"
            )));
        }
        let g = params.get("g").copied().unwrap_or(1.0);
        if g == 0.0 && families.contains(&Family::KhoshnevisanRatio) {
            return Err(CliError::Usage(
                "g = 0 leaves the Khoshnevisan slope unidentified".into(),
            ));
        }
        return families
            .into_iter()
            .map(|family| optimal_spec(family, order, ms, dc, search, g))
            .collect();
    }
    let used: Vec<&str> = families
        .iter()
        .flat_map(|f| f.parameter_names().iter().copied())
        .collect();
    if let Some(name) = params.keys().find(|k| !used.contains(&k.as_str())) {
        return Err(CliError::Usage(format!(
            "parameter {name:?} is not used by any selected family"
        )));
    }
    families
        .into_iter()
        .map(|family| {
            EstimatorSpec::from_params(family, &params)
                .map(|spec| Resolved {
                    spec,
                    source: ParameterSource::Given,
                })
                .map_err(|e| CliError::Usage(format!("{e} (or use --optimal)")))
        })
        .collect()
}

fn optimal_spec(
    family: Family,
    order: u8,
    ms: &MomentSet,
    dc: &DesignCoefficients,
    search: &SearchArgs,
    g: f64,
) -> Result<Resolved, CliError> {
    if order == 1 {
        let theta = first_order_optimum(family, ms, dc)?.theta_star;
        let axis = SearchAxis::new(family, g);
        let x = axis.coordinate_of_slope(theta).unwrap_or(theta);
        return Ok(Resolved {
            spec: axis.spec_at(x),
            source: ParameterSource::OptimalOrder1,
        });
    }
    let options = SearchOptions {
        g,
        ..SearchOptions::default()
    };
    let opt = second_order_optimum_with(family, ms, dc, search.bracket, search.tol, options)
        .map_err(|e| CliError::Usage(format!("{family}: {e}; widen --bracket")))?;
    Ok(Resolved {
        spec: opt.spec,
        source: ParameterSource::OptimalOrder2,
    })
}

/// Population and design summary included in population-based reports.
#[derive(Debug, Clone, Serialize)]
pub struct PopulationSummary {
    pub size: usize,
    pub sample_size: usize,
    pub ybar: f64,
    pub proportion: f64,
    pub point_biserial: f64,
    pub cv_y: f64,
    pub moments: BTreeMap<String, f64>,
    pub design: DesignCoefficients,
    pub regression_slope: f64,
    pub regression_mse: f64,
}

impl PopulationSummary {
    pub fn new(ms: &MomentSet, dc: &DesignCoefficients) -> Self {
        let mut c = BTreeMap::new();
        for order in 2..=MAX_MOMENT_ORDER {
            for p in 0..=order {
                c.insert(format!("C{}{}", p, order - p), ms.c(p, order - p));
            }
        }
        let slope = ms.regression_slope();
        Self {
            size: ms.population_size,
            sample_size: dc.sample_size,
            ybar: ms.ybar,
            proportion: ms.proportion,
            point_biserial: ms.point_biserial(),
            cv_y: ms.cv_y(),
            moments: c,
            design: *dc,
            regression_slope: slope,
            regression_mse: ms.ybar
                * ms.ybar
                * dc.l1
                * (ms.c(0, 2) - ms.c(1, 1) * ms.c(1, 1) / ms.c(2, 0)),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "population: N={} n={} Ybar={} P={} rho_pb={} Cy={}",
            self.size,
            self.sample_size,
            num(self.ybar),
            num(self.proportion),
            num(self.point_biserial),
            num(self.cv_y)
        );
        let d = &self.design;
        let _ = writeln!(
            out,
            "design: L1={} L2={} L3={} L4={}",
            num(d.l1),
            num(d.l2),
            num(d.l3),
            num(d.l4)
        );
        let _ = writeln!(
            out,
            "regression optimum: theta=C11/C20={} mse={}",
            num(self.regression_slope),
            num(self.regression_mse)
        );
        out
    }
}

pub fn describe(spec: &EstimatorSpec) -> String {
    spec.params()
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}
