use attrest::{moments, synthesize, SynthParams};

use super::Outcome;
use crate::args::SynthArgs;
use crate::error::CliError;
use crate::report::num;

/// Writes a synthetic population as CSV. With `--output` the CSV goes to the
/// file and a one-line summary is the report; otherwise the CSV is the report.
pub fn synth(args: &SynthArgs) -> Result<Outcome, CliError> {
    let params = match args.conditional {
        Some((mean0, sd0, mean1, sd1)) => SynthParams {
            size: args.size,
            proportion: args.proportion,
            mean0,
            sd0,
            mean1,
            sd1,
        },
        None => {
            SynthParams::from_targets(args.size, args.proportion, args.mean, args.cv, args.rho)?
        }
    };
    let population = synthesize(&params, args.seed)?;
    let csv = population.to_csv();
    match &args.output {
        None => Ok(Outcome::success(csv, None)),
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| CliError::io(path, e))?;
            let ms = moments(&population);
            let summary = format!(
                "wrote {}: N={} ones={} Ybar={} rho_pb={} seed={}\n",
                path.display(),
                population.size(),
                population.attribute_count(),
                num(ms.ybar),
                num(ms.point_biserial()),
                args.seed
            );
            Ok(Outcome::success(summary, None))
        }
    }
}
