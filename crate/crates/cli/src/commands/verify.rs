use std::fmt::Write as _;
use std::path::Path;

use attrest::expansion::{default_grid, Verdict, DISCREPANCY_TOLERANCE};
use attrest::sampling::{binomial, DEFAULT_ENUMERATION_CAP};
use attrest::verify::{lemma_sweep, sweep_cases, AuditCase, LemmaSweep, POLYNOMIAL_TOLERANCE};
use attrest::{
    design_coefficients, discrepancy_report, moments, read_population, DiscrepancyReport,
};
use serde::Serialize;

use super::Outcome;
use crate::args::VerifyArgs;
use crate::error::{exit, CliError};
use crate::report::{num, read_input, InputDigest, Report};

/// Engine-versus-printed agreement for one equation across all cases.
#[derive(Debug, Clone, Serialize)]
pub struct EquationSummary {
    pub equation: String,
    pub entries: usize,
    pub mismatches: usize,
    pub max_rel_diff: f64,
}

/// A second-order engine value that is expected to be exact but is not.
#[derive(Debug, Clone, Serialize)]
pub struct PolynomialFailure {
    pub case: String,
    pub w: f64,
    pub quantity: String,
    pub engine: f64,
    pub exact: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyResults {
    pub cases: usize,
    pub lemma: LemmaSweep,
    /// Failures of the degree-≤2 exactness checks (`w = 1`, and `w = 2` bias).
    pub polynomial_failures: Vec<PolynomialFailure>,
    /// Largest `w = 2` MSE gap: truncation of the degree-5/6 terms, reported only.
    pub max_w2_mse_gap: f64,
    pub discrepancy_tolerance: f64,
    pub equations: Vec<EquationSummary>,
    pub mismatched_equations: Vec<String>,
    pub passed: bool,
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let (cases, inputs) = match &args.input {
        Some(dir) => directory_cases(dir, args.n)?,
        None => {
            if args.cases == 0 {
                return Err(CliError::Usage("--cases must be at least 1".into()));
            }
            (sweep_cases(args.cases, args.seed)?, Vec::new())
        }
    };

    let lemma = lemma_sweep(&cases)?;
    let mut polynomial_failures = Vec::new();
    let mut max_w2_mse_gap: f64 = 0.0;
    for audit in &lemma.cases {
        for check in &audit.polynomial {
            if check.w == 2.0 && check.quantity == "mse2" {
                max_w2_mse_gap = max_w2_mse_gap.max(check.rel_diff);
            } else if check.rel_diff.is_nan() || check.rel_diff > POLYNOMIAL_TOLERANCE {
                polynomial_failures.push(PolynomialFailure {
                    case: audit.label.clone(),
                    w: check.w,
                    quantity: check.quantity.clone(),
                    engine: check.engine,
                    exact: check.exact,
                    rel_diff: check.rel_diff,
                });
            }
        }
    }

    let grid = default_grid();
    let mut combined: Option<DiscrepancyReport> = None;
    for case in &cases {
        let ms = moments(&case.population);
        let dc = design_coefficients(case.population.size(), case.sample_size)?;
        let report = discrepancy_report(&ms, &dc, &grid)?;
        match combined.as_mut() {
            Some(all) => all.merge(report),
            None => combined = Some(report),
        }
    }
    let combined = combined.expect("at least one case");
    let equations = summarize(&combined);
    let mismatched_equations = combined.mismatched_equations();

    let passed =
        lemma.low_order_passes() && lemma.fourth_order_passes() && polynomial_failures.is_empty();
    let results = VerifyResults {
        cases: cases.len(),
        lemma,
        polynomial_failures,
        max_w2_mse_gap,
        discrepancy_tolerance: DISCREPANCY_TOLERANCE,
        equations,
        mismatched_equations,
        passed,
    };
    let seed = args.input.is_none().then_some(args.seed);
    let report = Report::new("verify", args, seed, inputs, results);
    let text = report.render(args.output.format, to_text)?;
    Ok(Outcome {
        report: text,
        destination: args.output.output.clone(),
        exit_code: if passed {
            exit::SUCCESS
        } else {
            exit::VERIFICATION_FAILED
        },
    })
}

/// Largest `n ≤ N/3`, within `[2, N − 2]`, whose subset count fits the cap.
pub fn default_sample_size(size: usize) -> Option<usize> {
    if size < 4 {
        return None;
    }
    let upper = (size / 3).clamp(2, size - 2);
    (2..=upper)
        .rev()
        .find(|&n| binomial(size, n).is_some_and(|c| c <= DEFAULT_ENUMERATION_CAP))
}

fn directory_cases(
    dir: &Path,
    n: Option<usize>,
) -> Result<(Vec<AuditCase>, Vec<InputDigest>), CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_file()
            && path
                .extension()
                .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"))
        {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no .csv population files found",
            dir.display()
        )));
    }

    let mut cases = Vec::with_capacity(files.len());
    let mut digests = Vec::with_capacity(files.len());
    for path in files {
        let (bytes, digest) = read_input(&path)?;
        let population = read_population(bytes.as_slice())
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let size = population.size();
        let sample_size = match n {
            Some(n) => n,
            None => default_sample_size(size).ok_or_else(|| {
                CliError::Usage(format!(
                    "{}: no sample size keeps full enumeration under the cap; pass --n",
                    path.display()
                ))
            })?,
        };
        cases.push(AuditCase {
            label: path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            population,
            sample_size,
        });
        digests.push(digest);
    }
    Ok((cases, digests))
}

fn summarize(report: &DiscrepancyReport) -> Vec<EquationSummary> {
    let mut out: Vec<EquationSummary> = Vec::new();
    for e in &report.entries {
        let idx = match out.iter().position(|s| s.equation == e.equation) {
            Some(i) => i,
            None => {
                out.push(EquationSummary {
                    equation: e.equation.clone(),
                    entries: 0,
                    mismatches: 0,
                    max_rel_diff: 0.0,
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.entries += 1;
        if e.verdict == Verdict::Mismatch {
            s.mismatches += 1;
        }
        s.max_rel_diff = s.max_rel_diff.max(e.rel_diff);
    }
    out
}

fn to_text(r: &VerifyResults) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cases audited: {}", r.cases);
    let _ = writeln!(
        out,
        "{:<16} {:>4} {:>4} {:>12}",
        "case", "N", "n", "subsets"
    );
    for c in &r.lemma.cases {
        let _ = writeln!(
            out,
            "{:<16} {:>4} {:>4} {:>12}",
            c.label, c.population_size, c.sample_size, c.subsets
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "low-order lemma moments: max scaled deviation {:.3e} [{}]",
        r.lemma.max_low_order_deviation,
        pass(r.lemma.low_order_passes())
    );
    let _ = writeln!(
        out,
        "fourth-order lemma forms [{}]:",
        pass(r.lemma.fourth_order_passes())
    );
    out.push_str(&r.lemma.verdict_table());
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "second-order exactness (t3 with w = 1; w = 2 bias): {} failures [{}]",
        r.polynomial_failures.len(),
        pass(r.polynomial_failures.is_empty())
    );
    for f in &r.polynomial_failures {
        let _ = writeln!(
            out,
            "  {} w={} {}: engine {} exact {} rel_diff {:.3e}",
            f.case,
            f.w,
            f.quantity,
            num(f.engine),
            num(f.exact),
            f.rel_diff
        );
    }
    let _ = writeln!(
        out,
        "t3 w = 2 mse2 truncation gap (informational): max rel_diff {:.3e}",
        r.max_w2_mse_gap
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "engine vs printed expressions (tolerance {:.0e}, informational):",
        r.discrepancy_tolerance
    );
    let _ = writeln!(
        out,
        "{:<22} {:>8} {:>11} {:>13}",
        "equation", "entries", "mismatches", "max_rel_diff"
    );
    for s in &r.equations {
        let _ = writeln!(
            out,
            "{:<22} {:>8} {:>11} {:>13.3e}",
            s.equation, s.entries, s.mismatches, s.max_rel_diff
        );
    }
    let _ = writeln!(
        out,
        "mismatched equations: {}",
        r.mismatched_equations.join(", ")
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "verification {}",
        if r.passed { "PASSED" } else { "FAILED" }
    );
    out
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sample_size_respects_bounds_and_cap() {
        assert_eq!(default_sample_size(3), None);
        assert_eq!(default_sample_size(4), Some(2));
        assert_eq!(default_sample_size(12), Some(4));
        let n = default_sample_size(200).unwrap();
        assert!(binomial(200, n).unwrap() <= DEFAULT_ENUMERATION_CAP);
        assert!(binomial(200, n + 1).unwrap() > DEFAULT_ENUMERATION_CAP);
    }
}
