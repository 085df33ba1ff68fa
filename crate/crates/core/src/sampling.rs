//! Ground-truth oracles: exhaustive enumeration of every SRSWOR sample and
//! seeded Monte Carlo replication.
//!
//! Monte Carlo replicate `r` draws from a ChaCha8 generator seeded with the
//! run seed and switched to stream `r`, so results do not depend on how the
//! replicates are spread over threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{point_estimate, EstimatorSpec, SampleStats};
use crate::numeric::NeumaierSum;
use crate::population::Population;

/// Default cap on the number of subsets visited by enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

/// Highest total degree tabulated by [`MomentTable`].
pub const MAX_TABLE_DEGREE: usize = 4;

/// What to do with samples on which an estimator is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    /// Exclude and count.
    Skip,
    /// Stop at the first degenerate sample.
    #[default]
    Abort,
}

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Lexicographic generator over `k`-subsets of `0..n`, reusing one buffer.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (0..k).collect(),
            started: false,
            done: k > n,
        }
    }

    /// Advances to the next subset; returns `None` when exhausted.
    pub fn next_subset(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        let k = self.current.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.current[i] < self.n - k + i {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                return Some(&self.current);
            }
        }
        self.done = true;
        None
    }
}

fn check_sample_size(pop: &Population, n: usize) -> Result<()> {
    if n == 0 || n > pop.size() {
        return Err(Error::InvalidDesign {
            population: pop.size(),
            sample: n,
        });
    }
    Ok(())
}

fn check_cap(pop: &Population, n: usize, cap: u128) -> Result<u128> {
    match binomial(pop.size(), n) {
        Some(count) if count <= cap => Ok(count),
        Some(count) => Err(Error::EnumerationTooLarge { count, cap }),
        None => Err(Error::EnumerationTooLarge {
            count: u128::MAX,
            cap,
        }),
    }
}

fn subset_stats(pop: &Population, subset: &[usize]) -> SampleStats {
    let (y, phi) = (pop.y(), pop.phi());
    let mut sum = NeumaierSum::default();
    let mut count = 0usize;
    for &i in subset {
        sum.add(y[i]);
        count += usize::from(phi[i]);
    }
    let n = subset.len();
    SampleStats {
        n,
        ybar: sum.total() / n as f64,
        p: count as f64 / n as f64,
    }
}

/// Exact design moments `E[e0^a e1^b]` for `a + b ≤ 4`, by enumeration.
///
/// Also keeps the absolute moments `E[|e0|^a |e1|^b]`, the natural scale for
/// judging how close another formula comes to an entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub population_size: usize,
    pub sample_size: usize,
    pub ybar: f64,
    pub proportion: f64,
    pub subsets: u128,
    raw: [[f64; MAX_TABLE_DEGREE + 1]; MAX_TABLE_DEGREE + 1],
    absolute: [[f64; MAX_TABLE_DEGREE + 1]; MAX_TABLE_DEGREE + 1],
}

impl MomentTable {
    /// Enumerates every size-`n` subset. `n = N` (census) is allowed.
    pub fn enumerate(pop: &Population, n: usize, cap: u128) -> Result<Self> {
        check_sample_size(pop, n)?;
        let subsets = check_cap(pop, n, cap)?;
        let ybar = pop.ybar();
        let big_p = pop.proportion();
        let mut raw = [[NeumaierSum::default(); MAX_TABLE_DEGREE + 1]; MAX_TABLE_DEGREE + 1];
        let mut absolute = raw;
        let mut combos = Combinations::new(pop.size(), n);
        while let Some(subset) = combos.next_subset() {
            let s = subset_stats(pop, subset);
            let e0 = (s.ybar - ybar) / ybar;
            let e1 = (s.p - big_p) / big_p;
            let mut e0_pow = 1.0;
            for a in 0..=MAX_TABLE_DEGREE {
                let mut term = e0_pow;
                for b in 0..=MAX_TABLE_DEGREE - a {
                    raw[a][b].add(term);
                    absolute[a][b].add(term.abs());
                    term *= e1;
                }
                e0_pow *= e0;
            }
        }
        let count = subsets as f64;
        let finish = |sums: &[[NeumaierSum; MAX_TABLE_DEGREE + 1]; MAX_TABLE_DEGREE + 1]| {
            let mut out = [[0.0; MAX_TABLE_DEGREE + 1]; MAX_TABLE_DEGREE + 1];
            for a in 0..=MAX_TABLE_DEGREE {
                for b in 0..=MAX_TABLE_DEGREE - a {
                    out[a][b] = sums[a][b].total() / count;
                }
            }
            out
        };
        Ok(Self {
            population_size: pop.size(),
            sample_size: n,
            ybar,
            proportion: big_p,
            subsets,
            raw: finish(&raw),
            absolute: finish(&absolute),
        })
    }

    /// `E[e0^a e1^b]`. Panics if `a + b > 4`.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        assert!(a + b <= MAX_TABLE_DEGREE, "moment ({a},{b}) not tabulated");
        self.raw[a][b]
    }

    /// `E[|e0|^a |e1|^b]`.
    pub fn absolute(&self, a: usize, b: usize) -> f64 {
        assert!(a + b <= MAX_TABLE_DEGREE, "moment ({a},{b}) not tabulated");
        self.absolute[a][b]
    }
}

/// Exact `E[e0^a e1^b]` averaged over all `C(N, n)` subsets.
pub fn exact_moment(pop: &Population, n: usize, a: usize, b: usize) -> Result<f64> {
    if a + b > MAX_TABLE_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "moment order a+b={} exceeds {MAX_TABLE_DEGREE}",
            a + b
        )));
    }
    Ok(MomentTable::enumerate(pop, n, DEFAULT_ENUMERATION_CAP)?.get(a, b))
}

/// Exact bias and MSE of an estimator over every SRSWOR sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub bias: f64,
    pub mse: f64,
    pub degenerate_count: u128,
    pub subsets: u128,
}

/// Enumerates every sample of size `n` and averages `t − Ȳ` and `(t − Ȳ)²`.
pub fn enumerate_exact(
    pop: &Population,
    n: usize,
    spec: &EstimatorSpec,
    policy: DegeneratePolicy,
) -> Result<ExactResult> {
    enumerate_exact_capped(pop, n, spec, policy, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_exact_capped(
    pop: &Population,
    n: usize,
    spec: &EstimatorSpec,
    policy: DegeneratePolicy,
    cap: u128,
) -> Result<ExactResult> {
    check_sample_size(pop, n)?;
    let subsets = check_cap(pop, n, cap)?;
    let ybar = pop.ybar();
    let big_p = pop.proportion();
    let mut bias = NeumaierSum::default();
    let mut mse = NeumaierSum::default();
    let mut degenerate = 0u128;
    let mut combos = Combinations::new(pop.size(), n);
    while let Some(subset) = combos.next_subset() {
        match point_estimate(spec, &subset_stats(pop, subset), big_p) {
            Ok(t) => {
                let d = t - ybar;
                bias.add(d);
                mse.add(d * d);
            }
            Err(Error::DegenerateSample(why)) => match policy {
                DegeneratePolicy::Skip => degenerate += 1,
                DegeneratePolicy::Abort => {
                    let units: Vec<String> = subset.iter().map(|i| (i + 1).to_string()).collect();
                    return Err(Error::DegenerateSample(format!(
                        "subset {{units {}}}: {why}",
                        units.join(",")
                    )));
                }
            },
            Err(e) => return Err(e),
        }
    }
    let used = subsets - degenerate;
    if used == 0 {
        return Err(Error::AllDegenerate);
    }
    Ok(ExactResult {
        bias: bias.total() / used as f64,
        mse: mse.total() / used as f64,
        degenerate_count: degenerate,
        subsets,
    })
}

/// Draws one SRSWOR sample of size `n` (`1 ≤ n ≤ N`) and summarizes it.
pub fn srswor_sample<R: Rng + ?Sized>(
    pop: &Population,
    n: usize,
    rng: &mut R,
) -> Result<SampleStats> {
    check_sample_size(pop, n)?;
    let idx = rand::seq::index::sample(rng, pop.size(), n);
    let (y, phi) = (pop.y(), pop.phi());
    let mut sum = NeumaierSum::default();
    let mut count = 0usize;
    for i in idx.iter() {
        sum.add(y[i]);
        count += usize::from(phi[i]);
    }
    Ok(SampleStats {
        n,
        ybar: sum.total() / n as f64,
        p: count as f64 / n as f64,
    })
}

/// Generator for replicate `r` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Monte Carlo run settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub replicates: usize,
    pub seed: u64,
    pub policy: DegeneratePolicy,
    /// Worker threads; `None` uses the global pool. Output does not depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl SimulationOptions {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            seed,
            policy: DegeneratePolicy::default(),
            threads: None,
        }
    }

    pub fn policy(mut self, policy: DegeneratePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

/// Empirical bias and MSE from Monte Carlo replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub spec: EstimatorSpec,
    pub n: usize,
    pub replicates: usize,
    pub empirical_bias: f64,
    pub empirical_mse: f64,
    pub se_bias: f64,
    pub se_mse: f64,
    pub degenerate_count: usize,
    pub seed: u64,
    pub policy: DegeneratePolicy,
}

impl SimulationReport {
    pub fn effective_replicates(&self) -> usize {
        self.replicates - self.degenerate_count
    }
}

/// Runs `R` independent SRSWOR replicates of the estimator.
pub fn simulate(
    pop: &Population,
    n: usize,
    spec: &EstimatorSpec,
    options: SimulationOptions,
) -> Result<SimulationReport> {
    if options.replicates < 1000 {
        return Err(Error::TooFewReplicates(options.replicates));
    }
    check_sample_size(pop, n)?;
    let run = || -> Vec<Result<f64>> {
        (0..options.replicates as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(options.seed, r);
                let stats = srswor_sample(pop, n, &mut rng)?;
                point_estimate(spec, &stats, pop.proportion())
            })
            .collect()
    };
    let outcomes = match options.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(run),
        None => run(),
    };

    let ybar = pop.ybar();
    let mut deviations = Vec::with_capacity(outcomes.len());
    let mut degenerate = 0usize;
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(t) => deviations.push(t - ybar),
            Err(Error::DegenerateSample(why)) => match options.policy {
                DegeneratePolicy::Skip => degenerate += 1,
                DegeneratePolicy::Abort => {
                    return Err(Error::DegenerateSample(format!("replicate {r}: {why}")))
                }
            },
            Err(e) => return Err(e),
        }
    }
    if deviations.is_empty() {
        return Err(Error::AllDegenerate);
    }
    let (bias, se_bias) = mean_and_se(deviations.iter().copied());
    let (mse, se_mse) = mean_and_se(deviations.iter().map(|d| d * d));
    Ok(SimulationReport {
        spec: *spec,
        n,
        replicates: options.replicates,
        empirical_bias: bias,
        empirical_mse: mse,
        se_bias,
        se_mse,
        degenerate_count: degenerate,
        seed: options.seed,
        policy: options.policy,
    })
}

/// Mean and its standard error (sample standard deviation over `√R`), two-pass.
fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let count = values.clone().count() as f64;
    let mean = values.clone().collect::<NeumaierSum>().total() / count;
    if count < 2.0 {
        return (mean, f64::NAN);
    }
    let ss = values
        .map(|v| (v - mean) * (v - mean))
        .collect::<NeumaierSum>()
        .total();
    (mean, (ss / (count - 1.0)).sqrt() / count.sqrt())
}
