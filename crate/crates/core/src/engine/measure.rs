use super::{run_protocol, CostReport, InputPartition, OneWayProtocol};
use crate::distribution::InputSampler;
use crate::error::{Error, Result};
use crate::function::{FunctionTable, DEFAULT_ENUM_CAP};
use crate::seed::{derive_seed, derived_rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How an error figure was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ErrorKind {
    /// Every input of the domain, each with `seeds_per_input` coin seeds.
    ExactEnumeration {
        inputs: u64,
        seeds_per_input: u64,
    },
    MonteCarlo {
        trials: u64,
        seed: u64,
    },
}

/// Where the inputs of an error measurement come from.
pub enum ErrorSource<'a> {
    Exhaustive {
        seeds_per_input: u64,
    },
    MonteCarlo {
        sampler: &'a dyn InputSampler<u32>,
        trials: u64,
    },
}

#[derive(Clone, Debug)]
pub struct MeasureOptions {
    pub enum_cap: u64,
    pub parallel: bool,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            enum_cap: DEFAULT_ENUM_CAP,
            parallel: true,
        }
    }
}

#[derive(Clone, Default)]
struct Tally {
    errors: u64,
    worst: u64,
    per_message: Vec<usize>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.errors += other.errors;
        self.worst = self.worst.max(other.worst);
        if self.per_message.len() < other.per_message.len() {
            self.per_message.resize(other.per_message.len(), 0);
        }
        for (a, b) in self.per_message.iter_mut().zip(other.per_message) {
            *a = (*a).max(b);
        }
        self
    }

    fn record(&mut self, lengths: &[usize]) {
        if self.per_message.len() < lengths.len() {
            self.per_message.resize(lengths.len(), 0);
        }
        for (a, &b) in self.per_message.iter_mut().zip(lengths) {
            *a = (*a).max(b);
        }
    }
}

fn run_range<F>(n: u64, parallel: bool, body: F) -> Result<Tally>
where
    F: Fn(u64) -> Result<Tally> + Sync,
{
    if parallel {
        (0..n)
            .into_par_iter()
            .map(&body)
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
    } else {
        (0..n).try_fold(Tally::default(), |acc, i| Ok(acc.merge(body(i)?)))
    }
}

/// Runs `protocol` against `f` and reports its cost and error.
///
/// In exhaustive mode the reported error is the worst input's error rate
/// over the seeds tried, and `mean_error` is the uniform average. In Monte
/// Carlo mode both are the empirical error over the sampled trials.
/// Results do not depend on `parallel`.
pub fn measure_error<P>(
    protocol: &P,
    f: &FunctionTable,
    partition: &InputPartition,
    source: ErrorSource<'_>,
    seed: u64,
    options: &MeasureOptions,
) -> Result<CostReport>
where
    P: OneWayProtocol<u32, Output = u32> + ?Sized,
{
    if f.arity() != partition.k() {
        return Err(Error::Config(format!(
            "function arity {} does not match partition size {}",
            f.arity(),
            partition.k()
        )));
    }
    let (tally, runs, kind, worst_denominator) = match source {
        ErrorSource::Exhaustive { seeds_per_input } => {
            let seeds = seeds_per_input.max(1);
            let size = f.domain().size_capped(options.enum_cap)?;
            if size.saturating_mul(seeds) > options.enum_cap {
                return Err(Error::Refused(format!(
                    "{size} inputs x {seeds} seeds exceeds enumeration cap {}",
                    options.enum_cap
                )));
            }
            let tally = run_range(size, options.parallel, |idx| {
                let x = f.domain().decode(idx);
                let want = f.eval(&x);
                let mut t = Tally::default();
                let mut wrong = 0;
                for s in 0..seeds {
                    let run = run_protocol(protocol, partition, &x, derive_seed(seed, "run", idx * seeds + s))?;
                    wrong += (run.output != want) as u64;
                    t.record(&run.cost.per_message_bits);
                }
                t.errors = wrong;
                t.worst = wrong;
                Ok(t)
            })?;
            let kind = ErrorKind::ExactEnumeration {
                inputs: size,
                seeds_per_input: seeds,
            };
            (tally, size * seeds, kind, seeds)
        }
        ErrorSource::MonteCarlo { sampler, trials } => {
            if trials == 0 {
                return Err(Error::Parameter("at least one trial is needed".into()));
            }
            let tally = run_range(trials, options.parallel, |i| {
                let x = sampler.sample(&mut derived_rng(seed, "input", i));
                let run = run_protocol(protocol, partition, &x, derive_seed(seed, "run", i))?;
                let wrong = (run.output != f.eval(&x)) as u64;
                let mut t = Tally {
                    errors: wrong,
                    worst: 0,
                    per_message: Vec::new(),
                };
                t.record(&run.cost.per_message_bits);
                Ok(t)
            })?;
            (tally, trials, ErrorKind::MonteCarlo { trials, seed }, 0)
        }
    };
    let mean = tally.errors as f64 / runs as f64;
    let worst = if worst_denominator > 0 {
        tally.worst as f64 / worst_denominator as f64
    } else {
        mean
    };
    let mut report = CostReport::from_lengths(tally.per_message, protocol.max_message_bits());
    report.error_estimate = Some(worst);
    report.mean_error = Some(mean);
    report.error_kind = Some(kind);
    Ok(report)
}
