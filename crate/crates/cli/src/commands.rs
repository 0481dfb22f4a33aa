use crate::Command;
use clap::{Subcommand, ValueEnum};
use commlab::distribution::ProductDistribution;
use commlab::engine::{
    disjointness_demo, measure_error, run_protocol, CostReport, ErrorSource, InputPartition, MeasureOptions,
    OneWayProtocol,
};
use commlab::function::{oneway_dcc2_oracle, FunctionSpec, FunctionTable};
use commlab::l0stream::{
    decode_top_layer, embedded_exact_l0, embedded_updates, embedding_totals, exact_l0, generate_layers, l0_estimate,
    random_strict_stream, EmbeddingPlan, L0Sketch, LayerPair, SketchParams, TurnstileStream,
};
use commlab::numeric::{
    binomial_shift_sd, entropy, majority_error, majority_error_bound, min_entropy, recompose, smoothing_series,
    statistical_distance, two_point_decompose, BigRational, ExactDist, Mass,
};
use commlab::reductions::{
    augindex_to_ghse, bias_report, default_family, ghse_decide, hse_evaluate, GhseInstance, GhseLabel,
};
use commlab::seed::{derive_seed, derived_rng};
use commlab::simulate::{
    det_stream_from_two_party, k_from_two_simulation, row_class_protocols, Amplified, AmplifierPlan, StreamOptions,
};
use commlab::sumequal::{
    augindex_distribution, direct_sum_distribution, rectangle_conditional_probe, viola_product_distribution,
    AugIndexSample, EqualityFingerprint, Rectangle, SumDomain, SumEqualExact, SumEqualFingerprint,
};
use commlab::{Error, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct Context {
    pub seed: u64,
    pub trials: u64,
    pub enum_cap: u64,
    pub timing: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumEqualCmd {
    /// Error and cost of the prime-fingerprint protocol.
    Fingerprint {
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Inputs in Z_m (default 7 unless --bound is given).
        #[arg(long, conflicts_with = "bound")]
        modulus: Option<u64>,
        /// Non-negative integer inputs up to this bound instead.
        #[arg(long)]
        bound: Option<u32>,
        #[arg(long, default_value_t = 0)]
        target: u32,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Players sharing the inputs in contiguous blocks (default k).
        #[arg(long)]
        players: Option<usize>,
        /// Enumerate the domain instead of sampling --trials inputs.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 10)]
        seeds_per_input: u64,
    },
    /// Deterministic running-sum protocol, checked on every input.
    Exact {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 7)]
        modulus: u64,
        #[arg(long, default_value_t = 0)]
        target: u64,
        #[arg(long)]
        players: Option<usize>,
    },
    /// Two-party equality fingerprint on one pair of integers.
    Equality {
        #[arg(long)]
        x: i64,
        #[arg(long)]
        y: i64,
        #[arg(long, default_value_t = 1 << 20)]
        universe: u64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Draw instances from one of the input distributions.
    Sample {
        #[arg(value_enum)]
        which: Sampler,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Copies per sample.
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Prime modulus for direct-sum and viola.
        #[arg(long, default_value_t = 5)]
        p: u64,
        /// Magnitude for augindex (default from k).
        #[arg(long)]
        a: Option<u64>,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    DirectSum,
    Augindex,
    Viola,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulateCmd {
    /// Streaming automaton from per-cut two-party protocols, checked on the whole domain.
    Automaton {
        /// Function description in JSON; overrides the builtin flags.
        #[arg(long)]
        function: Option<PathBuf>,
        /// parity, equality or sum-equal-mod-m.
        #[arg(long, default_value = "sum-equal-mod-m")]
        builtin: String,
        #[arg(long, default_value_t = 4)]
        arity: usize,
        #[arg(long, default_value_t = 5)]
        modulus: u32,
        #[arg(long)]
        alphabet: Option<u32>,
        #[arg(long)]
        target: Option<u32>,
        #[arg(long)]
        drop_index: bool,
    },
    /// k-player protocol from an amplified two-party fingerprint, under the uniform product distribution.
    KFromTwo {
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Majority-amplification plan.
    Amplify {
        #[arg(long, default_value_t = 1.0 / 3.0)]
        delta: f64,
        /// Target error; default delta^2 / (16 k^2).
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Promise set disjointness with a player holding two sets.
    Disjointness {
        #[arg(long, default_value_t = 5)]
        t: usize,
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long)]
        unique: bool,
        #[arg(long, default_value_t = 1)]
        runs: u64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GhseCmd {
    /// Exact disagreement bias next to the quoted lower bound.
    Bias {
        #[arg(long, default_value_t = 8100)]
        n_prime: usize,
        /// One or more odd copy counts.
        #[arg(long, default_values_t = [9], num_args = 1..)]
        n_double_prime: Vec<usize>,
    },
    /// Augmented-index reduction followed by the gap decision, per side.
    Reduce {
        #[arg(long, default_value_t = 8100)]
        n_prime: usize,
        #[arg(long, default_value_t = 9)]
        n_double_prime: usize,
        #[arg(long, default_value_t = 16)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        a: u64,
        /// Decision gap (default sqrt n').
        #[arg(long)]
        gap: Option<f64>,
        /// Runs per side.
        #[arg(long, default_value_t = 1000)]
        runs: u64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum L0Cmd {
    /// Write a random strict turnstile stream with a prescribed support size.
    Generate {
        #[arg(long)]
        stream: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        dimension: usize,
        #[arg(long, default_value_t = 50_000)]
        updates: usize,
        #[arg(long, default_value_t = 100)]
        magnitude: i64,
        #[arg(long, default_value_t = 1000)]
        l0: usize,
    },
    /// Exact support size of a stream file.
    Exact {
        #[arg(long)]
        stream: PathBuf,
    },
    /// Median-of-sketches estimate of the support size.
    Estimate {
        #[arg(long)]
        stream: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        delta: f64,
    },
    /// Gap layers embedded in one stream and decoded from a single sketch.
    Embed {
        #[arg(long, default_value_t = 3)]
        t: usize,
        #[arg(long, default_value_t = 900)]
        n: usize,
        /// Default 1/sqrt(n).
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 16)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        runs: u64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeCmd {
    /// Distance between Bin(t, 1/2) and its shift by one.
    BinomialShift {
        #[arg(long)]
        t: u64,
    },
    /// Distance from uniform on Z_p of a sum of two-point variables, after each term.
    Smoothing {
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 400)]
        t: usize,
        /// Support pairs a:b, cycled.
        #[arg(long, default_values_t = ["0:1".to_string()], num_args = 1..)]
        pairs: Vec<String>,
        /// Rational arithmetic instead of f64.
        #[arg(long)]
        exact: bool,
    },
    /// Majority-vote error against its bound, for 0..=t repetitions.
    Majority {
        #[arg(long, default_value_t = 1.0 / 3.0)]
        delta: f64,
        #[arg(long, default_value_t = 60)]
        t: u64,
    },
    /// Two-point decomposition of a distribution file.
    TwoPoint {
        /// JSON {"support": [integers], "probs": ["a/b", ...]}.
        #[arg(long)]
        dist: PathBuf,
    },
    /// Statistical distance and entropies of two distribution files.
    Sd {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Last player's conditional distribution on a rectangle.
    Rectangle {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        p: u64,
        /// 0-based copies to probe.
        #[arg(long, default_values_t = [0], num_args = 1..)]
        copies: Vec<usize>,
        /// JSON list of per-player vector lists; the full domain if absent.
        #[arg(long)]
        sets: Option<PathBuf>,
    },
}

struct Output {
    rows: Vec<Value>,
    healthy: bool,
}

impl Output {
    fn rows(rows: Vec<Value>) -> Self {
        Output { rows, healthy: true }
    }

    fn one(row: Value) -> Self {
        Self::rows(vec![row])
    }
}

fn to_value(v: impl Serialize) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

/// `{"group": {"variant": {...}}}` flattened to `"group variant"` and its args.
fn describe(group: &str, cmd: Option<Value>) -> (String, Value) {
    match cmd {
        Some(Value::Object(m)) if m.len() == 1 => {
            let (variant, args) = m.into_iter().next().expect("one entry");
            (format!("{group} {variant}"), args)
        }
        Some(Value::String(variant)) => (format!("{group} {variant}"), json!({})),
        _ => (group.to_string(), json!({})),
    }
}

pub fn run(cmd: &Command, ctx: &Context) -> Result<(Vec<Value>, bool)> {
    let start = Instant::now();
    let (name, args, out) = match cmd {
        Command::Verify => {
            let (n, a) = describe("verify", None);
            (n, a, verify(ctx))
        }
        Command::Sumequal(c) => {
            let (n, a) = describe("sumequal", Some(to_value(c)?));
            (n, a, sumequal(c, ctx)?)
        }
        Command::Simulate(c) => {
            let (n, a) = describe("simulate", Some(to_value(c)?));
            (n, a, simulate(c, ctx)?)
        }
        Command::Ghse(c) => {
            let (n, a) = describe("ghse", Some(to_value(c)?));
            (n, a, ghse(c, ctx)?)
        }
        Command::L0(c) => {
            let (n, a) = describe("l0", Some(to_value(c)?));
            (n, a, l0(c, ctx)?)
        }
        Command::Probe(c) => {
            let (n, a) = describe("probe", Some(to_value(c)?));
            (n, a, probe(c, ctx)?)
        }
    };
    let config = json!({"args": args, "trials": ctx.trials, "enum_cap": ctx.enum_cap});
    let elapsed = start.elapsed().as_secs_f64();
    let records = out
        .rows
        .into_iter()
        .map(|row| {
            let mut rec = Map::new();
            rec.insert("command".into(), json!(name));
            rec.insert("config".into(), config.clone());
            rec.insert("seed".into(), json!(ctx.seed));
            rec.insert("build".into(), json!(env!("COMMLAB_BUILD_ID")));
            match row {
                Value::Object(fields) => rec.extend(fields),
                other => {
                    rec.insert("result".into(), other);
                }
            }
            if ctx.timing {
                rec.insert("elapsed_s".into(), json!(elapsed));
            }
            Value::Object(rec)
        })
        .collect();
    Ok((records, out.healthy))
}

fn verify(ctx: &Context) -> Output {
    let checks = commlab::verify::run_checks(ctx.seed);
    let healthy = checks.iter().all(|c| c.passed);
    let rows = checks
        .into_iter()
        .map(|c| json!({"check": c.name, "passed": c.passed, "detail": c.detail}))
        .collect();
    Output { rows, healthy }
}

fn partition(k: usize, players: Option<usize>) -> Result<InputPartition> {
    let players = players.unwrap_or(k);
    if players == 0 || players > k {
        return Err(Error::Parameter(format!("players = {players} must lie in [1, {k}]")));
    }
    let cuts: Vec<usize> = (1..players).map(|i| i * k / players).collect();
    InputPartition::contiguous(k, &cuts)
}

fn cost_row(report: &CostReport) -> Result<Value> {
    to_value(report)
}

fn sumequal(cmd: &SumEqualCmd, ctx: &Context) -> Result<Output> {
    let options = MeasureOptions {
        enum_cap: ctx.enum_cap,
        parallel: true,
    };
    match *cmd {
        SumEqualCmd::Fingerprint {
            k,
            modulus,
            bound,
            target,
            delta,
            players,
            exhaustive,
            seeds_per_input,
        } => {
            let part = partition(k, players)?;
            let (domain, f) = match bound {
                Some(b) => {
                    let mut alphabets = vec![b + 1; k];
                    alphabets[k - 1] = (k as u32)
                        .checked_mul(b)
                        .and_then(|v| v.checked_add(1))
                        .ok_or_else(|| Error::Parameter(format!("bound {b} is too large for {k} inputs")))?;
                    let t = target as u64;
                    let f = FunctionTable::from_fn("sum-equal-integers", alphabets, false, move |x| {
                        (x.iter().map(|&v| v as u64).sum::<u64>() == t) as u32
                    })?;
                    (SumDomain::Integers { bound: b as i64 }, f)
                }
                None => {
                    let m = modulus.unwrap_or(7);
                    let m32 = u32::try_from(m).map_err(|_| Error::Parameter(format!("modulus {m} is too large")))?;
                    if target as u64 >= m {
                        return Err(Error::Parameter(format!("target {target} is outside Z_{m}")));
                    }
                    (
                        SumDomain::Modular { modulus: m },
                        FunctionTable::sum_equal_mod(k, m32, target)?,
                    )
                }
            };
            let protocol = SumEqualFingerprint::new(domain, k, target as i64, delta, part.players())?;
            let mu;
            let source = if exhaustive {
                ErrorSource::Exhaustive { seeds_per_input }
            } else {
                mu = ProductDistribution::uniform(f.alphabets())?;
                ErrorSource::MonteCarlo {
                    sampler: &mu,
                    trials: ctx.trials,
                }
            };
            let report = measure_error(&protocol, &f, &part, source, ctx.seed, &options)?;
            let mut row = cost_row(&report)?;
            row["domain"] = to_value(domain)?;
            row["players"] = json!(part.players());
            row["primes"] = json!(protocol.primes().len());
            row["prime_range"] = json!([protocol.primes().first(), protocol.primes().last()]);
            Ok(Output::one(row))
        }
        SumEqualCmd::Exact {
            k,
            modulus,
            target,
            players,
        } => {
            let part = partition(k, players)?;
            let m32 =
                u32::try_from(modulus).map_err(|_| Error::Parameter(format!("modulus {modulus} is too large")))?;
            let f = FunctionTable::sum_equal_mod(k, m32, (target % modulus) as u32)?;
            let protocol = SumEqualExact::new(modulus, target, part.players())?;
            let report = measure_error(
                &protocol,
                &f,
                &part,
                ErrorSource::Exhaustive { seeds_per_input: 1 },
                ctx.seed,
                &options,
            )?;
            let mut row = cost_row(&report)?;
            row["players"] = json!(part.players());
            Ok(Output::one(row))
        }
        SumEqualCmd::Equality { x, y, universe, delta } => {
            let protocol = EqualityFingerprint::new(universe, delta)?;
            let part = InputPartition::singletons(2);
            let mut accepted = 0u64;
            let mut bits = 0;
            for i in 0..ctx.trials {
                let run = run_protocol(&protocol, &part, &[x, y], derive_seed(ctx.seed, "equality", i))?;
                accepted += run.output as u64;
                bits = bits.max(run.cost.max_message_bits);
            }
            let (lo, hi) = protocol.prime_range();
            Ok(Output::one(json!({
                "x": x,
                "y": y,
                "equal": x == y,
                "accept_rate": accepted as f64 / ctx.trials.max(1) as f64,
                "predicted_accept": protocol.collision_probability(x as i128, y as i128),
                "max_message_bits": bits,
                "prime_range": [lo, hi],
            })))
        }
        SumEqualCmd::Sample {
            which,
            k,
            m,
            p,
            a,
            count,
        } => {
            let rows = match which {
                Sampler::DirectSum => (0..count)
                    .map(|i| to_value(direct_sum_distribution(k, m, p, derive_seed(ctx.seed, "sample", i))?))
                    .collect::<Result<_>>()?,
                Sampler::Augindex => {
                    let a = a.unwrap_or_else(|| AugIndexSample::default_magnitude(k));
                    (0..count)
                        .map(|i| to_value(augindex_distribution(k, m, a, derive_seed(ctx.seed, "sample", i))?))
                        .collect::<Result<_>>()?
                }
                Sampler::Viola => viola_product_distribution(k, p, ctx.seed)?
                    .take(count as usize)
                    .map(to_value)
                    .collect::<Result<_>>()?,
            };
            Ok(Output::rows(rows))
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn simulate(cmd: &SimulateCmd, ctx: &Context) -> Result<Output> {
    match cmd {
        SimulateCmd::Automaton {
            function,
            builtin,
            arity,
            modulus,
            alphabet,
            target,
            drop_index,
        } => {
            let f = match function {
                Some(path) => FunctionTable::from_json(&read_text(path)?)?,
                None => FunctionSpec::Builtin {
                    builtin: builtin.clone(),
                    arity: *arity,
                    alphabet: *alphabet,
                    modulus: Some(*modulus),
                    target: *target,
                }
                .build()?,
            };
            let cap = ctx.enum_cap;
            let m = f.arity();
            let options = StreamOptions {
                drop_index: *drop_index,
                enum_cap: cap,
            };
            let automaton = det_stream_from_two_party(&f, row_class_protocols(&f, cap)?, &options)?;
            let dcc = (1..=m)
                .map(|c| oneway_dcc2_oracle(&f, c, cap))
                .collect::<Result<Vec<_>>>()?;
            let bound = *dcc.iter().max().expect("arity >= 1") as usize + commlab::bits::ceil_log2(m as u64) as usize;
            let mut inputs = 0u64;
            let mut mismatches = 0u64;
            for x in f.domain().iter() {
                inputs += 1;
                mismatches += (automaton.run(&x)? != f.eval(&x)) as u64;
            }
            Ok(Output::one(json!({
                "function": f.name(),
                "arity": m,
                "inputs": inputs,
                "mismatches": mismatches,
                "memory_bits": automaton.memory_bits(),
                "max_message_bits": automaton.max_message_bits(),
                "index_bits": automaton.index_bits(),
                "dcc_per_cut": dcc,
                "memory_bound": bound,
            })))
        }
        &SimulateCmd::KFromTwo { k, p, delta } => {
            let f = FunctionTable::sum_equal_mod(k, p, 0)?;
            let mu = ProductDistribution::uniform(&vec![p; k])?;
            let base = SumEqualFingerprint::new(SumDomain::Modular { modulus: p as u64 }, k, 0, delta, 2)?;
            let plan = AmplifierPlan::for_k_from_two(delta, k)?;
            let pi2 = Amplified::new(base, plan.copies as usize)?;
            let amplified_bits = OneWayProtocol::<u32>::max_message_bits(&pi2);
            let sim = k_from_two_simulation(pi2, &f, &mu, delta, ctx.enum_cap)?;
            let report = measure_error(
                &sim,
                &f,
                &InputPartition::singletons(k),
                ErrorSource::MonteCarlo {
                    sampler: &mu,
                    trials: ctx.trials,
                },
                ctx.seed,
                &MeasureOptions {
                    enum_cap: ctx.enum_cap,
                    parallel: true,
                },
            )?;
            let mut row = cost_row(&report)?;
            row["plan"] = to_value(&plan)?;
            row["amplified_message_bits"] = json!(amplified_bits);
            row["message_bound"] = json!(amplified_bits.map(|c| c + commlab::bits::ceil_log2(k as u64) as usize));
            row["stats"] = to_value(sim.stats())?;
            Ok(Output::one(row))
        }
        &SimulateCmd::Amplify { delta, epsilon, k } => {
            let plan = match epsilon {
                Some(e) => AmplifierPlan::new(delta, e)?,
                None => AmplifierPlan::for_k_from_two(delta, k)?,
            };
            Ok(Output::one(to_value(plan)?))
        }
        &SimulateCmd::Disjointness { t, n, unique, runs } => {
            let rows = (0..runs)
                .map(|r| {
                    let demo = disjointness_demo(t, n, unique, derive_seed(ctx.seed, "disjointness", r))?;
                    let mut row = to_value(&demo)?;
                    row["run"] = json!(r);
                    Ok(row)
                })
                .collect::<Result<_>>()?;
            Ok(Output::rows(rows))
        }
    }
}

fn ghse(cmd: &GhseCmd, ctx: &Context) -> Result<Output> {
    match cmd {
        GhseCmd::Bias {
            n_prime,
            n_double_prime,
        } => {
            let rows = n_double_prime
                .iter()
                .map(|&n2| to_value(bias_report(*n_prime, n2)?))
                .collect::<Result<_>>()?;
            Ok(Output::rows(rows))
        }
        &GhseCmd::Reduce {
            n_prime,
            n_double_prime,
            k,
            a,
            gap,
            runs,
        } => {
            let gap = gap.unwrap_or((n_prime as f64).sqrt());
            let report = bias_report(n_prime, n_double_prime)?;
            let mut done = [0u64; 2];
            let mut correct = [0u64; 2];
            let mut in_gap = [0u64; 2];
            let mut hse_sum = [0i64; 2];
            let mut i = 0u64;
            while done[0] < runs || done[1] < runs {
                let sample = augindex_distribution(k, n_double_prime, a, derive_seed(ctx.seed, "augindex", i))?;
                i += 1;
                let side = sample.queried_answer() as usize;
                if done[side] >= runs {
                    continue;
                }
                let family = default_family(&sample)?;
                let red = augindex_to_ghse(&sample, n_prime, &family, derive_seed(ctx.seed, "grid", i))?;
                let d = ghse_decide(&red.alice, &red.bob, gap)?;
                done[side] += 1;
                correct[side] += (d.answer as usize == side) as u64;
                in_gap[side] += d.in_gap as u64;
                hse_sum[side] += d.hse;
            }
            let rows = [1usize, 0]
                .iter()
                .map(|&side| {
                    json!({
                        "side": if side == 1 { "equal" } else { "unequal" },
                        "runs": runs,
                        "correct": correct[side],
                        "rate": correct[side] as f64 / runs.max(1) as f64,
                        "in_gap": in_gap[side],
                        "mean_hse": hse_sum[side] as f64 / runs.max(1) as f64,
                        "expected_hse": if side == 1 { report.expected_hse_equal } else { report.expected_hse_unequal },
                        "gap": gap,
                        "samples_drawn": i,
                    })
                })
                .collect();
            Ok(Output::rows(rows))
        }
    }
}

fn l0(cmd: &L0Cmd, ctx: &Context) -> Result<Output> {
    match cmd {
        L0Cmd::Generate {
            stream,
            dimension,
            updates,
            magnitude,
            l0,
        } => {
            let mut rng = derived_rng(ctx.seed, "l0-generate", 0);
            let s = random_strict_stream(*dimension, *updates, *magnitude, *l0, &mut rng)?;
            s.write_file(stream)?;
            Ok(Output::one(json!({
                "path": stream,
                "dimension": s.dimension(),
                "updates": s.len(),
                "magnitude": s.magnitude(),
                "exact": exact_l0(&s),
            })))
        }
        L0Cmd::Exact { stream } => {
            let s = TurnstileStream::read_file(stream)?;
            Ok(Output::one(json!({
                "dimension": s.dimension(),
                "updates": s.len(),
                "strict": s.is_strict(),
                "exact": exact_l0(&s),
            })))
        }
        L0Cmd::Estimate { stream, epsilon, delta } => {
            let s = TurnstileStream::read_file(stream)?;
            let e = l0_estimate(&s, *epsilon, *delta, ctx.seed)?;
            let exact = exact_l0(&s);
            let rel = if exact == 0 {
                e.estimate.abs()
            } else {
                (e.estimate - exact as f64).abs() / exact as f64
            };
            Ok(Output::one(json!({
                "estimate": e.estimate,
                "space_bits": e.space_bits,
                "exact": exact,
                "relative_error": rel,
                "copies": e.copies,
                "params": e.params,
            })))
        }
        &L0Cmd::Embed { t, n, epsilon, k, runs } => {
            let eps = epsilon.unwrap_or(1.0 / (n as f64).sqrt());
            let plan = EmbeddingPlan::new(t, n, eps)?;
            let params = SketchParams::new(plan.sketch_epsilon(), plan.dimension(), plan.updates(), 1)?;
            let mut rows = Vec::new();
            let (mut promise, mut sketch_ok) = (0u64, 0u64);
            for r in 0..runs {
                let generated = generate_layers(&plan, k, derive_seed(ctx.seed, "embed-layers", r))?;
                let layers: Vec<LayerPair> = generated.iter().map(|g| g.pair.clone()).collect();
                let top = &layers[t - 1];
                let truth = hse_evaluate(&GhseInstance::from_bits(&top.alice, &top.bob, eps * n as f64)?).label;
                let totals = embedding_totals(&layers, &plan)?;
                let exact = embedded_exact_l0(&layers, &plan)?;
                let oracle = decode_top_layer(exact as f64, &plan, &[], t)?;
                let mut sketch = L0Sketch::new(params, derive_seed(ctx.seed, "embed-sketch", r));
                sketch.extend(embedded_updates(&layers, &plan)?);
                let estimate = sketch.estimate();
                let decoded = decode_top_layer(estimate, &plan, &[], t)?;
                let want = match truth {
                    GhseLabel::One => Some(1u8),
                    GhseLabel::Zero => Some(0),
                    GhseLabel::Undefined => None,
                };
                if let Some(w) = want {
                    promise += 1;
                    sketch_ok += (decoded.answer == w && !decoded.ambiguous) as u64;
                }
                rows.push(json!({
                    "run": r,
                    "label": truth,
                    "f_top": top.f(),
                    "exact_l0": exact,
                    "f_prime": totals.f_prime.to_string(),
                    "oracle_answer": oracle.answer,
                    "oracle_ambiguous": oracle.ambiguous,
                    "estimate": estimate,
                    "sketch_answer": decoded.answer,
                    "sketch_ambiguous": decoded.ambiguous,
                }));
            }
            rows.push(json!({
                "run": "summary",
                "total": plan.total,
                "promise_runs": promise,
                "sketch_correct": sketch_ok,
                "sketch_rate": sketch_ok as f64 / promise.max(1) as f64,
                "space_bits": params.space_bits(),
            }));
            Ok(Output::rows(rows))
        }
    }
}

fn read_dist(path: &Path) -> Result<ExactDist<i64, BigRational>> {
    let value: Value = serde_json::from_str(&read_text(path)?)?;
    ExactDist::from_json(&value)
}

fn parse_pair(s: &str) -> Result<(u64, u64)> {
    let bad = || Error::Parse(format!("pair {s:?} should look like a:b"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn probe(cmd: &ProbeCmd, ctx: &Context) -> Result<Output> {
    match cmd {
        &ProbeCmd::BinomialShift { t } => {
            let sd = binomial_shift_sd(t)?;
            Ok(Output::one(
                json!({"t": t, "exact": sd.to_string(), "value": Mass::to_f64(&sd)}),
            ))
        }
        ProbeCmd::Smoothing { p, t, pairs, exact } => {
            let pairs = pairs.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>>>()?;
            let series: Vec<(f64, Option<String>)> = if *exact {
                smoothing_series::<BigRational>(*t, &pairs, *p)?
                    .into_iter()
                    .map(|v| (Mass::to_f64(&v), Some(v.to_string())))
                    .collect()
            } else {
                smoothing_series::<f64>(*t, &pairs, *p)?
                    .into_iter()
                    .map(|v| (v, None))
                    .collect()
            };
            let rows = series
                .into_iter()
                .enumerate()
                .map(|(terms, (sd, ex))| match ex {
                    Some(e) => json!({"terms": terms, "sd": sd, "exact": e}),
                    None => json!({"terms": terms, "sd": sd}),
                })
                .collect();
            Ok(Output::rows(rows))
        }
        &ProbeCmd::Majority { delta, t } => {
            let rows = (0..=t)
                .map(|i| {
                    let (err, bound) = (majority_error(delta, i), majority_error_bound(delta, i));
                    json!({"t": i, "copies": 2 * i + 1, "error": err, "bound": bound, "within": err <= bound})
                })
                .collect();
            Ok(Output::rows(rows))
        }
        ProbeCmd::TwoPoint { dist } => {
            let d = read_dist(dist)?;
            let parts = two_point_decompose(&d)?;
            let exact = recompose(&parts) == d;
            let rows = parts
                .iter()
                .map(|c| {
                    json!({
                        "weight": c.weight.to_string(),
                        "weight_f64": Mass::to_f64(&c.weight),
                        "low": c.low,
                        "high": c.high,
                        "recomposes_exactly": exact,
                    })
                })
                .collect();
            Ok(Output::rows(rows))
        }
        ProbeCmd::Sd { a, b } => {
            let (da, db) = (read_dist(a)?, read_dist(b)?);
            let sd = statistical_distance(&da, &db);
            Ok(Output::one(json!({
                "sd": Mass::to_f64(&sd),
                "sd_exact": sd.to_string(),
                "entropy_a": entropy(&da),
                "entropy_b": entropy(&db),
                "min_entropy_a": min_entropy(&da),
                "min_entropy_b": min_entropy(&db),
            })))
        }
        ProbeCmd::Rectangle { k, m, p, copies, sets } => {
            let rect = match sets {
                Some(path) => {
                    let sets: Vec<Vec<Vec<u64>>> = serde_json::from_str(&read_text(path)?)?;
                    Rectangle::new(*p, *m, sets)?
                }
                None => Rectangle::full(*k, *m, *p)?,
            };
            let report = rectangle_conditional_probe(&rect, copies, ctx.enum_cap)?;
            let mut row = to_value(&report)?;
            row["conditional"] = report.conditional.to_json();
            Ok(Output::one(row))
        }
    }
}
