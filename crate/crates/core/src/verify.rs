//! Quick self-checks run by `commlab verify`.
//!
//! Each check compares a construction with a small independent computation
//! and finishes in well under a second. The full-scale versions live in the
//! integration tests.

use crate::engine::{disjointness_demo, run_protocol, InputPartition};
use crate::error::Result;
use crate::function::{oneway_dcc2_oracle, FunctionTable};
use crate::l0stream::{
    embed_ghse_layers, embedding_totals, exact_l0, exact_l0_dense, random_strict_stream, EmbeddingPlan, L0Sketch,
    LayerPair, SketchParams,
};
use crate::numeric::{
    binomial_shift_sd, majority_error, majority_error_bound, recompose, smoothing_series, two_point_decompose,
    BigRational, ExactDist, Mass,
};
use crate::reductions::disagreement_bias;
use crate::seed::derived_rng;
use crate::simulate::{det_stream_from_two_party, row_class_protocols, AmplifierPlan, StreamOptions};
use crate::sumequal::{rectangle_conditional_probe, Rectangle, SumDomain, SumEqualFingerprint, SumEqualInstance};
use num::bigint::BigInt;
use num::{One, Zero};
use rand::Rng;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn(u64) -> Result<(bool, String)>;

const CHECKS: &[(&str, CheckFn)] = &[
    ("fingerprint-one-sided", fingerprint_one_sided),
    ("majority-tail", majority_tail),
    ("amplifier-plan", amplifier_plan),
    ("automaton-equals-f", automaton_equals_f),
    ("binomial-shift", binomial_shift),
    ("smoothing", smoothing),
    ("two-point-roundtrip", two_point_roundtrip),
    ("rectangle-probe", rectangle_probe),
    ("majority-bias", majority_bias),
    ("l0-exact-and-merge", l0_exact_and_merge),
    ("embedding-identities", embedding_identities),
    ("disjointness", disjointness),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check; an error inside a check counts as a failure.
pub fn run_checks(seed: u64) -> Vec<Check> {
    CHECKS
        .iter()
        .map(|&(name, f)| match f(seed) {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

fn fingerprint_one_sided(seed: u64) -> Result<(bool, String)> {
    let modulus = 7u64;
    let k = 4;
    let p = SumEqualFingerprint::new(SumDomain::Modular { modulus }, k, 0, 0.1, k)?;
    let part = InputPartition::singletons(k);
    let mut rng = derived_rng(seed, "verify-fingerprint", 0);
    let mut rejections = 0;
    for _ in 0..50 {
        let mut x: Vec<i64> = (0..k - 1).map(|_| rng.gen_range(0..modulus as i64)).collect();
        x.push((-x.iter().sum::<i64>()).rem_euclid(modulus as i64));
        for s in 0..20 {
            rejections += (run_protocol(&p, &part, &x, rng.gen::<u64>() ^ s)?.output != 1) as u32;
        }
    }
    let unequal = SumEqualInstance::new(SumDomain::Modular { modulus }, vec![6, 6, 6, 5], 0)?;
    let predicted = p.acceptance_probability(&unequal);
    Ok((
        rejections == 0 && predicted <= 0.1,
        format!("{rejections} false rejections; predicted false accept {predicted:.4}"),
    ))
}

fn majority_tail(_: u64) -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    for t in 0..=60u64 {
        for d in 1..=9 {
            let delta = d as f64 * 0.05;
            worst = worst.max(majority_error(delta, t) / majority_error_bound(delta, t));
        }
    }
    Ok((worst <= 1.0 + 1e-9, format!("max tail / bound = {worst:.6}")))
}

fn amplifier_plan(_: u64) -> Result<(bool, String)> {
    let plan = AmplifierPlan::for_k_from_two(1.0 / 3.0, 4)?;
    Ok((
        (plan.t, plan.copies) == (57, 115),
        format!("t = {}, copies = {}", plan.t, plan.copies),
    ))
}

fn automaton_equals_f(seed: u64) -> Result<(bool, String)> {
    let mut rng = derived_rng(seed, "verify-automaton", 0);
    let mut ok = true;
    for _ in 0..5 {
        let alphabet = rng.gen_range(2..=3);
        let m = rng.gen_range(2..=4);
        let f = FunctionTable::random_symmetric(alphabet, m, 2, &mut rng)?;
        let cap = 1 << 20;
        let a = det_stream_from_two_party(&f, row_class_protocols(&f, cap)?, &StreamOptions::default())?;
        let dcc = (1..=m)
            .map(|c| oneway_dcc2_oracle(&f, c, cap))
            .collect::<Result<Vec<_>>>()?;
        let bound = *dcc.iter().max().expect("m >= 1") as usize + crate::bits::ceil_log2(m as u64) as usize;
        ok &= a.memory_bits() <= bound;
        for x in f.domain().iter() {
            ok &= a.run(&x)? == f.eval(&x);
        }
    }
    Ok((ok, "5 random symmetric functions".into()))
}

fn binomial_shift(_: u64) -> Result<(bool, String)> {
    let mut row = vec![BigInt::one()];
    let mut ok = true;
    for t in 1..=200u64 {
        let mut next = vec![BigInt::zero(); row.len() + 1];
        for (i, c) in row.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c;
        }
        row = next;
        let shifted_l1: BigInt = (0..=row.len())
            .map(|i| {
                let a = row.get(i).cloned().unwrap_or_default();
                let b = if i == 0 { BigInt::zero() } else { row[i - 1].clone() };
                num::abs(a - b)
            })
            .sum();
        let oracle = BigRational::new(shifted_l1, BigInt::one() << (t as usize + 1));
        ok &= oracle == binomial_shift_sd(t)?;
    }
    Ok((ok, "t = 1..200 against Pascal's triangle".into()))
}

fn smoothing(_: u64) -> Result<(bool, String)> {
    let series = smoothing_series::<f64>(400, &[(0, 1)], 5)?;
    let monotone = series.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    let last = *series.last().expect("non-empty");
    Ok((monotone && last < 0.01, format!("distance after 400 terms {last:.3e}")))
}

fn two_point_roundtrip(seed: u64) -> Result<(bool, String)> {
    let mut rng = derived_rng(seed, "verify-two-point", 0);
    let mut ok = true;
    for _ in 0..100 {
        let support = rng.gen_range(2..=16usize);
        let mut weights: Vec<u64> = (0..support).map(|_| rng.gen_range(1..=20)).collect();
        let total: u64 = weights.iter().sum();
        let max = *weights.iter().max().expect("non-empty");
        if 2 * max > total {
            let i = weights.iter().position(|&w| w == max).expect("present");
            weights[i] = total - max;
        }
        let total: u64 = weights.iter().sum();
        let d = ExactDist::<u64, BigRational>::new(
            weights
                .iter()
                .enumerate()
                .map(|(v, &w)| (v as u64, BigRational::ratio(w, total))),
        )?;
        ok &= recompose(&two_point_decompose(&d)?) == d;
    }
    Ok((ok, "100 random rational distributions".into()))
}

fn rectangle_probe(seed: u64) -> Result<(bool, String)> {
    let (p, m) = (3u64, 2usize);
    let mut rng = derived_rng(seed, "verify-rectangle", 0);
    let all: Vec<Vec<u64>> = (0..p * p).map(|i| vec![i / p, i % p]).collect();
    let sets: Vec<Vec<Vec<u64>>> = (0..2)
        .map(|_| {
            let mut s: Vec<Vec<u64>> = all.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            if s.is_empty() {
                s.push(all[0].clone());
            }
            s
        })
        .collect();
    let rect = Rectangle::new(p, m, sets.clone())?;
    let rep = rectangle_conditional_probe(&rect, &[0, 1], 1 << 20)?;
    let mut counts = std::collections::BTreeMap::<Vec<u64>, u64>::new();
    for a in &sets[0] {
        for b in &sets[1] {
            let last = vec![(2 * p - a[0] - b[0]) % p, (2 * p - a[1] - b[1]) % p];
            *counts.entry(last).or_default() += 1;
        }
    }
    let n = rect.size() as u64;
    let brute =
        ExactDist::<Vec<u64>, BigRational>::new(counts.into_iter().map(|(v, c)| (v, BigRational::ratio(c, n))))?;
    Ok((brute == rep.conditional, format!("|R| = {n}, distance {:.4}", rep.sd)))
}

fn majority_bias(_: u64) -> Result<(bool, String)> {
    let nine = disagreement_bias(9)?;
    let mut below = true;
    for n in (3..=51u64).step_by(2) {
        below &= Mass::to_f64(&disagreement_bias(n)?) < 0.5 + 0.5 / (n as f64).sqrt();
    }
    Ok((
        nine.to_string() == "163/256" && below,
        format!("bias at 9 = {nine}; exact below 1/2 + 1/(2 sqrt n'') for odd n'' <= 51: {below}"),
    ))
}

fn l0_exact_and_merge(seed: u64) -> Result<(bool, String)> {
    let mut rng = derived_rng(seed, "verify-l0", 0);
    let s = random_strict_stream(500, 3000, 10, 120, &mut rng)?;
    let exact = exact_l0(&s);
    let dense = exact_l0_dense(s.dimension(), s.updates().iter().copied());
    let params = SketchParams::for_stream(0.2, &s)?;
    let (a, b) = s.updates().split_at(1234);
    let mut whole = L0Sketch::new(params, seed);
    whole.extend(s.updates().iter().copied());
    let mut left = L0Sketch::new(params, seed);
    left.extend(a.iter().copied());
    let mut right = L0Sketch::new(params, seed);
    right.extend(b.iter().copied());
    left.merge(&right)?;
    Ok((
        exact == 120 && dense == 120 && left == whole,
        format!("exact {exact}, replay {dense}, merged sketch equal: {}", left == whole),
    ))
}

fn embedding_identities(seed: u64) -> Result<(bool, String)> {
    let mut rng = derived_rng(seed, "verify-embedding", 0);
    let plan = EmbeddingPlan::new(2, 20, 0.25)?;
    let layers: Vec<LayerPair> = (0..2)
        .map(|_| {
            let bits = |rng: &mut rand_chacha::ChaCha8Rng| (0..20).map(|_| rng.gen_range(0..2u8)).collect();
            LayerPair::new(bits(&mut rng), bits(&mut rng))
        })
        .collect::<Result<_>>()?;
    let totals = embedding_totals(&layers, &plan)?;
    let stream = embed_ghse_layers(&layers, &plan)?;
    let l0 = exact_l0(&stream) as u128;
    let ok = plan.total == 2020 && totals.f == 2 * totals.f_prime as i128 - plan.total as i128 && l0 == totals.l0();
    Ok((ok, format!("N = {}, F' = {}, L0 = {l0}", plan.total, totals.f_prime)))
}

fn disjointness(seed: u64) -> Result<(bool, String)> {
    let mut ok = true;
    for (i, unique) in [false, true, false, true].into_iter().enumerate() {
        let d = disjointness_demo(5, 40, unique, seed.wrapping_add(i as u64))?;
        ok &= d.output == d.expected && d.cost.total_bits == 3;
    }
    Ok((ok, "t = 5, n = 40".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for c in run_checks(42) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert_eq!(check_names().len(), CHECKS.len());
    }
}
