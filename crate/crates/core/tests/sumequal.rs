use commlab::engine::{run_protocol, InputPartition};
use commlab::numeric::{is_prime, lcm_upto_u64, BigRational, ExactDist, Mass};
use commlab::seed::derive_seed;
use commlab::sumequal::{
    augindex_distribution, direct_sum_distribution, rectangle_conditional_probe, EqualityFingerprint, Rectangle,
    SumDomain, SumEqualFingerprint, SumEqualInstance,
};
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

fn partition(k: usize, players: usize) -> InputPartition {
    let cuts: Vec<usize> = (1..players).map(|i| i * k / players).collect();
    InputPartition::contiguous(k, &cuts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modular_fingerprint_accepts_every_equal_instance(
        head in proptest::collection::vec(0i64..257, 1..8),
        modulus in prop::sample::select(vec![5u64, 7, 257]),
        players_seed in any::<u64>(),
        seed in any::<u64>(),
    ) {
        let m = modulus as i64;
        let mut x: Vec<i64> = head.iter().map(|v| v % m).collect();
        x.push((-x.iter().sum::<i64>()).rem_euclid(m));
        let k = x.len();
        let players = 2 + (players_seed % (k as u64 - 1)) as usize;
        let p = SumEqualFingerprint::new(SumDomain::Modular { modulus }, k, 0, 0.1, players).unwrap();
        let part = partition(k, players);
        for s in 0..20 {
            prop_assert_eq!(run_protocol(&p, &part, &x, seed ^ s).unwrap().output, 1);
        }
    }

    #[test]
    fn integer_fingerprint_accepts_every_equal_instance(
        head in proptest::collection::vec(-8i64..=8, 1..16),
        target in -20i64..20,
        seed in any::<u64>(),
    ) {
        let mut x = head.clone();
        x.push(target - head.iter().sum::<i64>());
        let k = x.len();
        prop_assume!(x[k - 1].abs() <= 8 * k as i64);
        let p = SumEqualFingerprint::new(SumDomain::Integers { bound: 8 }, k, target, 0.1, k).unwrap();
        for s in 0..20 {
            prop_assert_eq!(run_protocol(&p, &InputPartition::singletons(k), &x, seed ^ s).unwrap().output, 1);
        }
    }

    #[test]
    fn direct_sum_rows_carry_their_labels(k in 2usize..8, m in 1usize..6, p in prop::sample::select(vec![2u64, 3, 5, 7]), seed in any::<u64>()) {
        let s = direct_sum_distribution(k, m, p, seed).unwrap();
        prop_assert_eq!(s.rows.len(), m);
        for (row, &label) in s.rows.iter().zip(&s.labels) {
            prop_assert_eq!(row.len(), k);
            prop_assert!(row.iter().all(|&x| x < p));
            prop_assert_eq!(row.iter().sum::<u64>() % p, label as u64);
        }
        prop_assert_eq!(s.flipped_outputs(), s.labels.clone());
        // Moving one row between G and B changes exactly that row's sum by one.
        let mut other = s.clone();
        let last = other.rows[0].len() - 1;
        other.rows[0][last] = (other.rows[0][last] + p + 1 - 2 * s.labels[0] as u64) % p;
        let changed: Vec<usize> = (0..m)
            .filter(|&i| other.rows[i].iter().sum::<u64>() % p != s.rows[i].iter().sum::<u64>() % p)
            .collect();
        prop_assert_eq!(changed, vec![0]);
        prop_assert_eq!(other.rows[0].iter().sum::<u64>() % p, 1 - s.labels[0] as u64);
        prop_assert_eq!(direct_sum_distribution(k, m, p, seed).unwrap().rows, s.rows);
    }

    #[test]
    fn augindex_sums_are_zero_or_the_lcm(k in 2usize..10, m in 1usize..8, a in 1u64..12, seed in any::<u64>()) {
        let s = augindex_distribution(k, m, a, seed).unwrap();
        let big_m = lcm_upto_u64(a).unwrap() as i64;
        prop_assert!((1..=a as i64).all(|d| big_m % d == 0));
        prop_assert!((1..=s.m).contains(&s.index));
        for (row, &eq) in s.rows.iter().zip(&s.equal) {
            let sum: i64 = row.iter().sum();
            prop_assert_eq!(sum, if eq { 0 } else { big_m });
            prop_assert!(row[..k - 1].iter().all(|&x| (1..=a as i64).contains(&x)));
        }
        let after: Vec<usize> = s.answers.iter().map(|&(c, _)| c).collect();
        prop_assert_eq!(after, ((s.index + 1)..=m).collect::<Vec<_>>());
        for &(c, ans) in &s.answers {
            prop_assert_eq!(ans, s.equal[c - 1] as u32);
            prop_assert_eq!(s.instance(c - 1).answer(), ans);
        }
    }

    #[test]
    fn rectangle_probe_matches_enumeration(
        p in prop::sample::select(vec![2u64, 3]),
        m in 1usize..=2,
        k in 2usize..=3,
        keep in proptest::collection::vec(any::<bool>(), 18),
        probe_both in any::<bool>(),
    ) {
        let all: Vec<Vec<u64>> = (0..p.pow(m as u32))
            .map(|mut i| (0..m).map(|_| { let d = i % p; i /= p; d }).collect())
            .collect();
        let sets: Vec<Vec<Vec<u64>>> = (0..k - 1)
            .map(|j| {
                let mut s: Vec<Vec<u64>> = all.iter().enumerate().filter(|(i, _)| keep[(j * 9 + i) % 18]).map(|(_, v)| v.clone()).collect();
                if s.is_empty() {
                    s.push(all[0].clone());
                }
                s
            })
            .collect();
        let copies: Vec<usize> = if probe_both && m == 2 { vec![1, 0] } else { vec![0] };
        let rect = Rectangle::new(p, m, sets.clone()).unwrap();
        let report = rectangle_conditional_probe(&rect, &copies, 1 << 20).unwrap();
        prop_assert_eq!(report.conditional, brute_force(p, m, &sets, &copies));
    }
}

/// Enumerates `Z_p^(m (k - 1))`, keeps the points inside the rectangle and
/// tallies the last player's forced coordinates on `copies`.
fn brute_force(p: u64, m: usize, sets: &[Vec<Vec<u64>>], copies: &[usize]) -> ExactDist<Vec<u64>, BigRational> {
    let members: Vec<BTreeSet<&Vec<u64>>> = sets.iter().map(|s| s.iter().collect()).collect();
    let players = sets.len();
    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    let mut inside = 0;
    for mut idx in 0..p.pow((m * players) as u32) {
        let vectors: Vec<Vec<u64>> = (0..players)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        let d = idx % p;
                        idx /= p;
                        d
                    })
                    .collect()
            })
            .collect();
        if vectors.iter().zip(&members).all(|(v, s)| s.contains(v)) {
            inside += 1;
            let last = copies
                .iter()
                .map(|&c| (p * players as u64 - vectors.iter().map(|v| v[c]).sum::<u64>()) % p)
                .collect();
            *counts.entry(last).or_default() += 1;
        }
    }
    ExactDist::new(counts.into_iter().map(|(v, c)| (v, BigRational::ratio(c, inside)))).unwrap()
}

#[test]
fn single_value_restriction_example() {
    let (p, m, k) = (3u64, 1usize, 3usize);
    let sets = vec![vec![vec![2]], vec![vec![0], vec![1], vec![2]]];
    let rect = Rectangle::new(p, m, sets.clone()).unwrap();
    let report = rectangle_conditional_probe(&rect, &[0], 1 << 20).unwrap();
    assert_eq!(report.k, k);
    assert_eq!(report.conditional, brute_force(p, m, &sets, &[0]));
    assert_eq!(report.sd, 0.0);
    let sets = vec![vec![vec![2]], vec![vec![0], vec![1]]];
    let report = rectangle_conditional_probe(&Rectangle::new(p, m, sets.clone()).unwrap(), &[0], 1 << 20).unwrap();
    assert_eq!(report.conditional, brute_force(p, m, &sets, &[0]));
    assert!((report.sd - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn instance_examples() {
    let eq = SumEqualInstance::new(SumDomain::Modular { modulus: 5 }, vec![1, 2, 2], 0).unwrap();
    assert!(eq.is_equal());
    let ne = SumEqualInstance::new(SumDomain::Modular { modulus: 5 }, vec![1, 2, 1], 0).unwrap();
    assert!(!ne.is_equal());
}

/// Sixteen players, integer bound 8, inputs summing to `lcm(1..8) = 840`
/// instead of 0: the false-accept rate stays below delta and equals the
/// share of primes in range dividing 840.
#[test]
fn integer_fingerprint_on_sixteen_players() {
    let k = 16;
    let delta = 0.05;
    let p = SumEqualFingerprint::new(SumDomain::Integers { bound: 8 }, k, 0, delta, k).unwrap();
    let mut x = vec![8i64; 15];
    x.push(840 - 120);
    assert_eq!(x.iter().sum::<i64>(), 840);
    let predicted = p.primes().iter().filter(|&&q| 840 % q == 0).count() as f64 / p.primes().len() as f64;
    let part = InputPartition::singletons(k);
    let trials = 100_000u64;
    let accepted: u64 = (0..trials)
        .map(|i| {
            run_protocol(&p, &part, &x, derive_seed(3, "sixteen", i))
                .unwrap()
                .output as u64
        })
        .sum();
    let rate = accepted as f64 / trials as f64;
    assert!(rate <= delta);
    let sigma = (predicted * (1.0 - predicted) / trials as f64)
        .sqrt()
        .max(1.0 / trials as f64);
    assert!((rate - predicted).abs() <= 3.0 * sigma, "{rate} vs {predicted}");
    x[15] -= 840;
    for s in 0..200 {
        assert_eq!(run_protocol(&p, &part, &x, s).unwrap().output, 1);
    }
}

/// With primes in `[10, 30]` and `x - y = 2 * 3 * 5 * 7 * 11 * 13`, two of the
/// six primes collide, so the protocol accepts with probability 1/3.
#[test]
fn equality_error_matches_the_divisor_count() {
    let fp = EqualityFingerprint::with_prime_range(10, 30).unwrap();
    let primes: Vec<u64> = (10..=30).filter(|&q| is_prime(q)).collect();
    let d: i64 = 2 * 3 * 5 * 7 * 11 * 13;
    let predicted = primes.iter().filter(|&&q| (d as u64).is_multiple_of(q)).count() as f64 / primes.len() as f64;
    assert!((predicted - 1.0 / 3.0).abs() < 1e-12);
    let part = InputPartition::singletons(2);
    let trials = 100_000u64;
    let accepted: u64 = (0..trials)
        .map(|i| {
            run_protocol(&fp, &part, &[d + 5, 5i64], derive_seed(1, "eq", i))
                .unwrap()
                .output as u64
        })
        .sum();
    let rate = accepted as f64 / trials as f64;
    let sigma = (predicted * (1.0 - predicted) / trials as f64).sqrt();
    assert!((rate - predicted).abs() <= 3.0 * sigma, "{rate} vs {predicted}");
    // 12 has no prime factor in range.
    assert_eq!(fp.collision_probability(12, 0), 0.0);
    for i in 0..1000 {
        assert_eq!(run_protocol(&fp, &part, &[17i64, 5], i).unwrap().output, 0);
    }
}

#[test]
fn equality_fingerprint_is_one_sided_on_z257() {
    let fp = EqualityFingerprint::new(257, 0.1).unwrap();
    let part = InputPartition::singletons(2);
    for x in 0..257i64 {
        for s in 0..8 {
            assert_eq!(run_protocol(&fp, &part, &[x, x], s).unwrap().output, 1);
        }
    }
    let mut wrong = 0u64;
    let trials = 100_000u64;
    for i in 0..trials {
        let x = (i % 257) as i64;
        let y = ((i * 31 + 7) % 257) as i64;
        if x == y {
            continue;
        }
        wrong += run_protocol(&fp, &part, &[x, y], derive_seed(2, "eq", i))
            .unwrap()
            .output as u64;
    }
    assert!((wrong as f64) / (trials as f64) <= 0.1);
}
