use commlab::bits::ceil_log2;
use commlab::distribution::ProductDistribution;
use commlab::engine::{measure_error, ErrorSource, InputPartition, MeasureOptions};
use commlab::function::{oneway_dcc2_oracle, FunctionTable};
use commlab::numeric::{majority_error, majority_error_bound};
use commlab::seed::rng_from;
use commlab::simulate::{
    det_stream_from_two_party, k_from_two_simulation, row_class_protocols, Amplified, AmplifierPlan, StreamOptions,
};
use commlab::sumequal::{SumDomain, SumEqualExact, SumEqualFingerprint};
use proptest::prelude::*;

const CAP: u64 = 1 << 20;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn automaton_computes_f_within_its_memory_bound(
        alphabet in 2u32..=4,
        m in 1usize..=5,
        outputs in 2u32..=3,
        seed in any::<u64>(),
    ) {
        let f = FunctionTable::random_symmetric(alphabet, m, outputs, &mut rng_from(seed)).unwrap();
        let a = det_stream_from_two_party(&f, row_class_protocols(&f, CAP).unwrap(), &StreamOptions::default()).unwrap();
        for x in f.domain().iter() {
            prop_assert_eq!(a.run(&x).unwrap(), f.eval(&x));
        }
        let worst = (1..=m).map(|c| oneway_dcc2_oracle(&f, c, CAP).unwrap()).max().unwrap() as usize;
        prop_assert!(a.memory_bits() <= worst + ceil_log2(m as u64) as usize);
    }

    #[test]
    fn plans_are_minimal(d in 1u32..49, e in 1u32..200) {
        let delta = d as f64 / 100.0;
        let epsilon = e as f64 / 10_000.0;
        let plan = AmplifierPlan::new(delta, epsilon).unwrap();
        prop_assert_eq!(plan.copies, 2 * plan.t + 1);
        prop_assert!(plan.exact_error <= plan.error_bound * (1.0 + 1e-9));
        prop_assert!(plan.error_bound <= epsilon * (1.0 + 1e-9));
        if plan.t > 0 {
            prop_assert!(majority_error_bound(delta, plan.t - 1) > epsilon);
        }
        prop_assert!((plan.exact_error - majority_error(delta, plan.t)).abs() < 1e-15);
    }
}

#[test]
fn parity_drops_its_index() {
    let f = FunctionTable::parity(4).unwrap();
    let with = det_stream_from_two_party(&f, row_class_protocols(&f, CAP).unwrap(), &StreamOptions::default()).unwrap();
    assert_eq!(with.memory_bits(), 3);
    let options = StreamOptions {
        drop_index: true,
        ..StreamOptions::default()
    };
    let without = det_stream_from_two_party(&f, row_class_protocols(&f, CAP).unwrap(), &options).unwrap();
    assert_eq!(without.memory_bits(), 1);
    for x in f.domain().iter() {
        assert_eq!(with.run(&x).unwrap(), f.eval(&x));
        assert_eq!(without.run(&x).unwrap(), f.eval(&x));
    }
}

#[test]
fn running_sum_mod_three() {
    let f = FunctionTable::sum_equal_mod(3, 3, 0).unwrap();
    let a = det_stream_from_two_party(&f, row_class_protocols(&f, CAP).unwrap(), &StreamOptions::default()).unwrap();
    let mut n = 0;
    for x in f.domain().iter() {
        assert_eq!(a.run(&x).unwrap(), f.eval(&x));
        n += 1;
    }
    assert_eq!(n, 27);
}

#[test]
fn constant_function_costs_only_the_index() {
    let f = FunctionTable::from_fn("constant", vec![3; 5], true, |_| 1).unwrap();
    let a = det_stream_from_two_party(&f, row_class_protocols(&f, CAP).unwrap(), &StreamOptions::default()).unwrap();
    assert_eq!(a.max_message_bits(), 0);
    assert_eq!(a.memory_bits(), ceil_log2(5) as usize);
}

#[test]
fn majority_example_at_three() {
    let e = majority_error(0.25, 3);
    assert!((e - 0.070556).abs() < 1e-6, "{e}");
    assert!((majority_error_bound(0.25, 3) - 0.10546875).abs() < 1e-12);
}

#[test]
fn zero_error_base_gives_zero_error_simulation() {
    let (k, p) = (4usize, 3u32);
    let f = FunctionTable::sum_equal_mod(k, p, 0).unwrap();
    let mu = ProductDistribution::uniform(&vec![p; k]).unwrap();
    let sim = k_from_two_simulation(SumEqualExact::new(p as u64, 0, 2).unwrap(), &f, &mu, 0.1, CAP).unwrap();
    let report = measure_error(
        &sim,
        &f,
        &InputPartition::singletons(k),
        ErrorSource::Exhaustive { seeds_per_input: 3 },
        1,
        &MeasureOptions::default(),
    )
    .unwrap();
    assert_eq!(report.error_estimate, Some(0.0));
}

#[test]
fn amplified_fingerprint_under_the_product_distribution() {
    let (k, p, delta) = (4usize, 3u32, 0.1);
    let f = FunctionTable::sum_equal_mod(k, p, 0).unwrap();
    let mu = ProductDistribution::uniform(&vec![p; k]).unwrap();
    let base = SumEqualFingerprint::new(SumDomain::Modular { modulus: p as u64 }, k, 0, delta, 2).unwrap();
    let plan = AmplifierPlan::for_k_from_two(delta, k).unwrap();
    let sim = k_from_two_simulation(Amplified::new(base, plan.copies as usize).unwrap(), &f, &mu, delta, CAP).unwrap();
    let report = measure_error(
        &sim,
        &f,
        &InputPartition::singletons(k),
        ErrorSource::MonteCarlo {
            sampler: &mu,
            trials: 5_000,
        },
        2,
        &MeasureOptions::default(),
    )
    .unwrap();
    assert!(report.error_estimate.unwrap() <= delta);
    assert!(report.max_message_bits <= report.declared_max_message_bits.unwrap());
}
