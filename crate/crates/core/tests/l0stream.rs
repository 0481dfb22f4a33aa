use commlab::l0stream::{
    embed_ghse_layers, embedded_exact_l0, embedding_totals, exact_l0, exact_l0_dense, generate_layers, l0_estimate,
    random_strict_stream, EmbeddingPlan, L0Sketch, LayerPair, SketchParams, TurnstileStream, Update,
};
use commlab::seed::{derive_seed, rng_from};
use proptest::prelude::*;

fn updates(dim: usize) -> impl Strategy<Value = Vec<(usize, i64)>> {
    proptest::collection::vec((1..=dim, -3i64..=3), 0..60)
}

fn strict_by_replay(dim: usize, ups: &[(usize, i64)]) -> bool {
    let mut v = vec![0i64; dim + 1];
    ups.iter().all(|&(i, d)| {
        v[i] += d;
        v[i] >= 0
    })
}

fn layer_strategy(n: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (
        proptest::collection::vec(0u8..2, n),
        proptest::collection::vec(0u8..2, n),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn validator_agrees_with_a_replay(ups in updates(6)) {
        let list: Vec<Update> = ups.iter().map(|&(index, delta)| Update { index, delta }).collect();
        let result = TurnstileStream::new(6, 3, true, list.clone());
        prop_assert_eq!(result.is_ok(), strict_by_replay(6, &ups));
        if let Err(e) = result {
            prop_assert_eq!(e.kind(), "strict-violation");
        }
        let loose = TurnstileStream::new(6, 3, false, list).unwrap();
        prop_assert_eq!(exact_l0(&loose), exact_l0_dense(6, loose.updates().iter().copied()));
        let back = TurnstileStream::parse(&loose.to_text()).unwrap();
        prop_assert_eq!(back, loose);
    }

    #[test]
    fn sketches_merge_like_concatenation(seed in any::<u64>(), cut in 0usize..=400, l0 in 0usize..=150) {
        let s = random_strict_stream(300, 400, 5, l0, &mut rng_from(seed)).unwrap();
        prop_assert_eq!(exact_l0(&s), l0);
        let params = SketchParams::for_stream(0.25, &s).unwrap();
        let (a, b) = s.updates().split_at(cut);
        let mut whole = L0Sketch::new(params, seed);
        whole.extend(s.updates().iter().copied());
        let mut left = L0Sketch::new(params, seed);
        left.extend(a.iter().copied());
        let mut right = L0Sketch::new(params, seed);
        right.extend(b.iter().copied());
        left.merge(&right).unwrap();
        prop_assert_eq!(&left, &whole);
        prop_assert!(L0Sketch::new(params, seed ^ 1).merge(&whole).is_err());
    }

    #[test]
    fn embedding_identities_hold(t in 1usize..=3, n in 1usize..=12, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = rng_from(seed);
        let plan = EmbeddingPlan::new(t, n, 0.5).unwrap();
        prop_assert_eq!(plan.total as u128, n as u128 * (100u128.pow(t as u32) - 1) / 99);
        let layers: Vec<LayerPair> = (0..t)
            .map(|_| {
                let a = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
                let b = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
                LayerPair::new(a, b).unwrap()
            })
            .collect();
        let totals = embedding_totals(&layers, &plan).unwrap();
        prop_assert_eq!(totals.f, 2 * totals.f_prime as i128 - plan.total as i128);
        let by_layer: i128 = layers.iter().zip(&plan.frequencies).map(|(l, &w)| w as i128 * l.f() as i128).sum();
        prop_assert_eq!(totals.f, by_layer);
        let stream = embed_ghse_layers(&layers, &plan).unwrap();
        prop_assert!(stream.is_strict());
        prop_assert_eq!(exact_l0(&stream) as u128, totals.l0());
        prop_assert_eq!(embedded_exact_l0(&layers, &plan).unwrap() as u128, totals.l0());
    }

    #[test]
    fn layer_strings_are_validated((a, b) in layer_strategy(5)) {
        let mut bad = a.clone();
        bad[0] = 2;
        prop_assert!(LayerPair::new(bad, b.clone()).is_err());
        prop_assert!(LayerPair::new(a.clone(), b[..4].to_vec()).is_err());
        let pair = LayerPair::new(a, b).unwrap();
        prop_assert_eq!(pair.f(), 2 * pair.f_prime() as i64 - 5);
    }
}

#[test]
fn stream_examples() {
    let s = TurnstileStream::new(
        3,
        2,
        true,
        vec![
            Update { index: 1, delta: 2 },
            Update { index: 2, delta: 1 },
            Update { index: 1, delta: -2 },
        ],
    )
    .unwrap();
    assert_eq!(exact_l0(&s), 1);
    assert_eq!(exact_l0(&TurnstileStream::new(3, 2, true, vec![]).unwrap()), 0);
    let err = TurnstileStream::new(3, 2, true, vec![Update { index: 1, delta: -1 }]).unwrap_err();
    assert_eq!(err.kind(), "strict-violation");
}

#[test]
fn empty_support_estimates_zero() {
    let mut rng = rng_from(8);
    let s = random_strict_stream(1000, 2000, 10, 0, &mut rng).unwrap();
    assert_eq!(exact_l0(&s), 0);
    for seed in 0..20 {
        assert_eq!(l0_estimate(&s, 0.1, 1.0 / 3.0, seed).unwrap().estimate, 0.0);
    }
}

#[test]
fn half_support_is_estimated_within_ten_percent() {
    let s = random_strict_stream(10_000, 50_000, 100, 5000, &mut rng_from(9)).unwrap();
    let runs = 30u64;
    let good = (0..runs)
        .filter(|&r| {
            let e = l0_estimate(&s, 0.1, 1.0 / 3.0, derive_seed(9, "half", r))
                .unwrap()
                .estimate;
            (4500.0..=5500.0).contains(&e)
        })
        .count() as u64;
    assert!(3 * good >= 2 * runs, "{good}/{runs}");
}

/// With `n = 900` and `eps = 1/30` a layer's `|f|` should exceed
/// `20 eps n = 600` at most one time in a hundred.
#[test]
fn layer_magnitudes_concentrate() {
    let plan = EmbeddingPlan::new(1, 900, 1.0 / 30.0).unwrap();
    let runs = 300u64;
    let mut large = 0;
    for r in 0..runs {
        let layer = &generate_layers(&plan, 16, derive_seed(10, "concentration", r)).unwrap()[0];
        large += (layer.pair.f().abs() as f64 >= 20.0 * plan.epsilon * 900.0) as u64;
    }
    assert!(large as f64 / runs as f64 <= 0.01, "{large}/{runs}");
}
