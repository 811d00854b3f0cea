//! Built algorithms against the schoolbook product.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use kmul_core::builder::direct_product;
use kmul_core::{BuildOptions, Builder, Costing, KMulAlgorithm, TensorDecomposition};
use proptest::prelude::*;

type Cached = (Arc<KMulAlgorithm>, Arc<TensorDecomposition>);

/// Builds are cached across proptest cases.
fn algorithm(q: u64, n: usize, k: usize) -> Cached {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize, usize), Cached>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&(q, n, k)) {
        return hit.clone();
    }
    let b = Builder::for_order(q, BuildOptions::default()).unwrap();
    let alg = b.build(n, k).unwrap();
    let dec = alg.flatten().unwrap().decomposition;
    let entry = (Arc::new(alg), Arc::new(dec));
    cache.lock().unwrap().insert((q, n, k), entry.clone());
    entry
}

fn cell() -> impl Strategy<Value = (u64, usize, usize)> {
    (
        prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9]),
        1usize..=9,
        2usize..=4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn run_and_flatten_agree_with_direct_product(
        (q, n, k) in cell(),
        raw in prop::collection::vec(any::<u32>(), 36),
    ) {
        let (alg, dec) = algorithm(q, n, k);
        let inputs: Vec<Vec<u32>> = (0..k)
            .map(|j| raw[j * 9..j * 9 + n].iter().map(|x| x % q as u32).collect())
            .collect();
        let want = direct_product(alg.field(), &inputs).unwrap();
        prop_assert_eq!(&alg.run(&inputs, Costing::Mu).unwrap(), &want);
        prop_assert_eq!(&alg.run(&inputs, Costing::Nu).unwrap(), &want);
        prop_assert_eq!(&dec.apply(&inputs).unwrap(), &want);
        prop_assert_eq!(dec.rank(), alg.cost().rank);
    }

    #[test]
    fn product_is_symmetric_in_inputs(
        (q, n, k) in cell(),
        raw in prop::collection::vec(any::<u32>(), 36),
        rot in 0usize..4,
    ) {
        let (alg, _) = algorithm(q, n, k);
        let mut inputs: Vec<Vec<u32>> = (0..k)
            .map(|j| raw[j * 9..j * 9 + n].iter().map(|x| x % q as u32).collect())
            .collect();
        let a = alg.run(&inputs, Costing::Mu).unwrap();
        inputs.rotate_left(rot % k);
        prop_assert_eq!(alg.run(&inputs, Costing::Mu).unwrap(), a);
    }

    #[test]
    fn plan_reaches_target_with_distinct_places((q, n, k) in cell()) {
        let (alg, _) = algorithm(q, n, k);
        let plan = alg.plan();
        if n > 1 {
            prop_assert_eq!(plan.target, k * (n - 1) + 1);
            prop_assert!(plan.total >= plan.target);
            let sum: usize = plan.places.iter().map(|p| p.degree().unwrap()).sum();
            prop_assert_eq!(sum, plan.total);
            let mut sorted = plan.places.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), plan.places.len());
            let cost: u128 = plan.degrees.iter().map(|d| d.rank * d.count as u128).sum();
            prop_assert_eq!(cost, alg.cost().rank as u128);
        }
    }
}

#[test]
fn modes_agree_on_products() {
    let inputs = vec![vec![1, 2, 0, 1], vec![2, 2, 1, 0], vec![0, 1, 1, 1]];
    let mut ranks = Vec::new();
    for mode in ["recursive", "builtin", "naive"] {
        let opts = BuildOptions {
            mode: mode.parse().unwrap(),
            ..BuildOptions::default()
        };
        let b = Builder::for_order(3, opts).unwrap();
        let alg = b.build(4, 3).unwrap();
        let want = direct_product(alg.field(), &inputs).unwrap();
        assert_eq!(alg.run(&inputs, Costing::Mu).unwrap(), want);
        ranks.push(alg.flatten().unwrap().decomposition.rank());
    }
    assert!(ranks[0] <= ranks[1] && ranks[1] <= ranks[2], "{ranks:?}");
}
