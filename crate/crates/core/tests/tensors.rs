//! Verification catches corrupted decompositions.

use kmul_core::builder::verify_decomposition;
use kmul_core::{BuildOptions, Builder, Error, TensorDecomposition, Term, Verdict};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flipping_an_output_coefficient_is_detected(
        q in prop::sample::select(vec![2u64, 3, 4, 5]),
        n in 2usize..6,
        k in 2usize..4,
        pick in any::<usize>(),
        coord in any::<usize>(),
        delta in 1u32..5,
    ) {
        let b = Builder::for_order(q, BuildOptions::default()).unwrap();
        let dec = b.build(n, k).unwrap().flatten().unwrap().decomposition;
        // a term whose forms are all nonzero contributes a nonzero tensor
        let live: Vec<usize> = (0..dec.rank())
            .filter(|&i| dec.terms()[i].forms.iter().all(|f| f.iter().any(|&c| c != 0)))
            .collect();
        prop_assume!(!live.is_empty());
        let idx = live[pick % live.len()];
        let mut terms = dec.terms().to_vec();
        let field = dec.field().base().clone();
        let c = coord % n;
        let d = delta % q as u32;
        prop_assume!(d != 0);
        terms[idx].output[c] = field.add(terms[idx].output[c], d);
        let bad = TensorDecomposition::new(dec.field().clone(), k, terms).unwrap();
        prop_assert!(!bad.verify_with_budget(u128::MAX).unwrap().passed());
        prop_assert!(matches!(
            verify_decomposition(&bad, &BuildOptions::default()),
            Err(Error::VerificationFailed(_))
        ));
    }
}

#[test]
fn mismatch_reports_first_tuple() {
    let b = Builder::for_order(2, BuildOptions::default()).unwrap();
    let dec = b.build(2, 2).unwrap().flatten().unwrap().decomposition;
    let mut terms: Vec<Term> = dec.terms().to_vec();
    terms.push(Term {
        forms: vec![vec![0, 1], vec![0, 1]],
        output: vec![1, 0],
    });
    let bad = TensorDecomposition::new(dec.field().clone(), 2, terms).unwrap();
    match bad.verify_with_budget(u128::MAX).unwrap() {
        Verdict::Mismatch { tuple, .. } => assert_eq!(tuple, vec![1, 1]),
        Verdict::Verified => panic!("corruption not detected"),
    }
}

#[test]
fn randomized_check_above_budget() {
    let b = Builder::for_order(3, BuildOptions::default()).unwrap();
    let dec = b.build(5, 3).unwrap().flatten_unchecked().unwrap();
    let opts = BuildOptions {
        budget: 10,
        samples: 64,
        seed: 7,
        ..BuildOptions::default()
    };
    let v = verify_decomposition(&dec, &opts).unwrap();
    assert!(!v.is_exhaustive());
}
