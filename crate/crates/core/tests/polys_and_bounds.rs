//! Irreducible enumeration and the bound formulas against brute force.

use kmul_core::bounds::{self, gs_genus, gs_genus_bounds, smallest_even_r, MuTable};
use kmul_core::poly::{self, count_irreducibles, monic_polys};
use kmul_core::{BaseField, Poly};
use num_bigint::BigInt;
use proptest::prelude::*;
use std::cmp::Ordering;

/// Irreducible iff no monic factor of degree `1..=d/2` divides it.
fn trial_division_irreducible(f: &Poly, field: &BaseField) -> bool {
    let d = f.degree().unwrap();
    (1..=d / 2).all(|e| monic_polys(field, e).all(|g| !f.rem(&g, field).unwrap().is_zero()))
}

#[test]
fn irreducible_counts_match_trial_division() {
    for (q, max_d) in [(2u64, 8usize), (3, 5), (4, 4), (5, 3), (9, 2)] {
        let f = BaseField::with_order(q).unwrap();
        for d in 1..=max_d {
            let brute = monic_polys(&f, d).filter(|g| trial_division_irreducible(g, &f)).count();
            let listed = poly::irreducibles(&f, d).count();
            assert_eq!(listed as u128, count_irreducibles(q, d), "q={q} d={d}");
            assert_eq!(listed, brute, "q={q} d={d}");
        }
    }
}

#[test]
fn irreducibles_come_in_enumeration_order() {
    let f = BaseField::with_order(3).unwrap();
    let all: Vec<Poly> = monic_polys(&f, 4).collect();
    let irr: Vec<Poly> = poly::irreducibles(&f, 4).collect();
    let positions: Vec<usize> = irr.iter().map(|g| all.iter().position(|h| h == g).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(all.len(), 81);
}

#[test]
fn large_degree_default_modulus_exists() {
    let f7 = BaseField::with_order(7).unwrap();
    let p = poly::enumerate_irreducibles(&f7, 64, 1);
    assert_eq!(p.len(), 1);
    assert_eq!(p[0].degree(), Some(64));
    assert_ne!(p[0].coeff(0), 0);
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

proptest! {
    #[test]
    fn genus_sandwich(l in 2u64..12, i in 1u32..25) {
        let g = gs_genus(&big(l), i);
        let b = gs_genus_bounds(&big(l), i);
        prop_assert_eq!(b.lower.cmp_int(&g), Ordering::Less);
        prop_assert_eq!(b.upper.cmp_int(&g), Ordering::Greater);
        prop_assert_ne!(b.tight_upper.cmp_int(&g), Ordering::Less);
    }

    #[test]
    fn smallest_r_is_tight(q in prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16]), k in 2u64..40) {
        let p = smallest_even_r(q, k).unwrap();
        let t = (k + 1) * (k + 1);
        prop_assert_eq!(p.r % 2, 0);
        prop_assert!(BigInt::from(t) < num_traits::pow(big(q), p.r as usize));
        if p.r > 2 {
            prop_assert!(BigInt::from(t) >= num_traits::pow(big(q), p.r as usize - 2));
        }
        prop_assert_eq!(p.l.clone(), num_traits::pow(big(q), p.r as usize / 2));
    }

    #[test]
    fn tower_bound_below_linear_bound(n in 1u64..3000, s2 in 2usize..4, s3 in 4usize..8) {
        let params = smallest_even_r(2, 2).unwrap();
        let s = [1, s2, s3, s3 + 3];
        let table = MuTable::user_supplied(2, &s, &s).unwrap();
        let t = bounds::tower_bounds(&params, n, &table).unwrap();
        let c = bounds::linear_bounds(&params, n, &table).unwrap();
        prop_assert!(t.mu <= c.mu);
        prop_assert!(c.mu <= c.mu_simplified);
        prop_assert!(t.nu <= c.nu);
    }
}

#[test]
fn gamma_is_smallest_degree_with_a_place() {
    // oracle: the existence condition 2g + 1 <= q^((n-1)/2) (q^(1/2) - 1),
    // scanned upward with floating point well away from ties
    for q in [2u64, 3, 4, 5] {
        for g in [1u64, 5, 9, 45, 225] {
            let want = (1u64..200)
                .find(|&n| {
                    let qf = q as f64;
                    qf.powf((n as f64 - 1.0) / 2.0) * (qf.sqrt() - 1.0) >= (2 * g + 1) as f64
                })
                .unwrap();
            assert_eq!(bounds::gamma_exact(q, &big(g)), want, "q={q} g={g}");
        }
    }
}
