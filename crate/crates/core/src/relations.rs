//! Elementary relations between complexity witnesses, checked on
//! decompositions the builder actually produces.

use crate::bounds::Relation;
use crate::builder::{verify_decomposition, Builder, COMPOSE_LIMIT};
use crate::error::Result;
use crate::ext::ExtField;
use crate::tower;

/// Multilinear witness for degree `n * m`, including the explicit
/// composition through `F_{q^n}` when the extension is small enough.
fn composed_mu_witness(b: &Builder, n: usize, m: usize, k: usize) -> Result<Option<usize>> {
    let q = b.base().order() as u128;
    if !b.base().is_prime_field() || q.checked_pow((n * m) as u32).is_none_or(|v| v > COMPOSE_LIMIT) {
        return Ok(None);
    }
    let inner = b.best_decomposition(n, k)?;
    let tb = b.tower_builder(n)?;
    let outer = tb.best_decomposition(m, k)?;
    let target = ExtField::new(b.base().clone(), b.default_modulus(n * m)?)?;
    let dec = tower::compose(&inner.decomposition, &outer.decomposition, &target)?;
    verify_decomposition(&dec, b.options())?;
    Ok(Some(dec.rank()))
}

/// Witness checks for scalar chaining, chained bilinear products, and
/// monotonicity and submultiplicativity along `F_q ⊂ F_{q^n} ⊂ F_{q^{nm}}`.
pub fn witness_relations(b: &Builder, k: usize, n: usize, m: usize) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    let nu1 = b.nu_witness(1, k)?;
    out.push(Relation::check(
        "scalar-chain",
        format!("nu_{{q,{k}}}(1) <= k - 1"),
        nu1 as u64,
        (k - 1) as u64,
    ));
    let nu_n = b.nu_witness(n, k)?;
    let mu2_n = b.mu_witness(n, 2)?;
    out.push(Relation::check(
        "chained-bilinear",
        format!("nu_{{q,{k}}}({n}) <= (k - 1) mu_q({n})"),
        nu_n as u64,
        ((k - 1) * mu2_n) as u64,
    ));

    let mu_n = b.mu_witness(n, k)?;
    let mut mu_nm = b.mu_witness(n * m, k)?;
    let mut mu2_nm = b.mu_witness(n * m, 2)?;
    if let Some(c) = composed_mu_witness(b, n, m, k)? {
        mu_nm = mu_nm.min(c);
    }
    if let Some(c) = composed_mu_witness(b, n, m, 2)? {
        mu2_nm = mu2_nm.min(c);
    }
    let nu_nm = b.nu_witness(n * m, k)?.min((k - 1) * mu2_nm);
    out.push(Relation::check(
        "embedding-mu",
        format!("mu_{{q,{k}}}({n}) <= mu_{{q,{k}}}({})", n * m),
        mu_n as u64,
        mu_nm as u64,
    ));
    out.push(Relation::check(
        "embedding-nu",
        format!("nu_{{q,{k}}}({n}) <= nu_{{q,{k}}}({})", n * m),
        nu_n as u64,
        nu_nm as u64,
    ));

    let sub_mu = format!("mu_{{q,{k}}}({}) <= mu_{{q,{k}}}({n}) mu_{{q^{n},{k}}}({m})", n * m);
    let sub_nu = format!("nu_{{q,{k}}}({}) <= nu_{{q,{k}}}({n}) nu_{{q^{n},{k}}}({m})", n * m);
    match b.tower_builder(n) {
        Ok(tb) => {
            let outer_mu = tb.mu_witness(m, k)?;
            let outer_nu = tb.nu_witness(m, k)?;
            out.push(Relation::check("submultiplicative-mu", sub_mu, mu_nm as u64, (mu_n * outer_mu) as u64));
            out.push(Relation::check("submultiplicative-nu", sub_nu, nu_nm as u64, (nu_n * outer_nu) as u64));
        }
        Err(_) => {
            out.push(Relation::not_checkable("submultiplicative-mu", sub_mu));
            out.push(Relation::not_checkable("submultiplicative-nu", sub_nu));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::RelationStatus;
    use crate::builder::BuildOptions;

    #[test]
    fn relations_hold_over_f2_and_f3() {
        for q in [2, 3] {
            let b = Builder::for_order(q, BuildOptions::default()).unwrap();
            let rel = witness_relations(&b, 2, 2, 2).unwrap();
            assert_eq!(rel.len(), 6);
            for r in &rel {
                assert_eq!(r.status, RelationStatus::Holds, "{r:?}");
            }
        }
    }

    #[test]
    fn scalar_chain_is_k_minus_one() {
        let b = Builder::for_order(5, BuildOptions::default()).unwrap();
        let rel = witness_relations(&b, 3, 1, 2).unwrap();
        assert_eq!(rel[0].lhs, Some(2));
        assert_eq!(rel[0].rhs, Some(2));
    }

    #[test]
    fn non_prime_base_is_not_checkable() {
        let b = Builder::for_order(4, BuildOptions::default()).unwrap();
        let rel = witness_relations(&b, 2, 2, 2).unwrap();
        assert_eq!(rel[4].status, RelationStatus::NotCheckable);
    }
}
