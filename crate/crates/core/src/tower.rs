//! Composition of decompositions along `F_p ⊂ K = F_p[u]/(P_a) ⊂ K[y]/(R)`.
//!
//! A term of the outer decomposition (over `K`) combined with a term of the
//! inner one (over `F_p`, for `K` itself) gives an `F_p`-term of the tower,
//! so ranks multiply. The result is re-expressed in the power basis of the
//! requested modulus through an explicit field isomorphism.

use crate::error::{Error, Result};
use crate::ext::ExtField;
use crate::linalg::Matrix;
use crate::tensor::{TensorDecomposition, Term};

/// Coordinates over `F_p` of a tower element, index `b * a + i` for the
/// digit `i` of the coefficient of `y^b`.
fn flatten_coords(tower: &ExtField, x: &[u32]) -> Vec<u32> {
    x.iter().flat_map(|&c| tower.base().digits(c)).collect()
}

/// First root of `target`'s modulus in the tower, in label order.
fn find_root(tower: &ExtField, target: &ExtField) -> Result<Vec<u32>> {
    let coeffs = target.modulus().coeffs();
    let embed = |c: u32| {
        let mut v = tower.zero();
        v[0] = c;
        v
    };
    tower
        .elements()
        .find(|theta| {
            let mut acc = tower.zero();
            for &c in coeffs.iter().rev() {
                acc = tower.mul_unchecked(&acc, theta);
                acc = tower.add(&acc, &embed(c)).expect("same level");
            }
            acc.iter().all(|&v| v == 0)
        })
        .ok_or_else(|| Error::Internal("modulus has no root in the tower".into()))
}

/// Composes `inner` (for `K` over `F_p`) with `outer` (for `K[y]/(R)` over
/// `K`) into a decomposition for `target = F_p[x]/(P)`, `deg P = deg K * deg R`.
/// The base of `outer` must be `K` with the modulus of `inner`'s field.
pub fn compose(
    inner: &TensorDecomposition,
    outer: &TensorDecomposition,
    target: &ExtField,
) -> Result<TensorDecomposition> {
    let fp = inner.field().base();
    let kf = outer.field().base();
    let a = inner.n();
    let b = outer.n();
    let k = inner.k();
    if !fp.is_prime_field() || target.base() != fp {
        return Err(Error::InvalidParameter("composition needs a common prime base".into()));
    }
    if kf.characteristic() != fp.characteristic()
        || kf.degree() != a
        || kf.modulus() != inner.field().modulus().coeffs()
    {
        return Err(Error::InvalidParameter(
            "outer base field is not the inner extension".into(),
        ));
    }
    if outer.k() != k {
        return Err(Error::ShapeMismatch("arity differs between levels".into()));
    }
    let d = a * b;
    if target.degree() != d {
        return Err(Error::ShapeMismatch(format!(
            "target degree {} is not {a} * {b}",
            target.degree()
        )));
    }
    let u_pow: Vec<u32> = (0..a)
        .map(|i| kf.from_digits(&inner.field().basis(i)))
        .collect();

    let tower = outer.field();
    let theta = find_root(tower, target)?;
    let mut cols = Vec::with_capacity(d);
    let mut pw = tower.one();
    for _ in 0..d {
        cols.push(flatten_coords(tower, &pw));
        pw = tower.mul_unchecked(&pw, &theta);
    }
    // power-basis coordinates -> tower coordinates
    let basis = Matrix::from_cols(&cols, d);
    let basis_inv = basis.inverse(fp)?;

    let mut terms = Vec::with_capacity(outer.rank() * inner.rank());
    for t1 in outer.terms() {
        for t2 in inner.terms() {
            let forms = (0..k)
                .map(|j| {
                    let mut f = vec![0; d];
                    for (bi, &beta) in t1.forms[j].iter().enumerate() {
                        for (ai, &u) in u_pow.iter().enumerate() {
                            f[bi * a + ai] = fp.dot(&t2.forms[j], &kf.digits(kf.mul(beta, u)));
                        }
                    }
                    basis.vec_mul(&f, fp)
                })
                .collect::<Result<Vec<_>>>()?;
            let gamma = kf.from_digits(&t2.output);
            let out: Vec<u32> = t1
                .output
                .iter()
                .flat_map(|&delta| kf.digits(kf.mul(delta, gamma)))
                .collect();
            terms.push(Term {
                forms,
                output: basis_inv.mul_vec(&out, fp)?,
            });
        }
    }
    TensorDecomposition::new(target.clone(), k, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BaseField;
    use crate::poly;
    use crate::tensor::builtin_bilinear;

    #[test]
    fn karatsuba_over_karatsuba_gives_rank_nine() {
        let f2 = BaseField::with_order(2).unwrap();
        let f4 = ExtField::with_degree(f2.clone(), 2).unwrap();
        let inner = builtin_bilinear(&f4).unwrap();
        let k4 = BaseField::new(2, f4.modulus().coeffs().to_vec()).unwrap();
        let outer = builtin_bilinear(&ExtField::with_degree(k4, 2).unwrap()).unwrap();
        for p in poly::enumerate_irreducibles(&f2, 4, 10) {
            let target = ExtField::new(f2.clone(), p).unwrap();
            let dec = compose(&inner, &outer, &target).unwrap();
            assert_eq!(dec.rank(), 9);
            assert!(dec.verify().unwrap());
        }
    }

    #[test]
    fn trilinear_composition_over_f3() {
        let f3 = BaseField::with_order(3).unwrap();
        let f9 = ExtField::with_degree(f3.clone(), 2).unwrap();
        let inner = TensorDecomposition::naive(f9.clone(), 3);
        let k9 = BaseField::new(3, f9.modulus().coeffs().to_vec()).unwrap();
        let outer = TensorDecomposition::naive(ExtField::with_degree(k9, 2).unwrap(), 3);
        let target = ExtField::with_degree(f3, 4).unwrap();
        let dec = compose(&inner, &outer, &target).unwrap();
        assert_eq!(dec.rank(), 64);
        assert!(dec.verify().unwrap());
    }

    #[test]
    fn rejects_mismatched_levels() {
        let f2 = BaseField::with_order(2).unwrap();
        let f4 = ExtField::with_degree(f2.clone(), 2).unwrap();
        let inner = builtin_bilinear(&f4).unwrap();
        let k4 = BaseField::new(2, f4.modulus().coeffs().to_vec()).unwrap();
        let outer = builtin_bilinear(&ExtField::with_degree(k4, 2).unwrap()).unwrap();
        let target = ExtField::with_degree(f2, 3).unwrap();
        assert!(compose(&inner, &outer, &target).is_err());
    }
}
