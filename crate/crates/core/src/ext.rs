//! The extension level `F_{q^d} = F_q[x]/(P)` of the field tower.
//!
//! Elements are coordinate vectors of length `d` in the power basis
//! `1, x, ..., x^{d-1}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::BaseField;
use crate::poly::{self, Poly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtField {
    base: Arc<BaseField>,
    modulus: Poly,
}

impl ExtField {
    /// `modulus` must be monic and irreducible over the base field.
    pub fn new(base: Arc<BaseField>, modulus: Poly) -> Result<Self> {
        let degree = modulus.degree().unwrap_or(0);
        if degree == 0
            || !modulus.is_monic()
            || modulus.coeffs().iter().any(|&c| !base.contains(c))
            || !poly::is_irreducible(&modulus, &base)
        {
            return Err(Error::BadModulus { degree });
        }
        Ok(ExtField { base, modulus })
    }

    /// Skips the irreducibility test; callers hand in enumerated places.
    pub(crate) fn new_unchecked(base: Arc<BaseField>, modulus: Poly) -> Self {
        debug_assert!(modulus.is_monic());
        ExtField { base, modulus }
    }

    /// The extension of degree `d` defined by the first monic irreducible in
    /// enumeration order.
    pub fn with_degree(base: Arc<BaseField>, d: usize) -> Result<Self> {
        let modulus = poly::irreducibles(&base, d)
            .next()
            .ok_or_else(|| Error::InvalidParameter(format!("no irreducible of degree {d}")))?;
        Ok(ExtField { base, modulus })
    }

    pub fn base(&self) -> &Arc<BaseField> {
        &self.base
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().expect("nonzero modulus")
    }

    pub fn zero(&self) -> Vec<u32> {
        vec![0; self.degree()]
    }

    pub fn one(&self) -> Vec<u32> {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    /// The `i`-th power-basis vector `x^i`.
    pub fn basis(&self, i: usize) -> Vec<u32> {
        let mut v = self.zero();
        v[i] = 1;
        v
    }

    pub fn check(&self, a: &[u32]) -> Result<()> {
        if a.len() != self.degree() {
            return Err(Error::LevelMismatch {
                expected: self.degree(),
                got: a.len(),
            });
        }
        for &c in a {
            self.base.check(c)?;
        }
        Ok(())
    }

    /// Reduction of an arbitrary polynomial into coordinates.
    pub fn reduce(&self, f: &Poly) -> Vec<u32> {
        f.rem(&self.modulus, &self.base)
            .expect("nonzero modulus")
            .to_vec(self.degree())
    }

    pub fn to_poly(&self, a: &[u32]) -> Poly {
        Poly::new(a.to_vec())
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Result<Vec<u32>> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.iter().zip(b).map(|(&x, &y)| self.base.add(x, y)).collect())
    }

    pub fn sub(&self, a: &[u32], b: &[u32]) -> Result<Vec<u32>> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.iter().zip(b).map(|(&x, &y)| self.base.sub(x, y)).collect())
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Result<Vec<u32>> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub(crate) fn mul_unchecked(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        self.reduce(&self.to_poly(a).mul(&self.to_poly(b), &self.base))
    }

    /// Multiplication by a scalar of the base field.
    pub fn scale(&self, a: &[u32], c: u32) -> Vec<u32> {
        a.iter().map(|&x| self.base.mul(x, c)).collect()
    }

    pub fn pow(&self, a: &[u32], e: u128) -> Result<Vec<u32>> {
        self.check(a)?;
        let p = self
            .to_poly(a)
            .pow_mod(e, &self.modulus, &self.base)
            .expect("nonzero modulus");
        Ok(p.to_vec(self.degree()))
    }

    /// Inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: &[u32]) -> Result<Vec<u32>> {
        self.check(a)?;
        let f = &self.base;
        let a = self.to_poly(a);
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        // invariant: s_i * a = r_i mod modulus
        let (mut r0, mut r1) = (self.modulus.clone(), a);
        let (mut s0, mut s1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (quot, rem) = r0.div_rem(&r1, f)?;
            let s2 = s0.sub(&quot.mul(&s1, f), f);
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is a nonzero constant since the modulus is irreducible
        let c = f.inv(r0.leading())?;
        Ok(self.reduce(&s0.scale(c, f)))
    }

    /// Product of any number of elements (the empty product is one).
    pub fn product<'a, I>(&self, items: I) -> Result<Vec<u32>>
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        items
            .into_iter()
            .try_fold(self.one(), |acc, x| self.mul(&acc, x))
    }

    /// All `q^d` elements, in label order of the coordinates (little-endian).
    pub fn elements(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        let q = self.base.order() as u128;
        let d = self.degree();
        let total = q.pow(d as u32);
        (0..total).map(move |mut idx| {
            (0..d)
                .map(|_| {
                    let c = (idx % q) as u32;
                    idx /= q;
                    c
                })
                .collect()
        })
    }

    /// Number of elements `q^d`, saturating.
    pub fn size(&self) -> u128 {
        (self.base.order() as u128)
            .checked_pow(self.degree() as u32)
            .unwrap_or(u128::MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> ExtField {
        ExtField::with_degree(BaseField::with_order(2).unwrap(), 2).unwrap()
    }

    #[test]
    fn inverse_of_t_in_f4() {
        let f = f4();
        assert_eq!(f.inv(&[0, 1]).unwrap(), vec![1, 1]);
        assert_eq!(f.mul(&[0, 1], &[1, 1]).unwrap(), f.one());
    }

    #[test]
    fn t_cubed_is_one() {
        let f = f4();
        let t = [0u32, 1];
        assert_eq!(f.product([&t[..], &t[..], &t[..]]).unwrap(), f.one());
    }

    #[test]
    fn identity_and_errors() {
        let f = f4();
        assert_eq!(f.mul(&[1, 1], &f.one()).unwrap(), vec![1, 1]);
        assert_eq!(f.inv(&[0, 0]), Err(Error::ZeroInverse));
        assert_eq!(
            f.mul(&[1, 1, 0], &[1, 0]),
            Err(Error::LevelMismatch { expected: 2, got: 3 })
        );
        assert!(matches!(f.add(&[2, 0], &[1, 0]), Err(Error::BadLabel { .. })));
    }

    #[test]
    fn rejects_reducible_modulus() {
        let f2 = BaseField::with_order(2).unwrap();
        assert!(ExtField::new(f2, Poly::new(vec![1, 0, 1])).is_err());
    }

    #[test]
    fn field_axioms_over_extension_of_f4() {
        let base = BaseField::with_order(4).unwrap();
        let f = ExtField::with_degree(base, 2).unwrap();
        let all: Vec<_> = f.elements().collect();
        assert_eq!(all.len(), 16);
        for a in &all {
            if a.iter().any(|&c| c != 0) {
                assert_eq!(f.mul(a, &f.inv(a).unwrap()).unwrap(), f.one());
            }
            for b in &all {
                assert_eq!(f.mul(a, b).unwrap(), f.mul(b, a).unwrap());
                // Frobenius x -> x^p is additive (p = 2)
                let lhs = f.pow(&f.add(a, b).unwrap(), 2).unwrap();
                let rhs = f.add(&f.pow(a, 2).unwrap(), &f.pow(b, 2).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }
}
