//! Base fields `F_q = F_p[u]/(M(u))`.
//!
//! Elements are `u32` labels: the coefficient sequence of the residue
//! polynomial over `F_p`, read as a little-endian base-`p` integer. The label
//! order is the total order used everywhere else in the crate (enumeration of
//! irreducibles, serialization), so `0` is zero and `1` is one.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;
/// Non-prime fields up to this order get full addition and multiplication tables.
const TABLE_LIMIT: u32 = 1024;

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^m`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

/// The finite field `F_q`, `q = p^m`, with an explicit modulus over `F_p`.
pub struct BaseField {
    p: u32,
    m: usize,
    q: u32,
    modulus: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
    add_table: Option<Vec<u32>>,
    mul_table: Option<Vec<u32>>,
}

impl fmt::Debug for BaseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaseField")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for BaseField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for BaseField {}

impl BaseField {
    /// The prime field `F_p`, presented as `F_p[u]/(u)`.
    pub fn prime(p: u64) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::NotPrimePower(p));
        }
        if p > MAX_ORDER {
            return Err(Error::FieldTooLarge(p));
        }
        Ok(Arc::new(Self::assemble(p as u32, vec![0, 1])))
    }

    /// `F_q` with the default modulus: the first monic irreducible of degree
    /// `m` over `F_p` in enumeration order.
    pub fn with_order(q: u64) -> Result<Arc<Self>> {
        let (p, m) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        if q > MAX_ORDER {
            return Err(Error::FieldTooLarge(q));
        }
        if m == 1 {
            return Self::prime(p);
        }
        let fp = Self::prime(p)?;
        let modulus = poly::enumerate_irreducibles(&fp, m, 1)
            .into_iter()
            .next()
            .ok_or_else(|| Error::Internal(format!("no irreducible of degree {m} over F_{p}")))?;
        Ok(Arc::new(Self::assemble(p as u32, modulus.coeffs().to_vec())))
    }

    /// `F_p[u]/(modulus)`; the modulus (ascending coefficients over `F_p`) must
    /// be monic and irreducible.
    pub fn new(p: u64, modulus: Vec<u32>) -> Result<Arc<Self>> {
        let fp = Self::prime(p)?;
        let m = modulus.len().saturating_sub(1);
        let f = poly::Poly::new(modulus.clone());
        if m == 0
            || modulus.iter().any(|&c| c >= p as u32)
            || f.degree() != Some(m)
            || !f.is_monic()
            || !poly::is_irreducible(&f, &fp)
        {
            return Err(Error::BadModulus { degree: m });
        }
        let q = p.checked_pow(m as u32).unwrap_or(u64::MAX);
        if q > MAX_ORDER {
            return Err(Error::FieldTooLarge(q));
        }
        if m == 1 {
            // Every degree-one modulus gives the same labels; keep the canonical one.
            return Ok(fp);
        }
        Ok(Arc::new(Self::assemble(p as u32, modulus)))
    }

    fn assemble(p: u32, modulus: Vec<u32>) -> Self {
        let m = modulus.len() - 1;
        let q = p.pow(m as u32);
        let mut field = BaseField {
            p,
            m,
            q,
            modulus,
            neg: Vec::new(),
            inv: Vec::new(),
            add_table: None,
            mul_table: None,
        };
        if m > 1 && q <= TABLE_LIMIT {
            let qs = q as usize;
            let mut add = vec![0; qs * qs];
            let mut mul = vec![0; qs * qs];
            for a in 0..q {
                for b in 0..q {
                    add[a as usize * qs + b as usize] = field.add_slow(a, b);
                    mul[a as usize * qs + b as usize] = field.mul_slow(a, b);
                }
            }
            field.add_table = Some(add);
            field.mul_table = Some(mul);
        }
        field.neg = (0..q).map(|a| field.neg_slow(a)).collect();
        let mut inv = vec![0; q as usize];
        for a in 1..q {
            if inv[a as usize] == 0 {
                let b = field.pow(a, (q - 2) as u64);
                inv[a as usize] = b;
                inv[b as usize] = a;
            }
        }
        field.inv = inv;
        field
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// Degree `m` of `F_q` over `F_p`.
    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Modulus over `F_p`, ascending coefficients, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.m == 1
    }

    pub fn contains(&self, a: u32) -> bool {
        a < self.q
    }

    pub fn check(&self, a: u32) -> Result<u32> {
        if self.contains(a) {
            Ok(a)
        } else {
            Err(Error::BadLabel { label: a, q: self.q })
        }
    }

    /// Base-`p` digits of a label, lowest degree first.
    pub fn digits(&self, mut a: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    pub fn from_digits(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    /// Embedding of `F_p` (labels `0..p`).
    pub fn from_prime(&self, c: u64) -> u32 {
        (c % self.p as u64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        if self.p == 2 {
            return a ^ b;
        }
        match &self.add_table {
            Some(t) => t[a as usize * self.q as usize + b as usize],
            None => self.add_slow(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        match &self.mul_table {
            Some(t) => t[a as usize * self.q as usize + b as usize],
            None => self.mul_slow(a, b),
        }
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.inv[a as usize])
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.p as u64)
    }

    /// Sum of products `sum a_i b_i`.
    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        let (da, db) = (self.digits(a), self.digits(b));
        let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.from_digits(&sum)
    }

    fn neg_slow(&self, a: u32) -> u32 {
        let d: Vec<u32> = self
            .digits(a)
            .iter()
            .map(|&x| (self.p - x) % self.p)
            .collect();
        self.from_digits(&d)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * self.m];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // modulus is monic: u^m = -sum_{i<m} c_i u^i
        for top in (self.m..2 * self.m).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for i in 0..self.m {
                let sub = c * self.modulus[i] as u64 % p;
                let idx = top - self.m + i;
                prod[idx] = (prod[idx] + p - sub) % p;
            }
        }
        let digits: Vec<u32> = prod[..self.m].iter().map(|&x| x as u32).collect();
        self.from_digits(&digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_split() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn f5_product() {
        let f = BaseField::with_order(5).unwrap();
        assert_eq!(f.mul(3, 4), 2);
        assert_eq!(f.mul(3, f.inv(3).unwrap()), 1);
    }

    #[test]
    fn f4_inverse_of_generator() {
        // F_4 = F_2[t]/(t^2+t+1); t has label 2, t+1 has label 3
        let f = BaseField::with_order(4).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        assert_eq!(f.inv(2).unwrap(), 3);
        assert_eq!(f.mul(2, 3), 1);
        assert_eq!(f.mul(2, 2), 3);
    }

    #[test]
    fn default_moduli() {
        assert_eq!(BaseField::with_order(9).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(BaseField::with_order(8).unwrap().modulus(), &[1, 0, 1, 1]);
    }

    #[test]
    fn zero_has_no_inverse() {
        let f = BaseField::with_order(9).unwrap();
        assert_eq!(f.inv(0), Err(Error::ZeroInverse));
    }

    #[test]
    fn rejects_reducible_modulus() {
        assert!(matches!(
            BaseField::new(2, vec![1, 0, 1]),
            Err(Error::BadModulus { degree: 2 })
        ));
        assert!(matches!(BaseField::with_order(6), Err(Error::NotPrimePower(6))));
    }

    #[test]
    fn table_and_slow_paths_agree() {
        let f = BaseField::with_order(27).unwrap();
        for a in 0..27 {
            for b in 0..27 {
                assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                assert_eq!(f.add(a, b), f.add_slow(a, b));
            }
        }
    }

    #[test]
    fn field_axioms_small_orders() {
        for q in [2u64, 3, 4, 5, 8, 9, 16, 25] {
            let f = BaseField::with_order(q).unwrap();
            let q = q as u32;
            for a in 0..q {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    // Frobenius is additive
                    assert_eq!(
                        f.frobenius(f.add(a, b)),
                        f.add(f.frobenius(a), f.frobenius(b))
                    );
                    for c in 0..q {
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c))
                        );
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    }
                }
            }
        }
    }
}
