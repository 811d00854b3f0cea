//! Dense univariate polynomials over a [`BaseField`], plus irreducibility
//! testing, enumeration and counting of monic irreducibles.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::BaseField;

/// Ascending coefficients (labels of the base field), no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    coeffs: Vec<u32>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}*x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: u32) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(1)
    }

    pub fn x() -> Self {
        Poly::monomial(1, 1)
    }

    pub fn monomial(c: u32, degree: usize) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    /// Coefficients padded or truncated to exactly `len` entries.
    pub fn to_vec(&self, len: usize) -> Vec<u32> {
        let mut v = self.coeffs.clone();
        v.resize(len, 0);
        v
    }

    pub fn add(&self, other: &Poly, f: &BaseField) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..len)
                .map(|i| f.add(self.coeff(i), other.coeff(i)))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Poly, f: &BaseField) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..len)
                .map(|i| f.sub(self.coeff(i), other.coeff(i)))
                .collect(),
        )
    }

    pub fn scale(&self, c: u32, f: &BaseField) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Poly, f: &BaseField) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::new(out)
    }

    /// Quotient and remainder; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Poly, f: &BaseField) -> Result<(Poly, Poly)> {
        let dd = divisor.degree().ok_or(Error::ZeroModulus)?;
        let lead_inv = f.inv(divisor.leading())?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![0; rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            let c = f.mul(rem[top], lead_inv);
            if c == 0 {
                continue;
            }
            quot[top - dd] = c;
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                let idx = top - dd + i;
                rem[idx] = f.sub(rem[idx], f.mul(c, d));
            }
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn rem(&self, modulus: &Poly, f: &BaseField) -> Result<Poly> {
        Ok(self.div_rem(modulus, f)?.1)
    }

    pub fn make_monic(&self, f: &BaseField) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = f.inv(self.leading()).expect("nonzero leading coefficient");
        self.scale(inv, f)
    }

    /// Monic greatest common divisor (zero only if both inputs are zero).
    pub fn gcd(&self, other: &Poly, f: &BaseField) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b, f).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.make_monic(f)
    }

    pub fn mul_mod(&self, other: &Poly, modulus: &Poly, f: &BaseField) -> Result<Poly> {
        self.mul(other, f).rem(modulus, f)
    }

    pub fn pow_mod(&self, mut e: u128, modulus: &Poly, f: &BaseField) -> Result<Poly> {
        let mut base = self.rem(modulus, f)?;
        let mut acc = Poly::one().rem(modulus, f)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, modulus, f)?;
            }
            base = base.mul_mod(&base, modulus, f)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Horner evaluation at a point of the base field.
    pub fn eval(&self, point: u32, f: &BaseField) -> u32 {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, point), c))
    }
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin irreducibility test over `F_q`. The input is normalized to monic;
/// constants (degree < 1) are reported reducible.
pub fn is_irreducible(f: &Poly, field: &BaseField) -> bool {
    let d = match f.degree() {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    if f.coeff(0) == 0 {
        return false;
    }
    let f = f.make_monic(field);
    let q = field.order() as u128;
    let x = Poly::x();
    // frob[j] = x^{q^j} mod f
    let mut frob = vec![x.rem(&f, field).expect("nonzero modulus")];
    for j in 1..=d {
        let next = frob[j - 1].pow_mod(q, &f, field).expect("nonzero modulus");
        frob.push(next);
    }
    if frob[d] != frob[0] {
        return false;
    }
    prime_divisors(d).into_iter().all(|e| {
        let g = frob[d / e].sub(&x, field);
        g.gcd(&f, field).degree() == Some(0)
    })
}

/// Monic degree-`d` polynomials in enumeration order: coefficient sequences
/// `(c_0, ..., c_{d-1})` compared lexicographically, constant term first,
/// each coefficient ordered by its label.
pub fn monic_polys(field: &BaseField, d: usize) -> impl Iterator<Item = Poly> + '_ {
    monic_polys_from(field, vec![0; d])
}

/// Enumeration starting at the coefficient sequence `first` (constant first).
fn monic_polys_from(field: &BaseField, first: Vec<u32>) -> impl Iterator<Item = Poly> + '_ {
    let q = field.order();
    let mut next = Some(first);
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        let mut carried = true;
        for c in succ.iter_mut().rev() {
            *c += 1;
            if *c < q {
                carried = false;
                break;
            }
            *c = 0;
        }
        if !carried {
            next = Some(succ);
        }
        let mut coeffs = cur;
        coeffs.push(1);
        Some(Poly::new(coeffs))
    })
}

/// Lazy stream of monic irreducibles of degree `d` in enumeration order.
pub fn irreducibles(field: &BaseField, d: usize) -> impl Iterator<Item = Poly> + '_ {
    // for d >= 2 the leading block with zero constant term is divisible by x
    let mut first = vec![0; d];
    if d >= 2 {
        first[0] = 1;
    }
    monic_polys_from(field, first).filter(move |f| is_irreducible(f, field))
}

/// The first `limit` monic irreducibles of degree `d`, fewer if exhausted.
pub fn enumerate_irreducibles(field: &BaseField, d: usize, limit: usize) -> Vec<Poly> {
    if d == 0 {
        return Vec::new();
    }
    irreducibles(field, d).take(limit).collect()
}

fn mobius(n: usize) -> i128 {
    let mut n = n;
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Number of monic irreducible polynomials of degree `d` over `F_q`
/// (necklace formula). Saturates at `u128::MAX` when `q^d` overflows.
pub fn count_irreducibles(q: u64, d: usize) -> u128 {
    if d == 0 {
        return 0;
    }
    let mut sum: i128 = 0;
    for e in 1..=d {
        if !d.is_multiple_of(e) {
            continue;
        }
        let mu = mobius(e);
        if mu == 0 {
            continue;
        }
        let Some(term) = (q as i128).checked_pow((d / e) as u32) else {
            return u128::MAX;
        };
        sum += mu * term;
    }
    (sum / d as i128) as u128
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> std::sync::Arc<BaseField> {
        BaseField::with_order(q).unwrap()
    }

    #[test]
    fn square_in_characteristic_two() {
        let f2 = f(2);
        let x1 = Poly::new(vec![1, 1]);
        assert_eq!(x1.mul(&x1, &f2), Poly::new(vec![1, 0, 1]));
    }

    #[test]
    fn reduce_x_squared() {
        let f2 = f(2);
        let m = Poly::new(vec![1, 1, 1]);
        assert_eq!(Poly::monomial(1, 2).rem(&m, &f2).unwrap(), Poly::new(vec![1, 1]));
    }

    #[test]
    fn gcd_is_monic() {
        let f3 = f(3);
        // x^2 - 1 and 2x - 2 share x - 1
        let a = Poly::new(vec![2, 0, 1]);
        let b = Poly::new(vec![1, 2]).scale(2, &f3);
        assert_eq!(a.gcd(&b, &f3), Poly::new(vec![2, 1]));
    }

    #[test]
    fn zero_modulus_is_an_error() {
        let f2 = f(2);
        assert_eq!(Poly::x().rem(&Poly::zero(), &f2), Err(Error::ZeroModulus));
    }

    #[test]
    fn degree_of_zero_is_none() {
        assert_eq!(Poly::new(vec![0, 0]).degree(), None);
        assert_eq!(Poly::one().degree(), Some(0));
    }

    #[test]
    fn irreducibility_examples() {
        let f2 = f(2);
        assert!(is_irreducible(&Poly::new(vec![1, 1, 1]), &f2));
        assert!(!is_irreducible(&Poly::new(vec![1, 0, 1]), &f2));
        for q in [2, 3, 4, 5, 9] {
            assert!(is_irreducible(&Poly::x(), &f(q)));
        }
    }

    #[test]
    fn enumeration_examples() {
        let f2 = f(2);
        assert_eq!(enumerate_irreducibles(&f2, 2, 10), vec![Poly::new(vec![1, 1, 1])]);
        assert_eq!(
            enumerate_irreducibles(&f2, 1, 10),
            vec![Poly::x(), Poly::new(vec![1, 1])]
        );
        assert_eq!(enumerate_irreducibles(&f2, 4, 10).len(), 3);
        // constant term is the most significant coordinate of the order
        assert_eq!(
            enumerate_irreducibles(&f2, 3, 10),
            vec![Poly::new(vec![1, 0, 1, 1]), Poly::new(vec![1, 1, 0, 1])]
        );
    }

    #[test]
    fn counting_examples() {
        assert_eq!(count_irreducibles(2, 1), 2);
        assert_eq!(count_irreducibles(2, 3), 2);
        assert_eq!(count_irreducibles(3, 2), 3);
        assert_eq!(count_irreducibles(2, 200), u128::MAX);
    }

    /// Brute-force factor search: `f` is reducible iff a monic factor of
    /// degree `1..=deg/2` divides it.
    fn reducible_by_search(g: &Poly, field: &BaseField) -> bool {
        let d = g.degree().unwrap();
        (1..=d / 2).any(|e| {
            monic_polys(field, e).any(|h| g.rem(&h, field).unwrap().is_zero())
        })
    }

    #[test]
    fn enumeration_matches_count_and_brute_force() {
        for q in [2u64, 3, 4, 5] {
            let field = f(q);
            for d in 1..=6usize {
                let total = (q as u128).pow(d as u32);
                let found = enumerate_irreducibles(&field, d, usize::MAX);
                assert_eq!(found.len() as u128, count_irreducibles(q, d), "q={q} d={d}");
                if total <= 4096 {
                    for g in monic_polys(&field, d) {
                        assert_eq!(
                            is_irreducible(&g, &field),
                            !reducible_by_search(&g, &field),
                            "q={q} {g}"
                        );
                    }
                }
            }
        }
    }
}
