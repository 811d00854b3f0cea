//! Explicit decompositions of the `k`-fold multiplication tensor of
//! `F_{q^n} = F_q[x]/(Q)` over `F_q`:
//!
//! ```text
//! x_1 * ... * x_k = sum_t ( prod_j <form_{t,j}, x_j> ) * output_t
//! ```
//!
//! and their exact verification against the structure constants of the
//! power basis.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ext::ExtField;
use crate::poly::Poly;

/// Default limit on the number of basis tuples checked by [`TensorDecomposition::verify`].
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// `e_i e_j = sum_h t[i][j][h] e_h` for the power basis `e_i = x^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureConstants {
    n: usize,
    data: Vec<u32>,
}

impl StructureConstants {
    pub fn new(field: &ExtField) -> Self {
        let n = field.degree();
        let powers = powers_of_x(field, 2 * n - 1);
        let mut data = vec![0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let start = (i * n + j) * n;
                data[start..start + n].copy_from_slice(&powers[i + j]);
            }
        }
        StructureConstants { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Zero-based indices.
    pub fn get(&self, i: usize, j: usize, h: usize) -> u32 {
        self.data[(i * self.n + j) * self.n + h]
    }
}

/// `x^e mod Q` for `e = 0..count`.
fn powers_of_x(field: &ExtField, count: usize) -> Vec<Vec<u32>> {
    let x = if field.degree() == 1 {
        field.reduce(&Poly::x())
    } else {
        field.basis(1)
    };
    let mut out = Vec::with_capacity(count);
    let mut cur = field.one();
    for _ in 0..count {
        out.push(cur.clone());
        cur = field.mul_unchecked(&cur, &x);
    }
    out
}

/// One summand: `k` linear forms and an output vector, all of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub forms: Vec<Vec<u32>>,
    pub output: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Verified,
    /// First basis tuple (zero-based indices, lexicographic order) where the
    /// decomposition disagrees with the field product.
    Mismatch {
        tuple: Vec<usize>,
        expected: Vec<u32>,
        got: Vec<u32>,
    },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Verified)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorDecomposition {
    field: ExtField,
    k: usize,
    terms: Vec<Term>,
}

impl TensorDecomposition {
    /// Checks shapes and labels of every term.
    pub fn new(field: ExtField, k: usize, terms: Vec<Term>) -> Result<Self> {
        let n = field.degree();
        if k < 1 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        for (idx, t) in terms.iter().enumerate() {
            if t.forms.len() != k {
                return Err(Error::ShapeMismatch(format!(
                    "term {idx} has {} forms, expected {k}",
                    t.forms.len()
                )));
            }
            for v in t.forms.iter().chain(std::iter::once(&t.output)) {
                field.check(v).map_err(|e| match e {
                    Error::LevelMismatch { expected, got } => Error::ShapeMismatch(format!(
                        "term {idx} has a vector of length {got}, expected {expected}"
                    )),
                    other => other,
                })?;
            }
        }
        debug_assert!(terms.iter().all(|t| t.output.len() == n));
        Ok(TensorDecomposition { field, k, terms })
    }

    /// The structure-constant expansion: one term per index tuple, with
    /// coordinate projections as forms and `x^{i_1 + ... + i_k}` as output.
    pub fn naive(field: ExtField, k: usize) -> Self {
        let n = field.degree();
        let powers = powers_of_x(&field, k * (n - 1) + 1);
        let total = n.pow(k as u32);
        let terms = (0..total)
            .map(|mut idx| {
                let mut tuple = vec![0; k];
                for slot in (0..k).rev() {
                    tuple[slot] = idx % n;
                    idx /= n;
                }
                Term {
                    forms: tuple.iter().map(|&i| field.basis(i)).collect(),
                    output: powers[tuple.iter().sum::<usize>()].clone(),
                }
            })
            .collect();
        TensorDecomposition { field, k, terms }
    }

    /// Rank one decomposition of the product in `F_q` itself.
    pub fn scalar(field: ExtField, k: usize) -> Result<Self> {
        if field.degree() != 1 {
            return Err(Error::InvalidParameter("scalar decomposition needs n = 1".into()));
        }
        let term = Term {
            forms: vec![vec![1]; k],
            output: vec![1],
        };
        Ok(TensorDecomposition {
            field,
            k,
            terms: vec![term],
        })
    }

    pub fn field(&self) -> &ExtField {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.field.degree()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    /// Number of summands; an upper bound on the multilinear complexity.
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// All `k` forms coincide in every term.
    pub fn is_symmetric(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.forms.windows(2).all(|w| w[0] == w[1]))
    }

    /// Reorders the slots of every term: new slot `j` takes old slot `perm[j]`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.k).collect::<Vec<_>>() {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                forms: perm.iter().map(|&j| t.forms[j].clone()).collect(),
                output: t.output.clone(),
            })
            .collect();
        Ok(TensorDecomposition {
            field: self.field.clone(),
            k: self.k,
            terms,
        })
    }

    /// `sum_t (prod_j <form_{t,j}, x_j>) output_t`.
    pub fn apply(&self, inputs: &[Vec<u32>]) -> Result<Vec<u32>> {
        if inputs.len() != self.k {
            return Err(Error::ShapeMismatch(format!(
                "{} inputs for a {}-linear map",
                inputs.len(),
                self.k
            )));
        }
        for x in inputs {
            self.field.check(x)?;
        }
        let f = self.field.base();
        let mut acc = self.field.zero();
        for t in &self.terms {
            let c = t
                .forms
                .iter()
                .zip(inputs)
                .fold(1, |c, (form, x)| f.mul(c, f.dot(form, x)));
            if c == 0 {
                continue;
            }
            for (a, &o) in acc.iter_mut().zip(&t.output) {
                *a = f.add(*a, f.mul(c, o));
            }
        }
        Ok(acc)
    }

    pub fn basis_tuples(&self) -> u128 {
        (self.n() as u128)
            .checked_pow(self.k as u32)
            .unwrap_or(u128::MAX)
    }

    /// Exact check on every basis tuple with the default budget.
    pub fn verify(&self) -> Result<bool> {
        Ok(self.verify_with_budget(DEFAULT_BUDGET)?.passed())
    }

    /// Exact check on all `n^k` basis tuples; multilinearity extends the
    /// result to all inputs. Fails with `BudgetExceeded` above `budget` tuples.
    pub fn verify_with_budget(&self, budget: u128) -> Result<Verdict> {
        let tuples = self.basis_tuples();
        if tuples > budget {
            return Err(Error::BudgetExceeded { tuples, budget });
        }
        let n = self.n();
        let k = self.k;
        let powers = powers_of_x(&self.field, k * (n - 1) + 1);
        let first = (0..n)
            .into_par_iter()
            .find_map_first(|i0| self.check_subtree(i0, &powers));
        Ok(first.unwrap_or(Verdict::Verified))
    }

    /// Depth-first walk over tuples starting with `i0`, sharing prefix
    /// products of form entries between tuples.
    fn check_subtree(&self, i0: usize, powers: &[Vec<u32>]) -> Option<Verdict> {
        let f = self.field.base();
        let n = self.n();
        let k = self.k;
        let s = self.terms.len();
        // prefix[j][t] = prod_{l <= j} form_{t,l}[i_l]
        let mut prefix = vec![vec![0u32; s]; k];
        for (t, term) in self.terms.iter().enumerate() {
            prefix[0][t] = term.forms[0][i0];
        }
        let mut tuple = vec![0usize; k];
        tuple[0] = i0;
        let mut acc = vec![0u32; n];
        let prime = f.is_prime_field();
        let p = f.characteristic() as u64;
        let mut wide = vec![0u64; n];

        let mut level = 1;
        loop {
            if level == k {
                // leaf: compare against x^{sum of indices}
                let last = &prefix[k - 1];
                if prime {
                    wide.iter_mut().for_each(|w| *w = 0);
                    for (t, term) in self.terms.iter().enumerate() {
                        let c = last[t] as u64;
                        if c == 0 {
                            continue;
                        }
                        for (w, &o) in wide.iter_mut().zip(&term.output) {
                            *w += c * o as u64;
                        }
                        if t % 4096 == 4095 {
                            wide.iter_mut().for_each(|w| *w %= p);
                        }
                    }
                    for (a, w) in acc.iter_mut().zip(&wide) {
                        *a = (w % p) as u32;
                    }
                } else {
                    acc.iter_mut().for_each(|a| *a = 0);
                    for (t, term) in self.terms.iter().enumerate() {
                        let c = last[t];
                        if c == 0 {
                            continue;
                        }
                        for (a, &o) in acc.iter_mut().zip(&term.output) {
                            *a = f.add(*a, f.mul(c, o));
                        }
                    }
                }
                let expected = &powers[tuple.iter().sum::<usize>()];
                if &acc != expected {
                    return Some(Verdict::Mismatch {
                        tuple: tuple.clone(),
                        expected: expected.clone(),
                        got: acc.clone(),
                    });
                }
                // advance to the next tuple
                level -= 1;
                loop {
                    if level == 0 {
                        return None;
                    }
                    tuple[level] += 1;
                    if tuple[level] < n {
                        break;
                    }
                    tuple[level] = 0;
                    level -= 1;
                }
            }
            if level == 0 {
                return None;
            }
            let i = tuple[level];
            let (before, after) = prefix.split_at_mut(level);
            let prev = &before[level - 1];
            for (t, term) in self.terms.iter().enumerate() {
                after[0][t] = f.mul(prev[t], term.forms[level][i]);
            }
            level += 1;
        }
    }

    /// Randomized check on `samples` uniformly random input tuples.
    pub fn verify_random<R: Rng>(&self, samples: usize, rng: &mut R) -> Result<Verdict> {
        let q = self.field.base().order();
        let n = self.n();
        for _ in 0..samples {
            let inputs: Vec<Vec<u32>> = (0..self.k)
                .map(|_| (0..n).map(|_| rng.gen_range(0..q)).collect())
                .collect();
            let got = self.apply(&inputs)?;
            let expected = self.field.product(inputs.iter().map(Vec::as_slice))?;
            if got != expected {
                return Ok(Verdict::Mismatch {
                    tuple: Vec::new(),
                    expected,
                    got,
                });
            }
        }
        Ok(Verdict::Verified)
    }
}

/// Karatsuba-style products of two polynomials of degree `< d` for `d = 2, 3`:
/// pairs of coefficient subsets whose sums are multiplied, and the
/// contribution of each product to the unreduced coefficients.
fn polynomial_product_schemes(d: usize) -> Option<Vec<(Vec<usize>, Vec<(usize, i64)>)>> {
    match d {
        // a0 b0, a1 b1, (a0 + a1)(b0 + b1)
        2 => Some(vec![
            (vec![0], vec![(0, 1), (1, -1)]),
            (vec![1], vec![(1, -1), (2, 1)]),
            (vec![0, 1], vec![(1, 1)]),
        ]),
        // three squares of single coefficients and three of pairs
        3 => Some(vec![
            (vec![0], vec![(0, 1), (1, -1), (2, -1)]),
            (vec![1], vec![(1, -1), (2, 1), (3, -1)]),
            (vec![2], vec![(2, -1), (3, -1), (4, 1)]),
            (vec![0, 1], vec![(1, 1)]),
            (vec![0, 2], vec![(2, 1)]),
            (vec![1, 2], vec![(3, 1)]),
        ]),
        _ => None,
    }
}

/// Hand-written bilinear decompositions for `F_q[x]/(P)` with `deg P` in
/// `{2, 3}`: rank 3 (Karatsuba) and rank 6, valid for every modulus.
pub fn builtin_bilinear(field: &ExtField) -> Option<TensorDecomposition> {
    let d = field.degree();
    let scheme = polynomial_product_schemes(d)?;
    let f = field.base();
    let terms = scheme
        .into_iter()
        .map(|(support, contributions)| {
            let mut form = vec![0; d];
            for i in support {
                form[i] = 1;
            }
            let mut coeffs = vec![0u32; 2 * d - 1];
            for (deg, sign) in contributions {
                coeffs[deg] = if sign > 0 { 1 } else { f.neg(1) };
            }
            Term {
                forms: vec![form.clone(), form],
                output: field.reduce(&Poly::new(coeffs)),
            }
        })
        .collect();
    Some(TensorDecomposition {
        field: field.clone(),
        k: 2,
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BaseField;

    fn f4() -> ExtField {
        ExtField::with_degree(BaseField::with_order(2).unwrap(), 2).unwrap()
    }

    #[test]
    fn structure_constants_of_f4() {
        let sc = StructureConstants::new(&f4());
        // t * t = t + 1
        assert_eq!((sc.get(1, 1, 0), sc.get(1, 1, 1)), (1, 1));
        for j in 0..2 {
            for h in 0..2 {
                assert_eq!(sc.get(0, j, h), (j == h) as u32);
            }
        }
    }

    #[test]
    fn structure_constants_symmetric() {
        let base = BaseField::with_order(3).unwrap();
        for n in 1..=8 {
            let field = ExtField::with_degree(base.clone(), n).unwrap();
            let sc = StructureConstants::new(&field);
            for i in 0..n {
                for j in 0..n {
                    for h in 0..n {
                        assert_eq!(sc.get(i, j, h), sc.get(j, i, h));
                    }
                }
            }
        }
    }

    #[test]
    fn karatsuba_on_f4() {
        let dec = builtin_bilinear(&f4()).unwrap();
        assert_eq!(dec.rank(), 3);
        assert!(dec.is_symmetric());
        assert_eq!(dec.apply(&[vec![0, 1], vec![0, 1]]).unwrap(), vec![1, 1]);
        assert_eq!(dec.apply(&[vec![1, 0], vec![1, 0]]).unwrap(), vec![1, 0]);
        assert!(dec.verify().unwrap());
    }

    #[test]
    fn builtin_schemes_verify_for_every_modulus() {
        for q in [2u64, 3, 4, 5, 7] {
            let base = BaseField::with_order(q).unwrap();
            for d in [2usize, 3] {
                for m in crate::poly::enumerate_irreducibles(&base, d, 4) {
                    let field = ExtField::new(base.clone(), m).unwrap();
                    let dec = builtin_bilinear(&field).unwrap();
                    assert_eq!(dec.rank(), if d == 2 { 3 } else { 6 });
                    assert!(dec.verify().unwrap(), "q={q} d={d}");
                }
            }
        }
    }

    #[test]
    fn corrupted_karatsuba_fails() {
        let dec = builtin_bilinear(&f4()).unwrap();
        let mut terms = dec.terms().to_vec();
        terms[2].output[0] ^= 1;
        let bad = TensorDecomposition::new(f4(), 2, terms).unwrap();
        assert!(!bad.verify().unwrap());
        let Verdict::Mismatch { tuple, .. } = bad.verify_with_budget(16).unwrap() else {
            panic!("expected a mismatch");
        };
        assert_eq!(tuple, vec![0, 0]);
    }

    #[test]
    fn naive_expansion_verifies() {
        let base = BaseField::with_order(3).unwrap();
        for n in 1..=4 {
            for k in 2..=3 {
                let field = ExtField::with_degree(base.clone(), n).unwrap();
                let dec = TensorDecomposition::naive(field, k);
                assert_eq!(dec.rank(), n.pow(k as u32));
                assert!(dec.verify().unwrap());
                if n > 1 {
                    assert!(!dec.is_symmetric());
                }
            }
        }
    }

    #[test]
    fn scalar_and_empty() {
        let base = BaseField::with_order(5).unwrap();
        let f5 = ExtField::with_degree(base, 1).unwrap();
        let dec = TensorDecomposition::scalar(f5.clone(), 3).unwrap();
        assert_eq!(dec.apply(&[vec![2], vec![3], vec![4]]).unwrap(), vec![4]);
        assert!(dec.is_symmetric());
        let empty = TensorDecomposition::new(f5, 2, vec![]).unwrap();
        assert_eq!(empty.rank(), 0);
        assert!(!empty.verify().unwrap());
    }

    #[test]
    fn budget_and_shape_errors() {
        let dec = TensorDecomposition::naive(f4(), 3);
        assert!(matches!(
            dec.verify_with_budget(7),
            Err(Error::BudgetExceeded { tuples: 8, budget: 7 })
        ));
        assert!(matches!(dec.apply(&[vec![1, 0]]), Err(Error::ShapeMismatch(_))));
        let bad = Term {
            forms: vec![vec![1, 0, 0], vec![1, 0]],
            output: vec![1, 0],
        };
        assert!(matches!(
            TensorDecomposition::new(f4(), 2, vec![bad]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn ones_map_to_one() {
        let dec = builtin_bilinear(&f4()).unwrap();
        assert_eq!(dec.apply(&[vec![1, 0], vec![1, 0]]).unwrap(), vec![1, 0]);
    }
}
