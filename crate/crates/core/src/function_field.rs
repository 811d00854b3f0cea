//! The rational function field `F_q(x)`: places, Riemann-Roch spaces of
//! multiples of the infinite place, and the evaluation maps used by the
//! multiplication algorithms.
//!
//! With the divisor anchored at the infinite place, `L(m P_inf)` is the space
//! of polynomials of degree at most `m`, coordinates are coefficient vectors,
//! and evaluating at a finite place `P` is reduction modulo `P`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ext::ExtField;
use crate::field::BaseField;
use crate::linalg::{LeftInverse, Matrix};
use crate::poly::{self, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Place {
    /// Zero of a monic irreducible polynomial.
    Finite(Poly),
    /// The pole of `x`.
    Infinite,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "({p})"),
            Place::Infinite => write!(f, "P_inf"),
        }
    }
}

impl Place {
    /// Validates that `poly` is monic irreducible over `base`.
    pub fn finite(poly: Poly, base: &BaseField) -> Result<Self> {
        let degree = poly.degree().unwrap_or(0);
        if degree == 0 || !poly.is_monic() || !poly::is_irreducible(&poly, base) {
            return Err(Error::BadModulus { degree });
        }
        Ok(Place::Finite(poly))
    }

    pub fn degree(&self) -> usize {
        match self {
            Place::Finite(p) => p.degree().expect("nonzero place polynomial"),
            Place::Infinite => 1,
        }
    }

    pub fn polynomial(&self) -> Option<&Poly> {
        match self {
            Place::Finite(p) => Some(p),
            Place::Infinite => None,
        }
    }

    /// Residue field `F_q[x]/(P)` in the power basis of `x`.
    pub fn residue_field(&self, base: &Arc<BaseField>) -> Result<ExtField> {
        match self {
            Place::Finite(p) => Ok(ExtField::new_unchecked(base.clone(), p.clone())),
            Place::Infinite => Err(Error::UnsupportedPlace),
        }
    }
}

/// `L(m P_inf)`: polynomials of degree at most `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RRSpace {
    multiplicity: i64,
}

impl RRSpace {
    pub fn multiplicity(&self) -> i64 {
        self.multiplicity
    }

    /// `m + 1` for `m >= 0`, zero for negative divisors.
    pub fn dimension(&self) -> usize {
        (self.multiplicity + 1).max(0) as usize
    }

    /// Monomials `1, x, ..., x^m`.
    pub fn basis(&self) -> Vec<Poly> {
        (0..self.dimension()).map(|i| Poly::monomial(1, i)).collect()
    }

    pub fn contains(&self, f: &Poly) -> bool {
        match f.degree() {
            None => true,
            Some(d) => (d as i64) <= self.multiplicity,
        }
    }
}

pub fn rr_basis(m: i64) -> RRSpace {
    RRSpace { multiplicity: m }
}

/// `f(P)`: the class of `f` in the residue field of a finite place.
pub fn evaluate(f: &Poly, place: &Place, base: &BaseField) -> Result<Vec<u32>> {
    match place {
        Place::Finite(p) => Ok(f.rem(p, base)?.to_vec(place.degree())),
        Place::Infinite => Err(Error::UnsupportedPlace),
    }
}

/// Matrix of `f -> f mod Q` on `L((n-1) P_inf)` and its inverse. Both are the
/// identity in coefficient / power-basis coordinates.
pub fn ev_q_map(q_place: &Place, base: &BaseField) -> Result<(Matrix, Matrix)> {
    let Place::Finite(_) = q_place else {
        return Err(Error::UnsupportedPlace);
    };
    let n = q_place.degree();
    let cols: Vec<Vec<u32>> = rr_basis(n as i64 - 1)
        .basis()
        .iter()
        .map(|b| evaluate(b, q_place, base))
        .collect::<Result<_>>()?;
    let forward = Matrix::from_cols(&cols, n);
    let inverse = forward.inverse(base)?;
    Ok((forward, inverse))
}

fn check_places(places: &[Place]) -> Result<()> {
    let mut seen = HashSet::new();
    for p in places {
        if matches!(p, Place::Infinite) {
            return Err(Error::UnsupportedPlace);
        }
        if !seen.insert(p) {
            return Err(Error::DuplicatePlace(p.to_string()));
        }
    }
    Ok(())
}

/// Block-stacked matrix of `f -> (f mod P_1, ..., f mod P_N)` on `L(m P_inf)`.
pub fn ev_p_map(places: &[Place], m: usize, base: &BaseField) -> Result<Matrix> {
    check_places(places)?;
    let total: usize = places.iter().map(Place::degree).sum();
    let mut out = Matrix::zeros(total, m + 1);
    for (j, b) in rr_basis(m as i64).basis().iter().enumerate() {
        let mut row = 0;
        for p in places {
            for v in evaluate(b, p, base)? {
                out[(row, j)] = v;
                row += 1;
            }
        }
    }
    Ok(out)
}

/// Componentwise product of `k` residue tuples, each slot in its own field.
pub fn hadamard(fields: &[ExtField], tuples: &[Vec<Vec<u32>>]) -> Result<Vec<Vec<u32>>> {
    let mut out: Vec<Vec<u32>> = fields.iter().map(ExtField::one).collect();
    for t in tuples {
        if t.len() != fields.len() {
            return Err(Error::ShapeMismatch(format!(
                "tuple has {} slots, expected {}",
                t.len(),
                fields.len()
            )));
        }
        for ((acc, v), field) in out.iter_mut().zip(t).zip(fields) {
            *acc = field.mul(acc, v)?;
        }
    }
    Ok(out)
}

/// Recovers `f` with `deg f <= m` from its residues at a list of places.
#[derive(Debug, Clone)]
pub struct Interpolator {
    places: Vec<Place>,
    residues: Vec<ExtField>,
    offsets: Vec<usize>,
    multiplicity: usize,
    matrix: Matrix,
    solver: LeftInverse,
}

impl Interpolator {
    /// Requires the total degree of the places to be at least `m + 1`.
    pub fn new(base: &Arc<BaseField>, places: Vec<Place>, m: usize) -> Result<Self> {
        let matrix = ev_p_map(&places, m, base)?;
        let total: usize = places.iter().map(Place::degree).sum();
        if total < m + 1 {
            return Err(Error::InvalidParameter(format!(
                "places of total degree {total} cannot separate L({m} P_inf)"
            )));
        }
        let solver = LeftInverse::new(&matrix, base)?;
        let residues = places
            .iter()
            .map(|p| p.residue_field(base))
            .collect::<Result<_>>()?;
        let offsets = places
            .iter()
            .scan(0, |acc, p| {
                let start = *acc;
                *acc += p.degree();
                Some(start)
            })
            .collect();
        Ok(Interpolator {
            places,
            residues,
            offsets,
            multiplicity: m,
            matrix,
            solver,
        })
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn residue_fields(&self) -> &[ExtField] {
        &self.residues
    }

    /// Row offset of each place in the stacked evaluation vector.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn solver(&self) -> &LeftInverse {
        &self.solver
    }

    pub fn evaluate_all(&self, f: &Poly) -> Vec<Vec<u32>> {
        self.residues.iter().map(|r| r.reduce(f)).collect()
    }

    fn stack(&self, values: &[Vec<u32>]) -> Result<Vec<u32>> {
        if values.len() != self.places.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} places",
                values.len(),
                self.places.len()
            )));
        }
        let mut flat = Vec::with_capacity(self.matrix.rows());
        for (v, r) in values.iter().zip(&self.residues) {
            r.check(v)?;
            flat.extend_from_slice(v);
        }
        Ok(flat)
    }

    /// The unique `f` of degree at most `m` with the given residues.
    pub fn interpolate(&self, values: &[Vec<u32>]) -> Result<Poly> {
        let flat = self.stack(values)?;
        let base = self.residues.first().map(|r| r.base().clone());
        let Some(base) = base else {
            return Ok(Poly::zero());
        };
        Ok(Poly::new(self.solver.solve(&flat, &base)?))
    }
}

/// Everything needed to run the evaluation-interpolation algorithm for
/// `k`-fold products in `F_{q^n} = F_q[x]/(Q)`.
#[derive(Debug, Clone)]
pub struct EvaluationSetup {
    base: Arc<BaseField>,
    q_place: Place,
    q_field: ExtField,
    k: usize,
    ev_q: Matrix,
    ev_q_inv: Matrix,
    interpolator: Interpolator,
}

impl EvaluationSetup {
    /// Checks that `Q` is not an evaluation place, that `Ev_Q` is bijective on
    /// `L((n-1) P_inf)` and that `Ev_P` is injective on `L(k(n-1) P_inf)`.
    pub fn new(base: Arc<BaseField>, q_place: Place, places: Vec<Place>, k: usize) -> Result<Self> {
        let q_field = q_place.residue_field(&base)?;
        if places.contains(&q_place) {
            return Err(Error::DuplicatePlace(q_place.to_string()));
        }
        let n = q_place.degree();
        let (ev_q, ev_q_inv) = ev_q_map(&q_place, &base)?;
        if ev_q.rank(&base) != n {
            return Err(Error::Internal("Ev_Q is not bijective".into()));
        }
        let m = k * (n - 1);
        let interpolator = Interpolator::new(&base, places, m)?;
        if interpolator.matrix().rank(&base) != m + 1 {
            return Err(Error::Internal("Ev_P is not injective".into()));
        }
        Ok(EvaluationSetup {
            base,
            q_place,
            q_field,
            k,
            ev_q,
            ev_q_inv,
            interpolator,
        })
    }

    pub fn base(&self) -> &Arc<BaseField> {
        &self.base
    }

    pub fn q_place(&self) -> &Place {
        &self.q_place
    }

    pub fn q_field(&self) -> &ExtField {
        &self.q_field
    }

    pub fn n(&self) -> usize {
        self.q_place.degree()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Multiplicity `n - 1` of the divisor at the infinite place.
    pub fn divisor_multiplicity(&self) -> usize {
        self.n() - 1
    }

    pub fn places(&self) -> &[Place] {
        self.interpolator.places()
    }

    pub fn ev_q(&self) -> &Matrix {
        &self.ev_q
    }

    pub fn ev_q_inv(&self) -> &Matrix {
        &self.ev_q_inv
    }

    pub fn ev_p(&self) -> &Matrix {
        self.interpolator.matrix()
    }

    pub fn interpolator(&self) -> &Interpolator {
        &self.interpolator
    }

    /// `Ev_Q^{-1}`: the representative of degree < n.
    pub fn lift(&self, x: &[u32]) -> Result<Poly> {
        self.q_field.check(x)?;
        Ok(Poly::new(self.ev_q_inv.mul_vec(x, &self.base)?))
    }

    /// `Ev_Q`: reduction modulo `Q`.
    pub fn project(&self, h: &Poly) -> Vec<u32> {
        self.q_field.reduce(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> Arc<BaseField> {
        BaseField::with_order(q).unwrap()
    }

    fn place(c: &[u32]) -> Place {
        Place::Finite(Poly::new(c.to_vec()))
    }

    #[test]
    fn riemann_roch_dimensions() {
        assert_eq!(rr_basis(0).basis(), vec![Poly::one()]);
        assert_eq!(rr_basis(3).dimension(), 4);
        assert_eq!(rr_basis(3).basis()[3], Poly::monomial(1, 3));
        assert!(rr_basis(-1).basis().is_empty());
        assert_eq!(rr_basis(-1).dimension(), 0);
    }

    #[test]
    fn evaluate_examples() {
        let f2 = f(2);
        let p = place(&[1, 1, 1]);
        assert_eq!(evaluate(&Poly::new(vec![1, 0, 1]), &p, &f2).unwrap(), vec![0, 1]);
        assert_eq!(evaluate(&Poly::one(), &p, &f2).unwrap(), vec![1, 0]);
        assert_eq!(evaluate(&Poly::new(vec![1, 1, 1]), &p, &f2).unwrap(), vec![0, 0]);
        assert_eq!(evaluate(&Poly::one(), &Place::Infinite, &f2), Err(Error::UnsupportedPlace));
    }

    #[test]
    fn ev_q_is_identity() {
        let f3 = f(3);
        let q = Place::Finite(poly::enumerate_irreducibles(&f3, 4, 1).remove(0));
        let (fwd, inv) = ev_q_map(&q, &f3).unwrap();
        assert_eq!(fwd, Matrix::identity(4));
        assert_eq!(inv, Matrix::identity(4));
    }

    #[test]
    fn ev_p_linear_places() {
        let f2 = f(2);
        let m = ev_p_map(&[place(&[0, 1]), place(&[1, 1])], 1, &f2).unwrap();
        assert_eq!(m, Matrix::from_rows(&[vec![1, 0], vec![1, 1]]));
    }

    #[test]
    fn ev_p_square_is_invertible() {
        let f3 = f(3);
        // degrees 1 + 1 + 2 = 4 = m + 1
        let places = vec![place(&[0, 1]), place(&[1, 1]), place(&[1, 0, 1])];
        let m = ev_p_map(&places, 3, &f3).unwrap();
        assert_eq!(m.rows(), 4);
        assert_eq!(m.rank(&f3), 4);
    }

    #[test]
    fn duplicate_places_rejected() {
        let f2 = f(2);
        assert!(matches!(
            ev_p_map(&[place(&[0, 1]), place(&[0, 1])], 1, &f2),
            Err(Error::DuplicatePlace(_))
        ));
    }

    #[test]
    fn interpolate_hand_example() {
        let f2 = f(2);
        let places = vec![place(&[0, 1]), place(&[1, 1]), place(&[1, 1, 1])];
        let it = Interpolator::new(&f2, places, 2).unwrap();
        // x^2 + x vanishes at 0 and 1 and is 1 mod x^2+x+1
        let h = it
            .interpolate(&[vec![0], vec![0], vec![1, 0]])
            .unwrap();
        assert_eq!(h, Poly::new(vec![0, 1, 1]));
        // brute force over all 8 candidates: nothing reaches (0, 0, t)
        let reach = (0u32..8).any(|m| {
            let f = Poly::new((0..3).map(|i| (m >> i) & 1).collect());
            it.evaluate_all(&f) == vec![vec![0], vec![0], vec![0, 1]]
        });
        assert!(!reach);
        assert_eq!(
            it.interpolate(&[vec![0], vec![0], vec![0, 1]]),
            Err(Error::InterpolationInconsistent)
        );
        // a constant interpolates to itself
        assert_eq!(
            it.interpolate(&[vec![1], vec![1], vec![1, 0]]).unwrap(),
            Poly::one()
        );
        // only 0 and x^2+x+1 vanish mod x^2+x+1 in degree <= 2; neither fits (1, 0)
        assert_eq!(
            it.interpolate(&[vec![1], vec![0], vec![0, 0]]),
            Err(Error::InterpolationInconsistent)
        );
    }

    #[test]
    fn hadamard_examples() {
        let f5 = f(5);
        let slot = vec![Place::Finite(Poly::x()).residue_field(&f5).unwrap()];
        assert_eq!(hadamard(&slot, &[vec![vec![3]], vec![vec![4]]]).unwrap(), vec![vec![2]]);
        let f2 = f(2);
        let f4 = vec![place(&[1, 1, 1]).residue_field(&f2).unwrap()];
        let t = vec![vec![0, 1]];
        assert_eq!(
            hadamard(&f4, &[t.clone(), t.clone(), t.clone()]).unwrap(),
            vec![vec![1, 0]]
        );
        assert_eq!(hadamard(&f4, &[t.clone(), vec![vec![1, 0]]]).unwrap(), t);
        assert!(matches!(hadamard(&f4, &[vec![]]), Err(Error::ShapeMismatch(_))));
    }
}
