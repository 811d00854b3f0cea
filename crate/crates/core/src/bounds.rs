//! Closed-form quantities of the tower construction: the minimal even order
//! `r`, Garcia-Stichtenoth genus and place counts, action domains of the
//! tower steps, and the resulting upper bounds on multilinear and chained
//! bilinear complexity.
//!
//! Every verdict is computed exactly. Quantities involving `sqrt(q)` or
//! `sqrt(l)` are represented as [`Surd`]s and compared by squaring; floats
//! only appear in the `approx` columns meant for humans.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

/// `a + b * sqrt(radicand)` with integer `a`, `b` and a positive radicand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    pub a: BigInt,
    pub b: BigInt,
    pub radicand: BigInt,
}

impl Surd {
    pub fn int(a: BigInt, radicand: &BigInt) -> Self {
        Surd {
            a,
            b: BigInt::zero(),
            radicand: radicand.clone(),
        }
    }

    /// `radicand^(e/2)`.
    pub fn half_power(radicand: &BigInt, e: u32) -> Self {
        let p = num_traits::pow(radicand.clone(), (e / 2) as usize);
        if e.is_multiple_of(2) {
            Surd::int(p, radicand)
        } else {
            Surd {
                a: BigInt::zero(),
                b: p,
                radicand: radicand.clone(),
            }
        }
    }

    pub fn add(&self, o: &Surd) -> Surd {
        debug_assert_eq!(self.radicand, o.radicand);
        Surd {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            radicand: self.radicand.clone(),
        }
    }

    pub fn sub(&self, o: &Surd) -> Surd {
        debug_assert_eq!(self.radicand, o.radicand);
        Surd {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
            radicand: self.radicand.clone(),
        }
    }

    pub fn mul(&self, o: &Surd) -> Surd {
        debug_assert_eq!(self.radicand, o.radicand);
        Surd {
            a: &self.a * &o.a + &self.b * &o.b * &self.radicand,
            b: &self.a * &o.b + &self.b * &o.a,
            radicand: self.radicand.clone(),
        }
    }

    pub fn add_int(&self, c: i64) -> Surd {
        Surd {
            a: &self.a + BigInt::from(c),
            b: self.b.clone(),
            radicand: self.radicand.clone(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Surd {
        Surd {
            a: &self.a * c,
            b: &self.b * c,
            radicand: self.radicand.clone(),
        }
    }

    pub fn signum(&self) -> Ordering {
        let (a, b) = (&self.a, &self.b);
        let zero = BigInt::zero();
        match (a.cmp(&zero), b.cmp(&zero)) {
            (Ordering::Equal, Ordering::Equal) => Ordering::Equal,
            (x, Ordering::Equal) => x,
            (Ordering::Equal, y) => y,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            (Ordering::Greater, Ordering::Less) => (a * a).cmp(&(b * b * &self.radicand)),
            (Ordering::Less, Ordering::Greater) => (b * b * &self.radicand).cmp(&(a * a)),
        }
    }

    pub fn cmp_surd(&self, o: &Surd) -> Ordering {
        self.sub(o).signum()
    }

    pub fn cmp_int(&self, c: &BigInt) -> Ordering {
        self.sub(&Surd::int(c.clone(), &self.radicand)).signum()
    }

    pub fn approx(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let r = self.radicand.to_f64().unwrap_or(f64::NAN);
        a + b * r.sqrt()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        write!(f, "{} + {}*sqrt({})", self.a, self.b, self.radicand)
    }
}

/// An exact value with a floating-point rendering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exact {
    pub exact: String,
    pub approx: f64,
}

impl Exact {
    pub fn from_rational(v: &BigRational) -> Self {
        let exact = if v.is_integer() {
            v.numer().to_string()
        } else {
            format!("{}/{}", v.numer(), v.denom())
        };
        Exact {
            exact,
            approx: v.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn from_int(v: &BigInt) -> Self {
        Exact {
            exact: v.to_string(),
            approx: v.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn from_surd(v: &Surd) -> Self {
        Exact {
            exact: v.to_string(),
            approx: v.approx(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TowerParams {
    pub q: u64,
    pub k: u64,
    /// Smallest even `r` with `(k+1)^2 < q^r`.
    pub r: u32,
    /// `l = q^(r/2)`
    #[serde(serialize_with = "ser_display")]
    pub l: BigInt,
}

fn ser_display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Smallest even `r` with `r > 2 log_q(k+1)`, decided by the integer test
/// `(k+1)^2 < q^r`.
pub fn smallest_even_r(q: u64, k: u64) -> Result<TowerParams> {
    if crate::field::prime_power(q).is_none() {
        return Err(Error::NotPrimePower(q));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k} < 2")));
    }
    let target = big(k + 1) * big(k + 1);
    let mut r = 2u32;
    while num_traits::pow(big(q), r as usize) <= target {
        r += 2;
    }
    Ok(TowerParams {
        q,
        k,
        r,
        l: num_traits::pow(big(q), (r / 2) as usize),
    })
}

/// Genus of the `i`-th step of the Garcia-Stichtenoth tower over `F_{l^2}`.
pub fn gs_genus(l: &BigInt, i: u32) -> BigInt {
    let one = BigInt::one();
    if i % 2 == 1 {
        let a = num_traits::pow(l.clone(), i.div_ceil(2) as usize) - &one;
        &a * &a
    } else {
        let a = num_traits::pow(l.clone(), (i / 2) as usize) - &one;
        let b = num_traits::pow(l.clone(), ((i + 2) / 2) as usize) - &one;
        a * b
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenusBounds {
    /// `(l^(i/2) - 1)(l^((i+1)/2) - 1)`, strictly below the genus.
    pub lower: Surd,
    /// `(l^((i+2)/2) - 1)(l^((i+1)/2) - 1)`, strictly above the genus.
    pub upper: Surd,
    /// `l^(i+1) - 2 l^((i+1)/2) + 1`, at least the genus.
    pub tight_upper: Surd,
}

pub fn gs_genus_bounds(l: &BigInt, i: u32) -> GenusBounds {
    let h = |e: u32| Surd::half_power(l, e).add_int(-1);
    let lower = h(i).mul(&h(i + 1));
    let upper = h(i + 2).mul(&h(i + 1));
    let tight_upper = Surd::half_power(l, 2 * (i + 1))
        .sub(&Surd::half_power(l, i + 1).scale(&big(2)))
        .add_int(1);
    GenusBounds {
        lower,
        upper,
        tight_upper,
    }
}

/// Number of degree-one places of the `i`-th tower step.
pub fn gs_n1(l: &BigInt, i: u32, even_characteristic: bool) -> BigInt {
    let base = num_traits::pow(l.clone(), i as usize) * (l * l - l);
    if even_characteristic {
        base + big(2) * l * l
    } else {
        base + big(2) * l
    }
}

/// `2g + 1 <= q^((n-1)/2) (q^(1/2) - 1)`: sufficient for a place of degree
/// `n` to exist on a curve of genus `g` over `F_q`.
pub fn existence_condition(q: u64, n: u32, g: &BigInt) -> bool {
    if n == 0 {
        return false;
    }
    let qb = big(q);
    let rhs = Surd::half_power(&qb, n).sub(&Surd::half_power(&qb, n - 1));
    let lhs = g * 2 + 1;
    rhs.cmp_int(&lhs) != Ordering::Less
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepStats {
    pub i: u32,
    #[serde(serialize_with = "ser_display")]
    pub genus: BigInt,
    pub genus_lower: Exact,
    pub genus_upper: Exact,
    pub genus_tight_upper: Exact,
    #[serde(serialize_with = "ser_display")]
    pub m_i: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub delta: BigInt,
    /// Smallest `n` admitting a place of degree `n` by the existence condition.
    pub gamma_exact: u64,
    /// `r(i+1) + 3`
    pub gamma_claimed: u64,
    /// Largest `n` with `Delta > k n`; `None` when `Delta <= 0`.
    #[serde(serialize_with = "ser_opt_display")]
    pub r_exact: Option<BigInt>,
    /// `(k+1)^i`
    #[serde(serialize_with = "ser_display")]
    pub r_claimed_lower: BigInt,
    /// `[r(i+1)+3, (k+1)^i]`, possibly empty.
    pub guaranteed: (u64, String),
}

fn ser_opt_display<T: fmt::Display, S: serde::Serializer>(
    v: &Option<T>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

/// Smallest `n >= 1` with `2g + 1 <= q^((n-1)/2)(sqrt(q) - 1)`.
pub fn gamma_exact(q: u64, g: &BigInt) -> u64 {
    let mut n = 1u32;
    while !existence_condition(q, n, g) {
        n += 1;
    }
    n as u64
}

pub fn step_stats(params: &TowerParams, i: u32) -> Result<StepStats> {
    if i < 1 {
        return Err(Error::InvalidParameter("step index must be at least 1".into()));
    }
    let l = &params.l;
    let k = big(params.k);
    let genus = gs_genus(l, i);
    let bounds = gs_genus_bounds(l, i);
    let m_i = num_traits::pow(l.clone(), i as usize) * (l * l - l);
    let delta = &m_i - &k * &genus + &k;
    let r_exact = delta
        .is_positive()
        .then(|| (&delta - BigInt::one()).div_floor(&k));
    let r = params.r as u64;
    let r_claimed_lower = num_traits::pow(big(params.k + 1), i as usize);
    Ok(StepStats {
        i,
        genus_lower: Exact::from_surd(&bounds.lower),
        genus_upper: Exact::from_surd(&bounds.upper),
        genus_tight_upper: Exact::from_surd(&bounds.tight_upper),
        m_i,
        gamma_exact: gamma_exact(params.q, &genus),
        gamma_claimed: r * (i as u64 + 1) + 3,
        r_exact,
        guaranteed: (r * (i as u64 + 1) + 3, r_claimed_lower.to_string()),
        r_claimed_lower,
        delta,
        genus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLocation {
    /// First step whose guaranteed interval contains `n`, if any.
    pub step: Option<u32>,
    pub interval: Option<(u64, u64)>,
    /// `(2/r) log_q(kn)`, an upper estimate for the step index.
    pub estimate: f64,
}

/// Smallest `i` with `r(i+1)+3 <= n <= (k+1)^i`.
pub fn find_step(params: &TowerParams, n: u64) -> Result<StepLocation> {
    let r = params.r as u64;
    let start = 2 * r + 3;
    if n < start {
        return Err(Error::OutOfCoverage { n, start });
    }
    let estimate = 2.0 / params.r as f64 * ((params.k * n) as f64).ln() / (params.q as f64).ln();
    let mut i = 1u32;
    while r * (i as u64 + 1) + 3 <= n {
        let left = r * (i as u64 + 1) + 3;
        let right = num_traits::pow(big(params.k + 1), i as usize);
        if big(n) <= right {
            return Ok(StepLocation {
                step: Some(i),
                interval: Some((left, right.to_u64().unwrap_or(u64::MAX))),
                estimate,
            });
        }
        i += 1;
    }
    Ok(StepLocation {
        step: None,
        interval: None,
        estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    BuiltinVerified,
    BuilderGenerated,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuEntry {
    pub degree: usize,
    /// Witness for the multilinear complexity of `k`-fold products.
    pub s: usize,
    /// Witness for the bilinear complexity of pairwise products.
    pub b: usize,
    pub provenance: Provenance,
}

/// Per-degree rank witnesses, degrees `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuTable {
    pub k: usize,
    pub entries: Vec<MuEntry>,
}

impl MuTable {
    /// Entries for degrees `1..` in order; flagged as user supplied.
    pub fn user_supplied(k: usize, s: &[usize], b: &[usize]) -> Result<Self> {
        if s.len() != b.len() {
            return Err(Error::Config("s and b columns differ in length".into()));
        }
        if s.iter().chain(b).any(|&v| v == 0) {
            return Err(Error::Config("rank witnesses must be positive".into()));
        }
        Ok(MuTable {
            k,
            entries: (0..s.len())
                .map(|i| MuEntry {
                    degree: i + 1,
                    s: s[i],
                    b: b[i],
                    provenance: Provenance::UserSupplied,
                })
                .collect(),
        })
    }

    pub fn covers(&self, r: usize) -> bool {
        self.entries.len() >= r && self.entries.iter().enumerate().all(|(i, e)| e.degree == i + 1)
    }

    fn argmax(&self, r: usize, pick: impl Fn(&MuEntry) -> usize) -> Result<(usize, usize)> {
        if r == 0 || !self.covers(r) {
            return Err(Error::Config(format!(
                "table covers {} degrees, {r} required",
                self.entries.len()
            )));
        }
        let mut best = (1, pick(&self.entries[0]));
        for e in &self.entries[1..r] {
            // v / d > best.1 / best.0
            if pick(e) * best.0 > best.1 * e.degree {
                best = (e.degree, pick(e));
            }
        }
        Ok(best)
    }

    /// `(r_0, s(r_0))` maximizing `s(i)/i` over `i <= r`, ties to smaller `i`.
    pub fn r0(&self, r: usize) -> Result<(usize, usize)> {
        self.argmax(r, |e| e.s)
    }

    /// `(r'_0, b(r'_0))` maximizing `b(i)/i`.
    pub fn r0_prime(&self, r: usize) -> Result<(usize, usize)> {
        self.argmax(r, |e| e.b)
    }

    pub fn all_verified(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.provenance != Provenance::UserSupplied)
    }
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundPair {
    pub mu: BigRational,
    pub nu: BigRational,
}

/// `(kn + kg - k + r) s(r_0)/r_0` and `(k-1)(kn + kg - k + r) b(r'_0)/r'_0`.
pub fn curve_bounds(n: u64, g: &BigInt, r: usize, k: u64, table: &MuTable) -> Result<BoundPair> {
    let (r0, s0) = table.r0(r)?;
    let (r0p, b0) = table.r0_prime(r)?;
    let kb = big(k);
    let base = &kb * big(n) + &kb * g - &kb + BigInt::from(r);
    let base = BigRational::from_integer(base);
    Ok(BoundPair {
        mu: &base * ratio(s0, r0),
        nu: &base * BigRational::from_integer(big(k - 1)) * ratio(b0, r0p),
    })
}

fn check_table(params: &TowerParams, table: &MuTable) -> Result<()> {
    if !table.covers(params.r as usize) {
        return Err(Error::Config(format!(
            "table covers degrees 1..={}, bounds need 1..={}",
            table.entries.len(),
            params.r
        )));
    }
    Ok(())
}

/// `(k(k l + 1) n - k + 1) s(r_0)/r_0` and
/// `(k(k-1)(k l + 1) n - (k-1)^2) b(r'_0)/r'_0` with `l = q^(r/2)`.
pub fn tower_bounds(params: &TowerParams, n: u64, table: &MuTable) -> Result<BoundPair> {
    check_table(params, table)?;
    let r = params.r as usize;
    let (r0, s0) = table.r0(r)?;
    let (r0p, b0) = table.r0_prime(r)?;
    let k = big(params.k);
    let lin = &k * (&k * &params.l + 1);
    let mu = &lin * big(n) - &k + 1;
    let km1 = &k - 1;
    let nu = &lin * &km1 * big(n) - &km1 * &km1;
    Ok(BoundPair {
        mu: BigRational::from_integer(mu) * ratio(s0, r0),
        nu: BigRational::from_integer(nu) * ratio(b0, r0p),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearBounds {
    /// `k(k q^(r/2) + 1) s(r_0)/r_0 n`
    pub mu: BigRational,
    /// `k(k(k+1)q + 1) s(r_0)/r_0 n`
    pub mu_simplified: BigRational,
    pub nu: BigRational,
    pub nu_simplified: BigRational,
}

pub fn linear_bounds(params: &TowerParams, n: u64, table: &MuTable) -> Result<LinearBounds> {
    check_table(params, table)?;
    let r = params.r as usize;
    let (r0, s0) = table.r0(r)?;
    let (r0p, b0) = table.r0_prime(r)?;
    let k = big(params.k);
    let nb = BigRational::from_integer(big(n));
    let sharp: BigInt = &k * (&k * &params.l + 1);
    let simple: BigInt = &k * (&k * (&k + 1) * big(params.q) + 1);
    let km1 = &k - 1;
    let s = ratio(s0, r0) * &nb;
    let b = ratio(b0, r0p) * &nb;
    Ok(LinearBounds {
        mu: BigRational::from_integer(sharp.clone()) * &s,
        mu_simplified: BigRational::from_integer(simple.clone()) * &s,
        nu: BigRational::from_integer(sharp * &km1) * &b,
        nu_simplified: BigRational::from_integer(simple * &km1) * &b,
    })
}

/// `witness <= bound`, exactly.
pub fn witness_within(witness: usize, bound: &BigRational) -> bool {
    BigRational::from_integer(BigInt::from(witness)) <= *bound
}

/// Linear coefficient `k(k q^(r/2) + 1)` of the tower bound.
pub fn tower_linear_factor(params: &TowerParams) -> BigInt {
    let k = big(params.k);
    &k * (&k * &params.l + 1)
}

/// One checkable inequality between complexity witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub name: String,
    pub statement: String,
    pub lhs: Option<u64>,
    pub rhs: Option<u64>,
    pub status: RelationStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationStatus {
    Holds,
    Violated,
    NotCheckable,
}

impl Relation {
    pub fn check(name: &str, statement: String, lhs: u64, rhs: u64) -> Self {
        Relation {
            name: name.into(),
            statement,
            lhs: Some(lhs),
            rhs: Some(rhs),
            status: if lhs <= rhs {
                RelationStatus::Holds
            } else {
                RelationStatus::Violated
            },
        }
    }

    pub fn not_checkable(name: &str, statement: String) -> Self {
        Relation {
            name: name.into(),
            statement,
            lhs: None,
            rhs: None,
            status: RelationStatus::NotCheckable,
        }
    }
}

/// Everything the `bounds` report renders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub q: u64,
    pub k: u64,
    pub n: u64,
    pub params: TowerParams,
    pub table: MuTable,
    pub location: Option<StepLocation>,
    pub steps: Vec<StepStats>,
    /// Curve bounds at the genus of the located step.
    pub curve_mu: Option<Exact>,
    pub curve_nu: Option<Exact>,
    pub tower_linear_factor: String,
    pub tower_mu: Exact,
    pub tower_nu: Exact,
    pub linear_mu: Exact,
    pub linear_mu_simplified: Exact,
    pub linear_nu: Exact,
    pub linear_nu_simplified: Exact,
    /// Existence of a degree-`n` place at the located step.
    pub existence: Option<bool>,
    pub relations: Vec<Relation>,
}

/// Assembles the formula part of a [`BoundReport`]; `relations` is left empty.
pub fn bound_report(q: u64, k: u64, n: u64, table: &MuTable, max_steps: u32) -> Result<BoundReport> {
    let params = smallest_even_r(q, k)?;
    let location = match find_step(&params, n) {
        Ok(loc) => Some(loc),
        Err(Error::OutOfCoverage { .. }) => None,
        Err(e) => return Err(e),
    };
    let step = location.as_ref().and_then(|l| l.step);
    let last = step.unwrap_or(1).max(max_steps);
    let steps = (1..=last)
        .map(|i| step_stats(&params, i))
        .collect::<Result<Vec<_>>>()?;
    let (curve_mu, curve_nu, existence) = match step {
        Some(i) => {
            let g = gs_genus(&params.l, i);
            let b = curve_bounds(n, &g, params.r as usize, k, table)?;
            (
                Some(Exact::from_rational(&b.mu)),
                Some(Exact::from_rational(&b.nu)),
                Some(existence_condition(q, n as u32, &g)),
            )
        }
        None => (None, None, None),
    };
    let t4 = tower_bounds(&params, n, table)?;
    let c = linear_bounds(&params, n, table)?;
    Ok(BoundReport {
        q,
        k,
        n,
        tower_linear_factor: tower_linear_factor(&params).to_string(),
        params,
        table: table.clone(),
        location,
        steps,
        curve_mu,
        curve_nu,
        tower_mu: Exact::from_rational(&t4.mu),
        tower_nu: Exact::from_rational(&t4.nu),
        linear_mu: Exact::from_rational(&c.mu),
        linear_mu_simplified: Exact::from_rational(&c.mu_simplified),
        linear_nu: Exact::from_rational(&c.nu),
        linear_nu_simplified: Exact::from_rational(&c.nu_simplified),
        existence,
        relations: Vec::new(),
    })
}
