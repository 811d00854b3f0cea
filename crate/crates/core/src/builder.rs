//! Evaluation-interpolation algorithms for `k`-fold products in `F_{q^n}`
//! built on places of the rational function field.
//!
//! A [`Builder`] owns one base field `F_q`. It selects evaluation places by a
//! small dynamic program over degrees, attaches a verified sub-multiplier to
//! every place, and memoizes both the per-degree rank table and the
//! sub-multipliers themselves.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;

use crate::bounds::{MuEntry, MuTable, Provenance};
use crate::error::{Error, Result};
use crate::ext::ExtField;
use crate::field::{BaseField, MAX_ORDER};
use crate::function_field::{EvaluationSetup, Place};
use crate::linalg::Matrix;
use crate::poly::{self, Poly};
use crate::tensor::{builtin_bilinear, TensorDecomposition, Term, Verdict, DEFAULT_BUDGET};
use crate::tower;

/// Largest `q^d` for which tower composition is offered; the change of basis
/// searches the extension for a root by brute force.
pub const COMPOSE_LIMIT: u128 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubMode {
    /// Builtin tables, recursive builds on lower-degree places, tower
    /// composition and the naive expansion, whichever is smallest.
    Recursive,
    /// Builtin tables, otherwise the naive expansion.
    Builtin,
    /// Always the naive expansion.
    Naive,
}

impl FromStr for SubMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recursive" => Ok(SubMode::Recursive),
            "builtin" => Ok(SubMode::Builtin),
            "naive" => Ok(SubMode::Naive),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for SubMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubMode::Recursive => "recursive",
            SubMode::Builtin => "builtin",
            SubMode::Naive => "naive",
        })
    }
}

/// How multiplications are counted when running an algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Costing {
    /// One `k`-linear product per term of each place's sub-multiplier.
    Mu,
    /// `k - 1` chained bilinear products per place.
    Nu,
}

impl FromStr for Costing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu" => Ok(Costing::Mu),
            "nu" => Ok(Costing::Nu),
            other => Err(Error::InvalidParameter(format!("unknown costing {other:?}"))),
        }
    }
}

/// Origin of a sub-multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SubKind {
    Scalar,
    Builtin,
    Recursive,
    Composed { inner_degree: usize },
    Naive,
}

impl SubKind {
    pub fn provenance(self) -> Provenance {
        match self {
            SubKind::Scalar | SubKind::Builtin => Provenance::BuiltinVerified,
            _ => Provenance::BuilderGenerated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankChoice {
    pub rank: u128,
    pub kind: SubKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Verification {
    Exhaustive { tuples: u128 },
    /// Probabilistic: the basis check exceeded the budget.
    Randomized { samples: usize },
}

impl Verification {
    pub fn is_exhaustive(&self) -> bool {
        matches!(self, Verification::Exhaustive { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub mode: SubMode,
    /// Basis tuples checked exhaustively before falling back to sampling.
    pub budget: u128,
    pub samples: usize,
    pub seed: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            mode: SubMode::Recursive,
            budget: DEFAULT_BUDGET,
            samples: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubMultiplier {
    pub decomposition: TensorDecomposition,
    pub kind: SubKind,
    pub verification: Verification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreePlan {
    pub degree: usize,
    pub count: usize,
    pub rank: u128,
    pub kind: SubKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmPlan {
    pub q: u32,
    pub n: usize,
    pub k: usize,
    pub q_place: Poly,
    pub divisor_multiplicity: usize,
    /// `k(n-1) + 1`
    pub target: usize,
    /// `sum_i i N_i`
    pub total: usize,
    pub degrees: Vec<DegreePlan>,
    /// Evaluation places in order: ascending degree, enumeration order within.
    pub places: Vec<Poly>,
    pub estimated_cost: u128,
}

impl AlgorithmPlan {
    pub fn count(&self, degree: usize) -> usize {
        self.degrees
            .iter()
            .find(|d| d.degree == degree)
            .map_or(0, |d| d.count)
    }

    /// The degree multiset, ascending.
    pub fn multiset(&self) -> Vec<usize> {
        self.degrees
            .iter()
            .flat_map(|d| std::iter::repeat_n(d.degree, d.count))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeCost {
    pub degree: usize,
    pub count: usize,
    /// Rank of the `k`-linear sub-multiplier.
    pub s: usize,
    /// Rank of the bilinear sub-multiplier.
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    /// `sum N_i s_i`
    pub rank: usize,
    /// `(k-1) sum N_i b_i`
    pub nu_count: usize,
    /// Largest place degree used.
    pub max_degree: usize,
    pub per_degree: Vec<DegreeCost>,
}

impl CostReport {
    pub fn count(&self, costing: Costing) -> usize {
        match costing {
            Costing::Mu => self.rank,
            Costing::Nu => self.nu_count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Flattened {
    pub decomposition: TensorDecomposition,
    pub verification: Verification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub advisory: String,
    /// Symmetric with `n > 1` and `k > q`, which cannot be correct.
    pub contradiction: bool,
}

/// The schoolbook product, used as the correctness oracle.
pub fn direct_product(field: &ExtField, inputs: &[Vec<u32>]) -> Result<Vec<u32>> {
    field.product(inputs.iter().map(Vec::as_slice))
}

pub fn symmetric_check(dec: &TensorDecomposition) -> SymmetryReport {
    let symmetric = dec.is_symmetric();
    let q = dec.field().base().order() as usize;
    let (n, k) = (dec.n(), dec.k());
    let contradiction = symmetric && n > 1 && k > q;
    let advisory = if n == 1 {
        "n = 1: the rank-one product is symmetric for every k".to_string()
    } else if k <= q {
        format!("k = {k} <= q = {q}: symmetric decompositions exist")
    } else if contradiction {
        format!("k = {k} > q = {q} but the decomposition is symmetric: construction bug")
    } else {
        format!("k = {k} > q = {q}: no symmetric decomposition exists")
    };
    SymmetryReport {
        symmetric,
        advisory,
        contradiction,
    }
}

/// Exact basis check within budget, seeded sampling above it.
pub fn verify_decomposition(dec: &TensorDecomposition, opts: &BuildOptions) -> Result<Verification> {
    let mismatch = |tuple: Vec<usize>| {
        Err(Error::VerificationFailed(if tuple.is_empty() {
            "random sample disagrees with the field product".into()
        } else {
            format!("basis tuple {tuple:?} disagrees with the field product")
        }))
    };
    match dec.verify_with_budget(opts.budget) {
        Ok(Verdict::Verified) => Ok(Verification::Exhaustive {
            tuples: dec.basis_tuples(),
        }),
        Ok(Verdict::Mismatch { tuple, .. }) => mismatch(tuple),
        Err(Error::BudgetExceeded { .. }) => {
            let mut rng = StdRng::seed_from_u64(opts.seed);
            match dec.verify_random(opts.samples, &mut rng)? {
                Verdict::Verified => Ok(Verification::Randomized {
                    samples: opts.samples,
                }),
                Verdict::Mismatch { tuple, .. } => mismatch(tuple),
            }
        }
        Err(e) => Err(e),
    }
}

struct Selection {
    counts: Vec<(usize, usize)>,
    cost: u128,
    total: usize,
}

pub struct Builder {
    base: Arc<BaseField>,
    opts: BuildOptions,
    ranks: Mutex<HashMap<(usize, usize), RankChoice>>,
    subs: Mutex<HashMap<(Poly, usize), Arc<SubMultiplier>>>,
    towers: Mutex<HashMap<usize, Arc<Builder>>>,
}

impl fmt::Debug for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Builder")
            .field("q", &self.base.order())
            .field("opts", &self.opts)
            .finish()
    }
}

fn first_irreducible(base: &BaseField, d: usize) -> Result<Poly> {
    poly::irreducibles(base, d)
        .next()
        .ok_or_else(|| Error::InvalidParameter(format!("no irreducible of degree {d}")))
}

impl Builder {
    pub fn new(base: Arc<BaseField>, opts: BuildOptions) -> Self {
        Builder {
            base,
            opts,
            ranks: Mutex::new(HashMap::new()),
            subs: Mutex::new(HashMap::new()),
            towers: Mutex::new(HashMap::new()),
        }
    }

    pub fn for_order(q: u64, opts: BuildOptions) -> Result<Self> {
        Ok(Self::new(BaseField::with_order(q)?, opts))
    }

    pub fn base(&self) -> &Arc<BaseField> {
        &self.base
    }

    pub fn options(&self) -> &BuildOptions {
        &self.opts
    }

    /// The default modulus of degree `n`: the first monic irreducible.
    pub fn default_modulus(&self, n: usize) -> Result<Poly> {
        first_irreducible(&self.base, n)
    }

    /// Builder over `F_{q^a} = F_q[x]/(P_a)` with `P_a` the default modulus;
    /// only available over prime fields.
    pub fn tower_builder(&self, a: usize) -> Result<Arc<Builder>> {
        if !self.base.is_prime_field() {
            return Err(Error::InvalidParameter(
                "tower fields are only built over prime fields".into(),
            ));
        }
        if let Some(b) = self.towers.lock().unwrap().get(&a) {
            return Ok(b.clone());
        }
        let modulus = self.default_modulus(a)?;
        let field = BaseField::new(self.base.characteristic() as u64, modulus.coeffs().to_vec())?;
        let b = Arc::new(Builder::new(field, self.opts));
        Ok(self.towers.lock().unwrap().entry(a).or_insert(b).clone())
    }

    fn composable(&self, d: usize, a: usize) -> bool {
        let q = self.base.order() as u128;
        self.base.is_prime_field()
            && q.checked_pow(d as u32).is_some_and(|v| v <= COMPOSE_LIMIT)
            && q.pow(a as u32) <= MAX_ORDER as u128
    }

    /// Rank of the sub-multiplier this builder attaches to places of degree
    /// `d` for `k`-fold products, and how it is obtained.
    pub fn rank_choice(&self, d: usize, k: usize) -> Result<RankChoice> {
        if d == 0 || k == 0 {
            return Err(Error::InvalidParameter("degree and arity must be positive".into()));
        }
        if d == 1 {
            return Ok(RankChoice {
                rank: 1,
                kind: SubKind::Scalar,
            });
        }
        if let Some(c) = self.ranks.lock().unwrap().get(&(d, k)) {
            return Ok(*c);
        }
        let mut best: Option<RankChoice> = None;
        let mut consider = |rank: u128, kind: SubKind| {
            if best.is_none_or(|b| rank < b.rank) {
                best = Some(RankChoice { rank, kind });
            }
        };
        if self.opts.mode != SubMode::Naive && k == 2 && (d == 2 || d == 3) {
            consider(if d == 2 { 3 } else { 6 }, SubKind::Builtin);
        }
        if self.opts.mode == SubMode::Recursive {
            if let Some(sel) = self.select(d, k, d - 1)? {
                consider(sel.cost, SubKind::Recursive);
            }
            for a in (2..d).filter(|a| d.is_multiple_of(*a)) {
                if !self.composable(d, a) {
                    continue;
                }
                let inner = self.rank_choice(a, k)?.rank;
                let outer = self.tower_builder(a)?.rank_choice(d / a, k)?.rank;
                consider(inner.saturating_mul(outer), SubKind::Composed { inner_degree: a });
            }
        }
        consider(
            (d as u128).checked_pow(k as u32).unwrap_or(u128::MAX),
            SubKind::Naive,
        );
        let choice = best.expect("naive candidate always present");
        self.ranks.lock().unwrap().insert((d, k), choice);
        Ok(choice)
    }

    /// Cheapest multiset of place degrees (at most `limit`) whose total
    /// reaches `k(n-1)+1`, with the default modulus of degree `n` excluded
    /// from the supply. `None` when the supply up to `limit` is too small.
    fn select(&self, n: usize, k: usize, limit: usize) -> Result<Option<Selection>> {
        const INF: u128 = u128::MAX;
        let q = self.base.order() as u64;
        let target = k * (n - 1) + 1;
        let cap = 2 * target + 2;
        let supply_of = |i: usize| {
            poly::count_irreducibles(q, i)
                .saturating_sub((i == n) as u128)
                .min(cap as u128) as usize
        };
        let mut supply = vec![0usize];
        let mut reach = 0usize;
        let mut first_feasible = None;
        for i in 1..=limit.min(target) {
            supply.push(supply_of(i));
            reach = reach.saturating_add(i * supply[i]);
            if reach >= target {
                first_feasible = Some(i);
                break;
            }
        }
        let Some(istar) = first_feasible else {
            return Ok(None);
        };
        let r_max = target.min(istar + 2).min(limit);
        for i in supply.len()..=r_max {
            supply.push(supply_of(i));
        }
        let costs = (1..=r_max)
            .map(|i| self.rank_choice(i, k).map(|c| c.rank.min(INF - 1)))
            .collect::<Result<Vec<_>>>()?;
        let smax = target + r_max - 1;
        // g[i][s]: cheapest way to reach exactly s with degrees >= i
        let mut g = vec![vec![INF; smax + 1]; r_max + 2];
        g[r_max + 1][0] = 0;
        for i in (1..=r_max).rev() {
            for s in 0..=smax {
                let mut best = INF;
                for c in 0..=supply[i].min(s / i) {
                    let rest = g[i + 1][s - c * i];
                    if rest != INF {
                        best = best.min(rest.saturating_add(costs[i - 1].saturating_mul(c as u128)));
                    }
                }
                g[i][s] = best;
            }
        }
        let Some(total) = (target..=smax)
            .filter(|&s| g[1][s] != INF)
            .min_by_key(|&s| (g[1][s], s))
        else {
            return Ok(None);
        };
        let cost = g[1][total];
        // taking as many low-degree places as possible gives the
        // lexicographically smallest multiset among the optimal ones
        let mut counts = Vec::new();
        let mut s = total;
        for i in 1..=r_max {
            let c = (0..=supply[i].min(s / i))
                .rev()
                .find(|&c| {
                    let rest = g[i + 1][s - c * i];
                    rest != INF && rest.saturating_add(costs[i - 1].saturating_mul(c as u128)) == g[i][s]
                })
                .expect("dp table is consistent");
            if c > 0 {
                counts.push((i, c));
            }
            s -= c * i;
        }
        debug_assert_eq!(s, 0);
        Ok(Some(Selection { counts, cost, total }))
    }

    /// Places for `k`-fold products in `F_q[x]/(q_place)` using degrees up to
    /// `limit`.
    pub fn plan_for_modulus(&self, q_place: &Poly, k: usize, limit: usize) -> Result<AlgorithmPlan> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("k = {k} < 2")));
        }
        let n = q_place
            .degree()
            .filter(|&d| d >= 1)
            .ok_or(Error::BadModulus { degree: 0 })?;
        let target = k * (n - 1) + 1;
        let q = self.base.order();
        if n == 1 {
            return Ok(AlgorithmPlan {
                q,
                n,
                k,
                q_place: q_place.clone(),
                divisor_multiplicity: 0,
                target,
                total: 0,
                degrees: Vec::new(),
                places: Vec::new(),
                estimated_cost: 1,
            });
        }
        let sel = self
            .select(n, k, limit)?
            .ok_or(Error::PlacesExhausted {
                target,
                max_degree: limit.min(target),
            })?;
        let mut degrees = Vec::new();
        let mut places = Vec::new();
        for &(d, c) in &sel.counts {
            let chosen: Vec<Poly> = poly::irreducibles(&self.base, d)
                .filter(|p| p != q_place)
                .take(c)
                .collect();
            if chosen.len() != c {
                return Err(Error::Internal(format!("only {} places of degree {d}", chosen.len())));
            }
            places.extend(chosen);
            let choice = self.rank_choice(d, k)?;
            degrees.push(DegreePlan {
                degree: d,
                count: c,
                rank: choice.rank,
                kind: choice.kind,
            });
        }
        Ok(AlgorithmPlan {
            q,
            n,
            k,
            q_place: q_place.clone(),
            divisor_multiplicity: n - 1,
            target,
            total: sel.total,
            degrees,
            places,
            estimated_cost: sel.cost,
        })
    }

    /// Plan for the default modulus of degree `n`.
    pub fn choose_places(&self, n: usize, k: usize) -> Result<AlgorithmPlan> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        self.plan_for_modulus(&self.default_modulus(n)?, k, usize::MAX)
    }

    /// Verified `k`-linear decomposition of the product in `F_q[x]/(p)`.
    pub fn sub_multiplier(&self, p: &Poly, k: usize) -> Result<Arc<SubMultiplier>> {
        let key = (p.clone(), k);
        if let Some(s) = self.subs.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let field = ExtField::new(self.base.clone(), p.clone())?;
        let d = field.degree();
        let choice = self.rank_choice(d, k)?;
        let (decomposition, verification) = match choice.kind {
            SubKind::Scalar => {
                let dec = TensorDecomposition::scalar(field, k)?;
                let v = verify_decomposition(&dec, &self.opts)?;
                (dec, v)
            }
            SubKind::Builtin => {
                let dec = builtin_bilinear(&field)
                    .ok_or_else(|| Error::Internal(format!("no builtin table for degree {d}")))?;
                let v = verify_decomposition(&dec, &self.opts)?;
                (dec, v)
            }
            SubKind::Naive => {
                let dec = TensorDecomposition::naive(field, k);
                let v = verify_decomposition(&dec, &self.opts)?;
                (dec, v)
            }
            SubKind::Recursive => {
                let flat = self.build_for_modulus(p, k, d - 1)?.flatten()?;
                (flat.decomposition, flat.verification)
            }
            SubKind::Composed { inner_degree: a } => {
                let inner = self.sub_multiplier(&self.default_modulus(a)?, k)?;
                let tb = self.tower_builder(a)?;
                let outer = tb.sub_multiplier(&tb.default_modulus(d / a)?, k)?;
                let dec = tower::compose(&inner.decomposition, &outer.decomposition, &field)?;
                let v = verify_decomposition(&dec, &self.opts)?;
                (dec, v)
            }
        };
        if decomposition.rank() as u128 != choice.rank {
            return Err(Error::Internal(format!(
                "degree {d} sub-multiplier has rank {}, expected {}",
                decomposition.rank(),
                choice.rank
            )));
        }
        let sub = Arc::new(SubMultiplier {
            decomposition,
            kind: choice.kind,
            verification,
        });
        Ok(self.subs.lock().unwrap().entry(key).or_insert(sub).clone())
    }

    /// The algorithm for `F_{q^n}` with the default modulus.
    pub fn build(&self, n: usize, k: usize) -> Result<KMulAlgorithm> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        self.build_for_modulus(&self.default_modulus(n)?, k, usize::MAX)
    }

    pub fn build_for_modulus(&self, q_place: &Poly, k: usize, limit: usize) -> Result<KMulAlgorithm> {
        let q_field = ExtField::new(self.base.clone(), q_place.clone())?;
        let plan = self.plan_for_modulus(q_place, k, limit)?;
        let (setup, moduli) = if plan.n == 1 {
            (None, vec![q_place.clone()])
        } else {
            let places = plan
                .places
                .iter()
                .map(|p| Place::finite(p.clone(), &self.base))
                .collect::<Result<Vec<_>>>()?;
            let q = Place::finite(q_place.clone(), &self.base)?;
            let setup = EvaluationSetup::new(self.base.clone(), q, places, k)?;
            (Some(setup), plan.places.clone())
        };
        let subs = moduli
            .iter()
            .map(|p| self.sub_multiplier(p, k))
            .collect::<Result<Vec<_>>>()?;
        let pairs = moduli
            .iter()
            .map(|p| self.sub_multiplier(p, 2))
            .collect::<Result<Vec<_>>>()?;
        let mut per_degree: Vec<DegreeCost> = Vec::new();
        for (s, b) in subs.iter().zip(&pairs) {
            let degree = s.decomposition.n();
            match per_degree.last_mut() {
                Some(last) if last.degree == degree => last.count += 1,
                _ => per_degree.push(DegreeCost {
                    degree,
                    count: 1,
                    s: s.decomposition.rank(),
                    b: b.decomposition.rank(),
                }),
            }
        }
        for (dp, dc) in plan.degrees.iter().zip(&per_degree) {
            if dp.rank != dc.s as u128 {
                return Err(Error::Internal("sub-multiplier rank differs from plan".into()));
            }
        }
        let cost = CostReport {
            rank: subs.iter().map(|s| s.decomposition.rank()).sum(),
            nu_count: (k - 1) * pairs.iter().map(|b| b.decomposition.rank()).sum::<usize>(),
            max_degree: per_degree.iter().map(|d| d.degree).max().unwrap_or(1),
            per_degree,
        };
        Ok(KMulAlgorithm {
            plan,
            q_field,
            setup,
            subs,
            pairs,
            cost,
            opts: self.opts,
        })
    }

    /// Per-degree witnesses `s(i)`, `b(i)` for `i = 1..=r`, taken from the
    /// sub-multipliers of the default moduli.
    pub fn mu_table(&self, k: usize, r: usize) -> Result<MuTable> {
        let entries = (1..=r)
            .map(|d| {
                let p = self.default_modulus(d)?;
                let s = self.sub_multiplier(&p, k)?;
                let b = self.sub_multiplier(&p, 2)?;
                let builtin = |k: SubKind| k.provenance() == Provenance::BuiltinVerified;
                Ok(MuEntry {
                    degree: d,
                    s: s.decomposition.rank(),
                    b: b.decomposition.rank(),
                    provenance: if builtin(s.kind) && builtin(b.kind) {
                        Provenance::BuiltinVerified
                    } else {
                        Provenance::BuilderGenerated
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MuTable { k, entries })
    }

    /// Smallest verified decomposition for `F_{q^n}` with the default
    /// modulus: the flattened algorithm or the degree-`n` sub-multiplier.
    pub fn best_decomposition(&self, n: usize, k: usize) -> Result<Flattened> {
        let flat = self.build(n, k)?.flatten()?;
        let sub = self.sub_multiplier(&self.default_modulus(n)?, k)?;
        if sub.decomposition.rank() < flat.decomposition.rank() {
            return Ok(Flattened {
                decomposition: sub.decomposition.clone(),
                verification: sub.verification,
            });
        }
        Ok(flat)
    }

    /// Upper-bound witness for the multilinear complexity.
    pub fn mu_witness(&self, n: usize, k: usize) -> Result<usize> {
        Ok(self.best_decomposition(n, k)?.decomposition.rank())
    }

    /// Upper-bound witness for the number of chained bilinear products:
    /// the better of the built chain and `k - 1` copies of a bilinear witness.
    pub fn nu_witness(&self, n: usize, k: usize) -> Result<usize> {
        let chained = self.build(n, k)?.cost.nu_count;
        Ok(chained.min((k - 1) * self.mu_witness(n, 2)?))
    }
}

/// An evaluation-interpolation algorithm for `k`-fold products in
/// `F_{q^n}`, with one sub-multiplier per evaluation place.
#[derive(Debug, Clone)]
pub struct KMulAlgorithm {
    plan: AlgorithmPlan,
    q_field: ExtField,
    /// `None` for `n = 1`.
    setup: Option<EvaluationSetup>,
    subs: Vec<Arc<SubMultiplier>>,
    pairs: Vec<Arc<SubMultiplier>>,
    cost: CostReport,
    opts: BuildOptions,
}

impl KMulAlgorithm {
    pub fn plan(&self) -> &AlgorithmPlan {
        &self.plan
    }

    pub fn field(&self) -> &ExtField {
        &self.q_field
    }

    pub fn setup(&self) -> Option<&EvaluationSetup> {
        self.setup.as_ref()
    }

    pub fn cost(&self) -> &CostReport {
        &self.cost
    }

    pub fn n(&self) -> usize {
        self.plan.n
    }

    pub fn k(&self) -> usize {
        self.plan.k
    }

    pub fn sub_multipliers(&self) -> &[Arc<SubMultiplier>] {
        &self.subs
    }

    fn place_product(&self, j: usize, residues: &[Vec<u32>], costing: Costing) -> Result<Vec<u32>> {
        match costing {
            Costing::Mu => self.subs[j].decomposition.apply(residues),
            Costing::Nu => {
                let pair = &self.pairs[j].decomposition;
                residues[1..]
                    .iter()
                    .try_fold(residues[0].clone(), |acc, x| pair.apply(&[acc, x.clone()]))
            }
        }
    }

    /// Evaluate, multiply place by place, interpolate and reduce mod `Q`.
    pub fn run(&self, inputs: &[Vec<u32>], costing: Costing) -> Result<Vec<u32>> {
        if inputs.len() != self.k() {
            return Err(Error::ShapeMismatch(format!(
                "{} inputs for k = {}",
                inputs.len(),
                self.k()
            )));
        }
        for x in inputs {
            self.q_field.check(x)?;
        }
        let Some(setup) = &self.setup else {
            return self.place_product(0, inputs, costing);
        };
        let it = setup.interpolator();
        let residues = inputs
            .iter()
            .map(|x| Ok(it.evaluate_all(&setup.lift(x)?)))
            .collect::<Result<Vec<_>>>()?;
        let values = (0..it.places().len())
            .map(|j| {
                let at_place: Vec<Vec<u32>> = residues.iter().map(|r| r[j].clone()).collect();
                self.place_product(j, &at_place, costing)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(setup.project(&it.interpolate(&values)?))
    }

    /// The explicit decomposition over `F_q`, without verification.
    pub fn flatten_unchecked(&self) -> Result<TensorDecomposition> {
        let Some(setup) = &self.setup else {
            return TensorDecomposition::scalar(self.q_field.clone(), self.k());
        };
        let base = setup.base();
        let n = self.n();
        let it = setup.interpolator();
        let ev_p = setup.ev_p();
        // Ev_Q^{-1} followed by Ev_Q of each left-inverse column
        let projected: Vec<Vec<u32>> = (0..ev_p.rows())
            .map(|row| setup.project(&Poly::new(it.solver().column(row))))
            .collect();
        let mut terms = Vec::with_capacity(self.cost.rank);
        for (j, sub) in self.subs.iter().enumerate() {
            let off = it.offsets()[j];
            let d = sub.decomposition.n();
            // reduction mod P_j of polynomials of degree < n, composed with Ev_Q^{-1}
            let block = Matrix::from_rows(
                &(off..off + d)
                    .map(|r| ev_p.row(r)[..n].to_vec())
                    .collect::<Vec<_>>(),
            );
            let red = block.mul(setup.ev_q_inv(), base)?;
            for t in sub.decomposition.terms() {
                let forms = t
                    .forms
                    .iter()
                    .map(|w| red.vec_mul(w, base))
                    .collect::<Result<Vec<_>>>()?;
                let mut output = vec![0; n];
                for (c, &o) in t.output.iter().enumerate() {
                    if o == 0 {
                        continue;
                    }
                    for (acc, &v) in output.iter_mut().zip(&projected[off + c]) {
                        *acc = base.add(*acc, base.mul(o, v));
                    }
                }
                terms.push(Term { forms, output });
            }
        }
        TensorDecomposition::new(self.q_field.clone(), self.k(), terms)
    }

    /// The explicit decomposition, verified before it is returned.
    pub fn flatten(&self) -> Result<Flattened> {
        let decomposition = self.flatten_unchecked()?;
        let verification = verify_decomposition(&decomposition, &self.opts)?;
        Ok(Flattened {
            decomposition,
            verification,
        })
    }

    /// The genus-0 bound `(k(n-1) + r') max_{i <= r'} s_i / i` as a reduced
    /// fraction `(num, den)`, with `r'` the largest place degree used.
    pub fn genus0_bound(&self, builder: &Builder) -> Result<(u128, u128)> {
        let r = self.cost.max_degree;
        let (mut num, mut den) = (0u128, 1u128);
        for i in 1..=r {
            let s = builder.rank_choice(i, self.k())?.rank;
            if s * den > num * i as u128 {
                (num, den) = (s, i as u128);
            }
        }
        let num = ((self.k() * (self.n() - 1) + r) as u128).saturating_mul(num);
        let g = num_integer::gcd(num, den);
        Ok((num / g, den / g))
    }

    pub fn within_genus0_bound(&self, builder: &Builder) -> Result<bool> {
        let (num, den) = self.genus0_bound(builder)?;
        Ok((self.cost.rank as u128).saturating_mul(den) <= num)
    }
}
