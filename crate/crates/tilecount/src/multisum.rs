//! Binomial multisums with the extended binomial convention, sound support
//! bounding via Fourier-Motzkin elimination, exact evaluation, and the
//! balanced normal form.
//!
//! A multisum is `f(n) = sum over v in Z^d of prod_i binom(alpha_i(v,n),
//! beta_i(v,n))` for integer affine forms `alpha_i`, `beta_i`. The binomial
//! is the extended one: standard on `0 <= b <= a`, equal to 1 at `(-1, 0)`,
//! and 0 otherwise. Contributing lattice points are covered by the 2^r
//! sign-pattern polyhedra `P_S` (factor i in `S` pinned to the `(-1, 0)`
//! case, the rest in the standard region), which is also how evaluation
//! enumerates terms.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::polytope::{ceil_rat, floor_rat, IneqSystem, LatticeEnumerator, LinIneq, VarBounds};

/// `coeffs . v + n_coeff * n + constant`, all integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineForm {
    pub coeffs: Vec<i64>,
    pub n_coeff: i64,
    pub constant: i64,
}

impl AffineForm {
    pub fn new(coeffs: Vec<i64>, n_coeff: i64, constant: i64) -> Self {
        AffineForm { coeffs, n_coeff, constant }
    }

    pub fn constant_form(d: usize, c: i64) -> Self {
        AffineForm { coeffs: vec![0; d], n_coeff: 0, constant: c }
    }

    pub fn var(d: usize, j: usize, scale: i64) -> Self {
        let mut coeffs = vec![0; d];
        coeffs[j] = scale;
        AffineForm { coeffs, n_coeff: 0, constant: 0 }
    }

    pub fn n_term(d: usize, scale: i64) -> Self {
        AffineForm { coeffs: vec![0; d], n_coeff: scale, constant: 0 }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, v: &[i64], n: i64) -> i64 {
        debug_assert_eq!(v.len(), self.coeffs.len());
        let mut acc: i128 = self.constant as i128;
        acc += self.n_coeff as i128 * n as i128;
        for (c, x) in self.coeffs.iter().zip(v) {
            acc += *c as i128 * *x as i128;
        }
        i64::try_from(acc).expect("affine form value overflows i64")
    }

    pub fn is_constant(&self) -> bool {
        self.n_coeff == 0 && self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &AffineForm) -> AffineForm {
        self.scaled_add(1, other)
    }

    pub fn scaled_add(&self, k: i64, other: &AffineForm) -> AffineForm {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        AffineForm {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + k * b).collect(),
            n_coeff: self.n_coeff + k * other.n_coeff,
            constant: self.constant + k * other.constant,
        }
    }

    pub fn add_const(&self, c: i64) -> AffineForm {
        AffineForm { constant: self.constant + c, ..self.clone() }
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        self.scaled_add(-1, other)
    }

    /// Shift the `n` argument: the form of `n |-> f(v, n - s)`.
    pub fn shift_n(&self, s: i64) -> AffineForm {
        AffineForm { constant: self.constant - s * self.n_coeff, ..self.clone() }
    }

    /// Reindex into a larger variable space, placing old coordinates at `at`.
    pub fn embed(&self, d: usize, at: usize) -> AffineForm {
        let mut coeffs = vec![0; d];
        coeffs[at..at + self.coeffs.len()].copy_from_slice(&self.coeffs);
        AffineForm { coeffs, n_coeff: self.n_coeff, constant: self.constant }
    }

    /// Substitute `v = U w` (columns of `U` are images of the new axes).
    pub fn substitute(&self, u: &[Vec<i64>]) -> AffineForm {
        let new_d = u.len();
        let mut coeffs = vec![0i64; new_d];
        for (j, col) in u.iter().enumerate() {
            debug_assert_eq!(col.len(), self.coeffs.len());
            coeffs[j] = self.coeffs.iter().zip(col).map(|(c, x)| c * x).sum();
        }
        AffineForm { coeffs, n_coeff: self.n_coeff, constant: self.constant }
    }

    /// Row `coeffs . v + (n_coeff * n + constant) >= shift` at fixed n.
    fn ineq_at(&self, n: i64, shift: i64) -> LinIneq {
        LinIneq::from_ints(&self.coeffs, self.n_coeff * n + self.constant - shift)
    }

    /// Row over (v_1..v_d, n) with the n column kept symbolic.
    fn ineq_parametric(&self, shift: i64) -> LinIneq {
        let mut coeffs = self.coeffs.clone();
        coeffs.push(self.n_coeff);
        LinIneq::from_ints(&coeffs, self.constant - shift)
    }
}

/// The extended binomial coefficient.
pub fn ext_binom(a: i64, b: i64) -> BigUint {
    if 0 <= b && b <= a {
        binomial(a as u64, b as u64)
    } else if a == -1 && b == 0 {
        BigUint::one()
    } else {
        BigUint::zero()
    }
}

pub fn binomial(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for i in 0..b {
        acc = acc * BigUint::from(a - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn factorial(a: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=a {
        acc *= BigUint::from(i);
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomialMultiSum {
    pub d: usize,
    pub factors: Vec<(AffineForm, AffineForm)>,
}

/// Result of support bounding at a fixed n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support {
    /// Per-coordinate closed integer ranges covering every contributing
    /// point. `lo > hi` encodes an empty support.
    Box(Vec<(i64, i64)>),
    /// Some sign-pattern fiber has a recession direction.
    Unbounded,
}

impl BinomialMultiSum {
    pub fn new(d: usize, factors: Vec<(AffineForm, AffineForm)>) -> Self {
        for (a, b) in &factors {
            assert_eq!(a.dim(), d);
            assert_eq!(b.dim(), d);
        }
        BinomialMultiSum { d, factors }
    }

    pub fn r(&self) -> usize {
        self.factors.len()
    }

    /// Evaluate `n |-> f(n - s)`.
    pub fn shift_n(&self, s: i64) -> BinomialMultiSum {
        BinomialMultiSum {
            d: self.d,
            factors: self.factors.iter().map(|(a, b)| (a.shift_n(s), b.shift_n(s))).collect(),
        }
    }

    /// Substitute summation variables `v = U w` (`U` unimodular keeps values).
    pub fn substitute_vars(&self, u: &[Vec<i64>]) -> BinomialMultiSum {
        BinomialMultiSum {
            d: u.len(),
            factors: self.factors.iter().map(|(a, b)| (a.substitute(u), b.substitute(u))).collect(),
        }
    }

    /// The sign-pattern system `P_S` at fixed n, over the d summation
    /// variables. `in_s[i]` pins factor i to the `(-1, 0)` case.
    fn subset_system_at(&self, in_s: &[bool], n: i64) -> IneqSystem {
        let mut sys = IneqSystem::new(self.d);
        for (i, (a, b)) in self.factors.iter().enumerate() {
            if in_s[i] {
                sys.push_eq(a.ineq_at(n, -1)); // alpha = -1
                sys.push_eq(b.ineq_at(n, 0)); // beta = 0
            } else {
                sys.push(a.ineq_at(n, 0)); // alpha >= 0
                sys.push(b.ineq_at(n, 0)); // beta >= 0
                sys.push(a.sub(b).ineq_at(n, 0)); // alpha - beta >= 0
            }
        }
        sys
    }

    /// Same system over (v, n) with `n >= n_min` kept symbolic.
    pub(crate) fn subset_system_parametric(&self, in_s: &[bool], n_min: i64) -> IneqSystem {
        let mut sys = IneqSystem::new(self.d + 1);
        for (i, (a, b)) in self.factors.iter().enumerate() {
            if in_s[i] {
                sys.push_eq(a.ineq_parametric(-1));
                sys.push_eq(b.ineq_parametric(0));
            } else {
                sys.push(a.ineq_parametric(0));
                sys.push(b.ineq_parametric(0));
                sys.push(a.sub(b).ineq_parametric(0));
            }
        }
        let mut n_row = vec![0i64; self.d + 1];
        n_row[self.d] = 1;
        sys.push(LinIneq::from_ints(&n_row, -n_min)); // n >= n_min
        sys
    }

    /// Factors that can ever sit in the pinned `(-1, 0)` case for some
    /// (v, n) with n >= 0; all other factors never enter a subset S.
    pub(crate) fn pinnable_factors(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, (a, b)) in self.factors.iter().enumerate() {
            let mut sys = IneqSystem::new(self.d + 1);
            sys.push_eq(a.ineq_parametric(-1));
            sys.push_eq(b.ineq_parametric(0));
            let mut n_row = vec![0i64; self.d + 1];
            n_row[self.d] = 1;
            sys.push(LinIneq::from_ints(&n_row, 0));
            if sys.feasible() {
                out.push(i);
            }
        }
        out
    }

    fn feasible_subsets_at(&self, n: i64) -> Vec<Vec<bool>> {
        let candidates = self.pinnable_factors();
        assert!(
            candidates.len() <= 20,
            "sign-pattern enumeration over {} pinnable factors is out of scope",
            candidates.len()
        );
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << candidates.len()) {
            let mut in_s = vec![false; self.r()];
            for (k, &i) in candidates.iter().enumerate() {
                in_s[i] = mask & (1 << k) != 0;
            }
            if self.subset_system_at(&in_s, n).feasible() {
                out.push(in_s);
            }
        }
        out
    }
}

/// A per-coordinate integer box guaranteed to contain every contributing
/// point at this n, or `Unbounded` when some feasible sign-pattern fiber has
/// no finite coordinate bound.
pub fn bound_support(ms: &BinomialMultiSum, n: i64) -> Support {
    if ms.d == 0 {
        return Support::Box(Vec::new());
    }
    let mut hull: Option<Vec<(i64, i64)>> = None;
    for in_s in ms.feasible_subsets_at(n) {
        let sys = ms.subset_system_at(&in_s, n);
        let mut ranges = Vec::with_capacity(ms.d);
        for j in 0..ms.d {
            match sys.bounds_for(j) {
                VarBounds::Infeasible => {
                    ranges.clear();
                    break;
                }
                VarBounds::Range { lo: Some(lo), hi: Some(hi) } => {
                    let lo = ceil_rat(&lo).to_i64().expect("bound fits i64");
                    let hi = floor_rat(&hi).to_i64().expect("bound fits i64");
                    ranges.push((lo, hi));
                }
                VarBounds::Range { .. } => return Support::Unbounded,
            }
        }
        if ranges.len() != ms.d {
            continue;
        }
        hull = Some(match hull {
            None => ranges,
            Some(h) => h
                .iter()
                .zip(&ranges)
                .map(|(&(alo, ahi), &(blo, bhi))| (alo.min(blo), ahi.max(bhi)))
                .collect(),
        });
    }
    Support::Box(hull.unwrap_or_else(|| vec![(0, -1); ms.d]))
}

/// Shared binomial cache for one evaluation pass.
#[derive(Default)]
pub struct EvalStats {
    /// Number of `binom(-1, 0)` evaluations (uses of the extended
    /// convention) during term computation.
    pub ext_convention_hits: u64,
}

struct BinomCache {
    map: HashMap<(i64, i64), BigUint>,
}

impl BinomCache {
    fn new() -> Self {
        BinomCache { map: HashMap::new() }
    }

    fn get(&mut self, a: i64, b: i64, stats: &mut EvalStats) -> BigUint {
        if a == -1 && b == 0 {
            stats.ext_convention_hits += 1;
        }
        self.map.entry((a, b)).or_insert_with(|| ext_binom(a, b)).clone()
    }
}

/// Exact evaluation by enumerating lattice points of each feasible
/// sign-pattern fiber. Every point of such a fiber contributes a positive
/// term, and distinct fibers cover disjoint points.
pub fn eval_multisum(ms: &BinomialMultiSum, n: i64) -> Result<BigUint> {
    let mut stats = EvalStats::default();
    eval_multisum_with_stats(ms, n, &mut stats)
}

pub fn eval_multisum_with_stats(ms: &BinomialMultiSum, n: i64, stats: &mut EvalStats) -> Result<BigUint> {
    let mut cache = BinomCache::new();
    let mut total = BigUint::zero();
    for in_s in ms.feasible_subsets_at(n) {
        let sys = ms.subset_system_at(&in_s, n);
        let enumerator = LatticeEnumerator::new(&sys);
        let mut local = BigUint::zero();
        let complete = enumerator.for_each(|v| {
            let mut term = BigUint::one();
            for (i, (a, b)) in ms.factors.iter().enumerate() {
                if in_s[i] {
                    continue; // pinned factor contributes binom(-1, 0) = 1
                }
                let av = a.eval(v, n);
                let bv = b.eval(v, n);
                term *= cache.get(av, bv, stats);
                if term.is_zero() {
                    break;
                }
            }
            // Pinned factors are an actual use of the extended convention.
            stats.ext_convention_hits += in_s.iter().filter(|&&x| x).count() as u64;
            local += term;
        });
        if !complete {
            return Err(Error::UnboundedSupport);
        }
        total += local;
    }
    Ok(total)
}

/// Evaluate by brute force over an explicit box (oracle for soundness tests:
/// enlarging a valid box never changes the value).
pub fn eval_over_box(ms: &BinomialMultiSum, n: i64, ranges: &[(i64, i64)]) -> BigUint {
    assert_eq!(ranges.len(), ms.d);
    let mut cache = BinomCache::new();
    let mut stats = EvalStats::default();
    let mut total = BigUint::zero();
    let mut v = vec![0i64; ms.d];
    fn rec(
        ms: &BinomialMultiSum,
        n: i64,
        ranges: &[(i64, i64)],
        k: usize,
        v: &mut Vec<i64>,
        cache: &mut BinomCache,
        stats: &mut EvalStats,
        total: &mut BigUint,
    ) {
        if k == ranges.len() {
            let mut term = BigUint::one();
            for (a, b) in &ms.factors {
                term *= cache.get(a.eval(v, n), b.eval(v, n), stats);
                if term.is_zero() {
                    return;
                }
            }
            *total += term;
            return;
        }
        for x in ranges[k].0..=ranges[k].1 {
            v[k] = x;
            rec(ms, n, ranges, k + 1, v, cache, stats, total);
        }
    }
    rec(ms, n, ranges, 0, &mut v, &mut cache, &mut stats, &mut total);
    total
}

/// Pointwise product: concatenate index spaces and factor lists.
pub fn ms_prod(a: &BinomialMultiSum, b: &BinomialMultiSum) -> BinomialMultiSum {
    let d = a.d + b.d;
    let mut factors = Vec::with_capacity(a.r() + b.r());
    for (x, y) in &a.factors {
        factors.push((x.embed(d, 0), y.embed(d, 0)));
    }
    for (x, y) in &b.factors {
        factors.push((x.embed(d, a.d), y.embed(d, a.d)));
    }
    BinomialMultiSum::new(d, factors)
}

/// Pointwise sum when `b` is `a` with `n` shifted by a constant (including
/// shift 0): adds a selector index `t in {0, 1}` via a `binom(1, t)` factor
/// and folds the shift into the affine forms, in the style of the Lucas
/// construction. Returns `None` when the shapes do not align.
pub fn ms_sum_shifted(a: &BinomialMultiSum, b: &BinomialMultiSum) -> Option<BinomialMultiSum> {
    if a.d != b.d || a.r() != b.r() {
        return None;
    }
    // Find an integer s with b = a.shift_n(s).
    let mut shift: Option<i64> = None;
    for ((aa, ab), (ba, bb)) in a.factors.iter().zip(&b.factors) {
        for (fa, fb) in [(aa, ba), (ab, bb)] {
            if fa.coeffs != fb.coeffs || fa.n_coeff != fb.n_coeff {
                return None;
            }
            let dc = fa.constant - fb.constant;
            if fa.n_coeff == 0 {
                if dc != 0 {
                    return None;
                }
            } else {
                if dc % fa.n_coeff != 0 {
                    return None;
                }
                let s = dc / fa.n_coeff;
                match shift {
                    None => shift = Some(s),
                    Some(prev) if prev != s => return None,
                    _ => {}
                }
            }
        }
    }
    let s = shift.unwrap_or(0);
    // f(n) = sum_{t in {0,1}} binom(1, t) * prod_i binom(alpha_i(v, n - s t), ...)
    let d = a.d + 1;
    let t = a.d;
    let mut factors = vec![(AffineForm::var(d, t, 0).add_const(1), AffineForm::var(d, t, 1))];
    for (fa, fb) in &a.factors {
        let mut na = fa.embed(d, 0);
        na.coeffs[t] = -s * fa.n_coeff;
        let mut nb = fb.embed(d, 0);
        nb.coeffs[t] = -s * fb.n_coeff;
        factors.push((na, nb));
    }
    Some(BinomialMultiSum::new(d, factors))
}

/// A positive multisum: `sum over v of prod_i alpha_i! / (beta_i! gamma_i!)`,
/// summed over the points where every form is nonnegative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositiveMultiSum {
    pub d: usize,
    pub triples: Vec<(AffineForm, AffineForm, AffineForm)>,
}

impl PositiveMultiSum {
    pub fn new(d: usize, triples: Vec<(AffineForm, AffineForm, AffineForm)>) -> Self {
        for (a, b, c) in &triples {
            assert_eq!(a.dim(), d);
            assert_eq!(b.dim(), d);
            assert_eq!(c.dim(), d);
        }
        PositiveMultiSum { d, triples }
    }

    /// `alpha = beta + gamma` coefficient-wise for every factor.
    pub fn is_balanced(&self) -> bool {
        self.triples.iter().all(|(a, b, c)| a.sub(b).sub(c) == AffineForm::constant_form(self.d, 0))
    }

    fn domain_system(&self, n: i64) -> IneqSystem {
        let mut sys = IneqSystem::new(self.d);
        for (a, b, c) in &self.triples {
            sys.push(a.ineq_at(n, 0));
            sys.push(b.ineq_at(n, 0));
            sys.push(c.ineq_at(n, 0));
        }
        sys
    }

    /// Exact evaluation; the factorial-ratio terms are accumulated as exact
    /// rationals and must total an integer.
    pub fn eval(&self, n: i64) -> Result<BigUint> {
        self.eval_with_stats(n, &mut EvalStats::default())
    }

    /// Instrumented evaluation. The positive-multisum domain admits only
    /// nonnegative form values, so factorials of negative arguments (and in
    /// particular any use of the extended `(-1, 0)` convention) are counted
    /// as extension hits; by construction the count stays zero.
    pub fn eval_with_stats(&self, n: i64, stats: &mut EvalStats) -> Result<BigUint> {
        let enumerator = LatticeEnumerator::new(&self.domain_system(n));
        let mut total = BigRational::zero();
        let complete = enumerator.for_each(|v| {
            let mut num = BigUint::one();
            let mut den = BigUint::one();
            for (a, b, c) in &self.triples {
                // The domain system restricts every form to be nonnegative,
                // so factorials of negative arguments (the only way the
                // extended convention could enter) never occur; the
                // instrumentation would record them if they did.
                for form in [a, b, c] {
                    if form.eval(v, n) < 0 {
                        stats.ext_convention_hits += 1;
                        return;
                    }
                }
                num *= factorial(a.eval(v, n) as u64);
                den *= factorial(b.eval(v, n) as u64) * factorial(c.eval(v, n) as u64);
            }
            total += BigRational::new(BigInt::from(num), BigInt::from(den));
        });
        if !complete {
            return Err(Error::UnboundedSupport);
        }
        if !total.is_integer() || total.is_negative() {
            return Err(Error::NonIntegralTerm);
        }
        Ok(total.to_integer().to_biguint().unwrap())
    }
}

/// A finite sum of balanced positive multisums.
///
/// Decompositions produced by [`to_balanced`] carry, per component, the
/// subset of source factors kept in standard mode; that subset indexing is
/// part of the decomposition and is what allows [`from_balanced`] to
/// reassemble a single binomial multisum.
#[derive(Clone, Debug)]
pub struct BalancedMultiSum {
    components: Vec<PositiveMultiSum>,
    subsets: Option<Vec<Vec<bool>>>,
}

impl BalancedMultiSum {
    /// A hand-built single balanced component.
    pub fn single(component: PositiveMultiSum) -> Result<Self> {
        if !component.is_balanced() {
            return Err(Error::NonIntegralTerm);
        }
        Ok(BalancedMultiSum { components: vec![component], subsets: None })
    }

    pub fn components(&self) -> &[PositiveMultiSum] {
        &self.components
    }

    pub fn eval(&self, n: i64) -> Result<BigUint> {
        self.eval_with_stats(n, &mut EvalStats::default())
    }

    pub fn eval_with_stats(&self, n: i64, stats: &mut EvalStats) -> Result<BigUint> {
        let mut total = BigUint::zero();
        for c in &self.components {
            total += c.eval_with_stats(n, stats)?;
        }
        Ok(total)
    }

    /// Closure under addition: component-list union.
    pub fn balanced_sum(&self, other: &BalancedMultiSum) -> BalancedMultiSum {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        BalancedMultiSum { components, subsets: None }
    }

    /// Closure under multiplication: componentwise factor concatenation.
    pub fn balanced_prod(&self, other: &BalancedMultiSum) -> BalancedMultiSum {
        let mut components = Vec::new();
        for a in &self.components {
            for b in &other.components {
                let d = a.d + b.d;
                let mut triples = Vec::new();
                for (x, y, z) in &a.triples {
                    triples.push((x.embed(d, 0), y.embed(d, 0), z.embed(d, 0)));
                }
                for (x, y, z) in &b.triples {
                    triples.push((x.embed(d, a.d), y.embed(d, a.d), z.embed(d, a.d)));
                }
                components.push(PositiveMultiSum::new(d, triples));
            }
        }
        BalancedMultiSum { components, subsets: None }
    }
}

/// Decompose a binomial multisum into balanced positive components, one per
/// feasible sign-pattern subset: factor i in `s` becomes the balanced triple
/// `(alpha, beta, alpha - beta)`, and each pinned factor contributes the
/// indicator triples `(0, alpha + 1, -alpha - 1)` and `(0, beta, -beta)`.
/// Subsets whose constraint system is infeasible for every n >= 0 are
/// dropped.
pub fn to_balanced(ms: &BinomialMultiSum) -> BalancedMultiSum {
    let candidates = ms.pinnable_factors();
    assert!(
        candidates.len() <= 20,
        "sign-pattern enumeration over {} pinnable factors is out of scope",
        candidates.len()
    );
    let mut components = Vec::new();
    let mut subsets = Vec::new();
    for mask in 0u64..(1u64 << candidates.len()) {
        let mut in_s = vec![false; ms.r()];
        for (k, &i) in candidates.iter().enumerate() {
            in_s[i] = mask & (1 << k) != 0;
        }
        if !ms.subset_system_parametric(&in_s, 0).feasible() {
            continue;
        }
        let mut triples = Vec::new();
        for (i, (a, b)) in ms.factors.iter().enumerate() {
            if in_s[i] {
                let zero = AffineForm::constant_form(ms.d, 0);
                triples.push((zero.clone(), a.add_const(1), a.scaled_add(-2, a).add_const(-1)));
                triples.push((zero, b.clone(), b.scaled_add(-2, b)));
            } else {
                triples.push((a.clone(), b.clone(), a.sub(b)));
            }
        }
        components.push(PositiveMultiSum::new(ms.d, triples));
        subsets.push(in_s);
    }
    BalancedMultiSum { components, subsets: Some(subsets) }
}

/// Reassemble a binomial multisum from a balanced decomposition.
///
/// A single hand-built balanced component maps factor-by-factor:
/// `alpha!/(beta! gamma!)` becomes `binom(alpha, beta) * binom(alpha,
/// alpha)`, the second factor being the `alpha >= 0` domain guard, which
/// never evaluates the `(-1, 0)` convention (and is dropped when the form is
/// a nonnegative constant). For a tagged multi-component decomposition, the
/// standard triples and pinned indicators of the components are the two
/// disjoint branches of the extended binomial at every factor slot, so the
/// component sum collapses pointwise to the single product of extended
/// binomials over the recovered forms.
pub fn from_balanced(bs: &BalancedMultiSum) -> Result<BinomialMultiSum> {
    if bs.components.len() == 1 && bs.subsets.is_none() {
        let c = &bs.components[0];
        if !c.is_balanced() {
            return Err(Error::NonIntegralTerm);
        }
        let mut factors = Vec::new();
        for (a, b, _) in &c.triples {
            factors.push((a.clone(), b.clone()));
            if !(a.is_constant() && a.constant >= 0) {
                factors.push((a.clone(), a.clone()));
            }
        }
        return Ok(BinomialMultiSum::new(c.d, factors));
    }
    let subsets = bs.subsets.as_ref().ok_or(Error::NonIntegralTerm)?;
    // Recover the shared (alpha_i, beta_i) forms from any component.
    let r = subsets[0].len();
    let d = bs.components[0].d;
    let mut alphas: Vec<Option<AffineForm>> = vec![None; r];
    let mut betas: Vec<Option<AffineForm>> = vec![None; r];
    for (comp, in_s) in bs.components.iter().zip(subsets) {
        let mut pos = 0;
        for i in 0..r {
            if in_s[i] {
                let (_, a1, _) = &comp.triples[pos];
                let (_, b0, _) = &comp.triples[pos + 1];
                alphas[i].get_or_insert_with(|| a1.add_const(-1));
                betas[i].get_or_insert_with(|| b0.clone());
                pos += 2;
            } else {
                let (a, b, _) = &comp.triples[pos];
                alphas[i].get_or_insert_with(|| a.clone());
                betas[i].get_or_insert_with(|| b.clone());
                pos += 1;
            }
        }
    }
    let mut factors = Vec::new();
    for i in 0..r {
        let a = alphas[i].clone().ok_or(Error::NonIntegralTerm)?;
        let b = betas[i].clone().ok_or(Error::NonIntegralTerm)?;
        factors.push((a, b));
    }
    Ok(BinomialMultiSum::new(d, factors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn ext_binom_cases() {
        assert_eq!(ext_binom(5, 2), big(10));
        assert_eq!(ext_binom(-1, 0), big(1));
        assert_eq!(ext_binom(3, 5), big(0));
        assert_eq!(ext_binom(-2, 0), big(0));
        assert_eq!(ext_binom(0, 0), big(1));
        assert_eq!(ext_binom(-1, -1), big(0));
    }

    #[test]
    fn ext_binom_matches_direct_table() {
        // Direct case implementation straight from the definition.
        fn direct(a: i64, b: i64) -> BigUint {
            if 0 <= b && b <= a {
                let num = factorial(a as u64);
                let den = factorial((a - b) as u64) * factorial(b as u64);
                num / den
            } else if a == -1 && b == 0 {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        }
        for a in -20..=20 {
            for b in -20..=20 {
                assert_eq!(ext_binom(a, b), direct(a, b), "at ({a}, {b})");
            }
        }
    }

    #[test]
    fn ext_binom_symmetry() {
        for a in 0..=25i64 {
            for b in 0..=a {
                assert_eq!(ext_binom(a, b), ext_binom(a, a - b));
            }
        }
    }

    #[test]
    fn fibonacci_bound_and_eval() {
        let ms = catalog::fibonacci_multisum();
        match bound_support(&ms, 10) {
            Support::Box(b) => {
                assert_eq!(b.len(), 1);
                assert!(b[0].0 <= 0 && b[0].1 >= 5, "box {b:?} must cover 0..=5");
            }
            Support::Unbounded => panic!("fibonacci support is bounded"),
        }
        let vals: Vec<BigUint> = (0..=10).map(|n| eval_multisum(&ms, n).unwrap()).collect();
        let expect: Vec<u64> = vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89];
        assert_eq!(vals, expect.into_iter().map(big).collect::<Vec<_>>());
    }

    #[test]
    fn dimension_zero_is_single_term() {
        // binom(2n, n) with no summation indices.
        let ms = catalog::central_binomial_multisum();
        assert_eq!(bound_support(&ms, 7), Support::Box(vec![]));
        assert_eq!(eval_multisum(&ms, 3).unwrap(), big(20));
    }

    #[test]
    fn unbounded_support_detected() {
        // sum_v binom(v, v): every v >= 0 contributes 1.
        let ms = BinomialMultiSum::new(1, vec![(AffineForm::var(1, 0, 1), AffineForm::var(1, 0, 1))]);
        assert_eq!(bound_support(&ms, 3), Support::Unbounded);
        assert_eq!(eval_multisum(&ms, 3), Err(Error::UnboundedSupport));
    }

    #[test]
    fn delannoy_and_apery_examples() {
        let d = catalog::delannoy_multisum();
        assert_eq!(eval_multisum(&d, 2).unwrap(), big(13));
        assert_eq!(eval_multisum(&d, 3).unwrap(), big(63));
        let a = catalog::apery_multisum();
        assert_eq!(eval_multisum(&a, 1).unwrap(), big(5));
        assert_eq!(eval_multisum(&a, 2).unwrap(), big(73));
    }

    #[test]
    fn powers_and_lucas_examples() {
        let p = catalog::powers23_multisum();
        assert_eq!(eval_multisum(&p, 2).unwrap(), big(13));
        let l = catalog::lucas_multisum();
        assert_eq!(eval_multisum(&l, 4).unwrap(), big(7));
    }

    #[test]
    fn box_inflation_never_changes_value() {
        for ms in [catalog::fibonacci_multisum(), catalog::delannoy_multisum(), catalog::lucas_multisum()] {
            for n in 0..=6 {
                let tight = match bound_support(&ms, n) {
                    Support::Box(b) => b,
                    Support::Unbounded => panic!("bounded"),
                };
                let inflated: Vec<(i64, i64)> = tight.iter().map(|&(l, h)| (l - 3, h + 3)).collect();
                assert_eq!(eval_over_box(&ms, n, &inflated), eval_multisum(&ms, n).unwrap());
            }
        }
    }

    #[test]
    fn unimodular_change_of_variables_preserves_values() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let ms = catalog::apery_multisum(); // d = 2
        for _ in 0..10 {
            // Random unimodular 2x2 from elementary operations.
            let k1: i64 = rng.gen_range(-2..=2);
            let k2: i64 = rng.gen_range(-2..=2);
            let swap: bool = rng.gen();
            // U = E1(k1) * E2(k2), optionally swapped columns (det +-1).
            let mut u = vec![vec![1, k1], vec![0, 1]];
            u = mat_mul(&u, &vec![vec![1, 0], vec![k2, 1]]);
            if swap {
                u.swap(0, 1);
            }
            let cols: Vec<Vec<i64>> = (0..2).map(|j| (0..2).map(|i| u[i][j]).collect()).collect();
            let sub = ms.substitute_vars(&cols);
            for n in 0..=6 {
                assert_eq!(eval_multisum(&sub, n).unwrap(), eval_multisum(&ms, n).unwrap());
            }
        }
    }

    fn mat_mul(a: &Vec<Vec<i64>>, b: &Vec<Vec<i64>>) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    #[test]
    fn catalan_positive_form_evaluates() {
        // (2n)! 1! / (n! (n+1)!) = C_n, a positive multisum that is not
        // balanced factor-by-factor.
        let pm = PositiveMultiSum::new(
            0,
            vec![
                (
                    AffineForm::n_term(0, 2),
                    AffineForm::n_term(0, 1),
                    AffineForm::n_term(0, 1).add_const(1),
                ),
                (
                    AffineForm::constant_form(0, 1),
                    AffineForm::constant_form(0, 0),
                    AffineForm::constant_form(0, 0),
                ),
            ],
        );
        assert!(!pm.is_balanced());
        assert_eq!(pm.eval(4).unwrap(), big(14));
        assert_eq!(pm.eval(5).unwrap(), big(42));
        // Consequently it is not accepted as a balanced component.
        assert!(BalancedMultiSum::single(pm).is_err());
    }

    #[test]
    fn balanced_round_trip_preserves_values() {
        for entry in catalog::entries() {
            let Some(ms) = entry.multisum else { continue };
            let bal = to_balanced(&ms);
            let back = from_balanced(&bal).unwrap();
            for n in 0..=10 {
                let expect = eval_multisum(&ms, n).unwrap();
                assert_eq!(bal.eval(n).unwrap(), expect, "{} balanced eval at n={n}", entry.name);
                assert_eq!(
                    eval_multisum(&back, n).unwrap(),
                    expect,
                    "{} round trip at n={n}",
                    entry.name
                );
            }
        }
    }

    #[test]
    fn delannoy_balanced_is_single_component() {
        let bal = to_balanced(&catalog::delannoy_multisum());
        assert_eq!(bal.components().len(), 1);
    }

    #[test]
    fn powers23_balanced_has_multiple_components() {
        let bal = to_balanced(&catalog::powers23_multisum());
        assert!(bal.components().len() >= 2, "got {}", bal.components().len());
    }

    #[test]
    fn converted_powers23_avoids_extended_convention() {
        let ms = catalog::powers23_multisum();
        // The original formula relies on binom(-1, 0) essentially.
        let mut stats = EvalStats::default();
        eval_multisum_with_stats(&ms, 3, &mut stats).unwrap();
        assert!(stats.ext_convention_hits > 0);
        // The balanced form trades the convention for a finite component
        // sum: its instrumented evaluation never touches it.
        let bal = to_balanced(&ms);
        let mut stats = EvalStats::default();
        let v = bal.eval_with_stats(3, &mut stats).unwrap();
        assert_eq!(v, big(35));
        assert_eq!(stats.ext_convention_hits, 0);
    }

    #[test]
    fn random_multisums_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1717);
        let mut done = 0;
        while done < 40 {
            let d = rng.gen_range(0..=2usize);
            let r = rng.gen_range(1..=2usize);
            let mut form = |rng: &mut rand_chacha::ChaCha8Rng| {
                AffineForm::new(
                    (0..d).map(|_| rng.gen_range(-2..=2)).collect(),
                    rng.gen_range(0..=2),
                    rng.gen_range(-2..=2),
                )
            };
            let factors: Vec<(AffineForm, AffineForm)> =
                (0..r).map(|_| (form(&mut rng), form(&mut rng))).collect();
            let ms = BinomialMultiSum::new(d, factors);
            for n in 0..=4i64 {
                let tight = match bound_support(&ms, n) {
                    Support::Box(b) => b,
                    Support::Unbounded => continue,
                };
                let inflated: Vec<(i64, i64)> = tight.iter().map(|&(l, h)| (l - 2, h + 2)).collect();
                let brute = eval_over_box(&ms, n, &inflated);
                assert_eq!(
                    eval_multisum(&ms, n).unwrap(),
                    brute,
                    "multisum {ms:?} at n={n}"
                );
            }
            done += 1;
        }
    }

    #[test]
    fn ms_prod_concatenates() {
        // g3 * g4 at n = 3: 9 * 8 = 72.
        let p = ms_prod(&catalog::squares_multisum(), &catalog::powers_of_two_multisum());
        assert_eq!(eval_multisum(&p, 3).unwrap(), big(72));
    }

    #[test]
    fn ms_sum_merges_identical_and_shifted() {
        let g2 = catalog::two_ways_multisum();
        let s = ms_sum_shifted(&g2, &g2).unwrap();
        for n in 0..=6 {
            assert_eq!(eval_multisum(&s, n).unwrap(), big(4));
        }
        // Lucas = F(n) + F(n-2).
        let fib = catalog::fibonacci_multisum();
        let shifted = fib.shift_n(2);
        let lucas = ms_sum_shifted(&fib, &shifted).unwrap();
        assert_eq!(eval_multisum(&lucas, 6).unwrap(), big(18));
        for n in 0..=9 {
            let expect = eval_multisum(&fib, n).unwrap() + eval_multisum(&shifted, n).unwrap();
            assert_eq!(eval_multisum(&lucas, n).unwrap(), expect, "merged sum at n={n}");
        }
        // From n = 2 on this is the guarded catalog Lucas multisum.
        for n in 2..=9 {
            assert_eq!(
                eval_multisum(&lucas, n).unwrap(),
                eval_multisum(&catalog::lucas_multisum(), n).unwrap(),
                "lucas at n={n}"
            );
        }
    }
}
