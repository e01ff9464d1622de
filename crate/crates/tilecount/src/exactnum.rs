//! Exact arithmetic over Q-linear combinations of 1 and formal irrational
//! constants, with certified sign decisions.
//!
//! A [`FieldElement`] is a vector of exact rationals over the basis
//! `(1, s_1, ..., s_m)` declared by an [`IrrationalBasis`]. Linear
//! independence of the basis over Q is an axiom of the model: arithmetic
//! never merges distinct coordinates, and equality is coordinate-wise.
//! Sign tests evaluate interval enclosures of the symbols, refining them
//! on demand until the enclosing interval excludes zero or a budget runs
//! out.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// Shorthand for an exact rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// How a symbol's interval enclosure can be tightened beyond its declaration.
#[derive(Clone, Debug)]
pub enum Refinement {
    /// No tightening possible; sign tests that need more precision fail.
    None,
    /// A pre-supplied table of successively tighter intervals.
    Table(Vec<(Rat, Rat)>),
    /// The symbol denotes `sqrt(radicand) + shift`; intervals are bisected
    /// exactly against that value, halving the width per step.
    Sqrt { radicand: Rat, shift: Rat },
}

#[derive(Clone, Debug)]
pub struct SymbolDecl {
    pub name: String,
    pub lo: Rat,
    pub hi: Rat,
    pub allow_nonpositive: bool,
    pub refine: Refinement,
}

struct RefineState {
    intervals: Vec<(Rat, Rat)>,
    table_pos: Vec<usize>,
}

/// An ordered list of formal irrational symbols with interval enclosures.
///
/// The basis `(1, s_1, ..., s_m)` is treated as linearly independent over Q
/// by fiat. Enclosures are cached behind a mutex so repeated sign tests
/// reuse earlier refinement work; the value semantics stay immutable.
pub struct IrrationalBasis {
    symbols: Vec<SymbolDecl>,
    state: Mutex<RefineState>,
}

impl std::fmt::Debug for IrrationalBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IrrationalBasis")
            .field("symbols", &self.symbols.iter().map(|s| &s.name).collect::<Vec<_>>())
            .finish()
    }
}

/// Default number of refinement rounds for sign tests; each round halves the
/// width of every contributing enclosure that can still be refined.
pub const DEFAULT_SIGN_BUDGET: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl IrrationalBasis {
    /// A basis with no irrational symbols; its elements are plain rationals.
    pub fn rational_only() -> Self {
        IrrationalBasis {
            symbols: Vec::new(),
            state: Mutex::new(RefineState { intervals: Vec::new(), table_pos: Vec::new() }),
        }
    }

    pub fn new(symbols: Vec<SymbolDecl>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for s in &symbols {
            if !seen.insert(s.name.clone()) {
                return Err(Error::Syntax { pos: 0, msg: format!("duplicate basis symbol {}", s.name) });
            }
            if s.lo >= s.hi {
                return Err(Error::Syntax {
                    pos: 0,
                    msg: format!("symbol {}: enclosure [{}, {}] is empty", s.name, s.lo, s.hi),
                });
            }
            if !s.allow_nonpositive && s.lo <= Rat::zero() {
                return Err(Error::Syntax {
                    pos: 0,
                    msg: format!("symbol {}: enclosure must have lo > 0", s.name),
                });
            }
            if let Refinement::Sqrt { radicand, shift } = &s.refine {
                if radicand.is_negative() {
                    return Err(Error::Syntax { pos: 0, msg: format!("symbol {}: negative radicand", s.name) });
                }
                // The declared value must lie inside the declared enclosure.
                if !(cmp_to_sqrt(&s.lo, radicand, shift) <= 0 && cmp_to_sqrt(&s.hi, radicand, shift) >= 0) {
                    return Err(Error::Syntax {
                        pos: 0,
                        msg: format!("symbol {}: sqrt value outside enclosure", s.name),
                    });
                }
            }
        }
        let intervals = symbols.iter().map(|s| (s.lo.clone(), s.hi.clone())).collect();
        let table_pos = vec![0; symbols.len()];
        Ok(IrrationalBasis { symbols, state: Mutex::new(RefineState { intervals, table_pos }) })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Dimension of the coordinate space: 1 (rational part) + symbol count.
    pub fn dim(&self) -> usize {
        self.symbols.len() + 1
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// The element `r * 1`.
    pub fn rational(&self, r: Rat) -> FieldElement {
        let mut fe = FieldElement::zero(self.dim());
        fe.set_coord(0, r);
        fe
    }

    /// The element `1 * s_i` (0-based symbol index).
    pub fn symbol(&self, i: usize) -> FieldElement {
        assert!(i < self.symbols.len(), "symbol index out of range");
        let mut fe = FieldElement::zero(self.dim());
        fe.set_coord(i + 1, Rat::one());
        fe
    }

    fn current_interval(&self, i: usize) -> (Rat, Rat) {
        let st = self.state.lock().unwrap();
        st.intervals[i].clone()
    }

    /// One refinement step for symbol `i`. Returns false if no tightening is
    /// possible.
    fn refine_symbol(&self, i: usize) -> bool {
        let mut st = self.state.lock().unwrap();
        let (lo, hi) = st.intervals[i].clone();
        match &self.symbols[i].refine {
            Refinement::None => false,
            Refinement::Table(t) => {
                let pos = st.table_pos[i];
                if pos >= t.len() {
                    return false;
                }
                st.table_pos[i] += 1;
                let (tlo, thi) = t[pos].clone();
                // Intersect with the current interval so refinement never widens.
                let nlo = if tlo > lo { tlo } else { lo };
                let nhi = if thi < hi { thi } else { hi };
                if nlo <= nhi {
                    st.intervals[i] = (nlo, nhi);
                }
                true
            }
            Refinement::Sqrt { radicand, shift } => {
                let mid = (&lo + &hi) / rat_int(2);
                if cmp_to_sqrt(&mid, radicand, shift) >= 0 {
                    st.intervals[i] = (lo, mid);
                } else {
                    st.intervals[i] = (mid, hi);
                }
                true
            }
        }
    }

    /// Certified sign of `fe`.
    ///
    /// Zero is decided exactly (empty coordinate map); otherwise the interval
    /// sum is evaluated, refining enclosures until it excludes 0 or `budget`
    /// rounds are spent.
    pub fn sign_budget(&self, fe: &FieldElement, budget: u32) -> Result<Sign> {
        if fe.dim != self.dim() {
            return Err(Error::BasisMismatch { left_dim: fe.dim, right_dim: self.dim() });
        }
        if fe.coords.is_empty() {
            return Ok(Sign::Zero);
        }
        // Purely rational elements compare exactly.
        if fe.coords.len() == 1 {
            if let Some(r) = fe.coords.get(&0) {
                return Ok(if r.is_positive() { Sign::Positive } else { Sign::Negative });
            }
        }
        let mut round = 0;
        loop {
            let mut lo = Rat::zero();
            let mut hi = Rat::zero();
            for (&idx, coeff) in &fe.coords {
                if idx == 0 {
                    lo += coeff;
                    hi += coeff;
                } else {
                    let (ilo, ihi) = self.current_interval(idx - 1);
                    if coeff.is_positive() {
                        lo += coeff * &ilo;
                        hi += coeff * &ihi;
                    } else {
                        lo += coeff * &ihi;
                        hi += coeff * &ilo;
                    }
                }
            }
            if lo.is_positive() {
                return Ok(Sign::Positive);
            }
            if hi.is_negative() {
                return Ok(Sign::Negative);
            }
            if round >= budget {
                return Err(Error::SignUndecided);
            }
            let mut refined_any = false;
            for (&idx, _) in &fe.coords {
                if idx > 0 {
                    refined_any |= self.refine_symbol(idx - 1);
                }
            }
            if !refined_any {
                return Err(Error::SignUndecided);
            }
            round += 1;
        }
    }

    pub fn sign(&self, fe: &FieldElement) -> Result<Sign> {
        self.sign_budget(fe, DEFAULT_SIGN_BUDGET)
    }

    /// Compare two elements: sign of `a - b`.
    pub fn cmp_budget(&self, a: &FieldElement, b: &FieldElement, budget: u32) -> Result<Sign> {
        self.sign_budget(&a.checked_sub(b)?, budget)
    }

    /// A rational interval `[lo, hi]` certified to contain the real value of
    /// `fe`, after `rounds` refinement rounds on contributing symbols.
    pub fn enclosure(&self, fe: &FieldElement, rounds: u32) -> Result<(Rat, Rat)> {
        if fe.dim != self.dim() {
            return Err(Error::BasisMismatch { left_dim: fe.dim, right_dim: self.dim() });
        }
        for _ in 0..rounds {
            for (&idx, _) in &fe.coords {
                if idx > 0 {
                    self.refine_symbol(idx - 1);
                }
            }
        }
        let mut lo = Rat::zero();
        let mut hi = Rat::zero();
        for (&idx, coeff) in &fe.coords {
            if idx == 0 {
                lo += coeff;
                hi += coeff;
            } else {
                let (ilo, ihi) = self.current_interval(idx - 1);
                if coeff.is_positive() {
                    lo += coeff * &ilo;
                    hi += coeff * &ihi;
                } else {
                    lo += coeff * &ihi;
                    hi += coeff * &ilo;
                }
            }
        }
        Ok((lo, hi))
    }
}

/// Exact element of the Q-vector space spanned by `(1, s_1, ..., s_m)`.
///
/// Coordinate 0 is the rational part; coordinate `i >= 1` multiplies the
/// symbol `s_i`. Zero coefficients are never stored, so equality and hashing
/// are canonical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    dim: usize,
    coords: BTreeMap<usize, Rat>,
}

impl std::fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.coords {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *idx == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*s{idx}")?;
            }
        }
        Ok(())
    }
}

impl FieldElement {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1);
        FieldElement { dim, coords: BTreeMap::new() }
    }

    pub fn from_rational(dim: usize, r: Rat) -> Self {
        let mut fe = Self::zero(dim);
        fe.set_coord(0, r);
        fe
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// True when only the rational coordinate is populated.
    pub fn is_rational(&self) -> bool {
        self.coords.keys().all(|&k| k == 0)
    }

    pub fn coord(&self, idx: usize) -> Rat {
        self.coords.get(&idx).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set_coord(&mut self, idx: usize, v: Rat) {
        assert!(idx < self.dim);
        if v.is_zero() {
            self.coords.remove(&idx);
        } else {
            self.coords.insert(idx, v);
        }
    }

    pub fn coords(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.coords.iter().map(|(&i, r)| (i, r))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::BasisMismatch { left_dim: self.dim, right_dim: other.dim });
        }
        let mut out = self.clone();
        for (&idx, c) in &other.coords {
            let v = out.coord(idx) + c;
            out.set_coord(idx, v);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::BasisMismatch { left_dim: self.dim, right_dim: other.dim });
        }
        let mut out = self.clone();
        for (&idx, c) in &other.coords {
            let v = out.coord(idx) - c;
            out.set_coord(idx, v);
        }
        Ok(out)
    }

    pub fn scale(&self, by: &Rat) -> Self {
        let mut out = Self::zero(self.dim);
        if by.is_zero() {
            return out;
        }
        for (&idx, c) in &self.coords {
            out.coords.insert(idx, c * by);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }
}

// Operator sugar for code paths where both operands are structurally over the
// same basis; mismatches there are logic errors, not user input.
impl std::ops::Add<&FieldElement> for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.checked_add(rhs).expect("field elements over the same basis")
    }
}

impl std::ops::Sub<&FieldElement> for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.checked_sub(rhs).expect("field elements over the same basis")
    }
}

/// Exact comparison of a rational `x` against `sqrt(radicand) + shift`:
/// returns -1, 0, or 1.
fn cmp_to_sqrt(x: &Rat, radicand: &Rat, shift: &Rat) -> i32 {
    let s = x - shift;
    if s.is_negative() {
        return -1;
    }
    let s2 = &s * &s;
    if &s2 < radicand {
        -1
    } else if &s2 > radicand {
        1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn basis_alpha() -> IrrationalBasis {
        IrrationalBasis::new(vec![SymbolDecl {
            name: "alpha".into(),
            lo: rat(41, 100),
            hi: rat(42, 100),
            allow_nonpositive: false,
            refine: Refinement::Sqrt { radicand: rat_int(2), shift: rat_int(-1) },
        }])
        .unwrap()
    }

    #[test]
    fn arithmetic_cancels() {
        let b = basis_alpha();
        // (1/2 - alpha) + (1/2 + alpha) = 1
        let a = b.rational(rat(1, 2)).checked_sub(&b.symbol(0)).unwrap();
        let c = b.rational(rat(1, 2)).checked_add(&b.symbol(0)).unwrap();
        let s = a.checked_add(&c).unwrap();
        assert_eq!(s, b.rational(rat_int(1)));
        // (1 + alpha) - (1 + alpha) = 0
        let d = b.rational(rat_int(1)).checked_add(&b.symbol(0)).unwrap();
        assert!(d.checked_sub(&d).unwrap().is_zero());
        // 3 * (1/2 + alpha) = 3/2 + 3 alpha
        let e = c.scale(&rat_int(3));
        assert_eq!(e.coord(0), rat(3, 2));
        assert_eq!(e.coord(1), rat_int(3));
    }

    #[test]
    fn mismatched_bases_error() {
        let b = basis_alpha();
        let r = IrrationalBasis::rational_only();
        let err = b.symbol(0).checked_add(&r.rational(rat_int(1))).unwrap_err();
        assert!(matches!(err, Error::BasisMismatch { .. }));
    }

    #[test]
    fn sign_examples() {
        let b = basis_alpha();
        assert_eq!(b.sign(&FieldElement::zero(b.dim())).unwrap(), Sign::Zero);
        // 1/2 - alpha with alpha in [0.41, 0.42]: interval [0.08, 0.09]
        let x = b.rational(rat(1, 2)).checked_sub(&b.symbol(0)).unwrap();
        assert_eq!(b.sign_budget(&x, 0).unwrap(), Sign::Positive);
        // alpha - 5/12 straddles 0 at the declared width; sqrt refinement
        // settles it (sqrt(2) - 1 = 0.41421... < 5/12 = 0.41666...).
        let y = b.symbol(0).checked_sub(&b.rational(rat(5, 12))).unwrap();
        assert_eq!(b.sign(&y).unwrap(), Sign::Negative);
    }

    #[test]
    fn overlapping_intervals_undecided_then_refined() {
        // alpha in [0.5, 0.7], beta in [0.6, 0.8]: alpha - beta undecided at
        // budget 0, resolved once tighter tables are supplied.
        let b = IrrationalBasis::new(vec![
            SymbolDecl {
                name: "alpha".into(),
                lo: rat(5, 10),
                hi: rat(7, 10),
                allow_nonpositive: false,
                refine: Refinement::Table(vec![(rat(50, 100), rat(55, 100))]),
            },
            SymbolDecl {
                name: "beta".into(),
                lo: rat(6, 10),
                hi: rat(8, 10),
                allow_nonpositive: false,
                refine: Refinement::Table(vec![(rat(60, 100), rat(65, 100))]),
            },
        ])
        .unwrap();
        let x = b.symbol(0).checked_sub(&b.symbol(1)).unwrap();
        assert_eq!(b.sign_budget(&x, 0), Err(Error::SignUndecided));
        assert_eq!(b.sign(&x).unwrap(), Sign::Negative);
    }

    #[test]
    fn table_exhaustion_is_undecided() {
        let b = IrrationalBasis::new(vec![SymbolDecl {
            name: "u".into(),
            lo: rat(1, 10),
            hi: rat(3, 10),
            allow_nonpositive: false,
            refine: Refinement::None,
        }])
        .unwrap();
        let x = b.symbol(0).checked_sub(&b.rational(rat(2, 10))).unwrap();
        assert_eq!(b.sign(&x), Err(Error::SignUndecided));
    }

    proptest! {
        #[test]
        fn rational_sign_agrees_with_exact(n in -50i64..50, d in 1i64..20) {
            let b = IrrationalBasis::rational_only();
            let fe = b.rational(rat(n, d));
            let s = b.sign(&fe).unwrap();
            let expect = match n.cmp(&0) {
                std::cmp::Ordering::Less => Sign::Negative,
                std::cmp::Ordering::Equal => Sign::Zero,
                std::cmp::Ordering::Greater => Sign::Positive,
            };
            prop_assert_eq!(s, expect);
        }

        #[test]
        fn add_sub_round_trip(
            a0 in -20i64..20, a1 in -20i64..20,
            b0 in -20i64..20, b1 in -20i64..20,
        ) {
            let b = basis_alpha();
            let mut x = b.rational(rat(a0, 3));
            x = x.checked_add(&b.symbol(0).scale(&rat(a1, 5))).unwrap();
            let mut y = b.rational(rat(b0, 7));
            y = y.checked_add(&b.symbol(0).scale(&rat(b1, 2))).unwrap();
            let rt = x.checked_add(&y).unwrap().checked_sub(&y).unwrap();
            prop_assert_eq!(rt, x);
        }

        #[test]
        fn zero_iff_empty(c0 in -5i64..5, c1 in -5i64..5) {
            let b = basis_alpha();
            let fe = b.rational(rat_int(c0)).checked_add(&b.symbol(0).scale(&rat_int(c1))).unwrap();
            prop_assert_eq!(fe.is_zero(), c0 == 0 && c1 == 0);
            if fe.is_zero() {
                prop_assert_eq!(b.sign(&fe).unwrap(), Sign::Zero);
            }
        }
    }
}
