//! Exact rational Fourier-Motzkin elimination over small polyhedra.
//!
//! Used to bound the support of binomial multisums, to decide feasibility of
//! sign-pattern subsystems, and to enumerate lattice points coordinate by
//! coordinate with certified per-prefix bounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactnum::Rat;

/// `sum_j coeffs[j] * x_j + constant >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinIneq {
    pub coeffs: Vec<Rat>,
    pub constant: Rat,
}

impl LinIneq {
    pub fn from_ints(coeffs: &[i64], constant: i64) -> Self {
        LinIneq {
            coeffs: coeffs.iter().map(|&c| Rat::from_integer(BigInt::from(c))).collect(),
            constant: Rat::from_integer(BigInt::from(constant)),
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Positive scale making the coefficient part integral with gcd 1, so
    /// parallel half-spaces share a key and only the tightest survives.
    fn normalize(&mut self) {
        let mut lcm = BigInt::one();
        for c in &self.coeffs {
            lcm = lcm.lcm(c.denom());
        }
        let mut gcd = BigInt::zero();
        let scaled: Vec<BigInt> =
            self.coeffs.iter().map(|c| (c * Rat::from_integer(lcm.clone())).to_integer()).collect();
        for s in &scaled {
            gcd = gcd.gcd(s);
        }
        if gcd.is_zero() {
            return; // constant row
        }
        for (c, s) in self.coeffs.iter_mut().zip(scaled) {
            *c = Rat::from_integer(s / &gcd);
        }
        self.constant = &self.constant * Rat::new(lcm, gcd);
    }
}

#[derive(Clone, Debug)]
pub struct IneqSystem {
    pub nvars: usize,
    pub ineqs: Vec<LinIneq>,
}

/// One-variable bound information extracted after elimination.
#[derive(Clone, Debug, PartialEq)]
pub enum VarBounds {
    /// The system is infeasible over the reals.
    Infeasible,
    /// `lo <= x <= hi` (rational endpoints; either side may be open-ended).
    Range { lo: Option<Rat>, hi: Option<Rat> },
}

impl IneqSystem {
    pub fn new(nvars: usize) -> Self {
        IneqSystem { nvars, ineqs: Vec::new() }
    }

    pub fn push(&mut self, ineq: LinIneq) {
        debug_assert_eq!(ineq.coeffs.len(), self.nvars);
        self.ineqs.push(ineq);
    }

    /// Add the pair of inequalities for an equality constraint.
    pub fn push_eq(&mut self, ineq: LinIneq) {
        let neg = LinIneq {
            coeffs: ineq.coeffs.iter().map(|c| -c).collect(),
            constant: -&ineq.constant,
        };
        self.ineqs.push(ineq);
        self.ineqs.push(neg);
    }

    /// Canonicalize rows and keep, per coefficient direction, only the
    /// tightest constant; parallel half-spaces are the dominant source of
    /// growth during elimination.
    fn dedup(&mut self) {
        use std::collections::HashMap;
        let mut contradiction = false;
        let mut best: HashMap<Vec<Rat>, Rat> = HashMap::new();
        for row in &mut self.ineqs {
            row.normalize();
            if row.is_constant() {
                if row.constant.is_negative() {
                    contradiction = true;
                }
                continue;
            }
            match best.get_mut(&row.coeffs) {
                Some(c) => {
                    if row.constant < *c {
                        *c = row.constant.clone();
                    }
                }
                None => {
                    best.insert(row.coeffs.clone(), row.constant.clone());
                }
            }
        }
        let mut rows: Vec<LinIneq> =
            best.into_iter().map(|(coeffs, constant)| LinIneq { coeffs, constant }).collect();
        rows.sort();
        if contradiction {
            rows.push(LinIneq {
                coeffs: vec![Rat::zero(); self.nvars],
                constant: -Rat::from_integer(BigInt::one()),
            });
        }
        self.ineqs = rows;
    }

    /// Any constant row `c >= 0` with `c < 0` witnesses real infeasibility.
    fn has_contradiction(&self) -> bool {
        self.ineqs.iter().any(|i| i.is_constant() && i.constant.is_negative())
    }

    /// Fourier-Motzkin elimination of variable `var`. The result has the same
    /// variable count with a zero column at `var`.
    pub fn eliminate(&self, var: usize) -> IneqSystem {
        let mut keep = Vec::new();
        let mut lowers = Vec::new(); // coeff > 0: x >= -(rest)/coeff
        let mut uppers = Vec::new(); // coeff < 0: x <= -(rest)/coeff
        for i in &self.ineqs {
            let c = &i.coeffs[var];
            if c.is_zero() {
                keep.push(i.clone());
            } else if c.is_positive() {
                lowers.push(i.clone());
            } else {
                uppers.push(i.clone());
            }
        }
        for lo in &lowers {
            for hi in &uppers {
                // lo: a x + R >= 0 (a > 0)  =>  x >= -R/a
                // hi: b x + S >= 0 (b < 0)  =>  x <= -S/b
                // Combine: (-R/a) <= (-S/b)  <=>  (-b) R + a S >= 0.
                let a = lo.coeffs[var].clone();
                let mb = -hi.coeffs[var].clone();
                let mut coeffs = Vec::with_capacity(self.nvars);
                for j in 0..self.nvars {
                    if j == var {
                        coeffs.push(Rat::zero());
                    } else {
                        coeffs.push(&lo.coeffs[j] * &mb + &hi.coeffs[j] * &a);
                    }
                }
                let constant = &lo.constant * &mb + &hi.constant * &a;
                keep.push(LinIneq { coeffs, constant });
            }
        }
        let mut out = IneqSystem { nvars: self.nvars, ineqs: keep };
        out.dedup();
        out
    }

    /// Eliminate every variable not listed in `keep_vars`, greedily choosing
    /// the variable with the fewest lower-upper combination pairs first.
    pub fn eliminate_except(&self, keep_vars: &[usize]) -> IneqSystem {
        let mut sys = self.clone();
        sys.dedup();
        let mut pending: Vec<usize> = (0..self.nvars).filter(|v| !keep_vars.contains(v)).collect();
        while !pending.is_empty() {
            let (pick, _) = pending
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let mut lowers = 0usize;
                    let mut uppers = 0usize;
                    for row in &sys.ineqs {
                        if row.coeffs[v].is_positive() {
                            lowers += 1;
                        } else if row.coeffs[v].is_negative() {
                            uppers += 1;
                        }
                    }
                    (i, lowers * uppers)
                })
                .min_by_key(|&(_, cost)| cost)
                .unwrap();
            let v = pending.swap_remove(pick);
            sys = sys.eliminate(v);
            if sys.has_contradiction() {
                break;
            }
        }
        sys
    }

    /// Real feasibility by full elimination.
    pub fn feasible(&self) -> bool {
        !self.eliminate_except(&[]).has_contradiction()
    }

    /// Bounds on one variable after eliminating all others.
    pub fn bounds_for(&self, var: usize) -> VarBounds {
        let sys = self.eliminate_except(&[var]);
        if sys.has_contradiction() {
            return VarBounds::Infeasible;
        }
        match bounds_from_single_var(&sys, var) {
            VarBounds::Range { lo: Some(lo), hi: Some(hi) } if lo > hi => VarBounds::Infeasible,
            b => b,
        }
    }

    /// Substitute an exact value for a variable (zeroing its column).
    pub fn substitute(&self, var: usize, value: &Rat) -> IneqSystem {
        let mut out = IneqSystem::new(self.nvars);
        for i in &self.ineqs {
            let mut coeffs = i.coeffs.clone();
            let c = std::mem::replace(&mut coeffs[var], Rat::zero());
            out.ineqs.push(LinIneq { coeffs, constant: &i.constant + &c * value });
        }
        out
    }
}

fn bounds_from_single_var(sys: &IneqSystem, var: usize) -> VarBounds {
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for i in &sys.ineqs {
        debug_assert!(i.coeffs.iter().enumerate().all(|(j, c)| j == var || c.is_zero()));
        let c = &i.coeffs[var];
        if c.is_zero() {
            continue;
        }
        let bound = -&i.constant / c;
        if c.is_positive() {
            lo = Some(match lo {
                Some(l) if l >= bound => l,
                _ => bound,
            });
        } else {
            hi = Some(match hi {
                Some(h) if h <= bound => h,
                _ => bound,
            });
        }
    }
    VarBounds::Range { lo, hi }
}

pub fn ceil_rat(r: &Rat) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor_rat(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

/// Enumerate integer points of the polyhedron, coordinate by coordinate.
///
/// `ladders[k]` must be the system with variables `0..=k` kept (others
/// eliminated); prefix substitution then yields certified bounds for
/// coordinate `k`. The callback receives each complete point.
pub struct LatticeEnumerator {
    ladders: Vec<IneqSystem>,
    nvars: usize,
    empty_feasible: bool,
}

impl LatticeEnumerator {
    pub fn new(system: &IneqSystem) -> Self {
        let nvars = system.nvars;
        // ladders[k] keeps variables 0..=k; built back to front so each step
        // eliminates exactly one more variable.
        let mut ladders = vec![IneqSystem::new(nvars); nvars];
        let mut empty_feasible = true;
        if nvars > 0 {
            let mut cur = system.clone();
            cur.dedup();
            ladders[nvars - 1] = cur.clone();
            for k in (0..nvars.saturating_sub(1)).rev() {
                cur = cur.eliminate(k + 1);
                ladders[k] = cur.clone();
            }
        } else {
            let mut cur = system.clone();
            cur.dedup();
            empty_feasible = !cur.has_contradiction();
        }
        LatticeEnumerator { ladders, nvars, empty_feasible }
    }

    /// Visit every integer point; returns false if any prefix was unbounded.
    pub fn for_each<F: FnMut(&[i64])>(&self, mut f: F) -> bool {
        if self.nvars == 0 {
            if self.empty_feasible {
                f(&[]);
            }
            return true;
        }
        let mut point = vec![0i64; self.nvars];
        self.recurse(0, &mut point, &mut f)
    }

    fn recurse<F: FnMut(&[i64])>(&self, k: usize, point: &mut Vec<i64>, f: &mut F) -> bool {
        // Substitute the prefix into the ladder system for coordinate k.
        let mut sys = self.ladders[k].clone();
        for (j, &v) in point.iter().enumerate().take(k) {
            sys = sys.substitute(j, &Rat::from_integer(BigInt::from(v)));
        }
        if sys.has_contradiction() {
            return true; // empty fiber
        }
        let b = bounds_from_single_var(&sys, k);
        let (lo, hi) = match b {
            VarBounds::Infeasible => return true,
            VarBounds::Range { lo: Some(lo), hi: Some(hi) } => (ceil_rat(&lo), floor_rat(&hi)),
            VarBounds::Range { .. } => return false,
        };
        let (lo, hi) = match (i64::try_from(&lo), i64::try_from(&hi)) {
            (Ok(l), Ok(h)) => (l, h),
            _ => return false,
        };
        for v in lo..=hi {
            point[k] = v;
            if k + 1 == self.nvars {
                f(point);
            } else if !self.recurse(k + 1, point, f) {
                return false;
            }
        }
        true
    }
}
