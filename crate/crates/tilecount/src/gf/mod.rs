//! N-rational generating function expressions: validation, coefficient and
//! diagonal extraction by truncated expansion, and the closure
//! constructions for pointwise sum and product of diagonals.
//!
//! The grammar is the smallest class containing 0 and the variables, closed
//! under sum, product, and quasi-inverse `1/(1 - G)` for `G` with zero
//! constant term. Every coefficient of such a series is a nonnegative
//! integer.

mod network;
mod parse;
mod split;

pub use network::{compile_knetwork, compile_knetwork_with_limits, path_count, KNetwork};
pub use parse::parse_gf;
pub use split::{split_variable, split_variable_with_limits};

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Size caps for generating-function constructions.
#[derive(Clone, Debug)]
pub struct Limits {
    /// Maximum number of variables a constructed expression may use.
    pub var_cap: usize,
    /// Maximum number of cells a coefficient box may hold.
    pub coeff_cells: usize,
    /// Maximum number of network edges / constant-term copies.
    pub network_edges: usize,
}

pub const DEFAULT_VAR_CAP: usize = 12;

impl Default for Limits {
    fn default() -> Self {
        Limits { var_cap: DEFAULT_VAR_CAP, coeff_cells: 8_000_000, network_edges: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Zero,
    /// 1-based variable index.
    Var(usize),
    Sum(Box<Node>, Box<Node>),
    Prod(Box<Node>, Box<Node>),
    /// `1/(1 - child)`; the child must have constant term 0.
    QuasiInv(Box<Node>),
}

/// A validated N-rational expression together with its variable count.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GFExpr {
    k: usize,
    root: Node,
}

impl GFExpr {
    /// Validate quasi-inverse constant terms and variable indices.
    pub fn new(k: usize, root: Node) -> Result<Self> {
        let k = k.max(1).max(max_var(&root));
        validate(&root)?;
        Ok(GFExpr { k, root })
    }

    pub fn zero(k: usize) -> Self {
        GFExpr { k: k.max(1), root: Node::Zero }
    }

    pub fn one(k: usize) -> Self {
        GFExpr { k: k.max(1), root: Node::QuasiInv(Box::new(Node::Zero)) }
    }

    pub fn var(k: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= k.max(1));
        GFExpr { k: k.max(1), root: Node::Var(i) }
    }

    /// The constant `m` as an m-fold sum of `1/(1 - 0)`.
    pub fn nat(k: usize, m: u64) -> Self {
        if m == 0 {
            return Self::zero(k);
        }
        let mut node = Node::QuasiInv(Box::new(Node::Zero));
        for _ in 1..m {
            node = Node::Sum(Box::new(node), Box::new(Node::QuasiInv(Box::new(Node::Zero))));
        }
        GFExpr { k: k.max(1), root: node }
    }

    pub fn sum(self, other: GFExpr) -> GFExpr {
        GFExpr { k: self.k.max(other.k), root: Node::Sum(Box::new(self.root), Box::new(other.root)) }
    }

    pub fn prod(self, other: GFExpr) -> GFExpr {
        GFExpr { k: self.k.max(other.k), root: Node::Prod(Box::new(self.root), Box::new(other.root)) }
    }

    pub fn quasi_inv(self) -> Result<GFExpr> {
        if !const_term(&self.root).is_zero() {
            return Err(Error::NonzeroConstInQuasiInv);
        }
        Ok(GFExpr { k: self.k, root: Node::QuasiInv(Box::new(self.root)) })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// `m`-th power by repeated product (m >= 1).
    pub fn pow(self, m: usize) -> GFExpr {
        assert!(m >= 1);
        let mut out = self.clone();
        for _ in 1..m {
            out = out.prod(self.clone());
        }
        out
    }

    /// Rename variables through `f` (1-based on both sides).
    pub fn rename_vars(&self, k: usize, f: &impl Fn(usize) -> usize) -> GFExpr {
        GFExpr { k: k.max(1), root: rename(&self.root, f) }
    }

    /// Expression text in the input grammar.
    pub fn to_text(&self) -> String {
        fn go(n: &Node, out: &mut String, parent_prod: bool) {
            match n {
                Node::Zero => out.push('0'),
                Node::Var(i) => out.push_str(&format!("x{i}")),
                Node::Sum(a, b) => {
                    if parent_prod {
                        out.push('(');
                    }
                    go(a, out, false);
                    out.push('+');
                    go(b, out, false);
                    if parent_prod {
                        out.push(')');
                    }
                }
                Node::Prod(a, b) => {
                    go(a, out, true);
                    out.push('*');
                    go(b, out, true);
                }
                Node::QuasiInv(a) => {
                    out.push_str("Q(");
                    go(a, out, false);
                    out.push(')');
                }
            }
        }
        let mut s = String::new();
        go(&self.root, &mut s, false);
        s
    }
}

fn rename(node: &Node, f: &impl Fn(usize) -> usize) -> Node {
    match node {
        Node::Zero => Node::Zero,
        Node::Var(i) => Node::Var(f(*i)),
        Node::Sum(a, b) => Node::Sum(Box::new(rename(a, f)), Box::new(rename(b, f))),
        Node::Prod(a, b) => Node::Prod(Box::new(rename(a, f)), Box::new(rename(b, f))),
        Node::QuasiInv(a) => Node::QuasiInv(Box::new(rename(a, f))),
    }
}

fn max_var(node: &Node) -> usize {
    match node {
        Node::Zero => 0,
        Node::Var(i) => *i,
        Node::Sum(a, b) | Node::Prod(a, b) => max_var(a).max(max_var(b)),
        Node::QuasiInv(a) => max_var(a),
    }
}

fn validate(node: &Node) -> Result<()> {
    match node {
        Node::Zero | Node::Var(_) => Ok(()),
        Node::Sum(a, b) | Node::Prod(a, b) => {
            validate(a)?;
            validate(b)
        }
        Node::QuasiInv(a) => {
            validate(a)?;
            if !const_term(a).is_zero() {
                return Err(Error::NonzeroConstInQuasiInv);
            }
            Ok(())
        }
    }
}

/// Constant term, computed structurally.
pub fn const_term(node: &Node) -> BigUint {
    match node {
        Node::Zero => BigUint::zero(),
        Node::Var(_) => BigUint::zero(),
        Node::Sum(a, b) => const_term(a) + const_term(b),
        Node::Prod(a, b) => const_term(a) * const_term(b),
        Node::QuasiInv(_) => BigUint::one(),
    }
}

pub fn gf_const_term(e: &GFExpr) -> BigUint {
    const_term(&e.root)
}

/// A truncated table of series coefficients for exponents within `bounds`
/// (componentwise).
#[derive(Clone, Debug)]
pub struct CoeffBox {
    bounds: Vec<u32>,
    map: HashMap<Vec<u32>, BigUint>,
}

impl CoeffBox {
    fn zero(bounds: &[u32]) -> Self {
        CoeffBox { bounds: bounds.to_vec(), map: HashMap::new() }
    }

    fn unit(bounds: &[u32]) -> Self {
        let mut b = Self::zero(bounds);
        b.map.insert(vec![0; bounds.len()], BigUint::one());
        b
    }

    fn monomial(bounds: &[u32], var: usize) -> Self {
        let mut b = Self::zero(bounds);
        if bounds[var] >= 1 {
            let mut e = vec![0; bounds.len()];
            e[var] = 1;
            b.map.insert(e, BigUint::one());
        }
        b
    }

    fn add_assign(&mut self, other: &CoeffBox) {
        for (e, c) in &other.map {
            *self.map.entry(e.clone()).or_insert_with(BigUint::zero) += c;
        }
    }

    fn mul(&self, other: &CoeffBox, cap: usize) -> Result<CoeffBox> {
        let mut out = CoeffBox::zero(&self.bounds);
        for (ea, ca) in &self.map {
            'outer: for (eb, cb) in &other.map {
                let mut e = Vec::with_capacity(ea.len());
                for (x, y) in ea.iter().zip(eb) {
                    let s = x + y;
                    if s > self.bounds[e.len()] {
                        continue 'outer;
                    }
                    e.push(s);
                }
                *out.map.entry(e).or_insert_with(BigUint::zero) += ca * cb;
                if out.map.len() > cap {
                    return Err(Error::SizeLimit {
                        what: "coefficient box cells".into(),
                        need: out.map.len(),
                        cap,
                    });
                }
            }
        }
        Ok(out)
    }

    fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, exponents: &[u32]) -> BigUint {
        self.map.get(exponents).cloned().unwrap_or_else(BigUint::zero)
    }
}

fn eval_box(node: &Node, bounds: &[u32], limits: &Limits) -> Result<CoeffBox> {
    match node {
        Node::Zero => Ok(CoeffBox::zero(bounds)),
        Node::Var(i) => Ok(CoeffBox::monomial(bounds, i - 1)),
        Node::Sum(a, b) => {
            let mut x = eval_box(a, bounds, limits)?;
            x.add_assign(&eval_box(b, bounds, limits)?);
            Ok(x)
        }
        Node::Prod(a, b) => {
            let x = eval_box(a, bounds, limits)?;
            if x.is_empty() {
                return Ok(x);
            }
            let y = eval_box(b, bounds, limits)?;
            x.mul(&y, limits.coeff_cells)
        }
        Node::QuasiInv(a) => {
            let g = eval_box(a, bounds, limits)?;
            let mut result = CoeffBox::unit(bounds);
            let mut power = g.clone();
            // Each multiplication by g raises total degree by at least one,
            // so this terminates within sum(bounds) + 1 rounds.
            while !power.is_empty() {
                result.add_assign(&power);
                power = power.mul(&g, limits.coeff_cells)?;
            }
            Ok(result)
        }
    }
}

/// Exact coefficient of the monomial with the given exponent vector.
pub fn coeff(e: &GFExpr, exponents: &[u32]) -> BigUint {
    coeff_with_limits(e, exponents, &Limits::default()).expect("default coefficient limits")
}

pub fn coeff_with_limits(e: &GFExpr, exponents: &[u32], limits: &Limits) -> Result<BigUint> {
    assert_eq!(exponents.len(), e.k, "exponent vector length must equal variable count");
    Ok(eval_box(&e.root, exponents, limits)?.get(exponents))
}

/// `f(n) = [x_1^n ... x_k^n] e`.
pub fn diagonal(e: &GFExpr, n: u32) -> BigUint {
    diagonal_with_limits(e, n, &Limits::default()).expect("default coefficient limits")
}

pub fn diagonal_with_limits(e: &GFExpr, n: u32, limits: &Limits) -> Result<BigUint> {
    coeff_with_limits(e, &vec![n; e.k], limits)
}

/// `f(n) = [x_1^{cn} ... x_k^{cn}] e` for a fixed c >= 1.
pub fn quasi_diagonal(e: &GFExpr, c: u32, n: u32) -> BigUint {
    coeff(e, &vec![c * n; e.k])
}

/// Sum of diagonals: `(prod_i 1/(1-y_i)) F + (prod_i 1/(1-x_i)) G` over the
/// disjoint union of the two variable sets.
pub fn closure_sum(f: &GFExpr, g: &GFExpr) -> GFExpr {
    let k = f.k;
    let l = g.k;
    let total = k + l;
    let fx = f.rename_vars(total, &|i| i);
    let gy = g.rename_vars(total, &|i| i + k);
    let mut left = fx;
    for i in 1..=l {
        left = left.prod(GFExpr::var(total, k + i).quasi_inv().expect("var has zero const"));
    }
    let mut right = gy;
    for i in 1..=k {
        right = right.prod(GFExpr::var(total, i).quasi_inv().expect("var has zero const"));
    }
    left.sum(right)
}

/// Product of diagonals: `F * G` over the disjoint union of variable sets.
pub fn closure_prod(f: &GFExpr, g: &GFExpr) -> GFExpr {
    let k = f.k;
    let total = k + g.k;
    let fx = f.rename_vars(total, &|i| i);
    let gy = g.rename_vars(total, &|i| i + k);
    fx.prod(gy)
}
