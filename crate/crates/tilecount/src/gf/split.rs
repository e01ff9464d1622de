//! Quasi-diagonal to diagonal conversion by variable splitting.
//!
//! The splitting operator sends `F` over `x_1..x_k` to an expression over
//! `k + 1` variables in which the old `x_var` is read as the sum of two new
//! exponents, the second of which must be at least 1. Applying it `m - 1`
//! times per variable turns the quasi-diagonal at exponents `m n` into a
//! true diagonal for all `n >= 1`; adding the constant `f(0)` afterwards
//! fixes `n = 0`.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};

use super::{gf_const_term, GFExpr, Limits, Node};

/// Reindex old variables for a split at `var`: the old `x_var` maps to
/// `keep` (either `var` for the "may be empty" copy or `var + 1` for the
/// "at least once" copy); larger indices shift up by one.
fn subst(node: &Node, var: usize, keep: usize) -> Node {
    super::rename(node, &|j| {
        if j < var {
            j
        } else if j == var {
            keep
        } else {
            j + 1
        }
    })
}

/// The structural splitting operator on `var`.
fn split_once(node: &Node, var: usize) -> Node {
    match node {
        Node::Zero => Node::Zero,
        Node::Var(j) => {
            if *j == var {
                Node::Var(var + 1)
            } else {
                // A bare other variable has no coefficients with the
                // "at least once" exponent positive.
                Node::Zero
            }
        }
        Node::Sum(a, b) => Node::Sum(Box::new(split_once(a, var)), Box::new(split_once(b, var))),
        Node::Prod(a, b) => {
            // (GH)^o = G^o H(keep=var+1) + G(keep=var) H^o
            let left = Node::Prod(Box::new(split_once(a, var)), Box::new(subst(b, var, var + 1)));
            let right = Node::Prod(Box::new(subst(a, var, var)), Box::new(split_once(b, var)));
            Node::Sum(Box::new(left), Box::new(right))
        }
        Node::QuasiInv(a) => {
            // F^o = F(keep=var) G^o F(keep=var+1) for F = 1/(1-G).
            let f_left = Node::QuasiInv(Box::new(subst(a, var, var)));
            let f_right = Node::QuasiInv(Box::new(subst(a, var, var + 1)));
            Node::Prod(
                Box::new(Node::Prod(Box::new(f_left), Box::new(split_once(a, var)))),
                Box::new(f_right),
            )
        }
    }
}

/// Split every variable of `e` into `m` parts so that the diagonal of the
/// result equals the quasi-diagonal of `e` at exponents `m n`, for all
/// `n >= 0` (the constant term is patched).
pub fn split_variable(e: &GFExpr, m: u32) -> Result<GFExpr> {
    split_variable_with_limits(e, m, &Limits::default())
}

pub fn split_variable_with_limits(e: &GFExpr, m: u32, limits: &Limits) -> Result<GFExpr> {
    assert!(m >= 1);
    let k = e.k();
    let target_vars = k * m as usize;
    if target_vars > limits.var_cap {
        return Err(Error::SizeLimit { what: "variables after splitting".into(), need: target_vars, cap: limits.var_cap });
    }
    let mut root = e.root().clone();
    if m >= 2 {
        // Process original variables from the last down so earlier positions
        // stay fixed while each variable is split m - 1 times in place.
        for var in (1..=k).rev() {
            for _ in 0..(m - 1) {
                root = split_once(&root, var);
            }
        }
    }
    let split = GFExpr::new(target_vars, root)?;
    // Constant-term patch: the split expression has constant term 0 and its
    // diagonal misses only n = 0, where the value is the constant term of e.
    let f0 = gf_const_term(e).to_u64().ok_or(Error::SizeLimit {
        what: "constant term patch".into(),
        need: usize::MAX,
        cap: usize::MAX,
    })?;
    if f0 == 0 {
        Ok(split)
    } else {
        Ok(split.sum(GFExpr::nat(target_vars, f0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{diagonal, parse_gf, quasi_diagonal};
    use num_bigint::BigUint;

    #[test]
    fn splitting_a_bare_variable_gives_zero_diagonal() {
        let e = parse_gf("x1").unwrap();
        let s = split_variable(&e, 2).unwrap();
        assert_eq!(s.k(), 2);
        for n in 1..=5 {
            assert_eq!(diagonal(&s, n), BigUint::from(0u32));
            assert_eq!(diagonal(&s, n), quasi_diagonal(&e, 2, n));
        }
    }

    #[test]
    fn geometric_series_splits_to_constant_one() {
        let e = parse_gf("Q(x1)").unwrap();
        let s = split_variable(&e, 2).unwrap();
        for n in 0..=5 {
            assert_eq!(quasi_diagonal(&e, 2, n), BigUint::from(1u32));
            assert_eq!(diagonal(&s, n), BigUint::from(1u32));
        }
    }

    #[test]
    fn fibonacci_even_index_quasi_diagonal() {
        let e = parse_gf("Q(x1+x1*x1)").unwrap();
        let s = split_variable(&e, 2).unwrap();
        for n in 0..=5 {
            let direct = quasi_diagonal(&e, 2, n);
            let via_split = if n == 0 {
                // patched constant
                diagonal(&s, 0)
            } else {
                diagonal(&s, n)
            };
            assert_eq!(via_split, direct, "at n={n}");
        }
    }

    #[test]
    fn triple_split_matches_quasi_diagonal() {
        let e = parse_gf("Q(x1+x2)").unwrap();
        let s = split_variable(&e, 3).unwrap();
        assert_eq!(s.k(), 6);
        for n in 0..=2 {
            assert_eq!(diagonal(&s, n), quasi_diagonal(&e, 3, n), "at n={n}");
        }
    }

    #[test]
    fn cap_refusal() {
        let e = parse_gf("Q(x1+x2)").unwrap();
        assert!(matches!(split_variable(&e, 7), Err(Error::SizeLimit { .. })));
    }
}
