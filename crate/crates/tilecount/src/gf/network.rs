//! Compilation of expressions into k-networks and color-constrained walk
//! counting, the second, independent coefficient backend.
//!
//! A k-network is a directed multigraph with a source, a sink, and an edge
//! coloring by the variables. For every exponent vector `c` with `|c| >= 1`,
//! the number of source-to-sink walks using exactly `c_i` edges of color `i`
//! equals the series coefficient at `c`. Constant terms are tracked outside
//! the graph and never appear as walks.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::{const_term, GFExpr, Limits, Node};

#[derive(Clone, Debug)]
pub struct KNetwork {
    pub vertex_count: usize,
    pub source: usize,
    pub sink: usize,
    /// `(from, to, color)` with 1-based colors.
    pub edges: Vec<(usize, usize, usize)>,
    /// Number of colors (the variable count of the compiled expression).
    pub colors: usize,
}

struct Builder {
    vertex_count: usize,
    edges: Vec<(usize, usize, usize)>,
    cap: usize,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        self.vertex_count += 1;
        self.vertex_count - 1
    }

    fn push_edge(&mut self, from: usize, to: usize, color: usize) -> Result<()> {
        if self.edges.len() >= self.cap {
            return Err(Error::SizeLimit { what: "network edges".into(), need: self.edges.len() + 1, cap: self.cap });
        }
        self.edges.push((from, to, color));
        Ok(())
    }

    /// Compile `node` as a fragment between the given endpoint vertices.
    /// Sources never gain incoming edges and sinks never gain outgoing ones,
    /// except where a fragment is deliberately pasted as a loop.
    fn compile(&mut self, node: &Node, source: usize, sink: usize) -> Result<()> {
        match node {
            Node::Zero => Ok(()),
            Node::Var(i) => self.push_edge(source, sink, *i),
            Node::Sum(a, b) => {
                self.compile(a, source, sink)?;
                self.compile(b, source, sink)
            }
            Node::Prod(a, b) => {
                // FG = (F - a)(G - b) + aG + bF with a, b the constant terms;
                // the constant product ab has no walks by design.
                let mid = self.fresh();
                self.compile(a, source, mid)?;
                self.compile(b, mid, sink)?;
                let ca = const_to_usize(a, self.cap)?;
                let cb = const_to_usize(b, self.cap)?;
                for _ in 0..ca {
                    self.compile(b, source, sink)?;
                }
                for _ in 0..cb {
                    self.compile(a, source, sink)?;
                }
                Ok(())
            }
            Node::QuasiInv(a) => {
                // 1/(1-F) - 1 = F + F^2/(1-F): one direct copy plus a copy
                // into a loop vertex, a loop copy, and a copy out.
                let v = self.fresh();
                self.compile(a, source, sink)?;
                self.compile(a, source, v)?;
                self.compile(a, v, v)?;
                self.compile(a, v, sink)?;
                Ok(())
            }
        }
    }
}

fn const_to_usize(node: &Node, cap: usize) -> Result<usize> {
    let c = const_term(node);
    c.to_usize().filter(|&c| c <= cap).ok_or_else(|| Error::SizeLimit {
        what: "constant-term copies in network compilation".into(),
        need: usize::MAX,
        cap,
    })
}

/// Compile an expression into a k-network realizing its coefficients at all
/// exponent vectors with `|c| >= 1` as walk counts.
pub fn compile_knetwork(e: &GFExpr) -> Result<KNetwork> {
    compile_knetwork_with_limits(e, &Limits::default())
}

pub fn compile_knetwork_with_limits(e: &GFExpr, limits: &Limits) -> Result<KNetwork> {
    let mut b = Builder { vertex_count: 0, edges: Vec::new(), cap: limits.network_edges };
    let source = b.fresh();
    let sink = b.fresh();
    b.compile(e.root(), source, sink)?;
    Ok(KNetwork { vertex_count: b.vertex_count, source, sink, edges: b.edges, colors: e.k() })
}

/// Number of source-to-sink walks with exactly `colors[i]` edges of color
/// `i + 1`.
pub fn path_count(net: &KNetwork, colors: &[u32]) -> BigUint {
    assert_eq!(colors.len(), net.colors);
    let mut out: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for &(f, t, c) in &net.edges {
        out.entry(f).or_default().push((t, c));
    }
    let mut memo: HashMap<(usize, Vec<u32>), BigUint> = HashMap::new();
    fn walk(
        v: usize,
        budget: &[u32],
        sink: usize,
        out: &HashMap<usize, Vec<(usize, usize)>>,
        memo: &mut HashMap<(usize, Vec<u32>), BigUint>,
    ) -> BigUint {
        if budget.iter().all(|&b| b == 0) {
            return if v == sink { BigUint::one() } else { BigUint::zero() };
        }
        let key = (v, budget.to_vec());
        if let Some(c) = memo.get(&key) {
            return c.clone();
        }
        let mut total = BigUint::zero();
        if let Some(es) = out.get(&v) {
            for &(to, color) in es {
                if budget[color - 1] == 0 {
                    continue;
                }
                let mut next = budget.to_vec();
                next[color - 1] -= 1;
                total += walk(to, &next, sink, out, memo);
            }
        }
        memo.insert(key, total.clone());
        total
    }
    walk(net.source, colors, net.sink, &out, &mut memo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{coeff, parse_gf};

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn single_variable_edge() {
        let net = compile_knetwork(&parse_gf("x1").unwrap()).unwrap();
        assert_eq!(net.vertex_count, 2);
        assert_eq!(net.edges.len(), 1);
        assert_eq!(path_count(&net, &[1]), big(1));
        assert_eq!(path_count(&net, &[2]), big(0));
    }

    #[test]
    fn parallel_edges_add() {
        let net = compile_knetwork(&parse_gf("x1+x1").unwrap()).unwrap();
        assert_eq!(path_count(&net, &[1]), big(2));
    }

    #[test]
    fn quasi_inverse_walks_match_binomials() {
        let e = parse_gf("Q(x1+x2)").unwrap();
        let net = compile_knetwork(&e).unwrap();
        assert_eq!(path_count(&net, &[1, 1]), big(2));
        assert_eq!(path_count(&net, &[2, 2]), big(6));
        assert_eq!(path_count(&net, &[3, 3]), big(20));
    }

    fn check_backends(e: &crate::gf::GFExpr, max: u32) {
        let net = compile_knetwork(e).unwrap();
        let k = e.k();
        let mut exps = vec![0u32; k];
        'points: loop {
            if exps.iter().any(|&x| x > 0) {
                assert_eq!(path_count(&net, &exps), coeff(e, &exps), "at {exps:?}");
            }
            let mut i = 0;
            loop {
                if i == k {
                    break 'points;
                }
                if exps[i] < max {
                    exps[i] += 1;
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn backends_agree_on_small_exponents() {
        for text in ["Q(x1+x1*x1)", "Q(2*x1)", "x1*Q(x1)*Q(x1)", "Q(x1)*Q(x2)+x1*x2"] {
            check_backends(&parse_gf(text).unwrap(), 4);
        }
    }

    #[test]
    fn backends_agree_on_random_expressions() {
        use crate::gf::{GFExpr, Node};
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
        fn gen(rng: &mut rand_chacha::ChaCha8Rng, depth: u32, k: usize) -> Node {
            let pick = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..5) };
            match pick {
                0 => Node::Var(rng.gen_range(1..=k)),
                1 => {
                    if rng.gen_bool(0.3) {
                        Node::Zero
                    } else {
                        Node::Var(rng.gen_range(1..=k))
                    }
                }
                2 => Node::Sum(Box::new(gen(rng, depth - 1, k)), Box::new(gen(rng, depth - 1, k))),
                3 => Node::Prod(Box::new(gen(rng, depth - 1, k)), Box::new(gen(rng, depth - 1, k))),
                _ => {
                    let inner = gen(rng, depth - 1, k);
                    if crate::gf::const_term(&inner).is_zero() {
                        Node::QuasiInv(Box::new(inner))
                    } else {
                        inner
                    }
                }
            }
        }
        let mut done = 0;
        while done < 25 {
            let k = rng.gen_range(1..=2);
            let node = gen(&mut rng, 3, k);
            let e = GFExpr::new(k, node).unwrap();
            check_backends(&e, 3);
            done += 1;
        }
    }
}
