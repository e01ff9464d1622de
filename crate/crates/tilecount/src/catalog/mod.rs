//! Named constructions in all available representations, the Catalan
//! congruence and valuation builders, hypergeometric-limit constructions,
//! and growth classification.

mod asymp;
mod hyper;

pub use asymp::{asymp_fit, ln_biguint, ClassFit, Growth};
pub use hyper::{pi_interval, xi_interval, HypoTarget};

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{rat, rat_int, FieldElement, IrrationalBasis, Rat, Refinement, SymbolDecl};
use crate::gf::{closure_prod, parse_gf, GFExpr};
use crate::multisum::{binomial, AffineForm, BinomialMultiSum};
use crate::tiles::{Profile, Tile, TileSet};
use crate::translate::sqrt_enclosure;

/// One catalog entry: a named function with its available representations
/// and an independent closed-form oracle.
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub oracle: fn(u64) -> BigUint,
    pub tiles: Option<TileSet>,
    pub gf: Option<GFExpr>,
    pub multisum: Option<BinomialMultiSum>,
}

impl CatalogEntry {
    pub fn representation_count(&self) -> usize {
        self.tiles.is_some() as usize + self.gf.is_some() as usize + self.multisum.is_some() as usize
    }
}

// ---------------------------------------------------------------------------
// Shared basis and profile helpers
// ---------------------------------------------------------------------------

fn sqrt_symbol(name: &str, radicand_num: i64, radicand_den: i64) -> SymbolDecl {
    let radicand = rat(radicand_num, radicand_den);
    let (lo, hi) = sqrt_enclosure(&radicand, &rat(1, 256));
    SymbolDecl {
        name: name.to_string(),
        lo,
        hi,
        allow_nonpositive: false,
        refine: Refinement::Sqrt { radicand, shift: Rat::zero() },
    }
}

/// Basis with one symbol `alpha = sqrt(2)/4` (about 0.3536).
fn basis_alpha() -> Arc<IrrationalBasis> {
    Arc::new(IrrationalBasis::new(vec![sqrt_symbol("alpha", 1, 8)]).expect("valid basis"))
}

/// Basis with `alpha = sqrt(2)/4` and `beta = sqrt(3)/8` (about 0.2165).
fn basis_alpha_beta() -> Arc<IrrationalBasis> {
    Arc::new(
        IrrationalBasis::new(vec![sqrt_symbol("alpha", 1, 8), sqrt_symbol("beta", 3, 64)])
            .expect("valid basis"),
    )
}

fn rational_basis() -> Arc<IrrationalBasis> {
    Arc::new(IrrationalBasis::rational_only())
}

/// A notch profile: offset `depth` on the middle third.
fn notch(dim: usize, depth: Rat) -> Profile {
    Profile::new(
        vec![Rat::zero(), rat(1, 3), rat(2, 3), rat_int(1)],
        vec![
            FieldElement::zero(dim),
            FieldElement::from_rational(dim, depth),
            FieldElement::zero(dim),
        ],
    )
    .expect("well-formed notch profile")
}

// ---------------------------------------------------------------------------
// Tile sets
// ---------------------------------------------------------------------------

/// `{[1x1], [1x2]}` with offset 0: Fibonacci numbers.
pub fn fibonacci_tiles() -> TileSet {
    let b = rational_basis();
    let dim = b.dim();
    let tiles = vec![Tile::rect(dim, b.rational(rat_int(1))), Tile::rect(dim, b.rational(rat_int(2)))];
    let eps = FieldElement::zero(dim);
    TileSet::new(b, tiles, eps).expect("valid tile set")
}

/// `{[1x(1/2-alpha)], [1x(1/2+alpha)]}` with offset 0: central binomials.
pub fn central_binomial_tiles() -> TileSet {
    let b = basis_alpha();
    let dim = b.dim();
    let alpha = b.symbol(0);
    let half = b.rational(rat(1, 2));
    let tiles = vec![
        Tile::rect(dim, half.checked_sub(&alpha).unwrap()),
        Tile::rect(dim, half.checked_add(&alpha).unwrap()),
    ];
    let eps = FieldElement::zero(dim);
    TileSet::new(b, tiles, eps).expect("valid tile set")
}

/// Six tiles in two interlocking triples, offset `2 alpha`: exactly two
/// tilings of every length.
pub fn two_ways_tiles() -> TileSet {
    let b = basis_alpha();
    let dim = b.dim();
    let alpha = b.symbol(0);
    let one = b.rational(rat_int(1));
    let v = Profile::vertical(dim);
    let pa = notch(dim, rat(1, 8));
    let pb = notch(dim, rat(1, 4));
    let tiles = vec![
        Tile::new(v.clone(), pa.clone(), alpha.clone()),
        Tile::new(pa.clone(), pa.clone(), one.clone()),
        Tile::new(pa, v.clone(), alpha.clone()),
        Tile::new(v.clone(), pb.clone(), alpha.clone()),
        Tile::new(pb.clone(), pb.clone(), one),
        Tile::new(pb, v, alpha.clone()),
    ];
    let eps = alpha.scale(&rat_int(2));
    TileSet::new(b, tiles, eps).expect("valid tile set")
}

/// `{R_1, R_{1+alpha}, R_{1+beta}, R_{1+alpha+beta}}`, offset `alpha+beta`:
/// n^2 tilings.
pub fn squares_tiles() -> TileSet {
    let b = basis_alpha_beta();
    let dim = b.dim();
    let one = b.rational(rat_int(1));
    let alpha = b.symbol(0);
    let beta = b.symbol(1);
    let tiles = vec![
        Tile::rect(dim, one.clone()),
        Tile::rect(dim, one.checked_add(&alpha).unwrap()),
        Tile::rect(dim, one.checked_add(&beta).unwrap()),
        Tile::rect(dim, one.checked_add(&alpha).unwrap().checked_add(&beta).unwrap()),
    ];
    let eps = alpha.checked_add(&beta).unwrap();
    TileSet::new(b, tiles, eps).expect("valid tile set")
}

/// A unit square plus two tiles that only form a unit square: 2^n tilings.
pub fn powers_of_two_tiles() -> TileSet {
    let b = rational_basis();
    let dim = b.dim();
    let v = Profile::vertical(dim);
    let p = notch(dim, rat(1, 8));
    let tiles = vec![
        Tile::rect(dim, b.rational(rat_int(1))),
        Tile::new(v.clone(), p.clone(), b.rational(rat(1, 2))),
        Tile::new(p, v, b.rational(rat(1, 2))),
    ];
    TileSet::new(b, tiles, FieldElement::zero(dim)).expect("valid tile set")
}

/// Three ways to fill each unit cell: 3^n tilings.
pub fn powers_of_three_tiles() -> TileSet {
    let b = rational_basis();
    let dim = b.dim();
    let v = Profile::vertical(dim);
    let pa = notch(dim, rat(1, 16));
    let pb = notch(dim, rat(2, 16));
    let qb = notch(dim, rat(3, 16));
    let tiles = vec![
        Tile::rect(dim, b.rational(rat_int(1))),
        Tile::new(v.clone(), pa.clone(), b.rational(rat(1, 2))),
        Tile::new(pa, v.clone(), b.rational(rat(1, 2))),
        Tile::new(v.clone(), pb.clone(), b.rational(rat(1, 3))),
        Tile::new(pb, qb.clone(), b.rational(rat(1, 3))),
        Tile::new(qb, v, b.rational(rat(1, 3))),
    ];
    TileSet::new(b, tiles, FieldElement::zero(dim)).expect("valid tile set")
}

/// Two gated excursion families realizing `F(n) + F(n-2)` (Lucas numbers
/// for n >= 1, with value 1 at n = 0).
pub fn lucas_tiles() -> TileSet {
    let b = basis_alpha();
    let dim = b.dim();
    let tau = b.symbol(0);
    let one = b.rational(rat_int(1));
    let two = b.rational(rat_int(2));
    let v = Profile::vertical(dim);
    let pq = notch(dim, rat(1, 8));
    let pp = notch(dim, rat(1, 4));
    let tiles = vec![
        Tile::new(v.clone(), pq.clone(), tau.clone()),
        Tile::new(pq.clone(), pq.clone(), one.clone()),
        Tile::new(pq.clone(), pq.clone(), two.clone()),
        Tile::new(pq, v.clone(), tau.clone()),
        Tile::new(v.clone(), pp.clone(), one.checked_add(&tau).unwrap()),
        Tile::new(pp.clone(), pp.clone(), one.clone()),
        Tile::new(pp.clone(), pp.clone(), two),
        Tile::new(pp, v, one.checked_add(&tau).unwrap()),
    ];
    let eps = tau.scale(&rat_int(2));
    TileSet::new(b, tiles, eps).expect("valid tile set")
}

/// Two gated excursion families with 2 and 3 unit fillers: 2^n + 3^n.
pub fn powers23_tiles() -> TileSet {
    let b = basis_alpha();
    let dim = b.dim();
    let tau = b.symbol(0);
    let v = Profile::vertical(dim);
    let qa = notch(dim, rat(1, 16));
    let sa = notch(dim, rat(2, 16));
    let qb = notch(dim, rat(3, 16));
    let sb = notch(dim, rat(4, 16));
    let tb = notch(dim, rat(5, 16));
    let ub = notch(dim, rat(6, 16));
    let tiles = vec![
        // family realizing 2^n inside the excursion
        Tile::new(v.clone(), qa.clone(), tau.clone()),
        Tile::new(qa.clone(), qa.clone(), b.rational(rat_int(1))),
        Tile::new(qa.clone(), sa.clone(), b.rational(rat(1, 2))),
        Tile::new(sa, qa.clone(), b.rational(rat(1, 2))),
        Tile::new(qa, v.clone(), tau.clone()),
        // family realizing 3^n
        Tile::new(v.clone(), qb.clone(), tau.clone()),
        Tile::new(qb.clone(), qb.clone(), b.rational(rat_int(1))),
        Tile::new(qb.clone(), sb.clone(), b.rational(rat(1, 2))),
        Tile::new(sb, qb.clone(), b.rational(rat(1, 2))),
        Tile::new(qb.clone(), tb.clone(), b.rational(rat(1, 3))),
        Tile::new(tb, ub.clone(), b.rational(rat(1, 3))),
        Tile::new(ub, qb.clone(), b.rational(rat(1, 3))),
        Tile::new(qb, v, tau.clone()),
    ];
    let eps = tau.scale(&rat_int(2));
    TileSet::new(b, tiles, eps).expect("valid tile set")
}

/// One tile of length `2 + sigma` with offset `sigma`: the indicator of
/// n = 2.
pub fn finite_support_tiles() -> TileSet {
    let b = basis_alpha();
    let dim = b.dim();
    let sigma = b.symbol(0);
    let tiles = vec![Tile::rect(dim, b.rational(rat_int(2)).checked_add(&sigma).unwrap())];
    TileSet::new(b, tiles, sigma).expect("valid tile set")
}

// ---------------------------------------------------------------------------
// Generating functions
// ---------------------------------------------------------------------------

pub fn parity_gf() -> GFExpr {
    parse_gf("Q(x1*x1)").unwrap()
}

pub fn two_ways_gf() -> GFExpr {
    parse_gf("Q(x1)+Q(x1)").unwrap()
}

pub fn squares_gf() -> GFExpr {
    parse_gf("x1*Q(x1)*Q(x1)*x2*Q(x2)*Q(x2)").unwrap()
}

pub fn powers_of_two_gf() -> GFExpr {
    parse_gf("Q(2*x1)").unwrap()
}

pub fn fibonacci_gf() -> GFExpr {
    parse_gf("Q(x1+x1*x1)").unwrap()
}

pub fn central_binomial_gf() -> GFExpr {
    parse_gf("Q(x1+x2)").unwrap()
}

pub fn lucas_gf() -> GFExpr {
    parse_gf("Q(x1+x1*x1)+x1*x1*Q(x1+x1*x1)").unwrap()
}

pub fn powers23_gf() -> GFExpr {
    parse_gf("Q(2*x1)+Q(3*x1)").unwrap()
}

pub fn finite_support_gf() -> GFExpr {
    parse_gf("x1*x1").unwrap()
}

pub fn periodic_gf() -> GFExpr {
    parse_gf("Q(x1*x1)+x1*Q(x1*x1)+x1*Q(x1*x1)").unwrap()
}

pub fn square_shift_gf() -> GFExpr {
    let shifted = parse_gf("Q(x1)*Q(x1)").unwrap();
    closure_prod(&shifted, &shifted)
}

pub fn powers_of_three_gf() -> GFExpr {
    parse_gf("Q(3*x1)").unwrap()
}

pub fn mersenne_gf() -> GFExpr {
    parse_gf("x1*Q(x1)*Q(2*x1)").unwrap()
}

// ---------------------------------------------------------------------------
// Multisums
// ---------------------------------------------------------------------------

fn form(d: usize, coeffs: &[i64], n: i64, c: i64) -> AffineForm {
    assert_eq!(coeffs.len(), d);
    AffineForm::new(coeffs.to_vec(), n, c)
}

pub fn parity_multisum() -> BinomialMultiSum {
    // sum_v binom(n, 2v) binom(2v, n)
    BinomialMultiSum::new(
        1,
        vec![
            (form(1, &[0], 1, 0), form(1, &[2], 0, 0)),
            (form(1, &[2], 0, 0), form(1, &[0], 1, 0)),
        ],
    )
}

pub fn two_ways_multisum() -> BinomialMultiSum {
    // sum_v binom(1, v) = 2
    BinomialMultiSum::new(1, vec![(form(1, &[0], 0, 1), form(1, &[1], 0, 0))])
}

pub fn squares_multisum() -> BinomialMultiSum {
    // binom(n,1)^2
    BinomialMultiSum::new(
        0,
        vec![
            (form(0, &[], 1, 0), form(0, &[], 0, 1)),
            (form(0, &[], 1, 0), form(0, &[], 0, 1)),
        ],
    )
}

pub fn powers_of_two_multisum() -> BinomialMultiSum {
    BinomialMultiSum::new(1, vec![(form(1, &[0], 1, 0), form(1, &[1], 0, 0))])
}

pub fn fibonacci_multisum() -> BinomialMultiSum {
    // sum_v binom(n - v, v)
    BinomialMultiSum::new(1, vec![(form(1, &[-1], 1, 0), form(1, &[1], 0, 0))])
}

pub fn central_binomial_multisum() -> BinomialMultiSum {
    BinomialMultiSum::new(0, vec![(form(0, &[], 2, 0), form(0, &[], 1, 0))])
}

pub fn lucas_multisum() -> BinomialMultiSum {
    // sum_{k,i} binom(n - k - 2i, k) binom(1, i) binom(n - 2i, n - 2i).
    // The last factor keeps the shifted branch out of n < 2i, where the
    // two-term Fibonacci recurrence behind the formula does not yet hold.
    BinomialMultiSum::new(
        2,
        vec![
            (form(2, &[-1, -2], 1, 0), form(2, &[1, 0], 0, 0)),
            (form(2, &[0, 0], 0, 1), form(2, &[0, 1], 0, 0)),
            (form(2, &[0, -2], 1, 0), form(2, &[0, -2], 1, 0)),
        ],
    )
}

pub fn powers23_multisum() -> BinomialMultiSum {
    // Indices (i, j, k, l, m):
    // binom(n,i) binom(m,j) binom(1,k) binom(m-k,m) binom(l+k-1,l)
    // binom(i,m+l) binom(m+l,i)
    let d = 5;
    let (i, j, k, l, m) = (0, 1, 2, 3, 4);
    let v = |idx: usize, scale: i64| {
        let mut c = vec![0i64; d];
        c[idx] = scale;
        c
    };
    let mk = |ac: Vec<i64>, an: i64, acst: i64, bc: Vec<i64>, bn: i64, bcst: i64| {
        (form(d, &ac, an, acst), form(d, &bc, bn, bcst))
    };
    BinomialMultiSum::new(
        d,
        vec![
            mk(vec![0; d], 1, 0, v(i, 1), 0, 0),
            mk(v(m, 1), 0, 0, v(j, 1), 0, 0),
            mk(vec![0; d], 0, 1, v(k, 1), 0, 0),
            {
                let mut a = v(m, 1);
                a[k] = -1;
                (form(d, &a, 0, 0), form(d, &v(m, 1), 0, 0))
            },
            {
                let mut a = v(l, 1);
                a[k] = 1;
                (form(d, &a, 0, -1), form(d, &v(l, 1), 0, 0))
            },
            {
                let mut b = v(m, 1);
                b[l] = 1;
                (form(d, &v(i, 1), 0, 0), form(d, &b, 0, 0))
            },
            {
                let mut a = v(m, 1);
                a[l] = 1;
                (form(d, &a, 0, 0), form(d, &v(i, 1), 0, 0))
            },
        ],
    )
}

pub fn delannoy_multisum() -> BinomialMultiSum {
    // sum_k binom(n+k, n-k) binom(2k, k)
    BinomialMultiSum::new(
        1,
        vec![
            (form(1, &[1], 1, 0), form(1, &[-1], 1, 0)),
            (form(1, &[2], 0, 0), form(1, &[1], 0, 0)),
        ],
    )
}

pub fn apery_multisum() -> BinomialMultiSum {
    // sum_{k,j} binom(n,k) binom(n+k,k) binom(k,j)^3
    let kj = |a: &[i64], n: i64, c: i64| form(2, a, n, c);
    BinomialMultiSum::new(
        2,
        vec![
            (kj(&[0, 0], 1, 0), kj(&[1, 0], 0, 0)),
            (kj(&[1, 0], 1, 0), kj(&[1, 0], 0, 0)),
            (kj(&[1, 0], 0, 0), kj(&[0, 1], 0, 0)),
            (kj(&[1, 0], 0, 0), kj(&[0, 1], 0, 0)),
            (kj(&[1, 0], 0, 0), kj(&[0, 1], 0, 0)),
        ],
    )
}

pub fn finite_support_multisum() -> BinomialMultiSum {
    // binom(n, 2) binom(2, n): 1 iff n = 2
    BinomialMultiSum::new(
        0,
        vec![
            (form(0, &[], 1, 0), form(0, &[], 0, 2)),
            (form(0, &[], 0, 2), form(0, &[], 1, 0)),
        ],
    )
}

pub fn periodic_multisum() -> BinomialMultiSum {
    // sum_{v,t} binom(1,t) binom(n-t, 2v) binom(2v, n-t) binom(t+1, 1):
    // 1, 2, 1, 2, ...
    BinomialMultiSum::new(
        2,
        vec![
            (form(2, &[0, 0], 0, 1), form(2, &[0, 1], 0, 0)),
            (form(2, &[0, -1], 1, 0), form(2, &[2, 0], 0, 0)),
            (form(2, &[2, 0], 0, 0), form(2, &[0, -1], 1, 0)),
            (form(2, &[0, 1], 0, 1), form(2, &[0, 0], 0, 1)),
        ],
    )
}

pub fn square_shift_multisum() -> BinomialMultiSum {
    // binom(n+1, 1)^2 = (n+1)^2
    BinomialMultiSum::new(
        0,
        vec![
            (form(0, &[], 1, 1), form(0, &[], 0, 1)),
            (form(0, &[], 1, 1), form(0, &[], 0, 1)),
        ],
    )
}

pub fn powers_of_three_multisum() -> BinomialMultiSum {
    // sum_{v,w} binom(n, v) binom(v, w) = 3^n
    BinomialMultiSum::new(
        2,
        vec![
            (form(2, &[0, 0], 1, 0), form(2, &[1, 0], 0, 0)),
            (form(2, &[1, 0], 0, 0), form(2, &[0, 1], 0, 0)),
        ],
    )
}

pub fn mersenne_multisum() -> BinomialMultiSum {
    // sum_{v >= 1} binom(n, v) = 2^n - 1, the guard as binom(v-1, v-1)
    BinomialMultiSum::new(
        1,
        vec![
            (form(1, &[0], 1, 0), form(1, &[1], 0, 0)),
            (form(1, &[1], 0, -1), form(1, &[1], 0, -1)),
        ],
    )
}

pub fn hypo128_multisum() -> BinomialMultiSum {
    // sum_{k,w} binom(4k,k) binom(3k,k) binom(7(n-k), w): the last factor
    // sums to 128^{n-k}.
    BinomialMultiSum::new(
        2,
        vec![
            (form(2, &[4, 0], 0, 0), form(2, &[1, 0], 0, 0)),
            (form(2, &[3, 0], 0, 0), form(2, &[1, 0], 0, 0)),
            (form(2, &[-7, 0], 7, 0), form(2, &[0, 1], 0, 0)),
        ],
    )
}

pub fn central_binomial_squared_log_multisum() -> BinomialMultiSum {
    // sum_{k >= 1, w} binom(2k,k)^2 binom(4(n-k), w): grows like
    // 16^n log n / pi. The binom(k-1, k-1) factor keeps k positive.
    BinomialMultiSum::new(
        2,
        vec![
            (form(2, &[2, 0], 0, 0), form(2, &[1, 0], 0, 0)),
            (form(2, &[2, 0], 0, 0), form(2, &[1, 0], 0, 0)),
            (form(2, &[-4, 0], 4, 0), form(2, &[0, 1], 0, 0)),
            (form(2, &[1, 0], 0, -1), form(2, &[1, 0], 0, -1)),
        ],
    )
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn fib_oracle(n: u64) -> BigUint {
    // 1, 1, 2, 3, 5, ... (tiling convention: f(0) = 1)
    let mut a = BigUint::one();
    let mut b = BigUint::one();
    for _ in 0..n {
        let c = &a + &b;
        a = b;
        b = c;
    }
    a
}

fn lucas_oracle(n: u64) -> BigUint {
    // F(n) + F(n-2); 1 at n = 0 and 1.
    if n < 2 {
        return BigUint::one();
    }
    fib_oracle(n) + fib_oracle(n - 2)
}

fn delannoy_oracle(n: u64) -> BigUint {
    // Independent route: D(n) = sum_k binom(n,k) binom(n+k,k).
    (0..=n).map(|k| binomial(n, k) * binomial(n + k, k)).sum()
}

fn apery_oracle(n: u64) -> BigUint {
    // Independent route: A(n) = sum_k binom(n,k)^2 binom(n+k,k)^2.
    (0..=n)
        .map(|k| {
            let a = binomial(n, k);
            let b = binomial(n + k, k);
            &a * &a * &b * &b
        })
        .sum()
}

fn pow_big(base: u64, e: u64) -> BigUint {
    num_traits::pow::pow(BigUint::from(base), e as usize)
}

pub fn hypo128_oracle(n: u64) -> BigUint {
    (0..=n)
        .map(|k| binomial(4 * k, k) * binomial(3 * k, k) * pow_big(128, n - k))
        .sum()
}

fn cb_log_oracle(n: u64) -> BigUint {
    (1..=n)
        .map(|k| {
            let c = binomial(2 * k, k);
            &c * &c * pow_big(16, n - k)
        })
        .sum()
}

/// All catalog entries.
pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "g1",
            description: "indicator of even lengths",
            oracle: |n| if n % 2 == 0 { big(1) } else { big(0) },
            tiles: Some({
                let b = rational_basis();
                let dim = b.dim();
                TileSet::new(b.clone(), vec![Tile::rect(dim, b.rational(rat_int(2)))], FieldElement::zero(dim))
                    .unwrap()
            }),
            gf: Some(parity_gf()),
            multisum: Some(parity_multisum()),
        },
        CatalogEntry {
            name: "g2",
            description: "constant 2",
            oracle: |_| big(2),
            tiles: Some(two_ways_tiles()),
            gf: Some(two_ways_gf()),
            multisum: Some(two_ways_multisum()),
        },
        CatalogEntry {
            name: "g3",
            description: "n^2",
            oracle: |n| big(n) * big(n),
            tiles: Some(squares_tiles()),
            gf: Some(squares_gf()),
            multisum: Some(squares_multisum()),
        },
        CatalogEntry {
            name: "g4",
            description: "2^n",
            oracle: |n| pow_big(2, n),
            tiles: Some(powers_of_two_tiles()),
            gf: Some(powers_of_two_gf()),
            multisum: Some(powers_of_two_multisum()),
        },
        CatalogEntry {
            name: "g5",
            description: "Fibonacci numbers",
            oracle: fib_oracle,
            tiles: Some(fibonacci_tiles()),
            gf: Some(fibonacci_gf()),
            multisum: Some(fibonacci_multisum()),
        },
        CatalogEntry {
            name: "g6",
            description: "central binomial coefficients",
            oracle: |n| binomial(2 * n, n),
            tiles: Some(central_binomial_tiles()),
            gf: Some(central_binomial_gf()),
            multisum: Some(central_binomial_multisum()),
        },
        CatalogEntry {
            name: "lucas",
            description: "Lucas numbers (value 1 at n = 0)",
            oracle: lucas_oracle,
            tiles: Some(lucas_tiles()),
            gf: Some(lucas_gf()),
            multisum: Some(lucas_multisum()),
        },
        CatalogEntry {
            name: "powers23",
            description: "2^n + 3^n",
            oracle: |n| pow_big(2, n) + pow_big(3, n),
            tiles: Some(powers23_tiles()),
            gf: Some(powers23_gf()),
            multisum: Some(powers23_multisum()),
        },
        CatalogEntry {
            name: "delannoy",
            description: "central Delannoy numbers",
            oracle: delannoy_oracle,
            tiles: None,
            gf: None,
            multisum: Some(delannoy_multisum()),
        },
        CatalogEntry {
            name: "apery",
            description: "Apery numbers",
            oracle: apery_oracle,
            tiles: None,
            gf: None,
            multisum: Some(apery_multisum()),
        },
        CatalogEntry {
            name: "finite_support",
            description: "indicator of n = 2",
            oracle: |n| if n == 2 { big(1) } else { big(0) },
            tiles: Some(finite_support_tiles()),
            gf: Some(finite_support_gf()),
            multisum: Some(finite_support_multisum()),
        },
        CatalogEntry {
            name: "periodic12",
            description: "period-2 pattern 1, 2, 1, 2, ...",
            oracle: |n| if n % 2 == 0 { big(1) } else { big(2) },
            tiles: None,
            gf: Some(periodic_gf()),
            multisum: Some(periodic_multisum()),
        },
        CatalogEntry {
            name: "square_shift",
            description: "(n+1)^2",
            oracle: |n| big(n + 1) * big(n + 1),
            tiles: None,
            gf: Some(square_shift_gf()),
            multisum: Some(square_shift_multisum()),
        },
        CatalogEntry {
            name: "power3",
            description: "3^n",
            oracle: |n| pow_big(3, n),
            tiles: Some(powers_of_three_tiles()),
            gf: Some(powers_of_three_gf()),
            multisum: Some(powers_of_three_multisum()),
        },
        CatalogEntry {
            name: "mersenne",
            description: "2^n - 1",
            oracle: |n| pow_big(2, n) - big(1),
            tiles: None,
            gf: Some(mersenne_gf()),
            multisum: Some(mersenne_multisum()),
        },
        CatalogEntry {
            name: "hypo128",
            description: "sum_k binom(4k,k) binom(3k,k) 128^(n-k)",
            oracle: hypo128_oracle,
            tiles: None,
            gf: None,
            multisum: Some(hypo128_multisum()),
        },
        CatalogEntry {
            name: "cb_log",
            description: "sum_k binom(2k,k)^2 16^(n-k)",
            oracle: cb_log_oracle,
            tiles: None,
            gf: None,
            multisum: Some(central_binomial_squared_log_multisum()),
        },
    ]
}

pub fn entry(name: &str) -> Option<CatalogEntry> {
    entries().into_iter().find(|e| e.name == name)
}

// ---------------------------------------------------------------------------
// Catalan builders
// ---------------------------------------------------------------------------

/// `f(n) = binom(2n, n) + (m - 1) binom(2n, n+1)`, congruent to the Catalan
/// numbers modulo m, as a single multisum with a selector index.
pub fn cat_mod(m: u64) -> BinomialMultiSum {
    assert!(m >= 1);
    // sum_t binom(1, t) binom(2n, n + t) binom((m-1) t, t)
    BinomialMultiSum::new(
        1,
        vec![
            (form(1, &[0], 0, 1), form(1, &[1], 0, 0)),
            (form(1, &[0], 2, 0), form(1, &[1], 1, 0)),
            (form(1, &[m as i64 - 1], 0, 0), form(1, &[1], 0, 0)),
        ],
    )
}

/// Append factors realizing `base^exp` as a sum over fresh chain indices,
/// splitting off powers of two: `base^E = 2^{aE} b^E` and
/// `b^E = sum_w binom(E, w) (b-1)^w` for odd b. Each fresh index is listed
/// in `chain_vars` so callers can gate it.
fn push_power_chain(
    base: u64,
    exp: AffineForm,
    d: usize,
    next_var: &mut usize,
    factors: &mut Vec<(AffineForm, AffineForm)>,
    chain_vars: &mut Vec<usize>,
) {
    assert!(base >= 1);
    let mut b = base;
    let mut a = 0u64;
    while b % 2 == 0 {
        b /= 2;
        a += 1;
    }
    if a > 0 {
        // 2^{a exp} = sum_u binom(a exp, u)
        let u = *next_var;
        *next_var += 1;
        chain_vars.push(u);
        factors.push((exp.scaled_add(a as i64 - 1, &exp), AffineForm::var(d, u, 1)));
    }
    if b > 1 {
        // b^exp = sum_w binom(exp, w) (b-1)^w
        let w = *next_var;
        *next_var += 1;
        chain_vars.push(w);
        factors.push((exp.clone(), AffineForm::var(d, w, 1)));
        push_power_chain(b - 1, AffineForm::var(d, w, 1), d, next_var, factors, chain_vars);
    }
}

/// Number of fresh indices [`push_power_chain`] will allocate for `base`.
fn power_chain_len(base: u64) -> usize {
    let mut b = base;
    let mut count = 0;
    loop {
        let mut a = 0;
        while b % 2 == 0 {
            b /= 2;
            a += 1;
        }
        if a > 0 {
            count += 1;
        }
        if b <= 1 {
            return count;
        }
        count += 1;
        b -= 1;
    }
}

/// `f(n) = binom(2n, n) + (p^{2n} - 1) binom(2n, n+1)`, with
/// `ord_p(f(n)) = ord_p(C_n)`, as one multisum: a selector t, a base-p^2
/// digit position l in 1..=n, and a power chain for `p^{2(n-l)}`, all pinned
/// to zero on the t = 0 branch by `binom(x + t - 1, x)` factors.
pub fn cat_ordp(p: u64) -> Result<BinomialMultiSum> {
    if p < 2 || (2..).take_while(|q| q * q <= p).any(|q| p % q == 0) {
        return Err(Error::NotPrime(p));
    }
    // Count chain indices first to fix d.
    let chain_len = power_chain_len(p);
    let d = 2 + chain_len;
    let t = 0usize;
    let l = 1usize;
    let tvar = AffineForm::var(d, t, 1);
    let lvar = AffineForm::var(d, l, 1);
    let mut factors: Vec<(AffineForm, AffineForm)> = Vec::new();
    // Selector and the morphing central binomial.
    factors.push((AffineForm::constant_form(d, 1), tvar.clone()));
    factors.push((AffineForm::n_term(d, 2), AffineForm::var(d, t, 1).scaled_add(1, &AffineForm::n_term(d, 1))));
    // Digit value p^2 - 1, present only at t = 1.
    factors.push((tvar.scaled_add((p * p - 1) as i64 - 1, &tvar), tvar.clone()));
    // 1 <= l <= n at t = 1; pinned to 0 at t = 0.
    factors.push((lvar.sub(&tvar), lvar.sub(&tvar))); // l >= t
    factors.push((AffineForm::n_term(d, 1).sub(&lvar), AffineForm::n_term(d, 1).sub(&lvar))); // l <= n
    factors.push((lvar.add(&tvar).add_const(-1), lvar.clone())); // pin_unless(l, t)
    // Power chain for p^{2(n - l)}.
    let mut next = 2usize;
    let mut chain_vars = Vec::new();
    let exp = AffineForm::n_term(d, 2).scaled_add(-2, &lvar);
    push_power_chain(p, exp, d, &mut next, &mut factors, &mut chain_vars);
    debug_assert_eq!(next, d);
    for cv in chain_vars {
        let cvar = AffineForm::var(d, cv, 1);
        factors.push((cvar.add(&tvar).add_const(-1), cvar)); // pin_unless(cv, t)
    }
    Ok(BinomialMultiSum::new(d, factors))
}

/// p-adic valuation.
pub fn ord_p(p: u64, x: &BigUint) -> u64 {
    assert!(!x.is_zero());
    let p = BigUint::from(p);
    let mut x = x.clone();
    let mut ord = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return ord;
        }
        ord += 1;
        x = q;
    }
}

// ---------------------------------------------------------------------------
// Hypergeometric constructions
// ---------------------------------------------------------------------------

/// Result of [`hypo_build`]: a multisum with `f(n)/c^n -> A`, plus the
/// descriptor of the defining hypergeometric partial sums for `A`.
pub struct HypoBuild {
    pub multisum: BinomialMultiSum,
    pub target: HypoTarget,
    pub base: u64,
}

fn prime_factors(mut x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        if x % p == 0 {
            out.push(p);
            while x % p == 0 {
                x /= p;
            }
        }
        p += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

/// Multinomial factors `binom(mu_i l, nu_{i,1} l) binom((mu_i - nu_{i,1}) l,
/// nu_{i,2} l) ...` per part, with `l` an arbitrary affine form.
fn push_multinomials(
    mu: &[u64],
    nu: &[Vec<u64>],
    lform: &AffineForm,
    factors: &mut Vec<(AffineForm, AffineForm)>,
) {
    for (mi, parts) in mu.iter().zip(nu) {
        let mut rest = lform.scaled_add(*mi as i64 - 1, lform); // mu_i * l
        for (j, &p) in parts.iter().enumerate() {
            if j + 1 == parts.len() {
                break; // last part is determined
            }
            let take = lform.scaled_add(p as i64 - 1, lform); // p * l
            factors.push((rest.clone(), take.clone()));
            rest = rest.sub(&take);
        }
    }
}

fn upsilon_target(mu: &[u64], nu: &[Vec<u64>], r1: u64, r2: u64) -> HypoTarget {
    // Term-ratio parameters: the multisets Upsilon_mu and Upsilon_nu. (The
    // extra unit upper parameter of the (p+1)F_p naming cancels against the
    // implicit factorial and does not enter the ratio.)
    let mut upper: Vec<Rat> = Vec::new();
    let mut lower: Vec<Rat> = Vec::new();
    for &m in mu {
        for j in 1..=m {
            upper.push(rat(j as i64, m as i64));
        }
    }
    for parts in nu {
        for &p in parts {
            for j in 1..=p {
                lower.push(rat(j as i64, p as i64));
            }
        }
    }
    HypoTarget { upper, lower, ratio: rat(r1 as i64, r2 as i64) }
}

/// Hypergeometric-limit construction: given a partition `mu`, a refinement `nu`
/// (grouped per part of `mu`), a positive rational ratio `r = r1/r2`, and a
/// base `c` divisible by every prime factor of `mu_1 ... mu_k r2`, build a
/// multisum with `f(n) ~ A c^n` where `A` is the hypergeometric value of the
/// associated partial sums.
///
/// When `c V r1 / (W r2)` is a positive integer (W and V the weight products
/// of `mu` and `nu`) the sum `f(n) = sum_l M(l) c^{n-l} F^l` is built
/// directly. Otherwise the base is reached by scaling and residue splitting:
/// with `c0 = W r2` and the smallest `dd` for which `c0` divides `c^dd`,
/// `f(dd t + j) = c^j (c^dd/c0)^t h(t)` for the direct function `h`, so every
/// residue class tracks `A c^n`.
pub fn hypo_build(mu: &[u64], nu: &[Vec<u64>], r1: u64, r2: u64, c: u64) -> Result<HypoBuild> {
    if mu.is_empty() || mu.len() != nu.len() || r1 == 0 || r2 == 0 || c == 0 {
        return Err(Error::NotRefinement);
    }
    for (m, parts) in mu.iter().zip(nu) {
        if parts.is_empty() || parts.iter().any(|&x| x == 0) || parts.iter().sum::<u64>() != *m {
            return Err(Error::NotRefinement);
        }
    }
    for q in prime_factors(mu.iter().product::<u64>() * r2) {
        if c % q != 0 {
            return Err(Error::BadBase { base: c, missing_prime: q });
        }
    }
    // Scale factors of the term ratio.
    let w: u64 = mu.iter().map(|&m| m.pow(m as u32)).product();
    let v: u64 = nu.iter().flatten().map(|&x| x.pow(x as u32)).product();
    let num = c as u128 * v as u128 * r1 as u128;
    let den = w as u128 * r2 as u128;
    let target = upsilon_target(mu, nu, r1, r2);
    if num % den == 0 {
        // Direct: f(n) = sum_l M(l) c^{n-l} F^l over 0 <= l <= n.
        let fmult = u64::try_from(num / den).expect("ratio fits u64");
        let chain_c = power_chain_len(c);
        let chain_f = if fmult > 1 { power_chain_len(fmult) } else { 0 };
        let d = 1 + chain_c + chain_f;
        let lv = AffineForm::var(d, 0, 1);
        let mut factors: Vec<(AffineForm, AffineForm)> = Vec::new();
        factors.push((lv.clone(), lv.clone())); // l >= 0
        factors.push((AffineForm::n_term(d, 1).sub(&lv), AffineForm::n_term(d, 1).sub(&lv))); // l <= n
        push_multinomials(mu, nu, &lv, &mut factors);
        let mut next = 1usize;
        let mut chain_vars = Vec::new();
        push_power_chain(c, AffineForm::n_term(d, 1).sub(&lv), d, &mut next, &mut factors, &mut chain_vars);
        if fmult > 1 {
            push_power_chain(fmult, lv.clone(), d, &mut next, &mut factors, &mut chain_vars);
        }
        debug_assert_eq!(next, d);
        return Ok(HypoBuild { multisum: BinomialMultiSum::new(d, factors), target, base: c });
    }
    // Residue splitting. c0 = W r2 absorbs the weights exactly (F0 = V r1).
    let c0 = w as u128 * r2 as u128;
    let f0 = v * r1;
    let mut dd = 1u32;
    let mut cpow = c as u128;
    while cpow % c0 != 0 {
        dd += 1;
        cpow = cpow.checked_mul(c as u128).ok_or(Error::BadBase { base: c, missing_prime: 0 })?;
    }
    let ratio_pow = u64::try_from(cpow / c0).expect("power ratio fits u64");
    let c0 = u64::try_from(c0).expect("weight product fits u64");
    let chains = power_chain_len(c)
        + if ratio_pow > 1 { power_chain_len(ratio_pow) } else { 0 }
        + power_chain_len(c0)
        + if f0 > 1 { power_chain_len(f0) } else { 0 };
    let d = 3 + chains;
    let jv = AffineForm::var(d, 0, 1);
    let tv = AffineForm::var(d, 1, 1);
    let lv = AffineForm::var(d, 2, 1);
    let nf = AffineForm::n_term(d, 1);
    let mut factors: Vec<(AffineForm, AffineForm)> = Vec::new();
    // 0 <= j < dd and n = dd t + j (forcing t = n div dd, j = n mod dd).
    factors.push((jv.clone(), jv.clone()));
    factors.push((jv.scaled_add(-2, &jv).add_const(dd as i64 - 1), jv.scaled_add(-2, &jv).add_const(dd as i64 - 1)));
    let residue = nf.scaled_add(-(dd as i64), &tv).sub(&jv); // n - dd t - j
    factors.push((residue.clone(), residue.clone()));
    factors.push((residue.scaled_add(-2, &residue), residue.scaled_add(-2, &residue)));
    // 0 <= l <= t.
    factors.push((lv.clone(), lv.clone()));
    factors.push((tv.sub(&lv), tv.sub(&lv)));
    push_multinomials(mu, nu, &lv, &mut factors);
    let mut next = 3usize;
    let mut chain_vars = Vec::new();
    push_power_chain(c, jv, d, &mut next, &mut factors, &mut chain_vars);
    if ratio_pow > 1 {
        push_power_chain(ratio_pow, tv.clone(), d, &mut next, &mut factors, &mut chain_vars);
    }
    push_power_chain(c0, tv.sub(&lv), d, &mut next, &mut factors, &mut chain_vars);
    if f0 > 1 {
        push_power_chain(f0, lv, d, &mut next, &mut factors, &mut chain_vars);
    }
    debug_assert_eq!(next, d);
    Ok(HypoBuild { multisum: BinomialMultiSum::new(d, factors), target, base: c })
}

// ---------------------------------------------------------------------------
// Near-Catalan construction
// ---------------------------------------------------------------------------

pub struct CatApprox {
    pub multisum: BinomialMultiSum,
    pub shift: u64,
    pub multiplier: u64,
}

/// The three-part sum `f1 + f2 + f3` with `f(n) ~ (3 sqrt(3)/pi) C_n`, as a
/// single multisum over (v, t, z):
/// `sum binom(2-t,2-t) binom(t,t) binom(2t,z) binom(n-t,3v) binom(3v,n-t)
/// binom(2v,v)^3`.
pub fn cat3_multisum() -> BinomialMultiSum {
    let d = 3;
    let (v, t, z) = (0usize, 1usize, 2usize);
    let vv = |idx: usize, s: i64| AffineForm::var(d, idx, s);
    let n_minus_t = AffineForm::n_term(d, 1).scaled_add(-1, &vv(t, 1));
    BinomialMultiSum::new(
        d,
        vec![
            (vv(t, -1).add_const(2), vv(t, -1).add_const(2)), // t <= 2
            (vv(t, 1), vv(t, 1)),                             // t >= 0
            (vv(t, 2), vv(z, 1)),                             // sum_z binom(2t, z) = 4^t
            (n_minus_t.clone(), vv(v, 3)),
            (vv(v, 3), n_minus_t),
            (vv(v, 2), vv(v, 1)),
            (vv(v, 2), vv(v, 1)),
            (vv(v, 2), vv(v, 1)),
        ],
    )
}

/// Choose the smallest shift i, then the smallest integer m, with
/// `|m xi / 4^i - 1| < epsilon` for `xi = 3 sqrt(3) / pi`, certified by
/// interval arithmetic, and return `m * f(n - i)`.
pub fn cat_approx(epsilon: &Rat) -> CatApprox {
    assert!(epsilon > &Rat::zero());
    let mut terms = 24usize;
    loop {
        let (xlo, xhi) = hyper::xi_interval(terms);
        // Smallest i with xi / 4^i < epsilon (using the upper bound).
        let mut i = 0u64;
        let mut pow4 = Rat::from_integer(1.into());
        while &xhi / &pow4 >= *epsilon {
            i += 1;
            pow4 *= rat_int(4);
        }
        // Smallest m with the certified inequality.
        let target_lo = (Rat::from_integer(1.into()) - epsilon) * &pow4;
        let target_hi = (Rat::from_integer(1.into()) + epsilon) * &pow4;
        let m_min = (&target_lo / &xlo).floor().to_integer().max(1.into());
        let mut m = m_min.clone();
        let mut found: Option<u64> = None;
        for _ in 0..8 {
            let mr = Rat::from_integer(m.clone());
            if &mr * &xlo > target_lo && &mr * &xhi < target_hi {
                found = m.to_u64();
                break;
            }
            m += 1;
        }
        if let Some(m) = found {
            let base = cat3_multisum().shift_n(i as i64);
            let d = base.d;
            let mut factors = base.factors.clone();
            factors.push((AffineForm::constant_form(d, m as i64), AffineForm::constant_form(d, 1)));
            return CatApprox { multisum: BinomialMultiSum::new(d, factors), shift: i, multiplier: m };
        }
        terms *= 2;
    }
}
