//! Hypergeometric partial sums and certified rational intervals for the
//! asymptotic target constants. Targets are always derived from defining
//! series at test time, never quoted as decimals.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exactnum::{rat_int, Rat};
use crate::translate::sqrt_enclosure;

/// Descriptor of the limit `A = sum_l prod_{k<l} (prod (k+a)) r / (prod (k+b))`.
#[derive(Clone, Debug)]
pub struct HypoTarget {
    pub upper: Vec<Rat>,
    pub lower: Vec<Rat>,
    pub ratio: Rat,
}

impl HypoTarget {
    /// Exact partial sum of the defining series with `terms` terms.
    pub fn partial_sum(&self, terms: usize) -> Rat {
        let mut sum = Rat::zero();
        let mut term = Rat::one();
        for k in 0..terms {
            sum += &term;
            let kq = rat_int(k as i64);
            let mut num = self.ratio.clone();
            for a in &self.upper {
                num *= &kq + a;
            }
            let mut den = Rat::one();
            for b in &self.lower {
                den *= &kq + b;
            }
            term *= num / den;
        }
        sum
    }
}

/// Exact partial sum of arctan(1/x) with an alternating-series error bound:
/// returns an interval containing the true value.
fn arctan_recip_interval(x: i64, terms: usize) -> (Rat, Rat) {
    let mut sum = Rat::zero();
    let xq = rat_int(x);
    let x2 = &xq * &xq;
    let mut power = xq.clone(); // x^(2k+1)
    for k in 0..terms {
        let term = Rat::one() / (&power * rat_int(2 * k as i64 + 1));
        if k % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        power *= &x2;
    }
    // Alternating with decreasing terms: the truncation error is below the
    // first omitted term and has its sign.
    let next = Rat::one() / (&power * rat_int(2 * terms as i64 + 1));
    if terms % 2 == 0 {
        (sum.clone(), sum + next)
    } else {
        (sum.clone() - next, sum)
    }
}

/// A rational interval certified to contain pi (Machin's formula).
pub fn pi_interval(terms: usize) -> (Rat, Rat) {
    let (a_lo, a_hi) = arctan_recip_interval(5, terms);
    let (b_lo, b_hi) = arctan_recip_interval(239, terms.max(4) / 2);
    let sixteen = rat_int(16);
    let four = rat_int(4);
    (&sixteen * &a_lo - &four * &b_hi, &sixteen * &a_hi - &four * &b_lo)
}

/// A rational interval certified to contain `xi = 3 sqrt(3) / pi`.
pub fn xi_interval(terms: usize) -> (Rat, Rat) {
    let width = Rat::new(BigInt::one(), BigInt::from(1u64 << 20.min(terms as u64)));
    let (s_lo, s_hi) = sqrt_enclosure(&rat_int(3), &width);
    let (p_lo, p_hi) = pi_interval(terms);
    debug_assert!(p_lo.is_positive());
    let three = rat_int(3);
    ((&three * &s_lo) / &p_hi, (&three * &s_hi) / &p_lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use num_traits::ToPrimitive;

    #[test]
    fn pi_interval_brackets() {
        let (lo, hi) = pi_interval(24);
        assert!(lo < hi);
        assert!(lo > rat(311, 100) && hi < rat(315, 100));
        assert!((&hi - &lo) < rat(1, 1_000_000));
    }

    #[test]
    fn xi_interval_value() {
        // 3 sqrt(3)/pi is about 1.6539; certify to a few digits.
        let (lo, hi) = xi_interval(32);
        assert!(lo.to_f64().unwrap() > 1.65 && hi.to_f64().unwrap() < 1.66);
    }

    #[test]
    fn hypergeometric_partial_sums_converge() {
        // Upsilon parameters of mu = (4), nu = (2,1,1) at ratio 1/2; the term
        // ratio collapses to (k+1/4)(k+3/4)/(2(k+1)^2) < 1/2, so the partial
        // sums converge geometrically.
        let t = HypoTarget {
            upper: vec![rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)],
            lower: vec![rat(1, 2), rat(1, 1), rat(1, 1), rat(1, 1)],
            ratio: rat(1, 2),
        };
        let s25 = t.partial_sum(25).to_f64().unwrap();
        let s50 = t.partial_sum(50).to_f64().unwrap();
        let s100 = t.partial_sum(100).to_f64().unwrap();
        assert!(s25 < s50 && s50 <= s100, "partial sums increase");
        assert!((s100 - s50).abs() < 1e-12, "converged: {s50} vs {s100}");
        assert!(s100 > 1.0 && s100 < 2.0);
    }
}
