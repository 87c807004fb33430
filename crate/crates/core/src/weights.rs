//! Digit sums, the minimization invariant `omega(f)`, p-weights and Legendre's formula.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::FieldCtx;
use crate::unipoly::UniPoly;

/// Base-`base` expansion of a nonnegative integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitProfile {
    #[serde(serialize_with = "crate::counting::decimal_string")]
    pub value: BigUint,
    pub base: u64,
    /// Least significant first; empty for zero.
    pub digits: Vec<u64>,
    pub sigma: u64,
}

impl DigitProfile {
    pub fn new(value: BigUint, base: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::BadBase(base));
        }
        let b = BigUint::from(base);
        let mut digits = Vec::new();
        let mut v = value.clone();
        while !v.is_zero() {
            let (quot, rem) = v.div_rem(&b);
            digits.push(rem.to_u64().expect("digit below base"));
            v = quot;
        }
        let sigma = digits.iter().sum();
        Ok(DigitProfile { value, base, digits, sigma })
    }
}

/// `sigma_N(M)`, the sum of the base-`N` digits of `M`.
pub fn digit_sum(mut m: u64, base: u64) -> Result<u64> {
    if base < 2 {
        return Err(Error::BadBase(base));
    }
    let mut s = 0;
    while m > 0 {
        s += m % base;
        m /= base;
    }
    Ok(s)
}

pub fn digit_sum_big(m: &BigUint, base: u64) -> Result<u64> {
    Ok(DigitProfile::new(m.clone(), base)?.sigma)
}

/// Distinct positive exponents of the nonzero terms of `f`.
fn positive_exponents(f: &UniPoly) -> Result<Vec<u64>> {
    if f.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    Ok(f.support().filter(|&(m, _)| m > 0).map(|(m, _)| m as u64).collect())
}

/// `omega(f)`: least `sum gamma_l` over `0 <= gamma_l <= q-1` with `sum m_l gamma_l`
/// a positive multiple of `q-1`, read off the written monomials of `f`.
///
/// Constant terms are dropped since they add cost without moving the residue.
/// Unit-cost BFS over `Z/(q-1)` from residue 0; the answer is the shortest
/// nonempty walk back to 0. Such a walk has at most `q-1` steps, so the
/// per-exponent caps `gamma_l <= q-1` never bind.
pub fn omega_invariant(ctx: &FieldCtx, f: &UniPoly) -> Result<u64> {
    let exps = positive_exponents(f)?;
    let modulus = (ctx.q() - 1) as usize;
    let steps: Vec<usize> = exps.iter().map(|&m| (m % modulus as u64) as usize).collect();

    let mut dist = vec![u64::MAX; modulus];
    dist[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(r) = queue.pop_front() {
        for &st in &steps {
            let next = (r + st) % modulus;
            if dist[next] == u64::MAX {
                dist[next] = dist[r] + 1;
                queue.push_back(next);
            }
        }
    }
    // last step lands on 0: come from residue -m_l
    Ok(steps
        .iter()
        .map(|&st| dist[(modulus - st) % modulus])
        .filter(|&d| d != u64::MAX)
        .map(|d| d + 1)
        .min()
        .expect("each step generates a cyclic subgroup containing 0"))
}

/// `w_p(f)`: the largest `sigma_p(m_l)` over the monomials of `f`.
pub fn p_weight(ctx: &FieldCtx, f: &UniPoly) -> Result<u64> {
    if f.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let mut best = 0;
    for (m, _) in f.support() {
        best = best.max(digit_sum(m as u64, ctx.p())?);
    }
    Ok(best)
}

/// `ord_p(m!) = (m - sigma_p(m)) / (p - 1)`.
pub fn ord_p_factorial(m: u64, p: u64) -> Result<u64> {
    Ok((m - digit_sum(m, p)?) / (p - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FqElem;
    use num_integer::Integer;

    fn field(p: u64, s: u32) -> FieldCtx {
        FieldCtx::new(p, s, None).unwrap()
    }

    fn sparse(ctx: &FieldCtx, exps: &[usize]) -> UniPoly {
        let top = *exps.iter().max().unwrap();
        let mut c = vec![0u64; top + 1];
        for &e in exps {
            c[e] = 1;
        }
        UniPoly::from_reps(ctx, &c).unwrap()
    }

    #[test]
    fn digit_sums() {
        assert_eq!(digit_sum(5, 2).unwrap(), 2);
        assert_eq!(digit_sum(0, 7).unwrap(), 0);
        let prof = DigitProfile::new(BigUint::from(80u32), 3).unwrap();
        assert_eq!(prof.digits, vec![2, 2, 2, 2]);
        assert_eq!(prof.sigma, 8);
        assert_eq!(digit_sum(1, 1), Err(Error::BadBase(1)));
    }

    #[test]
    fn omega_of_monomials() {
        for (p, s) in [(2, 2), (3, 2), (5, 1), (7, 1), (2, 4)] {
            let ctx = field(p, s);
            let q1 = ctx.q() - 1;
            for m in 1..2 * ctx.q() {
                let f = UniPoly::monomial(FqElem::ONE, m as usize);
                assert_eq!(omega_invariant(&ctx, &f).unwrap(), q1 / m.gcd(&q1));
            }
        }
    }

    #[test]
    fn omega_examples() {
        let ctx = field(5, 1);
        // t^{q-1} + t
        assert_eq!(omega_invariant(&ctx, &sparse(&ctx, &[4, 1])).unwrap(), 1);
        assert_eq!(
            omega_invariant(&ctx, &UniPoly::constant(FqElem(2))),
            Err(Error::ConstantPolynomial)
        );
        let f81 = field(3, 4);
        // 3a + 2b = 80 with a = 26, b = 1
        assert_eq!(omega_invariant(&f81, &sparse(&f81, &[0, 2, 3])).unwrap(), 27);
        // 13*6 + 1*2 = 80
        assert_eq!(omega_invariant(&f81, &sparse(&f81, &[1, 11, 13])).unwrap(), 8);
    }

    #[test]
    fn p_weights() {
        let f2 = field(2, 1);
        assert_eq!(p_weight(&f2, &sparse(&f2, &[1, 3])).unwrap(), 2);
        let f3 = field(3, 1);
        assert_eq!(p_weight(&f3, &sparse(&f3, &[1, 11, 13])).unwrap(), 3);
        assert_eq!(p_weight(&f3, &sparse(&f3, &[7])).unwrap(), digit_sum(7, 3).unwrap());
        assert_eq!(p_weight(&f3, &UniPoly::zero()), Err(Error::ConstantPolynomial));
    }

    #[test]
    fn legendre() {
        assert_eq!(ord_p_factorial(4, 2).unwrap(), 3);
        assert_eq!(ord_p_factorial(9, 3).unwrap(), 4);
        assert_eq!(ord_p_factorial(10, 5).unwrap(), 2);
        assert_eq!(ord_p_factorial(0, 5).unwrap(), 0);
    }
}
