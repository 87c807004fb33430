//! Univariate polynomials over `F_q` and the invariants of their evaluation maps:
//! value sets, fiber sizes, power sums, `u(f)`, `C(f)` and WSC classification.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::NatOrInf;
use crate::gf::{FieldCtx, FqElem};
use crate::multipoly::{IDegree, MultiPoly};
use crate::weights;

/// Dense coefficients, lowest degree first, trailing zeros trimmed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct UniPoly {
    coeffs: Vec<FqElem>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<FqElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    /// From integer encodings, rejecting any outside `[0, q)`.
    pub fn from_reps(ctx: &FieldCtx, reps: &[u64]) -> Result<Self> {
        let coeffs = reps.iter().map(|&r| ctx.elem(r)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: FqElem) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `t`.
    pub fn identity() -> Self {
        Self::monomial(FqElem::ONE, 1)
    }

    pub fn monomial(c: FqElem, m: usize) -> Self {
        let mut coeffs = vec![FqElem::ZERO; m + 1];
        coeffs[m] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    pub fn reps(&self) -> Vec<u64> {
        self.coeffs.iter().map(|c| c.0 as u64).collect()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// `(exponent, coefficient)` for every nonzero coefficient, increasing exponent.
    pub fn support(&self) -> impl Iterator<Item = (usize, FqElem)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, &c)| (i, c))
    }

    /// `Some(m)` when the polynomial is exactly `t^m` with `m >= 1`.
    pub fn monomial_exponent(&self) -> Option<u64> {
        let mut support = self.support();
        match (support.next(), support.next()) {
            (Some((m, c)), None) if m >= 1 && c == FqElem::ONE => Some(m as u64),
            _ => None,
        }
    }

    pub fn eval(&self, ctx: &FieldCtx, x: FqElem) -> FqElem {
        self.coeffs
            .iter()
            .rev()
            .fold(FqElem::ZERO, |acc, &c| ctx.add(ctx.mul(acc, x), c))
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![FqElem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = ctx.add(out[i + j], ctx.mul(a, b));
            }
        }
        UniPoly::new(out)
    }

    /// Formal derivative.
    pub fn derivative(&self, ctx: &FieldCtx) -> UniPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| ctx.mul_int(c, i as u64))
            .collect();
        UniPoly::new(coeffs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Permutation,
    Wsc,
    WeaklyWscOnly,
    NotWeaklyWsc,
}

impl Classification {
    /// WSC in the sense `u(f) = #f(F_q) - 1`; permutations included.
    pub fn is_wsc(self) -> bool {
        matches!(self, Classification::Permutation | Classification::Wsc)
    }

    pub fn is_weakly_wsc(self) -> bool {
        self != Classification::NotWeaklyWsc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UInvariant {
    pub u: NatOrInf,
    /// `C(f) = sum_x f(x)^u`, present iff `u` is finite.
    pub c: Option<FqElem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WscVerdict {
    pub classification: Classification,
    /// The common value of `e(y) phi'(y)` when it is a nonzero constant.
    pub certificate: Option<FqElem>,
}

/// Everything the divisibility theorems need to know about one `f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FAnalysis {
    pub value_set: Vec<FqElem>,
    pub fibers: BTreeMap<FqElem, u64>,
    pub u: NatOrInf,
    pub c: Option<FqElem>,
    pub classification: Classification,
    pub certificate: Option<FqElem>,
    /// `None` for constant `f`.
    pub omega: Option<u64>,
    pub p_weight: Option<u64>,
    pub degree: Option<usize>,
    /// `Some(m)` when `f = t^m`.
    pub monomial_exponent: Option<u64>,
}

impl FAnalysis {
    pub fn value_set_size(&self) -> u64 {
        self.value_set.len() as u64
    }
}

/// `f(x)` for every `x`, in increasing encoding order of `x`.
pub fn eval_map(ctx: &FieldCtx, f: &UniPoly) -> Vec<FqElem> {
    ctx.elements().map(|x| f.eval(ctx, x)).collect()
}

/// `y -> e(y) = #{x : f(x) = y}` over the value set.
pub fn fibers(ctx: &FieldCtx, f: &UniPoly) -> BTreeMap<FqElem, u64> {
    let mut out = BTreeMap::new();
    for y in eval_map(ctx, f) {
        *out.entry(y).or_insert(0) += 1;
    }
    out
}

pub fn value_set(ctx: &FieldCtx, f: &UniPoly) -> Vec<FqElem> {
    fibers(ctx, f).into_keys().collect()
}

/// `sum_{x in F_q} f(x)^delta`, with `0^0 = 1`.
pub fn power_sum(ctx: &FieldCtx, f: &UniPoly, delta: u64) -> FqElem {
    ctx.sum(eval_map(ctx, f).into_iter().map(|y| ctx.pow(y, delta)))
}

fn u_from_fibers(ctx: &FieldCtx, fibers: &BTreeMap<FqElem, u64>) -> UInvariant {
    // For delta >= 1 the zero fiber contributes nothing, and each nonzero y
    // contributes e(y) y^delta with e(y) read mod p.
    let weighted: Vec<(FqElem, u64)> = fibers
        .iter()
        .filter(|(y, &e)| !y.is_zero() && e % ctx.p() != 0)
        .map(|(&y, &e)| (y, e % ctx.p()))
        .collect();
    if weighted.is_empty() {
        return UInvariant { u: NatOrInf::Infinite, c: None };
    }
    // Power sums are (q-1)-periodic in delta >= 1, so scanning one period
    // decides whether u is finite.
    let mut powers: Vec<FqElem> = weighted.iter().map(|&(y, _)| y).collect();
    for delta in 1..ctx.q() {
        let sum = ctx.sum(
            powers
                .iter()
                .zip(&weighted)
                .map(|(&pw, &(_, e))| ctx.mul_int(pw, e)),
        );
        if !sum.is_zero() {
            return UInvariant { u: NatOrInf::Finite(delta), c: Some(sum) };
        }
        for (pw, &(y, _)) in powers.iter_mut().zip(&weighted) {
            *pw = ctx.mul(*pw, y);
        }
    }
    UInvariant { u: NatOrInf::Infinite, c: None }
}

/// Least `delta >= 1` with a nonzero power sum, and that sum `C(f)`.
pub fn u_invariant(ctx: &FieldCtx, f: &UniPoly) -> UInvariant {
    u_from_fibers(ctx, &fibers(ctx, f))
}

/// `phi(t) = prod_{y in Y} (t - y)`.
pub fn phi_from_set(ctx: &FieldCtx, ys: &[FqElem]) -> UniPoly {
    ys.iter().fold(UniPoly::constant(FqElem::ONE), |acc, &y| {
        acc.mul(ctx, &UniPoly::new(vec![ctx.neg(y), FqElem::ONE]))
    })
}

/// `phi` over the value set of `f`, and `phi'` evaluated on the value set.
pub fn phi_pair(ctx: &FieldCtx, f: &UniPoly) -> (UniPoly, BTreeMap<FqElem, FqElem>) {
    let ys = value_set(ctx, f);
    let phi = phi_from_set(ctx, &ys);
    let dphi = phi.derivative(ctx);
    let at = ys.iter().map(|&y| (y, dphi.eval(ctx, y))).collect();
    (phi, at)
}

fn certificate_from(ctx: &FieldCtx, fibers: &BTreeMap<FqElem, u64>) -> Option<FqElem> {
    let ys: Vec<FqElem> = fibers.keys().copied().collect();
    let dphi = phi_from_set(ctx, &ys).derivative(ctx);
    let mut common = None;
    for (&y, &e) in fibers {
        let v = ctx.mul_int(dphi.eval(ctx, y), e);
        if v.is_zero() {
            return None;
        }
        match common {
            None => common = Some(v),
            Some(c) if c != v => return None,
            Some(_) => {}
        }
    }
    common
}

fn classify(
    ctx: &FieldCtx,
    fibers: &BTreeMap<FqElem, u64>,
    u: &UInvariant,
) -> Result<WscVerdict> {
    let image = fibers.len() as u64;
    let classification = match u.u {
        NatOrInf::Infinite => Classification::NotWeaklyWsc,
        NatOrInf::Finite(v) if v == ctx.q() - 1 => Classification::Permutation,
        NatOrInf::Finite(v) if v == image - 1 => Classification::Wsc,
        NatOrInf::Finite(_) => Classification::WeaklyWscOnly,
    };

    let certificate = certificate_from(ctx, fibers);
    if certificate.is_some() != classification.is_wsc() {
        return Err(Error::InternalInconsistency(format!(
            "classification {classification:?} disagrees with e(y)phi'(y) certificate {certificate:?}"
        )));
    }
    if certificate.is_some() && certificate != u.c {
        return Err(Error::InternalInconsistency(format!(
            "certificate constant {certificate:?} differs from C(f) = {:?}",
            u.c
        )));
    }
    let all_fibers_divisible = fibers.values().all(|&e| e % ctx.p() == 0);
    if all_fibers_divisible != (classification == Classification::NotWeaklyWsc) {
        return Err(Error::InternalInconsistency(format!(
            "fiber divisibility {all_fibers_divisible} disagrees with classification {classification:?}"
        )));
    }
    if (classification == Classification::Permutation) != (image == ctx.q()) {
        return Err(Error::InternalInconsistency(format!(
            "u = q - 1 disagrees with image size {image}"
        )));
    }
    if let NatOrInf::Finite(v) = u.u {
        if v > image - 1 {
            return Err(Error::InternalInconsistency(format!(
                "u = {v} exceeds #f(F_q) - 1 = {}",
                image - 1
            )));
        }
    }
    Ok(WscVerdict { classification, certificate })
}

/// Classification by definition, cross-checked against the `e(y) phi'(y)` certificate.
pub fn wsc_classify(ctx: &FieldCtx, f: &UniPoly) -> Result<WscVerdict> {
    let fib = fibers(ctx, f);
    let u = u_from_fibers(ctx, &fib);
    classify(ctx, &fib, &u)
}

pub fn analyze(ctx: &FieldCtx, f: &UniPoly) -> Result<FAnalysis> {
    let fib = fibers(ctx, f);
    let u = u_from_fibers(ctx, &fib);
    let verdict = classify(ctx, &fib, &u)?;
    let (omega, p_weight) = if f.is_constant() {
        (None, None)
    } else {
        (
            Some(weights::omega_invariant(ctx, f)?),
            Some(weights::p_weight(ctx, f)?),
        )
    };
    Ok(FAnalysis {
        value_set: fib.keys().copied().collect(),
        fibers: fib,
        u: u.u,
        c: u.c,
        classification: verdict.classification,
        certificate: verdict.certificate,
        omega,
        p_weight,
        degree: f.degree(),
        monomial_exponent: f.monomial_exponent(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WeightedSumOutcome {
    pub sum: FqElem,
    /// `(q-1) sum deg(P_j) < sum (#Y_i - 1)`.
    pub hypothesis_holds: bool,
    pub zero_set_size: u64,
}

/// `sum_{y in V_Y} 1 / prod_i phi_i'(y_i)` where `V_Y` is the common zero set
/// of the `P_j` inside `Y_1 x ... x Y_n`.
pub fn auxprop_weighted_sum(
    ctx: &FieldCtx,
    p_list: &[MultiPoly],
    y_list: &[Vec<FqElem>],
    budget: u64,
) -> Result<WeightedSumOutcome> {
    let n = y_list.len();
    let mut total_degree = 0u64;
    for p in p_list {
        if p.n_vars() != n {
            return Err(Error::ArityMismatch { expected: n, found: p.n_vars() });
        }
        match p.total_degree() {
            IDegree::NegInfinity => return Err(Error::ZeroPolynomial),
            IDegree::Finite(d) => total_degree += d,
        }
    }
    let mut ys: Vec<Vec<FqElem>> = Vec::with_capacity(n);
    for (i, y) in y_list.iter().enumerate() {
        let mut y = y.clone();
        y.sort();
        y.dedup();
        if y.is_empty() {
            return Err(Error::EmptySubset(i));
        }
        ys.push(y);
    }
    let required = ys
        .iter()
        .try_fold(1u64, |acc, y| acc.checked_mul(y.len() as u64));
    match required {
        Some(r) if r <= budget => {}
        _ => {
            return Err(Error::BudgetExceeded {
                required: ys.iter().map(|y| y.len().to_string()).collect::<Vec<_>>().join("*"),
                budget,
            })
        }
    }

    // 1/phi_i'(y) for each y in Y_i; phi_i is squarefree so phi_i' never vanishes there.
    let inv_dphi: Vec<Vec<FqElem>> = ys
        .iter()
        .map(|y| {
            let dphi = phi_from_set(ctx, y).derivative(ctx);
            y.iter()
                .map(|&v| ctx.inv(dphi.eval(ctx, v)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let lhs = (ctx.q() - 1) as u128 * total_degree as u128;
    let rhs: u128 = ys.iter().map(|y| (y.len() - 1) as u128).sum();

    let mut sum = FqElem::ZERO;
    let mut zeros = 0u64;
    let mut idx = vec![0usize; n];
    let mut point: Vec<FqElem> = ys.iter().map(|y| y[0]).collect();
    loop {
        if p_list.iter().all(|p| p.eval_unchecked(ctx, &point).is_zero()) {
            zeros += 1;
            let w = idx
                .iter()
                .enumerate()
                .fold(FqElem::ONE, |acc, (i, &k)| ctx.mul(acc, inv_dphi[i][k]));
            sum = ctx.add(sum, w);
        }
        // odometer
        let mut i = 0;
        loop {
            if i == n {
                return Ok(WeightedSumOutcome {
                    sum,
                    hypothesis_holds: lhs < rhs,
                    zero_set_size: zeros,
                });
            }
            idx[i] += 1;
            if idx[i] < ys[i].len() {
                point[i] = ys[i][idx[i]];
                break;
            }
            idx[i] = 0;
            point[i] = ys[i][0];
            i += 1;
        }
    }
}
