//! Exact solution counts for substituted systems
//! `P_j(f_1(x_1), ..., f_n(x_n)) = 0`, plus the diagonal-equation convolution
//! counter and the substituted power-sum identity.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::extended::NatOrInf;
use crate::gf::{FieldCtx, FqElem};
use crate::multipoly::{IDegree, IndexSet, MultiPoly};
use crate::unipoly::{self, FAnalysis, UniPoly};

pub const DEFAULT_BUDGET: u64 = 1 << 32;

/// A field, substitutions `f_1..f_n`, equations `P_1..P_r` and an optional
/// distinguished index set.
#[derive(Debug)]
pub struct SystemInstance {
    ctx: Arc<FieldCtx>,
    f_list: Vec<UniPoly>,
    p_list: Vec<MultiPoly>,
    index_set: Option<IndexSet>,
    analyses: Vec<OnceLock<Result<FAnalysis>>>,
}

impl Clone for SystemInstance {
    fn clone(&self) -> Self {
        SystemInstance {
            ctx: self.ctx.clone(),
            f_list: self.f_list.clone(),
            p_list: self.p_list.clone(),
            index_set: self.index_set.clone(),
            analyses: self.analyses.clone(),
        }
    }
}

impl SystemInstance {
    pub fn new(
        ctx: Arc<FieldCtx>,
        f_list: Vec<UniPoly>,
        p_list: Vec<MultiPoly>,
        index_set: Option<IndexSet>,
    ) -> Result<Self> {
        let n = f_list.len();
        if n == 0 {
            return Err(Error::ArityMismatch { expected: 1, found: 0 });
        }
        if p_list.is_empty() {
            return Err(Error::PreconditionViolated("at least one equation is required".into()));
        }
        for p in &p_list {
            if p.n_vars() != n {
                return Err(Error::ArityMismatch { expected: n, found: p.n_vars() });
            }
        }
        if let Some(i) = &index_set {
            if i.members().iter().any(|&m| m >= n) {
                return Err(Error::BadIndexSet(format!("{:?} exceeds n = {n}", i.one_based())));
            }
        }
        for f in &f_list {
            for &c in f.coeffs() {
                ctx.elem(c.0 as u64)?;
            }
        }
        let analyses = (0..n).map(|_| OnceLock::new()).collect();
        Ok(SystemInstance { ctx, f_list, p_list, index_set, analyses })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn ctx_arc(&self) -> Arc<FieldCtx> {
        self.ctx.clone()
    }

    pub fn n(&self) -> usize {
        self.f_list.len()
    }

    pub fn r(&self) -> usize {
        self.p_list.len()
    }

    pub fn f_list(&self) -> &[UniPoly] {
        &self.f_list
    }

    pub fn p_list(&self) -> &[MultiPoly] {
        &self.p_list
    }

    pub fn index_set(&self) -> Option<&IndexSet> {
        self.index_set.as_ref()
    }

    /// Cached analysis of `f_i` (0-based).
    pub fn analysis(&self, i: usize) -> Result<&FAnalysis> {
        self.analyses[i]
            .get_or_init(|| unipoly::analyze(&self.ctx, &self.f_list[i]))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `Some` when the system is `a_1 x_1^{m_1} + ... + a_n x_n^{m_n} = b`.
    pub fn diagonal_form(&self) -> Option<DiagonalForm> {
        if self.p_list.len() != 1 {
            return None;
        }
        let n = self.n();
        let m = self
            .f_list
            .iter()
            .map(UniPoly::monomial_exponent)
            .collect::<Option<Vec<u64>>>()?;
        let mut a = vec![FqElem::ZERO; n];
        let mut constant = FqElem::ZERO;
        for t in self.p_list[0].terms() {
            let nonzero: Vec<(usize, u32)> =
                t.exps.iter().copied().enumerate().filter(|&(_, e)| e != 0).collect();
            match nonzero.as_slice() {
                [] => constant = t.coeff,
                [(i, 1)] => a[*i] = t.coeff,
                _ => return None,
            }
        }
        if a.iter().any(|c| c.is_zero()) {
            return None;
        }
        Some(DiagonalForm { a, m, b: self.ctx.neg(constant) })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagonalForm {
    pub a: Vec<FqElem>,
    pub m: Vec<u64>,
    pub b: FqElem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Brute,
    Weighted,
    Diagonal,
}

impl fmt::Display for CountMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMethod::Brute => "brute",
            CountMethod::Weighted => "weighted",
            CountMethod::Diagonal => "diagonal",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MethodChoice {
    #[default]
    Auto,
    Brute,
    Weighted,
    Diagonal,
}

impl std::str::FromStr for MethodChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "brute" => Ok(MethodChoice::Brute),
            "weighted" => Ok(MethodChoice::Weighted),
            "diagonal" => Ok(MethodChoice::Diagonal),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountResult {
    #[serde(serialize_with = "decimal_string")]
    pub count: BigUint,
    pub ord_p: NatOrInf,
    pub method: CountMethod,
}

pub(crate) fn decimal_string<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

impl CountResult {
    fn new(count: BigUint, p: u64, method: CountMethod) -> Self {
        let ord_p = ord_p(&count, p);
        CountResult { count, ord_p, method }
    }
}

/// p-adic valuation of a nonnegative integer; infinite for zero.
pub fn ord_p(count: &BigUint, p: u64) -> NatOrInf {
    if count.is_zero() {
        return NatOrInf::Infinite;
    }
    let p = BigUint::from(p);
    let mut v = 0;
    let mut c = count.clone();
    loop {
        let (quot, rem) = c.div_rem(&p);
        if !rem.is_zero() {
            return NatOrInf::Finite(v);
        }
        v += 1;
        c = quot;
    }
}

fn check_budget(sizes: impl Iterator<Item = u64>, budget: u64) -> Result<()> {
    let mut required = BigUint::one();
    for s in sizes {
        required *= s;
    }
    if required > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { required: required.to_str_radix(10), budget });
    }
    Ok(())
}

/// Evaluator for one equation, in the log domain when tables exist.
struct CompiledPoly {
    terms: Vec<(FqElem, Vec<(usize, u64)>)>,
}

impl CompiledPoly {
    fn new(p: &MultiPoly) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|t| {
                let vars = t
                    .exps
                    .iter()
                    .enumerate()
                    .filter(|&(_, &e)| e != 0)
                    .map(|(i, &e)| (i, e as u64))
                    .collect();
                (t.coeff, vars)
            })
            .collect();
        CompiledPoly { terms }
    }

    #[inline]
    fn is_zero_at(&self, ctx: &FieldCtx, point: &[FqElem], logs: &[Option<u64>]) -> bool {
        let order = ctx.q() - 1;
        let mut acc = FqElem::ZERO;
        'terms: for (c, vars) in &self.terms {
            match ctx.log(*c) {
                Some(mut l) if ctx.has_tables() => {
                    for &(i, e) in vars {
                        match logs[i] {
                            Some(li) => l = (l + li * (e % order)) % order,
                            None => continue 'terms,
                        }
                    }
                    acc = ctx.add(acc, ctx.exp(l));
                }
                _ => {
                    let mut v = *c;
                    for &(i, e) in vars {
                        v = ctx.mul(v, ctx.pow(point[i], e));
                    }
                    acc = ctx.add(acc, v);
                }
            }
        }
        acc.is_zero()
    }
}

/// Sum over the product of weighted coordinate lists of the product weight,
/// restricted to common zeros. Partitioned on the first coordinate.
fn weighted_zero_count(ctx: &FieldCtx, lists: &[Vec<(FqElem, u64)>], polys: &[MultiPoly]) -> BigUint {
    let compiled: Vec<CompiledPoly> = polys.iter().map(CompiledPoly::new).collect();
    let n = lists.len();
    let log_of = |y: FqElem| if ctx.has_tables() { ctx.log(y) } else { None };

    let partial: Vec<u128> = lists[0]
        .par_iter()
        .map(|&(y0, w0)| {
            let mut idx = vec![0usize; n];
            let mut point: Vec<FqElem> = lists.iter().map(|l| l[0].0).collect();
            point[0] = y0;
            let mut logs: Vec<Option<u64>> = point.iter().map(|&y| log_of(y)).collect();
            let mut acc = 0u128;
            loop {
                if compiled.iter().all(|c| c.is_zero_at(ctx, &point, &logs)) {
                    let w = (1..n).fold(w0 as u128, |w, i| w * lists[i][idx[i]].1 as u128);
                    acc += w;
                }
                let mut i = 1;
                loop {
                    if i >= n {
                        return acc;
                    }
                    idx[i] += 1;
                    if idx[i] < lists[i].len() {
                        point[i] = lists[i][idx[i]].0;
                        logs[i] = log_of(point[i]);
                        break;
                    }
                    idx[i] = 0;
                    point[i] = lists[i][0].0;
                    logs[i] = log_of(point[i]);
                    i += 1;
                }
            }
        })
        .collect();
    partial.into_iter().map(BigUint::from).sum()
}

/// Enumerates all of `F_q^n`.
pub fn count_bruteforce(sys: &SystemInstance, budget: u64) -> Result<CountResult> {
    let ctx = sys.ctx();
    check_budget((0..sys.n()).map(|_| ctx.q()), budget)?;
    let lists: Vec<Vec<(FqElem, u64)>> = sys
        .f_list()
        .iter()
        .map(|f| unipoly::eval_map(ctx, f).into_iter().map(|y| (y, 1)).collect())
        .collect();
    let count = weighted_zero_count(ctx, &lists, sys.p_list());
    Ok(CountResult::new(count, ctx.p(), CountMethod::Brute))
}

/// Enumerates the product of value sets, weighting each point by its fiber sizes.
pub fn count_weighted(sys: &SystemInstance, budget: u64) -> Result<CountResult> {
    let ctx = sys.ctx();
    let lists: Vec<Vec<(FqElem, u64)>> = (0..sys.n())
        .map(|i| {
            sys.analysis(i)
                .map(|a| a.fibers.iter().map(|(&y, &e)| (y, e)).collect())
        })
        .collect::<Result<_>>()?;
    check_budget(lists.iter().map(|l| l.len() as u64), budget)?;
    let count = weighted_zero_count(ctx, &lists, sys.p_list());
    Ok(CountResult::new(count, ctx.p(), CountMethod::Weighted))
}

/// Count with the requested method; `Auto` picks weighted enumeration whenever
/// the value-set product is smaller than `q^n`.
pub fn count(sys: &SystemInstance, method: MethodChoice, budget: u64) -> Result<CountResult> {
    match method {
        MethodChoice::Brute => count_bruteforce(sys, budget),
        MethodChoice::Weighted => count_weighted(sys, budget),
        MethodChoice::Diagonal => {
            let d = sys
                .diagonal_form()
                .ok_or_else(|| Error::NotDiagonal("expected one equation sum a_i t_i = b with f_i = t^m_i".into()))?;
            count_diagonal(sys.ctx(), &d.a, &d.m, d.b)
        }
        MethodChoice::Auto => {
            let mut image = BigUint::one();
            for i in 0..sys.n() {
                image *= sys.analysis(i)?.value_set_size();
            }
            let full = BigUint::from(sys.ctx().q()).pow(sys.n() as u32);
            if image < full {
                count_weighted(sys, budget)
            } else {
                count_bruteforce(sys, budget)
            }
        }
    }
}

fn convolve_counts<T>(ctx: &FieldCtx, dists: &[Vec<u64>], b: FqElem) -> T
where
    T: Clone + Zero + From<u64> + std::ops::Mul<Output = T>,
{
    let q = ctx.q() as usize;
    let mut acc: Vec<T> = vec![T::zero(); q];
    acc[0] = T::from(1);
    for d in dists {
        let mut next: Vec<T> = vec![T::zero(); q];
        for (y, ay) in acc.iter().enumerate() {
            if ay.is_zero() {
                continue;
            }
            for (z, &dz) in d.iter().enumerate() {
                if dz == 0 {
                    continue;
                }
                let s = ctx.add(FqElem(y as u32), FqElem(z as u32)).0 as usize;
                next[s] = next[s].clone() + ay.clone() * T::from(dz);
            }
        }
        acc = next;
    }
    acc[b.0 as usize].clone()
}

/// `#{x : a_1 x_1^{m_1} + ... + a_n x_n^{m_n} = b}` by folding the value
/// distributions of each `a_i x^{m_i}` under additive convolution.
pub fn count_diagonal(ctx: &FieldCtx, a: &[FqElem], m: &[u64], b: FqElem) -> Result<CountResult> {
    if a.len() != m.len() {
        return Err(Error::ArityMismatch { expected: a.len(), found: m.len() });
    }
    if let Some(i) = a.iter().position(|c| c.is_zero()) {
        return Err(Error::ZeroCoefficient(i));
    }
    let q = ctx.q() as usize;
    let dists: Vec<Vec<u64>> = a
        .iter()
        .zip(m)
        .map(|(&ai, &mi)| {
            let mut d = vec![0u64; q];
            for x in ctx.elements() {
                d[ctx.mul(ai, ctx.pow(x, mi)).0 as usize] += 1;
            }
            d
        })
        .collect();
    let bits = (ctx.q() as f64).log2() * a.len() as f64;
    let count = if bits < 120.0 {
        BigUint::from(convolve_counts::<u128>(ctx, &dists, b))
    } else {
        convolve_counts::<BigUint>(ctx, &dists, b)
    };
    Ok(CountResult::new(count, ctx.p(), CountMethod::Diagonal))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PowerSumOutcome {
    pub sum: FqElem,
    /// `deg_I(P) < sum_{i in I} u(f_i)`, with an infinite `u` always satisfying it.
    pub hypothesis_holds: bool,
}

/// `sum_{x in F_q^n} P(f_1(x_1), ..., f_n(x_n))` computed monomial by monomial
/// as products of univariate power sums.
pub fn amazing_lemma_sum(
    ctx: &FieldCtx,
    poly: &MultiPoly,
    f_list: &[UniPoly],
    index: &IndexSet,
) -> Result<PowerSumOutcome> {
    let n = f_list.len();
    if poly.n_vars() != n {
        return Err(Error::ArityMismatch { expected: n, found: poly.n_vars() });
    }
    let mut cache: HashMap<(usize, u32), FqElem> = HashMap::new();
    let mut sum = FqElem::ZERO;
    for t in poly.terms() {
        let mut v = t.coeff;
        for (i, &e) in t.exps.iter().enumerate() {
            let ps = *cache
                .entry((i, e))
                .or_insert_with(|| unipoly::power_sum(ctx, &f_list[i], e as u64));
            v = ctx.mul(v, ps);
            if v.is_zero() {
                break;
            }
        }
        sum = ctx.add(sum, v);
    }
    let hypothesis_holds = match poly.deg_i(index)? {
        IDegree::NegInfinity => true,
        IDegree::Finite(d) => {
            let mut total = 0u64;
            let mut infinite = false;
            for &i in index.members() {
                match unipoly::u_invariant(ctx, &f_list[i]).u {
                    NatOrInf::Finite(u) => total += u,
                    NatOrInf::Infinite => infinite = true,
                }
            }
            infinite || d < total
        }
    };
    Ok(PowerSumOutcome { sum, hypothesis_holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64, s: u32) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::new(p, s, None).unwrap())
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
    fn single_variable_identity() {
        let ctx = field(5, 1);
        let p = MultiPoly::new(&ctx, 1, vec![(FqElem::ONE, vec![1])]).unwrap();
        let sys = SystemInstance::new(ctx, vec![UniPoly::identity()], vec![p], None).unwrap();
        let r = count_bruteforce(&sys, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.count, BigUint::from(1u32));
        assert_eq!(r.ord_p, NatOrInf::Finite(0));
    }

    #[test]
    fn example_two_count() {
        let ctx = field(3, 4);
        let f1 = sparse(&ctx, &[0, 2, 3]);
        let f3 = sparse(&ctx, &[1, 11, 13]);
        let p = MultiPoly::linear(&ctx, &[FqElem::ONE; 3], FqElem::ZERO).unwrap();
        let sys = SystemInstance::new(ctx, vec![f1.clone(), f1, f3], vec![p], None).unwrap();
        let r = count(&sys, MethodChoice::Auto, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.method, CountMethod::Weighted);
        assert_eq!(r.count, BigUint::from(6669u32));
        assert_eq!(r.ord_p, NatOrInf::Finite(3));
    }

    #[test]
    fn artin_schreier_product_count() {
        // q = 9, P = t1 t2, f1 = t, f2 = t^3 - t
        let ctx = field(3, 2);
        let p = MultiPoly::new(&ctx, 2, vec![(FqElem::ONE, vec![1, 1])]).unwrap();
        let f2 = UniPoly::from_reps(&ctx, &[0, 2, 0, 1]).unwrap();
        let sys = SystemInstance::new(ctx, vec![UniPoly::identity(), f2], vec![p], None).unwrap();
        let brute = count_bruteforce(&sys, DEFAULT_BUDGET).unwrap();
        assert_eq!(brute.count, BigUint::from(33u32));
        assert_eq!(count_weighted(&sys, DEFAULT_BUDGET).unwrap().count, brute.count);
    }

    #[test]
    fn budget_is_enforced() {
        let ctx = field(3, 2);
        let p = MultiPoly::linear(&ctx, &[FqElem::ONE; 4], FqElem::ZERO).unwrap();
        let sys = SystemInstance::new(ctx, vec![UniPoly::identity(); 4], vec![p], None).unwrap();
        match count_bruteforce(&sys, 1000) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(required, "6561");
                assert_eq!(budget, 1000);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diagonal_small_cases() {
        let ctx = field(7, 1);
        for b in ctx.elements() {
            let r = count_diagonal(&ctx, &[FqElem::ONE], &[1], b).unwrap();
            assert_eq!(r.count, BigUint::from(1u32));
        }
        for m in 1..8 {
            let r = count_diagonal(&ctx, &[FqElem(3)], &[m], FqElem::ZERO).unwrap();
            assert_eq!(r.count, BigUint::from(1u32));
        }
        assert_eq!(
            count_diagonal(&ctx, &[FqElem(1), FqElem(0)], &[1, 2], FqElem::ZERO),
            Err(Error::ZeroCoefficient(1))
        );
    }

    #[test]
    fn diagonal_totals() {
        let ctx = field(3, 2);
        let a = [FqElem(1), FqElem(5), FqElem(7)];
        let m = [2, 4, 3];
        let total: BigUint = ctx
            .elements()
            .map(|b| count_diagonal(&ctx, &a, &m, b).unwrap().count)
            .sum();
        assert_eq!(total, BigUint::from(729u32));
    }

    #[test]
    fn diagonal_detection() {
        let ctx = field(5, 1);
        let p = MultiPoly::linear(&ctx, &[FqElem(2), FqElem(3)], FqElem(4)).unwrap();
        let sys = SystemInstance::new(
            ctx.clone(),
            vec![UniPoly::monomial(FqElem::ONE, 2), UniPoly::monomial(FqElem::ONE, 4)],
            vec![p],
            None,
        )
        .unwrap();
        let d = sys.diagonal_form().unwrap();
        assert_eq!(d.m, vec![2, 4]);
        assert_eq!(d.b, FqElem(4));
        let via_diag = count(&sys, MethodChoice::Diagonal, DEFAULT_BUDGET).unwrap();
        let via_brute = count(&sys, MethodChoice::Brute, DEFAULT_BUDGET).unwrap();
        assert_eq!(via_diag.count, via_brute.count);

        let q = MultiPoly::new(&ctx, 2, vec![(FqElem::ONE, vec![1, 1])]).unwrap();
        let sys = SystemInstance::new(ctx, vec![UniPoly::identity(); 2], vec![q], None).unwrap();
        assert!(sys.diagonal_form().is_none());
        assert!(matches!(
            count(&sys, MethodChoice::Diagonal, DEFAULT_BUDGET),
            Err(Error::NotDiagonal(_))
        ));
    }

    #[test]
    fn valuations() {
        assert_eq!(ord_p(&BigUint::from(6669u32), 3), NatOrInf::Finite(3));
        assert_eq!(ord_p(&BigUint::zero(), 7), NatOrInf::Infinite);
        assert_eq!(ord_p(&BigUint::from(9u32).pow(5), 3), NatOrInf::Finite(10));
    }

    #[test]
    fn power_sum_identity_small() {
        let ctx = field(5, 1);
        let p = MultiPoly::new(&ctx, 1, vec![(FqElem::ONE, vec![1])]).unwrap();
        let out = amazing_lemma_sum(&ctx, &p, &[UniPoly::identity()], &IndexSet::full(1)).unwrap();
        assert_eq!(out.sum, FqElem::ZERO);
        assert!(out.hypothesis_holds);
    }

    #[test]
    fn power_sum_identity_monomial_below_u() {
        // f_1 = t^2 over F_7 has u = 3; t_1^2 t_2^5 has m_1 = 2 < 3
        let ctx = field(7, 1);
        let p = MultiPoly::new(&ctx, 2, vec![(FqElem(3), vec![2, 5])]).unwrap();
        let fs = [UniPoly::monomial(FqElem::ONE, 2), UniPoly::identity()];
        let out = amazing_lemma_sum(&ctx, &p, &fs, &IndexSet::new(&[1], 2).unwrap()).unwrap();
        assert!(out.hypothesis_holds);
        assert_eq!(out.sum, FqElem::ZERO);
    }
}
