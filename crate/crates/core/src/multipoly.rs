//! Sparse multivariate polynomials with I-degrees and p-weight degrees.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FqElem};
use crate::unipoly::UniPoly;
use crate::weights::digit_sum;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Term {
    #[serde(rename = "c")]
    pub coeff: FqElem,
    #[serde(rename = "e")]
    pub exps: Vec<u32>,
}

/// Terms have nonzero coefficients, distinct exponent vectors, and are kept in
/// lexicographic order of exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MultiPoly {
    #[serde(rename = "n")]
    n_vars: usize,
    terms: Vec<Term>,
}

/// `deg_I` value; the zero polynomial sits below every integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IDegree {
    NegInfinity,
    Finite(u64),
}

impl IDegree {
    pub fn finite(self) -> Option<u64> {
        match self {
            IDegree::Finite(d) => Some(d),
            IDegree::NegInfinity => None,
        }
    }
}

impl PartialOrd for IDegree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IDegree {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (IDegree::NegInfinity, IDegree::NegInfinity) => Ordering::Equal,
            (IDegree::NegInfinity, _) => Ordering::Less,
            (_, IDegree::NegInfinity) => Ordering::Greater,
            (IDegree::Finite(a), IDegree::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for IDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IDegree::NegInfinity => f.write_str("-inf"),
            IDegree::Finite(d) => write!(f, "{d}"),
        }
    }
}

impl Serialize for IDegree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IDegree::NegInfinity => serializer.serialize_str("-inf"),
            IDegree::Finite(d) => serializer.serialize_u64(*d),
        }
    }
}

/// Nonempty subset of `{1, ..., n}`, stored 0-based and sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    members: Vec<usize>,
}

impl IndexSet {
    /// From 1-based indices.
    pub fn new(one_based: &[usize], n: usize) -> Result<Self> {
        if one_based.is_empty() {
            return Err(Error::BadIndexSet("empty".into()));
        }
        let mut members = Vec::with_capacity(one_based.len());
        for &i in one_based {
            if i == 0 || i > n {
                return Err(Error::BadIndexSet(format!("index {i} outside 1..={n}")));
            }
            members.push(i - 1);
        }
        members.sort_unstable();
        members.dedup();
        Ok(IndexSet { members })
    }

    pub fn full(n: usize) -> Self {
        IndexSet { members: (0..n).collect() }
    }

    /// Every nonempty subset of `{1..n}`, by size and then lexicographically.
    pub fn all_nonempty(n: usize) -> Vec<IndexSet> {
        let mut out: Vec<IndexSet> = (1u64..(1u64 << n))
            .map(|mask| IndexSet {
                members: (0..n).filter(|i| mask >> i & 1 == 1).collect(),
            })
            .collect();
        out.sort_by(|a, b| a.members.len().cmp(&b.members.len()).then(a.members.cmp(&b.members)));
        out
    }

    /// 0-based members.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.members.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn is_full(&self, n: usize) -> bool {
        self.members.len() == n
    }

    fn check(&self, n: usize) -> Result<()> {
        match self.members.last() {
            Some(&m) if m < n => Ok(()),
            Some(&m) => Err(Error::BadIndexSet(format!("index {} outside 1..={n}", m + 1))),
            None => Err(Error::BadIndexSet("empty".into())),
        }
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(serializer)
    }
}

impl MultiPoly {
    /// Merges duplicate exponent vectors and drops zero coefficients.
    pub fn new(ctx: &FieldCtx, n_vars: usize, terms: Vec<(FqElem, Vec<u32>)>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<u32>, FqElem> = BTreeMap::new();
        for (c, e) in terms {
            if e.len() != n_vars {
                return Err(Error::ArityMismatch { expected: n_vars, found: e.len() });
            }
            if c.0 as u64 >= ctx.q() {
                return Err(Error::ElementOutOfRange { value: c.0 as u64, q: ctx.q() });
            }
            let slot = merged.entry(e).or_insert(FqElem::ZERO);
            *slot = ctx.add(*slot, c);
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exps, coeff)| Term { coeff, exps })
            .collect();
        Ok(MultiPoly { n_vars, terms })
    }

    pub fn zero(n_vars: usize) -> Self {
        MultiPoly { n_vars, terms: Vec::new() }
    }

    pub fn constant(ctx: &FieldCtx, n_vars: usize, c: FqElem) -> Result<Self> {
        Self::new(ctx, n_vars, vec![(c, vec![0; n_vars])])
    }

    /// `sum_i a_i t_i - b`.
    pub fn linear(ctx: &FieldCtx, coeffs: &[FqElem], b: FqElem) -> Result<Self> {
        let n = coeffs.len();
        let mut terms: Vec<(FqElem, Vec<u32>)> = coeffs
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let mut e = vec![0; n];
                e[i] = 1;
                (a, e)
            })
            .collect();
        terms.push((ctx.neg(b), vec![0; n]));
        Self::new(ctx, n, terms)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_i(&self, index: &IndexSet) -> Result<IDegree> {
        index.check(self.n_vars)?;
        Ok(self
            .terms
            .iter()
            .map(|t| IDegree::Finite(index.members().iter().map(|&i| t.exps[i] as u64).sum()))
            .max()
            .unwrap_or(IDegree::NegInfinity))
    }

    pub fn total_degree(&self) -> IDegree {
        self.terms
            .iter()
            .map(|t| IDegree::Finite(t.exps.iter().map(|&e| e as u64).sum()))
            .max()
            .unwrap_or(IDegree::NegInfinity)
    }

    pub fn eval(&self, ctx: &FieldCtx, point: &[FqElem]) -> Result<FqElem> {
        if point.len() != self.n_vars {
            return Err(Error::ArityMismatch { expected: self.n_vars, found: point.len() });
        }
        Ok(self.eval_unchecked(ctx, point))
    }

    pub(crate) fn eval_unchecked(&self, ctx: &FieldCtx, point: &[FqElem]) -> FqElem {
        // per-variable cache of (exponent, power) pairs seen so far
        let mut cache: Vec<Vec<(u32, FqElem)>> = vec![Vec::new(); self.n_vars];
        let mut acc = FqElem::ZERO;
        for t in &self.terms {
            let mut v = t.coeff;
            for (i, &e) in t.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = match cache[i].iter().find(|(ce, _)| *ce == e) {
                    Some(&(_, pw)) => pw,
                    None => {
                        let pw = ctx.pow(point[i], e as u64);
                        cache[i].push((e, pw));
                        pw
                    }
                };
                v = ctx.mul(v, pw);
                if v.is_zero() {
                    break;
                }
            }
            acc = ctx.add(acc, v);
        }
        acc
    }
}

/// `w_{p,I}(P)`: the largest `sum_{i in I} sigma_p(m_i)` over the terms of `P`.
pub fn w_pi(ctx: &FieldCtx, poly: &MultiPoly, index: &IndexSet) -> Result<u64> {
    index.check(poly.n_vars)?;
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let p = ctx.p();
    let mut best = 0;
    for t in poly.terms() {
        let mut w = 0;
        for &i in index.members() {
            w += digit_sum(t.exps[i] as u64, p)?;
        }
        best = best.max(w);
    }
    Ok(best)
}

/// The representative of degree `< q` with the same evaluation map, using `t^q = t`.
pub fn reduce_function(ctx: &FieldCtx, f: &UniPoly) -> UniPoly {
    let q1 = ctx.q() - 1;
    let mut out = vec![FqElem::ZERO; f.coeffs().len().min(ctx.q() as usize)];
    for (e, c) in f.support() {
        let folded = if e == 0 { 0 } else { ((e as u64 - 1) % q1 + 1) as usize };
        out[folded] = ctx.add(out[folded], c);
    }
    UniPoly::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unipoly::eval_map;

    fn field(p: u64, s: u32) -> FieldCtx {
        FieldCtx::new(p, s, None).unwrap()
    }

    fn one_term(ctx: &FieldCtx, n: usize, terms: &[(u32, &[u32])]) -> MultiPoly {
        MultiPoly::new(
            ctx,
            n,
            terms.iter().map(|&(c, e)| (FqElem(c), e.to_vec())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn normalization() {
        let ctx = field(3, 1);
        let p = one_term(&ctx, 2, &[(1, &[1, 0]), (2, &[1, 0]), (1, &[0, 2])]);
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].exps, vec![0, 2]);
        assert!(matches!(
            MultiPoly::new(&ctx, 2, vec![(FqElem(1), vec![1])]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn i_degrees() {
        let ctx = field(5, 1);
        let p = one_term(&ctx, 3, &[(1, &[2, 1, 0]), (1, &[0, 0, 1])]);
        assert_eq!(p.deg_i(&IndexSet::new(&[1, 2], 3).unwrap()).unwrap(), IDegree::Finite(3));
        assert_eq!(p.deg_i(&IndexSet::new(&[3], 3).unwrap()).unwrap(), IDegree::Finite(1));
        let lin = one_term(&ctx, 3, &[(1, &[1, 0, 0]), (1, &[0, 1, 0]), (1, &[0, 0, 1])]);
        assert_eq!(lin.deg_i(&IndexSet::full(3)).unwrap(), IDegree::Finite(1));
        assert_eq!(MultiPoly::zero(3).deg_i(&IndexSet::full(3)).unwrap(), IDegree::NegInfinity);
        assert!(IDegree::NegInfinity < IDegree::Finite(0));
        assert!(matches!(
            p.deg_i(&IndexSet::full(4)),
            Err(Error::BadIndexSet(_))
        ));
        assert!(IndexSet::new(&[0], 3).is_err());
        assert!(IndexSet::new(&[], 3).is_err());
    }

    #[test]
    fn p_weight_degrees() {
        let f2 = field(2, 1);
        let p = one_term(&f2, 1, &[(1, &[3])]);
        assert_eq!(w_pi(&f2, &p, &IndexSet::full(1)).unwrap(), 2);
        let f3 = field(3, 1);
        let p = one_term(&f3, 2, &[(1, &[4, 1]), (1, &[0, 9])]);
        assert_eq!(w_pi(&f3, &p, &IndexSet::full(2)).unwrap(), 3);
        let small = one_term(&f3, 2, &[(1, &[2, 1]), (2, &[1, 0])]);
        assert_eq!(
            IDegree::Finite(w_pi(&f3, &small, &IndexSet::full(2)).unwrap()),
            small.deg_i(&IndexSet::full(2)).unwrap()
        );
        assert_eq!(w_pi(&f3, &MultiPoly::zero(2), &IndexSet::full(2)), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn evaluation() {
        let f3 = field(3, 1);
        let lin = one_term(&f3, 3, &[(1, &[1, 0, 0]), (1, &[0, 1, 0]), (1, &[0, 0, 1])]);
        assert_eq!(lin.eval(&f3, &[FqElem(1); 3]).unwrap(), FqElem(0));
        assert_eq!(MultiPoly::zero(3).eval(&f3, &[FqElem(2); 3]).unwrap(), FqElem(0));
        let f7 = field(7, 1);
        let p = one_term(&f7, 2, &[(1, &[2, 1])]);
        assert_eq!(p.eval(&f7, &[FqElem(2), FqElem(3)]).unwrap(), FqElem(5));
        assert!(matches!(p.eval(&f7, &[FqElem(2)]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn function_reduction() {
        let f3 = field(3, 1);
        let t3 = UniPoly::monomial(FqElem::ONE, 3);
        assert_eq!(reduce_function(&f3, &t3), UniPoly::identity());
        let f4 = field(2, 2);
        let f = UniPoly::from_reps(&f4, &[0, 1, 0, 0, 1]).unwrap();
        assert!(reduce_function(&f4, &f).is_zero());
        let low = UniPoly::from_reps(&f4, &[1, 2, 3]).unwrap();
        assert_eq!(reduce_function(&f4, &low), low);
        let f9 = field(3, 2);
        let g = UniPoly::from_reps(&f9, &[4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 7, 0, 0, 0, 0, 0, 0, 0, 0, 5]).unwrap();
        let r = reduce_function(&f9, &g);
        assert!(r.degree().unwrap() < 9);
        assert_eq!(eval_map(&f9, &r), eval_map(&f9, &g));
    }

    #[test]
    fn subsets_are_ordered() {
        let all = IndexSet::all_nonempty(3);
        let listed: Vec<Vec<usize>> = all.iter().map(|s| s.one_based()).collect();
        assert_eq!(
            listed,
            vec![vec![1], vec![2], vec![3], vec![1, 2], vec![1, 3], vec![2, 3], vec![1, 2, 3]]
        );
    }
}
