//! Divisibility guarantees for solution counts of substituted systems, and a
//! harness that confronts each guarantee with the exact count.
//!
//! Every checker reports the inequalities it tested with both sides as exact
//! rationals, and a guaranteed exponent `e` meaning `p^e` divides the count.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::counting::{self, CountResult, MethodChoice, SystemInstance};
use crate::error::{Error, Result};
use crate::extended::NatOrInf;
use crate::gf::{FieldCtx, FieldSpec};
use crate::instance::InstanceFile;
use crate::multipoly::{w_pi, IDegree, IndexSet, MultiPoly};
use crate::random;
use crate::unipoly::Classification;
use crate::weights::digit_sum;

pub const SUBSET_SEARCH_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TheoremId {
    #[serde(rename = "CW")]
    Cw,
    #[serde(rename = "MAIN")]
    Main,
    #[serde(rename = "COR2MAIN")]
    Cor2Main,
    #[serde(rename = "CORMAINNEW")]
    CorMainNew,
    #[serde(rename = "CLASSICALMAIN")]
    ClassicalMain,
    #[serde(rename = "MORLAYE_JOLY")]
    MorlayeJoly,
    #[serde(rename = "AXKATZ")]
    AxKatz,
    #[serde(rename = "WAN")]
    Wan,
    #[serde(rename = "AXKATZ_GENERAL")]
    AxKatzGeneral,
    #[serde(rename = "QDIV")]
    Qdiv,
    #[serde(rename = "AXKATZ_COR1")]
    AxKatzCor1,
    #[serde(rename = "AXKATZ_COR")]
    AxKatzCor,
    #[serde(rename = "MORENO_GENERAL")]
    MorenoGeneral,
    #[serde(rename = "MORENO_COR")]
    MorenoCor,
}

impl TheoremId {
    pub const ALL: [TheoremId; 14] = [
        TheoremId::Cw,
        TheoremId::Main,
        TheoremId::Cor2Main,
        TheoremId::CorMainNew,
        TheoremId::ClassicalMain,
        TheoremId::MorlayeJoly,
        TheoremId::AxKatz,
        TheoremId::Wan,
        TheoremId::AxKatzGeneral,
        TheoremId::Qdiv,
        TheoremId::AxKatzCor1,
        TheoremId::AxKatzCor,
        TheoremId::MorenoGeneral,
        TheoremId::MorenoCor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Cw => "CW",
            TheoremId::Main => "MAIN",
            TheoremId::Cor2Main => "COR2MAIN",
            TheoremId::CorMainNew => "CORMAINNEW",
            TheoremId::ClassicalMain => "CLASSICALMAIN",
            TheoremId::MorlayeJoly => "MORLAYE_JOLY",
            TheoremId::AxKatz => "AXKATZ",
            TheoremId::Wan => "WAN",
            TheoremId::AxKatzGeneral => "AXKATZ_GENERAL",
            TheoremId::Qdiv => "QDIV",
            TheoremId::AxKatzCor1 => "AXKATZ_COR1",
            TheoremId::AxKatzCor => "AXKATZ_COR",
            TheoremId::MorenoGeneral => "MORENO_GENERAL",
            TheoremId::MorenoCor => "MORENO_COR",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact rational or `+inf`; serializes as `{"num":..,"den":..}` or `"inf"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtRational {
    Finite(BigRational),
    Infinite,
}

impl ExtRational {
    pub fn int(v: u64) -> Self {
        ExtRational::Finite(BigRational::from_integer(v.into()))
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinite => None,
        }
    }
}

impl From<BigRational> for ExtRational {
    fn from(r: BigRational) -> Self {
        ExtRational::Finite(r)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => write!(f, "{r}"),
            ExtRational::Infinite => f.write_str("inf"),
        }
    }
}

fn serialize_bigint<M: SerializeMap>(map: &mut M, key: &str, v: &BigInt) -> std::result::Result<(), M::Error> {
    match v.to_i64() {
        Some(small) => map.serialize_entry(key, &small),
        None => map.serialize_entry(key, &v.to_string()),
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtRational::Infinite => serializer.serialize_str("inf"),
            ExtRational::Finite(r) => {
                let mut map = serializer.serialize_map(Some(2))?;
                serialize_bigint(&mut map, "num", r.numer())?;
                serialize_bigint(&mut map, "den", r.denom())?;
                map.end()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "|")]
    Divides,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Divides => "|",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisCheck {
    pub label: String,
    pub lhs: ExtRational,
    pub relation: Relation,
    pub rhs: ExtRational,
    pub holds: bool,
}

impl HypothesisCheck {
    fn new(label: impl Into<String>, lhs: ExtRational, relation: Relation, rhs: ExtRational) -> Self {
        let holds = match relation {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Divides => match (lhs.finite(), rhs.finite()) {
                (Some(a), Some(b)) if a.is_integer() && b.is_integer() && !a.is_zero() => {
                    (b.to_integer() % a.to_integer()).is_zero()
                }
                _ => false,
            },
        };
        HypothesisCheck { label: label.into(), lhs, relation, rhs, holds }
    }
}

impl fmt::Display for HypothesisCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} {} {} ({})", self.label, self.lhs, self.relation, self.rhs, self.holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Guarantee {
    pub theorem_id: TheoremId,
    pub index_set: IndexSet,
    pub applicable: bool,
    pub hypothesis_trace: Vec<HypothesisCheck>,
    pub guaranteed_p_exponent: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Guarantee {
    fn new(theorem_id: TheoremId, index: &IndexSet) -> Self {
        Guarantee {
            theorem_id,
            index_set: index.clone(),
            applicable: false,
            hypothesis_trace: Vec::new(),
            guaranteed_p_exponent: 0,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Records `check`; the guarantee stays applicable only while every check holds.
    fn push(&mut self, check: HypothesisCheck) -> bool {
        let holds = check.holds;
        self.hypothesis_trace.push(check);
        holds
    }

    fn grant(mut self, exponent: u64) -> Self {
        self.applicable = true;
        self.guaranteed_p_exponent = exponent;
        self
    }
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn int(v: u64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// `ceil(x)` clamped below at zero.
fn ceil_nonneg(x: &BigRational) -> u64 {
    let c = x.ceil().to_integer();
    if c.is_negative() {
        0
    } else {
        c.to_u64().expect("exponent fits in u64")
    }
}

fn require_nonzero(sys: &SystemInstance) -> Result<()> {
    if sys.p_list().iter().any(MultiPoly::is_zero) {
        Err(Error::ZeroPolynomial)
    } else {
        Ok(())
    }
}

fn precondition_nonzero(sys: &SystemInstance) -> Result<()> {
    match sys.p_list().iter().position(MultiPoly::is_zero) {
        Some(j) => Err(Error::PreconditionViolated(format!("P_{} is the zero polynomial", j + 1))),
        None => Ok(()),
    }
}

fn precondition_nonconstant(sys: &SystemInstance, index: &IndexSet) -> Result<()> {
    match index.members().iter().find(|&&i| sys.f_list()[i].is_constant()) {
        Some(i) => Err(Error::PreconditionViolated(format!("f_{} is constant", i + 1))),
        None => Ok(()),
    }
}

fn degrees(sys: &SystemInstance, index: &IndexSet) -> Result<Vec<u64>> {
    sys.p_list()
        .iter()
        .map(|p| match p.deg_i(index)? {
            IDegree::Finite(d) => Ok(d),
            IDegree::NegInfinity => Err(Error::ZeroPolynomial),
        })
        .collect()
}

fn positive_max(values: &[u64], what: &str) -> Result<u64> {
    match values.iter().copied().max() {
        Some(m) if m > 0 => Ok(m),
        _ => Err(Error::PreconditionViolated(format!("max {what} over the equations is 0"))),
    }
}

fn f_degree(sys: &SystemInstance, i: usize) -> u64 {
    sys.f_list()[i].degree().unwrap_or(0) as u64
}

/// `gcd(m_i, q-1)` for every `i` in `index` when each such `f_i` is `t^{m_i}`.
fn monomial_gcds(sys: &SystemInstance, index: &IndexSet) -> Option<Vec<u64>> {
    let q1 = sys.ctx().q() - 1;
    index
        .members()
        .iter()
        .map(|&i| sys.f_list()[i].monomial_exponent().map(|m| m.gcd(&q1)))
        .collect()
}

fn sum_reciprocals(values: &[u64]) -> BigRational {
    values.iter().fold(BigRational::zero(), |acc, &v| acc + ratio(1, v))
}

const FULL_ONLY: &str = "statement concerns all variables; evaluated only for I = {1..n}";

pub fn check_cw(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    let g = Guarantee::new(TheoremId::Cw, index);
    if !index.is_full(sys.n()) {
        return Ok(g.with_note(FULL_ONLY));
    }
    require_nonzero(sys)?;
    for i in 0..sys.n() {
        if sys.analysis(i)?.classification != Classification::Permutation {
            return Ok(g.with_note(format!("f_{} is not a permutation polynomial", i + 1)));
        }
    }
    let degs = degrees(sys, index)?;
    let mut g = g;
    let ok = g.push(HypothesisCheck::new(
        "sum deg(P_j) < n",
        ExtRational::int(degs.iter().sum()),
        Relation::Lt,
        ExtRational::int(sys.n() as u64),
    ));
    Ok(if ok { g.grant(1) } else { g })
}

pub fn check_axkatz(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    let g = Guarantee::new(TheoremId::AxKatz, index);
    if !index.is_full(sys.n()) {
        return Ok(g.with_note(FULL_ONLY));
    }
    require_nonzero(sys)?;
    for i in 0..sys.n() {
        if sys.analysis(i)?.classification != Classification::Permutation {
            return Ok(g.with_note(format!("f_{} is not a permutation polynomial", i + 1)));
        }
    }
    let degs = degrees(sys, index)?;
    if let Some(j) = degs.iter().position(|&d| d == 0) {
        return Ok(g.with_note(format!("P_{} has degree 0", j + 1)));
    }
    let total: u64 = degs.iter().sum();
    let n = sys.n() as u64;
    let mut g = g;
    if !g.push(HypothesisCheck::new("sum deg(P_j) < n", ExtRational::int(total), Relation::Lt, ExtRational::int(n))) {
        return Ok(g);
    }
    let max = *degs.iter().max().expect("at least one equation");
    let e = sys.ctx().s() as u64 * ceil_nonneg(&ratio(n - total, max));
    Ok(g.grant(e))
}

pub fn check_main(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    require_nonzero(sys)?;
    let degs = degrees(sys, index)?;
    let q1 = sys.ctx().q() - 1;
    let mut rhs = 0u64;
    let mut infinite = Vec::new();
    for &i in index.members() {
        match sys.analysis(i)?.u {
            NatOrInf::Finite(u) => rhs += u,
            NatOrInf::Infinite => infinite.push(i + 1),
        }
    }
    let rhs = if infinite.is_empty() { ExtRational::int(rhs) } else { ExtRational::Infinite };
    let mut g = Guarantee::new(TheoremId::Main, index);
    if !infinite.is_empty() {
        g.note = Some(format!("not weakly WSC on I: f_{infinite:?}; every fiber has size divisible by p"));
    }
    let ok = g.push(HypothesisCheck::new(
        "(q-1) sum deg_I(P_j) < sum u(f_i)",
        ExtRational::int(q1 * degs.iter().sum::<u64>()),
        Relation::Lt,
        rhs,
    ));
    Ok(if ok { g.grant(1) } else { g })
}

pub fn check_cor2main(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    require_nonzero(sys)?;
    precondition_nonconstant(sys, index)?;
    let degs = degrees(sys, index)?;
    let q1 = sys.ctx().q() - 1;
    let rhs: u64 = index.members().iter().map(|&i| q1.div_ceil(f_degree(sys, i))).sum();
    let mut g = Guarantee::new(TheoremId::Cor2Main, index);
    let ok = g.push(HypothesisCheck::new(
        "(q-1) sum deg_I(P_j) < sum ceil((q-1)/deg f_i)",
        ExtRational::int(q1 * degs.iter().sum::<u64>()),
        Relation::Lt,
        ExtRational::int(rhs),
    ));
    Ok(if ok { g.grant(1) } else { g })
}

pub fn check_cormainnew(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    require_nonzero(sys)?;
    let g = Guarantee::new(TheoremId::CorMainNew, index);
    let mut rhs = 0u64;
    for &i in index.members() {
        let a = sys.analysis(i)?;
        if !a.classification.is_wsc() {
            return Ok(g.with_note(format!("f_{} is not WSC", i + 1)));
        }
        rhs += a.value_set_size() - 1;
    }
    let degs = degrees(sys, index)?;
    let q1 = sys.ctx().q() - 1;
    let mut g = g;
    let ok = g.push(HypothesisCheck::new(
        "(q-1) sum deg_I(P_j) < sum (#f_i(F_q) - 1)",
        ExtRational::int(q1 * degs.iter().sum::<u64>()),
        Relation::Lt,
        ExtRational::int(rhs),
    ));
    Ok(if ok { g.grant(1) } else { g })
}

pub fn check_classicalmain(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    require_nonzero(sys)?;
    let g = Guarantee::new(TheoremId::ClassicalMain, index);
    let Some(ds) = monomial_gcds(sys, index) else {
        return Ok(g.with_note("requires f_i = t^m_i for every i in I"));
    };
    let degs = degrees(sys, index)?;
    let mut g = g;
    let ok = g.push(HypothesisCheck::new(
        "sum deg_I(P_j) < sum 1/d_i",
        ExtRational::int(degs.iter().sum()),
        Relation::Lt,
        sum_reciprocals(&ds).into(),
    ));
    Ok(if ok { g.grant(1) } else { g })
}

fn diagonal_gcds(sys: &SystemInstance) -> Option<Vec<u64>> {
    let q1 = sys.ctx().q() - 1;
    sys.diagonal_form().map(|d| d.m.iter().map(|m| m.gcd(&q1)).collect())
}

pub fn check_morlaye_joly(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    let g = Guarantee::new(TheoremId::MorlayeJoly, index);
    if !index.is_full(sys.n()) {
        return Ok(g.with_note(FULL_ONLY));
    }
    let Some(ds) = diagonal_gcds(sys) else {
        return Ok(g.with_note("requires a single equation sum a_i t_i = b with f_i = t^m_i"));
    };
    let mut g = g;
    let ok = g.push(HypothesisCheck::new(
        "sum 1/d_i > 1",
        sum_reciprocals(&ds).into(),
        Relation::Gt,
        ExtRational::int(1),
    ));
    Ok(if ok { g.grant(1) } else { g })
}

pub fn check_wan(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    let g = Guarantee::new(TheoremId::Wan, index);
    if !index.is_full(sys.n()) {
        return Ok(g.with_note(FULL_ONLY));
    }
    let Some(ds) = diagonal_gcds(sys) else {
        return Ok(g.with_note("requires a single equation sum a_i t_i = b with f_i = t^m_i"));
    };
    let total = sum_reciprocals(&ds);
    let mut g = g;
    let ok = g.push(HypothesisCheck::new("sum 1/d_i > 1", total.clone().into(), Relation::Gt, ExtRational::int(1)));
    if !ok {
        return Ok(g.with_note("exponent ceil(sum 1/d_i - 1) is 0"));
    }
    let e = sys.ctx().s() as u64 * ceil_nonneg(&(total - int(1)));
    Ok(g.grant(e))
}

/// Shared tail for the q-power bounds `s * ceil((A - sum deg_I)/max deg_I)`
/// with hypothesis `sum deg_I < A`.
fn q_power_bound(
    mut g: Guarantee,
    label: &str,
    degs: &[u64],
    bound: BigRational,
    s: u32,
) -> Guarantee {
    let total = int(degs.iter().sum());
    let max = degs.iter().copied().max().expect("at least one equation");
    if !g.push(HypothesisCheck::new(label, total.clone().into(), Relation::Lt, bound.clone().into())) {
        return g;
    }
    let e = s as u64 * ceil_nonneg(&((bound - total) / int(max)));
    g.grant(e)
}

fn general_preconditions(sys: &SystemInstance, index: &IndexSet) -> Result<Vec<u64>> {
    precondition_nonzero(sys)?;
    precondition_nonconstant(sys, index)?;
    let degs = degrees(sys, index)?;
    positive_max(&degs, "deg_I(P_j)")?;
    Ok(degs)
}

pub fn check_axkatz_general(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    let degs = general_preconditions(sys, index)?;
    let q1 = sys.ctx().q() - 1;
    let mut omega = 0u64;
    for &i in index.members() {
        omega += sys.analysis(i)?.omega.expect("nonconstant f has omega");
    }
    let mut g = Guarantee::new(TheoremId::AxKatzGeneral, index);
    let total: u64 = degs.iter().sum();
    let ok = g.push(HypothesisCheck::new(
        "(q-1) sum deg_I(P_j) < sum omega(f_i)",
        ExtRational::int(q1 * total),
        Relation::Lt,
        ExtRational::int(omega),
    ));
    if !ok {
        return Ok(g);
    }
    let max = *degs.iter().max().expect("at least one equation");
    let e = sys.ctx().s() as u64 * ceil_nonneg(&ratio(omega - q1 * total, q1 * max));
    Ok(g.grant(e))
}

pub fn check_qdiv(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    require_nonzero(sys)?;
    precondition_nonconstant(sys, index)?;
    let q1 = sys.ctx().q() - 1;
    let mut g = Guarantee::new(TheoremId::Qdiv, index);
    for &i in index.members() {
        let check = HypothesisCheck::new(
            format!("deg(f_{}) | q-1", i + 1),
            ExtRational::int(f_degree(sys, i)),
            Relation::Divides,
            ExtRational::int(q1),
        );
        if !g.push(check) {
            return Ok(g);
        }
    }
    let main = check_main(sys, index)?;
    g.hypothesis_trace.extend(main.hypothesis_trace);
    Ok(if main.applicable { g.grant(sys.ctx().s() as u64) } else { g })
}

pub fn check_axkatz_cor1(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    let degs = general_preconditions(sys, index)?;
    let bound = index
        .members()
        .iter()
        .fold(BigRational::zero(), |acc, &i| acc + ratio(1, f_degree(sys, i)));
    let g = Guarantee::new(TheoremId::AxKatzCor1, index);
    Ok(q_power_bound(g, "sum deg_I(P_j) < sum 1/deg(f_i)", &degs, bound, sys.ctx().s()))
}

pub fn check_axkatz_cor(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    precondition_nonzero(sys)?;
    let degs = degrees(sys, index)?;
    positive_max(&degs, "deg_I(P_j)")?;
    let g = Guarantee::new(TheoremId::AxKatzCor, index);
    let Some(ds) = monomial_gcds(sys, index) else {
        return Ok(g.with_note("requires f_i = t^m_i for every i in I"));
    };
    Ok(q_power_bound(g, "sum deg_I(P_j) < sum 1/d_i", &degs, sum_reciprocals(&ds), sys.ctx().s()))
}

const MORENO_NOTE: &str = "general statement uses <= while its monomial corollary uses <; both as stated";

fn p_weights(ctx: &FieldCtx, sys: &SystemInstance, index: &IndexSet) -> Result<Vec<u64>> {
    sys.p_list().iter().map(|p| w_pi(ctx, p, index)).collect()
}

/// `ceil(s (A - sum w)/max w)` with the given hypothesis relation.
fn p_power_bound(
    mut g: Guarantee,
    label: &str,
    relation: Relation,
    weights: &[u64],
    bound: BigRational,
    s: u32,
) -> Guarantee {
    let total = int(weights.iter().sum());
    let max = weights.iter().copied().max().expect("at least one equation");
    if !g.push(HypothesisCheck::new(label, total.clone().into(), relation, bound.clone().into())) {
        return g;
    }
    let e = ceil_nonneg(&(int(s as u64) * (bound - total) / int(max)));
    g.grant(e)
}

pub fn check_moreno_general(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    precondition_nonzero(sys)?;
    precondition_nonconstant(sys, index)?;
    let ctx = sys.ctx();
    let weights = p_weights(ctx, sys, index)?;
    positive_max(&weights, "w_{p,I}(P_j)")?;
    let mut bound = BigRational::zero();
    for &i in index.members() {
        bound += ratio(1, sys.analysis(i)?.p_weight.expect("nonconstant f has a p-weight"));
    }
    let g = Guarantee::new(TheoremId::MorenoGeneral, index).with_note(MORENO_NOTE);
    Ok(p_power_bound(g, "sum w_{p,I}(P_j) <= sum 1/w_p(f_i)", Relation::Le, &weights, bound, ctx.s()))
}

pub fn check_moreno_cor(sys: &SystemInstance, index: &IndexSet) -> Result<Guarantee> {
    precondition_nonzero(sys)?;
    let ctx = sys.ctx();
    let weights = p_weights(ctx, sys, index)?;
    positive_max(&weights, "w_{p,I}(P_j)")?;
    let g = Guarantee::new(TheoremId::MorenoCor, index);
    let Some(ds) = monomial_gcds(sys, index) else {
        return Ok(g.with_note("requires f_i = t^m_i for every i in I"));
    };
    let sigmas = ds
        .iter()
        .map(|&d| digit_sum(d, ctx.p()))
        .collect::<Result<Vec<u64>>>()?;
    let g = g.with_note(MORENO_NOTE);
    Ok(p_power_bound(
        g,
        "sum w_{p,I}(P_j) < sum 1/sigma_p(d_i)",
        Relation::Lt,
        &weights,
        sum_reciprocals(&sigmas),
        ctx.s(),
    ))
}

pub fn check(sys: &SystemInstance, id: TheoremId, index: &IndexSet) -> Result<Guarantee> {
    match id {
        TheoremId::Cw => check_cw(sys, index),
        TheoremId::Main => check_main(sys, index),
        TheoremId::Cor2Main => check_cor2main(sys, index),
        TheoremId::CorMainNew => check_cormainnew(sys, index),
        TheoremId::ClassicalMain => check_classicalmain(sys, index),
        TheoremId::MorlayeJoly => check_morlaye_joly(sys, index),
        TheoremId::AxKatz => check_axkatz(sys, index),
        TheoremId::Wan => check_wan(sys, index),
        TheoremId::AxKatzGeneral => check_axkatz_general(sys, index),
        TheoremId::Qdiv => check_qdiv(sys, index),
        TheoremId::AxKatzCor1 => check_axkatz_cor1(sys, index),
        TheoremId::AxKatzCor => check_axkatz_cor(sys, index),
        TheoremId::MorenoGeneral => check_moreno_general(sys, index),
        TheoremId::MorenoCor => check_moreno_cor(sys, index),
    }
}

/// Runs every checker on `index`. Unmet preconditions become inapplicable
/// guarantees carrying the reason.
pub fn check_all(sys: &SystemInstance, index: &IndexSet) -> Result<Vec<Guarantee>> {
    if let Some(&m) = index.members().last() {
        if m >= sys.n() {
            return Err(Error::BadIndexSet(format!("index {} outside 1..={}", m + 1, sys.n())));
        }
    }
    TheoremId::ALL
        .iter()
        .map(|&id| match check(sys, id, index) {
            Err(e @ (Error::ZeroPolynomial | Error::PreconditionViolated(_))) => {
                Ok(Guarantee::new(id, index).with_note(e.to_string()))
            }
            other => other,
        })
        .collect()
}

fn subsets_within_cap(n: usize) -> Result<Vec<IndexSet>> {
    if n > SUBSET_SEARCH_CAP {
        return Err(Error::CapExceeded { n, cap: SUBSET_SEARCH_CAP });
    }
    Ok(IndexSet::all_nonempty(n))
}

fn better(candidate: &Guarantee, best: &Guarantee) -> bool {
    (candidate.guaranteed_p_exponent, candidate.applicable) > (best.guaranteed_p_exponent, best.applicable)
}

/// Largest guaranteed exponent over all nonempty `I` and all checkers; ties go
/// to smaller `I`, then lexicographically smaller `I`, then checker order.
pub fn best_guarantee(sys: &SystemInstance) -> Result<(IndexSet, Guarantee)> {
    let mut best: Option<Guarantee> = None;
    for index in subsets_within_cap(sys.n())? {
        for g in check_all(sys, &index)? {
            if best.as_ref().map_or(true, |b| better(&g, b)) {
                best = Some(g);
            }
        }
    }
    let g = best.expect("n >= 1 gives at least one subset");
    Ok((g.index_set.clone(), g))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub theorem_id: TheoremId,
    pub index_set: IndexSet,
    pub guaranteed_p_exponent: u64,
    pub ord_p: NatOrInf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BestGuarantee {
    pub index_set: IndexSet,
    pub guarantee: Guarantee,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub field: FieldSpec,
    pub instance: InstanceFile,
    pub count_result: CountResult,
    pub guarantees: Vec<Guarantee>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best: Option<BestGuarantee>,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn violations(guarantees: &[Guarantee], count: &CountResult) -> Vec<Violation> {
    guarantees
        .iter()
        .filter(|g| g.applicable && !count.ord_p.at_least(g.guaranteed_p_exponent))
        .map(|g| Violation {
            theorem_id: g.theorem_id,
            index_set: g.index_set.clone(),
            guaranteed_p_exponent: g.guaranteed_p_exponent,
            ord_p: count.ord_p,
        })
        .collect()
}

/// Counts exactly and checks every guarantee for `index` (default: the
/// instance's own `I`, else all variables).
pub fn verify(
    sys: &SystemInstance,
    index: Option<&IndexSet>,
    method: MethodChoice,
    budget: u64,
) -> Result<VerificationReport> {
    let index = index
        .or(sys.index_set())
        .cloned()
        .unwrap_or_else(|| IndexSet::full(sys.n()));
    let guarantees = check_all(sys, &index)?;
    let count_result = counting::count(sys, method, budget)?;
    let violations = violations(&guarantees, &count_result);
    Ok(VerificationReport {
        field: sys.ctx().spec(),
        instance: sys.to_file(),
        count_result,
        guarantees,
        best: None,
        violations,
    })
}

/// As [`verify`], over every nonempty `I`, and reports the best guarantee.
pub fn verify_all_subsets(sys: &SystemInstance, method: MethodChoice, budget: u64) -> Result<VerificationReport> {
    let mut guarantees = Vec::new();
    for index in subsets_within_cap(sys.n())? {
        guarantees.extend(check_all(sys, &index)?);
    }
    let best = guarantees
        .iter()
        .fold(None::<&Guarantee>, |b, g| match b {
            Some(b) if !better(g, b) => Some(b),
            _ => Some(g),
        })
        .map(|g| BestGuarantee { index_set: g.index_set.clone(), guarantee: g.clone() });
    let count_result = counting::count(sys, method, budget)?;
    let violations = violations(&guarantees, &count_result);
    Ok(VerificationReport {
        field: sys.ctx().spec(),
        instance: sys.to_file(),
        count_result,
        guarantees,
        best,
        violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubstitutionKind {
    /// Every `f_i = t`.
    Identity,
    /// Every `f_i = t^m` with `1 <= m <= f_degree`.
    Monomial,
    /// Arbitrary nonconstant `f_i` of degree at most `f_degree`.
    Random,
}

impl std::str::FromStr for SubstitutionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "identity" => Ok(SubstitutionKind::Identity),
            "monomial" => Ok(SubstitutionKind::Monomial),
            "random" => Ok(SubstitutionKind::Random),
            other => Err(format!("unknown substitution kind `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SharpnessShape {
    pub n: usize,
    pub r: usize,
    /// Total degree of each generated equation.
    pub p_degree: u32,
    pub max_terms: usize,
    pub f_kind: SubstitutionKind,
    pub f_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharpInstance {
    pub instance: InstanceFile,
    pub theorem_id: TheoremId,
    pub index_set: IndexSet,
    pub guaranteed_p_exponent: u64,
    #[serde(serialize_with = "crate::counting::decimal_string")]
    pub count: BigUint,
    pub ord_p: NatOrInf,
}

/// Random instances of the given shape whose count has p-adic valuation
/// exactly equal to the best positive guarantee. Deterministic in `seed`;
/// instances exceeding `budget` are skipped.
pub fn search_sharpness(
    ctx: &std::sync::Arc<FieldCtx>,
    shape: &SharpnessShape,
    trials: usize,
    seed: u64,
    budget: u64,
) -> Result<Vec<SharpInstance>> {
    if shape.n == 0 || shape.r == 0 {
        return Err(Error::PreconditionViolated("shape needs n >= 1 and r >= 1".into()));
    }
    let mut rng = random::seeded(seed);
    let mut found = Vec::new();
    for _ in 0..trials {
        let f_list = (0..shape.n)
            .map(|_| match shape.f_kind {
                SubstitutionKind::Identity => crate::unipoly::UniPoly::identity(),
                SubstitutionKind::Monomial => {
                    use rand::Rng;
                    let m = rng.gen_range(1..=shape.f_degree.max(1));
                    crate::unipoly::UniPoly::monomial(crate::gf::FqElem::ONE, m)
                }
                SubstitutionKind::Random => random::unipoly(&mut rng, ctx, 1, shape.f_degree.max(1)),
            })
            .collect();
        let p_list = (0..shape.r)
            .map(|_| random::multipoly(&mut rng, ctx, shape.n, shape.p_degree, shape.max_terms, true))
            .collect();
        let sys = SystemInstance::new(ctx.clone(), f_list, p_list, None)?;
        let count = match counting::count(&sys, MethodChoice::Auto, budget) {
            Ok(c) => c,
            Err(Error::BudgetExceeded { .. }) => continue,
            Err(e) => return Err(e),
        };
        let (index_set, g) = best_guarantee(&sys)?;
        if g.applicable && g.guaranteed_p_exponent > 0 && count.ord_p == NatOrInf::Finite(g.guaranteed_p_exponent) {
            found.push(SharpInstance {
                instance: sys.to_file(),
                theorem_id: g.theorem_id,
                index_set,
                guaranteed_p_exponent: g.guaranteed_p_exponent,
                count: count.count,
                ord_p: count.ord_p,
            });
        }
    }
    Ok(found)
}
