//! Reproductions of the worked examples: the Artin–Schreier family whose count
//! is not divisible by q, the `q = 81` system whose count is `3^3 * 13 * 19`,
//! and the table of `u(t^m)`.

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::counting::{self, MethodChoice, SystemInstance, DEFAULT_BUDGET};
use crate::error::Result;
use crate::extended::NatOrInf;
use crate::gf::{prime_powers_up_to, FieldCtx, FqElem};
use crate::multipoly::{IndexSet, MultiPoly};
use crate::theorems::{self, ExtRational};
use crate::unipoly::{self, UniPoly};

fn sparse(ctx: &FieldCtx, exps: &[usize]) -> Result<UniPoly> {
    let top = exps.iter().copied().max().unwrap_or(0);
    let mut c = vec![0u64; top + 1];
    for &e in exps {
        c[e] = 1;
    }
    UniPoly::from_reps(ctx, &c)
}

/// `q = 3^4`, `P = t1 + t2 + t3`, `f1 = f2 = t^3 + t^2 + 1`, `f3 = t^13 + t^11 + t`.
pub fn example2_instance() -> Result<SystemInstance> {
    let ctx = Arc::new(FieldCtx::new(3, 4, None)?);
    let f1 = sparse(&ctx, &[0, 2, 3])?;
    let f3 = sparse(&ctx, &[1, 11, 13])?;
    let p = MultiPoly::linear(&ctx, &[FqElem::ONE; 3], FqElem::ZERO)?;
    SystemInstance::new(ctx, vec![f1.clone(), f1, f3], vec![p], Some(IndexSet::full(3)))
}

/// `P_j = t_j` for `j < r`, `P_r = t_r ... t_n`; `f_i = t` for `i < n`, `f_n = t^p - t`.
pub fn example1_instance(p: u64, s: u32, n: usize, r: usize) -> Result<SystemInstance> {
    let ctx = Arc::new(FieldCtx::new(p, s, None)?);
    let mut polys = Vec::with_capacity(r);
    for j in 0..r - 1 {
        let mut e = vec![0u32; n];
        e[j] = 1;
        polys.push(MultiPoly::new(&ctx, n, vec![(FqElem::ONE, e)])?);
    }
    let e: Vec<u32> = (0..n).map(|i| u32::from(i + 1 >= r)).collect();
    polys.push(MultiPoly::new(&ctx, n, vec![(FqElem::ONE, e)])?);
    let mut fs = vec![UniPoly::identity(); n - 1];
    let mut last = vec![FqElem::ZERO; p as usize + 1];
    last[1] = ctx.neg(FqElem::ONE);
    last[p as usize] = FqElem::ONE;
    fs.push(UniPoly::new(last));
    SystemInstance::new(ctx, fs, polys, Some(IndexSet::full(n)))
}

/// Prime factorization as `(prime, exponent)` pairs.
pub fn factorize(n: &BigUint) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut m = n.clone();
    let mut d = 2u64;
    while !m.is_zero() && m > BigUint::from(1u32) {
        if BigUint::from(d) * BigUint::from(d) > m {
            out.push((m.to_u64().expect("remaining factor fits"), 1));
            break;
        }
        let mut e = 0;
        while (&m % d).is_zero() {
            m /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    out
}

fn format_factorization(f: &[(u64, u32)]) -> String {
    f.iter()
        .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect::<Vec<_>>()
        .join(" * ")
}

#[derive(Clone, Debug, Serialize)]
pub struct Example2Report {
    pub u_values: Vec<NatOrInf>,
    pub omega_values: Vec<u64>,
    pub main_lhs: ExtRational,
    pub main_rhs: ExtRational,
    pub main_applicable: bool,
    pub axkatz_general_applicable: bool,
    #[serde(serialize_with = "crate::counting::decimal_string")]
    pub count: BigUint,
    pub factorization: String,
    pub ord_p: NatOrInf,
    pub divisible_by_q: bool,
    pub pass: bool,
}

pub fn example2() -> Result<Example2Report> {
    let sys = example2_instance()?;
    let index = IndexSet::full(3);
    let mut u_values = Vec::new();
    let mut omega_values = Vec::new();
    for i in 0..3 {
        let a = sys.analysis(i)?;
        u_values.push(a.u);
        omega_values.push(a.omega.expect("nonconstant"));
    }
    let main = theorems::check_main(&sys, &index)?;
    let general = theorems::check_axkatz_general(&sys, &index)?;
    let count = counting::count(&sys, MethodChoice::Auto, DEFAULT_BUDGET)?;
    let q = BigUint::from(sys.ctx().q());
    let divisible_by_q = (&count.count % &q).is_zero();
    let trace = &main.hypothesis_trace[0];
    let pass = u_values == [NatOrInf::Finite(40), NatOrInf::Finite(40), NatOrInf::Finite(14)]
        && trace.lhs == ExtRational::int(80)
        && trace.rhs == ExtRational::int(94)
        && main.applicable
        && !general.applicable
        && count.count == BigUint::from(6669u32)
        && count.ord_p == NatOrInf::Finite(3)
        && !divisible_by_q;
    Ok(Example2Report {
        u_values,
        omega_values,
        main_lhs: trace.lhs.clone(),
        main_rhs: trace.rhs.clone(),
        main_applicable: main.applicable,
        axkatz_general_applicable: general.applicable,
        factorization: format_factorization(&factorize(&count.count)),
        count: count.count,
        ord_p: count.ord_p,
        divisible_by_q,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Example1Row {
    pub p: u64,
    pub s: u32,
    pub n: usize,
    pub r: usize,
    pub modulus: Vec<u64>,
    #[serde(serialize_with = "crate::counting::decimal_string")]
    pub count: BigUint,
    #[serde(serialize_with = "crate::counting::decimal_string")]
    pub closed_form: BigUint,
    pub residue_mod_q: u64,
    pub expected_residue: u64,
    pub main_applicable: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Example1Report {
    pub rows: Vec<Example1Row>,
    pub pass: bool,
}

pub fn example1_row(p: u64, s: u32, n: usize, r: usize) -> Result<Example1Row> {
    let sys = example1_instance(p, s, n, r)?;
    let q = sys.ctx().q();
    let count = counting::count_bruteforce(&sys, DEFAULT_BUDGET)?.count;
    let qb = BigUint::from(q);
    let closed_form = qb.pow((n - r + 1) as u32) - BigUint::from(q - 1).pow((n - r) as u32) * (q - p);
    let residue_mod_q = (&count % &qb).to_u64().expect("below q");
    let expected_residue = if (n - r) % 2 == 0 { p % q } else { q - p };
    let main_applicable = theorems::check_main(&sys, &IndexSet::full(n))?.applicable;
    let pass = count == closed_form && residue_mod_q == expected_residue && main_applicable;
    let modulus = sys.ctx().modulus().to_vec();
    Ok(Example1Row { p, s, n, r, modulus, count, closed_form, residue_mod_q, expected_residue, main_applicable, pass })
}

/// The grid `(p, s) in {(2,2), (3,2)}`, `n in {2,3}`, `1 <= r <= min(n, 2)`.
pub fn example1_grid() -> Result<Example1Report> {
    let mut rows = Vec::new();
    for (p, s) in [(2, 2), (3, 2)] {
        for n in [2, 3] {
            for r in 1..=2.min(n) {
                rows.push(example1_row(p, s, n, r)?);
            }
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(Example1Report { rows, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct MonomialRow {
    pub p: u64,
    pub s: u32,
    pub modulus: Vec<u64>,
    pub q: u64,
    pub checked: u64,
    pub mismatches: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonomialTable {
    pub rows: Vec<MonomialRow>,
    pub total_checked: u64,
    pub total_mismatches: u64,
    pub pass: bool,
}

/// `u(t^m) = (q-1)/gcd(m, q-1)` and `#V = (q-1)/gcd + 1` for `1 <= m <= 2(q-1)`.
pub fn monomial_table(max_q: u64) -> Result<MonomialTable> {
    let mut rows = Vec::new();
    for (p, s) in prime_powers_up_to(max_q) {
        let ctx = FieldCtx::new(p, s, None)?;
        let q1 = ctx.q() - 1;
        let mut mismatches = Vec::new();
        for m in 1..=2 * q1 {
            let f = UniPoly::monomial(FqElem::ONE, m as usize);
            let d = m.gcd(&q1);
            let fib = unipoly::fibers(&ctx, &f);
            let u = unipoly::u_invariant(&ctx, &f).u;
            if u != NatOrInf::Finite(q1 / d) || fib.len() as u64 != q1 / d + 1 {
                mismatches.push(m);
            }
        }
        rows.push(MonomialRow { p, s, modulus: ctx.modulus().to_vec(), q: ctx.q(), checked: 2 * q1, mismatches });
    }
    let total_checked = rows.iter().map(|r| r.checked).sum();
    let total_mismatches = rows.iter().map(|r| r.mismatches.len() as u64).sum();
    Ok(MonomialTable { rows, total_checked, total_mismatches, pass: total_mismatches == 0 })
}
