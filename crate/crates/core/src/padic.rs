//! The unramified ring `O/p^k = (Z/p^k)[x]/(g)` where `g` is the field modulus
//! read with integer coefficients, Teichmüller lifts, and numerical checks of
//! the congruences used in the p-adic divisibility arguments.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FqElem};
use crate::random;
use crate::unipoly::{self, UniPoly};

pub const DEFAULT_PRECISION: u32 = 4;
pub const DEFAULT_COMPOSITION_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct PadicCtx {
    field: Arc<FieldCtx>,
    k: u32,
    pk: u64,
    /// Monic lift, low to high, length `s + 1`.
    modulus: Vec<u64>,
}

/// `s` coefficients in `[0, p^k)` on the basis `1, x, ..., x^{s-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PadicElem {
    pub coeffs: Vec<u64>,
}

impl PadicCtx {
    pub fn new(field: Arc<FieldCtx>, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::PrecisionInsufficient { needed: 1, available: 0 });
        }
        let pk = field
            .p()
            .checked_pow(k)
            .filter(|&v| v < 1 << 62)
            .ok_or_else(|| Error::PreconditionViolated(format!("p^{k} does not fit in 62 bits")))?;
        let modulus = field.modulus().to_vec();
        Ok(PadicCtx { field, k, pk, modulus })
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn p_pow_k(&self) -> u64 {
        self.pk
    }

    pub fn modulus_lift(&self) -> &[u64] {
        &self.modulus
    }

    fn s(&self) -> usize {
        self.field.s() as usize
    }

    pub fn zero(&self) -> PadicElem {
        PadicElem { coeffs: vec![0; self.s()] }
    }

    pub fn one(&self) -> PadicElem {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> PadicElem {
        let mut e = self.zero();
        e.coeffs[0] = v.rem_euclid(self.pk as i64) as u64;
        e
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<PadicElem> {
        if coeffs.len() > self.s() {
            return Err(Error::DegreeMismatch { expected: self.s(), found: coeffs.len() });
        }
        let mut e = self.zero();
        for (slot, &c) in e.coeffs.iter_mut().zip(coeffs) {
            *slot = c % self.pk;
        }
        Ok(e)
    }

    /// Digit-wise lift of a field element (not Teichmüller).
    pub fn lift(&self, a: FqElem) -> PadicElem {
        let mut e = self.zero();
        for (slot, d) in e.coeffs.iter_mut().zip(self.field.digits(a)) {
            *slot = d;
        }
        e
    }

    pub fn reduce(&self, x: &PadicElem) -> FqElem {
        let p = self.field.p();
        let digits: Vec<u64> = x.coeffs.iter().map(|c| c % p).collect();
        self.field.from_digits(&digits)
    }

    pub fn add(&self, a: &PadicElem, b: &PadicElem) -> PadicElem {
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x + y) % self.pk).collect();
        PadicElem { coeffs }
    }

    pub fn neg(&self, a: &PadicElem) -> PadicElem {
        let coeffs = a.coeffs.iter().map(|&x| (self.pk - x) % self.pk).collect();
        PadicElem { coeffs }
    }

    pub fn sub(&self, a: &PadicElem, b: &PadicElem) -> PadicElem {
        self.add(a, &self.neg(b))
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.pk as u128) as u64
    }

    pub fn mul_int(&self, a: &PadicElem, k: u64) -> PadicElem {
        let k = k % self.pk;
        PadicElem { coeffs: a.coeffs.iter().map(|&x| self.mulmod(x, k)).collect() }
    }

    pub fn mul(&self, a: &PadicElem, b: &PadicElem) -> PadicElem {
        let s = self.s();
        let mut prod = vec![0u64; 2 * s - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + self.mulmod(x, y)) % self.pk;
            }
        }
        // x^d = x^{d-s} * (x^s - g(x)) with g monic of degree s
        for d in (s..prod.len()).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for (i, &g) in self.modulus[..s].iter().enumerate() {
                let t = self.mulmod(c, g);
                prod[d - s + i] = (prod[d - s + i] + self.pk - t) % self.pk;
            }
        }
        prod.truncate(s);
        PadicElem { coeffs: prod }
    }

    pub fn pow(&self, x: &PadicElem, e: &BigUint) -> PadicElem {
        let mut result = self.one();
        for i in (0..e.bits()).rev() {
            result = self.mul(&result, &result);
            if e.bit(i) {
                result = self.mul(&result, x);
            }
        }
        result
    }

    pub fn pow_u64(&self, x: &PadicElem, e: u64) -> PadicElem {
        self.pow(x, &BigUint::from(e))
    }

    /// `p^j | x` in the model; `j` is capped at `k`.
    pub fn divisible_by_p_pow(&self, x: &PadicElem, j: u32) -> bool {
        let pj = self.field.p().pow(j.min(self.k));
        x.coeffs.iter().all(|&c| c % pj == 0)
    }

    /// Valuation of `x` in the model, `None` for `0 mod p^k`.
    pub fn valuation(&self, x: &PadicElem) -> Option<u32> {
        (0..self.k).find(|&j| !self.divisible_by_p_pow(x, j + 1))
    }

    /// The unique `b == a (mod p)` with `b^q = b`, found by iterating `b <- b^q`.
    pub fn teichmuller(&self, a: FqElem) -> Result<PadicElem> {
        let q = BigUint::from(self.field.q());
        let mut b = self.lift(a);
        for _ in 0..=self.k {
            let next = self.pow(&b, &q);
            if next == b {
                return Ok(b);
            }
            b = next;
        }
        Err(Error::InternalInconsistency(format!("Teichmüller iteration for {a} did not stabilize")))
    }

    pub fn teichmuller_set(&self) -> Result<Vec<PadicElem>> {
        self.field.elements().map(|a| self.teichmuller(a)).collect()
    }
}

/// If `p | x - y` then `p^{n+1} | x^{p^n} - y^{p^n}`.
pub fn verify_lift_lemma(pctx: &PadicCtx, x: &PadicElem, y: &PadicElem, n: u32) -> Result<bool> {
    if n + 1 > pctx.k() {
        return Err(Error::PrecisionInsufficient { needed: n as u64 + 1, available: pctx.k() as u64 });
    }
    if !pctx.divisible_by_p_pow(&pctx.sub(x, y), 1) {
        return Ok(true);
    }
    let e = BigUint::from(pctx.field().p()).pow(n);
    let diff = pctx.sub(&pctx.pow(x, &e), &pctx.pow(y, &e));
    Ok(pctx.divisible_by_p_pow(&diff, n + 1))
}

/// `x^{(q-1) q^n}` is `0 mod q^n` when `p | x` and `1 mod q^n` otherwise.
pub fn verify_unit_power(pctx: &PadicCtx, x: &PadicElem, n: u32) -> Result<bool> {
    let s = pctx.field().s();
    if n * s > pctx.k() {
        return Err(Error::PrecisionInsufficient { needed: (n * s) as u64, available: pctx.k() as u64 });
    }
    let q = BigUint::from(pctx.field().q());
    let e = (&q - 1u32) * q.pow(n);
    let v = pctx.pow(x, &e);
    let target = if pctx.reduce(x).is_zero() { v } else { pctx.sub(&v, &pctx.one()) };
    Ok(pctx.divisible_by_p_pow(&target, n * s))
}

/// Both sides of the composition identity for `sum_{x in T_q} f~(x)^delta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZanCaoSides {
    pub lhs: PadicElem,
    pub rhs: PadicElem,
    pub compositions: u64,
}

fn factorials(n: u64) -> Vec<BigUint> {
    let mut out = vec![BigUint::one()];
    for i in 1..=n {
        let next = out.last().expect("nonempty") * i;
        out.push(next);
    }
    out
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

pub fn zancao_sides(pctx: &PadicCtx, f: &UniPoly, delta: u64, budget: u64) -> Result<ZanCaoSides> {
    if f.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let field = pctx.field();
    let terms: Vec<(u64, PadicElem)> = f
        .support()
        .map(|(m, b)| pctx.teichmuller(b).map(|lb| (m as u64, lb)))
        .collect::<Result<_>>()?;
    let r = terms.len() as u64;
    let space = binomial(delta + r - 1, r - 1);
    if space > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { required: space.to_string(), budget });
    }

    let eval = |x: &PadicElem| {
        terms.iter().fold(pctx.zero(), |acc, (m, b)| {
            pctx.add(&acc, &pctx.mul(b, &pctx.pow_u64(x, *m)))
        })
    };
    let mut lhs = pctx.zero();
    for x in pctx.teichmuller_set()? {
        lhs = pctx.add(&lhs, &pctx.pow_u64(&eval(&x), delta));
    }

    let q = field.q();
    let pk = BigUint::from(pctx.p_pow_k());
    let fact = factorials(delta);
    // powers[l][d] = b_l^d
    let powers: Vec<Vec<PadicElem>> = terms
        .iter()
        .map(|(_, b)| {
            let mut row = vec![pctx.one()];
            for _ in 0..delta {
                let next = pctx.mul(row.last().expect("nonempty"), b);
                row.push(next);
            }
            row
        })
        .collect();

    let mut inner = pctx.zero();
    let mut compositions = 0u64;
    let mut parts = vec![0u64; terms.len()];
    let mut visit = |parts: &[u64]| {
        compositions += 1;
        let weight: u64 = parts.iter().zip(&terms).map(|(d, (m, _))| d * m).sum();
        if weight == 0 || weight % (q - 1) != 0 {
            return;
        }
        let mut coef = fact[delta as usize].clone();
        for &d in parts {
            coef /= &fact[d as usize];
        }
        let coef = (coef % &pk).to_u64().expect("reduced below p^k");
        let mut term = pctx.from_int(0);
        term.coeffs[0] = coef;
        for (l, &d) in parts.iter().enumerate() {
            term = pctx.mul(&term, &powers[l][d as usize]);
        }
        inner = pctx.add(&inner, &term);
    };
    compositions_of(delta, &mut parts, 0, &mut visit);

    let f0 = terms
        .iter()
        .find(|(m, _)| *m == 0)
        .map(|(_, b)| b.clone())
        .unwrap_or_else(|| pctx.zero());
    let rhs = pctx.add(
        &pctx.mul_int(&pctx.pow_u64(&f0, delta), q),
        &pctx.mul_int(&inner, q - 1),
    );
    Ok(ZanCaoSides { lhs, rhs, compositions })
}

fn compositions_of(remaining: u64, parts: &mut [u64], at: usize, visit: &mut impl FnMut(&[u64])) {
    if at + 1 == parts.len() {
        parts[at] = remaining;
        visit(parts);
        return;
    }
    for d in 0..=remaining {
        parts[at] = d;
        compositions_of(remaining - d, parts, at + 1, visit);
    }
}

pub fn zancao_check(pctx: &PadicCtx, f: &UniPoly, delta: u64) -> Result<bool> {
    let sides = zancao_sides(pctx, f, delta, DEFAULT_COMPOSITION_BUDGET)?;
    Ok(sides.lhs == sides.rhs)
}

/// The left side reduced mod p agrees with the power sum over `F_q`.
pub fn zancao_reduces_to_power_sum(pctx: &PadicCtx, f: &UniPoly, delta: u64) -> Result<bool> {
    let sides = zancao_sides(pctx, f, delta, DEFAULT_COMPOSITION_BUDGET)?;
    Ok(pctx.reduce(&sides.lhs) == unipoly::power_sum(pctx.field(), f, delta))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrialTally {
    pub trials: u64,
    pub passed: u64,
}

impl TrialTally {
    fn record(&mut self, ok: bool) {
        self.trials += 1;
        self.passed += ok as u64;
    }

    pub fn all_passed(&self) -> bool {
        self.trials == self.passed
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaTrialReport {
    pub p: u64,
    pub s: u32,
    pub k: u32,
    pub seed: u64,
    pub lift_lemma: TrialTally,
    pub unit_power: TrialTally,
    pub composition_identity: TrialTally,
    pub reduction_mod_p: TrialTally,
}

impl LemmaTrialReport {
    pub fn all_passed(&self) -> bool {
        self.lift_lemma.all_passed()
            && self.unit_power.all_passed()
            && self.composition_identity.all_passed()
            && self.reduction_mod_p.all_passed()
    }
}

pub fn random_elem<R: Rng>(rng: &mut R, pctx: &PadicCtx) -> PadicElem {
    PadicElem { coeffs: (0..pctx.s()).map(|_| rng.gen_range(0..pctx.pk)).collect() }
}

/// Seeded trials of all three congruences. Lemma checks whose precision
/// requirement exceeds `k` are skipped (tally stays at zero trials).
pub fn run_lemma_trials(
    pctx: &PadicCtx,
    trials: u64,
    max_f_degree: usize,
    max_delta: u64,
    seed: u64,
) -> Result<LemmaTrialReport> {
    let mut rng = random::seeded(seed);
    let field = pctx.field();
    let (k, s) = (pctx.k(), field.s());
    let mut report = LemmaTrialReport {
        p: field.p(),
        s,
        k,
        seed,
        lift_lemma: TrialTally::default(),
        unit_power: TrialTally::default(),
        composition_identity: TrialTally::default(),
        reduction_mod_p: TrialTally::default(),
    };
    for _ in 0..trials {
        if k >= 2 {
            let n = rng.gen_range(1..k);
            let x = random_elem(&mut rng, pctx);
            let y = if rng.gen_bool(0.8) {
                pctx.add(&x, &pctx.mul_int(&random_elem(&mut rng, pctx), field.p()))
            } else {
                random_elem(&mut rng, pctx)
            };
            report.lift_lemma.record(verify_lift_lemma(pctx, &x, &y, n)?);
        }
        if k >= s {
            let n = rng.gen_range(1..=k / s);
            let mut x = random_elem(&mut rng, pctx);
            if rng.gen_bool(0.2) {
                x = pctx.mul_int(&x, field.p());
            }
            report.unit_power.record(verify_unit_power(pctx, &x, n)?);
        }
        let f = random::unipoly(&mut rng, field, 1, max_f_degree.max(1));
        let delta = rng.gen_range(0..=max_delta);
        let sides = zancao_sides(pctx, &f, delta, DEFAULT_COMPOSITION_BUDGET)?;
        report.composition_identity.record(sides.lhs == sides.rhs);
        report
            .reduction_mod_p
            .record(pctx.reduce(&sides.lhs) == unipoly::power_sum(field, &f, delta));
    }
    Ok(report)
}
