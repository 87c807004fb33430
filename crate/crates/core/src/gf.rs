//! Exact arithmetic in `F_q`, `q = p^s`.
//!
//! Elements are encoded in the polynomial basis: `a_0 + a_1 x + ... + a_{s-1} x^{s-1}`
//! is stored as the integer `a_0 + a_1 p + ... + a_{s-1} p^{s-1}`. The defining
//! modulus is the monic irreducible of degree `s` with the smallest such encoding
//! unless the caller supplies one, so every context built from `(p, s)` is the
//! same across runs.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fields up to this order get exp/log tables.
pub const DEFAULT_TABLE_CAP: u64 = 1 << 20;

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 24;

// Dense addition tables are only worth it for small odd-characteristic extensions.
const ADD_TABLE_CAP: u64 = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FqElem(pub u32);

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);
    pub const ONE: FqElem = FqElem(1);

    pub fn rep(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::fmt::Display for FqElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serializable description of a field: `{p, s, modulus: [c_0..c_s]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub s: u32,
    pub modulus: Vec<u64>,
}

#[derive(Clone, Debug)]
struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Immutable description of `F_{p^s}`.
#[derive(Clone, Debug)]
pub struct FieldCtx {
    p: u64,
    s: u32,
    q: u64,
    modulus: Vec<u64>,
    generator: FqElem,
    tables: Option<Tables>,
    add_table: Option<Vec<u32>>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All `(p, s)` with `p^s <= bound`, ordered by `q`.
pub fn prime_powers_up_to(bound: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for q in 2..=bound {
        let factors = prime_factors(q);
        if factors.len() == 1 {
            let p = factors[0];
            let mut s = 0;
            let mut r = q;
            while r > 1 {
                r /= p;
                s += 1;
            }
            out.push((p, s));
        }
    }
    out
}

// Dense polynomials over F_p, low degree first. Used for irreducibility
// testing and for table-free multiplication.

fn fp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_rem_monic(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let top = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if top != 0 {
            for (i, &c) in m.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + (p - c) * top) % p;
            }
        }
        r.pop();
        fp_trim(&mut r);
    }
    r
}

fn monic_from_encoding(lower: u64, degree: usize, p: u64) -> Vec<u64> {
    let mut c = Vec::with_capacity(degree + 1);
    let mut v = lower;
    for _ in 0..degree {
        c.push(v % p);
        v /= p;
    }
    c.push(1);
    c
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn fp_is_irreducible(m: &[u64], p: u64) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for lower in 0..count {
            let divisor = monic_from_encoding(lower, d, p);
            if fp_rem_monic(m, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// Builds `F_{p^s}` with the default table cap.
    pub fn new(p: u64, s: u32, modulus: Option<&[u64]>) -> Result<Self> {
        Self::with_table_cap(p, s, modulus, DEFAULT_TABLE_CAP)
    }

    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, 1, None)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self> {
        Self::new(spec.p, spec.s, Some(&spec.modulus))
    }

    pub fn with_table_cap(p: u64, s: u32, modulus: Option<&[u64]>, table_cap: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        if s == 0 {
            return Err(Error::DegreeMismatch { expected: 1, found: 0 });
        }
        let q = (p as u128).checked_pow(s).unwrap_or(u128::MAX);
        if q > MAX_FIELD_ORDER as u128 {
            return Err(Error::FieldTooLarge(q));
        }
        let q = q as u64;
        let deg = s as usize;

        let modulus = match modulus {
            Some(m) => {
                if m.is_empty() || m.len() - 1 != deg {
                    return Err(Error::DegreeMismatch {
                        expected: deg,
                        found: m.len().saturating_sub(1),
                    });
                }
                if m[deg] != 1 || m.iter().any(|&c| c >= p) {
                    return Err(Error::BadModulus(m.to_vec()));
                }
                if !fp_is_irreducible(m, p) {
                    return Err(Error::Reducible(m.to_vec()));
                }
                m.to_vec()
            }
            None => (0..q)
                .map(|lower| monic_from_encoding(lower, deg, p))
                .find(|m| fp_is_irreducible(m, p))
                .expect("an irreducible of every degree exists"),
        };

        let mut ctx = FieldCtx {
            p,
            s,
            q,
            modulus,
            generator: FqElem::ONE,
            tables: None,
            add_table: None,
        };
        ctx.generator = ctx.find_generator();
        if q <= table_cap {
            ctx.tables = Some(ctx.build_tables());
        }
        if p != 2 && s > 1 && q <= ADD_TABLE_CAP {
            let mut table = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    table[(a * q + b) as usize] = ctx.add_digits(a as u32, b as u32);
                }
            }
            ctx.add_table = Some(table);
        }
        Ok(ctx)
    }

    fn find_generator(&self) -> FqElem {
        if self.q == 2 {
            return FqElem::ONE;
        }
        let order = self.q - 1;
        let factors = prime_factors(order);
        (1..self.q)
            .map(|g| FqElem(g as u32))
            .find(|&g| factors.iter().all(|&r| self.pow_poly_basis(g, order / r) != FqElem::ONE))
            .expect("multiplicative group is cyclic")
    }

    fn build_tables(&self) -> Tables {
        let order = (self.q - 1) as usize;
        let mut exp = Vec::with_capacity(order);
        let mut log = vec![0u32; self.q as usize];
        let mut cur = FqElem::ONE;
        for i in 0..order {
            exp.push(cur.0);
            log[cur.0 as usize] = i as u32;
            cur = self.mul_poly_basis(cur, self.generator);
        }
        debug_assert_eq!(cur, FqElem::ONE);
        Tables { exp, log }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn generator(&self) -> FqElem {
        self.generator
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            p: self.p,
            s: self.s,
            modulus: self.modulus.clone(),
        }
    }

    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }

    /// `exp_table[i] = g^i` for `0 <= i < q - 1`.
    pub fn exp_table(&self) -> Option<&[u32]> {
        self.tables.as_ref().map(|t| t.exp.as_slice())
    }

    /// Discrete logarithm base `g`; entry 0 is unused.
    pub fn log_table(&self) -> Option<&[u32]> {
        self.tables.as_ref().map(|t| t.log.as_slice())
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, x: FqElem) -> Option<u64> {
        if x.is_zero() {
            return None;
        }
        match &self.tables {
            Some(t) => Some(t.log[x.0 as usize] as u64),
            None => {
                let mut cur = FqElem::ONE;
                for i in 0..self.q - 1 {
                    if cur == x {
                        return Some(i);
                    }
                    cur = self.mul(cur, self.generator);
                }
                unreachable!("nonzero element is a power of the generator")
            }
        }
    }

    /// `g^i`.
    pub fn exp(&self, i: u64) -> FqElem {
        let i = i % (self.q - 1);
        match &self.tables {
            Some(t) => FqElem(t.exp[i as usize]),
            None => self.pow_poly_basis(self.generator, i),
        }
    }

    pub fn elem(&self, rep: u64) -> Result<FqElem> {
        if rep >= self.q {
            return Err(Error::ElementOutOfRange { value: rep, q: self.q });
        }
        Ok(FqElem(rep as u32))
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> FqElem {
        FqElem(v.rem_euclid(self.p as i64) as u32)
    }

    /// All elements in increasing encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q as u32).map(FqElem)
    }

    pub fn digits(&self, x: FqElem) -> Vec<u64> {
        let mut v = x.0 as u64;
        (0..self.s)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    /// Inverse of [`digits`](Self::digits); digits are reduced mod `p`.
    pub fn from_digits(&self, digits: &[u64]) -> FqElem {
        let mut v = 0u64;
        for &d in digits.iter().take(self.s as usize).rev() {
            v = v * self.p + d % self.p;
        }
        FqElem(v as u32)
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let p = self.p;
        let (mut a, mut b) = (a as u64, b as u64);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.s {
            let d = (a % p + b % p) % p;
            out += d * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out as u32
    }

    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.p == 2 {
            FqElem(a.0 ^ b.0)
        } else if self.s == 1 {
            FqElem(((a.0 as u64 + b.0 as u64) % self.p) as u32)
        } else if let Some(t) = &self.add_table {
            FqElem(t[(a.0 as u64 * self.q + b.0 as u64) as usize])
        } else {
            FqElem(self.add_digits(a.0, b.0))
        }
    }

    pub fn neg(&self, a: FqElem) -> FqElem {
        if self.p == 2 {
            return a;
        }
        if self.s == 1 {
            return FqElem(((self.p - a.0 as u64) % self.p) as u32);
        }
        let p = self.p;
        let mut v = a.0 as u64;
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.s {
            out += ((p - v % p) % p) * place;
            place *= p;
            v /= p;
        }
        FqElem(out as u32)
    }

    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        if a.is_zero() || b.is_zero() {
            return FqElem::ZERO;
        }
        if self.s == 1 {
            return FqElem(((a.0 as u64 * b.0 as u64) % self.p) as u32);
        }
        match &self.tables {
            Some(t) => {
                let order = (self.q - 1) as usize;
                let i = t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize;
                let i = if i >= order { i - order } else { i };
                FqElem(t.exp[i])
            }
            None => self.mul_poly_basis(a, b),
        }
    }

    /// Multiplication by an integer, i.e. by its image in the prime subfield.
    pub fn mul_int(&self, a: FqElem, k: u64) -> FqElem {
        let k = k % self.p;
        if k == 0 || a.is_zero() {
            return FqElem::ZERO;
        }
        if k == 1 {
            return a;
        }
        let digits: Vec<u64> = self.digits(a).into_iter().map(|d| d * k % self.p).collect();
        self.from_digits(&digits)
    }

    /// Schoolbook multiplication in `F_p[x]/(modulus)`, independent of the tables.
    pub fn mul_poly_basis(&self, a: FqElem, b: FqElem) -> FqElem {
        let p = self.p;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * self.s as usize];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        let r = fp_rem_monic(&prod, &self.modulus, p);
        self.from_digits(&r)
    }

    fn pow_poly_basis(&self, x: FqElem, mut e: u64) -> FqElem {
        let mut base = x;
        let mut acc = FqElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_poly_basis(acc, base);
            }
            base = self.mul_poly_basis(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match &self.tables {
            Some(t) => {
                let order = (self.q - 1) as usize;
                let l = t.log[a.0 as usize] as usize;
                Ok(FqElem(t.exp[(order - l) % order]))
            }
            None => Ok(self.pow(a, self.q - 2)),
        }
    }

    pub fn div(&self, a: FqElem, b: FqElem) -> Result<FqElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `x^e` with `0^0 = 1`.
    pub fn pow(&self, x: FqElem, e: u64) -> FqElem {
        if e == 0 {
            return FqElem::ONE;
        }
        if x.is_zero() {
            return FqElem::ZERO;
        }
        let order = self.q - 1;
        let e = e % order;
        match &self.tables {
            Some(t) => {
                let l = t.log[x.0 as usize] as u64;
                FqElem(t.exp[((l as u128 * e as u128) % order as u128) as usize])
            }
            None => {
                let mut base = x;
                let mut acc = FqElem::ONE;
                let mut e = e;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = self.mul(acc, base);
                    }
                    base = self.mul(base, base);
                    e >>= 1;
                }
                acc
            }
        }
    }

    /// `x^e` for an arbitrary-precision exponent, with `0^0 = 1`.
    pub fn pow_big(&self, x: FqElem, e: &BigUint) -> FqElem {
        if e.is_zero() {
            return FqElem::ONE;
        }
        if x.is_zero() {
            return FqElem::ZERO;
        }
        let reduced = e.mod_floor(&BigUint::from(self.q - 1));
        self.pow(x, reduced.to_u64().expect("reduced below q - 1"))
    }

    pub fn sum<I: IntoIterator<Item = FqElem>>(&self, items: I) -> FqElem {
        items.into_iter().fold(FqElem::ZERO, |acc, x| self.add(acc, x))
    }
}
