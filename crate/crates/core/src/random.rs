//! Seeded generators for fields elements and polynomials.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gf::{FieldCtx, FqElem};
use crate::multipoly::MultiPoly;
use crate::unipoly::UniPoly;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn elem<R: Rng>(rng: &mut R, ctx: &FieldCtx) -> FqElem {
    FqElem(rng.gen_range(0..ctx.q()) as u32)
}

pub fn nonzero_elem<R: Rng>(rng: &mut R, ctx: &FieldCtx) -> FqElem {
    FqElem(rng.gen_range(1..ctx.q()) as u32)
}

/// Degree drawn uniformly from `min_deg..=max_deg`, nonzero leading coefficient.
pub fn unipoly<R: Rng>(rng: &mut R, ctx: &FieldCtx, min_deg: usize, max_deg: usize) -> UniPoly {
    let deg = rng.gen_range(min_deg..=max_deg);
    let mut coeffs: Vec<FqElem> = (0..deg).map(|_| elem(rng, ctx)).collect();
    coeffs.push(nonzero_elem(rng, ctx));
    UniPoly::new(coeffs)
}

/// Sparse polynomial with `1..=max_terms` terms of total degree at most `max_deg`.
/// When `force_degree` is set, the first term has total degree exactly `max_deg`.
pub fn multipoly<R: Rng>(
    rng: &mut R,
    ctx: &FieldCtx,
    n: usize,
    max_deg: u32,
    max_terms: usize,
    force_degree: bool,
) -> MultiPoly {
    loop {
        let count = rng.gen_range(1..=max_terms.max(1));
        let terms = (0..count)
            .map(|k| {
                let total = if force_degree && k == 0 { max_deg } else { rng.gen_range(0..=max_deg) };
                let mut e = vec![0u32; n];
                for _ in 0..total {
                    e[rng.gen_range(0..n)] += 1;
                }
                (nonzero_elem(rng, ctx), e)
            })
            .collect();
        let p = MultiPoly::new(ctx, n, terms).expect("generated terms are well formed");
        if !p.is_zero() {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let ctx = FieldCtx::new(3, 2, None).unwrap();
        let a: Vec<UniPoly> = (0..5).scan(seeded(7), |r, _| Some(unipoly(r, &ctx, 1, 3))).collect();
        let b: Vec<UniPoly> = (0..5).scan(seeded(7), |r, _| Some(unipoly(r, &ctx, 1, 3))).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|f| (1..=3).contains(&f.degree().unwrap())));
    }

    #[test]
    fn multipoly_respects_bounds() {
        let ctx = FieldCtx::new(5, 1, None).unwrap();
        let mut rng = seeded(1);
        for _ in 0..200 {
            let p = multipoly(&mut rng, &ctx, 3, 3, 4, true);
            assert!(!p.is_zero());
            assert!(p.total_degree().finite().unwrap() <= 3);
        }
    }
}
