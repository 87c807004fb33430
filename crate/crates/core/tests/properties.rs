use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;

use cwak::counting::{self, DEFAULT_BUDGET};
use cwak::multipoly::{reduce_function, w_pi};
use cwak::padic::PadicCtx;
use cwak::{parse_instance, FieldCtx, FqElem, IndexSet, MultiPoly, SystemInstance, UniPoly};

const FIELDS: [(u64, u32); 8] = [(2, 1), (2, 2), (3, 1), (2, 3), (3, 2), (5, 1), (7, 1), (2, 4)];

fn ctx(i: usize) -> Arc<FieldCtx> {
    let (p, s) = FIELDS[i];
    Arc::new(FieldCtx::new(p, s, None).unwrap())
}

fn elem(ctx: &FieldCtx, raw: u64) -> FqElem {
    ctx.elem(raw % ctx.q()).unwrap()
}

fn unipoly(ctx: &FieldCtx, raw: &[u64]) -> UniPoly {
    UniPoly::new(raw.iter().map(|&r| elem(ctx, r)).collect())
}

fn multipoly(ctx: &FieldCtx, n: usize, raw: &[(u64, Vec<u32>)]) -> MultiPoly {
    let terms = raw.iter().map(|(c, e)| (elem(ctx, *c), e[..n].to_vec())).collect();
    MultiPoly::new(ctx, n, terms).unwrap()
}

fn terms() -> impl Strategy<Value = Vec<(u64, Vec<u32>)>> {
    prop::collection::vec((any::<u64>(), prop::collection::vec(0u32..4, 3)), 1..5)
}

fn system(fi: usize, n: usize, fs: &[Vec<u64>], ps: &[Vec<(u64, Vec<u32>)>]) -> SystemInstance {
    let c = ctx(fi);
    let f_list = fs[..n].iter().map(|raw| unipoly(&c, raw)).collect();
    let p_list = ps.iter().map(|raw| multipoly(&c, n, raw)).collect();
    SystemInstance::new(c, f_list, p_list, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn field_axioms(fi in 0..FIELDS.len(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let k = ctx(fi);
        let (a, b, c) = (elem(&k, a), elem(&k, b), elem(&k, c));
        prop_assert_eq!(k.add(a, b), k.add(b, a));
        prop_assert_eq!(k.mul(a, b), k.mul(b, a));
        prop_assert_eq!(k.add(k.add(a, b), c), k.add(a, k.add(b, c)));
        prop_assert_eq!(k.mul(k.mul(a, b), c), k.mul(a, k.mul(b, c)));
        prop_assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
        prop_assert_eq!(k.add(a, k.neg(a)), FqElem::ZERO);
        prop_assert_eq!(k.mul(a, FqElem::ONE), a);
        prop_assert_eq!(k.mul(a, k.mul_poly_basis(b, c)), k.mul(a, k.mul(b, c)));
        if !a.is_zero() {
            prop_assert_eq!(k.mul(a, k.inv(a).unwrap()), FqElem::ONE);
            prop_assert_eq!(k.pow(a, k.q() - 1), FqElem::ONE);
        }
        prop_assert_eq!(k.pow(a, k.q()), a);
    }

    #[test]
    fn reduction_preserves_evaluation(fi in 0..FIELDS.len(), raw in prop::collection::vec(any::<u64>(), 0..40)) {
        let k = ctx(fi);
        let f = unipoly(&k, &raw);
        let g = reduce_function(&k, &f);
        prop_assert!(g.degree().map_or(true, |d| (d as u64) < k.q()));
        for x in k.elements() {
            prop_assert_eq!(f.eval(&k, x), g.eval(&k, x));
        }
    }

    #[test]
    fn degree_chain(fi in 0..FIELDS.len(), n in 1usize..4, raw in terms(), mask in 1usize..8) {
        let k = ctx(fi);
        let p = multipoly(&k, n, &raw);
        let members: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        prop_assume!(!members.is_empty());
        let index = IndexSet::new(&members, n).unwrap();
        let full = p.total_degree().finite();
        let partial = p.deg_i(&index).unwrap().finite();
        prop_assert_eq!(full.is_none(), partial.is_none());
        if let (Some(d), Some(di)) = (full, partial) {
            prop_assert!(di <= d);
            prop_assert!(w_pi(&k, &p, &index).unwrap() <= di);
        }
    }

    #[test]
    fn weighted_matches_brute(
        fi in 0..5usize,
        n in 1usize..4,
        fs in prop::collection::vec(prop::collection::vec(any::<u64>(), 0..5), 3),
        ps in prop::collection::vec(terms(), 1..3),
    ) {
        let sys = system(fi, n, &fs, &ps);
        let brute = counting::count_bruteforce(&sys, DEFAULT_BUDGET).unwrap();
        let weighted = counting::count_weighted(&sys, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(brute.count, weighted.count);
        prop_assert_eq!(brute.ord_p, weighted.ord_p);
    }

    #[test]
    fn diagonal_matches_brute(
        fi in 0..FIELDS.len(),
        a in prop::collection::vec(any::<u64>(), 1..4),
        m in prop::collection::vec(1u64..20, 3),
        b in any::<u64>(),
    ) {
        let k = ctx(fi);
        let a: Vec<FqElem> = a.iter().map(|&x| elem(&k, x)).filter(|x| !x.is_zero()).collect();
        prop_assume!(!a.is_empty());
        let n = a.len();
        let m = &m[..n];
        let b = elem(&k, b);
        let diag = counting::count_diagonal(&k, &a, m, b).unwrap();
        let fs = m.iter().map(|&e| UniPoly::monomial(FqElem::ONE, e as usize)).collect();
        let p = MultiPoly::linear(&k, &a, b).unwrap();
        let sys = SystemInstance::new(k.clone(), fs, vec![p], None).unwrap();
        prop_assert_eq!(diag.count, counting::count_bruteforce(&sys, DEFAULT_BUDGET).unwrap().count);
    }

    #[test]
    fn diagonal_counts_partition_space(
        fi in 0..FIELDS.len(),
        a in prop::collection::vec(1u64..1000, 1..4),
        m in prop::collection::vec(1u64..30, 3),
    ) {
        let k = ctx(fi);
        let a: Vec<FqElem> = a.iter().map(|&x| elem(&k, x)).filter(|x| !x.is_zero()).collect();
        prop_assume!(!a.is_empty());
        let n = a.len();
        let total: BigUint = k
            .elements()
            .map(|b| counting::count_diagonal(&k, &a, &m[..n], b).unwrap().count)
            .sum();
        prop_assert_eq!(total, BigUint::from(k.q()).pow(n as u32));
    }

    #[test]
    fn teichmuller_is_multiplicative(fi in 0..FIELDS.len(), prec in 1u32..5, a in any::<u64>(), b in any::<u64>()) {
        let k = ctx(fi);
        let pc = PadicCtx::new(k.clone(), prec).unwrap();
        let (a, b) = (elem(&k, a), elem(&k, b));
        let ta = pc.teichmuller(a).unwrap();
        let tb = pc.teichmuller(b).unwrap();
        let tab = pc.teichmuller(k.mul(a, b)).unwrap();
        prop_assert_eq!(pc.mul(&ta, &tb), tab);
        prop_assert_eq!(pc.reduce(&ta), a);
    }

    #[test]
    fn instance_json_round_trip(
        fi in 0..FIELDS.len(),
        n in 1usize..4,
        fs in prop::collection::vec(prop::collection::vec(any::<u64>(), 0..6), 3),
        ps in prop::collection::vec(terms(), 1..3),
    ) {
        let sys = system(fi, n, &fs, &ps);
        let file = sys.to_file();
        let text = file.to_json();
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(back.to_file(), file);
        prop_assert_eq!(back.f_list(), sys.f_list());
        prop_assert_eq!(back.p_list(), sys.p_list());
    }
}
