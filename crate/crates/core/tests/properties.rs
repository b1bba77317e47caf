use cokernels::experiments::{enumerate_full, residue_rank_census};
use cokernels::formulas::{cl_limit, main2_factor, main_limit, ProblemInstance};
use cokernels::random::{random_block_op, random_irreducible, random_matrix, random_partition, random_structured_matrix};
use cokernels::snf::{cokernel_via_lee_exponents, minor_gcd_valuations};
use cokernels::{smith_normal_form, ChainRing, ModuleType, PolySpec, RingMatrix};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ring_strategy() -> impl Strategy<Value = ChainRing> {
    (prop_oneof![Just(2u64), Just(3), Just(5), Just(7)], 1u32..=4, 0usize..=3).prop_map(|(p, k, d)| {
        if d <= 1 {
            ChainRing::integers(p, k).unwrap()
        } else {
            ChainRing::extension(&PolySpec::first_irreducible(p, d).unwrap(), k).unwrap()
        }
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(ring in ring_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_matrix(&ring, 1, 3, &mut r);
        let (a, b, c) = (m.get(0, 0), m.get(0, 1), m.get(0, 2));
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.add(&a.neg()).unwrap(), ring.zero());
        prop_assert_eq!(a.mul(&ring.one()).unwrap(), a.clone());
        let vab = a.mul(&b).unwrap().valuation();
        prop_assert_eq!(vab, (a.valuation() + b.valuation()).min(ring.k()));
        if a.is_unit() {
            prop_assert_eq!(a.mul(&a.inverse().unwrap()).unwrap(), ring.one());
        }
    }

    #[test]
    fn snf_transforms(ring in ring_strategy(), rows in 1usize..=4, cols in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_structured_matrix(&ring, rows, cols, &mut r);
        let snf = smith_normal_form(&x, true);
        let (left, right) = (snf.left.clone().unwrap(), snf.right.clone().unwrap());
        prop_assert!(left.is_invertible() && right.is_invertible());
        prop_assert_eq!(left.mul(&x).unwrap().mul(&right).unwrap(), snf.diagonal(&ring, rows, cols));
        prop_assert!(snf.exponents.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(&snf.exponents, &smith_normal_form(&x, false).exponents);
    }

    #[test]
    fn minors_match_invariant_factors(ring in ring_strategy(), n in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_structured_matrix(&ring, n, n, &mut r);
        let d = smith_normal_form(&x, false).exponents;
        let v = minor_gcd_valuations(&x).unwrap();
        for i in 0..n {
            let prev = if i == 0 { 0 } else { v[i - 1] };
            prop_assert_eq!(d[i], (v[i] - prev).min(ring.k()));
        }
    }

    #[test]
    fn block_ops_preserve_snf(ring in ring_strategy(), n in 1usize..=5, rows in any::<bool>(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_structured_matrix(&ring, n, n, &mut r);
        let part = random_partition(n, 3, &mut r);
        let op = random_block_op(&ring, &part, rows, &mut r);
        let y = if rows { x.block_row_op(&part, &op).unwrap() } else { x.block_col_op(&part, &op).unwrap() };
        prop_assert_eq!(smith_normal_form(&x, false).exponents, smith_normal_form(&y, false).exponents);
    }

    #[test]
    fn lee_transport(p in prop_oneof![Just(2u64), Just(3)], d in 1usize..=3, m in 1u32..=3, n in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let poly = random_irreducible(p, d, m, &mut r);
        let ring = ChainRing::integers(p, m).unwrap();
        let x = random_structured_matrix(&ring, n, n, &mut r);
        let mut group = smith_normal_form(&x.poly_eval(&poly).unwrap(), false).exponents;
        let mut lee: Vec<u32> = cokernel_via_lee_exponents(&x, &poly).unwrap()
            .into_iter()
            .flat_map(|e| std::iter::repeat_n(e, d))
            .collect();
        group.retain(|&e| e > 0);
        lee.retain(|&e| e > 0);
        group.sort_unstable();
        lee.sort_unstable();
        prop_assert_eq!(group, lee);
    }

    #[test]
    fn module_type_text_round_trip(exps in proptest::collection::vec(1u32..6, 0..6), d in 1u32..=3) {
        let g = ModuleType::from_invariant_exponents(&exps, d);
        prop_assert_eq!(ModuleType::parse(&g.to_string(), d).unwrap(), g.clone());
        let json = serde_json::to_string(&g).unwrap();
        prop_assert_eq!(serde_json::from_str::<ModuleType>(&json).unwrap(), g);
    }

    #[test]
    fn matrix_text_round_trip(ring in ring_strategy(), rows in 1usize..=3, cols in 1usize..=3, seed in any::<u64>()) {
        let x = random_matrix(&ring, rows, cols, &mut rng(seed));
        prop_assert_eq!(RingMatrix::parse(&ring, &x.to_text()).unwrap(), x);
    }
}

/// `(p, n, N, polys, targets)`.
type Case = (u64, u32, u32, &'static [&'static str], &'static [&'static str]);

/// Random instances of the constant-multiple identity, both sides exact.
#[test]
fn constant_multiple_identity_on_small_instances() {
    let cases: &[Case] = &[
        (2, 2, 1, &["0,1"], &["1^1"]),
        (2, 2, 2, &["0,1"], &["2^1"]),
        (2, 2, 2, &["0,1", "1,1"], &["1^1", "1^1"]),
        (3, 2, 1, &["0,1", "1,1"], &["0", "1^1"]),
        (2, 2, 1, &["1,1,1"], &["1^1"]),
        (2, 3, 1, &["0,1", "1,1,1"], &["1^1", "1^1"]),
    ];
    for &(p, n, big_n, polys, targets) in cases {
        let inst = ProblemInstance::parse(p, polys, targets, n, big_n).unwrap();
        let full = enumerate_full(&inst, 1 << 26).unwrap();
        let lhs = BigRational::new(BigUint::from(full.count).into(), BigUint::from(full.total).into());
        let residue = BigRational::new(BigUint::from(full.residue_count).into(), BigUint::from(full.residue_total).into());
        assert_eq!(lhs, main2_factor(&inst) * residue, "{}", inst.describe());
    }
}

#[test]
fn limit_is_factor_times_rank_limit() {
    let inst = ProblemInstance::parse(3, &["0,1", "1,0,1"], &["2^1,1^2", "1^1"], 6, 2).unwrap();
    let tol = 1e-11;
    let ranks: Vec<u32> = inst.targets().iter().map(|g| g.residue_rank()).collect();
    let cl = cl_limit(3, &[1, 2], &ranks, tol).unwrap().value;
    let lhs = main2_factor(&inst).to_f64().unwrap() * cl;
    assert!((lhs - main_limit(&inst, tol).value).abs() < 2.0 * tol);
}

#[test]
fn rank_census_marginals() {
    let polys = [PolySpec::identity(3).unwrap(), PolySpec::parse("1,0,1", 3).unwrap()];
    let joint = residue_rank_census(3, 2, &polys, 1 << 20).unwrap();
    for (j, poly) in polys.iter().enumerate() {
        let single = residue_rank_census(3, 2, std::slice::from_ref(poly), 1 << 20).unwrap();
        assert_eq!(joint.marginal(j), single);
    }
}
