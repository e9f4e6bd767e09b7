mod common;

use common::{dk1_instances, miser_instances};
use itertools::Itertools;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regen_core::verifier::{
    check_alignment, check_component_nonsingular, check_passed_vector_independence,
    cutset_bound_ok, msr_params, verify_mds,
};
use regen_core::{Dk1Code, LinearCodeView, MiserCode, PrimeField};

fn random_message(rng: &mut ChaCha8Rng, b: usize, q: u32) -> Vec<u32> {
    (0..b).map(|_| rng.gen_range(0..q)).collect()
}

/// Helper sets for systematic repair: other systematic nodes plus every
/// α-subset of parity nodes.
fn helper_sets(code: &MiserCode, failed: usize) -> Vec<Vec<usize>> {
    let p = code.params();
    (p.k..p.n)
        .combinations(p.alpha)
        .map(|parity| {
            let mut h: Vec<usize> = (0..p.k).filter(|&j| j != failed).collect();
            h.extend(parity);
            h
        })
        .collect()
}

#[test]
fn miser_instances_are_mds_with_nonsingular_components() {
    let instances = miser_instances();
    assert!(instances.len() > 20);
    for code in &instances {
        let view = LinearCodeView::from(code);
        let report = verify_mds(&view).unwrap();
        assert!(
            report.is_mds(),
            "{:?} fails at {:?}",
            code.params(),
            report.first_failure
        );
        assert!(check_component_nonsingular(&view), "{:?}", code.params());
    }
}

#[test]
fn dk1_instances_are_mds() {
    for code in dk1_instances() {
        let report = verify_mds(&LinearCodeView::from(&code)).unwrap();
        assert!(report.is_mds(), "{:?}", code.params());
    }
}

#[test]
fn miser_repair_is_exact_for_every_helper_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for code in miser_instances() {
        let p = *code.params();
        let u = random_message(&mut rng, p.file_size, code.field().modulus());
        let table = code.encode(&u).unwrap();
        for failed in 0..p.k {
            for helpers in helper_sets(&code, failed) {
                let symbols: Vec<_> = helpers
                    .iter()
                    .map(|&h| code.repair_symbol(h, failed, &table[h]).unwrap())
                    .collect();
                assert_eq!(symbols.len(), p.d);
                assert!(p.d < p.file_size || p.k == 1);
                let rebuilt = code.repair_systematic(failed, &symbols).unwrap();
                assert_eq!(
                    rebuilt, table[failed],
                    "{p:?} failed={failed} helpers={helpers:?}"
                );
            }
        }
    }
}

#[test]
fn interference_is_aligned_for_every_instance() {
    for code in miser_instances() {
        let p = *code.params();
        let view = LinearCodeView::from(&code);
        for failed in 0..p.k {
            let idx = code.repair_symbol_index(failed).unwrap();
            for parity in (p.k..p.n).combinations(p.alpha) {
                let kernels: Vec<_> = parity.iter().map(|&m| code.kernel(m, idx)).collect();
                let report = check_alignment(&view, failed, &kernels).unwrap();
                assert!(report.passes(), "{p:?} {report:?}");
            }
        }
        for m in p.k..p.n {
            let kernels: Vec<_> = (0..p.k)
                .map(|l| code.kernel(m, code.repair_symbol_index(l).unwrap()))
                .collect();
            assert!(check_passed_vector_independence(&view, &kernels).unwrap());
        }
    }
}

#[test]
fn msr_params_meet_cutset_with_equality() {
    for n in 2..12usize {
        for k in 1..n {
            for d in k..n {
                for beta in 1..3 {
                    let (a, b) = msr_params(n, k, d, beta).unwrap();
                    assert!(cutset_bound_ok(b, k, d, a, beta));
                    assert!(!cutset_bound_ok(b + 1, k, d, a, beta));
                }
            }
        }
    }
}

#[test]
fn sigma_variant_is_mds_and_repairs() {
    let f7 = PrimeField::new(7).unwrap();
    let code = MiserCode::construct_sigma_variant(
        3,
        f7,
        vec![vec![2, 3, 2], vec![3, 2, 2], vec![2, 2, 3]],
    )
    .unwrap();
    assert!(verify_mds(&LinearCodeView::from(&code)).unwrap().is_mds());
    let u = vec![6, 5, 4, 3, 2, 1, 0, 1, 2];
    let table = code.encode(&u).unwrap();
    for failed in 0..3 {
        let helpers: Vec<usize> = (0..6).filter(|&h| h != failed).collect();
        let contents: Vec<_> = helpers.iter().map(|&h| table[h].clone()).collect();
        assert_eq!(
            code.repair_from_contents(failed, &helpers, &contents)
                .unwrap(),
            table[failed]
        );
    }
}

#[test]
fn dk1_churn_keeps_every_subset_decodable() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for mut code in dk1_instances() {
        let p = *code.params();
        let q = code.field().modulus();
        let u = random_message(&mut rng, p.file_size, q);
        let mut table = code.encode(&u).unwrap();
        let original = table.clone();
        for _ in 0..10 {
            let failed = rng.gen_range(0..p.n);
            let mut pool: Vec<usize> = (0..p.n).filter(|&h| h != failed).collect();
            for i in (1..pool.len()).rev() {
                pool.swap(i, rng.gen_range(0..=i));
            }
            let helpers = &pool[..p.d];
            let plan = code.plan_repair(failed, helpers).unwrap();
            assert_eq!(*plan.lambdas.last().unwrap(), 0);
            let contents: Vec<_> = helpers.iter().map(|&h| table[h].clone()).collect();
            table[failed] = code.repair(failed, helpers, &contents).unwrap();
            assert_eq!(table[failed][0], original[failed][0]);
        }
        for set in (0..p.n).combinations(p.k) {
            let contents: Vec<_> = set.iter().map(|&m| table[m].clone()).collect();
            assert_eq!(code.reconstruct(&set, &contents).unwrap(), u);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn miser_repair_round_trip(seed in any::<u64>(), failed in 0usize..3) {
        let code = MiserCode::construct(3, PrimeField::new(7).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_message(&mut rng, 9, 7);
        let table = code.encode(&u).unwrap();
        let helpers: Vec<usize> = (0..6).filter(|&h| h != failed).collect();
        let contents: Vec<_> = helpers.iter().map(|&h| table[h].clone()).collect();
        let rebuilt = code.repair_from_contents(failed, &helpers, &contents).unwrap();
        prop_assert_eq!(&rebuilt[..], &u[failed * 3..failed * 3 + 3]);
    }

    #[test]
    fn dk1_first_symbol_exact(seed in any::<u64>(), failed in 0usize..8) {
        let mut code = Dk1Code::new(8, 5, PrimeField::new(11).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_message(&mut rng, 10, 11);
        let table = code.encode(&u).unwrap();
        let helpers: Vec<usize> = (0..8).filter(|&h| h != failed).take(6).collect();
        let plan = code.plan_repair(failed, &helpers).unwrap();
        prop_assert!(plan.rho[..5].iter().all(|&v| v != 0));
        // δ1ᵗ P_k = p_f
        let f = code.field();
        for j in 0..5 {
            let s = (0..5).fold(0, |acc, i| {
                f.mul_add(acc, plan.delta[i], code.p_vector(plan.helpers[i])[j])
            });
            prop_assert_eq!(s, code.p_vector(failed)[j]);
        }
        let contents: Vec<_> = helpers.iter().map(|&h| table[h].clone()).collect();
        let fresh = code.repair(failed, &helpers, &contents).unwrap();
        prop_assert_eq!(fresh[0], table[failed][0]);
        prop_assert_eq!(fresh, code.encode_node(&u, failed).unwrap());
    }
}
