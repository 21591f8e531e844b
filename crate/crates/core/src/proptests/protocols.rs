use proptest::prelude::*;

use crate::channels::{measurement_map, TpClass};
use crate::protocols::{
    destroy_run, destroy_theorem_rate, fqsw_run, fqsw_theorem_rates, merge_run, merge_theorem_rates, schumacher_run, schumacher_theorem_rate, MergeConfig,
    ProtocolOptions,
};
use crate::qmat::{purify, CMat, DensityOp, SubsystemSpace};
use crate::twirl::{random_pure, RngSeed};

use super::sp;

fn abr(seed: u64) -> crate::qmat::PureState {
    random_pure(&sp(&["A", "B", "R"], &[2, 2, 2]), RngSeed::new(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn schumacher_result_is_consistent(p in 0.55f64..0.98, n in 1usize..4, db in 1usize..5, seed in any::<u64>()) {
        let psi = purify(&DensityOp::diag(sp(&["A"], &[2]), &[p, 1.0 - p]).unwrap(), "R").unwrap();
        let db = db.min(1 << n);
        let opts = ProtocolOptions::default();
        let r = schumacher_run(&psi, n, db, RngSeed::new(seed), &opts).unwrap();
        prop_assert!(r.measured_error <= r.bound);
        let want = schumacher_theorem_rate(r.details["h_tilde"], 2, n, opts.delta1);
        prop_assert!((r.rates["theorem_rate"] - want).abs() <= 1e-12);
    }

    #[test]
    fn fqsw_result_is_consistent(n in 1usize..3, k1 in 0usize..3, k2 in 0usize..3, seed in any::<u64>()) {
        let (a1, a2) = (1usize << k1.min(n), 1usize << k2.min(n));
        prop_assume!(a1 * a2 <= 1 << n);
        let opts = ProtocolOptions::default();
        let r = fqsw_run(&abr(seed), n, a1, a2, RngSeed::new(seed ^ 1), &opts).unwrap();
        prop_assert!(r.measured_error <= r.bound);
        let (q, e) = fqsw_theorem_rates(r.details["h_tilde"], r.details["h_cond"], 2, 2, n, opts.delta1, opts.delta2);
        prop_assert!((r.rates["theorem_quantum_communication"] - q).abs() <= 1e-12);
        prop_assert!((r.rates["theorem_entanglement_gain"] - e).abs() <= 1e-12);
    }

    #[test]
    fn merge_result_is_consistent(n in 1usize..3, a0 in 1usize..3, a1 in 1usize..3, ke in 0usize..3, seed in any::<u64>()) {
        let e = 1usize << ke.min(n);
        prop_assume!(a1 <= a0 * e && a0 <= a1 * (1 << n));
        let opts = ProtocolOptions::default();
        let r = merge_run(&abr(seed), n, &MergeConfig::new(a0, a1, e).unwrap(), RngSeed::new(seed ^ 2), &opts).unwrap();
        prop_assert!(r.measured_error <= r.bound);
        prop_assert!(r.details["omega_distance"] < r.details["two_over_zeta"]);
        let (ent, cost, log_e) = merge_theorem_rates(r.details["h_tilde"], r.details["h_cond"], 2, 2, n, opts.delta1, opts.delta2);
        prop_assert!((r.rates["theorem_entanglement_rate"] - ent).abs() <= 1e-12);
        prop_assert!((r.rates["theorem_classical_cost"] - cost).abs() <= 1e-12);
        prop_assert!((r.rates["theorem_log_e_rate"] - log_e).abs() <= 1e-12);
    }

    #[test]
    fn destroy_result_is_consistent(n in 1usize..3, km in 0usize..5, seed in any::<u64>()) {
        let m = (1usize << km).min(1 << (2 * n));
        let rho = crate::twirl::random_density(&sp(&["A", "R"], &[2, 2]), 2, RngSeed::new(seed)).unwrap();
        let opts = ProtocolOptions::default();
        let r = destroy_run(&rho, n, m, RngSeed::new(seed ^ 3), &opts).unwrap();
        prop_assert!(r.measured_error <= r.bound);
        let want = destroy_theorem_rate(r.details["h_tilde"], r.details["h_cond"], r.details["dim_e"] as usize, 2, n, opts.delta1);
        prop_assert!((r.rates["theorem_rate"] - want).abs() <= 1e-12);
    }

    #[test]
    fn measurement_register_is_complete(b in 1usize..4, c in 1usize..4, d in 1usize..6) {
        prop_assume!(d <= b * c);
        let bc = SubsystemSpace::new(&["B", "C"], &[b, c]).unwrap();
        let m = measurement_map(&bc, &sp(&["D"], &[d]), "X").unwrap();
        let sum = m.ops.iter().fold(CMat::zeros(b * c, b * c), |acc, x| acc + x.adjoint() * x);
        prop_assert!((sum - CMat::identity(b * c, b * c)).camax() <= 1e-9);
        prop_assert_eq!(m.map.tp_class(), TpClass::Cptp);
    }
}
