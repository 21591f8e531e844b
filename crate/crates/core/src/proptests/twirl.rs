use proptest::prelude::*;

use super::sp;
use crate::channels::KrausMap;
use crate::qmat::{linalg, LabeledOperator};
use crate::twirl::{ginibre, mc_average, second_moment_delta, twirl_moment2, RngSeed, UnitaryEnsemble};

fn herm(space: crate::qmat::SubsystemSpace, seed: u64) -> LabeledOperator {
    let d = space.total_dim();
    let g = ginibre(d, d, &mut RngSeed::new(seed).rng());
    LabeledOperator::new(space, linalg::hermitian_part(&g)).unwrap()
}

#[test]
fn haar_trace_second_moment_is_one() {
    for d in 2..=4 {
        let est = mc_average(|u| u.trace().norm_sqr(), &UnitaryEnsemble::haar(d), 100_000, RngSeed::new(d as u64)).unwrap();
        assert!((est.mean - 1.0).abs() <= 3.0 * est.stderr, "d = {d}: {} ± {}", est.mean, est.stderr);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn hermitian_inputs_give_hermitian_second_moment(da in 2usize..4, dr in 1usize..3, seed in any::<u64>()) {
        let sigma = herm(sp(&["A", "R"], &[da, dr]), seed);
        let x = herm(sp(&["A"], &[da]), seed ^ 1);
        let w = herm(sp(&["R"], &[dr]), seed ^ 2);
        let m = twirl_moment2(&sigma, &x, &w).unwrap();
        prop_assert!(linalg::asymmetry(m.mat()) <= 1e-10);
    }

    #[test]
    fn second_moment_of_delta_is_psd(da in 2usize..4, db in 1usize..4, dr in 1usize..3, seed in any::<u64>()) {
        let t = KrausMap::random_cptp(sp(&["A"], &[da]), sp(&["B"], &[db]), da.div_ceil(db) + 1, RngSeed::new(seed)).unwrap();
        let d = da * dr;
        let g = ginibre(d, d, &mut RngSeed::new(seed ^ 3).rng());
        let sigma = LabeledOperator::new(sp(&["A", "R"], &[da, dr]), g).unwrap();
        let sm = second_moment_delta(&t, &sigma).unwrap();
        let scale = 1.0 + sm.exact.mat().norm();
        prop_assert!(sm.exact.min_eig() >= -1e-9 * scale);
    }
}
