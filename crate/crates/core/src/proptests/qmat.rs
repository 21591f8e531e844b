use proptest::prelude::*;

use super::{sp, state};
use crate::channels::KrausMap;
use crate::qmat::{fidelity, pinch, positive_part_projector, purify, trace_norm, LabeledOperator};
use crate::twirl::{ginibre, haar_matrix, RngSeed};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_norm_is_unitarily_invariant(d in 2usize..5, seed in any::<u64>()) {
        let mut rng = RngSeed::new(seed).rng();
        let m = ginibre(d, d, &mut rng);
        let (u, v) = (haar_matrix(d, &mut rng), haar_matrix(d, &mut rng));
        let a = sp(&["A"], &[d]);
        let before = trace_norm(&LabeledOperator::new(a.clone(), m.clone()).unwrap());
        let after = trace_norm(&LabeledOperator::new(a, &u * m * v.adjoint()).unwrap());
        prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before));
    }

    #[test]
    fn channels_contract_trace_distance(din in 2usize..5, dout in 2usize..5, extra in 0usize..3, seed in any::<u64>()) {
        let a = sp(&["A"], &[din]);
        let kraus = din.div_ceil(dout) + extra;
        let e = KrausMap::random_cptp(a, sp(&["B"], &[dout]), kraus, RngSeed::new(seed)).unwrap();
        let rho = state(&["A"], &[din], din, seed ^ 1);
        let sigma = state(&["A"], &[din], 1, seed ^ 2);
        let before = rho.op().sub(sigma.op()).unwrap().trace_norm();
        let after = e.apply(rho.op()).unwrap().sub(&e.apply(sigma.op()).unwrap()).unwrap().trace_norm();
        prop_assert!(after <= before + 1e-9);
    }

    #[test]
    fn partial_trace_of_tensor_scales_by_trace(da in 1usize..4, db in 1usize..4, seed in any::<u64>()) {
        let mut rng = RngSeed::new(seed).rng();
        let x = LabeledOperator::new(sp(&["A"], &[da]), ginibre(da, da, &mut rng)).unwrap();
        let y = LabeledOperator::new(sp(&["B"], &[db]), ginibre(db, db, &mut rng)).unwrap();
        let got = x.tensor(&y).unwrap().partial_trace(&["B"]).unwrap();
        let want = x.scale_c(y.trace());
        prop_assert!(got.max_abs_diff(&want).unwrap() <= 1e-10 * (1.0 + want.mat().norm()));
    }

    #[test]
    fn pinching_is_idempotent(d in 2usize..5, degenerate in any::<bool>(), seed in any::<u64>()) {
        let sigma = if degenerate {
            // a repeated eigenvalue exercises the block structure
            let mut e = vec![0.5 / (d - 1) as f64; d];
            e[0] = 0.5;
            LabeledOperator::diag(sp(&["A"], &[d]), &e).unwrap()
        } else {
            state(&["A"], &[d], d, seed).into_op()
        };
        let rho = state(&["A"], &[d], 2, seed ^ 7).into_op();
        let once = pinch(&sigma, &rho).unwrap();
        let twice = pinch(&sigma, &once).unwrap();
        prop_assert!(once.max_abs_diff(&twice).unwrap() <= 1e-10);
    }

    #[test]
    fn positive_part_projector_splits_the_difference(d in 2usize..5, scale in 0.1f64..3.0, seed in any::<u64>()) {
        let rho = state(&["A"], &[d], d, seed).into_op();
        let sigma = state(&["A"], &[d], d, seed ^ 3).into_op().scale(scale);
        let p = positive_part_projector(&rho, &sigma).unwrap();
        let diff = rho.sub(&sigma).unwrap();
        let pos = p.mul(&diff).unwrap().trace().re;
        let q = LabeledOperator::identity(rho.space().clone()).sub(&p).unwrap();
        let neg = q.mul(&diff).unwrap().trace().re;
        prop_assert!(pos >= -1e-9 && neg <= 1e-9);
    }

    #[test]
    fn purification_reduces_back(d in 1usize..5, rank in 1usize..5, seed in any::<u64>()) {
        let rho = state(&["A"], &[d], rank, seed);
        let psi = purify(&rho, "R").unwrap();
        let back = psi.reduce_to(&["A"]).unwrap();
        prop_assert!(back.op().max_abs_diff(rho.op()).unwrap() <= 1e-9);
    }

    #[test]
    fn fidelity_grows_under_partial_trace(da in 2usize..4, db in 2usize..4, seed in any::<u64>()) {
        let rho = state(&["A", "B"], &[da, db], 1 + (seed % 4) as usize, seed);
        let sigma = state(&["A", "B"], &[da, db], 2, seed ^ 11);
        let whole = fidelity(rho.op(), sigma.op()).unwrap();
        let part = fidelity(rho.reduce_to(&["A"]).unwrap().op(), sigma.reduce_to(&["A"]).unwrap().op()).unwrap();
        prop_assert!(part >= whole - 1e-9);
    }
}
