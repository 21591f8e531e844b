use proptest::prelude::*;

use super::{sp, state};
use crate::entropy::{d_alpha, duality_check, h_cond, Arrow, DivergenceType, RenyiParams};
use crate::twirl::{random_pure, RngSeed};

fn dtype(sandwiched: bool) -> DivergenceType {
    if sandwiched {
        DivergenceType::Sandwiched
    } else {
        DivergenceType::Old
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn divergence_is_nonnegative(d in 2usize..5, alpha in 0.5f64..2.0, sandwiched in any::<bool>(), seed in any::<u64>()) {
        let rho = state(&["A"], &[d], 1 + (seed % d as u64) as usize, seed);
        let sigma = state(&["A"], &[d], d, seed ^ 5);
        let p = RenyiParams::new(alpha, dtype(sandwiched), Arrow::FixedMarginal).unwrap();
        prop_assert!(d_alpha(rho.op(), sigma.op(), &p).unwrap() >= -1e-9);
    }

    #[test]
    fn divergence_grows_with_alpha(d in 2usize..4, sandwiched in any::<bool>(), seed in any::<u64>()) {
        let rho = state(&["A"], &[d], d, seed);
        let sigma = state(&["A"], &[d], d, seed ^ 9);
        let mut last = f64::NEG_INFINITY;
        for k in 0..=9 {
            let alpha = 1.1 + 0.1 * k as f64;
            let p = RenyiParams::new(alpha.min(2.0), dtype(sandwiched), Arrow::FixedMarginal).unwrap();
            let v = d_alpha(rho.op(), sigma.op(), &p).unwrap();
            prop_assert!(v >= last - 1e-9, "α = {alpha}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn sandwiched_never_exceeds_old(d in 2usize..4, alpha in 1.0001f64..=2.0, seed in any::<u64>()) {
        let rho = state(&["A"], &[d], 1 + (seed % d as u64) as usize, seed);
        let sigma = state(&["A"], &[d], d, seed ^ 13);
        let s = d_alpha(rho.op(), sigma.op(), &RenyiParams::sandwiched(alpha).unwrap()).unwrap();
        let o = d_alpha(rho.op(), sigma.op(), &RenyiParams::old(alpha).unwrap()).unwrap();
        prop_assert!(s <= o + 1e-9);
    }

    #[test]
    fn optimizing_the_conditioner_only_helps(da in 2usize..4, db in 2usize..4, alpha in 0.5f64..2.0, sandwiched in any::<bool>(), seed in any::<u64>()) {
        let rho = state(&["A", "B"], &[da, db], da * db, seed);
        let up = h_cond(&rho, &["B"], &RenyiParams::new(alpha, dtype(sandwiched), Arrow::Optimized).unwrap()).unwrap().value;
        let down = h_cond(&rho, &["B"], &RenyiParams::new(alpha, dtype(sandwiched), Arrow::FixedMarginal).unwrap()).unwrap().value;
        prop_assert!(up >= down - 1e-9);
    }

    #[test]
    fn sandwiched_duality(alpha in 0.55f64..2.0, dims in (2usize..4, 2usize..4, 2usize..4), seed in any::<u64>()) {
        let space = sp(&["A", "B", "C"], &[dims.0, dims.1, dims.2]);
        let psi = random_pure(&space, RngSeed::new(seed)).unwrap().projector();
        let rep = duality_check(&psi, &["A"], &["B"], &["C"], alpha).unwrap();
        prop_assert!(rep.residual.abs() <= 1e-6, "residual {}", rep.residual);
    }
}
