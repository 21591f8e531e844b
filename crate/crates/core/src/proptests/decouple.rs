use proptest::prelude::*;

use super::{sp, state};
use crate::channels::KrausMap;
use crate::cli::build_map_power;
use crate::decouple::{exponent_factor, mc_lhs, projector_pair, thm1_rhs, thm1_rhs_iid, DecouplingInstance};
use crate::entropy::DivergenceType;
use crate::twirl::{haar_matrix, RngSeed};

fn dtype(sandwiched: bool) -> DivergenceType {
    if sandwiched {
        DivergenceType::Sandwiched
    } else {
        DivergenceType::Old
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bound_holds_on_random_instances(da in 2usize..4, dr in 2usize..4, db in 1usize..4, ai in 0usize..3, sandwiched in any::<bool>(), seed in any::<u64>()) {
        let rho = state(&["A", "R"], &[da, dr], 1 + (seed % (da * dr) as u64) as usize, seed);
        let t = KrausMap::random_cptp(sp(&["A"], &[da]), sp(&["B"], &[db]), da.div_ceil(db) + 1, RngSeed::new(seed ^ 1)).unwrap();
        let inst = DecouplingInstance::new(rho, &["A"], t, [1.25, 1.5, 2.0][ai], dtype(sandwiched)).unwrap();
        let rhs = thm1_rhs(&inst).unwrap().rhs;
        let lhs = mc_lhs(&inst, 400, RngSeed::new(seed ^ 2)).unwrap();
        prop_assert!(lhs.mean <= rhs + 3.0 * lhs.stderr, "{} > {rhs}", lhs.mean);
    }

    #[test]
    fn n_copy_divergence_term_is_additive(n in 1usize..3, alpha in 1.1f64..2.0, sandwiched in any::<bool>(), seed in any::<u64>()) {
        let rho = state(&["A", "R"], &[2, 2], 3, seed);
        let sigma = state(&["R"], &[2], 2, seed ^ 4);
        let t_n = build_map_power("depolarizing(0.3)", &sp(&["A"], &[2]), n, RngSeed::new(0)).unwrap();
        let iid = DecouplingInstance::iid(rho.clone(), &["A"], n, t_n.clone(), alpha, dtype(sandwiched)).unwrap().with_sigma(sigma.clone()).unwrap();
        let (rho_n, sigma_n, a_n) = if n == 1 {
            (rho, sigma, vec!["A".to_string()])
        } else {
            (rho.tensor_power(n).unwrap(), sigma.tensor_power(n).unwrap(), crate::qmat::copy_labels(&["A"], n))
        };
        let whole = DecouplingInstance::new(rho_n, &a_n, t_n, alpha, dtype(sandwiched)).unwrap().with_sigma(sigma_n).unwrap();
        let a = thm1_rhs_iid(&iid).unwrap().terms.d_alpha_term;
        let b = thm1_rhs(&whole).unwrap().terms.d_alpha_term;
        prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }

    #[test]
    fn proof_split_is_a_triangle_inequality(da in 2usize..4, dr in 1usize..3, zeta in 0.05f64..20.0, seed in any::<u64>()) {
        let rho = state(&["A", "R"], &[da, dr], da * dr, seed);
        let sigma = state(&["R"], &[dr], dr, seed ^ 6);
        let sigma_ar = crate::qmat::LabeledOperator::identity(sp(&["A"], &[da])).tensor(sigma.op()).unwrap();
        let pair = projector_pair(&rho, &sigma_ar, zeta).unwrap();
        let t = KrausMap::random_cptp(sp(&["A"], &[da]), sp(&["B"], &[2]), da, RngSeed::new(seed ^ 7)).unwrap();
        let u = haar_matrix(da, &mut RngSeed::new(seed ^ 8).rng());
        let (whole, p1, p2) = pair.split_errors(&t, &rho, &u).unwrap();
        prop_assert!(whole <= p1 + p2 + 1e-9);
    }

    #[test]
    fn exponent_factor_increases_with_alpha(a in 1.0f64..2.0, b in 1.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(exponent_factor(lo) <= exponent_factor(hi));
    }
}
