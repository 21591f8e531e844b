use proptest::prelude::*;

use super::{sp, state};
use crate::channels::{Class1Verdict, KrausMap};
use crate::qmat::{LabeledOperator, PartialIsom, C64};
use crate::twirl::{ginibre, haar_matrix, RngSeed};

fn random_cp(din: usize, dout: usize, k: usize, inl: &str, outl: &str, seed: u64) -> KrausMap {
    let mut rng = RngSeed::new(seed).rng();
    let kraus = (0..k).map(|_| ginibre(dout, din, &mut rng)).collect();
    KrausMap::new(sp(&[inl], &[din]), sp(&[outl], &[dout]), kraus).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn map_is_recovered_from_its_choi_matrix(din in 1usize..4, dout in 1usize..4, k in 1usize..4, seed in any::<u64>()) {
        let t = random_cp(din, dout, k, "A", "B", seed);
        let choi = t.choi().unwrap();
        // T(X) = |A| Σ_{ab} X_{ab} ω_{(·,a),(·,b)} with ω ordered out ⊗ in′
        let w = choi.op.mat();
        let x = ginibre(din, din, &mut RngSeed::new(seed ^ 1).rng());
        let mut rebuilt = crate::qmat::CMat::zeros(dout, dout);
        for a in 0..din {
            for b in 0..din {
                for e in 0..dout {
                    for f in 0..dout {
                        rebuilt[(e, f)] += x[(a, b)] * w[(e * din + a, f * din + b)] * C64::new(din as f64, 0.0);
                    }
                }
            }
        }
        let direct = t.apply(&LabeledOperator::new(sp(&["A"], &[din]), x).unwrap()).unwrap();
        prop_assert!((direct.mat() - rebuilt).camax() <= 1e-9 * (1.0 + direct.mat().norm()));
    }

    #[test]
    fn theta_adds_over_tensor_products(d1 in 1usize..4, d2 in 1usize..3, o1 in 1usize..3, o2 in 1usize..4, seed in any::<u64>()) {
        let t1 = random_cp(d1, o1, 2, "A1", "B1", seed);
        let t2 = random_cp(d2, o2, 3, "A2", "B2", seed ^ 99);
        let sum = t1.theta().unwrap().theta + t2.theta().unwrap().theta;
        prop_assert!((t1.tensor(&t2).unwrap().theta().unwrap().theta - sum).abs() <= 1e-7);
    }

    #[test]
    fn partial_isometry_theta_bound(a1 in 1usize..5, a2 in 1usize..5, extra in 0usize..3, compressive in any::<bool>(), seed in any::<u64>()) {
        prop_assume!(a1 * a2 <= 16);
        let da = a1 * a2 + extra;
        let out = sp(&["A1", "A2"], &[a1, a2]);
        let w = haar_matrix(da, &mut RngSeed::new(seed).rng()).rows(0, a1 * a2).into_owned();
        let w = PartialIsom::new(sp(&["A"], &[da]), out.clone(), w).unwrap();
        let t = if compressive { KrausMap::compressive(&w) } else { KrausMap::t_w(&w) }.unwrap();
        let theta = KrausMap::partial_trace(&out, &["A2"]).unwrap().compose(&t).unwrap().theta().unwrap().theta;
        prop_assert!(theta <= (a1 as f64 / a2 as f64).log2() + 1e-9);
    }

    #[test]
    fn certified_maps_pass_the_sampled_check(din in 2usize..4, dout in 1usize..4, which in 0usize..3, seed in any::<u64>()) {
        let a = sp(&["A"], &[din]);
        let t = match which {
            0 => KrausMap::random_cptp(a, sp(&["B"], &[dout]), din.div_ceil(dout) + 1, RngSeed::new(seed)).unwrap(),
            1 => {
                let w = haar_matrix(din, &mut RngSeed::new(seed).rng()).rows(0, dout.min(din)).into_owned();
                KrausMap::t_w(&PartialIsom::new(a, sp(&["B"], &[dout.min(din)]), w).unwrap()).unwrap()
            }
            _ => KrausMap::full_trace(a),
        };
        let rep = t.is_class1(200, RngSeed::new(seed ^ 5)).unwrap();
        prop_assert!(rep.verdict != Class1Verdict::Unknown);
        prop_assert!(!rep.violated, "z = {}", rep.worst_z);
    }
}

#[test]
fn doubled_identity_is_not_class1() {
    let t = KrausMap::identity(sp(&["A"], &[2])).scaled(2.0).unwrap();
    let rep = t.is_class1(200, RngSeed::new(1)).unwrap();
    assert_eq!(rep.verdict, Class1Verdict::Unknown);
    assert!(rep.violated);
    let _ = state(&["A"], &[2], 1, 0);
}
