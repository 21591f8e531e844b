//! Second twirl moment: exact Clifford average and Haar Monte Carlo against
//! the closed form.

use decoupling::qmat::{CMat, LabeledOperator, SubsystemSpace};
use decoupling::twirl::{exact_average_op, ginibre, mc_average_op, twirl_moment2, RngSeed, UnitaryEnsemble};

fn op(space: SubsystemSpace, seed: u64) -> LabeledOperator {
    let d = space.total_dim();
    LabeledOperator::new(space, ginibre(d, d, &mut RngSeed::new(seed).rng())).unwrap()
}

fn main() -> decoupling::Result<()> {
    for d in [2usize, 3] {
        let a = SubsystemSpace::single("A", d)?;
        let ar = SubsystemSpace::new(&["A", "R"], &[d, 2])?;
        let (sigma, x, w) = (op(ar.clone(), 1), op(a.clone(), 2), op(SubsystemSpace::single("R", 2)?, 3));
        let xw = x.tensor(&w)?;
        let f = |u: &CMat| {
            let rot = sigma.conjugate_local(u, &["A"], &a).unwrap().aligned_to(&ar).unwrap();
            LabeledOperator::new(ar.clone(), rot.mat() * xw.mat() * rot.mat().adjoint()).unwrap()
        };
        let closed = twirl_moment2(&sigma, &x, &w)?;
        if d == 2 {
            let ex = exact_average_op(f, &UnitaryEnsemble::clifford_qubit())?;
            println!("|A| = 2  Clifford (24 elements) max |dev| = {:.2e}", ex.max_abs_diff(&closed)?);
        }
        for n in [500, 5000, 20000] {
            let est = mc_average_op(f, &UnitaryEnsemble::haar(d), n, RngSeed::new(9))?;
            let dev = est.mean.sub(&closed)?.mat().norm();
            println!("|A| = {d}  Haar N = {n:>5}  ‖dev‖ = {dev:.4}  stderr = {:.4}  z = {:.2}", est.stderr, dev / est.stderr);
        }
    }
    Ok(())
}
