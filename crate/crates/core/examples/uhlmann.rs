//! Fuchs–van de Graaf for subnormalized states, and an Uhlmann extension
//! whose error stays under Ξ(ε).

use decoupling::protocols::{fuchs_vdg_check, pure_trace_distance, uhlmann_extend};
use decoupling::qmat::{xi, Ket, LabeledOperator, SubsystemSpace};
use decoupling::twirl::{haar_matrix, random_density, random_pure, RngSeed};

fn main() -> decoupling::Result<()> {
    let a = SubsystemSpace::single("A", 3)?;
    for k in 0..4 {
        let rho = random_density(&a, 3, RngSeed::new(k))?.op().scale(0.9);
        let sigma = random_density(&a, 2, RngSeed::new(100 + k))?.into_op();
        let f = fuchs_vdg_check(&rho, &sigma)?;
        println!("{:.4} <= ‖ρ − σ‖₁ = {:.4} <= {:.4}", f.lower, f.trace_distance, f.upper);
    }

    let psi = random_pure(&SubsystemSpace::new(&["A", "C"], &[2, 3])?, RngSeed::new(5))?;
    // the same state with C renamed B and scrambled there, so V has to undo a unitary
    let u = haar_matrix(3, &mut RngSeed::new(6).rng());
    let twin = psi.ket().relabel(|l| if l == "C" { "B".into() } else { l.into() })?.apply_in_place(&u, &["B"])?;
    let noise = random_pure(twin.space(), RngSeed::new(7))?;
    for t in [0.02, 0.1, 0.3] {
        let amp = twin.amp() + noise.ket().amp().scale(t);
        let bent = Ket::new(twin.space().clone(), amp.scale(1.0 / amp.norm()))?;
        let xi_op = LabeledOperator::new(bent.space().clone(), bent.amp() * bent.amp().adjoint())?;
        let eps = xi_op.reduce_to(&["A"])?.sub(psi.reduce_to(&["A"])?.op())?.trace_norm();
        let v = uhlmann_extend(&xi_op, &psi, eps)?;
        let out = bent.apply_local(v.mat(), &["B"], v.codomain())?;
        println!("ε = {eps:.4}: ‖Vξ − Ψ‖₁ = {:.4} <= Ξ(ε) = {:.4}", pure_trace_distance(&out, psi.ket())?, xi(eps)?);
    }
    Ok(())
}
