use kdsim_core::cavity::*;
fn main() {
    for ratio in [0.1, 0.05, 0.025] {
        let model = ladder_model(2.0, ratio, 0.25);
        let r = effective_phase_experiment(&model).unwrap();
        println!("ratio={ratio}: phi_full={:.6e} phi_eff={:.6e} rel={:.4} p_exc={:.3e} 4mu2={:.3e} rich={:.2e}",
            r.phi_full, r.phi_eff, r.rel_err, r.p_excite, 4.0*r.mu_abs.powi(2), r.richardson_delta);
    }
}
