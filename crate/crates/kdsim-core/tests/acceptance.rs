//! Acceptance gate: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test -- --nocapture`).
//!
//! Tolerances here are the shipped defaults; they are asserted directly so
//! a regression in any criterion fails the build.

use kdsim_core::cavity::{
    bch_scaling_exponent, driven_mode_amplitude, effective_phase_experiment,
    effective_phase_ladder, ladder_model, propagate, zassenhaus_check, CavityModel, JointKet,
};
use kdsim_core::constants::{ATOMIC_MASS_UNIT as AMU, HBAR};
use kdsim_core::gaussian::{p_reference, theta_q, GaussianState};
use kdsim_core::grid::GridState;
use kdsim_core::interferometer::{
    factorization_exponent, general_signal, many_atom_factorization_check, FactorizationConfig,
    NpState, PathSpec,
};
use kdsim_core::params::{derive_params, PhysicalConfig};
use kdsim_core::tolerances::{rel_err, Tolerances};
use kdsim_core::validate;
use std::f64::consts::PI;
use std::time::Instant;

const LAMBDA: f64 = 780e-9;

fn k_opt() -> f64 {
    2.0 * PI / LAMBDA
}

struct Criterion {
    name: &'static str,
    start: Instant,
    budget_s: f64,
}

impl Criterion {
    fn begin(name: &'static str, budget_s: f64) -> Self {
        Self {
            name,
            start: Instant::now(),
            budget_s,
        }
    }

    fn finish(self, pass: bool, detail: String) {
        let elapsed = self.start.elapsed().as_secs_f64();
        println!(
            "{} {} [{:.2}s/{:.0}s] {}",
            if pass { "PASS" } else { "FAIL" },
            self.name,
            elapsed,
            self.budget_s,
            detail
        );
        assert!(pass, "{}: {detail}", self.name);
        assert!(
            elapsed < self.budget_s,
            "{}: runtime {elapsed:.2}s exceeded budget {}s",
            self.name,
            self.budget_s
        );
    }
}

#[test]
fn criterion_1_parameter_chain() {
    let c = Criterion::begin("criterion 1: parameter chain", 1.0);
    let cfg = PhysicalConfig::large_cavity_example();
    let p = derive_params(&cfg).unwrap();
    let tau_omega = p.omega_effm * cfg.tau_pulse;
    let pass = rel_err(p.omega_a0, 3.3e5) < 0.10
        && rel_err(p.omega_effm, 8.3e5) < 0.10
        && rel_err(tau_omega, 0.083) < 0.05;
    c.finish(
        pass,
        format!(
            "omega_a0={:.4e} omega_effm={:.4e} tau*omega_effm={:.5}",
            p.omega_a0, p.omega_effm, tau_omega
        ),
    );
}

#[test]
fn criterion_2_two_photon_coupling_consistency() {
    let c = Criterion::begin("criterion 2: two-photon coupling", 1.0);
    let small = derive_params(&PhysicalConfig::small_cavity_example()).unwrap();
    let large = derive_params(&PhysicalConfig::large_cavity_example()).unwrap();
    let ratio = small.omega_c0 / large.omega_c0;
    // the printed formula lands a constant factor below the quoted working
    // points; the ratio is pure mode-volume scaling
    let factor_small = 1.4e6 / small.omega_c0;
    let factor_large = 1.1e3 / large.omega_c0;
    let pass = rel_err(ratio, 1250.0) < 1e-3
        && factor_small > 1.0 / 3.0
        && factor_small < 3.0
        && factor_large > 1.0 / 3.0
        && factor_large < 3.0;
    c.finish(
        pass,
        format!(
            "ratio={ratio:.6} discrepancy factors: small={factor_small:.3} large={factor_large:.3}"
        ),
    );
}

#[test]
fn criterion_3_nonclassical_phase_scale() {
    let c = Criterion::begin("criterion 3: nonclassical phase", 1.0);
    let m = 1e8 * AMU;
    let th = theta_q(k_opt(), m, 1.2e-3);
    let v_k = HBAR * k_opt() / m;
    let pass = rel_err(th, 9.89e-5) < 0.02 && rel_err(v_k, 5.1e-9) < 0.02;
    c.finish(pass, format!("theta_q={th:.5e} v_k={v_k:.4e}"));
}

#[test]
fn criterion_4_gaussian_integral_oracle() {
    let c = Criterion::begin("criterion 4: Gaussian-integral oracle", 30.0);
    let tol = Tolerances::default();
    let equi = validate::oracle_equivalence_check_with_sign(42, 120, tol.oracle_equiv_rel, 1.0);
    let reports = validate::wavepacket_suite(42, &tol);
    let cancel = reports
        .iter()
        .find(|r| r.name == "shift-expectation-phase-cancellation")
        .unwrap();
    let pass = equi.pass && cancel.pass;
    c.finish(
        pass,
        format!(
            "equivalence max_rel_err={:.3e} ({} samples), imag residue={:.3e}",
            equi.max_rel_err, equi.samples, cancel.max_rel_err
        ),
    );
}

#[test]
fn criterion_5_signal_equivalence() {
    let c = Criterion::begin("criterion 5: signal equivalence", 60.0);
    let m = 1e8 * AMU;
    let k = k_opt();
    let base = GridState::init_gaussian_kick_aligned(m * 13e-6, m, k, 64, 10.0, 8.0)
        .unwrap()
        .free_evolve(0.1);
    let mut worst = 0.0f64;
    let mut g_12 = f64::NAN;
    for dt in [0.5e-3, 1.2e-3, 3.0e-3] {
        let spec = PathSpec::symmetric(0.0, dt, 4.0e-3, 0.0207, 0.0207);
        let b = general_signal(&spec, &NpState::Grid(base.clone()), k).unwrap();
        worst = worst.max(rel_err(b.p_total, b.p_closed));
        if (dt - 1.2e-3).abs() < 1e-9 {
            g_12 = b.visibility_g;
        }
    }
    let pass = worst < 1e-6 && (g_12 - 0.969).abs() < 1e-3;
    c.finish(pass, format!("max rel err={worst:.3e}, G(1.2 ms)={g_12:.5}"));
}

#[test]
fn criterion_6_effective_model_validation() {
    let c = Criterion::begin("criterion 6: effective-model validation", 600.0);
    let eta = 2.0;
    assert!(CavityModel::auto_fock(eta) <= 60);
    let ladder = effective_phase_ladder(eta, &[0.1, 0.05, 0.025], 0.25).unwrap();
    let monotone = ladder.windows(2).all(|w| w[1].rel_err < w[0].rel_err);
    let final_err = ladder.last().unwrap().rel_err;
    let excitation_ok = ladder
        .iter()
        .all(|r| r.p_excite <= 4.0 * r.mu_abs.powi(2) * 1.05);

    let mut node_model = ladder_model(eta, 0.1, 0.25);
    node_model.x_atom = PI / (2.0 * node_model.k);
    let node = effective_phase_experiment(&node_model).unwrap();

    let pass = monotone && final_err < 0.05 && excitation_ok && node.phi_full.abs() < 1e-10;
    c.finish(
        pass,
        format!(
            "rel errs = [{}], final={final_err:.4}, node phase={:.2e}",
            ladder
                .iter()
                .map(|r| format!("{:.4}", r.rel_err))
                .collect::<Vec<_>>()
                .join(", "),
            node.phi_full
        ),
    );
}

#[test]
fn criterion_7_operator_identities() {
    let c = Criterion::begin("criterion 7: operator identities", 60.0);
    let slope = bch_scaling_exponent(&[0.2, 0.1, 0.05, 0.025]);

    let mut model = ladder_model(2.0, 0.1, 0.25);
    model.omega_a0 = 0.0;
    let psi0 = JointKet::ground_vacuum(model.n_fock);
    let t_end = model.tau;
    let psi = propagate(&model, &psi0, t_end, model.default_dt_max()).unwrap();
    let expected = driven_mode_amplitude(&model, t_end);
    let osc_err = (psi.mode_amplitude() - expected).norm() / expected.norm().max(1.0);

    let m = 1e8 * AMU;
    let zass = zassenhaus_check(k_opt(), m, m * 13e-6, 1.4e-3, 0.2e-3).unwrap();

    let pass = (slope - 3.0).abs() < 0.3 && osc_err < 1e-8 && zass.state_error < 1e-10;
    c.finish(
        pass,
        format!(
            "cubic exponent={slope:.3}, displaced-oscillator err={osc_err:.2e}, \
             reordering state err={:.2e}",
            zass.state_error
        ),
    );
}

#[test]
fn criterion_8_many_atom_factorization() {
    let c = Criterion::begin("criterion 8: many-atom factorization", 120.0);
    let cfg = FactorizationConfig {
        n_atoms: 2,
        grid_points: 8,
        ..Default::default()
    };
    let fit = factorization_exponent(&cfg, &[0.04, 0.02, 0.01]).unwrap();
    let at_zero = many_atom_factorization_check(&FactorizationConfig { dt: 0.0, ..cfg }).unwrap();
    let pass = fit.exponent >= 1.8 && fit.exponent <= 2.2 && at_zero.state_error < 1e-12;
    c.finish(
        pass,
        format!(
            "exponent={:.3}, errors={:?}, dt=0 residue={:.2e}",
            fit.exponent, fit.errors, at_zero.state_error
        ),
    );
}

#[test]
fn criterion_9_reference_probability() {
    let c = Criterion::begin("criterion 9: reference probability", 1.0);
    let mut worst = 0.0f64;
    let mut xs = Vec::new();
    let mut state = 0x243f_6a88_85a3_08d3u64;
    for _ in 0..1000 {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        xs.push((state >> 11) as f64 / (1u64 << 53) as f64 * 2.0);
    }
    for pair in xs.chunks(2) {
        let (x1, x2) = (pair[0], pair[1]);
        let direct = p_reference(x1, x2);
        let alt = 0.375 * (x1 * x1 + x2 * x2);
        worst = worst.max((direct - alt).abs() / alt.max(1e-300));
    }
    let anchored = rel_err(p_reference(0.0207, 0.0207), 3.2e-4) < 5e-3
        && p_reference(1.0, 0.0) == 0.375
        && p_reference(0.0, 0.0) == 0.0;
    let pass = worst <= 1e-15 && anchored;
    c.finish(pass, format!("max deviation={worst:.2e} over 500 pairs"));
}

#[test]
fn gaussian_analytics_cross_check_against_grid() {
    // supporting evidence for criteria 4 and 5: the full two-time expansion
    // agrees with grid quadrature well below the acceptance tolerance
    let tol = Tolerances::default();
    let reports = validate::analytics_suite(42, &tol);
    assert!(
        kdsim_core::report::all_pass(&reports),
        "{}",
        kdsim_core::report::summary_lines(&reports)
    );
}

#[test]
fn gaussian_state_signal_matches_grid_route() {
    // same acceptance path as criterion 5 but through the analytic state
    let m = 1e8 * AMU;
    let k = k_opt();
    let state = GaussianState::new(m, m * 13e-6, 0.1).unwrap();
    let spec = PathSpec::symmetric(0.0, 1.2e-3, 4.0e-3, 0.0207, 0.0207);
    let analytic = general_signal(&spec, &NpState::Gaussian(state), k).unwrap();
    let grid = GridState::init_gaussian_kick_aligned(m * 13e-6, m, k, 64, 10.0, 8.0)
        .unwrap()
        .free_evolve(0.1);
    let numeric = general_signal(&spec, &NpState::Grid(grid), k).unwrap();
    assert!(
        rel_err(numeric.p_total, analytic.p_total) < 1e-8,
        "grid {} vs analytic {}",
        numeric.p_total,
        analytic.p_total
    );
}
