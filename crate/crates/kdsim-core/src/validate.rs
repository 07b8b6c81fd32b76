//! Verification suites: every closed form checked against its brute-force
//! route, every operator identity checked on states.
//!
//! Each suite returns [`CheckReport`] rows suitable for JSON emission; the
//! process-level pass/fail decision belongs to the caller.

use crate::cavity::{
    self, bch_pauli_check, bch_scaling_exponent, driven_mode_amplitude, effective_phase_ladder,
    ladder_model, node_antinode_scan, zassenhaus_check, CavityError, JointKet,
};
use crate::constants::ATOMIC_MASS_UNIT;
use crate::gaussian::{self, GaussianState};
use crate::grid::{GridState, KickOp};
use crate::interferometer::{
    self, atomic_cancellation_error, factorization_exponent, general_signal,
    heisenberg_form_equivalence, many_atom_factorization_check, FactorizationConfig, NpState,
    PathSpec,
};
use crate::report::CheckReport;
use crate::tolerances::{rel_err, rel_err_c, Tolerances};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const LAMBDA: f64 = 780e-9;

fn k_opt() -> f64 {
    2.0 * PI / LAMBDA
}

fn np_mass() -> f64 {
    1e8 * ATOMIC_MASS_UNIT
}

fn np_delta_p() -> f64 {
    np_mass() * 13e-6
}

/// Randomized equivalence between the closed-form shift expectation and the
/// grid quadrature, with an optional sign injection on the kinetic ordering
/// phase (used by the self-test that proves the suite can fail).
#[doc(hidden)]
pub fn oracle_equivalence_check_with_sign(
    seed: u64,
    samples: usize,
    tol: f64,
    ordering_sign: f64,
) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = np_mass();
    let dp = np_delta_p();
    let k = k_opt();
    let grid = GridState::init_gaussian(dp, m, 1 << 13, 12.0).expect("grid");
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n1 = rng.gen_range(0.0..4.0);
        let n2 = rng.gen_range(0.0..4.0);
        let dt = rng.gen_range(0.0..5.0e-3);
        // ordered product: velocity phase first, then the shift
        let ket = grid
            .apply_velocity_phase(n2, k, dt)
            .apply_kick(&KickOp { n: n1, k })
            .expect("kick");
        let grid_value = grid.inner(&ket);
        let state = GaussianState::new(m, dp, dt).expect("state");
        let analytic = gaussian::char_fn(&state, n1, n2, k);
        let analytic = Complex64::new(analytic.re, ordering_sign * analytic.im);
        worst = worst.max(rel_err_c(grid_value, analytic));
    }
    CheckReport::new("gaussian-shift-oracle-equivalence", worst, samples, tol)
}

/// Imaginary residue of the evolved-packet shift expectation, which the
/// Gaussian integral must cancel exactly.
fn phase_cancellation_check(seed: u64, samples: usize, tol: f64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let m = np_mass();
    let dp = np_delta_p();
    let k = k_opt();
    let grid = GridState::init_gaussian(dp, m, 1 << 13, 12.0).expect("grid");
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(0.0..4.0);
        let dt = rng.gen_range(0.0..5.0e-3);
        let value = grid
            .expect_shift_product(&[(KickOp { n, k }, dt)])
            .expect("product");
        worst = worst.max(value.im.abs() / value.norm().max(1e-300));
    }
    CheckReport::new("shift-expectation-phase-cancellation", worst, samples, tol)
}

fn unitarity_check(tol: f64) -> CheckReport {
    let m = np_mass();
    let grid = GridState::init_gaussian(np_delta_p(), m, 1 << 12, 12.0).expect("grid");
    let k = k_opt();
    let mut worst: f64 = 0.0;
    let mut state = grid;
    for (n, t) in [(2.0, 1.0e-3), (-2.0, 0.3e-3), (1.3, 2.0e-3), (-1.3, 0.8e-3)] {
        state = state
            .apply_heisenberg_kick(&KickOp { n, k }, t)
            .expect("kick");
        worst = worst.max((state.norm_sqr() - 1.0).abs());
    }
    CheckReport::new("grid-operation-unitarity", worst, 4, tol)
}

fn grid_refinement_check(tol: f64) -> CheckReport {
    let m = np_mass();
    let dp = np_delta_p();
    let k = k_opt();
    let value = |n_points: usize| {
        let s = GridState::init_gaussian(dp, m, n_points, 12.0).expect("grid");
        s.expect_shift_product(&[(KickOp { n: 2.0, k }, 1.2e-3)])
            .expect("product")
    };
    let delta = (value(1 << 13) - value(1 << 14)).norm();
    CheckReport::new("grid-refinement-convergence", delta, 2, tol)
}

fn reordering_phase_check(tol: f64) -> CheckReport {
    let m = np_mass();
    let k = k_opt();
    let grid = GridState::init_gaussian(np_delta_p(), m, 1 << 13, 12.0).expect("grid");
    let dt = 1.2e-3;
    let op = |t: f64| (KickOp { n: 2.0, k }, t);
    let fwd = grid.expect_shift_product(&[op(0.0), op(dt)]).expect("fwd");
    let rev = grid.expect_shift_product(&[op(dt), op(0.0)]).expect("rev");
    let ratio = fwd / rev;
    let theta_q = gaussian::theta_q(k, m, dt);
    let err = (ratio.arg().abs() - 2.0 * theta_q).abs() / (2.0 * theta_q)
        + (ratio.norm() - 1.0).abs();
    CheckReport::new("shift-reordering-commutator-phase", err, 1, tol)
}

/// Grid-backed checks of the wavepacket machinery itself.
pub fn wavepacket_suite(seed: u64, tol: &Tolerances) -> Vec<CheckReport> {
    vec![
        oracle_equivalence_check_with_sign(seed, 100, tol.oracle_equiv_rel, 1.0),
        phase_cancellation_check(seed, 50, tol.phase_cancel_imag),
        unitarity_check(tol.norm_preserve),
        grid_refinement_check(tol.grid_refinement),
        reordering_phase_check(tol.zassenhaus_state.max(1e-9)),
    ]
}

/// Closed-form analytics checked against grid quadrature.
pub fn analytics_suite(seed: u64, tol: &Tolerances) -> Vec<CheckReport> {
    let m = np_mass();
    let dp = np_delta_p();
    let k = k_opt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);

    // two-time product: full sixteen-term expansion vs grid evaluation
    let grid = GridState::init_gaussian_kick_aligned(dp, m, k, 64, 10.0, 8.0).expect("grid");
    let mut worst_two_time: f64 = 0.0;
    let mut worst_cos4: f64 = 0.0;
    let samples = 12;
    for _ in 0..samples {
        let age = rng.gen_range(0.0..0.05);
        let dt = rng.gen_range(0.0..4.0e-3);
        let aged = grid.free_evolve(age);
        let bra = aged.apply_cos2(k, 0.0).expect("cos2");
        let ket = aged.apply_cos2(k, dt).expect("cos2");
        let grid_two_time = bra.inner(&ket);
        let state = GaussianState::new(m, dp, age).expect("state");
        let analytic = gaussian::expect_cos2cos2(&state, dt, k).full;
        worst_two_time = worst_two_time.max(rel_err_c(grid_two_time, analytic));

        let grid_cos4 = bra.inner(&bra).re;
        worst_cos4 = worst_cos4.max(rel_err(grid_cos4, gaussian::expect_cos4(&state, k)));
    }

    // characteristic-function modulus bound
    let mut bound_excess: f64 = 0.0;
    for _ in 0..200 {
        let n1 = rng.gen_range(-6.0..6.0);
        let n2 = rng.gen_range(-6.0..6.0);
        let age = rng.gen_range(0.0..0.05);
        let state = GaussianState::new(m, dp, age).expect("state");
        bound_excess = bound_excess.max(gaussian::char_fn(&state, n1, n2, k).norm() - 1.0);
    }

    // visibility monotonicity on a deterministic lattice
    let mut monotone_ok = true;
    let mut prev = f64::INFINITY;
    for j in 0..40 {
        let dt = 1e-4 * (j + 1) as f64;
        let g = gaussian::visibility_g(dp, m, k, dt);
        monotone_ok &= g < prev;
        prev = g;
    }

    vec![
        CheckReport::new(
            "two-time-product-vs-grid",
            worst_two_time,
            samples,
            tol.oracle_equiv_rel,
        ),
        CheckReport::new(
            "standing-wave-moment-vs-grid",
            worst_cos4,
            samples,
            tol.oracle_equiv_rel,
        ),
        CheckReport::new(
            "characteristic-function-bound",
            bound_excess.max(0.0),
            200,
            1e-12,
        ),
        CheckReport::gate("visibility-monotone-decay", monotone_ok, 0.0, 40),
    ]
}

/// Options for the cavity suite; the ladder dominates the runtime.
#[derive(Debug, Clone)]
pub struct CavityOracleOptions {
    pub eta: f64,
    pub ratios: Vec<f64>,
    pub phi_target: f64,
    pub scan_positions: usize,
    /// Coupling ratio for the position scan. The quartic dressing
    /// correction deforms the envelope as cos^8, so the scan sits at a
    /// gentler ratio than the ladder's first rung to keep the cos^4 fit
    /// residual inside tolerance.
    pub scan_ratio: f64,
    pub n_fock_override: Option<usize>,
    pub dt_max_override: Option<f64>,
}

impl Default for CavityOracleOptions {
    fn default() -> Self {
        Self {
            eta: 2.0,
            ratios: vec![0.1, 0.05, 0.025],
            phi_target: 0.25,
            scan_positions: 8,
            scan_ratio: 0.07,
            n_fock_override: None,
            dt_max_override: None,
        }
    }
}

fn displaced_oscillator_report(opts: &CavityOracleOptions, tol: f64) -> Result<CheckReport, CavityError> {
    let mut model = ladder_model(opts.eta, 0.1, opts.phi_target);
    model.omega_a0 = 0.0;
    if let Some(nf) = opts.n_fock_override {
        model.n_fock = nf;
    }
    let dt = opts
        .dt_max_override
        .unwrap_or_else(|| model.default_dt_max());
    let psi0 = JointKet::ground_vacuum(model.n_fock);
    let mut worst: f64 = 0.0;
    for frac in [0.25, 0.6, 1.0] {
        let t = frac * model.tau;
        let psi = cavity::propagate(&model, &psi0, t, dt)?;
        let expected = driven_mode_amplitude(&model, t);
        worst = worst.max((psi.mode_amplitude() - expected).norm() / expected.norm().max(1.0));
        let coherent = JointKet::ground_coherent(model.n_fock, expected);
        worst = worst.max((coherent.inner(&psi).norm() - 1.0).abs());
    }
    Ok(CheckReport::new("driven-cavity-displaced-oscillator", worst, 3, tol))
}

/// Full cavity verification: operator identities, the driven-mode closed
/// form, the effective-phase convergence ladder, and the standing-wave
/// envelope scan.
pub fn cavity_suite(opts: &CavityOracleOptions, tol: &Tolerances) -> Vec<CheckReport> {
    let mut reports = Vec::new();

    // Pauli conjugation identities
    let mut comm_worst: f64 = 0.0;
    for mu in [
        Complex64::new(0.3, 0.0),
        Complex64::new(0.07, -0.21),
        Complex64::new(-0.14, 0.09),
    ] {
        let rep = bch_pauli_check(mu);
        for r in rep.commutator_residuals {
            comm_worst = comm_worst.max(r);
        }
        comm_worst = comm_worst.max(rep.adjoint_residual);
    }
    reports.push(CheckReport::new(
        "pauli-commutator-table",
        comm_worst,
        3,
        1e-14,
    ));

    let slope = bch_scaling_exponent(&[0.2, 0.1, 0.05, 0.025]);
    reports.push(CheckReport::gate(
        "pauli-conjugation-cubic-error",
        (slope - 3.0).abs() <= tol.bch_exponent_tol,
        slope,
        4,
    ));

    match displaced_oscillator_report(opts, tol.displaced_osc_rel) {
        Ok(r) => reports.push(r),
        Err(e) => reports.push(CheckReport::gate(
            format!("driven-cavity-displaced-oscillator [{e}]"),
            false,
            f64::NAN,
            0,
        )),
    }

    // shift-reordering identity on grid states
    match zassenhaus_check(k_opt(), np_mass(), np_delta_p(), 1.4e-3, 0.2e-3) {
        Ok(rep) => reports.push(CheckReport::new(
            "shift-reordering-state-identity",
            rep.state_error,
            1,
            tol.zassenhaus_state,
        )),
        Err(e) => reports.push(CheckReport::gate(
            format!("shift-reordering-state-identity [{e}]"),
            false,
            f64::NAN,
            0,
        )),
    }

    // effective-model convergence ladder
    match effective_phase_ladder(opts.eta, &opts.ratios, opts.phi_target) {
        Ok(results) => {
            let monotone = results.windows(2).all(|w| w[1].rel_err < w[0].rel_err);
            let final_ok = results
                .last()
                .map(|r| r.rel_err <= tol.effective_phase_final_rel)
                .unwrap_or(false);
            let excitation_ok = results
                .iter()
                .all(|r| r.p_excite <= 4.0 * r.mu_abs.powi(2) * 1.05);
            let richardson_ok = results.iter().all(|r| r.richardson_delta < 1e-8);
            let drift_ok = results.iter().all(|r| r.norm_drift < tol.norm_drift_run);
            let final_err = results.last().map(|r| r.rel_err).unwrap_or(f64::NAN);
            reports.push(CheckReport::gate(
                "effective-phase-ladder-convergence",
                monotone && final_ok,
                final_err,
                results.len(),
            ));
            reports.push(CheckReport::gate(
                "atom-return-bound",
                excitation_ok,
                results
                    .iter()
                    .map(|r| r.p_excite / (4.0 * r.mu_abs.powi(2)))
                    .fold(0.0, f64::max),
                results.len(),
            ));
            reports.push(CheckReport::gate(
                "propagation-step-convergence",
                richardson_ok && drift_ok,
                results
                    .iter()
                    .map(|r| r.richardson_delta)
                    .fold(0.0, f64::max),
                results.len(),
            ));
        }
        Err(e) => reports.push(CheckReport::gate(
            format!("effective-phase-ladder-convergence [{e}]"),
            false,
            f64::NAN,
            0,
        )),
    }

    // standing-wave envelope of the conditional phase
    let base = ladder_model(opts.eta, opts.scan_ratio, opts.phi_target);
    match node_antinode_scan(&base, opts.scan_positions) {
        Ok(scan) => reports.push(CheckReport::new(
            "conditional-phase-standing-wave-envelope",
            scan.max_residual_frac,
            opts.scan_positions,
            tol.node_antinode_residual,
        )),
        Err(e) => reports.push(CheckReport::gate(
            format!("conditional-phase-standing-wave-envelope [{e}]"),
            false,
            f64::NAN,
            0,
        )),
    }

    reports
}

/// Interferometer assembly checks: path-operator identities, the
/// grid-vs-closed-form signal, and the many-atom factorization scaling.
pub fn interferometer_suite(tol: &Tolerances) -> Vec<CheckReport> {
    let k = k_opt();
    let m = np_mass();
    let atom_mass = 86.9 * ATOMIC_MASS_UNIT;
    let mut reports = Vec::new();

    let atom = GridState::init_gaussian_kick_aligned(atom_mass * 2e-3, atom_mass, k, 64, 10.0, 10.0)
        .expect("atom grid");
    let np = GridState::init_gaussian_kick_aligned(m * 13e-6, m, k, 64, 10.0, 8.0).expect("np grid");

    let spec = PathSpec::symmetric(0.0, 1.2e-3, 3.6e-3, 0.0207, 0.0207);
    let cancel = atomic_cancellation_error(&spec, k, &atom).expect("cancellation");
    reports.push(CheckReport::new(
        "atomic-path-cancellation",
        cancel,
        1,
        tol.atomic_cancellation,
    ));

    let forms = heisenberg_form_equivalence(&spec, k, &atom, &np).expect("forms");
    reports.push(CheckReport::new(
        "path-operator-form-equivalence",
        forms.max(),
        4,
        tol.heisenberg_form,
    ));

    let recoil = interferometer::recoil_phase_invariance(&spec, &np, k, atom_mass)
        .expect("recoil");
    reports.push(CheckReport::new(
        "common-recoil-phase-invariance",
        recoil,
        1,
        1e-15,
    ));

    // grid signal vs long-time closed form at the working separations
    let aged = np.free_evolve(0.1);
    let mut worst_signal: f64 = 0.0;
    let mut visibility_err: f64 = 0.0;
    for dt in [0.5e-3, 1.2e-3, 3.0e-3] {
        let spec = PathSpec::symmetric(0.0, dt, 3.0 * dt.max(1.2e-3), 0.0207, 0.0207);
        let b = general_signal(&spec, &NpState::Grid(aged.clone()), k).expect("signal");
        worst_signal = worst_signal.max(rel_err(b.p_total, b.p_closed));
        if (dt - 1.2e-3).abs() < 1e-12 {
            visibility_err = (b.visibility_g - 0.969).abs();
        }
    }
    reports.push(CheckReport::new(
        "grid-signal-vs-long-time-closed-form",
        worst_signal,
        3,
        tol.signal_equiv_rel,
    ));
    reports.push(CheckReport::new(
        "interference-visibility-value",
        visibility_err,
        1,
        1e-3,
    ));

    // factorization scaling
    let cfg = FactorizationConfig::default();
    match factorization_exponent(&cfg, &[0.04, 0.02, 0.01]) {
        Ok(fit) => reports.push(CheckReport::gate(
            "many-atom-factorization-quadratic-error",
            fit.exponent >= tol.factorization_exponent_lo
                && fit.exponent <= tol.factorization_exponent_hi,
            fit.exponent,
            fit.xi_values.len(),
        )),
        Err(e) => reports.push(CheckReport::gate(
            format!("many-atom-factorization-quadratic-error [{e}]"),
            false,
            f64::NAN,
            0,
        )),
    }
    match many_atom_factorization_check(&FactorizationConfig { dt: 0.0, ..cfg }) {
        Ok(rep) => reports.push(CheckReport::new(
            "factorization-exact-at-zero-separation",
            rep.state_error,
            1,
            tol.factorization_dt0_abs,
        )),
        Err(e) => reports.push(CheckReport::gate(
            format!("factorization-exact-at-zero-separation [{e}]"),
            false,
            f64::NAN,
            0,
        )),
    }

    // reference-probability identity
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x1: f64 = rng.gen_range(0.0..1.0);
        let x2: f64 = rng.gen_range(0.0..1.0);
        let direct = gaussian::p_reference(x1, x2);
        let alt = 0.375 * (x1 * x1 + x2 * x2);
        worst = worst.max((direct - alt).abs() / alt.max(1e-300));
    }
    reports.push(CheckReport::new(
        "reference-probability-identity",
        worst,
        100,
        1e-15,
    ));

    reports
}

/// Every suite in sequence.
pub fn full_suite(seed: u64, opts: &CavityOracleOptions, tol: &Tolerances) -> Vec<CheckReport> {
    let mut reports = wavepacket_suite(seed, tol);
    reports.extend(analytics_suite(seed, tol));
    reports.extend(cavity_suite(opts, tol));
    reports.extend(interferometer_suite(tol));
    reports
}
