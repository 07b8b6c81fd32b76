//! Closed-form expectation values of a freely expanding Gaussian wavepacket
//! and the resulting four-pulse interferometer signal.
//!
//! Everything is built from one primitive: the expectation of a product of
//! momentum-shift and velocity-phase operators over a momentum-space
//! Gaussian. For a packet of momentum spread `dp` and mass `m`,
//!
//! ```text
//! <G| e^{i a k x} e^{i b k v} |G> = exp(-hbar^2 a^2 k^2 / (8 dp^2))
//!                                  * exp(-(b k dp / m)^2 / 2)
//!                                  * exp(-i a b k v_k / 2)
//! ```
//!
//! with `v_k = hbar k / m` and `b` carrying units of time. The scalar phase
//! in the last factor is the canonical-commutator fingerprint; for a
//! Heisenberg-evolved shift `e^{i n k x(t)}` it cancels exactly against the
//! kinetic reordering phase, which is why a single shift measurement carries
//! no nonclassical signal while the two-time interferometer product does.

use crate::constants::HBAR;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum GaussianError {
    #[error("field `{field}` must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("free-evolution time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("pulse pair invalid: {0}")]
    PulsePair(&'static str),
}

/// Analytic Gaussian wavepacket, centered in momentum, parameterized by the
/// momentum spread and the free-evolution time since release.
#[derive(Debug, Clone, Copy)]
pub struct GaussianState {
    pub mass: f64,
    pub delta_p: f64,
    /// Time since release at the first measurement, Delta_t = t - t0 (s).
    pub t_free: f64,
    /// Mean packet velocity along the cavity axis; enters shift expectations
    /// as the translation phase `b k v_drift` on the velocity index.
    pub v_drift: f64,
    /// Uniform acceleration along the cavity axis; contributes the familiar
    /// `n k g t^2 / 2` interferometer phase on the same index.
    pub g_x: f64,
}

impl GaussianState {
    pub fn new(mass: f64, delta_p: f64, t_free: f64) -> Result<Self, GaussianError> {
        if !(mass > 0.0) {
            return Err(GaussianError::NonPositive {
                field: "mass",
                value: mass,
            });
        }
        if !(delta_p > 0.0) {
            return Err(GaussianError::NonPositive {
                field: "delta_p",
                value: delta_p,
            });
        }
        if t_free < 0.0 || !t_free.is_finite() {
            return Err(GaussianError::NegativeTime(t_free));
        }
        Ok(Self {
            mass,
            delta_p,
            t_free,
            v_drift: 0.0,
            g_x: 0.0,
        })
    }

    pub fn with_drift(mut self, v_drift: f64) -> Self {
        self.v_drift = v_drift;
        self
    }

    pub fn with_gravity(mut self, g_x: f64) -> Self {
        self.g_x = g_x;
        self
    }

    /// Single-photon recoil velocity hbar k / m.
    pub fn recoil_velocity(&self, k: f64) -> f64 {
        HBAR * k / self.mass
    }

    /// Copy of the state aged by `dt` (drift and gravity flags carried over).
    pub fn aged(&self, dt: f64) -> Self {
        Self {
            t_free: self.t_free + dt,
            ..*self
        }
    }
}

/// Symmetric-ordered Gaussian expectation `<G| e^{i a k x + i b k v} |G>`
/// where `b` has units of time. Real up to the drift translation phase:
/// the Gaussian integral cancels the kinetic phase identically.
fn weyl_expectation(state: &GaussianState, k: f64, a: f64, b: f64) -> Complex64 {
    let dp = state.delta_p;
    let m = state.mass;
    let mod_shift = (-(HBAR * a * k).powi(2) / (8.0 * dp * dp)).exp();
    let mod_spread = (-0.5 * (b * k * dp / m).powi(2)).exp();
    mod_shift * mod_spread * Complex64::from_polar(1.0, b * k * state.v_drift)
}

/// Characteristic function of the expanded packet: the ordered product
/// `<G| e^{i n1 k x} e^{i n2 k v dt} |G>` at `dt = state.t_free`. Splitting
/// the symmetric exponent costs the ordering phase `-n1 n2 k v_k dt / 2`.
pub fn char_fn(state: &GaussianState, n1: f64, n2: f64, k: f64) -> Complex64 {
    let t = state.t_free;
    let v_k = state.recoil_velocity(k);
    let ordering = -n1 * n2 * k * v_k * t / 2.0;
    let gravity = n2 * k * state.g_x * t * t / 2.0;
    weyl_expectation(state, k, n1, n2 * t) * Complex64::from_polar(1.0, ordering + gravity)
}

/// Heisenberg-picture shift expectation `<N(t)| e^{i n k x} |N(t)>`,
/// i.e. `e^{i n^2 k v_k t / 2} * char_fn(n, n)`. Real and non-negative for
/// centered packets: the kinetic phase cancels inside the Gaussian integral.
pub fn heisenberg_shift_expectation(state: &GaussianState, n: f64, k: f64) -> Complex64 {
    let v_k = state.recoil_velocity(k);
    let kinetic = Complex64::from_polar(1.0, n * n * k * v_k * state.t_free / 2.0);
    kinetic * char_fn(state, n, n, k)
}

/// One term of the two-time product expansion:
/// `<G| e^{i a k x(ta)} e^{i b k x(tb)} |G>` with `x(t) = x + v t` and
/// `ta = state.t_free`, `tb = ta + dt`.
///
/// Reordering both Heisenberg shifts onto a single `(a+b)`-shift leaves the
/// scalar `exp(-i a b k v_k (tb - ta) / 2)`; the survivors with `a + b = 0`
/// carry the interferometer phase.
pub fn two_time_term(state: &GaussianState, a: f64, b: f64, dt: f64, k: f64) -> Complex64 {
    let ta = state.t_free;
    let tb = ta + dt;
    let v_k = state.recoil_velocity(k);
    let tau_ab = a * ta + b * tb;
    let commutator_phase = -a * b * k * v_k * (tb - ta) / 2.0;
    let gravity_phase = k * state.g_x * (a * ta * ta + b * tb * tb) / 2.0;
    weyl_expectation(state, k, a + b, tau_ab)
        * Complex64::from_polar(1.0, commutator_phase + gravity_phase)
}

/// `<cos^4(k x(t))>` over the expanded packet, full expansion (no long-time
/// truncation): `3/8 + Re<e^{i2kx(t)}>/2 + Re<e^{i4kx(t)}>/8`.
pub fn expect_cos4(state: &GaussianState, k: f64) -> f64 {
    let e2 = heisenberg_shift_expectation(state, 2.0, k);
    let e4 = heisenberg_shift_expectation(state, 4.0, k);
    0.375 + 0.5 * e2.re + 0.125 * e4.re
}

/// Full and long-time evaluations of the two-time product
/// `<cos^2(k x(t1)) cos^2(k x(t2))>`.
#[derive(Debug, Clone, Copy)]
pub struct TwoTimeExpectation {
    /// All sixteen shift-product terms.
    pub full: Complex64,
    /// Long-time survivors only: `1/4 + e^{i theta_q} G(dt) / 8`.
    pub long_time: Complex64,
}

/// Expectation of the ordered product of squared standing-wave couplings at
/// the two pulse times. `state` is the packet at the first pulse; `dt >= 0`
/// separates the pulses.
pub fn expect_cos2cos2(state: &GaussianState, dt: f64, k: f64) -> TwoTimeExpectation {
    // cos^2 th = (2 + e^{2i th} + e^{-2i th}) / 4: weights over a in {0,+2,-2}
    const TERMS: [(f64, f64); 3] = [(0.0, 2.0), (2.0, 1.0), (-2.0, 1.0)];
    let mut full = Complex64::new(0.0, 0.0);
    for (a, wa) in TERMS {
        for (b, wb) in TERMS {
            full += wa * wb * two_time_term(state, a, b, dt, k);
        }
    }
    full /= 16.0;

    let theta = theta_q(k, state.mass, dt);
    let g = visibility_g(state.delta_p, state.mass, k, dt);
    let long_time = 0.25 + 0.125 * g * Complex64::from_polar(1.0, theta);
    TwoTimeExpectation { full, long_time }
}

/// Commutator-induced interferometer phase `2 hbar k^2 dt / m = 2 k v_k dt`.
pub fn theta_q(k: f64, mass: f64, dt: f64) -> f64 {
    2.0 * HBAR * k * k * dt / mass
}

/// Gaussian visibility factor `exp(-(2 k dp dt / m)^2 / 2)` of the
/// interference term; decays as the packet's momentum spread smears the
/// standing-wave correlation between the two pulses.
pub fn visibility_g(delta_p: f64, mass: f64, k: f64, dt: f64) -> f64 {
    (-0.5 * (2.0 * k * delta_p * dt / mass).powi(2)).exp()
}

/// Pulse-pair description of the closed interferometer loop.
#[derive(Debug, Clone, Copy)]
pub struct PulsePair {
    /// Scattering amplitudes of the two weak standing-wave pulses.
    pub xi1: f64,
    pub xi2: f64,
    /// Recombination amplitudes of the two classical pulses.
    pub alpha_l: Complex64,
    pub beta_l: Complex64,
    /// Pulse separation dt = t2 - t1 (s).
    pub dt: f64,
    /// Free fall before the first pulse, dt1 = t1 - t0 (s).
    pub dt1: f64,
}

impl PulsePair {
    pub fn validate(&self) -> Result<(), GaussianError> {
        if !(self.xi1 >= 0.0 && self.xi2 >= 0.0) {
            return Err(GaussianError::PulsePair("xi amplitudes must be >= 0"));
        }
        if self.alpha_l.norm() > 1.0 + 1e-12 || self.beta_l.norm() > 1.0 + 1e-12 {
            return Err(GaussianError::PulsePair(
                "recombination amplitudes must have modulus <= 1",
            ));
        }
        if !(self.dt > 0.0) {
            return Err(GaussianError::PulsePair("dt must be > 0"));
        }
        if self.dt1 < 0.0 {
            return Err(GaussianError::PulsePair("dt1 must be >= 0"));
        }
        Ok(())
    }
}

/// Detection probability split into its pieces, evaluated both ways.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignalBreakdown {
    /// Full-expansion evaluation (all sixteen two-time terms).
    pub p_total: f64,
    /// The flat `3 (xi1^2 |alpha|^2 + xi2^2 |beta|^2) / 8` term.
    pub p_background: f64,
    /// `p_total - p_background`.
    pub p_interference: f64,
    /// Long-time closed form.
    pub p_closed: f64,
    /// |p_total - p_closed|: the price of the long-time truncation.
    pub abs_err: f64,
    pub theta_q: f64,
    pub visibility_g: f64,
}

/// Evaluate the interferometer signal for a Gaussian nanoparticle packet.
///
/// `state.t_free` and `pulses.dt1` both describe free fall before the first
/// pulse and are added, so either may carry the age. Reality of the total is
/// asserted, not assumed: the imaginary residue of the complex assembly must
/// vanish to rounding.
pub fn signal(pulses: &PulsePair, state: &GaussianState, k: f64) -> Result<SignalBreakdown, GaussianError> {
    pulses.validate()?;
    let at_t1 = state.aged(pulses.dt1);
    let at_t2 = at_t1.aged(pulses.dt);

    let w1 = pulses.xi1 * pulses.xi1 * pulses.alpha_l.norm_sqr();
    let w2 = pulses.xi2 * pulses.xi2 * pulses.beta_l.norm_sqr();
    let cross_amp = pulses.alpha_l.conj() * pulses.beta_l * pulses.xi1 * pulses.xi2;

    let two_time = expect_cos2cos2(&at_t1, pulses.dt, k);
    let cross_full = cross_amp * two_time.full;
    let p_total = w1 * expect_cos4(&at_t1, k) + w2 * expect_cos4(&at_t2, k) + 2.0 * cross_full.re;

    let p_background = 3.0 * (w1 + w2) / 8.0;
    let cross_closed = cross_amp / 4.0 * (1.0 + 0.5 * two_time.long_time_phase_factor());
    let p_closed = p_background + 2.0 * cross_closed.re;

    Ok(SignalBreakdown {
        p_total,
        p_background,
        p_interference: p_total - p_background,
        p_closed,
        abs_err: (p_total - p_closed).abs(),
        theta_q: theta_q(k, state.mass, pulses.dt),
        visibility_g: visibility_g(state.delta_p, state.mass, k, pulses.dt),
    })
}

impl TwoTimeExpectation {
    /// `e^{i theta_q} G(dt)` as used by the closed-form signal.
    fn long_time_phase_factor(&self) -> Complex64 {
        (self.long_time - 0.25) * 8.0
    }
}

/// Scattered-atom reference probability `3 (xi1^2 + xi2^2) / 8` from the
/// mirror-order diffraction; calibrates the xi amplitudes in situ.
pub fn p_reference(xi1: f64, xi2: f64) -> f64 {
    3.0 * (xi1 * xi1 + xi2 * xi2) / 8.0
}
