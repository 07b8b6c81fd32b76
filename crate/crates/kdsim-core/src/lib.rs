//! Simulation and verification toolkit for a nanoparticle-driven atom
//! interferometer.
//!
//! A dielectric nanoparticle inside an optical cavity, illuminated by short
//! laser pulses, acts as a weak light source that imprints Kapitza-Dirac
//! momentum kicks on co-trapped atoms. Four pulses close a symmetric
//! Ramsey-Borde loop whose detection probability carries the motional state
//! of the nanoparticle, including the commutator-induced phase
//! `theta_q = 2*hbar*k^2*dt/m`.
//!
//! The crate is organized around paired evaluation routes: every closed-form
//! result (derived couplings, Gaussian characteristic functions, the
//! interferometer signal, operator identities) has an independent brute-force
//! check built from discretized wavepackets or truncated-Hilbert-space
//! propagation.
//!
//! All frequencies are angular (rad/s) and all quantities are SI unless a
//! function documents otherwise.

pub mod cavity;
pub mod constants;
pub mod gaussian;
pub mod grid;
pub mod interferometer;
pub mod params;
pub mod report;
pub mod tolerances;
pub mod validate;

pub use num_complex::Complex64;
