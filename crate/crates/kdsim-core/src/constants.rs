//! Physical constants (CODATA 2018), SI units.

/// Reduced Planck constant, J*s.
pub const HBAR: f64 = 1.054571817e-34;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.8541878128e-12;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299792458.0;

/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;
