//! Physical constants (CODATA 2018, SI) and configured line data.

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Atomic mass constant, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Electron mass in atomic mass units.
pub const ELECTRON_MASS_AMU: f64 = 5.485_799_090_65e-4;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Coulomb constant `1/(4 pi eps0)`, N m^2 / C^2.
pub const COULOMB_CONSTANT: f64 = 1.0 / (4.0 * core::f64::consts::PI * VACUUM_PERMITTIVITY);

/// Vacuum wavelength of the 6S1/2 - 6P1/2 line of Ba+, m.
pub const BLUE_WAVELENGTH: f64 = 493.545e-9;
/// Vacuum wavelength of the 5D3/2 - 6P1/2 line of Ba+, m.
pub const RED_WAVELENGTH: f64 = 649.869e-9;

/// Default natural linewidth Gamma/2pi of the 493 nm line, MHz.
pub const BLUE_LINEWIDTH_MHZ: f64 = 15.2;
/// Default natural linewidth Gamma/2pi of the 650 nm line, MHz. Both lines
/// share the 6P1/2 upper level and therefore its width.
pub const RED_LINEWIDTH_MHZ: f64 = 15.2;

/// Wavemeter systematic attached to this toolkit's spectroscopic numbers, MHz.
pub const WAVEMETER_SYSTEMATIC_MHZ: f64 = 20.0;

pub(crate) const TWO_PI: f64 = 2.0 * core::f64::consts::PI;
