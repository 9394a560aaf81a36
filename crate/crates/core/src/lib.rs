//! Spectroscopy and trap dynamics for singly-charged barium isotopes.
//!
//! The crate is `no_std` with `alloc`. Everything here is pure computation:
//! hyperfine levels and transition offsets from the embedded isotope table
//! ([`spectra`]), King-plot regression and field-shift inversion
//! ([`kingplot`]), phase-modulation sideband planning ([`sidebands`]),
//! Lorentzian line fitting ([`lineshape`]) and RF Paul-trap molecular
//! dynamics with photon-scattering cooling and heating ([`dynamics`]).
//!
//! File formats, the parallel force engine and the command-line front end
//! live in the `ionkit` companion crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod constants;
pub mod dynamics;
pub mod kingplot;
pub mod lineshape;
mod linalg;
pub mod sidebands;
pub mod spectra;
pub mod spin;

pub use spin::HalfInt;
