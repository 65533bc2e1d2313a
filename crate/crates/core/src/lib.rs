//! Matrix-free pseudo-spectral laboratory for multi-vortex equilibria of
//! the 2D Navier–Stokes equations on a periodic box.
//!
//! The crate builds spectrally unstable localized vortices, tiles them into
//! multi-vortex steady states, and probes the linearized (Oseen-type)
//! operator around them: leading spectrum, exponential dichotomies of the
//! hyperbolic/neutral block split, and the scaling of instability counts
//! with the Grashof number.

pub mod decay;
pub mod dichotomy;
pub mod eigen;
pub mod experiments;
pub mod fft;
pub mod field;
pub mod grid;
pub mod krylov;
pub mod oseen;
pub mod par;
pub mod snapshot;
pub mod spectral;
pub mod steady;
#[cfg(test)]
pub(crate) mod testutil;
pub mod weight;
