//! Shared test fixtures: a certified unstable eigenpair on a 64² box,
//! built once per test binary.

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::eigen::{adjoint_pair, leading_spectrum, EigenRequest};
use crate::grid::Grid;
use crate::oseen::{OseenParams, SpectralPair};
use crate::steady::{build_vortex, VortexSpec};

/// Shared unstable eigenpair fixture on a 64² box.
pub(crate) struct Fixture {
    pub op: OseenParams,
    pub pair: SpectralPair,
    pub center: (f64, f64),
}

pub(crate) static FIXTURE: Lazy<Fixture> = Lazy::new(|| {
    let grid = Grid::new(64, 8.0).unwrap();
    let spec_v = VortexSpec::ring(4.0, 1.0, (4.0, 4.0));
    let base = build_vortex(grid, &spec_v).unwrap();
    let op = OseenParams::new(&base, 0.05, 0.0, Complex64::default());
    let hint = Complex64::new(0.17, 0.46);
    let rep = leading_spectrum(&op, &EigenRequest::rightmost(2, Some(hint)))
        .expect("fixture spectrum");
    let lead = rep
        .pairs
        .into_iter()
        .max_by(|a, b| a.lambda.re.partial_cmp(&b.lambda.re).unwrap())
        .expect("leading pair");
    let pair = adjoint_pair(&op, lead.lambda, &lead.phi).expect("adjoint pair");
    Fixture {
        op,
        pair,
        center: (4.0, 4.0),
    }
});
