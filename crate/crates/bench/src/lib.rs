//! Fixtures shared by the benchmarks.

use morrey_core::{witness_pair_morrey, RadialFunction, SpaceParams};

/// `(n, p, q)` triples exercised by the benchmarks.
pub const SPACES: [(u32, f64, f64); 3] = [(1, 1.0, 2.0), (2, 1.0, 2.0), (3, 2.0, 4.0)];

pub fn space(n: u32, p: f64, q: f64) -> SpaceParams {
    SpaceParams::morrey(n, p, q).expect("benchmark parameters are valid")
}

/// The two-piece function `k` of the Morrey witness pair.
pub fn witness_k(params: &SpaceParams) -> RadialFunction {
    witness_pair_morrey(params).expect("p < q").k
}
