//! Norms in Morrey spaces `M^p_q(R^n)` and small Morrey spaces `m^p_q(R^n)`
//! for piecewise radial power functions, and numerical estimates of four
//! geometric constants of these spaces: the generalized von Neumann-Jordan
//! constant, the modified and generalized modified von Neumann-Jordan
//! constants, and the Zbăganu constant.

pub mod constants;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod norm;
pub mod optimize;
pub mod params;
pub mod quadrature;
pub mod radial;
pub mod special;

pub use constants::{
    estimate_constant, estimate_constants, ratio, small_morrey_witness_bound, witness_pair_morrey,
    witness_pair_small_morrey, ConstantEstimate, ConstantKind, ConstantSearch, EstimateOptions, PairNorms,
    Witness,
};
pub use error::{Error, Result};
pub use geometry::{cap_fraction, VolumeConstants};
pub use integrate::{
    integrate_abs_pow_ball, integrate_abs_pow_centered, mc_integrate, BallIntegral, Extended,
    IntegrationSettings, McEstimate,
};
pub use params::{Ball, Mode, SpaceParams};
pub use radial::{canonicalize, Piece, RadialFunction};
pub use norm::{
    centered_norm_profile, closed_form_power_norm, morrey_norm, norm, small_morrey_norm, NormEvaluator,
    NormResult, SearchSettings,
};
