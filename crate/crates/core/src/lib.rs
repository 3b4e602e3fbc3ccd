//! Exact Bellman function for the embedding of dyadic A₁ into A∞.
//!
//! For weights `w` with dyadic A₁ characteristic at most `Q` on a cube `P ⊂ ℝ^d`,
//! the crate evaluates
//!
//! ```text
//! B(x, y, m) = sup { w(E)/|P| : |E| = x|P|, ⟨w⟩_P = y, ess inf w = m }
//! ```
//!
//! in closed form ([`bellman`]), builds weight/set pairs that attain it
//! ([`extremize`]) on finite dyadic trees ([`dyadic`]), and checks both
//! directions independently ([`verify`]).
//!
//! Tree code is generic over [`Scalar`] and runs in exact rational arithmetic
//! through [`ExactParams`], [`ExactWeight`] and friends; the closed form is
//! generic over [`Real`].

pub mod bellman;
pub mod dyadic;
pub mod error;
pub mod extremize;
pub mod params;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use params::{DomainPoint, Params};
pub use scalar::{Real, Scalar};

pub use num_rational::BigRational;

pub type Params64 = Params<f64>;
pub type Weight64 = dyadic::DyadicWeight<f64>;
pub type Set64 = dyadic::DyadicSet<f64>;
pub type Stats64 = dyadic::WeightStats<f64>;
pub type Pair64 = extremize::ExtremalPair<f64>;

pub type ExactParams = Params<BigRational>;
pub type ExactWeight = dyadic::DyadicWeight<BigRational>;
pub type ExactSet = dyadic::DyadicSet<BigRational>;
pub type ExactStats = dyadic::WeightStats<BigRational>;
pub type ExactPair = extremize::ExtremalPair<BigRational>;
