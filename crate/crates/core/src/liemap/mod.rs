//! Truncated matrix Lie maps of autonomous polynomial ODE systems.
//!
//! A system `ẋ = F(x)` with polynomial `F` lifts, through the product rule, to
//! a linear system `ż = D z` on the stacked monomial vector `z` of degree up to
//! `K`. The one-step propagator `exp(D·dt)` restricted to its degree-1 rows is
//! the map `Y = W_0 + W_1 X + … + W_K X^{[K]}`.

mod expm;
mod generator;
mod map;
mod system;

pub use expm::expm;
pub use generator::{generator, induced_block, GeneratorMatrix};
pub use map::{build_map, propagator, Backend, BuildOptions, PolynomialMap, BASIS_TAG};
pub use system::{PolynomialSystem, Term};
