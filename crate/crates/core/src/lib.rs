//! Hermite polynomials in a complex variable and the function spaces built on
//! them.
//!
//! The crate covers three holomorphic Hilbert spaces and the maps between them:
//!
//! * `H_s`: entire functions square integrable against
//!   `exp(-(1-s)x^2 - (1/s - 1)y^2)`, with orthonormal basis `H_{s,n}`
//!   ([`hermite`]).
//! * `X_s`: entire functions square integrable against `exp(s x^2 - y^2/s)`,
//!   with orthonormal basis `h_{s,n} = exp(-z^2/2) H_{s,n}`.
//! * the Bargmann space with monomial basis `z^n / sqrt(n!)`.
//!
//! On top of these sit the unitary transforms between `X_s` and the Bargmann
//! space ([`transforms`]), nine coherent-state families ([`coherent`]) and the
//! squeeze operator with its squeezed basis ([`squeeze`]). Functions of the
//! form `polynomial * exp(a z^2 + b z)` are carried exactly by [`GaussPoly`],
//! and all inner products are computed with tensor Gauss-Hermite rules
//! ([`quadrature`]).

pub mod coherent;
mod error;
pub mod gausspoly;
pub mod hermite;
pub mod numeric;
pub mod quadrature;
pub mod squeeze;
pub mod transforms;

pub use error::{Error, Result};
pub use gausspoly::GaussPoly;
pub use hermite::ModelParams;
pub use num_complex::Complex64;
pub use gausspoly::Evaluate;
pub use quadrature::QuadratureGrid;
pub use squeeze::SqueezeParams;

/// A point of the complex plane, `z = x + iy`.
pub type ComplexPoint = Complex64;
