use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument lies outside the range where the quantity is defined
    /// or representable.
    #[error("{name} = {value} is out of range: {expected}")]
    Range {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// An operation was applied to a function outside its domain, e.g. the
    /// heat operator on a non-polynomial.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("exponent mismatch: cannot combine exp({lhs_alpha} z^2 + {lhs_beta} z) with exp({rhs_alpha} z^2 + {rhs_beta} z)")]
    ExponentMismatch {
        lhs_alpha: num_complex::Complex64,
        lhs_beta: num_complex::Complex64,
        rhs_alpha: num_complex::Complex64,
        rhs_beta: num_complex::Complex64,
    },

    #[error("the {0} weight grows along the real axis and has no quadrature grid; use inner_product_xs")]
    UnquadrableMeasure(&'static str),

    #[error("basis family {family} cannot be integrated against the {measure} measure")]
    IncompatibleMeasure {
        family: &'static str,
        measure: &'static str,
    },

    #[error("truncation at N = {n} leaves a tail bound of {tail:e}, above {limit:e}")]
    Truncation { n: usize, tail: f64, limit: f64 },
}
