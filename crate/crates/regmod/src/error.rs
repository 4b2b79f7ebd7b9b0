use thiserror::Error;

/// Errors reported by the library.
///
/// Shape mismatches between elements or submodules are programming errors
/// and panic instead; every variant here can be triggered by plain data.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("shape needs at least one exponent")]
    EmptyShape,
    #[error("shape exponents must be at least 1")]
    ZeroExponent,
    #[error("module order {order} exceeds the structural limit {limit}")]
    OrderTooLarge { order: u128, limit: u64 },
    #[error("coordinate vector has {got} entries, shape has {expected}")]
    CoordinateLength { got: usize, expected: usize },
    #[error("element lies outside the submodule")]
    NotInSubmodule,
    #[error("operation is undefined for the zero element")]
    ZeroElement,
    #[error("order {required} exceeds the enumeration cap {cap}")]
    CapExceeded { required: u64, cap: u64 },
    #[error("basis search budget exhausted")]
    SearchBudget,
}

pub type Result<T> = std::result::Result<T, Error>;
