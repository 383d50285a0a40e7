//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the simulator runs on: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance used when checking structural invariants
    /// (commutators, uncertainty bound, exact mean transfer).
    fn tolerance() -> Self;

    /// Lossless-enough conversion from an `f64` literal.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    fn from_count(value: usize) -> Self {
        Self::from_usize(value).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }
}

/// Large-but-finite squeezing used wherever the numeric engine needs a
/// stand-in for perfect EPR correlations (e^{-2r} ≈ 2e-9).
pub const INFINITE_SQUEEZING_PROXY: f64 = 10.0;

/// Squeezing parameter of an EPR source, with the ideal limit kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Squeezing<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Squeezing<T> {
    /// Residual EPR noise factor e^{-2r}; exactly zero in the ideal limit.
    pub fn noise(self) -> T {
        match self {
            Squeezing::Finite(r) => (-(r + r)).exp(),
            Squeezing::Infinite => T::zero(),
        }
    }

    /// Value handed to the numeric engine.
    pub fn proxy(self) -> T {
        match self {
            Squeezing::Finite(r) => r,
            Squeezing::Infinite => T::lit(INFINITE_SQUEEZING_PROXY),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Squeezing::Infinite)
    }
}

impl<T> From<T> for Squeezing<T> {
    fn from(r: T) -> Self {
        Squeezing::Finite(r)
    }
}

/// Number of output copies, with the asymptotic limit kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Finite(usize),
    Unbounded,
}

impl From<usize> for Multiplicity {
    fn from(m: usize) -> Self {
        Multiplicity::Finite(m)
    }
}
