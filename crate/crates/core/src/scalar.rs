//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the topology pipeline is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Trapezoid rule over an arbitrary (strictly increasing) abscissa.
pub(crate) fn trapezoid<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    debug_assert_eq!(xs.len(), ys.len());
    let half = T::lit(0.5);
    xs.windows(2)
        .zip(ys.windows(2))
        .fold(T::zero(), |acc, (x, y)| {
            acc + (x[1] - x[0]) * (y[0] + y[1]) * half
        })
}

/// Trapezoid rule on a uniform grid with the given step.
pub(crate) fn trapezoid_uniform<T: Scalar>(step: T, ys: &[T]) -> T {
    match ys.len() {
        0 | 1 => T::zero(),
        n => {
            let inner = ys[1..n - 1].iter().fold(T::zero(), |acc, &v| acc + v);
            step * (inner + (ys[0] + ys[n - 1]) * T::lit(0.5))
        }
    }
}

/// Maps strictly increasing values affinely onto `[0, 1]`.
///
/// A single value maps to `[0]`; integrals over such a grid degenerate to the
/// value of the integrand at that point (see [`unit_integral`]).
pub(crate) fn unit_rescale<T: Scalar>(values: &[T]) -> Vec<T> {
    match values {
        [] => Vec::new(),
        [_] => vec![T::zero()],
        [first, .., last] => {
            let span = *last - *first;
            values.iter().map(|&v| (v - *first) / span).collect()
        }
    }
}

/// Integral over `[0, 1]` of samples taken on the unit rescaling of `values`.
pub(crate) fn unit_integral<T: Scalar>(values: &[T], samples: &[T]) -> T {
    match samples {
        [] => T::zero(),
        [only] => *only,
        _ => trapezoid(&unit_rescale(values), samples),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_hat() {
        let xs = [0.0, 0.5, 1.0];
        let ys = [0.0, 1.0, 0.0];
        assert_eq!(trapezoid(&xs, &ys), 0.5);
        assert_eq!(trapezoid_uniform(0.5, &ys), 0.5);
    }

    #[test]
    fn unit_integral_of_constant() {
        let sigma = [0.1f32, 0.7, 3.0];
        assert!((unit_integral(&sigma, &[2.0, 2.0, 2.0]) - 2.0).abs() < 1e-6);
        assert_eq!(unit_integral(&[5.0], &[4.0]), 4.0);
    }
}
