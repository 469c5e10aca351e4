//! Problem functions as seen by the solvers.

use crate::error::Error;
use crate::numerics::Real;

/// A univariate function with analytic derivatives up to [`max_order`].
///
/// [`max_order`]: ScalarFunction::max_order
pub trait ScalarFunction<R: Real> {
    /// Derivative of the given order; order 0 is the value.
    fn derivative(&self, x: &R, order: usize) -> Result<R, Error>;

    /// Highest derivative order that [`derivative`](Self::derivative) supports.
    fn max_order(&self) -> usize;

    fn value(&self, x: &R) -> Result<R, Error> {
        self.derivative(x, 0)
    }

    /// `g(x)` when the problem is also written as `x = g(x)`.
    fn fixed_point_map(&self, _x: &R) -> Option<Result<R, Error>> {
        None
    }
}

impl<R: Real, T: ScalarFunction<R> + ?Sized> ScalarFunction<R> for &T {
    fn derivative(&self, x: &R, order: usize) -> Result<R, Error> {
        (**self).derivative(x, order)
    }

    fn max_order(&self) -> usize {
        (**self).max_order()
    }

    fn fixed_point_map(&self, x: &R) -> Option<Result<R, Error>> {
        (**self).fixed_point_map(x)
    }
}

/// Adapter for a closure `(x, order) -> value`.
pub struct FnFunction<F> {
    eval: F,
    max_order: usize,
}

impl<F> FnFunction<F> {
    pub fn new(max_order: usize, eval: F) -> Self {
        FnFunction { eval, max_order }
    }
}

impl<R: Real, F: Fn(&R, usize) -> R> ScalarFunction<R> for FnFunction<F> {
    fn derivative(&self, x: &R, order: usize) -> Result<R, Error> {
        if order > self.max_order {
            return Err(Error::MissingDerivative { order });
        }
        Ok((self.eval)(x, order))
    }

    fn max_order(&self) -> usize {
        self.max_order
    }
}
