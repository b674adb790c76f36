//! Scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point scalar the library is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Compensated (Kahan) accumulator for any value type with `+`/`-`.
///
/// Keeps the summation order-insensitive to within a few ulps, which the
/// parallel member sums rely on.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kahan<V> {
    sum: V,
    carry: V,
}

impl<V> Kahan<V>
where
    V: Copy + std::ops::Add<Output = V> + std::ops::Sub<Output = V>,
{
    pub(crate) fn new(zero: V) -> Self {
        Self { sum: zero, carry: zero }
    }

    pub(crate) fn add(&mut self, value: V) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn total(&self) -> V {
        self.sum
    }
}
