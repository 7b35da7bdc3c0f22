//! Scalar abstraction. The solver core is generic over the floating-point
//! type; `f32` and `f64` implement [`Real`]. All tolerances in this crate are
//! stated for `f64`.

use std::fmt;

pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` literal (lossy in single precision).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// Exact conversion from a small integer count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips_between_widths() {
        assert_eq!(f32::of(0.5), 0.5f32);
        assert_eq!(f64::of(0.5), 0.5f64);
        assert_eq!(f64::of_usize(1 << 20), (1u64 << 20) as f64);
        assert_eq!(0.25f32.as_f64(), 0.25f64);
    }
}
