// SPDX-License-Identifier: Apache-2.0
//! Scalar abstraction for the floating-point oracle paths.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; every supported scalar can hold any `f64` approximately.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
