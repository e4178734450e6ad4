//! Sample and accumulator scalar traits.
//!
//! Every sample type pairs with an accumulator twice its width (`i16 -> i32`,
//! `i32 -> i64`, ...). Floating point samples accumulate in their own type and
//! never overflow in the checked sense; they exist for the host oracle only.

use std::fmt::{Debug, Display};

use num_traits::{Bounded, NumCast, ToPrimitive, Zero};

use crate::metric::DistanceMetric;

/// Running-cost accumulator for DTW scoring matrices.
pub trait Accumulator:
    Copy + PartialOrd + Zero + Bounded + NumCast + Debug + Display + Send + Sync + 'static
{
    fn checked_accumulate(self, rhs: Self) -> Option<Self>;

    /// Smaller of two values. Falls back to `self` on unordered floats.
    fn min_of(self, rhs: Self) -> Self {
        if rhs < self {
            rhs
        } else {
            self
        }
    }
}

macro_rules! int_accumulator {
    ($($t:ty)*) => ($(
        impl Accumulator for $t {
            #[inline]
            fn checked_accumulate(self, rhs: Self) -> Option<Self> {
                self.checked_add(rhs)
            }
        }
    )*)
}

int_accumulator!(i16 i32 i64 i128);

macro_rules! float_accumulator {
    ($($t:ty)*) => ($(
        impl Accumulator for $t {
            #[inline]
            fn checked_accumulate(self, rhs: Self) -> Option<Self> {
                let s = self + rhs;
                s.is_finite().then_some(s)
            }
        }
    )*)
}

float_accumulator!(f32 f64);

/// Storage format of a series sample, as carried in binary files and CLI flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    Int8,
    Int16,
    Int32,
    Int64,
    Fp32,
    Fp64,
}

impl DType {
    pub const ALL: [DType; 6] = [
        DType::Int8,
        DType::Int16,
        DType::Int32,
        DType::Int64,
        DType::Fp32,
        DType::Fp64,
    ];

    /// Code stored in the binary series header.
    pub fn code(self) -> u32 {
        match self {
            DType::Int8 => 1,
            DType::Int16 => 2,
            DType::Int32 => 3,
            DType::Int64 => 4,
            DType::Fp32 => 5,
            DType::Fp64 => 6,
        }
    }

    pub fn from_code(code: u32) -> Option<DType> {
        DType::ALL.into_iter().find(|d| d.code() == code)
    }

    pub fn bits(self) -> u32 {
        match self {
            DType::Int8 => 8,
            DType::Int16 => 16,
            DType::Int32 | DType::Fp32 => 32,
            DType::Int64 | DType::Fp64 => 64,
        }
    }

    pub fn is_integer(self) -> bool {
        !matches!(self, DType::Fp32 | DType::Fp64)
    }

    pub fn name(self) -> &'static str {
        match self {
            DType::Int8 => "int8",
            DType::Int16 => "int16",
            DType::Int32 => "int32",
            DType::Int64 => "int64",
            DType::Fp32 => "fp32",
            DType::Fp64 => "fp64",
        }
    }
}

impl std::str::FromStr for DType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DType::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown dtype `{s}` (expected int8|int16|int32|int64|fp32|fp64)"))
    }
}

impl Display for DType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A time-series sample type.
pub trait Sample:
    Copy + PartialOrd + NumCast + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    type Acc: Accumulator;
    const DTYPE: DType;

    /// Pointwise distance, widened into the accumulator. `None` when the result
    /// does not fit the accumulator.
    fn dist(self, other: Self, metric: DistanceMetric) -> Option<Self::Acc>;

    /// Little-endian encoding used by the binary series format.
    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

macro_rules! int_sample {
    ($($t:ty => $acc:ty),*) => ($(
        impl Sample for $t {
            type Acc = $acc;
            const DTYPE: DType = int_dtype::<$t>();

            #[inline]
            fn dist(self, other: Self, metric: DistanceMetric) -> Option<$acc> {
                // the difference of two samples always fits the doubled width
                let d = (self as $acc) - (other as $acc);
                match metric {
                    DistanceMetric::AbsDiff => d.checked_abs(),
                    DistanceMetric::SquareDiff => d.checked_mul(d),
                }
            }

            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }

            fn read_le(bytes: &[u8]) -> Self {
                let mut buf = [0u8; std::mem::size_of::<$t>()];
                buf.copy_from_slice(&bytes[..std::mem::size_of::<$t>()]);
                <$t>::from_le_bytes(buf)
            }
        }
    )*)
}

const fn int_dtype<T>() -> DType {
    match std::mem::size_of::<T>() {
        1 => DType::Int8,
        2 => DType::Int16,
        4 => DType::Int32,
        _ => DType::Int64,
    }
}

int_sample!(i8 => i16, i16 => i32, i32 => i64, i64 => i128);

macro_rules! float_sample {
    ($($t:ty => $code:expr),*) => ($(
        impl Sample for $t {
            type Acc = $t;
            const DTYPE: DType = $code;

            #[inline]
            fn dist(self, other: Self, metric: DistanceMetric) -> Option<$t> {
                let d = self - other;
                let v = match metric {
                    DistanceMetric::AbsDiff => d.abs(),
                    DistanceMetric::SquareDiff => d * d,
                };
                v.is_finite().then_some(v)
            }

            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }

            fn read_le(bytes: &[u8]) -> Self {
                let mut buf = [0u8; std::mem::size_of::<$t>()];
                buf.copy_from_slice(&bytes[..std::mem::size_of::<$t>()]);
                <$t>::from_le_bytes(buf)
            }
        }
    )*)
}

float_sample!(f32 => DType::Fp32, f64 => DType::Fp64);
