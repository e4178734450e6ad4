use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TsaError;
use crate::scalar::Sample;

/// Pointwise distance between a query sample and a reference sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    AbsDiff,
    SquareDiff,
}

impl DistanceMetric {
    pub fn name(self) -> &'static str {
        match self {
            DistanceMetric::AbsDiff => "abs_diff",
            DistanceMetric::SquareDiff => "square_diff",
        }
    }
}

impl FromStr for DistanceMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abs_diff" => Ok(DistanceMetric::AbsDiff),
            "square_diff" => Ok(DistanceMetric::SquareDiff),
            other => Err(format!("unknown metric `{other}` (expected abs_diff|square_diff)")),
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `|a - b|` or `(a - b)^2`, widened to the accumulator type.
pub fn dist<T: Sample>(a: T, b: T, metric: DistanceMetric) -> Result<T::Acc, TsaError> {
    a.dist(b, metric).ok_or_else(|| TsaError::Saturation {
        what: format!("{metric}({a}, {b})"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn definition_examples() {
        assert_eq!(dist(5i32, 3, DistanceMetric::AbsDiff).unwrap(), 2);
        assert_eq!(dist(-4i32, 3, DistanceMetric::SquareDiff).unwrap(), 49);
        assert_eq!(dist(2.5f64, -1.0, DistanceMetric::AbsDiff).unwrap(), 3.5);
        assert!(matches!(
            dist(i16::MAX, i16::MIN, DistanceMetric::SquareDiff),
            Err(TsaError::Saturation { .. })
        ));
    }

    proptest! {
        #[test]
        fn square_of_self_is_zero(x in any::<i32>()) {
            prop_assert_eq!(dist(x, x, DistanceMetric::SquareDiff).unwrap(), 0);
        }

        #[test]
        fn square_and_abs_relation(a in any::<i16>(), b in any::<i16>()) {
            let ab = dist(a, b, DistanceMetric::AbsDiff).unwrap();
            prop_assert!(ab >= 0);
            if let Ok(sq) = dist(a, b, DistanceMetric::SquareDiff) {
                prop_assert!(sq >= 0);
                if ab >= 1 { prop_assert!(sq >= ab); } else { prop_assert!(sq <= ab); }
            }
        }
    }
}
