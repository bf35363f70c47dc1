//! IPS categories.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Kurang / Cukup / Baik.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IpsCategory {
    K,
    C,
    B,
}

impl IpsCategory {
    pub const ALL: [IpsCategory; 3] = [IpsCategory::K, IpsCategory::C, IpsCategory::B];

    pub fn code(self) -> &'static str {
        match self {
            IpsCategory::K => "K",
            IpsCategory::C => "C",
            IpsCategory::B => "B",
        }
    }
}

impl fmt::Display for IpsCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("IPS {0} is outside [0, 4]")]
pub struct IpsOutOfRange(pub f64);

pub const K_BELOW: f64 = 2.5;
pub const B_ABOVE: f64 = 3.0;

/// K below 2.5; C on [2.5, 3.0]; B above 3.0.
pub fn classify_ips(ips: f64) -> Result<IpsCategory, IpsOutOfRange> {
    if !(0.0..=4.0).contains(&ips) {
        return Err(IpsOutOfRange(ips));
    }
    Ok(if ips < K_BELOW {
        IpsCategory::K
    } else if ips <= B_ABOVE {
        IpsCategory::C
    } else {
        IpsCategory::B
    })
}

/// Exact classification of `points / credits` in integer arithmetic.
///
/// Agrees with [`classify_ips`] on the quotient; `credits` must be positive.
pub fn classify_ratio(points: i64, credits: i64) -> Result<IpsCategory, IpsOutOfRange> {
    if credits <= 0 || points < 0 || points > 4 * credits {
        return Err(IpsOutOfRange(points as f64 / credits as f64));
    }
    Ok(if 2 * points < 5 * credits {
        IpsCategory::K
    } else if points <= 3 * credits {
        IpsCategory::C
    } else {
        IpsCategory::B
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundaries() {
        assert_eq!(classify_ips(2.49), Ok(IpsCategory::K));
        assert_eq!(classify_ips(2.50), Ok(IpsCategory::C));
        assert_eq!(classify_ips(3.00), Ok(IpsCategory::C));
        assert_eq!(classify_ips(3.01), Ok(IpsCategory::B));
        assert_eq!(classify_ips(0.0), Ok(IpsCategory::K));
        assert_eq!(classify_ips(4.0), Ok(IpsCategory::B));
        assert!(classify_ips(4.01).is_err());
        assert!(classify_ips(-0.1).is_err());
        assert!(classify_ips(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn ratio_agrees_with_float(credits in 1i64..60, frac in 0.0f64..=1.0) {
            let points = ((4 * credits) as f64 * frac).round() as i64;
            prop_assert_eq!(
                classify_ratio(points, credits).unwrap(),
                classify_ips(points as f64 / credits as f64).unwrap()
            );
        }
    }
}
