// SPDX-License-Identifier: Apache-2.0

use num_traits::Num;

use super::BenchError;

/// Power-delay product. With power in uW and delay in ns the result is in
/// fJ (uW x ns), the "fs-W" unit of published adder tables.
///
/// Works for any numeric scalar; use [`crate::Rational`] for exact results
/// or [`crate::Real`] for quick ones.
pub fn pdp<T: Num + PartialOrd + Copy>(power: T, delay: T) -> Result<T, BenchError> {
    if power <= T::zero() || delay <= T::zero() {
        return Err(BenchError::NonPositive);
    }
    Ok(power * delay)
}

/// Fractional reduction `1 - new / old`.
pub fn pdp_reduction<T: Num + PartialOrd + Copy>(new: T, old: T) -> Result<T, BenchError> {
    if new <= T::zero() || old <= T::zero() {
        return Err(BenchError::NonPositive);
    }
    Ok(T::one() - new / old)
}

/// Ratio `num / den`, or zero when `den` is zero.
pub(crate) fn ratio_or_zero<T: Num + Copy>(num: T, den: T) -> T {
    if den.is_zero() {
        T::zero()
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn identity_and_errors() {
        assert_eq!(pdp(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(pdp(r(1, 1), r(1, 1)).unwrap(), r(1, 1));
        assert!(pdp(0.0, 1.0).is_err());
        assert!(pdp(r(1, 1), r(-1, 2)).is_err());
        assert!(pdp_reduction(1, 0).is_err());
    }

    #[test]
    fn exact_and_float_agree() {
        let exact = pdp(r(2426, 100), r(20069, 10000)).unwrap();
        assert_eq!(exact, r(2426 * 20069, 1_000_000));
        let float = pdp(24.26_f64, 2.0069).unwrap();
        assert!((float - 48.687394).abs() < 1e-9);
        let red = pdp_reduction(r(1, 2), r(2, 1)).unwrap();
        assert_eq!(red, r(3, 4));
    }

    #[test]
    fn ratio_guard() {
        assert_eq!(ratio_or_zero(r(3, 1), r(0, 1)), r(0, 1));
        assert_eq!(ratio_or_zero(r(3, 1), r(2, 1)), r(3, 2));
    }
}
