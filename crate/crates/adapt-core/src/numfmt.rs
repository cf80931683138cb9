//! Deterministic number formatting with nine significant digits.
//!
//! All user-visible reals (CLI output, trace CSV, summary files) go through
//! [`sig9`] so that repeated runs produce byte-identical artifacts and golden
//! tests stay meaningful.

use alloc::format;
use alloc::string::String;

/// Formats `x` with exactly nine significant digits.
///
/// Values whose decimal exponent falls in `[-4, 8]` are printed in fixed
/// notation without trimming ("0.400000000", "400.000000"); anything outside
/// that range uses scientific notation ("1.23456789e12"). Zero is printed as
/// "0.000000000", matching the fixed form of other sub-one magnitudes.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return String::from("nan");
    }
    if x.is_infinite() {
        return String::from(if x > 0.0 { "inf" } else { "-inf" });
    }
    if x == 0.0 {
        return String::from("0.000000000");
    }
    // {:.8e} rounds to nine significant digits and exposes the exponent,
    // including the carry case (9.999999996 -> 1.00000000e1).
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("{:.8e} always contains an exponent");
    let exp: i32 = exp.parse().expect("{:.8e} exponent is an integer");
    if (-4..=8).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{}e{}", mantissa, exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_notation_keeps_nine_significant_digits() {
        assert_eq!(sig9(0.4), "0.400000000");
        assert_eq!(sig9(0.5), "0.500000000");
        assert_eq!(sig9(400.0), "400.000000");
        assert_eq!(sig9(-0.07), "-0.0700000000");
        assert_eq!(sig9(123456789.5), "123456790");
    }

    #[test]
    fn zero_and_specials() {
        assert_eq!(sig9(0.0), "0.000000000");
        assert_eq!(sig9(-0.0), "0.000000000");
        assert_eq!(sig9(f64::NAN), "nan");
        assert_eq!(sig9(f64::INFINITY), "inf");
        assert_eq!(sig9(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn scientific_notation_outside_fixed_range() {
        assert_eq!(sig9(1.0e9), "1.00000000e9");
        assert_eq!(sig9(1.23e-17), "1.23000000e-17");
        assert_eq!(sig9(-2.5e12), "-2.50000000e12");
    }

    #[test]
    fn decade_carry_switches_to_scientific_consistently() {
        // 999_999_999.5 rounds up to 1e9 at nine significant digits.
        assert_eq!(sig9(999_999_999.5), "1.00000000e9");
    }

    #[test]
    fn formatting_round_trips_within_nine_digits() {
        for &x in &[0.123456789, 42.0, 1e-3, 987.654321, 5e-5] {
            let parsed: f64 = sig9(x).parse().unwrap();
            assert!((parsed - x).abs() <= x.abs() * 1e-8);
        }
    }
}
