//! C99-style hexadecimal float literals (`0x1.8p+1`) for bit-exact storage.

use std::fmt::Write;

const MANT_BITS: u32 = 52;
const MANT_MASK: u64 = (1 << MANT_BITS) - 1;

pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_field = ((bits >> MANT_BITS) & 0x7ff) as i32;
    let mant = bits & MANT_MASK;
    if exp_field == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_field == 0 {
        (0, -1022)
    } else {
        (1, exp_field - 1023)
    };
    let mut out = format!("{sign}0x{lead}");
    if mant != 0 {
        let digits = format!("{mant:013x}");
        out.push('.');
        out.push_str(digits.trim_end_matches('0'));
    }
    write!(out, "p{exp:+}").unwrap();
    out
}

/// `x · 2^e` with a single final rounding.
fn ldexp(mut x: f64, mut e: i32) -> f64 {
    let pow2 = |k: i32| f64::from_bits(((k + 1023) as u64) << MANT_BITS);
    while e > 1023 {
        x *= pow2(1023);
        e -= 1023;
    }
    while e < -1022 {
        x *= pow2(-1022);
        e += 1022;
        if x == 0.0 {
            return x;
        }
    }
    x * pow2(e)
}

/// Parse the output of [`format`]. At most 15 significant hex digits are
/// accepted so the mantissa is held exactly.
pub fn parse(s: &str) -> Option<f64> {
    let s = s.trim();
    match s {
        "nan" => return Some(f64::NAN),
        "inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let body = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X"))?;
    let (mantissa, exponent) = body.split_once(['p', 'P'])?;
    let exponent: i32 = exponent.parse().ok()?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits: Vec<u32> = int_part
        .chars()
        .chain(frac_part.chars())
        .map(|c| c.to_digit(16))
        .collect::<Option<_>>()?;
    let significant = digits.iter().skip_while(|&&d| d == 0).count();
    if significant > 15 {
        return None;
    }
    let mant = digits.iter().fold(0u64, |acc, &d| (acc << 4) | d as u64);
    let shift = exponent.checked_sub(4 * frac_part.len() as i32)?;
    let value = ldexp(mant as f64, shift);
    Some(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_literals() {
        assert_eq!(format(1.0), "0x1p+0");
        assert_eq!(format(3.0), "0x1.8p+1");
        assert_eq!(format(-0.5), "-0x1p-1");
        assert_eq!(format(0.1), "0x1.999999999999ap-4");
        assert_eq!(format(0.0), "0x0p+0");
        assert_eq!(format(-0.0), "-0x0p+0");
        assert_eq!(format(f64::MIN_POSITIVE), "0x1p-1022");
        assert_eq!(format(5e-324), "0x0.0000000000001p-1022");
        assert_eq!(format(f64::MAX), "0x1.fffffffffffffp+1023");
    }

    #[test]
    fn parses_literals() {
        assert_eq!(parse("0x1.8p+1"), Some(3.0));
        assert_eq!(parse("0x1.999999999999ap-4"), Some(0.1));
        assert_eq!(parse("-0x0p+0").map(f64::to_bits), Some((-0.0f64).to_bits()));
        assert_eq!(parse("0x0.0000000000001p-1022"), Some(5e-324));
        assert_eq!(parse("0x1.fffffffffffffp+1023"), Some(f64::MAX));
        assert_eq!(parse("inf"), Some(f64::INFINITY));
        assert!(parse("nan").unwrap().is_nan());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1.5", "0x", "0xp+1", "0x1.8", "0x1.gp+0", "0x1p+", "0x1.00000000000000001p+0"] {
            assert_eq!(parse(bad), None, "{bad}");
        }
    }

    proptest! {
        #[test]
        fn round_trips_every_bit_pattern(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            let back = parse(&format(x)).unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), bits);
            }
        }
    }
}
