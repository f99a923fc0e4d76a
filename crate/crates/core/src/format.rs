//! Deterministic numeric formatting for CSV and JSON artifacts.

/// Formats `x` with `sig` significant digits, choosing fixed or scientific
/// notation the way C's `%g` does and stripping trailing zeros.
///
/// The output is locale-independent and round-trips through `f64` parsing,
/// which keeps every artifact byte-identical across runs and platforms.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1, "need at least one significant digit");
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }

    // Round to `sig` digits via exponential formatting, then re-lay-out.
    let formatted = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp_str) = formatted
        .split_once('e')
        .expect("exponential format always contains 'e'");
    let exp: i32 = exp_str.parse().expect("valid exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();

    let body = if exp >= -4 && exp < sig as i32 {
        fixed_layout(&digits, exp)
    } else {
        let trimmed = trim_zeros(&digits[1..]);
        if trimmed.is_empty() {
            format!("{}e{}", &digits[..1], exp)
        } else {
            format!("{}.{}e{}", &digits[..1], trimmed, exp)
        }
    };
    format!("{sign}{body}")
}

/// Lays out `digits` (no point) with the decimal point after position `exp`.
fn fixed_layout(digits: &str, exp: i32) -> String {
    if exp < 0 {
        let frac = trim_zeros(digits);
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), frac)
    } else {
        let split = (exp + 1) as usize;
        if split >= digits.len() {
            format!("{}{}", digits, "0".repeat(split - digits.len()))
        } else {
            let frac = trim_zeros(&digits[split..]);
            if frac.is_empty() {
                digits[..split].to_string()
            } else {
                format!("{}.{}", &digits[..split], frac)
            }
        }
    }
}

fn trim_zeros(s: &str) -> &str {
    s.trim_end_matches('0')
}
