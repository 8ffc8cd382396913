//! Decimal formatting for metric files.

/// Significant digits written for real-valued metrics.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// `%.9g`-style formatting: fixed notation for exponents in `[-4, 9)`,
/// scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0".to_string()
        } else {
            x.to_string()
        };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Rounds `x` to the value that [`format_sig`] writes, so that storing the
/// result and reading the file back agree exactly.
pub fn quantize(x: f64) -> f64 {
    if x.is_finite() {
        format_sig(x).parse().expect("formatted decimal")
    } else {
        x
    }
}
