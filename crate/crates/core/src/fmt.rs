//! Float formatting shared by the CSV writers.

/// Significant digits used for every float written to CSV.
pub const CSV_SIGNIFICANT_DIGITS: usize = 12;

/// Formats like C's `%.{digits}g`: shortest of fixed/scientific notation with
/// `digits` significant digits and trailing zeros removed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// [`format_significant`] at [`CSV_SIGNIFICANT_DIGITS`].
pub fn csv_float(x: f64) -> String {
    format_significant(x, CSV_SIGNIFICANT_DIGITS)
}
