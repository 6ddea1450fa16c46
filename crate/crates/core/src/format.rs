//! Fixed-precision number output. Every float written to a CSV or JSON
//! report goes through here so identical inputs give identical bytes.

/// Significant digits kept in reports.
pub const SIG_DIGITS: usize = 9;

/// Rounds to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest text for `x` rounded to [`SIG_DIGITS`] significant digits;
/// plain decimal between 1e-4 and 1e9, exponent notation elsewhere.
pub fn sig(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 || !r.is_finite() {
        return format!("{}", if r == 0.0 { 0.0 } else { r });
    }
    let a = r.abs();
    if (1e-4..1e9).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}
