//! Number formatting shared by every emitted JSON and CSV document.

/// Significant digits kept in emitted numbers.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits; `-0.0` becomes `0.0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let r: f64 = s.parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Decimal text for CSV cells: `.` separator, 12 significant digits.
pub fn format_sig(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        return "0.0".into();
    }
    if r.is_finite() && r.abs() >= 1e-4 && r.abs() < 1e15 {
        let s = format!("{r}");
        if s.contains('.') {
            s
        } else {
            format!("{s}.0")
        }
    } else {
        format!("{r:e}")
    }
}
