/// Shortest decimal string that parses back to the same `f64`.
///
/// Magnitudes in `[1e-3, 1e7)` (and zero) are written positionally; anything
/// else uses an `e` exponent. Non-finite values render as `NaN`, `inf`,
/// `-inf`.
pub fn render_float(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = v.abs();
    if a == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.is_empty() || t.starts_with('+') {
        return None;
    }
    t.parse().ok()
}
