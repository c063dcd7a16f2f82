//! Shared formatting helpers for the text artifacts.

/// Formats a float with 17 significant digits so it parses back to the same
/// bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
