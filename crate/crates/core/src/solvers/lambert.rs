use crate::error::{Error, Result};

/// Principal branch of the Lambert W function on `[0, ∞)`: the `w ≥ 0` with
/// `w·e^w = t`.
///
/// Halley iteration started from `ln(1 + t)`, which over-estimates `W` on the
/// whole half-line and keeps the iterates monotone.
pub fn lambert_w(t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("lambert_w needs t >= 0, got {t}")));
    }
    if t.is_infinite() {
        return Err(Error::NonFinite("lambert_w of +inf".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut w = t.ln_1p();
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - t;
        if f.abs() <= 1e-15 * (1.0 + t) {
            break;
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if (next - w).abs() <= 4.0 * f64::EPSILON * w.abs() {
            w = next;
            break;
        }
        w = next;
    }
    Ok(w)
}
