//! Scalar root finding shared by the fixed-point solvers.

/// Root of an increasing function on a bracket with `h(lo) <= 0 <= h(hi)`:
/// secant steps safeguarded by bisection. Infinite endpoint values force
/// pure bisection until the bracket is finite.
pub(crate) fn bracketed_root(
    mut lo: f64,
    mut hi: f64,
    mut h_lo: f64,
    mut h_hi: f64,
    h: impl Fn(f64) -> f64,
    tol: f64,
) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let mut probe = mid;
        if h_lo.is_finite() && h_hi.is_finite() && h_hi > h_lo {
            let secant = lo - h_lo * (hi - lo) / (h_hi - h_lo);
            if secant.is_finite() && secant > lo && secant < hi {
                probe = secant;
            }
        }
        let h_probe = h(probe);
        if h_probe == 0.0 {
            return probe;
        }
        if h_probe < 0.0 {
            lo = probe;
            h_lo = h_probe;
        } else {
            hi = probe;
            h_hi = h_probe;
        }
        // force a bisection step whenever the secant stalls near one edge
        let width = hi - lo;
        if width > tol * hi.abs().max(1.0) && (probe - mid).abs() > 0.4 * width {
            let h_mid = h(0.5 * (lo + hi));
            if h_mid < 0.0 {
                lo = 0.5 * (lo + hi);
                h_lo = h_mid;
            } else {
                hi = 0.5 * (lo + hi);
                h_hi = h_mid;
            }
        }
    }
    0.5 * (lo + hi)
}
