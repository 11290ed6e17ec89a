//! Closed-form BPSK reference curves and curve read-off helpers.

use statrs::function::erf::erfc;

fn db_to_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// BPSK over AWGN, `Q(√(2γ)) = erfc(√γ)/2`.
pub fn siso_awgn_ref(snr_db: f64) -> f64 {
    let g = db_to_linear(snr_db);
    if g.is_infinite() {
        return 0.0;
    }
    0.5 * erfc(g.sqrt())
}

/// BPSK over flat Rayleigh fading, `(1 − √(γ/(1+γ)))/2`.
pub fn siso_rayleigh_ref(snr_db: f64) -> f64 {
    let g = db_to_linear(snr_db);
    if g.is_infinite() {
        return 0.0;
    }
    0.5 * (1.0 - (g / (1.0 + g)).sqrt())
}

/// SNR (dB) at which a decreasing analytical curve reaches `target`, by
/// bisection on `[lo, hi]`.
pub fn invert_curve(
    curve: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> Option<f64> {
    if !(curve(lo) >= target && curve(hi) <= target) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if curve(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// SNR (dB) where a measured curve crosses `target`, interpolating
/// `log10(BER)` linearly between the first bracketing pair of points.
/// Points with zero errors are skipped.
pub fn crossing_db(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(_, b)| b > 0.0).collect();
    let lt = target.log10();
    pts.windows(2).find_map(|w| {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if b0 >= target && b1 <= target {
            let (l0, l1) = (b0.log10(), b1.log10());
            if l0 == l1 {
                return Some(s0);
            }
            Some(s0 + (lt - l0) * (s1 - s0) / (l1 - l0))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn awgn_limits_and_anchor() {
        assert_eq!(siso_awgn_ref(f64::INFINITY), 0.0);
        assert_eq!(siso_awgn_ref(f64::NEG_INFINITY), 0.5);
        assert!(siso_awgn_ref(60.0) < 1e-300);
        let p = siso_awgn_ref(6.79);
        assert!((p - 1e-3).abs() < 2e-5, "{p}");
    }

    #[test]
    fn awgn_inversion_finds_anchor() {
        let s = invert_curve(siso_awgn_ref, 1e-3, -10.0, 30.0).unwrap();
        assert!((s - 6.79).abs() < 0.01, "{s}");
        assert!(invert_curve(siso_awgn_ref, 0.9, -10.0, 30.0).is_none());
    }

    #[test]
    fn rayleigh_reference() {
        assert_eq!(siso_rayleigh_ref(f64::NEG_INFINITY), 0.5);
        assert_eq!(siso_rayleigh_ref(f64::INFINITY), 0.0);
        // γ = 1: (1 − √0.5)/2
        assert!((siso_rayleigh_ref(0.0) - 0.5 * (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        // High SNR asymptote 1/(4γ).
        assert!((siso_rayleigh_ref(40.0) * 4.0 * 1e4 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let pts = [(0.0, 1e-1), (2.0, 1e-2), (4.0, 1e-4)];
        assert!((crossing_db(&pts, 1e-2).unwrap() - 2.0).abs() < 1e-12);
        assert!((crossing_db(&pts, 1e-3).unwrap() - 3.0).abs() < 1e-12);
        assert!(crossing_db(&pts, 1e-6).is_none());
        assert!(crossing_db(&[(0.0, 0.1), (2.0, 0.0)], 1e-3).is_none());
    }
}
