use crate::error::{Error, Result};

/// Bracket and stopping rule for a one-dimensional root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionSpec {
    pub lower: f64,
    pub upper: f64,
    /// Absolute bracket width at which the search stops.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl BisectionSpec {
    pub fn new(lower: f64, upper: f64, tolerance: f64) -> Self {
        BisectionSpec {
            lower,
            upper,
            tolerance,
            max_iters: 500,
        }
    }
}

/// Finds a root of a monotone `residual` inside `[lower, upper]`.
///
/// The residual must change sign (or vanish) over the bracket. Returns the
/// midpoint of a bracket no wider than `tolerance`.
pub fn bisect(mut residual: impl FnMut(f64) -> f64, spec: BisectionSpec) -> Result<f64> {
    assert!(spec.lower <= spec.upper && spec.tolerance > 0.0, "invalid bisection spec {spec:?}");
    let (mut lo, mut hi) = (spec.lower, spec.upper);
    let (r_lo, r_hi) = (residual(lo), residual(hi));
    if r_lo == 0.0 {
        return Ok(lo);
    }
    if r_hi == 0.0 {
        return Ok(hi);
    }
    if r_lo.signum() == r_hi.signum() || r_lo.is_nan() || r_hi.is_nan() {
        return Err(Error::Bisection {
            lower: lo,
            upper: hi,
            residual: r_hi,
            iters: 0,
        });
    }
    let lo_sign = r_lo.signum();
    for _ in 0..spec.max_iters {
        if hi - lo <= spec.tolerance {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r == 0.0 {
            return Ok(mid);
        }
        if r.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest multiplier the bracket expansion will try (2^60).
pub const MULTIPLIER_CAP: f64 = 1_152_921_504_606_846_976.0;
/// Bracket width, relative to the upper end, at which dual searches stop.
pub const DUAL_REL_TOL: f64 = 1e-10;

/// Outcome of a dual-variable search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualRoot {
    /// Feasible end of the final bracket (the multiplier reported to callers).
    pub multiplier: f64,
    /// Infeasible end of the final bracket; equals `multiplier` when the
    /// constraint is inactive.
    pub lower: f64,
    /// Convex weight on the primal point at `lower` that makes the constraint
    /// tight. Zero unless the primal response jumps inside the bracket.
    pub weight_lower: f64,
}

/// Smallest non-negative multiplier at which the (non-increasing) constraint
/// violation `violation(m)` is `<= 0`.
///
/// If the constraint already holds at zero the multiplier is zero. Otherwise
/// the upper end starts at 1 and doubles until the violation flips sign, then
/// the bracket is halved down to [`DUAL_REL_TOL`] of its upper end.
pub fn dual_bisect(mut violation: impl FnMut(f64) -> f64) -> Result<DualRoot> {
    let g0 = violation(0.0);
    if g0 <= 0.0 {
        return Ok(DualRoot {
            multiplier: 0.0,
            lower: 0.0,
            weight_lower: 0.0,
        });
    }
    let mut lo = 0.0;
    let mut g_lo = g0;
    let mut hi = 1.0;
    let mut g_hi = violation(hi);
    let mut iters = 1;
    while g_hi > 0.0 {
        if hi >= MULTIPLIER_CAP || g_hi.is_nan() {
            return Err(Error::Bisection {
                lower: lo,
                upper: hi,
                residual: g_hi,
                iters,
            });
        }
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        g_hi = violation(hi);
        iters += 1;
    }
    while hi - lo > DUAL_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = violation(mid);
        if g > 0.0 {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
            g_hi = g;
        }
    }
    let weight_lower = if g_lo > 0.0 && g_hi < 0.0 { -g_hi / (g_lo - g_hi) } else { 0.0 };
    Ok(DualRoot {
        multiplier: hi,
        lower: lo,
        weight_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let x = bisect(|x| x - 2.0, BisectionSpec::new(0.0, 10.0, 1e-9)).unwrap();
        assert!((x - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn cubic_root() {
        let x = bisect(|x| x * x * x - 8.0, BisectionSpec::new(0.0, 10.0, 1e-12)).unwrap();
        assert!((x - 2.0).abs() <= 1e-11);
    }

    #[test]
    fn non_bracketing_residual_is_an_error() {
        let err = bisect(|x| x + 1.0, BisectionSpec::new(0.0, 10.0, 1e-9)).unwrap_err();
        assert!(matches!(err, Error::Bisection { .. }));
    }

    #[test]
    fn inactive_constraint_returns_zero() {
        let root = dual_bisect(|m| -1.0 - m).unwrap();
        assert_eq!(root.multiplier, 0.0);
        assert_eq!(root.weight_lower, 0.0);
    }

    #[test]
    fn dual_search_finds_the_crossing() {
        let root = dual_bisect(|m| 1e9 - m).unwrap();
        assert!((root.multiplier - 1e9).abs() <= 1e-10 * 1e9 * 1.01);
        let root = dual_bisect(|m| 8.0 - m * m * m).unwrap();
        assert!((root.multiplier - 2.0).abs() < 1e-9);
    }

    #[test]
    fn dual_search_reports_jump_weight() {
        // step response: violation +1 below 3, -1 at and above 3
        let root = dual_bisect(|m| if m < 3.0 { 1.0 } else { -1.0 }).unwrap();
        assert!((root.multiplier - 3.0).abs() < 1e-8);
        assert!((root.weight_lower - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unbounded_violation_is_an_error() {
        assert!(dual_bisect(|_| 1.0).is_err());
    }
}
