//! Monotone bracketing root finder shared by every scalar solve in the crate.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 4096;
const MAX_EXPANSIONS: usize = 1100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    /// `f(value)`.
    pub residual: f64,
    pub iterations: usize,
}

/// Bracket `[lo, hi]` of an increasing function with `f(lo) <= 0 <= f(hi)`.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub f_lo: f64,
    pub hi: f64,
    pub f_hi: f64,
}

/// Bisects an increasing `f` on `bracket` until the bracket is narrower than `width`
/// or cannot be split further in floating point.
///
/// Returns the endpoint with the smaller residual together with the final bracket.
pub fn bisect_increasing<F>(f: F, mut bracket: Bracket, width: f64) -> Result<(Root, Bracket)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut iterations = 0;
    if bracket.f_lo == 0.0 {
        return Ok((root_at(bracket.lo, 0.0, 0), bracket));
    }
    if bracket.f_hi == 0.0 {
        return Ok((root_at(bracket.hi, 0.0, 0), bracket));
    }
    while bracket.hi - bracket.lo > width {
        let mid = 0.5 * (bracket.lo + bracket.hi);
        if mid <= bracket.lo || mid >= bracket.hi {
            break;
        }
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(Error::NonConvergence {
                what: "bisection",
                iterations,
            });
        }
        let fm = f(mid)?;
        if fm.is_nan() {
            return Err(Error::NonConvergence {
                what: "bisection (NaN residual)",
                iterations,
            });
        }
        if fm == 0.0 {
            bracket.lo = mid;
            bracket.f_lo = 0.0;
            bracket.hi = mid;
            bracket.f_hi = 0.0;
            break;
        } else if fm < 0.0 {
            bracket.lo = mid;
            bracket.f_lo = fm;
        } else {
            bracket.hi = mid;
            bracket.f_hi = fm;
        }
    }
    let root = if bracket.f_lo.abs() <= bracket.f_hi.abs() {
        root_at(bracket.lo, bracket.f_lo, iterations)
    } else {
        root_at(bracket.hi, bracket.f_hi, iterations)
    };
    Ok((root, bracket))
}

fn root_at(value: f64, residual: f64, iterations: usize) -> Root {
    Root {
        value,
        residual,
        iterations,
    }
}

/// Grows `hi` geometrically from `start` until an increasing `f` becomes nonnegative.
pub fn expand_upper<F>(f: &F, lo: f64, start: f64, what: &'static str) -> Result<Bracket>
where
    F: Fn(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let mut lo = lo;
    let mut f_lo = f_lo;
    let mut hi = start.max(f64::MIN_POSITIVE);
    for _ in 0..MAX_EXPANSIONS {
        let f_hi = f(hi)?;
        if f_hi >= 0.0 {
            return Ok(Bracket { lo, f_lo, hi, f_hi });
        }
        if !f_hi.is_nan() {
            lo = hi;
            f_lo = f_hi;
        }
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::Bracketing { what, limit: hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let f = |x: f64| Ok(x * x - 2.0);
        let bracket = expand_upper(&f, 0.0, 1.0, "sqrt").unwrap();
        let (root, _) = bisect_increasing(f, bracket, 0.0).unwrap();
        assert!((root.value - 2f64.sqrt()).abs() <= 4.0 * f64::EPSILON);
        assert!(root.residual.abs() < 1e-15);
    }

    #[test]
    fn exact_root_at_endpoint() {
        let f = |x: f64| Ok(x);
        let b = Bracket {
            lo: 0.0,
            f_lo: 0.0,
            hi: 1.0,
            f_hi: 1.0,
        };
        let (root, _) = bisect_increasing(f, b, 1e-12).unwrap();
        assert_eq!(root.value, 0.0);
        assert_eq!(root.iterations, 0);
    }

    #[test]
    fn expansion_cap_reports_bracketing_failure() {
        let f = |_x: f64| Ok(-1.0);
        assert!(matches!(
            expand_upper(&f, 0.0, 1.0, "never"),
            Err(Error::Bracketing { .. })
        ));
    }
}
