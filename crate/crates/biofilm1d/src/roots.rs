//! Bracketing scalar root-finding (Brent's method) with explicit bracket
//! expansion.
//!
//! All root searches in this crate are on smooth monotone-near-the-root
//! functions whose evaluation may itself run a solver, so the function type
//! is fallible and every search starts from (or first establishes) a sign
//! change.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute bracket-width target.
    pub xtol_abs: f64,
    /// Relative bracket-width target (scaled by the current iterate).
    pub xtol_rel: f64,
    /// Residual target: stop as soon as `|f| ≤ ftol`.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            xtol_abs: 0.0,
            xtol_rel: 1e-12,
            ftol: 0.0,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub root: f64,
    pub f_root: f64,
    pub iterations: usize,
    /// Width of the final bracketing interval.
    pub bracket_width: f64,
}

/// Brent's method on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite
/// sign (precomputed and passed in). Combines bisection, secant, and inverse
/// quadratic interpolation; terminates when the bracket width or the
/// residual reaches the requested tolerance.
pub fn brent(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a0: f64,
    b0: f64,
    fa0: f64,
    fb0: f64,
    opts: &RootOptions,
) -> Result<RootResult> {
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    if fa == 0.0 {
        return Ok(RootResult {
            root: a,
            f_root: 0.0,
            iterations: 0,
            bracket_width: 0.0,
        });
    }
    if fb == 0.0 {
        return Ok(RootResult {
            root: b,
            f_root: 0.0,
            iterations: 0,
            bracket_width: 0.0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::invalid(format!(
            "brent: no sign change on [{a0:.6e}, {b0:.6e}] (f = {fa0:.3e}, {fb0:.3e})"
        )));
    }

    // c is the previous iterate of b; d the step before that.
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (opts.xtol_abs + opts.xtol_rel * b.abs());
        let m = 0.5 * (c - b);

        if fb.abs() <= opts.ftol || m.abs() <= tol {
            return Ok(RootResult {
                root: b,
                f_root: fb,
                iterations: iter,
                bracket_width: (c - b).abs(),
            });
        }

        if e.abs() >= tol && fa.abs() > fb.abs() {
            // Attempt interpolation: secant if two points, inverse quadratic
            // if three distinct ones.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol {
            d
        } else if m > 0.0 {
            tol
        } else {
            -tol
        };
        fb = f(b)?;
    }

    Err(Error::IterationFailure {
        context: "brent".into(),
        iterations: opts.max_iter,
        residual: fb.abs(),
    })
}

/// Establish a sign-changing bracket starting from `[a, b]` by repeatedly
/// doubling the interval to the right (up to `hi_max`) and, if allowed,
/// halving the left end toward `lo_min`. Returns the bracket and the function
/// values at its ends, or `None` if the search space is exhausted without a
/// sign change.
pub fn expand_bracket(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    lo_min: f64,
    hi_max: f64,
) -> Result<Option<(f64, f64, f64, f64)>> {
    let mut lo = a;
    let mut hi = b;
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;

    loop {
        if flo == 0.0 || fhi == 0.0 || flo.signum() != fhi.signum() {
            return Ok(Some((lo, hi, flo, fhi)));
        }
        let can_grow = hi < hi_max;
        let can_shrink = lo > lo_min;
        if !can_grow && !can_shrink {
            return Ok(None);
        }
        if can_grow {
            hi = (hi * 2.0).min(hi_max);
            fhi = f(hi)?;
            if flo.signum() != fhi.signum() {
                return Ok(Some((lo, hi, flo, fhi)));
            }
        }
        if can_shrink {
            lo = (lo * 0.5).max(lo_min);
            flo = f(lo)?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn solve(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64) -> RootResult {
        let mut g = |x: f64| Ok(f(x));
        let fa = f(a);
        let fb = f(b);
        brent(&mut g, a, b, fa, fb, &RootOptions::default()).unwrap()
    }

    #[test]
    fn finds_simple_roots_to_relative_tolerance() {
        let r = solve(|x| x * x - 2.0, 0.0, 2.0);
        assert_relative_eq!(r.root, std::f64::consts::SQRT_2, max_relative = 1e-12);

        let r = solve(|x| x.cos() - x, 0.0, 1.0);
        assert_relative_eq!(r.root, 0.7390851332151607, max_relative = 1e-12);
    }

    #[test]
    fn honors_residual_tolerance() {
        let mut g = |x: f64| Ok(x.exp() - 2.0);
        let opts = RootOptions {
            ftol: 1e-13,
            ..Default::default()
        };
        let r = brent(&mut g, 0.0, 1.0, -1.0, std::f64::consts::E - 2.0, &opts).unwrap();
        assert!(r.f_root.abs() <= 1e-13);
        assert_relative_eq!(r.root, std::f64::consts::LN_2, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let mut g = |x: f64| Ok(x * x + 1.0);
        assert!(brent(&mut g, -1.0, 1.0, 2.0, 2.0, &RootOptions::default()).is_err());
    }

    #[test]
    fn expands_to_find_a_bracket() {
        // Root at x = 40, initial interval [0.5, 1].
        let mut g = |x: f64| Ok(x - 40.0);
        let got = expand_bracket(&mut g, 0.5, 1.0, 1e-12, 1e3).unwrap().unwrap();
        assert!(got.0 < 40.0 && got.1 >= 40.0);
        let r = brent(&mut g, got.0, got.1, got.2, got.3, &RootOptions::default()).unwrap();
        assert_relative_eq!(r.root, 40.0, max_relative = 1e-12);
    }

    #[test]
    fn reports_exhaustion_when_no_root_exists() {
        let mut g = |x: f64| Ok(1.0 + x * x);
        let got = expand_bracket(&mut g, 0.5, 1.0, 1e-6, 64.0).unwrap();
        assert!(got.is_none());
    }
}
