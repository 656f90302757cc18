//! Adaptive explicit integration: the Dormand–Prince 5(4) embedded
//! Runge–Kutta pair with FSAL, step rejection, and Hermite dense output.
//!
//! The integrator keeps every accepted step (state and derivative), so a
//! completed run doubles as a continuous trajectory: [`OdePath::eval`]
//! interpolates between accepted steps with a cubic Hermite, which is what
//! event location (contact heights, equilibrium residuals) and trajectory
//! comparisons are evaluated on.
//!
//! The right-hand side is fallible because several callers evaluate it by
//! running an inner solver (the quasi-steady height dynamics solve a boundary
//! value problem per evaluation).

use crate::error::{Error, Result};
use crate::numerics::hermite;

// Dormand–Prince RK5(4)7M coefficients.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights equal the last row of A (FSAL); the embedded
// fourth-order solution provides the error estimate.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the initial derivative scale if absent.
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-8,
            atol: 1e-12,
            initial_step: None,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

/// One accepted integrator step: time, state, and state derivative.
#[derive(Debug, Clone, Copy)]
pub struct OdeStep<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCause {
    ReachedEnd,
    Predicate,
}

/// Accepted steps of a completed integration, evaluable anywhere in between.
#[derive(Debug, Clone)]
pub struct OdePath<const N: usize> {
    steps: Vec<OdeStep<N>>,
}

impl<const N: usize> OdePath<N> {
    pub fn steps(&self) -> &[OdeStep<N>] {
        &self.steps
    }

    pub fn first(&self) -> &OdeStep<N> {
        self.steps.first().expect("path has at least one step")
    }

    pub fn last(&self) -> &OdeStep<N> {
        self.steps.last().expect("path has at least one step")
    }

    pub fn t_start(&self) -> f64 {
        self.first().t
    }

    pub fn t_end(&self) -> f64 {
        self.last().t
    }

    fn segment(&self, t: f64) -> (&OdeStep<N>, &OdeStep<N>) {
        let steps = &self.steps;
        let idx = steps.partition_point(|s| s.t < t);
        let hi = idx.clamp(1, steps.len() - 1);
        (&steps[hi - 1], &steps[hi])
    }

    /// Dense evaluation of the full state by piecewise cubic Hermite
    /// interpolation between accepted steps.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if self.steps.len() == 1 {
            return self.steps[0].y;
        }
        let (s0, s1) = self.segment(t);
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = hermite(s0.t, s0.y[k], s0.dy[k], s1.t, s1.y[k], s1.dy[k], t);
        }
        out
    }

    pub fn eval_component(&self, t: f64, k: usize) -> f64 {
        if self.steps.len() == 1 {
            return self.steps[0].y[k];
        }
        let (s0, s1) = self.segment(t);
        hermite(s0.t, s0.y[k], s0.dy[k], s1.t, s1.y[k], s1.dy[k], t)
    }
}

fn rms_error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], opts: &OdeOptions) -> f64 {
    let mut acc = 0.0;
    for k in 0..N {
        let sc = opts.atol + opts.rtol * y0[k].abs().max(y1[k].abs());
        let e = err[k] / sc;
        acc += e * e;
    }
    (acc / N as f64).sqrt()
}

fn initial_step_guess<const N: usize>(
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t_end: f64,
    opts: &OdeOptions,
) -> f64 {
    // Scale-based guess in the spirit of the usual starting-step heuristic:
    // small fraction of the state scale over the derivative scale.
    let mut ynorm: f64 = 0.0;
    let mut fnorm: f64 = 0.0;
    for k in 0..N {
        let sc = opts.atol + opts.rtol * y0[k].abs();
        ynorm = ynorm.max((y0[k] / sc).abs());
        fnorm = fnorm.max((f0[k] / sc).abs());
    }
    let mut h = if fnorm > 1e-14 {
        0.01 * (ynorm.max(1.0)) / fnorm
    } else {
        1e-3
    };
    if t_end.is_finite() {
        h = h.min(0.1 * (t_end - t0).abs().max(f64::MIN_POSITIVE));
    }
    h.min(opts.max_step).max(1e-14 * (1.0 + t0.abs()))
}

/// Integrate `y' = rhs(t, y)` from `(t0, y0)` toward `t_end` (which may be
/// `f64::INFINITY` when a stop predicate is supplied). The predicate is
/// evaluated on every accepted step; returning `true` ends the integration
/// with that step included.
pub fn integrate_adaptive<const N: usize>(
    rhs: &mut dyn FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    stop: &mut dyn FnMut(&OdeStep<N>) -> bool,
) -> Result<(OdePath<N>, StopCause)> {
    if !t_end.is_finite() && opts.max_steps == usize::MAX {
        return Err(Error::invalid("open-ended integration needs a step limit"));
    }
    if t_end.is_finite() && t_end <= t0 {
        return Err(Error::invalid(format!(
            "integration span is empty: t0 = {t0}, t_end = {t_end}"
        )));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y)?;
    let mut steps = vec![OdeStep { t, y, dy: k1 }];

    if stop(&steps[0]) {
        return Ok((OdePath { steps }, StopCause::Predicate));
    }

    let mut h = opts
        .initial_step
        .unwrap_or_else(|| initial_step_guess(t0, &y0, &k1, t_end, opts))
        .min(opts.max_step);

    let mut k = [[0.0; N]; 7];
    for _ in 0..opts.max_steps {
        if t_end.is_finite() && t >= t_end {
            return Ok((OdePath { steps }, StopCause::ReachedEnd));
        }
        if t_end.is_finite() {
            h = h.min(t_end - t);
        }
        if h <= 4.0 * f64::EPSILON * t.abs().max(1.0) * 1e-2 {
            return Err(Error::StepSizeUnderflow { t, dt: h });
        }

        k[0] = k1;
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    for idx in 0..N {
                        ys[idx] += h * a * kj[idx];
                    }
                }
            }
            k[stage] = rhs(t + C[stage] * h, &ys)?;
        }

        // Fifth-order solution is the stage-7 argument (FSAL): y + h Σ a7j kj.
        let mut y5 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[6][j];
            if a != 0.0 {
                for idx in 0..N {
                    y5[idx] += h * a * kj[idx];
                }
            }
        }
        let mut err = [0.0; N];
        for (j, kj) in k.iter().enumerate() {
            let d = if j < 6 { A[6][j] - B4[j] } else { -B4[j] };
            if d != 0.0 {
                for idx in 0..N {
                    err[idx] += h * d * kj[idx];
                }
            }
        }
        let enorm = rms_error_norm(&err, &y, &y5, opts);

        if enorm <= 1.0 {
            // k7 was computed as part of the error estimate stage order; the
            // FSAL derivative at the new point is rhs(t+h, y5) = stage 7.
            t += h;
            let dy_new = k[6];
            y = y5;
            k1 = dy_new;
            steps.push(OdeStep { t, y, dy: k1 });
            if stop(steps.last().unwrap()) {
                return Ok((OdePath { steps }, StopCause::Predicate));
            }
            if t_end.is_finite() && t >= t_end {
                return Ok((OdePath { steps }, StopCause::ReachedEnd));
            }
            let factor = if enorm == 0.0 {
                5.0
            } else {
                (0.9 * enorm.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(opts.max_step);
        } else {
            let factor = (0.9 * enorm.powf(-0.2)).clamp(0.1, 0.9);
            h *= factor;
        }
    }

    Err(Error::IterationFailure {
        context: "adaptive integration".into(),
        iterations: opts.max_steps,
        residual: f64::NAN,
    })
}

/// Convenience wrapper: integrate to a finite `t_end` with no stop predicate.
pub fn integrate_to<const N: usize>(
    rhs: &mut dyn FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
) -> Result<OdePath<N>> {
    let (path, _) = integrate_adaptive(rhs, t0, y0, t_end, opts, &mut |_| false)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_growth_to_requested_accuracy() {
        let opts = OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            ..Default::default()
        };
        let mut rhs = |_t: f64, y: &[f64; 1]| Ok([y[0]]);
        let path = integrate_to(&mut rhs, 0.0, [1.0], 2.0, &opts).unwrap();
        assert_relative_eq!(path.last().y[0], (2.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn hyperbolic_system_matches_cosh_sinh() {
        // y'' = y as a first-order system; y(0)=1, y'(0)=0 gives cosh.
        let opts = OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        let mut rhs = |_t: f64, y: &[f64; 2]| Ok([y[1], y[0]]);
        let path = integrate_to(&mut rhs, 0.0, [1.0, 0.0], 3.0, &opts).unwrap();
        assert_relative_eq!(path.last().y[0], (3.0f64).cosh(), max_relative = 1e-10);
        assert_relative_eq!(path.last().y[1], (3.0f64).sinh(), max_relative = 1e-10);
    }

    #[test]
    fn dense_output_tracks_the_solution_between_steps() {
        let opts = OdeOptions {
            rtol: 1e-10,
            atol: 1e-13,
            ..Default::default()
        };
        let mut rhs = |_t: f64, y: &[f64; 2]| Ok([y[1], y[0]]);
        let path = integrate_to(&mut rhs, 0.0, [1.0, 0.0], 3.0, &opts).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=300 {
            let t = 3.0 * i as f64 / 300.0;
            let v = path.eval_component(t, 0);
            worst = worst.max((v - t.cosh()).abs() / t.cosh());
        }
        // Hermite dense output is a touch less accurate than the accepted
        // steps themselves but must stay far below solver-grade tolerances.
        assert!(worst < 1e-8, "dense output error {worst:.3e}");
    }

    #[test]
    fn stop_predicate_halts_the_run() {
        let mut rhs = |_t: f64, y: &[f64; 1]| Ok([y[0]]);
        let opts = OdeOptions::default();
        let (path, cause) = integrate_adaptive(
            &mut rhs,
            0.0,
            [1.0],
            f64::INFINITY,
            &opts,
            &mut |s: &OdeStep<1>| s.y[0] > 10.0,
        )
        .unwrap();
        assert_eq!(cause, StopCause::Predicate);
        assert!(path.last().y[0] > 10.0);
        // One step earlier the predicate did not hold yet.
        assert!(path.steps()[path.steps().len() - 2].y[0] <= 10.0);
    }

    #[test]
    fn tightening_rtol_reduces_the_error() {
        let run = |rtol: f64| {
            let opts = OdeOptions {
                rtol,
                atol: 1e-14,
                ..Default::default()
            };
            let mut rhs = |t: f64, y: &[f64; 1]| Ok([t.cos() * y[0]]);
            let path = integrate_to(&mut rhs, 0.0, [1.0], 6.0, &opts).unwrap();
            (path.last().y[0] - (6.0f64).sin().exp()).abs()
        };
        let coarse = run(1e-6);
        let fine = run(1e-10);
        assert!(
            fine < coarse / 50.0,
            "expected clear accuracy gain: coarse {coarse:.3e}, fine {fine:.3e}"
        );
    }

    #[test]
    fn rhs_errors_propagate() {
        let mut rhs = |t: f64, _y: &[f64; 1]| {
            if t > 0.5 {
                Err(crate::Error::invalid("rhs failure"))
            } else {
                Ok([1.0])
            }
        };
        let res = integrate_to(&mut rhs, 0.0, [0.0], 1.0, &OdeOptions::default());
        assert!(res.is_err());
    }
}
