//! Height dynamics under the quasi-steady reduction, `h'(t) = f(h(t))`.
//!
//! When substrate diffusion is fast compared to film growth (`ε → 0`), the
//! concentration relaxes to the fixed-height profile `u[h]` between height
//! changes and the free boundary follows the scalar law
//!
//! ```text
//! h' = f(h) = h ∫₀¹ g(r̃(u[h](y))) dy,     |f(h)| ≤ M·h,
//! ```
//!
//! with `M = sup |g|` on `[0, r(c*)]`. Each right-hand-side evaluation solves
//! the fixed-height problem ([`crate::bvp::solve_bvp`]), warm-started from
//! the previous profile. Trajectories therefore stay inside the exponential
//! envelope `e^{−Mt} h₀ ≤ h(t) ≤ e^{Mt} h₀` and are monotone (the sign of
//! `f` cannot change along a trajectory without crossing an equilibrium).
//!
//! Equilibria are located as roots of `f` by bracketing and Brent iteration;
//! `f(h) → h·g(r(c*))` as `h → 0+`, so a positive maximal growth response
//! pins the sign of `f` at the left end of the bracket.

use crate::bvp::{growth_rate_with_solution, BvpOptions, BvpSolution};
use crate::error::{Error, Result};
use crate::model::{ModelBundle, Profile};
use crate::numerics::hermite;
use crate::ode::{integrate_adaptive, OdeOptions, OdeStep};
use crate::roots::{brent, expand_bracket, RootOptions};

#[derive(Debug, Clone)]
pub struct QuasiSteadyOptions {
    /// Relative tolerance of the adaptive height integration.
    pub rtol: f64,
    /// Absolute tolerance on `h`.
    pub atol: f64,
    /// Inner fixed-height solver settings (grid size lives here).
    pub bvp: BvpOptions,
    /// Heights at or below this are treated as extinction and stop the run.
    pub h_floor: f64,
    /// Store the quasi-steady profile at every accepted step.
    pub store_profiles: bool,
    /// Stop early once `|f(h)| ≤ value·M·h` (equilibrium proximity).
    pub equilibrium_stop: Option<f64>,
    /// Cap on the adaptive step.
    pub max_step: f64,
}

impl Default for QuasiSteadyOptions {
    fn default() -> Self {
        QuasiSteadyOptions {
            rtol: 1e-8,
            atol: 1e-12,
            bvp: BvpOptions::default(),
            h_floor: 1e-12,
            store_profiles: true,
            equilibrium_stop: None,
            max_step: f64::INFINITY,
        }
    }
}

/// How a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    ReachedEnd,
    /// Height fell to the extinction floor.
    Extinction,
    /// `|f(h)|` fell below the requested equilibrium-proximity threshold.
    EquilibriumProximity,
}

/// Accepted steps of a quasi-steady run: heights, growth rates `f(h)`, and
/// (optionally) the substrate profile at each stored time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub heights: Vec<f64>,
    /// `f(h)` at the stored times (the height velocity).
    pub rates: Vec<f64>,
    pub profiles: Option<Vec<Profile>>,
    /// `M = sup |g|` on the reachable rate range; drives the envelope.
    pub growth_bound: f64,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is non-empty")
    }

    pub fn final_height(&self) -> f64 {
        *self.heights.last().expect("trajectory is non-empty")
    }

    /// Dense height evaluation (cubic Hermite between stored steps).
    pub fn height_at(&self, t: f64) -> f64 {
        let ts = &self.times;
        if self.len() == 1 || t <= ts[0] {
            return self.heights[0];
        }
        if t >= *ts.last().unwrap() {
            return self.final_height();
        }
        let hi = ts.partition_point(|&x| x < t).clamp(1, ts.len() - 1);
        hermite(
            ts[hi - 1],
            self.heights[hi - 1],
            self.rates[hi - 1],
            ts[hi],
            self.heights[hi],
            self.rates[hi],
            t,
        )
    }

    /// Worst normalized margins of the exponential envelope
    /// `e^{−Mt} h₀ ≤ h ≤ e^{Mt} h₀` over the stored steps; both are
    /// non-negative when the envelope holds exactly.
    pub fn envelope_margins(&self) -> (f64, f64) {
        let h0 = self.heights[0];
        let t0 = self.times[0];
        let m = self.growth_bound;
        let mut low = f64::INFINITY;
        let mut high = f64::INFINITY;
        for (t, h) in self.times.iter().zip(&self.heights) {
            let dt = t - t0;
            let lo = h0 * (-m * dt).exp();
            let hi = h0 * (m * dt).exp();
            low = low.min((h - lo) / hi.max(h0));
            high = high.min((hi - h) / hi.max(h0));
        }
        (low, high)
    }

    /// Monotonicity of the stored heights with `slack` absolute tolerance in
    /// the direction set by the initial velocity.
    pub fn is_monotone(&self, slack: f64) -> bool {
        if self.len() < 2 {
            return true;
        }
        let increasing = self.rates[0] >= 0.0;
        self.heights.windows(2).all(|w| {
            if increasing {
                w[1] >= w[0] - slack
            } else {
                w[1] <= w[0] + slack
            }
        })
    }
}

/// Integrate `h' = f(h)` from `h0` to `t_end` (or until extinction or,
/// optionally, equilibrium proximity).
pub fn integrate_quasisteady(
    h0: f64,
    t_end: f64,
    bundle: &ModelBundle,
    opts: &QuasiSteadyOptions,
) -> Result<Trajectory> {
    if !h0.is_finite() || h0 <= 0.0 {
        return Err(Error::invalid(format!(
            "initial height must be positive and finite, got {h0}"
        )));
    }
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(Error::invalid(format!(
            "t_end must be positive and finite, got {t_end}"
        )));
    }
    bundle.params.check()?;

    let growth_bound = bundle.growth_bound();
    let mut warm: Option<Profile> = None;
    let mut bvp_opts = opts.bvp.clone();

    let mut rhs = |_t: f64, y: &[f64; 1]| -> Result<[f64; 1]> {
        let h = y[0];
        if h <= 0.0 {
            // The envelope keeps true trajectories positive; trial stages may
            // poke below on violent steps, where the growth law is moot.
            return Ok([0.0]);
        }
        bvp_opts.warm_start = warm.clone();
        let (f, sol) = growth_rate_with_solution(h, bundle, &bvp_opts)?;
        warm = Some(sol.u);
        Ok([f])
    };

    let floor = opts.h_floor;
    let eq_stop = opts.equilibrium_stop;
    let mut stop_status = TrajectoryStatus::ReachedEnd;
    let mut stop = |s: &OdeStep<1>| {
        if s.y[0] <= floor {
            stop_status = TrajectoryStatus::Extinction;
            return true;
        }
        if let Some(tol) = eq_stop {
            if s.dy[0].abs() <= tol * growth_bound * s.y[0] {
                stop_status = TrajectoryStatus::EquilibriumProximity;
                return true;
            }
        }
        false
    };

    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        max_step: opts.max_step,
        ..Default::default()
    };
    let (path, _) = integrate_adaptive(&mut rhs, 0.0, [h0], t_end, &ode_opts, &mut stop)?;

    let times: Vec<f64> = path.steps().iter().map(|s| s.t).collect();
    let heights: Vec<f64> = path.steps().iter().map(|s| s.y[0]).collect();
    let rates: Vec<f64> = path.steps().iter().map(|s| s.dy[0]).collect();

    let profiles = if opts.store_profiles {
        // Re-solve along the accepted heights (warm-started chain) so stored
        // profiles correspond exactly to stored (t, h) pairs.
        let mut list = Vec::with_capacity(heights.len());
        let mut chain = opts.bvp.clone();
        for &h in &heights {
            if h <= 0.0 {
                // Extinction endpoint: record the saturated profile.
                list.push(Profile::constant(chain.n, bundle.params.c_star)?);
                continue;
            }
            let sol: BvpSolution = crate::bvp::solve_bvp(h, bundle, &chain)?;
            chain.warm_start = Some(sol.u.clone());
            list.push(sol.u);
        }
        Some(list)
    } else {
        None
    };

    Ok(Trajectory {
        times,
        heights,
        rates,
        profiles,
        growth_bound,
        status: stop_status,
    })
}

/// Options for the root search on `f`.
#[derive(Debug, Clone)]
pub struct OdeEquilibriumOptions {
    /// Starting bracket; expanded by doubling/halving when it does not
    /// already straddle a sign change.
    pub bracket: (f64, f64),
    pub h_min: f64,
    pub h_max: f64,
    /// Bracket-width target relative to the root.
    pub x_rtol: f64,
    pub bvp: BvpOptions,
}

impl Default for OdeEquilibriumOptions {
    fn default() -> Self {
        OdeEquilibriumOptions {
            bracket: (0.5, 2.0),
            h_min: 1e-8,
            h_max: 1e3,
            x_rtol: 1e-12,
            bvp: BvpOptions::default(),
        }
    }
}

/// Result of the root search on the growth functional.
#[derive(Debug, Clone)]
pub enum OdeEquilibrium {
    Found {
        h_e: f64,
        /// `f(h_e)` as evaluated by the discrete functional.
        f_residual: f64,
        /// Final bracket width.
        bracket_width: f64,
        /// The profile at the equilibrium height.
        profile: Profile,
    },
    NoEquilibrium { reason: String },
}

/// Locate an equilibrium height as a zero of `f(h)` by bracketing + Brent.
pub fn find_equilibrium_ode(
    bundle: &ModelBundle,
    opts: &OdeEquilibriumOptions,
) -> Result<OdeEquilibrium> {
    bundle.params.check()?;
    let top_growth = bundle.growth.eval(bundle.rate_ceiling());
    if top_growth <= 0.0 {
        return Ok(OdeEquilibrium::NoEquilibrium {
            reason: format!(
                "growth response at full supply is non-positive (g(r(c*)) = {top_growth:.3e}); \
                 f(h) < 0 for every height"
            ),
        });
    }

    let mut warm: Option<Profile> = None;
    let mut bvp_opts = opts.bvp.clone();
    let mut f = |h: f64| -> Result<f64> {
        bvp_opts.warm_start = warm.clone();
        let (fh, sol) = growth_rate_with_solution(h, bundle, &bvp_opts)?;
        warm = Some(sol.u);
        Ok(fh)
    };

    let (lo, hi) = opts.bracket;
    let expanded = expand_bracket(&mut f, lo, hi, opts.h_min, opts.h_max)?;
    let Some((a, b, fa, fb)) = expanded else {
        return Ok(OdeEquilibrium::NoEquilibrium {
            reason: format!(
                "f has no sign change on [{:.3e}, {:.3e}]",
                opts.h_min, opts.h_max
            ),
        });
    };

    let root = brent(
        &mut f,
        a,
        b,
        fa,
        fb,
        &RootOptions {
            xtol_rel: opts.x_rtol,
            xtol_abs: 0.0,
            ftol: 0.0,
            max_iter: 300,
        },
    )?;

    bvp_opts.warm_start = warm.clone();
    let sol = crate::bvp::solve_bvp(root.root, bundle, &bvp_opts)?;
    Ok(OdeEquilibrium::Found {
        h_e: root.root,
        f_residual: root.f_root,
        bracket_width: root.bracket_width,
        profile: sol.u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GrowthModel, PhysicalParams, RateModel};
    use approx::assert_relative_eq;

    fn extinction_bundle() -> ModelBundle {
        // Maintenance threshold above the rate ceiling: growth is negative
        // everywhere and the film must die out.
        ModelBundle::new(
            PhysicalParams::default(),
            RateModel::TanhScaled { rho: 2.0 },
            GrowthModel::Affine { alpha: 1.0, b: 2.0 },
        )
    }

    #[test]
    fn constant_negative_growth_gives_exact_exponential_decay() {
        // Tabulated g ≡ −1 makes f(h) = −h regardless of the rate model.
        let bundle = ModelBundle::new(
            PhysicalParams::default(),
            RateModel::TanhScaled { rho: 2.0 },
            GrowthModel::Tabulated {
                s: vec![0.0, 2.0],
                g: vec![-1.0, -1.0],
            },
        );
        let opts = QuasiSteadyOptions {
            store_profiles: false,
            ..Default::default()
        };
        let traj = integrate_quasisteady(2.0, 3.0, &bundle, &opts).unwrap();
        for (t, h) in traj.times.iter().zip(&traj.heights) {
            assert_relative_eq!(*h, 2.0 * (-t).exp(), max_relative = 1e-7);
        }
        assert_eq!(traj.status, TrajectoryStatus::ReachedEnd);
    }

    #[test]
    fn trajectories_stay_inside_the_exponential_envelope() {
        let bundle = ModelBundle::tanh_reference();
        let opts = QuasiSteadyOptions {
            store_profiles: false,
            ..Default::default()
        };
        for &h0 in &[0.3, 1.0, 3.0] {
            let traj = integrate_quasisteady(h0, 4.0, &bundle, &opts).unwrap();
            let (low, high) = traj.envelope_margins();
            assert!(low >= -1e-7, "h0 = {h0}: lower margin {low:.3e}");
            assert!(high >= -1e-7, "h0 = {h0}: upper margin {high:.3e}");
        }
    }

    #[test]
    fn heights_move_monotonically_toward_the_equilibrium() {
        let bundle = ModelBundle::tanh_reference();
        let opts = QuasiSteadyOptions {
            store_profiles: false,
            ..Default::default()
        };
        let below = integrate_quasisteady(0.4, 6.0, &bundle, &opts).unwrap();
        assert!(below.rates[0] > 0.0);
        assert!(below.is_monotone(1e-10));
        assert!(below.final_height() > 0.4);

        let above = integrate_quasisteady(3.0, 6.0, &bundle, &opts).unwrap();
        assert!(above.rates[0] < 0.0);
        assert!(above.is_monotone(1e-10));
        assert!(above.final_height() < 3.0);
    }

    #[test]
    fn tightening_rtol_refines_the_trajectory() {
        let bundle = ModelBundle::tanh_reference();
        let run = |rtol: f64| {
            let opts = QuasiSteadyOptions {
                rtol,
                store_profiles: false,
                ..Default::default()
            };
            integrate_quasisteady(0.5, 3.0, &bundle, &opts)
                .unwrap()
                .final_height()
        };
        let coarse = run(1e-6);
        let fine = run(1e-10);
        let finest = run(1e-12);
        assert!((fine - finest).abs() <= (coarse - finest).abs() + 1e-12);
        assert!((fine - finest).abs() < 1e-7);
    }

    #[test]
    fn negative_growth_everywhere_drives_extinction() {
        let bundle = extinction_bundle();
        let opts = QuasiSteadyOptions {
            h_floor: 1e-6,
            store_profiles: false,
            ..Default::default()
        };
        let traj = integrate_quasisteady(1.0, 1e3, &bundle, &opts).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::Extinction);
        assert!(traj.final_height() <= 1e-6);
        assert!(traj.is_monotone(1e-12));
    }

    #[test]
    fn equilibrium_proximity_stop_lands_near_the_root() {
        let bundle = ModelBundle::tanh_reference();
        let opts = QuasiSteadyOptions {
            equilibrium_stop: Some(1e-8),
            store_profiles: false,
            ..Default::default()
        };
        let traj = integrate_quasisteady(0.5, 500.0, &bundle, &opts).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::EquilibriumProximity);

        let eq = find_equilibrium_ode(&bundle, &OdeEquilibriumOptions::default()).unwrap();
        let OdeEquilibrium::Found { h_e, .. } = eq else {
            panic!("reference model has an equilibrium");
        };
        assert_relative_eq!(traj.final_height(), h_e, max_relative = 1e-6);
    }

    #[test]
    fn root_search_matches_the_transcendental_oracle_for_linear_rates() {
        // For r(s) = s (κ = κ_L = L = c* = 1, g = s − 1/4) the equilibrium
        // satisfies c₀ cosh h = 1 − h/4 and c₀ sinh h = h/4; eliminating c₀
        // gives φ(h) = (h/4)(coth h + 1) − 1 = 0, solved here by bisection as
        // an independent oracle.
        let mut lo = 1.0;
        let mut hi = 3.0;
        let phi = |h: f64| 0.25 * h * (1.0 / h.tanh() + 1.0) - 1.0;
        assert!(phi(lo) < 0.0 && phi(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);

        let bundle = ModelBundle::new(
            PhysicalParams::default(),
            RateModel::Linear { slope: 1.0 },
            GrowthModel::Affine { alpha: 1.0, b: 0.25 },
        );
        let opts = OdeEquilibriumOptions {
            bvp: BvpOptions::with_n(2048),
            ..Default::default()
        };
        match find_equilibrium_ode(&bundle, &opts).unwrap() {
            OdeEquilibrium::Found { h_e, f_residual, .. } => {
                assert_relative_eq!(h_e, oracle, max_relative = 1e-6);
                assert!(f_residual.abs() <= 1e-10 * bundle.growth_bound() * h_e);
            }
            OdeEquilibrium::NoEquilibrium { reason } => panic!("{reason}"),
        }
    }

    #[test]
    fn no_equilibrium_when_growth_cannot_turn_positive() {
        let eq = find_equilibrium_ode(&extinction_bundle(), &OdeEquilibriumOptions::default())
            .unwrap();
        assert!(matches!(eq, OdeEquilibrium::NoEquilibrium { .. }));
    }

    #[test]
    fn rejects_bad_initial_data() {
        let bundle = ModelBundle::tanh_reference();
        let opts = QuasiSteadyOptions::default();
        assert!(integrate_quasisteady(-1.0, 1.0, &bundle, &opts).is_err());
        assert!(integrate_quasisteady(1.0, 0.0, &bundle, &opts).is_err());
    }
}
