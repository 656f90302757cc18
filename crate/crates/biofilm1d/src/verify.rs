//! Regime verification: quantitative checks of the solvers against closed
//! forms, independent reductions, and the qualitative structure the model
//! guarantees (monotone relaxation, extinction, persistence barriers,
//! oscillatory approach to equilibrium).
//!
//! Each check produces a [`CheckReport`]: a list of measured quantities with
//! their targets, tolerances, and the provenance of the target —
//! [`TargetOrigin::Exact`] for identities that hold to rounding or
//! integrator tolerance, [`TargetOrigin::Analytic`] for closed forms and
//! independently derived limits, and [`TargetOrigin::Qualitative`] for
//! structural assertions (signs, monotonicity, counts).

use crate::bvp::{solve_bvp, BvpOptions, BvpSolution};
use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolveOptions, TimeScheme};
use crate::model::{GrowthModel, ModelBundle, PhysicalParams, Profile, RateModel};
use crate::quasisteady::{integrate_quasisteady, QuasiSteadyOptions, TrajectoryStatus};
use crate::shooting::{find_equilibrium_shooting, ShootingEquilibriumOptions, ShootingOutcome};

/// Where a check target comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetOrigin {
    /// Holds to rounding / integrator tolerance (discrete identities,
    /// constant-coefficient closed forms).
    Exact,
    /// A derived limit or independent reduction (asymptotics, comparison
    /// envelopes, the shooting value of the equilibrium height).
    Analytic,
    /// Structure rather than value: signs, monotonicity, event counts.
    Qualitative,
}

impl TargetOrigin {
    pub fn label(self) -> &'static str {
        match self {
            TargetOrigin::Exact => "exact",
            TargetOrigin::Analytic => "analytic",
            TargetOrigin::Qualitative => "qualitative",
        }
    }
}

/// How `measured` is compared against `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Relative,
    Absolute,
    AtMost,
    AtLeast,
}

impl Comparison {
    pub fn label(self) -> &'static str {
        match self {
            Comparison::Relative => "rel",
            Comparison::Absolute => "abs",
            Comparison::AtMost => "max",
            Comparison::AtLeast => "min",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckedQuantity {
    pub name: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub origin: TargetOrigin,
    pub pass: bool,
}

impl CheckedQuantity {
    pub fn relative(
        name: impl Into<String>,
        measured: f64,
        target: f64,
        tolerance: f64,
        origin: TargetOrigin,
    ) -> Self {
        let pass = measured.is_finite()
            && (measured - target).abs() <= tolerance * target.abs().max(f64::MIN_POSITIVE);
        CheckedQuantity {
            name: name.into(),
            measured,
            target,
            tolerance,
            comparison: Comparison::Relative,
            origin,
            pass,
        }
    }

    pub fn absolute(
        name: impl Into<String>,
        measured: f64,
        target: f64,
        tolerance: f64,
        origin: TargetOrigin,
    ) -> Self {
        let pass = measured.is_finite() && (measured - target).abs() <= tolerance;
        CheckedQuantity {
            name: name.into(),
            measured,
            target,
            tolerance,
            comparison: Comparison::Absolute,
            origin,
            pass,
        }
    }

    pub fn at_most(
        name: impl Into<String>,
        measured: f64,
        target: f64,
        origin: TargetOrigin,
    ) -> Self {
        let pass = measured.is_finite() && measured <= target;
        CheckedQuantity {
            name: name.into(),
            measured,
            target,
            tolerance: 0.0,
            comparison: Comparison::AtMost,
            origin,
            pass,
        }
    }

    pub fn at_least(
        name: impl Into<String>,
        measured: f64,
        target: f64,
        origin: TargetOrigin,
    ) -> Self {
        let pass = measured.is_finite() && measured >= target;
        CheckedQuantity {
            name: name.into(),
            measured,
            target,
            tolerance: 0.0,
            comparison: Comparison::AtLeast,
            origin,
            pass,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub parameters: String,
    pub quantities: Vec<CheckedQuantity>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl CheckReport {
    fn new(name: &'static str, parameters: impl Into<String>) -> Self {
        CheckReport {
            name,
            parameters: parameters.into(),
            quantities: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    fn add(&mut self, q: CheckedQuantity) {
        self.pass &= q.pass;
        self.quantities.push(q);
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "check {}: {}",
            self.name,
            if self.pass { "PASS" } else { "FAIL" }
        )?;
        writeln!(f, "  params: {}", self.parameters)?;
        for q in &self.quantities {
            writeln!(
                f,
                "  {} [{:<11}] {:<58} measured {:>13.6e}  target {:>13.6e}  {} tol {:.1e}",
                if q.pass { "ok  " } else { "FAIL" },
                q.origin.label(),
                q.name,
                q.measured,
                q.target,
                q.comparison.label(),
                q.tolerance,
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Names accepted by the check selector, in execution order.
pub const CHECK_NAMES: [&str; 5] = [
    "small-h",
    "large-h",
    "extinction",
    "equilibrium",
    "oscillation",
];

// ---------------------------------------------------------------------------
// Small heights: the profile saturates and the interface flux balances the
// full-rate consumption of the film.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SmallHOptions {
    /// Descending ladder of heights; the limits are read off the smallest.
    pub heights: Vec<f64>,
    pub n: usize,
}

impl Default for SmallHOptions {
    fn default() -> Self {
        // Geometric ladder 1 → 1e−4.
        let heights = (0..9)
            .map(|k| 10f64.powf(-(k as f64) * 0.5))
            .collect();
        SmallHOptions { heights, n: 256 }
    }
}

pub fn check_small_h_limit(bundle: &ModelBundle, opts: &SmallHOptions) -> Result<CheckReport> {
    if opts.heights.len() < 2 || opts.heights.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid(
            "small-height check needs a strictly descending height ladder",
        ));
    }
    let p = &bundle.params;
    let r_top = bundle.rate_ceiling();
    let mut report = CheckReport::new(
        "small-h",
        format!(
            "n = {}, heights {:.3e} … {:.3e} ({} points)",
            opts.n,
            opts.heights[0],
            opts.heights.last().unwrap(),
            opts.heights.len()
        ),
    );

    let mut bvp_opts = BvpOptions::with_n(opts.n);
    let mut deficits = Vec::new();
    let mut worst_robin: f64 = 0.0;
    let mut last: Option<BvpSolution> = None;
    for &h in &opts.heights {
        let sol = solve_bvp(h, bundle, &bvp_opts)?;
        bvp_opts.warm_start = Some(sol.u.clone());
        deficits.push(p.c_star - sol.u.value(0));

        // Robin condition under the one-sided gradient stencil:
        // (c* − u(1)) = (Lκ/κ_L)·u_y(1)/h, O(n⁻²) under the stencil.
        let deficit_1 = p.c_star - sol.interface_concentration();
        let robin_rhs = p.l * p.kappa / (p.kappa_l * h) * sol.u.first_difference(opts.n);
        worst_robin = worst_robin.max((deficit_1 - robin_rhs).abs() / deficit_1);
        last = Some(sol);
    }
    let last = last.unwrap();
    let h_min = *opts.heights.last().unwrap();

    let min_drop = deficits
        .windows(2)
        .map(|w| (w[0] - w[1]) / w[0])
        .fold(f64::INFINITY, f64::min);
    report.add(CheckedQuantity::at_least(
        "wall deficit shrinks along the descending heights",
        min_drop,
        0.0,
        TargetOrigin::Qualitative,
    ));

    report.add(CheckedQuantity::relative(
        "wall deficit follows (Lh/κ_L + h²/2κ)·r(c*) at the smallest height",
        *deficits.last().unwrap(),
        (p.l * h_min / p.kappa_l + h_min * h_min / (2.0 * p.kappa)) * r_top,
        1e-3,
        TargetOrigin::Analytic,
    ));

    report.add(CheckedQuantity::relative(
        "interface flux u_y(1)/h² approaches r(c*)/κ",
        last.u.first_difference(opts.n) / (h_min * h_min),
        r_top / p.kappa,
        1e-2,
        TargetOrigin::Analytic,
    ));

    report.add(CheckedQuantity::at_most(
        "Robin interface identity under the gradient stencil",
        worst_robin,
        (100.0 / (opts.n * opts.n) as f64).max(1e-3),
        TargetOrigin::Exact,
    ));

    report.note(format!(
        "wall deficit at h = {:.1e}: {:.6e}",
        h_min,
        deficits.last().unwrap()
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Large heights: the bulk starves while the interface data stay bounded, and
// the profile sits below the chord-rate comparison envelope.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LargeHOptions {
    /// Ascending ladder of heights.
    pub heights: Vec<f64>,
    /// Interior cut `y ≤ cut` used for the bulk-starvation quantities.
    pub interior_cut: f64,
    pub n: usize,
}

impl Default for LargeHOptions {
    fn default() -> Self {
        LargeHOptions {
            heights: vec![10.0, 20.0, 40.0, 80.0, 150.0, 300.0],
            interior_cut: 0.9,
            n: 4096,
        }
    }
}

/// `cosh(a)/cosh(b)` for `0 ≤ a ≤ b`, stable for large arguments.
fn cosh_ratio(a: f64, b: f64) -> f64 {
    ((a - b).exp()) * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp())
}

pub fn check_large_h_limit(bundle: &ModelBundle, opts: &LargeHOptions) -> Result<CheckReport> {
    if opts.heights.len() < 2 || opts.heights.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "large-height check needs a strictly ascending height ladder",
        ));
    }
    if !(0.0..1.0).contains(&opts.interior_cut) {
        return Err(Error::invalid("interior cut must lie in (0, 1)"));
    }
    let p = &bundle.params;
    let c_star = p.c_star;
    let mut report = CheckReport::new(
        "large-h",
        format!(
            "n = {}, heights {:?}, interior cut {}",
            opts.n, opts.heights, opts.interior_cut
        ),
    );

    // Chord lower bound r(s) ≥ α s on (0, c*] for the comparison envelope
    // u(y) ≤ u(1)·cosh(μhy)/cosh(μh), μ = √(α/κ).
    let alpha = (1..=2048)
        .map(|k| {
            let s = c_star * k as f64 / 2048.0;
            bundle.rate.eval(s) / s
        })
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let mu = (alpha / p.kappa).sqrt();

    let mut bvp_opts = BvpOptions::with_n(opts.n);
    // Pre-warm the chain from a moderate height so the first ladder solve
    // starts near its basin.
    let mut h_pre = 1.0;
    while h_pre < opts.heights[0] {
        let sol = solve_bvp(h_pre, bundle, &bvp_opts)?;
        bvp_opts.warm_start = Some(sol.u);
        h_pre *= 2.0;
    }

    let cut_index = ((opts.interior_cut * opts.n as f64).floor() as usize).min(opts.n);
    let mut bulk_sups = Vec::new();
    let mut worst_envelope: f64 = 0.0;
    let mut worst_slope_ratio: f64 = 0.0;
    let mut interior_slope_top = 0.0;
    let slope_bound = c_star * p.kappa_l / (p.l * p.kappa);

    for &h in &opts.heights {
        let sol = solve_bvp(h, bundle, &bvp_opts)?;
        bvp_opts.warm_start = Some(sol.u.clone());

        let bulk = sol.u.values()[..=cut_index]
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        bulk_sups.push(bulk);

        let u1 = sol.interface_concentration();
        for i in 0..=opts.n {
            let y = i as f64 / opts.n as f64;
            let envelope = u1 * cosh_ratio(mu * h * y, mu * h);
            worst_envelope = worst_envelope.max((sol.u.value(i) - envelope) / u1);
        }

        // Physical interface gradient u_z(h) = u_y(1)/h stays below the
        // supply bound c*·κ_L/(Lκ) uniformly in h.
        worst_slope_ratio =
            worst_slope_ratio.max(sol.u.first_difference(opts.n) / (h * slope_bound));
        interior_slope_top = sol.u.first_difference(cut_index) / h;
    }

    let min_drop = bulk_sups
        .windows(2)
        .map(|w| (w[0] - w[1]) / c_star)
        .fold(f64::INFINITY, f64::min);
    report.add(CheckedQuantity::at_least(
        "interior concentration decays along the ascending heights",
        min_drop,
        -1e-9,
        TargetOrigin::Qualitative,
    ));

    report.add(CheckedQuantity::at_most(
        "interior concentration starves at the top height",
        *bulk_sups.last().unwrap() / c_star,
        1e-8,
        TargetOrigin::Analytic,
    ));

    report.add(CheckedQuantity::at_most(
        "profiles stay below the chord comparison envelope",
        worst_envelope,
        2e-3,
        TargetOrigin::Analytic,
    ));

    report.add(CheckedQuantity::at_most(
        "interface gradient u_y(1)/h stays below c*·κ_L/(Lκ)",
        worst_slope_ratio,
        1.0 + 5e-3,
        TargetOrigin::Analytic,
    ));

    report.add(CheckedQuantity::at_most(
        "interior gradient vanishes at the top height",
        interior_slope_top / slope_bound,
        1e-8,
        TargetOrigin::Analytic,
    ));

    report.note(format!(
        "chord rate bound α = {alpha:.6e} (μh spans {:.1} … {:.1})",
        mu * opts.heights[0],
        mu * opts.heights.last().unwrap()
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Extinction: when the growth response is negative at every concentration the
// height decays to zero, the profile saturates, and the interface ratios
// approach their closed-form limits.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ExtinctionOptions {
    pub h0: f64,
    /// Quasi-steady run stops at this height.
    pub h_floor: f64,
    pub n: usize,
    /// Horizon for the full-model smoothing run.
    pub t_end_evolution: f64,
    pub evolution_n: usize,
}

impl Default for ExtinctionOptions {
    fn default() -> Self {
        ExtinctionOptions {
            h0: 1.0,
            h_floor: 1e-5,
            n: 256,
            t_end_evolution: 20.0,
            evolution_n: 128,
        }
    }
}

/// A model whose growth response is negative at every concentration (the
/// maintenance threshold sits above the rate ceiling).
pub fn extinction_reference() -> ModelBundle {
    ModelBundle::new(
        PhysicalParams::default(),
        RateModel::TanhScaled { rho: 2.0 },
        GrowthModel::Affine { alpha: 1.0, b: 2.0 },
    )
}

pub fn check_extinction(bundle: &ModelBundle, opts: &ExtinctionOptions) -> Result<CheckReport> {
    let p = &bundle.params;
    let c_star = p.c_star;
    let r_top = bundle.rate_ceiling();

    let max_growth = (0..=512)
        .map(|k| bundle.growth_of_concentration(c_star * k as f64 / 512.0))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_growth >= 0.0 {
        return Err(Error::domain(format!(
            "extinction check needs a growth response that is negative at every \
             concentration (max g = {max_growth:.3e})"
        )));
    }

    let mut report = CheckReport::new(
        "extinction",
        format!(
            "h0 = {}, floor {:.1e}, n = {}, evolution horizon {}",
            opts.h0, opts.h_floor, opts.n, opts.t_end_evolution
        ),
    );
    report.add(CheckedQuantity::at_most(
        "growth response negative at every concentration",
        max_growth,
        0.0,
        TargetOrigin::Qualitative,
    ));

    // Quasi-steady decay to the floor.
    let qs_opts = QuasiSteadyOptions {
        h_floor: opts.h_floor,
        bvp: BvpOptions::with_n(opts.n),
        ..Default::default()
    };
    let traj = integrate_quasisteady(opts.h0, 1e3, bundle, &qs_opts)?;
    report.add(CheckedQuantity::at_least(
        "height reaches the extinction floor",
        if traj.status == TrajectoryStatus::Extinction {
            1.0
        } else {
            0.0
        },
        1.0,
        TargetOrigin::Qualitative,
    ));
    report.add(CheckedQuantity::at_least(
        "height decays monotonically",
        if traj.is_monotone(1e-12 * opts.h0) {
            1.0
        } else {
            0.0
        },
        1.0,
        TargetOrigin::Qualitative,
    ));

    let profiles = traj.profiles.as_ref().expect("profiles stored");
    let u_last = profiles.last().unwrap();
    let h_last = traj.final_height();
    let n = u_last.n();
    report.add(CheckedQuantity::relative(
        "interface deficit ratio (c* − u(1))/h approaches L·r(c*)/κ_L",
        (c_star - u_last.value(n)) / h_last,
        p.l * r_top / p.kappa_l,
        1e-2,
        TargetOrigin::Analytic,
    ));
    report.add(CheckedQuantity::relative(
        "interface flux ratio u_y(1)/h² approaches r(c*)/κ",
        u_last.first_difference(n) / (h_last * h_last),
        r_top / p.kappa,
        1e-2,
        TargetOrigin::Analytic,
    ));

    // Full model: the deficit is smoothed away while the height decays.
    let v0 = Profile::constant(opts.evolution_n, 0.3 * c_star)?;
    let ev = evolve(
        opts.h0,
        &v0,
        bundle,
        &EvolveOptions {
            t_end: opts.t_end_evolution,
            ..Default::default()
        },
    )?;
    report.add(CheckedQuantity::absolute(
        "full-model deficit is smoothed out (L², final state)",
        ev.final_state().v.l2_norm(),
        0.0,
        1e-3,
        TargetOrigin::Analytic,
    ));
    let min_h_drop = ev
        .track_h
        .windows(2)
        .map(|w| (w[0] - w[1]) / opts.h0)
        .fold(f64::INFINITY, f64::min);
    report.add(CheckedQuantity::at_least(
        "full-model height decays monotonically",
        min_h_drop,
        -1e-12,
        TargetOrigin::Qualitative,
    ));

    // Constant shrinkage integrates exactly: g ≡ −1 gives h = h₀e^{−t}.
    let const_bundle = ModelBundle::new(
        p.clone(),
        bundle.rate.clone(),
        GrowthModel::Tabulated {
            s: vec![0.0, 2.0 * r_top.max(1.0)],
            g: vec![-1.0, -1.0],
        },
    );
    let const_traj = integrate_quasisteady(
        2.0,
        3.0,
        &const_bundle,
        &QuasiSteadyOptions {
            store_profiles: false,
            ..Default::default()
        },
    )?;
    let max_dev = const_traj
        .times
        .iter()
        .zip(&const_traj.heights)
        .map(|(t, h)| (h - 2.0 * (-t).exp()).abs() / (2.0 * (-t).exp()))
        .fold(0.0, f64::max);
    report.add(CheckedQuantity::at_most(
        "constant shrinkage integrates to the exact exponential",
        max_dev,
        1e-6,
        TargetOrigin::Exact,
    ));

    report.note(format!(
        "quasi-steady extinction reached h = {h_last:.3e} at t = {:.3}",
        traj.t_end()
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Convergence to equilibrium from both sides, plus the persistence barrier
// that keeps small films growing.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EquilibriumConvergenceOptions {
    /// Start heights as multiples of the equilibrium height.
    pub factors: Vec<f64>,
    pub n: usize,
    pub t_end: f64,
}

impl Default for EquilibriumConvergenceOptions {
    fn default() -> Self {
        EquilibriumConvergenceOptions {
            factors: vec![0.5, 2.0],
            n: 384,
            t_end: 500.0,
        }
    }
}

pub fn check_convergence_to_equilibrium(
    bundle: &ModelBundle,
    opts: &EquilibriumConvergenceOptions,
) -> Result<CheckReport> {
    let p = &bundle.params;
    let shoot_opts = ShootingEquilibriumOptions {
        profile_n: opts.n,
        certificate_points: 0,
        ..Default::default()
    };
    let outcome = find_equilibrium_shooting(bundle, &shoot_opts)?;
    let ShootingOutcome::Found(eq) = outcome else {
        return Err(Error::domain(
            "equilibrium-convergence check needs a model with an equilibrium",
        ));
    };

    let mut report = CheckReport::new(
        "equilibrium",
        format!(
            "h_e = {:.6e} (shooting), factors {:?}, n = {}",
            eq.h_e, opts.factors, opts.n
        ),
    );

    for &factor in &opts.factors {
        let h0 = factor * eq.h_e;
        let traj = integrate_quasisteady(
            h0,
            opts.t_end,
            bundle,
            &QuasiSteadyOptions {
                bvp: BvpOptions::with_n(opts.n),
                equilibrium_stop: Some(1e-8),
                ..Default::default()
            },
        )?;
        let side = if factor < 1.0 { "below" } else { "above" };
        report.add(CheckedQuantity::relative(
            format!("height from {side} (factor {factor}) reaches h_e"),
            traj.final_height(),
            eq.h_e,
            1e-4,
            TargetOrigin::Analytic,
        ));
        report.add(CheckedQuantity::at_least(
            format!("approach from {side} is monotone"),
            if traj.is_monotone(1e-9 * eq.h_e) {
                1.0
            } else {
                0.0
            },
            1.0,
            TargetOrigin::Qualitative,
        ));
        let u_final = traj.profiles.as_ref().unwrap().last().unwrap().clone();
        report.add(CheckedQuantity::at_most(
            format!("profile from {side} reaches the equilibrium profile (sup)"),
            u_final.linf_distance(&eq.profile) / p.c_star,
            1e-4,
            TargetOrigin::Analytic,
        ));
    }

    // Persistence barrier: for h ≤ δ the whole profile stays above the
    // subsistence concentration plus a margin, so f(h) > 0. δ solves
    // (L r(c*)/κ_L) δ + (r(c*)/κ) δ² = (c* − c̲)/2.
    let r_top = bundle.rate_ceiling();
    let c_lower = crate::shooting::subsistence_concentration(bundle)?;
    let gap = 0.5 * (p.c_star - c_lower);
    let a = r_top / p.kappa;
    let b_lin = p.l * r_top / p.kappa_l;
    let delta = (-b_lin + (b_lin * b_lin + 4.0 * a * gap).sqrt()) / (2.0 * a);

    let growth_bound = bundle.growth_bound();
    let mut min_ratio = f64::INFINITY;
    for k in 0..4 {
        let h = delta / (1 << k) as f64;
        let f = crate::bvp::growth_rate_f(h, bundle, &BvpOptions::with_n(opts.n))?;
        min_ratio = min_ratio.min(f / (growth_bound * h));
    }
    report.add(CheckedQuantity::at_least(
        "growth functional positive below the persistence barrier",
        min_ratio,
        1e-9,
        TargetOrigin::Analytic,
    ));
    report.note(format!(
        "persistence barrier δ = {delta:.6e} (subsistence c̲ = {c_lower:.6e})"
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Oscillatory approach: when the deficit relaxes slowly relative to the
// height (small interior diffusivity), the height lags its quasi-steady
// value, overshoots the equilibrium, and rings down through it. The
// linearization of the height equation at the steady state vanishes, so this
// is a genuinely coupled effect with no exponential rate read off from h
// alone.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct OscillationOptions {
    pub h0: f64,
    pub n: usize,
    pub t_end: f64,
    pub scheme: TimeScheme,
    /// Interior diffusivity. The published experiment states r = 2·tanh,
    /// h0 = 3.5, u0 = cos²(2πy), ε = c* = α = 1, b = 0.5 — but not the
    /// diffusivities. At κ = 1 the return to equilibrium is overdamped
    /// (monotone to rounding under both schemes); κ = 0.1 reproduces the
    /// reported damped ringing of the height.
    pub kappa: f64,
    /// Step cap. The ringing decays by ~150× per half-period, so the probe
    /// needs the second-order scheme at a modest step; first-order stepping
    /// damps the signal below rounding.
    pub dt_max: f64,
}

impl Default for OscillationOptions {
    fn default() -> Self {
        OscillationOptions {
            h0: 3.5,
            n: 128,
            t_end: 150.0,
            scheme: TimeScheme::Midpoint,
            kappa: 0.1,
            dt_max: 0.01,
        }
    }
}

pub fn check_oscillatory_convergence(opts: &OscillationOptions) -> Result<CheckReport> {
    let mut bundle = ModelBundle::tanh_reference();
    bundle.params.kappa = opts.kappa;
    bundle.params.check()?;
    let c_star = bundle.params.c_star;
    let mut report = CheckReport::new(
        "oscillation",
        format!(
            "reference model at κ = {}, h0 = {}, n = {}, t_end = {}, v0 = sin²(2πy)",
            opts.kappa, opts.h0, opts.n, opts.t_end
        ),
    );

    let v0 = Profile::from_fn(opts.n, |y| {
        let s = (2.0 * std::f64::consts::PI * y).sin();
        c_star * s * s
    })?;
    let traj = evolve(
        opts.h0,
        &v0,
        &bundle,
        &EvolveOptions {
            t_end: opts.t_end,
            scheme: opts.scheme,
            dt_max: opts.dt_max,
            ..Default::default()
        },
    )?;

    report.add(CheckedQuantity::at_least(
        "deficit bounds and height envelope hold throughout",
        if traj.invariants.ok { 1.0 } else { 0.0 },
        1.0,
        TargetOrigin::Qualitative,
    ));

    // Interface smoothing: the deficit becomes monotone (total variation
    // collapses onto max − min) early in the run.
    let smooth_time = traj
        .states
        .iter()
        .find(|s| {
            let range = s.v.max() - s.v.min();
            s.v.total_variation() <= 1.05 * range + 1e-9 * c_star
        })
        .map(|s| s.t)
        .unwrap_or(f64::INFINITY);
    report.add(CheckedQuantity::at_most(
        "deficit relaxes to a monotone profile",
        smooth_time,
        opts.t_end / 10.0,
        TargetOrigin::Qualitative,
    ));

    // Oscillation: the height crosses its final value at least twice before
    // settling (sign changes outside a small hysteresis band). The ringing
    // decays fast — successive extrema shrink by ~150× — so the band sits
    // well above rounding (~1e-12·h) but below the second extremum
    // (~6e-6·h); a monotone approach registers zero crossings at any band.
    let h_ref = traj.final_height();
    let band = 1e-7 * h_ref;
    let mut crossings = 0usize;
    let mut sign = 0i8;
    for &h in &traj.track_h {
        let s = if h > h_ref + band {
            1i8
        } else if h < h_ref - band {
            -1i8
        } else {
            0i8
        };
        if s != 0 {
            if sign != 0 && s != sign {
                crossings += 1;
            }
            sign = s;
        }
    }
    report.add(CheckedQuantity::at_least(
        "height crosses its final value at least twice",
        crossings as f64,
        2.0,
        TargetOrigin::Qualitative,
    ));

    // The final height agrees with the equilibrium from the shooting
    // reduction (steady states are common to the full and reduced models).
    let ShootingOutcome::Found(eq) = find_equilibrium_shooting(
        &bundle,
        &ShootingEquilibriumOptions {
            profile_n: opts.n,
            certificate_points: 0,
            ..Default::default()
        },
    )?
    else {
        return Err(Error::domain("reference model must have an equilibrium"));
    };
    report.add(CheckedQuantity::relative(
        "final height settles at the equilibrium height",
        h_ref,
        eq.h_e,
        2e-2,
        TargetOrigin::Analytic,
    ));
    let v_eq = eq.profile.map(|u| c_star - u);
    report.add(CheckedQuantity::at_most(
        "final deficit settles at the equilibrium profile (sup)",
        traj.final_state().v.linf_distance(&v_eq) / c_star,
        2e-2,
        TargetOrigin::Analytic,
    ));

    report.note(format!(
        "crossings = {crossings}, smoothing time = {smooth_time:.3}, \
         h(t_end) = {h_ref:.6e}"
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    // The full checks run in the acceptance suite; here each one runs in a
    // trimmed configuration to keep the unit tests quick.

    #[test]
    fn small_h_limit_passes_on_the_reference_model() {
        let bundle = ModelBundle::tanh_reference();
        let opts = SmallHOptions {
            heights: vec![1.0, 0.1, 1e-2, 1e-3, 1e-4],
            n: 192,
        };
        let report = check_small_h_limit(&bundle, &opts).unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn large_h_limit_passes_on_the_reference_model() {
        // The starvation targets need the full ladder: interior values decay
        // like exp(−(1−cut)·μh), so only the tall default configuration can
        // make the 1e-8 claim.
        let bundle = ModelBundle::tanh_reference();
        let report = check_large_h_limit(&bundle, &LargeHOptions::default()).unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn extinction_check_passes_on_the_reference_extinction_model() {
        let bundle = extinction_reference();
        let opts = ExtinctionOptions {
            n: 128,
            evolution_n: 96,
            ..Default::default()
        };
        let report = check_extinction(&bundle, &opts).unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn extinction_check_rejects_models_that_can_grow() {
        let bundle = ModelBundle::tanh_reference();
        assert!(check_extinction(&bundle, &ExtinctionOptions::default()).is_err());
    }

    #[test]
    fn equilibrium_convergence_passes_on_the_reference_model() {
        let bundle = ModelBundle::tanh_reference();
        let opts = EquilibriumConvergenceOptions {
            n: 384,
            ..Default::default()
        };
        let report = check_convergence_to_equilibrium(&bundle, &opts).unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn quantity_comparisons_behave() {
        assert!(CheckedQuantity::relative("q", 1.0005, 1.0, 1e-3, TargetOrigin::Exact).pass);
        assert!(!CheckedQuantity::relative("q", 1.01, 1.0, 1e-3, TargetOrigin::Exact).pass);
        assert!(CheckedQuantity::absolute("q", 0.1, 0.0, 0.2, TargetOrigin::Exact).pass);
        assert!(CheckedQuantity::at_most("q", 0.5, 1.0, TargetOrigin::Qualitative).pass);
        assert!(!CheckedQuantity::at_least("q", 0.5, 1.0, TargetOrigin::Qualitative).pass);
        assert!(!CheckedQuantity::relative("q", f64::NAN, 1.0, 1.0, TargetOrigin::Exact).pass);
    }
}
