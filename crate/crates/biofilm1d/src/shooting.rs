//! Equilibria by shooting from the wall, with a monotonicity certificate.
//!
//! A steady state of the moving-boundary problem with affine growth
//! `g(s) = α(s − b)` is a concentration `c(z)` on `[0, h]` with
//!
//! ```text
//! κ c'' = r(c),   c(0) = c₀,  c'(0) = 0,
//! c(h) + (Lκ/κ_L) c'(h) = c*          (interface supply),
//! ∫₀^h r(c) dz = b·h  ⟺  κ c'(h) = b·h   (zero net growth).
//! ```
//!
//! Combining the two interface conditions shows the height is where the
//! *contact function* `A(z, c₀) = c(z) + (Lb/κ_L) z − c*` vanishes, and the
//! remaining scalar equation is the *flux mismatch*
//! `B(z, c₀) = c'(z) − (b/κ) z` evaluated at `h(c₀)`. Shooting therefore
//! reduces the equilibrium problem to a one-dimensional root search in the
//! wall concentration `c₀ ∈ [0, c̲]`, where `c̲` solves `r(c̲) = b`.
//!
//! The integration carries the sensitivity `w = ∂c/∂c₀` alongside
//! (`κ w'' = r̃'(c) w`, `w(0) = 1`, `w'(0) = 0`), which yields
//!
//! ```text
//! h'(c₀)             = −w / (Lb/κ_L + c')           at z = h(c₀),
//! d/dc₀ B(h(c₀), c₀) = M / (Lb/κ_L + c')            at z = h(c₀),
//! M(z, c₀)           = (Lb/κ_L + c') w' − ((r̃(c) − b)/κ) w.
//! ```
//!
//! `M` is non-decreasing in `z` (its derivative is `(Lb/κ_L) r̃'(c) w/κ +
//! (b/κ) w' ≥ 0`) and starts at `(b − r̃(c₀))/κ ≥ 0` on `[0, c̲]`, so a
//! numerical sweep showing `M > 0` at the contact points certifies that the
//! flux mismatch is strictly increasing in `c₀` — i.e. the equilibrium is
//! unique. At `c₀ = 0` the profile is identically zero and the contact
//! height and mismatch are known in closed form:
//! `h(0) = κ_L c*/(L b)` and `B(h(0), 0) = −κ_L c*/(L κ)`.

use crate::bvp::InequalityCheck;
use crate::error::{Error, Result};
use crate::model::{ModelBundle, Profile};
use crate::ode::{integrate_adaptive, OdeOptions, OdePath, OdeStep, StopCause};
use crate::roots::{brent, RootOptions};

#[derive(Debug, Clone)]
pub struct ShootOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            rtol: 1e-12,
            atol: 1e-14,
        }
    }
}

/// A completed shot: the integrated path of `[c, c', w, w']` from the wall
/// until just past the contact point, plus the model constants needed to
/// evaluate the contact function, flux mismatch, and certificate integrand.
#[derive(Debug, Clone)]
pub struct ShootState {
    pub c0: f64,
    path: OdePath<4>,
    bundle: ModelBundle,
    /// Maintenance threshold of the affine growth law.
    pub b: f64,
}

/// Extract the affine threshold, rejecting growth laws the reduction does
/// not apply to.
fn affine_threshold(bundle: &ModelBundle) -> Result<f64> {
    let Some((alpha, b)) = bundle.growth.affine_params() else {
        return Err(Error::domain(
            "shooting requires an affine growth law g(s) = α(s − b)",
        ));
    };
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "affine growth slope must be positive, got {alpha}"
        )));
    }
    if b <= 0.0 || !b.is_finite() {
        return Err(Error::domain(format!(
            "maintenance threshold must be positive, got {b}"
        )));
    }
    Ok(b)
}

/// Integrate the wall-value problem from `c(0) = c0` until the contact
/// function first becomes positive.
pub fn shoot(c0: f64, bundle: &ModelBundle, opts: &ShootOptions) -> Result<ShootState> {
    bundle.params.check()?;
    let b = affine_threshold(bundle)?;
    let p = &bundle.params;
    let c_star = p.c_star;
    if !c0.is_finite() || c0 < 0.0 || c0 >= c_star {
        return Err(Error::invalid(format!(
            "wall concentration must lie in [0, c*), got {c0}"
        )));
    }

    let kappa = p.kappa;
    let slope = p.l * b / p.kappa_l; // dA/dz contribution of the supply term
    let rate = bundle.rate.clone();
    let mut rhs = |_z: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let c = y[0];
        Ok([
            y[1],
            rate.truncated(c, c_star) / kappa,
            y[3],
            rate.truncated_derivative(c, c_star) * y[2] / kappa,
        ])
    };

    // The contact height never exceeds κ_L c*/(L b) because c is
    // non-decreasing; pad the horizon so the stop predicate always fires.
    let h_cap = p.kappa_l * c_star / (p.l * b);
    let mut stop = |s: &OdeStep<4>| s.y[0] + slope * s.t - c_star > 0.0;
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        initial_step: Some(h_cap / 128.0),
        ..Default::default()
    };
    let (path, cause) = integrate_adaptive(&mut rhs, 0.0, [c0, 0.0, 1.0, 0.0], 1.5 * h_cap,
        &ode_opts, &mut stop)?;
    if cause != StopCause::Predicate {
        return Err(Error::domain(format!(
            "contact function failed to change sign before z = {:.3e}",
            1.5 * h_cap
        )));
    }
    Ok(ShootState {
        c0,
        path,
        bundle: bundle.clone(),
        b,
    })
}

impl ShootState {
    pub fn steps(&self) -> &[OdeStep<4>] {
        self.path.steps()
    }

    pub fn z_max(&self) -> f64 {
        self.path.t_end()
    }

    /// Dense evaluation of `[c, c', w, w']`.
    pub fn eval(&self, z: f64) -> [f64; 4] {
        self.path.eval(z)
    }

    /// Contact function `A(z) = c(z) + (Lb/κ_L) z − c*`.
    pub fn a_value(&self, z: f64) -> f64 {
        let p = &self.bundle.params;
        self.path.eval_component(z, 0) + p.l * self.b / p.kappa_l * z - p.c_star
    }

    /// Flux mismatch `B(z) = c'(z) − (b/κ) z`.
    pub fn b_value(&self, z: f64) -> f64 {
        let p = &self.bundle.params;
        self.path.eval_component(z, 1) - self.b / p.kappa * z
    }

    /// Certificate integrand `M(z) = (Lb/κ_L + c') w' − ((r̃(c) − b)/κ) w`.
    pub fn m_value(&self, z: f64) -> f64 {
        let p = &self.bundle.params;
        let y = self.path.eval(z);
        let rt = self.bundle.rate.truncated(y[0], p.c_star);
        (p.l * self.b / p.kappa_l + y[1]) * y[3] - (rt - self.b) / p.kappa * y[2]
    }

    /// The contact height `h(c₀)`: first zero of the contact function,
    /// resolved to `|A| ≤ 10⁻¹²·c*` on the dense output.
    pub fn contact_height(&self) -> Result<f64> {
        let steps = self.path.steps();
        let k = steps
            .iter()
            .position(|s| {
                let p = &self.bundle.params;
                s.y[0] + p.l * self.b / p.kappa_l * s.t - p.c_star > 0.0
            })
            .ok_or_else(|| Error::domain("contact function never becomes positive"))?;
        if k == 0 {
            return Err(Error::domain("contact function positive at the wall"));
        }
        let (za, zb) = (steps[k - 1].t, steps[k].t);
        let (fa, fb) = (self.a_value(za), self.a_value(zb));
        let c_star = self.bundle.params.c_star;
        let mut f = |z: f64| -> Result<f64> { Ok(self.a_value(z)) };
        let root = brent(
            &mut f,
            za,
            zb,
            fa,
            fb,
            &RootOptions {
                ftol: 1e-13 * c_star,
                xtol_rel: 1e-15,
                xtol_abs: 0.0,
                max_iter: 200,
            },
        )?;
        Ok(root.root)
    }
}

/// Contact height for a wall value (shoot + root on the contact function).
pub fn contact_height(c0: f64, bundle: &ModelBundle, opts: &ShootOptions) -> Result<f64> {
    shoot(c0, bundle, opts)?.contact_height()
}

/// Flux mismatch at the contact height, `B(h(c₀), c₀)`. Equilibria are its
/// zeros in `c₀`.
pub fn equilibrium_residual(c0: f64, bundle: &ModelBundle, opts: &ShootOptions) -> Result<f64> {
    let state = shoot(c0, bundle, opts)?;
    let h = state.contact_height()?;
    Ok(state.b_value(h))
}

/// The subsistence concentration `c̲` solving `r(c̲) = b`: wall values above
/// it make the mismatch integrand positive at the wall.
pub fn subsistence_concentration(bundle: &ModelBundle) -> Result<f64> {
    let b = affine_threshold(bundle)?;
    bundle.rate.level_crossing(b, bundle.params.c_star)
}

/// Numerical certificate that the flux mismatch `B(h(c₀), c₀)` is strictly
/// increasing on `[0, c̲]`, which makes the equilibrium unique.
#[derive(Debug, Clone)]
pub struct MonotonicityCertificate {
    pub c0_grid: Vec<f64>,
    pub contact_heights: Vec<f64>,
    /// `B(h(c₀), c₀)` along the grid.
    pub residuals: Vec<f64>,
    pub checks: Vec<InequalityCheck>,
    pub slack: f64,
    pub ok: bool,
}

impl std::fmt::Display for MonotonicityCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "monotonicity certificate over {} wall values (slack {:.2e}):",
            self.c0_grid.len(),
            self.slack
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  {} {:<46} margin {:+.3e}",
                if c.ok { "ok  " } else { "FAIL" },
                c.name,
                c.margin
            )?;
        }
        Ok(())
    }
}

/// Sweep `c₀` over an even grid on `[0, c̲]` and check every inequality the
/// uniqueness argument rests on. Margins are normalized by natural scales;
/// the slack absorbs integration and rounding error.
pub fn monotonicity_certificate(
    bundle: &ModelBundle,
    points: usize,
    opts: &ShootOptions,
) -> Result<MonotonicityCertificate> {
    if points < 2 {
        return Err(Error::invalid("certificate needs at least two wall values"));
    }
    let b = affine_threshold(bundle)?;
    if !bundle.rate.strictly_increasing_on(bundle.params.c_star, 1024) {
        return Err(Error::domain(
            "certificate requires a strictly increasing rate law",
        ));
    }
    let c_lower = subsistence_concentration(bundle)?;
    let p = bundle.params.clone();

    // Natural scales for the normalized margins.
    let b_scale = p.kappa_l * p.c_star / (p.l * p.kappa);
    let m_scale = b / p.kappa;
    let slack = 1e-11;

    let mut c0_grid = Vec::with_capacity(points);
    let mut heights = Vec::with_capacity(points);
    let mut residuals = Vec::with_capacity(points);

    let mut min_m_contact = f64::INFINITY; // M(h(c0), c0), normalized
    let mut min_m_interior = f64::INFINITY; // M at accepted nodes z > 0
    let mut min_m_slope = f64::INFINITY; // consecutive M differences along z
    let mut min_w = f64::INFINITY; // w − 1 at accepted nodes
    let mut min_wz = f64::INFINITY; // w'
    let mut min_cz = f64::INFINITY; // c'
    let mut max_c_excess = f64::NEG_INFINITY; // c − c* below contact

    for j in 0..points {
        let c0 = c_lower * j as f64 / (points - 1) as f64;
        // Keep the top grid point strictly below c̲ at rounding distance so
        // r̃(c₀) ≤ b holds exactly there too.
        let c0 = c0.min(c_lower);
        let state = shoot(c0, bundle, opts)?;
        let h = state.contact_height()?;
        c0_grid.push(c0);
        heights.push(h);
        residuals.push(state.b_value(h));

        min_m_contact = min_m_contact.min(state.m_value(h) / m_scale);
        let mut prev_m: Option<f64> = None;
        for s in state.steps() {
            if s.t > h {
                break;
            }
            min_w = min_w.min(s.y[2] - 1.0);
            min_wz = min_wz.min(s.y[3]);
            min_cz = min_cz.min(s.y[1]);
            max_c_excess = max_c_excess.max((s.y[0] - p.c_star) / p.c_star);
            let m = state.m_value(s.t) / m_scale;
            if s.t > 0.0 {
                min_m_interior = min_m_interior.min(m);
            }
            if let Some(pm) = prev_m {
                min_m_slope = min_m_slope.min(m - pm);
            }
            prev_m = Some(m);
        }
    }

    // The mismatch must be strictly increasing across the sweep, and the
    // contact height strictly decreasing.
    let mut min_b_spacing = f64::INFINITY;
    let mut min_h_drop = f64::INFINITY;
    for w in residuals.windows(2) {
        min_b_spacing = min_b_spacing.min((w[1] - w[0]) / b_scale);
    }
    for w in heights.windows(2) {
        min_h_drop = min_h_drop.min((w[0] - w[1]) / heights[0]);
    }
    let wall_mismatch =
        (residuals[0] + p.kappa_l * p.c_star / (p.l * p.kappa)).abs() / b_scale;

    let checks = vec![
        InequalityCheck::new("M > 0 at every contact point", min_m_contact, slack),
        InequalityCheck::new("M > 0 at interior nodes", min_m_interior, slack),
        InequalityCheck::new("M non-decreasing along z", min_m_slope, slack),
        InequalityCheck::new("sensitivity w ≥ 1", min_w, slack),
        InequalityCheck::new("sensitivity slope w' ≥ 0", min_wz, slack),
        InequalityCheck::new("concentration non-decreasing (c' ≥ 0)", min_cz, slack),
        InequalityCheck::new("c ≤ c* below the contact point", -max_c_excess, slack),
        InequalityCheck::new("mismatch strictly increasing in c₀", min_b_spacing, slack),
        InequalityCheck::new("contact height strictly decreasing", min_h_drop, slack),
        InequalityCheck::new(
            "wall limit B(h(0), 0) = −κ_L c*/(Lκ)",
            1e-9 - wall_mismatch,
            0.0,
        ),
    ];
    let ok = checks.iter().all(|c| c.ok);
    Ok(MonotonicityCertificate {
        c0_grid,
        contact_heights: heights,
        residuals,
        checks,
        slack,
        ok,
    })
}

#[derive(Debug, Clone)]
pub struct ShootingEquilibriumOptions {
    pub shoot: ShootOptions,
    /// Cells of the returned unit-interval profile.
    pub profile_n: usize,
    /// Wall values in the certificate sweep (0 skips the certificate).
    pub certificate_points: usize,
    /// Mismatch target relative to `κ_L c*/(Lκ)`.
    pub residual_rtol: f64,
}

impl Default for ShootingEquilibriumOptions {
    fn default() -> Self {
        ShootingEquilibriumOptions {
            shoot: ShootOptions::default(),
            profile_n: 256,
            certificate_points: 64,
            residual_rtol: 1e-10,
        }
    }
}

/// An equilibrium located by the shooting reduction.
#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub h_e: f64,
    /// Wall concentration of the equilibrium profile.
    pub c0_e: f64,
    /// Flux mismatch at the root (should be ≤ rtol·κ_L c*/(Lκ)).
    pub flux_residual: f64,
    /// The equilibrium concentration resampled onto the unit grid
    /// `u(y) = c(y·h_e)`.
    pub profile: Profile,
    pub certificate: Option<MonotonicityCertificate>,
    /// True when the certificate ran and every inequality held.
    pub unique: bool,
}

#[derive(Debug, Clone)]
pub enum ShootingOutcome {
    Found(Box<EquilibriumResult>),
    NoEquilibrium { reason: String },
}

/// Locate the equilibrium by a Brent search on the flux mismatch over
/// `c₀ ∈ [0, c̲]`, then certify uniqueness by the monotonicity sweep.
pub fn find_equilibrium_shooting(
    bundle: &ModelBundle,
    opts: &ShootingEquilibriumOptions,
) -> Result<ShootingOutcome> {
    bundle.params.check()?;
    let b = affine_threshold(bundle)?;
    if !bundle.rate.strictly_increasing_on(bundle.params.c_star, 1024) {
        return Err(Error::domain(
            "equilibrium search requires a strictly increasing rate law",
        ));
    }
    let ceiling = bundle.rate_ceiling();
    if ceiling <= b {
        return Ok(ShootingOutcome::NoEquilibrium {
            reason: format!(
                "rate ceiling r(c*) = {ceiling:.6e} does not exceed the maintenance \
                 threshold b = {b:.6e}; growth is non-positive at every height"
            ),
        });
    }
    let c_lower = subsistence_concentration(bundle)?;
    let p = &bundle.params;
    let b_scale = p.kappa_l * p.c_star / (p.l * p.kappa);

    let mut phi = |c0: f64| -> Result<f64> {
        // Keep the evaluation inside the admissible interval against Brent's
        // rounding at the endpoints.
        equilibrium_residual(c0.clamp(0.0, c_lower), bundle, &opts.shoot)
    };
    let f_lo = phi(0.0)?;
    let f_hi = phi(c_lower)?;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Ok(ShootingOutcome::NoEquilibrium {
            reason: format!(
                "flux mismatch does not change sign on [0, c̲]: B(0) = {f_lo:.3e}, \
                 B(c̲) = {f_hi:.3e}"
            ),
        });
    }
    let root = brent(
        &mut phi,
        0.0,
        c_lower,
        f_lo,
        f_hi,
        &RootOptions {
            ftol: 0.1 * opts.residual_rtol * b_scale,
            xtol_rel: 1e-13,
            xtol_abs: 1e-13 * c_lower,
            max_iter: 200,
        },
    )?;
    let c0_e = root.root;

    let state = shoot(c0_e, bundle, &opts.shoot)?;
    let h_e = state.contact_height()?;
    let flux_residual = state.b_value(h_e);
    if flux_residual.abs() > opts.residual_rtol * b_scale {
        return Err(Error::IterationFailure {
            context: "flux-mismatch root polish".into(),
            iterations: root.iterations,
            residual: flux_residual.abs(),
        });
    }

    let values: Vec<f64> = (0..=opts.profile_n)
        .map(|i| {
            let y = i as f64 / opts.profile_n as f64;
            state.path.eval_component(y * h_e, 0)
        })
        .collect();
    let profile = Profile::new(values)?;

    let certificate = if opts.certificate_points > 0 {
        Some(monotonicity_certificate(
            bundle,
            opts.certificate_points,
            &opts.shoot,
        )?)
    } else {
        None
    };
    let unique = certificate.as_ref().map(|c| c.ok).unwrap_or(false);

    Ok(ShootingOutcome::Found(Box::new(EquilibriumResult {
        h_e,
        c0_e,
        flux_residual,
        profile,
        certificate,
        unique,
    })))
}
