//! Model data: physical parameters, consumption and growth laws, grid
//! profiles, and validation of the structural assumptions the solvers rely
//! on.
//!
//! The film occupies `0 ≤ z ≤ h`; substrate enters through a boundary layer
//! of thickness `L` with diffusivity `κ_L` above a well-mixed bulk at
//! concentration `c*`, diffuses inside the film with diffusivity `κ`, and is
//! consumed at rate `r(c)`. Consumed substrate converts to film volume at
//! rate `g(r(c))` per unit height. The laws must satisfy
//!
//! - `r(0) = 0`, `s·r(s) > 0` for `s ≠ 0`, `r` non-decreasing (strictly
//!   increasing where the shooting machinery is used);
//! - `g` Lipschitz on the reachable range `[0, r(c*)]`; the affine form
//!   `g(s) = α (s − b)` with maintenance threshold `b` is the case with
//!   closed-form equilibrium structure.
//!
//! All solvers consume the truncated rate `r̃` (zero below `0`, frozen at
//! `r(c*)` above `c*`), which is what makes iterates outside the physical
//! band harmless.

use crate::error::{Error, Result};
use crate::numerics::{cumulative_trapezoid, trapezoid};

/// Transport and bulk parameters. All strictly positive; `eps` is the ratio
/// of the substrate diffusion time scale to the growth time scale and only
/// enters the time-dependent solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Substrate diffusivity inside the film.
    pub kappa: f64,
    /// Diffusivity of the boundary layer above the film.
    pub kappa_l: f64,
    /// Boundary-layer thickness.
    pub l: f64,
    /// Bulk substrate concentration.
    pub c_star: f64,
    /// Time-scale separation between diffusion and growth.
    pub eps: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            kappa: 1.0,
            kappa_l: 1.0,
            l: 1.0,
            c_star: 1.0,
            eps: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn new(kappa: f64, kappa_l: f64, l: f64, c_star: f64, eps: f64) -> Result<Self> {
        let p = PhysicalParams {
            kappa,
            kappa_l,
            l,
            c_star,
            eps,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("kappa_l", self.kappa_l),
            ("l", self.l),
            ("c_star", self.c_star),
            ("eps", self.eps),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!(
                    "parameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Coefficient `Lκ/κ_L` of the flux term in the interface condition
    /// `c + (Lκ/κ_L) c_z = c*`.
    pub fn robin_coefficient(&self) -> f64 {
        self.l * self.kappa / self.kappa_l
    }
}

/// Substrate consumption rate `r(c)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateModel {
    /// `r(s) = ρ tanh(s)`: saturating, strictly increasing.
    TanhScaled { rho: f64 },
    /// Monod kinetics `r(s) = r_max s / (K + s)`.
    Monod { r_max: f64, half_saturation: f64 },
    /// `r(s) = λ s`.
    Linear { slope: f64 },
    /// Piecewise-linear interpolation of user samples (constant outside the
    /// table). Derivatives come from segment slopes and are lower accuracy
    /// than the analytic kinds.
    Tabulated { s: Vec<f64>, r: Vec<f64> },
}

impl RateModel {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            RateModel::TanhScaled { rho } => rho * s.tanh(),
            RateModel::Monod {
                r_max,
                half_saturation,
            } => r_max * s / (half_saturation + s),
            RateModel::Linear { slope } => slope * s,
            RateModel::Tabulated { s: xs, r: ys } => interp_clamped(xs, ys, s),
        }
    }

    /// `r'(s)`. For tabulated rates this is the containing segment's slope
    /// (adjacent slopes averaged exactly at interior knots).
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            RateModel::TanhScaled { rho } => {
                let t = s.tanh();
                rho * (1.0 - t * t)
            }
            RateModel::Monod {
                r_max,
                half_saturation,
            } => {
                let d = half_saturation + s;
                r_max * half_saturation / (d * d)
            }
            RateModel::Linear { slope } => *slope,
            RateModel::Tabulated { s: xs, r: ys } => slope_clamped(xs, ys, s),
        }
    }

    /// The truncated rate `r̃`: zero below the physical band, frozen at
    /// `r(c*)` above it. Every solver consumes this form, which keeps
    /// iterates and states outside `[0, c*]` from injecting unphysical
    /// consumption.
    pub fn truncated(&self, s: f64, c_star: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= c_star {
            self.eval(c_star)
        } else {
            self.eval(s)
        }
    }

    /// Derivative of `r̃`: zero outside `(0, c*)`, with the interior one-sided
    /// values used exactly at the band edges (so Newton linearizations keep
    /// their stabilizing term on the closed band).
    pub fn truncated_derivative(&self, s: f64, c_star: f64) -> f64 {
        if s < 0.0 || s > c_star {
            0.0
        } else {
            self.derivative(s)
        }
    }

    /// Whether segment-slope derivatives (tabulated kind) are in use.
    pub fn derivative_is_low_accuracy(&self) -> bool {
        matches!(self, RateModel::Tabulated { .. })
    }

    /// Minimum of `r'` on `[lo, hi]` by dense sampling plus endpoints.
    pub fn min_derivative_on(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let m = samples.max(2);
        let mut min = f64::INFINITY;
        for i in 0..=m {
            let s = lo + (hi - lo) * i as f64 / m as f64;
            min = min.min(self.derivative(s));
        }
        min
    }

    /// Strict monotonicity on `[0, c_star]`, checked by sampling `r'` at
    /// `samples` points plus the endpoints.
    pub fn strictly_increasing_on(&self, c_star: f64, samples: usize) -> bool {
        self.min_derivative_on(0.0, c_star, samples) > 0.0
    }

    /// Concentration at which consumption reaches `level`, i.e. the root of
    /// `r(s) = level` in `[0, c_star]`. Errors when the level is not crossed
    /// (`r(c_star) ≤ level`).
    pub fn level_crossing(&self, level: f64, c_star: f64) -> Result<f64> {
        if level <= 0.0 {
            return Err(Error::domain(format!(
                "consumption level must be positive, got {level}"
            )));
        }
        let top = self.eval(c_star);
        if top <= level {
            return Err(Error::domain(format!(
                "r(c*) = {top:.6e} does not exceed the level {level:.6e}"
            )));
        }
        let mut f = |s: f64| Ok(self.eval(s) - level);
        let res = crate::roots::brent(
            &mut f,
            0.0,
            c_star,
            -level,
            top - level,
            &crate::roots::RootOptions {
                xtol_rel: 1e-14,
                xtol_abs: 1e-15 * c_star,
                ..Default::default()
            },
        )?;
        Ok(res.root)
    }
}

/// Film growth response `g` to the local consumption rate.
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthModel {
    /// `g(s) = α (s − b)`: growth above the maintenance threshold `b`, decay
    /// below it.
    Affine { alpha: f64, b: f64 },
    /// Piecewise-linear interpolation of user samples (constant outside the
    /// table, which preserves the Lipschitz constant).
    Tabulated { s: Vec<f64>, g: Vec<f64> },
}

impl GrowthModel {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            GrowthModel::Affine { alpha, b } => alpha * (s - b),
            GrowthModel::Tabulated { s: xs, g: ys } => interp_clamped(xs, ys, s),
        }
    }

    /// `(α, b)` when the law is affine; the shooting machinery requires this.
    pub fn affine_params(&self) -> Option<(f64, f64)> {
        match self {
            GrowthModel::Affine { alpha, b } => Some((*alpha, *b)),
            GrowthModel::Tabulated { .. } => None,
        }
    }

    /// Lipschitz constant on the whole law (slope of the affine form, largest
    /// segment slope of a table).
    pub fn lipschitz(&self) -> f64 {
        match self {
            GrowthModel::Affine { alpha, .. } => alpha.abs(),
            GrowthModel::Tabulated { s: xs, g: ys } => xs
                .windows(2)
                .zip(ys.windows(2))
                .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    /// `sup |g|` on `[lo, hi]`. Piecewise-linear/affine laws attain it at a
    /// knot or an endpoint, so this is exact.
    pub fn sup_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let mut sup = self.eval(lo).abs().max(self.eval(hi).abs());
        if let GrowthModel::Tabulated { s: xs, .. } = self {
            for &x in xs {
                if x > lo && x < hi {
                    sup = sup.max(self.eval(x).abs());
                }
            }
        }
        sup
    }
}

/// Values on the uniform unit grid `y_i = i/n`, `i = 0..=n`. The grid is the
/// shared discrete domain of every solver: concentrations `u`, deficits
/// `v = c* − u`, and correction vectors all live here.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    values: Vec<f64>,
}

/// Coarsest grid any solver accepts.
pub const MIN_CELLS: usize = 8;

impl Profile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_CELLS + 1 {
            return Err(Error::invalid(format!(
                "profile needs at least {} nodes, got {}",
                MIN_CELLS + 1,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("profile contains {bad}")));
        }
        Ok(Profile { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dy = 1.0 / n as f64;
        Profile::new((0..=n).map(|i| f(i as f64 * dy)).collect())
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Profile::new(vec![value; n + 1])
    }

    /// Number of cells (nodes − 1).
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dy(&self) -> f64 {
        1.0 / self.n() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n() as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Second-order first derivative: centered in the interior, one-sided
    /// three-point stencils at the ends.
    pub fn first_difference(&self, i: usize) -> f64 {
        let v = &self.values;
        let n = self.n();
        let dy = self.dy();
        if i == 0 {
            (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dy)
        } else if i == n {
            (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * dy)
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * dy)
        }
    }

    /// Second-order second derivative: centered in the interior, one-sided
    /// four-point stencils at the ends.
    pub fn second_difference(&self, i: usize) -> f64 {
        let v = &self.values;
        let n = self.n();
        let dy2 = self.dy() * self.dy();
        if i == 0 {
            (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / dy2
        } else if i == n {
            (2.0 * v[n] - 5.0 * v[n - 1] + 4.0 * v[n - 2] - v[n - 3]) / dy2
        } else {
            (v[i + 1] - 2.0 * v[i] + v[i - 1]) / dy2
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Linear resampling onto an `m`-cell grid.
    pub fn resample(&self, m: usize) -> Result<Profile> {
        let n = self.n();
        Profile::from_fn(m, |y| {
            let x = y * n as f64;
            let i = (x.floor() as usize).min(n - 1);
            let w = x - i as f64;
            self.values[i] * (1.0 - w) + self.values[i + 1] * w
        })
    }

    /// Max-norm distance to a profile on the same grid.
    pub fn linf_distance(&self, other: &Profile) -> f64 {
        assert_eq!(self.n(), other.n(), "profiles live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `∫₀¹ profile dy` by the composite trapezoid rule.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.dy())
    }

    /// `(∫₀¹ profile² dy)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        trapezoid(&sq, self.dy()).max(0.0).sqrt()
    }

    /// Total variation of the nodal values. Equals `max − min` exactly when
    /// the profile is monotone, which is what the oscillation diagnostics
    /// compare against.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Largest nodal first-difference magnitude (gradient sup-norm proxy).
    pub fn max_abs_gradient(&self) -> f64 {
        (0..=self.n())
            .map(|i| self.first_difference(i).abs())
            .fold(0.0, f64::max)
    }

    /// Running cumulative trapezoid of the nodal values.
    pub fn cumulative(&self) -> Vec<f64> {
        cumulative_trapezoid(&self.values, self.dy())
    }
}

/// Parameters plus laws: the bundle every solver takes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub params: PhysicalParams,
    pub rate: RateModel,
    pub growth: GrowthModel,
}

impl ModelBundle {
    pub fn new(params: PhysicalParams, rate: RateModel, growth: GrowthModel) -> Self {
        ModelBundle {
            params,
            rate,
            growth,
        }
    }

    /// The saturating consumption benchmark used throughout the examples and
    /// checks: `r(s) = 2 tanh(s)`, `g(s) = s − 1/2`, unit transport
    /// parameters and bulk concentration.
    pub fn tanh_reference() -> Self {
        ModelBundle {
            params: PhysicalParams::default(),
            rate: RateModel::TanhScaled { rho: 2.0 },
            growth: GrowthModel::Affine { alpha: 1.0, b: 0.5 },
        }
    }

    /// `r(c*)`: the largest rate reachable on the physical band (also the
    /// value `r̃` is frozen at above the band).
    pub fn rate_ceiling(&self) -> f64 {
        self.rate.eval(self.params.c_star)
    }

    /// `sup |g|` over the reachable rate range `[0, r(c*)]`; `|h'| ≤ M·h`
    /// with this constant, which gives the exponential height envelope.
    pub fn growth_bound(&self) -> f64 {
        self.growth.sup_abs_on(0.0, self.rate_ceiling())
    }

    /// `g(r̃(s))` — the composed growth response to a concentration.
    pub fn growth_of_concentration(&self, s: f64) -> f64 {
        self.growth
            .eval(self.rate.truncated(s, self.params.c_star))
    }

    /// Validate the structural assumptions. Core assumptions (positivity,
    /// `r(0) = 0`, sign condition, monotone rate) must hold for any use;
    /// entries tagged with an operation name are preconditions of that
    /// operation only.
    pub fn validate(&self, samples: usize) -> Result<ValidationReport> {
        validate(self, samples)
    }
}

/// One validated assumption.
#[derive(Debug, Clone)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Operation family that requires this assumption, if it is not core.
    pub required_by: Option<&'static str>,
}

/// Outcome of [`validate`]: per-assumption results plus the derived flags the
/// solvers branch on.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
    pub rate_strictly_increasing: bool,
    pub growth_is_affine: bool,
    pub growth_lipschitz: f64,
}

impl ValidationReport {
    /// All core assumptions hold (ignores operation-specific entries).
    pub fn core_ok(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| c.required_by.is_none())
            .all(|c| c.passed)
    }

    /// Core assumptions plus those required by the named operation family.
    pub fn ok_for(&self, operation: &str) -> bool {
        self.checks
            .iter()
            .filter(|c| c.required_by.is_none() || c.required_by == Some(operation))
            .all(|c| c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "ok " } else { "FAIL" };
            let scope = c.required_by.map(|r| format!(" [{r}]")).unwrap_or_default();
            writeln!(f, "  {status} {}{} — {}", c.name, scope, c.detail)?;
        }
        Ok(())
    }
}

/// Check the model assumptions by dense sampling (`samples` interior points
/// plus endpoints, 1000 is the customary resolution). Non-finite parameters
/// are an error; assumption failures are reported, not raised.
pub fn validate(bundle: &ModelBundle, samples: usize) -> Result<ValidationReport> {
    bundle.params.check()?;
    let c_star = bundle.params.c_star;
    let m = samples.max(2);
    let mut checks = Vec::new();

    let r0 = bundle.rate.eval(0.0);
    let scale = bundle.rate_ceiling().abs().max(1.0);
    checks.push(ValidationCheck {
        name: "consumption vanishes at zero concentration".into(),
        passed: r0.abs() <= 1e-12 * scale,
        detail: format!("r(0) = {r0:.3e}"),
        required_by: None,
    });

    let mut sign_ok = true;
    let mut worst_sign = f64::INFINITY;
    for i in 1..=m {
        let s = c_star * i as f64 / m as f64;
        let v = s * bundle.rate.eval(s);
        worst_sign = worst_sign.min(v);
        if v <= 0.0 {
            sign_ok = false;
        }
    }
    checks.push(ValidationCheck {
        name: "consumption is active on the physical band".into(),
        passed: sign_ok,
        detail: format!("min s·r(s) on (0, c*] = {worst_sign:.3e}"),
        required_by: None,
    });

    let mut min_deriv = f64::INFINITY;
    for i in 0..=m {
        let s = c_star * i as f64 / m as f64;
        min_deriv = min_deriv.min(bundle.rate.derivative(s));
    }
    checks.push(ValidationCheck {
        name: "consumption rate is non-decreasing".into(),
        passed: min_deriv >= -1e-12 * scale,
        detail: format!("min r' on [0, c*] = {min_deriv:.3e} ({} samples)", m + 1),
        required_by: None,
    });
    let strictly_increasing = min_deriv > 0.0;
    checks.push(ValidationCheck {
        name: "consumption rate is strictly increasing".into(),
        passed: strictly_increasing,
        detail: format!("min r' on [0, c*] = {min_deriv:.3e}"),
        required_by: Some("shooting"),
    });

    let lip = bundle.growth.lipschitz();
    checks.push(ValidationCheck {
        name: "growth law has a finite Lipschitz constant".into(),
        passed: lip.is_finite(),
        detail: format!("Lip(g) = {lip:.3e}"),
        required_by: None,
    });

    let growth_is_affine = bundle.growth.affine_params().is_some();
    checks.push(ValidationCheck {
        name: "growth law is affine".into(),
        passed: growth_is_affine,
        detail: match bundle.growth.affine_params() {
            Some((alpha, b)) => format!("g(s) = {alpha}·(s − {b})"),
            None => "tabulated".into(),
        },
        required_by: Some("shooting"),
    });

    let g_top = bundle.growth.eval(bundle.rate_ceiling());
    let g_bottom = bundle.growth.eval(0.0);
    checks.push(ValidationCheck {
        name: "growth changes sign across the reachable range".into(),
        passed: g_bottom < 0.0 && g_top > 0.0,
        detail: format!("g(0) = {g_bottom:.3e}, g(r(c*)) = {g_top:.3e}"),
        required_by: Some("equilibrium"),
    });

    Ok(ValidationReport {
        checks,
        rate_strictly_increasing: strictly_increasing,
        growth_is_affine,
        growth_lipschitz: lip,
    })
}

/// Mean growth response over a deficit profile:
/// `G(v) = ∫₀¹ g(r̃(c* − v(y))) dy` by the composite trapezoid rule.
/// This is the relative height velocity of the transformed system,
/// `h'/h = G(v)`; its magnitude never exceeds [`ModelBundle::growth_bound`].
pub fn growth_integral(v: &Profile, bundle: &ModelBundle) -> Result<f64> {
    // Profile construction already guarantees finiteness; keep the guard so
    // profiles mutated by a stepping scheme are re-checked at the boundary.
    if let Some(bad) = v.values().iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("deficit profile contains {bad}")));
    }
    let c_star = bundle.params.c_star;
    let vals: Vec<f64> = v
        .values()
        .iter()
        .map(|&vi| bundle.growth_of_concentration(c_star - vi))
        .collect();
    Ok(trapezoid(&vals, v.dy()))
}

/// Same mean, taken over a concentration profile `u` directly:
/// `∫₀¹ g(r̃(u(y))) dy`.
pub fn growth_integral_concentration(u: &Profile, bundle: &ModelBundle) -> f64 {
    let vals: Vec<f64> = u
        .values()
        .iter()
        .map(|&ui| bundle.growth_of_concentration(ui))
        .collect();
    trapezoid(&vals, u.dy())
}

fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert!(xs.len() == ys.len() && xs.len() >= 2);
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let hi = xs.partition_point(|&p| p < x).max(1);
    let (x0, x1) = (xs[hi - 1], xs[hi]);
    let w = (x - x0) / (x1 - x0);
    ys[hi - 1] * (1.0 - w) + ys[hi] * w
}

fn slope_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let seg = |i: usize| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    // Exactly at an interior knot, average the adjacent slopes (a centered
    // difference of the interpolant).
    let hi = xs.partition_point(|&p| p < x);
    if hi > 0 && hi < xs.len() && xs[hi] == x && x != xs[xs.len() - 1] && x != xs[0] {
        return 0.5 * (seg(hi - 1) + seg(hi));
    }
    let i = hi.saturating_sub(1).min(xs.len() - 2);
    seg(i)
}
