//! Quasi-steady substrate profile at fixed film height, and the growth
//! functional built on it.
//!
//! With the film frozen at height `h` and lengths rescaled to `y = z/h`, the
//! substrate profile `u(y)` solves
//!
//! ```text
//! (κ/h²) u_yy = r(u)          0 < y < 1
//! u_y(0) = 0
//! u(1) + (Lκ/(κ_L h)) u_y(1) = c*
//! ```
//!
//! Integrating twice and eliminating the boundary terms turns this into a
//! fixed-point equation in `u` alone:
//!
//! ```text
//! u(y) = c* − (Lh/κ_L) ∫₀¹ r̃(u) dη − (h²/κ) ∫_y¹ ∫₀^η r̃(u) dρ dη
//! ```
//!
//! with the truncated rate `r̃` making the map well defined for iterates that
//! stray outside `[0, c*]`. The discrete version replaces the integrals by
//! (nested) cumulative trapezoid sums on the uniform grid; the solution is
//! declared converged when the max-norm defect of this equation is at or
//! below `tol_fp`.
//!
//! Solution strategy: damped Picard iteration, which contracts for small and
//! moderate `h` (contraction constant scales like `h·Lip(r)`), with an
//! automatic Newton fallback when Picard stalls. The Newton correction solves
//! the linearization `(1 + K)δ = defect`, where `K` is the integral operator
//! with kernel `r̃'(u)`; rather than assembling `K` densely, the correction
//! is obtained from the equivalent differential form — `e := δ − defect`
//! satisfies
//!
//! ```text
//! e_yy − (h²/κ) r̃'(u) e = (h²/κ) r̃'(u) · defect,
//! e_y(0) = 0,    e(1) + (Lκ/(κ_L h)) e_y(1) = 0
//! ```
//!
//! — a tridiagonal system, so a Newton step costs O(n) like a Picard sweep.
//!
//! The growth functional is `f(h) = h ∫₀¹ g(r̃(u[h])) dy`; heights with
//! `f(h) = 0` are the equilibria of the quasi-steady dynamics.

use crate::error::{Error, Result};
use crate::model::{growth_integral_concentration, ModelBundle, Profile};
use crate::numerics::{cumulative_trapezoid, solve_tridiagonal};

/// Solver strategy. `Auto` is damped Picard with Newton fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Auto,
    PicardOnly,
    NewtonOnly,
}

/// Which iteration actually produced the converged profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationMethod {
    Picard,
    Newton,
}

#[derive(Debug, Clone)]
pub struct BvpOptions {
    /// Cells of the uniform grid.
    pub n: usize,
    /// Max-norm fixed-point defect accepted as converged.
    pub tol_fp: f64,
    /// Picard sweep budget before giving up (or falling back).
    pub max_picard: usize,
    /// Newton iteration budget.
    pub max_newton: usize,
    /// Initial Picard damping factor θ ∈ (0, 1]; halved automatically
    /// whenever the residual grows.
    pub damping: f64,
    /// Picard is considered stalled when this many iterations pass without a
    /// `stall_factor` residual drop.
    pub stall_window: usize,
    pub stall_factor: f64,
    pub method: SolveMethod,
    /// Starting iterate (resampled if its grid differs); `u ≡ c*` otherwise.
    pub warm_start: Option<Profile>,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions {
            n: 256,
            tol_fp: 1e-12,
            max_picard: 200,
            max_newton: 60,
            damping: 1.0,
            stall_window: 50,
            stall_factor: 10.0,
            method: SolveMethod::Auto,
            warm_start: None,
        }
    }
}

impl BvpOptions {
    pub fn with_n(n: usize) -> Self {
        BvpOptions {
            n,
            ..Default::default()
        }
    }
}

/// Converged quasi-steady profile at height `h`.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub h: f64,
    pub u: Profile,
    /// Final max-norm fixed-point defect.
    pub residual: f64,
    /// Total iterations spent (Picard sweeps plus Newton steps).
    pub iterations: usize,
    pub method: IterationMethod,
}

/// One sweep of the discrete fixed-point map `F`.
fn apply_map(u: &[f64], h: f64, bundle: &ModelBundle, out: &mut Vec<f64>) {
    let p = &bundle.params;
    let n = u.len() - 1;
    let dy = 1.0 / n as f64;
    let rates: Vec<f64> = u
        .iter()
        .map(|&ui| bundle.rate.truncated(ui, p.c_star))
        .collect();
    let s = cumulative_trapezoid(&rates, dy);
    let q = cumulative_trapezoid(&s, dy);
    let total_rate = s[n];
    let q_total = q[n];
    let layer = p.l * h / p.kappa_l;
    let body = h * h / p.kappa;
    out.clear();
    out.extend(
        q.iter()
            .map(|&qi| p.c_star - layer * total_rate - body * (q_total - qi)),
    );
}

/// The discrete fixed-point image `F(u)` of a trial profile.
pub fn fixed_point_map(u: &Profile, h: f64, bundle: &ModelBundle) -> Profile {
    let mut out = Vec::new();
    apply_map(u.values(), h, bundle, &mut out);
    Profile::new(out).expect("map preserves grid size and finiteness")
}

/// Max-norm defect `‖F(u) − u‖∞` of a trial profile. Zero (to tolerance)
/// exactly on the quasi-steady solution; this is the acceptance measure for
/// profiles produced by other routes (shooting, evolution steady states).
pub fn fixed_point_defect(u: &Profile, h: f64, bundle: &ModelBundle) -> f64 {
    let mut img = Vec::new();
    apply_map(u.values(), h, bundle, &mut img);
    u.values()
        .iter()
        .zip(&img)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Newton correction: solve the linearized equation for `e = δ − ψ` in
/// differential (tridiagonal) form and return `δ = e + ψ`, where `ψ` is the
/// current defect.
fn newton_correction(u: &[f64], psi: &[f64], h: f64, bundle: &ModelBundle) -> Vec<f64> {
    let p = &bundle.params;
    let n = u.len() - 1;
    let dy = 1.0 / n as f64;
    let dy2 = dy * dy;
    let body = h * h / p.kappa;
    let gamma = p.l * p.kappa / (p.kappa_l * h);

    let w: Vec<f64> = u
        .iter()
        .map(|&ui| body * bundle.rate.truncated_derivative(ui, p.c_star))
        .collect();

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n + 1];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n + 1];

    // Row 0 (no-flux): ghost node elimination gives e_yy(0) = 2(e₁ − e₀)/Δy².
    diag[0] = -2.0 / dy2 - w[0];
    upper[0] = 2.0 / dy2;
    rhs[0] = w[0] * psi[0];
    for i in 1..n {
        lower[i - 1] = 1.0 / dy2;
        diag[i] = -2.0 / dy2 - w[i];
        upper[i] = 1.0 / dy2;
        rhs[i] = w[i] * psi[i];
    }
    // Row n (Robin): e_y(1) = −e(1)/γ eliminates the ghost node.
    lower[n - 1] = 2.0 / dy2;
    diag[n] = -2.0 * (1.0 + dy / gamma) / dy2 - w[n];
    rhs[n] = w[n] * psi[n];

    let e = solve_tridiagonal(&lower, &diag, &upper, &rhs);
    e.iter().zip(psi).map(|(ei, pi)| ei + pi).collect()
}

/// Solve the quasi-steady profile at height `h`.
pub fn solve_bvp(h: f64, bundle: &ModelBundle, opts: &BvpOptions) -> Result<BvpSolution> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::invalid(format!(
            "film height must be positive and finite, got {h}"
        )));
    }
    bundle.params.check()?;
    if opts.n < crate::model::MIN_CELLS {
        return Err(Error::invalid(format!(
            "grid too coarse: n = {} (minimum {})",
            opts.n,
            crate::model::MIN_CELLS
        )));
    }

    let n = opts.n;
    let c_star = bundle.params.c_star;
    let mut u: Vec<f64> = match &opts.warm_start {
        Some(p) if p.n() == n => p.values().to_vec(),
        Some(p) => p.resample(n)?.values().to_vec(),
        None => vec![c_star; n + 1],
    };

    let mut img = Vec::with_capacity(n + 1);
    let mut iterations = 0usize;
    let mut theta = opts.damping.clamp(1.0 / 1024.0, 1.0);
    let mut prev_res = f64::INFINITY;
    let mut history: Vec<f64> = Vec::new();
    let mut stalled = false;
    let mut best_u = u.clone();
    let mut best_res = f64::INFINITY;

    if opts.method != SolveMethod::NewtonOnly {
        for _ in 0..opts.max_picard {
            apply_map(&u, h, bundle, &mut img);
            let res = max_abs_diff(&u, &img);
            iterations += 1;
            if res <= opts.tol_fp {
                return Ok(BvpSolution {
                    h,
                    u: Profile::new(u)?,
                    residual: res,
                    iterations,
                    method: IterationMethod::Picard,
                });
            }
            if res < best_res {
                best_res = res;
                best_u.copy_from_slice(&u);
            }
            if res > prev_res {
                theta = (theta * 0.5).max(1.0 / 1024.0);
            }
            history.push(res);
            if history.len() > opts.stall_window {
                let past = history[history.len() - 1 - opts.stall_window];
                if res > past / opts.stall_factor {
                    stalled = true;
                    break;
                }
            }
            prev_res = res;
            // The solution lies in [0, c*]; projecting the iterate keeps the
            // sweep from wandering when the map is far from contractive.
            for (ui, fi) in u.iter_mut().zip(&img) {
                *ui = (*ui + theta * (fi - *ui)).clamp(0.0, c_star);
            }
        }
        if opts.method == SolveMethod::PicardOnly {
            apply_map(&u, h, bundle, &mut img);
            let res = max_abs_diff(&u, &img);
            if res <= opts.tol_fp {
                return Ok(BvpSolution {
                    h,
                    u: Profile::new(u)?,
                    residual: res,
                    iterations,
                    method: IterationMethod::Picard,
                });
            }
            return Err(Error::IterationFailure {
                context: format!("picard fixed point at h = {h:.6e}"),
                iterations,
                residual: res,
            });
        }
        if !stalled {
            // Picard exhausted its budget without stalling; Newton still gets
            // a chance below.
        }
    }

    // Newton phase, starting from the best iterate the sweep produced.
    let mut res = {
        apply_map(&u, h, bundle, &mut img);
        max_abs_diff(&u, &img)
    };
    if best_res < res {
        u.copy_from_slice(&best_u);
        apply_map(&u, h, bundle, &mut img);
        res = max_abs_diff(&u, &img);
    }
    for _ in 0..opts.max_newton {
        if res <= opts.tol_fp {
            break;
        }
        let psi: Vec<f64> = img.iter().zip(&u).map(|(f, ui)| f - ui).collect();
        let delta = newton_correction(&u, &psi, h, bundle);
        // Backtracking line search on the fixed-point defect.
        let mut step = 1.0;
        let mut improved = false;
        let mut candidate = vec![0.0; n + 1];
        while step >= 1.0 / (1 << 20) as f64 {
            for ((c, ui), di) in candidate.iter_mut().zip(&u).zip(&delta) {
                *c = ui + step * di;
            }
            apply_map(&candidate, h, bundle, &mut img);
            let cand_res = max_abs_diff(&candidate, &img);
            if cand_res < res {
                u.copy_from_slice(&candidate);
                res = cand_res;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !improved {
            return Err(Error::IterationFailure {
                context: format!("newton fixed point at h = {h:.6e}"),
                iterations,
                residual: res,
            });
        }
    }

    if res <= opts.tol_fp {
        Ok(BvpSolution {
            h,
            u: Profile::new(u)?,
            residual: res,
            iterations,
            method: IterationMethod::Newton,
        })
    } else {
        Err(Error::IterationFailure {
            context: format!("fixed point at h = {h:.6e}"),
            iterations,
            residual: res,
        })
    }
}

impl BvpSolution {
    /// Interface concentration `u(1)`.
    pub fn interface_concentration(&self) -> f64 {
        self.u.value(self.u.n())
    }

    /// Flux-consistent gradient profile `u_y(y) = (h²/κ) ∫₀^y r̃(u) dη`.
    /// On the discrete fixed point this is the exact derivative of the
    /// returned `u` up to quadrature order.
    pub fn gradient_integral(&self, bundle: &ModelBundle) -> Vec<f64> {
        let p = &bundle.params;
        let rates: Vec<f64> = self
            .u
            .values()
            .iter()
            .map(|&ui| bundle.rate.truncated(ui, p.c_star))
            .collect();
        let mut s = cumulative_trapezoid(&rates, self.u.dy());
        let body = self.h * self.h / p.kappa;
        for v in &mut s {
            *v *= body;
        }
        s
    }

    /// Interface gradient `u_y(1)` via the flux identity.
    pub fn interface_gradient(&self, bundle: &ModelBundle) -> f64 {
        *self
            .gradient_integral(bundle)
            .last()
            .expect("profile is non-empty")
    }

    /// Check the comparison-principle inequalities the continuous solution
    /// satisfies, with discretization slack applied to normalized margins:
    /// `u` increasing from its positive minimum at the wall to its maximum
    /// `u(1) < c*` at the interface, gradient non-negative and largest at the
    /// interface where it equals `(κ_L h/(Lκ))(c* − u(1))`, curvature in
    /// `[0, r(c*) h²/κ]`.
    ///
    /// Value comparisons get the slack `max(10·tol_fp, 5·n⁻²)`. Checks built
    /// from finite differences of `u` carry truncation that grows with the
    /// boundary-layer stiffness — `u_yyy = (h²/κ)(r̃∘u)'` is bounded by
    /// `(h²Λ/κ)·u_y` with `Λ` the steepest rate slope, so the one-sided
    /// interface stencil is off by up to `(Δy²/3)(h²Λ/κ)` relative to the
    /// gradient scale — and their slack is widened by that factor.
    pub fn check_bounds(&self, bundle: &ModelBundle, tol_fp: f64) -> BoundsReport {
        let p = &bundle.params;
        let u = &self.u;
        let n = u.n();
        let c_star = p.c_star;
        let slack = (10.0 * tol_fp).max(5.0 / (n as f64 * n as f64));
        let lipschitz = (0..=512)
            .map(|k| {
                let s = c_star * k as f64 / 512.0;
                bundle.rate.truncated_derivative(s, c_star).abs()
            })
            .fold(0.0, f64::max);
        let stiffness = (self.h * self.h * lipschitz / (3.0 * p.kappa)).max(1.0);
        let fd_slack = slack * stiffness;

        let uy: Vec<f64> = (0..=n).map(|i| u.first_difference(i)).collect();
        let uyy: Vec<f64> = (0..=n).map(|i| u.second_difference(i)).collect();

        let grad_scale = (p.kappa_l * self.h / (p.l * p.kappa) * c_star).max(f64::MIN_POSITIVE);
        let curv_scale = (bundle.rate_ceiling() * self.h * self.h / p.kappa).max(f64::MIN_POSITIVE);

        let min_u = u.min();
        let max_u = u.max();
        let u0 = u.value(0);
        let u1 = u.value(n);
        let robin_gradient = p.kappa_l * self.h / (p.l * p.kappa) * (c_star - u1);

        let max_uy = uy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_uy = uy.iter().copied().fold(f64::INFINITY, f64::min);
        let max_uyy = uyy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_uyy = uyy.iter().copied().fold(f64::INFINITY, f64::min);

        let checks = vec![
            InequalityCheck::new("wall concentration positive", u0 / c_star, slack),
            InequalityCheck::new("wall is the minimum", (min_u - u0) / c_star, slack),
            InequalityCheck::new("interface is the maximum", (u1 - max_u) / c_star, slack),
            InequalityCheck::new("interface below bulk", (c_star - u1) / c_star, slack),
            InequalityCheck::new("gradient non-negative", min_uy / grad_scale, fd_slack),
            InequalityCheck::new(
                "gradient peaks at the interface",
                (uy[n] - max_uy) / grad_scale,
                fd_slack,
            ),
            InequalityCheck::new(
                "interface gradient matches the flux balance",
                -(uy[n] - robin_gradient).abs() / grad_scale,
                fd_slack,
            ),
            InequalityCheck::new("curvature non-negative", min_uyy / curv_scale, fd_slack),
            InequalityCheck::new(
                "curvature below the rate ceiling",
                (curv_scale - max_uyy) / curv_scale,
                fd_slack,
            ),
        ];
        let ok = checks.iter().all(|c| c.ok);
        BoundsReport {
            slack,
            fd_slack,
            checks,
            ok,
        }
    }
}

/// One normalized inequality margin: the amount (in units of the quantity's
/// natural scale) by which the inequality holds; `ok` when it is no worse
/// than `−slack`.
#[derive(Debug, Clone)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub margin: f64,
    /// The slack this margin was judged against.
    pub slack: f64,
    pub ok: bool,
}

impl InequalityCheck {
    pub(crate) fn new(name: &'static str, margin: f64, slack: f64) -> Self {
        InequalityCheck {
            name,
            margin,
            slack,
            ok: margin >= -slack,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    /// Slack applied to value comparisons.
    pub slack: f64,
    /// Wider slack applied to the finite-difference-based checks.
    pub fd_slack: f64,
    pub checks: Vec<InequalityCheck>,
    pub ok: bool,
}

impl std::fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "comparison bounds (slack {:.2e}, derivative slack {:.2e}):",
            self.slack, self.fd_slack
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  {} {:<42} margin {:+.3e}",
                if c.ok { "ok  " } else { "FAIL" },
                c.name,
                c.margin
            )?;
        }
        Ok(())
    }
}

/// Max-norm defect of the flux identity `h² ∫₀^y r̃(u) dη = κ u_y(y)` over
/// the grid, with `u_y` from the difference stencils. O(n⁻²) for converged
/// solutions.
pub fn flux_identity_defect(sol: &BvpSolution, bundle: &ModelBundle) -> f64 {
    let grad = sol.gradient_integral(bundle);
    let kappa = bundle.params.kappa;
    let body = sol.h * sol.h / kappa;
    (0..=sol.u.n())
        .map(|i| (grad[i] / body * sol.h * sol.h - kappa * sol.u.first_difference(i)).abs())
        .fold(0.0, f64::max)
}

/// The growth functional `f(h) = h ∫₀¹ g(r̃(u[h])) dy`. Zeros of `f` are the
/// quasi-steady equilibria; `|f(h)| ≤ M h` with `M` the growth bound.
pub fn growth_rate_f(h: f64, bundle: &ModelBundle, opts: &BvpOptions) -> Result<f64> {
    Ok(growth_rate_with_solution(h, bundle, opts)?.0)
}

/// `f(h)` together with the profile it was computed from (for warm starts and
/// trajectory storage).
pub fn growth_rate_with_solution(
    h: f64,
    bundle: &ModelBundle,
    opts: &BvpOptions,
) -> Result<(f64, BvpSolution)> {
    let sol = solve_bvp(h, bundle, opts)?;
    let f = h * growth_integral_concentration(&sol.u, bundle);
    Ok((f, sol))
}
