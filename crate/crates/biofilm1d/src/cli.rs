//! Command-line front end.
//!
//! Subcommands: `bvp`, `evolve`, `quasisteady`, `equilibrium`, `verify`,
//! `sweep`. Every run can load a TOML configuration file (`--config`);
//! individual flags override file values, which override the built-in
//! defaults. Output CSV files begin with the fully resolved configuration as
//! `#`-prefixed comment lines, so a result file always records how it was
//! produced. Floats are written with the shortest representation that round
//! trips.
//!
//! The output directory resolves in order: `--out-dir` flag, `[output] dir`
//! in the config file, the `BIOFILM1D_OUT_DIR` environment variable, then
//! the current directory.
//!
//! Exit codes: `0` success, `1` configuration or usage error, `2` solver or
//! verification failure, `3` no equilibrium exists for the supplied model.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bvp::{growth_rate_with_solution, BvpOptions, BvpSolution};
use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionTrajectory, EvolveOptions, TimeScheme};
use crate::model::{validate, GrowthModel, ModelBundle, PhysicalParams, Profile, RateModel};
use crate::quasisteady::{
    find_equilibrium_ode, integrate_quasisteady, OdeEquilibrium, OdeEquilibriumOptions,
    QuasiSteadyOptions, Trajectory,
};
use crate::shooting::{find_equilibrium_shooting, ShootingEquilibriumOptions, ShootingOutcome};
use crate::verify::{
    check_convergence_to_equilibrium, check_extinction, check_large_h_limit,
    check_oscillatory_convergence, check_small_h_limit, extinction_reference, CheckReport,
    EquilibriumConvergenceOptions, ExtinctionOptions, LargeHOptions, OscillationOptions,
    SmallHOptions, CHECK_NAMES,
};

pub const OUT_DIR_ENV: &str = "BIOFILM1D_OUT_DIR";

// ---------------------------------------------------------------------------
// Configuration file
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub laws: LawsSection,
    pub grid: GridSection,
    pub initial: InitialSection,
    pub time: TimeSection,
    pub output: OutputSection,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParamsSection::default(),
            laws: LawsSection::default(),
            grid: GridSection::default(),
            initial: InitialSection::default(),
            time: TimeSection::default(),
            output: OutputSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub kappa: f64,
    pub kappa_l: f64,
    pub l: f64,
    pub c_star: f64,
    pub eps: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection {
            kappa: 1.0,
            kappa_l: 1.0,
            l: 1.0,
            c_star: 1.0,
            eps: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LawsSection {
    /// Rate law: `tanh:RHO`, `linear:SLOPE`, `monod:RMAX:K`, `table:FILE`.
    pub rate: String,
    /// Growth law: `affine:ALPHA:B`, `const:V`, `table:FILE`.
    pub growth: String,
}

impl Default for LawsSection {
    fn default() -> Self {
        LawsSection {
            rate: "tanh:2".into(),
            growth: "affine:1:0.5".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    pub h0: f64,
    /// Initial deficit: `const:X`, `ramp:A:B`, `sin2`, `table:FILE`.
    pub v0: String,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            h0: 1.0,
            v0: "const:0".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    /// 0 means "stability caps only".
    pub dt_max: f64,
    /// `imex-euler` or `midpoint`.
    pub scheme: String,
    /// Relative tolerance of the quasi-steady height integration.
    pub rtol: f64,
    /// 0 picks a stride automatically.
    pub store_stride: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            t_end: 10.0,
            dt_max: 0.0,
            scheme: "imex-euler".into(),
            rtol: 1e-8,
            store_stride: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Empty string defers to `BIOFILM1D_OUT_DIR`, then the current directory.
    pub dir: String,
    /// Write every k-th stored state into snapshots.csv.
    pub snapshot_stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: String::new(),
            snapshot_stride: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub h_min: f64,
    pub h_max: f64,
    pub points: usize,
    pub jobs: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            h_min: 0.25,
            h_max: 4.0,
            points: 16,
            jobs: 1,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("bad configuration: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    pub fn physical_params(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(
            self.params.kappa,
            self.params.kappa_l,
            self.params.l,
            self.params.c_star,
            self.params.eps,
        )
    }

    pub fn bundle(&self) -> Result<ModelBundle> {
        let params = self.physical_params()?;
        let rate = parse_rate_spec(&self.laws.rate)?;
        let growth = parse_growth_spec(&self.laws.growth)?;
        let bundle = ModelBundle::new(params, rate, growth);
        let report = validate(&bundle, 512)?;
        if !report.core_ok() {
            return Err(Error::config(format!(
                "model fails its basic hypotheses:\n{report}"
            )));
        }
        Ok(bundle)
    }

    pub fn scheme(&self) -> Result<TimeScheme> {
        match self.time.scheme.as_str() {
            "imex-euler" => Ok(TimeScheme::ImexEuler),
            "midpoint" => Ok(TimeScheme::Midpoint),
            other => Err(Error::config(format!(
                "unknown scheme '{other}' (expected 'imex-euler' or 'midpoint')"
            ))),
        }
    }

    pub fn initial_deficit(&self) -> Result<Profile> {
        parse_v0_spec(&self.initial.v0, self.grid.n, self.params.c_star)
    }
}

// ---------------------------------------------------------------------------
// Spec-string parsing
// ---------------------------------------------------------------------------

fn spec_parts(spec: &str) -> Vec<&str> {
    spec.split(':').collect()
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(format!("{what}: '{s}' is not a number")))
}

/// Load a two-column table (comma or whitespace separated; `#` comments).
fn load_table(path: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read table {path}: {e}")))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::config(format!(
                "{path}:{}: expected two columns, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        xs.push(parse_f64(fields[0], "table abscissa")?);
        ys.push(parse_f64(fields[1], "table value")?);
    }
    if xs.len() < 2 {
        return Err(Error::config(format!("{path}: table needs at least two rows")));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(format!(
            "{path}: table abscissae must be strictly increasing"
        )));
    }
    Ok((xs, ys))
}

pub fn parse_rate_spec(spec: &str) -> Result<RateModel> {
    let parts = spec_parts(spec);
    match parts.as_slice() {
        ["tanh", rho] => Ok(RateModel::TanhScaled {
            rho: parse_f64(rho, "tanh rate scale")?,
        }),
        ["linear", slope] => Ok(RateModel::Linear {
            slope: parse_f64(slope, "linear rate slope")?,
        }),
        ["monod", r_max, k] => Ok(RateModel::Monod {
            r_max: parse_f64(r_max, "monod maximum rate")?,
            half_saturation: parse_f64(k, "monod half-saturation")?,
        }),
        ["table", path] => {
            let (s, r) = load_table(path)?;
            Ok(RateModel::Tabulated { s, r })
        }
        _ => Err(Error::config(format!(
            "unknown rate spec '{spec}' (expected tanh:RHO, linear:SLOPE, \
             monod:RMAX:K, or table:FILE)"
        ))),
    }
}

pub fn parse_growth_spec(spec: &str) -> Result<GrowthModel> {
    let parts = spec_parts(spec);
    match parts.as_slice() {
        ["affine", alpha, b] => Ok(GrowthModel::Affine {
            alpha: parse_f64(alpha, "affine growth slope")?,
            b: parse_f64(b, "maintenance threshold")?,
        }),
        ["const", v] => {
            let v = parse_f64(v, "constant growth value")?;
            Ok(GrowthModel::Tabulated {
                s: vec![0.0, 1.0],
                g: vec![v, v],
            })
        }
        ["table", path] => {
            let (s, g) = load_table(path)?;
            Ok(GrowthModel::Tabulated { s, g })
        }
        _ => Err(Error::config(format!(
            "unknown growth spec '{spec}' (expected affine:ALPHA:B, const:V, \
             or table:FILE)"
        ))),
    }
}

pub fn parse_v0_spec(spec: &str, n: usize, c_star: f64) -> Result<Profile> {
    let parts = spec_parts(spec);
    match parts.as_slice() {
        ["const", x] => {
            let x = parse_f64(x, "initial deficit")?;
            Profile::constant(n, x)
        }
        ["ramp", a, b] => {
            let a = parse_f64(a, "ramp start")?;
            let b = parse_f64(b, "ramp end")?;
            Profile::from_fn(n, |y| a + (b - a) * y)
        }
        ["sin2"] => Profile::from_fn(n, |y| {
            let s = (2.0 * std::f64::consts::PI * y).sin();
            c_star * s * s
        }),
        ["table", path] => {
            let (ys, vs) = load_table(path)?;
            if (ys[0] - 0.0).abs() > 1e-12 || (ys[ys.len() - 1] - 1.0).abs() > 1e-12 {
                return Err(Error::config(format!(
                    "{path}: initial-deficit table must span y = 0 … 1"
                )));
            }
            let coarse = Profile::new(vs.clone()).or_else(|_| -> Result<Profile> {
                // Irregular or short tables: sample through linear interpolation.
                Profile::from_fn(n, |y| {
                    let i = ys.partition_point(|&x| x < y).clamp(1, ys.len() - 1);
                    let t = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
                    vs[i - 1] + t * (vs[i] - vs[i - 1])
                })
            })?;
            coarse.resample(n)
        }
        _ => Err(Error::config(format!(
            "unknown initial-deficit spec '{spec}' (expected const:X, ramp:A:B, \
             sin2, or table:FILE)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "biofilm1d",
    version,
    about = "One-dimensional biofilm moving-boundary laboratory",
    disable_help_subcommand = true
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory (overrides the config file and BIOFILM1D_OUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Rate law, e.g. tanh:2, linear:1, monod:1:0.5, table:FILE.
    #[arg(long)]
    rate: Option<String>,
    /// Growth law, e.g. affine:1:0.5, const:-1, table:FILE.
    #[arg(long)]
    growth: Option<String>,
    /// Diffusivity κ.
    #[arg(long)]
    kappa: Option<f64>,
    /// Boundary-layer diffusivity κ_L.
    #[arg(long)]
    kappa_l: Option<f64>,
    /// Boundary-layer thickness L.
    #[arg(long)]
    l: Option<f64>,
    /// Bulk concentration c*.
    #[arg(long)]
    c_star: Option<f64>,
    /// Time-scale ratio ε.
    #[arg(long)]
    eps: Option<f64>,
    /// Grid cells on the unit interval.
    #[arg(long)]
    n: Option<usize>,
}

impl ModelArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.rate {
            cfg.laws.rate = v.clone();
        }
        if let Some(v) = &self.growth {
            cfg.laws.growth = v.clone();
        }
        if let Some(v) = self.kappa {
            cfg.params.kappa = v;
        }
        if let Some(v) = self.kappa_l {
            cfg.params.kappa_l = v;
        }
        if let Some(v) = self.l {
            cfg.params.l = v;
        }
        if let Some(v) = self.c_star {
            cfg.params.c_star = v;
        }
        if let Some(v) = self.eps {
            cfg.params.eps = v;
        }
        if let Some(v) = self.n {
            cfg.grid.n = v;
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the fixed-height profile and write profile.csv.
    Bvp {
        /// Film height.
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Evolve the full model; writes trajectory.csv and snapshots.csv.
    Evolve {
        #[arg(long)]
        h0: Option<f64>,
        /// Initial deficit spec (const:X, ramp:A:B, sin2, table:FILE).
        #[arg(long)]
        v0: Option<String>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt_max: Option<f64>,
        /// Time scheme: imex-euler or midpoint.
        #[arg(long)]
        scheme: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Integrate the quasi-steady height law; writes trajectory.csv.
    Quasisteady {
        #[arg(long)]
        h0: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Integration tolerance.
        #[arg(long)]
        rtol: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Locate the equilibrium by shooting, cross-check against the
    /// height-law root, and write equilibrium.csv.
    Equilibrium {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Run regime checks; writes checks.csv. Non-zero exit on failure.
    Verify {
        /// all, small-h, large-h, extinction, equilibrium, or oscillation.
        #[arg(default_value = "all")]
        check: String,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Evaluate the growth functional on a height grid; writes sweep.csv.
    Sweep {
        #[arg(long)]
        h_min: Option<f64>,
        #[arg(long)]
        h_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        model: ModelArgs,
    },
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

struct Out {
    dir: PathBuf,
    header: String,
}

impl Out {
    fn new(cli_dir: &Option<PathBuf>, cfg: &RunConfig) -> Result<Self> {
        let dir = if let Some(d) = cli_dir {
            d.clone()
        } else if !cfg.output.dir.is_empty() {
            PathBuf::from(&cfg.output.dir)
        } else if let Ok(env_dir) = std::env::var(OUT_DIR_ENV) {
            PathBuf::from(env_dir)
        } else {
            PathBuf::from(".")
        };
        std::fs::create_dir_all(&dir)?;
        let header = cfg
            .to_toml()
            .lines()
            .map(|l| format!("# {l}\n"))
            .collect::<String>();
        Ok(Out { dir, header })
    }

    fn create(&self, name: &str) -> Result<(PathBuf, std::io::BufWriter<std::fs::File>)> {
        let path = self.dir.join(name);
        let file = std::fs::File::create(&path)?;
        let mut w = std::io::BufWriter::new(file);
        w.write_all(self.header.as_bytes())?;
        Ok((path, w))
    }
}

fn write_profile_csv(out: &Out, sol: &BvpSolution) -> Result<PathBuf> {
    let (path, mut w) = out.create("profile.csv")?;
    writeln!(w, "y,u,u_y,u_yy")?;
    let n = sol.u.n();
    for i in 0..=n {
        writeln!(
            w,
            "{},{},{},{}",
            sol.u.node(i),
            sol.u.value(i),
            sol.u.first_difference(i),
            sol.u.second_difference(i)
        )?;
    }
    w.flush()?;
    Ok(path)
}

fn flux_ratio_of_profile(u: &Profile, h: f64, bundle: &ModelBundle) -> f64 {
    bundle.params.kappa * u.first_difference(u.n())
        / (h * h * bundle.rate_ceiling().max(f64::MIN_POSITIVE))
}

fn write_qs_trajectory_csv(out: &Out, traj: &Trajectory, bundle: &ModelBundle) -> Result<PathBuf> {
    let (path, mut w) = out.create("trajectory.csv")?;
    writeln!(w, "t,h,G,flux_ratio")?;
    for (k, (&t, &h)) in traj.times.iter().zip(&traj.heights).enumerate() {
        let g = if h > 0.0 { traj.rates[k] / h } else { 0.0 };
        let flux = traj
            .profiles
            .as_ref()
            .map(|ps| flux_ratio_of_profile(&ps[k], h, bundle))
            .unwrap_or(f64::NAN);
        writeln!(w, "{t},{h},{g},{flux}")?;
    }
    w.flush()?;
    Ok(path)
}

fn write_ev_trajectory_csv(
    out: &Out,
    traj: &EvolutionTrajectory,
    bundle: &ModelBundle,
) -> Result<PathBuf> {
    let (path, mut w) = out.create("trajectory.csv")?;
    writeln!(w, "t,h,G,flux_ratio")?;
    for (state, diag) in traj.states.iter().zip(&traj.diagnostics) {
        let u_y = -state.v.first_difference(state.v.n());
        let flux = bundle.params.kappa * u_y
            / (state.h * state.h * bundle.rate_ceiling().max(f64::MIN_POSITIVE));
        writeln!(w, "{},{},{},{}", state.t, state.h, diag.growth, flux)?;
    }
    w.flush()?;
    Ok(path)
}

fn write_snapshots_csv(out: &Out, traj: &EvolutionTrajectory, stride: usize) -> Result<PathBuf> {
    let (path, mut w) = out.create("snapshots.csv")?;
    writeln!(w, "t,y,v")?;
    let stride = stride.max(1);
    let last = traj.states.len() - 1;
    for (k, state) in traj.states.iter().enumerate() {
        if k % stride != 0 && k != last {
            continue;
        }
        for i in 0..=state.v.n() {
            writeln!(w, "{},{},{}", state.t, state.v.node(i), state.v.value(i))?;
        }
    }
    w.flush()?;
    Ok(path)
}

fn write_checks_csv(out: &Out, reports: &[CheckReport]) -> Result<PathBuf> {
    let (path, mut w) = out.create("checks.csv")?;
    writeln!(w, "check,quantity,origin,comparison,measured,target,tolerance,pass")?;
    for r in reports {
        for q in &r.quantities {
            writeln!(
                w,
                "{},\"{}\",{},{},{},{},{},{}",
                r.name,
                q.name,
                q.origin.label(),
                q.comparison.label(),
                q.measured,
                q.target,
                q.tolerance,
                q.pass
            )?;
        }
    }
    w.flush()?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

fn cmd_bvp(cfg: &RunConfig, out: &Out) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let h = cfg.initial.h0;
    let opts = BvpOptions::with_n(cfg.grid.n);
    let (f, sol) = growth_rate_with_solution(h, &bundle, &opts)?;
    let bounds = sol.check_bounds(&bundle, opts.tol_fp);
    let path = write_profile_csv(out, &sol)?;
    println!(
        "h = {h}: u(0) = {:.9e}, u(1) = {:.9e}, f(h) = {:.9e}",
        sol.u.value(0),
        sol.interface_concentration(),
        f
    );
    println!(
        "converged by {:?} in {} iterations (residual {:.3e})",
        sol.method, sol.iterations, sol.residual
    );
    print!("{bounds}");
    println!("wrote {}", path.display());
    if bounds.ok {
        Ok(0)
    } else {
        Err(Error::InvariantViolation(
            "profile violates its comparison bounds".into(),
        ))
    }
}

fn cmd_evolve(cfg: &RunConfig, out: &Out) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let v0 = cfg.initial_deficit()?;
    let opts = EvolveOptions {
        t_end: cfg.time.t_end,
        dt_max: if cfg.time.dt_max > 0.0 {
            cfg.time.dt_max
        } else {
            f64::INFINITY
        },
        scheme: cfg.scheme()?,
        store_stride: cfg.time.store_stride,
        ..Default::default()
    };
    let traj = evolve(cfg.initial.h0, &v0, &bundle, &opts)?;
    let t_path = write_ev_trajectory_csv(out, &traj, &bundle)?;
    let s_path = write_snapshots_csv(out, &traj, cfg.output.snapshot_stride)?;
    println!(
        "evolved to t = {:.6} in {} steps: h = {:.9e} ({:?})",
        traj.t_end(),
        traj.steps_taken,
        traj.final_height(),
        traj.status
    );
    println!(
        "invariants: deficit ∈ [{:.3e}, c* + {:.3e}], envelope margins {:.3e}/{:.3e} ({})",
        traj.invariants.min_deficit,
        traj.invariants.max_excess,
        traj.invariants.envelope_low_margin,
        traj.invariants.envelope_high_margin,
        if traj.invariants.ok { "ok" } else { "VIOLATED" }
    );
    println!("wrote {} and {}", t_path.display(), s_path.display());
    Ok(0)
}

fn cmd_quasisteady(cfg: &RunConfig, out: &Out) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let opts = QuasiSteadyOptions {
        rtol: cfg.time.rtol,
        bvp: BvpOptions::with_n(cfg.grid.n),
        ..Default::default()
    };
    let traj = integrate_quasisteady(cfg.initial.h0, cfg.time.t_end, &bundle, &opts)?;
    let path = write_qs_trajectory_csv(out, &traj, &bundle)?;
    let (lo, hi) = traj.envelope_margins();
    println!(
        "integrated to t = {:.6} in {} steps: h = {:.9e} ({:?})",
        traj.t_end(),
        traj.len() - 1,
        traj.final_height(),
        traj.status
    );
    println!("envelope margins {lo:.3e}/{hi:.3e}");
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_equilibrium(cfg: &RunConfig, out: &Out) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let shoot_opts = ShootingEquilibriumOptions {
        profile_n: cfg.grid.n,
        ..Default::default()
    };
    let outcome = find_equilibrium_shooting(&bundle, &shoot_opts)?;
    let eq = match outcome {
        ShootingOutcome::Found(eq) => eq,
        ShootingOutcome::NoEquilibrium { reason } => {
            println!("no equilibrium: {reason}");
            return Ok(3);
        }
    };

    let ode_opts = OdeEquilibriumOptions {
        bvp: BvpOptions::with_n(cfg.grid.n),
        ..Default::default()
    };
    let (h_ode, f_res) = match find_equilibrium_ode(&bundle, &ode_opts)? {
        OdeEquilibrium::Found { h_e, f_residual, .. } => (h_e, f_residual),
        OdeEquilibrium::NoEquilibrium { reason } => {
            println!("height-law root search disagrees with shooting: {reason}");
            return Ok(3);
        }
    };
    let rel_gap = (h_ode - eq.h_e).abs() / eq.h_e;

    let (path, mut w) = out.create("equilibrium.csv")?;
    writeln!(
        w,
        "h_e_shooting,c0_e,flux_residual,h_e_height_law,f_residual,rel_gap,certified_unique"
    )?;
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        eq.h_e, eq.c0_e, eq.flux_residual, h_ode, f_res, rel_gap, eq.unique
    )?;
    w.flush()?;

    println!("equilibrium height (shooting):  {:.12e}", eq.h_e);
    println!("equilibrium height (height law): {h_ode:.12e}  (rel gap {rel_gap:.3e})");
    println!("wall concentration c0 = {:.12e}", eq.c0_e);
    if let Some(cert) = &eq.certificate {
        print!("{cert}");
    }
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig, out: &Out, which: &str) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let selected: Vec<&str> = if which == "all" {
        CHECK_NAMES.to_vec()
    } else if CHECK_NAMES.contains(&which) {
        vec![which]
    } else {
        return Err(Error::config(format!(
            "unknown check '{which}' (expected all or one of {CHECK_NAMES:?})"
        )));
    };

    let mut reports = Vec::new();
    for name in selected {
        let report = match name {
            "small-h" => check_small_h_limit(&bundle, &SmallHOptions::default())?,
            "large-h" => check_large_h_limit(&bundle, &LargeHOptions::default())?,
            "extinction" => {
                // The extinction regime needs a growth response that is
                // negative everywhere; fall back to the built-in extinction
                // model when the configured one can grow.
                let max_growth = (0..=256)
                    .map(|k| {
                        bundle.growth_of_concentration(
                            bundle.params.c_star * k as f64 / 256.0,
                        )
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                if max_growth < 0.0 {
                    check_extinction(&bundle, &ExtinctionOptions::default())?
                } else {
                    println!(
                        "(extinction check: configured model can grow; using the \
                         built-in extinction model)"
                    );
                    check_extinction(&extinction_reference(), &ExtinctionOptions::default())?
                }
            }
            "equilibrium" => check_convergence_to_equilibrium(
                &bundle,
                &EquilibriumConvergenceOptions::default(),
            )?,
            "oscillation" => check_oscillatory_convergence(&OscillationOptions::default())?,
            _ => unreachable!(),
        };
        print!("{report}");
        reports.push(report);
    }

    let path = write_checks_csv(out, &reports)?;
    println!("wrote {}", path.display());
    let all_pass = reports.iter().all(|r| r.pass);
    if all_pass {
        println!("all checks passed");
        Ok(0)
    } else {
        println!("CHECK FAILURES");
        Ok(2)
    }
}

fn cmd_sweep(cfg: &RunConfig, out: &Out) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let sweep = &cfg.sweep;
    if !(sweep.h_min > 0.0 && sweep.h_max >= sweep.h_min) {
        return Err(Error::config(
            "sweep needs 0 < h_min ≤ h_max".to_string(),
        ));
    }
    if sweep.points == 0 {
        return Err(Error::config("sweep needs at least one point".to_string()));
    }
    let points = sweep.points;
    let heights: Vec<f64> = (0..points)
        .map(|i| {
            if points == 1 {
                sweep.h_min
            } else {
                sweep.h_min
                    + (sweep.h_max - sweep.h_min) * i as f64 / (points - 1) as f64
            }
        })
        .collect();

    struct Row {
        h: f64,
        f: f64,
        u0: f64,
        u1: f64,
        residual: f64,
        iterations: usize,
    }

    let jobs = sweep.jobs.clamp(1, points);
    let chunk_len = points.div_ceil(jobs);
    let mut rows: Vec<Option<Row>> = Vec::new();
    rows.resize_with(points, || None);

    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for (ci, slot_chunk) in rows.chunks_mut(chunk_len).enumerate() {
            let bundle = &bundle;
            let heights = &heights;
            let n = cfg.grid.n;
            handles.push(scope.spawn(move || -> Result<()> {
                // Every point starts cold so the output is identical for any
                // worker count (warm-starting inside a chunk would tie the
                // iterates to the chunk boundaries).
                let opts = BvpOptions::with_n(n);
                for (k, slot) in slot_chunk.iter_mut().enumerate() {
                    let idx = ci * chunk_len + k;
                    let h = heights[idx];
                    let (f, sol) = growth_rate_with_solution(h, bundle, &opts)?;
                    *slot = Some(Row {
                        h,
                        f,
                        u0: sol.u.value(0),
                        u1: sol.interface_concentration(),
                        residual: sol.residual,
                        iterations: sol.iterations,
                    });
                }
                Ok(())
            }));
        }
        for handle in handles {
            handle.join().expect("sweep worker panicked")?;
        }
        Ok(())
    })?;

    let (path, mut w) = out.create("sweep.csv")?;
    writeln!(w, "h,f,u0,u1,residual,iterations")?;
    let mut sign_changes = 0usize;
    let mut prev_sign = 0i8;
    for row in rows.iter().map(|r| r.as_ref().expect("row computed")) {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.h, row.f, row.u0, row.u1, row.residual, row.iterations
        )?;
        let s = if row.f > 0.0 {
            1i8
        } else if row.f < 0.0 {
            -1i8
        } else {
            0i8
        };
        if s != 0 {
            if prev_sign != 0 && s != prev_sign {
                sign_changes += 1;
            }
            prev_sign = s;
        }
    }
    w.flush()?;
    println!(
        "swept {} heights on [{}, {}] with {} jobs; f changes sign {} time(s)",
        points, sweep.h_min, sweep.h_max, jobs, sign_changes
    );
    println!("wrote {}", path.display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidInput(_) | Error::Domain(_) => 1,
        _ => 2,
    }
}

/// Run the CLI against the process arguments and return the exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };

    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };

    match &cli.command {
        Command::Bvp { h, model } => {
            model.apply(&mut cfg);
            if let Some(h) = h {
                cfg.initial.h0 = *h;
            }
            let out = Out::new(&cli.out_dir, &cfg)?;
            cmd_bvp(&cfg, &out)
        }
        Command::Evolve {
            h0,
            v0,
            t_end,
            dt_max,
            scheme,
            model,
        } => {
            model.apply(&mut cfg);
            if let Some(v) = h0 {
                cfg.initial.h0 = *v;
            }
            if let Some(v) = v0 {
                cfg.initial.v0 = v.clone();
            }
            if let Some(v) = t_end {
                cfg.time.t_end = *v;
            }
            if let Some(v) = dt_max {
                cfg.time.dt_max = *v;
            }
            if let Some(v) = scheme {
                cfg.time.scheme = v.clone();
            }
            let out = Out::new(&cli.out_dir, &cfg)?;
            cmd_evolve(&cfg, &out)
        }
        Command::Quasisteady {
            h0,
            t_end,
            rtol,
            model,
        } => {
            model.apply(&mut cfg);
            if let Some(v) = h0 {
                cfg.initial.h0 = *v;
            }
            if let Some(v) = t_end {
                cfg.time.t_end = *v;
            }
            if let Some(v) = rtol {
                cfg.time.rtol = *v;
            }
            let out = Out::new(&cli.out_dir, &cfg)?;
            cmd_quasisteady(&cfg, &out)
        }
        Command::Equilibrium { model } => {
            model.apply(&mut cfg);
            let out = Out::new(&cli.out_dir, &cfg)?;
            cmd_equilibrium(&cfg, &out)
        }
        Command::Verify { check, model } => {
            model.apply(&mut cfg);
            let out = Out::new(&cli.out_dir, &cfg)?;
            cmd_verify(&cfg, &out, check)
        }
        Command::Sweep {
            h_min,
            h_max,
            points,
            jobs,
            model,
        } => {
            model.apply(&mut cfg);
            if let Some(v) = h_min {
                cfg.sweep.h_min = *v;
            }
            if let Some(v) = h_max {
                cfg.sweep.h_max = *v;
            }
            if let Some(v) = points {
                cfg.sweep.points = *v;
            }
            if let Some(v) = jobs {
                cfg.sweep.jobs = *v;
            }
            let out = Out::new(&cli.out_dir, &cfg)?;
            cmd_sweep(&cfg, &out)
        }
    }
}
