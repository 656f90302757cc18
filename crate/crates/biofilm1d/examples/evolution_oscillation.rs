//! Damped ringing of a tall film relaxing to its equilibrium height.
//!
//! Away from the quasi-steady limit the height can overshoot: the interior
//! deficit lags the moving interface when interior diffusion is slow, so the
//! film coasts through the equilibrium, turns around, and crosses it again
//! with rapidly shrinking amplitude. The run below starts a tall film with a
//! rough deficit and small interior diffusivity (κ = 0.1) and lists every
//! crossing of the final height. The trapezoidal scheme matters here — a
//! first-order step damps the ring below rounding before it can be seen.

use biofilm1d::evolution::{evolve, EvolveOptions, TimeScheme};
use biofilm1d::model::Profile;
use biofilm1d::verify::{check_oscillatory_convergence, OscillationOptions};
use biofilm1d::ModelBundle;

fn main() -> biofilm1d::Result<()> {
    let mut bundle = ModelBundle::tanh_reference();
    bundle.params.kappa = 0.1;

    let n = 256;
    let c_star = bundle.params.c_star;
    let v0 = Profile::from_fn(n, |y| {
        let s = (2.0 * std::f64::consts::PI * y).cos();
        c_star * s * s
    })?;

    let traj = evolve(
        3.5,
        &v0,
        &bundle,
        &EvolveOptions {
            t_end: 60.0,
            dt_max: 0.01,
            scheme: TimeScheme::Midpoint,
            ..Default::default()
        },
    )?;

    let h_end = traj.final_height();
    println!("h(0) = 3.5 → h({}) = {h_end:.9}", traj.t_end());
    println!("\ncrossings of the final height (deviation sign flips):");
    let mut prev: Option<(f64, f64)> = None;
    let mut extremum: (f64, f64) = (0.0, 0.0);
    for (&t, &h) in traj.track_t.iter().zip(&traj.track_h) {
        let d = h - h_end;
        if d.abs() > extremum.1.abs() {
            extremum = (t, d);
        }
        if let Some((tp, dp)) = prev {
            if dp != 0.0 && d != 0.0 && dp.signum() != d.signum() {
                println!(
                    "  t ≈ {:7.3}   (preceding extremum {:+.3e} at t = {:.3})",
                    0.5 * (tp + t),
                    extremum.1,
                    extremum.0
                );
                extremum = (t, d);
            }
        }
        prev = Some((t, d));
    }

    println!("\npackaged check with the same setup:");
    let report = check_oscillatory_convergence(&OscillationOptions::default())?;
    print!("{report}");
    Ok(())
}
