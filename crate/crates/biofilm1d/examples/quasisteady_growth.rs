//! Grow a film from a thin seed under the quasi-steady height law.
//!
//! When substrate diffusion is fast against film growth (ε → 0) the PDE
//! collapses to the scalar law `h' = f(h)` with the profile slaved to the
//! current height. The integrator below re-solves the profile inside an
//! adaptive step loop; the trajectory must rise monotonically into the
//! equilibrium and stay inside the a-priori envelope `h₀e^{−Mt} ≤ h ≤ h₀e^{Mt}`.

use biofilm1d::quasisteady::{integrate_quasisteady, QuasiSteadyOptions};
use biofilm1d::ModelBundle;

fn main() -> biofilm1d::Result<()> {
    let bundle = ModelBundle::tanh_reference();
    let traj = integrate_quasisteady(0.05, 60.0, &bundle, &QuasiSteadyOptions::default())?;

    println!("  t        h(t)");
    for &t in &[0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 60.0] {
        println!("  {t:5.1}  {:.9}", traj.height_at(t));
    }

    let (lo, hi) = traj.envelope_margins();
    println!(
        "\nsteps accepted: {}, final height {:.9}",
        traj.len(),
        traj.final_height()
    );
    println!("monotone rise: {}", traj.is_monotone(1e-12));
    println!("envelope margins (worst, normalized): low {lo:+.2e}, high {hi:+.2e}");
    Ok(())
}
