//! Collapse of a film whose maintenance cost exceeds what the substrate can
//! pay.
//!
//! With an affine growth law `g(s) = α(s − b)` and `b ≥ r(c*)`, even a film
//! bathed in the full bulk concentration loses mass, so `f(h) < 0` for every
//! height and the film shrinks to nothing. As `h → 0` the profile saturates
//! (`u → c*`) and two flux ratios approach clean boundary-layer limits,
//! which the packaged check measures against 1%.

use biofilm1d::quasisteady::{integrate_quasisteady, QuasiSteadyOptions};
use biofilm1d::verify::{check_extinction, extinction_reference, ExtinctionOptions};

fn main() -> biofilm1d::Result<()> {
    let bundle = extinction_reference();
    println!(
        "rate ceiling r(c*) = {:.6}, maintenance threshold exceeds it — the film starves\n",
        bundle.rate_ceiling()
    );

    let opts = QuasiSteadyOptions {
        h_floor: 1e-6,
        ..Default::default()
    };
    let traj = integrate_quasisteady(1.0, 40.0, &bundle, &opts)?;
    println!("  t        h(t)");
    let samples = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, traj.t_end()];
    for &t in &samples {
        println!("  {t:6.2}  {:.6e}", traj.height_at(t));
    }
    println!(
        "\nthe run stopped at t = {:.3} when h hit the floor {:.0e}",
        traj.t_end(),
        opts.h_floor
    );

    println!();
    let report = check_extinction(&bundle, &ExtinctionOptions::default())?;
    print!("{report}");
    Ok(())
}
