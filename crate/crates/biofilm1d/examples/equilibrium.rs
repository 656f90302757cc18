//! Locate the equilibrium film height by two independent routes and certify
//! that it is the only one.
//!
//! Route one reduces the steady free-boundary problem to a shoot from the
//! substratum: integrate `κ c'' = r̃(c)` upward from a trial wall value `c₀`
//! until the ray `c* − (Lb/κ_L) z` is hit (the contact point), and drive the
//! flux mismatch there to zero by a bracketed root search in `c₀`. Route two
//! finds the zero of the growth functional `f(h)` of the quasi-steady height
//! law. The two discretizations share nothing past the model definition, so
//! agreement is a strong consistency check. The monotonicity certificate
//! re-runs the shoot with its sensitivity system on a wall-value grid and
//! checks the inequalities that make the flux mismatch strictly monotone —
//! hence the root unique.

use biofilm1d::quasisteady::{find_equilibrium_ode, OdeEquilibrium, OdeEquilibriumOptions};
use biofilm1d::shooting::{find_equilibrium_shooting, ShootingEquilibriumOptions, ShootingOutcome};
use biofilm1d::ModelBundle;

fn main() -> biofilm1d::Result<()> {
    let bundle = ModelBundle::tanh_reference();

    let shot = match find_equilibrium_shooting(&bundle, &ShootingEquilibriumOptions::default())? {
        ShootingOutcome::Found(eq) => eq,
        ShootingOutcome::NoEquilibrium { reason } => {
            println!("no equilibrium: {reason}");
            return Ok(());
        }
    };
    println!(
        "shooting:   h_e = {:.12}, wall concentration c0_e = {:.12}",
        shot.h_e, shot.c0_e
    );
    println!("            flux mismatch at the root {:.2e}", shot.flux_residual);

    let ode = match find_equilibrium_ode(&bundle, &OdeEquilibriumOptions::default())? {
        OdeEquilibrium::Found { h_e, f_residual, .. } => (h_e, f_residual),
        OdeEquilibrium::NoEquilibrium { reason } => {
            println!("no equilibrium: {reason}");
            return Ok(());
        }
    };
    println!("height law: h_e = {:.12}, f(h_e) = {:+.2e}", ode.0, ode.1);
    println!(
        "relative gap between the methods: {:.3e}\n",
        (shot.h_e - ode.0).abs() / shot.h_e
    );

    match &shot.certificate {
        Some(cert) => print!("{cert}"),
        None => println!("certificate skipped"),
    }
    println!(
        "\nequilibrium certified unique: {}",
        if shot.unique { "yes" } else { "no" }
    );
    Ok(())
}
