//! Solve the substrate profile at a fixed film height and inspect it.
//!
//! At height `h` the quasi-steady concentration `u(y)` on the unit interval
//! satisfies `κ u_yy = h² r̃(u)` with a no-flux wall `u_y(0) = 0` and the
//! interface flux balance `u_y(1) = β (c* − u(1))`, `β = κ_L h/(Lκ)`. The
//! solver iterates the equivalent integral fixed point; the comparison
//! checks afterwards confirm the discrete solution keeps the shape the
//! continuous one must have (increasing, convex, capped by `c*`).

use biofilm1d::bvp::{flux_identity_defect, solve_bvp, BvpOptions};
use biofilm1d::ModelBundle;

fn main() -> biofilm1d::Result<()> {
    let bundle = ModelBundle::tanh_reference();
    let opts = BvpOptions::default();
    let h = 1.5;

    let sol = solve_bvp(h, &bundle, &opts)?;
    println!(
        "h = {h}: converged by {:?} in {} iterations, fixed-point residual {:.2e}",
        sol.method, sol.iterations, sol.residual
    );
    println!(
        "wall u(0) = {:.8}, interface u(1) = {:.8} (bulk c* = {})",
        sol.u.value(0),
        sol.interface_concentration(),
        bundle.params.c_star
    );

    println!("\n   y        u(y)");
    let n = sol.u.n();
    for i in (0..=n).step_by(n / 8) {
        println!("  {:4.2}  {:.8}", i as f64 / n as f64, sol.u.value(i));
    }

    println!();
    print!("{}", sol.check_bounds(&bundle, opts.tol_fp));
    println!(
        "\nflux identity max defect |h²∫r̃ − κu_y| = {:.3e}",
        flux_identity_defect(&sol, &bundle)
    );
    Ok(())
}
