//! Scan the growth functional `f(h) = h ∫₀¹ g(r̃(u[h])) dy` over a range of
//! heights.
//!
//! `f` is the right side of the quasi-steady height law `h' = f(h)`: positive
//! where a film of that height grows, negative where it shrinks. A sign
//! change brackets an equilibrium. Thin films see the full bulk concentration
//! and grow; tall films starve in the interior and shrink.

use biofilm1d::bvp::{growth_rate_with_solution, BvpOptions};
use biofilm1d::ModelBundle;

fn main() -> biofilm1d::Result<()> {
    let bundle = ModelBundle::tanh_reference();
    let opts = BvpOptions::default();

    println!("   h        f(h)        u(0)      u(1)");
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for i in 0..=24 {
        let h = 0.25 + 3.75 * i as f64 / 24.0;
        let (f, sol) = growth_rate_with_solution(h, &bundle, &opts)?;
        println!(
            "  {h:5.3}  {f:+.6e}  {:.6}  {:.6}",
            sol.u.value(0),
            sol.interface_concentration()
        );
        if let Some((hp, fp)) = prev {
            if fp > 0.0 && f < 0.0 {
                bracket = Some((hp, h));
            }
        }
        prev = Some((h, f));
    }

    match bracket {
        Some((lo, hi)) => println!("\nf changes sign on [{lo:.3}, {hi:.3}] — an equilibrium height sits inside"),
        None => println!("\nno sign change in the scanned range"),
    }
    Ok(())
}
