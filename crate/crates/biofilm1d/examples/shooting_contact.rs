//! The shooting reduction of the steady problem, shown directly.
//!
//! For a trial wall concentration `c₀`, integrate `κ c'' = r̃(c)` upward from
//! `c(0) = c₀`, `c'(0) = 0` until the profile meets the descending ray
//! `c* − (Lb/κ_L) z` — the contact height `h(c₀)` where the interface flux
//! condition can hold. The flux mismatch `B(c₀) = c'(h) − (b/κ) h` is
//! negative for starved walls and positive for saturated ones; it is
//! strictly increasing (this is what the certificate checks), so its single
//! zero pins the equilibrium. The table shows the whole geometry; the
//! subsistence wall value `c̲` (where `r(c̲) = b`) caps the physically
//! admissible `c₀` range from above.

use biofilm1d::shooting::{shoot, subsistence_concentration, ShootOptions};
use biofilm1d::ModelBundle;

fn main() -> biofilm1d::Result<()> {
    let bundle = ModelBundle::tanh_reference();
    let opts = ShootOptions::default();

    let c_bar = subsistence_concentration(&bundle)?;
    println!("subsistence wall value c̲ = {c_bar:.9} (r(c̲) = b)\n");

    println!("   c0        contact h(c0)   mismatch B(c0)");
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..=12 {
        let c0 = c_bar * i as f64 / 13.0;
        let state = shoot(c0, &bundle, &opts)?;
        let h = state.contact_height()?;
        let b_val = state.b_value(h);
        println!("  {c0:.6}   {h:12.8}   {b_val:+.8}");
        if let Some((cp, bp)) = prev {
            if bp < 0.0 && b_val > 0.0 {
                bracket = Some((cp, c0));
            }
        }
        prev = Some((c0, b_val));
    }

    if let Some((lo, hi)) = bracket {
        println!("\nB changes sign on c0 ∈ [{lo:.6}, {hi:.6}]: the equilibrium wall value sits inside");
    }
    Ok(())
}
