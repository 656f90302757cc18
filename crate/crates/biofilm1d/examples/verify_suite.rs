//! Run every packaged verification check and print the full reports.
//!
//! Each check reproduces one qualitative regime of the model on a reference
//! configuration and measures named quantities against targets — closed
//! forms and boundary-layer limits where they exist, tight a-priori bounds
//! otherwise. The same checks back the `verify` subcommand of the binary.

use biofilm1d::verify::{
    check_convergence_to_equilibrium, check_extinction, check_large_h_limit,
    check_oscillatory_convergence, check_small_h_limit, extinction_reference,
    EquilibriumConvergenceOptions, ExtinctionOptions, LargeHOptions, OscillationOptions,
    SmallHOptions,
};
use biofilm1d::ModelBundle;

fn main() -> biofilm1d::Result<()> {
    let bundle = ModelBundle::tanh_reference();
    let mut failures = 0;

    let reports = [
        check_small_h_limit(&bundle, &SmallHOptions::default())?,
        check_large_h_limit(&bundle, &LargeHOptions::default())?,
        check_extinction(&extinction_reference(), &ExtinctionOptions::default())?,
        check_convergence_to_equilibrium(&bundle, &EquilibriumConvergenceOptions::default())?,
        check_oscillatory_convergence(&OscillationOptions::default())?,
    ];
    for report in &reports {
        print!("{report}");
        println!();
        if !report.pass {
            failures += 1;
        }
    }

    println!(
        "{} of {} checks passed",
        reports.len() - failures,
        reports.len()
    );
    std::process::exit(if failures == 0 { 0 } else { 2 });
}
