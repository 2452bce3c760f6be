//! Verdicts for a few equilibria, side by side with the closed-form gravity
//! intervals.
//!
//! Run with `cargo run --example stability_check`.

use swlbm::lattice::{EquilibriumSpec, Family};
use swlbm::stability::{stable_g_interval, verify_stability, DEFAULT_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (e, hbar, tau) = (1.0, 1.0, 1.0);
    let cases = [
        (Family::D2Q9Salmon, 0.3, None),
        (Family::D2Q9Salmon, 0.7, None),
        (Family::D2Q7, 0.3, None),
        (Family::D2Q9Lambda, 1.0 / 3.0, Some(3.0)),
        (Family::D2Q9Lambda, 0.2, Some(-2.0)),
        (Family::D2Q9Standard, 0.5, None),
    ];
    for (family, g, lambda) in cases {
        let spec = EquilibriumSpec::new(family, g, e, lambda.unwrap_or(1.0))?;
        let report = verify_stability(&spec, hbar, tau, DEFAULT_TOL)?;
        let interval = stable_g_interval(family, hbar, e, lambda)
            .map(|i| format!("{i:?}"))
            .unwrap_or_else(|err| format!("n/a ({err})"));
        println!(
            "{:<14} g = {:.4} lambda = {:<5} -> {:<13} interval {}",
            family.name(),
            g,
            lambda.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            report.verdict.to_string(),
            interval
        );
    }
    Ok(())
}
