//! Verdict map of the λ family over a (g, λ) grid, written as CSV.
//!
//! Usage: `cargo run --example stability_scan -- [out.csv]`

use swlbm::lattice::{EquilibriumSpec, Family};
use swlbm::stability::{scan, stable_g_interval, Verdict, DEFAULT_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "lambda_scan.csv".into());
    let hbar = 1.0;
    let e = 1.0;
    // steps of 1/30 so that g = 1/3 is on the grid
    let g_grid: Vec<f64> = (1..=30).map(|i| i as f64 / 30.0).collect();
    let lambda_grid: Vec<f64> = (-4..=8).map(f64::from).collect();

    let template = EquilibriumSpec::lambda_model(0.1, e, 1.0)?;
    let map = scan(&template, &g_grid, &lambda_grid, hbar, 1.0, DEFAULT_TOL)?;
    map.save_csv(std::path::Path::new(&out))?;

    // one text row per λ: '+' stable, '.' unstable, '?' indeterminate, ' ' invalid
    for (row, lambda) in map.verdicts().chunks(g_grid.len()).zip(&lambda_grid) {
        let line: String = row
            .iter()
            .map(|v| match v {
                Some(Verdict::Stable) => '+',
                Some(Verdict::Unstable) => '.',
                Some(Verdict::Indeterminate) => '?',
                None => ' ',
            })
            .collect();
        let interval = stable_g_interval(Family::D2Q9Lambda, hbar, e, Some(*lambda))
            .map(|i| format!("{i:?}"))
            .unwrap_or_default();
        println!("{lambda:>3} |{line}| {interval}");
    }
    println!("wrote {out}");
    Ok(())
}
