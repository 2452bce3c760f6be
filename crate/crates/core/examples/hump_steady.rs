//! Steady subcritical flow over a parabolic hump, compared with the
//! Bernoulli solution.
//!
//! Usage: `cargo run --release --example hump_steady -- [g_hat] [lattice]`
//! (defaults 0.009 and 250).

use swlbm::benchmarks::run_hump;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let g: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.009);
    let lattice: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(250);

    let report = run_hump(g, lattice)?;
    println!(
        "g_hat = {g}, lattice = {lattice}: {:?} after {} iterations, R = {:.3e}",
        report.outcome, report.iterations, report.final_r
    );
    if let Some(l2) = report.depth_l2 {
        println!("relative L2 depth error: {l2:.3e}");
    }
    if let Some(d) = &report.discharge {
        println!(
            "discharge relative to inflow {:.4}: max deviation {:.2e}, L2 {:.2e}",
            d.q_in, d.max_deviation, d.l2_deviation
        );
    }
    println!("{:>8} {:>10} {:>10}", "x", "h", "h_exact");
    let stride = (report.profile.len() / 10).max(1);
    for p in report.profile.iter().step_by(stride) {
        println!("{:>8.3} {:>10.5} {:>10.5}", p.x, p.h_numeric, p.h_analytic);
    }
    Ok(())
}
