//! Tidal wave entering a channel with a varying bed, compared with the
//! asymptotic solution at t = 9117.5 s.
//!
//! The flow is one dimensional, so a few rows suffice:
//! `cargo run --release --example tidal_wave -- [lattice] [rows]`.

use swlbm::benchmarks::{run_tidal, TIDAL_TIME};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let lattice: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(500);
    let rows: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);

    let report = run_tidal(lattice, rows)?;
    println!(
        "lattice {lattice} (dx = {} m), {} steps to t = {} s (target {TIDAL_TIME})",
        report.dx, report.steps, report.t
    );
    println!(
        "L2 depth error {:.3e}, L2 velocity error {:.3e}",
        report.depth_l2, report.velocity_l2
    );
    for p in report.profile.iter().step_by(report.profile.len() / 8) {
        println!(
            "x = {:>7.0}  h = {:>8.4} ({:>8.4})  u = {:>8.5} ({:>8.5})",
            p.x, p.h_numeric, p.h_analytic, p.u_numeric, p.u_analytic
        );
    }
    Ok(())
}
