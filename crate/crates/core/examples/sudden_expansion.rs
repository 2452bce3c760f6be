//! Flow through a sudden expansion. Prints the recirculation strength next
//! to each wall and writes the velocity field.
//!
//! Usage: `cargo run --release --example sudden_expansion -- [g_hat] [lambda]`

use swlbm::benchmarks::run_expansion;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let g: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.08);
    let lambda: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.0);

    let (sim, report) = run_expansion(g, lambda)?;
    println!(
        "g_hat = {g}, lambda = {lambda}: {:?} after {} iterations",
        report.outcome, report.iterations
    );
    println!(
        "min u1 near the south wall {:.4}, north wall {:.4}, recirculation: {}",
        report.min_u1_south,
        report.min_u1_north,
        report.recirculates()
    );
    let path = "expansion_fields.csv";
    sim.write_fields_csv(std::fs::File::create(path)?)?;
    println!("wrote {path}");
    Ok(())
}
