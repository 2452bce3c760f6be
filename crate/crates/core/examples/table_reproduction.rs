//! Rerun one results table and print the CSV.
//!
//! Usage: `cargo run --release --example table_reproduction -- T4`

use swlbm::benchmarks::{reproduce_table, TableId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let id: TableId = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "T4".into())
        .parse()?;
    let report = reproduce_table(id, 2)?;
    report.write_csv(std::io::stdout().lock())?;
    let matched = report
        .rows
        .iter()
        .filter(|r| r.classification_match)
        .count();
    eprintln!("{matched}/{} classifications match", report.rows.len());
    Ok(())
}
