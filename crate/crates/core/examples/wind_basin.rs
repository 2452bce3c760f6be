//! Wind set-up in a closed basin with bed friction and Coriolis forcing,
//! read from a TOML config.
//!
//! Usage: `cargo run --release --example wind_basin -- [config.toml]`.
//! Without an argument a built-in basin is used. The wind force per unit
//! density is C_w w|w| with C_w = ρ_a(0.75 + 0.067|w|)·10⁻³, which is strong,
//! so the built-in case uses a light breeze.

use swlbm::solver::{coriolis_parameter, run_to_steady, SimulationConfig};

const BASIN: &str = r#"
tau_hat = 0.8
max_iterations = 200000
convergence_threshold = 1e-9
output_cadence = 5000

[equilibrium]
family = "D2Q9Salmon"
g = 9.81
e = 40.0
lambda = 1.0

[grid]
nx = 100
ny = 20
dx = 20.0
dt = 0.5

[boundaries]
west = { kind = "no_slip" }
east = { kind = "no_slip" }
south = { kind = "no_slip" }
north = { kind = "no_slip" }

[bed]
kind = "flat"

[initial]
kind = "uniform"
h = 20.0
u = [0.0, 0.0]

[force]
water_density = 1000.0
air_density = 1.2
bed_slope = false
wind = [2.0, 0.0]
friction = { kind = "manning", nb = 0.03 }
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config: SimulationConfig = match std::env::args().nth(1) {
        Some(path) => toml::from_str(&std::fs::read_to_string(path)?)?,
        None => toml::from_str(BASIN)?,
    };
    if config.force.coriolis.is_none() {
        config.force.coriolis = Some(coriolis_parameter(45f64.to_radians()));
    }
    let (sim, res) = run_to_steady(config)?;
    println!(
        "{:?} after {} steps, R = {:.3e}",
        res.outcome, res.iterations, res.final_r
    );

    let mid = sim.ny() / 2;
    let west = sim.state(1, mid).h;
    let east = sim.state(sim.nx() - 2, mid).h;
    println!("depth near the upwind wall {west:.5} m, downwind wall {east:.5} m");
    println!("set-up across the basin {:.2} mm", 1000.0 * (east - west));
    Ok(())
}
