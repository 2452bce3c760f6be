//! Decay of a sinusoidal shear wave in a periodic box, measured against the
//! lattice viscosity (2τ̂ − 1)/6.
//!
//! Usage: `cargo run --release --example shear_wave_viscosity -- [tau_hat]`

use std::f64::consts::PI;

use swlbm::lattice::{EquilibriumSpec, MacroState};
use swlbm::solver::{
    lb_viscosity, BedProfile, Boundaries, ForceParams, GridSpec, InitialCondition, Simulation,
    SimulationConfig,
};

const NX: usize = 4;
const NY: usize = 64;
const AMPLITUDE: f64 = 1e-4;

fn amplitude(sim: &Simulation) -> f64 {
    let k = 2.0 * PI / NY as f64;
    let mut s = 0.0;
    for y in 0..NY {
        for x in 0..NX {
            s += sim.state(x, y).u[0] * (k * y as f64).sin();
        }
    }
    2.0 * s / (NX * NY) as f64
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tau: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.8);
    let config = SimulationConfig {
        equilibrium: EquilibriumSpec::salmon(0.1, 1.0)?,
        grid: GridSpec {
            nx: NX,
            ny: NY,
            dx: 1.0,
            dt: 1.0,
            x0: 0.0,
            y0: 0.0,
        },
        tau_hat: tau,
        boundaries: Boundaries::periodic(),
        solids: Vec::new(),
        bed: BedProfile::Flat,
        initial: InitialCondition::Uniform {
            h: 1.0,
            u: [0.0, 0.0],
        },
        force: ForceParams::default(),
        convergence_threshold: 1e-12,
        max_iterations: 1,
        output_cadence: 0,
    };
    let mut sim = Simulation::new(config)?;
    let k = 2.0 * PI / NY as f64;
    for y in 0..NY {
        for x in 0..NX {
            let u = AMPLITUDE * (k * y as f64).sin();
            sim.set_state(x, y, MacroState::new(1.0, [u, 0.0]))?;
        }
    }
    let a0 = amplitude(&sim);
    let steps = 2000;
    for _ in 0..steps {
        sim.step()?;
    }
    let a = amplitude(&sim);
    let measured = -(a / a0).ln() / (k * k * steps as f64);
    let expected = lb_viscosity(tau);
    println!(
        "tau_hat = {tau}: measured nu = {measured:.6}, expected {expected:.6}, error {:.2}%",
        100.0 * (measured / expected - 1.0)
    );
    Ok(())
}
