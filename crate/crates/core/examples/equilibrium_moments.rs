//! Build D2Q9 equilibria for several λ and check that they all carry the same
//! depth, momentum and momentum flux.

use swlbm::lattice::{equilibrium, moments, momentum_flux, velocity_set, EquilibriumSpec, Model};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (g, e) = (9.81, 15.0);
    let state = swlbm::lattice::MacroState::new(2.0, [1.1, -0.4]);
    let vs = velocity_set(Model::D2Q9, e)?;

    for lambda in [-2.0, 1.0, 4.0, 7.0] {
        let spec = EquilibriumSpec::lambda_model(g, e, lambda)?;
        let f = equilibrium(&spec, &state)?;
        let m = moments(&f, &vs)?;
        let pi = momentum_flux(&f, &vs)?;
        println!(
            "lambda = {lambda:>4}: h = {:.12}, u = ({:.12}, {:.12}), Pxx = {:.9}, Pxy = {:.9}, f0 = {:.6}",
            m.h, m.u[0], m.u[1], pi[0][0], pi[0][1], f[0]
        );
    }
    let h = state.h;
    println!(
        "expected Pxx = g h^2/2 + h u^2 = {:.9}, Pxy = h u v = {:.9}",
        0.5 * g * h * h + h * state.u[0] * state.u[0],
        h * state.u[0] * state.u[1]
    );
    Ok(())
}
