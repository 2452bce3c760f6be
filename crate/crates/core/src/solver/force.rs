//! External force F and viscosity relations.

use serde::{Deserialize, Serialize};

use crate::lattice::MacroState;

use super::SolverError;

/// Angular velocity of the earth (rad/s).
pub const EARTH_ANGULAR_VELOCITY: f64 = 0.000073;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Friction {
    /// Constant bed friction coefficient C_b.
    Constant { cb: f64 },
    /// Manning roughness n_b: C_b = g/C_z², C_z = h^{1/6}/n_b.
    Manning { nb: f64 },
}

impl Friction {
    pub fn coefficient(&self, g: f64, h: f64) -> f64 {
        match *self {
            Friction::Constant { cb } => cb,
            Friction::Manning { nb } => {
                let cz = h.powf(1.0 / 6.0) / nb;
                g / (cz * cz)
            }
        }
    }
}

/// Source-term parameters. Each term is switched off when its field is
/// `None` (or `bed_slope` is false).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceParams {
    /// ρ₀
    pub water_density: f64,
    /// ρ_a
    pub air_density: f64,
    pub bed_slope: bool,
    pub friction: Option<Friction>,
    /// Wind velocity 10 m above the surface.
    pub wind: Option<[f64; 2]>,
    /// Coriolis parameter Γ = 2ω sin φ.
    pub coriolis: Option<f64>,
}

impl Default for ForceParams {
    fn default() -> Self {
        Self {
            water_density: 1000.0,
            air_density: 1.2,
            bed_slope: false,
            friction: None,
            wind: None,
            coriolis: None,
        }
    }
}

impl ForceParams {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn bed_slope_only() -> Self {
        Self {
            bed_slope: true,
            ..Self::default()
        }
    }

    pub fn is_active(&self) -> bool {
        self.bed_slope || self.friction.is_some() || self.wind.is_some() || self.coriolis.is_some()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.water_density > 0.0) {
            return Err(SolverError::Config("water density must be positive".into()));
        }
        Ok(())
    }
}

/// Γ = 2ω sin φ for latitude φ in radians.
pub fn coriolis_parameter(latitude: f64) -> f64 {
    2.0 * EARTH_ANGULAR_VELOCITY * latitude.sin()
}

/// C_w = ρ_a (0.75 + 0.067|w|) × 10⁻³.
pub fn wind_drag_coefficient(air_density: f64, wind: [f64; 2]) -> f64 {
    let speed = (wind[0] * wind[0] + wind[1] * wind[1]).sqrt();
    air_density * (0.75 + 0.067 * speed) * 1e-3
}

/// Force per unit density F for depth-averaged momentum:
/// −gh∇Z + (T_w − T_b)/ρ₀ + Coriolis.
pub fn force_vector(
    state: &MacroState,
    force: &ForceParams,
    bed_gradient: [f64; 2],
    g: f64,
) -> [f64; 2] {
    let h = state.h;
    let [u1, u2] = state.u;
    let mut f = [0.0, 0.0];
    if force.bed_slope {
        f[0] -= g * h * bed_gradient[0];
        f[1] -= g * h * bed_gradient[1];
    }
    if let Some(fr) = force.friction {
        let cb = fr.coefficient(g, h);
        let speed = (u1 * u1 + u2 * u2).sqrt();
        f[0] -= cb * u1 * speed;
        f[1] -= cb * u2 * speed;
    }
    if let Some(w) = force.wind {
        let cw = wind_drag_coefficient(force.air_density, w);
        let speed = (w[0] * w[0] + w[1] * w[1]).sqrt();
        f[0] += cw * w[0] * speed;
        f[1] += cw * w[1] * speed;
    }
    if let Some(gamma) = force.coriolis {
        f[0] -= gamma * h * u2;
        f[1] += gamma * h * u1;
    }
    f
}

/// ν̂ = (2τ̂ − 1)/6.
pub fn lb_viscosity(tau_hat: f64) -> f64 {
    (2.0 * tau_hat - 1.0) / 6.0
}

/// ν = ν̂ e² Δt.
pub fn physical_viscosity(nu_hat: f64, e: f64, dt: f64) -> f64 {
    nu_hat * e * e * dt
}
