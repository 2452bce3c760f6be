use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::lattice::{EquilibriumSpec, Model};

use super::force::ForceParams;
use super::SolverError;

/// Convergence threshold on R used when none is given.
pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 5e-6;

/// Lattice extents and spacing. Node (i, j) sits at (x0 + iΔx, y0 + jΔx).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dt: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub y0: f64,
}

impl GridSpec {
    pub fn lattice_speed(&self) -> f64 {
        self.dx / self.dt
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dx
    }

    /// Convert a reduced gravity given in lattice units (Δx = Δt = 1) to
    /// physical units.
    pub fn gravity_from_lattice(&self, g_lattice: f64) -> f64 {
        g_lattice * self.dx / (self.dt * self.dt)
    }

    pub fn gravity_to_lattice(&self, g: f64) -> f64 {
        g * self.dt * self.dt / self.dx
    }
}

/// Half-open rectangle of solid nodes in index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolidRect {
    pub x_start: usize,
    pub x_end: usize,
    pub y_start: usize,
    pub y_end: usize,
}

impl SolidRect {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.x_start && i < self.x_end && j >= self.y_start && j < self.y_end
    }
}

/// Bed elevation Z(x, y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BedProfile {
    Flat,
    /// Parabolic bump: Z = height − curvature·(x − center)² for
    /// |x − center| ≤ half_width, zero elsewhere.
    Hump {
        center: f64,
        height: f64,
        curvature: f64,
        half_width: f64,
    },
    /// Z = H(0) − H(x) with H(x) = 50.5 − 40x/L + 10 sin(π(4x/L − ½)).
    TidalChannel {
        length: f64,
    },
}

impl BedProfile {
    pub fn elevation(&self, x: f64, _y: f64) -> f64 {
        match *self {
            BedProfile::Flat => 0.0,
            BedProfile::Hump {
                center,
                height,
                curvature,
                half_width,
            } => {
                if (x - center).abs() <= half_width {
                    height - curvature * (x - center) * (x - center)
                } else {
                    0.0
                }
            }
            BedProfile::TidalChannel { length } => {
                tidal_reference_depth(0.0, length) - tidal_reference_depth(x, length)
            }
        }
    }
}

/// H(x) = 50.5 − 40x/L + 10 sin(π(4x/L − ½)).
pub fn tidal_reference_depth(x: f64, length: f64) -> f64 {
    50.5 - 40.0 * x / length + 10.0 * (PI * (4.0 * x / length - 0.5)).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Uniform {
        h: f64,
        u: [f64; 2],
    },
    /// Flat free surface: h = level − Z.
    FreeSurface {
        level: f64,
        u: [f64; 2],
    },
}

/// Depth imposed at an open boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DepthSignal {
    Constant {
        h: f64,
    },
    /// h(t) = mean − amplitude·sin(2πt/period + phase).
    Harmonic {
        mean: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    },
}

impl DepthSignal {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            DepthSignal::Constant { h } => h,
            DepthSignal::Harmonic {
                mean,
                amplitude,
                period,
                phase,
            } => mean - amplitude * (2.0 * PI * t / period + phase).sin(),
        }
    }
}

/// Boundary treatment of one side of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SideBc {
    Periodic,
    /// Bounce-back.
    NoSlip,
    /// Zero normal gradient of the populations.
    Slip,
    /// Imposed discharge per unit width into the domain. A positive `ramp`
    /// raises the discharge linearly from zero over that many seconds.
    Discharge {
        q: f64,
        #[serde(default)]
        ramp: f64,
    },
    /// Imposed depth; velocity extrapolated.
    Depth {
        signal: DepthSignal,
    },
    /// Imposed normal velocity (positive into the domain); depth extrapolated.
    Velocity {
        u: f64,
    },
}

/// q·min(1, t/ramp), or q when `ramp` is not positive.
pub fn ramped(q: f64, ramp: f64, t: f64) -> f64 {
    if ramp > 0.0 && t < ramp {
        q * t / ramp
    } else {
        q
    }
}

impl SideBc {
    pub fn is_open(&self) -> bool {
        matches!(
            self,
            SideBc::Discharge { .. } | SideBc::Depth { .. } | SideBc::Velocity { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub west: SideBc,
    pub east: SideBc,
    pub south: SideBc,
    pub north: SideBc,
}

impl Boundaries {
    pub fn periodic() -> Self {
        Self {
            west: SideBc::Periodic,
            east: SideBc::Periodic,
            south: SideBc::Periodic,
            north: SideBc::Periodic,
        }
    }

    pub fn closed_box() -> Self {
        Self {
            west: SideBc::NoSlip,
            east: SideBc::NoSlip,
            south: SideBc::NoSlip,
            north: SideBc::NoSlip,
        }
    }
}

/// Everything needed to run a case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub equilibrium: EquilibriumSpec,
    pub grid: GridSpec,
    /// Scaled relaxation time τ/Δt.
    pub tau_hat: f64,
    pub boundaries: Boundaries,
    #[serde(default)]
    pub solids: Vec<SolidRect>,
    pub bed: BedProfile,
    pub initial: InitialCondition,
    #[serde(default)]
    pub force: ForceParams,
    #[serde(default = "default_threshold")]
    pub convergence_threshold: f64,
    pub max_iterations: u64,
    /// Steps between recorded error reports; 0 records only the last one.
    #[serde(default)]
    pub output_cadence: u64,
}

fn default_threshold() -> f64 {
    DEFAULT_CONVERGENCE_THRESHOLD
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        self.equilibrium.validate()?;
        if self.equilibrium.model() != Model::D2Q9 {
            return Err(SolverError::Config(
                "the square-grid solver streams D2Q9 populations only".into(),
            ));
        }
        let g = &self.grid;
        if g.nx < 3 || g.ny < 1 {
            return Err(SolverError::Config(format!(
                "grid {}x{} too small",
                g.nx, g.ny
            )));
        }
        if !(g.dx > 0.0 && g.dt > 0.0 && g.dx.is_finite() && g.dt.is_finite()) {
            return Err(SolverError::Config("dx and dt must be positive".into()));
        }
        let e = g.lattice_speed();
        if (e - self.equilibrium.e).abs() > 1e-12 * e {
            return Err(SolverError::Config(format!(
                "lattice speed dx/dt = {e} does not match equilibrium e = {}",
                self.equilibrium.e
            )));
        }
        if !(self.tau_hat > 0.5 && self.tau_hat.is_finite()) {
            return Err(SolverError::Config(format!(
                "scaled relaxation time must exceed 1/2, got {}",
                self.tau_hat
            )));
        }
        let b = &self.boundaries;
        let wp = b.west == SideBc::Periodic;
        let ep = b.east == SideBc::Periodic;
        let sp = b.south == SideBc::Periodic;
        let np = b.north == SideBc::Periodic;
        if wp != ep || sp != np {
            return Err(SolverError::Config(
                "periodic sides must come in opposite pairs".into(),
            ));
        }
        if (b.west.is_open() || b.east.is_open()) && (b.south.is_open() || b.north.is_open()) {
            return Err(SolverError::Config(
                "open boundaries on both axes are not supported".into(),
            ));
        }
        if !(self.convergence_threshold > 0.0) {
            return Err(SolverError::Config(
                "convergence threshold must be positive".into(),
            ));
        }
        self.force.validate()?;
        Ok(())
    }
}
