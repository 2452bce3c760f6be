//! Flow over a hump, a tidal wave in a channel and flow through a sudden
//! expansion, with reference solutions and table sweeps.
//!
//! Gravity arguments are reduced gravities ĝ in lattice units (Δx = Δt = 1,
//! depth measured in Δx). The physical value used by the solver is
//! g = ĝ Δx / Δt².

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{discharge_profile, l2_error, DischargeProfile};
use crate::lattice::{EquilibriumSpec, LatticeError, MacroState};
use crate::solver::{
    tidal_reference_depth, BedProfile, Boundaries, CellType, DepthSignal, ForceParams, GridSpec,
    InitialCondition, SideBc, Simulation, SimulationConfig, SolidRect, SolverError, SteadyOutcome,
    SteadyResult, DEFAULT_CONVERGENCE_THRESHOLD,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("unsupported lattice {0}; expected one of {1}")]
    UnsupportedLattice(usize, &'static str),
    #[error("no subcritical depth at x = {x}")]
    Regime { x: f64 },
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(e.to_string())
    }
}

impl From<csv::Error> for BenchError {
    fn from(e: csv::Error) -> Self {
        BenchError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    Hump,
    Tidal,
    Expansion,
}

// ---------------------------------------------------------------- hump

pub const HUMP_LENGTH: f64 = 25.0;
pub const HUMP_DISCHARGE: f64 = 4.42;
pub const HUMP_OUTLET_DEPTH: f64 = 2.0;
pub const HUMP_E: f64 = 15.0;
pub const HUMP_TAU: f64 = 1.5;
pub const HUMP_ROWS: usize = 50;
/// Seconds over which the inflow discharge is raised from zero. Switching
/// 4.42 m²/s on at once into still water drives the crest supercritical
/// during the transient, which the scheme does not survive.
pub const HUMP_INFLOW_RAMP: f64 = 60.0;
pub const HUMP_LATTICES: [usize; 3] = [125, 250, 500];
/// Iteration budget for steady hump runs.
pub const HUMP_MAX_ITERATIONS: u64 = 150_000;

pub fn hump_bed() -> BedProfile {
    BedProfile::Hump {
        center: 10.0,
        height: 0.2,
        curvature: 0.05,
        half_width: 2.0,
    }
}

fn hump_grid(lattice: usize) -> Result<GridSpec, BenchError> {
    if !HUMP_LATTICES.contains(&lattice) {
        return Err(BenchError::UnsupportedLattice(lattice, "125, 250, 500"));
    }
    let dx = HUMP_LENGTH / lattice as f64;
    Ok(GridSpec {
        nx: lattice + 1,
        ny: HUMP_ROWS,
        dx,
        dt: dx / HUMP_E,
        x0: 0.0,
        y0: 0.0,
    })
}

fn hump_config(grid: GridSpec, equilibrium: EquilibriumSpec) -> SimulationConfig {
    SimulationConfig {
        equilibrium,
        grid,
        tau_hat: HUMP_TAU,
        boundaries: Boundaries {
            west: SideBc::Discharge {
                q: HUMP_DISCHARGE,
                ramp: HUMP_INFLOW_RAMP,
            },
            east: SideBc::Depth {
                signal: DepthSignal::Constant {
                    h: HUMP_OUTLET_DEPTH,
                },
            },
            south: SideBc::Slip,
            north: SideBc::Slip,
        },
        solids: vec![],
        bed: hump_bed(),
        initial: InitialCondition::FreeSurface {
            level: HUMP_OUTLET_DEPTH,
            u: [0.0, 0.0],
        },
        force: ForceParams::bed_slope_only(),
        convergence_threshold: DEFAULT_CONVERGENCE_THRESHOLD,
        max_iterations: HUMP_MAX_ITERATIONS,
        output_cadence: 1000,
    }
}

/// Hump case on a `lattice`×50 grid with the λ = 1 equilibrium.
pub fn hump_case(g: f64, lattice: usize) -> Result<SimulationConfig, BenchError> {
    let grid = hump_grid(lattice)?;
    let spec = EquilibriumSpec::salmon(grid.gravity_from_lattice(g), HUMP_E)?;
    Ok(hump_config(grid, spec))
}

/// Hump case with the λ-parametrised equilibrium.
pub fn hump_lambda_case(
    g: f64,
    lattice: usize,
    lambda: f64,
) -> Result<SimulationConfig, BenchError> {
    let grid = hump_grid(lattice)?;
    let spec = EquilibriumSpec::lambda_model(grid.gravity_from_lattice(g), HUMP_E, lambda)?;
    Ok(hump_config(grid, spec))
}

/// Steady subcritical depth over the bed from Bernoulli and continuity:
/// h³ + (z − E)h² + q²/(2g) = 0 with E = h_out + q²/(2g h_out²).
pub fn hump_analytic_depth(
    x: f64,
    q: f64,
    h_outlet: f64,
    g: f64,
    bed: &BedProfile,
) -> Result<f64, BenchError> {
    let z = bed.elevation(x, 0.0);
    let c = q * q / (2.0 * g);
    let energy = h_outlet + c / (h_outlet * h_outlet);
    let b = z - energy;
    // depressed cubic t³ + pt + r = 0 with h = t − b/3
    let p = -b * b / 3.0;
    let r = 2.0 * b * b * b / 27.0 + c;
    if p >= 0.0 || 4.0 * p * p * p + 27.0 * r * r > 0.0 {
        return Err(BenchError::Regime { x });
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * r / (p * m)).clamp(-1.0, 1.0);
    let mut h = m * (arg.acos() / 3.0).cos() - b / 3.0;
    for _ in 0..3 {
        let res = h * h * h + b * h * h + c;
        let der = 3.0 * h * h + 2.0 * b * h;
        if der == 0.0 {
            break;
        }
        h -= res / der;
    }
    let critical = (q * q / g).cbrt();
    if !(h > critical) {
        return Err(BenchError::Regime { x });
    }
    Ok(h)
}

/// One point of a longitudinal profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub x: f64,
    pub h_numeric: f64,
    pub h_analytic: f64,
    pub u_numeric: f64,
    pub u_analytic: f64,
}

pub fn write_profile_csv<W: Write>(profile: &[ProfilePoint], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for p in profile {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumpReport {
    pub g: f64,
    pub lattice: usize,
    pub outcome: SteadyOutcome,
    pub iterations: u64,
    pub final_r: f64,
    /// Relative L² depth error against the Bernoulli solution.
    pub depth_l2: Option<f64>,
    pub discharge: Option<DischargeProfile>,
    pub profile: Vec<ProfilePoint>,
}

fn columns(sim: &Simulation) -> Vec<(usize, Vec<usize>)> {
    let (nx, ny) = (sim.nx(), sim.ny());
    (0..nx)
        .map(|x| {
            let ids = (0..ny)
                .map(|y| y * nx + x)
                .filter(|&id| sim.mask()[id] != CellType::Solid)
                .collect();
            (x, ids)
        })
        .collect()
}

/// Compare a steady hump state with the analytic solution.
pub fn hump_report(sim: &Simulation, g: f64, lattice: usize, res: &SteadyResult) -> HumpReport {
    let cfg = sim.config();
    let grid = cfg.grid;
    let g_phys = cfg.equilibrium.g;
    let bed = cfg.bed;
    let mut report = HumpReport {
        g,
        lattice,
        outcome: res.outcome,
        iterations: res.iterations,
        final_r: res.final_r,
        depth_l2: None,
        discharge: None,
        profile: vec![],
    };
    if !res.converged() {
        return report;
    }
    let analytic: Result<Vec<f64>, BenchError> = (0..grid.nx)
        .map(|x| hump_analytic_depth(grid.x(x), HUMP_DISCHARGE, HUMP_OUTLET_DEPTH, g_phys, &bed))
        .collect();
    let h = sim.depth();
    let u = sim.velocity();
    let cols = columns(sim);
    if let Ok(analytic) = analytic {
        let mut num = Vec::new();
        let mut ana = Vec::new();
        for (x, ids) in &cols {
            for &id in ids {
                num.push(h[id]);
                ana.push(analytic[*x]);
            }
        }
        report.depth_l2 = l2_error(&num, &ana).ok();
        let mid = sim.ny() / 2;
        report.profile = (0..grid.nx)
            .map(|x| {
                let id = mid * grid.nx + x;
                ProfilePoint {
                    x: grid.x(x),
                    h_numeric: h[id],
                    h_analytic: analytic[x],
                    u_numeric: u[id][0],
                    u_analytic: HUMP_DISCHARGE / analytic[x],
                }
            })
            .collect();
    }
    report.discharge = Some(discharge_profile(
        cols.iter().map(|(x, ids)| {
            (
                grid.x(*x),
                ids.iter().map(|&id| (h[id], u[id][0])).collect::<Vec<_>>(),
            )
        }),
        HUMP_DISCHARGE,
    ));
    report
}

pub fn run_hump(g: f64, lattice: usize) -> Result<HumpReport, BenchError> {
    let mut sim = Simulation::new(hump_case(g, lattice)?)?;
    let res = sim.run_to_steady();
    Ok(hump_report(&sim, g, lattice, &res))
}

// ---------------------------------------------------------------- tidal

pub const TIDAL_LENGTH: f64 = 14_000.0;
pub const TIDAL_E: f64 = 200.0;
pub const TIDAL_TAU: f64 = 0.6;
pub const TIDAL_ROWS: usize = 50;
/// Comparison time (s).
pub const TIDAL_TIME: f64 = 9117.5;
pub const TIDAL_LATTICES: [usize; 3] = [500, 750, 1000];

/// Grid spacing for a tidal lattice label.
pub fn tidal_spacing(lattice: usize) -> Result<f64, BenchError> {
    match lattice {
        500 => Ok(28.0),
        750 => Ok(14.0),
        1000 => Ok(7.0),
        _ => Err(BenchError::UnsupportedLattice(lattice, "500, 750, 1000")),
    }
}

/// Reduced gravity 1/(3e) in lattice units.
pub fn tidal_gravity() -> f64 {
    1.0 / (3.0 * TIDAL_E)
}

/// Inflow depth h(0, t) = H(0) + 4 − 4 sin(π(4t/86400 − ½)).
pub fn tidal_inflow() -> DepthSignal {
    DepthSignal::Harmonic {
        mean: tidal_reference_depth(0.0, TIDAL_LENGTH) + 4.0,
        amplitude: 4.0,
        period: 43_200.0,
        phase: -PI / 2.0,
    }
}

pub fn tidal_case(lattice: usize) -> Result<SimulationConfig, BenchError> {
    tidal_case_rows(lattice, TIDAL_ROWS)
}

/// Tidal case with `rows` nodes across. The flow is uniform across the
/// periodic width, so every row evolves identically.
pub fn tidal_case_rows(lattice: usize, rows: usize) -> Result<SimulationConfig, BenchError> {
    let dx = tidal_spacing(lattice)?;
    let grid = GridSpec {
        nx: (TIDAL_LENGTH / dx).round() as usize + 1,
        ny: rows,
        dx,
        dt: dx / TIDAL_E,
        x0: 0.0,
        y0: 0.0,
    };
    let spec =
        EquilibriumSpec::lambda_model(grid.gravity_from_lattice(tidal_gravity()), TIDAL_E, 1.0)?;
    let steps = (TIDAL_TIME / grid.dt).round() as u64;
    Ok(SimulationConfig {
        equilibrium: spec,
        grid,
        tau_hat: TIDAL_TAU,
        boundaries: Boundaries {
            west: SideBc::Depth {
                signal: tidal_inflow(),
            },
            east: SideBc::Velocity { u: 0.0 },
            south: SideBc::Periodic,
            north: SideBc::Periodic,
        },
        solids: vec![],
        bed: BedProfile::TidalChannel {
            length: TIDAL_LENGTH,
        },
        // The reference solution at t = 0 (h = H + 8, u = 0), which matches
        // the inflow depth; starting from h = H would open with an 8 m bore.
        initial: InitialCondition::FreeSurface {
            level: tidal_reference_depth(0.0, TIDAL_LENGTH) + 8.0,
            u: [0.0, 0.0],
        },
        force: ForceParams::bed_slope_only(),
        convergence_threshold: DEFAULT_CONVERGENCE_THRESHOLD,
        max_iterations: steps,
        output_cadence: 0,
    })
}

/// Asymptotic solution of the tidal problem.
pub fn tidal_analytic(x: f64, t: f64) -> MacroState {
    let phase = PI * (4.0 * t / 86_400.0 - 0.5);
    let h = tidal_reference_depth(x, TIDAL_LENGTH) + 4.0 - 4.0 * phase.sin();
    let u = (x - TIDAL_LENGTH) * PI / (5400.0 * h) * phase.cos();
    MacroState::new(h, [u, 0.0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TidalReport {
    pub lattice: usize,
    pub dx: f64,
    pub steps: u64,
    pub t: f64,
    pub depth_l2: f64,
    pub velocity_l2: f64,
    pub profile: Vec<ProfilePoint>,
}

pub fn tidal_report(sim: &Simulation, lattice: usize) -> Result<TidalReport, BenchError> {
    let grid = sim.config().grid;
    let t = sim.time();
    let (h, u) = (sim.depth(), sim.velocity());
    let mut hn = Vec::new();
    let mut ha = Vec::new();
    let mut un = Vec::new();
    let mut ua = Vec::new();
    for y in 0..grid.ny {
        for x in 0..grid.nx {
            let id = y * grid.nx + x;
            let a = tidal_analytic(grid.x(x), t);
            hn.push(h[id]);
            ha.push(a.h);
            un.push(u[id][0]);
            ua.push(a.u[0]);
        }
    }
    let depth_l2 = l2_error(&hn, &ha).map_err(|e| BenchError::Io(e.to_string()))?;
    let velocity_l2 = l2_error(&un, &ua).unwrap_or(f64::NAN);
    let profile = (0..grid.nx)
        .map(|x| {
            let a = tidal_analytic(grid.x(x), t);
            ProfilePoint {
                x: grid.x(x),
                h_numeric: h[x],
                h_analytic: a.h,
                u_numeric: u[x][0],
                u_analytic: a.u[0],
            }
        })
        .collect();
    Ok(TidalReport {
        lattice,
        dx: grid.dx,
        steps: sim.steps(),
        t,
        depth_l2,
        velocity_l2,
        profile,
    })
}

/// Run the tidal case to the comparison time.
pub fn run_tidal(lattice: usize, rows: usize) -> Result<TidalReport, BenchError> {
    let mut sim = Simulation::new(tidal_case_rows(lattice, rows)?)?;
    sim.run_transient(TIDAL_TIME)?;
    tidal_report(&sim, lattice)
}

// ---------------------------------------------------------------- expansion

pub const EXPANSION_NX: usize = 120;
pub const EXPANSION_NY: usize = 60;
pub const EXPANSION_DX: f64 = 0.05;
pub const EXPANSION_DT: f64 = 0.025;
pub const EXPANSION_TAU: f64 = 1.0;
pub const EXPANSION_DISCHARGE: f64 = 0.032;
pub const EXPANSION_OUTLET_DEPTH: f64 = 0.16;
/// Seconds over which the inflow discharge is raised from zero. An abrupt
/// start leaves a grid-scale oscillation that keeps R above the threshold.
pub const EXPANSION_INFLOW_RAMP: f64 = 25.0;
/// Entrance length and width in nodes (2 m × 1 m).
pub const ENTRANCE_NODES: (usize, usize) = (40, 20);
pub const EXPANSION_MAX_ITERATIONS: u64 = 100_000;

pub fn expansion_case(g: f64, lambda: f64) -> Result<SimulationConfig, BenchError> {
    let grid = GridSpec {
        nx: EXPANSION_NX,
        ny: EXPANSION_NY,
        dx: EXPANSION_DX,
        dt: EXPANSION_DT,
        x0: 0.5 * EXPANSION_DX,
        y0: 0.5 * EXPANSION_DX,
    };
    let spec =
        EquilibriumSpec::lambda_model(grid.gravity_from_lattice(g), grid.lattice_speed(), lambda)?;
    let (len, width) = ENTRANCE_NODES;
    let wall = (EXPANSION_NY - width) / 2;
    Ok(SimulationConfig {
        equilibrium: spec,
        grid,
        tau_hat: EXPANSION_TAU,
        boundaries: Boundaries {
            west: SideBc::Discharge {
                q: EXPANSION_DISCHARGE,
                ramp: EXPANSION_INFLOW_RAMP,
            },
            east: SideBc::Depth {
                signal: DepthSignal::Constant {
                    h: EXPANSION_OUTLET_DEPTH,
                },
            },
            south: SideBc::NoSlip,
            north: SideBc::NoSlip,
        },
        solids: vec![
            SolidRect {
                x_start: 0,
                x_end: len,
                y_start: 0,
                y_end: wall,
            },
            SolidRect {
                x_start: 0,
                x_end: len,
                y_start: wall + width,
                y_end: EXPANSION_NY,
            },
        ],
        bed: BedProfile::Flat,
        initial: InitialCondition::Uniform {
            h: EXPANSION_OUTLET_DEPTH,
            u: [0.0, 0.0],
        },
        force: ForceParams::none(),
        convergence_threshold: DEFAULT_CONVERGENCE_THRESHOLD,
        max_iterations: EXPANSION_MAX_ITERATIONS,
        output_cadence: 1000,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub g: f64,
    pub lambda: f64,
    pub outcome: SteadyOutcome,
    pub iterations: u64,
    pub final_r: f64,
    /// Most negative u₁ in the band next to each lateral wall downstream of
    /// the step.
    pub min_u1_south: f64,
    pub min_u1_north: f64,
}

impl ExpansionReport {
    /// Reversed flow next to both lateral walls.
    pub fn recirculates(&self) -> bool {
        self.min_u1_south < 0.0 && self.min_u1_north < 0.0
    }
}

/// Width of the wall bands scanned for reversed flow, in nodes.
const WALL_BAND: usize = 10;

pub fn expansion_report(
    sim: &Simulation,
    g: f64,
    lambda: f64,
    res: &SteadyResult,
) -> ExpansionReport {
    let (nx, ny) = (sim.nx(), sim.ny());
    let u = sim.velocity();
    let band_min = |ys: std::ops::Range<usize>| {
        let mut m = f64::INFINITY;
        for y in ys {
            for x in ENTRANCE_NODES.0..nx - 1 {
                if sim.cell(x, y) == CellType::Fluid {
                    m = m.min(u[y * nx + x][0]);
                }
            }
        }
        m
    };
    ExpansionReport {
        g,
        lambda,
        outcome: res.outcome,
        iterations: res.iterations,
        final_r: res.final_r,
        min_u1_south: band_min(0..WALL_BAND),
        min_u1_north: band_min(ny - WALL_BAND..ny),
    }
}

pub fn run_expansion(g: f64, lambda: f64) -> Result<(Simulation, ExpansionReport), BenchError> {
    let mut sim = Simulation::new(expansion_case(g, lambda)?)?;
    let res = sim.run_to_steady();
    let report = expansion_report(&sim, g, lambda, &res);
    Ok((sim, report))
}

// ---------------------------------------------------------------- tables

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl std::str::FromStr for TableId {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "T1" | "1" => Ok(TableId::T1),
            "T2" | "2" => Ok(TableId::T2),
            "T3" | "3" => Ok(TableId::T3),
            "T4" | "4" => Ok(TableId::T4),
            "T5" | "5" => Ok(TableId::T5),
            _ => Err(BenchError::UnknownTable(s.to_string())),
        }
    }
}

/// One reference table entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCell {
    pub case: Case,
    pub g: f64,
    pub lambda: Option<f64>,
    pub lattice: usize,
    /// Iterations to convergence; `None` where no convergence was reported.
    pub iterations: Option<u64>,
    /// Published L² depth error (tidal table only).
    pub l2: Option<f64>,
}

const fn hump_cell(
    g: f64,
    lambda: Option<f64>,
    lattice: usize,
    iterations: Option<u64>,
) -> ReferenceCell {
    ReferenceCell {
        case: Case::Hump,
        g,
        lambda,
        lattice,
        iterations,
        l2: None,
    }
}

const fn expansion_cell(g: f64, lambda: f64, iterations: Option<u64>) -> ReferenceCell {
    ReferenceCell {
        case: Case::Expansion,
        g,
        lambda: Some(lambda),
        lattice: EXPANSION_NX,
        iterations,
        l2: None,
    }
}

/// Hump gravity sweep.
pub const TABLE1: [ReferenceCell; 15] = [
    hump_cell(0.09, None, 125, None),
    hump_cell(0.09, None, 250, None),
    hump_cell(0.09, None, 500, None),
    hump_cell(0.07, None, 125, Some(19513)),
    hump_cell(0.07, None, 250, None),
    hump_cell(0.07, None, 500, None),
    hump_cell(0.03, None, 125, Some(19873)),
    hump_cell(0.03, None, 250, Some(39170)),
    hump_cell(0.03, None, 500, None),
    hump_cell(0.009, None, 125, Some(21333)),
    hump_cell(0.009, None, 250, Some(40034)),
    hump_cell(0.009, None, 500, Some(59700)),
    hump_cell(0.006, None, 125, Some(24165)),
    hump_cell(0.006, None, 250, Some(40319)),
    hump_cell(0.006, None, 500, Some(60048)),
];

const G_HUMP_LAMBDA: f64 = 1.0 / (3.0 * HUMP_E);

/// Hump λ sweep at ĝ = 1/(3e).
pub const TABLE2: [ReferenceCell; 12] = [
    hump_cell(G_HUMP_LAMBDA, Some(-6.0), 125, Some(21333)),
    hump_cell(G_HUMP_LAMBDA, Some(-6.0), 250, Some(40034)),
    hump_cell(G_HUMP_LAMBDA, Some(-6.0), 500, Some(59700)),
    hump_cell(G_HUMP_LAMBDA, Some(0.0), 125, Some(21333)),
    hump_cell(G_HUMP_LAMBDA, Some(0.0), 250, Some(40034)),
    hump_cell(G_HUMP_LAMBDA, Some(0.0), 500, Some(59700)),
    hump_cell(G_HUMP_LAMBDA, Some(3.0), 125, Some(21333)),
    hump_cell(G_HUMP_LAMBDA, Some(3.0), 250, Some(40034)),
    hump_cell(G_HUMP_LAMBDA, Some(3.0), 500, Some(59700)),
    hump_cell(G_HUMP_LAMBDA, Some(6.7), 125, Some(21333)),
    hump_cell(G_HUMP_LAMBDA, Some(6.7), 250, Some(40034)),
    hump_cell(G_HUMP_LAMBDA, Some(6.7), 500, None),
];

/// Tidal L² depth errors.
pub const TABLE3: [ReferenceCell; 3] = [
    ReferenceCell {
        case: Case::Tidal,
        g: 1.0 / (3.0 * TIDAL_E),
        lambda: Some(1.0),
        lattice: 500,
        iterations: None,
        l2: Some(6.68e-2),
    },
    ReferenceCell {
        case: Case::Tidal,
        g: 1.0 / (3.0 * TIDAL_E),
        lambda: Some(1.0),
        lattice: 750,
        iterations: None,
        l2: Some(6.39e-2),
    },
    ReferenceCell {
        case: Case::Tidal,
        g: 1.0 / (3.0 * TIDAL_E),
        lambda: Some(1.0),
        lattice: 1000,
        iterations: None,
        l2: Some(5.27e-2),
    },
];

/// Expansion gravity sweep at λ = 1.
pub const TABLE4: [ReferenceCell; 6] = [
    expansion_cell(0.001, 1.0, Some(21645)),
    expansion_cell(0.08, 1.0, Some(13432)),
    expansion_cell(0.15, 1.0, Some(11123)),
    expansion_cell(0.23, 1.0, Some(31373)),
    expansion_cell(0.3, 1.0, None),
    expansion_cell(0.5, 1.0, None),
];

/// Expansion λ sweep at ĝ = 0.1667.
pub const TABLE5: [ReferenceCell; 4] = [
    expansion_cell(0.1667, -2.0, Some(23039)),
    expansion_cell(0.1667, 4.0, Some(23039)),
    expansion_cell(0.1667, 7.0, Some(23039)),
    expansion_cell(0.1667, 12.0, None),
];

pub fn reference_table(id: TableId) -> &'static [ReferenceCell] {
    match id {
        TableId::T1 => &TABLE1,
        TableId::T2 => &TABLE2,
        TableId::T3 => &TABLE3,
        TableId::T4 => &TABLE4,
        TableId::T5 => &TABLE5,
    }
}

/// Outcome of one reproduced table entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub table: TableId,
    pub case: Case,
    pub g: f64,
    pub lambda: Option<f64>,
    pub lattice: usize,
    pub reference_iterations: Option<u64>,
    pub reference_converged: bool,
    pub converged: bool,
    pub outcome: String,
    pub iterations: u64,
    pub final_r: f64,
    /// (iterations − reference)/reference where both converged.
    pub iteration_deviation: Option<f64>,
    pub reference_l2: Option<f64>,
    pub l2: Option<f64>,
    pub l2_deviation: Option<f64>,
    pub classification_match: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: TableId,
    pub rows: Vec<TableRow>,
}

impl TableReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "table",
            "case",
            "g",
            "lambda",
            "lattice",
            "reference_iterations",
            "iterations",
            "iteration_deviation",
            "reference_converged",
            "converged",
            "outcome",
            "final_r",
            "reference_l2",
            "l2",
            "l2_deviation",
            "classification_match",
        ])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        for r in &self.rows {
            w.write_record([
                format!("{:?}", r.table),
                format!("{:?}", r.case),
                format!("{}", r.g),
                opt(r.lambda),
                format!("{}", r.lattice),
                r.reference_iterations
                    .map_or(String::new(), |v| v.to_string()),
                r.iterations.to_string(),
                opt(r.iteration_deviation),
                r.reference_converged.to_string(),
                r.converged.to_string(),
                r.outcome.clone(),
                format!("{}", r.final_r),
                opt(r.reference_l2),
                opt(r.l2),
                opt(r.l2_deviation),
                r.classification_match.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), BenchError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }
}

fn outcome_label(o: &SteadyOutcome) -> String {
    match o {
        SteadyOutcome::Converged => "converged".into(),
        SteadyOutcome::MaxIterations => "max_iterations".into(),
        SteadyOutcome::Diverged(d) => format!("diverged@{}", d.step),
    }
}

/// Run one reference entry. Tidal entries use `tidal_rows` rows across.
pub fn run_cell(
    table: TableId,
    cell: &ReferenceCell,
    tidal_rows: usize,
) -> Result<TableRow, BenchError> {
    let reference_converged = cell.iterations.is_some() || cell.l2.is_some();
    let mut row = TableRow {
        table,
        case: cell.case,
        g: cell.g,
        lambda: cell.lambda,
        lattice: cell.lattice,
        reference_iterations: cell.iterations,
        reference_converged,
        converged: false,
        outcome: String::new(),
        iterations: 0,
        final_r: f64::NAN,
        iteration_deviation: None,
        reference_l2: cell.l2,
        l2: None,
        l2_deviation: None,
        classification_match: false,
    };
    let steady = match cell.case {
        Case::Hump => {
            let cfg = match cell.lambda {
                Some(l) => hump_lambda_case(cell.g, cell.lattice, l)?,
                None => hump_case(cell.g, cell.lattice)?,
            };
            let mut sim = Simulation::new(cfg)?;
            let res = sim.run_to_steady();
            if res.converged() {
                row.l2 = hump_report(&sim, cell.g, cell.lattice, &res).depth_l2;
            }
            Some(res)
        }
        Case::Expansion => {
            let (_, rep) = run_expansion(cell.g, cell.lambda.unwrap_or(1.0))?;
            Some(SteadyResult {
                outcome: rep.outcome,
                iterations: rep.iterations,
                final_r: rep.final_r,
                history: vec![],
            })
        }
        Case::Tidal => {
            match run_tidal(cell.lattice, tidal_rows) {
                Ok(rep) => {
                    row.converged = true;
                    row.outcome = "completed".into();
                    row.iterations = rep.steps;
                    row.l2 = Some(rep.depth_l2);
                }
                Err(BenchError::Solver(SolverError::Diverged(d))) => {
                    row.outcome = format!("diverged@{}", d.step);
                }
                Err(e) => return Err(e),
            }
            None
        }
    };
    if let Some(res) = steady {
        row.converged = res.converged();
        row.outcome = outcome_label(&res.outcome);
        row.iterations = res.iterations;
        row.final_r = res.final_r;
    }
    if let (Some(p), true) = (cell.iterations, row.converged) {
        row.iteration_deviation = Some((row.iterations as f64 - p as f64) / p as f64);
    }
    if let (Some(p), Some(l)) = (cell.l2, row.l2) {
        row.l2_deviation = Some((l - p) / p);
    }
    row.classification_match = row.converged == reference_converged;
    Ok(row)
}

/// Re-run a reference table. Entries run concurrently.
pub fn reproduce_table(id: TableId, tidal_rows: usize) -> Result<TableReport, BenchError> {
    let rows: Result<Vec<TableRow>, BenchError> = reference_table(id)
        .par_iter()
        .map(|cell| run_cell(id, cell, tidal_rows))
        .collect();
    Ok(TableReport {
        table: id,
        rows: rows?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hump_bed_values() {
        let bed = hump_bed();
        assert!((bed.elevation(10.0, 0.0) - 0.2).abs() < 1e-15);
        assert_eq!(bed.elevation(7.9, 0.0), 0.0);
        assert!(bed.elevation(8.0, 0.0).abs() < 1e-15);
    }

    #[test]
    fn hump_grids() {
        let cfg = hump_case(0.009, 500).unwrap();
        assert!((cfg.grid.dx - 0.05).abs() < 1e-15);
        assert_eq!(cfg.grid.nx, 501);
        assert!((cfg.grid.lattice_speed() - 15.0).abs() < 1e-12);
        assert!(hump_case(0.009, 300).is_err());
    }

    #[test]
    fn tidal_values() {
        assert!((tidal_reference_depth(0.0, TIDAL_LENGTH) - 40.5).abs() < 1e-12);
        assert!((tidal_inflow().at(0.0) - 48.5).abs() < 1e-12);
        let cfg = tidal_case(1000).unwrap();
        assert_eq!(cfg.grid.dx, 7.0);
        assert_eq!(cfg.grid.nx, 2001);
        assert_eq!(cfg.max_iterations, 260_500);
        for t in [0.0, 1234.5, 9117.5] {
            assert_eq!(tidal_analytic(TIDAL_LENGTH, t).u[0], 0.0);
            assert!((tidal_analytic(0.0, t).h - tidal_inflow().at(t)).abs() < 1e-12);
        }
        // phase 0 at t = 10800 s, so the sine term vanishes
        let h = tidal_analytic(3000.0, 10_800.0).h;
        assert!((h - (tidal_reference_depth(3000.0, TIDAL_LENGTH) + 4.0)).abs() < 1e-12);
        let h0 = tidal_analytic(3000.0, 0.0).h;
        assert!((h0 - (tidal_reference_depth(3000.0, TIDAL_LENGTH) + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn expansion_geometry() {
        let cfg = expansion_case(0.15, 1.0).unwrap();
        assert!((cfg.grid.lattice_speed() - 2.0).abs() < 1e-12);
        let sim = Simulation::new(cfg).unwrap();
        let wet = sim.mask().iter().filter(|c| **c != CellType::Solid).count();
        assert_eq!(wet, 40 * 20 + 80 * 60);
        assert!((1.0_f64 / 6.0 - 0.1667).abs() < 1e-4);
    }

    #[test]
    fn table_ids_parse() {
        assert_eq!("t4".parse::<TableId>().unwrap(), TableId::T4);
        assert!("T9".parse::<TableId>().is_err());
        assert_eq!(reference_table(TableId::T1).len(), 15);
    }
}
