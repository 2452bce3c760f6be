//! D2Q9 BGK solver for the shallow water equations on a rectangular grid.
//!
//! One step is collide, stream, boundary update and a macroscopic pass that
//! also accumulates the global relative error R of the depth field over all
//! wet nodes. Rows are
//! processed in parallel and reduced in row order, so results do not depend
//! on the thread count.

mod config;
mod force;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{CompensatedSum, ErrorReport};
use crate::lattice::{
    d2q9_coefficients, EqCoefficients, LatticeError, MacroState, D2Q9_DIRECTIONS, D2Q9_OPPOSITE,
    D2Q9_WEIGHTS,
};

pub use config::{
    ramped, tidal_reference_depth, BedProfile, Boundaries, DepthSignal, GridSpec, InitialCondition,
    SideBc, SimulationConfig, SolidRect, DEFAULT_CONVERGENCE_THRESHOLD,
};
pub use force::{
    coriolis_parameter, force_vector, lb_viscosity, physical_viscosity, wind_drag_coefficient,
    ForceParams, Friction, EARTH_ANGULAR_VELOCITY,
};

/// Depth below which a wet node counts as diverged.
pub const MIN_DEPTH: f64 = 1e-12;

const Q: usize = 9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("{0}")]
    Diverged(Divergence),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SolverError {
    fn from(e: std::io::Error) -> Self {
        SolverError::Io(e.to_string())
    }
}

/// First node where the depth became non-finite or nonpositive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub step: u64,
    pub x: usize,
    pub y: usize,
    pub h: f64,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "diverged at step {} node ({}, {}) with h = {}",
            self.step, self.x, self.y, self.h
        )
    }
}

impl std::error::Error for Divergence {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellType {
    Fluid,
    Solid,
    Inflow,
    Outflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SteadyOutcome {
    Converged,
    MaxIterations,
    Diverged(Divergence),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyResult {
    pub outcome: SteadyOutcome,
    pub iterations: u64,
    pub final_r: f64,
    pub history: Vec<ErrorReport>,
}

impl SteadyResult {
    pub fn converged(&self) -> bool {
        self.outcome == SteadyOutcome::Converged
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransientResult {
    pub steps: u64,
    /// Time actually reached, a whole number of steps.
    pub t: f64,
    /// True when the requested end time was not a whole number of steps.
    pub truncated: bool,
    pub history: Vec<ErrorReport>,
}

#[derive(Debug, Clone, Copy)]
struct OpenNode {
    node: usize,
    neighbor: usize,
    inward: [f64; 2],
    bc: SideBc,
}

/// Per-run constants of the collision kernel.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    a: [f64; Q],
    b: [f64; Q],
    c: [f64; Q],
    d: [f64; Q],
    k: [f64; Q],
    /// g/e²
    gg: f64,
    e: f64,
    inv_tau: f64,
    /// 3 wᵢ Δt / e
    fw: [f64; Q],
    g: f64,
    force: ForceParams,
    forced: bool,
}

impl Kernel {
    fn new(
        coef: &[EqCoefficients; Q],
        g: f64,
        e: f64,
        dt: f64,
        tau_hat: f64,
        force: ForceParams,
    ) -> Self {
        let pick = |sel: fn(&EqCoefficients) -> f64| {
            let mut out = [0.0; Q];
            for i in 0..Q {
                out[i] = sel(&coef[i]);
            }
            out
        };
        let mut fw = [0.0; Q];
        for i in 0..Q {
            fw[i] = 3.0 * D2Q9_WEIGHTS[i] * dt / e;
        }
        Kernel {
            a: pick(|c| c.a),
            b: pick(|c| c.b),
            c: pick(|c| c.c),
            d: pick(|c| c.d),
            k: pick(|c| c.k),
            gg: g / (e * e),
            e,
            inv_tau: 1.0 / tau_hat,
            fw,
            g,
            force,
            forced: force.is_active(),
        }
    }

    /// Equilibrium for depth `h` and lattice-normalised velocity `v = u/e`.
    #[inline(always)]
    fn equilibrium(&self, h: f64, v: [f64; 2], out: &mut [f64; Q]) {
        let [vx, vy] = v;
        let v2 = vx * vx + vy * vy;
        let cv = [0.0, vx, vy, -vx, -vy, vx + vy, -vx + vy, -vx - vy, vx - vy];
        let gh = self.gg * h;
        for i in 0..Q {
            out[i] = h
                * (self.a[i]
                    + self.b[i] * gh
                    + self.c[i] * cv[i]
                    + self.d[i] * cv[i] * cv[i]
                    + self.k[i] * v2);
        }
    }

    /// BGK relaxation with the force term, in place.
    #[inline(always)]
    fn collide(&self, cell: &mut [f64], h: f64, v: [f64; 2], grad: [f64; 2]) {
        let mut feq = [0.0; Q];
        self.equilibrium(h, v, &mut feq);
        if self.forced {
            let u = [self.e * v[0], self.e * v[1]];
            let [fx, fy] = force_vector(&MacroState::new(h, u), &self.force, grad, self.g);
            let cf = [0.0, fx, fy, -fx, -fy, fx + fy, -fx + fy, -fx - fy, fx - fy];
            for i in 0..Q {
                cell[i] = cell[i] - (cell[i] - feq[i]) * self.inv_tau + self.fw[i] * cf[i];
            }
        } else {
            for i in 0..Q {
                cell[i] -= (cell[i] - feq[i]) * self.inv_tau;
            }
        }
    }
}

/// Depth and normalised momentum sums, grouped so that mirrored fields give
/// mirrored results bit for bit.
#[inline(always)]
fn moments9(f: &[f64]) -> (f64, f64, f64) {
    let h = f[0] + ((f[1] + f[3]) + (f[2] + f[4])) + ((f[5] + f[6]) + (f[7] + f[8]));
    let mx = (f[1] - f[3]) + ((f[5] + f[8]) - (f[6] + f[7]));
    let my = (f[2] - f[4]) + ((f[5] + f[6]) - (f[7] + f[8]));
    (h, mx, my)
}

/// A running simulation: populations, macroscopic fields and geometry.
///
/// Between steps the stored populations are post-collision; `depth` and
/// `velocity` are the moments before that collision.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimulationConfig,
    nx: usize,
    ny: usize,
    dt: f64,
    kernel: Kernel,
    mask: Vec<CellType>,
    f: Vec<f64>,
    scratch: Vec<f64>,
    pull: Vec<u32>,
    slip_copies: Vec<(u32, u32)>,
    open: Vec<OpenNode>,
    h: Vec<f64>,
    u: Vec<[f64; 2]>,
    bed: Vec<f64>,
    bed_gradient: Vec<[f64; 2]>,
    step: u64,
    last_r: f64,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self, SolverError> {
        config.validate()?;
        let grid = config.grid;
        let (nx, ny) = (grid.nx, grid.ny);
        let n = nx * ny;
        if n * Q >= u32::MAX as usize {
            return Err(SolverError::Config("grid too large".into()));
        }
        let b = config.boundaries;

        let mut mask = vec![CellType::Fluid; n];
        for r in &config.solids {
            if r.x_end > nx || r.y_end > ny || r.x_start >= r.x_end || r.y_start >= r.y_end {
                return Err(SolverError::Config(format!(
                    "solid rectangle {r:?} out of range"
                )));
            }
            for y in r.y_start..r.y_end {
                for x in r.x_start..r.x_end {
                    mask[y * nx + x] = CellType::Solid;
                }
            }
        }

        let open_type = |bc: &SideBc| match bc {
            SideBc::Depth { .. } => CellType::Outflow,
            _ => CellType::Inflow,
        };
        let mut open = Vec::new();
        let sides: [(SideBc, [i32; 2]); 4] = [
            (b.west, [1, 0]),
            (b.east, [-1, 0]),
            (b.south, [0, 1]),
            (b.north, [0, -1]),
        ];
        for (bc, inward) in sides {
            if !bc.is_open() {
                continue;
            }
            let nodes: Vec<(usize, usize)> = match inward {
                [1, 0] => (0..ny).map(|y| (0, y)).collect(),
                [-1, 0] => (0..ny).map(|y| (nx - 1, y)).collect(),
                [0, 1] => (0..nx).map(|x| (x, 0)).collect(),
                _ => (0..nx).map(|x| (x, ny - 1)).collect(),
            };
            for (x, y) in nodes {
                let id = y * nx + x;
                if mask[id] == CellType::Solid {
                    continue;
                }
                mask[id] = open_type(&bc);
                let nbx = x as i64 + inward[0] as i64;
                let nby = y as i64 + inward[1] as i64;
                if nbx < 0 || nby < 0 || nbx >= nx as i64 || nby >= ny as i64 {
                    return Err(SolverError::Config(format!(
                        "open boundary node ({x}, {y}) has no interior neighbour"
                    )));
                }
                open.push(OpenNode {
                    node: id,
                    neighbor: nby as usize * nx + nbx as usize,
                    inward: [inward[0] as f64, inward[1] as f64],
                    bc,
                });
            }
        }
        for o in &open {
            if mask[o.neighbor] != CellType::Fluid {
                return Err(SolverError::Config(format!(
                    "open boundary node ({}, {}) is not backed by a fluid node",
                    o.node % nx,
                    o.node / nx
                )));
            }
        }

        let (pull, slip_copies) = build_streaming(nx, ny, &mask, &b)?;

        let bed: Vec<f64> = (0..n)
            .map(|id| config.bed.elevation(grid.x(id % nx), grid.y(id / nx)))
            .collect();
        let bed_gradient = gradient(&bed, nx, ny, grid.dx);

        let mut h = vec![0.0; n];
        let mut u = vec![[0.0; 2]; n];
        for id in 0..n {
            if mask[id] == CellType::Solid {
                continue;
            }
            let (hi, ui) = match config.initial {
                InitialCondition::Uniform { h, u } => (h, u),
                InitialCondition::FreeSurface { level, u } => (level - bed[id], u),
            };
            if !(hi > 0.0 && hi.is_finite()) {
                return Err(SolverError::Config(format!(
                    "initial depth {hi} at node ({}, {}) is not positive",
                    id % nx,
                    id / nx
                )));
            }
            h[id] = hi;
            u[id] = ui;
        }

        let e = grid.lattice_speed();
        let kernel = Kernel::new(
            &d2q9_coefficients(config.equilibrium.effective_lambda()),
            config.equilibrium.g,
            e,
            grid.dt,
            config.tau_hat,
            config.force,
        );
        let mut sim = Simulation {
            nx,
            ny,
            dt: grid.dt,
            kernel,
            mask,
            f: vec![0.0; n * Q],
            scratch: vec![0.0; n * Q],
            pull,
            slip_copies,
            open,
            h,
            u,
            bed,
            bed_gradient,
            step: 0,
            last_r: f64::NAN,
            config,
        };
        for id in 0..n {
            if sim.mask[id] != CellType::Solid {
                sim.initialise_node(id);
            }
        }
        Ok(sim)
    }

    /// Equilibrium of the stored state, relaxed once.
    fn initialise_node(&mut self, id: usize) {
        let k = &self.kernel;
        let v = [self.u[id][0] / k.e, self.u[id][1] / k.e];
        let mut feq = [0.0; Q];
        k.equilibrium(self.h[id], v, &mut feq);
        let cell = &mut self.f[id * Q..(id + 1) * Q];
        cell.copy_from_slice(&feq);
        k.collide(cell, self.h[id], v, self.bed_gradient[id]);
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    /// R of the most recent step, NaN before the first one.
    pub fn last_r(&self) -> f64 {
        self.last_r
    }

    pub fn cell(&self, x: usize, y: usize) -> CellType {
        self.mask[y * self.nx + x]
    }

    pub fn mask(&self) -> &[CellType] {
        &self.mask
    }

    pub fn depth(&self) -> &[f64] {
        &self.h
    }

    pub fn velocity(&self) -> &[[f64; 2]] {
        &self.u
    }

    pub fn bed(&self) -> &[f64] {
        &self.bed
    }

    /// Post-collision populations, node-major.
    pub fn populations(&self) -> &[f64] {
        &self.f
    }

    pub fn state(&self, x: usize, y: usize) -> MacroState {
        let id = y * self.nx + x;
        MacroState::new(self.h[id], self.u[id])
    }

    /// Reset one node to equilibrium with the given state.
    pub fn set_state(&mut self, x: usize, y: usize, state: MacroState) -> Result<(), SolverError> {
        if x >= self.nx || y >= self.ny {
            return Err(SolverError::Config(format!("node ({x}, {y}) out of range")));
        }
        let id = y * self.nx + x;
        if self.mask[id] == CellType::Solid {
            return Err(SolverError::Config(format!("node ({x}, {y}) is solid")));
        }
        if !(state.h > 0.0 && state.h.is_finite()) {
            return Err(LatticeError::NonpositiveDepth(state.h).into());
        }
        self.h[id] = state.h;
        self.u[id] = state.u;
        self.initialise_node(id);
        Ok(())
    }

    /// Σ fᵢ over all non-solid nodes, i.e. the total depth.
    pub fn total_mass(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (id, cell) in self.mask.iter().enumerate() {
            if *cell != CellType::Solid {
                for v in &self.f[id * Q..(id + 1) * Q] {
                    acc.add(*v);
                }
            }
        }
        acc.value()
    }

    fn stream(&mut self) {
        let nx = self.nx;
        let src = &self.f;
        let pull = &self.pull;
        self.scratch
            .par_chunks_mut(nx * Q)
            .zip(pull.par_chunks(nx * Q))
            .for_each(|(dst, idx)| {
                for (d, &k) in dst.iter_mut().zip(idx) {
                    *d = src[k as usize];
                }
            });
        std::mem::swap(&mut self.f, &mut self.scratch);
        for &(dst, src) in &self.slip_copies {
            self.f[dst as usize] = self.f[src as usize];
        }
    }

    /// Complete the populations entering the domain at every open-boundary
    /// node by non-equilibrium bounce-back, so that the node carries the
    /// imposed depth, discharge or normal velocity at the time reached after
    /// the current step. Tangential velocity is set to zero.
    fn apply_boundaries(&mut self) {
        let t = (self.step + 1) as f64 * self.dt;
        let e = self.kernel.e;
        for o in &self.open {
            let n = [o.inward[0] as i32, o.inward[1] as i32];
            let tang = [n[1].abs(), n[0].abs()];
            let cell = &mut self.f[o.node * Q..(o.node + 1) * Q];
            let mut s_zero = 0.0;
            let mut s_out = 0.0;
            let mut t_mom = 0.0;
            for i in 0..Q {
                let c = D2Q9_DIRECTIONS[i];
                let cn = c[0] * n[0] + c[1] * n[1];
                if cn == 0 {
                    s_zero += cell[i];
                    t_mom += (c[0] * tang[0] + c[1] * tang[1]) as f64 * cell[i];
                } else if cn < 0 {
                    s_out += cell[i];
                }
            }
            // normalised inward momentum h·vₙ implied by the imposed quantity
            let hvn = match o.bc {
                SideBc::Discharge { q, ramp } => ramped(q, ramp, t) / e,
                SideBc::Velocity { u } => {
                    let vn = u / e;
                    vn * (s_zero + 2.0 * s_out) / (1.0 - vn)
                }
                SideBc::Depth { signal } => signal.at(t) - s_zero - 2.0 * s_out,
                _ => unreachable!("only open sides are recorded"),
            };
            for i in 0..Q {
                let c = D2Q9_DIRECTIONS[i];
                let cn = c[0] * n[0] + c[1] * n[1];
                if cn <= 0 {
                    continue;
                }
                let opp = cell[D2Q9_OPPOSITE[i]];
                let ct = c[0] * tang[0] + c[1] * tang[1];
                cell[i] = if ct == 0 {
                    opp + 2.0 / 3.0 * hvn
                } else {
                    opp + hvn / 6.0 - 0.5 * ct as f64 * t_mom
                };
            }
        }
    }

    /// Recompute h and u from the streamed populations, accumulate R over the
    /// wet nodes and relax them, all in one sweep.
    fn update_and_collide(&mut self) -> Result<f64, Divergence> {
        let nx = self.nx;
        let k = &self.kernel;
        let mask = &self.mask;
        let grad = &self.bed_gradient;
        let step = self.step + 1;
        let rows: Vec<(CompensatedSum, Option<Divergence>)> = self
            .f
            .par_chunks_mut(nx * Q)
            .zip(self.h.par_chunks_mut(nx))
            .zip(self.u.par_chunks_mut(nx))
            .enumerate()
            .map(|(y, ((frow, hrow), urow))| {
                let mut acc = CompensatedSum::new();
                let mut bad = None;
                let base = y * nx;
                for (x, cell) in frow.chunks_exact_mut(Q).enumerate() {
                    let kind = mask[base + x];
                    if kind == CellType::Solid {
                        continue;
                    }
                    let (hn, mx, my) = moments9(cell);
                    let v = [mx / hn, my / hn];
                    let ok =
                        hn.is_finite() && hn > MIN_DEPTH && v[0].is_finite() && v[1].is_finite();
                    if !ok {
                        if bad.is_none() {
                            bad = Some(Divergence { step, x, y, h: hn });
                        }
                        continue;
                    }
                    let r = (hn - hrow[x]) / hn;
                    acc.add(r * r);
                    k.collide(cell, hn, v, grad[base + x]);
                    hrow[x] = hn;
                    urow[x] = [k.e * v[0], k.e * v[1]];
                }
                (acc, bad)
            })
            .collect();
        let mut total = CompensatedSum::new();
        for (acc, bad) in rows {
            if let Some(d) = bad {
                return Err(d);
            }
            total.merge(&acc);
        }
        Ok(total.value().sqrt())
    }

    /// Advance one time step (stream, boundaries, moments and collision) and
    /// return R.
    pub fn step(&mut self) -> Result<f64, Divergence> {
        self.stream();
        self.apply_boundaries();
        let r = self.update_and_collide();
        self.step += 1;
        if let Ok(r) = r {
            self.last_r = r;
        }
        r
    }

    fn report(&self, r: f64) -> ErrorReport {
        ErrorReport {
            step: self.step,
            r_global: r,
            ..ErrorReport::default()
        }
    }

    /// Iterate until R drops below the convergence threshold, the iteration
    /// budget runs out or the run diverges.
    pub fn run_to_steady(&mut self) -> SteadyResult {
        let cadence = self.config.output_cadence;
        let threshold = self.config.convergence_threshold;
        let max = self.config.max_iterations;
        let mut history = Vec::new();
        let mut iterations = 0;
        let mut r = f64::NAN;
        let outcome = loop {
            if iterations >= max {
                break SteadyOutcome::MaxIterations;
            }
            match self.step() {
                Err(d) => break SteadyOutcome::Diverged(d),
                Ok(rn) => {
                    iterations += 1;
                    r = rn;
                    if cadence > 0 && self.step % cadence == 0 {
                        history.push(self.report(r));
                    }
                    if r < threshold {
                        break SteadyOutcome::Converged;
                    }
                }
            }
        };
        if history.last().map(|h| h.step) != Some(self.step) && r.is_finite() {
            history.push(self.report(r));
        }
        SteadyResult {
            outcome,
            iterations,
            final_r: r,
            history,
        }
    }

    /// Advance to `t_end`, rounded down to a whole number of steps.
    pub fn run_transient(&mut self, t_end: f64) -> Result<TransientResult, SolverError> {
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(SolverError::Config(format!("invalid end time {t_end}")));
        }
        let exact = t_end / self.dt;
        let target = (exact + 1e-9).floor() as u64;
        let start = self.step;
        let cadence = self.config.output_cadence;
        let mut history = Vec::new();
        while self.step < target {
            let r = self.step().map_err(SolverError::Diverged)?;
            if cadence > 0 && self.step % cadence == 0 {
                history.push(self.report(r));
            }
        }
        Ok(TransientResult {
            steps: self.step - start,
            t: self.time(),
            truncated: (exact - target as f64).abs() > 1e-9,
            history,
        })
    }

    /// Write x, y, bed, h, u1, u2 for every non-solid node.
    pub fn write_fields_csv<W: Write>(&self, out: W) -> Result<(), SolverError> {
        let mut w = std::io::BufWriter::new(out);
        writeln!(w, "x,y,bed,h,u1,u2,cell")?;
        let grid = self.config.grid;
        for y in 0..self.ny {
            for x in 0..self.nx {
                let id = y * self.nx + x;
                if self.mask[id] == CellType::Solid {
                    continue;
                }
                writeln!(
                    w,
                    "{},{},{},{},{},{},{:?}",
                    grid.x(x),
                    grid.y(y),
                    self.bed[id],
                    self.h[id],
                    self.u[id][0],
                    self.u[id][1],
                    self.mask[id]
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Build and run a case to steady state.
pub fn run_to_steady(config: SimulationConfig) -> Result<(Simulation, SteadyResult), SolverError> {
    let mut sim = Simulation::new(config)?;
    let res = sim.run_to_steady();
    Ok((sim, res))
}

/// Build and run a case up to `t_end`.
pub fn run_transient(
    config: SimulationConfig,
    t_end: f64,
) -> Result<(Simulation, TransientResult), SolverError> {
    let mut sim = Simulation::new(config)?;
    let res = sim.run_transient(t_end)?;
    Ok((sim, res))
}

/// Pull table: for each destination population, the index it streams from
/// in the post-collision buffer. Slip walls add copies applied afterwards;
/// populations entering through an open side are left for the boundary
/// closure.
fn build_streaming(
    nx: usize,
    ny: usize,
    mask: &[CellType],
    b: &Boundaries,
) -> Result<(Vec<u32>, Vec<(u32, u32)>), SolverError> {
    let mut pull = vec![0u32; nx * ny * Q];
    let mut slips = Vec::new();
    let px = b.west == SideBc::Periodic;
    let py = b.south == SideBc::Periodic;
    for y in 0..ny {
        for x in 0..nx {
            let id = y * nx + x;
            for i in 0..Q {
                pull[id * Q + i] = (id * Q + i) as u32;
            }
            if mask[id] == CellType::Solid {
                continue;
            }
            for i in 1..Q {
                let [cx, cy] = D2Q9_DIRECTIONS[i];
                let bounce = (id * Q + D2Q9_OPPOSITE[i]) as u32;
                let mut sx = x as i64 - cx as i64;
                let mut sy = y as i64 - cy as i64;
                if px {
                    sx = sx.rem_euclid(nx as i64);
                }
                if py {
                    sy = sy.rem_euclid(ny as i64);
                }
                let x_side = if sx < 0 {
                    Some((b.west, 1i64))
                } else if sx >= nx as i64 {
                    Some((b.east, -1))
                } else {
                    None
                };
                let y_side = if sy < 0 {
                    Some((b.south, 1i64))
                } else if sy >= ny as i64 {
                    Some((b.north, -1))
                } else {
                    None
                };
                let entry = match (x_side, y_side) {
                    (None, None) => {
                        let s = sy as usize * nx + sx as usize;
                        if mask[s] == CellType::Solid {
                            bounce
                        } else {
                            (s * Q + i) as u32
                        }
                    }
                    _ => {
                        let sides = [x_side, y_side];
                        if sides.iter().flatten().any(|(bc, _)| bc.is_open()) {
                            if mask[id] == CellType::Fluid {
                                return Err(SolverError::Config(format!(
                                    "node ({x}, {y}) streams across an open side without being a boundary node"
                                )));
                            }
                            // completed by the boundary closure
                            bounce
                        } else if sides.iter().flatten().any(|(bc, _)| *bc == SideBc::NoSlip) {
                            bounce
                        } else if sides.iter().flatten().all(|(bc, _)| *bc == SideBc::Slip) {
                            let fx = x as i64 + x_side.map_or(0, |s| s.1);
                            let fy = y as i64 + y_side.map_or(0, |s| s.1);
                            let src = fy as usize * nx + fx as usize;
                            if mask[src] == CellType::Solid {
                                bounce
                            } else {
                                slips.push(((id * Q + i) as u32, (src * Q + i) as u32));
                                bounce
                            }
                        } else {
                            unreachable!("periodic sides wrap before this point")
                        }
                    }
                };
                pull[id * Q + i] = entry;
            }
        }
    }
    Ok((pull, slips))
}

/// Centred differences, one-sided at the edges.
fn gradient(z: &[f64], nx: usize, ny: usize, dx: f64) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            let at = |i: usize, j: usize| z[j * nx + i];
            let gx = if nx < 2 {
                0.0
            } else if x == 0 {
                (at(1, y) - at(0, y)) / dx
            } else if x == nx - 1 {
                (at(x, y) - at(x - 1, y)) / dx
            } else {
                (at(x + 1, y) - at(x - 1, y)) / (2.0 * dx)
            };
            let gy = if ny < 2 {
                0.0
            } else if y == 0 {
                (at(x, 1) - at(x, 0)) / dx
            } else if y == ny - 1 {
                (at(x, y) - at(x, y - 1)) / dx
            } else {
                (at(x, y + 1) - at(x, y - 1)) / (2.0 * dx)
            };
            out[y * nx + x] = [gx, gy];
        }
    }
    out
}
