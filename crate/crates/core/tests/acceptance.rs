//! End-to-end acceptance run. Prints one PASS or FAIL line per criterion
//! with the measured numbers; a FAIL is reported, not raised, so that the
//! rest of the run still happens.
//!
//! Criteria 3 to 6 run the full benchmarks and take tens of minutes on one
//! core.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use swlbm::benchmarks::{
    reference_table, run_cell, run_expansion, run_hump, run_tidal, TableId, TableRow, TABLE3,
};
use swlbm::lattice::{EquilibriumSpec, Family, MacroState};
use swlbm::solver::{
    lb_viscosity, BedProfile, Boundaries, ForceParams, GridSpec, InitialCondition, Simulation,
    SimulationConfig, SteadyOutcome,
};
use swlbm::stability::{
    collision_jacobian, construct_structure, scaling_matrix, stable_g_interval, verify_stability,
    Verdict, DEFAULT_TOL,
};

/// The tidal flow is one dimensional and its rows stay identical to round
/// off, so the channel is run two rows wide.
const TIDAL_ROWS: usize = 2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = run();
    println!(
        "{} criterion {id} ({name}): {} [{:.0} s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        start.elapsed().as_secs_f64()
    );
    o.pass
}

// ---------------------------------------------------------------- 1, 2

fn stability_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let families = [
        Family::D2Q7,
        Family::D2Q9Salmon,
        Family::D2Q9Standard,
        Family::D2Q9Lambda,
    ];
    let mut failures = Vec::new();
    let mut counted = 0;
    let mut worst_projection = 0.0f64;
    let mut worst_spectrum = 0.0f64;
    let mut worst_structure = 0.0f64;
    for family in families {
        let mut n_ok = 0;
        while n_ok < 1000 {
            let x: f64 = rng.gen_range(0.001..1.5);
            let e = if family == Family::D2Q9Standard {
                1.0
            } else {
                rng.gen_range(0.5..30.0)
            };
            let hbar: f64 = rng.gen_range(0.1..5.0);
            let tau: f64 = rng.gen_range(0.51..3.0);
            // half the λ samples sit on λ = 1, where an open interval exists
            let lambda = if family == Family::D2Q9Lambda && rng.gen_bool(0.5) {
                rng.gen_range(-10.0..15.0)
            } else {
                1.0
            };
            let g = x * e * e / hbar;
            let lam = (family == Family::D2Q9Lambda).then_some(lambda);
            let interval = stable_g_interval(family, hbar, e, lam).unwrap();
            if interval.relative_distance_to_boundary(g) <= 1e-6 {
                continue;
            }
            let spec = EquilibriumSpec::new(family, g, e, lambda).unwrap();
            if scaling_matrix(&spec, hbar).is_err() {
                continue;
            }
            n_ok += 1;
            counted += 1;
            let rep = verify_stability(&spec, hbar, tau, DEFAULT_TOL).unwrap();
            let n = spec.model().population_count();
            let expected = interval.contains(g);
            if (rep.verdict == Verdict::Stable) != expected {
                failures.push(format!("{} g={g} verdict {}", family.name(), rep.verdict));
            }
            worst_projection = worst_projection.max(rep.projection_defect);
            if rep.collision_rank != n - 3 || rep.eigenvalues.len() != n {
                failures.push(format!(
                    "{} g={g} rank {}",
                    family.name(),
                    rep.collision_rank
                ));
                continue;
            }
            // eigenvalues are sorted: 3 zeros first, then −1/τ
            let dev = rep
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    if i < 3 {
                        l.abs()
                    } else {
                        (l + 1.0 / tau).abs()
                    }
                })
                .fold(0.0, f64::max);
            worst_spectrum = worst_spectrum.max(dev);
            if expected {
                let s = construct_structure(&spec, hbar, tau).unwrap();
                let r =
                    s.residuals(&collision_jacobian(&spec, &MacroState::rest(hbar), tau).unwrap());
                worst_structure = worst_structure
                    .max(r.off_diagonal)
                    .max(r.diagonal)
                    .max(r.similarity);
            }
        }
    }
    let pass = failures.is_empty()
        && worst_projection < 1e-12
        && worst_spectrum < 1e-10
        && worst_structure < 1e-10;
    Outcome {
        pass,
        detail: format!(
            "{counted} samples, {} verdict/rank mismatches{}, max projection defect {worst_projection:.1e}, \
             max spectrum deviation {worst_spectrum:.1e}, max structure residual {worst_structure:.1e}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    }
}

fn lambda_symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    let mut n = 0;
    let mut max_at_point = 0.0f64;
    let mut min_elsewhere = f64::INFINITY;
    while n < 2000 {
        let e: f64 = rng.gen_range(0.5..30.0);
        let hbar: f64 = rng.gen_range(0.1..5.0);
        let lambda: f64 = if rng.gen_bool(0.2) {
            1.0
        } else {
            rng.gen_range(-10.0..15.0)
        };
        let special = e * e / (3.0 * hbar);
        let on_point = rng.gen_bool(0.3);
        let g = if on_point {
            special
        } else {
            let x: f64 = rng.gen_range(0.001..1.5);
            if (3.0 * x - 1.0).abs() <= 1e-6 {
                continue;
            }
            x * e * e / hbar
        };
        let spec = EquilibriumSpec::lambda_model(g, e, lambda).unwrap();
        if scaling_matrix(&spec, hbar).is_err() {
            continue;
        }
        n += 1;
        let rep = verify_stability(&spec, hbar, 1.0, DEFAULT_TOL).unwrap();
        let expect_zero = lambda == 1.0 || on_point;
        if expect_zero {
            max_at_point = max_at_point.max(rep.symmetry_defect);
            bad += (rep.symmetry_defect >= 1e-10) as usize;
        } else {
            min_elsewhere = min_elsewhere.min(rep.symmetry_defect);
            bad += (rep.symmetry_defect < 1e-10) as usize;
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!(
            "{n} samples, {bad} mismatches; defect ≤ {max_at_point:.1e} where λ = 1 or g = e²/(3h̄), \
             ≥ {min_elsewhere:.1e} elsewhere"
        ),
    }
}

// ---------------------------------------------------------------- 3

fn hump() -> Outcome {
    let rep = match run_hump(0.009, 500) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("error {e}"),
            }
        }
    };
    let converged = rep.outcome == SteadyOutcome::Converged && rep.final_r < 5e-6;
    let l2 = rep.depth_l2.unwrap_or(f64::NAN);
    let (dq, dq_max) = rep
        .discharge
        .as_ref()
        .map(|d| (d.l2_deviation, d.max_deviation))
        .unwrap_or((f64::NAN, f64::NAN));
    Outcome {
        pass: converged && l2 <= 5e-3 && dq <= 3e-3,
        detail: format!(
            "{:?} after {} iterations, R = {:.2e}; depth L2 {:.3}% (≤ 0.5%), discharge L2 {:.3}% (≤ 0.3%), discharge max {:.3}%",
            rep.outcome,
            rep.iterations,
            rep.final_r,
            100.0 * l2,
            100.0 * dq,
            100.0 * dq_max
        ),
    }
}

// ---------------------------------------------------------------- 4

fn run_table(id: TableId) -> Vec<Result<TableRow, String>> {
    reference_table(id)
        .par_iter()
        .map(|c| run_cell(id, c, TIDAL_ROWS).map_err(|e| e.to_string()))
        .collect()
}

fn tables_1_2() -> Outcome {
    let mut mismatched = Vec::new();
    let mut off_count = Vec::new();
    let mut errors = 0;
    let mut cells = 0;
    for id in [TableId::T1, TableId::T2] {
        for row in run_table(id) {
            cells += 1;
            let row = match row {
                Ok(r) => r,
                Err(_) => {
                    errors += 1;
                    continue;
                }
            };
            let label = match row.lambda {
                Some(l) => format!("{id:?} λ={l}@{}", row.lattice),
                None => format!("{id:?} g={}@{}", row.g, row.lattice),
            };
            println!(
                "    {label}: {} {} iterations (reference {})",
                row.outcome,
                row.iterations,
                row.reference_iterations
                    .map(|p| p.to_string())
                    .unwrap_or_else(|| "no convergence".into())
            );
            // λ = 6.7 is recorded only; g = 0.07 is exempt from the
            // iteration tolerance
            if row.lambda == Some(6.7) {
                continue;
            }
            if !row.classification_match {
                mismatched.push(label.clone());
            }
            if let (Some(d), false) = (row.iteration_deviation, row.g == 0.07) {
                if d.abs() > 0.25 {
                    off_count.push(format!("{label} {:+.0}%", 100.0 * d));
                }
            }
        }
    }
    Outcome {
        pass: mismatched.is_empty() && off_count.is_empty() && errors == 0,
        detail: format!(
            "{cells} cells; classification mismatches: [{}]; iteration counts outside ±25%: [{}]",
            mismatched.join(", "),
            off_count.join(", ")
        ),
    }
}

// ---------------------------------------------------------------- 5

fn tidal() -> Outcome {
    let limits = [7.0e-2, 6.7e-2, 5.8e-2];
    let results: Vec<_> = TABLE3
        .par_iter()
        .map(|c| run_tidal(c.lattice, TIDAL_ROWS).map(|r| (r.dx, r.depth_l2)))
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut errs = Vec::new();
    for (r, lim) in results.iter().zip(limits) {
        match r {
            Ok((dx, l2)) => {
                pass &= *l2 <= lim;
                parts.push(format!("Δx={dx}: {l2:.3e} (≤ {lim:.1e})"));
                errs.push(*l2);
            }
            Err(e) => {
                pass = false;
                parts.push(format!("error {e}"));
            }
        }
    }
    let decreasing = errs.len() == 3 && errs[0] > errs[1] && errs[1] > errs[2];
    Outcome {
        pass: pass && decreasing,
        detail: format!("{}; strictly decreasing: {decreasing}", parts.join(", ")),
    }
}

// ---------------------------------------------------------------- 6

fn expansion() -> Outcome {
    let g_cases = [
        (0.001, true),
        (0.08, true),
        (0.15, true),
        (0.23, true),
        (0.3, false),
        (0.5, false),
    ];
    let l_cases = [(-2.0, true), (4.0, true), (7.0, true), (12.0, false)];
    let runs: Vec<(f64, f64, bool)> = g_cases
        .iter()
        .map(|&(g, c)| (g, 1.0, c))
        .chain(l_cases.iter().map(|&(l, c)| (0.1667, l, c)))
        .collect();
    let results: Vec<_> = runs
        .par_iter()
        .map(|&(g, l, _)| run_expansion(g, l).map(|(_, r)| r))
        .collect();

    let mut mismatches = Vec::new();
    let mut lambda_iters = Vec::new();
    let mut recirc = None;
    for (&(g, l, expect), res) in runs.iter().zip(&results) {
        let r = match res {
            Ok(r) => r,
            Err(e) => {
                mismatches.push(format!("g={g} λ={l}: {e}"));
                continue;
            }
        };
        let converged = r.outcome == SteadyOutcome::Converged;
        println!(
            "    g={g} λ={l}: {:?} after {} iterations, recirculation {}",
            r.outcome,
            r.iterations,
            r.recirculates()
        );
        if converged != expect {
            mismatches.push(format!(
                "g={g} λ={l} {}",
                if converged {
                    "converged"
                } else {
                    "did not converge"
                }
            ));
        }
        if g == 0.1667 && expect && converged {
            lambda_iters.push(r.iterations);
        }
        if g == 0.08 && converged {
            recirc = Some(r.recirculates());
        }
    }
    // equal taken as max/min ≤ 1.05
    let equal_iters = lambda_iters.len() == 3 && {
        let max = *lambda_iters.iter().max().unwrap() as f64;
        let min = *lambda_iters.iter().min().unwrap() as f64;
        max / min <= 1.05
    };
    let recirc_ok = recirc == Some(true);
    Outcome {
        pass: mismatches.is_empty() && equal_iters && recirc_ok,
        detail: format!(
            "classification mismatches: [{}]; equal λ iteration counts: {equal_iters} {lambda_iters:?}; \
             recirculation on both walls at g=0.08: {recirc_ok}",
            mismatches.join(", ")
        ),
    }
}

// ---------------------------------------------------------------- 7

fn lattice_config(nx: usize, ny: usize, tau: f64, boundaries: Boundaries) -> SimulationConfig {
    SimulationConfig {
        equilibrium: EquilibriumSpec::salmon(0.1, 1.0).unwrap(),
        grid: GridSpec {
            nx,
            ny,
            dx: 1.0,
            dt: 1.0,
            x0: 0.0,
            y0: 0.0,
        },
        tau_hat: tau,
        boundaries,
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
    }
}

fn perturbed(nx: usize, ny: usize, tau: f64, b: Boundaries) -> Simulation {
    let mut sim = Simulation::new(lattice_config(nx, ny, tau, b)).unwrap();
    for y in 0..ny {
        for x in 0..nx {
            let w = (2.0 * PI * x as f64 / nx as f64).sin()
                * (2.0 * PI * y as f64 / ny as f64).cos()
                + 0.5 * (2.0 * PI * (x + 2 * y) as f64 / nx as f64).cos();
            sim.set_state(
                x,
                y,
                MacroState::new(1.0 + 0.02 * w, [0.01 * w, -0.004 * w]),
            )
            .unwrap();
        }
    }
    sim
}

fn solver_suite() -> Outcome {
    // fixed point
    let mut sim = Simulation::new(lattice_config(16, 12, 0.8, Boundaries::closed_box())).unwrap();
    let f0 = sim.populations().to_vec();
    for _ in 0..100 {
        sim.step().unwrap();
    }
    let drift = sim
        .populations()
        .iter()
        .zip(&f0)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    // mass
    let mut sim = perturbed(32, 24, 0.7, Boundaries::periodic());
    let m0 = sim.total_mass();
    for _ in 0..10_000 {
        sim.step().unwrap();
    }
    let mass = (sim.total_mass() - m0).abs() / m0;

    // mirror in x
    let mut a = perturbed(18, 14, 0.75, Boundaries::closed_box());
    let mut b = Simulation::new(lattice_config(18, 14, 0.75, Boundaries::closed_box())).unwrap();
    for y in 0..14 {
        for x in 0..18 {
            let s = a.state(x, y);
            b.set_state(17 - x, y, MacroState::new(s.h, [-s.u[0], s.u[1]]))
                .unwrap();
        }
    }
    for _ in 0..300 {
        a.step().unwrap();
        b.step().unwrap();
    }
    let mut mirror = 0.0f64;
    for y in 0..14 {
        for x in 0..18 {
            let (p, q) = (a.state(x, y), b.state(17 - x, y));
            mirror = mirror
                .max((p.h - q.h).abs())
                .max((p.u[0] + q.u[0]).abs())
                .max((p.u[1] - q.u[1]).abs());
        }
    }

    // shear wave
    let mut worst_nu = 0.0f64;
    for tau in [0.6, 0.8, 1.0, 1.5] {
        let ny = 64;
        let mut sim = Simulation::new(lattice_config(4, ny, tau, Boundaries::periodic())).unwrap();
        let k = 2.0 * PI / ny as f64;
        for y in 0..ny {
            for x in 0..4 {
                let u = 1e-4 * (k * y as f64).sin();
                sim.set_state(x, y, MacroState::new(1.0, [u, 0.0])).unwrap();
            }
        }
        let amp = |s: &Simulation| {
            (0..ny)
                .map(|y| s.state(0, y).u[0] * (k * y as f64).sin())
                .sum::<f64>()
        };
        let a0 = amp(&sim);
        for _ in 0..1500 {
            sim.step().unwrap();
        }
        let nu = -(amp(&sim) / a0).ln() / (k * k * 1500.0);
        worst_nu = worst_nu.max((nu / lb_viscosity(tau) - 1.0).abs());
    }

    Outcome {
        pass: drift < 1e-14 && mass < 1e-12 && mirror < 1e-12 && worst_nu < 0.05,
        detail: format!(
            "fixed-point drift {drift:.1e}, mass change {mass:.1e} over 10⁴ steps, mirror error {mirror:.1e}, \
             worst viscosity error {:.2}% (≤ 5%)",
            100.0 * worst_nu
        ),
    }
}

fn main() {
    println!("acceptance run");
    let results = [
        report(1, "stability theory", stability_suite),
        report(2, "λ symmetry", lambda_symmetry),
        report(7, "solver properties", solver_suite),
        report(3, "hump 500x50", hump),
        report(5, "tidal wave", tidal),
        report(6, "sudden expansion", expansion),
        report(4, "tables 1 and 2", tables_1_2),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
}
