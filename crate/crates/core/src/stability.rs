//! Stability structures of the discrete-velocity models at rest states.
//!
//! A model is stable at f* = f^eq(h̄, 0) when there is an invertible P with
//! PᵀP diagonal and P·J_f(f*) = −diag(λ)·P, where λ has d + 1 = 3 zeros
//! followed by positive entries. Since the equilibrium Jacobian is a
//! projection, τJ_f(f*) = J − I has eigenvalues 0 and −1; the work is in
//! finding a diagonal symmetrizer B with B·J symmetric and positive definite
//! B, from which P follows.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{equilibrium_jacobian, EquilibriumSpec, Family, LatticeError, MacroState};

/// Default tolerance for projection and symmetry defects (max-norm, relative).
pub const DEFAULT_TOL: f64 = 1e-10;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-9;
/// Absolute window around 0 and −1 when counting τ-scaled eigenvalues.
pub const EIGEN_COUNT_TOL: f64 = 1e-8;
/// Number of conserved moments (d + 1 in two dimensions).
pub const CONSERVED: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("singular scaling: denominator of entry {index} vanishes")]
    SingularScaling { index: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no stability structure: verdict is {0}")]
    NotStable(Verdict),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Stable => "Stable",
            Verdict::Unstable => "Unstable",
            Verdict::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub projection_defect: f64,
    /// Diagonal of the symmetrizer (B₀, C₀ or D₀ depending on the family).
    pub scaling_diag: Vec<f64>,
    pub scaling_positive_definite: bool,
    pub symmetry_defect: f64,
    pub jacobian_rank: usize,
    pub collision_rank: usize,
    /// Real parts of the eigenvalues of J_f(f*), descending.
    pub eigenvalues: Vec<f64>,
    /// Largest imaginary part met while computing `eigenvalues`.
    pub max_imag: f64,
    pub verdict: Verdict,
}

/// The triple (P, a, λ).
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityStructure {
    pub p: DMatrix<f64>,
    pub a: DVector<f64>,
    pub lam: DVector<f64>,
}

/// Admissible reduced gravity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GInterval {
    /// Open interval (lo, hi).
    Open { lo: f64, hi: f64 },
    /// A single admissible value.
    Point(f64),
}

impl GInterval {
    pub fn contains(&self, g: f64) -> bool {
        match *self {
            GInterval::Open { lo, hi } => g > lo && g < hi,
            GInterval::Point(p) => g == p,
        }
    }

    /// Relative distance of `g` to the nearest endpoint or point.
    pub fn relative_distance_to_boundary(&self, g: f64) -> f64 {
        match *self {
            GInterval::Open { lo, hi } => {
                let d_lo = (g - lo).abs() / hi.abs().max(f64::MIN_POSITIVE);
                let d_hi = (g - hi).abs() / hi.abs().max(f64::MIN_POSITIVE);
                d_lo.min(d_hi)
            }
            GInterval::Point(p) => (g - p).abs() / p.abs().max(f64::MIN_POSITIVE),
        }
    }
}

impl fmt::Display for GInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GInterval::Open { lo, hi } => write!(f, "({lo}, {hi})"),
            GInterval::Point(p) => write!(f, "{{{p}}}"),
        }
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn relative(defect: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        defect / scale
    } else {
        defect
    }
}

/// Numerical rank: singular values above `RANK_REL_TOL` × the largest.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_REL_TOL * smax).count()
}

/// Iteration budget of the Schur decomposition behind [`spectrum`].
pub const SCHUR_MAX_ITER: usize = 10_000;

/// Real parts (descending) and the largest |imaginary part| of the spectrum,
/// or `None` when the Schur iteration does not converge.
///
/// The QR deflation test is relative to the diagonal, so clustered zero
/// eigenvalues never deflate, and at machine epsilon repeated eigenvalues
/// can stall. The matrix is shifted by an off-grid multiple of its norm and
/// the deflation tolerance is relaxed step by step until QR converges.
pub fn spectrum(m: &DMatrix<f64>) -> Option<(Vec<f64>, f64)> {
    let n = m.nrows();
    let shift = 0.739_085_133 * m.amax().max(f64::MIN_POSITIVE);
    let shifted = m + DMatrix::<f64>::identity(n, n) * shift;
    let schur = [1e-14, 1e-13, 1e-12]
        .into_iter()
        .find_map(|eps| Schur::try_new(shifted.clone(), eps, SCHUR_MAX_ITER))?;
    let ev = schur.complex_eigenvalues();
    let max_imag = ev.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    let mut re: Vec<f64> = ev.iter().map(|z| z.re - shift).collect();
    re.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Some((re, max_imag))
}

/// ‖J² − J‖∞ / ‖J‖∞ (entrywise max norm).
pub fn projection_defect(j: &DMatrix<f64>) -> f64 {
    relative(max_abs(&(j * j - j)), max_abs(j))
}

/// Diagonal symmetrizer of the rest-state Jacobian: entry i is the
/// reciprocal of ∂_h f^eq_i at (h̄, 0).
pub fn scaling_matrix(spec: &EquilibriumSpec, hbar: f64) -> Result<Vec<f64>, StabilityError> {
    spec.validate()?;
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(StabilityError::InvalidParameter(format!(
            "rest depth must be positive, got {hbar}"
        )));
    }
    let e2 = spec.e * spec.e;
    let gh = spec.g * hbar;
    let lam = spec.effective_lambda();
    let n = spec.model().population_count();
    // (numerator, denominator) per distinct entry, written in the
    // printed forms so that exact zeros are detected.
    let entries: Vec<(f64, f64)> = match spec.family {
        Family::D2Q7 => {
            let mut v = vec![(3.0 * e2, gh); n];
            v[0] = (e2, e2 - 2.0 * gh);
            v
        }
        Family::D2Q9Salmon | Family::D2Q9Standard => {
            let mut v = vec![(3.0 * e2, gh); n];
            v[0] = (3.0 * e2, 3.0 * e2 - 5.0 * gh);
            for entry in v.iter_mut().skip(5) {
                *entry = (12.0 * e2, gh);
            }
            v
        }
        Family::D2Q9Lambda => {
            let rest = (9.0 * e2, (8.0 + lam) * e2 - 3.0 * (4.0 + lam) * gh);
            let axis = (18.0 * e2, (1.0 - lam) * e2 + 3.0 * (1.0 + lam) * gh);
            let diag = (36.0 * e2, (lam - 1.0) * e2 + 3.0 * (2.0 - lam) * gh);
            let mut v = vec![axis; n];
            v[0] = rest;
            for entry in v.iter_mut().skip(5) {
                *entry = diag;
            }
            v
        }
    };
    entries
        .into_iter()
        .enumerate()
        .map(|(index, (num, den))| {
            if den == 0.0 {
                Err(StabilityError::SingularScaling { index })
            } else {
                Ok(num / den)
            }
        })
        .collect()
}

fn check_inputs(hbar: f64, tau: f64, tol: f64) -> Result<(), StabilityError> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(StabilityError::InvalidParameter(format!(
            "rest depth must be positive, got {hbar}"
        )));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(StabilityError::InvalidParameter(format!(
            "relaxation time must be positive, got {tau}"
        )));
    }
    if !(tol > 0.0) {
        return Err(StabilityError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

/// Collision Jacobian J_f = (J_eq − I)/τ at an arbitrary state.
pub fn collision_jacobian(
    spec: &EquilibriumSpec,
    state: &MacroState,
    tau: f64,
) -> Result<DMatrix<f64>, StabilityError> {
    let j = equilibrium_jacobian(spec, state)?;
    let n = j.nrows();
    Ok((j - DMatrix::identity(n, n)) / tau)
}

/// Check every ingredient of the stability structure at (h̄, 0).
pub fn verify_stability(
    spec: &EquilibriumSpec,
    hbar: f64,
    tau: f64,
    tol: f64,
) -> Result<StabilityReport, StabilityError> {
    check_inputs(hbar, tau, tol)?;
    let j = equilibrium_jacobian(spec, &MacroState::rest(hbar))?;
    let n = j.nrows();
    let projection_defect = projection_defect(&j);

    let scaling_diag = scaling_matrix(spec, hbar)?;
    let scaling_positive_definite = scaling_diag.iter().all(|&b| b > 0.0 && b.is_finite());

    let sj = DMatrix::from_fn(n, n, |r, c| scaling_diag[r] * j[(r, c)]);
    let symmetry_defect = relative(max_abs(&(&sj - sj.transpose())), max_abs(&sj));

    let jacobian_rank = numerical_rank(&j);
    let identity = DMatrix::<f64>::identity(n, n);
    let collision = (&j - &identity) / tau;
    let collision_rank = numerical_rank(&collision);
    let computed = spectrum(&collision);
    let converged = computed.is_some();
    let (eigenvalues, max_imag) = computed.unwrap_or((Vec::new(), f64::NAN));

    let zeros = eigenvalues
        .iter()
        .filter(|&&l| (tau * l).abs() < EIGEN_COUNT_TOL)
        .count();
    let relaxing = eigenvalues
        .iter()
        .filter(|&&l| (tau * l + 1.0).abs() < EIGEN_COUNT_TOL)
        .count();
    let spectrum_ok = zeros == CONSERVED
        && relaxing == n - CONSERVED
        && tau * max_imag < EIGEN_COUNT_TOL
        && jacobian_rank == CONSERVED
        && collision_rank == n - CONSERVED;

    let structural = projection_defect < tol && spectrum_ok && scaling_positive_definite;
    let other_checks = projection_defect < tol
        && scaling_positive_definite
        && jacobian_rank == CONSERVED
        && collision_rank == n - CONSERVED;
    let verdict = if !converged {
        // no spectrum: only a failure elsewhere settles the verdict
        if other_checks && symmetry_defect < 100.0 * tol {
            Verdict::Indeterminate
        } else {
            Verdict::Unstable
        }
    } else if structural && symmetry_defect < tol {
        Verdict::Stable
    } else if structural && symmetry_defect < 100.0 * tol {
        Verdict::Indeterminate
    } else {
        Verdict::Unstable
    };

    Ok(StabilityReport {
        projection_defect,
        scaling_diag,
        scaling_positive_definite,
        symmetry_defect,
        jacobian_rank,
        collision_rank,
        eigenvalues,
        max_imag,
        verdict,
    })
}

/// Build (P, a, λ) at (h̄, 0).
///
/// With B the diagonal symmetrizer and M = −τJ_f(f*), the matrix
/// S = B^{1/2} M B^{-1/2} is symmetric; S = QΛQᵀ gives P = Qᵀ B^{1/2}, so
/// PᵀP = B and P·J_f(f*) = −(Λ/τ)·P.
pub fn construct_structure(
    spec: &EquilibriumSpec,
    hbar: f64,
    tau: f64,
) -> Result<StabilityStructure, StabilityError> {
    let report = verify_stability(spec, hbar, tau, DEFAULT_TOL)?;
    if report.verdict != Verdict::Stable {
        return Err(StabilityError::NotStable(report.verdict));
    }
    let j = equilibrium_jacobian(spec, &MacroState::rest(hbar))?;
    let n = j.nrows();
    let m = DMatrix::<f64>::identity(n, n) - &j;
    let sqrt_b: Vec<f64> = report.scaling_diag.iter().map(|b| b.sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |r, c| sqrt_b[r] * m[(r, c)] / sqrt_b[c]);
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let p = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(c, order[r])] * sqrt_b[c]);
    let lam = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k] / tau));
    let a = DVector::from_vec(report.scaling_diag);
    Ok(StabilityStructure { p, a, lam })
}

/// Residuals of the defining relations, each relative to the natural scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureResiduals {
    /// Largest off-diagonal |PᵀP| over max |a|.
    pub off_diagonal: f64,
    /// max |diag(PᵀP) − a| over max |a|.
    pub diagonal: f64,
    /// ‖P J_f + diag(λ) P‖ over ‖P‖·‖J_f‖.
    pub similarity: f64,
}

impl StabilityStructure {
    pub fn residuals(&self, collision_jacobian: &DMatrix<f64>) -> StructureResiduals {
        let n = self.p.nrows();
        let ptp = self.p.transpose() * &self.p;
        let amax = self.a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let mut off = 0.0_f64;
        let mut diag = 0.0_f64;
        for r in 0..n {
            for c in 0..n {
                if r == c {
                    diag = diag.max((ptp[(r, c)] - self.a[r]).abs());
                } else {
                    off = off.max(ptp[(r, c)].abs());
                }
            }
        }
        let lhs = &self.p * collision_jacobian;
        let rhs = DMatrix::from_fn(n, n, |r, c| -self.lam[r] * self.p[(r, c)]);
        let scale = max_abs(&self.p) * max_abs(collision_jacobian);
        StructureResiduals {
            off_diagonal: relative(off, amax),
            diagonal: relative(diag, amax),
            similarity: relative(max_abs(&(lhs - rhs)), scale),
        }
    }
}

/// Closed-form admissible reduced gravity for a family at rest depth h̄.
pub fn stable_g_interval(
    family: Family,
    hbar: f64,
    e: f64,
    lambda: Option<f64>,
) -> Result<GInterval, StabilityError> {
    if !(hbar > 0.0 && e > 0.0) {
        return Err(StabilityError::InvalidParameter(format!(
            "need h̄ > 0 and e > 0, got h̄ = {hbar}, e = {e}"
        )));
    }
    let e2 = e * e;
    Ok(match family {
        Family::D2Q7 => GInterval::Open {
            lo: 0.0,
            hi: e2 / (2.0 * hbar),
        },
        Family::D2Q9Salmon | Family::D2Q9Standard => GInterval::Open {
            lo: 0.0,
            hi: 3.0 * e2 / (5.0 * hbar),
        },
        Family::D2Q9Lambda => {
            if lambda.unwrap_or(1.0) == 1.0 {
                GInterval::Open {
                    lo: 0.0,
                    hi: 3.0 * e2 / (5.0 * hbar),
                }
            } else {
                GInterval::Point(e2 / (3.0 * hbar))
            }
        }
    })
}

/// Admissible interval of the five-velocity model (rest, four axis links).
pub fn d2q5_stable_g_interval(hbar: f64, e: f64) -> Result<GInterval, StabilityError> {
    stable_g_interval(Family::D2Q7, hbar, e, None)
}

/// Bound 3/(5e) obtained by dividing the unit-depth lattice bound by the
/// lattice speed; dimensionally different from `stable_g_interval`.
pub fn lattice_speed_g_bound(e: f64) -> f64 {
    3.0 / (5.0 * e)
}

/// One cell of a verdict map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCell {
    pub g: f64,
    pub lambda: Option<f64>,
    pub outcome: Result<CellSummary, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSummary {
    pub verdict: Verdict,
    pub projection_defect: f64,
    pub symmetry_defect: f64,
    pub jacobian_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictMap {
    pub family: Family,
    pub hbar: f64,
    pub tau: f64,
    pub tol: f64,
    /// λ-major, then g, in grid order.
    pub cells: Vec<ScanCell>,
}

#[derive(Serialize)]
struct CsvRow {
    g: f64,
    lambda: Option<f64>,
    verdict: String,
    projection_defect: Option<f64>,
    symmetry_defect: Option<f64>,
    rank: Option<usize>,
}

impl VerdictMap {
    pub fn verdicts(&self) -> Vec<Option<Verdict>> {
        self.cells
            .iter()
            .map(|c| c.outcome.as_ref().ok().map(|s| s.verdict))
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), StabilityError> {
        let mut w = csv::Writer::from_writer(out);
        for cell in &self.cells {
            let row = match &cell.outcome {
                Ok(s) => CsvRow {
                    g: cell.g,
                    lambda: cell.lambda,
                    verdict: s.verdict.to_string(),
                    projection_defect: Some(s.projection_defect),
                    symmetry_defect: Some(s.symmetry_defect),
                    rank: Some(s.jacobian_rank),
                },
                Err(msg) => CsvRow {
                    g: cell.g,
                    lambda: cell.lambda,
                    verdict: format!("Error: {msg}"),
                    projection_defect: None,
                    symmetry_defect: None,
                    rank: None,
                },
            };
            w.serialize(row)
                .map_err(|e| StabilityError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| StabilityError::Io(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), StabilityError> {
        let file = std::fs::File::create(path).map_err(|e| StabilityError::Io(e.to_string()))?;
        self.write_csv(file)
    }
}

/// Verdicts over a (λ, g) grid. The family, e and (when `lambda_grid` is
/// empty) λ come from `template`.
pub fn scan(
    template: &EquilibriumSpec,
    g_grid: &[f64],
    lambda_grid: &[f64],
    hbar: f64,
    tau: f64,
    tol: f64,
) -> Result<VerdictMap, StabilityError> {
    if g_grid.is_empty() {
        return Err(StabilityError::InvalidParameter("empty g grid".into()));
    }
    check_inputs(hbar, tau, tol)?;
    let lambdas: Vec<Option<f64>> = if lambda_grid.is_empty() {
        vec![None]
    } else {
        lambda_grid.iter().copied().map(Some).collect()
    };
    let jobs: Vec<(Option<f64>, f64)> = lambdas
        .iter()
        .flat_map(|&l| g_grid.iter().map(move |&g| (l, g)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(lambda, g)| {
            let outcome = EquilibriumSpec::new(
                template.family,
                g,
                template.e,
                lambda.unwrap_or(template.lambda),
            )
            .map_err(StabilityError::from)
            .and_then(|spec| verify_stability(&spec, hbar, tau, tol))
            .map(|r| CellSummary {
                verdict: r.verdict,
                projection_defect: r.projection_defect,
                symmetry_defect: r.symmetry_defect,
                jacobian_rank: r.jacobian_rank,
            })
            .map_err(|e| e.to_string());
            ScanCell { g, lambda, outcome }
        })
        .collect();
    Ok(VerdictMap {
        family: template.family,
        hbar,
        tau,
        tol,
        cells,
    })
}
