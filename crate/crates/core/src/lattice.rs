//! Discrete velocity sets, shallow-water equilibria and their Jacobians.
//!
//! Every equilibrium handled here is quadratic in velocity and can be written
//! per direction as
//!
//! ```text
//! f_i = a_i h + b_i g h²/e² + c_i h (ξ_i·u)/e² + d_i h (ξ_i·u)²/e⁴ + k_i h |u|²/e²
//! ```
//!
//! so a single coefficient table per family drives the populations, the
//! Jacobian with respect to the populations and the force weights.
//!
//! D2Q9 direction numbering:
//! ```text
//!   6   2   5
//!    \  |  /
//!   3 - 0 - 1
//!    /  |  \
//!   7   4   8
//! ```

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer lattice directions of the D2Q9 set (units of e).
pub const D2Q9_DIRECTIONS: [[i32; 2]; 9] = [
    [0, 0],
    [1, 0],
    [0, 1],
    [-1, 0],
    [0, -1],
    [1, 1],
    [-1, 1],
    [-1, -1],
    [1, -1],
];

/// Opposite direction of each D2Q9 link, used by bounce-back.
pub const D2Q9_OPPOSITE: [usize; 9] = [0, 3, 4, 1, 2, 7, 8, 5, 6];

/// D2Q9 weight factors f*_i.
pub const D2Q9_WEIGHTS: [f64; 9] = [
    4.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
];

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Hexagonal D2Q7 directions (units of e): rest plus cos/sin of (i-1)π/3.
const D2Q7_DIRECTIONS: [[f64; 2]; 7] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [0.5, SQRT3_2],
    [-0.5, SQRT3_2],
    [-1.0, 0.0],
    [-0.5, -SQRT3_2],
    [0.5, -SQRT3_2],
];

/// Force weights for D2Q7. The rest particle carries no momentum; the moving
/// weight makes Σ 3wᵢξᵢξᵢ/e² the identity on the hexagonal set.
const D2Q7_FORCE_WEIGHTS: [f64; 7] = [
    0.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("unknown model identifier `{0}`")]
    UnknownModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("nonpositive depth h = {0}")]
    NonpositiveDepth(f64),
    #[error("dry or invalid node: population sum {0} is not positive")]
    DryNode(f64),
    #[error("population vector has length {got}, velocity set expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    D2Q7,
    D2Q9,
}

impl Model {
    pub fn population_count(self) -> usize {
        match self {
            Model::D2Q7 => 7,
            Model::D2Q9 => 9,
        }
    }
}

impl FromStr for Model {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "d2q7" => Ok(Model::D2Q7),
            "d2q9" => Ok(Model::D2Q9),
            other => Err(LatticeError::UnknownModel(other.to_string())),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::D2Q7 => f.write_str("D2Q7"),
            Model::D2Q9 => f.write_str("D2Q9"),
        }
    }
}

/// A discrete velocity set scaled by the lattice speed `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySet {
    pub model: Model,
    pub n: usize,
    pub e: f64,
    pub xi: Vec<[f64; 2]>,
    /// Weight factors f*_i. For D2Q7 these are the force weights.
    pub weights: Vec<f64>,
}

/// Build the velocity set of `model` with lattice speed `e`.
pub fn velocity_set(model: Model, e: f64) -> Result<VelocitySet, LatticeError> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(LatticeError::InvalidParameter(format!(
            "lattice speed must be positive, got {e}"
        )));
    }
    let (xi, weights): (Vec<[f64; 2]>, Vec<f64>) = match model {
        Model::D2Q9 => (
            D2Q9_DIRECTIONS
                .iter()
                .map(|c| [c[0] as f64 * e, c[1] as f64 * e])
                .collect(),
            D2Q9_WEIGHTS.to_vec(),
        ),
        Model::D2Q7 => (
            D2Q7_DIRECTIONS
                .iter()
                .map(|c| [c[0] * e, c[1] * e])
                .collect(),
            D2Q7_FORCE_WEIGHTS.to_vec(),
        ),
    };
    Ok(VelocitySet {
        model,
        n: model.population_count(),
        e,
        xi,
        weights,
    })
}

impl FromStr for VelocitySet {
    type Err = LatticeError;

    /// Parses a model identifier and returns the unit-speed set.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        velocity_set(s.parse()?, 1.0)
    }
}

/// Equilibrium family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    D2Q7,
    D2Q9Salmon,
    D2Q9Lambda,
    /// The D2Q9 model written in lattice units; same populations as
    /// `D2Q9Salmon` with e = 1.
    D2Q9Standard,
}

impl Family {
    pub fn model(self) -> Model {
        match self {
            Family::D2Q7 => Model::D2Q7,
            _ => Model::D2Q9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::D2Q7 => "d2q7",
            Family::D2Q9Salmon => "d2q9-salmon",
            Family::D2Q9Lambda => "d2q9-lambda",
            Family::D2Q9Standard => "d2q9-standard",
        }
    }
}

impl FromStr for Family {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "d2q7" => Ok(Family::D2Q7),
            "d2q9-salmon" | "salmon" => Ok(Family::D2Q9Salmon),
            "d2q9-lambda" | "lambda" => Ok(Family::D2Q9Lambda),
            "d2q9-standard" | "d2q9" | "standard" => Ok(Family::D2Q9Standard),
            other => Err(LatticeError::UnknownModel(other.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which equilibrium to use and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSpec {
    pub family: Family,
    /// Reduced gravity.
    pub g: f64,
    /// Lattice speed. Always 1 for `D2Q9Standard`.
    pub e: f64,
    /// Free parameter of `D2Q9Lambda`; ignored by the other families.
    #[serde(default = "one")]
    pub lambda: f64,
}

fn one() -> f64 {
    1.0
}

impl EquilibriumSpec {
    pub fn new(family: Family, g: f64, e: f64, lambda: f64) -> Result<Self, LatticeError> {
        let spec = Self {
            family,
            g,
            e,
            lambda,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn d2q7(g: f64, e: f64) -> Result<Self, LatticeError> {
        Self::new(Family::D2Q7, g, e, 1.0)
    }

    pub fn salmon(g: f64, e: f64) -> Result<Self, LatticeError> {
        Self::new(Family::D2Q9Salmon, g, e, 1.0)
    }

    pub fn lambda_model(g: f64, e: f64, lambda: f64) -> Result<Self, LatticeError> {
        Self::new(Family::D2Q9Lambda, g, e, lambda)
    }

    pub fn standard(g: f64) -> Result<Self, LatticeError> {
        Self::new(Family::D2Q9Standard, g, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(LatticeError::InvalidParameter(format!(
                "reduced gravity must be positive and finite, got {}",
                self.g
            )));
        }
        if !(self.e > 0.0 && self.e.is_finite()) {
            return Err(LatticeError::InvalidParameter(format!(
                "lattice speed must be positive and finite, got {}",
                self.e
            )));
        }
        if self.family == Family::D2Q9Standard && self.e != 1.0 {
            return Err(LatticeError::InvalidParameter(format!(
                "d2q9-standard is defined in lattice units (e = 1), got e = {}",
                self.e
            )));
        }
        if !self.lambda.is_finite() {
            return Err(LatticeError::InvalidParameter(
                "lambda must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn model(&self) -> Model {
        self.family.model()
    }

    /// λ actually used by the coefficient table (1 for the Salmon forms).
    pub fn effective_lambda(&self) -> f64 {
        match self.family {
            Family::D2Q9Lambda => self.lambda,
            _ => 1.0,
        }
    }

    pub fn velocity_set(&self) -> VelocitySet {
        velocity_set(self.model(), self.e).expect("validated lattice speed")
    }

    /// Per-direction equilibrium coefficients.
    pub fn coefficients(&self) -> Vec<EqCoefficients> {
        match self.family {
            Family::D2Q7 => {
                let moving = EqCoefficients {
                    a: 0.0,
                    b: 1.0 / 6.0,
                    c: 1.0 / 3.0,
                    d: 2.0 / 3.0,
                    k: -1.0 / 6.0,
                };
                let mut out = vec![moving; 7];
                out[0] = EqCoefficients {
                    a: 1.0,
                    b: -1.0,
                    c: 0.0,
                    d: 0.0,
                    k: -1.0,
                };
                out
            }
            _ => d2q9_coefficients(self.effective_lambda()).to_vec(),
        }
    }
}

/// Coefficients of one equilibrium population, see the module docs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub k: f64,
}

/// D2Q9 coefficient table of the λ family; λ = 1 gives the Salmon equilibrium.
pub fn d2q9_coefficients(lambda: f64) -> [EqCoefficients; 9] {
    let rest = EqCoefficients {
        a: (8.0 + lambda) / 9.0,
        b: -(4.0 + lambda) / 6.0,
        c: 0.0,
        d: 0.0,
        k: -2.0 / 3.0,
    };
    let axis = EqCoefficients {
        a: (1.0 - lambda) / 18.0,
        b: (1.0 + lambda) / 12.0,
        c: 1.0 / 3.0,
        d: 0.5,
        k: -1.0 / 6.0,
    };
    let diag = EqCoefficients {
        a: (lambda - 1.0) / 36.0,
        b: (2.0 - lambda) / 24.0,
        c: 1.0 / 12.0,
        d: 1.0 / 8.0,
        k: -1.0 / 24.0,
    };
    [rest, axis, axis, axis, axis, diag, diag, diag, diag]
}

/// Water depth and depth-averaged velocity at a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    pub h: f64,
    pub u: [f64; 2],
}

impl MacroState {
    pub fn new(h: f64, u: [f64; 2]) -> Self {
        Self { h, u }
    }

    pub fn rest(h: f64) -> Self {
        Self { h, u: [0.0, 0.0] }
    }

    fn check(&self) -> Result<(), LatticeError> {
        if self.h > 0.0 && self.h.is_finite() {
            Ok(())
        } else {
            Err(LatticeError::NonpositiveDepth(self.h))
        }
    }
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Equilibrium populations for `state`.
pub fn equilibrium(spec: &EquilibriumSpec, state: &MacroState) -> Result<Vec<f64>, LatticeError> {
    state.check()?;
    let vs = spec.velocity_set();
    let coeffs = spec.coefficients();
    let e2 = spec.e * spec.e;
    let e4 = e2 * e2;
    let h = state.h;
    let u = state.u;
    let usq = dot(u, u);
    Ok(vs
        .xi
        .iter()
        .zip(&coeffs)
        .map(|(xi, c)| {
            let xu = dot(*xi, u);
            c.a * h
                + c.b * spec.g * h * h / e2
                + c.c * h * xu / e2
                + c.d * h * xu * xu / e4
                + c.k * h * usq / e2
        })
        .collect())
}

/// Jacobian ∂f^eq_i/∂f_j. The equilibrium depends on the populations only
/// through h = Σf and hu = Σξf, so entry (i, j) = ∂_h f_i + ∂_{hu} f_i · ξ_j.
pub fn equilibrium_jacobian(
    spec: &EquilibriumSpec,
    state: &MacroState,
) -> Result<DMatrix<f64>, LatticeError> {
    state.check()?;
    let vs = spec.velocity_set();
    let coeffs = spec.coefficients();
    let e2 = spec.e * spec.e;
    let e4 = e2 * e2;
    let h = state.h;
    let u = state.u;
    let usq = dot(u, u);
    let n = vs.n;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let c = &coeffs[i];
        let xi = vs.xi[i];
        let xj = vs.xi[j];
        let xu = dot(xi, u);
        let xixj = dot(xi, xj);
        c.a + 2.0 * c.b * spec.g * h / e2
            + c.c * xixj / e2
            + c.d * (2.0 * xu * xixj - xu * xu) / e4
            + c.k * (2.0 * dot(u, xj) - usq) / e2
    }))
}

/// Depth and velocity carried by a population vector.
pub fn moments(f: &[f64], vs: &VelocitySet) -> Result<MacroState, LatticeError> {
    if f.len() != vs.n {
        return Err(LatticeError::LengthMismatch {
            expected: vs.n,
            got: f.len(),
        });
    }
    let mut h = 0.0;
    let mut m = [0.0; 2];
    for (fi, xi) in f.iter().zip(&vs.xi) {
        h += fi;
        m[0] += xi[0] * fi;
        m[1] += xi[1] * fi;
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(LatticeError::DryNode(h));
    }
    Ok(MacroState {
        h,
        u: [m[0] / h, m[1] / h],
    })
}

/// Momentum flux tensor Π = Σ ξ_i ⊗ ξ_i f_i.
pub fn momentum_flux(f: &[f64], vs: &VelocitySet) -> Result<[[f64; 2]; 2], LatticeError> {
    if f.len() != vs.n {
        return Err(LatticeError::LengthMismatch {
            expected: vs.n,
            got: f.len(),
        });
    }
    let mut pi = [[0.0; 2]; 2];
    for (fi, xi) in f.iter().zip(&vs.xi) {
        pi[0][0] += xi[0] * xi[0] * fi;
        pi[0][1] += xi[0] * xi[1] * fi;
        pi[1][1] += xi[1] * xi[1] * fi;
    }
    pi[1][0] = pi[0][1];
    Ok(pi)
}
