//! System definitions for one-dimensional hyperbolic-parabolic conservation
//! laws `G(U)_t + F(U)_x = (B(U) U_x)_x` with block-degenerate viscosity,
//! plus the builtin test systems used throughout the crate.
//!
//! A system is a bundle of evaluators for `G`, `F`, `B` and their Jacobians
//! around a base point. Symmetric systems have symmetric `dF`, `dG`, `B`
//! with `dG > 0`; symmetrizable systems carry an explicit symmetrizer
//! `S(U) > 0` such that `S dG`, `S dF` are symmetric and `S B >= 0`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
/// Derivative of a matrix evaluator: one `n x n` matrix per state component.
pub type TensorFn = Arc<dyn Fn(&DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync>;

/// How the first-order part of the system is symmetrized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryClass {
    /// `dF`, `dG`, `B` symmetric as given.
    Symmetric,
    /// Symmetric only after multiplication by the stored symmetrizer.
    Symmetrizable,
}

/// A hyperbolic-parabolic system near a base point.
#[derive(Clone)]
pub struct SystemDefinition {
    pub name: String,
    /// State dimension.
    pub n: usize,
    /// Parabolic block size, `1 <= r < n`.
    pub r: usize,
    pub base_point: DVector<f64>,
    pub neighborhood_radius: f64,
    pub symmetry: SymmetryClass,
    eval_g: VectorFn,
    eval_f: VectorFn,
    eval_b: MatrixFn,
    jac_g: MatrixFn,
    jac_f: MatrixFn,
    jac_b: TensorFn,
    symmetrizer: Option<MatrixFn>,
}

impl std::fmt::Debug for SystemDefinition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemDefinition")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("r", &self.r)
            .field("base_point", &self.base_point)
            .field("symmetry", &self.symmetry)
            .finish()
    }
}

/// Hyperbolic/parabolic split of a state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSplit {
    pub hyperbolic: DVector<f64>,
    pub parabolic: DVector<f64>,
}

impl StateSplit {
    pub fn split(u: &DVector<f64>, r: usize) -> Self {
        let n = u.len();
        StateSplit {
            hyperbolic: u.rows(0, n - r).into_owned(),
            parabolic: u.rows(n - r, r).into_owned(),
        }
    }

    pub fn join(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.hyperbolic.len() + self.parabolic.len());
        out.rows_mut(0, self.hyperbolic.len())
            .copy_from(&self.hyperbolic);
        out.rows_mut(self.hyperbolic.len(), self.parabolic.len())
            .copy_from(&self.parabolic);
        out
    }
}

/// All evaluator and Jacobian values at one state.
#[derive(Debug, Clone)]
pub struct SystemEval {
    pub g: DVector<f64>,
    pub f: DVector<f64>,
    pub b: DMatrix<f64>,
    pub dg: DMatrix<f64>,
    pub df: DMatrix<f64>,
    pub db: Vec<DMatrix<f64>>,
}

/// Builder for user-registered systems. Missing Jacobians are substituted by
/// central finite differences with step `1e-6 * (1 + |U|)`.
pub struct SystemBuilder {
    name: String,
    n: usize,
    r: usize,
    base_point: DVector<f64>,
    neighborhood_radius: f64,
    symmetry: SymmetryClass,
    eval_g: VectorFn,
    eval_f: VectorFn,
    eval_b: MatrixFn,
    jac_g: Option<MatrixFn>,
    jac_f: Option<MatrixFn>,
    jac_b: Option<TensorFn>,
    symmetrizer: Option<MatrixFn>,
}

fn fd_jacobian(f: &VectorFn, u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let m = f(u).len();
    let h = 1e-6 * (1.0 + u.norm());
    let mut jac = DMatrix::zeros(m, n);
    for k in 0..n {
        let mut up = u.clone();
        let mut um = u.clone();
        up[k] += h;
        um[k] -= h;
        jac.set_column(k, &((f(&up) - f(&um)) / (2.0 * h)));
    }
    jac
}

fn fd_matrix_derivative(b: &MatrixFn, u: &DVector<f64>) -> Vec<DMatrix<f64>> {
    let n = u.len();
    let h = 1e-6 * (1.0 + u.norm());
    (0..n)
        .map(|k| {
            let mut up = u.clone();
            let mut um = u.clone();
            up[k] += h;
            um[k] -= h;
            (b(&up) - b(&um)) / (2.0 * h)
        })
        .collect()
}

impl SystemBuilder {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        r: usize,
        eval_g: VectorFn,
        eval_f: VectorFn,
        eval_b: MatrixFn,
    ) -> Self {
        assert!(r >= 1 && r < n, "parabolic block must satisfy 1 <= r < n");
        SystemBuilder {
            name: name.into(),
            n,
            r,
            base_point: DVector::zeros(n),
            neighborhood_radius: 0.5,
            symmetry: SymmetryClass::Symmetric,
            eval_g,
            eval_f,
            eval_b,
            jac_g: None,
            jac_f: None,
            jac_b: None,
            symmetrizer: None,
        }
    }

    pub fn base_point(mut self, u: DVector<f64>) -> Self {
        self.base_point = u;
        self
    }

    pub fn neighborhood_radius(mut self, radius: f64) -> Self {
        self.neighborhood_radius = radius;
        self
    }

    pub fn jacobians(mut self, jac_g: MatrixFn, jac_f: MatrixFn, jac_b: TensorFn) -> Self {
        self.jac_g = Some(jac_g);
        self.jac_f = Some(jac_f);
        self.jac_b = Some(jac_b);
        self
    }

    pub fn symmetrizer(mut self, s: MatrixFn) -> Self {
        self.symmetrizer = Some(s);
        self.symmetry = SymmetryClass::Symmetrizable;
        self
    }

    pub fn build(self) -> SystemDefinition {
        let jac_g = self.jac_g.unwrap_or_else(|| {
            let g = self.eval_g.clone();
            Arc::new(move |u| fd_jacobian(&g, u))
        });
        let jac_f = self.jac_f.unwrap_or_else(|| {
            let f = self.eval_f.clone();
            Arc::new(move |u| fd_jacobian(&f, u))
        });
        let jac_b = self.jac_b.unwrap_or_else(|| {
            let b = self.eval_b.clone();
            Arc::new(move |u| fd_matrix_derivative(&b, u))
        });
        SystemDefinition {
            name: self.name,
            n: self.n,
            r: self.r,
            base_point: self.base_point,
            neighborhood_radius: self.neighborhood_radius,
            symmetry: self.symmetry,
            eval_g: self.eval_g,
            eval_f: self.eval_f,
            eval_b: self.eval_b,
            jac_g,
            jac_f,
            jac_b,
            symmetrizer: self.symmetrizer,
        }
    }
}

impl SystemDefinition {
    pub fn g(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.eval_g)(u)
    }

    pub fn f(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.eval_f)(u)
    }

    pub fn b(&self, u: &DVector<f64>) -> DMatrix<f64> {
        (self.eval_b)(u)
    }

    pub fn dg(&self, u: &DVector<f64>) -> DMatrix<f64> {
        (self.jac_g)(u)
    }

    pub fn df(&self, u: &DVector<f64>) -> DMatrix<f64> {
        (self.jac_f)(u)
    }

    pub fn db(&self, u: &DVector<f64>) -> Vec<DMatrix<f64>> {
        (self.jac_b)(u)
    }

    /// Symmetrizer `S(U)`; identity for symmetric systems.
    pub fn symmetrizer(&self, u: &DVector<f64>) -> DMatrix<f64> {
        match &self.symmetrizer {
            Some(s) => s(u),
            None => DMatrix::identity(self.n, self.n),
        }
    }

    /// Symmetrized time-weight `A0 = S dG` (symmetric positive definite).
    pub fn a0(&self, u: &DVector<f64>) -> DMatrix<f64> {
        self.symmetrizer(u) * self.dg(u)
    }

    /// Symmetrized flux Jacobian `S dF`.
    pub fn flux_sym(&self, u: &DVector<f64>) -> DMatrix<f64> {
        self.symmetrizer(u) * self.df(u)
    }

    /// Symmetrized viscosity `S B`.
    pub fn viscosity_sym(&self, u: &DVector<f64>) -> DMatrix<f64> {
        self.symmetrizer(u) * self.b(u)
    }

    /// Convection matrix in conservative variables, `A = dF dG^{-1}`.
    pub fn convection_g(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let dg_inv = self
            .dg(u)
            .try_inverse()
            .expect("dG must be invertible on the neighborhood");
        self.df(u) * dg_inv
    }

    /// Viscosity matrix in conservative variables, `B dG^{-1}`.
    pub fn viscosity_g(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let dg_inv = self
            .dg(u)
            .try_inverse()
            .expect("dG must be invertible on the neighborhood");
        self.b(u) * dg_inv
    }

    /// Positive weight `W = dG^{-T} S` making `W (dF dG^{-1})` and
    /// `W (B dG^{-1})` symmetric.
    pub fn weight_g(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let dg = self.dg(u);
        let dg_inv_t = dg
            .transpose()
            .try_inverse()
            .expect("dG must be invertible on the neighborhood");
        dg_inv_t * self.symmetrizer(u)
    }

    /// Lower-right `r x r` viscosity block `b(U)`.
    pub fn b_block(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let b = self.b(u);
        b.view((self.n - self.r, self.n - self.r), (self.r, self.r))
            .into_owned()
    }

    pub fn in_neighborhood(&self, u: &DVector<f64>) -> bool {
        (u - &self.base_point).norm() <= self.neighborhood_radius + 1e-12
    }

    fn require_in_neighborhood(&self, u: &DVector<f64>) -> Result<()> {
        let distance = (u - &self.base_point).norm();
        if distance > self.neighborhood_radius + 1e-12 {
            return Err(Error::OutOfNeighborhood {
                distance,
                radius: self.neighborhood_radius,
            });
        }
        Ok(())
    }

    /// Uniform lattice over the cube inscribed in the validity ball,
    /// `per_axis` points per coordinate.
    pub fn sample_lattice(&self, per_axis: usize) -> Vec<DVector<f64>> {
        let half = self.neighborhood_radius / (self.n as f64).sqrt();
        let mut points = vec![self.base_point.clone()];
        let mut index = vec![0usize; self.n];
        loop {
            let mut u = self.base_point.clone();
            for k in 0..self.n {
                let frac = if per_axis == 1 {
                    0.0
                } else {
                    -1.0 + 2.0 * index[k] as f64 / (per_axis - 1) as f64
                };
                u[k] += frac * half;
            }
            points.push(u);
            let mut k = 0;
            loop {
                index[k] += 1;
                if index[k] < per_axis {
                    break;
                }
                index[k] = 0;
                k += 1;
                if k == self.n {
                    return points;
                }
            }
        }
    }

    /// Invert `G` by Newton iteration: find `U` with `G(U) = g`, starting
    /// from `guess`.
    pub fn invert_g(&self, gval: &DVector<f64>, guess: &DVector<f64>) -> Result<DVector<f64>> {
        let mut u = guess.clone();
        for _ in 0..50 {
            let res = self.g(&u) - gval;
            if res.amax() <= 1e-12 * (1.0 + gval.amax()) {
                return Ok(u);
            }
            let jac = self.dg(&u);
            let step = jac.lu().solve(&res).ok_or_else(|| {
                Error::NewtonDivergence("singular dG while inverting G".into())
            })?;
            u -= step;
        }
        Err(Error::NewtonDivergence(
            "G-inversion did not converge in 50 iterations".into(),
        ))
    }

    /// The same system written in the frame moving with speed `s`
    /// (flux `F - s G`); profiles become stationary solutions.
    pub fn comoving(&self, s: f64) -> SystemDefinition {
        let f = self.eval_f.clone();
        let g = self.eval_g.clone();
        let jf = self.jac_f.clone();
        let jg = self.jac_g.clone();
        let mut shifted = self.clone();
        shifted.name = format!("{} (frame s={s})", self.name);
        shifted.eval_f = Arc::new(move |u: &DVector<f64>| f(u) - g(u) * s);
        shifted.jac_f = Arc::new(move |u: &DVector<f64>| jf(u) - jg(u) * s);
        shifted
    }
}

/// Evaluate every stored map and Jacobian at `U`, with the validity checks
/// required of a well-posed query: `U` inside the neighborhood, finite
/// outputs, and (for symmetric-flagged systems) symmetric `dF`, `dG` with
/// `dG > 0`.
pub fn evaluate_system(sys: &SystemDefinition, u: &DVector<f64>) -> Result<SystemEval> {
    sys.require_in_neighborhood(u)?;
    let eval = SystemEval {
        g: sys.g(u),
        f: sys.f(u),
        b: sys.b(u),
        dg: sys.dg(u),
        df: sys.df(u),
        db: sys.db(u),
    };
    let finite = eval.g.iter().all(|v| v.is_finite())
        && eval.f.iter().all(|v| v.is_finite())
        && eval.b.iter().all(|v| v.is_finite())
        && eval.dg.iter().all(|v| v.is_finite())
        && eval.df.iter().all(|v| v.is_finite());
    if !finite {
        return Err(Error::NonFiniteEvaluation {
            context: format!("system `{}` at U = {:?}", sys.name, u.as_slice()),
        });
    }
    if sys.symmetry == SymmetryClass::Symmetric {
        let defect = crate::linalg::asymmetry(&eval.df).max(crate::linalg::asymmetry(&eval.dg));
        if defect > 1e-10 * (1.0 + eval.df.norm()) {
            return Err(Error::NonFiniteEvaluation {
                context: format!(
                    "system `{}` flagged symmetric but Jacobian asymmetry is {defect:.3e}",
                    sys.name
                ),
            });
        }
        if crate::linalg::min_symmetric_eigenvalue(&eval.dg) <= 0.0 {
            return Err(Error::NonFiniteEvaluation {
                context: format!("system `{}`: dG not positive definite", sys.name),
            });
        }
    }
    Ok(eval)
}

/// Model file payload: a builtin name plus scalar parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn instantiate(&self) -> Result<SystemDefinition> {
        builtin_model(&self.name, &self.params)
    }
}

/// Instantiate a builtin system.
///
/// * `"SYM2"` — the symmetric 2x2 model with `G = U`,
///   `F(u, v) = (v, u + v^2/2)`, `B = diag(0, 1)`; base point `(0, 0)`.
/// * `"isentropic-NS"` — Lagrangian isentropic gas dynamics with gamma-law
///   pressure `p(v) = p0 v^{-gamma}` and viscosity `mu/v`, stored with its
///   symmetrizer `diag(-p'(v), 1)`; parameters `gamma` (> 1), `mu` (> 0),
///   `p0` (> 0), `v0` (> 0).
pub fn builtin_model(name: &str, params: &BTreeMap<String, f64>) -> Result<SystemDefinition> {
    match name {
        "SYM2" => {
            for key in params.keys() {
                return Err(Error::InvalidParameter(format!(
                    "SYM2 takes no parameters, got `{key}`"
                )));
            }
            Ok(sym2())
        }
        "isentropic-NS" => {
            let gamma = *params.get("gamma").unwrap_or(&1.4);
            let mu = *params.get("mu").unwrap_or(&1.0);
            let p0 = *params.get("p0").unwrap_or(&1.0);
            let v0 = *params.get("v0").unwrap_or(&1.0);
            for key in params.keys() {
                if !matches!(key.as_str(), "gamma" | "mu" | "p0" | "v0") {
                    return Err(Error::InvalidParameter(format!(
                        "unknown isentropic-NS parameter `{key}`"
                    )));
                }
            }
            if gamma <= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "gamma must exceed 1, got {gamma}"
                )));
            }
            if mu <= 0.0 || p0 <= 0.0 || v0 <= 0.0 {
                return Err(Error::InvalidParameter(
                    "mu, p0 and v0 must be positive".into(),
                ));
            }
            Ok(isentropic_ns(gamma, mu, p0, v0))
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

fn sym2() -> SystemDefinition {
    let g: VectorFn = Arc::new(|u: &DVector<f64>| u.clone());
    let f: VectorFn = Arc::new(|u: &DVector<f64>| {
        DVector::from_vec(vec![u[1], u[0] + 0.5 * u[1] * u[1]])
    });
    let b: MatrixFn = Arc::new(|_u: &DVector<f64>| DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
    let jg: MatrixFn = Arc::new(|_u: &DVector<f64>| DMatrix::identity(2, 2));
    let jf: MatrixFn =
        Arc::new(|u: &DVector<f64>| DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, u[1]]));
    let jb: TensorFn = Arc::new(|_u: &DVector<f64>| vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)]);
    SystemBuilder::new("SYM2", 2, 1, g, f, b)
        .jacobians(jg, jf, jb)
        .base_point(DVector::zeros(2))
        .neighborhood_radius(0.5)
        .build()
}

/// Lagrangian isentropic Navier-Stokes. State `(v, u)`: specific volume and
/// velocity; volume is the hyperbolic component, velocity the parabolic one.
fn isentropic_ns(gamma: f64, mu: f64, p0: f64, v0: f64) -> SystemDefinition {
    let pressure = move |v: f64| p0 * v.powf(-gamma);
    let dpressure = move |v: f64| -p0 * gamma * v.powf(-gamma - 1.0);

    let g: VectorFn = Arc::new(|u: &DVector<f64>| u.clone());
    let f: VectorFn = Arc::new(move |u: &DVector<f64>| DVector::from_vec(vec![-u[1], pressure(u[0])]));
    let b: MatrixFn = Arc::new(move |u: &DVector<f64>| {
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, mu / u[0]])
    });
    let jg: MatrixFn = Arc::new(|_u: &DVector<f64>| DMatrix::identity(2, 2));
    let jf: MatrixFn = Arc::new(move |u: &DVector<f64>| {
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, dpressure(u[0]), 0.0])
    });
    let jb: TensorFn = Arc::new(move |u: &DVector<f64>| {
        vec![
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -mu / (u[0] * u[0])]),
            DMatrix::zeros(2, 2),
        ]
    });
    let s: MatrixFn = Arc::new(move |u: &DVector<f64>| {
        DMatrix::from_diagonal(&DVector::from_vec(vec![-dpressure(u[0]), 1.0]))
    });
    SystemBuilder::new("isentropic-NS", 2, 1, g, f, b)
        .jacobians(jg, jf, jb)
        .symmetrizer(s)
        .base_point(DVector::from_vec(vec![v0, 0.0]))
        .neighborhood_radius(0.25 * v0)
        .build()
}

/// Constant-coefficient linear system `U_t + (A U)_x = B U_xx` with `G = U`.
/// Mainly used by tests and symbol oracles.
pub fn linear_system(a: DMatrix<f64>, b: DMatrix<f64>, r: usize) -> SystemDefinition {
    let n = a.nrows();
    let a2 = a.clone();
    let b2 = b.clone();
    let g: VectorFn = Arc::new(|u: &DVector<f64>| u.clone());
    let f: VectorFn = Arc::new(move |u: &DVector<f64>| &a2 * u);
    let bf: MatrixFn = Arc::new(move |_u: &DVector<f64>| b2.clone());
    let jg: MatrixFn = Arc::new(move |_u: &DVector<f64>| DMatrix::identity(n, n));
    let jf: MatrixFn = Arc::new(move |_u: &DVector<f64>| a.clone());
    let jb: TensorFn = Arc::new(move |_u: &DVector<f64>| vec![DMatrix::zeros(n, n); n]);
    SystemBuilder::new("linear", n, r, g, f, bf)
        .jacobians(jg, jf, jb)
        .base_point(DVector::zeros(n))
        .neighborhood_radius(1.0)
        .build()
}
