//! Midpoint-rule and product-integration discretizations of the
//! convolution equation, solved by forward substitution.
//!
//! Both schemes give a lower-triangular Toeplitz system
//!
//! ```text
//! Σ_{m=0}^{i-1} w_m φ_{i-m-1/2} = y_i,   i = 1..n
//! ```
//!
//! whose unknowns sit at the midpoints `t_{i-1/2}`.

use std::fmt;
use std::str::FromStr;

use crate::forward::{
    sample_rhs, ForwardError, Mesh, Provenance, ReferenceSolution, RhsSamples, TestProblem,
};
use crate::kernel::{max_step, KernelSpec, StepBound};

/// `|w_0| < ADMISSIBILITY * max |w_m|` rejects the step.
pub const ADMISSIBILITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("step h = {step} rejected: w_0 = {w0:e}, admissible bound {bound}")]
    StepRejected {
        step: f64,
        w0: f64,
        bound: StepBound,
    },
    #[error(
        "weights built for {weights} nodes (h = {step_w}) but data has {data} nodes (h = {step_y})"
    )]
    MeshMismatch {
        weights: usize,
        data: usize,
        step_w: f64,
        step_y: f64,
    },
    #[error("convergence order undefined for norms {0} and {1}")]
    UndefinedOrder(f64, f64),
    #[error(transparent)]
    Forward(#[from] ForwardError),
}

impl fmt::Display for StepBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepBound::Unbounded => write!(f, "h unbounded"),
            StepBound::Below(h) => write!(f, "h < {h}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Midpoint,
    Product,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Midpoint, Scheme::Product];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Midpoint => "midpoint",
            Scheme::Product => "product",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "midpoint" | "rectangle" => Ok(Scheme::Midpoint),
            "product" => Ok(Scheme::Product),
            other => Err(format!(
                "unknown scheme '{other}' (expected midpoint or product)"
            )),
        }
    }
}

/// Lag weights `w_0..w_{n-1}` of one scheme on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    scheme: Scheme,
    spec: KernelSpec,
    mesh: Mesh,
    weights: Vec<f64>,
}

impl WeightSequence {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn midpoint_weights(spec: &KernelSpec, mesh: &Mesh) -> Vec<f64> {
    let h = mesh.step();
    (0..mesh.nodes())
        .map(|m| h * spec.eval((m as f64 + 0.5) * h))
        .collect()
}

/// `w_m = Σ_q s_q e^{-β m h} (1 - e^{-β h}) / β`.
fn product_weights(spec: &KernelSpec, mesh: &Mesh) -> Vec<f64> {
    let h = mesh.step();
    let terms: Vec<(f64, f64, f64)> = spec
        .terms()
        .map(|(_, s, beta)| (s, beta, -(-beta * h).exp_m1() / beta))
        .collect();
    (0..mesh.nodes())
        .map(|m| {
            let t = m as f64 * h;
            terms
                .iter()
                .map(|&(s, beta, panel)| s * (-beta * t).exp() * panel)
                .sum()
        })
        .collect()
}

pub fn build_weights(
    spec: &KernelSpec,
    scheme: Scheme,
    mesh: &Mesh,
) -> Result<WeightSequence, SolverError> {
    let bound = max_step(spec);
    let step = mesh.step();
    if scheme == Scheme::Midpoint && !bound.admits(step) {
        let w0 = step * spec.eval(step / 2.0);
        return Err(SolverError::StepRejected { step, w0, bound });
    }
    let weights = match scheme {
        Scheme::Midpoint => midpoint_weights(spec, mesh),
        Scheme::Product => product_weights(spec, mesh),
    };
    let w0 = weights[0];
    let scale = weights.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    if !w0.is_finite() || w0.abs() < ADMISSIBILITY * scale || w0 == 0.0 {
        return Err(SolverError::StepRejected { step, w0, bound });
    }
    Ok(WeightSequence {
        scheme,
        spec: *spec,
        mesh: *mesh,
        weights,
    })
}

/// Approximate solution at the midpoints `t_{i-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSolution {
    mesh: Mesh,
    scheme: Scheme,
    values: Vec<f64>,
    error: Option<ErrorRecord>,
}

impl MeshSolution {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn error(&self) -> Option<&ErrorRecord> {
        self.error.as_ref()
    }

    pub fn with_error(mut self, record: ErrorRecord) -> Self {
        self.error = Some(record);
        self
    }

    /// Writes `i, t_mid, phi_ref, phi_h, abs_err` rows against `problem`.
    pub fn write_csv<W: std::io::Write, P: TestProblem + ?Sized>(
        &self,
        out: W,
        problem: &P,
    ) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "t_mid", "phi_ref", "phi_h", "abs_err"])?;
        for (k, phi_h) in self.values.iter().enumerate() {
            let t = self.mesh.midpoint(k + 1);
            let phi = problem.phi(t);
            w.write_record([
                (k + 1).to_string(),
                format!("{t:.17e}"),
                format!("{phi:.17e}"),
                format!("{phi_h:.17e}"),
                format!("{:.17e}", (phi - phi_h).abs()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Forward substitution
/// `φ_{i-1/2} = (y_i - Σ_{m=1}^{i-1} w_m φ_{i-m-1/2}) / w_0`.
pub fn solve_triangular_convolution(
    w: &WeightSequence,
    y: &RhsSamples,
) -> Result<MeshSolution, SolverError> {
    let (wm, ym) = (w.mesh(), y.mesh());
    if wm.nodes() != ym.nodes() || (wm.step() - ym.step()).abs() > 1e-14 * wm.step() {
        return Err(SolverError::MeshMismatch {
            weights: wm.nodes(),
            data: ym.nodes(),
            step_w: wm.step(),
            step_y: ym.step(),
        });
    }
    let ws = &w.weights;
    let w0 = ws[0];
    let n = ws.len();
    let mut phi = Vec::with_capacity(n);
    for (i, &yi) in y.values().iter().enumerate() {
        // φ is stored oldest first, so lag m pairs with phi[i - m]
        let history: f64 = (1..=i).map(|m| ws[m] * phi[i - m]).sum();
        phi.push((yi - history) / w0);
    }
    Ok(MeshSolution {
        mesh: *wm,
        scheme: w.scheme,
        values: phi,
        error: None,
    })
}

/// `y_i = Σ_{m=0}^{i-1} w_m φ_{i-m-1/2}`, the operator inverted above.
pub fn apply_convolution(w: &WeightSequence, phi: &[f64]) -> Vec<f64> {
    assert_eq!(phi.len(), w.len(), "one value per node");
    (0..phi.len())
        .map(|i| (0..=i).map(|m| w.weights[m] * phi[i - m]).sum())
        .collect()
}

/// Pointwise midpoint errors, their maximum, and the overflow flag
/// (`norm > max |φ|`, printed as `*`).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub pointwise: Vec<f64>,
    pub norm: f64,
    pub overflow: bool,
}

impl ErrorRecord {
    pub fn from_pointwise(pointwise: Vec<f64>, bound: f64) -> Self {
        // NaN propagates into the norm and counts as overflow
        let norm = pointwise.iter().fold(0.0f64, |a, &e| {
            if e.is_nan() || a.is_nan() {
                f64::NAN
            } else {
                a.max(e)
            }
        });
        let overflow = norm.is_nan() || norm > bound;
        ErrorRecord {
            pointwise,
            norm,
            overflow,
        }
    }
}

pub fn error_against<P: TestProblem + ?Sized>(sol: &MeshSolution, problem: &P) -> ErrorRecord {
    let pointwise = sol
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| (problem.phi(sol.mesh.midpoint(k + 1)) - v).abs())
        .collect();
    ErrorRecord::from_pointwise(pointwise, problem.max_abs())
}

/// Error of `sol` against the reference solution with shape `alpha`.
pub fn error_norm(sol: &MeshSolution, alpha: f64) -> Result<ErrorRecord, SolverError> {
    Ok(error_against(sol, &ReferenceSolution::new(alpha)?))
}

/// Solves with externally supplied data and attaches the error against
/// `problem`.
pub fn solve_with_data<P: TestProblem + ?Sized>(
    spec: &KernelSpec,
    scheme: Scheme,
    problem: &P,
    y: &RhsSamples,
) -> Result<MeshSolution, SolverError> {
    let w = build_weights(spec, scheme, y.mesh())?;
    let sol = solve_triangular_convolution(&w, y)?;
    let record = error_against(&sol, problem);
    Ok(sol.with_error(record))
}

pub fn solve(
    spec: &KernelSpec,
    scheme: Scheme,
    alpha: f64,
    mesh: &Mesh,
) -> Result<MeshSolution, SolverError> {
    let problem = ReferenceSolution::new(alpha)?;
    let w = build_weights(spec, scheme, mesh)?;
    let y = sample_rhs(spec, &problem, mesh);
    let sol = solve_triangular_convolution(&w, &y)?;
    let record = error_against(&sol, &problem);
    Ok(sol.with_error(record))
}

pub fn solve_midpoint(
    spec: &KernelSpec,
    alpha: f64,
    mesh: &Mesh,
) -> Result<MeshSolution, SolverError> {
    solve(spec, Scheme::Midpoint, alpha, mesh)
}

pub fn solve_product(
    spec: &KernelSpec,
    alpha: f64,
    mesh: &Mesh,
) -> Result<MeshSolution, SolverError> {
    solve(spec, Scheme::Product, alpha, mesh)
}

/// `γ = log2(‖ε^{h}‖ / ‖ε^{h/2}‖)`.
pub fn convergence_order(coarse: f64, fine: f64) -> Result<f64, SolverError> {
    let ok = |x: f64| x.is_finite() && x > 0.0;
    if !ok(coarse) || !ok(fine) {
        return Err(SolverError::UndefinedOrder(coarse, fine));
    }
    Ok((coarse / fine).log2())
}

/// Order from two error records; flagged records have no order.
pub fn record_order(coarse: &ErrorRecord, fine: &ErrorRecord) -> Result<f64, SolverError> {
    if coarse.overflow || fine.overflow {
        return Err(SolverError::UndefinedOrder(coarse.norm, fine.norm));
    }
    convergence_order(coarse.norm, fine.norm)
}

/// Right-hand side that makes `phi` the exact discrete solution; used to
/// check the substitution in isolation.
pub fn synthesize_rhs(w: &WeightSequence, phi: &[f64]) -> RhsSamples {
    RhsSamples::from_values(*w.mesh(), apply_convolution(w, phi), Provenance::Exact)
}
