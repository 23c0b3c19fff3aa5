//! Test-problem generation: the reference solution, its exact right-hand
//! side under `K_N`, mesh sampling and saw-tooth data noise.

use crate::kernel::KernelSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForwardError {
    #[error("shape parameter alpha must be positive and finite, got {0}")]
    Alpha(f64),
    #[error("mesh needs a positive step and at least one node (h = {step}, n = {nodes})")]
    Mesh { step: f64, nodes: usize },
    #[error("noise amplitude must be non-negative, got {0}")]
    Delta(f64),
}

/// A solution with a known right-hand side, used to measure scheme errors.
pub trait TestProblem: Sync {
    fn phi(&self, t: f64) -> f64;

    /// `y(t) = ∫_0^t K_N(t - s) φ(s) ds`.
    fn rhs(&self, spec: &KernelSpec, t: f64) -> f64;

    /// `max |φ|` over `[0, 1]`.
    fn max_abs(&self) -> f64;
}

/// `φ̄(t) = (1 - e^{-t/α}) / (1 - e^{-1/α}) - t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSolution {
    alpha: f64,
}

pub fn reference_phi(t: f64, alpha: f64) -> f64 {
    // 1 - e^{-x} via expm1 keeps small t accurate
    -(-t / alpha).exp_m1() / -(-1.0 / alpha).exp_m1() - t
}

/// `(1 - e^{-x}) / x`, continuous at 0.
fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x / 2.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `x - 1 + e^{-x}` without cancellation for small `x`.
fn phi2(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // x²/2 - x³/6 + x⁴/24 - ...
        let mut term = x * x / 2.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= -x / k;
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        x + (-x).exp_m1()
    }
}

/// Relative gap `|β - 1/α| / β` below which the limit form is used.
const RESONANCE_GAP: f64 = 1e-9;

impl ReferenceSolution {
    pub fn new(alpha: f64) -> Result<Self, ForwardError> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(ReferenceSolution { alpha })
        } else {
            Err(ForwardError::Alpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `∫_0^t e^{-β(t-s)} φ̄(s) ds` for a single decay rate `β`.
    pub fn convolve_exponential(&self, beta: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        let scale = 1.0 / -(-1.0 / a).exp_m1();
        // ∫ e^{-β(t-s)} ds = (1 - e^{-βt}) / β
        let plain = t * phi1(beta * t);
        // ∫ e^{-β(t-s)} e^{-s/α} ds = (e^{-t/α} - e^{-βt}) / (β - 1/α)
        let gap = beta - 1.0 / a;
        let damped = if gap.abs() < RESONANCE_GAP * beta {
            t * (-beta * t).exp()
        } else {
            (-t / a).exp() * t * phi1(gap * t)
        };
        // ∫ s e^{-β(t-s)} ds = t/β - (1 - e^{-βt}) / β²
        let ramp = phi2(beta * t) / (beta * beta);
        scale * (plain - damped) - ramp
    }
}

impl TestProblem for ReferenceSolution {
    fn phi(&self, t: f64) -> f64 {
        reference_phi(t, self.alpha)
    }

    fn rhs(&self, spec: &KernelSpec, t: f64) -> f64 {
        spec.terms()
            .map(|(_, w, beta)| w * self.convolve_exponential(beta, t))
            .sum()
    }

    fn max_abs(&self) -> f64 {
        // φ̄' = c/α e^{-t/α} - 1 vanishes at t* = α ln(c/α); φ̄ >= 0 on [0, 1]
        let a = self.alpha;
        let c = 1.0 / -(-1.0 / a).exp_m1();
        let t_star = (a * (c / a).ln()).clamp(0.0, 1.0);
        self.phi(t_star).abs()
    }
}

/// Exact right-hand side for the reference solution.
pub fn exact_rhs(spec: &KernelSpec, alpha: f64, t: f64) -> Result<f64, ForwardError> {
    Ok(ReferenceSolution::new(alpha)?.rhs(spec, t))
}

/// Uniform mesh `t_i = i h`, `i = 1..n`, with midpoints `(i - 1/2) h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    step: f64,
    nodes: usize,
}

impl Mesh {
    pub fn new(step: f64, nodes: usize) -> Result<Self, ForwardError> {
        if !(step.is_finite() && step > 0.0) || nodes == 0 {
            return Err(ForwardError::Mesh { step, nodes });
        }
        Ok(Mesh { step, nodes })
    }

    /// `n` nodes covering `[0, 1]`, `h = 1/n`.
    pub fn unit(nodes: usize) -> Result<Self, ForwardError> {
        Mesh::new(1.0 / nodes as f64, nodes)
    }

    /// `n` nodes covering `[0, T]`.
    pub fn with_horizon(horizon: f64, nodes: usize) -> Result<Self, ForwardError> {
        Mesh::new(horizon / nodes as f64, nodes)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.nodes as f64
    }

    /// `t_i` for `i = 1..=n`.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    /// `t_{i-1/2}` for `i = 1..=n`.
    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 - 0.5) * self.step
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.nodes).map(|i| self.midpoint(i))
    }

    /// Mesh with half the step over the same horizon.
    pub fn refined(&self) -> Mesh {
        Mesh {
            step: self.step / 2.0,
            nodes: self.nodes * 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Exact,
    Perturbed { delta: f64 },
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Exact => write!(f, "exact"),
            Provenance::Perturbed { delta } => write!(f, "perturbed({delta:e})"),
        }
    }
}

/// Right-hand side values `y_i = y(t_i)`, `i = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsSamples {
    mesh: Mesh,
    values: Vec<f64>,
    provenance: Provenance,
}

impl RhsSamples {
    pub fn from_values(mesh: Mesh, values: Vec<f64>, provenance: Provenance) -> Self {
        assert_eq!(values.len(), mesh.nodes(), "one sample per node");
        RhsSamples {
            mesh,
            values,
            provenance,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Writes `i, t_i, y_i, provenance` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "t_i", "y_i", "provenance"])?;
        let prov = self.provenance.to_string();
        for (k, y) in self.values.iter().enumerate() {
            let i = k + 1;
            w.write_record([
                i.to_string(),
                format!("{:.17e}", self.mesh.node(i)),
                format!("{y:.17e}"),
                prov.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples the exact right-hand side of `problem` at every node.
pub fn sample_rhs<P: TestProblem + ?Sized>(
    spec: &KernelSpec,
    problem: &P,
    mesh: &Mesh,
) -> RhsSamples {
    let values = (1..=mesh.nodes())
        .map(|i| problem.rhs(spec, mesh.node(i)))
        .collect();
    RhsSamples {
        mesh: *mesh,
        values,
        provenance: Provenance::Exact,
    }
}

/// `ỹ_i = y_i + (-1)^i δ`.
pub fn perturb_sawtooth(y: &RhsSamples, delta: f64) -> Result<RhsSamples, ForwardError> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(ForwardError::Delta(delta));
    }
    let values = y
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            if (k + 1) % 2 == 0 {
                v + delta
            } else {
                v - delta
            }
        })
        .collect();
    Ok(RhsSamples {
        mesh: y.mesh,
        values,
        provenance: Provenance::Perturbed { delta },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_endpoints() {
        for &a in &[1.0, 0.1, 0.01, 1e-3] {
            assert_eq!(reference_phi(0.0, a), 0.0);
            assert!(reference_phi(1.0, a).abs() < 1e-15);
        }
    }

    #[test]
    fn reference_midpoint_value() {
        let expected = (1.0 - (-5f64).exp()) / (1.0 - (-10f64).exp()) - 0.5;
        assert!((reference_phi(0.5, 0.1) - expected).abs() < 1e-15);
        assert!((reference_phi(0.5, 0.1) - 0.4933075).abs() < 1e-6);
    }

    #[test]
    fn alpha_must_be_positive() {
        assert!(ReferenceSolution::new(0.0).is_err());
        assert!(ReferenceSolution::new(-0.1).is_err());
        assert!(ReferenceSolution::new(f64::NAN).is_err());
    }

    #[test]
    fn max_abs_matches_dense_scan() {
        for &a in &[0.5, 0.1, 0.01] {
            let p = ReferenceSolution::new(a).unwrap();
            let scan = (0..=200_000)
                .map(|i| p.phi(i as f64 / 200_000.0).abs())
                .fold(0.0, f64::max);
            assert!((p.max_abs() - scan).abs() < 1e-9, "alpha {a}");
        }
    }

    #[test]
    fn rhs_vanishes_at_origin() {
        for n in [1u32, 2, 15] {
            let s = KernelSpec::new(n).unwrap();
            assert_eq!(exact_rhs(&s, 0.1, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn resonant_rate_uses_limit() {
        // β = 1/α exactly for q = 1
        let beta = std::f64::consts::PI.powi(2);
        let p = ReferenceSolution::new(1.0 / beta).unwrap();
        let near = ReferenceSolution::new(1.0 / (beta * (1.0 + 1e-6))).unwrap();
        let t = 0.3;
        let a = p.convolve_exponential(beta, t);
        let b = near.convolve_exponential(beta, t);
        assert!((a - b).abs() < 1e-5 * a.abs().max(1e-3));
    }

    #[test]
    fn mesh_geometry() {
        let m = Mesh::unit(256).unwrap();
        assert_eq!(m.step(), 1.0 / 256.0);
        assert!((m.horizon() - 1.0).abs() < 1e-15);
        assert_eq!(m.node(3), 3.0 / 256.0);
        assert_eq!(m.midpoint(1), 0.5 / 256.0);
        assert_eq!(m.refined().nodes(), 512);
        assert!(Mesh::new(0.0, 3).is_err());
        assert!(Mesh::new(0.1, 0).is_err());
    }

    #[test]
    fn sampling_single_node_and_refinement() {
        let s = KernelSpec::new(2).unwrap();
        let p = ReferenceSolution::new(0.1).unwrap();
        let one = sample_rhs(&s, &p, &Mesh::unit(1).unwrap());
        assert_eq!(one.values(), &[p.rhs(&s, 1.0)]);

        let coarse = sample_rhs(&s, &p, &Mesh::unit(64).unwrap());
        let fine = sample_rhs(&s, &p, &Mesh::unit(128).unwrap());
        for i in 0..64 {
            assert_eq!(coarse.values()[i], fine.values()[2 * i + 1]);
        }
        assert_eq!(coarse.provenance(), Provenance::Exact);
    }

    #[test]
    fn sawtooth_signs() {
        let m = Mesh::unit(4).unwrap();
        let y = RhsSamples::from_values(m, vec![1.0, 2.0, 3.0, 4.0], Provenance::Exact);
        let p = perturb_sawtooth(&y, 0.5).unwrap();
        assert_eq!(p.values(), &[0.5, 2.5, 2.5, 4.5]);
        assert_eq!(p.provenance(), Provenance::Perturbed { delta: 0.5 });
        assert_eq!(perturb_sawtooth(&y, 0.0).unwrap().values(), y.values());
        assert!(perturb_sawtooth(&y, -1.0).is_err());
    }

    #[test]
    fn csv_rows() {
        let m = Mesh::unit(2).unwrap();
        let y = RhsSamples::from_values(m, vec![0.25, -1.0], Provenance::Exact);
        let mut buf = Vec::new();
        y.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "i,t_i,y_i,provenance");
        assert!(lines[1].starts_with("1,5.00000000000000000e-1,2.5"));
        assert!(lines[2].ends_with(",exact"));
    }
}
