//! Experiment drivers: digit-loss tables, kernel traces, convergence
//! tables, the saw-tooth perturbation run and the Fibonacci step search.
//!
//! Every driver returns plain data plus a CSV writer, so output is
//! byte-identical for identical configuration.

use std::collections::HashMap;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::forward::{perturb_sawtooth, sample_rhs, ForwardError, Mesh, ReferenceSolution};
use crate::kernel::{trace_range, KernelError, KernelSpec, KernelTrace};
use crate::sigdec::{estimate_f_diff, estimate_f_sum, ShadowContext, SigDecimal, SigError};
use crate::solver::{record_order, solve, solve_with_data, ErrorRecord, Scheme, SolverError};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Sig(#[from] SigError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SigTables,
    KernelTrace,
    Convergence,
    Perturbed,
    StepSearch,
}

/// Settings shared by all experiments; each driver reads the fields it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Truncation orders `N`.
    pub orders: Vec<u32>,
    pub alphas: Vec<f64>,
    /// Node counts `n = 1/h`.
    pub nodes: Vec<usize>,
    pub delta: f64,
    pub digits: RangeInclusive<u32>,
    /// Lag for the kernel trace.
    pub lambda: f64,
    pub scheme: Scheme,
    /// Inclusive node-count range of the step search.
    pub search_range: (usize, usize),
    pub parallel: bool,
    pub out: Option<PathBuf>,
    /// Reserved for randomized experiments.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Convergence,
            orders: vec![2, 3, 4, 5, 10, 15],
            alphas: vec![0.1, 0.01],
            nodes: vec![256, 512, 1024, 2048],
            delta: 1e-3,
            digits: 8..=14,
            lambda: 1e-3,
            scheme: Scheme::Product,
            search_range: (8, 256),
            parallel: true,
            out: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        let mut cfg = ExperimentConfig {
            kind,
            ..Default::default()
        };
        match kind {
            ExperimentKind::KernelTrace => {
                cfg.orders = vec![12];
                cfg.digits = 8..=8;
            }
            ExperimentKind::Perturbed => {
                cfg.orders = vec![2];
                cfg.alphas = vec![0.1];
                cfg.nodes = vec![27];
            }
            ExperimentKind::StepSearch => {
                cfg.orders = vec![2];
                cfg.alphas = vec![0.1];
            }
            ExperimentKind::SigTables => cfg.orders = vec![50],
            ExperimentKind::Convergence => {}
        }
        cfg
    }

    fn single<T: Copy>(items: &[T], what: &str) -> Result<T, LabError> {
        match items {
            [x] => Ok(*x),
            _ => Err(LabError::Config(format!(
                "expected exactly one {what}, got {}",
                items.len()
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Digit-loss tables

/// Lag and term ranges of the summation examples.
pub const TABLE_LAMBDA: f64 = 1e-3;
pub const TABLE_ORDER: u32 = 50;
const SUM_SPLIT: [(u32, u32); 2] = [(11, 34), (35, 50)];
const DIFF_SPLIT: [(u32, u32); 2] = [(1, 10), (11, 50)];

/// `x_Σ = x_1 + x_2` with `x_1 = Σ_{11}^{34}`, `x_2 = Σ_{35}^{50}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumRow {
    pub digits: u32,
    pub x1: SigDecimal,
    pub x2: SigDecimal,
    pub sum: SigDecimal,
    pub f_s: i64,
}

/// `x_Δ = |x_4| - |x_3|` with `x_3 = Σ_1^{10}`, `x_4 = Σ_{11}^{50}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffRow {
    pub digits: u32,
    pub x3: SigDecimal,
    pub x4: SigDecimal,
    pub diff: SigDecimal,
    pub f_r: u32,
}

impl DiffRow {
    /// `M_Δ` written at the exponent of `x_3`, zero padded to `L` digits.
    pub fn diff_significand(&self) -> String {
        self.diff.significand_at(self.x3.exponent())
    }
}

fn traced_sum(lo: u32, hi: u32, digits: u32) -> Result<KernelTrace, LabError> {
    Ok(trace_range(lo, hi, TABLE_LAMBDA, digits)?)
}

pub fn sum_row(digits: u32) -> Result<SumRow, LabError> {
    let ctx = ShadowContext::new(digits)?;
    let a = traced_sum(SUM_SPLIT[0].0, SUM_SPLIT[0].1, digits)?;
    let b = traced_sum(SUM_SPLIT[1].0, SUM_SPLIT[1].1, digits)?;
    let s = ctx.add(a.result(), b.result())?;
    let (x1, x2) = (a.value().clone(), b.value().clone());
    let f_s = estimate_f_sum(x1.exponent(), x1.valid(), x2.exponent(), x2.valid());
    Ok(SumRow {
        digits,
        x1,
        x2,
        sum: s.value().clone(),
        f_s,
    })
}

pub fn diff_row(digits: u32) -> Result<DiffRow, LabError> {
    let ctx = ShadowContext::new(digits)?;
    let a = traced_sum(DIFF_SPLIT[0].0, DIFF_SPLIT[0].1, digits)?;
    let b = traced_sum(DIFF_SPLIT[1].0, DIFF_SPLIT[1].1, digits)?;
    let d = ctx.sub(&b.result().abs(), &a.result().abs())?;
    let (x3, x4) = (a.value().clone(), b.value().clone());
    let f_r = estimate_f_diff(
        x3.significand(),
        x3.valid(),
        x4.significand(),
        x4.valid(),
        digits,
    );
    Ok(DiffRow {
        digits,
        x3,
        x4,
        diff: d.value().clone(),
        f_r,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigTables {
    pub sums: Vec<SumRow>,
    pub diffs: Vec<DiffRow>,
}

impl SigTables {
    /// `L, M1, f1, M2, f2, M_sum, f_sum, f_s`.
    pub fn write_sums<W: Write>(&self, out: W) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["L", "M1", "f1", "M2", "f2", "M_sum", "f_sum", "f_s"])?;
        for r in &self.sums {
            w.write_record([
                r.digits.to_string(),
                r.x1.significand().to_string(),
                r.x1.valid().to_string(),
                r.x2.significand().to_string(),
                r.x2.valid().to_string(),
                r.sum.significand().to_string(),
                r.sum.valid().to_string(),
                r.f_s.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `L, M3, f3, M4, f4, M_diff, f_diff, f_r`.
    pub fn write_diffs<W: Write>(&self, out: W) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["L", "M3", "f3", "M4", "f4", "M_diff", "f_diff", "f_r"])?;
        for r in &self.diffs {
            w.write_record([
                r.digits.to_string(),
                r.x3.significand().to_string(),
                r.x3.valid().to_string(),
                r.x4.significand().to_string(),
                r.x4.valid().to_string(),
                r.diff_significand(),
                r.diff.valid().to_string(),
                r.f_r.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Both digit-loss tables for every `L` in `config.digits`.
pub fn run_sig_tables(config: &ExperimentConfig) -> Result<SigTables, LabError> {
    let digits: Vec<u32> = config.digits.clone().collect();
    let sums = digits
        .iter()
        .map(|&l| sum_row(l))
        .collect::<Result<_, _>>()?;
    let diffs = digits
        .iter()
        .map(|&l| diff_row(l))
        .collect::<Result<_, _>>()?;
    Ok(SigTables { sums, diffs })
}

/// Per-term trace of `K_N(λ)` at the first listed order and digit count.
pub fn run_sig_trace(config: &ExperimentConfig) -> Result<KernelTrace, LabError> {
    let order = ExperimentConfig::single(&config.orders, "order")?;
    let spec = KernelSpec::new(order)?;
    Ok(spec.eval_traced(config.lambda, *config.digits.start())?)
}

/// `q, value, f` with the value in `+M e p (f=k, L=n)` form.
pub fn write_trace<W: Write>(trace: &KernelTrace, out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["q", "value", "f"])?;
    for s in trace.steps() {
        w.write_record([
            s.q.to_string(),
            s.partial.to_string(),
            s.valid().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Convergence tables

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Norm { norm: f64, overflow: bool },
    Rejected(String),
}

impl CellOutcome {
    fn from_solve(result: Result<ErrorRecord, SolverError>) -> Self {
        match result {
            Ok(r) => CellOutcome::Norm {
                norm: r.norm,
                overflow: r.overflow,
            },
            Err(e) => CellOutcome::Rejected(e.to_string()),
        }
    }

    pub fn norm(&self) -> Option<f64> {
        match *self {
            CellOutcome::Norm { norm, .. } => Some(norm),
            CellOutcome::Rejected(_) => None,
        }
    }

    /// A finite, unflagged norm.
    pub fn usable(&self) -> Option<f64> {
        match *self {
            CellOutcome::Norm {
                norm,
                overflow: false,
            } => Some(norm),
            _ => None,
        }
    }

    pub fn is_overflow(&self) -> bool {
        matches!(self, CellOutcome::Norm { overflow: true, .. })
    }
}

/// One `(scheme, N, α, h)` cell; `gamma` compares against the cell at `h/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub scheme: Scheme,
    pub order: u32,
    pub alpha: f64,
    pub nodes: usize,
    pub outcome: CellOutcome,
    pub gamma: Option<f64>,
}

impl TableRow {
    pub fn step(&self) -> f64 {
        1.0 / self.nodes as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
}

impl ConvergenceTable {
    pub fn find(&self, scheme: Scheme, order: u32, alpha: f64, nodes: usize) -> Option<&TableRow> {
        self.rows.iter().find(|r| {
            r.scheme == scheme && r.order == order && r.alpha == alpha && r.nodes == nodes
        })
    }

    /// `scheme, N, alpha, h, norm, gamma, overflow`; flagged norms print
    /// `*`, undefined orders `---`, rejected steps `rejected`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scheme", "N", "alpha", "h", "norm", "gamma", "overflow"])?;
        for r in &self.rows {
            let (norm, overflow) = match &r.outcome {
                CellOutcome::Norm { overflow: true, .. } => ("*".to_string(), "true"),
                CellOutcome::Norm { norm, .. } => (format!("{norm:.6e}"), "false"),
                CellOutcome::Rejected(_) => ("rejected".to_string(), "false"),
            };
            let gamma = r
                .gamma
                .map_or_else(|| "---".to_string(), |g| format!("{g:.3}"));
            w.write_record([
                r.scheme.to_string(),
                r.order.to_string(),
                r.alpha.to_string(),
                format!("1/{}", r.nodes),
                norm,
                gamma,
                overflow.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn solve_cell(scheme: Scheme, order: u32, alpha: f64, nodes: usize) -> CellOutcome {
    let run = || -> Result<ErrorRecord, SolverError> {
        let spec = KernelSpec::new(order).map_err(|_| SolverError::UndefinedOrder(0.0, 0.0))?;
        let sol = solve(&spec, scheme, alpha, &Mesh::unit(nodes)?)?;
        Ok(sol
            .error()
            .cloned()
            .expect("solve attaches an error record"))
    };
    CellOutcome::from_solve(run())
}

fn order_between(coarse: &CellOutcome, fine: &CellOutcome) -> Option<f64> {
    let rec = |c: &CellOutcome| match *c {
        CellOutcome::Norm { norm, overflow } => Some(ErrorRecord {
            pointwise: Vec::new(),
            norm,
            overflow,
        }),
        CellOutcome::Rejected(_) => None,
    };
    record_order(&rec(coarse)?, &rec(fine)?).ok()
}

/// Error norms for every `(α, N, scheme, n)` in the configuration, with
/// `γ` on each row from the norm at the next halved step. The finest row
/// gets its `γ` from one extra solve at `2n`.
pub fn run_convergence_table(config: &ExperimentConfig) -> Result<ConvergenceTable, LabError> {
    for &a in &config.alphas {
        ReferenceSolution::new(a)?;
    }
    if let Some(&n) = config.nodes.iter().find(|&&n| n == 0) {
        return Err(LabError::Config(format!(
            "node count must be positive, got {n}"
        )));
    }
    if config.orders.contains(&0) {
        return Err(KernelError::ZeroOrder.into());
    }
    let mut ladder: Vec<usize> = config.nodes.clone();
    ladder.sort_unstable();
    ladder.dedup();
    let mut solved = ladder.clone();
    if let Some(&last) = ladder.last() {
        solved.push(last * 2);
    }

    let mut cells = Vec::new();
    for &alpha in &config.alphas {
        for &order in &config.orders {
            for scheme in Scheme::ALL {
                for &n in &solved {
                    cells.push((scheme, order, alpha, n));
                }
            }
        }
    }
    let outcomes: Vec<CellOutcome> = if config.parallel {
        cells
            .par_iter()
            .map(|&(s, o, a, n)| solve_cell(s, o, a, n))
            .collect()
    } else {
        cells
            .iter()
            .map(|&(s, o, a, n)| solve_cell(s, o, a, n))
            .collect()
    };
    let lookup: HashMap<(Scheme, u32, u64, usize), &CellOutcome> = cells
        .iter()
        .zip(&outcomes)
        .map(|(&(s, o, a, n), c)| ((s, o, a.to_bits(), n), c))
        .collect();

    let mut rows = Vec::new();
    for &alpha in &config.alphas {
        for &order in &config.orders {
            for scheme in Scheme::ALL {
                for &n in &ladder {
                    let here = lookup[&(scheme, order, alpha.to_bits(), n)];
                    let finer = lookup[&(scheme, order, alpha.to_bits(), 2 * n)];
                    rows.push(TableRow {
                        scheme,
                        order,
                        alpha,
                        nodes: n,
                        outcome: here.clone(),
                        gamma: order_between(here, finer),
                    });
                }
            }
        }
    }
    Ok(ConvergenceTable { rows })
}

// ---------------------------------------------------------------------------
// Perturbed-data experiment

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedNode {
    pub i: usize,
    pub t_mid: f64,
    pub exact_midpoint: f64,
    pub exact_product: f64,
    pub perturbed_midpoint: f64,
    pub perturbed_product: f64,
    /// `min(|ε̌|, |ε̂|)` on perturbed data.
    pub perturbed_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSummary {
    pub midpoint: f64,
    pub product: f64,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedReport {
    pub nodes: Vec<PerturbedNode>,
    pub exact: NormSummary,
    pub perturbed: NormSummary,
    pub delta: f64,
}

impl PerturbedReport {
    pub fn write_nodes<W: Write>(&self, out: W) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "i",
            "t_mid",
            "exact_midpoint",
            "exact_product",
            "perturbed_midpoint",
            "perturbed_product",
            "perturbed_min",
        ])?;
        for n in &self.nodes {
            w.write_record([
                n.i.to_string(),
                format!("{:.17e}", n.t_mid),
                format!("{:.17e}", n.exact_midpoint),
                format!("{:.17e}", n.exact_product),
                format!("{:.17e}", n.perturbed_midpoint),
                format!("{:.17e}", n.perturbed_product),
                format!("{:.17e}", n.perturbed_min),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `data, midpoint, product, min`.
    pub fn write_summary<W: Write>(&self, out: W) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["data", "midpoint", "product", "min"])?;
        for (label, s) in [("exact", &self.exact), ("perturbed", &self.perturbed)] {
            w.write_record([
                label.to_string(),
                format!("{:.6e}", s.midpoint),
                format!("{:.6e}", s.product),
                format!("{:.6e}", s.min),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn max_of(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, f64::max)
}

/// Both schemes on exact and saw-tooth perturbed data on one mesh.
pub fn run_perturbed_experiment(config: &ExperimentConfig) -> Result<PerturbedReport, LabError> {
    let order = ExperimentConfig::single(&config.orders, "order")?;
    let alpha = ExperimentConfig::single(&config.alphas, "alpha")?;
    let nodes = ExperimentConfig::single(&config.nodes, "node count")?;
    let spec = KernelSpec::new(order)?;
    let problem = ReferenceSolution::new(alpha)?;
    let mesh = Mesh::unit(nodes)?;
    let exact = sample_rhs(&spec, &problem, &mesh);
    let noisy = perturb_sawtooth(&exact, config.delta)?;

    let errors = |data| -> Result<Vec<f64>, LabError> {
        Ok(Scheme::ALL
            .iter()
            .map(|&s| solve_with_data(&spec, s, &problem, data))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flat_map(|sol| sol.error().expect("attached").pointwise.clone())
            .collect())
    };
    let e = errors(&exact)?;
    let p = errors(&noisy)?;
    let (em, ep) = e.split_at(nodes);
    let (pm, pp) = p.split_at(nodes);

    let rows: Vec<PerturbedNode> = (0..nodes)
        .map(|k| PerturbedNode {
            i: k + 1,
            t_mid: mesh.midpoint(k + 1),
            exact_midpoint: em[k],
            exact_product: ep[k],
            perturbed_midpoint: pm[k],
            perturbed_product: pp[k],
            perturbed_min: pm[k].min(pp[k]),
        })
        .collect();
    let summary = |m: &[f64], q: &[f64]| NormSummary {
        midpoint: max_of(m.iter().copied()),
        product: max_of(q.iter().copied()),
        min: max_of(m.iter().zip(q).map(|(a, b)| a.min(*b))),
    };
    Ok(PerturbedReport {
        exact: summary(em, ep),
        perturbed: summary(pm, pp),
        nodes: rows,
        delta: config.delta,
    })
}

// ---------------------------------------------------------------------------
// Fibonacci step search

/// Objective evaluation budget of the step search.
pub const MAX_TRIALS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct StepSearchResult {
    /// Best node count visited, `h* = 1/n*`.
    pub best: usize,
    pub best_value: f64,
    /// `(n, objective)` for each evaluation, in order.
    pub trials: Vec<(usize, f64)>,
}

impl StepSearchResult {
    pub fn trial_count(&self) -> usize {
        self.trials.len()
    }

    /// `trial, n, h, norm`; the chosen point is marked in the last column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial", "n", "h", "norm", "chosen"])?;
        for (k, &(n, v)) in self.trials.iter().enumerate() {
            w.write_record([
                (k + 1).to_string(),
                n.to_string(),
                format!("1/{n}"),
                format!("{v:.6e}"),
                (n == self.best).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fibonacci search for the minimum of a unimodal `f` on the integers
/// `lo..=hi`, spending at most `budget` evaluations. Points beyond `hi`
/// that the Fibonacci lattice asks for count as `+∞` and cost nothing.
pub fn fibonacci_minimize<F>(lo: usize, hi: usize, budget: usize, mut f: F) -> StepSearchResult
where
    F: FnMut(usize) -> f64,
{
    assert!(lo <= hi, "empty search range");
    assert!(budget >= 1, "need at least one trial");
    let mut trials: Vec<(usize, f64)> = Vec::new();
    let mut cache: HashMap<usize, f64> = HashMap::new();
    let mut eval = |n: usize, trials: &mut Vec<(usize, f64)>| -> Option<f64> {
        if n < lo || n > hi {
            return Some(f64::INFINITY);
        }
        if let Some(&v) = cache.get(&n) {
            return Some(v);
        }
        if trials.len() >= budget {
            return None;
        }
        let v = f(n);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        cache.insert(n, v);
        trials.push((n, v));
        Some(v)
    };

    if lo == hi {
        eval(lo, &mut trials);
    } else {
        // Fibonacci numbers up to the first one >= hi - lo + 2
        let mut fib = vec![1usize, 1];
        while *fib.last().unwrap() < hi - lo + 2 {
            let k = fib.len();
            fib.push(fib[k - 1] + fib[k - 2]);
        }
        let mut k = fib.len() - 1;
        // open interval (a, a + fib[k]) covers lo..=hi; a may sit at lo - 1
        let mut a = lo as i64 - 1;
        let at = |a: i64, off: usize| (a + off as i64) as usize;
        let mut exhausted = false;
        while k >= 3 {
            let (x1, x2) = (at(a, fib[k - 2]), at(a, fib[k - 1]));
            let (Some(f1), Some(f2)) = (eval(x1, &mut trials), eval(x2, &mut trials)) else {
                exhausted = true;
                break;
            };
            if f1 > f2 {
                a = x1 as i64;
            }
            k -= 1;
        }
        if !exhausted {
            eval(at(a, 1), &mut trials);
        }
    }

    let (best, best_value) = trials.iter().copied().fold(
        (lo, f64::INFINITY),
        |(bn, bv), (n, v)| if v < bv { (n, v) } else { (bn, bv) },
    );
    let best = if trials.is_empty() { lo } else { best };
    StepSearchResult {
        best,
        best_value,
        trials,
    }
}

/// Perturbed-data error norm of `scheme` at `n = 1/h`; rejected steps
/// score `+∞`.
pub fn perturbed_norm(
    spec: &KernelSpec,
    scheme: Scheme,
    alpha: f64,
    delta: f64,
    nodes: usize,
) -> Result<f64, LabError> {
    let problem = ReferenceSolution::new(alpha)?;
    let mesh = Mesh::unit(nodes)?;
    let y = perturb_sawtooth(&sample_rhs(spec, &problem, &mesh), delta)?;
    match solve_with_data(spec, scheme, &problem, &y) {
        Ok(sol) => Ok(sol.error().expect("attached").norm),
        Err(SolverError::StepRejected { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

/// Fibonacci search for the node count minimising the error norm on
/// perturbed data, using the product scheme.
pub fn fibonacci_step_search(
    spec: &KernelSpec,
    alpha: f64,
    delta: f64,
    n_range: (usize, usize),
) -> Result<StepSearchResult, LabError> {
    fibonacci_step_search_with(spec, Scheme::Product, alpha, delta, n_range)
}

pub fn fibonacci_step_search_with(
    spec: &KernelSpec,
    scheme: Scheme,
    alpha: f64,
    delta: f64,
    (lo, hi): (usize, usize),
) -> Result<StepSearchResult, LabError> {
    if lo == 0 || lo > hi {
        return Err(LabError::Config(format!("invalid node range {lo}:{hi}")));
    }
    ReferenceSolution::new(alpha)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(ForwardError::Delta(delta).into());
    }
    let mut failure = None;
    let result = fibonacci_minimize(lo, hi, MAX_TRIALS, |n| {
        match perturbed_norm(spec, scheme, alpha, delta, n) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

pub fn run_step_search(config: &ExperimentConfig) -> Result<StepSearchResult, LabError> {
    let order = ExperimentConfig::single(&config.orders, "order")?;
    let alpha = ExperimentConfig::single(&config.alphas, "alpha")?;
    let spec = KernelSpec::new(order)?;
    fibonacci_step_search_with(
        &spec,
        config.scheme,
        alpha,
        config.delta,
        config.search_range,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_sum_row() {
        let r = sum_row(8).unwrap();
        assert_eq!(r.x1.significand().to_string(), "18652239");
        assert_eq!(r.sum.significand().to_string(), "18656737");
        assert_eq!(r.f_s, 5);
    }

    #[test]
    fn diff_row_rendering() {
        let r = diff_row(13).unwrap();
        assert_eq!(r.diff_significand(), "0000000001339");
        assert_eq!(r.diff.valid(), 4);
        assert_eq!(r.f_r, 2);
    }

    #[test]
    fn trace_digit_drop() {
        let t = run_sig_trace(&ExperimentConfig::new(ExperimentKind::KernelTrace)).unwrap();
        assert_eq!(t.len(), 12);
        let peak = t.steps().iter().map(|s| s.valid()).max().unwrap();
        assert!(t.value().valid() < peak);
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("q,value,f"));
        assert_eq!(text.lines().count(), 13);
    }

    #[test]
    fn empty_order_list() {
        let cfg = ExperimentConfig {
            orders: vec![],
            ..Default::default()
        };
        assert!(run_convergence_table(&cfg).unwrap().rows.is_empty());
    }

    #[test]
    fn single_cell_table() {
        let cfg = ExperimentConfig {
            orders: vec![2],
            alphas: vec![0.1],
            nodes: vec![256],
            ..Default::default()
        };
        let t = run_convergence_table(&cfg).unwrap();
        assert_eq!(t.rows.len(), 2);
        let mid = t
            .find(Scheme::Midpoint, 2, 0.1, 256)
            .unwrap()
            .outcome
            .usable()
            .unwrap();
        let prod = t
            .find(Scheme::Product, 2, 0.1, 256)
            .unwrap()
            .outcome
            .usable()
            .unwrap();
        assert!((mid - 0.005001).abs() < 1e-4);
        assert!((prod - 0.000499).abs() < 1e-5);
        assert!((t.rows[0].gamma.unwrap() - 2.009).abs() < 0.02);
    }

    #[test]
    fn parallel_matches_sequential() {
        let par = ExperimentConfig {
            orders: vec![2, 10],
            alphas: vec![0.1],
            nodes: vec![64, 128],
            ..Default::default()
        };
        let seq = ExperimentConfig {
            parallel: false,
            ..par.clone()
        };
        let render = |c: &ExperimentConfig| {
            let mut buf = Vec::new();
            run_convergence_table(c)
                .unwrap()
                .write_csv(&mut buf)
                .unwrap();
            buf
        };
        assert_eq!(render(&par), render(&seq));
    }

    #[test]
    fn rejected_cells_are_recorded() {
        let cfg = ExperimentConfig {
            orders: vec![2],
            alphas: vec![0.1],
            nodes: vec![8],
            ..Default::default()
        };
        let t = run_convergence_table(&cfg).unwrap();
        let mid = t.find(Scheme::Midpoint, 2, 0.1, 8).unwrap();
        assert!(matches!(mid.outcome, CellOutcome::Rejected(_)));
        assert_eq!(mid.gamma, None);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("rejected"));
    }

    #[test]
    fn zero_delta_matches_exact() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Perturbed);
        cfg.delta = 0.0;
        let r = run_perturbed_experiment(&cfg).unwrap();
        assert_eq!(r.exact, r.perturbed);
        assert_eq!(r.nodes.len(), 27);
    }

    #[test]
    fn fibonacci_finds_parabola_vertex() {
        let r = fibonacci_minimize(8, 64, MAX_TRIALS, |n| (n as f64 - 20.0).powi(2));
        assert!(r.trial_count() <= MAX_TRIALS);
        assert!((r.best as i64 - 20).abs() <= 1, "{r:?}");
    }

    #[test]
    fn fibonacci_edges_and_budget() {
        let r = fibonacci_minimize(27, 27, MAX_TRIALS, |n| n as f64);
        assert_eq!((r.best, r.trial_count()), (27, 1));
        for target in [1usize, 2, 50, 99, 100] {
            let r = fibonacci_minimize(1, 100, 30, |n| (n as f64 - target as f64).abs());
            assert_eq!(r.best, target);
        }
        let r = fibonacci_minimize(1, 10_000, MAX_TRIALS, |n| n as f64);
        assert_eq!(r.trial_count(), MAX_TRIALS);
        let distinct: std::collections::HashSet<_> = r.trials.iter().map(|t| t.0).collect();
        assert_eq!(distinct.len(), r.trial_count());
    }

    #[test]
    fn step_search_range_checks() {
        let spec = KernelSpec::new(2).unwrap();
        assert!(fibonacci_step_search(&spec, 0.1, 1e-3, (0, 10)).is_err());
        assert!(fibonacci_step_search(&spec, 0.1, 1e-3, (20, 10)).is_err());
        assert!(fibonacci_step_search(&spec, 0.1, -1.0, (8, 10)).is_err());
        let r = fibonacci_step_search(&spec, 0.1, 1e-3, (27, 27)).unwrap();
        assert_eq!((r.best, r.trial_count()), (27, 1));
    }
}
