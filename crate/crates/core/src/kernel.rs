//! The truncated kernel `K_N(λ) = Σ_{q=1}^{N} (-1)^{q+1} q² exp(-π² q² λ)`.

use std::f64::consts::PI;

use crate::sigdec::{Decimal, ShadowContext, SigDecimal, SigError, Traced};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("truncation order must be at least 1")]
    ZeroOrder,
    #[error("invalid term range {lo}..={hi}")]
    TermRange { lo: u32, hi: u32 },
    #[error("time lag must be finite and non-negative, got {0}")]
    NegativeLag(f64),
    #[error("K_{order} keeps one sign on (0, 1]; it has no positive root")]
    NoRoot { order: u32 },
    #[error("no sign change of K_{order} on [{lo}, {hi}]")]
    Bracketing { order: u32, lo: f64, hi: f64 },
    #[error(transparent)]
    Sig(#[from] SigError),
}

/// Truncation order of the kernel plus its summation convention.
///
/// Terms are always added in ascending `q` with a plain running sum unless
/// compensated summation is switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    order: u32,
    compensated: bool,
}

/// `π² q²`, the decay rate of term `q`.
pub fn decay_rate(q: u32) -> f64 {
    let q = q as f64;
    PI * PI * q * q
}

/// Sign and weight `(-1)^{q+1} q²` of term `q`.
pub fn term_weight(q: u32) -> f64 {
    let w = (q as f64) * (q as f64);
    if q % 2 == 1 {
        w
    } else {
        -w
    }
}

impl KernelSpec {
    pub fn new(order: u32) -> Result<Self, KernelError> {
        if order == 0 {
            return Err(KernelError::ZeroOrder);
        }
        Ok(KernelSpec {
            order,
            compensated: false,
        })
    }

    /// Switches to Kahan-compensated summation.
    pub fn compensated(mut self, on: bool) -> Self {
        self.compensated = on;
        self
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_compensated(&self) -> bool {
        self.compensated
    }

    /// Iterator over `(q, (-1)^{q+1} q², π² q²)`.
    pub fn terms(&self) -> impl Iterator<Item = (u32, f64, f64)> {
        (1..=self.order).map(|q| (q, term_weight(q), decay_rate(q)))
    }

    /// `K_N(λ)` summed in ascending `q`.
    pub fn eval(&self, lambda: f64) -> f64 {
        sum_terms(1, self.order, lambda, self.compensated)
    }

    /// Checked variant of [`eval`](Self::eval).
    pub fn try_eval(&self, lambda: f64) -> Result<f64, KernelError> {
        check_lag(lambda)?;
        Ok(self.eval(lambda))
    }

    /// `K_N(0) = (-1)^{N+1} N(N+1)/2` in integer arithmetic.
    pub fn value_at_zero(&self) -> i64 {
        let n = self.order as i64;
        let s = n * (n + 1) / 2;
        if n % 2 == 1 {
            s
        } else {
            -s
        }
    }

    /// `∫_0^t K_N(u) du = Σ (-1)^{q+1} q² (1 - exp(-π² q² t)) / (π² q²)`.
    pub fn integral(&self, t: f64) -> f64 {
        self.terms()
            .map(|(_, w, beta)| w * -(-beta * t).exp_m1() / beta)
            .sum()
    }

    /// Runs the ascending summation in `digits`-digit decimal arithmetic,
    /// recording the partial sum and its valid digits after each term.
    pub fn eval_traced(&self, lambda: f64, digits: u32) -> Result<KernelTrace, KernelError> {
        trace_range(1, self.order, lambda, digits)
    }
}

fn check_lag(lambda: f64) -> Result<(), KernelError> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(KernelError::NegativeLag(lambda))
    }
}

fn sum_terms(q_lo: u32, q_hi: u32, lambda: f64, compensated: bool) -> f64 {
    let term = |q: u32| term_weight(q) * (-decay_rate(q) * lambda).exp();
    if !compensated {
        return (q_lo..=q_hi).map(term).fold(0.0, |s, t| s + t);
    }
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for q in q_lo..=q_hi {
        let y = term(q) - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Sum of the kernel terms `q_lo..=q_hi` at lag `lambda`.
pub fn partial_sum(q_lo: u32, q_hi: u32, lambda: f64) -> Result<f64, KernelError> {
    if q_lo == 0 || q_lo > q_hi {
        return Err(KernelError::TermRange { lo: q_lo, hi: q_hi });
    }
    check_lag(lambda)?;
    Ok(sum_terms(q_lo, q_hi, lambda, false))
}

/// One row of a traced summation.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub q: u32,
    pub partial: SigDecimal,
}

impl TraceStep {
    pub fn valid(&self) -> u32 {
        self.partial.valid()
    }
}

/// Partial sums of a decimal kernel summation, one per term.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTrace {
    steps: Vec<TraceStep>,
    result: Traced,
}

impl KernelTrace {
    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The final sum together with its shadow.
    pub fn result(&self) -> &Traced {
        &self.result
    }

    pub fn value(&self) -> &SigDecimal {
        self.result.value()
    }
}

/// Traced sum of the terms `q_lo..=q_hi`.
///
/// Each term is formed as the expression is written: `π` rounded to `L`
/// digits, `π² = π·π`, the exponent `π²·(q²λ)`, `exp` of its negation and
/// the product with `q²`, every step rounded to `L` digits. The shadow lane
/// repeats the same steps at the [`ShadowContext`] precision.
pub fn trace_range(
    q_lo: u32,
    q_hi: u32,
    lambda: f64,
    digits: u32,
) -> Result<KernelTrace, KernelError> {
    if q_lo == 0 || q_lo > q_hi {
        return Err(KernelError::TermRange { lo: q_lo, hi: q_hi });
    }
    check_lag(lambda)?;
    let ctx = ShadowContext::new(digits)?;
    let lag = Decimal::from_f64_shortest(lambda).ok_or(KernelError::NegativeLag(lambda))?;
    let lag = ctx.exact(&lag)?;
    let pi = ctx.pi()?;
    let pi2 = ctx.mul(&pi, &pi)?;
    let mut sum = ctx.exact(&Decimal::zero())?;
    let mut steps = Vec::with_capacity((q_hi - q_lo + 1) as usize);
    for q in q_lo..=q_hi {
        let q2 = ctx.exact(&Decimal::from_int((q as i64) * (q as i64)))?;
        let scaled = ctx.mul(&q2, &lag)?;
        let arg = ctx.mul(&pi2, &scaled)?;
        let e = ctx.exp(&arg.neg())?;
        let mut term = ctx.mul(&q2, &e)?;
        if q % 2 == 0 {
            term = term.neg();
        }
        sum = ctx.add(&sum, &term)?;
        steps.push(TraceStep {
            q,
            partial: sum.value().clone(),
        });
    }
    Ok(KernelTrace { steps, result: sum })
}

/// Geometric scan of `λ` from `1e-6` to 1 with ratio 1.1 for the first
/// sign change of `K_N`.
pub fn scan_bracket(spec: &KernelSpec) -> Result<(f64, f64), KernelError> {
    if spec.order == 1 {
        return Err(KernelError::NoRoot { order: 1 });
    }
    let mut lo = 1e-6;
    let mut f_lo = spec.eval(lo);
    while lo < 1.0 {
        let hi = (lo * 1.1).min(1.0);
        let f_hi = spec.eval(hi);
        if f_lo == 0.0 {
            return Ok((lo, lo));
        }
        if f_lo * f_hi <= 0.0 {
            return Ok((lo, hi));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(KernelError::NoRoot { order: spec.order })
}

/// Bisection for a root of `K_N` inside `bracket`, stopping once the
/// bracket is narrower than `tol · λ*`.
pub fn find_root(spec: &KernelSpec, bracket: (f64, f64), tol: f64) -> Result<f64, KernelError> {
    if spec.order == 1 {
        return Err(KernelError::NoRoot { order: 1 });
    }
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    check_lag(lo)?;
    check_lag(hi)?;
    let mut f_lo = spec.eval(lo);
    let f_hi = spec.eval(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo * f_hi > 0.0 {
        return Err(KernelError::Bracketing {
            order: spec.order,
            lo,
            hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol * mid {
            return Ok(mid);
        }
        let f_mid = spec.eval(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Relative bisection tolerance used by [`smallest_root`].
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Smallest positive root `λ*` of `K_N`.
pub fn smallest_root(spec: &KernelSpec) -> Result<f64, KernelError> {
    let bracket = scan_bracket(spec)?;
    find_root(spec, bracket, ROOT_TOLERANCE)
}

/// Upper limit on the mesh step that keeps the first midpoint kernel value
/// `K_N(h/2)` away from zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepBound {
    Unbounded,
    /// `h < 2 λ*` is admissible.
    Below(f64),
}

impl StepBound {
    pub fn admits(&self, step: f64) -> bool {
        match *self {
            StepBound::Unbounded => true,
            StepBound::Below(h) => step < h,
        }
    }
}

/// `h_max = 2 λ*` for the smallest positive root; unbounded when `K_N`
/// never vanishes.
pub fn max_step(spec: &KernelSpec) -> StepBound {
    match smallest_root(spec) {
        Ok(root) => StepBound::Below(2.0 * root),
        Err(_) => StepBound::Unbounded,
    }
}

/// Where `K_N` comes closest to vanishing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalLag {
    /// A genuine sign change.
    Root(f64),
    /// No sign change; the interior local minimum of `K_N > 0`, where any
    /// finite-precision evaluation first reports a zero.
    Touch { lag: f64, value: f64 },
}

impl CriticalLag {
    pub fn lag(&self) -> f64 {
        match *self {
            CriticalLag::Root(l) => l,
            CriticalLag::Touch { lag, .. } => lag,
        }
    }
}

/// The smallest root of `K_N`, or for kernels that keep one sign (odd
/// `N`) the location of the first interior local minimum.
pub fn critical_lag(spec: &KernelSpec) -> Result<CriticalLag, KernelError> {
    match smallest_root(spec) {
        Ok(r) => return Ok(CriticalLag::Root(r)),
        Err(KernelError::NoRoot { .. }) => {}
        Err(e) => return Err(e),
    }
    // walk the same geometric grid until the kernel turns upward
    let grid: Vec<f64> = std::iter::successors(Some(1e-6f64), |l| Some(l * 1.1))
        .take_while(|&l| l <= 1.0)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&l| spec.eval(l)).collect();
    let i = (1..grid.len() - 1)
        .find(|&i| values[i] <= values[i - 1] && values[i] <= values[i + 1])
        .ok_or(KernelError::NoRoot { order: spec.order })?;
    let (mut a, mut b) = (grid[i - 1], grid[i + 1]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (spec.eval(c), spec.eval(d));
    while (b - a) > 1e-12 * (a + b) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = spec.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = spec.eval(d);
        }
    }
    let lag = 0.5 * (a + b);
    Ok(CriticalLag::Touch {
        lag,
        value: spec.eval(lag),
    })
}
