//! Helpers shared by the integration tests.

#![allow(dead_code)]

use volterra_core::forward::reference_phi;
use volterra_core::kernel::KernelSpec;

/// `∫_0^t K_N(t - s) φ̄(s) ds` by tanh-sinh quadrature, split where the
/// integrand has boundary layers (near `s = 0` for small `α`, near `s = t`
/// for the fast kernel terms).
pub fn quadrature_rhs(spec: &KernelSpec, alpha: f64, t: f64) -> f64 {
    let f = |s: f64| spec.eval(t - s) * reference_phi(s, alpha);
    let mut cuts = vec![0.0, t];
    for w in [alpha, 5.0 * alpha, 20.0 * alpha] {
        if w < t {
            cuts.push(w);
        }
    }
    let fast = 1.0 / volterra_core::kernel::decay_rate(spec.order());
    for w in [fast, 5.0 * fast, 20.0 * fast] {
        if w < t {
            cuts.push(t - w);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|ab| quadrature::integrate(f, ab[0], ab[1], 1e-16).integral)
        .sum()
}

/// Printed values with one significant digit get an absolute slack of
/// `2e-6`; everything else is compared at 2% relative.
pub fn table_match(computed: f64, printed: f64) -> bool {
    let one_digit = format!("{printed:.6}")
        .trim_start_matches(['0', '.'])
        .trim_end_matches('0')
        .len()
        == 1;
    if one_digit {
        (computed - printed).abs() <= 2e-6
    } else {
        (computed - printed).abs() <= 0.02 * printed.abs()
    }
}
