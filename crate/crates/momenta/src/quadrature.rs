//! Quadrature kernels shared by the measure module: Gauss-Legendre rules,
//! composite Simpson sums on uniform grids, and log-space accumulation for
//! improper integrals whose magnitudes exceed the f64 range.

use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1], computed once by Newton
/// iteration on the Legendre recurrence. Accurate to ~1e-15 for the orders
/// used here.
fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(q, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(q, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=q {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(64))
}

/// ∫_a^b f(x) dx by the 64-point Gauss-Legendre rule; exact for polynomials
/// of degree ≤ 127.
pub(crate) fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl64();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x);
    }
    half * sum
}

/// ln ∫_a^b exp(log_f(x)) dx by the 64-point rule, evaluated without leaving
/// log space so integrands far outside the f64 range stay representable.
/// Returns -inf when the integrand vanishes on the whole segment.
pub(crate) fn gl_integrate_log(log_f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl64();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let values: Vec<f64> = nodes.iter().map(|x| log_f(mid + half * x)).collect();
    let peak = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().zip(weights).map(|(v, w)| w * (v - peak).exp()).sum();
    peak + (half * sum).ln()
}

/// ln(exp(a) + exp(b)) without overflow.
pub(crate) fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// ln(exp(a) - exp(b)) for a ≥ b; -inf when they cancel exactly.
pub(crate) fn logsubexp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b);
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = (b - a).exp();
    if d >= 1.0 {
        return f64::NEG_INFINITY;
    }
    a + f64::ln_1p(-d)
}

/// Composite Simpson sum over a uniform grid given by `values` at spacing
/// `h`. An odd interval count is finished with a 3/8-rule tail so the whole
/// rule stays fourth order; a single interval degrades to the trapezoid.
pub(crate) fn simpson_on_grid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    if intervals == 1 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let (simpson_end, mut total) = if intervals % 2 == 0 {
        (n - 1, 0.0)
    } else {
        // 3/8 rule on the last three intervals
        let t = values[n - 4] + 3.0 * values[n - 3] + 3.0 * values[n - 2] + values[n - 1];
        (n - 4, 0.375 * h * t)
    };
    if simpson_end >= 2 {
        let mut sum = values[0] + values[simpson_end];
        let mut j = 1;
        while j < simpson_end {
            sum += 4.0 * values[j];
            if j + 1 < simpson_end {
                sum += 2.0 * values[j + 1];
            }
            j += 2;
        }
        total += h / 3.0 * sum;
    }
    total
}

/// Outcome of the interval-doubling improper integral driver.
pub(crate) enum TailOutcome {
    /// ln of the converged integral value.
    Converged(f64),
    Divergent,
}

const DOUBLING_CAP: usize = 60;
const RATIO_WINDOW: usize = 3;
const RATIO_LIMIT: f64 = 1.5;
const RATIO_FROM: usize = 20;

/// Accumulates a nonnegative improper integral over doubling windows and
/// applies the divergence heuristic: converged once two consecutive window
/// increments fall below tol·max(1, total); divergent when the running total
/// grows by more than 1.5x across three consecutive doublings past the 20th,
/// or when the cap is reached without convergence (log-divergent integrands
/// produce constant increments that trip neither rule).
pub(crate) struct TailAccumulator {
    total_ln: f64,
    history: Vec<f64>,
    quiet: usize,
    tol_ln: f64,
}

impl TailAccumulator {
    pub(crate) fn new(tol: f64) -> Self {
        TailAccumulator { total_ln: f64::NEG_INFINITY, history: Vec::new(), quiet: 0, tol_ln: tol.ln() }
    }

    /// Feeds the ln of one window increment; returns Some when a verdict is
    /// reached.
    pub(crate) fn push(&mut self, increment_ln: f64) -> Option<TailOutcome> {
        self.total_ln = logaddexp(self.total_ln, increment_ln);
        self.history.push(self.total_ln);
        let k = self.history.len();
        if increment_ln <= self.tol_ln + self.total_ln.max(0.0) {
            self.quiet += 1;
            if self.quiet >= 2 {
                return Some(TailOutcome::Converged(self.total_ln));
            }
        } else {
            self.quiet = 0;
        }
        if k > RATIO_FROM + RATIO_WINDOW
            && self.history[k - 1] - self.history[k - 1 - RATIO_WINDOW] > RATIO_LIMIT.ln()
        {
            return Some(TailOutcome::Divergent);
        }
        if k >= DOUBLING_CAP {
            return Some(TailOutcome::Divergent);
        }
        None
    }
}

/// ln ∫_lo^∞ exp(log_f) dx over windows [lo, lo + w·2^k] for a nonnegative
/// integrand, with the doubling heuristic above.
pub(crate) fn improper_log_integral(
    log_f: impl Fn(f64) -> f64,
    lo: f64,
    first_width: f64,
    tol: f64,
) -> TailOutcome {
    let mut acc = TailAccumulator::new(tol);
    let mut left = lo;
    let mut width = first_width;
    loop {
        let right = left + width;
        let seg = gl_integrate_log(&log_f, left, right);
        if let Some(outcome) = acc.push(seg) {
            return outcome;
        }
        left = right;
        width *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_rule_is_exact_for_high_degree_polynomials() {
        // degree 100 over [0, 1]: exact value 1/101
        let v = gl_integrate(|x| x.powi(100), 0.0, 1.0);
        assert_relative_eq!(v, 1.0 / 101.0, max_relative = 1e-13);
    }

    #[test]
    fn gl_log_matches_linear_rule() {
        let v = gl_integrate_log(|x| 2.0 * x.ln() + x, 1.0, 2.0);
        let direct = gl_integrate(|x| x.exp() * x * x, 1.0, 2.0);
        assert_relative_eq!(v.exp(), direct, max_relative = 1e-12);
    }

    #[test]
    fn simpson_handles_both_interval_parities() {
        for m in [9usize, 10, 101, 128] {
            let h = 1.0 / (m - 1) as f64;
            let values: Vec<f64> = (0..m).map(|j| (j as f64 * h).powi(3)).collect();
            let v = simpson_on_grid(&values, h);
            assert_relative_eq!(v, 0.25, epsilon = 1e-9);
        }
    }

    #[test]
    fn simpson_single_interval_is_trapezoid() {
        assert_relative_eq!(simpson_on_grid(&[1.0, 3.0], 0.5), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn log_sum_helpers() {
        assert_relative_eq!(logaddexp(800.0, 800.0), 800.0 + 2f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(logsubexp(1.0, 0.0).exp(), 1f64.exp() - 1.0, max_relative = 1e-12);
        assert_eq!(logsubexp(2.5, 2.5), f64::NEG_INFINITY);
    }

    #[test]
    fn doubling_converges_on_decaying_tail() {
        // ∫_1^∞ x^{-2} dx = 1
        match improper_log_integral(|x| -2.0 * x.ln(), 1.0, 1.0, 1e-10) {
            TailOutcome::Converged(ln_v) => assert_relative_eq!(ln_v.exp(), 1.0, epsilon = 1e-9),
            TailOutcome::Divergent => panic!("tail should converge"),
        }
    }

    #[test]
    fn doubling_flags_log_divergence() {
        // ∫_1^∞ x^{-1} dx diverges logarithmically: only the cap catches it
        match improper_log_integral(|x| -x.ln(), 1.0, 1.0, 1e-10) {
            TailOutcome::Converged(_) => panic!("harmonic tail must not converge"),
            TailOutcome::Divergent => {}
        }
    }

    #[test]
    fn doubling_flags_polynomial_divergence() {
        match improper_log_integral(|x| x.ln(), 1.0, 1.0, 1e-10) {
            TailOutcome::Converged(_) => panic!("x diverges"),
            TailOutcome::Divergent => {}
        }
    }
}
