//! Generic DC algorithm engines for `f = g - h` with `g, h` convex.
//!
//! [`dca1_run`] steps through `y in dh(x)`, `x' in dg*(y)` using an explicit
//! conjugate subgradient map. [`dca2_run`] replaces the conjugate step with
//! the subproblem `min g(x) - <y, x>`. Both stop once the step norm drops to
//! `tol` or after `max_iters` iterations.

use thiserror::Error;

use crate::geometry::{dist, norm, Mat};

/// Newton iterations allowed before [`newton_solve`] gives up.
pub const NEWTON_MAX_ITERS: usize = 100;

/// Iterates with a norm above this are treated as divergence.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DcaError {
    #[error("problem has no conjugate subgradient map for g")]
    MissingConjugate,
    #[error("problem has no subproblem solver for g")]
    MissingSubproblem,
    #[error("non-finite iterate at step {0}")]
    NonFinite(usize),
    #[error("subproblem failed at step {iteration}: {source}")]
    Subproblem {
        iteration: usize,
        #[source]
        source: Box<DcaError>,
    },
    #[error("singular Hessian at Newton step {0}")]
    SingularHessian(usize),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("iterate diverged at step {0}")]
    Diverged(usize),
    #[error("step size must be positive, got {0}")]
    BadStep(f64),
}

type ScalarFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// `(y, x_prev) -> argmin g(x) - <y, x>`; `x_prev` is a warm start.
type SubproblemFn = Box<dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>, DcaError> + Send + Sync>;

/// A DC decomposition `f = g - h` with the oracles the engines need.
pub struct DcProblem {
    g: ScalarFn,
    h: ScalarFn,
    h_subgradient: VectorFn,
    g_conjugate_subgradient: Option<VectorFn>,
    g_subproblem: Option<SubproblemFn>,
}

impl DcProblem {
    pub fn new(
        g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        h: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        h_subgradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            g: Box::new(g),
            h: Box::new(h),
            h_subgradient: Box::new(h_subgradient),
            g_conjugate_subgradient: None,
            g_subproblem: None,
        }
    }

    pub fn with_conjugate(
        mut self,
        map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.g_conjugate_subgradient = Some(Box::new(map));
        self
    }

    pub fn with_subproblem(
        mut self,
        solver: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>, DcaError> + Send + Sync + 'static,
    ) -> Self {
        self.g_subproblem = Some(Box::new(solver));
        self
    }

    /// `g(x) - h(x)`. May be `+inf` when `x` leaves the domain of `g`.
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.g)(x) - (self.h)(x)
    }

    pub fn g(&self, x: &[f64]) -> f64 {
        (self.g)(x)
    }

    pub fn h(&self, x: &[f64]) -> f64 {
        (self.h)(x)
    }

    pub fn h_subgradient(&self, x: &[f64]) -> Vec<f64> {
        (self.h_subgradient)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub iterate: Vec<f64>,
    pub value: f64,
    /// Distance to the previous iterate; zero for the starting point.
    pub step_norm: f64,
}

/// Iterates visited by an engine, starting point first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
}

impl IterationTrace {
    fn push(&mut self, iterate: &[f64], value: f64, step_norm: f64) {
        self.steps.push(TraceStep {
            iterate: iterate.to_vec(),
            value,
            step_norm,
        });
    }

    /// Number of iterations taken (excludes the starting point).
    pub fn iterations(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.value)
    }

    /// True when no value rises by more than `slack` over its predecessor.
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[1].value <= w[0].value + slack)
    }
}

fn run_engine(
    p: &DcProblem,
    x0: &[f64],
    max_iters: usize,
    tol: f64,
    mut next: impl FnMut(usize, &[f64], &[f64]) -> Result<Vec<f64>, DcaError>,
) -> Result<(Vec<f64>, IterationTrace), DcaError> {
    let mut trace = IterationTrace::default();
    let mut x = x0.to_vec();
    trace.push(&x, p.value(&x), 0.0);
    for l in 1..=max_iters {
        let y = p.h_subgradient(&x);
        let x_next = next(l, &y, &x)?;
        if x_next.iter().any(|v| !v.is_finite()) {
            return Err(DcaError::NonFinite(l));
        }
        let step = dist(&x_next, &x);
        x = x_next;
        trace.push(&x, p.value(&x), step);
        if step <= tol {
            break;
        }
    }
    Ok((x, trace))
}

/// DCA with an explicit conjugate step `x_l in dg*(y_{l-1})`.
pub fn dca1_run(
    p: &DcProblem,
    x0: &[f64],
    max_iters: usize,
    tol: f64,
) -> Result<(Vec<f64>, IterationTrace), DcaError> {
    let conj = p
        .g_conjugate_subgradient
        .as_ref()
        .ok_or(DcaError::MissingConjugate)?;
    run_engine(p, x0, max_iters, tol, |_, y, _| Ok(conj(y)))
}

/// DCA where each step solves `min g(x) - <y_{l-1}, x>`.
pub fn dca2_run(
    p: &DcProblem,
    x0: &[f64],
    max_iters: usize,
    tol: f64,
) -> Result<(Vec<f64>, IterationTrace), DcaError> {
    let solve = p.g_subproblem.as_ref().ok_or(DcaError::MissingSubproblem)?;
    run_engine(p, x0, max_iters, tol, |l, y, x_prev| {
        solve(y, x_prev).map_err(|e| DcaError::Subproblem {
            iteration: l,
            source: Box::new(e),
        })
    })
}

/// Newton's method for `grad(x) = 0`. Stops once `|grad(x)| <= eps`.
pub fn newton_solve(
    grad: impl Fn(&[f64]) -> Vec<f64>,
    hess: impl Fn(&[f64]) -> Mat,
    x0: &[f64],
    eps: f64,
) -> Result<Vec<f64>, DcaError> {
    let mut x = x0.to_vec();
    for it in 0..NEWTON_MAX_ITERS {
        let g = grad(&x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(DcaError::NonFinite(it));
        }
        if norm(&g) <= eps {
            return Ok(x);
        }
        let step = solve_linear(hess(&x), g).ok_or(DcaError::SingularHessian(it))?;
        x.iter_mut().zip(&step).for_each(|(xi, s)| *xi -= s);
        if norm(&x) > DIVERGENCE_NORM {
            return Err(DcaError::Diverged(it));
        }
    }
    if norm(&grad(&x)) <= eps {
        Ok(x)
    } else {
        Err(DcaError::NoConvergence(NEWTON_MAX_ITERS))
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_linear(mut a: Mat, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.shape(), (n, n));
    let scale = a.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a.get(i, col).abs().total_cmp(&a.get(j, col).abs()))?;
        if a.get(pivot, col).abs() <= f64::EPSILON * scale {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                let t = a.get(col, j);
                a.set(col, j, a.get(pivot, j));
                a.set(pivot, j, t);
            }
            b.swap(col, pivot);
        }
        for i in col + 1..n {
            let f = a.get(i, col) / a.get(col, col);
            for j in col..n {
                a.set(i, j, a.get(i, j) - f * a.get(col, j));
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a.get(i, j) * x[j]).sum();
        x[i] = (b[i] - s) / a.get(i, i);
    }
    Some(x)
}

/// Fixed-step gradient descent. The trace records `objective` at each
/// iterate; the run stops when the step norm drops to `tol`.
pub fn gradient_descent_run(
    objective: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> Result<(Vec<f64>, IterationTrace), DcaError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(DcaError::BadStep(step));
    }
    let mut trace = IterationTrace::default();
    let mut x = x0.to_vec();
    trace.push(&x, objective(&x), 0.0);
    for l in 1..=max_iters {
        let g = grad(&x);
        let x_next: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
        if x_next.iter().any(|v| !v.is_finite()) || norm(&x_next) > DIVERGENCE_NORM {
            return Err(DcaError::Diverged(l));
        }
        let s = dist(&x_next, &x);
        x = x_next;
        trace.push(&x, objective(&x), s);
        if s <= tol {
            break;
        }
    }
    Ok((x, trace))
}

/// The two worked DC examples: a quartic in one variable and a nonsmooth
/// two-dimensional function with four global minimizers.
pub mod examples {
    use super::*;

    /// `f(x) = x^4 - 2x^2 + 2x - 3`.
    pub fn quartic(x: f64) -> f64 {
        x.powi(4) - 2.0 * x * x + 2.0 * x - 3.0
    }

    pub fn quartic_derivative(x: f64) -> f64 {
        4.0 * x.powi(3) - 4.0 * x + 2.0
    }

    /// `g = x^4`, `h = 2x^2 - 2x + 3`, with `dg*(y) = (y/4)^(1/3)`.
    pub fn quartic_problem() -> DcProblem {
        DcProblem::new(
            |x| x[0].powi(4),
            |x| 2.0 * x[0] * x[0] - 2.0 * x[0] + 3.0,
            |x| vec![4.0 * x[0] - 2.0],
        )
        .with_conjugate(|y| vec![(y[0] / 4.0).cbrt()])
    }

    /// Gradient-method baseline on the quartic.
    pub fn quartic_gradient_descent(
        x0: f64,
        step: f64,
        max_iters: usize,
        tol: f64,
    ) -> Result<(Vec<f64>, IterationTrace), DcaError> {
        gradient_descent_run(
            |x| quartic(x[0]),
            |x| vec![quartic_derivative(x[0])],
            &[x0],
            step,
            max_iters,
            tol,
        )
    }

    /// First trace index whose iterate satisfies `|f'(x)| < threshold`.
    pub fn first_stationary_index(trace: &IterationTrace, threshold: f64) -> Option<usize> {
        trace
            .steps
            .iter()
            .position(|s| quartic_derivative(s.iterate[0]).abs() < threshold)
    }

    /// Tolerance for the inner Newton solves.
    pub const NEWTON_EPS: f64 = 1e-8;

    /// `f(x1, x2) = x1^4 + x2^2 - 2x1^2 - |x2|`.
    pub fn nonsmooth_2d(x: &[f64]) -> f64 {
        x[0].powi(4) + x[1] * x[1] - 2.0 * x[0] * x[0] - x[1].abs()
    }

    /// Subgradient of `|t|`, taking 0 at the kink.
    fn sign(t: f64) -> f64 {
        if t > 0.0 {
            1.0
        } else if t < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// `g = x1^4 + x2^2`, `h = 2x1^2 + |x2|`; subproblems solved by Newton.
    pub fn nonsmooth_2d_problem() -> DcProblem {
        DcProblem::new(
            |x| x[0].powi(4) + x[1] * x[1],
            |x| 2.0 * x[0] * x[0] + x[1].abs(),
            |x| vec![4.0 * x[0], sign(x[1])],
        )
        .with_subproblem(|y, x_prev| {
            let y = [y[0], y[1]];
            // x1 = 0 makes the Hessian singular; start from the warm point
            // unless it sits there, in which case any nonzero seed works.
            let mut start = x_prev.to_vec();
            if start[0] == 0.0 {
                start[0] = if y[0] < 0.0 { -1.0 } else { 1.0 };
            }
            newton_solve(
                |x| vec![4.0 * x[0].powi(3) - y[0], 2.0 * x[1] - y[1]],
                |x| {
                    Mat::new(2, 2, vec![12.0 * x[0] * x[0], 0.0, 0.0, 2.0])
                        .expect("finite Hessian")
                },
                &start,
                NEWTON_EPS,
            )
        })
    }

    /// The four global minimizers `(+-1, +-0.5)`.
    pub const NONSMOOTH_2D_MINIMIZERS: [[f64; 2]; 4] =
        [[1.0, 0.5], [1.0, -0.5], [-1.0, 0.5], [-1.0, -0.5]];
}
