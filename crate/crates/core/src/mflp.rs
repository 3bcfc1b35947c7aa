//! Smoothed, penalized DC solver for the multifacility location problem
//!
//! ```text
//! minimize  sum_{i,j} u_ij^2 |a_j - v_i|   over binary column-stochastic U and centers V.
//! ```
//!
//! Each distance is replaced by its Nesterov smoothing with parameter `mu`,
//! binary memberships are relaxed to the simplex with the concave penalty
//! `alpha * sum u(1-u)`, and the objective is split as
//! `(rho/2)|(U,V)|^2 - H(U,V)`. Every DC step then reduces to a simplex
//! projection per assignment column and a ball projection per center.
//! `mu` shrinks geometrically between outer passes.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{kmeans, KMeansInit};
use crate::geometry::{
    dist, dist_sq, norm, project_ball_in_place, project_simplex_in_place,
    unit_ball_gap, GeometryError, Mat,
};

/// Column sums of a feasible assignment must be 1 within this.
pub const SIMPLEX_SUM_TOL: f64 = 1e-9;
/// Entries of a feasible assignment must be at least `-SIMPLEX_ENTRY_TOL`.
pub const SIMPLEX_ENTRY_TOL: f64 = 1e-12;
/// Centers may exceed the bounding radius by at most this.
pub const BALL_TOL: f64 = 1e-9;
/// Smallest convexification parameter chosen by [`RhoPolicy::Auto`].
pub const AUTO_RHO_FLOOR: f64 = 30.0;
/// Lloyd iteration cap when k-means provides the initial centers.
const KMEANS_INIT_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MflpError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("demand set is empty")]
    EmptyData,
    #[error("number of centers k = {k} must satisfy 1 <= k <= n = {n}")]
    InvalidK { k: usize, n: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("assignment column {column} is not in the simplex")]
    InfeasibleAssignment { column: usize },
    #[error("center {row} lies outside the ball of radius {radius}")]
    CenterOutsideBall { row: usize, radius: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite iterate at outer pass {outer}, inner step {inner}")]
    NonFinite { outer: usize, inner: usize },
    #[error("instance too large for exhaustive search: {k}^{n} labelings")]
    InstanceTooLarge { k: usize, n: usize },
}

/// Demand points `a_1..a_n`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSet {
    points: Mat,
}

impl DemandSet {
    pub fn new(points: Mat) -> Result<Self, MflpError> {
        if points.rows() == 0 || points.cols() == 0 {
            return Err(MflpError::EmptyData);
        }
        if !points.is_finite() {
            return Err(GeometryError::NonFinite.into());
        }
        Ok(Self { points })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MflpError> {
        Self::new(Mat::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn d(&self) -> usize {
        self.points.cols()
    }

    pub fn point(&self, j: usize) -> &[f64] {
        self.points.row(j)
    }

    pub fn points(&self) -> &Mat {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.row_iter()
    }

    /// Subset of the points, in the order given.
    pub fn select(&self, indices: &[usize]) -> Result<Self, MflpError> {
        let rows: Vec<&[f64]> = indices.iter().map(|&j| self.point(j)).collect();
        Self::from_rows(&rows)
    }
}

/// Relaxed assignment: a `k x n` matrix whose columns lie in the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    u: Mat,
}

impl Assignment {
    /// Validates column-simplex feasibility.
    pub fn new(u: Mat) -> Result<Self, MflpError> {
        if u.rows() == 0 {
            return Err(MflpError::ShapeMismatch("assignment needs k >= 1 rows".into()));
        }
        for j in 0..u.cols() {
            let mut sum = 0.0;
            for i in 0..u.rows() {
                let x = u.get(i, j);
                if x < -SIMPLEX_ENTRY_TOL || x > 1.0 + SIMPLEX_ENTRY_TOL {
                    return Err(MflpError::InfeasibleAssignment { column: j });
                }
                sum += x;
            }
            if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
                return Err(MflpError::InfeasibleAssignment { column: j });
            }
        }
        Ok(Self { u })
    }

    /// Binary assignment from center labels.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self, MflpError> {
        let mut u = Mat::zeros(k, labels.len());
        for (j, &i) in labels.iter().enumerate() {
            if i >= k {
                return Err(MflpError::ShapeMismatch(format!("label {i} >= k = {k}")));
            }
            u.set(i, j, 1.0);
        }
        Ok(Self { u })
    }

    pub fn k(&self) -> usize {
        self.u.rows()
    }

    pub fn n(&self) -> usize {
        self.u.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.u.get(i, j)
    }

    pub fn matrix(&self) -> &Mat {
        &self.u
    }

    pub fn is_binary(&self) -> bool {
        self.u.as_slice().iter().all(|&x| x == 0.0 || x == 1.0)
    }
}

/// Centers `v_1..v_k` (rows) constrained to the origin ball of radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Centers {
    v: Mat,
    radius: f64,
}

impl Centers {
    /// Validates `|v_i| <= radius` for every row.
    pub fn new(v: Mat, radius: f64) -> Result<Self, MflpError> {
        if !v.is_finite() {
            return Err(GeometryError::NonFinite.into());
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(GeometryError::NonPositiveRadius(radius).into());
        }
        for (row, vi) in v.row_iter().enumerate() {
            if norm(vi) > radius + BALL_TOL {
                return Err(MflpError::CenterOutsideBall { row, radius });
            }
        }
        Ok(Self { v, radius })
    }

    /// Centers with the bounding radius of `data`.
    pub fn for_data(v: Mat, data: &DemandSet) -> Result<Self, MflpError> {
        if v.cols() != data.d() {
            return Err(MflpError::ShapeMismatch(format!(
                "centers have dimension {}, data {}",
                v.cols(),
                data.d()
            )));
        }
        Self::new(v, radius_bound(data))
    }

    /// Projects each row onto the ball instead of rejecting it.
    pub fn projected(mut v: Mat, radius: f64) -> Result<Self, MflpError> {
        for i in 0..v.rows() {
            project_ball_in_place(v.row_mut(i), radius);
        }
        Self::new(v, radius)
    }

    pub fn k(&self) -> usize {
        self.v.rows()
    }

    pub fn d(&self) -> usize {
        self.v.cols()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self, i: usize) -> &[f64] {
        self.v.row(i)
    }

    pub fn matrix(&self) -> &Mat {
        &self.v
    }

    pub fn into_matrix(self) -> Mat {
        self.v
    }
}

/// How the convexification parameter is chosen at each `mu` level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoPolicy {
    Fixed(f64),
    /// `max(30, rho_lower_bound(data, mu))`, recomputed per `mu` level.
    Auto,
}

impl RhoPolicy {
    pub fn resolve(&self, data: &DemandSet, mu: f64) -> f64 {
        match *self {
            RhoPolicy::Fixed(rho) => rho,
            RhoPolicy::Auto => AUTO_RHO_FLOOR.max(rho_lower_bound(data, mu)),
        }
    }
}

/// Source of the initial centers.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Converged k-means centers, k-means seeded from the config seed.
    KMeans,
    /// `k` distinct data rows drawn with the config seed.
    RandomRows,
    Explicit(Mat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub k: usize,
    pub mu0: f64,
    pub beta: f64,
    pub eps: f64,
    pub mu_final: f64,
    pub alpha: f64,
    pub rho: RhoPolicy,
    /// DC steps per `mu` level.
    pub inner_iters: usize,
    pub init: Init,
    pub seed: u64,
}

impl SolverConfig {
    pub const DEFAULT_MU0: f64 = 0.5;
    pub const DEFAULT_BETA: f64 = 0.85;
    pub const DEFAULT_EPS: f64 = 1e-6;
    pub const DEFAULT_MU_FINAL: f64 = 1e-6;
    pub const DEFAULT_ALPHA: f64 = 30.0;
    pub const DEFAULT_RHO: f64 = 30.0;
    pub const DEFAULT_INNER_ITERS: usize = 1;

    /// Defaults for `k` centers, k-means initialization, seed 0.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            mu0: Self::DEFAULT_MU0,
            beta: Self::DEFAULT_BETA,
            eps: Self::DEFAULT_EPS,
            mu_final: Self::DEFAULT_MU_FINAL,
            alpha: Self::DEFAULT_ALPHA,
            rho: RhoPolicy::Fixed(Self::DEFAULT_RHO),
            inner_iters: Self::DEFAULT_INNER_ITERS,
            init: Init::KMeans,
            seed: 0,
        }
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_rho(mut self, rho: RhoPolicy) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), MflpError> {
        let bad = |msg: String| Err(MflpError::InvalidConfig(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.mu0 > 0.0 && self.mu0.is_finite()) {
            return bad(format!("mu0 must be positive, got {}", self.mu0));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.mu_final > 0.0 && self.mu_final <= self.mu0) {
            return bad(format!(
                "mu_final must lie in (0, mu0], got {}",
                self.mu_final
            ));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be nonnegative, got {}", self.alpha));
        }
        if let RhoPolicy::Fixed(rho) = self.rho {
            if !(rho > 0.0 && rho.is_finite()) {
                return bad(format!("rho must be positive, got {rho}"));
            }
        }
        if self.inner_iters == 0 {
            return bad("inner_iters must be at least 1".into());
        }
        Ok(())
    }
}

/// Smoothing, penalty and convexification parameters of one DC step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub mu: f64,
    pub alpha: f64,
    pub rho: f64,
}

/// Gradient of the convex part `H`: `y` is `n x k` (entry `(j, i)`),
/// `z` is `k x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub y: Mat,
    pub z: Mat,
}

/// Per outer pass: the `mu` and `rho` used, inner steps taken, and the
/// objective pieces at the end of the pass.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub outer: usize,
    pub mu: f64,
    pub rho: f64,
    pub inner_steps: usize,
    pub tol: f64,
    pub smoothed_objective: f64,
    pub penalty: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub assignment: Assignment,
    pub centers: Centers,
    pub initial_centers: Mat,
    pub labels: Vec<usize>,
    pub cost: f64,
    pub trace: Vec<TraceRecord>,
    /// Centers that no point is hardened to.
    pub empty_clusters: Vec<usize>,
    pub seed: u64,
}

/// Snapshot handed to a [`solve_with_observer`] callback. `inner == 0`
/// marks the initial point.
pub struct InnerStep<'a> {
    pub outer: usize,
    pub inner: usize,
    pub params: StepParams,
    pub assignment: &'a Assignment,
    pub centers: &'a Centers,
}

/// `sqrt(sum_j |a_j|^2)`; every optimal center lies in this ball.
pub fn radius_bound(data: &DemandSet) -> f64 {
    data.points().frobenius_norm()
}

/// `r + max_j |a_j|`, a bound on `|v_i - a_j|` inside the feasible set.
pub fn xi_bound(data: &DemandSet) -> f64 {
    let max_norm = data.iter().map(norm).fold(0.0, f64::max);
    radius_bound(data) + max_norm
}

/// Smallest `rho` that makes `(rho/2)|(U,V)|^2 - G_mu` convex on the
/// feasible set:
/// `(n / 2mu) [ (1 + xi^2/n) + sqrt((1 + xi^2/n)^2 + 12 xi^2/n) ]`.
pub fn rho_lower_bound(data: &DemandSet, mu: f64) -> f64 {
    assert!(mu > 0.0, "mu must be positive");
    let n = data.n() as f64;
    let xi2 = xi_bound(data).powi(2);
    let b = 1.0 + xi2 / n;
    n / (2.0 * mu) * (b + (b * b + 12.0 * xi2 / n).sqrt())
}

/// Determinant of the Hessian of
/// `(rho/2) u^2 + (rho/2n)|a - v|^2 - (1/2mu) u^2 |a - v|^2`:
/// `rho^2/n - rho (u^2/mu + |v-a|^2/(n mu)) - 3 u^2 |v-a|^2 / mu^2`.
pub fn convexity_determinant(u: f64, v: &[f64], a: &[f64], mu: f64, rho: f64, n: usize) -> f64 {
    let n = n as f64;
    let s = dist_sq(v, a);
    let u2 = u * u;
    rho * rho / n - rho * (u2 / mu + s / (n * mu)) - 3.0 * u2 * s / (mu * mu)
}

/// Concave penalty `sum u_ij (1 - u_ij)`; zero exactly on binary assignments.
pub fn penalty(u: &Assignment) -> f64 {
    u.matrix().as_slice().iter().map(|&x| x * (1.0 - x)).sum()
}

fn check_shapes(u: &Assignment, v: &Centers, data: &DemandSet) -> Result<(), MflpError> {
    if u.k() != v.k() || u.n() != data.n() || v.d() != data.d() {
        return Err(MflpError::ShapeMismatch(format!(
            "U is {}x{}, V is {}x{}, data is {}x{}",
            u.k(),
            u.n(),
            v.k(),
            v.d(),
            data.n(),
            data.d()
        )));
    }
    Ok(())
}

/// `sum_{i,j} u_ij^2 |a_j - v_i|`.
pub fn objective(u: &Assignment, v: &Centers, data: &DemandSet) -> Result<f64, MflpError> {
    check_shapes(u, v, data)?;
    let mut total = 0.0;
    for i in 0..v.k() {
        for (j, a) in data.iter().enumerate() {
            let uij = u.get(i, j);
            if uij != 0.0 {
                total += uij * uij * dist(a, v.center(i));
            }
        }
    }
    Ok(total)
}

/// `F_mu = G_mu - H_mu` and its two convex parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedObjective {
    pub f_mu: f64,
    pub g_mu: f64,
    pub h_mu: f64,
}

/// `G_mu = (1/2mu) sum u^2 |a_j - v_i|^2` and
/// `H_mu = (mu/2) sum u^2 d((a_j - v_i)/mu; B)^2`.
pub fn smoothed_objective(
    u: &Assignment,
    v: &Centers,
    data: &DemandSet,
    mu: f64,
) -> Result<SmoothedObjective, MflpError> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(GeometryError::NonPositiveMu(mu).into());
    }
    check_shapes(u, v, data)?;
    let (mut g_mu, mut h_mu) = (0.0, 0.0);
    for i in 0..v.k() {
        for (j, a) in data.iter().enumerate() {
            let u2 = u.get(i, j).powi(2);
            if u2 == 0.0 {
                continue;
            }
            let r = dist(a, v.center(i));
            let gap = unit_ball_gap(r / mu);
            g_mu += u2 * r * r / (2.0 * mu);
            h_mu += 0.5 * mu * u2 * gap * gap;
        }
    }
    Ok(SmoothedObjective {
        f_mu: g_mu - h_mu,
        g_mu,
        h_mu,
    })
}

/// `F_mu + alpha * P`, the quantity a fixed-`mu` DC run decreases.
pub fn penalized_objective(
    u: &Assignment,
    v: &Centers,
    data: &DemandSet,
    mu: f64,
    alpha: f64,
) -> Result<f64, MflpError> {
    Ok(smoothed_objective(u, v, data, mu)?.f_mu + alpha * penalty(u))
}

/// Gradient of `H = (rho/2)|(U,V)|^2 - G_mu + H_mu - alpha P`.
///
/// With `w = (a_j - v_i)/mu` and `s_ij = (mu/2)(|w|^2 - d(w; B)^2)` the
/// smoothed distance, the entries reduce to
/// `Y_ji = rho u_ij - 2 u_ij s_ij + 2 alpha u_ij - alpha` and
/// `Z_i = rho v_i + sum_j u_ij^2 P(w; B)`.
pub fn grad_h(
    u: &Assignment,
    v: &Centers,
    data: &DemandSet,
    params: StepParams,
) -> Result<GradientPair, MflpError> {
    let StepParams { mu, alpha, rho } = params;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(GeometryError::NonPositiveMu(mu).into());
    }
    check_shapes(u, v, data)?;
    let (k, n, d) = (v.k(), data.n(), data.d());
    let mut y = Mat::zeros(n, k);
    let mut z = Mat::zeros(k, d);
    let mut w = vec![0.0; d];
    for i in 0..k {
        let vi = v.center(i);
        let zi = z.row_mut(i);
        zi.iter_mut().zip(vi).for_each(|(zc, vc)| *zc = rho * vc);
        for (j, a) in data.iter().enumerate() {
            let uij = u.get(i, j);
            for c in 0..d {
                w[c] = (a[c] - vi[c]) / mu;
            }
            let wn = norm(&w);
            let gap = unit_ball_gap(wn);
            let s = 0.5 * mu * (wn * wn - gap * gap);
            y.set(j, i, rho * uij - 2.0 * uij * s + 2.0 * alpha * uij - alpha);
            let u2 = uij * uij;
            if u2 != 0.0 {
                // P(w; B) = w / max(1, |w|)
                let scale = u2 / wn.max(1.0);
                zi.iter_mut().zip(&w).for_each(|(zc, wc)| *zc += scale * wc);
            }
        }
    }
    Ok(GradientPair { y, z })
}

/// Binary assignment of each point to its nearest center (ties to the
/// smallest index).
pub fn init_assignment(data: &DemandSet, v: &Centers) -> Assignment {
    let labels = nearest_labels(v.matrix(), data);
    Assignment::from_labels(&labels, v.k()).expect("labels are below k")
}

pub(crate) fn nearest_center(centers: &Mat, a: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.row_iter().enumerate() {
        let d = dist_sq(a, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    (best.0, best.1.sqrt())
}

pub(crate) fn nearest_labels(centers: &Mat, data: &DemandSet) -> Vec<usize> {
    data.iter().map(|a| nearest_center(centers, a).0).collect()
}

/// One projected DC step: each assignment column becomes
/// `P(Y[j,:]/rho; simplex)` and each center `P(Z_i/rho; ball)`.
pub fn dca_inner_step(
    u: &Assignment,
    v: &Centers,
    data: &DemandSet,
    params: StepParams,
) -> Result<(Assignment, Centers), MflpError> {
    let GradientPair { y, mut z } = grad_h(u, v, data, params)?;
    if !y.is_finite() || !z.is_finite() {
        return Err(MflpError::NonFinite { outer: 0, inner: 0 });
    }
    let rho = params.rho;
    let (k, n) = (u.k(), u.n());
    let mut u_next = Mat::zeros(k, n);
    let mut col = vec![0.0; k];
    for j in 0..n {
        col.iter_mut()
            .zip(y.row(j))
            .for_each(|(c, yv)| *c = yv / rho);
        project_simplex_in_place(&mut col);
        u_next.set_column(j, &col);
    }
    for i in 0..k {
        let zi = z.row_mut(i);
        zi.iter_mut().for_each(|x| *x /= rho);
        project_ball_in_place(zi, v.radius());
    }
    Ok((
        Assignment { u: u_next },
        Centers {
            v: z,
            radius: v.radius(),
        },
    ))
}

/// Index of the largest entry of each column (ties to the smallest index).
pub fn harden(u: &Assignment) -> Vec<usize> {
    (0..u.n())
        .map(|j| {
            let mut best = 0;
            for i in 1..u.k() {
                if u.get(i, j) > u.get(best, j) {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Total distance from each point to its nearest center.
pub fn report_cost(centers: &Mat, data: &DemandSet) -> f64 {
    data.iter().map(|a| nearest_center(centers, a).1).sum()
}

fn initial_centers(data: &DemandSet, cfg: &SolverConfig) -> Result<Mat, MflpError> {
    match &cfg.init {
        Init::Explicit(v) => {
            if v.shape() != (cfg.k, data.d()) {
                return Err(MflpError::ShapeMismatch(format!(
                    "initial centers are {}x{}, expected {}x{}",
                    v.rows(),
                    v.cols(),
                    cfg.k,
                    data.d()
                )));
            }
            Ok(v.clone())
        }
        Init::RandomRows => random_rows(data, cfg.k, cfg.seed),
        Init::KMeans => {
            Ok(kmeans(data, cfg.k, KMeansInit::Seed(cfg.seed), KMEANS_INIT_ITERS)?.centers)
        }
    }
}

/// `k` distinct rows of `data` drawn by a ChaCha8 generator seeded with `seed`.
pub fn random_rows(data: &DemandSet, k: usize, seed: u64) -> Result<Mat, MflpError> {
    if k == 0 || k > data.n() {
        return Err(MflpError::InvalidK { k, n: data.n() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<&[f64]> = sample(&mut rng, data.n(), k)
        .into_iter()
        .map(|j| data.point(j))
        .collect();
    Ok(Mat::from_rows(&rows)?)
}

/// Runs the annealed DC scheme from `cfg`.
pub fn solve(data: &DemandSet, cfg: &SolverConfig) -> Result<SolveResult, MflpError> {
    solve_with_observer(data, cfg, |_| {})
}

/// Like [`solve`], calling `observer` on the initial point and after every
/// inner step.
pub fn solve_with_observer(
    data: &DemandSet,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&InnerStep<'_>),
) -> Result<SolveResult, MflpError> {
    cfg.validate()?;
    if cfg.k > data.n() {
        return Err(MflpError::InvalidK {
            k: cfg.k,
            n: data.n(),
        });
    }

    let radius = radius_bound(data);
    let initial = initial_centers(data, cfg)?;
    let mut v = Centers::projected(initial.clone(), radius)?;
    let mut u = init_assignment(data, &v);

    let mut mu = cfg.mu0;
    observer(&InnerStep {
        outer: 0,
        inner: 0,
        params: StepParams {
            mu,
            alpha: cfg.alpha,
            rho: cfg.rho.resolve(data, mu),
        },
        assignment: &u,
        centers: &v,
    });

    let mut tol = f64::INFINITY;
    let mut trace = Vec::new();
    let mut outer = 0;
    while tol > cfg.eps && mu > cfg.mu_final {
        outer += 1;
        let params = StepParams {
            mu,
            alpha: cfg.alpha,
            rho: cfg.rho.resolve(data, mu),
        };
        let (u_start, v_start) = (u.clone(), v.clone());
        let mut inner_steps = 0;
        for inner in 1..=cfg.inner_iters {
            let (u_next, v_next) = dca_inner_step(&u, &v, data, params).map_err(|e| match e {
                MflpError::NonFinite { .. } => MflpError::NonFinite { outer, inner },
                other => other,
            })?;
            let step_sq = u_next.u.frobenius_dist_sq(&u.u) + v_next.v.frobenius_dist_sq(&v.v);
            u = u_next;
            v = v_next;
            inner_steps = inner;
            observer(&InnerStep {
                outer,
                inner,
                params,
                assignment: &u,
                centers: &v,
            });
            if step_sq.sqrt() <= cfg.eps {
                break;
            }
        }
        tol = (u.u.frobenius_dist_sq(&u_start.u) + v.v.frobenius_dist_sq(&v_start.v)).sqrt();
        let sm = smoothed_objective(&u, &v, data, mu)?;
        trace.push(TraceRecord {
            outer,
            mu,
            rho: params.rho,
            inner_steps,
            tol,
            smoothed_objective: sm.f_mu,
            penalty: penalty(&u),
            objective: objective(&u, &v, data)?,
        });
        mu *= cfg.beta;
    }

    let labels = harden(&u);
    let mut counts = vec![0usize; cfg.k];
    labels.iter().for_each(|&i| counts[i] += 1);
    let empty_clusters = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| i)
        .collect();
    let cost = report_cost(v.matrix(), data);
    Ok(SolveResult {
        assignment: u,
        centers: v,
        initial_centers: initial,
        labels,
        cost,
        trace,
        empty_clusters,
        seed: cfg.seed,
    })
}

/// Runs `restarts` solves with seeds `cfg.seed, cfg.seed + 1, ...` in
/// parallel and keeps the lowest reported cost (ties to the earlier seed).
pub fn solve_multistart(
    data: &DemandSet,
    cfg: &SolverConfig,
    restarts: usize,
) -> Result<SolveResult, MflpError> {
    let restarts = restarts.max(1);
    let results: Vec<Result<SolveResult, MflpError>> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| solve(data, &cfg.clone().with_seed(cfg.seed.wrapping_add(r))))
        .collect();
    let mut best: Option<SolveResult> = None;
    for res in results {
        let res = res?;
        if best.as_ref().map_or(true, |b| res.cost < b.cost) {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one restart"))
}
