//! Dense vector/matrix primitives plus the projection and smoothing kernels
//! used by the solvers.
//!
//! Vectors are plain `&[f64]` slices. Matrices are dense, row-major and
//! carry their shape explicitly. Every kernel here is a pure function.

use std::fmt;

use thiserror::Error;

/// Simplex entries at or above this value (but below zero) are clamped to 0.
const SIMPLEX_CLAMP: f64 = -1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite value in input")]
    NonFinite,
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("smoothing parameter must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("cannot project onto an empty simplex")]
    EmptySimplex,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix data has {got} entries, expected {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, got: usize },
}

/// Dense row-major matrix with a fixed shape.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, GeometryError> {
        if data.len() != rows * cols {
            return Err(GeometryError::BadShape {
                rows,
                cols,
                got: data.len(),
            });
        }
        if !all_finite(&data) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, GeometryError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(GeometryError::DimensionMismatch(cols, r.len()));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.row_iter().map(<[f64]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Squared Frobenius distance to a matrix of the same shape.
    pub fn frobenius_dist_sq(&self, other: &Mat) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        dist_sq(&self.data, &other.data)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{} ", self.rows, self.cols)?;
        f.debug_list().entries(self.row_iter()).finish()
    }
}

pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

fn check_finite(x: &[f64]) -> Result<(), GeometryError> {
    if all_finite(x) {
        Ok(())
    } else {
        Err(GeometryError::NonFinite)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// Distance from `x` to the closed unit ball, `max(0, |x| - 1)`.
pub fn dist_to_unit_ball(x: &[f64]) -> Result<f64, GeometryError> {
    check_finite(x)?;
    Ok(unit_ball_gap(norm(x)))
}

#[inline]
pub(crate) fn unit_ball_gap(norm: f64) -> f64 {
    (norm - 1.0).max(0.0)
}

/// Euclidean projection onto the origin-centered ball of the given radius.
pub fn project_ball(x: &[f64], radius: f64) -> Result<Vec<f64>, GeometryError> {
    check_finite(x)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(GeometryError::NonPositiveRadius(radius));
    }
    let mut out = x.to_vec();
    project_ball_in_place(&mut out, radius);
    Ok(out)
}

/// In-place ball projection. A zero radius collapses `x` to the origin.
pub(crate) fn project_ball_in_place(x: &mut [f64], radius: f64) {
    let n = norm(x);
    if n > radius {
        let scale = if n > 0.0 { radius / n } else { 0.0 };
        x.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Euclidean projection onto the probability simplex
/// `{z in [0,1]^k : sum z = 1}`.
///
/// Sort-based threshold method: with `y` sorted descending, the active
/// count is the largest `m` such that `y_(m) - (sum_{i<=m} y_(i) - 1)/m > 0`,
/// and the projection is `max(y - theta, 0)` for that threshold `theta`.
pub fn project_simplex(y: &[f64]) -> Result<Vec<f64>, GeometryError> {
    if y.is_empty() {
        return Err(GeometryError::EmptySimplex);
    }
    check_finite(y)?;
    let mut out = y.to_vec();
    project_simplex_in_place(&mut out);
    Ok(out)
}

pub(crate) fn project_simplex_in_place(y: &mut [f64]) {
    let mut sorted = y.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (m, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (m + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    for v in y.iter_mut() {
        let z = *v - theta;
        *v = if z >= SIMPLEX_CLAMP && z <= 0.0 { 0.0 } else { z.max(0.0) };
    }
}

/// Value and gradient of a smoothed distance function.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedNorm {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Nesterov smoothing of `x -> |x - a|`:
/// `|x-a|^2/(2 mu) - (mu/2) d((x-a)/mu; B)^2`, with gradient `P((x-a)/mu; B)`.
///
/// The result satisfies `value <= |x - a| <= value + mu/2`.
pub fn smoothed_norm(x: &[f64], a: &[f64], mu: f64) -> Result<SmoothedNorm, GeometryError> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(GeometryError::NonPositiveMu(mu));
    }
    if x.len() != a.len() {
        return Err(GeometryError::DimensionMismatch(x.len(), a.len()));
    }
    check_finite(x)?;
    check_finite(a)?;

    let mut w: Vec<f64> = x.iter().zip(a).map(|(xi, ai)| (xi - ai) / mu).collect();
    let wn = norm(&w);
    let gap = unit_ball_gap(wn);
    // |x-a|^2/(2mu) = (mu/2)|w|^2
    let value = 0.5 * mu * (wn * wn - gap * gap);
    project_ball_in_place(&mut w, 1.0);
    Ok(SmoothedNorm { value, grad: w })
}

/// Frobenius norm of a matrix.
pub fn frobenius_norm(m: &Mat) -> f64 {
    m.frobenius_norm()
}
