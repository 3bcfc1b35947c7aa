//! Reference algorithms: Lloyd's k-means, Weiszfeld's geometric median and
//! an exhaustive solver for tiny instances.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::geometry::{dist, norm, Mat};
use crate::mflp::{nearest_center, nearest_labels, random_rows, report_cost, DemandSet, MflpError};

/// Largest `k^n` [`brute_force_mflp`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

const WEISZFELD_GRAD_TOL: f64 = 1e-10;
const WEISZFELD_MAX_ITERS: usize = 100_000;
const WEISZFELD_NUDGE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum KMeansInit {
    Centers(Mat),
    /// `k` distinct data rows drawn with this seed.
    Seed(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centers: Mat,
    pub labels: Vec<usize>,
    /// Total (unsquared) distance to the nearest center.
    pub cost: f64,
    pub iterations: usize,
    /// Set when an empty cluster had to be reseeded.
    pub reseeded: bool,
}

/// Lloyd's algorithm: assign to the nearest center, move centers to cluster
/// means, repeat until the labels stop changing or `max_iters` is hit.
///
/// An empty cluster is reseeded at the point farthest from its current
/// center.
pub fn kmeans(
    data: &DemandSet,
    k: usize,
    init: KMeansInit,
    max_iters: usize,
) -> Result<KMeansResult, MflpError> {
    let n = data.n();
    if k == 0 || k > n {
        return Err(MflpError::InvalidK { k, n });
    }
    let mut centers = match init {
        KMeansInit::Centers(c) => {
            if c.shape() != (k, data.d()) {
                return Err(MflpError::ShapeMismatch(format!(
                    "k-means start is {}x{}, expected {}x{}",
                    c.rows(),
                    c.cols(),
                    k,
                    data.d()
                )));
            }
            c
        }
        KMeansInit::Seed(seed) => random_rows(data, k, seed)?,
    };

    let mut labels = nearest_labels(&centers, data);
    let mut reseeded = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        reseeded |= recenter(data, &mut centers, &mut labels);
        let next = nearest_labels(&centers, data);
        if next == labels {
            break;
        }
        labels = next;
    }
    let cost = report_cost(&centers, data);
    Ok(KMeansResult {
        centers,
        labels,
        cost,
        iterations,
        reseeded,
    })
}

/// Moves each center to its cluster mean. Returns true if any cluster was
/// empty and got reseeded.
fn recenter(data: &DemandSet, centers: &mut Mat, labels: &mut [usize]) -> bool {
    let (k, d) = centers.shape();
    let mut sums = Mat::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (a, &l) in data.iter().zip(labels.iter()) {
        counts[l] += 1;
        sums.row_mut(l).iter_mut().zip(a).for_each(|(s, x)| *s += x);
    }
    let mut reseeded = false;
    for i in 0..k {
        if counts[i] == 0 {
            // farthest point from its own center
            let (j, _) = data
                .iter()
                .enumerate()
                .map(|(j, a)| (j, nearest_center(centers, a).1))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let old = labels[j];
            counts[old] -= 1;
            sums.row_mut(old)
                .iter_mut()
                .zip(data.point(j))
                .for_each(|(s, x)| *s -= x);
            labels[j] = i;
            counts[i] = 1;
            sums.row_mut(i).copy_from_slice(data.point(j));
            reseeded = true;
        }
    }
    for i in 0..k {
        if counts[i] > 0 {
            let c = counts[i] as f64;
            for (dst, s) in centers.row_mut(i).iter_mut().zip(sums.row(i)) {
                *dst = s / c;
            }
        }
    }
    reseeded
}

fn sum_dist<'a>(points: impl Iterator<Item = &'a [f64]>, x: &[f64]) -> f64 {
    points.map(|a| dist(a, x)).sum()
}

/// Geometric median of a point set by Weiszfeld iteration from the centroid.
///
/// A data point is returned directly when it satisfies the vertex optimality
/// condition; an iterate that lands exactly on a data point is nudged off it.
pub fn weiszfeld(points: &DemandSet) -> Vec<f64> {
    let n = points.n();
    let d = points.d();
    if n == 1 {
        return points.point(0).to_vec();
    }

    // vertex check: a_m is optimal iff |sum_{a_j != a_m} unit(a_m - a_j)| <= multiplicity
    for m in 0..n {
        let am = points.point(m);
        let mut pull = vec![0.0; d];
        let mut mult = 0.0;
        for a in points.iter() {
            let r = dist(a, am);
            if r == 0.0 {
                mult += 1.0;
            } else {
                pull.iter_mut()
                    .zip(am.iter().zip(a))
                    .for_each(|(p, (x, y))| *p += (x - y) / r);
            }
        }
        if norm(&pull) <= mult {
            return am.to_vec();
        }
    }

    let mut x = vec![0.0; d];
    for a in points.iter() {
        x.iter_mut().zip(a).for_each(|(xi, ai)| *xi += ai / n as f64);
    }
    let mut num = vec![0.0; d];
    for _ in 0..WEISZFELD_MAX_ITERS {
        num.iter_mut().for_each(|v| *v = 0.0);
        let mut den = 0.0;
        let mut grad = vec![0.0; d];
        let mut on_point = false;
        for a in points.iter() {
            let r = dist(a, &x);
            if r == 0.0 {
                on_point = true;
                break;
            }
            num.iter_mut().zip(a).for_each(|(v, ai)| *v += ai / r);
            den += 1.0 / r;
            grad.iter_mut()
                .zip(x.iter().zip(a))
                .for_each(|(g, (xi, ai))| *g += (xi - ai) / r);
        }
        if on_point {
            x.iter_mut().for_each(|v| *v += WEISZFELD_NUDGE);
            continue;
        }
        if norm(&grad) <= WEISZFELD_GRAD_TOL {
            break;
        }
        let next: Vec<f64> = num.iter().map(|v| v / den).collect();
        if next == x {
            break;
        }
        x = next;
    }
    x
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub labels: Vec<usize>,
    pub centers: Mat,
    pub cost: f64,
}

/// Global optimum of the multifacility problem by enumerating all `k^n`
/// labelings, each cluster centered at its geometric median.
///
/// Empty clusters cost nothing and get their center at the first data point.
/// Among equal costs the lexicographically smallest labeling wins.
pub fn brute_force_mflp(data: &DemandSet, k: usize) -> Result<BruteForceResult, MflpError> {
    let n = data.n();
    if k == 0 || k > n {
        return Err(MflpError::InvalidK { k, n });
    }
    let total = (k as u64).checked_pow(n as u32).filter(|&t| t <= BRUTE_FORCE_LIMIT);
    let Some(total) = total else {
        return Err(MflpError::InstanceTooLarge { k, n });
    };
    if k == 1 {
        let c = weiszfeld(data);
        let cost = sum_dist(data.iter(), &c);
        return Ok(BruteForceResult {
            labels: vec![0; n],
            centers: Mat::new(1, data.d(), c)?,
            cost,
        });
    }
    // k >= 2 and k^n <= 1e6 keeps n below 64, so subsets fit a u64 mask
    let subsets = cluster_costs(data);

    let labels_of = |code: u64| -> Vec<usize> {
        let mut code = code;
        let mut labels = vec![0; n];
        for l in labels.iter_mut().rev() {
            *l = (code % k as u64) as usize;
            code /= k as u64;
        }
        labels
    };
    let cost_of = |labels: &[usize]| -> f64 {
        let mut masks = vec![0u64; k];
        for (j, &l) in labels.iter().enumerate() {
            masks[l] |= 1 << j;
        }
        masks.iter().map(|m| subsets.get(m).map_or(0.0, |c| c.0)).sum()
    };
    // codes enumerate labelings lexicographically; keep the first minimum
    let (best_code, best_cost) = (0..total)
        .into_par_iter()
        .map(|code| (code, cost_of(&labels_of(code))))
        .reduce(
            || (u64::MAX, f64::INFINITY),
            |a, b| {
                if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    let labels = labels_of(best_code);
    let mut centers = Mat::zeros(k, data.d());
    for i in 0..k {
        let mask = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == i)
            .fold(0u64, |m, (j, _)| m | 1 << j);
        let c = match subsets.get(&mask) {
            Some((_, c)) => c.clone(),
            None => data.point(0).to_vec(),
        };
        centers.row_mut(i).copy_from_slice(&c);
    }
    Ok(BruteForceResult {
        labels,
        centers,
        cost: best_cost,
    })
}

/// Geometric-median cost and center of every nonempty subset.
fn cluster_costs(data: &DemandSet) -> HashMap<u64, (f64, Vec<f64>)> {
    let n = data.n();
    (1u64..(1u64 << n))
        .into_par_iter()
        .map(|mask| {
            let idx: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            let sub = data.select(&idx).expect("nonempty subset");
            let c = weiszfeld(&sub);
            (mask, (sum_dist(sub.iter(), &c), c))
        })
        .collect()
}
