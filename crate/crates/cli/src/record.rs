//! The result document written by `mflp solve --out` and `mflp compare --out`.
//!
//! Floats are written with shortest round-trip formatting, so loading a
//! record gives back bit-identical costs and centers.

use std::fs;
use std::path::Path;

use mflp::baselines::KMeansResult;
use mflp::data::write_csv;
use mflp::mflp::TraceRecord;
use mflp::{DemandSet, Mat, RhoPolicy, SolveResult, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub command: String,
    pub config: ConfigEcho,
    pub dataset: DatasetFingerprint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmeans: Option<KMeansRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveRecord>,
    /// Only present with `--record-time`; it would break byte-identical
    /// reruns otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoEcho {
    Auto,
    Fixed(f64),
}

impl From<RhoPolicy> for RhoEcho {
    fn from(r: RhoPolicy) -> Self {
        match r {
            RhoPolicy::Auto => RhoEcho::Auto,
            RhoPolicy::Fixed(v) => RhoEcho::Fixed(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub data: String,
    pub k: usize,
    pub mu0: f64,
    pub beta: f64,
    pub eps: f64,
    pub mu_final: f64,
    pub alpha: f64,
    pub rho: RhoEcho,
    pub inner: usize,
    pub init: String,
    pub seed: u64,
    pub restarts: usize,
}

impl ConfigEcho {
    pub fn new(data: &str, init: &str, cfg: &SolverConfig, restarts: usize) -> Self {
        Self {
            data: data.to_owned(),
            k: cfg.k,
            mu0: cfg.mu0,
            beta: cfg.beta,
            eps: cfg.eps,
            mu_final: cfg.mu_final,
            alpha: cfg.alpha,
            rho: cfg.rho.into(),
            inner: cfg.inner_iters,
            init: init.to_owned(),
            seed: cfg.seed,
            restarts,
        }
    }
}

/// Size and SHA-256 of the points as canonical CSV, so the same points hash
/// the same however the source file was formatted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub n: usize,
    pub d: usize,
    pub sha256: String,
}

impl DatasetFingerprint {
    pub fn of(data: &DemandSet) -> Self {
        let digest = Sha256::digest(write_csv(data).as_bytes());
        Self {
            n: data.n(),
            d: data.d(),
            sha256: hex::encode(digest),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub outer: usize,
    pub mu: f64,
    pub rho: f64,
    pub inner_steps: usize,
    pub tol: f64,
    pub smoothed_objective: f64,
    pub penalty: f64,
    pub objective: f64,
}

impl From<&TraceRecord> for TraceEntry {
    fn from(t: &TraceRecord) -> Self {
        Self {
            outer: t.outer,
            mu: t.mu,
            rho: t.rho,
            inner_steps: t.inner_steps,
            tol: t.tol,
            smoothed_objective: t.smoothed_objective,
            penalty: t.penalty,
            objective: t.objective,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub seed: u64,
    pub initial_centers: Vec<Vec<f64>>,
    pub centers: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub cost: f64,
    pub empty_clusters: Vec<usize>,
    pub trace: Vec<TraceEntry>,
}

impl From<&SolveResult> for SolveRecord {
    fn from(r: &SolveResult) -> Self {
        Self {
            seed: r.seed,
            initial_centers: r.initial_centers.to_rows(),
            centers: r.centers.matrix().to_rows(),
            labels: r.labels.clone(),
            cost: r.cost,
            empty_clusters: r.empty_clusters.clone(),
            trace: r.trace.iter().map(TraceEntry::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansRecord {
    pub centers: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub cost: f64,
    pub iterations: usize,
    pub reseeded: bool,
}

impl From<&KMeansResult> for KMeansRecord {
    fn from(r: &KMeansResult) -> Self {
        Self {
            centers: r.centers.to_rows(),
            labels: r.labels.clone(),
            cost: r.cost,
            iterations: r.iterations,
            reseeded: r.reseeded,
        }
    }
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        fs::write(path, self.to_json())
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(std::io::Error::other)
    }

    /// Centers and labels of the solver result, else of the k-means result.
    pub fn final_clustering(&self) -> Option<(Mat, &[usize])> {
        let (centers, labels) = match (&self.solve, &self.kmeans) {
            (Some(s), _) => (&s.centers, &s.labels),
            (None, Some(k)) => (&k.centers, &k.labels),
            (None, None) => return None,
        };
        Some((Mat::from_rows(centers).ok()?, labels))
    }
}
