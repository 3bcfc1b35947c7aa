//! Dataset ingestion, synthetic generators and bundled instances.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::geometry::Mat;
use crate::mflp::{DemandSet, MflpError};

const POINTS14_CSV: &str = include_str!("../data/points14.csv");
const US50_CSV: &str = include_str!("../data/us50.csv");

/// Names accepted by [`bundled`].
pub const BUNDLED_NAMES: [&str; 2] = ["points14", "us50"];

/// Ring centers, radius and points per ring of the default ring instance.
pub const DEFAULT_RING_CENTERS: [[f64; 2]; 4] = [[2.0, 2.0], [4.0, 2.0], [4.0, 4.0], [2.0, 4.0]];
pub const DEFAULT_RING_RADIUS: f64 = 0.3;
pub const DEFAULT_POINTS_PER_RING: usize = 10;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty dataset")]
    Empty,
    #[error("line {line}: expected {expected} columns, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: cannot parse {value:?} as a number")]
    NotNumeric {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("unknown bundled dataset {0:?} (known: points14, us50)")]
    UnknownBundled(String),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Invalid(#[from] MflpError),
}

/// Reads a CSV file of points; see [`parse_csv`].
pub fn load_csv(path: impl AsRef<Path>) -> Result<DemandSet, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_csv(&text)
}

/// Parses one point per row, comma separated. A first row with any
/// non-numeric cell is treated as a header.
pub fn parse_csv(text: &str) -> Result<DemandSet, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DataError::Csv {
            line: e.position().map_or(idx + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Result<f64, &str>> = record
            .iter()
            .map(|cell| cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(cell))
            .collect();
        if idx == 0 && parsed.iter().any(Result::is_err) {
            continue;
        }
        let expected = *width.get_or_insert(parsed.len());
        if parsed.len() != expected {
            return Err(DataError::Ragged {
                line,
                expected,
                found: parsed.len(),
            });
        }
        let row = parsed
            .into_iter()
            .enumerate()
            .map(|(c, v)| {
                v.map_err(|cell| DataError::NotNumeric {
                    line,
                    column: c + 1,
                    value: cell.to_owned(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(DemandSet::from_rows(&rows)?)
}

/// Writes points with shortest round-trip decimal formatting.
pub fn write_csv(data: &DemandSet) -> String {
    let mut out = String::new();
    for a in data.iter() {
        for (c, x) in a.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{x:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Bundled instances by name.
///
/// `points14` is a small planar instance with two obvious groups. `us50` is
/// (longitude, latitude) for 50 large US cities; it approximates a
/// reference instance whose exact coordinates are unknown.
pub fn bundled(name: &str) -> Result<DemandSet, DataError> {
    match name {
        "points14" => parse_csv(POINTS14_CSV),
        "us50" => parse_csv(US50_CSV),
        other => Err(DataError::UnknownBundled(other.to_owned())),
    }
}

/// `points_per_ring` points on each circle of `radius` around the given
/// centers, at angles `2 pi j / points_per_ring`, `j = 1..=points_per_ring`.
pub fn gen_rings(
    centers: &[[f64; 2]],
    radius: f64,
    points_per_ring: usize,
) -> Result<DemandSet, DataError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DataError::InvalidParameter(format!(
            "ring radius must be positive, got {radius}"
        )));
    }
    if centers.is_empty() || points_per_ring == 0 {
        return Err(DataError::Empty);
    }
    let half = points_per_ring as f64 / 2.0;
    let mut rows = Vec::with_capacity(centers.len() * points_per_ring);
    for c in centers {
        for j in 1..=points_per_ring {
            let t = j as f64 * PI / half;
            rows.push([c[0] + radius * t.cos(), c[1] + radius * t.sin()]);
        }
    }
    Ok(DemandSet::from_rows(&rows)?)
}

/// The default four-ring instance (40 points).
pub fn default_rings() -> DemandSet {
    gen_rings(
        &DEFAULT_RING_CENTERS,
        DEFAULT_RING_RADIUS,
        DEFAULT_POINTS_PER_RING,
    )
    .expect("valid defaults")
}

/// One generated point per ring, chosen with a ChaCha8 generator seeded by
/// `seed`; rows follow the order of `centers`.
pub fn ring_seed_centers(
    centers: &[[f64; 2]],
    radius: f64,
    points_per_ring: usize,
    seed: u64,
) -> Result<Mat, DataError> {
    let rings = gen_rings(centers, radius, points_per_ring)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<&[f64]> = (0..centers.len())
        .map(|i| rings.point(i * points_per_ring + rng.random_range(0..points_per_ring)))
        .collect();
    Ok(Mat::from_rows(&rows).map_err(MflpError::from)?)
}

/// `n` standard normal points in dimension `d` from a ChaCha8 generator
/// seeded with `seed`.
pub fn gen_gaussian(n: usize, d: usize, seed: u64) -> Result<DemandSet, DataError> {
    if n == 0 || d == 0 {
        return Err(DataError::InvalidParameter(format!(
            "gaussian data needs n, d >= 1 (got n = {n}, d = {d})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    let m = Mat::new(n, d, values).map_err(MflpError::from)?;
    Ok(DemandSet::new(m)?)
}

/// Where a dataset comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    File(PathBuf),
    Bundled(String),
    /// Default ring instance.
    Rings,
    Gaussian { n: usize, d: usize, seed: u64 },
}

impl DatasetSpec {
    /// Parses `bundled:<name>`, `rings`, `gaussian[:n[:d[:seed]]]` or a path.
    pub fn parse(s: &str) -> Result<Self, DataError> {
        if let Some(name) = s.strip_prefix("bundled:") {
            return Ok(Self::Bundled(name.to_owned()));
        }
        if s == "rings" {
            return Ok(Self::Rings);
        }
        if s == "gaussian" || s.starts_with("gaussian:") {
            let parts: Vec<&str> = s.split(':').skip(1).collect();
            let num = |i: usize, default: u64| -> Result<u64, DataError> {
                parts.get(i).map_or(Ok(default), |p| {
                    p.parse()
                        .map_err(|_| DataError::InvalidParameter(format!("bad gaussian spec {s:?}")))
                })
            };
            return Ok(Self::Gaussian {
                n: num(0, 200)? as usize,
                d: num(1, 2)? as usize,
                seed: num(2, 0)?,
            });
        }
        Ok(Self::File(PathBuf::from(s)))
    }

    pub fn load(&self) -> Result<DemandSet, DataError> {
        match self {
            Self::File(p) => load_csv(p),
            Self::Bundled(name) => bundled(name),
            Self::Rings => Ok(default_rings()),
            Self::Gaussian { n, d, seed } => gen_gaussian(*n, *d, *seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist;
    use proptest::prelude::*;

    #[test]
    fn parse_plain_rows() {
        let d = parse_csv("0,3\n2,2\n").unwrap();
        assert_eq!((d.n(), d.d()), (2, 2));
        assert_eq!(d.point(1), &[2.0, 2.0]);
    }

    #[test]
    fn parse_skips_header() {
        let d = parse_csv("x,y\n1,2\n3,4\n").unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.point(0), &[1.0, 2.0]);
    }

    #[test]
    fn parse_errors_carry_location() {
        match parse_csv("1,2\n3,4\n5\n") {
            Err(DataError::Ragged { line: 3, expected: 2, found: 1 }) => {}
            other => panic!("{other:?}"),
        }
        match parse_csv("1,2\n3,abc\n") {
            Err(DataError::NotNumeric { line: 2, column: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_csv(""), Err(DataError::Empty)));
        assert!(matches!(parse_csv("x,y\n"), Err(DataError::Empty)));
        assert!(matches!(load_csv("/nonexistent/file.csv"), Err(DataError::Io { .. })));
    }

    #[test]
    fn bundled_sets() {
        let p = bundled("points14").unwrap();
        assert_eq!((p.n(), p.d()), (14, 2));
        assert_eq!(p.point(0), &[0.0, 3.0]);
        assert_eq!(p.point(13), &[0.0, 1.0]);
        let us = bundled("us50").unwrap();
        assert_eq!((us.n(), us.d()), (50, 2));
        assert!(us.iter().all(|a| a[0] < -60.0 && a[1] > 20.0));
        assert!(matches!(bundled("nope"), Err(DataError::UnknownBundled(_))));
    }

    #[test]
    fn rings_geometry() {
        let d = default_rings();
        assert_eq!(d.n(), 40);
        for (i, c) in DEFAULT_RING_CENTERS.iter().enumerate() {
            for j in 0..10 {
                let r = dist(d.point(10 * i + j), c);
                assert!((r - 0.3).abs() < 1e-12);
            }
        }

        let one = gen_rings(&[[1.5, -2.0]], 0.7, 10).unwrap();
        let mut mean = [0.0; 2];
        for a in one.iter() {
            mean[0] += a[0] / 10.0;
            mean[1] += a[1] / 10.0;
        }
        assert!(dist(&mean, &[1.5, -2.0]) < 1e-12);
        for j in 0..10 {
            for l in j + 1..10 {
                assert!(dist(one.point(j), one.point(l)) > 1e-6);
            }
        }
        assert!(matches!(
            gen_rings(&[[0.0, 0.0]], 0.0, 10),
            Err(DataError::InvalidParameter(_))
        ));
    }

    #[test]
    fn ring_seeds_lie_on_rings() {
        let seeds = ring_seed_centers(&DEFAULT_RING_CENTERS, 0.3, 10, 9).unwrap();
        for (i, c) in DEFAULT_RING_CENTERS.iter().enumerate() {
            assert!((dist(seeds.row(i), c) - 0.3).abs() < 1e-12);
        }
        assert_eq!(seeds, ring_seed_centers(&DEFAULT_RING_CENTERS, 0.3, 10, 9).unwrap());
    }

    #[test]
    fn gaussian_generator() {
        assert_eq!(gen_gaussian(50, 3, 7).unwrap(), gen_gaussian(50, 3, 7).unwrap());
        assert_ne!(gen_gaussian(50, 3, 7).unwrap(), gen_gaussian(50, 3, 8).unwrap());
        assert!(gen_gaussian(0, 2, 1).is_err());
        let big = gen_gaussian(100_000, 2, 1).unwrap();
        for c in 0..2 {
            let mean: f64 = big.iter().map(|a| a[c]).sum::<f64>() / 1e5;
            assert!(mean.abs() < 0.02, "{mean}");
        }
    }

    #[test]
    fn dataset_spec_parsing() {
        assert_eq!(
            DatasetSpec::parse("bundled:us50").unwrap(),
            DatasetSpec::Bundled("us50".into())
        );
        assert_eq!(DatasetSpec::parse("rings").unwrap(), DatasetSpec::Rings);
        assert_eq!(
            DatasetSpec::parse("gaussian:30:3:9").unwrap(),
            DatasetSpec::Gaussian { n: 30, d: 3, seed: 9 }
        );
        assert_eq!(
            DatasetSpec::parse("gaussian").unwrap(),
            DatasetSpec::Gaussian { n: 200, d: 2, seed: 0 }
        );
        assert!(DatasetSpec::parse("gaussian:x").is_err());
        assert_eq!(
            DatasetSpec::parse("pts.csv").unwrap(),
            DatasetSpec::File("pts.csv".into())
        );
        assert_eq!(DatasetSpec::Rings.load().unwrap().n(), 40);
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..20)) {
            let d = DemandSet::from_rows(&rows).unwrap();
            let back = parse_csv(&write_csv(&d)).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
