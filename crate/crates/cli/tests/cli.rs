use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mflp::data::{
    ring_seed_centers, write_csv, DEFAULT_POINTS_PER_RING, DEFAULT_RING_CENTERS, DEFAULT_RING_RADIUS,
};
use mflp::{DemandSet, SolverConfig};
use mflp_cli::record::{RhoEcho, RunRecord};
use tempfile::TempDir;

fn mflp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mflp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn glyphs(svg: &str, class: &str) -> usize {
    svg.matches(&format!("class=\"{class}\"")).count()
}

#[test]
fn solve_points14_with_kmeans_start() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.json");
    let out = mflp(&[
        "solve", "--data", "bundled:points14", "--k", "2", "--init", "kmeans", "--out",
        path_str(&out_path),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("cost 22.1352"), "{}", stdout(&out));

    let rec = RunRecord::load(&out_path).unwrap();
    let s = rec.solve.as_ref().unwrap();
    assert!((s.cost - 22.1352).abs() < 5e-3);
    assert_eq!(s.labels.len(), 14);
    assert_eq!((rec.dataset.n, rec.dataset.d), (14, 2));
    assert!(rec.kmeans.is_none() && rec.wall_time_secs.is_none());
}

#[test]
fn defaults_match_documented_constants() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.json");
    let out = mflp(&["solve", "--data", "bundled:points14", "--k", "2", "--out", path_str(&out_path)]);
    assert_eq!(code(&out), 0);
    let c = RunRecord::load(&out_path).unwrap().config;
    assert_eq!(c.mu0, 0.5);
    assert_eq!(c.beta, 0.85);
    assert_eq!(c.eps, 1e-6);
    assert_eq!(c.mu_final, 1e-6);
    assert_eq!(c.alpha, 30.0);
    assert_eq!(c.rho, RhoEcho::Fixed(30.0));
    assert_eq!(c.inner, SolverConfig::DEFAULT_INNER_ITERS);
    assert_eq!(c.init, "kmeans");
    assert_eq!((c.seed, c.restarts), (0, 1));
}

#[test]
fn result_file_round_trips_bit_exactly() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.json");
    let out = mflp(&["solve", "--data", "gaussian:60:3:5", "--k", "3", "--rho", "auto", "--out", path_str(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let text = fs::read_to_string(&out_path).unwrap();
    let rec = RunRecord::from_json(&text).unwrap();
    assert_eq!(rec.to_json(), text);
    assert_eq!(rec.config.rho, RhoEcho::Auto);

    // the same run through the library gives the same bits
    let data = mflp::data::gen_gaussian(60, 3, 5).unwrap();
    let cfg = SolverConfig::new(3).with_rho(mflp::RhoPolicy::Auto);
    let res = mflp::solve(&data, &cfg).unwrap();
    let s = rec.solve.unwrap();
    assert_eq!(s.cost.to_bits(), res.cost.to_bits());
    let lib_rows = res.centers.matrix().to_rows();
    for (a, b) in s.centers.iter().flatten().zip(lib_rows.iter().flatten()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn identical_flags_give_identical_files() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| {
        let j = dir.path().join(format!("{tag}.json"));
        let s = dir.path().join(format!("{tag}.svg"));
        let out = mflp(&[
            "solve", "--data", "bundled:us50", "--k", "3", "--init", "random", "--seed", "7",
            "--restarts", "4", "--out", path_str(&j), "--svg", path_str(&s),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        (fs::read(j).unwrap(), fs::read(s).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn record_time_is_opt_in() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.json");
    let out = mflp(&[
        "solve", "--data", "bundled:points14", "--k", "2", "--record-time", "--out",
        path_str(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    let t = RunRecord::load(&out_path).unwrap().wall_time_secs.unwrap();
    assert!(t >= 0.0);
}

#[test]
fn rings_from_boundary_seeds() {
    let dir = TempDir::new().unwrap();
    let seeds = ring_seed_centers(&DEFAULT_RING_CENTERS, DEFAULT_RING_RADIUS, DEFAULT_POINTS_PER_RING, 0).unwrap();
    let seeds_path = dir.path().join("seeds.csv");
    fs::write(&seeds_path, write_csv(&DemandSet::new(seeds).unwrap())).unwrap();
    let out_path = dir.path().join("r.json");
    let svg_path = dir.path().join("r.svg");
    let init = format!("file:{}", seeds_path.display());
    let out = mflp(&[
        "solve", "--data", "rings", "--k", "4", "--init", &init, "--out", path_str(&out_path),
        "--svg", path_str(&svg_path),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let centers = RunRecord::load(&out_path).unwrap().solve.unwrap().centers;
    for target in DEFAULT_RING_CENTERS {
        let hit = centers
            .iter()
            .any(|c| (c[0] - target[0]).abs() < 1e-3 && (c[1] - target[1]).abs() < 1e-3);
        assert!(hit, "no center near {target:?}: {centers:?}");
    }
    let svg = fs::read_to_string(svg_path).unwrap();
    assert_eq!((glyphs(&svg, "point"), glyphs(&svg, "center")), (40, 4));
}

#[test]
fn svg_for_points14() {
    let dir = TempDir::new().unwrap();
    let svg_path = dir.path().join("p.svg");
    let out = mflp(&["solve", "--data", "bundled:points14", "--k", "2", "--svg", path_str(&svg_path)]);
    assert_eq!(code(&out), 0);
    let svg = fs::read_to_string(svg_path).unwrap();
    assert_eq!((glyphs(&svg, "point"), glyphs(&svg, "center")), (14, 2));
}

#[test]
fn svg_refuses_non_planar_data() {
    let dir = TempDir::new().unwrap();
    let svg_path = dir.path().join("g.svg");
    let out = mflp(&["solve", "--data", "gaussian:20:3", "--k", "2", "--svg", path_str(&svg_path)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("2-D"), "{}", stderr(&out));
    assert!(!svg_path.exists());
}

#[test]
fn missing_k_prints_usage() {
    let out = mflp(&["solve", "--data", "bundled:points14"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
}

#[test]
fn invalid_flags_exit_2() {
    let cases: &[&[&str]] = &[
        &["solve", "--data", "bundled:points14", "--k", "2", "--rho", "-1"],
        &["solve", "--data", "bundled:points14", "--k", "2", "--rho", "often"],
        &["solve", "--data", "bundled:points14", "--k", "2", "--init", "smart"],
        &["solve", "--data", "bundled:points14", "--k", "2", "--beta", "1.5"],
        &["solve", "--data", "bundled:points14", "--k", "0"],
        &["solve", "--data", "bundled:points14", "--k", "15"],
        &["solve", "--data", "bundled:points14", "--k", "2", "--inner", "0"],
        &["solve", "--data", "bundled:points14", "--k", "2", "--restarts", "0"],
        &["compare", "--data", "bundled:points14", "--k", "2", "--mu0", "0"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = mflp(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn data_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "1,2\n3\n").unwrap();
    let words = dir.path().join("words.csv");
    fs::write(&words, "x,y\n1,2\nthree,4\n").unwrap();
    let seeds = dir.path().join("seeds.csv");
    fs::write(&seeds, "1,2\n").unwrap();
    let init = format!("file:{}", seeds.display());
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", "--data", "bundled:nowhere", "--k", "2"],
        vec!["solve", "--data", path_str(&ragged), "--k", "1"],
        vec!["solve", "--data", path_str(&words), "--k", "1"],
        vec!["solve", "--data", "/nonexistent/points.csv", "--k", "1"],
        // one seed row for two centers
        vec!["solve", "--data", "bundled:points14", "--k", "2", "--init", &init],
    ];
    for args in &cases {
        let out = mflp(args);
        assert_eq!(code(&out), 3, "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).starts_with("error:"));
    }
}

#[test]
fn compare_points14_layout() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("c.json");
    let out = mflp(&["compare", "--data", "bundled:points14", "--k", "2", "--out", path_str(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("22.1637"), "{text}");
    assert!(text.contains("22.1352"), "{text}");
    assert!(text.contains("7.2220") && text.contains("1.1886"), "{text}");

    let rec = RunRecord::load(&out_path).unwrap();
    assert_eq!(rec.command, "compare");
    let km = rec.kmeans.unwrap();
    let s = rec.solve.unwrap();
    assert_eq!(s.initial_centers, km.centers);
    assert!((km.cost - 22.1637).abs() < 5e-4);
    assert!(s.cost < km.cost);
}

#[test]
fn compare_with_one_center_per_point() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("three.csv");
    fs::write(&data, "0,0\n4,1\n-2,5\n").unwrap();
    let out_path = dir.path().join("c.json");
    let out = mflp(&["compare", "--data", path_str(&data), "--k", "3", "--out", path_str(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rec = RunRecord::load(&out_path).unwrap();
    assert!(rec.kmeans.unwrap().cost.abs() < 1e-12);
    assert!(rec.solve.unwrap().cost.abs() < 1e-9);
}

#[test]
fn compare_us50_direction() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("c.json");
    let out = mflp(&["compare", "--data", "bundled:us50", "--k", "3", "--out", path_str(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rec = RunRecord::load(&out_path).unwrap();
    assert!(rec.solve.unwrap().cost <= rec.kmeans.unwrap().cost);
}

#[test]
fn demo_quartic() {
    let out = mflp(&["demo", "dca1-quartic"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let summary = text.lines().last().unwrap();
    let nums: Vec<usize> = summary
        .split(|c: char| !c.is_ascii_digit())
        .filter_map(|t| t.parse().ok())
        .collect();
    // "... 1e-6: DCA <n>, gradient descent (t = 0.01) <m>"
    let (dca, gd) = (nums[nums.len() - 4], nums[nums.len() - 1]);
    assert!(dca < gd, "{summary}");
    assert!(text.contains("-1.1915"));
}

#[test]
fn demo_nonsmooth() {
    let out = mflp(&["demo", "dca2-2d"]);
    assert_eq!(code(&out), 0);
    let last = stdout(&out).lines().last().unwrap().to_string();
    let ok = ["(1.0000, 0.5000)", "(1.0000, -0.5000)", "(-1.0000, 0.5000)", "(-1.0000, -0.5000)"];
    assert!(ok.iter().any(|m| last.ends_with(m)), "{last}");
}

#[test]
fn unknown_demo_exits_2() {
    let out = mflp(&["demo", "dca3-cubic"]);
    assert_eq!(code(&out), 2);
}
