use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mflp::baselines::{kmeans, KMeansInit};
use mflp::data::load_csv;
use mflp::dca::examples::{
    first_stationary_index, nonsmooth_2d, nonsmooth_2d_problem, quartic, quartic_derivative,
    quartic_gradient_descent, quartic_problem,
};
use mflp::dca::{dca1_run, dca2_run};
use mflp::{solve_multistart, DatasetSpec, DemandSet, Init, Mat, MflpError, RhoPolicy, SolverConfig};
use mflp_cli::record::{ConfigEcho, DatasetFingerprint, KMeansRecord, RunRecord, SolveRecord, SCHEMA_VERSION};
use mflp_cli::svg;

const KMEANS_MAX_ITERS: usize = 300;
const DEMO_MAX_ITERS: usize = 200;
const GD_MAX_ITERS: usize = 100_000;
const GD_STEP: f64 = 0.01;
const STATIONARY_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "mflp", version, about = "Continuous multifacility location solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the smoothed DC solver.
    Solve(SolveArgs),
    /// Run k-means, then the DC solver started from the k-means centers.
    Compare(CompareArgs),
    /// Run one of the worked DC examples and print its iterates.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    Dca1Quartic,
    Dca2_2d,
}

#[derive(Args)]
struct SolverArgs {
    /// path.csv, bundled:<name>, rings or gaussian[:n[:d[:seed]]]
    #[arg(long)]
    data: String,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_MU0)]
    mu0: f64,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_MU_FINAL)]
    mu_final: f64,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_ALPHA)]
    alpha: f64,
    /// A positive number or `auto`.
    #[arg(long, default_value = "30", value_parser = parse_rho)]
    rho: RhoPolicy,
    /// DC steps per smoothing level.
    #[arg(long, default_value_t = SolverConfig::DEFAULT_INNER_ITERS)]
    inner: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result document (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scatter plot of the final clustering (2-D data only).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Add the wall time to the result document.
    #[arg(long)]
    record_time: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: SolverArgs,
    /// kmeans, random or file:<centers.csv>
    #[arg(long, default_value = "kmeans", value_parser = parse_init)]
    init: InitFlag,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: SolverArgs,
}

#[derive(Clone, Debug)]
enum InitFlag {
    KMeans,
    Random,
    File(PathBuf),
}

impl InitFlag {
    fn echo(&self) -> String {
        match self {
            InitFlag::KMeans => "kmeans".into(),
            InitFlag::Random => "random".into(),
            InitFlag::File(p) => format!("file:{}", p.display()),
        }
    }
}

fn parse_rho(s: &str) -> Result<RhoPolicy, String> {
    if s == "auto" {
        return Ok(RhoPolicy::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(RhoPolicy::Fixed(v)),
        _ => Err(format!("expected a positive number or `auto`, got {s:?}")),
    }
}

fn parse_init(s: &str) -> Result<InitFlag, String> {
    match s {
        "kmeans" => Ok(InitFlag::KMeans),
        "random" => Ok(InitFlag::Random),
        _ => match s.strip_prefix("file:") {
            Some(p) if !p.is_empty() => Ok(InitFlag::File(PathBuf::from(p))),
            _ => Err(format!("expected kmeans, random or file:<path>, got {s:?}")),
        },
    }
}

/// A failure with its exit code: 2 bad flags, 3 data, 4 solver.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn flags(message: impl ToString) -> Self {
        Self { code: 2, message: message.to_string() }
    }

    fn data(message: impl ToString) -> Self {
        Self { code: 3, message: message.to_string() }
    }

    fn solver(e: MflpError) -> Self {
        match e {
            MflpError::InvalidConfig(_) | MflpError::InvalidK { .. } => Self::flags(e),
            e => Self { code: 4, message: e.to_string() },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Demo { name } => cmd_demo(name),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn solver_config(args: &SolverArgs, init: Init) -> Result<SolverConfig, Failure> {
    let cfg = SolverConfig {
        k: args.k,
        mu0: args.mu0,
        beta: args.beta,
        eps: args.eps,
        mu_final: args.mu_final,
        alpha: args.alpha,
        rho: args.rho,
        inner_iters: args.inner,
        init,
        seed: args.seed,
    };
    cfg.validate().map_err(Failure::solver)?;
    Ok(cfg)
}

fn load_data(args: &SolverArgs) -> Result<DemandSet, Failure> {
    let spec = DatasetSpec::parse(&args.data).map_err(Failure::data)?;
    let data = spec.load().map_err(Failure::data)?;
    if args.k > data.n() {
        return Err(Failure::flags(MflpError::InvalidK { k: args.k, n: data.n() }));
    }
    if args.svg.is_some() && data.d() != 2 {
        return Err(Failure::flags(svg::SvgError::NotPlanar(data.d())));
    }
    Ok(data)
}

fn print_centers(label: &str, centers: &Mat, cost: f64) {
    for (i, row) in centers.row_iter().enumerate() {
        let coords: Vec<String> = row.iter().map(|x| format!("{x:>10.4}")).collect();
        let head = if i == 0 { label } else { "" };
        let tail = if i == 0 { format!("{cost:>12.4}") } else { String::new() };
        println!("{head:<10}{}{tail}", coords.join(""));
    }
}

fn finish(
    args: &SolverArgs,
    data: &DemandSet,
    record: RunRecord,
    centers: &Mat,
    labels: &[usize],
) -> Result<(), Failure> {
    if let Some(path) = &args.out {
        record
            .save(path)
            .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &args.svg {
        let text = svg::render(data, labels, centers).map_err(Failure::flags)?;
        std::fs::write(path, text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let common = &args.common;
    if args.restarts == 0 {
        return Err(Failure::flags("--restarts must be at least 1"));
    }
    let data = load_data(common)?;
    let init = match &args.init {
        InitFlag::KMeans => Init::KMeans,
        InitFlag::Random => Init::RandomRows,
        InitFlag::File(p) => {
            let v = load_csv(p).map_err(Failure::data)?;
            if (v.n(), v.d()) != (common.k, data.d()) {
                return Err(Failure::data(format!(
                    "{}: expected {} centers in {} dimensions, found {}x{}",
                    p.display(),
                    common.k,
                    data.d(),
                    v.n(),
                    v.d()
                )));
            }
            Init::Explicit(v.points().clone())
        }
    };
    let cfg = solver_config(common, init)?;
    let res = solve_multistart(&data, &cfg, args.restarts).map_err(Failure::solver)?;

    println!("cost {:.4}", res.cost);
    print_centers("centers", res.centers.matrix(), res.cost);
    if !res.empty_clusters.is_empty() {
        eprintln!("warning: empty clusters {:?}", res.empty_clusters);
    }

    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        command: "solve".into(),
        config: ConfigEcho::new(&common.data, &args.init.echo(), &cfg, args.restarts),
        dataset: DatasetFingerprint::of(&data),
        kmeans: None,
        solve: Some(SolveRecord::from(&res)),
        wall_time_secs: common.record_time.then(|| started.elapsed().as_secs_f64()),
    };
    finish(common, &data, record, res.centers.matrix(), &res.labels)
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let common = &args.common;
    let data = load_data(common)?;
    // validate the shared flags before spending time on k-means
    solver_config(common, Init::KMeans)?;
    let km = kmeans(&data, common.k, KMeansInit::Seed(common.seed), KMEANS_MAX_ITERS)
        .map_err(Failure::solver)?;
    let cfg = solver_config(common, Init::Explicit(km.centers.clone()))?;
    let res = mflp::solve(&data, &cfg).map_err(Failure::solver)?;

    println!("{:<10}{:>20}{:>12}", "method", "centers", "cost");
    print_centers("k-means", &km.centers, km.cost);
    println!();
    print_centers("DCA", res.centers.matrix(), res.cost);

    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        command: "compare".into(),
        config: ConfigEcho::new(&common.data, "kmeans", &cfg, 1),
        dataset: DatasetFingerprint::of(&data),
        kmeans: Some(KMeansRecord::from(&km)),
        solve: Some(SolveRecord::from(&res)),
        wall_time_secs: common.record_time.then(|| started.elapsed().as_secs_f64()),
    };
    finish(common, &data, record, res.centers.matrix(), &res.labels)
}

fn cmd_demo(name: DemoName) -> Result<(), Failure> {
    match name {
        DemoName::Dca1Quartic => {
            let p = quartic_problem();
            let (_, trace) = dca1_run(&p, &[0.0], DEMO_MAX_ITERS, 0.0)
                .map_err(|e| Failure { code: 4, message: e.to_string() })?;
            println!("{:>4}{:>12}{:>12}{:>12}", "l", "x", "f(x)", "f'(x)");
            for (l, s) in trace.steps.iter().enumerate() {
                let x = s.iterate[0];
                println!("{l:>4}{x:>12.4}{:>12.4}{:>12.4}", quartic(x), quartic_derivative(x));
            }
            let (_, gd) = quartic_gradient_descent(0.0, GD_STEP, GD_MAX_ITERS, 0.0)
                .map_err(|e| Failure { code: 4, message: e.to_string() })?;
            let show = |i: Option<usize>| i.map_or("not reached".to_string(), |i| i.to_string());
            println!(
                "iterations to |f'| < 1e-6: DCA {}, gradient descent (t = {GD_STEP}) {}",
                show(first_stationary_index(&trace, STATIONARY_TOL)),
                show(first_stationary_index(&gd, STATIONARY_TOL))
            );
        }
        DemoName::Dca2_2d => {
            let p = nonsmooth_2d_problem();
            let (x, trace) = dca2_run(&p, &[-2.0, 2.0], DEMO_MAX_ITERS, 1e-12)
                .map_err(|e| Failure { code: 4, message: e.to_string() })?;
            println!("{:>4}{:>12}{:>12}{:>12}", "l", "x1", "x2", "f(x)");
            for (l, s) in trace.steps.iter().enumerate() {
                let x = &s.iterate;
                println!("{l:>4}{:>12.4}{:>12.4}{:>12.4}", x[0], x[1], nonsmooth_2d(x));
            }
            println!("final ({:.4}, {:.4})", x[0], x[1]);
        }
    }
    Ok(())
}
