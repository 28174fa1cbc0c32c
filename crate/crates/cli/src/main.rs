//! `acdcopf` — two-stage multi-objective optimal power flow for hybrid
//! AC/DC grids, on the command line.
//!
//! Subcommands: `pf` (base-case coupled power flow), `opt` (stage 1,
//! Pareto search), `decide` (stage 2, clustering + ranking), `pipeline`
//! (both stages under one master seed) and `metrics` (front quality).
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! invalid inputs), 3 numeric failure (a solver did not converge).

mod schema;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use acdcopf_core::coupled::{ControlSetpoints, CoupledSolution};
use acdcopf_core::decision::{decide_seed, select_compromise, ObjectiveKind};
use acdcopf_core::eval::GeneSpace;
use acdcopf_core::metrics::{
    gd, gd_normalized, iterations_to_stabilize, nondominated_subset, normalize_over_union, sp,
    sp_normalized, Aggregate, RunRecord, SpNorm,
};
use acdcopf_core::model::CaseError;
use acdcopf_core::optim::OpfProblem;
use acdcopf_core::seed::{derive, domain};
use acdcopf_core::{
    builtin_case, load_case, mopso_run, nsga2_run, solve_coupled, MopsoParams, NetworkCase,
    Nsga2Params, Parallelism, ParetoSet,
};
use schema::{build_report, write_json, ParetoTable, StatsFile, PARETO_SCHEMA_VERSION, STATS_SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "acdcopf", version, about = "Multi-objective optimal power flow for hybrid AC/DC grids with VSC-HVDC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the coupled AC/DC power flow at the case's base operating point.
    Pf {
        /// Case file path or builtin name (ieee14-2t, ieee14-3t).
        case: String,
    },
    /// Run the multi-objective search and write pareto.csv + stats.json.
    Opt(OptArgs),
    /// Cluster and rank a Pareto front; writes report.json + annotated CSV.
    Decide(DecideArgs),
    /// Stage 1 and stage 2 in one invocation under a single master seed.
    Pipeline(PipelineArgs),
    /// Front quality metrics for a front CSV against a reference CSV.
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Mopso,
    Nsga2,
}

#[derive(Args, Debug)]
struct OptArgs {
    /// Case file path or builtin name.
    case: String,
    #[arg(long, value_enum)]
    algo: Option<Algo>,
    /// Number of independently seeded runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Master seed; run k uses a derived substream.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Swarm/population size.
    #[arg(long)]
    population: Option<usize>,
    /// Iteration (generation) budget.
    #[arg(long)]
    iterations: Option<usize>,
    /// Evaluation thread count (results are identical for any value).
    #[arg(long)]
    threads: Option<usize>,
    /// Stabilization threshold for the convergence statistic.
    #[arg(long)]
    threshold: Option<f64>,
    /// Norm for the spacing metric.
    #[arg(long, value_enum)]
    sp_norm: Option<SpNormArg>,
    /// Stream per-iteration progress records to stderr as JSON lines.
    #[arg(long)]
    progress: bool,
    /// Optional JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecideArgs {
    /// Pareto front CSV (schema v1).
    front: PathBuf,
    /// Objective weights "wO,wE,wV" (normalized to sum 1).
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[command(flatten)]
    opt: OptArgs,
    /// Objective weights "wO,wE,wV" for the decision stage.
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Front CSV to score.
    front: PathBuf,
    /// Reference front CSV.
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long, value_enum)]
    sp_norm: Option<SpNormArg>,
    /// Skip the joint min-max normalization before computing metrics.
    #[arg(long)]
    raw: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpNormArg {
    L2,
    L1,
}

impl From<SpNormArg> for SpNorm {
    fn from(v: SpNormArg) -> SpNorm {
        match v {
            SpNormArg::L2 => SpNorm::L2,
            SpNormArg::L1 => SpNorm::L1,
        }
    }
}

/// Error carrying the process exit code.
enum CliError {
    Usage(String),
    Data(anyhow::Error),
    Numeric(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Data(e) => format!("{e:#}"),
            CliError::Numeric(e) => format!("{e:#}"),
        }
    }
}

fn data<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Data(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are successful exits
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Pf { case } => cmd_pf(&case),
        Command::Opt(args) => cmd_opt(&args).map(|_| ()),
        Command::Decide(args) => cmd_decide(&args),
        Command::Pipeline(args) => cmd_pipeline(&args),
        Command::Metrics(args) => cmd_metrics(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("acdcopf: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn load(case: &str) -> Result<NetworkCase, CliError> {
    match builtin_case(case) {
        Ok(c) => Ok(c),
        Err(CaseError::UnknownBuiltin(_)) => load_case(Path::new(case)).map_err(data),
        Err(e) => Err(data(e)),
    }
}

fn parse_weights(text: Option<&str>) -> Result<Vec<f64>, CliError> {
    let Some(text) = text else {
        return Ok(vec![1.0 / 3.0; 3]);
    };
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("cannot parse weights `{text}`")))?;
    if parts.len() != 3 || parts.iter().any(|w| *w < 0.0) || parts.iter().sum::<f64>() <= 0.0 {
        return Err(CliError::Usage(
            "weights must be three nonnegative numbers with a positive sum".into(),
        ));
    }
    let sum: f64 = parts.iter().sum();
    Ok(parts.iter().map(|w| w / sum).collect())
}

// --- pf ---------------------------------------------------------------

fn cmd_pf(case_name: &str) -> Result<(), CliError> {
    let case = load(case_name)?;
    let setpoints = ControlSetpoints::base_of(&case);
    let sol = solve_coupled(&case, &setpoints).map_err(|e| CliError::Numeric(e.into()))?;
    print_solution(&case, &sol);
    Ok(())
}

fn print_solution(case: &NetworkCase, sol: &CoupledSolution) {
    println!("case: {} (base {} MVA)", case.name, case.base_mva);
    println!("\nAC buses");
    println!("{:>4} {:>6} {:>9} {:>10}", "bus", "kind", "U/pu", "theta/deg");
    for (i, b) in case.ac_buses.iter().enumerate() {
        println!(
            "{:>4} {:>6} {:>9.4} {:>10.4}",
            b.id,
            format!("{:?}", b.kind).to_lowercase(),
            sol.ac.u[i],
            sol.ac.theta[i].to_degrees()
        );
    }
    println!("\ngenerators");
    println!("{:>4} {:>9} {:>9}", "bus", "P/pu", "Q/pu");
    for (g, gen) in case.generators.iter().enumerate() {
        println!("{:>4} {:>9.4} {:>9.4}", gen.bus, sol.gen_p[g], sol.gen_q[g]);
    }
    if !case.converters.is_empty() {
        println!("\nconverters (PCC injections into the AC grid)");
        println!(
            "{:>4} {:>7} {:>9} {:>9} {:>9} {:>9}",
            "ac", "dc", "P/pu", "Q/pu", "Udc/pu", "loss/pu"
        );
        for (k, c) in case.converters.iter().enumerate() {
            let st = &sol.converters[k];
            let (p, q) = st.pcc_injection();
            let d = case.dc_index(c.dc_bus).unwrap();
            println!(
                "{:>4} {:>7} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                c.ac_bus, c.dc_bus, p, q, sol.dc.u[d], st.loss
            );
        }
    }
    let o_mw = sol.total_loss() * case.base_mva;
    let e = acdcopf_core::eval::objective_emissions(&sol.gen_p, case);
    let v = acdcopf_core::eval::objective_vdev(sol, case);
    let rate = 100.0 * o_mw / case.rated_capacity_mw();
    println!("\nobjectives");
    println!("  losses O       : {o_mw:.4} MW (loss rate {rate:.2}% of rated capacity)");
    println!("  emissions E    : {e:.2} lb/h");
    println!("  voltage dev Vde: {v:.6} pu^2");
    println!(
        "  violation      : {:.6}",
        acdcopf_core::eval::constraint_violation(sol, case)
    );
    println!("  outer iterations: {}", sol.outer_iterations);
}

// --- opt ----------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    algo: Option<String>,
    runs: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    population: Option<usize>,
    iterations: Option<usize>,
    threads: Option<usize>,
    threshold: Option<f64>,
    sp_norm: Option<SpNorm>,
    weights: Option<String>,
}

#[derive(Debug, Clone)]
struct RunConfig {
    algo: Algo,
    runs: usize,
    seed: u64,
    out: PathBuf,
    population: usize,
    iterations: usize,
    threads: Option<usize>,
    threshold: f64,
    sp_norm: SpNorm,
    progress: bool,
}

fn resolve_config(args: &OptArgs) -> Result<RunConfig, CliError> {
    resolve_config_full(args).map(|(cfg, _)| cfg)
}

fn resolve_config_full(args: &OptArgs) -> Result<(RunConfig, Option<String>), CliError> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| data(anyhow::anyhow!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| data(anyhow::anyhow!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let algo = match (&args.algo, file.algo.as_deref()) {
        (Some(a), _) => *a,
        (None, Some("mopso")) => Algo::Mopso,
        (None, Some("nsga2")) => Algo::Nsga2,
        (None, Some(other)) => {
            return Err(CliError::Usage(format!("unknown algorithm `{other}` in config")))
        }
        (None, None) => Algo::Mopso,
    };
    let defaults = MopsoParams::default();
    let cfg = RunConfig {
        algo,
        runs: args.runs.or(file.runs).unwrap_or(1),
        seed: args.seed.or(file.seed).unwrap_or(0),
        out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
        population: args.population.or(file.population).unwrap_or(defaults.population),
        iterations: args.iterations.or(file.iterations).unwrap_or(defaults.iterations),
        threads: args.threads.or(file.threads),
        threshold: args.threshold.or(file.threshold).unwrap_or(0.95),
        sp_norm: args.sp_norm.map(SpNorm::from).or(file.sp_norm).unwrap_or_default(),
        progress: args.progress,
    };
    if cfg.runs < 1 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    if !(cfg.threshold > 0.0 && cfg.threshold <= 1.0) {
        return Err(CliError::Usage("--threshold must lie in (0, 1]".into()));
    }
    Ok((cfg, file.weights))
}

fn run_batch(case: &NetworkCase, cfg: &RunConfig) -> Vec<ParetoSet> {
    let problem = OpfProblem::new(case);
    let parallelism = cfg
        .threads
        .map(Parallelism::Threads)
        .unwrap_or(Parallelism::Default);
    let mut sets = Vec::with_capacity(cfg.runs);
    for k in 0..cfg.runs {
        let run_seed = derive(cfg.seed, &[domain::RUN, k as u64]);
        let set = match cfg.algo {
            Algo::Mopso => {
                let params = MopsoParams {
                    population: cfg.population,
                    repository: cfg.population,
                    iterations: cfg.iterations,
                    seed: run_seed,
                    ..MopsoParams::default()
                };
                mopso_run(&problem, &params, parallelism)
            }
            Algo::Nsga2 => {
                let params = Nsga2Params {
                    population: cfg.population,
                    iterations: cfg.iterations,
                    seed: run_seed,
                    ..Nsga2Params::default()
                };
                nsga2_run(&problem, &params, parallelism)
            }
        };
        if cfg.progress {
            for (i, f) in set.history.iter().enumerate() {
                eprintln!(
                    "{{\"run\":{k},\"iteration\":{i},\"archive_size\":{},\"nondominated_fraction\":{f}}}",
                    (f * cfg.population as f64).round() as usize
                );
            }
        }
        sets.push(set);
    }
    sets
}

fn cmd_opt(args: &OptArgs) -> Result<(ParetoTable, RunConfig), CliError> {
    let cfg = resolve_config(args)?;
    let case = load(&args.case)?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| data(anyhow::anyhow!("cannot create {}: {e}", cfg.out.display())))?;

    let sets = run_batch(&case, &cfg);

    // batch reference front: the non-dominated union over all runs
    let pool: Vec<Vec<f64>> = sets
        .iter()
        .flat_map(|s| s.members.iter().map(|m| m.objectives.clone()))
        .collect();
    let reference = nondominated_subset(&pool);

    let runs: Vec<RunRecord> = sets
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let front: Vec<Vec<f64>> = s.members.iter().map(|m| m.objectives.clone()).collect();
            let (gd_v, sp_v) = if front.is_empty() || reference.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (
                    gd_normalized(&front, &reference),
                    if front.len() >= 2 {
                        sp_normalized(&front, &reference, cfg.sp_norm)
                    } else {
                        0.0
                    },
                )
            };
            RunRecord {
                run: k,
                seed: derive(cfg.seed, &[domain::RUN, k as u64]),
                stabilize_iteration: iterations_to_stabilize(&s.history, cfg.threshold),
                gd: gd_v,
                sp: sp_v,
                elapsed_seconds: s.elapsed_seconds,
                front_size: s.members.len(),
            }
        })
        .collect();

    let stats = StatsFile {
        schema_version: STATS_SCHEMA_VERSION,
        case: case.name.clone(),
        algorithm: match cfg.algo {
            Algo::Mopso => "mopso".into(),
            Algo::Nsga2 => "nsga2".into(),
        },
        population: cfg.population,
        iterations: cfg.iterations,
        master_seed: cfg.seed,
        stabilization_threshold: cfg.threshold,
        sp_norm: cfg.sp_norm,
        reference_front_size: reference.len(),
        iterations_to_stabilize: Aggregate::over(
            runs.iter()
                .map(|r| r.stabilize_iteration.map(|v| v as f64).unwrap_or(cfg.iterations as f64)),
        ),
        gd: Aggregate::over(runs.iter().map(|r| r.gd).filter(|v| v.is_finite())),
        sp: Aggregate::over(runs.iter().map(|r| r.sp).filter(|v| v.is_finite())),
        elapsed_seconds: Aggregate::over(runs.iter().map(|r| r.elapsed_seconds)),
        runs,
    };
    write_json(&cfg.out.join("stats.json"), &stats).map_err(data)?;

    let space = GeneSpace::for_case(&case);
    let gene_names: Vec<String> = space.specs().iter().map(|s| s.name.clone()).collect();
    let table = ParetoTable::from_members(gene_names, sets[0].members.clone());
    table.write(&cfg.out.join("pareto.csv")).map_err(data)?;

    println!(
        "wrote {} ({} rows, schema v{PARETO_SCHEMA_VERSION}) and {}",
        cfg.out.join("pareto.csv").display(),
        table.rows.len(),
        cfg.out.join("stats.json").display()
    );
    Ok((table, cfg))
}

// --- decide -------------------------------------------------------------

fn decide_table(
    table: &ParetoTable,
    weights: &[f64],
    master_seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let feasible: Vec<usize> = (0..table.rows.len())
        .filter(|&i| table.rows[i].feasible)
        .collect();
    if feasible.len() < 3 {
        return Err(data(anyhow::anyhow!(
            "decision stage needs at least 3 feasible front rows (got {})",
            feasible.len()
        )));
    }
    let front: Vec<_> = feasible.iter().map(|&i| table.rows[i].clone()).collect();
    let mut report = select_compromise(&front, weights, decide_seed(master_seed))
        .map_err(|e| data(anyhow::anyhow!("decision stage failed: {e}")))?;
    // map indices back to the original row ids
    for cluster in &mut report.clusters {
        cluster.compromise = feasible[cluster.compromise];
        for idx in &mut cluster.member_indices {
            *idx = feasible[*idx];
        }
    }

    std::fs::create_dir_all(out)
        .map_err(|e| data(anyhow::anyhow!("cannot create {}: {e}", out.display())))?;
    let decision = build_report(table, &report);
    write_json(&out.join("report.json"), &decision).map_err(data)?;

    let mut clusters: Vec<Option<ObjectiveKind>> = vec![None; table.rows.len()];
    for c in &report.clusters {
        for &i in &c.member_indices {
            clusters[i] = Some(c.objective);
        }
    }
    table
        .write_annotated(&out.join("pareto_annotated.csv"), &clusters)
        .map_err(data)?;

    println!("compromise solutions (weights {:?})", decision.weights);
    for c in &decision.clusters {
        println!(
            "  prefer {:>3}: id {:>3}  O = {:.4} MW  E = {:.2} lb/h  Vde = {:.6} pu^2  d = {:.4}",
            c.objective,
            c.compromise.id,
            c.compromise.o_mw,
            c.compromise.e_lbh,
            c.compromise.vde_pu2,
            c.compromise.priority
        );
    }
    println!(
        "wrote {} and {}",
        out.join("report.json").display(),
        out.join("pareto_annotated.csv").display()
    );
    Ok(())
}

fn cmd_decide(args: &DecideArgs) -> Result<(), CliError> {
    let table = ParetoTable::read(&args.front).map_err(data)?;
    let weights = parse_weights(args.weights.as_deref())?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    decide_table(&table, &weights, args.seed.unwrap_or(0), &out)
}

// --- pipeline -----------------------------------------------------------

fn cmd_pipeline(args: &PipelineArgs) -> Result<(), CliError> {
    let (_, config_weights) = resolve_config_full(&args.opt)?;
    let weights = parse_weights(args.weights.as_deref().or(config_weights.as_deref()))?;
    let (table, cfg) = cmd_opt(&args.opt)?;
    decide_table(&table, &weights, cfg.seed, &cfg.out)
}

// --- metrics ------------------------------------------------------------

fn cmd_metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let front = ParetoTable::read(&args.front).map_err(data)?;
    let reference = ParetoTable::read(&args.reference).map_err(data)?;
    let f: Vec<Vec<f64>> = front.rows.iter().map(|r| r.objectives.clone()).collect();
    let r: Vec<Vec<f64>> = reference.rows.iter().map(|r| r.objectives.clone()).collect();
    if f.is_empty() || r.is_empty() {
        return Err(data(anyhow::anyhow!("metric inputs must be non-empty")));
    }
    if f[0].len() != r[0].len() {
        return Err(data(anyhow::anyhow!("front and reference dimensionality differ")));
    }
    let norm = args.sp_norm.map(SpNorm::from).unwrap_or_default();
    let (gd_v, sp_v) = if args.raw {
        (gd(&f, &r), if f.len() >= 2 { sp(&f, norm) } else { 0.0 })
    } else {
        let scaled = normalize_over_union(&[&f, &r]);
        (
            gd(&scaled[0], &scaled[1]),
            if f.len() >= 2 { sp(&scaled[0], norm) } else { 0.0 },
        )
    };
    println!("gd {gd_v}");
    println!("sp {sp_v}");
    Ok(())
}
