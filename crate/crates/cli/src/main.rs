use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zk_virial::config::{parse_p_list, OutputFormat, RunConfig};
use zk_virial::ground_state::TESTED_P_MIN;
use zk_virial::operators::benchmark;
use zk_virial::{
    build_operators, oracle_sweep, pokhozhaev_report, report, solve_ground_state, sweep_pipelines, Error,
    OracleEntry, Result, SweepEntry,
};

const EXIT_VERIFICATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "zk-virial", version, about = "Spectral verification of the 2D gZK virial operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the ground state and write its profile.
    SolveQ(Common),
    /// Compare U against its closed-form images.
    Benchmark(Common),
    /// Run the three checks for each p and write per-p artifacts.
    Verify(Common),
    /// Run the three checks for each p and write the summary table only.
    Sweep(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Single nonlinearity power.
    #[arg(long)]
    p: Option<f64>,
    /// Comma-separated list of powers.
    #[arg(long = "p-list", conflicts_with = "p")]
    p_list: Option<String>,
    /// Fixed outer radius (disables automatic extension).
    #[arg(long = "r-max")]
    r_max: Option<f64>,
    #[arg(long = "ode-step")]
    ode_step: Option<f64>,
    /// Number of grid points on [0, r_max]; must be odd.
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json or text.
    #[arg(long)]
    format: Option<String>,
    /// Also run the dense eigenvalue cross-check.
    #[arg(long)]
    oracle: bool,
    /// shooting or newton.
    #[arg(long)]
    backend: Option<String>,
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn resolve(&self, default_p: Option<f64>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(p) = default_p {
            cfg.p_values = vec![p];
        }
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_file_contents(&text)?;
        }
        if let Some(p) = self.p {
            cfg.p_values = vec![p];
        }
        if let Some(list) = &self.p_list {
            cfg.p_values = parse_p_list(list)?;
        }
        if self.r_max.is_some() {
            cfg.r_max = self.r_max;
        }
        if let Some(s) = self.ode_step {
            cfg.ode_step = s;
        }
        if let Some(n) = self.grid_n {
            cfg.grid_n = n;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(f) = &self.format {
            cfg.output_format = f.parse()?;
        }
        if let Some(b) = &self.backend {
            cfg.backend = b.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        }
        cfg.oracle_enabled |= self.oracle;
        if cfg.p_values.is_empty() {
            return Err(Error::Config("no p values given".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn p_tag(p: f64) -> String {
    format!("{p:.2}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn warn_untested(cfg: &RunConfig) {
    for &p in &cfg.p_values {
        if p < TESTED_P_MIN {
            eprintln!("warning: p = {p} is in the untested regime (p < {TESTED_P_MIN})");
        }
    }
}

fn solve_q(cfg: &RunConfig) -> Result<u8> {
    let echo = cfg.echo();
    let solve = cfg.solve_config();
    let mut summaries = Vec::new();
    for &p in &cfg.p_values {
        let gs = solve_ground_state(p, &solve)?;
        write_file(&cfg.output_dir, &format!("profile_p{}.csv", p_tag(p)), &report::profile_csv(&gs, &echo))?;
        let meta = gs.meta();
        summaries.push((gs.amplitude(), meta.r_max, meta.untested_regime, pokhozhaev_report(&gs)));
    }
    match cfg.output_format {
        OutputFormat::Text => {
            for (amp, r_max, untested, id) in &summaries {
                print!("{}", report::identity_text(id));
                println!("  Q(0)                     = {}", report::sig12(*amp));
                println!("  r_max                    = {}", report::sig12(*r_max));
                if *untested {
                    println!("  warning: untested regime (p < {TESTED_P_MIN})");
                }
            }
        }
        OutputFormat::Csv => {
            println!("p,amplitude,r_max,mass,grad_norm_sq,lp_norm,lambda_pair,untested_regime");
            for (amp, r_max, untested, id) in &summaries {
                println!(
                    "{},{},{},{},{},{},{},{untested}",
                    id.p,
                    report::sig12(*amp),
                    report::sig12(*r_max),
                    report::sig12(id.mass),
                    report::sig12(id.grad_norm_sq),
                    report::sig12(id.lp_norm),
                    report::sig12(id.lambda_pair)
                );
            }
        }
        OutputFormat::Json => {
            let rows: Vec<_> = summaries
                .iter()
                .map(|(amp, r_max, untested, id)| {
                    serde_json::json!({
                        "amplitude": amp,
                        "r_max": r_max,
                        "untested_regime": untested,
                        "identities": id,
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows)?);
        }
    }
    Ok(0)
}

fn run_benchmark(cfg: &RunConfig) -> Result<u8> {
    let solve = cfg.solve_config();
    let floor = cfg.tolerance("benchmark_floor");
    let mut code = 0;
    for &p in &cfg.p_values {
        let gs = solve_ground_state(p, &solve)?;
        let ops = build_operators(&gs)?;
        let bm = benchmark(&gs, &ops)?;
        for (name, body) in report::benchmark_csvs(&bm, &cfg.echo())? {
            write_file(&cfg.output_dir, &format!("benchmark_p{}_{name}.csv", p_tag(p)), &body)?;
        }
        match cfg.output_format {
            OutputFormat::Json => println!(
                "{}",
                serde_json::json!({
                    "p": p,
                    "direct_h1": bm.deviations.direct_h1,
                    "direct_h2": bm.deviations.direct_h2,
                    "inverse_h1": bm.deviations.inverse_h1,
                    "inverse_h2": bm.deviations.inverse_h2,
                    "kernel_residual": bm.deviations.kernel_residual,
                })
            ),
            _ => print!("{}", report::benchmark_text(p, &bm)),
        }
        if bm.deviations.max() > floor {
            eprintln!("benchmark deviation {:.3e} exceeds {floor:e} at p = {p}", bm.deviations.max());
            code = EXIT_VERIFICATION;
        }
    }
    Ok(code)
}

fn render(cfg: &RunConfig, entries: &[SweepEntry], oracle: Option<&[OracleEntry]>) -> Result<String> {
    let echo = cfg.echo();
    Ok(match cfg.output_format {
        OutputFormat::Csv => report::sweep_csv(entries, &echo),
        OutputFormat::Json => report::sweep_json(entries, oracle, &echo)?,
        OutputFormat::Text => report::sweep_text(entries, oracle),
    })
}

fn outcome_code(entries: &[SweepEntry], oracle: Option<&[OracleEntry]>) -> u8 {
    let mut code = 0;
    for e in entries {
        match &e.outcome {
            Ok(r) if r.verdict => {}
            Ok(_) => code = code.max(EXIT_VERIFICATION),
            Err(err) if matches!(err.root(), Error::IndeterminateSign(_)) => code = code.max(EXIT_VERIFICATION),
            Err(err) if err.is_config() => code = code.max(EXIT_CONFIG),
            Err(_) => code = code.max(EXIT_SOLVER),
        }
    }
    if let Some(list) = oracle {
        for (e, o) in entries.iter().zip(list) {
            let agrees = match (&e.outcome, &o.outcome) {
                (Ok(r), Ok(or)) => or.agrees_with(r),
                (Err(_), _) => true,
                (Ok(_), Err(_)) => false,
            };
            if !agrees {
                code = code.max(EXIT_VERIFICATION);
            }
        }
    }
    code
}

fn run_sweep(cfg: &RunConfig, artifacts: bool) -> Result<u8> {
    let vcfg = cfg.verify_config();
    let pipelines = sweep_pipelines(&cfg.p_values, &vcfg);
    let oracle = cfg
        .oracle_enabled
        .then(|| oracle_sweep(&pipelines, &cfg.oracle_config()));
    if artifacts {
        for entry in &pipelines {
            if let Ok(pipe) = &entry.outcome {
                if let Some(body) = report::fstar_csv(&pipe.report, pipe.ops.kern.f(), &cfg.echo())? {
                    write_file(&cfg.output_dir, &format!("fstar_p{}.csv", p_tag(entry.p)), &body)?;
                }
            }
        }
    }
    let entries: Vec<SweepEntry> = pipelines.into_iter().map(|e| e.into_sweep_entry()).collect();
    for e in &entries {
        if let Err(err) = &e.outcome {
            eprintln!("p = {}: {err}", e.p);
        }
    }
    let text = render(cfg, &entries, oracle.as_deref())?;
    let ext = cfg.output_format.extension();
    write_file(&cfg.output_dir, &format!("sweep.{ext}"), &text)?;
    if let (Some(list), OutputFormat::Csv) = (&oracle, cfg.output_format) {
        write_file(&cfg.output_dir, "oracle.csv", &report::oracle_csv(&entries, list, &cfg.echo()))?;
    }
    print!("{text}");
    Ok(outcome_code(&entries, oracle.as_deref()))
}

fn run(cli: Cli) -> Result<u8> {
    let (common, default_p) = match &cli.command {
        Command::SolveQ(c) | Command::Benchmark(c) => (c, Some(3.0)),
        Command::Verify(c) | Command::Sweep(c) => (c, None),
    };
    let cfg = common.resolve(default_p)?;
    warn_untested(&cfg);
    match cli.command {
        Command::SolveQ(_) => solve_q(&cfg),
        Command::Benchmark(_) => run_benchmark(&cfg),
        Command::Verify(_) => run_sweep(&cfg, true),
        Command::Sweep(_) => run_sweep(&cfg, false),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_config() { EXIT_CONFIG } else { EXIT_SOLVER })
        }
    }
}
