use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minesweep_bench::pipeline::{save_models, train_classifiers, train_qnets, write_alpha_table, TrainPlan};
use minesweep_bench::{aggregate, run_bench, write_report, write_summary, BenchSpec, GroupBy};
use minesweep_core::neural::{save_alpha, save_model};
use minesweep_core::policies::{VersionId, ALPHA_FILE};
use minesweep_core::training::{alpha_sweep, fit_alpha};
use minesweep_service::{serve, ServiceConfig};

#[derive(Parser)]
#[command(name = "minesweep", version, about = "Minesweeper solver suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seeded benchmark sweeps.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Train the learned versions.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Sweep the score blend weight and fit its linear model.
    #[command(subcommand)]
    Alpha(AlphaCommand),
    /// Run the HTTP hint service.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run a sweep and write the CSV.
    Run(RunArgs),
    /// Beginner board (9x9, 10 mines) across every benchmarked version.
    Table4(Table4Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum Grouping {
    Version,
    Size,
    Mines,
}

impl From<Grouping> for GroupBy {
    fn from(g: Grouping) -> Self {
        match g {
            Grouping::Version => GroupBy::Version,
            Grouping::Size => GroupBy::Size,
            Grouping::Mines => GroupBy::MinePercent,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Spec file (key = value lines).
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// beginner or paper53.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated versions, e.g. 3.0,4.0,6.5.
    #[arg(long, value_delimiter = ',')]
    versions: Vec<VersionId>,
    #[arg(long)]
    games: Option<usize>,
    /// Per-game timeout in milliseconds.
    #[arg(long)]
    timeout: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write zero timing columns (byte-stable output).
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Directory with trained models for the learned versions.
    #[arg(long)]
    models: Option<PathBuf>,
    /// Also write a grouped summary CSV.
    #[arg(long, requires = "group_by")]
    summary: Option<PathBuf>,
    #[arg(long, value_enum)]
    group_by: Option<Grouping>,
}

#[derive(Args)]
struct Table4Args {
    #[arg(long, default_value_t = 1000)]
    games: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum TrainCommand {
    /// Train every learned version into a model directory.
    All {
        #[arg(long)]
        out: PathBuf,
    },
    /// v5.0 by one pass over v4.0 self-play, then v5.5 by iterative episodes.
    Classifier(TrainArgs),
    /// α fit, v6.5 by one pass over returns, then v6.0 by iterative episodes.
    Qnet(TrainArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Iterative episodes; 0 writes the single-pass model to --out.
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    /// Where the final model goes.
    #[arg(long)]
    out: PathBuf,
    /// Also keep the single-pass model.
    #[arg(long)]
    single_pass_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AlphaCommand {
    Sweep {
        /// Table destination (CSV).
        #[arg(long)]
        out: PathBuf,
        /// 31 α values and 100 games per configuration instead of the
        /// quick desk grid.
        #[arg(long)]
        full: bool,
        /// Also save the fitted model.
        #[arg(long)]
        fit_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, default_value = "6.5")]
    default_version: VersionId,
    #[arg(long)]
    models: Option<PathBuf>,
}

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(BenchCommand::Run(a)) => bench_run(a),
        Command::Bench(BenchCommand::Table4(a)) => table4(a),
        Command::Train(t) => train(t),
        Command::Alpha(AlphaCommand::Sweep { out, full, fit_out }) => sweep(&out, full, fit_out.as_deref()),
        Command::Serve(a) => {
            let config = ServiceConfig { default_version: a.default_version, model_dir: a.models, ..Default::default() };
            let addr = SocketAddr::new(a.host, a.port);
            eprintln!("listening on http://{addr}");
            tokio::runtime::Runtime::new()?.block_on(serve(addr, config))?;
            Ok(())
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn bench_run(a: RunArgs) -> Result<()> {
    let mut spec = match (&a.spec, &a.preset) {
        (Some(path), _) => BenchSpec::parse(&std::fs::read_to_string(path)?)?,
        (None, Some(name)) => BenchSpec::preset(name)?,
        (None, None) => BenchSpec::default(),
    };
    if !a.versions.is_empty() {
        spec.versions = a.versions;
    }
    if let Some(g) = a.games {
        spec.games_per_cell = g;
    }
    if let Some(ms) = a.timeout {
        spec.timeout = Duration::from_millis(ms);
    }
    if let Some(s) = a.seed {
        spec.seed_base = s;
    }
    if let Some(w) = a.workers {
        spec.workers = w;
    }
    if a.no_timing {
        spec.timing = false;
    }
    if a.out.is_some() {
        spec.output = a.out;
    }
    spec.validate()?;
    let report = run_bench(&spec, a.models.as_deref());
    for (v, why) in &report.skipped {
        eprintln!("skipped {v}: {why}");
    }
    write_report(output(spec.output.as_deref())?, &report, &spec.cells(), spec.timing)?;
    if let (Some(path), Some(by)) = (a.summary, a.group_by) {
        let by = GroupBy::from(by);
        write_summary(File::create(path)?, &aggregate(&report.rows(), by), by)?;
    }
    Ok(())
}

fn table4(a: Table4Args) -> Result<()> {
    let spec = BenchSpec {
        games_per_cell: a.games,
        seed_base: a.seed,
        workers: a.workers.unwrap_or(0),
        ..BenchSpec::beginner()
    };
    spec.validate()?;
    let report = run_bench(&spec, a.models.as_deref());
    let mut out = io::stdout().lock();
    writeln!(out, "{:<8} {:>6} {:>6} {:>8} {:>12}", "version", "games", "wins", "win %", "median move")?;
    for c in &report.cells {
        writeln!(
            out,
            "{:<8} {:>6} {:>6} {:>8.2} {:>10.1}µs",
            c.version.as_str(),
            c.games.len(),
            c.wins(),
            100.0 * c.win_ratio(),
            c.median_move_time().as_secs_f64() * 1e6
        )?;
    }
    for (v, why) in &report.skipped {
        writeln!(out, "{:<8} skipped: {why}", v.as_str())?;
    }
    Ok(())
}

fn train(t: TrainCommand) -> Result<()> {
    let plan = TrainPlan::desk();
    match t {
        TrainCommand::All { out } => {
            let c = train_classifiers(&plan)?;
            report_classifier(&c);
            let q = train_qnets(&plan)?;
            report_qnet(&q);
            save_models(&out, &c, &q)?;
            eprintln!("models written to {}", out.display());
        }
        TrainCommand::Classifier(a) => {
            let c = train_classifiers(&TrainPlan { classify_episodes: a.episodes, ..plan })?;
            report_classifier(&c);
            save_model(&c.iterative_model, &a.out)?;
            if let Some(p) = a.single_pass_out {
                save_model(&c.single_pass_model, p)?;
            }
        }
        TrainCommand::Qnet(a) => {
            let q = train_qnets(&TrainPlan { q_episodes: a.episodes, ..plan })?;
            report_qnet(&q);
            save_model(&q.iterative_model, &a.out)?;
            if let Some(p) = a.single_pass_out {
                save_model(&q.single_pass_model, p)?;
            }
            let alpha = a.out.parent().unwrap_or(Path::new(".")).join(ALPHA_FILE);
            save_alpha(&q.alpha.model, &alpha)?;
            eprintln!("alpha model written to {}", alpha.display());
        }
    }
    Ok(())
}

fn report_classifier(c: &minesweep_bench::pipeline::ClassifierRun) {
    let r = &c.single_pass;
    eprintln!(
        "classifier: {} samples, held-out accuracy {:.4} (majority {:.4}), {} iterative episodes",
        c.samples,
        r.heldout_accuracy,
        r.majority_baseline,
        c.episodes.len()
    );
}

fn report_qnet(q: &minesweep_bench::pipeline::QRun) {
    let t = q.alpha.model.theta;
    eprintln!(
        "alpha fit θ = [{:.4}, {:.4}, {:.4}, {:.4}], r² {:.3}",
        t[0], t[1], t[2], t[3], q.alpha.r_squared
    );
    eprintln!(
        "q-net: {} samples, held-out mse {:.4} (mean predictor {:.4}), {} iterative episodes",
        q.samples,
        q.single_pass.heldout_mse,
        q.single_pass.mean_predictor_mse,
        q.episodes.len()
    );
}

fn sweep(out: &Path, full: bool, fit_out: Option<&Path>) -> Result<()> {
    let plan = if full { TrainPlan::desk().with_full_alpha_sweep() } else { TrainPlan::desk() };
    let rows = alpha_sweep(&plan.alpha_grid, &plan.alphas)?;
    write_alpha_table(File::create(out)?, &plan.alphas, &rows)?;
    let fit = fit_alpha(&rows)?;
    let t = fit.model.theta;
    eprintln!("θ = [{:.4}, {:.4}, {:.4}, {:.4}], r² {:.3}", t[0], t[1], t[2], t[3], fit.r_squared);
    if let Some(p) = fit_out {
        save_alpha(&fit.model, p)?;
    }
    Ok(())
}
