//! Command-line interface.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dribbleforge_core::atlas::ObstacleFrame;
use dribbleforge_core::document::{
    field_csv, history_csv, parse_atlas, parse_fitness_config, parse_ga_config, parse_grid,
    parse_pair, parse_plan, trace_csv, RunReport, TraceDocument,
};
use dribbleforge_core::evolution::{evolve, FitnessConfig, GaConfig};
use dribbleforge_core::geometry::Point2;
use dribbleforge_core::simulation::{
    sample_field, simulate, trace_metrics, FieldSample, SimConfig,
};
use dribbleforge_core::{fixtures, TrajectoryPlan};

#[derive(Debug, Parser)]
#[command(
    name = "dribbleforge",
    version,
    about = "Optimize, simulate and serve dribbling trajectory plans"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the genetic optimizer on a plan and write a run report.
    Optimize(OptimizeArgs),
    /// Simulate the point agent on a plan and write its trace.
    Simulate(SimulateArgs),
    /// Sample the action field of a plan or an atlas on a grid.
    FieldDump(FieldDumpArgs),
    /// Check a plan or atlas document.
    Validate(ValidateArgs),
    /// Serve the HTTP API (and optionally static editor assets).
    Serve(ServeArgs),
}

fn pair_arg(s: &str) -> Result<Point2, String> {
    parse_pair(s).map_err(|e| e.to_string())
}

fn grid_arg(s: &str) -> Result<(usize, usize), String> {
    parse_grid(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Seed plan; the bundled 25-node plan if omitted.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub ga: Option<PathBuf>,
    #[arg(long)]
    pub fitness: Option<PathBuf>,
    /// Overrides `rng_seed` from the GA config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `generation_count` from the GA config.
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the fitness history as CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, value_parser = pair_arg, allow_hyphen_values = true, default_value = "-12,0")]
    pub start: Point2,
    #[arg(long, value_parser = pair_arg, allow_hyphen_values = true, default_value = "4,0")]
    pub v0: Point2,
    /// Simulation config JSON; defaults for any missing field.
    #[arg(long)]
    pub sim: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TraceFormat::Csv)]
    pub format: TraceFormat,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FieldDumpArgs {
    #[arg(long, conflicts_with = "plan")]
    pub atlas: Option<PathBuf>,
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// World position of the obstacle (atlas only).
    #[arg(long, value_parser = pair_arg, allow_hyphen_values = true, default_value = "0,0")]
    pub obstacle: Point2,
    #[arg(long, value_parser = grid_arg, default_value = "40x30")]
    pub grid: (usize, usize),
    /// Entry velocity of the speed-sampling runs, in the plan frame.
    #[arg(long, value_parser = pair_arg, allow_hyphen_values = true, default_value = "4,0")]
    pub v0: Point2,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, required_unless_present = "atlas")]
    pub plan: Option<PathBuf>,
    #[arg(long, conflicts_with = "plan")]
    pub atlas: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8700)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Directory of editor assets served at `/`.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
    /// Initial workspace plan; the bundled plan if omitted.
    #[arg(long)]
    pub plan: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_plan(path: Option<&Path>) -> Result<TrajectoryPlan> {
    match path {
        Some(p) => parse_plan(&read(p)?).with_context(|| format!("loading plan {}", p.display())),
        None => Ok(fixtures::seed_plan()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::FieldDump(a) => field_dump(a),
        Command::Validate(a) => validate(a),
        Command::Serve(a) => serve(a),
    }
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let plan = load_plan(a.plan.as_deref())?;
    let mut ga = match &a.ga {
        Some(p) => parse_ga_config(&read(p)?).context("GA config")?,
        None => GaConfig::default(),
    };
    let fitness = match &a.fitness {
        Some(p) => parse_fitness_config(&read(p)?).context("fitness config")?,
        None => FitnessConfig::default(),
    };
    if let Some(seed) = a.seed {
        ga.rng_seed = seed;
    }
    if let Some(g) = a.generations {
        ga.generation_count = g;
    }
    let result = evolve(&plan, &ga, &fitness)?;
    let report = RunReport::new(&ga, &fitness, &result);
    emit(Some(&a.out), &report.to_json())?;
    if let Some(h) = &a.history {
        emit(Some(h), &history_csv(&result.history))?;
    }
    eprintln!(
        "fitness {} -> {} after {} generations",
        result.seed_fitness,
        result.best_fitness,
        result.history.len() - 1
    );
    Ok(())
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let plan = load_plan(a.plan.as_deref())?;
    let cfg: SimConfig = match &a.sim {
        Some(p) => serde_json::from_str(&read(p)?).context("simulation config")?,
        None => SimConfig::default(),
    };
    let trace = simulate(&plan, a.start, a.v0, &cfg)?;
    let metrics = trace_metrics(&trace, Point2::ORIGIN)?;
    let text = match a.format {
        TraceFormat::Csv => trace_csv(&trace),
        TraceFormat::Json => {
            let mut s = serde_json::to_string_pretty(&TraceDocument::new(&trace, Some(metrics)))?;
            s.push('\n');
            s
        }
    };
    emit(a.out.as_deref(), &text)?;
    eprintln!(
        "{:?} after {} steps, min obstacle distance {:.3}",
        trace.termination,
        trace.states.len() - 1,
        metrics.min_obstacle_distance
    );
    Ok(())
}

/// Field samples of an atlas: the plan resolved for the obstacle, sampled in
/// its frame and mapped back to world coordinates and bearings.
pub fn atlas_field(
    atlas_text: &str,
    obstacle: Point2,
    grid: (usize, usize),
    v0: Point2,
) -> Result<Vec<FieldSample>> {
    let atlas = parse_atlas(atlas_text)?;
    let frame = ObstacleFrame::new(obstacle, atlas.goal())?;
    let plan = atlas.resolve_plan(obstacle);
    let local = sample_field(&plan, grid.0, grid.1, v0, &SimConfig::default())?;
    Ok(local
        .into_iter()
        .map(|s| {
            let w = frame.to_world(Point2::new(s.x, s.y));
            FieldSample {
                x: w.x,
                y: w.y,
                body_dir: s.body_dir + frame.rotation,
                ..s
            }
        })
        .collect())
}

fn field_dump(a: FieldDumpArgs) -> Result<()> {
    let samples = match &a.atlas {
        Some(p) => atlas_field(&read(p)?, a.obstacle, a.grid, a.v0)?,
        None => {
            let plan = load_plan(a.plan.as_deref())?;
            sample_field(&plan, a.grid.0, a.grid.1, a.v0, &SimConfig::default())?
        }
    };
    emit(a.out.as_deref(), &field_csv(&samples))
}

fn validate(a: ValidateArgs) -> Result<()> {
    if let Some(p) = &a.atlas {
        let atlas = parse_atlas(&read(p)?)?;
        let mode = if atlas.is_nearest_anchor_mode() {
            "nearest-anchor"
        } else {
            "triangulated"
        };
        println!("ok: {} anchors ({mode})", atlas.anchors().len());
        return Ok(());
    }
    let Some(p) = &a.plan else {
        bail!("nothing to validate")
    };
    let plan = parse_plan(&read(p)?)?;
    println!(
        "ok: {} nodes, {} triangles",
        plan.len(),
        plan.triangulation().len()
    );
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let plan = load_plan(a.plan.as_deref())?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let mut app = crate::api::router(crate::api::AppState::new(plan));
        if let Some(dir) = a.static_dir {
            app = app.fallback_service(tower_http::services::ServeDir::new(dir));
        }
        let addr = SocketAddr::new(a.host, a.port);
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
