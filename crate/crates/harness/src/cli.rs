//! The `gtt` command line.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gts_core::distsim::{
    decompose, simulate_frame, sweep, write_sweep_csv, ArchetypeCatalog, RenderJob, Strategy, SweepParameter,
    SystemArchetype, ThroughputRecord,
};
use gts_core::protocol::{Design, DEFAULT_ALPHA, DEFAULT_TRIALS, VERDICT_CAVEAT};
use gts_core::render::{measure_frame_time, presets, render_with_workers, Camera, RenderConfig, Scene, SceneFile};
use gts_core::scale::{
    extrapolate, CpuDescriptor, TargetInteractivity, WorkloadMeasurement, DEFAULT_EFFICIENCY, DEFAULT_FPS,
};
use serde::Serialize;

use crate::log::{log_file_in, read_log, replay, LOG_DIR_ENV};
use crate::report::{record_json, scale_report, sim_report};
use crate::selftest::{self, Calibration, SelftestOptions};
use crate::service::{serve, ServiceConfig};
use crate::HarnessError;

/// Bytes in one 1920x1080 RGB8 frame.
const HD_FRAME_BYTES: f64 = 1920.0 * 1080.0 * 3.0;

#[derive(Debug, Parser)]
#[command(name = "gtt", version, about = "Render, size, simulate and run real-vs-rendered discrimination tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Path trace a scene to a PPM or PNG file.
    Render(RenderArgs),
    /// Time single-worker renders and extrapolate to an interactive machine.
    Measure(MeasureArgs),
    /// Processor count and TFlops needed for interactive frame rates.
    Scale(ScaleArgs),
    /// Simulate one frame on a catalog machine.
    Simulate(SimulateArgs),
    /// Simulate over a grid of latency, node count or tile count values (CSV).
    Sweep(SweepArgs),
    /// Serve test sessions over HTTP.
    Serve(ServeArgs),
    /// Recompute test results from a session log.
    Analyze(AnalyzeArgs),
    /// Render stimuli, run a simulated subject through the log and replay it.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// Built-in scene: cornell or furnace.
    #[arg(long, default_value = "cornell", conflicts_with = "scene")]
    pub preset: String,
    /// TOML scene file (overrides --preset).
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Image width for presets.
    #[arg(long, default_value_t = 64)]
    pub width: u32,
    /// Image height for presets.
    #[arg(long, default_value_t = 64)]
    pub height: u32,
    /// Samples per pixel [default: scene file value, else 64].
    #[arg(long)]
    pub spp: Option<u32>,
    /// Maximum surface interactions per path [default: scene file value, else 8].
    #[arg(long)]
    pub depth: Option<u32>,
    /// RNG seed [default: scene file value, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SceneArgs {
    fn load(&self) -> Result<(Scene, Camera, RenderConfig), HarnessError> {
        let (scene, camera, base) = match &self.scene {
            Some(path) => {
                let file = SceneFile::load(path)?;
                let scene = file.scene()?;
                (scene, file.camera, file.render)
            }
            None => {
                let (scene, camera) = presets::by_name(&self.preset, self.width, self.height).ok_or_else(|| {
                    HarnessError::User(format!(
                        "unknown preset {:?} (one of {})",
                        self.preset,
                        presets::NAMES.join(", ")
                    ))
                })?;
                (scene, camera, None)
            }
        };
        let base = base.unwrap_or(RenderConfig::new(64, 8, 0));
        let config = RenderConfig::new(
            self.spp.unwrap_or(base.samples_per_pixel),
            self.depth.unwrap_or(base.max_path_depth),
            self.seed.unwrap_or(base.rng_seed),
        );
        config.validate()?;
        Ok((scene, camera, config))
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Worker threads; the output does not depend on this.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Output path; .ppm or .png.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CpuArgs {
    /// Rated GFlops of one CPU.
    #[arg(long, default_value_t = 4.8)]
    pub gflops: f64,
    /// Clock of one CPU in GHz [default: gflops / 2].
    #[arg(long)]
    pub clock_ghz: Option<f64>,
    /// Frames per second to sustain.
    #[arg(long, default_value_t = DEFAULT_FPS)]
    pub fps: f64,
    /// Sustained / peak.
    #[arg(long, default_value_t = DEFAULT_EFFICIENCY)]
    pub efficiency: f64,
    /// Print only the JSON record.
    #[arg(long)]
    pub json: bool,
}

impl CpuArgs {
    fn cpu(&self, name: &str) -> Result<CpuDescriptor, HarnessError> {
        Ok(CpuDescriptor::new(name, self.clock_ghz.unwrap_or(self.gflops / 2.0), self.gflops)?)
    }
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Timed renders; the median is used.
    #[arg(long, default_value_t = 3)]
    pub repetitions: u32,
    #[command(flatten)]
    pub cpu: CpuArgs,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    /// Seconds one CPU needs per frame.
    #[arg(long, default_value_t = 7200.0)]
    pub seconds_per_frame: f64,
    #[command(flatten)]
    pub cpu: CpuArgs,
}

#[derive(Debug, Args)]
pub struct JobArgs {
    /// Catalog machine name (see `gtt simulate --list`).
    #[arg(long, default_value = "BlueGeneL")]
    pub machine: String,
    /// Machine catalog TOML file [default: built-in].
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Seconds the whole frame takes on the reference CPU.
    #[arg(long, default_value_t = 7200.0)]
    pub work_s: f64,
    /// GFlops of the reference CPU.
    #[arg(long, default_value_t = 4.8)]
    pub ref_gflops: f64,
    /// Tiles per frame [default: one per node].
    #[arg(long)]
    pub tiles: Option<usize>,
    /// Bytes of finished image per frame, split evenly across tiles.
    #[arg(long, default_value_t = HD_FRAME_BYTES)]
    pub frame_bytes: f64,
    /// Scene bytes sent to each worker before it starts.
    #[arg(long, default_value_t = 0.0)]
    pub geometry_bytes: f64,
    /// Comma-separated relative tile costs (one per tile) instead of a uniform split.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
}

impl JobArgs {
    fn catalog(&self) -> Result<ArchetypeCatalog, HarnessError> {
        Ok(match &self.catalog {
            Some(p) => ArchetypeCatalog::load(p)?,
            None => ArchetypeCatalog::builtin(),
        })
    }

    fn machine(&self, catalog: &ArchetypeCatalog) -> Result<SystemArchetype, HarnessError> {
        catalog.get(&self.machine).cloned().ok_or_else(|| {
            HarnessError::User(format!(
                "unknown machine {:?} (one of {})",
                self.machine,
                catalog.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    fn job(&self, arch: &SystemArchetype) -> Result<RenderJob, HarnessError> {
        let (tiles, strategy) = match &self.weights {
            Some(w) => {
                let sum: f64 = w.iter().sum();
                if !(sum > 0.0 && w.iter().all(|x| x.is_finite() && *x > 0.0)) {
                    return Err(HarnessError::User("weights must be positive".into()));
                }
                let mut split: Vec<f64> = w.iter().map(|x| x / sum).collect();
                let residue = 1.0 - split.iter().sum::<f64>();
                *split.last_mut().expect("weights non-empty") += residue;
                (split.len(), Strategy::Weighted(split))
            }
            None => {
                let tiles = self.tiles.unwrap_or(arch.node_count as usize);
                (tiles, Strategy::Uniform)
            }
        };
        if self.frame_bytes < 0.0 || !self.frame_bytes.is_finite() {
            return Err(HarnessError::User("frame bytes must be finite and >= 0".into()));
        }
        let job = decompose(self.work_s, tiles, strategy)?;
        let per_tile = self.frame_bytes / job.tile_count as f64;
        Ok(job.with_result_bytes(per_tile).with_geometry_bytes(self.geometry_bytes))
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub job: JobArgs,
    /// Target frame rate for the verdict.
    #[arg(long, default_value_t = DEFAULT_FPS)]
    pub fps: f64,
    /// Efficiency used for the required sustained TFlops.
    #[arg(long, default_value_t = DEFAULT_EFFICIENCY)]
    pub efficiency: f64,
    /// Write the event log as JSON lines.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// List catalog machines and exit.
    #[arg(long)]
    pub list: bool,
    /// Print only the JSON record.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub job: JobArgs,
    /// latency, node_count or tile_count.
    #[arg(long, default_value = "latency")]
    pub parameter: String,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<String>,
    /// CSV output path [default: stdout].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    /// Stimulus manifest (TOML).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory holding sessions.jsonl.
    #[arg(long, env = LOG_DIR_ENV, default_value = "gtt-logs")]
    pub log_dir: PathBuf,
    /// Significance level.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Trials per session when the client does not ask for a count.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Draw each trial's kind by coin instead of balancing real and synthetic.
    #[arg(long)]
    pub bernoulli: bool,
    /// Directory of static UI assets served at /.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Session log file, or a directory holding sessions.jsonl.
    #[arg(long, env = LOG_DIR_ENV, default_value = "gtt-logs")]
    pub log: PathBuf,
    /// Only this session.
    #[arg(long)]
    pub session: Option<String>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Keep stimuli, manifest and log here [default: a temporary directory].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Trials in the end-to-end session.
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    /// Stimulus size in pixels.
    #[arg(long, default_value_t = 32)]
    pub size: u32,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also run accuracy-q observers over --seeds sessions and report how often they pass.
    #[arg(long)]
    pub observer_accuracy: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub seeds: u64,
    /// Trials per calibration session.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub calibration_trials: usize,
    #[arg(long)]
    pub json: bool,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io(e: std::io::Error) -> HarnessError {
    HarnessError::Internal(e.to_string())
}

fn json_line<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<(), HarnessError> {
    writeln!(out, "{}", serde_json::to_string(v).map_err(|e| HarnessError::Internal(e.to_string()))?).map_err(io)
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), HarnessError> {
    match cli.command {
        Command::Render(a) => cmd_render(a, out),
        Command::Measure(a) => cmd_measure(a, out),
        Command::Scale(a) => cmd_scale(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Serve(a) => cmd_serve(a),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Selftest(a) => cmd_selftest(a, out),
    }
}

fn cmd_render(a: RenderArgs, out: &mut dyn Write) -> Result<(), HarnessError> {
    let (scene, camera, config) = a.scene.load()?;
    if a.workers == 0 {
        return Err(HarnessError::User("workers must be >= 1".into()));
    }
    let r = render_with_workers(&scene, &camera, &config, a.workers)?;
    r.image.save(&a.out)?;
    writeln!(
        out,
        "wrote {} ({}x{}, {} spp, depth {}, seed {}) in {:.3} s on {} worker(s)",
        a.out.display(),
        camera.width,
        camera.height,
        config.samples_per_pixel,
        config.max_path_depth,
        config.rng_seed,
        r.wall_seconds,
        a.workers
    )
    .map_err(io)
}

fn estimate_output(
    estimate: &gts_core::scale::ScaleEstimate,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), HarnessError> {
    let record = ThroughputRecord::from_estimate("required", estimate);
    if json {
        return writeln!(out, "{}", record_json(&record)).map_err(io);
    }
    write!(out, "{}", scale_report(estimate, &ArchetypeCatalog::builtin())).map_err(io)?;
    writeln!(out, "\nrecord {}", record_json(&record)).map_err(io)
}

fn cmd_measure(a: MeasureArgs, out: &mut dyn Write) -> Result<(), HarnessError> {
    let (scene, camera, config) = a.scene.load()?;
    let cpu = a.cpu.cpu("this machine")?;
    let timing = measure_frame_time(&scene, &camera, &config, a.repetitions, cpu.clone())?;
    let estimate = extrapolate(&timing.workload()?, &TargetInteractivity::new(a.cpu.fps)?, a.cpu.efficiency, &cpu)?;
    if !a.cpu.json {
        let samples: Vec<String> = timing.samples.iter().map(|t| format!("{t:.4}")).collect();
        writeln!(
            out,
            "measured      {}x{}, {} spp, depth {}: median {:.6} s over [{}] s on one worker\n",
            camera.width,
            camera.height,
            config.samples_per_pixel,
            config.max_path_depth,
            timing.seconds_per_frame,
            samples.join(", ")
        )
        .map_err(io)?;
    }
    estimate_output(&estimate, a.cpu.json, out)
}

fn cmd_scale(a: ScaleArgs, out: &mut dyn Write) -> Result<(), HarnessError> {
    let cpu = a.cpu.cpu("reference CPU")?;
    let estimate = extrapolate(
        &WorkloadMeasurement::new(a.seconds_per_frame, cpu.clone())?,
        &TargetInteractivity::new(a.cpu.fps)?,
        a.cpu.efficiency,
        &cpu,
    )?;
    estimate_output(&estimate, a.cpu.json, out)
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<(), HarnessError> {
    let catalog = a.job.catalog()?;
    if a.list {
        for m in &catalog.archetypes {
            writeln!(
                out,
                "{:<15} {:>8} nodes x {:>5} GFlops  {}",
                m.name, m.node_count, m.gflops_per_node, m.description
            )
            .map_err(io)?;
        }
        return Ok(());
    }
    let arch = a.job.machine(&catalog)?;
    let job = a.job.job(&arch)?;
    let sim = simulate_frame(&arch, &job, a.job.ref_gflops)?;
    let reference = CpuDescriptor::new("reference CPU", a.job.ref_gflops / 2.0, a.job.ref_gflops)?;
    let required = extrapolate(
        &WorkloadMeasurement::new(a.job.work_s, reference.clone())?,
        &TargetInteractivity::new(a.fps)?,
        a.efficiency,
        &reference,
    )?;
    if let Some(path) = &a.events {
        let mut w = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| HarnessError::User(format!("{}: {e}", path.display())))?,
        );
        for e in &sim.event_log {
            json_line(&mut w, e)?;
        }
        w.flush().map_err(io)?;
    }
    let record = ThroughputRecord::from_sim(&arch.name, &arch, &sim);
    if a.json {
        return writeln!(out, "{}", record_json(&record)).map_err(io);
    }
    write!(out, "{}", sim_report(&arch, &job, a.job.ref_gflops, &required, &sim)).map_err(io)?;
    writeln!(out, "\nrecord {}", record_json(&record)).map_err(io)
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), HarnessError> {
    let parameter: SweepParameter = a.parameter.parse()?;
    let catalog = a.job.catalog()?;
    let arch = a.job.machine(&catalog)?;
    let job = a.job.job(&arch)?;
    // Unparseable values become NaN, which the sweep reports as an error row.
    let grid: Vec<f64> = a.grid.iter().map(|v| v.trim().parse().unwrap_or(f64::NAN)).collect();
    let rows = sweep(&arch, &job, a.job.ref_gflops, parameter, &grid)?;
    let written = match &a.out {
        Some(path) => {
            let f = std::fs::File::create(path).map_err(|e| HarnessError::User(format!("{}: {e}", path.display())))?;
            write_sweep_csv(&rows, f)
        }
        None => write_sweep_csv(&rows, out),
    };
    written.map_err(|e| HarnessError::Internal(e.to_string()))
}

fn cmd_serve(a: ServeArgs) -> Result<(), HarnessError> {
    let config = ServiceConfig {
        bind: a.bind,
        manifest_path: a.manifest,
        log_dir: a.log_dir,
        alpha: a.alpha,
        default_n: a.trials,
        design: if a.bernoulli { Design::Bernoulli } else { Design::Balanced },
        ui_dir: a.ui_dir,
    };
    tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(io)?.block_on(serve(config))
}

#[derive(Debug, Serialize)]
pub struct AnalyzedSession {
    pub session_id: String,
    pub n: usize,
    pub answered: usize,
    pub status: gts_core::protocol::SessionStatus,
    pub design: Design,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<gts_core::protocol::TestResult>,
}

fn cmd_analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<(), HarnessError> {
    let path = log_file_in(&a.log);
    let mut sessions = replay(&read_log(&path)?)?;
    if let Some(id) = &a.session {
        sessions.retain(|s| s.id() == id);
        if sessions.is_empty() {
            return Err(HarnessError::User(format!("no sessions with id {id} in {}", path.display())));
        }
    }
    if sessions.is_empty() {
        return Err(HarnessError::User(format!("no sessions in {}", path.display())));
    }
    let mut rows = Vec::new();
    for s in &sessions {
        let result = if s.session.is_complete() { Some(s.result()?) } else { None };
        if let (Some(r), Some(logged)) = (&result, &s.logged_result) {
            if r != logged {
                return Err(HarnessError::User(format!(
                    "session {}: logged evaluation disagrees with the responses",
                    s.id()
                )));
            }
        }
        rows.push(AnalyzedSession {
            session_id: s.id().to_string(),
            n: s.session.plan.n,
            answered: s.session.responses.len(),
            status: s.session.status,
            design: s.session.plan.design,
            result,
        });
    }
    if a.json {
        return json_line(out, &rows);
    }
    writeln!(out, "{:<34} {:>6} {:>9} {:>12} {:>6}  verdict", "session", "n", "k_correct", "p_value", "alpha")
        .map_err(io)?;
    for r in &rows {
        match &r.result {
            Some(t) => writeln!(
                out,
                "{:<34} {:>6} {:>9} {:>12.6e} {:>6}  {}",
                r.session_id, t.n, t.k_correct, t.p_value, t.alpha, t.verdict
            ),
            None => writeln!(
                out,
                "{:<34} {:>6} {:>9} {:>12} {:>6}  open ({} answered)",
                r.session_id, r.n, "-", "-", "-", r.answered
            ),
        }
        .map_err(io)?;
    }
    writeln!(out, "\n{VERDICT_CAVEAT}").map_err(io)
}

fn cmd_selftest(a: SelftestArgs, out: &mut dyn Write) -> Result<(), HarnessError> {
    let temp;
    let dir: &Path = match &a.out_dir {
        Some(d) => d,
        None => {
            temp = tempfile::tempdir().map_err(io)?;
            temp.path()
        }
    };
    let opts = SelftestOptions {
        out_dir: dir.to_path_buf(),
        size: a.size,
        trials: a.trials,
        alpha: a.alpha,
        seed: a.seed,
        calibration: a.observer_accuracy.map(|q| Calibration {
            accuracy: q,
            seeds: a.seeds,
            trials: a.calibration_trials,
        }),
    };
    let report = selftest::run(&opts)?;
    if a.json {
        json_line(out, &report)?;
    } else {
        let r = &report.result;
        writeln!(out, "stimuli       {} (real, synthetic)", report.manifest_path.display()).map_err(io)?;
        writeln!(
            out,
            "observer      threshold {:.5} on mean |difference| from a reference render (real {:.5}, synthetic {:.5})",
            report.threshold, report.real_difference, report.synthetic_difference
        )
        .map_err(io)?;
        writeln!(out, "session       {} logged to {}", report.session_id, report.log_path.display()).map_err(io)?;
        writeln!(
            out,
            "result        n = {}, k_correct = {}, p = {:.6e}, alpha = {}: {}",
            r.n, r.k_correct, r.p_value, r.alpha, r.verdict
        )
        .map_err(io)?;
        writeln!(out, "replay        {}", if report.replay_identical { "identical TestResult" } else { "MISMATCH" })
            .map_err(io)?;
        if let Some(c) = &report.calibration {
            writeln!(
                out,
                "calibration   q = {}, n = {}: PASSED in {}/{} sessions = {:.3} (expected {:.3})",
                c.accuracy, c.trials, c.passed, c.seeds, c.passed_fraction, c.expected_fraction
            )
            .map_err(io)?;
        }
        writeln!(out, "\n{VERDICT_CAVEAT}").map_err(io)?;
    }
    if !report.replay_identical {
        return Err(HarnessError::Internal("replayed result differs from the live result".into()));
    }
    Ok(())
}
