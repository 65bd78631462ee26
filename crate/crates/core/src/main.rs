//! Command-line interface: dataset synthesis, tracking, trajectory
//! evaluation and the method x budget benchmark grid.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sdftrack::eval::{ate_rmse, compare_report, iteration_report, CompareEntry, Trajectory};
use sdftrack::geometry::Intrinsics;
use sdftrack::io::{load_dataset, parse_key_values, read_tum, write_tum, RunConfig};
use sdftrack::optim::{Budget, TrackerConfig};
use sdftrack::render::RenderParams;
use sdftrack::scene::load_scene_file;
use sdftrack::synth::{generate_sequence, TrajectorySpec};
use sdftrack::tracker::{track_sequence, Method, TrackingRun};

#[derive(Parser)]
#[command(
    name = "sdftrack",
    about = "RGB-D camera tracking inside signed-distance scene representations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic RGB-D dataset from a scene file.
    Synth(SynthArgs),
    /// Track a dataset with the direct SDF method or the volume-rendering
    /// baseline.
    Track(TrackArgs),
    /// Compare an estimated trajectory against ground truth (ATE RMSE).
    Eval(EvalArgs),
    /// Run the full method x budget benchmark grid over a scene.
    Bench(BenchArgs),
}

fn parse_vec3(s: &str) -> Result<Vector3<f64>, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected 'x,y,z', got '{s}'"));
    }
    let mut v = Vector3::zeros();
    for (i, p) in parts.iter().enumerate() {
        v[i] = p.trim().parse::<f64>().map_err(|e| format!("component {}: {e}", i + 1))?;
    }
    Ok(v)
}

#[derive(Args)]
struct SynthArgs {
    /// Scene description file.
    #[arg(long)]
    scene: PathBuf,
    /// Trajectory kind.
    #[arg(long, default_value = "orbit", value_parser = ["orbit", "line"])]
    traj: String,
    /// Number of frames.
    #[arg(long, default_value_t = 60)]
    frames: usize,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
    /// Gaussian depth noise sigma in meters (0 = noise free).
    #[arg(long, default_value_t = 0.0)]
    noise_std: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Frame timestamps are frame_index / rate.
    #[arg(long, default_value_t = 10.0)]
    rate: f64,
    #[arg(long, default_value_t = 64)]
    width: u32,
    #[arg(long, default_value_t = 48)]
    height: u32,
    #[arg(long, default_value_t = 48.0)]
    fx: f64,
    #[arg(long, default_value_t = 48.0)]
    fy: f64,
    /// Principal point x (default: width / 2).
    #[arg(long)]
    cx: Option<f64>,
    /// Principal point y (default: height / 2).
    #[arg(long)]
    cy: Option<f64>,
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,0.2")]
    orbit_center: Vector3<f64>,
    #[arg(long, default_value_t = 0.8)]
    orbit_radius: f64,
    #[arg(long, default_value_t = 1.4)]
    orbit_height: f64,
    #[arg(long, default_value_t = 0.145)]
    orbit_deg_per_frame: f64,
    #[arg(long, value_parser = parse_vec3, default_value = "0,-2,0.5")]
    line_start: Vector3<f64>,
    #[arg(long, value_parser = parse_vec3, default_value = "0.5,-2,0.5")]
    line_end: Vector3<f64>,
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,0")]
    look_at: Vector3<f64>,
    #[arg(long, default_value_t = 0.05)]
    t_near: f64,
    #[arg(long, default_value_t = 20.0)]
    t_far: f64,
    #[arg(long, default_value_t = 1e-4)]
    hit_eps: f64,
    #[arg(long, default_value_t = 256)]
    max_steps: usize,
}

#[derive(Args)]
struct TrackArgs {
    /// Dataset directory (its manifest must reference a scene file).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Tracking method.
    #[arg(long)]
    method: Option<Method>,
    /// Run configuration file; CLI flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Wall-clock budget per frame in milliseconds.
    #[arg(long, conflicts_with = "iters")]
    budget_ms: Option<f64>,
    /// Fixed iterations per frame (deterministic).
    #[arg(long)]
    iters: Option<u32>,
    /// Output trajectory (TUM format).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-frame statistics CSV (default: <out>.stats.csv).
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Estimated trajectory (TUM).
    #[arg(long)]
    est: PathBuf,
    /// Ground-truth trajectory (TUM).
    #[arg(long)]
    gt: PathBuf,
    /// ATE failure threshold in meters.
    #[arg(long, default_value_t = sdftrack::DEFAULT_FAILURE_THRESHOLD)]
    threshold: f64,
    /// Per-frame error CSV (default: <est>.ate.csv).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Scene description file.
    #[arg(long)]
    scene: PathBuf,
    /// Grid configuration file (key = value).
    #[arg(long)]
    grid: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Track(args) => cmd_track(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_synth(args: SynthArgs) -> Result<(), String> {
    let scene = load_scene_file(&args.scene).map_err(|e| e.to_string())?;
    let scene_text =
        std::fs::read_to_string(&args.scene).map_err(|e| format!("{}: {e}", args.scene.display()))?;
    if args.frames < 2 {
        return Err("synth: --frames must be >= 2".into());
    }
    let intrinsics = Intrinsics::new(
        args.fx,
        args.fy,
        args.cx.unwrap_or(args.width as f64 / 2.0),
        args.cy.unwrap_or(args.height as f64 / 2.0),
        args.width,
        args.height,
    )
    .map_err(|e| e.to_string())?;
    let spec = match args.traj.as_str() {
        "orbit" => TrajectorySpec::Orbit {
            center: args.orbit_center,
            radius: args.orbit_radius,
            height: args.orbit_height,
            degrees_per_frame: args.orbit_deg_per_frame,
        },
        "line" => TrajectorySpec::Line {
            start: args.line_start,
            end: args.line_end,
            look_at: args.look_at,
        },
        other => return Err(format!("unknown trajectory '{other}'")),
    };
    let params = RenderParams {
        t_near: args.t_near,
        t_far: args.t_far,
        hit_eps: args.hit_eps,
        max_steps: args.max_steps,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    generate_sequence(
        &scene,
        &spec,
        &intrinsics,
        args.frames,
        &params,
        args.noise_std,
        &mut rng,
        &args.out,
        args.rate,
        Some(&scene_text),
    )
    .map_err(|e| e.to_string())?;
    println!(
        "wrote {} frames ({}x{}) to {}",
        args.frames,
        args.width,
        args.height,
        args.out.display()
    );
    Ok(())
}

fn resolve_track_config(args: &TrackArgs) -> Result<RunConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::read_from(path).map_err(|e| e.to_string())?,
        None => RunConfig::default(),
    };
    if let Some(dataset) = &args.dataset {
        cfg.dataset = dataset.clone();
    }
    if let Some(method) = args.method {
        cfg.method = method;
    }
    if let Some(ms) = args.budget_ms {
        cfg.tracker.budget = Budget::WallClockMs(ms);
    }
    if let Some(iters) = args.iters {
        cfg.tracker.budget = Budget::FixedIterations(iters);
    }
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    if let Some(stats) = &args.stats {
        cfg.stats_output = stats.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if cfg.dataset.as_os_str().is_empty() {
        return Err("track: --dataset is required (or provide it via --config)".into());
    }
    if cfg.output.as_os_str().is_empty() {
        return Err("track: --out is required (or provide it via --config)".into());
    }
    if cfg.stats_output.as_os_str().is_empty() {
        cfg.stats_output = PathBuf::from(format!("{}.stats.csv", cfg.output.display()));
    }
    cfg.tracker.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn write_stats_csv(path: &Path, run: &TrackingRun) -> Result<(), String> {
    let mut csv = String::from("frame_index,iterations,queries,elapsed_ms,final_loss\n");
    for f in &run.frames {
        writeln!(
            csv,
            "{},{},{},{},{}",
            f.frame_index, f.iterations, f.queries, f.elapsed_ms, f.final_loss
        )
        .expect("string write");
    }
    std::fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_track(args: TrackArgs) -> Result<(), String> {
    let cfg = resolve_track_config(&args)?;
    let dataset = load_dataset(&cfg.dataset).map_err(|e| e.to_string())?;
    let scene_path = dataset.scene_path.clone().ok_or_else(|| {
        format!("dataset {} has no scene file in its manifest", cfg.dataset.display())
    })?;
    let scene = load_scene_file(&scene_path).map_err(|e| e.to_string())?;
    let initial = *dataset
        .groundtruth
        .first_pose()
        .ok_or_else(|| "dataset ground truth is empty".to_string())?;
    if matches!(cfg.tracker.budget, Budget::FixedIterations(0)) {
        eprintln!("warning: 0 iterations per frame; the initialization propagates unchanged");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let run = track_sequence(
        &scene,
        &dataset.frames,
        &dataset.intrinsics,
        &initial,
        cfg.method,
        &cfg.tracker,
        dataset.manifest.rate_hz,
        &mut rng,
    );
    let traj = Trajectory::from_run(&run);
    write_tum(&cfg.output, &traj, dataset.manifest.rate_hz).map_err(|e| e.to_string())?;
    write_stats_csv(&cfg.stats_output, &run)?;
    let config_path = PathBuf::from(format!("{}.config", cfg.output.display()));
    cfg.write_to(&config_path).map_err(|e| e.to_string())?;
    let total_iters: u64 = run.frames.iter().map(|f| f.iterations as u64).sum();
    println!(
        "tracked {} frames ({} method, {} total iterations) -> {}",
        run.frames.len(),
        run.method,
        total_iters,
        cfg.output.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), String> {
    let est = read_tum(&args.est).map_err(|e| e.to_string())?;
    let gt = read_tum(&args.gt).map_err(|e| e.to_string())?;
    let report = ate_rmse(&est, &gt, args.threshold).map_err(|e| e.to_string())?;
    println!("frames = {}", report.per_frame_errors.len());
    println!("ate_rmse = {:.6}", report.ate_rmse);
    println!("max_error = {:.6}", report.max_error);
    println!("mean_rotation_error_rad = {:.6}", report.mean_rotation_error);
    println!("failed = {} (threshold = {:.6})", report.failed, report.failure_threshold);
    let csv_path = args
        .csv
        .unwrap_or_else(|| PathBuf::from(format!("{}.ate.csv", args.est.display())));
    let mut csv = String::from("frame_index,translation_error_m\n");
    for (i, err) in report.per_frame_errors.iter().enumerate() {
        writeln!(csv, "{i},{err}").expect("string write");
    }
    std::fs::write(&csv_path, csv).map_err(|e| format!("{}: {e}", csv_path.display()))?;
    Ok(())
}

/// Parsed `bench` grid configuration.
struct BenchGrid {
    methods: Vec<Method>,
    budgets: Vec<Budget>,
    frames: usize,
    seed: u64,
    noise_std: f64,
    rate: f64,
    threshold: f64,
    width: u32,
    height: u32,
    fx: f64,
    fy: f64,
    cx: Option<f64>,
    cy: Option<f64>,
    traj: String,
    orbit_center: Vector3<f64>,
    orbit_radius: f64,
    orbit_height: f64,
    orbit_deg_per_frame: f64,
    line_start: Vector3<f64>,
    line_end: Vector3<f64>,
    look_at: Vector3<f64>,
    tracker: TrackerConfig,
}

impl Default for BenchGrid {
    fn default() -> Self {
        BenchGrid {
            methods: vec![Method::Sdf, Method::Vr],
            budgets: vec![Budget::FixedIterations(3), Budget::FixedIterations(7), Budget::FixedIterations(50)],
            frames: 60,
            seed: 0,
            noise_std: 0.0,
            rate: 10.0,
            threshold: sdftrack::DEFAULT_FAILURE_THRESHOLD,
            width: 64,
            height: 48,
            fx: 48.0,
            fy: 48.0,
            cx: None,
            cy: None,
            traj: "orbit".into(),
            orbit_center: Vector3::new(0.0, 0.0, 0.2),
            orbit_radius: 0.8,
            orbit_height: 1.4,
            orbit_deg_per_frame: 0.145,
            line_start: Vector3::new(0.0, -2.0, 0.5),
            line_end: Vector3::new(0.5, -2.0, 0.5),
            look_at: Vector3::zeros(),
            tracker: {
                let mut t = TrackerConfig::default();
                // frustum matched to the default room benchmark depth range
                t.vr.t_near = 0.5;
                t.vr.t_far = 2.9;
                t
            },
        }
    }
}

impl BenchGrid {
    fn parse(src: &str) -> Result<BenchGrid, String> {
        let mut grid = BenchGrid::default();
        let mut budget_mode = "fixed_iterations".to_string();
        let mut budget_values: Option<String> = None;
        for (key, value, line) in parse_key_values(src)? {
            let fail = |e: String| format!("line {line}: {key}: {e}");
            match key.as_str() {
                "methods" => {
                    grid.methods = value
                        .split(',')
                        .map(|m| m.trim().parse::<Method>())
                        .collect::<Result<_, _>>()
                        .map_err(fail)?;
                }
                "budget_mode" => budget_mode = value,
                "budgets" => budget_values = Some(value),
                "frames" => grid.frames = value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?,
                "seed" => grid.seed = value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?,
                "noise_std" => grid.noise_std = parse_f64(&value).map_err(fail)?,
                "rate" => grid.rate = parse_f64(&value).map_err(fail)?,
                "threshold" => grid.threshold = parse_f64(&value).map_err(fail)?,
                "width" => grid.width = value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?,
                "height" => grid.height = value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?,
                "fx" => grid.fx = parse_f64(&value).map_err(fail)?,
                "fy" => grid.fy = parse_f64(&value).map_err(fail)?,
                "cx" => grid.cx = Some(parse_f64(&value).map_err(fail)?),
                "cy" => grid.cy = Some(parse_f64(&value).map_err(fail)?),
                "traj" => grid.traj = value,
                "orbit_center" => grid.orbit_center = parse_vec3(&value).map_err(fail)?,
                "orbit_radius" => grid.orbit_radius = parse_f64(&value).map_err(fail)?,
                "orbit_height" => grid.orbit_height = parse_f64(&value).map_err(fail)?,
                "orbit_deg_per_frame" => {
                    grid.orbit_deg_per_frame = parse_f64(&value).map_err(fail)?
                }
                "line_start" => grid.line_start = parse_vec3(&value).map_err(fail)?,
                "line_end" => grid.line_end = parse_vec3(&value).map_err(fail)?,
                "look_at" => grid.look_at = parse_vec3(&value).map_err(fail)?,
                "n" => grid.tracker.n = value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?,
                "lambda_sdf" => grid.tracker.lambda_sdf = parse_f64(&value).map_err(fail)?,
                "lambda_color" => grid.tracker.lambda_color = parse_f64(&value).map_err(fail)?,
                "lr_position" => grid.tracker.lr_position = parse_f64(&value).map_err(fail)?,
                "lr_orientation" => grid.tracker.lr_orientation = parse_f64(&value).map_err(fail)?,
                "vr_n_pixels" => {
                    grid.tracker.vr.n_pixels = value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?
                }
                "vr_n_samples_per_ray" => {
                    grid.tracker.vr.n_samples_per_ray =
                        value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?
                }
                "vr_lambda_photo" => grid.tracker.vr.lambda_photo = parse_f64(&value).map_err(fail)?,
                "vr_lambda_depth" => grid.tracker.vr.lambda_depth = parse_f64(&value).map_err(fail)?,
                "vr_density_alpha" => grid.tracker.vr.density.alpha = parse_f64(&value).map_err(fail)?,
                "vr_density_s" => grid.tracker.vr.density.s = parse_f64(&value).map_err(fail)?,
                "vr_t_near" => grid.tracker.vr.t_near = parse_f64(&value).map_err(fail)?,
                "vr_t_far" => grid.tracker.vr.t_far = parse_f64(&value).map_err(fail)?,
                "vr_stratified" => {
                    grid.tracker.vr.stratified =
                        value.parse().map_err(|e: std::str::ParseBoolError| fail(e.to_string()))?
                }
                other => return Err(format!("line {line}: unknown grid key '{other}'")),
            }
        }
        if let Some(values) = budget_values {
            grid.budgets = values
                .split(',')
                .map(|v| {
                    let v = v.trim();
                    match budget_mode.as_str() {
                        "fixed_iterations" => v
                            .parse::<u32>()
                            .map(Budget::FixedIterations)
                            .map_err(|e| format!("budgets: {e}")),
                        "wall_clock_ms" => v
                            .parse::<f64>()
                            .map(Budget::WallClockMs)
                            .map_err(|e| format!("budgets: {e}")),
                        other => Err(format!("unknown budget_mode '{other}'")),
                    }
                })
                .collect::<Result<_, _>>()?;
        }
        Ok(grid)
    }

    fn budget_label(budget: &Budget) -> String {
        match budget {
            Budget::FixedIterations(n) => format!("iters{n}"),
            Budget::WallClockMs(ms) => format!("ms{ms}"),
        }
    }
}

fn parse_f64(value: &str) -> Result<f64, String> {
    value.parse().map_err(|e: std::num::ParseFloatError| e.to_string())
}

fn cmd_bench(args: BenchArgs) -> Result<(), String> {
    let grid_src = std::fs::read_to_string(&args.grid)
        .map_err(|e| format!("{}: {e}", args.grid.display()))?;
    let grid = BenchGrid::parse(&grid_src)?;
    grid.tracker.validate().map_err(|e| e.to_string())?;
    let scene = load_scene_file(&args.scene).map_err(|e| e.to_string())?;
    let scene_text = std::fs::read_to_string(&args.scene)
        .map_err(|e| format!("{}: {e}", args.scene.display()))?;
    let scene_name = args
        .scene
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene".into());

    std::fs::create_dir_all(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    let dataset_dir = args.out.join("dataset");

    let intrinsics = Intrinsics::new(
        grid.fx,
        grid.fy,
        grid.cx.unwrap_or(grid.width as f64 / 2.0),
        grid.cy.unwrap_or(grid.height as f64 / 2.0),
        grid.width,
        grid.height,
    )
    .map_err(|e| e.to_string())?;
    let spec = match grid.traj.as_str() {
        "orbit" => TrajectorySpec::Orbit {
            center: grid.orbit_center,
            radius: grid.orbit_radius,
            height: grid.orbit_height,
            degrees_per_frame: grid.orbit_deg_per_frame,
        },
        "line" => TrajectorySpec::Line {
            start: grid.line_start,
            end: grid.line_end,
            look_at: grid.look_at,
        },
        other => return Err(format!("unknown trajectory '{other}'")),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    generate_sequence(
        &scene,
        &spec,
        &intrinsics,
        grid.frames,
        &RenderParams::default(),
        grid.noise_std,
        &mut rng,
        &dataset_dir,
        grid.rate,
        Some(&scene_text),
    )
    .map_err(|e| e.to_string())?;
    let dataset = load_dataset(&dataset_dir).map_err(|e| e.to_string())?;
    let initial = *dataset.groundtruth.first_pose().expect("frames >= 2");

    let mut runs: Vec<TrackingRun> = Vec::new();
    let mut entries: Vec<CompareEntry> = Vec::new();
    for budget in &grid.budgets {
        for (mi, method) in grid.methods.iter().enumerate() {
            let mut cfg = grid.tracker.clone();
            cfg.budget = *budget;
            let label = BenchGrid::budget_label(budget);
            // one deterministic stream per run
            let run_seed = grid
                .seed
                .wrapping_add((entries.len() as u64 + mi as u64) << 32)
                .wrapping_add(entries.len() as u64);
            let mut run_rng = ChaCha8Rng::seed_from_u64(run_seed);
            let run = track_sequence(
                &scene,
                &dataset.frames,
                &dataset.intrinsics,
                &initial,
                *method,
                &cfg,
                grid.rate,
                &mut run_rng,
            );
            let traj = Trajectory::from_run(&run);
            let tum_path = args.out.join(format!("est_{method}_{label}.tum"));
            write_tum(&tum_path, &traj, grid.rate).map_err(|e| e.to_string())?;
            let report =
                ate_rmse(&traj, &dataset.groundtruth, grid.threshold).map_err(|e| e.to_string())?;
            entries.push(CompareEntry {
                scene: scene_name.clone(),
                budget_label: label,
                method: *method,
                ate_rmse: report.ate_rmse,
                max_error: report.max_error,
                failed: report.failed,
            });
            runs.push(run);
        }
    }

    // ATE grid with the better method marked per cell
    let rows = compare_report(&entries);
    let mut ate_csv = String::from("scene,budget,method,ate_rmse_m,max_error_m,failed,best\n");
    for row in &rows {
        let e = &row.entry;
        writeln!(
            ate_csv,
            "{},{},{},{},{},{},{}",
            e.scene, e.budget_label, e.method, e.ate_rmse, e.max_error, e.failed, row.best
        )
        .expect("string write");
    }
    let ate_path = args.out.join("ate_grid.csv");
    std::fs::write(&ate_path, &ate_csv).map_err(|e| format!("{}: {e}", ate_path.display()))?;

    // iteration statistics; wall-clock columns stay out of the CSV because
    // they are hardware-bound (reported on stdout below instead)
    let iter_rows = iteration_report(&runs);
    let mut iter_csv = String::from("method,n,budget,mean_iterations,mean_queries_per_iteration\n");
    for row in &iter_rows {
        writeln!(
            iter_csv,
            "{},{},{},{},{}",
            row.method,
            row.n,
            BenchGrid::budget_label(&row.budget),
            row.mean_iterations,
            row.mean_queries_per_iteration
        )
        .expect("string write");
    }
    let iter_path = args.out.join("iterations.csv");
    std::fs::write(&iter_path, &iter_csv).map_err(|e| format!("{}: {e}", iter_path.display()))?;

    // resolved grid config, relative paths only, for reproducibility
    let grid_out = args.out.join("bench.config");
    std::fs::write(&grid_out, &grid_src).map_err(|e| format!("{}: {e}", grid_out.display()))?;

    println!("scene = {scene_name}, frames = {}, seed = {}", grid.frames, grid.seed);
    println!("{}", ate_csv.trim_end());
    println!();
    println!("informational wall-clock statistics (hardware-bound, not in CSV):");
    for row in &iter_rows {
        println!(
            "  {} {} mean_iterations={:.2} mean_ms_per_iteration={:.3}",
            row.method,
            BenchGrid::budget_label(&row.budget),
            row.mean_iterations,
            row.mean_ms_per_iteration
        );
    }
    Ok(())
}
