//! `xbar`: sensing-margin, coincidence-error and leakage analysis for
//! memristive crossbar routers, plus router emulation and figure presets.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use xbar_core::analytic::{
    effective_onoff_ratio, i_sl_single_on, min_tolerance_for_perr, perr_analytic,
    tolerance_from_ratio, ErrorModelParams,
};
use xbar_core::io::{fmt_f64, read_matrix_csv, read_trains_csv, trace_table, CsvTable};
use xbar_core::sim::{emulate, gen_poisson_trains, perr_monte_carlo, RouteMode};
use xbar_core::solver::{
    calibrate_fet_leak, dense_oracle_solve, profile_from_solution, solve_channel, InstanceSpec,
};
use xbar_core::sweep::{
    design_rules, run_preset, run_sweep, DesignRuleQuery, SweepAxis, SweepSpec, SweepTable,
};
use xbar_core::{ensure_valid, CellState, ConfigDocument, Error};

#[derive(Parser)]
#[command(name = "xbar", version, about = "Memristive crossbar router analysis")]
struct Cli {
    /// JSON configuration document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration field, e.g. `device.r_off=1e6`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output file (or directory for `figures`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form margin and error probability for the configuration.
    Analytic,
    /// Solve one channel instance given as JSON.
    Solve(SolveArgs),
    /// Monte Carlo estimate of the coincidence error probability.
    Mc(McArgs),
    /// Route spike trains through a switch matrix.
    Emulate(EmulateArgs),
    /// Tabulate a parameter grid.
    Sweep(SweepArgs),
    /// Write the data behind a named figure preset.
    Figures { name: String },
    /// Chain traffic, tolerance and device ratio into a minimum R_off.
    DesignRules(DesignArgs),
    /// Split a measured channel leakage over its FETs.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Emit the per-row IR drop profile as CSV instead of JSON.
    #[arg(long)]
    csv: bool,
    /// Use the dense reference solver.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long = "f")]
    f: Option<f64>,
    #[arg(long)]
    t_pw: Option<f64>,
    #[arg(long)]
    m_tol: Option<u64>,
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Args)]
struct EmulateArgs {
    /// 0/1 grid, one word line per row.
    #[arg(long)]
    matrix: PathBuf,
    /// `input_index,start_s` records.
    #[arg(long, conflicts_with = "poisson")]
    trains: Option<PathBuf>,
    /// Poisson traffic, e.g. `f=732`.
    #[arg(long)]
    poisson: Option<String>,
    #[arg(long, default_value = "solver")]
    mode: String,
    #[arg(long)]
    t_pw: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// `path=v1,v2,...`; repeat for more axes, first varies slowest.
    #[arg(long = "axis")]
    axes: Vec<String>,
    /// margin | error | leak
    #[arg(long)]
    table: Option<String>,
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    n_rows: Option<usize>,
    /// Pulse width in seconds, or `us` / `ns`.
    #[arg(long)]
    t_pw: Option<String>,
    #[arg(long = "f")]
    f: Option<f64>,
    #[arg(long)]
    p_target: Option<f64>,
    #[arg(long)]
    r_on: Option<f64>,
    #[arg(long)]
    r_line: Option<f64>,
    #[arg(long)]
    r_t: Option<f64>,
    #[arg(long)]
    k_max: Option<f64>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 10e-9)]
    total_leak: f64,
    #[arg(long, default_value_t = 256)]
    n_fets: usize,
    #[arg(long)]
    v_read: Option<f64>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidConfig(_) | Error::UnknownParameter(_)) => 2,
        Some(Error::Infeasible(_)) => 3,
        Some(Error::UnknownPreset(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("starting worker pool")?;
    }
    let doc = load_config(&cli)?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Analytic => analytic(&doc),
        Command::Solve(args) => solve(&doc, &args, out),
        Command::Mc(args) => mc(&doc, &args),
        Command::Emulate(args) => emulate_cmd(&doc, &args, out),
        Command::Sweep(args) => sweep(&doc, &args, out, cli.seed.unwrap_or(doc.simulation.seed)),
        Command::Figures { name } => figures(&name, out, cli.seed.unwrap_or(doc.simulation.seed)),
        Command::DesignRules(args) => design(&doc, &args),
        Command::Calibrate(args) => calibrate(&doc, &args),
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<ConfigDocument> {
    let mut doc = match &cli.config {
        Some(path) => ConfigDocument::load(path)
            .map_err(|e| Error::InvalidConfig(vec![format!("{}: {e}", path.display())]))?,
        None => ConfigDocument::default(),
    };
    for assignment in &cli.sets {
        doc.set(assignment).map_err(|e| match e {
            Error::UnknownParameter(_) => e,
            other => Error::InvalidConfig(vec![other.to_string()]),
        })?;
    }
    if let Some(seed) = cli.seed {
        doc.simulation.seed = seed;
    }
    ensure_valid(&doc.channel_config())?;
    Ok(doc)
}

fn print_json(value: &Value) -> anyhow::Result<()> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

fn write_text(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn analytic(doc: &ConfigDocument) -> anyhow::Result<()> {
    let cfg = doc.channel_config();
    let sim = &doc.simulation;
    let margin = effective_onoff_ratio(&cfg);
    let params = ErrorModelParams::new(cfg.n_rows, sim.f_hz, sim.t_pw, sim.m_tol)?;
    print_json(&json!({
        "margin": margin,
        "i_sl_single_on_a": i_sl_single_on(&cfg),
        "series_parasitic_ohm": cfg.series_parasitic(),
        "m_tol_from_ratio": tolerance_from_ratio(margin.k_eff),
        "error": {
            "n_r": cfg.n_rows,
            "f_hz": sim.f_hz,
            "t_pw_s": sim.t_pw,
            "lambda": params.lambda(),
            "m_tol": sim.m_tol,
            "p_err": perr_analytic(&params),
            "min_m_tol_for_target": min_tolerance_for_perr(cfg.n_rows, sim.f_hz, sim.t_pw, sim.p_target)?,
            "p_target": sim.p_target,
        },
    }))
}

fn solve(doc: &ConfigDocument, args: &SolveArgs, out: Option<&Path>) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.instance)
        .with_context(|| format!("reading {}", args.instance.display()))?;
    let spec: InstanceSpec =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("instance: {e}")))?;
    if let Some(embedded) = &spec.config {
        ensure_valid(&embedded.channel_config())?;
    }
    let inst = spec.into_instance(&doc.channel_config())?;
    let sol = if args.oracle {
        dense_oracle_solve(&inst)?
    } else {
        solve_channel(&inst)?
    };
    if args.csv {
        let mut table = CsvTable::new(&[
            "row",
            "active",
            "state",
            "drive_drop_v",
            "sl_voltage_v",
            "ir_drop_v",
            "branch_current_a",
        ]);
        for p in profile_from_solution(&inst, &sol) {
            table.push(vec![
                p.row.to_string(),
                u8::from(p.active).to_string(),
                if p.state == CellState::On { "on" } else { "off" }.to_string(),
                fmt_f64(p.drive_drop),
                fmt_f64(p.sl_voltage),
                fmt_f64(p.ir_drop),
                fmt_f64(p.branch_current),
            ]);
        }
        return write_text(out, &table.to_csv_string());
    }
    let text = serde_json::to_string_pretty(&sol)? + "\n";
    write_text(out, &text)
}

fn mc(doc: &ConfigDocument, args: &McArgs) -> anyhow::Result<()> {
    let sim = &doc.simulation;
    let params = ErrorModelParams::new(
        args.n_r.unwrap_or(doc.channel.n_rows),
        args.f.unwrap_or(sim.f_hz),
        args.t_pw.unwrap_or(sim.t_pw),
        args.m_tol.unwrap_or(sim.m_tol),
    )?;
    let duration = args.duration.unwrap_or(sim.duration);
    let est = perr_monte_carlo(&params, duration, sim.seed)?;
    print_json(&json!({
        "params": params,
        "duration_s": duration,
        "lambda": params.lambda(),
        "p_analytic": perr_analytic(&params),
        "estimate": est,
    }))
}

fn poisson_rate(text: &str) -> anyhow::Result<f64> {
    let raw = text.strip_prefix("f=").unwrap_or(text);
    raw.trim()
        .parse()
        .map_err(|_| anyhow!("--poisson expects f=<rate in Hz>, got `{text}`"))
}

fn emulate_cmd(doc: &ConfigDocument, args: &EmulateArgs, out: Option<&Path>) -> anyhow::Result<()> {
    let matrix_file = fs::File::open(&args.matrix)
        .with_context(|| format!("reading {}", args.matrix.display()))?;
    let matrix = read_matrix_csv(matrix_file)?;
    let mode: RouteMode = args.mode.parse()?;
    let sim = &doc.simulation;
    let t_pw = args.t_pw.unwrap_or(sim.t_pw);
    let duration = args.duration.unwrap_or(sim.duration);
    let trains = match (&args.trains, &args.poisson) {
        (Some(path), _) => {
            let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
            read_trains_csv(file, matrix.n_wl(), t_pw, duration)?
        }
        (None, Some(spec)) => {
            gen_poisson_trains(matrix.n_wl(), poisson_rate(spec)?, t_pw, duration, sim.seed)?
        }
        (None, None) => bail!("emulate needs --trains or --poisson"),
    };
    let cfg = doc.channel_config().with_rows(matrix.n_wl());
    let trace = emulate(&matrix, &trains, &cfg, mode)?;
    let summary = json!({
        "n_wl": matrix.n_wl(),
        "n_ch": matrix.n_ch(),
        "pulses": trains.total_pulses(),
        "events": trace.events.len(),
        "channels_fired": trace.fired_channels(),
        "false_output": trace.false_output,
        "missed_output": trace.missed_output,
        "error_classes": trace.error_classes(),
        "passed": trace.is_passed(),
    });
    let csv = trace_table(&trace).to_csv_string();
    match out {
        Some(_) => {
            write_text(out, &csv)?;
            print_json(&summary)
        }
        None => {
            write_text(None, &csv)?;
            eprintln!("{}", serde_json::to_string(&summary)?);
            Ok(())
        }
    }
}

fn parse_axis(text: &str) -> anyhow::Result<SweepAxis> {
    let (path, values) = text
        .split_once('=')
        .ok_or_else(|| anyhow!("--axis expects path=v1,v2,..., got `{text}`"))?;
    let values = values
        .split(',')
        .map(|v| {
            let v = v.trim();
            serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))
        })
        .collect();
    Ok(SweepAxis {
        path: path.trim().to_string(),
        values,
    })
}

fn sweep(doc: &ConfigDocument, args: &SweepArgs, out: Option<&Path>, seed: u64) -> anyhow::Result<()> {
    let mut spec: SweepSpec = doc.sweep.clone();
    if !args.axes.is_empty() {
        spec.axes = args.axes.iter().map(|a| parse_axis(a)).collect::<anyhow::Result<_>>()?;
    }
    if let Some(table) = &args.table {
        spec.table = table.parse::<SweepTable>()?;
    }
    if args.preset.is_some() {
        spec.preset = args.preset.clone();
    }
    let out_path = out.map(Path::to_path_buf).or_else(|| spec.output.as_ref().map(PathBuf::from));
    if let Some(name) = &spec.preset {
        return figures(name, out_path.as_deref(), seed);
    }
    let table = run_sweep(&spec, doc).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::InvalidConfig(vec![msg]),
        other => other,
    })?;
    write_text(out_path.as_deref(), &table.to_csv_string())
}

fn figures(name: &str, out: Option<&Path>, seed: u64) -> anyhow::Result<()> {
    let output = run_preset(name, seed)?;
    let dir = out.unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    for (stem, table) in &output.tables {
        let path = dir.join(format!("{stem}.csv"));
        fs::write(&path, table.to_csv_string())
            .with_context(|| format!("writing {}", path.display()))?;
        files.push(path.display().to_string());
    }
    let sidecar = dir.join(format!("{name}.params.json"));
    fs::write(&sidecar, serde_json::to_string_pretty(&output.params)? + "\n")
        .with_context(|| format!("writing {}", sidecar.display()))?;
    files.push(sidecar.display().to_string());
    print_json(&json!({
        "preset": name,
        "files": files,
        "rows": output.tables.iter().map(|(_, t)| t.rows.len()).sum::<usize>(),
        "summary": output.summary,
    }))
}

fn pulse_width(text: &str) -> anyhow::Result<f64> {
    match text {
        "us" | "µs" => Ok(1e-6),
        "ns" => Ok(10e-9),
        other => other
            .parse()
            .map_err(|_| anyhow!("--t-pw expects seconds, `us` or `ns`, got `{other}`")),
    }
}

fn design(doc: &ConfigDocument, args: &DesignArgs) -> anyhow::Result<()> {
    let q = DesignRuleQuery {
        n_rows: args.n_rows.unwrap_or(doc.channel.n_rows),
        t_pw: args.t_pw.as_deref().map(pulse_width).transpose()?.unwrap_or(doc.simulation.t_pw),
        f_hz: args.f.unwrap_or(doc.simulation.f_hz),
        p_target: args.p_target.unwrap_or(doc.simulation.p_target),
        r_on: args.r_on.unwrap_or(doc.device.r_on),
        r_line: args.r_line.unwrap_or(doc.channel.r_line),
        r_t: args.r_t.unwrap_or(doc.transistor.r_t),
        k_max: args.k_max,
    };
    print_json(&serde_json::to_value(design_rules(&q)?)?)
}

fn calibrate(doc: &ConfigDocument, args: &CalibrateArgs) -> anyhow::Result<()> {
    let v_read = args.v_read.unwrap_or(doc.channel.v_read);
    let leak = calibrate_fet_leak(args.total_leak, args.n_fets, v_read)?;
    print_json(&json!({
        "total_leak_a": args.total_leak,
        "n_fets": args.n_fets,
        "v_read": v_read,
        "i_leak_per_fet": leak.i_leak_per_fet,
        "r_fet_off": if leak.r_fet_off.is_finite() { json!(leak.r_fet_off) } else { Value::Null },
    }))
}
