use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lie_maps::burgers::{
    analytic_field, benchmark, build_stencil_map, fdm_step, step_field, BurgersConfig, Field,
};
use lie_maps::fit::fit_map;
use lie_maps::odebench::VdpSweep;
use lie_maps::{Backend, BuildOptions, Error, Exec, PolynomialMap, PolynomialSystem, TrajectoryDataset};
use serde_json::{json, Value};

use crate::{BenchBurgersArgs, BenchVdpArgs, BuildMapArgs, FitArgs, SimulateArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
    /// The run failed numerically after partial output was written.
    Diverged(usize),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) if e.is_numeric() => 2,
            CliError::Lib(_) => 1,
            CliError::Diverged(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Diverged(k) => write!(f, "diverged at step {k}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Fails early when an output file could not be created.
fn check_output(path: Option<&Path>) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    if path.is_dir() {
        return Err(CliError::Usage(format!("{}: is a directory", path.display())));
    }
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(CliError::Usage(format!("{}: no such directory", dir.display())))
        }
        _ => Ok(()),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    let io = |e: std::io::Error| CliError::Lib(Error::Io(e));
    match path {
        Some(p) => fs::write(p, text).map_err(io),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io),
    }
}

fn parse_with<T>(path: &Path, f: impl FnOnce(&str) -> lie_maps::Result<T>) -> Result<T> {
    let text = read_input(path)?;
    f(&text).map_err(|e| match e {
        // serde_json messages already carry the field and line/column
        Error::Json(j) => CliError::Usage(format!("{}: {j}", path.display())),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })
}

fn to_json(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Lib(Error::Json(e)))?;
    s.push('\n');
    Ok(s)
}

fn backend_json(b: Backend) -> Value {
    match b {
        Backend::Exponential { tol } => json!({ "kind": "exp", "tol": tol }),
        Backend::Rk4 { substeps } => json!({ "kind": "rk4", "substeps": substeps }),
        Backend::Euler { substeps } => json!({ "kind": "euler", "substeps": substeps }),
    }
}

pub fn build_map(a: &BuildMapArgs) -> Result<()> {
    check_output(a.output.as_deref())?;
    let sys = parse_with(&a.system, PolynomialSystem::from_json)?;
    let opts = BuildOptions { backend: a.backend.backend(), exec: a.exec.exec() };
    let map = lie_maps::build_map(&sys, a.dt, a.order, &opts)?;
    let mut text = map.to_json()?;
    text.push('\n');
    write_output(a.output.as_deref(), &text)?;
    // the map format is closed, so run parameters go to stderr
    let meta = json!({
        "command": "build-map",
        "system": a.system,
        "dt": a.dt,
        "order": a.order,
        "backend": backend_json(opts.backend),
        "parallel": opts.exec.is_parallel(),
    });
    eprintln!("{meta}");
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    check_output(a.output.as_deref())?;
    let map = parse_with(&a.map, PolynomialMap::from_json)?;
    if a.x0.len() != map.n() {
        return Err(CliError::Usage(format!(
            "--x0 has {} components, map expects {}",
            a.x0.len(),
            map.n()
        )));
    }
    let (traj, failure) = map.iterate_partial(&a.x0, a.steps)?;
    let mut text = traj.to_csv_string()?;
    let diverged = match failure {
        Some(Error::Diverged { step, .. }) => Some(step),
        Some(e) => return Err(e.into()),
        None => None,
    };
    if let Some(step) = diverged {
        text.push_str(&format!("# diverged at step {step}\n"));
    }
    write_output(a.output.as_deref(), &text)?;
    let meta = json!({ "command": "simulate", "map": a.map, "x0": a.x0, "steps": a.steps });
    eprintln!("{meta}");
    match diverged {
        Some(step) => Err(CliError::Diverged(step)),
        None => Ok(()),
    }
}

pub fn fit(a: &FitArgs) -> Result<()> {
    check_output(Some(&a.output))?;
    check_output(a.report.as_deref())?;
    let data = parse_with(&a.trajectory, |s| TrajectoryDataset::read_csv(s.as_bytes()))?;
    let (map, report) = fit_map(&data, a.order, a.ridge)?;
    let mut text = map.to_json()?;
    text.push('\n');
    write_output(Some(&a.output), &text)?;
    let out = json!({
        "command": "fit",
        "params": {
            "trajectory": a.trajectory,
            "order": a.order,
            "ridge": a.ridge,
            "dt": data.dt(),
            "samples": data.len(),
        },
        "report": report,
    });
    write_output(a.report.as_deref(), &to_json(&out)?)
}

pub fn bench_vdp(a: &BenchVdpArgs) -> Result<()> {
    check_output(a.output.as_deref())?;
    if a.orders.is_empty() || a.orders.contains(&0) {
        return Err(CliError::Usage("--orders needs one or more positive orders".into()));
    }
    let sweep = VdpSweep { dt: a.dt, t_end: a.t_end, reference_step: a.reference_step, ..VdpSweep::default() };
    let opts = BuildOptions { backend: a.backend.backend(), exec: a.exec.exec() };
    let refs = sweep.references(opts.exec)?;
    let rows = sweep.run(&a.orders, &opts, &refs)?;
    let out = json!({
        "command": "bench-vdp",
        "params": {
            "orders": a.orders,
            "dt": a.dt,
            "t_end": a.t_end,
            "reference_step": a.reference_step,
            "initial_conditions": sweep.ics,
            "backend": backend_json(opts.backend),
            "parallel": opts.exec.is_parallel(),
        },
        "metric": "mean over samples after the first of |pred - ref| / |ref|, averaged over initial conditions",
        "rows": rows,
    });
    write_output(a.output.as_deref(), &to_json(&out)?)
}

fn burgers_configs(a: &BenchBurgersArgs) -> (BurgersConfig, BurgersConfig) {
    let fdm = BurgersConfig::new(a.nu, a.nx, a.dt_fdm, a.t_end);
    let mut map = BurgersConfig::new(a.nu, a.nx, a.dt_map, a.t_end);
    map.halo = a.halo;
    map.expansion_order = a.expansion_order;
    map.map_order = a.map_order;
    (fdm, map)
}

pub fn bench_burgers(a: &BenchBurgersArgs) -> Result<()> {
    check_output(a.output.as_deref())?;
    if !a.snapshot_times.is_empty() {
        match &a.snapshot_dir {
            Some(d) if d.is_dir() => {}
            Some(d) => return Err(CliError::Usage(format!("{}: no such directory", d.display()))),
            None => return Err(CliError::Usage("--snapshot-times needs --snapshot-dir".into())),
        }
        if a.snapshot_times.iter().any(|&t| !(0.0..=a.t_end).contains(&t)) {
            return Err(CliError::Usage(format!("snapshot times must lie in [0, {}]", a.t_end)));
        }
    }
    let (fdm, map) = burgers_configs(a);
    let opts = BuildOptions { backend: a.backend.backend(), exec: a.exec.exec() };
    let report = benchmark(&fdm, &map, &opts)?;
    let mut out = serde_json::to_value(&report).map_err(|e| CliError::Lib(Error::Json(e)))?;
    out["command"] = json!("bench-burgers");
    out["params"] = json!({
        "nu": a.nu,
        "nx": a.nx,
        "t_end": a.t_end,
        "dt_fdm": a.dt_fdm,
        "dt_map": a.dt_map,
        "halo": a.halo,
        "expansion_order": a.expansion_order,
        "map_order": a.map_order,
        "backend": backend_json(opts.backend),
        "snapshot_times": a.snapshot_times,
    });
    if a.compare_sequential && opts.exec.is_parallel() {
        let seq = benchmark(&fdm, &map, &BuildOptions { exec: Exec::Sequential, ..opts })?;
        out["sequential_rows"] = serde_json::to_value(&seq.rows).map_err(|e| CliError::Lib(Error::Json(e)))?;
    }
    if let Some(dir) = a.snapshot_dir.as_deref().filter(|_| !a.snapshot_times.is_empty()) {
        let files = snapshots(&fdm, &map, &opts, &a.snapshot_times, dir)?;
        out["snapshots"] = json!(files);
    }
    write_output(a.output.as_deref(), &to_json(&out)?)
}

/// Reruns both methods untimed and writes `x,u` files at the requested times.
/// A method that has diverged writes no further snapshots.
fn snapshots(
    fdm: &BurgersConfig,
    map: &BurgersConfig,
    opts: &BuildOptions,
    times: &[f64],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut times = times.to_vec();
    times.sort_by(f64::total_cmp);
    let start = analytic_field(0.0, fdm.nx, fdm.nu);
    let mut files = Vec::new();
    let write = |name: String, f: &Field, files: &mut Vec<PathBuf>| -> Result<()> {
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::Lib(Error::Io(e)))?;
        f.write_csv(std::io::BufWriter::new(file))?;
        files.push(path);
        Ok(())
    };

    let mut u = start.u.clone();
    let mut next = vec![0.0; fdm.nx];
    let mut done = 0;
    'fdm: for &t in &times {
        let target = (t / fdm.dt).round() as usize;
        while done < target {
            fdm_step(&u, &mut next, fdm.nu, fdm.dt, fdm.dx(), opts.exec);
            std::mem::swap(&mut u, &mut next);
            done += 1;
            if u.iter().any(|v| !v.is_finite()) {
                break 'fdm;
            }
        }
        write(format!("fdm_t{t}.csv"), &Field::uniform(u.clone(), done as f64 * fdm.dt), &mut files)?;
    }

    let stencil = build_stencil_map(map, opts)?;
    let mut field = start;
    let mut done = 0;
    'map: for &t in &times {
        let target = (t / map.dt).round() as usize;
        while done < target {
            match step_field(&stencil, &field, opts.exec) {
                Ok(f) => field = f,
                Err(Error::NonFinite(_)) => break 'map,
                Err(e) => return Err(e.into()),
            }
            done += 1;
        }
        write(format!("map_t{t}.csv"), &field, &mut files)?;
    }
    Ok(files)
}
