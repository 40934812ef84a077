use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use radsplit::adrt2::{drt_adjoint, drt_forward};
use radsplit::adrt3::{drt3_adjoint, drt3_forward};
use radsplit::dispinterp::{InterpOptions, SinogramDecomposition};
use radsplit::hypersolve::{
    advect_sinogram, boundary_decay_study, convergence_study, evolve_acoustic_sinograms,
    solve_acoustics_at, solve_transport_at, AcousticSinograms, DecayReference, InversionStats,
    Problem, SolveOptions, SolverConfig,
};
use radsplit::invert::{invert_drt, InvertOptions};
use radsplit::io::{self, GridFormat, SinogramFormat};
use radsplit::{prolong, Grid2D, Sinogram2D};
use serde_json::json;

use crate::error::{io_err, require_input, CliError, CliResult};
use crate::manifest::{sha256_hex, Manifest};
use crate::{
    ConvergenceArgs, DecayArgs, InterpArgs, InvertArgs, Operator, Reference, SolveArgs,
    StudyOptions, TransformArgs,
};

fn grid_format(path: &Path) -> CliResult<GridFormat> {
    GridFormat::from_path(path).ok_or_else(|| {
        CliError::usage(format!(
            "{}: expected a .csv, .rsg or .pgm grid",
            path.display()
        ))
    })
}

fn sinogram_format(path: &Path) -> CliResult<SinogramFormat> {
    SinogramFormat::from_path(path).ok_or_else(|| {
        CliError::usage(format!(
            "{}: expected a .rss or .csv sinogram",
            path.display()
        ))
    })
}

fn load_grid(path: &Path) -> CliResult<Grid2D> {
    require_input(path)?;
    Ok(io::load_grid(path, grid_format(path)?)?)
}

fn load_sinogram(path: &Path) -> CliResult<Sinogram2D> {
    require_input(path)?;
    Ok(io::load_sinogram(path, sinogram_format(path)?)?)
}

fn save_grid(g: &Grid2D, path: &Path) -> CliResult<()> {
    Ok(io::save_grid(g, path, grid_format(path)?)?)
}

fn save_sinogram(s: &Sinogram2D, path: &Path) -> CliResult<()> {
    Ok(io::save_sinogram(s, path, sinogram_format(path)?)?)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

fn invert_options(
    oversample_p: usize,
    tol: f64,
    max_iter: Option<usize>,
) -> CliResult<InvertOptions> {
    let opts = InvertOptions {
        oversample_p,
        tol,
        max_iter,
    };
    opts.validate()?;
    Ok(opts)
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn transform(a: &TransformArgs) -> CliResult<()> {
    require_input(&a.input)?;
    let start = Instant::now();
    let summary = match a.op {
        Operator::Fwd => {
            let g = load_grid(&a.input)?;
            let s = drt_forward(&g);
            save_sinogram(&s, &a.output)?;
            format!(
                "fwd: {n}x{n} grid -> 4 x {} x {n} sinogram",
                2 * s.n() - 1,
                n = s.n()
            )
        }
        Operator::Adj => {
            let s = load_sinogram(&a.input)?;
            let g = drt_adjoint(&s, a.half_width)?;
            save_grid(&g, &a.output)?;
            format!(
                "adj: 4 x {} x {n} sinogram -> {n}x{n} grid",
                2 * s.n() - 1,
                n = s.n()
            )
        }
        Operator::Fwd3 => {
            let g = io::load_grid3(&a.input)?;
            let s = drt3_forward(&g);
            io::save_sinogram3(&s, &a.output)?;
            format!(
                "fwd3: {n}^3 grid -> 16 x {} x {n} x {n} sinogram",
                3 * s.n() - 2,
                n = s.n()
            )
        }
        Operator::Adj3 => {
            let s = io::load_sinogram3(&a.input)?;
            let g = drt3_adjoint(&s, a.half_width)?;
            io::save_grid3(&g, &a.output)?;
            format!(
                "adj3: 16 x {} x {n} x {n} sinogram -> {n}^3 grid",
                3 * s.n() - 2,
                n = s.n()
            )
        }
    };
    println!("{summary} in {:.1} ms", ms(start));
    Ok(())
}

fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    output.with_file_name(name)
}

pub fn invert(a: &InvertArgs) -> CliResult<()> {
    let sino = load_sinogram(&a.input)?;
    let opts = invert_options(a.oversample_p, a.tol, a.max_iter)?;
    let f = opts.factor();
    let n = match a.n {
        Some(n) => n,
        None if sino.n() % f == 0 && sino.n() >= f => sino.n() / f,
        None => {
            return Err(CliError::usage(format!(
                "sinogram size {} is not a multiple of 2p = {f}",
                sino.n()
            )))
        }
    };
    let start = Instant::now();
    let r = invert_drt(&sino, n, a.half_width, &opts)?;
    save_grid(&r.grid, &a.output)?;
    let meta = json!({
        "n": n,
        "half_width": a.half_width,
        "oversample_p": a.oversample_p,
        "tol": a.tol,
        "max_iter": opts.max_iter_for(n),
        "iterations": r.iterations,
        "rel_residual": r.rel_residual,
        "converged": r.converged,
        "warning": (!r.converged).then_some("CG did not reach the tolerance"),
    });
    let meta_path = metadata_path(&a.output);
    write_text(&meta_path, &format!("{meta:#}\n"))?;
    if let Some(path) = &a.history {
        let mut csv = String::from("iteration,rel_residual\n");
        for (k, r) in r.history.iter().enumerate() {
            csv.push_str(&format!("{},{r:e}\n", k + 1));
        }
        write_text(path, &csv)?;
    }
    println!(
        "invert: n={n}, {} iterations, relative residual {:.3e}, {:.1} ms",
        r.iterations,
        r.rel_residual,
        ms(start)
    );
    if !r.converged {
        eprintln!(
            "warning: not converged to tol {:e}; result written anyway",
            a.tol
        );
    }
    Ok(())
}

fn time_label(t: f64) -> String {
    format!("t{t}")
}

fn record_stats(m: &mut Manifest, prefix: &str, s: &InversionStats) {
    m.push(format!("{prefix}.iterations"), s.iterations);
    m.push(
        format!("{prefix}.rel_residual"),
        format!("{:e}", s.rel_residual),
    );
    m.push(format!("{prefix}.converged"), s.converged);
}

struct Snapshot<'a> {
    name: &'static str,
    time: f64,
    grid: &'a Grid2D,
    sinogram: Option<Sinogram2D>,
}

fn write_snapshot(cfg: &SolverConfig, dir: &Path, s: &Snapshot) -> CliResult<Vec<PathBuf>> {
    let stem = format!("{}_{}", s.name, time_label(s.time));
    let mut written = Vec::new();
    let mut put = |path: PathBuf| {
        written.push(path.clone());
        path
    };
    if cfg.outputs.grids {
        save_grid(s.grid, &put(dir.join(format!("{stem}.rsg"))))?;
    }
    if cfg.outputs.csv {
        save_grid(s.grid, &put(dir.join(format!("{stem}.csv"))))?;
    }
    if cfg.outputs.pgm {
        save_grid(s.grid, &put(dir.join(format!("{stem}.pgm"))))?;
    }
    if let Some(sino) = &s.sinogram {
        save_sinogram(sino, &put(dir.join(format!("{stem}.rss"))))?;
    }
    Ok(written)
}

pub fn solve(a: &SolveArgs, threads: Option<usize>) -> CliResult<()> {
    require_input(&a.config)?;
    let text = fs::read(&a.config).map_err(|e| io_err(&a.config, e))?;
    let cfg = SolverConfig::from_json_str(&String::from_utf8_lossy(&text))?;
    create_dir(&a.out)?;
    let opts = cfg.solve_options();
    let times = cfg.times();
    let factor = 2 * cfg.oversample_p;

    let mut m = Manifest::new();
    m.push("config", a.config.display());
    m.push("config_sha256", sha256_hex(&text));
    m.push("problem", format!("{:?}", cfg.problem).to_lowercase());
    m.push("n", cfg.n);
    m.push("L", cfg.half_width);
    m.push("oversample_p", cfg.oversample_p);
    m.push("boundary", format!("{:?}", cfg.boundary));
    m.push("cg_tol", opts.invert.tol);
    m.push("cg_max_iter", opts.invert.max_iter_for(cfg.n));
    m.push(
        "threads",
        threads.map_or("default".to_string(), |k| k.to_string()),
    );

    let start = Instant::now();
    let mut files = Vec::new();
    let q0 = cfg.initial_field()?;
    match cfg.problem {
        Problem::Transport => {
            let theta = cfg.theta.expect("validated");
            m.push("theta", format!("{} {}", theta[0], theta[1]));
            let sols = solve_transport_at(&q0, theta, &times, &opts)?;
            let sino0 = cfg
                .outputs
                .sinograms
                .then(|| drt_forward(&prolong(&q0, factor).expect("valid factor")));
            for sol in &sols {
                record_stats(&mut m, &format!("{}.q", time_label(sol.time)), &sol.stats);
                let sinogram = sino0
                    .as_ref()
                    .map(|s| advect_sinogram(s, theta, sol.time, cfg.half_width, cfg.boundary));
                let snap = Snapshot {
                    name: "q",
                    time: sol.time,
                    grid: &sol.grid,
                    sinogram,
                };
                files.extend(write_snapshot(&cfg, &a.out, &snap)?);
            }
        }
        Problem::Acoustics => {
            m.push("K0", cfg.k0);
            m.push("rho0", cfg.rho0);
            let state = cfg.initial_state()?;
            let sols = solve_acoustics_at(&state, cfg.material(), &times, &opts)?;
            let sino0 = match cfg.outputs.sinograms {
                true => Some(AcousticSinograms::from_state(&state, factor)?),
                false => None,
            };
            for sol in &sols {
                let ev = sino0.as_ref().map(|s| {
                    evolve_acoustic_sinograms(
                        s,
                        cfg.material(),
                        sol.time,
                        cfg.half_width,
                        cfg.boundary,
                    )
                });
                let parts = [
                    ("p", &sol.state.p),
                    ("u", &sol.state.u),
                    ("v", &sol.state.v),
                ];
                for (k, (name, grid)) in parts.into_iter().enumerate() {
                    record_stats(
                        &mut m,
                        &format!("{}.{name}", time_label(sol.time)),
                        &sol.stats[k],
                    );
                    let sinogram = ev.as_ref().map(|e| [&e.p, &e.u, &e.v][k].clone());
                    let snap = Snapshot {
                        name,
                        time: sol.time,
                        grid,
                        sinogram,
                    };
                    files.extend(write_snapshot(&cfg, &a.out, &snap)?);
                }
            }
        }
    }
    let manifest_path = a.out.join("manifest.csv");
    m.write(&manifest_path)?;
    println!(
        "solve: {} output times, {} files, {:.1} ms; manifest {}",
        times.len(),
        files.len(),
        ms(start),
        manifest_path.display()
    );
    Ok(())
}

/// `8..256` (powers of two, inclusive) or `8,16,32`.
pub fn parse_sizes(spec: &str) -> CliResult<Vec<usize>> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CliError::usage(format!("not a grid size: {s:?}")))
    };
    let sizes = match spec.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if !lo.is_power_of_two() || !hi.is_power_of_two() || lo > hi {
                return Err(CliError::usage(format!(
                    "{spec}: range ends must be powers of two, low first"
                )));
            }
            std::iter::successors(Some(lo), |&n| Some(2 * n))
                .take_while(|&n| n <= hi)
                .collect()
        }
        None => spec.split(',').map(num).collect::<CliResult<Vec<_>>>()?,
    };
    if let Some(bad) = sizes.iter().find(|n| !n.is_power_of_two() || **n < 2) {
        return Err(CliError::usage(format!(
            "grid size {bad} is not a power of two of at least 2"
        )));
    }
    Ok(sizes)
}

fn study_options(o: &StudyOptions) -> CliResult<SolveOptions> {
    Ok(SolveOptions {
        oversample_p: o.oversample_p,
        invert: invert_options(o.oversample_p, o.tol, o.max_iter)?,
        ..SolveOptions::default()
    })
}

fn emit_csv(csv: &str, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => write_text(path, csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn convergence(a: &ConvergenceArgs) -> CliResult<()> {
    let ns = parse_sizes(&a.ns)?;
    if !(a.t >= 0.0 && a.t.is_finite()) {
        return Err(CliError::usage(format!(
            "--T must be non-negative, got {}",
            a.t
        )));
    }
    let table = convergence_study(&ns, a.t, &study_options(&a.opts)?)?;
    emit_csv(&table.to_csv(), &a.opts.out)?;
    for (n, o1, o2) in table.orders() {
        eprintln!("order at n={n}: L1 {o1:.3}, L2 {o2:.3}");
    }
    Ok(())
}

fn decay_times(a: &DecayArgs) -> CliResult<Vec<f64>> {
    if let Some(times) = &a.times {
        return Ok(times.clone());
    }
    if !(a.dt > 0.0 && a.t > 0.0 && a.t.is_finite()) {
        return Err(CliError::usage("--dt and --T must be positive"));
    }
    let steps = (a.t / a.dt + 1e-9).floor() as usize;
    Ok((1..=steps).map(|k| k as f64 * a.dt).collect())
}

pub fn boundary_decay(a: &DecayArgs) -> CliResult<()> {
    let times = decay_times(a)?;
    let reference = match a.reference {
        Reference::Wide => DecayReference::WideDomain,
        Reference::Radial => DecayReference::Radial,
    };
    let series = boundary_decay_study(&times, a.n, reference, &study_options(&a.opts)?)?;
    emit_csv(&series.to_csv(), &a.opts.out)?;
    if let Some(peak) = series.peak() {
        eprintln!("peak L1 {:.4e} at t={}", peak.l1_full, peak.t);
        match series.slope_after(peak.t) {
            Some(slope) => eprintln!("log-log slope after the peak: {slope:.3}"),
            None => eprintln!("too few positive points after the peak for a slope"),
        }
    }
    Ok(())
}

pub fn interp(a: &InterpArgs) -> CliResult<()> {
    if let Some(bad) = a.tau.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(CliError::usage(format!(
            "tau must lie in [0, 1], got {bad}"
        )));
    }
    if !["csv", "rsg", "pgm"].contains(&a.format.as_str()) {
        return Err(CliError::usage(format!(
            "unknown grid format {:?}",
            a.format
        )));
    }
    let q1 = load_grid(&a.first)?;
    let q2 = load_grid(&a.second)?;
    let opts = InterpOptions {
        oversample_p: a.oversample_p,
        k_max: a.k_max,
        tol: a.fit_tol,
        invert: invert_options(a.oversample_p, a.tol, a.max_iter)?,
    };
    create_dir(&a.out)?;
    let start = Instant::now();
    let dec = SinogramDecomposition::new(&q1, &q2, &opts)?;
    write_text(&a.out.join("decomposition.csv"), &dec.to_csv())?;
    for &tau in &a.tau {
        let r = dec.interpolate(tau)?;
        let path = a.out.join(format!("interp_tau{tau}.{}", a.format));
        save_grid(&r.grid, &path)?;
        println!(
            "tau={tau}: {} CG iterations, relative residual {:.3e} -> {}",
            r.stats.iterations,
            r.stats.rel_residual,
            path.display()
        );
        if !r.stats.converged {
            eprintln!("warning: inversion at tau={tau} did not converge");
        }
    }
    println!("interp: {} slices, {:.1} ms", dec.slices().len(), ms(start));
    Ok(())
}
