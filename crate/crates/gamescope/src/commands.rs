//! `demo`, `train` and `diagnose`.

use std::path::{Path, PathBuf};

use gamescope_core::diagnostics::{
    aggregate_endpoints, classify, game_jacobian_spectrum_with, path_angle, player_hessian_spectrum_with,
    select_endpoints, ClassifyOptions, PathAngleProfile, StationaryPointReport,
};
use gamescope_core::dynamics::{run_training, Checkpoint, Trajectory};
use gamescope_core::games::{field_at, Game, JointState, Player};
use gamescope_core::numerics::{norm2, Spectrum};
use rayon::prelude::*;

use crate::checkpoint;
use crate::config::Config;
use crate::error::{AppError, Result};
use crate::formats::{
    dataset_bytes, fmt_num, params_table, path_angle_table, report_kv, spectrum_table, trajectory_table,
    write_bytes, KvFile, Table,
};
use crate::plots;
use crate::setup::{self, GameKind};
use crate::svg::{Arrow, SvgPlot};

/// Relative field-norm reduction that counts as converged.
pub const CONVERGED_RATIO: f64 = 0.1;

/// Files of a run directory.
pub const CONFIG_FILE: &str = "config.resolved";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const CHECKPOINT_DIR: &str = "checkpoints";

fn prepare_out(out: &Path, cfg: &Config) -> Result<()> {
    std::fs::create_dir_all(out).map_err(AppError::io(out))?;
    write_bytes(&out.join(CONFIG_FILE), cfg.to_text().as_bytes())
}

fn write_svg(path: &Path, plot: &SvgPlot) -> Result<()> {
    write_bytes(path, plot.render().as_bytes())
}

fn classify_options(cfg: &Config, reference_norm: f64) -> Result<ClassifyOptions> {
    let eps_stat = cfg.f64("eps_stat", 1e-2)?;
    let eps_eig = cfg.f64("eps_eig", 1e-6)?;
    if eps_stat < 0.0 || eps_eig < 0.0 {
        return Err(AppError::usage("eps_stat and eps_eig must be non-negative"));
    }
    Ok(ClassifyOptions {
        eps_stat: eps_stat * reference_norm,
        eps_eig,
        k: cfg.usize("k", 20)?,
        spectrum: setup::spectrum_options(cfg)?,
    })
}

fn write_report(out: &Path, r: &StationaryPointReport) -> Result<()> {
    write_bytes(&out.join("report.txt"), r.to_string().as_bytes())?;
    report_kv(r).write(&out.join("report.kv"))
}

fn write_spectrum(out: &Path, name: &str, s: &Spectrum, title: &str) -> Result<()> {
    spectrum_table(s).write(&out.join(format!("{name}.csv")))?;
    write_svg(&out.join(format!("{name}.svg")), &plots::eigen_scatter(s, title))
}

fn write_path_angle(out: &Path, p: &PathAngleProfile, title: &str) -> Result<()> {
    path_angle_table(p).write(&out.join("path_angle.csv"))?;
    write_svg(&out.join("path_angle.svg"), &plots::path_angle(p, title))
}

fn offset_state(point: &JointState, offset: &[f64]) -> Result<JointState> {
    if offset.len() != point.values().len() {
        return Err(AppError::format(format!("offset of length {}, game has {}", offset.len(), point.values().len())));
    }
    Ok(point.with_values(point.values().iter().zip(offset).map(|(a, b)| a + b).collect())?)
}

/// Descent direction `−v` on a grid around `center` in its first two
/// coordinates; the rest are held at `center`.
fn quiver_table<G: Game + ?Sized>(g: &G, center: &[f64], half_width: f64) -> Result<(Table, Vec<Arrow>)> {
    const N: usize = 15;
    let mut t = Table::new(["x", "y", "u", "v"]);
    let mut arrows = Vec::with_capacity(N * N);
    for i in 0..N {
        for j in 0..N {
            let mut w = center.to_vec();
            w[0] += half_width * (2.0 * i as f64 / (N - 1) as f64 - 1.0);
            w[1] += half_width * (2.0 * j as f64 / (N - 1) as f64 - 1.0);
            let v = field_at(g, &w)?;
            let a = Arrow { x: w[0], y: w[1], u: -v[0], v: -v[1] };
            t.push(vec![fmt_num(a.x), fmt_num(a.y), fmt_num(a.u), fmt_num(a.v)]);
            arrows.push(a);
        }
    }
    Ok((t, arrows))
}

/// Classification report, full spectrum, path-angle and (for two or three
/// parameters) a quiver of the field for one of the small games.
pub fn demo(cfg: &Config, out: &Path) -> Result<()> {
    let kind = GameKind::parse(cfg.str("game", ""))?;
    if kind.is_gan() {
        return Err(AppError::usage("demo takes a small game; use train for GANs"));
    }
    let g = setup::toy_game(kind, cfg)?;
    let part = g.partition();
    let vector = |k: &str| cfg.vector(k)?.ok_or_else(|| AppError::usage(format!("missing '{k}'")));
    let point = JointState::from_flat(vector("point")?, part)?;
    let start = JointState::from_flat(vector("start")?, part)?;
    let end = offset_state(&point, &vector("end_offset")?)?;
    prepare_out(out, cfg)?;

    let reference = norm2(&field_at(&*g, start.values())?);
    let opts = classify_options(cfg, reference)?;
    let report = classify(&*g, &point, &opts)?;
    write_report(out, &report)?;

    let mut dense = opts.spectrum.clone();
    dense.dense = true;
    let full = game_jacobian_spectrum_with(&*g, &point, part.n(), &dense)?;
    write_spectrum(out, "spectrum", &full, &format!("{}: Jacobian eigenvalues", kind.as_str()))?;

    let profile = path_angle(&*g, &start, &end, &setup::grid(cfg)?, setup::angle_sign(cfg)?)?;
    write_path_angle(out, &aggregate_endpoints(&[profile])?, &format!("{}: path-angle", kind.as_str()))?;

    if (2..=3).contains(&part.n()) {
        let half = (0..2).map(|i| (start.values()[i] - point.values()[i]).abs()).fold(1.0, f64::max) * 1.5;
        let (table, arrows) = quiver_table(&*g, point.values(), half)?;
        table.write(&out.join("quiver.csv"))?;
        let plot = plots::quiver(arrows, ("w0", "w1"), &format!("{}: vector field", kind.as_str()));
        write_svg(&out.join("quiver.svg"), &plot)?;
    }
    Ok(())
}

/// Population variance of the last tenth of `norms` (at least two values).
pub fn tail_variance(norms: &[f64]) -> f64 {
    let m = (norms.len() / 10).max(2).min(norms.len());
    let tail = &norms[norms.len() - m..];
    if tail.is_empty() {
        return 0.0;
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    tail.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / tail.len() as f64
}

fn checkpoint_name(iteration: u64) -> String {
    format!("{CHECKPOINT_DIR}/iter_{iteration:08}.ckpt")
}

/// Outcome of a training run as written to `summary.kv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub initial_norm: f64,
    pub final_norm: f64,
    pub relative_norm: f64,
    pub tail_variance: f64,
    pub diverged: bool,
    pub converged: bool,
}

/// Trains a GAN and writes the dataset, checkpoints, trajectory and norm
/// trace. A diverged run still writes everything before failing.
pub fn train(cfg: &Config, out: &Path) -> Result<TrainSummary> {
    let GameKind::Gan(loss) = GameKind::parse(cfg.str("game", "nsgan"))? else {
        return Err(AppError::usage("train needs a GAN game (nsgan, wgangp or wganclip)"));
    };
    let opt = setup::optimizer(cfg)?;
    let mut run = setup::gan_setup(loss, cfg)?;
    prepare_out(out, cfg)?;
    write_bytes(&out.join("dataset.csv"), &dataset_bytes(&run.data)?)?;

    let traj = run_training(&mut run.game, &opt, &run.init)?;
    std::fs::create_dir_all(out.join(CHECKPOINT_DIR)).map_err(AppError::io(out.join(CHECKPOINT_DIR)))?;
    let mut files = Vec::with_capacity(traj.len());
    for (i, c) in traj.checkpoints.iter().enumerate() {
        let state = traj.state(i).expect("training trajectories carry a layout");
        let name = checkpoint_name(c.iteration);
        checkpoint::save(&out.join(&name), state.omega())?;
        files.push(Some(name));
    }
    trajectory_table(&traj, &files).write(&out.join(TRAJECTORY_FILE))?;
    let title = format!("{} / {}: field norm", loss.as_str(), opt.kind.as_str());
    write_svg(&out.join("norm_trace.svg"), &plots::norm_trace(&traj, &title))?;
    let last = traj.last().expect("training records iteration 0");
    if let Some(state) = traj.state(traj.len() - 1) {
        params_table(state.omega()).write(&out.join("final_params.csv"))?;
    }

    let norms = traj.norms();
    let initial_norm = norms[0];
    let summary = TrainSummary {
        initial_norm,
        final_norm: last.field_norm,
        relative_norm: last.field_norm / initial_norm,
        tail_variance: tail_variance(&norms),
        diverged: traj.diverged,
        converged: !traj.diverged && last.field_norm <= CONVERGED_RATIO * initial_norm,
    };
    let mut kv = KvFile::default();
    kv.push("game", loss.as_str());
    kv.push("optimizer", opt.kind.as_str());
    kv.push("last_iteration", last.iteration);
    kv.push("checkpoints", traj.len());
    kv.push("diverged", summary.diverged);
    kv.push("converged", summary.converged);
    kv.num("initial_norm", summary.initial_norm);
    kv.num("final_norm", summary.final_norm);
    kv.num("relative_norm", summary.relative_norm);
    kv.num("tail_variance", summary.tail_variance);
    if !traj.diverged {
        let (lg, ld) = run.game.loss_values(&last.omega)?;
        kv.num("loss_generator", lg);
        kv.num("loss_discriminator", ld);
    }
    kv.write(&out.join("summary.kv"))?;

    if traj.diverged {
        return Err(AppError::Divergence(format!(
            "training diverged after iteration {}; partial artifacts are in {}",
            last.iteration,
            out.display()
        )));
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum What {
    PathAngle,
    Spectrum,
    Hessians,
    Classify,
    All,
}

/// A trained run read back from disk.
pub struct LoadedRun {
    pub trajectory: Trajectory,
    pub init: JointState,
}

/// Reads `trajectory.csv` and its checkpoints, checking each layout
/// against `template`.
pub fn load_run(dir: &Path, template: &JointState) -> Result<LoadedRun> {
    let table = Table::read(&dir.join(TRAJECTORY_FILE))?;
    let col = |name: &str| table.column(name).ok_or_else(|| AppError::format(format!("trajectory: missing '{name}'")));
    let (iters, norms, files) = (col("iteration")?, col("grad_norm")?, col("checkpoint")?);
    let mut checkpoints = Vec::new();
    for ((it, nm), file) in iters.iter().zip(&norms).zip(&files) {
        if file.is_empty() {
            continue;
        }
        let iteration = it.parse().map_err(|_| AppError::format(format!("trajectory: bad iteration '{it}'")))?;
        let field_norm = nm.parse().map_err(|_| AppError::format(format!("trajectory: bad norm '{nm}'")))?;
        let omega = checkpoint::load_matching(&dir.join(file), template.omega().layout())?.into_values();
        checkpoints.push(Checkpoint { iteration, omega, field_norm });
    }
    let first = checkpoints.first().ok_or_else(|| AppError::format("trajectory has no checkpoints"))?;
    if first.iteration != 0 {
        return Err(AppError::format("trajectory does not record the initial state"));
    }
    let init = template.with_values(first.omega.clone())?;
    let cadence = checkpoints.get(1).map_or(1, |c| c.iteration);
    let trajectory = Trajectory::from_checkpoints(checkpoints, cadence, 0.0, false, Some(template.clone()))?;
    Ok(LoadedRun { trajectory, init })
}

/// Game and states a diagnosis works on.
struct Subject {
    game: Box<dyn Game>,
    /// Point for spectra and classification.
    point: JointState,
    /// Start and end points of the path-angle segments.
    start: JointState,
    ends: Vec<JointState>,
    end_iterations: Vec<Option<u64>>,
    fallback: bool,
}

fn subject(cfg: &Config, run: Option<&Path>, ckpt: Option<&Path>) -> Result<Subject> {
    let kind = GameKind::parse(cfg.str("game", "nsgan"))?;
    let (game, template): (Box<dyn Game>, JointState) = match kind {
        GameKind::Gan(loss) => {
            let s = setup::gan_setup(loss, cfg)?;
            (Box::new(s.game), s.init)
        }
        _ => {
            let g = setup::toy_game(kind, cfg)?;
            let point = cfg.vector("point")?.ok_or_else(|| AppError::usage("missing 'point'"))?;
            let state = JointState::from_flat(point, g.partition())?;
            (g, state)
        }
    };
    let load_point = |p: &Path| -> Result<JointState> {
        let v = checkpoint::load(p)?;
        if v.len() != template.values().len() || (kind.is_gan() && v.layout() != template.omega().layout()) {
            return Err(AppError::format(format!("{}: parameter layout does not match the game", p.display())));
        }
        Ok(template.with_values(v.into_values())?)
    };

    if let Some(dir) = run {
        let loaded = load_run(dir, &template)?;
        let traj = &loaded.trajectory;
        // Endpoints come from after the initial state, which is the segment start.
        let later = Trajectory::from_checkpoints(
            traj.checkpoints[1..].to_vec(),
            traj.cadence,
            traj.step_size,
            traj.diverged,
            Some(template.clone()),
        )?;
        if later.is_empty() {
            return Err(AppError::usage("run has no checkpoint past the initial state"));
        }
        let count = cfg.usize("endpoints", 5)?.min(later.len());
        let eps = cfg.f64("eps_stat", 1e-2)? * traj.checkpoints[0].field_norm;
        let sel = select_endpoints(&later, count, eps)?;
        let (ends, end_iterations): (Vec<_>, Vec<_>) = sel
            .states
            .into_iter()
            .zip(sel.iterations)
            .filter(|(s, _)| s.values() != loaded.init.values())
            .map(|(s, i)| (s, Some(i)))
            .unzip();
        let point = match ckpt {
            Some(p) => load_point(p)?,
            None => ends.last().cloned().ok_or_else(|| AppError::usage("run has no checkpoint past the initial state"))?,
        };
        return Ok(Subject { game, point, start: loaded.init, ends, end_iterations, fallback: sel.fallback });
    }
    if kind.is_gan() {
        let p = ckpt.ok_or_else(|| AppError::usage("diagnosing a GAN needs --run or --checkpoint"))?;
        let point = load_point(p)?;
        let init = template;
        return Ok(Subject { game, start: init, ends: vec![point.clone()], end_iterations: vec![None], point, fallback: false });
    }
    let point = match ckpt {
        Some(p) => load_point(p)?,
        None => template,
    };
    let start = match cfg.vector("start")? {
        Some(v) => JointState::from_flat(v, point.partition())?,
        None => {
            let mut v = point.values().to_vec();
            v[0] += 1.0;
            point.with_values(v)?
        }
    };
    let end = match cfg.vector("end_offset")? {
        Some(o) => offset_state(&point, &o)?,
        None => point.clone(),
    };
    Ok(Subject { game, point, start, ends: vec![end], end_iterations: vec![None], fallback: false })
}

/// Path-angle, spectra and classification on a trained run, a single
/// checkpoint, or a small game's configured point.
pub fn diagnose(cfg: &Config, what: What, run: Option<&Path>, ckpt: Option<&Path>, out: &Path) -> Result<()> {
    let s = subject(cfg, run, ckpt)?;
    prepare_out(out, cfg)?;
    let g = &*s.game;
    let name = g.name().to_string();
    let k = cfg.usize("k", 20)?;
    let sopts = setup::spectrum_options(cfg)?;
    let all = what == What::All;

    if all || what == What::PathAngle {
        if s.ends.is_empty() {
            return Err(AppError::usage("no path endpoints distinct from the initial state"));
        }
        let grid = setup::grid(cfg)?;
        let sign = setup::angle_sign(cfg)?;
        let profiles = s
            .ends
            .par_iter()
            .map(|end| path_angle(g, &s.start, end, &grid, sign))
            .collect::<Result<Vec<_>, _>>()?;
        write_path_angle(out, &aggregate_endpoints(&profiles)?, &format!("{name}: path-angle"))?;
        let mut t = Table::new(["endpoint", "iteration", "grad_norm", "fallback"]);
        for (i, (e, it)) in s.ends.iter().zip(&s.end_iterations).enumerate() {
            let norm = norm2(&field_at(g, e.values())?);
            t.push(vec![i.to_string(), it.map(|x| x.to_string()).unwrap_or_default(), fmt_num(norm), s.fallback.to_string()]);
        }
        t.write(&out.join("endpoints.csv"))?;
    }
    if all || what == What::Spectrum {
        let spec = game_jacobian_spectrum_with(g, &s.point, k, &sopts)?;
        write_spectrum(out, "spectrum", &spec, &format!("{name}: Jacobian eigenvalues"))?;
    }
    if all || what == What::Hessians {
        for p in [Player::Generator, Player::Discriminator] {
            let h = player_hessian_spectrum_with(g, &s.point, p, k, &sopts)?;
            write_spectrum(out, &format!("hessian_{}", p.as_str()), &h, &format!("{name}: {} Hessian", p.as_str()))?;
        }
    }
    if all || what == What::Classify {
        let reference = norm2(&field_at(g, s.start.values())?);
        let report = classify(g, &s.point, &classify_options(cfg, reference)?)?;
        write_report(out, &report)?;
    }
    Ok(())
}

/// Run directory given on the command line, if any.
pub fn run_config(run: Option<&PathBuf>) -> Result<Option<Config>> {
    run.map(|d| Config::load(&d.join(CONFIG_FILE))).transpose()
}
