//! Resolving configs and building games, optimizers and diagnostics options
//! from them.

use gamescope_core::diagnostics::{AngleSign, PathGrid, SpectrumOptions};
use gamescope_core::dynamics::{OptimizerConfig, OptimizerKind};
use gamescope_core::games::{
    make_bilinear, make_example1, make_example2, make_linear_game, Archetype, Game, JointState, LinearGame,
    LinearGameSpec,
};
use gamescope_core::gan::{init_params, make_gan_game, sample_mog, GanGame, GanLoss, LatentBank, MogDataset, Preset};
use gamescope_core::numerics::DenseMatrix;

use crate::config::Config;
use crate::error::{AppError, Result};
use crate::formats::fmt_num;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameKind {
    Example1,
    Example2,
    Bilinear,
    Archetype(Archetype),
    /// Blocks from the `s1`, `s2`, `a`, `b`, `center` keys.
    Linear,
    Gan(GanLoss),
}

impl GameKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "example1" => GameKind::Example1,
            "example2" => GameKind::Example2,
            "bilinear" => GameKind::Bilinear,
            "linear" => GameKind::Linear,
            "linear:attraction" => GameKind::Archetype(Archetype::Attraction),
            "linear:rotation" => GameKind::Archetype(Archetype::Rotation),
            "linear:mixed" => GameKind::Archetype(Archetype::Mixed),
            "nsgan" => GameKind::Gan(GanLoss::Nsgan),
            "wgangp" | "wgan_gp" => GameKind::Gan(GanLoss::WganGp),
            "wganclip" | "wgan_clip" => GameKind::Gan(GanLoss::WganClip),
            _ => return Err(AppError::usage(format!("unknown game '{s}'"))),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::Example1 => "example1",
            GameKind::Example2 => "example2",
            GameKind::Bilinear => "bilinear",
            GameKind::Linear => "linear",
            GameKind::Archetype(Archetype::Attraction) => "linear:attraction",
            GameKind::Archetype(Archetype::Rotation) => "linear:rotation",
            GameKind::Archetype(Archetype::Mixed) => "linear:mixed",
            GameKind::Gan(GanLoss::Nsgan) => "nsgan",
            GameKind::Gan(GanLoss::WganGp) => "wgangp",
            GameKind::Gan(GanLoss::WganClip) => "wganclip",
        }
    }

    pub fn is_gan(self) -> bool {
        matches!(self, GameKind::Gan(_))
    }

    /// Rotational toys get an endpoint nudged off the fixed point so the
    /// path-angle shows its bump.
    fn rotational(self) -> bool {
        matches!(self, GameKind::Bilinear | GameKind::Archetype(Archetype::Rotation | Archetype::Mixed))
    }
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind> {
    Ok(match s {
        "gd" => OptimizerKind::Gd,
        "eg" | "extragradient" => OptimizerKind::Extragradient,
        "adam" => OptimizerKind::Adam,
        "extraadam" | "extra_adam" => OptimizerKind::ExtraAdam,
        _ => return Err(AppError::usage(format!("unknown optimizer '{s}'"))),
    })
}

pub fn preset(cfg: &Config, loss: GanLoss) -> Result<Preset> {
    match cfg.str("preset", "ci") {
        "ci" => Ok(Preset::ci(loss)),
        "paper" => Ok(Preset::paper(loss)),
        p => Err(AppError::usage(format!("unknown preset '{p}' (expected paper or ci)"))),
    }
}

fn vec_str(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(", ")
}

/// Layers preset defaults, then `file`, then `cli`, and fills every key
/// the run reads so the result fully determines it.
pub fn resolve(file: &Config, cli: &Config) -> Result<Config> {
    let mut given = file.clone();
    given.merge(cli);
    let kind = GameKind::parse(given.str("game", "nsgan"))?;

    let mut out = Config::new();
    let mut d = |k: &str, v: String| out.set_default(k, v);
    d("seed", "0".into());
    d("grid_a", "0".into());
    d("grid_b", "1.2".into());
    d("grid_points", "120".into());
    d("k", "20".into());
    d("eps_stat", "0.01".into());
    d("eps_eig", "0.000001".into());
    d("angle_sign", "descent".into());
    d("dense", "false".into());
    if let GameKind::Gan(loss) = kind {
        let p = preset(&given, loss)?;
        let iters = given.u64("iters", p.iterations)?;
        d("preset", given.str("preset", "ci").into());
        d("samples", p.samples.to_string());
        d("iters", iters.to_string());
        d("latent_dim", p.gan.latent_dim.to_string());
        d("hidden_dim", p.gan.hidden_dim.to_string());
        d("lr_g", fmt_num(p.lr_g));
        d("lr_d", fmt_num(p.lr_d));
        d("optimizer", "eg".into());
        d("beta1", "0.9".into());
        d("beta2", "0.999".into());
        d("cadence", (iters / 100).max(1).to_string());
        d("endpoints", "5".into());
        match loss {
            GanLoss::WganGp => d("gp_lambda", fmt_num(p.gan.gp_coefficient)),
            GanLoss::WganClip => d("clip_c", fmt_num(p.gan.clip_c)),
            GanLoss::Nsgan => {}
        }
    } else {
        let n = toy_game(kind, &given)?.partition().n();
        let point = given.vector("point")?.unwrap_or(default_point(kind, &given)?);
        let mut start = point.clone();
        start[0] += 1.0;
        let mut offset = vec![0.0; n];
        if kind.rotational() {
            offset[n - 1] = 0.05;
        }
        d("point", vec_str(&point));
        d("start", vec_str(&start));
        d("end_offset", vec_str(&offset));
    }
    out.merge(&given);
    out.set("game", kind.as_str())?;
    Ok(out)
}

fn default_point(kind: GameKind, cfg: &Config) -> Result<Vec<f64>> {
    Ok(match kind {
        GameKind::Example1 => vec![1.0, 1.0, 0.0],
        GameKind::Example2 => vec![0.0, 1.0],
        GameKind::Bilinear | GameKind::Archetype(_) => vec![0.0, 0.0],
        GameKind::Linear => linear_spec(cfg)?.center,
        GameKind::Gan(_) => unreachable!("GAN games have no fixed demo point"),
    })
}

fn linear_spec(cfg: &Config) -> Result<LinearGameSpec> {
    let need = |k: &str| cfg.matrix(k)?.ok_or_else(|| AppError::usage(format!("linear game needs '{k}'")));
    let s1 = need("s1")?;
    let s2 = need("s2")?;
    let a = match cfg.matrix("a")? {
        Some(m) => m,
        None => DenseMatrix::zeros(s2.rows(), s1.rows()),
    };
    let b = match cfg.matrix("b")? {
        Some(m) => m,
        None => DenseMatrix::zeros(s1.rows(), s2.rows()),
    };
    let center = cfg.vector("center")?.unwrap_or(vec![0.0; s1.rows() + s2.rows()]);
    Ok(LinearGameSpec { s1, s2, a, b, center })
}

/// A non-GAN game described by `kind` and the config.
pub fn toy_game(kind: GameKind, cfg: &Config) -> Result<Box<dyn Game>> {
    Ok(match kind {
        GameKind::Example1 => Box::new(make_example1()),
        GameKind::Example2 => Box::new(make_example2()),
        GameKind::Bilinear => Box::new(make_bilinear()),
        GameKind::Archetype(a) => Box::new(LinearGame::archetype(a)),
        GameKind::Linear => Box::new(make_linear_game(linear_spec(cfg)?)?),
        GameKind::Gan(_) => return Err(AppError::usage("GAN games need a dataset")),
    })
}

/// Everything a GAN run is built from.
pub struct GanSetup {
    pub game: GanGame,
    pub data: MogDataset,
    pub init: JointState,
}

pub fn gan_setup(loss: GanLoss, cfg: &Config) -> Result<GanSetup> {
    let p = preset(cfg, loss)?;
    let seed = cfg.u64("seed", 0)?;
    let mut gan = p.gan;
    gan.latent_dim = cfg.usize("latent_dim", gan.latent_dim)?;
    gan.hidden_dim = cfg.usize("hidden_dim", gan.hidden_dim)?;
    gan.gp_coefficient = cfg.f64("gp_lambda", gan.gp_coefficient)?;
    gan.clip_c = cfg.f64("clip_c", gan.clip_c)?;
    let samples = cfg.usize("samples", p.samples)?;
    let data = sample_mog(samples, seed)?;
    let z = LatentBank::sample(samples, gan.latent_dim, seed)?;
    let game = make_gan_game(&gan, &data, &z)?;
    let init = init_params(&gan, seed)?;
    Ok(GanSetup { game, data, init })
}

pub fn optimizer(cfg: &Config) -> Result<OptimizerConfig> {
    let d = OptimizerConfig::default();
    let o = OptimizerConfig {
        kind: parse_optimizer(cfg.str("optimizer", "eg"))?,
        lr_g: cfg.f64("lr_g", d.lr_g)?,
        lr_d: cfg.f64("lr_d", d.lr_d)?,
        beta1: cfg.f64("beta1", d.beta1)?,
        beta2: cfg.f64("beta2", d.beta2)?,
        eps_adam: d.eps_adam,
        iters: cfg.u64("iters", d.iters)?,
        seed: cfg.u64("seed", d.seed)?,
        cadence: cfg.u64("cadence", d.cadence)?,
    };
    o.validate()?;
    Ok(o)
}

pub fn grid(cfg: &Config) -> Result<PathGrid> {
    let d = PathGrid::default();
    Ok(PathGrid::new(cfg.f64("grid_a", d.a)?, cfg.f64("grid_b", d.b)?, cfg.usize("grid_points", d.points)?)?)
}

pub fn angle_sign(cfg: &Config) -> Result<AngleSign> {
    match cfg.str("angle_sign", "descent") {
        "descent" => Ok(AngleSign::Descent),
        "raw" => Ok(AngleSign::Raw),
        s => Err(AppError::usage(format!("unknown angle_sign '{s}' (expected descent or raw)"))),
    }
}

pub fn spectrum_options(cfg: &Config) -> Result<SpectrumOptions> {
    Ok(SpectrumOptions { dense: cfg.bool("dense", false)?, ..SpectrumOptions::default() })
}
