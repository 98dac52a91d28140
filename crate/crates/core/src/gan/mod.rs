//! A one-dimensional GAN on a mixture of two Gaussians, trained full-batch.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::autograd::{MlpSpec, OutputActivation, ParamLayout, ParamVector, Tape, Tensor, Var};
use crate::games::{Game, JointState, Partition};
use crate::{Error, Result};

/// Clamp applied to discriminator probabilities inside logarithms.
pub const LOG_EPS: f64 = 1e-7;

// Independent random streams derived from one seed.
const STREAM_DATA: u64 = 1;
const STREAM_LATENT: u64 = 2;
const STREAM_INIT: u64 = 3;
/// Per-iteration streams start here (offset by the iteration number).
const STREAM_ITER: u64 = 1 << 32;

/// `½ N(2, 0.5) + ½ N(−2, 1)` (means and variances).
pub const MOG_COMPONENTS: [(f64, f64); 2] = [(2.0, 0.5), (-2.0, 1.0)];

#[derive(Debug, Clone, PartialEq)]
pub struct MogDataset {
    pub samples: Vec<f64>,
    pub seed: u64,
}

pub fn sample_mog(n: usize, seed: u64) -> Result<MogDataset> {
    if n == 0 {
        return Err(Error::argument("dataset needs at least one sample"));
    }
    let mut rng = stream(seed, STREAM_DATA);
    let samples = (0..n)
        .map(|_| {
            let (mean, var) = MOG_COMPONENTS[usize::from(rng.random::<bool>())];
            let z: f64 = StandardNormal.sample(&mut rng);
            mean + libm::sqrt(var) * z
        })
        .collect();
    Ok(MogDataset { samples, seed })
}

/// A frozen batch of standard-normal latent codes, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentBank {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl LatentBank {
    pub fn sample(n: usize, dim: usize, seed: u64) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::argument("latent bank needs positive size and dimension"));
        }
        let mut rng = stream(seed, STREAM_LATENT);
        let values = (0..n * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        Ok(LatentBank { dim, values })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GanLoss {
    /// Non-saturating GAN with a sigmoid discriminator.
    Nsgan,
    /// Wasserstein critic with a gradient penalty.
    WganGp,
    /// Wasserstein critic with weight clipping.
    WganClip,
}

impl GanLoss {
    pub fn as_str(self) -> &'static str {
        match self {
            GanLoss::Nsgan => "nsgan",
            GanLoss::WganGp => "wgan_gp",
            GanLoss::WganClip => "wgan_clip",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batch {
    Full,
    Size(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GanConfig {
    pub loss: GanLoss,
    pub latent_dim: usize,
    pub hidden_dim: usize,
    pub gp_coefficient: f64,
    pub clip_c: f64,
    pub batch: Batch,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            loss: GanLoss::Nsgan,
            latent_dim: 16,
            hidden_dim: 100,
            gp_coefficient: 1e-3,
            clip_c: 0.01,
            batch: Batch::Full,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::argument("latent and hidden dimensions must be positive"));
        }
        if !(self.gp_coefficient >= 0.0) {
            return Err(Error::argument("gradient penalty coefficient must be non-negative"));
        }
        if self.loss == GanLoss::WganClip && !(self.clip_c > 0.0) {
            return Err(Error::argument("clipping bound must be positive"));
        }
        if self.batch == Batch::Size(0) {
            return Err(Error::argument("batch size must be positive"));
        }
        Ok(())
    }

    pub fn generator(&self) -> MlpSpec {
        MlpSpec { input_dim: self.latent_dim, hidden_dim: self.hidden_dim, output_dim: 1, output: OutputActivation::Identity }
    }

    pub fn discriminator(&self) -> MlpSpec {
        let output = match self.loss {
            GanLoss::Nsgan => OutputActivation::Sigmoid,
            GanLoss::WganGp | GanLoss::WganClip => OutputActivation::Identity,
        };
        MlpSpec { input_dim: 1, hidden_dim: self.hidden_dim, output_dim: 1, output }
    }

    pub fn partition(&self) -> Partition {
        Partition { p: self.generator().param_count(), d: self.discriminator().param_count() }
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new().extend("gen.", &self.generator().layout("")).extend("disc.", &self.discriminator().layout(""))
    }
}

/// Hyperparameters of a full training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub gan: GanConfig,
    pub samples: usize,
    pub iterations: u64,
    pub lr_g: f64,
    pub lr_d: f64,
}

impl Preset {
    /// The published MoG settings: 10000 samples, 30000 full-batch iterations, 100 hidden units.
    pub fn paper(loss: GanLoss) -> Self {
        let (lr_g, lr_d) = match loss {
            GanLoss::Nsgan => (1e-1, 1e-1),
            GanLoss::WganGp | GanLoss::WganClip => (1e-2, 1e-1),
        };
        Preset { gan: GanConfig { loss, ..GanConfig::default() }, samples: 10_000, iterations: 30_000, lr_g, lr_d }
    }

    /// Desk-scale: 2000 samples, 5000 iterations, 50 hidden units, same rates.
    pub fn ci(loss: GanLoss) -> Self {
        let paper = Self::paper(loss);
        Preset {
            gan: GanConfig { hidden_dim: 50, ..paper.gan },
            samples: 2000,
            iterations: 5000,
            ..paper
        }
    }
}

/// Uniform(±1/√fan_in) weights and biases for both networks.
pub fn init_params(cfg: &GanConfig, seed: u64) -> Result<JointState> {
    cfg.validate()?;
    let mut rng = stream(seed, STREAM_INIT);
    let mut values = Vec::with_capacity(cfg.partition().n());
    for spec in [cfg.generator(), cfg.discriminator()] {
        for segment in spec.layout("").segments() {
            let fan_in = if segment.name.ends_with('1') { spec.input_dim } else { spec.hidden_dim };
            let bound = 1.0 / libm::sqrt(fan_in as f64);
            values.extend((0..segment.len()).map(|_| rng.random_range(-bound..bound)));
        }
    }
    JointState::new(ParamVector::new(cfg.layout(), values)?, cfg.partition())
}

/// Zeroes the coordinates of `grad` that point out of the box `[−c, c]` at
/// its boundary, where a step followed by clipping would not move.
pub fn clip_filter(phi: &[f64], grad: &[f64], c: f64) -> Vec<f64> {
    phi.iter().zip(grad).map(|(&p, &g)| if at_clip_boundary(p, g, c) { 0.0 } else { g }).collect()
}

fn at_clip_boundary(p: f64, g: f64, c: f64) -> bool {
    p.abs() >= c - 1e-12 && g != 0.0 && p != 0.0 && g.signum() == -p.signum()
}

struct Nets {
    gen: MlpSpec,
    disc: MlpSpec,
    loss: GanLoss,
    lambda: f64,
}

impl Nets {
    fn new(cfg: &GanConfig) -> Self {
        Nets { gen: cfg.generator(), disc: cfg.discriminator(), loss: cfg.loss, lambda: cfg.gp_coefficient }
    }

    /// `(L_G, L_D)` on real samples `x` (`N x 1`), codes `z` and, for the
    /// penalty, interpolation weights `u` (`N x 1`).
    fn losses<'t>(&self, theta: Var<'t>, phi: Var<'t>, x: Var<'t>, z: Var<'t>, u: Option<Var<'t>>) -> Result<(Var<'t>, Var<'t>)> {
        let tape = theta.tape();
        let fake = self.gen.forward(theta, z);
        match self.loss {
            GanLoss::Nsgan => {
                let d_real = self.disc.forward(phi, x).clamp(LOG_EPS, 1.0 - LOG_EPS);
                let d_fake = self.disc.forward(phi, fake).clamp(LOG_EPS, 1.0 - LOG_EPS);
                let ld = -(d_real.ln().mean() + (-d_fake).add_scalar(1.0).ln().mean());
                let lg = -d_fake.ln().mean();
                Ok((lg, ld))
            }
            GanLoss::WganGp | GanLoss::WganClip => {
                let d_real = self.disc.forward(phi, x);
                let d_fake = self.disc.forward(phi, fake);
                let mut ld = d_fake.mean() - d_real.mean();
                if self.loss == GanLoss::WganGp && self.lambda > 0.0 {
                    let u = u.ok_or_else(|| Error::argument("gradient penalty needs interpolation weights"))?;
                    if fake.shape() != x.shape() {
                        return Err(Error::shape("gradient penalty pairs real and fake samples one to one"));
                    }
                    let one_minus_u = (-u).add_scalar(1.0);
                    let x_hat = u * x + one_minus_u * fake;
                    let d_hat = self.disc.forward(phi, x_hat);
                    let g = tape.grad(d_hat.sum(), &[x_hat])?[0];
                    let norm = g.square().add_scalar(1e-12).sqrt();
                    ld = ld + norm.add_scalar(-1.0).square().mean().scale(self.lambda);
                }
                Ok((-d_fake.mean(), ld))
            }
        }
    }
}

fn check_nets(cfg: &GanConfig, gen: &ParamVector, disc: &ParamVector, z: &LatentBank) -> Result<()> {
    cfg.validate()?;
    cfg.generator().check_params(gen)?;
    cfg.discriminator().check_params(disc)?;
    if z.dim != cfg.latent_dim {
        return Err(Error::shape(format!("latent codes of dimension {}, expected {}", z.dim, cfg.latent_dim)));
    }
    Ok(())
}

fn eval_losses(cfg: &GanConfig, gen: &ParamVector, disc: &ParamVector, data: &MogDataset, z: &LatentBank, u: Option<&[f64]>) -> Result<(f64, f64)> {
    check_nets(cfg, gen, disc, z)?;
    let tape = Tape::new();
    let x = tape.column(&data.samples);
    let zv = tape.leaf(Tensor::new(z.len(), z.dim, z.values.clone()));
    let uv = u.map(|u| tape.column(u));
    let (lg, ld) = Nets::new(cfg).losses(tape.column(gen.values()), tape.column(disc.values()), x, zv, uv)?;
    tape.check()?;
    Ok((lg.item(), ld.item()))
}

/// Non-saturating GAN losses `(L_G, L_D)`.
pub fn nsgan_losses(cfg: &GanConfig, gen: &ParamVector, disc: &ParamVector, data: &MogDataset, z: &LatentBank) -> Result<(f64, f64)> {
    let cfg = GanConfig { loss: GanLoss::Nsgan, ..*cfg };
    eval_losses(&cfg, gen, disc, data, z, None)
}

/// WGAN-GP losses `(L_G, L_D)` with penalty coefficient `lambda` and
/// interpolation weights drawn from `seed`.
pub fn wgangp_losses(
    cfg: &GanConfig,
    gen: &ParamVector,
    disc: &ParamVector,
    data: &MogDataset,
    z: &LatentBank,
    lambda: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    let cfg = GanConfig { loss: GanLoss::WganGp, gp_coefficient: lambda, ..*cfg };
    let u = interpolation_weights(data.samples.len(), seed, 0);
    eval_losses(&cfg, gen, disc, data, z, Some(&u))
}

/// Uniform `[0, 1)` weights for iteration `iteration`.
pub fn interpolation_weights(n: usize, seed: u64, iteration: u64) -> Vec<f64> {
    let mut rng = stream(seed, STREAM_ITER + 2 * iteration);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// The GAN as a two-player game with frozen data and latent codes.
#[derive(Debug, Clone)]
pub struct GanGame {
    cfg: GanConfig,
    gen: MlpSpec,
    disc: MlpSpec,
    data: Vec<f64>,
    latent: LatentBank,
    seed: u64,
    x: Tensor,
    z: Tensor,
    u: Tensor,
}

pub fn make_gan_game(cfg: &GanConfig, data: &MogDataset, z_bank: &LatentBank) -> Result<GanGame> {
    cfg.validate()?;
    if z_bank.dim != cfg.latent_dim {
        return Err(Error::shape(format!("latent codes of dimension {}, expected {}", z_bank.dim, cfg.latent_dim)));
    }
    if z_bank.len() != data.samples.len() {
        return Err(Error::shape(format!(
            "{} latent codes for {} samples; full-batch training pairs them one to one",
            z_bank.len(),
            data.samples.len()
        )));
    }
    if let Batch::Size(b) = cfg.batch {
        if b > data.samples.len() {
            return Err(Error::argument(format!("batch of {b} exceeds {} samples", data.samples.len())));
        }
    }
    let mut game = GanGame {
        cfg: *cfg,
        gen: cfg.generator(),
        disc: cfg.discriminator(),
        data: data.samples.clone(),
        latent: z_bank.clone(),
        seed: data.seed,
        x: Tensor::zeros(0, 0),
        z: Tensor::zeros(0, 0),
        u: Tensor::zeros(0, 0),
    };
    game.refresh(0);
    Ok(game)
}

impl GanGame {
    pub fn config(&self) -> &GanConfig {
        &self.cfg
    }

    /// `(L_G, L_D)` at `ω` on the current batch.
    pub fn loss_values(&self, omega: &[f64]) -> Result<(f64, f64)> {
        let Partition { p, d } = self.partition();
        if omega.len() != p + d {
            return Err(Error::shape(format!("state of length {}, expected {}", omega.len(), p + d)));
        }
        let tape = Tape::new();
        let (lg, ld) = self.taped_losses(&tape, tape.column(&omega[..p]), tape.column(&omega[p..]))?;
        tape.check()?;
        Ok((lg.item(), ld.item()))
    }
}

impl GanGame {
    fn taped_losses<'t>(&self, tape: &'t Tape, theta: Var<'t>, phi: Var<'t>) -> Result<(Var<'t>, Var<'t>)> {
        let nets = Nets { gen: self.gen, disc: self.disc, loss: self.cfg.loss, lambda: self.cfg.gp_coefficient };
        let x = tape.leaf(self.x.clone());
        let z = tape.leaf(self.z.clone());
        let u = (self.cfg.loss == GanLoss::WganGp).then(|| tape.leaf(self.u.clone()));
        nets.losses(theta, phi, x, z, u)
    }
}

impl Game for GanGame {
    fn name(&self) -> &str {
        self.cfg.loss.as_str()
    }

    fn partition(&self) -> Partition {
        self.cfg.partition()
    }

    fn layout(&self) -> ParamLayout {
        self.cfg.layout()
    }

    fn losses<'t>(&self, tape: &'t Tape, theta: Var<'t>, phi: Var<'t>) -> Option<(Var<'t>, Var<'t>)> {
        self.taped_losses(tape, theta, phi).ok()
    }

    fn field<'t>(&self, tape: &'t Tape, omega: Var<'t>) -> Result<Var<'t>> {
        let Partition { p, d } = self.partition();
        let theta = omega.slice(0, p, 1);
        let phi = omega.slice(p, d, 1);
        let (lg, ld) = self.taped_losses(tape, theta, phi)?;
        tape.check()?;
        let gt = tape.grad(lg, &[theta])?[0];
        let gp = tape.grad(ld, &[phi])?[0];
        let v = gt.embed(0, p + d, 1) + gp.embed(p, p + d, 1);
        if self.cfg.loss != GanLoss::WganClip {
            return Ok(v);
        }
        let w = omega.to_vec();
        let raw = v.to_vec();
        let mask: Vec<f64> = (0..w.len())
            .map(|i| if i >= p && at_clip_boundary(w[i], raw[i], self.cfg.clip_c) { 0.0 } else { 1.0 })
            .collect();
        Ok(v * tape.column(&mask))
    }

    fn refresh(&mut self, iteration: u64) {
        let n = self.data.len();
        let dim = self.latent.dim;
        let rows: Vec<usize> = match self.cfg.batch {
            Batch::Full => (0..n).collect(),
            Batch::Size(b) => {
                let mut rng = stream(self.seed, STREAM_ITER + 2 * iteration + 1);
                (0..b).map(|_| rng.random_range(0..n)).collect()
            }
        };
        self.x = Tensor::new(rows.len(), 1, rows.iter().map(|&r| self.data[r]).collect());
        self.z = Tensor::new(rows.len(), dim, rows.iter().flat_map(|&r| self.latent.values[r * dim..(r + 1) * dim].iter().copied()).collect());
        self.u = Tensor::column(interpolation_weights(rows.len(), self.seed, iteration));
    }

    fn project(&self, omega: &mut [f64]) {
        if self.cfg.loss == GanLoss::WganClip {
            let c = self.cfg.clip_c;
            let p = self.partition().p;
            omega[p..].iter_mut().for_each(|x| *x = x.clamp(-c, c));
        }
    }
}
