use gamescope_core::autograd::ParamVector;
use gamescope_core::games::{field_at, Game};
use gamescope_core::gan::*;
use gamescope_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(loss: GanLoss) -> GanConfig {
    GanConfig { loss, latent_dim: 3, hidden_dim: 8, ..GanConfig::default() }
}

/// One-hidden-layer ReLU net written out by hand; `p` is `w1, b1, w2, b2`.
fn net(p: &[f64], input: &[f64], hidden: usize) -> (f64, f64) {
    let i = input.len();
    let (w1, rest) = p.split_at(i * hidden);
    let (b1, rest) = rest.split_at(hidden);
    let (w2, b2) = rest.split_at(hidden);
    let mut out = b2[0];
    // Derivative with respect to a scalar input (only meaningful for i == 1).
    let mut slope = 0.0;
    for k in 0..hidden {
        let z: f64 = (0..i).map(|j| input[j] * w1[j * hidden + k]).sum::<f64>() + b1[k];
        if z > 0.0 {
            out += z * w2[k];
            slope += w1[k] * w2[k];
        }
    }
    (out, slope)
}

fn random_params(cfg: &GanConfig, rng: &mut ChaCha8Rng, scale: f64) -> (ParamVector, ParamVector) {
    let g = cfg.generator();
    let d = cfg.discriminator();
    let gv = (0..g.param_count()).map(|_| rng.random_range(-scale..scale)).collect();
    let dv = (0..d.param_count()).map(|_| rng.random_range(-scale..scale)).collect();
    (ParamVector::new(g.layout(""), gv).unwrap(), ParamVector::new(d.layout(""), dv).unwrap())
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[test]
fn mixture_moments_and_modes() {
    let data = sample_mog(10_000, 42).unwrap();
    let n = data.samples.len() as f64;
    let mean = data.samples.iter().sum::<f64>() / n;
    let second = data.samples.iter().map(|x| x * x).sum::<f64>() / n;
    assert!(mean.abs() <= 0.1, "mean {mean}");
    assert!((second - 4.75).abs() <= 0.2, "second moment {second}");
    let near = |c: f64| data.samples.iter().filter(|x| (*x - c).abs() < 0.5).count();
    let between = data.samples.iter().filter(|x| x.abs() < 0.25).count();
    assert!(near(2.0) > 5 * between && near(-2.0) > 5 * between);
}

#[test]
fn sampling_is_reproducible() {
    assert_eq!(sample_mog(1, 9).unwrap(), sample_mog(1, 9).unwrap());
    assert_ne!(sample_mog(50, 9).unwrap(), sample_mog(50, 10).unwrap());
    assert!(sample_mog(0, 1).is_err());
}

#[test]
fn constant_half_discriminator() {
    let cfg = small(GanLoss::Nsgan);
    let data = sample_mog(32, 1).unwrap();
    let z = LatentBank::sample(32, 3, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (gen, _) = random_params(&cfg, &mut rng, 1.0);
    let disc = ParamVector::zeros(cfg.discriminator().layout(""));
    let (lg, ld) = nsgan_losses(&cfg, &gen, &disc, &data, &z).unwrap();
    let ln2 = std::f64::consts::LN_2;
    assert!((ld - 2.0 * ln2).abs() < 1e-15);
    assert!((lg - ln2).abs() < 1e-15);
}

#[test]
fn nsgan_saturates_at_clamp_floor() {
    // D(x) = sigmoid(1e3 * relu(x) - 1e3 * relu(-x)) on positive reals, G outputs -5.
    let cfg = GanConfig { hidden_dim: 2, ..small(GanLoss::Nsgan) };
    let data = MogDataset { samples: vec![3.0, 4.0], seed: 0 };
    let z = LatentBank::sample(2, 3, 0).unwrap();
    let mut gen = vec![0.0; cfg.generator().param_count()];
    *gen.last_mut().unwrap() = -5.0;
    let disc = vec![1.0, -1.0, 0.0, 0.0, 1e3, -1e3, 0.0];
    let gen = ParamVector::new(cfg.generator().layout(""), gen).unwrap();
    let disc = ParamVector::new(cfg.discriminator().layout(""), disc).unwrap();
    let (_, ld) = nsgan_losses(&cfg, &gen, &disc, &data, &z).unwrap();
    let floor = -2.0 * (1.0 - LOG_EPS).ln();
    assert!((ld - floor).abs() < 1e-12, "{ld} vs {floor}");
}

#[test]
fn nsgan_matches_straight_line_losses() {
    let cfg = small(GanLoss::Nsgan);
    let data = sample_mog(40, 3).unwrap();
    let z = LatentBank::sample(40, 3, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let (gen, disc) = random_params(&cfg, &mut rng, 1.0);
        let (lg, ld) = nsgan_losses(&cfg, &gen, &disc, &data, &z).unwrap();
        let clamp = |p: f64| p.clamp(LOG_EPS, 1.0 - LOG_EPS);
        let n = 40.0;
        let mut e_ld = 0.0;
        let mut e_lg = 0.0;
        for i in 0..40 {
            let fake = net(gen.values(), &z.values[3 * i..3 * i + 3], 8).0;
            let dr = clamp(sigmoid(net(disc.values(), &[data.samples[i]], 8).0));
            let df = clamp(sigmoid(net(disc.values(), &[fake], 8).0));
            e_ld -= (dr.ln() + (1.0 - df).ln()) / n;
            e_lg -= df.ln() / n;
        }
        assert!((lg - e_lg).abs() < 1e-12 && (ld - e_ld).abs() < 1e-12);
    }
}

#[test]
fn wgangp_matches_straight_line_losses() {
    let cfg = small(GanLoss::WganGp);
    let data = sample_mog(40, 5).unwrap();
    let z = LatentBank::sample(40, 3, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let lambda = 1e-3;
    let u = interpolation_weights(40, 17, 0);
    for _ in 0..5 {
        let (gen, disc) = random_params(&cfg, &mut rng, 1.0);
        let (lg, ld) = wgangp_losses(&cfg, &gen, &disc, &data, &z, lambda, 17).unwrap();
        let n = 40.0;
        let (mut e_lg, mut e_ld) = (0.0, 0.0);
        for i in 0..40 {
            let fake = net(gen.values(), &z.values[3 * i..3 * i + 3], 8).0;
            let x = data.samples[i];
            let d_fake = net(disc.values(), &[fake], 8).0;
            let x_hat = u[i] * x + (1.0 - u[i]) * fake;
            let slope = net(disc.values(), &[x_hat], 8).1;
            let norm = (slope * slope + 1e-12).sqrt();
            e_ld += (d_fake - net(disc.values(), &[x], 8).0 + lambda * (norm - 1.0).powi(2)) / n;
            e_lg -= d_fake / n;
        }
        assert!((lg - e_lg).abs() < 1e-12 && (ld - e_ld).abs() < 1e-12, "{ld} vs {e_ld}");
    }
}

#[test]
fn unit_slope_critic() {
    // D(x) = relu(x) - relu(-x) = x.
    let cfg = GanConfig { hidden_dim: 2, ..small(GanLoss::WganGp) };
    let data = sample_mog(30, 8).unwrap();
    let z = LatentBank::sample(30, 3, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let gv = (0..cfg.generator().param_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let gen = ParamVector::new(cfg.generator().layout(""), gv).unwrap();
    let disc = ParamVector::new(cfg.discriminator().layout(""), vec![1.0, -1.0, 0.0, 0.0, 1.0, -1.0, 0.0]).unwrap();
    let mean_fake: f64 = (0..30).map(|i| net(gen.values(), &z.values[3 * i..3 * i + 3], 2).0).sum::<f64>() / 30.0;
    let mean_real: f64 = data.samples.iter().sum::<f64>() / 30.0;
    for lambda in [0.0, 1e-3, 10.0] {
        let (_, ld) = wgangp_losses(&cfg, &gen, &disc, &data, &z, lambda, 1).unwrap();
        assert!((ld - (mean_fake - mean_real)).abs() < 1e-12, "lambda {lambda}");
    }
}

#[test]
fn clip_filter_examples() {
    let c = 0.5;
    assert_eq!(clip_filter(&[c], &[-1.0], c), vec![0.0]);
    assert_eq!(clip_filter(&[c], &[1.0], c), vec![1.0]);
    assert_eq!(clip_filter(&[-c], &[1.0], c), vec![0.0]);
    assert_eq!(clip_filter(&[0.1], &[-7.0], c), vec![-7.0]);
}

proptest! {
    #[test]
    fn clip_filter_is_idempotent_and_shrinking(
        pairs in prop::collection::vec((-1.0..1.0f64, -3.0..3.0f64, any::<bool>()), 1..20),
    ) {
        let c = 0.5;
        let phi: Vec<f64> = pairs.iter().map(|(p, _, edge)| if *edge { c * p.signum() } else { p.clamp(-c, c) }).collect();
        let g: Vec<f64> = pairs.iter().map(|t| t.1).collect();
        let once = clip_filter(&phi, &g, c);
        prop_assert_eq!(clip_filter(&phi, &once, c), once.clone());
        for (a, b) in once.iter().zip(&g) {
            prop_assert!(a.abs() <= b.abs());
        }
    }

    #[test]
    fn gradient_penalty_is_non_negative(seed in 0u64..1000) {
        let cfg = small(GanLoss::WganGp);
        let data = sample_mog(16, seed).unwrap();
        let z = LatentBank::sample(16, 3, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (gen, disc) = random_params(&cfg, &mut rng, 2.0);
        let (_, with) = wgangp_losses(&cfg, &gen, &disc, &data, &z, 1.0, seed).unwrap();
        let (_, without) = wgangp_losses(&cfg, &gen, &disc, &data, &z, 0.0, seed).unwrap();
        prop_assert!(with - without >= -1e-15);
    }
}

fn fd_field(game: &GanGame, w: &[f64], i: usize, h: f64) -> f64 {
    let p = game.partition().p;
    let pick = |x: (f64, f64)| if i < p { x.0 } else { x.1 };
    let mut plus = w.to_vec();
    let mut minus = w.to_vec();
    plus[i] += h;
    minus[i] -= h;
    (pick(game.loss_values(&plus).unwrap()) - pick(game.loss_values(&minus).unwrap())) / (2.0 * h)
}

#[test]
fn game_field_matches_finite_differences() {
    for loss in [GanLoss::Nsgan, GanLoss::WganGp] {
        let cfg = small(loss);
        let data = sample_mog(64, 2).unwrap();
        let z = LatentBank::sample(64, 3, 2).unwrap();
        let game = make_gan_game(&cfg, &data, &z).unwrap();
        for seed in 0..20 {
            let w = init_params(&cfg, seed).unwrap().values().to_vec();
            let v = field_at(&game, &w).unwrap();
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for i in 0..w.len() {
                let fd = fd_field(&game, &w, i, 1e-6);
                assert!((v[i] - fd).abs() <= 1e-3 * scale.max(1e-3), "{loss:?} seed {seed} coord {i}: {} vs {fd}", v[i]);
            }
        }
    }
}

#[test]
fn zero_init_field_is_finite_and_deterministic() {
    let cfg = small(GanLoss::Nsgan);
    let data = sample_mog(64, 3).unwrap();
    let z = LatentBank::sample(64, 3, 3).unwrap();
    let game = make_gan_game(&cfg, &data, &z).unwrap();
    let zero = vec![0.0; cfg.partition().n()];
    assert!(field_at(&game, &zero).unwrap().iter().all(|x| x.is_finite()));
    let w = init_params(&cfg, 5).unwrap();
    assert_eq!(field_at(&game, w.values()).unwrap(), field_at(&game, w.values()).unwrap());
}

#[test]
fn clipped_critic_field_and_projection() {
    let cfg = GanConfig { clip_c: 0.05, ..small(GanLoss::WganClip) };
    let data = sample_mog(64, 4).unwrap();
    let z = LatentBank::sample(64, 3, 4).unwrap();
    let game = make_gan_game(&cfg, &data, &z).unwrap();
    let mut w = init_params(&cfg, 1).unwrap().values().to_vec();
    game.project(&mut w);
    let p = cfg.partition().p;
    assert!(w[p..].iter().all(|x| x.abs() <= 0.05));
    let v = field_at(&game, &w).unwrap();
    let raw = {
        let unclipped = make_gan_game(&GanConfig { loss: GanLoss::WganGp, gp_coefficient: 0.0, ..cfg }, &data, &z).unwrap();
        field_at(&unclipped, &w).unwrap()
    };
    assert_eq!(&v[..p], &raw[..p]);
    assert_eq!(&v[p..], clip_filter(&w[p..], &raw[p..], 0.05).as_slice());
}

#[test]
fn construction_errors() {
    let cfg = small(GanLoss::Nsgan);
    let data = sample_mog(10, 1).unwrap();
    assert!(matches!(make_gan_game(&cfg, &data, &LatentBank::sample(10, 4, 1).unwrap()), Err(Error::Shape(_))));
    assert!(matches!(make_gan_game(&cfg, &data, &LatentBank::sample(9, 3, 1).unwrap()), Err(Error::Shape(_))));
    let bad = GanConfig { gp_coefficient: -1.0, ..cfg };
    assert!(bad.validate().is_err());
}

#[test]
fn minibatches_change_with_iteration() {
    let cfg = GanConfig { batch: Batch::Size(8), ..small(GanLoss::Nsgan) };
    let data = sample_mog(64, 4).unwrap();
    let z = LatentBank::sample(64, 3, 4).unwrap();
    let mut game = make_gan_game(&cfg, &data, &z).unwrap();
    let w = init_params(&cfg, 2).unwrap().values().to_vec();
    let a = field_at(&game, &w).unwrap();
    game.refresh(1);
    let b = field_at(&game, &w).unwrap();
    game.refresh(0);
    assert_eq!(field_at(&game, &w).unwrap(), a);
    assert_ne!(a, b);
}
