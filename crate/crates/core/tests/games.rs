use gamescope_core::autograd::{ParamVector, Tape, Var};
use gamescope_core::games::*;
use gamescope_core::numerics::DenseMatrix;
use gamescope_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn state(values: &[f64], g: &impl Game) -> JointState {
    JointState::from_flat(values.to_vec(), g.partition()).unwrap()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

fn example1_jacobian() -> DenseMatrix {
    DenseMatrix::from_rows(&[&[-1.0, 0.0, -1.0], &[0.0, 2.0, -2.0], &[5.0, 4.0, 0.0]]).unwrap()
}

#[test]
fn example1_stationary_point_and_losses() {
    let g = make_example1();
    let v = vector_field(&g, &state(&[1.0, 1.0, 0.0], &g)).unwrap();
    assert_close(v.values(), &[0.0, 0.0, 0.0], 1e-15);

    let tape = Tape::new();
    let theta = tape.column(&[1.0, 1.0]);
    let (lg, _) = g.losses(&tape, theta, tape.column(&[0.0])).unwrap();
    assert_eq!(lg.item(), 0.0);
    assert_close(&tape.grad(lg, &[theta]).unwrap()[0].to_vec(), &[0.0, 0.0], 0.0);
    for phi in [-3.0, 0.5, 7.0] {
        let (_, ld) = g.losses(&tape, theta, tape.column(&[phi])).unwrap();
        assert_eq!(ld.item(), 0.0);
    }
}

#[test]
fn example1_field_at_hand_evaluated_point() {
    // From the printed field at (2, 1, 0): (−2 + 1, 2 − 2, 10 + 4 − 9).
    let g = make_example1();
    let v = vector_field(&g, &state(&[2.0, 1.0, 0.0], &g)).unwrap();
    assert_close(v.values(), &[-1.0, 0.0, 5.0], 1e-14);
}

#[test]
fn example1_jacobian_and_characteristic_polynomial() {
    let g = make_example1();
    let j = jacobian_dense(&g, &state(&[1.0, 1.0, 0.0], &g), DENSE_JACOBIAN_CAP).unwrap();
    assert!(j.max_abs_diff(&example1_jacobian()) < 1e-14);
    let chi = |x: f64| DenseMatrix::identity(3).scaled(x).add(&j.scaled(-1.0)).unwrap().determinant().unwrap();
    assert!((chi(0.0) + 2.0).abs() < 1e-9);
    assert!((chi(1.0) - 9.0).abs() < 1e-9);
}

#[test]
fn example1_jvp_first_column() {
    let g = make_example1();
    let u = ParamVector::from_flat(vec![1.0, 0.0, 0.0]).unwrap();
    let u = ParamVector::new(g.layout(), u.into_values()).unwrap();
    let ju = jvp(&g, &state(&[1.0, 1.0, 0.0], &g), &u).unwrap();
    assert_close(ju.values(), &[-1.0, 0.0, 5.0], 1e-14);
    // The reverse product gives the first row instead.
    let jtu = vjp(&g, &state(&[1.0, 1.0, 0.0], &g), &u).unwrap();
    assert_close(jtu.values(), &[-1.0, 0.0, -1.0], 1e-14);
}

#[test]
fn example2_stationary_points_and_jacobians() {
    let g = make_example2();
    for (phi, expect) in [(1.0, [[1.0, 0.5], [2.0, 0.5]]), (-1.0, [[1.0, -0.5], [2.0, -0.5]])] {
        let s = state(&[0.0, phi], &g);
        assert_close(vector_field(&g, &s).unwrap().values(), &[0.0, 0.0], 1e-15);
        let j = jacobian_dense(&g, &s, DENSE_JACOBIAN_CAP).unwrap();
        let e = DenseMatrix::from_rows(&[&expect[0], &expect[1]]).unwrap();
        assert!(j.max_abs_diff(&e) < 1e-14);
    }
}

#[test]
fn autograd_fields_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let games: Vec<Box<dyn Game>> = vec![
        Box::new(make_example1()),
        Box::new(make_example2()),
        Box::new(make_bilinear()),
        Box::new(LinearGame::archetype(Archetype::Attraction)),
        Box::new(LinearGame::archetype(Archetype::Rotation)),
        Box::new(LinearGame::archetype(Archetype::Mixed)),
        Box::new(random_linear(&mut rng, 3, 2, true)),
        Box::new(random_linear(&mut rng, 2, 3, false)),
    ];
    for g in &games {
        for _ in 0..100 {
            let w: Vec<f64> = (0..g.partition().n()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let auto = field_at(g.as_ref(), &w).unwrap();
            let closed = g.closed_form_field(&w).unwrap();
            for (a, c) in auto.iter().zip(&closed) {
                assert!((a - c).abs() <= 1e-10 * (1.0 + c.abs()), "{} at {w:?}", g.name());
            }
        }
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
    DenseMatrix::from_vec(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn random_linear(rng: &mut ChaCha8Rng, p: usize, d: usize, symmetric: bool) -> LinearGame {
    let sym = |m: DenseMatrix| m.add(&m.transpose()).unwrap();
    let (mut s1, mut s2) = (random_matrix(rng, p, p), random_matrix(rng, d, d));
    if symmetric {
        s1 = sym(s1);
        s2 = sym(s2);
    }
    let spec = LinearGameSpec {
        s1,
        s2,
        a: random_matrix(rng, d, p),
        b: random_matrix(rng, p, d),
        center: (0..p + d).map(|_| rng.random_range(-1.0..1.0)).collect(),
    };
    make_linear_game(spec).unwrap()
}

#[test]
fn linear_games_have_their_block_matrix_as_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for symmetric in [true, false] {
        let g = random_linear(&mut rng, 3, 4, symmetric);
        assert_eq!(g.is_potential(), symmetric);
        let w: Vec<f64> = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
        let j = jacobian_dense(&g, &state(&w, &g), DENSE_JACOBIAN_CAP).unwrap();
        assert!(j.max_abs_diff(g.jacobian()) < 1e-10);
    }
}

#[test]
fn identity_blocks_give_displacement() {
    let spec = LinearGameSpec {
        s1: DenseMatrix::identity(2),
        s2: DenseMatrix::identity(1),
        a: DenseMatrix::zeros(1, 2),
        b: DenseMatrix::zeros(2, 1),
        center: vec![0.5, -1.0, 2.0],
    };
    let g = make_linear_game(spec).unwrap();
    let v = vector_field(&g, &state(&[1.0, 1.0, 1.0], &g)).unwrap();
    assert_close(v.values(), &[0.5, 2.0, -1.0], 1e-15);
}

#[test]
fn rotation_jacobian_is_antisymmetric() {
    let g = LinearGame::archetype(Archetype::Rotation);
    let j = jacobian_dense(&g, &state(&[0.3, -0.2], &g), DENSE_JACOBIAN_CAP).unwrap();
    assert!(j.add(&j.transpose()).unwrap().frobenius_norm() <= 1e-10);
}

#[test]
fn linear_field_jvp_extracts_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = random_linear(&mut rng, 2, 2, false);
    let s = state(&[0.1, 0.2, 0.3, 0.4], &g);
    for j in 0..4 {
        let mut e = vec![0.0; 4];
        e[j] = 1.0;
        let col = jvp(&g, &s, &ParamVector::new(g.layout(), e).unwrap()).unwrap();
        assert_close(col.values(), &g.jacobian().column(j), 1e-10);
    }
}

/// `∇φ ∇θ L_G` by differentiating the generator gradient directly.
fn cross_block(g: &dyn Game, w: &[f64]) -> Vec<Vec<f64>> {
    let Partition { p, d } = g.partition();
    let tape = Tape::new();
    let theta = tape.column(&w[..p]);
    let phi = tape.column(&w[p..]);
    let (lg, _) = g.losses(&tape, theta, phi).unwrap();
    let gt = tape.grad(lg, &[theta]).unwrap()[0];
    (0..p)
        .map(|i| tape.grad(gt.slice(i, 1, 1), &[phi]).unwrap()[0].to_vec())
        .collect::<Vec<_>>()
        .into_iter()
        .map(|row| row[..d].to_vec())
        .collect()
}

#[test]
fn cross_block_matches_mixed_second_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = make_example1();
    for _ in 0..20 {
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let j = jacobian_dense(&g, &state(&w, &g), DENSE_JACOBIAN_CAP).unwrap();
        let b = cross_block(&g, &w);
        for i in 0..2 {
            assert!((j[(i, 2)] - b[i][0]).abs() <= 1e-8);
        }
    }
}

#[test]
fn block_jvp_is_player_hessian() {
    let g = make_example1();
    let s = state(&[1.0, 1.0, 0.0], &g);
    assert_close(&block_jvp(&g, &s, Player::Generator, &[1.0, 0.0]).unwrap(), &[-1.0, 0.0], 1e-14);
    assert_close(&block_jvp(&g, &s, Player::Generator, &[0.0, 1.0]).unwrap(), &[0.0, 2.0], 1e-14);
    assert_close(&block_jvp(&g, &s, Player::Discriminator, &[1.0]).unwrap(), &[0.0], 1e-14);
}

#[test]
fn shape_errors_and_dense_cap() {
    let g = make_example1();
    let wrong = JointState::from_flat(vec![0.0, 0.0], Partition::new(1, 1).unwrap()).unwrap();
    assert!(matches!(vector_field(&g, &wrong), Err(Error::Shape(_))));
    assert!(matches!(field_at(&g, &[0.0]), Err(Error::Shape(_))));
    let s = state(&[0.0, 0.0, 0.0], &g);
    assert!(matches!(jacobian_dense(&g, &s, 2), Err(Error::TooLarge { dim: 3, cap: 2 })));
    let bad = LinearGameSpec { a: DenseMatrix::zeros(2, 2), ..Archetype::Rotation.spec() };
    assert!(matches!(make_linear_game(bad), Err(Error::Shape(_))));
}

/// Both players share one smooth loss, so the field is a gradient.
struct Shared;

impl Game for Shared {
    fn name(&self) -> &str {
        "shared"
    }

    fn partition(&self) -> Partition {
        Partition { p: 2, d: 2 }
    }

    fn losses<'t>(&self, _tape: &'t Tape, theta: Var<'t>, phi: Var<'t>) -> Option<(Var<'t>, Var<'t>)> {
        let f = (theta * phi).sum().sigmoid() + (theta.square().sum() * phi.sum()).add_scalar(3.0).square()
            - (theta.slice(0, 1, 1) * phi.slice(1, 1, 1)).exp();
        Some((f, f))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gradient_fields_have_symmetric_jacobians(w in prop::collection::vec(-1.0..1.0f64, 4)) {
        let g = Shared;
        let j = jacobian_at(&g, &w, DENSE_JACOBIAN_CAP).unwrap();
        prop_assert!(j.is_symmetric(1e-8 * (1.0 + j.frobenius_norm())));
    }

    #[test]
    fn jvp_is_linear(
        w in prop::collection::vec(-2.0..2.0f64, 3),
        u1 in prop::collection::vec(-1.0..1.0f64, 3),
        u2 in prop::collection::vec(-1.0..1.0f64, 3),
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
    ) {
        let g = make_example1();
        let tape = Tape::new();
        let lin = Linearization::new(&tape, &g, &w).unwrap();
        let mix: Vec<f64> = u1.iter().zip(&u2).map(|(x, y)| a * x + b * y).collect();
        let lhs = lin.jvp(&mix).unwrap();
        let (j1, j2) = (lin.jvp(&u1).unwrap(), lin.jvp(&u2).unwrap());
        for i in 0..3 {
            let rhs = a * j1[i] + b * j2[i];
            prop_assert!((lhs[i] - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }
    }
}
