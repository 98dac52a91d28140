use gamescope::config::{parse_matrix, parse_vector, Config};
use gamescope::setup::{self, GameKind};
use gamescope::AppError;
use gamescope_core::dynamics::OptimizerKind;

#[test]
fn parses_comments_blank_lines_and_values() {
    let c = Config::parse("# header\n\nseed = 7   # trailing\n lr_g=0.5\npoint = 1, 1, 0\n").unwrap();
    assert_eq!(c.u64("seed", 0).unwrap(), 7);
    assert_eq!(c.f64("lr_g", 0.0).unwrap(), 0.5);
    assert_eq!(c.vector("point").unwrap().unwrap(), vec![1.0, 1.0, 0.0]);
    assert_eq!(c.f64("lr_d", 0.25).unwrap(), 0.25);
}

#[test]
fn duplicate_and_malformed_lines_are_format_errors() {
    assert!(matches!(Config::parse("seed = 1\nseed = 2\n"), Err(AppError::Format(_))));
    assert!(matches!(Config::parse("seed 1\n"), Err(AppError::Format(_))));
    assert!(matches!(Config::parse("= 1\n"), Err(AppError::Format(_))));
}

#[test]
fn unknown_keys_are_usage_errors() {
    assert!(matches!(Config::parse("sede = 1\n"), Err(AppError::Usage(_))));
    assert!(matches!(Config::parse_assignment("nope=1"), Err(AppError::Usage(_))));
    assert!(matches!(Config::parse_assignment("seed"), Err(AppError::Usage(_))));
}

#[test]
fn typed_getters_reject_bad_values() {
    let c = Config::parse("seed = -1\nlr_g = nan\ndense = maybe\nk = 2.5\n").unwrap();
    assert!(matches!(c.u64("seed", 0), Err(AppError::Format(_))));
    assert!(matches!(c.f64("lr_g", 0.0), Err(AppError::Format(_))));
    assert!(matches!(c.bool("dense", false), Err(AppError::Format(_))));
    assert!(matches!(c.usize("k", 1), Err(AppError::Format(_))));
}

#[test]
fn inline_matrices() {
    let m = parse_matrix("1, 2; 3, 4").unwrap();
    assert_eq!((m.rows(), m.cols()), (2, 2));
    assert_eq!(m.row(1), &[3.0, 4.0]);
    assert!(parse_matrix("1, 2; 3").is_err());
    assert!(parse_vector("1,,2").is_err());
    assert!(parse_vector("1, inf").is_err());
}

#[test]
fn resolution_layers_preset_file_then_cli() {
    let file = Config::parse("game = nsgan\npreset = paper\nlr_g = 0.5\niters = 100\n").unwrap();
    let mut cli = Config::new();
    cli.set("lr_g", "0.25").unwrap();
    cli.set("seed", "3").unwrap();
    let r = setup::resolve(&file, &cli).unwrap();
    assert_eq!(r.raw("lr_g"), Some("0.25"));
    assert_eq!(r.raw("lr_d"), Some("0.1"));
    assert_eq!(r.raw("samples"), Some("10000"));
    assert_eq!(r.raw("hidden_dim"), Some("100"));
    assert_eq!(r.raw("iters"), Some("100"));
    assert_eq!(r.raw("cadence"), Some("1"));
    assert_eq!(r.raw("seed"), Some("3"));
    let ci = setup::resolve(&Config::parse("game = nsgan\n").unwrap(), &Config::new()).unwrap();
    assert_eq!(ci.raw("samples"), Some("2000"));
    assert_eq!(ci.raw("hidden_dim"), Some("50"));
    assert_eq!(ci.raw("iters"), Some("5000"));
}

#[test]
fn resolved_text_is_sorted_and_reparses() {
    let r = setup::resolve(&Config::parse("game = example1\n").unwrap(), &Config::new()).unwrap();
    let text = r.to_text();
    let keys: Vec<&str> = text.lines().map(|l| l.split(" = ").next().unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(Config::parse(&text).unwrap(), r);
    assert_eq!(r.raw("point"), Some("1, 1, 0"));
    assert_eq!(r.raw("start"), Some("2, 1, 0"));
}

#[test]
fn game_and_optimizer_names() {
    for s in ["example1", "example2", "bilinear", "linear", "linear:attraction", "linear:rotation", "linear:mixed", "nsgan", "wgangp", "wganclip"] {
        assert_eq!(GameKind::parse(s).unwrap().as_str(), s);
    }
    assert!(matches!(GameKind::parse("linear:spiral"), Err(AppError::Usage(_))));
    let mut c = Config::parse("optimizer = extraadam\niters = 3\ncadence = 1\n").unwrap();
    assert_eq!(setup::optimizer(&c).unwrap().kind, OptimizerKind::ExtraAdam);
    c.set("optimizer", "sgd").unwrap();
    assert!(matches!(setup::optimizer(&c), Err(AppError::Usage(_))));
}

#[test]
fn custom_linear_game_from_blocks() {
    let c = Config::parse("game = linear\ns1 = 1, 0; 0, 2\ns2 = 3\na = 1, 1\nb = 0; 0\ncenter = 1, 2, 3\n").unwrap();
    let r = setup::resolve(&c, &Config::new()).unwrap();
    assert_eq!(r.raw("point"), Some("1, 2, 3"));
    let g = setup::toy_game(GameKind::Linear, &r).unwrap();
    assert_eq!(g.partition().n(), 3);
    let bad = Config::parse("game = linear\ns1 = 1, 0; 0, 2\ns2 = 3\na = 1\n").unwrap();
    assert!(setup::resolve(&bad, &Config::new()).is_err());
}
