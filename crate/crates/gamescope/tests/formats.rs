use std::collections::HashSet;

use gamescope::checkpoint::{decode, encode};
use gamescope::formats::{
    dataset_bytes, fmt_num, params_table, parse_dataset, path_angle_table, spectrum_table, KvFile, Table,
};
use gamescope::plots;
use gamescope::AppError;
use gamescope_core::autograd::{ParamLayout, ParamVector};
use gamescope_core::diagnostics::{aggregate_endpoints, path_angle, AngleSign, PathGrid};
use gamescope_core::games::{Archetype, JointState, LinearGame};
use gamescope_core::gan::sample_mog;
use gamescope_core::numerics::Spectrum;
use gamescope_core::Complex64;
use proptest::prelude::*;

fn layout() -> ParamLayout {
    ParamLayout::new().with("gen.w1", 2, 3).with("gen.b1", 3, 1).with("disc.w", 1, 1)
}

#[test]
fn number_format() {
    assert_eq!(fmt_num(0.0), "0");
    assert_eq!(fmt_num(1.5), "1.5");
    assert_eq!(fmt_num(-0.25), "-0.25");
    assert_eq!(fmt_num(1e-6), "1e-6");
    assert_eq!(fmt_num(2.5e20), "2.5e20");
    assert_eq!(fmt_num(f64::NAN), "NaN");
}

proptest! {
    #[test]
    fn number_format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn checkpoint_round_trips(values in proptest::collection::vec(-1e6f64..1e6, 10)) {
        let v = ParamVector::new(layout(), values).unwrap();
        prop_assert_eq!(decode(&encode(&v)).unwrap(), v);
    }
}

#[test]
fn checkpoint_header_and_corruption() {
    let v = ParamVector::new(layout(), (0..10).map(f64::from).collect()).unwrap();
    let bytes = encode(&v);
    assert_eq!(&bytes[..4], b"GSCK");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(bytes.len(), 12 + 3 * (4 + 16) + "gen.w1gen.b1disc.w".len() + 8 * 10);
    assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(AppError::Format(_))));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(decode(&bad), Err(AppError::Format(_))));
    let mut ver = bytes.clone();
    ver[4] = 9;
    assert!(matches!(decode(&ver), Err(AppError::Format(_))));
    let mut extra = bytes;
    extra.extend_from_slice(&[0; 8]);
    assert!(matches!(decode(&extra), Err(AppError::Format(_))));
}

#[test]
fn params_dump_lists_every_entry() {
    let v = ParamVector::new(layout(), (0..10).map(f64::from).collect()).unwrap();
    let t = params_table(&v);
    assert_eq!(t.header, ["segment", "row", "col", "value"]);
    assert_eq!(t.rows.len(), 10);
    assert_eq!(t.rows[4], ["gen.w1", "1", "1", "4"]);
    assert_eq!(t.rows[9], ["disc.w", "0", "0", "9"]);
}

#[test]
fn dataset_round_trip() {
    let d = sample_mog(50, 11).unwrap();
    let bytes = dataset_bytes(&d).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("# seed=11\nx\n"));
    assert_eq!(parse_dataset(&text).unwrap(), d);
    assert!(parse_dataset("x\n1\n").is_err());
}

#[test]
fn spectrum_csv_columns() {
    let s = Spectrum::dense(vec![Complex64::new(1.0, 2.0), Complex64::new(1.0, -2.0), Complex64::new(-0.5, 0.0)]);
    let t = spectrum_table(&s);
    assert_eq!(t.header, ["index", "re", "im", "magnitude", "residual"]);
    assert_eq!(t.rows[0], ["0", "1", "2", &fmt_num(5f64.sqrt()), ""]);
    assert_eq!(t.rows[2][1], "-0.5");
    let parsed = Table::parse(std::str::from_utf8(&t.to_bytes(None).unwrap()).unwrap()).unwrap();
    assert_eq!(parsed, t);
}

#[test]
fn kv_round_trip() {
    let mut kv = KvFile::default();
    kv.push("lssp", "yes");
    kv.num("grad_norm", 1e-9);
    let text = kv.to_text();
    assert_eq!(text, "lssp = yes\ngrad_norm = 1e-9\n");
    assert_eq!(KvFile::parse(&text).unwrap(), kv);
}

fn svg_points(svg: &str) -> Vec<(String, String, String)> {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    doc.descendants()
        .filter(|n| n.tag_name().name() == "circle" && n.has_attribute("data-x"))
        .map(|n| {
            let series = n.parent().and_then(|p| p.attribute("data-name")).unwrap_or("").to_string();
            (series, n.attribute("data-x").unwrap().to_string(), n.attribute("data-y").unwrap().to_string())
        })
        .collect()
}

#[test]
fn path_angle_svg_matches_csv() {
    let g = LinearGame::archetype(Archetype::Rotation);
    let start = JointState::from_flat(vec![1.0, 0.0], g_partition(&g)).unwrap();
    let ends = [vec![0.0, 0.05], vec![0.02, -0.03], vec![-0.01, 0.04]];
    let profiles: Vec<_> = ends
        .iter()
        .map(|e| {
            let end = JointState::from_flat(e.clone(), g_partition(&g)).unwrap();
            path_angle(&g, &start, &end, &PathGrid::default(), AngleSign::Descent).unwrap()
        })
        .collect();
    let p = aggregate_endpoints(&profiles).unwrap();
    let t = path_angle_table(&p);
    let svg = plots::path_angle(&p, "rotation <test> & co").render();
    let pts = svg_points(&svg);
    assert!(!pts.is_empty());
    let alpha = t.column("alpha").unwrap();
    for (series, x, y) in &pts {
        let col = t.column(series).unwrap_or_else(|| panic!("series {series} not in CSV"));
        let row = alpha.iter().position(|a| a == x).expect("alpha value in CSV");
        assert_eq!(col[row], y, "series {series} at alpha {x}");
    }
    let series: HashSet<_> = pts.iter().map(|p| p.0.as_str()).collect();
    for s in ["median_cos", "q25_cos", "q75_cos", "abs_median_cos", "median_norm"] {
        assert!(series.contains(s), "{s}");
    }
}

fn g_partition(g: &LinearGame) -> gamescope_core::games::Partition {
    use gamescope_core::games::Game;
    g.partition()
}

#[test]
fn eigen_scatter_svg_matches_csv() {
    let s = Spectrum::dense(vec![Complex64::new(0.3, 1e-7), Complex64::new(0.3, -1e-7), Complex64::new(2.0, 0.0)]);
    let t = spectrum_table(&s);
    let pts = svg_points(&plots::eigen_scatter(&s, "s").render());
    let rows: HashSet<(&str, &str)> = t.column("re").unwrap().into_iter().zip(t.column("im").unwrap()).collect();
    assert_eq!(pts.len(), 3);
    for (_, x, y) in &pts {
        assert!(rows.contains(&(x.as_str(), y.as_str())), "({x}, {y})");
    }
}

#[test]
fn missing_values_are_empty_cells_and_not_plotted() {
    let g = LinearGame::archetype(Archetype::Attraction);
    let start = JointState::from_flat(vec![1.0, 1.0], g_partition(&g)).unwrap();
    let end = JointState::from_flat(vec![0.0, 0.0], g_partition(&g)).unwrap();
    let grid = PathGrid::new(0.0, 2.0, 3).unwrap();
    let p = aggregate_endpoints(&[path_angle(&g, &start, &end, &grid, AngleSign::Descent).unwrap()]).unwrap();
    let t = path_angle_table(&p);
    let cos = t.column("median_cos").unwrap();
    assert_eq!(cos[1], "");
    assert!((cos[0].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!((cos[2].parse::<f64>().unwrap() + 1.0).abs() < 1e-12);
    assert_eq!(t.column("norm_0").unwrap()[1], "0");
    let pts = svg_points(&plots::path_angle(&p, "a").render());
    assert!(pts.iter().all(|(_, x, _)| x != "1"));
}
