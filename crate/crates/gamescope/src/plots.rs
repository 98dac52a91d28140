//! The concrete figures: path-angle, eigenvalue scatter, norm trace and
//! vector-field quiver.

use gamescope_core::diagnostics::PathAngleProfile;
use gamescope_core::dynamics::Trajectory;
use gamescope_core::numerics::Spectrum;

use crate::svg::{Arrow, Axis, Panel, PlotKind, Series, SvgPlot};

pub fn path_angle(p: &PathAngleProfile, title: &str) -> SvgPlot {
    let mut plot = SvgPlot::new(PlotKind::PathAngle, title);
    let mut signed = Panel::new("path-angle cosine", Axis::linear("alpha"), Axis::linear("cos"));
    signed.series.push(Series::line("median_cos", &p.alphas, &p.cosine.median));
    if p.endpoints.len() > 1 {
        signed.series.push(Series::line("q25_cos", &p.alphas, &p.cosine.q25));
        signed.series.push(Series::line("q75_cos", &p.alphas, &p.cosine.q75));
    }
    signed.hline = Some(0.0);
    let abs: Vec<Option<f64>> = p.cosine.median.iter().map(|c| c.map(f64::abs)).collect();
    let mut magnitude = Panel::new("|median cosine|", Axis::linear("alpha"), Axis::linear("|cos|"));
    magnitude.series.push(Series::line("abs_median_cos", &p.alphas, &abs));
    let mut norm = Panel::new("path-norm", Axis::linear("alpha"), Axis::log("norm"));
    norm.series.push(Series::line("median_norm", &p.alphas, &p.norm.median));
    if p.endpoints.len() > 1 {
        norm.series.push(Series::line("q25_norm", &p.alphas, &p.norm.q25));
        norm.series.push(Series::line("q75_norm", &p.alphas, &p.norm.q75));
    }
    plot.panels = vec![signed, magnitude, norm];
    plot
}

pub fn eigen_scatter(s: &Spectrum, title: &str) -> SvgPlot {
    let mut plot = SvgPlot::new(PlotKind::EigenScatter, title);
    let mut panel = Panel::new("eigenvalues", Axis::linear("re"), Axis::linear("im"));
    panel.series.push(Series::markers("eigenvalues", s.eigenvalues.iter().map(|l| (l.re, l.im))));
    panel.hline = Some(0.0);
    plot.panels.push(panel);
    plot
}

pub fn norm_trace(t: &Trajectory, title: &str) -> SvgPlot {
    let mut plot = SvgPlot::new(PlotKind::NormTrace, title);
    let mut panel = Panel::new("field norm", Axis::linear("iteration"), Axis::log("grad_norm"));
    let xs: Vec<f64> = t.checkpoints.iter().map(|c| c.iteration as f64).collect();
    let ys: Vec<Option<f64>> = t.checkpoints.iter().map(|c| Some(c.field_norm)).collect();
    panel.series.push(Series::line("grad_norm", &xs, &ys));
    plot.panels.push(panel);
    plot
}

pub fn quiver(arrows: Vec<Arrow>, labels: (&str, &str), title: &str) -> SvgPlot {
    let mut plot = SvgPlot::new(PlotKind::Quiver, title);
    let mut panel = Panel::new("game vector field", Axis::linear(labels.0), Axis::linear(labels.1));
    panel.arrows = arrows;
    plot.panels.push(panel);
    plot
}
