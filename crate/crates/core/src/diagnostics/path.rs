use alloc::format;
use alloc::vec::Vec;

use crate::dynamics::Trajectory;
use crate::games::{field_at, Game, JointState};
use crate::numerics::{dot, norm2};
use crate::{Error, Result};

/// Fields at or below this norm give no cosine.
pub const ZERO_FIELD_NORM: f64 = 1e-12;

/// Uniform grid of `points` values over `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGrid {
    pub a: f64,
    pub b: f64,
    pub points: usize,
}

impl Default for PathGrid {
    fn default() -> Self {
        PathGrid { a: 0.0, b: 1.2, points: 120 }
    }
}

impl PathGrid {
    pub fn new(a: f64, b: f64, points: usize) -> Result<Self> {
        let grid = PathGrid { a, b, points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::argument(format!("path grid needs at least 2 points, got {}", self.points)));
        }
        if !(self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return Err(Error::argument(format!("path grid needs a < b, got [{}, {}]", self.a, self.b)));
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<f64> {
        let step = (self.b - self.a) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.b } else { self.a + step * i as f64 })
            .collect()
    }
}

/// Which field enters the numerator of the cosine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleSign {
    /// `−v_α`, the direction the dynamics move in.
    #[default]
    Descent,
    /// `v_α` as written in the cosine formula.
    Raw,
}

/// Cosines and field norms along one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointProfile {
    pub alphas: Vec<f64>,
    /// `None` where the field vanishes.
    pub cosines: Vec<Option<f64>>,
    pub norms: Vec<f64>,
}

fn segment(start: &JointState, end: &JointState) -> Result<Vec<f64>> {
    if start.partition() != end.partition() {
        return Err(Error::shape("path endpoints have different partitions"));
    }
    let delta: Vec<f64> = end.values().iter().zip(start.values()).map(|(e, s)| e - s).collect();
    if norm2(&delta) == 0.0 {
        return Err(Error::argument("path endpoints coincide"));
    }
    Ok(delta)
}

fn point(start: &[f64], delta: &[f64], alpha: f64) -> Vec<f64> {
    start.iter().zip(delta).map(|(s, d)| s + alpha * d).collect()
}

/// Cosine between the segment direction and the field at each grid point
/// `ω_α = ω_start + α (ω_end − ω_start)`.
pub fn path_angle<G: Game + ?Sized>(
    g: &G,
    start: &JointState,
    end: &JointState,
    grid: &PathGrid,
    sign: AngleSign,
) -> Result<EndpointProfile> {
    grid.validate()?;
    let delta = segment(start, end)?;
    let dn = norm2(&delta);
    let alphas = grid.alphas();
    let mut cosines = Vec::with_capacity(alphas.len());
    let mut norms = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let v = field_at(g, &point(start.values(), &delta, alpha))?;
        let vn = norm2(&v);
        norms.push(vn);
        cosines.push((vn > ZERO_FIELD_NORM).then(|| {
            let c = dot(&delta, &v) / (dn * vn);
            let c = if sign == AngleSign::Descent { -c } else { c };
            c.clamp(-1.0, 1.0)
        }));
    }
    Ok(EndpointProfile { alphas, cosines, norms })
}

/// Joint field norm `‖v_α‖` at each grid point.
pub fn path_norm<G: Game + ?Sized>(g: &G, start: &JointState, end: &JointState, grid: &PathGrid) -> Result<Vec<f64>> {
    grid.validate()?;
    let delta = segment(start, end)?;
    grid.alphas().into_iter().map(|alpha| Ok(norm2(&field_at(g, &point(start.values(), &delta, alpha))?))).collect()
}

/// Median and quartiles of one quantity per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Quartiles {
    pub median: Vec<Option<f64>>,
    pub q25: Vec<Option<f64>>,
    pub q75: Vec<Option<f64>>,
}

/// Profiles of several endpoints and their per-α summary.
#[derive(Debug, Clone, PartialEq)]
pub struct PathAngleProfile {
    pub alphas: Vec<f64>,
    pub endpoints: Vec<EndpointProfile>,
    pub cosine: Quartiles,
    pub norm: Quartiles,
}

/// Linear-interpolation percentile of sorted data (the "type 7" rule).
pub fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

fn quartiles(columns: impl Iterator<Item = Vec<f64>>) -> Quartiles {
    let mut q = Quartiles { median: Vec::new(), q25: Vec::new(), q75: Vec::new() };
    for mut col in columns {
        col.sort_by(f64::total_cmp);
        q.median.push(percentile(&col, 0.5));
        q.q25.push(percentile(&col, 0.25));
        q.q75.push(percentile(&col, 0.75));
    }
    q
}

/// Per-α median and interquartile range over endpoints. Missing cosines are
/// left out of the summary rather than counted as zero.
pub fn aggregate_endpoints(profiles: &[EndpointProfile]) -> Result<PathAngleProfile> {
    let first = profiles.first().ok_or_else(|| Error::argument("no profiles to aggregate"))?;
    let n = first.alphas.len();
    for p in profiles {
        if p.alphas != first.alphas || p.cosines.len() != n || p.norms.len() != n {
            return Err(Error::argument("profiles are on different grids"));
        }
    }
    let cosine = quartiles((0..n).map(|i| profiles.iter().filter_map(|p| p.cosines[i]).collect()));
    let norm = quartiles((0..n).map(|i| profiles.iter().map(|p| p.norms[i]).collect()));
    Ok(PathAngleProfile { alphas: first.alphas.clone(), endpoints: profiles.to_vec(), cosine, norm })
}

/// Checkpoints chosen as path endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointSelection {
    pub states: Vec<JointState>,
    pub iterations: Vec<u64>,
    /// Set when fewer than `count` checkpoints met the threshold and the
    /// smallest-norm checkpoints were used instead.
    pub fallback: bool,
}

/// The last `count` checkpoints with `‖v‖ ≤ eps_stat`, or failing that the
/// `count` checkpoints of smallest norm. Output is in iteration order.
pub fn select_endpoints(traj: &Trajectory, count: usize, eps_stat: f64) -> Result<EndpointSelection> {
    if traj.is_empty() {
        return Err(Error::argument("trajectory has no checkpoints"));
    }
    if count == 0 || count > traj.len() {
        return Err(Error::argument(format!("cannot select {count} endpoints from {} checkpoints", traj.len())));
    }
    let good: Vec<usize> = (0..traj.len()).filter(|&i| traj.checkpoints[i].field_norm <= eps_stat).collect();
    let (mut picked, fallback) = if good.len() >= count {
        (good[good.len() - count..].to_vec(), false)
    } else {
        let mut idx: Vec<usize> = (0..traj.len()).collect();
        idx.sort_by(|&a, &b| {
            traj.checkpoints[a].field_norm.total_cmp(&traj.checkpoints[b].field_norm).then(b.cmp(&a))
        });
        idx.truncate(count);
        (idx, true)
    };
    picked.sort_unstable();
    let states = picked
        .iter()
        .map(|&i| traj.state(i).ok_or_else(|| Error::argument("trajectory carries no state layout")))
        .collect::<Result<Vec<_>>>()?;
    let iterations = picked.iter().map(|&i| traj.checkpoints[i].iteration).collect();
    Ok(EndpointSelection { states, iterations, fallback })
}
