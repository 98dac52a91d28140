//! CSV and key-value artifacts. Every number goes through [`fmt_num`] so the
//! SVG plots can repeat the exact same strings.

use std::path::Path;

use gamescope_core::autograd::ParamVector;
use gamescope_core::diagnostics::{PathAngleProfile, StationaryPointReport};
use gamescope_core::dynamics::Trajectory;
use gamescope_core::gan::MogDataset;
use gamescope_core::numerics::Spectrum;

use crate::error::{AppError, Result};

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e15)` so tiny values stay short.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// A small table kept as strings so it can be written and cross-checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    pub fn to_bytes(&self, preamble: Option<&str>) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        if let Some(p) = preamble {
            out.extend_from_slice(p.as_bytes());
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| AppError::format(e.to_string()))?;
        drop(w);
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, &self.to_bytes(None)?)
    }

    /// Reads a table, skipping leading `#` lines.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(AppError::io(path))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let body: String = text.lines().skip_while(|l| l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r.records().map(|rec| Ok(rec?.iter().map(str::to_string).collect())).collect::<Result<_>>()?;
        Ok(Table { header, rows })
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(AppError::io(path))
}

pub fn spectrum_table(s: &Spectrum) -> Table {
    let mut t = Table::new(["index", "re", "im", "magnitude", "residual"]);
    for (i, l) in s.eigenvalues.iter().enumerate() {
        t.push(vec![
            i.to_string(),
            fmt_num(l.re),
            fmt_num(l.im),
            fmt_num(l.norm()),
            fmt_opt(s.residual_norms.get(i).copied()),
        ]);
    }
    t
}

/// Summary columns, `cos_i, norm_i` for each endpoint, then the magnitude
/// of the median cosine.
pub fn path_angle_table(p: &PathAngleProfile) -> Table {
    let mut header: Vec<String> =
        ["alpha", "median_cos", "q25_cos", "q75_cos", "median_norm", "q25_norm", "q75_norm"].map(String::from).into();
    for i in 0..p.endpoints.len() {
        header.push(format!("cos_{i}"));
        header.push(format!("norm_{i}"));
    }
    header.push("abs_median_cos".into());
    let mut t = Table::new(header);
    for (j, &a) in p.alphas.iter().enumerate() {
        let mut row = vec![
            fmt_num(a),
            fmt_opt(p.cosine.median[j]),
            fmt_opt(p.cosine.q25[j]),
            fmt_opt(p.cosine.q75[j]),
            fmt_opt(p.norm.median[j]),
            fmt_opt(p.norm.q25[j]),
            fmt_opt(p.norm.q75[j]),
        ];
        for e in &p.endpoints {
            row.push(fmt_opt(e.cosines[j]));
            row.push(fmt_num(e.norms[j]));
        }
        row.push(fmt_opt(p.cosine.median[j].map(f64::abs)));
        t.push(row);
    }
    t
}

/// `checkpoint` holds the file name of the saved state, if any.
pub fn trajectory_table(traj: &Trajectory, files: &[Option<String>]) -> Table {
    let mut t = Table::new(["iteration", "grad_norm", "checkpoint"]);
    for (i, c) in traj.checkpoints.iter().enumerate() {
        t.push(vec![c.iteration.to_string(), fmt_num(c.field_norm), files.get(i).cloned().flatten().unwrap_or_default()]);
    }
    t
}

pub fn dataset_bytes(d: &MogDataset) -> Result<Vec<u8>> {
    let mut t = Table::new(["x"]);
    for &x in &d.samples {
        t.push(vec![fmt_num(x)]);
    }
    t.to_bytes(Some(&format!("# seed={}\n", d.seed)))
}

/// Reads a dataset written by [`dataset_bytes`].
pub fn parse_dataset(text: &str) -> Result<MogDataset> {
    let seed = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# seed="))
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| AppError::format("dataset: missing '# seed=' header"))?;
    let t = Table::parse(text)?;
    let col = t.column("x").ok_or_else(|| AppError::format("dataset: missing 'x' column"))?;
    let samples = col
        .iter()
        .map(|s| s.parse().map_err(|_| AppError::format(format!("dataset: bad number '{s}'"))))
        .collect::<Result<_>>()?;
    Ok(MogDataset { samples, seed })
}

/// Debug dump: one row per parameter entry.
pub fn params_table(v: &ParamVector) -> Table {
    let mut t = Table::new(["segment", "row", "col", "value"]);
    for (seg, vals) in v.unpack() {
        for r in 0..seg.rows {
            for c in 0..seg.cols {
                t.push(vec![seg.name.clone(), r.to_string(), c.to_string(), fmt_num(vals[r * seg.cols + c])]);
            }
        }
    }
    t
}

/// Ordered `key = value` lines; values are written as given.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvFile {
    pub entries: Vec<(String, String)>,
}

impl KvFile {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.push(key, fmt_num(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KvFile::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(" = ").ok_or_else(|| AppError::format(format!("bad key-value line '{line}'")))?;
            kv.push(k, v);
        }
        Ok(kv)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, self.to_text().as_bytes())
    }
}

pub fn report_kv(r: &StationaryPointReport) -> KvFile {
    let mut kv = KvFile::default();
    kv.push("dim", r.dim);
    kv.num("grad_norm", r.grad_norm);
    kv.num("eps_stat", r.eps_stat);
    kv.num("eps_eig", r.eps_eig);
    kv.push("stationary", r.is_stationary);
    kv.push("lssp", r.lssp);
    kv.num("lssp_min_re", r.lssp_min_re);
    kv.push("dne", r.dne);
    kv.num("dne_min_generator", r.dne_min[0]);
    kv.num("dne_min_discriminator", r.dne_min[1]);
    kv.push("jacobian_method", r.jacobian.method.as_str());
    kv.push("jacobian_count", r.jacobian.len());
    kv
}
