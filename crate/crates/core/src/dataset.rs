//! Loading, time alignment and concatenation of demonstrations, plus a
//! deterministic generator of synthetic demonstration sets.

use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::coordinates::{transform, Frame, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// One point per line, demos separated by a blank line.
    Csv,
    /// `{"demos": [[[x, y, ...], ...], ...]}`
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

pub fn load_demonstrations(path: impl AsRef<Path>, format: Format) -> Result<Vec<Trajectory>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_demonstrations(&text, format)
        .map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
}

pub fn parse_demonstrations(text: &str, format: Format) -> Result<Vec<Trajectory>> {
    match format {
        Format::Csv => parse_csv(text),
        Format::Json => parse_json(text),
    }
}

fn parse_csv(text: &str) -> Result<Vec<Trajectory>> {
    let mut blocks: Vec<Vec<Vec<f64>>> = vec![Vec::new()];
    let mut dim: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            if !blocks.last().unwrap().is_empty() {
                blocks.push(Vec::new());
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| parse_float(field.trim(), lineno + 1))
            .collect::<Result<Vec<f64>>>()?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::Format(format!(
                    "line {}: expected {d} fields, found {}",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        blocks.last_mut().unwrap().push(row);
    }
    if blocks.last().is_some_and(Vec::is_empty) {
        blocks.pop();
    }
    if blocks.is_empty() {
        return Err(Error::Format("no data rows found".into()));
    }
    blocks.iter().map(|b| Trajectory::from_rows(b)).collect()
}

fn parse_float(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: cannot parse '{field}' as a number")))?;
    if !v.is_finite() {
        return Err(Error::Format(format!("line {line}: non-finite value '{field}'")));
    }
    Ok(v)
}

#[derive(Serialize, Deserialize)]
struct JsonDemos {
    demos: Vec<Vec<Vec<f64>>>,
}

fn parse_json(text: &str) -> Result<Vec<Trajectory>> {
    let parsed: JsonDemos = serde_json::from_str(text)
        .map_err(|e| Error::Format(format!("line {} column {}: {e}", e.line(), e.column())))?;
    if parsed.demos.is_empty() {
        return Err(Error::Format("'demos' is empty".into()));
    }
    parsed
        .demos
        .iter()
        .enumerate()
        .map(|(i, rows)| {
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!("demo {i}: non-finite value")));
            }
            Trajectory::from_rows(rows).map_err(|e| match e {
                Error::Size(m) => Error::Size(format!("demo {i}: {m}")),
                Error::Dimension(m) => Error::Format(format!("demo {i}: {m}")),
                other => other,
            })
        })
        .collect()
}

/// Serializes demonstrations in the JSON interchange format.
pub fn demos_to_json(demos: &[Trajectory]) -> String {
    let doc = JsonDemos { demos: demos.iter().map(Trajectory::to_rows).collect() };
    serde_json::to_string(&doc).expect("finite floats always serialize")
}

/// Serializes demonstrations as blank-line separated CSV blocks.
pub fn demos_to_csv(demos: &[Trajectory]) -> String {
    let mut out = String::new();
    for (i, demo) in demos.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&points_to_csv(demo.points()));
    }
    out
}

/// One row per point; floats use the shortest representation that parses
/// back to the same value.
pub fn points_to_csv(points: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in points.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Index-linear resampling of a point matrix to `len` rows. First and last
/// rows are copied exactly.
pub fn resample_points(points: &DMatrix<f64>, len: usize) -> DMatrix<f64> {
    let n = points.nrows();
    let d = points.ncols();
    if n == len {
        return points.clone();
    }
    let mut out = DMatrix::zeros(len, d);
    for k in 0..len {
        if k == 0 {
            out.set_row(0, &points.row(0));
            continue;
        }
        if k == len - 1 {
            out.set_row(k, &points.row(n - 1));
            continue;
        }
        let s = k as f64 * (n - 1) as f64 / (len - 1) as f64;
        let i = (s.floor() as usize).min(n - 2);
        let frac = s - i as f64;
        for c in 0..d {
            out[(k, c)] = points[(i, c)] * (1.0 - frac) + points[(i + 1, c)] * frac;
        }
    }
    out
}

pub fn resample(traj: &Trajectory, len: usize) -> Result<Trajectory> {
    if len < 3 {
        return Err(Error::Size(format!("resample length must be >= 3, got {len}")));
    }
    Trajectory::new(resample_points(traj.points(), len))
}

/// `N` time-aligned demonstrations with their Tangent and Laplacian images,
/// concatenated in demo order.
#[derive(Debug, Clone)]
pub struct DemonstrationSet {
    demos: Vec<Trajectory>,
    tangent: Vec<Trajectory>,
    laplacian: Vec<Trajectory>,
    g: DMatrix<f64>,
    g_tangent: DMatrix<f64>,
    g_laplacian: DMatrix<f64>,
}

impl DemonstrationSet {
    /// Resamples every demo to `len` points (default: the longest demo) and
    /// builds the concatenated data in all three frames.
    pub fn new(demos: Vec<Trajectory>, len: Option<usize>) -> Result<Self> {
        let first = demos
            .first()
            .ok_or_else(|| Error::Size("demonstration set is empty".into()))?;
        let d = first.dim();
        if let Some(i) = demos.iter().position(|t| t.dim() != d) {
            return Err(Error::Dimension(format!(
                "demo {i} has dimension {}, demo 0 has {d}",
                demos[i].dim()
            )));
        }
        let len = len.unwrap_or_else(|| demos.iter().map(Trajectory::len).max().unwrap());
        let demos = demos
            .iter()
            .map(|t| resample(t, len))
            .collect::<Result<Vec<_>>>()?;
        let tangent: Vec<_> = demos.iter().map(|t| transform(t, Frame::Tangent)).collect();
        let laplacian: Vec<_> = demos.iter().map(|t| transform(t, Frame::Laplacian)).collect();
        let g = concat(&demos);
        let g_tangent = concat(&tangent);
        let g_laplacian = concat(&laplacian);
        Ok(Self { demos, tangent, laplacian, g, g_tangent, g_laplacian })
    }

    pub fn demos(&self) -> &[Trajectory] {
        &self.demos
    }

    pub fn num_demos(&self) -> usize {
        self.demos.len()
    }

    /// Common per-demo length after resampling.
    pub fn demo_len(&self) -> usize {
        self.demos[0].len()
    }

    pub fn dim(&self) -> usize {
        self.demos[0].dim()
    }

    /// Per-demo data in `frame`.
    pub fn frame_demos(&self, frame: Frame) -> &[Trajectory] {
        match frame {
            Frame::Cartesian => &self.demos,
            Frame::Tangent => &self.tangent,
            Frame::Laplacian => &self.laplacian,
        }
    }

    /// Concatenated data in `frame` (`N * len x d`).
    pub fn data(&self, frame: Frame) -> &DMatrix<f64> {
        match frame {
            Frame::Cartesian => &self.g,
            Frame::Tangent => &self.g_tangent,
            Frame::Laplacian => &self.g_laplacian,
        }
    }

    /// Pointwise mean of the aligned demos.
    pub fn mean_demo(&self) -> DMatrix<f64> {
        let mut sum = DMatrix::zeros(self.demo_len(), self.dim());
        for demo in &self.demos {
            sum += demo.points();
        }
        sum / self.demos.len() as f64
    }
}

fn concat(trajs: &[Trajectory]) -> DMatrix<f64> {
    let len = trajs[0].len();
    let d = trajs[0].dim();
    let mut out = DMatrix::zeros(len * trajs.len(), d);
    for (i, t) in trajs.iter().enumerate() {
        out.rows_mut(i * len, len).copy_from(t.points());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Line,
    Arc,
    SCurve,
    /// Handwritten "N": up stroke, diagonal down stroke, up stroke.
    NShape,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Line, Shape::Arc, Shape::SCurve, Shape::NShape];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Line => "line",
            Shape::Arc => "arc",
            Shape::SCurve => "s-curve",
            Shape::NShape => "n-shape",
        }
    }

    /// Point of the base curve at parameter `s` in `[0, 1]`.
    fn eval(self, s: f64) -> [f64; 2] {
        use std::f64::consts::PI;
        match self {
            Shape::Line => [s, 0.5 * s],
            Shape::Arc => [(PI * (1.0 - s)).cos(), (PI * s).sin()],
            Shape::SCurve => [(2.0 * PI * s).sin() * 0.5, 2.0 * s - 1.0],
            Shape::NShape => {
                // Three equal-length strokes through (0,0), (0,1), (0.6,0), (0.6,1).
                let corners = [[0.0, 0.0], [0.0, 1.0], [0.6, 0.0], [0.6, 1.0]];
                let lens = [1.0, (0.36f64 + 1.0).sqrt(), 1.0];
                let total: f64 = lens.iter().sum();
                let mut t = s * total;
                let mut k = 0;
                while k < 2 && t > lens[k] {
                    t -= lens[k];
                    k += 1;
                }
                let f = (t / lens[k]).min(1.0);
                let (a, b) = (corners[k], corners[k + 1]);
                [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
            }
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "line" => Ok(Shape::Line),
            "arc" => Ok(Shape::Arc),
            "s-curve" | "scurve" | "s" => Ok(Shape::SCurve),
            "n-shape" | "nshape" | "n" => Ok(Shape::NShape),
            other => Err(Error::InvalidParameter(format!("unknown shape '{other}'"))),
        }
    }
}

/// Knobs for [`synth_demos_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    /// Points per demonstration.
    pub len: usize,
    /// Standard deviation of independent per-point Gaussian noise.
    pub noise_sd: f64,
    /// Standard deviation of a per-demo constant translation.
    pub offset_sd: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { len: 100, noise_sd: 0.0, offset_sd: 0.0 }
    }
}

/// `n` noisy copies of a 2-D base curve sampled at 100 points.
pub fn synth_demos(shape: Shape, n: usize, noise_sd: f64, seed: u64) -> Vec<Trajectory> {
    synth_demos_with(shape, n, SynthOptions { noise_sd, ..Default::default() }, seed)
}

pub fn synth_demos_with(shape: Shape, n: usize, opts: SynthOptions, seed: u64) -> Vec<Trajectory> {
    let len = opts.len.max(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, opts.noise_sd.max(0.0)).expect("sd is non-negative and finite");
    let offset = Normal::new(0.0, opts.offset_sd.max(0.0)).expect("sd is non-negative and finite");
    (0..n)
        .map(|_| {
            let shift = [offset.sample(&mut rng), offset.sample(&mut rng)];
            let mut points = DMatrix::zeros(len, 2);
            for k in 0..len {
                let p = shape.eval(k as f64 / (len - 1) as f64);
                for c in 0..2 {
                    points[(k, c)] = p[c] + shift[c] + noise.sample(&mut rng);
                }
            }
            Trajectory::new(points).expect("generated points are finite")
        })
        .collect()
}
