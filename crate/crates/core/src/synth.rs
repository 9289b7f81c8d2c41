//! Synthetic test patterns and seeded Gaussian noise.
//!
//! Geometry defaults scale with the grid, so doubling the resolution
//! doubles every edge length.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonnegative, Error, Result};
use crate::grid::{GridSpec, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Line,
    Square,
    Rings,
    Disk,
}

impl std::str::FromStr for PatternKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "line" => Ok(Self::Line),
            "square" => Ok(Self::Square),
            "rings" => Ok(Self::Rings),
            "disk" => Ok(Self::Disk),
            other => Err(format!("unknown pattern `{other}` (expected line|square|rings|disk)")),
        }
    }
}

/// Shape parameters. Pixel `(i, j)` has its center at `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Geometry {
    /// Full-height vertical bar covering columns `start..start + width`.
    Line { start: usize, width: usize },
    /// Square band: rows and columns in `inset..len - inset`.
    Square { inset: usize },
    /// Concentric annuli around the grid center. Each entry is
    /// `[inner, outer]` as a fraction of `min(rows, cols)`.
    Rings { annuli: Vec<[f64; 2]> },
    /// Disk of the given radius (pixels) around the grid center.
    Disk { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub rows: usize,
    pub cols: usize,
    pub foreground: f64,
    pub background: f64,
    pub geometry: Geometry,
}

impl PatternSpec {
    /// Default geometry for `kind` on a `rows × cols` grid, foreground 1 on
    /// background 0.
    pub fn new(kind: PatternKind, rows: usize, cols: usize) -> Self {
        let short = rows.min(cols);
        let geometry = match kind {
            PatternKind::Line => {
                let width = (cols / 6).max(1);
                Geometry::Line {
                    start: cols.saturating_sub(width) / 2,
                    width,
                }
            }
            PatternKind::Square => Geometry::Square { inset: short / 4 },
            PatternKind::Rings => Geometry::Rings {
                annuli: vec![[0.12, 0.22], [0.30, 0.40]],
            },
            PatternKind::Disk => Geometry::Disk {
                radius: short as f64 / 4.0,
            },
        };
        Self {
            rows,
            cols,
            foreground: 1.0,
            background: 0.0,
            geometry,
        }
    }

    pub fn kind(&self) -> PatternKind {
        match self.geometry {
            Geometry::Line { .. } => PatternKind::Line,
            Geometry::Square { .. } => PatternKind::Square,
            Geometry::Rings { .. } => PatternKind::Rings,
            Geometry::Disk { .. } => PatternKind::Disk,
        }
    }

    pub fn validate(&self) -> Result<()> {
        GridSpec::unit(self.rows, self.cols)?;
        for (name, level) in [("foreground", self.foreground), ("background", self.background)] {
            if !(0.0..=1.0).contains(&level) {
                return Err(Error::InvalidParameter {
                    name,
                    value: level,
                    reason: "must lie in [0, 1]",
                });
            }
        }
        let bad = |msg: String| Err(Error::InvalidGeometry(msg));
        match &self.geometry {
            Geometry::Line { start, width } => {
                if *width == 0 || start + width > self.cols {
                    return bad(format!(
                        "bar {start}..{} does not fit in {} columns",
                        start + width,
                        self.cols
                    ));
                }
            }
            Geometry::Square { inset } => {
                if 2 * inset >= self.rows.min(self.cols) {
                    return bad(format!("inset {inset} leaves no square on {}x{}", self.rows, self.cols));
                }
            }
            Geometry::Rings { annuli } => {
                if annuli.is_empty() {
                    return bad("rings need at least one annulus".into());
                }
                for &[inner, outer] in annuli {
                    if !(inner >= 0.0 && inner < outer && outer <= 0.5) {
                        return bad(format!("annulus [{inner}, {outer}] must satisfy 0 <= inner < outer <= 0.5"));
                    }
                }
            }
            Geometry::Disk { radius } => {
                let max = (self.rows.min(self.cols) - 1) as f64 / 2.0;
                if !(*radius > 0.0 && *radius <= max) {
                    return bad(format!("disk radius {radius} must lie in (0, {max}]"));
                }
            }
        }
        Ok(())
    }
}

/// Rasterizes a pattern on a unit-spacing grid.
pub fn make_pattern(spec: &PatternSpec) -> Result<ScalarField> {
    spec.validate()?;
    let grid = GridSpec::unit(spec.rows, spec.cols)?;
    let (m, n) = (spec.rows, spec.cols);
    let ci = (m as f64 - 1.0) / 2.0;
    let cj = (n as f64 - 1.0) / 2.0;
    let short = m.min(n) as f64;
    let dist = |i: usize, j: usize| (i as f64 - ci).hypot(j as f64 - cj);
    let inside = |i: usize, j: usize| match &spec.geometry {
        Geometry::Line { start, width } => (*start..start + width).contains(&j),
        Geometry::Square { inset } => (*inset..m - inset).contains(&i) && (*inset..n - inset).contains(&j),
        Geometry::Rings { annuli } => {
            let r = dist(i, j) / short;
            annuli.iter().any(|&[a, b]| r >= a && r <= b)
        }
        Geometry::Disk { radius } => dist(i, j) <= *radius,
    };
    Ok(ScalarField::from_fn(grid, |i, j| {
        if inside(i, j) {
            spec.foreground
        } else {
            spec.background
        }
    }))
}

/// Adds i.i.d. `N(0, σ²)` noise drawn from a ChaCha8 stream seeded with
/// `seed`. Values are not clipped.
pub fn add_gaussian_noise(f: &ScalarField, sigma: f64, seed: u64) -> Result<ScalarField> {
    ensure_nonnegative("sigma", sigma)?;
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Row-major draw order.
    Ok(ScalarField::from_fn(f.spec(), |i, j| f.get(i, j) + normal.sample(&mut rng)))
}
