//! Periodic grid fields and finite-difference operators.
//!
//! Index convention: a field value `v(i, j)` is stored row-major in an
//! `Array2` with `i` the first index (axis 1, the `x1` direction) and `j`
//! the second (axis 2, `x2`). Every operator wraps indices periodically,
//! so `v(M, j)` is `v(0, j)` and `v(-1, j)` is `v(M - 1, j)`.
//!
//! Operators are pure: they return new fields and never mutate inputs.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid dimensions and mesh size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    rows: usize,
    cols: usize,
    h: f64,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, h: f64) -> Result<Self> {
        let invalid = |reason| Error::InvalidGrid {
            rows,
            cols,
            h,
            reason,
        };
        if rows < 3 || cols < 3 {
            return Err(invalid("both dimensions must be at least 3"));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid("mesh size must be finite and positive"));
        }
        Ok(Self { rows, cols, h })
    }

    /// A grid with unit mesh size, the pixel convention used for images.
    pub fn unit(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, 1.0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }

    #[inline]
    pub(crate) fn wrap_row(&self, i: isize) -> usize {
        i.rem_euclid(self.rows as isize) as usize
    }

    #[inline]
    pub(crate) fn wrap_col(&self, j: isize) -> usize {
        j.rem_euclid(self.cols as isize) as usize
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{} (h = {})", self.rows, self.cols, self.h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    /// First grid index `i`.
    First,
    /// Second grid index `j`.
    Second,
}

/// Finite-difference direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Forward,
    Backward,
}

/// A real field on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Array2<f64>,
}

impl ScalarField {
    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, 0.0)
    }

    pub fn constant(spec: GridSpec, value: f64) -> Self {
        Self {
            spec,
            values: Array2::from_elem(spec.shape(), value),
        }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self {
            spec,
            values: Array2::from_shape_fn(spec.shape(), |(i, j)| f(i, j)),
        }
    }

    /// Wraps an existing array, rejecting non-finite entries.
    pub fn from_array(values: Array2<f64>, h: f64) -> Result<Self> {
        let (rows, cols) = values.dim();
        let spec = GridSpec::new(rows, cols, h)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("input array".into()));
        }
        Ok(Self {
            spec,
            values: values.as_standard_layout().into_owned(),
        })
    }

    /// Builds a field from row-major values.
    pub fn from_vec(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch {
                left: spec.to_string(),
                right: format!("{} values", values.len()),
            });
        }
        let values = Array2::from_shape_vec(spec.shape(), values)
            .expect("length checked against the grid");
        Self::from_array(values, spec.h())
    }

    pub(crate) fn from_raw(spec: GridSpec, values: Array2<f64>) -> Self {
        debug_assert_eq!(values.dim(), spec.shape());
        Self { spec, values }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Row-major copy of the values.
    pub fn to_vec(&self) -> Vec<f64> {
        self.values.iter().copied().collect()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Value at a possibly out-of-range index, wrapped periodically.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        self.values[(self.spec.wrap_row(i), self.spec.wrap_col(j))]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.spec, self.values.mapv(f))
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.spec.check_same(&other.spec)?;
        let mut out = self.values.clone();
        out.zip_mut_with(&other.values, |a, &b| *a = f(*a, b));
        Ok(Self::from_raw(self.spec, out))
    }

    /// Cyclic shift: `out(i, j) = v(i + di, j + dj)`.
    pub fn shifted(&self, di: isize, dj: isize) -> Self {
        Self::from_fn(self.spec, |i, j| self.at(i as isize + di, j as isize + dj))
    }

    /// Sum over all grid points in row-major order.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.spec.len() as f64
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.spec.check_same(&other.spec)?;
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Two-component field, e.g. `p ≈ ∇u`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    first: ScalarField,
    second: ScalarField,
}

impl VectorField {
    pub fn new(first: ScalarField, second: ScalarField) -> Result<Self> {
        first.spec.check_same(&second.spec)?;
        Ok(Self { first, second })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            first: ScalarField::zeros(spec),
            second: ScalarField::zeros(spec),
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.first.spec
    }

    pub fn first(&self) -> &ScalarField {
        &self.first
    }

    pub fn second(&self) -> &ScalarField {
        &self.second
    }

    /// Component `k` in `{0, 1}`.
    pub fn component(&self, k: usize) -> &ScalarField {
        match k {
            0 => &self.first,
            1 => &self.second,
            _ => panic!("vector component index {k} out of range"),
        }
    }

    pub fn into_components(self) -> (ScalarField, ScalarField) {
        (self.first, self.second)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> [f64; 2] {
        [self.first.get(i, j), self.second.get(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.first.is_finite() && self.second.is_finite()
    }

    /// Sum over grid points of the pointwise dot product.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        Ok(self.first.dot(&other.first)? + self.second.dot(&other.second)?)
    }

    pub(crate) fn from_fn(spec: GridSpec, mut f: impl FnMut(usize, usize) -> [f64; 2]) -> Self {
        let mut a = Array2::zeros(spec.shape());
        let mut b = Array2::zeros(spec.shape());
        for i in 0..spec.rows() {
            for j in 0..spec.cols() {
                let [x, y] = f(i, j);
                a[(i, j)] = x;
                b[(i, j)] = y;
            }
        }
        Self {
            first: ScalarField::from_raw(spec, a),
            second: ScalarField::from_raw(spec, b),
        }
    }
}

/// 2x2 matrix field stored by entries; row `k` is `(g[k][0], g[k][1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    g11: ScalarField,
    g12: ScalarField,
    g21: ScalarField,
    g22: ScalarField,
}

impl TensorField {
    pub fn new(
        g11: ScalarField,
        g12: ScalarField,
        g21: ScalarField,
        g22: ScalarField,
    ) -> Result<Self> {
        let spec = g11.spec;
        for g in [&g12, &g21, &g22] {
            spec.check_same(&g.spec)?;
        }
        Ok(Self { g11, g12, g21, g22 })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            g11: ScalarField::zeros(spec),
            g12: ScalarField::zeros(spec),
            g21: ScalarField::zeros(spec),
            g22: ScalarField::zeros(spec),
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.g11.spec
    }

    /// Entry `(r, c)` with `r, c` in `{0, 1}`.
    pub fn entry(&self, r: usize, c: usize) -> &ScalarField {
        match (r, c) {
            (0, 0) => &self.g11,
            (0, 1) => &self.g12,
            (1, 0) => &self.g21,
            (1, 1) => &self.g22,
            _ => panic!("tensor entry ({r}, {c}) out of range"),
        }
    }

    /// Row `k` as a vector field.
    pub fn row(&self, k: usize) -> VectorField {
        VectorField {
            first: self.entry(k, 0).clone(),
            second: self.entry(k, 1).clone(),
        }
    }

    /// Pointwise `[g11, g12, g21, g22]`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> [f64; 4] {
        [
            self.g11.get(i, j),
            self.g12.get(i, j),
            self.g21.get(i, j),
            self.g22.get(i, j),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.g11.is_finite() && self.g12.is_finite() && self.g21.is_finite() && self.g22.is_finite()
    }

    /// Sum of absolute values of all entries.
    pub fn norm_l1(&self) -> f64 {
        [&self.g11, &self.g12, &self.g21, &self.g22]
            .iter()
            .map(|g| g.values.iter().map(|v| v.abs()).sum::<f64>())
            .sum()
    }

    pub(crate) fn from_fn(spec: GridSpec, mut f: impl FnMut(usize, usize) -> [f64; 4]) -> Self {
        let mut e = [
            Array2::zeros(spec.shape()),
            Array2::zeros(spec.shape()),
            Array2::zeros(spec.shape()),
            Array2::zeros(spec.shape()),
        ];
        for i in 0..spec.rows() {
            for j in 0..spec.cols() {
                let w = f(i, j);
                for (k, arr) in e.iter_mut().enumerate() {
                    arr[(i, j)] = w[k];
                }
            }
        }
        let [a, b, c, d] = e;
        Self {
            g11: ScalarField::from_raw(spec, a),
            g12: ScalarField::from_raw(spec, b),
            g21: ScalarField::from_raw(spec, c),
            g22: ScalarField::from_raw(spec, d),
        }
    }
}

/// Second derivatives at one grid point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Hessian {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Hessian {
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }
}

pub fn diff(v: &ScalarField, axis: Axis, scheme: Scheme) -> ScalarField {
    let inv_h = 1.0 / v.spec.h();
    let (di, dj) = match axis {
        Axis::First => (1, 0),
        Axis::Second => (0, 1),
    };
    ScalarField::from_fn(v.spec, |i, j| {
        let (i, j) = (i as isize, j as isize);
        match scheme {
            Scheme::Forward => (v.at(i + di, j + dj) - v.at(i, j)) * inv_h,
            Scheme::Backward => (v.at(i, j) - v.at(i - di, j - dj)) * inv_h,
        }
    })
}

pub fn diff_forward(v: &ScalarField, axis: Axis) -> ScalarField {
    diff(v, axis, Scheme::Forward)
}

pub fn diff_backward(v: &ScalarField, axis: Axis) -> ScalarField {
    diff(v, axis, Scheme::Backward)
}

pub fn grad(v: &ScalarField, scheme: Scheme) -> VectorField {
    VectorField {
        first: diff(v, Axis::First, scheme),
        second: diff(v, Axis::Second, scheme),
    }
}

pub fn div(q: &VectorField, scheme: Scheme) -> ScalarField {
    let a = diff(&q.first, Axis::First, scheme);
    let b = diff(&q.second, Axis::Second, scheme);
    let mut values = a.values;
    values += &b.values;
    ScalarField::from_raw(q.spec(), values)
}

/// Gradient of a vector field; row `k` holds the gradient of component `k`.
pub fn grad_vec(q: &VectorField, scheme: Scheme) -> TensorField {
    let g1 = grad(&q.first, scheme);
    let g2 = grad(&q.second, scheme);
    TensorField {
        g11: g1.first,
        g12: g1.second,
        g21: g2.first,
        g22: g2.second,
    }
}

/// Periodic five-point Laplacian, `div⁻ ∇⁺ v`.
pub fn laplacian(v: &ScalarField) -> ScalarField {
    let inv_h2 = 1.0 / (v.spec.h() * v.spec.h());
    ScalarField::from_fn(v.spec, |i, j| {
        let (i, j) = (i as isize, j as isize);
        (v.at(i + 1, j) + v.at(i - 1, j) + v.at(i, j + 1) + v.at(i, j - 1) - 4.0 * v.at(i, j))
            * inv_h2
    })
}

/// Central first differences `(v(i+1) - v(i-1)) / 2h` along both axes.
pub fn central_gradient_at(v: &ScalarField, i: usize, j: usize) -> [f64; 2] {
    let (i, j) = (i as isize, j as isize);
    let inv_2h = 0.5 / v.spec.h();
    [
        (v.at(i + 1, j) - v.at(i - 1, j)) * inv_2h,
        (v.at(i, j + 1) - v.at(i, j - 1)) * inv_2h,
    ]
}

pub fn central_gradient(v: &ScalarField) -> VectorField {
    VectorField::from_fn(v.spec, |i, j| central_gradient_at(v, i, j))
}

/// Central second differences at `(i, j)`; the mixed term uses the four
/// diagonal neighbours over `4h²`.
pub fn discrete_hessian(v: &ScalarField, i: usize, j: usize) -> Hessian {
    let (i, j) = (i as isize, j as isize);
    let inv_h2 = 1.0 / (v.spec.h() * v.spec.h());
    let c = v.at(i, j);
    Hessian {
        xx: (v.at(i + 1, j) - 2.0 * c + v.at(i - 1, j)) * inv_h2,
        yy: (v.at(i, j + 1) - 2.0 * c + v.at(i, j - 1)) * inv_h2,
        xy: (v.at(i + 1, j + 1) - v.at(i + 1, j - 1) - v.at(i - 1, j + 1) + v.at(i - 1, j - 1))
            * 0.25
            * inv_h2,
    }
}

/// Whole-field discrete Hessian as a symmetric tensor field.
pub fn hessian_field(v: &ScalarField) -> TensorField {
    TensorField::from_fn(v.spec, |i, j| {
        let hs = discrete_hessian(v, i, j);
        [hs.xx, hs.xy, hs.xy, hs.yy]
    })
}
