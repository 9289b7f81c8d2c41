//! Periodic elliptic solves via the 2-D discrete Fourier transform.
//!
//! Every symbol used by the splitting scheme has the form
//! `s(i, j) = k0 + k1 (4 - 2 cos z_i - 2 cos z_j)` with
//! `z_i = 2π i / M`, `z_j = 2π j / N` (0-based), which is the Fourier
//! image of the stencil `k0·v + k1·(4v - Σ neighbours)`. The stencil is
//! kept next to the symbol so solves can be checked against it.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{ensure_positive, Error, Result};
use crate::grid::{GridSpec, ScalarField};

/// Real per-frequency divisor of a periodic constant-coefficient operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSymbol {
    spec: GridSpec,
    constant: f64,
    coupling: f64,
    coefficients: Array2<f64>,
}

impl SpectralSymbol {
    /// `constant + coupling · (4 - 2 cos z_i - 2 cos z_j)`.
    pub fn new(spec: GridSpec, constant: f64, coupling: f64) -> Result<Self> {
        ensure_positive("symbol constant", constant)?;
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "symbol coupling",
                value: coupling,
                reason: "must be finite and non-negative",
            });
        }
        let (m, n) = spec.shape();
        let coefficients = Array2::from_shape_fn((m, n), |(i, j)| {
            let zi = 2.0 * PI * i as f64 / m as f64;
            let zj = 2.0 * PI * j as f64 / n as f64;
            constant + coupling * (4.0 - 2.0 * zi.cos() - 2.0 * zj.cos())
        });
        Ok(Self {
            spec,
            constant,
            coupling,
            coefficients,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn coefficients(&self) -> &Array2<f64> {
        &self.coefficients
    }

    /// Zero-frequency value, also the smallest entry.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// The spatial operator whose Fourier symbol this is.
    pub fn apply_operator(&self, v: &ScalarField) -> Result<ScalarField> {
        self.spec.check_same(&v.spec())?;
        let (k0, k1) = (self.constant, self.coupling);
        Ok(ScalarField::from_fn(self.spec, |i, j| {
            let (i, j) = (i as isize, j as isize);
            let c = v.at(i, j);
            let nb = v.at(i + 1, j) + v.at(i - 1, j) + v.at(i, j + 1) + v.at(i, j - 1);
            k0 * c + k1 * (4.0 * c - nb)
        }))
    }

    fn check_positive(&self) -> Result<()> {
        for ((row, col), &value) in self.coefficients.indexed_iter() {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::NonPositiveSymbol { row, col, value });
            }
        }
        Ok(())
    }
}

/// Symbol of `[η h² I - h² Δ_h]`, used for the `p^{n+3/4}` solve.
pub fn build_symbol_a(spec: GridSpec, eta: f64) -> Result<SpectralSymbol> {
    ensure_positive("eta", eta)?;
    SpectralSymbol::new(spec, eta * spec.h() * spec.h(), 1.0)
}

/// Symbol of `[γ τ h² I - η h² Δ_h]`, used for the `u^{n+1}` solve.
pub fn build_symbol_b(spec: GridSpec, eta: f64, gamma: f64, tau: f64) -> Result<SpectralSymbol> {
    ensure_positive("eta", eta)?;
    ensure_positive("gamma", gamma)?;
    ensure_positive("tau", tau)?;
    SpectralSymbol::new(spec, gamma * tau * spec.h() * spec.h(), eta)
}

/// Symbol of `[h² I - ε h² Δ_h]`, used for the smoothed initialization.
pub fn build_symbol_c(spec: GridSpec, epsilon: f64) -> Result<SpectralSymbol> {
    ensure_positive("epsilon", epsilon)?;
    SpectralSymbol::new(spec, spec.h() * spec.h(), epsilon)
}

/// Result of a solve together with the discarded imaginary part.
#[derive(Clone, Debug)]
pub struct PeriodicSolution {
    pub field: ScalarField,
    /// `max |Im| / max(max |Re|, tiny)` of the inverse transform.
    pub imaginary_ratio: f64,
}

/// Cached forward/inverse FFT plans for one grid size.
///
/// Plans are immutable and shared through `Arc`, so one solver may be used
/// from several threads at once; every call allocates its own buffers.
#[derive(Clone)]
pub struct PeriodicSolver {
    spec: GridSpec,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicSolver")
            .field("spec", &self.spec)
            .finish_non_exhaustive()
    }
}

impl PeriodicSolver {
    pub fn new(spec: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            spec,
            row_fwd: planner.plan_fft_forward(spec.cols()),
            row_inv: planner.plan_fft_inverse(spec.cols()),
            col_fwd: planner.plan_fft_forward(spec.rows()),
            col_inv: planner.plan_fft_inverse(spec.rows()),
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    /// Unnormalized forward 2-D DFT.
    pub fn forward(&self, v: &ScalarField) -> Result<Array2<Complex64>> {
        self.spec.check_same(&v.spec())?;
        let mut data: Array2<Complex64> = v.values().mapv(|x| Complex64::new(x, 0.0));
        self.transform(&mut data, false);
        Ok(data)
    }

    /// Inverse 2-D DFT, normalized by `1 / (M N)`.
    pub fn inverse(&self, spectrum: &Array2<Complex64>) -> Array2<Complex64> {
        assert_eq!(spectrum.dim(), self.spec.shape(), "spectrum shape");
        let mut data = spectrum.as_standard_layout().into_owned();
        self.transform(&mut data, true);
        let scale = 1.0 / self.spec.len() as f64;
        data.mapv_inplace(|c| c * scale);
        data
    }

    /// `Re[F⁻¹(F(rhs) / symbol)]`.
    pub fn solve(&self, rhs: &ScalarField, symbol: &SpectralSymbol) -> Result<ScalarField> {
        self.solve_detailed(rhs, symbol).map(|s| s.field)
    }

    pub fn solve_detailed(
        &self,
        rhs: &ScalarField,
        symbol: &SpectralSymbol,
    ) -> Result<PeriodicSolution> {
        self.spec.check_same(&symbol.spec())?;
        symbol.check_positive()?;
        let mut spectrum = self.forward(rhs)?;
        spectrum.zip_mut_with(symbol.coefficients(), |c, &s| *c /= s);
        let out = self.inverse(&spectrum);

        let (mut max_re, mut max_im) = (0.0f64, 0.0f64);
        for c in out.iter() {
            max_re = max_re.max(c.re.abs());
            max_im = max_im.max(c.im.abs());
        }
        let field = ScalarField::from_raw(self.spec, out.mapv(|c| c.re));
        Ok(PeriodicSolution {
            field,
            imaginary_ratio: max_im / max_re.max(f64::MIN_POSITIVE),
        })
    }

    fn transform(&self, data: &mut Array2<Complex64>, inverse: bool) {
        let (m, n) = self.spec.shape();
        let (row_plan, col_plan) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };

        // Rows are contiguous in standard layout: one call covers all of them.
        let flat = data
            .as_slice_mut()
            .expect("field arrays are in standard layout");
        row_plan.process(flat);

        let mut columns = vec![Complex64::default(); m * n];
        for i in 0..m {
            for j in 0..n {
                columns[j * m + i] = flat[i * n + j];
            }
        }
        col_plan.process(&mut columns);
        for i in 0..m {
            for j in 0..n {
                flat[i * n + j] = columns[j * m + i];
            }
        }
    }
}

/// One-shot solve that plans its own transforms.
pub fn solve_periodic(rhs: &ScalarField, symbol: &SpectralSymbol) -> Result<ScalarField> {
    PeriodicSolver::new(rhs.spec()).solve(rhs, symbol)
}
