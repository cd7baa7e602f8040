use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{RadgasError, Result};
use crate::grid::Grid;

/// Point samples of a real scalar on the grid.
#[derive(Debug, Clone)]
pub struct RealField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// Discrete Fourier coefficients with the convention
/// `u_hat(xi_k) = dx^n * sum_j u(x_j) exp(-i xi_k . x_j)`,
/// so `u_hat(0) = integral of u` and `max|u_hat| <= ||u||_L1` exactly.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.total_modes() {
            return Err(RadgasError::SizeMismatch {
                got: values.len(),
                expected: grid.total_modes(),
            });
        }
        Ok(RealField { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.total_modes();
        RealField {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.total_modes())
            .map(|i| f(&grid.point(i)))
            .collect();
        RealField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }
}

impl SpectralField {
    pub fn new(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.total_modes() {
            return Err(RadgasError::SizeMismatch {
                got: coeffs.len(),
                expected: grid.total_modes(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.total_modes();
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// The zero mode, equal to the discrete integral of the field.
    pub fn mass(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Max deviation from Hermitian symmetry u_hat(-xi) = conj(u_hat(xi)),
    /// normalized by the largest coefficient magnitude.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let m = g.points();
        let sup = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
        if sup == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for (idx, c) in self.coeffs.iter().enumerate() {
            // index of the mirrored mode -k (mod M) per axis
            let mut rem = idx;
            let mut mirror = 0usize;
            let mut mult = 1usize;
            for _ in 0..g.dim() {
                let ax = rem % m;
                rem /= m;
                let neg = (m - ax) % m;
                mirror += neg * mult;
                mult *= m;
            }
            let d = (*c - self.coeffs[mirror].conj()).norm();
            worst = worst.max(d);
        }
        worst / sup
    }
}

// rustfft planners are not Sync; plans themselves are shareable.
static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    match direction {
        FftDirection::Forward => planner.plan_fft_forward(len),
        FftDirection::Inverse => planner.plan_fft_inverse(len),
    }
}

/// Unnormalized n-dimensional complex FFT, one axis at a time.
fn fft_nd(data: &mut [Complex64], grid: &Grid, direction: FftDirection) {
    let m = grid.points();
    let dim = grid.dim();
    let fft = plan(m, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // innermost axis: contiguous lines
    for chunk in data.chunks_exact_mut(m) {
        fft.process_with_scratch(chunk, &mut scratch);
    }

    // remaining axes: gather strided lines into a buffer
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..dim.saturating_sub(1) {
        let stride = m.pow((dim - 1 - axis) as u32);
        let block = stride * m;
        let outer = data.len() / block;
        for o in 0..outer {
            let base_block = o * block;
            for inner in 0..stride {
                let base = base_block + inner;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, slot) in line.iter().enumerate() {
                    data[base + j * stride] = *slot;
                }
            }
        }
    }
}

/// Forward transform: `u_hat(xi_k) = dx^n * DFT(u)`.
pub fn forward_transform(f: &RealField) -> SpectralField {
    let grid = f.grid.clone();
    let mut coeffs: Vec<Complex64> = f
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft_nd(&mut coeffs, &grid, FftDirection::Forward);
    let w = grid.cell_volume();
    for c in &mut coeffs {
        *c *= w;
    }
    SpectralField { grid, coeffs }
}

/// Inverse transform: `u(x_j) = L^{-n} * IDFT(u_hat)`, real part taken.
pub fn inverse_transform(g: &SpectralField) -> RealField {
    let grid = g.grid.clone();
    let mut buf = g.coeffs.clone();
    fft_nd(&mut buf, &grid, FftDirection::Inverse);
    let w = 1.0 / grid.box_volume();
    let values = buf.iter().map(|c| c.re * w).collect();
    RealField { grid, values }
}
