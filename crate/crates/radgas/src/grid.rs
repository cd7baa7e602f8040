use std::sync::Arc;

use crate::error::{RadgasError, Result};

/// Hard cap on the total number of lattice modes (`points^dim`).
pub const MAX_TOTAL_MODES: usize = 1 << 26;

/// Periodic cubic box discretization: `points` samples per axis on a box of
/// side `length`, with angular wavenumbers `xi_k = 2*pi*k/length` for integer
/// `k` in `[-M/2, M/2)` stored in FFT order.
#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
    /// Per-axis wavenumber table in FFT order: index m holds xi of
    /// k = m for m < M/2 and k = m - M otherwise.
    wavenumbers: Vec<f64>,
    /// |xi|^2 for every flattened lattice mode (row-major, axis 0 outermost).
    xi_sq: Vec<f64>,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Arc<Grid>> {
        if !(1..=4).contains(&dim) {
            return Err(RadgasError::InvalidGrid(format!(
                "dimension must be in 1..=4, got {dim}"
            )));
        }
        // even M keeps the mode set symmetric with a single Nyquist mode;
        // the FFT itself is mixed-radix and takes any size
        if points < 16 || points % 2 != 0 {
            return Err(RadgasError::InvalidGrid(format!(
                "points per axis must be even and >= 16, got {points}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(RadgasError::InvalidGrid(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        let total = points
            .checked_pow(dim as u32)
            .filter(|&n| n <= MAX_TOTAL_MODES)
            .ok_or_else(|| {
                RadgasError::InvalidGrid(format!(
                    "{points}^{dim} modes exceeds the cap of {MAX_TOTAL_MODES}"
                ))
            })?;

        let dxi = 2.0 * std::f64::consts::PI / length;
        let half = points / 2;
        let wavenumbers: Vec<f64> = (0..points)
            .map(|m| {
                let k = if m < half { m as isize } else { m as isize - points as isize };
                dxi * k as f64
            })
            .collect();

        let mut xi_sq = vec![0.0; total];
        for (idx, v) in xi_sq.iter_mut().enumerate() {
            let mut rem = idx;
            let mut s = 0.0;
            for _ in 0..dim {
                let m = rem % points;
                rem /= points;
                let xi = wavenumbers[m];
                s += xi * xi;
            }
            *v = s;
        }

        Ok(Arc::new(Grid {
            dim,
            points,
            length,
            wavenumbers,
            xi_sq,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Delta-xi = 2*pi/L.
    pub fn mode_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    pub fn total_modes(&self) -> usize {
        self.xi_sq.len()
    }

    /// dx^n, the forward-transform quadrature weight.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// L^n, the box volume.
    pub fn box_volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// |xi|^2 per flattened mode, in the same layout as spectral coefficients.
    pub fn xi_sq(&self) -> &[f64] {
        &self.xi_sq
    }

    /// Per-axis FFT-order index of a flattened mode. Axis 0 is outermost:
    /// the inner-loop axis (last axis) varies fastest.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        debug_assert!(axis < self.dim);
        let mut rem = flat;
        for _ in 0..(self.dim - 1 - axis) {
            rem /= self.points;
        }
        rem % self.points
    }

    /// Signed integer mode number along an axis for a flattened index.
    pub fn axis_mode(&self, flat: usize, axis: usize) -> isize {
        let m = self.axis_index(flat, axis);
        if m < self.points / 2 {
            m as isize
        } else {
            m as isize - self.points as isize
        }
    }

    /// Wavenumber component along an axis for a flattened index.
    pub fn axis_wavenumber(&self, flat: usize, axis: usize) -> f64 {
        self.wavenumbers[self.axis_index(flat, axis)]
    }

    pub fn is_nyquist(&self, flat: usize, axis: usize) -> bool {
        self.axis_index(flat, axis) == self.points / 2
    }

    /// Physical coordinates of a flattened grid point, in [0, L)^n.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let dx = self.spacing();
        let mut x = vec![0.0; self.dim];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            x[axis] = (rem % self.points) as f64 * dx;
            rem /= self.points;
        }
        x
    }
}

/// `make_grid` as the public constructor name used by the CLI and presets.
pub fn make_grid(dim: usize, points: usize, length: f64) -> Result<Arc<Grid>> {
    Grid::new(dim, points, length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_1d_grid() {
        let g = make_grid(1, 16, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(g.total_modes(), 16);
        assert!((g.spacing() - 2.0 * std::f64::consts::PI / 16.0).abs() < 1e-15);
        // wavenumber lattice is the integers -8..=7 in FFT order
        let mut ks: Vec<isize> = (0..16).map(|i| g.axis_mode(i, 0)).collect();
        ks.sort_unstable();
        assert_eq!(ks, (-8..8).collect::<Vec<_>>());
        // spacing * points reproduces the length exactly: L/M is exact here
        assert_eq!(g.spacing() * 16.0, g.length());
    }

    #[test]
    fn grid_2d_mode_count_and_spacing() {
        let g = make_grid(2, 32, 10.0).unwrap();
        assert_eq!(g.total_modes(), 1024);
        assert!((g.mode_spacing() - 2.0 * std::f64::consts::PI / 10.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_grid(1, 15, 1.0).is_err());
        assert!(make_grid(1, 8, 1.0).is_err());
        assert!(make_grid(0, 16, 1.0).is_err());
        assert!(make_grid(5, 16, 1.0).is_err());
        assert!(make_grid(1, 16, 0.0).is_err());
        assert!(make_grid(1, 16, -2.0).is_err());
        // memory cap: 4096^3 modes is far beyond the cap
        assert!(make_grid(3, 4096, 1.0).is_err());
    }

    #[test]
    fn wavenumber_lattice_symmetric_except_nyquist() {
        let g = make_grid(1, 32, 5.0).unwrap();
        let w = g.wavenumbers();
        for m in 1..16 {
            assert!((w[m] + w[32 - m]).abs() < 1e-12);
        }
        // Nyquist index has no positive partner
        assert!(w[16] < 0.0);
    }

    #[test]
    fn axis_decomposition_consistent() {
        let g = make_grid(3, 16, 1.0).unwrap();
        let flat = (3 * 16 + 5) * 16 + 9;
        assert_eq!(g.axis_index(flat, 0), 3);
        assert_eq!(g.axis_index(flat, 1), 5);
        assert_eq!(g.axis_index(flat, 2), 9);
        let xs = g.point(flat);
        assert!((xs[1] - 5.0 * g.spacing()).abs() < 1e-15);
    }
}
