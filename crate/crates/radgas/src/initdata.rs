use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{RadgasError, Result};
use crate::field::{forward_transform, inverse_transform, RealField, SpectralField};
use crate::grid::Grid;
use crate::norms::{hk_norm, lp_norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitKind {
    /// `A * exp(-|x-c|^2 / (2 sigma^2))`, centered in the box by default.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Derivative of a Gaussian along one axis: zero-mass, odd data.
    Dipole {
        amplitude: f64,
        width: f64,
        axis: usize,
    },
    /// `|u_hat(xi)| = |xi|^sigma_exp` for `0 < |xi| <= cutoff`, random
    /// Hermitian phases from the seed, zero elsewhere (including xi = 0).
    SpectralProfile {
        sigma_exp: f64,
        cutoff: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "snake_case", deny_unknown_fields)]
pub enum RescaleNorm {
    L2,
    Hn { n: u32 },
}

// No deny_unknown_fields here: serde cannot combine it with flatten.
// The flattened tagged enums still reject unknown fields themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescale {
    #[serde(flatten)]
    pub norm: RescaleNorm,
    pub target: f64,
}

// deny_unknown_fields omitted: incompatible with the flattened kind tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    #[serde(flatten)]
    pub kind: InitKind,
    #[serde(default)]
    pub rescale: Option<Rescale>,
}

impl InitSpec {
    pub fn build(&self, grid: &Arc<Grid>) -> Result<RealField> {
        let raw = match &self.kind {
            InitKind::Gaussian {
                amplitude,
                width,
                center,
            } => {
                let c = center_or_default(grid, center.as_deref())?;
                gaussian_bump(grid, *amplitude, *width, &c)?
            }
            InitKind::Dipole {
                amplitude,
                width,
                axis,
            } => dipole(grid, *amplitude, *width, *axis)?,
            InitKind::SpectralProfile {
                sigma_exp,
                cutoff,
                seed,
            } => spectral_profile(grid, *sigma_exp, *cutoff, *seed)?,
        };
        match &self.rescale {
            Some(r) => rescale_to(&raw, r.norm, r.target),
            None => Ok(raw),
        }
    }
}

fn center_or_default(grid: &Arc<Grid>, center: Option<&[f64]>) -> Result<Vec<f64>> {
    match center {
        Some(c) => {
            if c.len() != grid.dim() {
                return Err(RadgasError::InvalidParameter(format!(
                    "center has {} components, grid dimension is {}",
                    c.len(),
                    grid.dim()
                )));
            }
            Ok(c.to_vec())
        }
        None => Ok(vec![grid.length() / 2.0; grid.dim()]),
    }
}

fn check_width(grid: &Arc<Grid>, width: f64) -> Result<()> {
    if !(width > 0.0) {
        return Err(RadgasError::InvalidParameter("width must be positive".into()));
    }
    if width > grid.length() / 12.0 {
        return Err(RadgasError::InvalidParameter(format!(
            "width {width} too large for box length {} (limit L/12)",
            grid.length()
        )));
    }
    Ok(())
}

/// Centered Gaussian bump; analytic mass `A * (sigma * sqrt(2 pi))^n`.
pub fn gaussian_bump(grid: &Arc<Grid>, amplitude: f64, width: f64, center: &[f64]) -> Result<RealField> {
    check_width(grid, width)?;
    let w2 = 2.0 * width * width;
    Ok(RealField::from_fn(grid.clone(), |x| {
        let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
        amplitude * (-r2 / w2).exp()
    }))
}

pub fn gaussian_mass(grid: &Arc<Grid>, amplitude: f64, width: f64) -> f64 {
    amplitude * (width * (2.0 * std::f64::consts::PI).sqrt()).powi(grid.dim() as i32)
}

/// Axis derivative of a centered Gaussian: odd about the center, zero mass.
pub fn dipole(grid: &Arc<Grid>, amplitude: f64, width: f64, axis: usize) -> Result<RealField> {
    check_width(grid, width)?;
    if axis >= grid.dim() {
        return Err(RadgasError::InvalidParameter(format!(
            "dipole axis {axis} out of range for dimension {}",
            grid.dim()
        )));
    }
    let c = grid.length() / 2.0;
    let w2 = 2.0 * width * width;
    let s2 = width * width;
    Ok(RealField::from_fn(grid.clone(), |x| {
        let r2: f64 = x.iter().map(|a| (a - c) * (a - c)).sum();
        -amplitude * (x[axis] - c) / s2 * (-r2 / w2).exp()
    }))
}

/// Frequency-localized random data with prescribed low-frequency power law.
/// Deterministic in (grid, sigma_exp, cutoff, seed); exactly mean-free.
pub fn spectral_profile(grid: &Arc<Grid>, sigma_exp: f64, cutoff: f64, seed: u64) -> Result<RealField> {
    if !(cutoff > 0.0) {
        return Err(RadgasError::InvalidParameter("cutoff must be positive".into()));
    }
    let nyquist = grid.mode_spacing() * (grid.points() / 2) as f64;
    if cutoff > nyquist {
        return Err(RadgasError::InvalidParameter(format!(
            "cutoff {cutoff} exceeds the Nyquist wavenumber {nyquist}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = SpectralField::zeros(grid.clone());
    let m = grid.points();
    let dim = grid.dim();
    let cut_sq = cutoff * cutoff;
    let total = grid.total_modes();
    let xi_sq = grid.xi_sq().to_vec();
    let coeffs = field.coeffs_mut();
    for idx in 0..total {
        let x2 = xi_sq[idx];
        if x2 == 0.0 || x2 > cut_sq {
            continue;
        }
        // mirrored index of -xi (mod M per axis)
        let mut rem = idx;
        let mut mirror = 0usize;
        let mut mult = 1usize;
        for _ in 0..dim {
            let ax = rem % m;
            rem /= m;
            mirror += ((m - ax) % m) * mult;
            mult *= m;
        }
        if idx > mirror {
            continue; // handled from the representative below
        }
        let mag = x2.powf(0.5 * sigma_exp);
        if idx == mirror {
            // self-conjugate mode must be real
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            coeffs[idx] = Complex64::new(sign * mag, 0.0);
        } else {
            let phase: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
            let c = Complex64::new(mag * phase.cos(), mag * phase.sin());
            coeffs[idx] = c;
            coeffs[mirror] = c.conj();
        }
    }
    let mut real = inverse_transform(&field);
    // pin the discrete mean to exactly zero
    let mean = real.values().iter().sum::<f64>() / real.values().len() as f64;
    for v in real.values_mut() {
        *v -= mean;
    }
    Ok(real)
}

/// Multiply by the unique scalar making the named norm equal `target`.
pub fn rescale_to(u: &RealField, norm: RescaleNorm, target: f64) -> Result<RealField> {
    if !(target > 0.0) {
        return Err(RadgasError::InvalidParameter("rescale target must be positive".into()));
    }
    let current = match norm {
        RescaleNorm::L2 => lp_norm(u, 2.0),
        RescaleNorm::Hn { n } => hk_norm(&forward_transform(u), n),
    };
    if current == 0.0 {
        return Err(RadgasError::InvalidParameter("cannot rescale the zero field".into()));
    }
    let mut out = u.clone();
    out.scale(target / current);
    Ok(out)
}
