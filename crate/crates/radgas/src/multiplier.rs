use num_complex::Complex64;

use crate::error::{RadgasError, Result};
use crate::field::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierKind {
    /// i * xi_axis, with the Nyquist mode zeroed to keep real fields real.
    PartialDerivative(usize),
    /// -|xi|^2
    Laplacian,
    /// 1 / (1 + |xi|^2)
    InvHelmholtz,
    /// |xi|^s
    RieszPower(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroModePolicy {
    Keep,
    Annihilate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierSpec {
    pub kind: MultiplierKind,
    pub zero_mode: ZeroModePolicy,
}

impl MultiplierSpec {
    pub fn partial_derivative(axis: usize) -> Self {
        MultiplierSpec {
            kind: MultiplierKind::PartialDerivative(axis),
            zero_mode: ZeroModePolicy::Keep,
        }
    }

    pub fn laplacian() -> Self {
        MultiplierSpec {
            kind: MultiplierKind::Laplacian,
            zero_mode: ZeroModePolicy::Keep,
        }
    }

    pub fn inv_helmholtz() -> Self {
        MultiplierSpec {
            kind: MultiplierKind::InvHelmholtz,
            zero_mode: ZeroModePolicy::Keep,
        }
    }

    /// Negative powers annihilate the zero mode; the isolated xi = 0 point
    /// has no meaningful |xi|^s value there.
    pub fn riesz_power(s: f64) -> Self {
        MultiplierSpec {
            kind: MultiplierKind::RieszPower(s),
            zero_mode: if s < 0.0 {
                ZeroModePolicy::Annihilate
            } else {
                ZeroModePolicy::Keep
            },
        }
    }

    pub fn with_zero_mode(mut self, policy: ZeroModePolicy) -> Self {
        self.zero_mode = policy;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self.kind {
            MultiplierKind::PartialDerivative(axis) if axis >= dim => {
                Err(RadgasError::InvalidParameter(format!(
                    "derivative axis {axis} out of range for dimension {dim}"
                )))
            }
            MultiplierKind::RieszPower(s) if s < 0.0 && self.zero_mode == ZeroModePolicy::Keep => {
                Err(RadgasError::InvalidParameter(
                    "riesz_power with s < 0 requires zero_mode = annihilate".into(),
                ))
            }
            MultiplierKind::RieszPower(s) if !s.is_finite() => Err(
                RadgasError::InvalidParameter("riesz_power exponent must be finite".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// Coefficient-wise application of a Fourier multiplier.
pub fn apply_multiplier(g: &SpectralField, m: &MultiplierSpec) -> Result<SpectralField> {
    let grid = g.grid().clone();
    m.validate(grid.dim())?;
    let mut out = g.clone();
    let coeffs = out.coeffs_mut();
    match m.kind {
        MultiplierKind::PartialDerivative(axis) => {
            for (idx, c) in coeffs.iter_mut().enumerate() {
                if grid.is_nyquist(idx, axis) {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    let xi = grid.axis_wavenumber(idx, axis);
                    *c *= Complex64::new(0.0, xi);
                }
            }
        }
        MultiplierKind::Laplacian => {
            let xi_sq = grid.xi_sq();
            for (c, &x2) in coeffs.iter_mut().zip(xi_sq) {
                *c *= -x2;
            }
        }
        MultiplierKind::InvHelmholtz => {
            let xi_sq = grid.xi_sq();
            for (c, &x2) in coeffs.iter_mut().zip(xi_sq) {
                *c *= 1.0 / (1.0 + x2);
            }
        }
        MultiplierKind::RieszPower(s) => {
            let xi_sq = grid.xi_sq();
            for (c, &x2) in coeffs.iter_mut().zip(xi_sq) {
                if x2 == 0.0 {
                    // handled by the zero-mode policy below; |0|^s for s > 0 is 0
                    if s > 0.0 {
                        *c = Complex64::new(0.0, 0.0);
                    }
                } else {
                    *c *= x2.powf(0.5 * s);
                }
            }
        }
    }
    if m.zero_mode == ZeroModePolicy::Annihilate {
        coeffs[0] = Complex64::new(0.0, 0.0);
    }
    Ok(out)
}

/// Zero every mode whose index along any axis exceeds `rule * M/2` in
/// magnitude. `rule = 1` is the identity; the operation is idempotent.
pub fn dealias(g: &SpectralField, rule: f64) -> SpectralField {
    let grid = g.grid().clone();
    let mut out = g.clone();
    if rule >= 1.0 {
        return out;
    }
    let cutoff = (rule * (grid.points() / 2) as f64).floor() as isize;
    let dim = grid.dim();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        for axis in 0..dim {
            if grid.axis_mode(idx, axis).abs() > cutoff {
                *c = Complex64::new(0.0, 0.0);
                break;
            }
        }
    }
    out
}
