use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{RadgasError, Result};
use crate::field::{forward_transform, inverse_transform, RealField, SpectralField};
use crate::multiplier::dealias;
use crate::norms::weighted_spectral_sum;

/// Polynomial flux with zero constant and linear part:
/// `f_j(u) = c2[j] * u^2 + c3[j] * u^3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSpec {
    /// One (c2, c3) pair per axis.
    pub coefficients: Vec<(f64, f64)>,
}

impl FluxSpec {
    /// The default `f_j(u) = u^2` on every axis.
    pub fn quadratic(dim: usize) -> Self {
        FluxSpec {
            coefficients: vec![(1.0, 0.0); dim],
        }
    }

    /// Flux identically zero: the linear subproblem.
    pub fn zero(dim: usize) -> Self {
        FluxSpec {
            coefficients: vec![(0.0, 0.0); dim],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.coefficients.len() != dim {
            return Err(RadgasError::InvalidParameter(format!(
                "flux has {} axes, grid has {dim}",
                self.coefficients.len()
            )));
        }
        if self
            .coefficients
            .iter()
            .any(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(RadgasError::InvalidParameter(
                "flux coefficients must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&(a, b)| a == 0.0 && b == 0.0)
    }

    fn axes_identical(&self) -> bool {
        self.coefficients.windows(2).all(|w| w[0] == w[1])
    }

    pub fn eval_axis(&self, axis: usize, u: f64) -> f64 {
        let (c2, c3) = self.coefficients[axis];
        (c2 + c3 * u) * u * u
    }

    /// f_j'(u) = 2 c2 u + 3 c3 u^2.
    pub fn derivative_axis(&self, axis: usize, u: f64) -> f64 {
        let (c2, c3) = self.coefficients[axis];
        (2.0 * c2 + 3.0 * c3 * u) * u
    }

    /// `max_j sup_x |f_j'(u(x))|`, the advective wave speed.
    pub fn max_wave_speed(&self, u: &RealField) -> f64 {
        let mut speed = 0.0_f64;
        for axis in 0..self.coefficients.len() {
            for &v in u.values() {
                speed = speed.max(self.derivative_axis(axis, v).abs());
            }
        }
        speed
    }
}

/// Radiative heat flux: one real component per axis.
#[derive(Debug, Clone)]
pub struct FluxField {
    pub components: Vec<RealField>,
}

/// Pointwise evaluation of every `f_j(u)`.
pub fn flux_eval(spec: &FluxSpec, u: &RealField) -> Result<Vec<RealField>> {
    spec.validate(u.grid().dim())?;
    (0..u.grid().dim())
        .map(|axis| {
            let vals: Vec<f64> = u.values().iter().map(|&v| spec.eval_axis(axis, v)).collect();
            RealField::new(u.grid().clone(), vals)
        })
        .collect()
}

/// Fourier symbol of the linear part of the decoupled equation:
/// `m(xi) = -1 + 1/(1+|xi|^2) = -|xi|^2/(1+|xi|^2)`, in (-1, 0].
pub fn symbol_from_xi_sq(xi_sq: f64) -> f64 {
    // the -1 + 1/(1+x) form keeps the value strictly above -1 even when
    // x/(1+x) would round to 1
    -1.0 + 1.0 / (1.0 + xi_sq)
}

pub fn linear_symbol(xi: &[f64]) -> f64 {
    symbol_from_xi_sq(xi.iter().map(|v| v * v).sum())
}

/// Pseudo-spectral `-sum_j d/dx_j f_j(u)`: pointwise flux, transform,
/// multiply by -i xi_j, dealias. The zero mode of the result is exactly 0.
pub fn nonlinear_term(u: &RealField, spec: &FluxSpec, rule: f64) -> Result<SpectralField> {
    let grid = u.grid().clone();
    spec.validate(grid.dim())?;
    let dim = grid.dim();
    let mut acc = SpectralField::zeros(grid.clone());

    // with identical per-axis polynomials one transform serves all axes
    let shared = spec.axes_identical();
    let mut fhat_shared: Option<SpectralField> = None;
    for axis in 0..dim {
        let fhat = if shared {
            if fhat_shared.is_none() {
                let vals: Vec<f64> = u.values().iter().map(|&v| spec.eval_axis(0, v)).collect();
                if vals.iter().any(|v| !v.is_finite()) {
                    return Err(RadgasError::BlowUp { t: f64::NAN });
                }
                fhat_shared = Some(forward_transform(&RealField::new(grid.clone(), vals)?));
            }
            fhat_shared.as_ref().unwrap()
        } else {
            let vals: Vec<f64> = u
                .values()
                .iter()
                .map(|&v| spec.eval_axis(axis, v))
                .collect();
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(RadgasError::BlowUp { t: f64::NAN });
            }
            fhat_shared = Some(forward_transform(&RealField::new(grid.clone(), vals)?));
            fhat_shared.as_ref().unwrap()
        };
        let coeffs = acc.coeffs_mut();
        for (idx, c) in fhat.coeffs().iter().enumerate() {
            if grid.is_nyquist(idx, axis) {
                continue;
            }
            let xi = grid.axis_wavenumber(idx, axis);
            // -i*xi*c
            coeffs[idx] += Complex64::new(xi * c.im, -xi * c.re);
        }
    }
    let mut out = dealias(&acc, rule);
    out.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    Ok(out)
}

/// Full right-hand side of the decoupled system: `m(xi) u_hat + N(u)`.
pub fn rhs(u_hat: &SpectralField, spec: &FluxSpec, rule: f64) -> Result<SpectralField> {
    let grid = u_hat.grid().clone();
    let mut out = if spec.is_zero() {
        SpectralField::zeros(grid.clone())
    } else {
        nonlinear_term(&inverse_transform(u_hat), spec, rule)?
    };
    let xi_sq = grid.xi_sq();
    let coeffs = out.coeffs_mut();
    for (idx, c) in u_hat.coeffs().iter().enumerate() {
        coeffs[idx] += symbol_from_xi_sq(xi_sq[idx]) * c;
    }
    Ok(out)
}

/// Spectral coefficients of `q_j = -(I-Delta)^{-1} d/dx_j u`:
/// `q_hat_j = -i xi_j u_hat / (1+|xi|^2)`.
pub fn recover_q_spectral(u_hat: &SpectralField) -> Vec<SpectralField> {
    let grid = u_hat.grid().clone();
    let xi_sq = grid.xi_sq();
    (0..grid.dim())
        .map(|axis| {
            let mut q = SpectralField::zeros(grid.clone());
            let qc = q.coeffs_mut();
            for (idx, c) in u_hat.coeffs().iter().enumerate() {
                if grid.is_nyquist(idx, axis) {
                    continue;
                }
                let xi = grid.axis_wavenumber(idx, axis);
                let w = 1.0 / (1.0 + xi_sq[idx]);
                // -i*xi*w*c
                qc[idx] = Complex64::new(xi * w * c.im, -xi * w * c.re);
            }
            q
        })
        .collect()
}

pub fn recover_q(u_hat: &SpectralField) -> FluxField {
    FluxField {
        components: recover_q_spectral(u_hat)
            .iter()
            .map(inverse_transform)
            .collect(),
    }
}

/// L2 residuals of both equations of the coupled system, given a state, a
/// candidate flux and a time derivative: first
/// `u_t + sum_j f_j(u)_{x_j} + div q` and second `-grad div q + q + grad u`
/// (componentwise, summed in quadrature).
pub fn residual_check(
    u: &RealField,
    q: &FluxField,
    u_t: &SpectralField,
    spec: &FluxSpec,
) -> Result<(f64, f64)> {
    let grid = u.grid().clone();
    let dim = grid.dim();
    let u_hat = forward_transform(u);
    let q_hat: Vec<SpectralField> = q.components.iter().map(forward_transform).collect();

    let ixi = |idx: usize, axis: usize| -> Complex64 {
        if grid.is_nyquist(idx, axis) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, grid.axis_wavenumber(idx, axis))
        }
    };

    // div q in spectral form
    let mut div_q = SpectralField::zeros(grid.clone());
    for axis in 0..dim {
        let dc = div_q.coeffs_mut();
        for (idx, c) in q_hat[axis].coeffs().iter().enumerate() {
            dc[idx] += ixi(idx, axis) * c;
        }
    }

    // first equation: u_t - N(u) + div q, where N already carries the minus sign
    let n_term = nonlinear_term(u, spec, 1.0)?;
    let mut r1 = SpectralField::zeros(grid.clone());
    {
        let rc = r1.coeffs_mut();
        for idx in 0..rc.len() {
            rc[idx] = u_t.coeffs()[idx] - n_term.coeffs()[idx] + div_q.coeffs()[idx];
        }
    }
    let res1 = weighted_spectral_sum(&r1, |_| 1.0).sqrt();

    // second equation, per component: -d_j(div q) + q_j + d_j u
    let mut res2_sq = 0.0;
    for axis in 0..dim {
        let mut r = SpectralField::zeros(grid.clone());
        let rc = r.coeffs_mut();
        for idx in 0..rc.len() {
            let d = ixi(idx, axis);
            rc[idx] = -d * div_q.coeffs()[idx] + q_hat[axis].coeffs()[idx] + d * u_hat.coeffs()[idx];
        }
        res2_sq += weighted_spectral_sum(&r, |_| 1.0);
    }
    Ok((res1, res2_sq.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::norms::derivative_seminorm;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn flux_eval_examples() {
        let g = make_grid(1, 16, TAU).unwrap();
        let spec = FluxSpec::quadratic(1);
        let u = RealField::from_fn(g.clone(), |_| 0.1);
        let f = flux_eval(&spec, &u).unwrap();
        assert!(f[0].values().iter().all(|&v| (v - 0.01).abs() < 1e-16));

        let z = RealField::from_fn(g.clone(), |_| 0.0);
        let f = flux_eval(&spec, &z).unwrap();
        assert!(f[0].values().iter().all(|&v| v == 0.0));

        let cubic = FluxSpec {
            coefficients: vec![(0.0, 1.0)],
        };
        let two = RealField::from_fn(g, |_| 2.0);
        let f = flux_eval(&cubic, &two).unwrap();
        assert!(f[0].values().iter().all(|&v| (v - 8.0).abs() < 1e-14));
    }

    #[test]
    fn symbol_examples_and_bounds() {
        assert_eq!(linear_symbol(&[0.0]), 0.0);
        assert!((linear_symbol(&[1.0]) + 0.5).abs() < 1e-15);
        assert!(linear_symbol(&[1e8]) > -1.0);
        let g = make_grid(2, 64, 3.0).unwrap();
        for &x2 in g.xi_sq() {
            let m = symbol_from_xi_sq(x2);
            assert!(m <= 0.0 && m > -1.0);
            if x2 > 0.0 {
                assert!(m < 0.0);
            }
        }
        // low-frequency heat-like equivalence: |m + xi^2| <= xi^4 for |xi| <= 1
        for x2 in [0.01, 0.1, 0.5, 1.0] {
            assert!((symbol_from_xi_sq(x2) + x2).abs() <= x2 * x2 + 1e-16);
        }
    }

    #[test]
    fn nonlinear_term_of_sine_is_minus_sin_2x() {
        let g = make_grid(1, 64, TAU).unwrap();
        let u = RealField::from_fn(g.clone(), |x| x[0].sin());
        let n = nonlinear_term(&u, &FluxSpec::quadratic(1), 2.0 / 3.0).unwrap();
        let expect = forward_transform(&RealField::from_fn(g, |x| -(2.0 * x[0]).sin()));
        let diff: f64 = n
            .coeffs()
            .iter()
            .zip(expect.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn nonlinear_term_zero_mode_and_constants() {
        let g = make_grid(2, 32, 5.0).unwrap();
        let c = RealField::from_fn(g.clone(), |_| 0.3);
        let n = nonlinear_term(&c, &FluxSpec::quadratic(2), 2.0 / 3.0).unwrap();
        assert!(n.coeffs().iter().all(|z| z.norm() < 1e-13));
        let r = RealField::from_fn(g, |x| (x[0] * 1.1).sin() * (0.5 + (x[1] * 2.0).cos()));
        let n = nonlinear_term(&r, &FluxSpec::quadratic(2), 2.0 / 3.0).unwrap();
        assert_eq!(n.coeffs()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rhs_linear_case_is_symbol_times_state() {
        let g = make_grid(1, 64, TAU).unwrap();
        let u = RealField::from_fn(g, |x| (3.0 * x[0]).sin());
        let u_hat = forward_transform(&u);
        let r = rhs(&u_hat, &FluxSpec::zero(1), 2.0 / 3.0).unwrap();
        let m = symbol_from_xi_sq(9.0);
        for (a, b) in r.coeffs().iter().zip(u_hat.coeffs()) {
            assert!((a - m * b).norm() < 1e-12);
        }
        let z = SpectralField::zeros(u_hat.grid().clone());
        let r = rhs(&z, &FluxSpec::quadratic(1), 2.0 / 3.0).unwrap();
        assert!(r.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn rhs_small_amplitude_is_nearly_linear() {
        let g = make_grid(1, 64, TAU).unwrap();
        let eps = 1e-8;
        let u = RealField::from_fn(g.clone(), |x| eps * x[0].sin());
        let u_hat = forward_transform(&u);
        let r = rhs(&u_hat, &FluxSpec::quadratic(1), 2.0 / 3.0).unwrap();
        let norm_r = derivative_seminorm(&r, 0);
        let mut lin = u_hat.clone();
        for c in lin.coeffs_mut().iter_mut() {
            *c *= -0.5;
        }
        let diff_sq: f64 = r
            .coeffs()
            .iter()
            .zip(lin.coeffs())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        assert!(diff_sq.sqrt() / g.box_volume().sqrt() <= 1e-6 * norm_r);
    }

    #[test]
    fn recover_q_examples() {
        let g = make_grid(1, 64, TAU).unwrap();
        let u = RealField::from_fn(g.clone(), |x| x[0].sin());
        let q = recover_q(&forward_transform(&u));
        let expect = RealField::from_fn(g, |x| -x[0].cos() / 2.0);
        let d: f64 = q.components[0]
            .values()
            .iter()
            .zip(expect.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);

        let g3 = make_grid(3, 16, TAU).unwrap();
        let c = RealField::from_fn(g3.clone(), |_| 0.8);
        let q = recover_q(&forward_transform(&c));
        for comp in &q.components {
            assert!(comp.values().iter().all(|v| v.abs() < 1e-13));
        }
        let u3 = RealField::from_fn(g3.clone(), |x| x[0].sin());
        let q = recover_q(&forward_transform(&u3));
        let e0 = RealField::from_fn(g3, |x| -x[0].cos() / 2.0);
        let d: f64 = q.components[0]
            .values()
            .iter()
            .zip(e0.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);
        for comp in &q.components[1..] {
            assert!(comp.values().iter().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn recovered_q_is_curl_free() {
        let g = make_grid(2, 32, 5.0).unwrap();
        let u = RealField::from_fn(g.clone(), |x| (x[0] * 1.3).sin() * (x[1] * 2.6).cos());
        let qs = recover_q_spectral(&forward_transform(&u));
        // d_1 q_2 == d_2 q_1 on the lattice
        let mut worst = 0.0_f64;
        for idx in 0..g.total_modes() {
            let xi0 = if g.is_nyquist(idx, 0) { 0.0 } else { g.axis_wavenumber(idx, 0) };
            let xi1 = if g.is_nyquist(idx, 1) { 0.0 } else { g.axis_wavenumber(idx, 1) };
            let a = Complex64::new(0.0, xi0) * qs[1].coeffs()[idx];
            let b = Complex64::new(0.0, xi1) * qs[0].coeffs()[idx];
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn residuals_vanish_by_construction() {
        let g = make_grid(2, 32, 9.0).unwrap();
        let spec = FluxSpec::quadratic(2);
        // box-commensurate frequencies keep the field band-limited, so the
        // Nyquist-skipping derivative convention is exact
        let k = 2.0 * std::f64::consts::PI / 9.0;
        let u = RealField::from_fn(g, |x| {
            0.05 * (x[0] * k).sin() * (x[1] * 2.0 * k).cos() + 0.02 * (x[1] * 3.0 * k).sin()
        });
        let u_hat = forward_transform(&u);
        let q = recover_q(&u_hat);
        let u_t = rhs(&u_hat, &spec, 1.0).unwrap();
        let (r1, r2) = residual_check(&u, &q, &u_t, &spec).unwrap();
        let scale = derivative_seminorm(&u_hat, 0);
        assert!(r1 <= 1e-12 * scale, "r1 = {r1}");
        assert!(r2 <= 1e-12 * scale, "r2 = {r2}");
    }

    #[test]
    fn residual_of_zero_q_is_grad_u() {
        let g = make_grid(1, 64, TAU).unwrap();
        let u = RealField::from_fn(g.clone(), |x| x[0].sin());
        let q = FluxField {
            components: vec![RealField::zeros(g.clone())],
        };
        let u_t = SpectralField::zeros(g);
        let (_, r2) = residual_check(&u, &q, &u_t, &FluxSpec::zero(1)).unwrap();
        // residual is grad u = cos x, norm sqrt(pi)
        assert!((r2 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn residual_grows_linearly_with_perturbation() {
        let g = make_grid(1, 64, TAU).unwrap();
        let u = RealField::from_fn(g.clone(), |x| 0.1 * x[0].sin());
        let u_hat = forward_transform(&u);
        let u_t = rhs(&u_hat, &FluxSpec::quadratic(1), 1.0).unwrap();
        let mut rs = Vec::new();
        for eps in [1e-3, 2e-3, 4e-3] {
            let mut q = recover_q(&u_hat);
            let pert = RealField::from_fn(g.clone(), |x| eps * (2.0 * x[0]).cos());
            for (v, p) in q.components[0].values_mut().iter_mut().zip(pert.values()) {
                *v += p;
            }
            let (_, r2) = residual_check(&u, &q, &u_t, &FluxSpec::quadratic(1)).unwrap();
            rs.push(r2);
        }
        assert!((rs[1] / rs[0] - 2.0).abs() < 1e-6);
        assert!((rs[2] / rs[1] - 2.0).abs() < 1e-6);
    }
}
