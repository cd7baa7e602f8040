use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{RadgasError, Result};
use crate::field::{forward_transform, inverse_transform, RealField, SpectralField};
use crate::model::{nonlinear_term, rhs, symbol_from_xi_sq, FluxSpec};

pub const DT_MIN: f64 = 1e-6;
pub const DT_MAX: f64 = 0.5;
/// CFL wave speed is re-evaluated every this many steps.
const CFL_REFRESH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DtPolicy {
    Fixed { dt: f64 },
    Cfl { safety: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    /// Registered stepper name; see `stepper_names()`.
    pub scheme: String,
    pub dt_policy: DtPolicy,
    pub t_final: f64,
    pub record_interval: f64,
    pub dealias_rule: f64,
    /// Optional wall-clock budget; exceeding it aborts the run cleanly.
    pub wall_budget_s: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            scheme: "etdrk4".into(),
            dt_policy: DtPolicy::Cfl { safety: 0.4 },
            t_final: 100.0,
            record_interval: 1.0,
            dealias_rule: 2.0 / 3.0,
            wall_budget_s: None,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0) {
            return Err(RadgasError::Config("t_final must be positive".into()));
        }
        match self.dt_policy {
            DtPolicy::Fixed { dt } if !(dt > 0.0) => {
                return Err(RadgasError::Config("fixed dt must be positive".into()))
            }
            DtPolicy::Cfl { safety } if !(safety > 0.0 && safety <= 1.0) => {
                return Err(RadgasError::Config("CFL safety must be in (0, 1]".into()))
            }
            _ => {}
        }
        if !(self.record_interval > 0.0) {
            return Err(RadgasError::Config("record_interval must be positive".into()));
        }
        if let DtPolicy::Fixed { dt } = self.dt_policy {
            if self.record_interval < dt {
                return Err(RadgasError::Config(
                    "record_interval must be at least dt".into(),
                ));
            }
        }
        if !(self.dealias_rule > 0.0 && self.dealias_rule <= 1.0) {
            return Err(RadgasError::Config("dealias rule must be in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct Trajectory {
    pub final_state: SpectralField,
    pub steps: usize,
    pub wall_time_s: f64,
}

/// Exact solution of the linear subproblem: coefficient-wise decay
/// `u_hat(t) = exp(t * m(xi)) * u_hat(0)`.
pub fn linear_exact(u_hat0: &SpectralField, t: f64) -> SpectralField {
    let mut out = u_hat0.clone();
    let xi_sq = out.grid().xi_sq().to_vec();
    for (c, x2) in out.coeffs_mut().iter_mut().zip(xi_sq) {
        *c *= (t * symbol_from_xi_sq(x2)).exp();
    }
    out
}

/// Advective CFL step: `safety * dx / max|f'(u)|`, clamped to
/// `[DT_MIN, DT_MAX]`; zero wave speed gives DT_MAX.
pub fn cfl_dt(u: &RealField, spec: &FluxSpec, safety: f64) -> f64 {
    let speed = spec.max_wave_speed(u);
    if speed == 0.0 {
        return DT_MAX;
    }
    (safety * u.grid().spacing() / speed).clamp(DT_MIN, DT_MAX)
}

/// One interchangeable time-advancement algorithm. Implementations are
/// registered by name and selected at runtime via `make_stepper`.
pub trait TimeStepper {
    fn name(&self) -> &'static str;
    fn step(
        &mut self,
        u_hat: &SpectralField,
        dt: f64,
        spec: &FluxSpec,
        rule: f64,
    ) -> Result<SpectralField>;
}

pub fn stepper_names() -> &'static [&'static str] {
    &["etdrk4", "rk4"]
}

pub fn make_stepper(name: &str) -> Result<Box<dyn TimeStepper>> {
    match name {
        "etdrk4" => Ok(Box::new(EtdRk4::new())),
        "rk4" => Ok(Box::new(Rk4)),
        other => Err(RadgasError::UnknownScheme(other.into())),
    }
}

struct EtdTables {
    dt: f64,
    n: usize,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
}

/// `phi_{offset}(z) = sum_{k >= 0} z^k / (k + offset)!` by its Taylor
/// series, summed to machine precision (rapidly convergent for |z| <~ 1).
fn phi_taylor(z: f64, offset: u32) -> f64 {
    let mut term = 1.0 / (1..=offset).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..60 {
        term *= z / (k as f64 + offset as f64);
        sum += term;
        if term.abs() < 1e-20 * sum.abs() {
            break;
        }
    }
    sum
}

/// phi-style coefficients of the Cox-Matthews scheme. The closed forms
/// divide by z^3 and lose ~eps/|z|^3 to cancellation, which dominates the
/// O(dt^4) truncation error for the small |z| this equation produces
/// (|m| < 1, dt <= 1/2), so the series is the primary evaluation path.
fn etd_coeffs(z: f64) -> (f64, f64, f64, f64) {
    let q = if z == 0.0 {
        0.5
    } else {
        (0.5 * z).exp_m1() / z
    };
    let (p1, p2, p3) = if z.abs() < 1.0 {
        (phi_taylor(z, 1), phi_taylor(z, 2), phi_taylor(z, 3))
    } else {
        let e = z.exp();
        (
            (e - 1.0) / z,
            (e - 1.0 - z) / (z * z),
            (e - 1.0 - z - 0.5 * z * z) / (z * z * z),
        )
    };
    let f1 = p1 - 3.0 * p2 + 4.0 * p3;
    let f2 = 2.0 * p2 - 4.0 * p3;
    let f3 = 4.0 * p3 - p2;
    (q, f1, f2, f3)
}

pub struct EtdRk4 {
    tables: Option<EtdTables>,
}

impl EtdRk4 {
    pub fn new() -> Self {
        EtdRk4 { tables: None }
    }

    fn tables(&mut self, grid_xi_sq: &[f64], dt: f64) -> &EtdTables {
        let stale = match &self.tables {
            Some(t) => t.dt != dt || t.n != grid_xi_sq.len(),
            None => true,
        };
        if stale {
            let n = grid_xi_sq.len();
            let mut t = EtdTables {
                dt,
                n,
                e: vec![0.0; n],
                e2: vec![0.0; n],
                q: vec![0.0; n],
                f1: vec![0.0; n],
                f2: vec![0.0; n],
                f3: vec![0.0; n],
            };
            for (i, &x2) in grid_xi_sq.iter().enumerate() {
                let z = dt * symbol_from_xi_sq(x2);
                t.e[i] = z.exp();
                t.e2[i] = (0.5 * z).exp();
                let (q, f1, f2, f3) = etd_coeffs(z);
                t.q[i] = dt * q;
                t.f1[i] = dt * f1;
                t.f2[i] = dt * f2;
                t.f3[i] = dt * f3;
            }
            self.tables = Some(t);
        }
        self.tables.as_ref().unwrap()
    }
}

impl Default for EtdRk4 {
    fn default() -> Self {
        Self::new()
    }
}

fn nonlin(u_hat: &SpectralField, spec: &FluxSpec, rule: f64) -> Result<SpectralField> {
    if spec.is_zero() {
        Ok(SpectralField::zeros(u_hat.grid().clone()))
    } else {
        nonlinear_term(&inverse_transform(u_hat), spec, rule)
    }
}

fn check_finite(u_hat: &SpectralField) -> Result<()> {
    if u_hat.is_finite() {
        Ok(())
    } else {
        Err(RadgasError::BlowUp { t: f64::NAN })
    }
}

impl TimeStepper for EtdRk4 {
    fn name(&self) -> &'static str {
        "etdrk4"
    }

    fn step(
        &mut self,
        u_hat: &SpectralField,
        dt: f64,
        spec: &FluxSpec,
        rule: f64,
    ) -> Result<SpectralField> {
        let grid = u_hat.grid().clone();
        let xi_sq: Vec<f64> = grid.xi_sq().to_vec();
        let t = self.tables(&xi_sq, dt);

        let n0 = nonlin(u_hat, spec, rule)?;
        let mut a = SpectralField::zeros(grid.clone());
        for i in 0..a.coeffs().len() {
            a.coeffs_mut()[i] = t.e2[i] * u_hat.coeffs()[i] + t.q[i] * n0.coeffs()[i];
        }
        let na = nonlin(&a, spec, rule)?;
        let mut b = SpectralField::zeros(grid.clone());
        for i in 0..b.coeffs().len() {
            b.coeffs_mut()[i] = t.e2[i] * u_hat.coeffs()[i] + t.q[i] * na.coeffs()[i];
        }
        let nb = nonlin(&b, spec, rule)?;
        let mut c = SpectralField::zeros(grid.clone());
        for i in 0..c.coeffs().len() {
            c.coeffs_mut()[i] =
                t.e2[i] * a.coeffs()[i] + t.q[i] * (2.0 * nb.coeffs()[i] - n0.coeffs()[i]);
        }
        let nc = nonlin(&c, spec, rule)?;
        let mut out = SpectralField::zeros(grid);
        for i in 0..out.coeffs().len() {
            out.coeffs_mut()[i] = t.e[i] * u_hat.coeffs()[i]
                + t.f1[i] * n0.coeffs()[i]
                + t.f2[i] * (na.coeffs()[i] + nb.coeffs()[i])
                + t.f3[i] * nc.coeffs()[i];
        }
        check_finite(&out)?;
        Ok(out)
    }
}

pub struct Rk4;

impl TimeStepper for Rk4 {
    fn name(&self) -> &'static str {
        "rk4"
    }

    fn step(
        &mut self,
        u_hat: &SpectralField,
        dt: f64,
        spec: &FluxSpec,
        rule: f64,
    ) -> Result<SpectralField> {
        let grid = u_hat.grid().clone();
        let k1 = rhs(u_hat, spec, rule)?;
        let mut s = SpectralField::zeros(grid.clone());
        for i in 0..s.coeffs().len() {
            s.coeffs_mut()[i] = u_hat.coeffs()[i] + 0.5 * dt * k1.coeffs()[i];
        }
        let k2 = rhs(&s, spec, rule)?;
        for i in 0..s.coeffs().len() {
            s.coeffs_mut()[i] = u_hat.coeffs()[i] + 0.5 * dt * k2.coeffs()[i];
        }
        let k3 = rhs(&s, spec, rule)?;
        for i in 0..s.coeffs().len() {
            s.coeffs_mut()[i] = u_hat.coeffs()[i] + dt * k3.coeffs()[i];
        }
        let k4 = rhs(&s, spec, rule)?;
        let mut out = SpectralField::zeros(grid);
        let w = dt / 6.0;
        for i in 0..out.coeffs().len() {
            out.coeffs_mut()[i] = u_hat.coeffs()[i]
                + w * (k1.coeffs()[i]
                    + 2.0 * (k2.coeffs()[i] + k3.coeffs()[i])
                    + k4.coeffs()[i]);
        }
        check_finite(&out)?;
        Ok(out)
    }
}

/// Advance `u0` to `cfg.t_final`, invoking `recorder` at every multiple of
/// `record_interval` (including t = 0 and t_final). Steps are shortened to
/// land exactly on record times, so the recorded series is uniformly spaced.
pub fn integrate(
    u0: &RealField,
    cfg: &SchemeConfig,
    spec: &FluxSpec,
    recorder: &mut dyn FnMut(f64, &SpectralField) -> Result<()>,
) -> Result<Trajectory> {
    cfg.validate()?;
    spec.validate(u0.grid().dim())?;
    if !u0.is_finite() {
        return Err(RadgasError::BlowUp { t: 0.0 });
    }
    let start = Instant::now();
    let mut stepper = make_stepper(&cfg.scheme)?;
    let mut u_hat = forward_transform(u0);
    recorder(0.0, &u_hat)?;

    let mut dt_base = match cfg.dt_policy {
        DtPolicy::Fixed { dt } => dt,
        DtPolicy::Cfl { safety } => cfl_dt(u0, spec, safety),
    };
    let mut t = 0.0_f64;
    let mut steps = 0usize;
    let mut record_idx = 0u64;

    while t < cfg.t_final {
        if let DtPolicy::Cfl { safety } = cfg.dt_policy {
            if steps > 0 && steps % CFL_REFRESH == 0 {
                dt_base = cfl_dt(&inverse_transform(&u_hat), spec, safety);
            }
        }
        let next_record = ((record_idx + 1) as f64 * cfg.record_interval).min(cfg.t_final);
        let dt = dt_base.min(next_record - t);
        u_hat = stepper.step(&u_hat, dt, spec, cfg.dealias_rule).map_err(|e| match e {
            RadgasError::BlowUp { .. } => RadgasError::BlowUp { t },
            other => other,
        })?;
        steps += 1;
        if dt >= next_record - t - 1e-12 * cfg.t_final {
            t = next_record;
            record_idx += 1;
            recorder(t, &u_hat)?;
        } else {
            t += dt;
        }
        if let Some(budget) = cfg.wall_budget_s {
            if start.elapsed().as_secs_f64() > budget {
                return Err(RadgasError::WallTimeExceeded {
                    t,
                    budget_s: budget,
                });
            }
        }
    }

    Ok(Trajectory {
        final_state: u_hat,
        steps,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::norms::derivative_seminorm;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn sine_state(amp: f64) -> SpectralField {
        let g = make_grid(1, 64, TAU).unwrap();
        forward_transform(&RealField::from_fn(g, |x| amp * x[0].sin()))
    }

    #[test]
    fn linear_exact_examples() {
        let s = sine_state(1.0);
        let out = linear_exact(&s, 2.0);
        // mode k=1: factor exp(2 * -1/2) = exp(-1)
        let factor = out.coeffs()[1].norm() / s.coeffs()[1].norm();
        assert!((factor - (-1.0_f64).exp()).abs() < 1e-14);
        let id = linear_exact(&s, 0.0);
        for (a, b) in id.coeffs().iter().zip(s.coeffs()) {
            assert_eq!(a, b);
        }
        let g = make_grid(1, 16, TAU).unwrap();
        let c = forward_transform(&RealField::from_fn(g, |_| 2.5));
        let out = linear_exact(&c, 100.0);
        assert!((out.coeffs()[0] - c.coeffs()[0]).norm() < 1e-15);
    }

    #[test]
    fn etd_degenerates_to_linear_exact_with_zero_flux() {
        let s = sine_state(0.7);
        let mut etd = EtdRk4::new();
        let out = etd.step(&s, 0.3, &FluxSpec::zero(1), 1.0).unwrap();
        let exact = linear_exact(&s, 0.3);
        let sup = exact.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let diff = out
            .coeffs()
            .iter()
            .zip(exact.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-14 * sup);
    }

    #[test]
    fn zero_mode_unchanged_by_steps() {
        let g = make_grid(1, 64, TAU).unwrap();
        let u = RealField::from_fn(g, |x| 0.2 + 0.1 * x[0].sin());
        let u_hat = forward_transform(&u);
        let m0 = u_hat.coeffs()[0];
        let mut etd = EtdRk4::new();
        let out = etd.step(&u_hat, 0.25, &FluxSpec::quadratic(1), 2.0 / 3.0).unwrap();
        assert!((out.coeffs()[0] - m0).norm() <= 1e-15 * (1.0 + m0.norm()));
        let out = Rk4.step(&u_hat, 0.25, &FluxSpec::quadratic(1), 2.0 / 3.0).unwrap();
        assert!((out.coeffs()[0] - m0).norm() <= 1e-15 * (1.0 + m0.norm()));
    }

    #[test]
    fn rk4_matches_scalar_exponential_error_bound() {
        let s = sine_state(1.0);
        let dt = 0.1;
        let out = Rk4.step(&s, dt, &FluxSpec::zero(1), 1.0).unwrap();
        let m = -0.5; // symbol at k = 1
        let z: f64 = m * dt;
        let rk4_factor = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
        let got = out.coeffs()[1].re / s.coeffs()[1].re;
        assert!((got - rk4_factor).abs() < 1e-14);
        assert!((got - z.exp()).abs() <= z.abs().powi(5) / 120.0);
    }

    #[test]
    fn rk4_of_zero_is_zero() {
        let g = make_grid(1, 16, TAU).unwrap();
        let z = SpectralField::zeros(g);
        let out = Rk4.step(&z, 0.1, &FluxSpec::quadratic(1), 2.0 / 3.0).unwrap();
        assert!(out.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn cfl_examples() {
        let g = make_grid(1, 16, 1.6).unwrap(); // dx = 0.1
        let u = RealField::from_fn(g.clone(), |_| 0.1);
        let dt = cfl_dt(&u, &FluxSpec::quadratic(1), 0.4);
        assert!((dt - 0.2).abs() < 1e-12);
        let z = RealField::zeros(g.clone());
        assert_eq!(cfl_dt(&z, &FluxSpec::quadratic(1), 0.4), DT_MAX);
        let huge = RealField::from_fn(g, |_| 1e9);
        assert_eq!(cfl_dt(&huge, &FluxSpec::quadratic(1), 0.4), DT_MIN);
    }

    #[test]
    fn integrate_linear_matches_exact_and_counts_records() {
        let g = make_grid(1, 64, TAU).unwrap();
        let u0 = RealField::from_fn(g, |x| x[0].sin() + 0.5 * (3.0 * x[0]).cos());
        let cfg = SchemeConfig {
            t_final: 10.0,
            record_interval: 1.0,
            ..SchemeConfig::default()
        };
        let mut times = Vec::new();
        let traj = integrate(&u0, &cfg, &FluxSpec::zero(1), &mut |t, _| {
            times.push(t);
            Ok(())
        })
        .unwrap();
        assert_eq!(times.len(), 11);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        let exact = linear_exact(&forward_transform(&u0), 10.0);
        let scale = derivative_seminorm(&exact, 0);
        let diff: f64 = traj
            .final_state
            .coeffs()
            .iter()
            .zip(exact.coeffs())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / traj.final_state.grid().box_volume().sqrt();
        assert!(diff <= 1e-10 * scale);
    }

    #[test]
    fn integrate_is_deterministic() {
        let g = make_grid(1, 64, TAU).unwrap();
        let u0 = RealField::from_fn(g, |x| 0.3 * x[0].sin());
        let cfg = SchemeConfig {
            t_final: 5.0,
            record_interval: 0.5,
            ..SchemeConfig::default()
        };
        let run = || {
            let mut stream: Vec<(u64, Vec<(u64, u64)>)> = Vec::new();
            integrate(&u0, &cfg, &FluxSpec::quadratic(1), &mut |t, s| {
                stream.push((
                    t.to_bits(),
                    s.coeffs().iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect(),
                ));
                Ok(())
            })
            .unwrap();
            stream
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn l2_strictly_decreasing_on_nonlinear_run() {
        let g = make_grid(1, 256, 50.0).unwrap();
        let c = 25.0;
        let u0 = RealField::from_fn(g, |x| 0.1 * (-(x[0] - c).powi(2) / 8.0).exp());
        let cfg = SchemeConfig {
            t_final: 20.0,
            record_interval: 1.0,
            ..SchemeConfig::default()
        };
        let mut norms = Vec::new();
        integrate(&u0, &cfg, &FluxSpec::quadratic(1), &mut |_, s| {
            norms.push(derivative_seminorm(s, 0));
            Ok(())
        })
        .unwrap();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn unknown_scheme_rejected() {
        assert!(make_stepper("leapfrog").is_err());
        assert!(stepper_names().contains(&"etdrk4"));
        assert!(stepper_names().contains(&"rk4"));
    }

    #[test]
    fn config_validation() {
        let mut cfg = SchemeConfig::default();
        cfg.t_final = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SchemeConfig::default();
        cfg.dt_policy = DtPolicy::Fixed { dt: 0.0 };
        assert!(cfg.validate().is_err());
        let mut cfg = SchemeConfig::default();
        cfg.dt_policy = DtPolicy::Fixed { dt: 2.0 };
        cfg.record_interval = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SchemeConfig::default();
        cfg.dt_policy = DtPolicy::Cfl { safety: 1.5 };
        assert!(cfg.validate().is_err());
    }
}
