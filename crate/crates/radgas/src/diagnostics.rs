use serde::{Deserialize, Serialize};

use crate::error::{RadgasError, Result};
use crate::field::{inverse_transform, SpectralField};
use crate::norms::{lp_norm, sup_spectrum, weighted_spectral_sum};

/// Which norms to evaluate at every record time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormRequest {
    /// Orders l for ||D^l u||.
    pub u_orders: Vec<u32>,
    /// Orders l for ||D^l q|| (empty disables q tracking).
    pub q_orders: Vec<u32>,
    /// Indices s for the homogeneous negative norms.
    pub neg_indices: Vec<f64>,
    /// Also track ||Lambda^{-s} grad u|| for each s.
    pub include_grad_neg: bool,
    /// Orders l for the Fourier-splitting partition.
    pub split_orders: Vec<u32>,
}

impl Default for NormRequest {
    fn default() -> Self {
        NormRequest {
            u_orders: vec![0, 1, 2],
            q_orders: vec![],
            neg_indices: vec![],
            include_grad_neg: true,
            split_orders: vec![0],
        }
    }
}

/// Frequency-space partition of the order-l energy at the shrinking ball
/// |xi| <= sqrt((n+2l)/t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub t: f64,
    pub l: u32,
    pub radius: f64,
    pub low_energy: f64,
    pub high_energy: f64,
    pub bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub t: f64,
    pub mass: f64,
    pub l1: f64,
    pub sup_spec: f64,
    pub u_semis: Vec<f64>,
    pub q_semis: Vec<f64>,
    pub neg_u: Vec<f64>,
    pub neg_grad_u: Vec<f64>,
    /// Per u-order l: the spectral dissipation functional
    /// sum (|xi|^2/(1+|xi|^2)) |xi|^{2l} |u_hat|^2 / L^n.
    pub diss: Vec<f64>,
    pub split: Vec<SplitRecord>,
    pub boundary_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub request: NormRequest,
    pub records: Vec<NormRecord>,
}

impl NormSeries {
    pub fn new(request: NormRequest) -> Self {
        NormSeries {
            request,
            records: Vec::new(),
        }
    }

    fn u_index(&self, l: u32) -> Option<usize> {
        self.request.u_orders.iter().position(|&x| x == l)
    }

    fn neg_index(&self, s: f64) -> Option<usize> {
        self.request
            .neg_indices
            .iter()
            .position(|&x| (x - s).abs() < 1e-12)
    }
}

/// Evaluate every requested norm at one instant.
pub fn record_norms(u_hat: &SpectralField, t: f64, req: &NormRequest) -> Result<NormRecord> {
    if !u_hat.is_finite() {
        return Err(RadgasError::BlowUp { t });
    }
    let grid = u_hat.grid().clone();
    let n = grid.dim();
    let u = inverse_transform(u_hat);
    let l1 = lp_norm(&u, 1.0);

    // mass fraction in the outer 10% shell of the box (5% from each face)
    let margin = 0.05 * grid.length();
    let len = grid.length();
    let mut shell_mass = 0.0;
    for (idx, &v) in u.values().iter().enumerate() {
        let x = grid.point(idx);
        if x.iter().any(|&c| c.min(len - c) < margin) {
            shell_mass += v.abs();
        }
    }
    shell_mass *= grid.cell_volume();
    let boundary_frac = if l1 > 0.0 { shell_mass / l1 } else { 0.0 };

    let u_semis: Vec<f64> = req
        .u_orders
        .iter()
        .map(|&l| weighted_spectral_sum(u_hat, |x2| x2.powi(l as i32)).sqrt())
        .collect();
    let diss: Vec<f64> = req
        .u_orders
        .iter()
        .map(|&l| weighted_spectral_sum(u_hat, |x2| x2 / (1.0 + x2) * x2.powi(l as i32)))
        .collect();

    // ||D^l q||^2 via the spectral form of q, with the same Nyquist-zeroed
    // derivative convention as recover_q
    let q_semis: Vec<f64> = if req.q_orders.is_empty() {
        vec![]
    } else {
        let mut xi_eff_sq = vec![0.0_f64; grid.total_modes()];
        for (idx, v) in xi_eff_sq.iter_mut().enumerate() {
            let mut s = 0.0;
            for axis in 0..n {
                if !grid.is_nyquist(idx, axis) {
                    let xi = grid.axis_wavenumber(idx, axis);
                    s += xi * xi;
                }
            }
            *v = s;
        }
        req.q_orders
            .iter()
            .map(|&l| {
                let xi_sq = grid.xi_sq();
                let mut acc = 0.0;
                for (idx, c) in u_hat.coeffs().iter().enumerate() {
                    let x2 = xi_sq[idx];
                    let w = xi_eff_sq[idx] / ((1.0 + x2) * (1.0 + x2));
                    acc += x2.powi(l as i32) * w * c.norm_sqr();
                }
                (acc / grid.box_volume()).sqrt()
            })
            .collect()
    };

    let neg_u: Vec<f64> = req
        .neg_indices
        .iter()
        .map(|&s| {
            weighted_spectral_sum(u_hat, |x2| if x2 == 0.0 { 0.0 } else { x2.powf(-s) }).sqrt()
        })
        .collect();
    let neg_grad_u: Vec<f64> = if req.include_grad_neg {
        req.neg_indices
            .iter()
            .map(|&s| {
                weighted_spectral_sum(u_hat, |x2| if x2 == 0.0 { 0.0 } else { x2.powf(1.0 - s) })
                    .sqrt()
            })
            .collect()
    } else {
        vec![]
    };

    let split: Vec<SplitRecord> = if t > 0.0 {
        req.split_orders
            .iter()
            .map(|&l| fourier_split(u_hat, t, l))
            .collect::<Result<_>>()?
    } else {
        // t -> 0+ limit: the cutoff ball covers every mode
        req.split_orders
            .iter()
            .map(|&l| {
                let e = weighted_spectral_sum(u_hat, |x2| x2.powi(l as i32));
                SplitRecord {
                    t,
                    l,
                    radius: f64::MAX,
                    low_energy: e,
                    high_energy: 0.0,
                    bound_ok: true,
                }
            })
            .collect()
    };

    Ok(NormRecord {
        t,
        mass: u_hat.mass(),
        l1,
        sup_spec: sup_spectrum(u_hat),
        u_semis,
        q_semis,
        neg_u,
        neg_grad_u,
        diss,
        split,
        boundary_frac,
    })
}

/// Partition the order-l spectral energy at radius sqrt((n+2l)/t) and check
/// the pointwise multiplier bound `1/(1+|xi|^2) <= t/(n+2l+t)` outside the
/// ball. Classification and bound use the same comparison `t|xi|^2 >= n+2l`
/// (the cross-multiplied form), so the bound can only fail if the algebra
/// itself is wrong.
pub fn fourier_split(u_hat: &SpectralField, t: f64, l: u32) -> Result<SplitRecord> {
    if !(t > 0.0) {
        return Err(RadgasError::InvalidParameter(
            "fourier_split requires t > 0".into(),
        ));
    }
    let grid = u_hat.grid();
    let n2l = (grid.dim() as u32 + 2 * l) as f64;
    let radius = (n2l / t).sqrt();
    let xi_sq = grid.xi_sq();
    // Kahan-compensated partial sums: closure against the seminorm (also
    // compensated) is checked to 1e-12 relative, and naive sums over M^n
    // modes drift past that on 3-d grids.
    let (mut low, mut low_c) = (0.0_f64, 0.0_f64);
    let (mut high, mut high_c) = (0.0_f64, 0.0_f64);
    let mut bound_ok = true;
    for (c, &x2) in u_hat.coeffs().iter().zip(xi_sq) {
        let e = x2.powi(l as i32) * c.norm_sqr();
        if t * x2 > n2l {
            let y = e - high_c;
            let s = high + y;
            high_c = (s - high) - y;
            high = s;
            // cross-multiplied multiplier bound: (n+2l+t) <= t(1+|xi|^2)
            if t * x2 < n2l {
                bound_ok = false;
            }
        } else {
            let y = e - low_c;
            let s = low + y;
            low_c = (s - low) - y;
            low = s;
        }
    }
    let vol = grid.box_volume();
    Ok(SplitRecord {
        t,
        l,
        radius,
        low_energy: low / vol,
        high_energy: high / vol,
        bound_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Measured slope must equal the theory exponent within tolerance.
    TwoSided,
    /// Decay at least as fast: slope <= theory + tolerance.
    OneSidedUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    OneSidedPass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub quantity: String,
    pub t_lo: f64,
    pub t_hi: f64,
    pub slope: f64,
    pub stderr: f64,
    pub r2: f64,
    pub theory: f64,
    pub tolerance: f64,
    pub mode: FitMode,
    pub verdict: Verdict,
    pub samples: usize,
}

/// Least squares of log y against log(1+t).
pub fn fit_loglog(pts: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if pts.len() < 10 {
        return Err(RadgasError::Fit(format!(
            "need at least 10 samples in the fit window, got {}",
            pts.len()
        )));
    }
    if pts.iter().any(|&(_, y)| !(y > 0.0)) {
        return Err(RadgasError::Fit("nonpositive values in fit window".into()));
    }
    let xs: Vec<f64> = pts.iter().map(|&(t, _)| (1.0 + t).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, y)| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(RadgasError::Fit("degenerate time window".into()));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let pred = my + slope * (x - mx);
            (y - pred) * (y - pred)
        })
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let dof = (pts.len() as f64 - 2.0).max(1.0);
    let stderr = (ss_res / dof / sxx).sqrt();
    Ok((slope, stderr, r2.clamp(0.0, 1.0)))
}

/// Extract a tracked quantity by its CSV column id, e.g. `l2_d1_u`,
/// `l2_d0_q`, `hneg0.5_u`, `hneg1_gradu`, `l1_u`, `sup_spec`.
pub fn extract_quantity(series: &NormSeries, quantity: &str) -> Result<Vec<(f64, f64)>> {
    let get: Box<dyn Fn(&NormRecord) -> Option<f64>> = if quantity == "l1_u" {
        Box::new(|r: &NormRecord| Some(r.l1))
    } else if quantity == "sup_spec" {
        Box::new(|r: &NormRecord| Some(r.sup_spec))
    } else if let Some(rest) = quantity.strip_prefix("l2_d") {
        let (num, kind) = rest
            .split_once('_')
            .ok_or_else(|| RadgasError::Fit(format!("bad quantity id '{quantity}'")))?;
        let l: u32 = num
            .parse()
            .map_err(|_| RadgasError::Fit(format!("bad derivative order in '{quantity}'")))?;
        match kind {
            "u" => {
                let i = series
                    .u_index(l)
                    .ok_or_else(|| RadgasError::Fit(format!("order {l} not tracked for u")))?;
                Box::new(move |r: &NormRecord| r.u_semis.get(i).copied())
            }
            "q" => {
                let i = series
                    .request
                    .q_orders
                    .iter()
                    .position(|&x| x == l)
                    .ok_or_else(|| RadgasError::Fit(format!("order {l} not tracked for q")))?;
                Box::new(move |r: &NormRecord| r.q_semis.get(i).copied())
            }
            _ => return Err(RadgasError::Fit(format!("bad quantity id '{quantity}'"))),
        }
    } else if let Some(rest) = quantity.strip_prefix("hneg") {
        let (num, kind) = rest
            .split_once('_')
            .ok_or_else(|| RadgasError::Fit(format!("bad quantity id '{quantity}'")))?;
        let s: f64 = num
            .parse()
            .map_err(|_| RadgasError::Fit(format!("bad negative index in '{quantity}'")))?;
        let i = series
            .neg_index(s)
            .ok_or_else(|| RadgasError::Fit(format!("negative index {s} not tracked")))?;
        match kind {
            "u" => Box::new(move |r: &NormRecord| r.neg_u.get(i).copied()),
            "gradu" => Box::new(move |r: &NormRecord| r.neg_grad_u.get(i).copied()),
            _ => return Err(RadgasError::Fit(format!("bad quantity id '{quantity}'"))),
        }
    } else {
        return Err(RadgasError::Fit(format!("unknown quantity id '{quantity}'")));
    };

    Ok(series
        .records
        .iter()
        .filter_map(|r| get(r).map(|y| (r.t, y)))
        .collect())
}

pub fn fit_decay(
    series: &NormSeries,
    quantity: &str,
    t_lo: f64,
    t_hi: f64,
    theory: f64,
    tolerance: f64,
    mode: FitMode,
) -> Result<DecayFit> {
    if !(t_lo < t_hi) {
        return Err(RadgasError::Fit("fit window must have t_lo < t_hi".into()));
    }
    let pts: Vec<(f64, f64)> = extract_quantity(series, quantity)?
        .into_iter()
        .filter(|&(t, _)| t >= t_lo && t <= t_hi)
        .collect();
    let (slope, stderr, r2) = fit_loglog(&pts)?;
    let verdict = match mode {
        FitMode::TwoSided => {
            if (slope - theory).abs() <= tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
        FitMode::OneSidedUpper => {
            if slope <= theory + tolerance {
                Verdict::OneSidedPass
            } else {
                Verdict::Fail
            }
        }
    };
    Ok(DecayFit {
        quantity: quantity.into(),
        t_lo,
        t_hi,
        slope,
        stderr,
        r2,
        theory,
        tolerance,
        mode,
        verdict,
        samples: pts.len(),
    })
}

/// A theorem-rate claim with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "snake_case", deny_unknown_fields)]
pub enum Claim {
    Thm11U { n: u32, l: u32 },
    Thm11Q { n: u32, l: u32 },
    Thm12U { s: f64, l: u32 },
    Thm12Q { s: f64, l: u32 },
    Cor11U { p: f64, l: u32 },
    Cor11Q { p: f64, l: u32 },
}

/// The decay exponent each theorem predicts for (1+t)^p fitting.
pub fn theoretical_exponent(claim: Claim) -> Result<f64> {
    let check_n = |n: u32| {
        if (1..=4).contains(&n) {
            Ok(())
        } else {
            Err(RadgasError::InvalidParameter(format!(
                "dimension {n} outside 1..=4"
            )))
        }
    };
    let check_s = |s: f64| {
        if (0.0..1.5).contains(&s) {
            Ok(())
        } else {
            Err(RadgasError::InvalidParameter(format!(
                "negative index {s} outside [0, 3/2)"
            )))
        }
    };
    let p_to_s = |p: f64| -> Result<f64> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(RadgasError::InvalidParameter(format!(
                "Lp index {p} outside (1, 2]"
            )));
        }
        Ok(3.0 * (1.0 / p - 0.5))
    };
    match claim {
        Claim::Thm11U { n, l } => {
            check_n(n)?;
            Ok(-(n as f64) / 4.0 - l as f64 / 2.0)
        }
        Claim::Thm11Q { n, l } => {
            check_n(n)?;
            if l < 1 {
                return Err(RadgasError::InvalidParameter(
                    "q-rate of Theorem 1.1 starts at l = 1".into(),
                ));
            }
            Ok(-(n as f64) / 4.0 - (l as f64 + 1.0) / 2.0)
        }
        Claim::Thm12U { s, l } => {
            check_s(s)?;
            Ok(-(l as f64 + s) / 2.0)
        }
        Claim::Thm12Q { s, l } => {
            check_s(s)?;
            Ok(-(l as f64 + s + 1.0) / 2.0)
        }
        Claim::Cor11U { p, l } => theoretical_exponent(Claim::Thm12U { s: p_to_s(p)?, l }),
        Claim::Cor11Q { p, l } => theoretical_exponent(Claim::Thm12Q { s: p_to_s(p)?, l }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub name: String,
    pub pass: bool,
    pub max_violation: f64,
    pub violation_count: usize,
    pub tolerance: f64,
    /// Fitted constant (weighted inequality) or max ratio (budgets).
    pub constant: Option<f64>,
    pub detail: String,
}

fn check_uniform_spacing(records: &[NormRecord]) -> Result<f64> {
    if records.len() < 3 {
        return Err(RadgasError::Fit("monitor needs at least 3 records".into()));
    }
    let dts: Vec<f64> = records.windows(2).map(|w| w[1].t - w[0].t).collect();
    let mean = dts.iter().sum::<f64>() / dts.len() as f64;
    for &dt in &dts {
        if (dt - mean).abs() > 0.1 * mean {
            return Err(RadgasError::Fit(
                "monitor requires uniform record spacing within 10%".into(),
            ));
        }
    }
    Ok(mean)
}

/// Discrete check of `d/dt ||D^l u||_{H^1}^2 + ||D^{l+1} u||^2 <= 0`
/// (centered differences, truncation allowance 10 dt^2 E0).
pub fn lyapunov_monitor(series: &NormSeries, l: u32) -> Result<MonitorReport> {
    let il = series
        .u_index(l)
        .ok_or_else(|| RadgasError::Fit(format!("order {l} not tracked")))?;
    let il1 = series
        .u_index(l + 1)
        .ok_or_else(|| RadgasError::Fit(format!("order {} not tracked", l + 1)))?;
    let rs = &series.records;
    let dt = check_uniform_spacing(rs)?;
    let energy =
        |r: &NormRecord| r.u_semis[il] * r.u_semis[il] + r.u_semis[il1] * r.u_semis[il1];
    let e0 = energy(&rs[0]);
    let tol = 1e-8 * (1.0 + e0) + 10.0 * dt * dt * e0;
    let mut max_violation = 0.0_f64;
    let mut count = 0;
    for i in 1..rs.len() - 1 {
        let de = (energy(&rs[i + 1]) - energy(&rs[i - 1])) / (rs[i + 1].t - rs[i - 1].t);
        let v = de + rs[i].u_semis[il1] * rs[i].u_semis[il1];
        if v > tol {
            count += 1;
        }
        max_violation = max_violation.max(v);
    }
    Ok(MonitorReport {
        name: format!("lyapunov_l{l}"),
        pass: count == 0,
        max_violation,
        violation_count: count,
        tolerance: tol,
        constant: None,
        detail: format!("E0 = {e0:.3e}, dt = {dt}"),
    })
}

/// Discrete check of `(1/2) d/dt ||D^l u||^2 <= -sum (|xi|^2/(1+|xi|^2)) |xi|^{2l} |u_hat|^2`,
/// an identity for the linear flow.
pub fn dissipation_monitor(series: &NormSeries, l: u32) -> Result<MonitorReport> {
    let il = series
        .u_index(l)
        .ok_or_else(|| RadgasError::Fit(format!("order {l} not tracked")))?;
    let rs = &series.records;
    let dt = check_uniform_spacing(rs)?;
    let e0 = rs[0].u_semis[il] * rs[0].u_semis[il];
    let tol = 1e-8 * (1.0 + e0) + 10.0 * dt * dt * e0;
    let mut max_violation = 0.0_f64;
    let mut count = 0;
    for i in 1..rs.len() - 1 {
        let en = |r: &NormRecord| r.u_semis[il] * r.u_semis[il];
        let de = (en(&rs[i + 1]) - en(&rs[i - 1])) / (rs[i + 1].t - rs[i - 1].t);
        let v = 0.5 * de + rs[i].diss[il];
        if v > tol {
            count += 1;
        }
        max_violation = max_violation.max(v);
    }
    Ok(MonitorReport {
        name: format!("dissipation_l{l}"),
        pass: count == 0,
        max_violation,
        violation_count: count,
        tolerance: tol,
        constant: None,
        detail: format!("E0 = {e0:.3e}, dt = {dt}"),
    })
}

fn weighted_constant(rs: &[NormRecord], il: usize, n2l: f64, l1_initial: f64, stride: usize) -> f64 {
    let w = |r: &NormRecord| (n2l + r.t).powf(n2l) * r.u_semis[il] * r.u_semis[il];
    let idx: Vec<usize> = (0..rs.len()).step_by(stride).collect();
    let mut c = 0.0_f64;
    for k in 1..idx.len() - 1 {
        let (im, i, ip) = (idx[k - 1], idx[k], idx[k + 1]);
        let dw = (w(&rs[ip]) - w(&rs[im])) / (rs[ip].t - rs[im].t);
        if dw <= 0.0 {
            continue;
        }
        let denom = l1_initial * l1_initial * (n2l + rs[i].t).powf(0.5 * n2l - 1.0);
        if denom > 0.0 {
            c = c.max(dw / denom);
        }
    }
    c
}

/// Smallest constant C making the weighted differential inequality
/// `d/dt [(n+2l+t)^{n+2l} ||D^l u||^2] <= C ||u_0||_L1^2 (n+2l+t)^{(n+2l)/2-1}`
/// hold at every interior sample; pass when finite and stable under
/// sampling refinement.
pub fn weighted_inequality_monitor(
    series: &NormSeries,
    dim: usize,
    l: u32,
    l1_initial: f64,
) -> Result<MonitorReport> {
    let il = series
        .u_index(l)
        .ok_or_else(|| RadgasError::Fit(format!("order {l} not tracked")))?;
    let rs = &series.records;
    if rs.len() < 10 {
        return Err(RadgasError::Fit("weighted monitor needs >= 10 samples".into()));
    }
    let n2l = dim as f64 + 2.0 * l as f64;
    let c_full = weighted_constant(rs, il, n2l, l1_initial, 1);
    let c_half = weighted_constant(rs, il, n2l, l1_initial, 2);
    let stable =
        c_full == 0.0 || c_half <= c_full || (c_half - c_full).abs() <= 0.5 * c_full.max(1e-12);
    let pass = c_full.is_finite() && stable;
    Ok(MonitorReport {
        name: format!("weighted_inequality_l{l}"),
        pass,
        max_violation: 0.0,
        violation_count: 0,
        tolerance: 0.0,
        constant: Some(c_full),
        detail: format!("C_full = {c_full:.6e}, C_half = {c_half:.6e}"),
    })
}

/// Uniform-energy budget: ratio of the tracked energy functional
/// (sup-in-time plus trapezoidal time integral of the dissipation terms)
/// to E0^2.
pub fn energy_budget(
    series: &NormSeries,
    n_reg: u32,
    e0: f64,
    budget_factor: f64,
) -> Result<MonitorReport> {
    let rs = &series.records;
    if rs.is_empty() {
        return Err(RadgasError::Fit("empty series".into()));
    }
    let has_u = (0..=n_reg).all(|l| series.u_index(l).is_some());
    let has_q = (0..=n_reg + 1).all(|l| series.request.q_orders.contains(&l));
    if !has_u || !has_q {
        return Err(RadgasError::Fit(format!(
            "energy budget needs u orders 0..={} and q orders 0..={}",
            n_reg,
            n_reg + 1
        )));
    }
    let hn_u_sq = |r: &NormRecord| -> f64 {
        (0..=n_reg)
            .map(|l| {
                let i = series.u_index(l).unwrap();
                r.u_semis[i] * r.u_semis[i]
            })
            .sum()
    };
    let hq_sq = |r: &NormRecord| -> f64 {
        (0..=n_reg + 1)
            .map(|l| {
                let i = series.request.q_orders.iter().position(|&x| x == l).unwrap();
                r.q_semis[i] * r.q_semis[i]
            })
            .sum()
    };
    let grad_u_sq = |r: &NormRecord| -> f64 {
        (1..=n_reg)
            .map(|l| {
                let i = series.u_index(l).unwrap();
                r.u_semis[i] * r.u_semis[i]
            })
            .sum()
    };
    let sup = rs
        .iter()
        .map(|r| hn_u_sq(r) + hq_sq(r))
        .fold(0.0_f64, f64::max);
    let mut integral = 0.0;
    for w in rs.windows(2) {
        let f0 = grad_u_sq(&w[0]) + hq_sq(&w[0]);
        let f1 = grad_u_sq(&w[1]) + hq_sq(&w[1]);
        integral += 0.5 * (f0 + f1) * (w[1].t - w[0].t);
    }
    if e0 == 0.0 {
        return Ok(MonitorReport {
            name: "energy_budget".into(),
            pass: true,
            max_violation: 0.0,
            violation_count: 0,
            tolerance: budget_factor,
            constant: Some(0.0),
            detail: "zero initial energy".into(),
        });
    }
    let ratio = (sup + integral) / (e0 * e0);
    Ok(MonitorReport {
        name: "energy_budget".into(),
        pass: ratio.is_finite() && ratio <= budget_factor,
        max_violation: ratio,
        violation_count: usize::from(ratio > budget_factor),
        tolerance: budget_factor,
        constant: Some(ratio),
        detail: format!("sup = {sup:.6e}, integral = {integral:.6e}"),
    })
}

/// Boundedness of the negative-Sobolev energy
/// `E_-s(t) = ||Lambda^-s u||^2 + ||Lambda^-s grad u||^2` relative to its
/// initial value, with headroom eta = 0.1.
pub fn negative_energy_monitor(series: &NormSeries, s: f64) -> Result<MonitorReport> {
    let i = series
        .neg_index(s)
        .ok_or_else(|| RadgasError::Fit(format!("negative index {s} not tracked")))?;
    if !series.request.include_grad_neg {
        return Err(RadgasError::Fit("grad negative norms not tracked".into()));
    }
    let rs = &series.records;
    if rs.is_empty() {
        return Err(RadgasError::Fit("empty series".into()));
    }
    let energy = |r: &NormRecord| r.neg_u[i] * r.neg_u[i] + r.neg_grad_u[i] * r.neg_grad_u[i];
    let e_init = energy(&rs[0]);
    if e_init == 0.0 {
        return Ok(MonitorReport {
            name: format!("negative_energy_s{s}"),
            pass: true,
            max_violation: 0.0,
            violation_count: 0,
            tolerance: 1.1,
            constant: Some(0.0),
            detail: "zero field".into(),
        });
    }
    let mut max_ratio = 0.0_f64;
    let mut count = 0;
    for r in rs.iter() {
        let ratio = energy(r) / e_init;
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.1 {
            count += 1;
        }
    }
    Ok(MonitorReport {
        name: format!("negative_energy_s{s}"),
        pass: count == 0,
        max_violation: max_ratio,
        violation_count: count,
        tolerance: 1.1,
        constant: Some(max_ratio),
        detail: format!("E(0) = {e_init:.6e}"),
    })
}

/// Mass conservation, L1 monotonicity, the spectral-sup bound, and the
/// domain-validity guard. With `check_boundary = false` the boundary guard
/// is reported but not gated (frequency-localized data fills the whole box).
pub fn conservation_and_validity(series: &NormSeries, check_boundary: bool) -> Result<MonitorReport> {
    let rs = &series.records;
    if rs.is_empty() {
        return Err(RadgasError::Fit("empty series".into()));
    }
    let m0 = rs[0].mass;
    let l1_0 = rs[0].l1;
    let mut violations = Vec::new();
    let mut max_drift = 0.0_f64;
    let mut max_boundary = 0.0_f64;
    for r in rs.iter() {
        let drift = (r.mass - m0).abs() / (1.0 + m0.abs());
        max_drift = max_drift.max(drift);
        if drift > 1e-12 {
            violations.push(format!("mass drift {drift:.3e} at t = {}", r.t));
        }
        if r.l1 > l1_0 * 1.01 {
            violations.push(format!("L1 grew to {} at t = {}", r.l1, r.t));
        }
        if r.sup_spec > r.l1 * (1.0 + 1e-12) {
            violations.push(format!("sup|u_hat| > L1 at t = {}", r.t));
        }
        max_boundary = max_boundary.max(r.boundary_frac);
        if check_boundary && r.boundary_frac > 0.01 {
            violations.push(format!(
                "boundary mass fraction {:.3e} at t = {}",
                r.boundary_frac, r.t
            ));
        }
    }
    let pass = violations.is_empty();
    Ok(MonitorReport {
        name: "conservation_validity".into(),
        pass,
        max_violation: max_drift,
        violation_count: violations.len(),
        tolerance: 1e-12,
        constant: Some(max_boundary),
        detail: violations.first().cloned().unwrap_or_default(),
    })
}
