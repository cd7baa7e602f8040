use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{theoretical_exponent, Claim, FitMode, NormRequest};
use crate::error::{RadgasError, Result};
use crate::grid::{make_grid, Grid};
use crate::initdata::{InitKind, InitSpec, Rescale, RescaleNorm};
use crate::integrator::SchemeConfig;
use crate::model::FluxSpec;

/// One gated decay-rate claim: fit `quantity` over `window` and compare
/// against the exponent of `claim` (or an explicit `theory` for derived
/// oracle predictions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitGate {
    pub id: String,
    #[serde(default)]
    pub claim: Option<Claim>,
    #[serde(default)]
    pub theory: Option<f64>,
    pub quantity: String,
    pub window: [f64; 2],
    pub tolerance: f64,
    pub mode: FitMode,
}

impl FitGate {
    /// The exponent this gate tests against, traceable to its claim.
    pub fn theory_exponent(&self) -> Result<f64> {
        match (self.claim, self.theory) {
            (Some(c), None) => theoretical_exponent(c),
            (None, Some(t)) => Ok(t),
            _ => Err(RadgasError::Config(format!(
                "gate '{}' must give exactly one of claim or theory",
                self.id
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorConfig {
    pub lyapunov_orders: Vec<u32>,
    pub dissipation_orders: Vec<u32>,
    pub weighted_orders: Vec<u32>,
    /// Negative indices s whose energy must stay within 1.1x of its
    /// initial value.
    pub bounded_neg_indices: Vec<f64>,
    /// Enables the H^N energy budget (needs u orders 0..=N and q orders
    /// 0..=N+1 tracked).
    pub energy_budget_n: Option<u32>,
    pub energy_budget_factor: f64,
    /// Gate the outer-shell mass fraction; off for frequency-localized
    /// data that fills the whole box.
    pub check_boundary: bool,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            lyapunov_orders: vec![0],
            dissipation_orders: vec![0],
            weighted_orders: vec![0],
            bounded_neg_indices: vec![],
            energy_budget_n: None,
            energy_budget_factor: 10.0,
            check_boundary: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub name: String,
    pub dim: usize,
    pub points: usize,
    pub length: f64,
    /// Full initial-data spec; alternative to `preset_init`.
    pub init: Option<InitSpec>,
    /// Shorthand: "gaussian" or "dipole" with canonical parameters.
    pub preset_init: Option<String>,
    /// Defaults to the quadratic flux in every direction.
    pub flux: Option<FluxSpec>,
    pub scheme: SchemeConfig,
    pub norms: NormRequest,
    pub gates: Vec<FitGate>,
    pub monitors: MonitorConfig,
    /// Compare every record against the closed-form linear flow
    /// (zero-flux runs only); value is the max-relative-error gate.
    pub linear_oracle_tol: Option<f64>,
    pub out_dir: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "run".into(),
            dim: 1,
            points: 256,
            length: 100.0,
            init: None,
            preset_init: None,
            flux: None,
            scheme: SchemeConfig::default(),
            norms: NormRequest::default(),
            gates: vec![],
            monitors: MonitorConfig::default(),
            linear_oracle_tol: None,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Arc<Grid>> {
        make_grid(self.dim, self.points, self.length)
    }

    pub fn flux_spec(&self) -> FluxSpec {
        self.flux
            .clone()
            .unwrap_or_else(|| FluxSpec::quadratic(self.dim))
    }

    pub fn init_spec(&self) -> Result<InitSpec> {
        match (&self.init, &self.preset_init) {
            (Some(i), None) => Ok(i.clone()),
            (None, Some(name)) => match name.as_str() {
                "gaussian" => Ok(InitSpec {
                    kind: InitKind::Gaussian {
                        amplitude: 1.0,
                        width: 2.0,
                        center: None,
                    },
                    rescale: Some(Rescale {
                        norm: RescaleNorm::Hn { n: 3 },
                        target: 0.05,
                    }),
                }),
                "dipole" => Ok(InitSpec {
                    kind: InitKind::Dipole {
                        amplitude: 1.0,
                        width: 2.0,
                        axis: 0,
                    },
                    rescale: Some(Rescale {
                        norm: RescaleNorm::Hn { n: 3 },
                        target: 0.05,
                    }),
                }),
                other => Err(RadgasError::Config(format!(
                    "unknown preset_init '{other}' (expected gaussian or dipole)"
                ))),
            },
            (None, None) => Err(RadgasError::Config(
                "config needs either init or preset_init".into(),
            )),
            (Some(_), Some(_)) => Err(RadgasError::Config(
                "give only one of init and preset_init".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.init_spec()?;
        self.flux_spec().validate(self.dim)?;
        self.scheme.validate()?;
        if self.linear_oracle_tol.is_some() && !self.flux_spec().is_zero() {
            return Err(RadgasError::Config(
                "linear oracle comparison requires zero flux".into(),
            ));
        }
        for g in &self.gates {
            g.theory_exponent()?;
            if !(g.window[0] < g.window[1]) {
                return Err(RadgasError::Config(format!(
                    "gate '{}' has an empty fit window",
                    g.id
                )));
            }
            // torus artifact guard: images wrap around long before the
            // heat-kernel asymptotics would expire
            let cap = 0.1 * self.length * self.length;
            if g.window[1] > cap {
                return Err(RadgasError::Config(format!(
                    "gate '{}' window end {} exceeds the torus-validity cap 0.1 L^2 = {}",
                    g.id, g.window[1], cap
                )));
            }
            if !(g.tolerance > 0.0) {
                return Err(RadgasError::Config(format!(
                    "gate '{}' tolerance must be positive",
                    g.id
                )));
            }
        }
        if let Some(n_reg) = self.monitors.energy_budget_n {
            let need = self.dim / 2 + 2;
            if (n_reg as usize) < need {
                return Err(RadgasError::Config(format!(
                    "energy budget needs N >= floor(n/2) + 2 = {need}, got {n_reg}"
                )));
            }
            for l in 0..=n_reg {
                if !self.norms.u_orders.contains(&l) {
                    return Err(RadgasError::Config(format!(
                        "energy budget N = {n_reg} needs u order {l} tracked"
                    )));
                }
            }
            for l in 0..=n_reg + 1 {
                if !self.norms.q_orders.contains(&l) {
                    return Err(RadgasError::Config(format!(
                        "energy budget N = {n_reg} needs q order {l} tracked"
                    )));
                }
            }
        }
        for &l in self
            .monitors
            .lyapunov_orders
            .iter()
            .chain(&self.monitors.dissipation_orders)
            .chain(&self.monitors.weighted_orders)
        {
            if !self.norms.u_orders.contains(&l) {
                return Err(RadgasError::Config(format!(
                    "monitored order {l} is not in norms.u_orders"
                )));
            }
        }
        for &l in &self.monitors.lyapunov_orders {
            if !self.norms.u_orders.contains(&(l + 1)) {
                return Err(RadgasError::Config(format!(
                    "lyapunov order {l} also needs u order {} tracked",
                    l + 1
                )));
            }
        }
        for &s in &self.monitors.bounded_neg_indices {
            let tracked = self
                .norms
                .neg_indices
                .iter()
                .any(|&x| (x - s).abs() < 1e-12);
            if !tracked || !self.norms.include_grad_neg {
                return Err(RadgasError::Config(format!(
                    "negative-energy monitor s = {s} needs hneg{s}_u and hneg{s}_gradu tracked"
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form; with the seed it determines
    /// every output byte.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| RadgasError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RadgasError::Config(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config_str(
            r#"{"dim":1, "points":1024, "length":400, "preset_init":"gaussian"}"#,
        )
        .unwrap();
        assert_eq!(cfg.scheme.scheme, "etdrk4");
        assert_eq!(cfg.scheme.dealias_rule, 2.0 / 3.0);
        assert!(cfg.flux.is_none() && !cfg.flux_spec().is_zero());
        assert!(cfg.gates.is_empty());
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let err = parse_config_str(r#"{"dim":1, "poins":64, "length":10}"#).unwrap_err();
        assert!(err.to_string().contains("poins"), "{err}");
    }

    #[test]
    fn round_trip_is_idempotent() {
        let cfg = parse_config_str(
            r#"{"dim":2, "points":32, "length":30, "preset_init":"dipole"}"#,
        )
        .unwrap();
        let emitted = serde_json::to_string_pretty(&cfg).unwrap();
        let cfg2 = parse_config_str(&emitted).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(emitted, serde_json::to_string_pretty(&cfg2).unwrap());
        assert_eq!(cfg.digest(), cfg2.digest());
    }

    #[test]
    fn invariants_enforced() {
        // window beyond the torus cap
        let bad = r#"{"dim":1, "points":64, "length":10, "preset_init":"gaussian",
            "gates":[{"id":"x","theory":-0.25,"quantity":"l2_d0_u",
                      "window":[1.0, 50.0],"tolerance":0.1,"mode":"two_sided"}]}"#;
        assert!(parse_config_str(bad).is_err());
        // energy budget with too small N
        let bad = r#"{"dim":3, "points":16, "length":10, "preset_init":"gaussian",
            "monitors":{"energy_budget_n":2}}"#;
        assert!(parse_config_str(bad).is_err());
        // monitored order not tracked
        let bad = r#"{"dim":1, "points":64, "length":10, "preset_init":"gaussian",
            "monitors":{"lyapunov_orders":[5]}}"#;
        assert!(parse_config_str(bad).is_err());
        // both init forms at once
        let bad = r#"{"dim":1, "points":64, "length":10, "preset_init":"gaussian",
            "init":{"kind":"gaussian","amplitude":1.0,"width":1.0}}"#;
        assert!(parse_config_str(bad).is_err());
    }

    #[test]
    fn digest_changes_with_any_field() {
        let a = parse_config_str(r#"{"dim":1,"points":64,"length":10,"preset_init":"gaussian"}"#)
            .unwrap();
        let mut b = a.clone();
        b.length = 11.0;
        assert_ne!(a.digest(), b.digest());
    }
}
