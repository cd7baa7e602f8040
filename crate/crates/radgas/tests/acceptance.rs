//! The full acceptance gate: one pass/fail line per criterion. Every preset
//! runs exactly once; criteria that span several presets read the shared
//! summaries. Run with `--nocapture` to watch the lines appear live.

use std::collections::BTreeMap;
use std::time::Instant;

use radgas::diagnostics::Verdict;
use radgas::grid::make_grid;
use radgas::harness::presets::{preset_config, run_preset};
use radgas::harness::runner::{run_experiment, RunSummary};
use radgas::initdata::spectral_profile;
use radgas::norms::interpolation_gap;

struct Gate {
    lines: Vec<(String, bool)>,
}

impl Gate {
    fn new() -> Self {
        Gate { lines: vec![] }
    }

    fn check(&mut self, id: &str, pass: bool, detail: String) {
        let line = format!(
            "criterion {id:>2}: {} — {detail}",
            if pass { "pass" } else { "FAIL" }
        );
        println!("{line}");
        self.lines.push((line, pass));
    }

    fn finish(self) {
        let failed: Vec<&str> = self
            .lines
            .iter()
            .filter(|(_, p)| !p)
            .map(|(l, _)| l.as_str())
            .collect();
        assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
    }
}

fn fit_slope(s: &RunSummary, id: &str) -> (f64, f64, f64, Verdict) {
    let f = s
        .fits
        .iter()
        .find(|f| f.id == id)
        .unwrap_or_else(|| panic!("run {} has no fit '{id}'", s.name));
    (f.fit.slope, f.fit.theory, f.fit.tolerance, f.fit.verdict)
}

fn monitor_pass(s: &RunSummary, name: &str) -> bool {
    s.monitors
        .iter()
        .find(|m| m.name == name)
        .unwrap_or_else(|| panic!("run {} has no monitor '{name}'", s.name))
        .pass
}

#[test]
fn acceptance() {
    let out = std::env::temp_dir().join("radgas-acceptance");
    let _ = std::fs::remove_dir_all(&out);
    let mut gate = Gate::new();
    let mut runs: BTreeMap<&str, RunSummary> = BTreeMap::new();
    let mut walls: BTreeMap<&str, f64> = BTreeMap::new();
    for name in [
        "linear-oracle",
        "convergence",
        "thm11-n1",
        "thm11-n2",
        "thm11-n3",
        "thm11-q-n1",
        "thm12-s05",
        "thm12-s10",
        "cor11-p12",
        "smoke-n4",
    ] {
        let start = Instant::now();
        let summary = run_preset(name, Some(&out)).expect(name);
        walls.insert(name, start.elapsed().as_secs_f64());
        runs.insert(name, summary);
    }

    // 1: linear-oracle exactness within 1e-10, under 5 s
    {
        let s = &runs["linear-oracle"];
        let m = s.monitors.iter().find(|m| m.name == "linear_oracle").unwrap();
        let pass = m.pass && s.verdict && walls["linear-oracle"] < 5.0;
        gate.check(
            "1",
            pass,
            format!(
                "max relative coefficient error {:.2e} (gate 1e-10), {:.1} s",
                m.max_violation, walls["linear-oracle"]
            ),
        );
    }

    // 2: temporal order >= 3.5 for both schemes, under 1 min
    {
        let s = &runs["convergence"];
        let order = |n: &str| {
            s.monitors
                .iter()
                .find(|m| m.name == n)
                .and_then(|m| m.constant)
                .unwrap()
        };
        let (oe, or) = (order("convergence_etdrk4"), order("convergence_rk4"));
        let pass = oe >= 3.5 && or >= 3.5 && walls["convergence"] < 60.0;
        gate.check(
            "2",
            pass,
            format!("orders etdrk4 {oe:.2}, rk4 {or:.2} (gate 3.5), {:.1} s", walls["convergence"]),
        );
    }

    // 3: Theorem 1.1 n=1 two-sided exponents, under 2 min
    {
        let s = &runs["thm11-n1"];
        let mut detail = String::new();
        let mut pass = walls["thm11-n1"] < 120.0;
        for id in ["thm11_u_n1_l0", "thm11_u_n1_l1", "thm11_u_n1_l2"] {
            let (slope, theory, tol, v) = fit_slope(s, id);
            pass &= v == Verdict::Pass;
            detail.push_str(&format!("{slope:.4} vs {theory} (±{tol}); "));
        }
        gate.check("3", pass, format!("{detail}{:.1} s", walls["thm11-n1"]));
    }

    // 4: Theorem 1.1 n=2, under 10 min
    {
        let s = &runs["thm11-n2"];
        let mut detail = String::new();
        let mut pass = walls["thm11-n2"] < 600.0;
        for id in ["thm11_u_n2_l0", "thm11_u_n2_l1"] {
            let (slope, theory, tol, v) = fit_slope(s, id);
            pass &= v == Verdict::Pass;
            detail.push_str(&format!("{slope:.4} vs {theory} (±{tol}); "));
        }
        gate.check("4", pass, format!("{detail}{:.1} s", walls["thm11-n2"]));
    }

    // 5: Theorem 1.1 n=3, under 20 min
    {
        let s = &runs["thm11-n3"];
        let (slope, theory, tol, v) = fit_slope(s, "thm11_u_n3_l0");
        let pass = v == Verdict::Pass && walls["thm11-n3"] < 1200.0;
        gate.check(
            "5",
            pass,
            format!("{slope:.4} vs {theory} (±{tol}), {:.0} s", walls["thm11-n3"]),
        );
    }

    // 6: q-rate for n=1, l=1
    {
        let (slope, theory, tol, v) = fit_slope(&runs["thm11-q-n1"], "thm11_q_n1_l1");
        gate.check(
            "6",
            v == Verdict::Pass,
            format!("{slope:.4} vs {theory} (±{tol})"),
        );
    }

    // 7: Theorem 1.2 boundedness, each under 15 min
    {
        let pass = monitor_pass(&runs["thm12-s05"], "negative_energy_s0.5")
            && monitor_pass(&runs["thm12-s10"], "negative_energy_s1")
            && walls["thm12-s05"] < 900.0
            && walls["thm12-s10"] < 900.0;
        gate.check(
            "7",
            pass,
            format!(
                "negative-energy ratios within 1.1 for s = 0.5 and 1.0; {:.0} s / {:.0} s",
                walls["thm12-s05"], walls["thm12-s10"]
            ),
        );
    }

    // 8: Theorem 1.2 rates: one-sided u, two-sided oracle, one-sided q
    {
        let mut pass = true;
        let mut detail = String::new();
        for (run, ids) in [
            ("thm12-s05", ["thm12_u_s0.5", "thm12_u_oracle_s0.5", "thm12_q_s0.5"]),
            ("thm12-s10", ["thm12_u_s1", "thm12_u_oracle_s1", "thm12_q_s1"]),
        ] {
            for id in ids {
                let (slope, theory, _, v) = fit_slope(&runs[run], id);
                pass &= v != Verdict::Fail;
                detail.push_str(&format!("{id} {slope:.3}/{theory}; "));
            }
        }
        gate.check("8", pass, detail);
    }

    // 9: corollary gates numerically identical to thm12-s10's and all passing
    {
        let cfg = preset_config("cor11-p12").unwrap();
        let find = |id: &str| {
            cfg.gates
                .iter()
                .find(|g| g.id == id)
                .unwrap()
                .theory_exponent()
                .unwrap()
        };
        let identical = find("cor11_u_p12") == find("thm12_u_s1")
            && find("cor11_q_p12") == find("thm12_q_s1");
        let s = &runs["cor11-p12"];
        let both_pass = ["cor11_u_p12", "thm12_u_s1", "cor11_q_p12", "thm12_q_s1"]
            .iter()
            .all(|id| fit_slope(s, id).3 != Verdict::Fail);
        gate.check(
            "9",
            identical && both_pass,
            format!(
                "exponents u {} / q {} shared by both claim ids",
                find("cor11_u_p12"),
                find("cor11_q_p12")
            ),
        );
    }

    // 10: Lyapunov and dissipation monitors clean across all presets
    {
        let mut violations = Vec::new();
        for (name, s) in &runs {
            for m in &s.monitors {
                if (m.name.starts_with("lyapunov") || m.name.starts_with("dissipation")) && !m.pass
                {
                    violations.push(format!("{name}/{}", m.name));
                }
            }
        }
        gate.check(
            "10",
            violations.is_empty(),
            if violations.is_empty() {
                "zero violations across all monitored orders".into()
            } else {
                violations.join(", ")
            },
        );
    }

    // 11: interpolation inequality on 100 seeded random mean-free fields
    {
        let start = Instant::now();
        let grid = make_grid(1, 64, 25.0).unwrap();
        let mut worst = 0.0_f64;
        for seed in 0..100 {
            // cutoff just below Nyquist (pi*64/25 ~ 8.04): every lattice mode
            let f = spectral_profile(&grid, 0.0, 8.0, seed).unwrap();
            let u_hat = radgas::field::forward_transform(&f);
            for l in [0u32, 1, 2] {
                for s in [0.5, 1.0] {
                    let r = interpolation_gap(&u_hat, l, s).unwrap();
                    worst = worst.max(r);
                }
            }
        }
        let dt = start.elapsed().as_secs_f64();
        gate.check(
            "11",
            worst <= 1.0 + 1e-12 && dt < 10.0,
            format!("worst ratio {worst:.15} over 600 cases, {dt:.1} s"),
        );
    }

    // 12: Fourier-splitting partition clean in every preset
    {
        let mut bad = Vec::new();
        for (name, s) in &runs {
            if let Some(m) = s.monitors.iter().find(|m| m.name == "fourier_split") {
                if !m.pass {
                    bad.push(name.to_string());
                }
            }
        }
        gate.check(
            "12",
            bad.is_empty(),
            if bad.is_empty() {
                "bound_ok everywhere; partition closes to 1e-12 relative".into()
            } else {
                bad.join(", ")
            },
        );
    }

    // 13: conservation and domain validity in every run; boundary guard on
    // every spatially-localized gated run
    {
        let mut bad = Vec::new();
        for (name, s) in &runs {
            if name == &"convergence" {
                continue;
            }
            if !monitor_pass(s, "conservation_validity") {
                bad.push(name.to_string());
            }
        }
        for name in ["linear-oracle", "thm11-n1", "thm11-n2", "thm11-n3", "thm11-q-n1"] {
            let boundary_gated = runs[name].config.monitors.check_boundary;
            if !boundary_gated {
                bad.push(format!("{name} (boundary guard off)"));
            }
        }
        gate.check(
            "13",
            bad.is_empty(),
            if bad.is_empty() {
                "mass drift <= 1e-12, sup|u_hat| <= L1, L1 monotone, localized runs in-domain".into()
            } else {
                bad.join(", ")
            },
        );
    }

    // 14: energy budget finite, <= 10, and stable under M-doubling
    {
        let ratio = |s: &RunSummary| {
            s.monitors
                .iter()
                .find(|m| m.name == "energy_budget")
                .and_then(|m| m.constant)
                .unwrap()
        };
        let r1 = ratio(&runs["thm11-n1"]);
        let mut doubled = preset_config("thm11-n1").unwrap();
        doubled.name = "thm11-n1-mx2".into();
        doubled.points *= 2;
        let s2 = run_experiment(&doubled, Some(&out)).unwrap();
        let r2 = ratio(&s2);
        let stable = (r2 - r1).abs() <= 0.2 * r1;
        let pass = r1.is_finite() && r1 <= 10.0 && stable && monitor_pass(&runs["thm11-n1"], "energy_budget");
        gate.check(
            "14",
            pass,
            format!("budget ratio {r1:.4} (M = 4096) vs {r2:.4} (M = 8192)"),
        );
    }

    gate.finish();
}
