use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::Verdict;
use crate::error::{RadgasError, Result};
use crate::harness::runner::RunSummary;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CLAIM_FAIL: i32 = 1;
pub const EXIT_OPERATIONAL: i32 = 2;

#[derive(Debug)]
pub struct VerifyReport {
    pub table: String,
    pub exit_code: i32,
}

/// Read every RunSummary JSON under `dir` and render a claim-by-claim table.
/// Exit code 0 when every gated verdict passed, 1 when any failed, 2 when the
/// directory is empty/missing or a summary cannot be parsed.
pub fn verify(dir: &Path) -> VerifyReport {
    match verify_inner(dir) {
        Ok(r) => r,
        Err(e) => VerifyReport {
            table: format!("verify: {e}\n"),
            exit_code: EXIT_OPERATIONAL,
        },
    }
}

fn verify_inner(dir: &Path) -> Result<VerifyReport> {
    let entries = std::fs::read_dir(dir).map_err(RadgasError::Io)?;
    let mut summaries: Vec<RunSummary> = Vec::new();
    for entry in entries {
        let path = entry.map_err(RadgasError::Io)?.path();
        if path.extension().is_some_and(|e| e == "json")
            && path.file_name().is_some_and(|n| n != "sweep.json")
        {
            let text = std::fs::read_to_string(&path).map_err(RadgasError::Io)?;
            let s: RunSummary = serde_json::from_str(&text).map_err(|e| {
                RadgasError::Config(format!("corrupt summary {}: {e}", path.display()))
            })?;
            summaries.push(s);
        }
    }
    if summaries.is_empty() {
        return Err(RadgasError::Config(format!(
            "no run summaries found in {}",
            dir.display()
        )));
    }
    summaries.sort_by(|a, b| a.name.cmp(&b.name));

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<22} {:>9} {:>9} {:>7} {:<10} verdict",
        "run", "claim", "theory", "measured", "tol", "mode"
    );
    let mut any_fail = false;
    for s in &summaries {
        if let Some(err) = &s.error {
            any_fail = true;
            let _ = writeln!(out, "{:<14} run failed: {err}", s.name);
            continue;
        }
        for f in &s.fits {
            let v = match f.fit.verdict {
                Verdict::Pass => "pass",
                Verdict::OneSidedPass => "pass",
                Verdict::Fail => {
                    any_fail = true;
                    "FAIL"
                }
            };
            let _ = writeln!(
                out,
                "{:<14} {:<22} {:>9.4} {:>9.4} {:>7.3} {:<10} {v}",
                s.name,
                f.id,
                f.fit.theory,
                f.fit.slope,
                f.fit.tolerance,
                format!("{:?}", f.fit.mode).to_lowercase(),
            );
        }
        for m in &s.monitors {
            let v = if m.pass {
                "pass"
            } else {
                any_fail = true;
                "FAIL"
            };
            let measured = m.constant.unwrap_or(m.max_violation);
            let _ = writeln!(
                out,
                "{:<14} {:<22} {:>9} {:>9.3e} {:>7.1e} {:<10} {v}",
                s.name, m.name, "-", measured, m.tolerance, "monitor",
            );
        }
        if !s.verdict {
            any_fail = true;
        }
    }
    Ok(VerifyReport {
        table: out,
        exit_code: if any_fail { EXIT_CLAIM_FAIL } else { EXIT_PASS },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_or_missing_directory_is_operational_error() {
        let dir = std::env::temp_dir().join("radgas-verify-empty-test");
        let _ = std::fs::remove_dir_all(&dir);
        assert_eq!(verify(&dir).exit_code, EXIT_OPERATIONAL);
        std::fs::create_dir_all(&dir).unwrap();
        assert_eq!(verify(&dir).exit_code, EXIT_OPERATIONAL);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn corrupt_summary_is_operational_error() {
        let dir = std::env::temp_dir().join("radgas-verify-corrupt-test");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("bad.json"), "{ not json").unwrap();
        assert_eq!(verify(&dir).exit_code, EXIT_OPERATIONAL);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
