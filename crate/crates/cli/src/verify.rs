//! Replays the result criteria against a completed sweep directory.
//!
//! Each criterion is evaluated from the sweep artifacts (plus fast
//! recomputation where the criterion is about the algorithms themselves)
//! and reported as one row: criterion, observed, bound, verdict.

use std::path::Path;
use std::time::Instant;

use canyonsim_core::analysis::EnvironmentSummary;
use canyonsim_core::geometry::{rice_mean, sample_rice, CanyonGeometry};
use canyonsim_core::orbits::mean_open_sky_count;
use canyonsim_core::simulate::{run_environment_with_geometry, seeded_rng};

use crate::artifacts::{self, RunManifest, SummaryFile};
use crate::{oracle, sweep, AppError};

pub struct CriterionResult {
    pub id: &'static str,
    pub name: &'static str,
    pub observed: String,
    pub bound: &'static str,
    pub pass: bool,
}

pub struct VerifyReport {
    pub results: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.results.iter().filter(|r| !r.pass).count()
    }

    pub fn print(&self) {
        println!("{:<4} {:<44} {:<36} {:<26} verdict", "id", "criterion", "observed", "bound");
        for r in &self.results {
            println!(
                "{:<4} {:<44} {:<36} {:<26} {}",
                r.id,
                r.name,
                r.observed,
                r.bound,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        let failed = self.failed();
        if failed == 0 {
            println!("verify: all {} criteria passed", self.results.len());
        } else {
            println!("verify: {failed} of {} criteria FAILED", self.results.len());
        }
    }
}

/// Adjacent pairs that rise where the sequence should be non-increasing.
pub fn adjacent_inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

fn sorted_by_mu(summaries: &[EnvironmentSummary]) -> Vec<&EnvironmentSummary> {
    let mut v: Vec<&EnvironmentSummary> = summaries.iter().collect();
    v.sort_by(|a, b| a.mu_h_m.partial_cmp(&b.mu_h_m).expect("finite mu"));
    v
}

/// Verifies the sweep in `dir`; returns the full report.
pub fn verify_sweep_dir(dir: &Path) -> Result<VerifyReport, AppError> {
    let manifest: RunManifest = artifacts::read_json(&dir.join(artifacts::MANIFEST_FILE))?;
    artifacts::check_schema(manifest.schema_version, &dir.join(artifacts::MANIFEST_FILE))?;
    let summary: SummaryFile = artifacts::read_json(&dir.join(artifacts::SUMMARY_FILE))?;
    artifacts::check_schema(summary.schema_version, &dir.join(artifacts::SUMMARY_FILE))?;
    let config = &manifest.config;
    config.validate().map_err(|e| AppError::Config(e.to_string()))?;

    let mut results = Vec::new();
    let envs = sorted_by_mu(&summary.environments);

    // 1: open-sky visibility census
    let census = mean_open_sky_count(
        &config.constellation,
        15.0,
        config.duration_s,
        config.sample_period_s,
    )
    .map_err(|e| AppError::Config(e.to_string()))?;
    results.push(CriterionResult {
        id: "1",
        name: "open-sky count above 15 deg",
        observed: format!("{census:.3}"),
        bound: "7.88 +/- 1.0",
        pass: (census - 7.88).abs() <= 1.0,
    });

    // 2: positioning threshold crossing
    let crossing = envs.iter().find(|s| s.mean_received_ns < 4.0).map(|s| s.mu_h_m);
    results.push(CriterionResult {
        id: "2",
        name: "mean N_s crosses below 4",
        observed: match crossing {
            Some(mu) => format!("first at mu_h = {mu:.2} m"),
            None => format!(
                "never (min N_s = {:.3})",
                envs.iter().map(|s| s.mean_received_ns).fold(f64::INFINITY, f64::min)
            ),
        },
        bound: "mu_h in [30, 55] m",
        pass: crossing.is_some_and(|mu| (30.0..=55.0).contains(&mu)),
    });

    // 3: monotone trends
    let refl: Vec<f64> = envs.iter().map(|s| s.reflections_per_epoch).collect();
    let ns: Vec<f64> = envs.iter().map(|s| s.mean_received_ns).collect();
    let refl_inv = adjacent_inversions(&refl);
    let ns_inv = adjacent_inversions(&ns);
    results.push(CriterionResult {
        id: "3a",
        name: "reflections/epoch non-increasing in mu_h",
        observed: format!("{refl_inv} adjacent inversions"),
        bound: "at most 1",
        pass: refl_inv <= 1,
    });
    results.push(CriterionResult {
        id: "3b",
        name: "mean N_s non-increasing in mu_h",
        observed: format!("{ns_inv} adjacent inversions"),
        bound: "at most 1",
        pass: ns_inv <= 1,
    });
    let endpoints_ok = envs.len() >= 2 && {
        let first = envs.first().unwrap();
        let last = envs.last().unwrap();
        first.mode_fractions[0] > last.mode_fractions[0]
            && first.mode_fractions[3] < last.mode_fractions[3]
    };
    results.push(CriterionResult {
        id: "3c",
        name: "SPLOS falls and BLOCKED rises with depth",
        observed: match (envs.first(), envs.last()) {
            (Some(f), Some(l)) => format!(
                "SPLOS {:.3}->{:.3}, BLOCKED {:.3}->{:.3}",
                f.mode_fractions[0], l.mode_fractions[0], f.mode_fractions[3], l.mode_fractions[3]
            ),
            _ => "fewer than 2 environments".into(),
        },
        bound: "strict at both endpoints",
        pass: endpoints_ok,
    });

    // 4: gamma behavior over well-populated environments
    let rich: Vec<&&EnvironmentSummary> =
        envs.iter().filter(|s| s.pooled_delays_m.len() >= 500).collect();
    let scales: Vec<f64> = rich.iter().filter_map(|s| s.gamma_scale).collect();
    let shapes: Vec<f64> = rich.iter().filter_map(|s| s.gamma_shape).collect();
    let scale_ok = !scales.is_empty() && scales.iter().all(|s| (0.5..=2.0).contains(s));
    results.push(CriterionResult {
        id: "4a",
        name: "gamma scale in band (envs with >= 500 delays)",
        observed: if scales.is_empty() {
            "no environment with >= 500 delays".into()
        } else {
            format!(
                "{} envs, scale in [{:.2}, {:.2}]",
                scales.len(),
                scales.iter().cloned().fold(f64::INFINITY, f64::min),
                scales.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            )
        },
        bound: "all in [0.5, 2.0]",
        pass: scale_ok,
    });
    let shape_inv = adjacent_inversions(&shapes);
    results.push(CriterionResult {
        id: "4b",
        name: "gamma shape decreases with mu_h",
        observed: format!("{shape_inv} adjacent inversions over {} envs", shapes.len()),
        bound: "at most 1",
        pass: !shapes.is_empty() && shape_inv <= 1,
    });

    // 5: quadratic model
    let refit = sweep::fit_model(&summary.environments);
    results.push(CriterionResult {
        id: "5a",
        name: "quadratic refit rms on own (N_s, d_m) points",
        observed: match &refit {
            Some(m) => format!("rms {:.3} m ({} points)", m.rms_error_m, m.training_points.len()),
            None => "fit impossible".into(),
        },
        bound: "<= 1.0 m",
        pass: refit.as_ref().is_some_and(|m| m.rms_error_m <= 1.0),
    });
    let reference = canyonsim_core::analysis::QuadraticModel {
        c2: -0.23,
        c1: 5.08,
        c0: -4.08,
        rms_error_m: 0.33,
        training_points: Vec::new(),
    };
    let at5 = canyonsim_core::analysis::estimate_median_delay(&reference, 5.0);
    let at8 = canyonsim_core::analysis::estimate_median_delay(&reference, 8.0);
    results.push(CriterionResult {
        id: "5b",
        name: "reference coefficients evaluate exactly",
        observed: format!("d(5) = {at5:.10}, d(8) = {at8:.10}"),
        bound: "15.57 and 21.84 (1e-12)",
        pass: (at5 - 15.57).abs() <= 1e-12 && (at8 - 21.84).abs() <= 1e-12,
    });

    // 6: geometry oracle suite
    let grid_failures = oracle::grid_oracle_failures(100, 0xC0FFEE);
    let property_failures = oracle::property_suite_failures(10_000, 0xBEEF);
    results.push(CriterionResult {
        id: "6",
        name: "reflection grid oracle and property suites",
        observed: format!("{grid_failures} grid + {property_failures} property failures"),
        bound: "0 failures",
        pass: grid_failures == 0 && property_failures == 0,
    });

    // 7: Rice statistics
    let mut rice_ok = true;
    let mut worst_rel = 0.0f64;
    for (i, nu) in [0.0, 5.0, 25.0, 60.0].into_iter().enumerate() {
        let mut rng = seeded_rng(0xA11CE + i as u64);
        let n = 1_000_000usize;
        let mean = (0..n)
            .map(|_| sample_rice(nu, 5.0, &mut rng).expect("valid params"))
            .sum::<f64>()
            / n as f64;
        let want = rice_mean(nu, 5.0).map_err(|e| AppError::Config(e.to_string()))?;
        let rel = (mean - want).abs() / want;
        worst_rel = worst_rel.max(rel);
        rice_ok &= rel < 0.01;
    }
    let mut quad_worst = 0.0f64;
    for (nu, sigma) in [(0.0, 5.0), (5.0, 5.0), (25.0, 5.0), (60.0, 5.0), (10.0, 2.0)] {
        let q = oracle::rice_mean_quadrature(nu, sigma);
        let a = rice_mean(nu, sigma).map_err(|e| AppError::Config(e.to_string()))?;
        quad_worst = quad_worst.max((q - a).abs() / q);
    }
    results.push(CriterionResult {
        id: "7",
        name: "Rice sampling and analytic mean",
        observed: format!("sample rel {worst_rel:.2e}, quadrature rel {quad_worst:.2e}"),
        bound: "1e-2 and 1e-6",
        pass: rice_ok && quad_worst < 1e-6,
    });

    // 8: determinism — re-run the sweep from the manifest and byte-compare
    let t0 = Instant::now();
    let rerun = sweep::run(config)?;
    let elapsed = t0.elapsed();
    let summary_disk = std::fs::read(dir.join(artifacts::SUMMARY_FILE))
        .map_err(|e| AppError::io("reading summary.json", e))?;
    let model_disk = std::fs::read(dir.join(artifacts::MODEL_FILE))
        .map_err(|e| AppError::io("reading model.json", e))?;
    let summary_new = artifacts::render_summary(&rerun.summary_file(config));
    let model_new = artifacts::render_model(&artifacts::ModelFile {
        schema_version: artifacts::SCHEMA_VERSION,
        model: rerun.model.clone(),
    });
    let identical = summary_disk == summary_new && model_disk == model_new;
    results.push(CriterionResult {
        id: "8",
        name: "manifest re-run reproduces bytes",
        observed: if identical {
            format!("byte-identical (re-run {:.1} s)", elapsed.as_secs_f64())
        } else {
            "summary/model bytes differ".into()
        },
        bound: "byte-identical",
        pass: identical,
    });

    // runtime bound from the same re-run
    results.push(CriterionResult {
        id: "rt",
        name: "full sweep runtime",
        observed: format!("{:.1} s", elapsed.as_secs_f64()),
        bound: "< 300 s",
        pass: elapsed.as_secs_f64() < 300.0,
    });

    // 9: small-delay exclusion
    let mut min_delay: Option<f64> = None;
    for nu in &config.nu_sweep_m {
        let path = dir.join(artifacts::events_file_name(*nu));
        if let Some(d) = artifacts::min_delay_in_events(&path)? {
            min_delay = Some(min_delay.map_or(d, |m| m.min(d)));
        }
    }
    results.push(CriterionResult {
        id: "9a",
        name: "no retained event below delta",
        observed: match min_delay {
            Some(d) => format!("min delay {d:.4} m"),
            None => "no events".into(),
        },
        bound: ">= 0.01 m",
        pass: min_delay.is_none_or(|d| d >= 0.01),
    });
    let empty = CanyonGeometry::empty(config.canyon);
    let zero_run = run_environment_with_geometry(config, 25.0, &empty)
        .map_err(|e| AppError::Config(e.to_string()))?;
    let retained: usize = zero_run.observations.iter().map(|o| o.reflections.len()).sum();
    results.push(CriterionResult {
        id: "9b",
        name: "zero-building scene retains zero events",
        observed: format!("{retained} events retained"),
        bound: "0",
        pass: retained == 0,
    });

    Ok(VerifyReport { results })
}

/// Convenience used by tests: verify and print.
pub fn verify_and_report(dir: &Path, quiet: bool) -> Result<(), AppError> {
    let report = verify_sweep_dir(dir)?;
    if !quiet {
        report.print();
    }
    match report.failed() {
        0 => Ok(()),
        n => Err(AppError::VerifyFailed(n)),
    }
}
