//! Statistics over observation streams: reception-mode fractions, pooled
//! reflection-delay distributions, gamma fits, and the quadratic model that
//! predicts the median reflection delay from the number of received
//! satellites.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

// resolves float math through libm in the no_std build
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::rice_mean;
use crate::simulate::{EpochObservation, ReceptionMode};
use crate::special::{digamma, trigamma};

/// Minimum sample count for a meaningful two-parameter gamma fit.
pub const GAMMA_FIT_MIN_SAMPLES: usize = 30;

/// Per-environment aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSummary {
    /// Rice non-centrality of the environment, meters.
    pub nu_h_m: f64,
    /// Analytic mean building height, meters.
    pub mu_h_m: f64,
    /// Mean number of received satellites (SPLOS + MP + NLOS) per epoch.
    pub mean_received_ns: f64,
    /// Fractions of (SPLOS, MP, NLOS, BLOCKED) over all observations; sums
    /// to one.
    pub mode_fractions: [f64; 4],
    /// Every retained reflection delay across all repetitions, meters.
    pub pooled_delays_m: Vec<f64>,
    /// Median of the pooled delays, meters; absent when no delays remain.
    pub median_delay_m: Option<f64>,
    /// Maximum-likelihood gamma shape of the pooled delays; absent when the
    /// fit is impossible (too few samples or a degenerate pool).
    pub gamma_shape: Option<f64>,
    /// Maximum-likelihood gamma scale of the pooled delays.
    pub gamma_scale: Option<f64>,
    /// Mean retained reflections per epoch.
    pub reflections_per_epoch: f64,
}

/// Quadratic least-squares model d_m(N_s) = c2 N_s^2 + c1 N_s + c0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticModel {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    /// Root-mean-square residual over the training points, meters.
    pub rms_error_m: f64,
    /// The (N_s, d_m) pairs the model was fitted on.
    pub training_points: Vec<(f64, f64)>,
}

/// Aggregates one environment's observation stream.
///
/// Pools every retained reflection delay across repetitions, averages the
/// received-satellite count over epochs, tallies reception-mode fractions,
/// and fits a gamma distribution to the pooled delays when enough samples
/// exist.
pub fn summarize_environment(
    observations: &[EpochObservation],
    nu_h_m: f64,
    sigma_h_m: f64,
) -> Result<EnvironmentSummary> {
    if observations.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }

    let mut mode_counts = [0usize; 4];
    let mut pooled: Vec<f64> = Vec::new();
    // (repetition, epoch bits) -> received count; BTreeMap keeps iteration
    // and therefore all derived statistics deterministic
    let mut per_epoch: BTreeMap<(u32, u64), usize> = BTreeMap::new();

    for obs in observations {
        let slot = match obs.mode {
            ReceptionMode::Splos => 0,
            ReceptionMode::Mp => 1,
            ReceptionMode::Nlos => 2,
            ReceptionMode::Blocked => 3,
        };
        mode_counts[slot] += 1;
        let entry = per_epoch.entry((obs.repetition, obs.epoch_s.to_bits())).or_insert(0);
        if obs.mode.is_received() {
            *entry += 1;
        }
        pooled.extend(obs.reflections.iter().map(|e| e.delay_m));
    }

    let total = observations.len() as f64;
    let epochs = per_epoch.len() as f64;
    let mean_received_ns = per_epoch.values().sum::<usize>() as f64 / epochs;
    let mode_fractions = [
        mode_counts[0] as f64 / total,
        mode_counts[1] as f64 / total,
        mode_counts[2] as f64 / total,
        mode_counts[3] as f64 / total,
    ];

    let median_delay_m = median(&pooled);
    let (gamma_shape, gamma_scale) = match fit_gamma(&pooled) {
        Ok((shape, scale)) => (Some(shape), Some(scale)),
        Err(_) => (None, None),
    };

    Ok(EnvironmentSummary {
        nu_h_m,
        mu_h_m: rice_mean(nu_h_m, sigma_h_m)?,
        mean_received_ns,
        mode_fractions,
        reflections_per_epoch: pooled.len() as f64 / epochs,
        pooled_delays_m: pooled,
        median_delay_m,
        gamma_shape,
        gamma_scale,
    })
}

/// Median with the midpoint-of-two rule for even counts; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.into();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("delays are finite"));
    let n = sorted.len();
    Some(if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 })
}

/// Maximum-likelihood fit of the two-parameter gamma distribution.
///
/// The shape solves ln(shape) - psi(shape) = ln(mean) - mean(ln x) by
/// Newton iteration (tolerance 1e-10, at most 100 steps) from the standard
/// closed-form starting point; the scale is mean/shape.
pub fn fit_gamma(delays: &[f64]) -> Result<(f64, f64)> {
    if delays.len() < GAMMA_FIT_MIN_SAMPLES {
        return Err(Error::InsufficientData { needed: GAMMA_FIT_MIN_SAMPLES, got: delays.len() });
    }
    if delays.iter().any(|d| *d <= 0.0 || !d.is_finite()) {
        return Err(Error::InvalidParameter("gamma samples must be positive and finite".into()));
    }
    let n = delays.len() as f64;
    let mean = delays.iter().sum::<f64>() / n;
    let mean_ln = delays.iter().map(|d| d.ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_ln;
    // s -> 0 as the sample spread vanishes (Jensen gap)
    if s.is_nan() || s <= 1e-12 {
        return Err(Error::DegenerateDistribution);
    }

    let mut shape = (3.0 - s + ((s - 3.0) * (s - 3.0) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let f = shape.ln() - digamma(shape) - s;
        let df = 1.0 / shape - trigamma(shape);
        let mut step = f / df;
        // keep the iterate positive
        while shape - step <= 0.0 {
            step /= 2.0;
        }
        shape -= step;
        if step.abs() <= 1e-10 * shape.max(1.0) {
            break;
        }
    }
    Ok((shape, mean / shape))
}

/// Ordinary least squares on the basis (N_s^2, N_s, 1), solved via the
/// normal equations with full pivoting.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<QuadraticModel> {
    if points.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: points.len() });
    }
    let mut xs: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("abscissae are finite"));
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::SingularFit);
    }

    // normal equations for basis phi(x) = (x^2, x, 1)
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(x, y) in points {
        let phi = [x * x, x, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += phi[i] * phi[j];
            }
            atb[i] += phi[i] * y;
        }
    }
    let [c2, c1, c0] = solve_3x3_full_pivot(ata, atb)?;

    let predicted: Vec<f64> =
        points.iter().map(|(x, _)| c2 * x * x + c1 * x + c0).collect();
    let actual: Vec<f64> = points.iter().map(|(_, y)| *y).collect();
    let rms_error_m = rms_error(&predicted, &actual)?;

    Ok(QuadraticModel { c2, c1, c0, rms_error_m, training_points: points.into() })
}

/// Gaussian elimination with full pivoting on a 3x3 system.
fn solve_3x3_full_pivot(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut col_of = [0usize, 1, 2]; // col_of[k]: original column eliminated at step k

    for k in 0..3 {
        // largest remaining entry in magnitude
        let (mut pr, mut pc, mut pv) = (k, k, 0.0f64);
        for r in k..3 {
            for c in k..3 {
                if a[r][c].abs() > pv {
                    (pr, pc, pv) = (r, c, a[r][c].abs());
                }
            }
        }
        if pv <= 1e-12 * scale.max(1.0) {
            return Err(Error::SingularFit);
        }
        a.swap(k, pr);
        b.swap(k, pr);
        if pc != k {
            for row in &mut a {
                row.swap(k, pc);
            }
            col_of.swap(k, pc);
        }
        for r in k + 1..3 {
            let factor = a[r][k] / a[k][k];
            for c in k..3 {
                a[r][c] -= factor * a[k][c];
            }
            b[r] -= factor * b[k];
        }
    }

    // back substitution, then undo the column permutation
    let mut y = [0.0f64; 3];
    for k in (0..3).rev() {
        let mut acc = b[k];
        for c in k + 1..3 {
            acc -= a[k][c] * y[c];
        }
        y[k] = acc / a[k][k];
    }
    let mut x = [0.0f64; 3];
    for k in 0..3 {
        x[col_of[k]] = y[k];
    }
    Ok(x)
}

/// Evaluates the quadratic model, clamping negative predictions to zero (a
/// negative median delay has no physical meaning).
pub fn estimate_median_delay(model: &QuadraticModel, received_ns: f64) -> f64 {
    let raw = model.c2 * received_ns * received_ns + model.c1 * received_ns + model.c0;
    raw.max(0.0)
}

/// Root-mean-square of element-wise differences.
pub fn rms_error(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != actual.len() {
        return Err(Error::InvalidParameter(format!(
            "rms_error needs equal non-empty lengths, got {} and {}",
            predicted.len(),
            actual.len()
        )));
    }
    let sum_sq: f64 =
        predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sum_sq / predicted.len() as f64).sqrt())
}

/// One histogram bin: [lower, upper) with a probability density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower_m: f64,
    pub upper_m: f64,
    pub density: f64,
}

/// Normalized delay histogram with an explicit overflow count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayHistogram {
    pub bins: Vec<HistogramBin>,
    /// Samples at or above the display cutoff, excluded from the bins.
    pub overflow: usize,
    pub total: usize,
}

/// Bins delays into fixed-width cells on [0, max_delay).
///
/// Densities are normalized by the TOTAL sample count, so the histogram
/// area equals the retained-mass fraction (at most one); values at or above
/// `max_delay_m` are only counted in the overflow field.
pub fn histogram_delays(
    delays: &[f64],
    bin_width_m: f64,
    max_delay_m: f64,
) -> Result<DelayHistogram> {
    if bin_width_m <= 0.0 || !bin_width_m.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bin width must be positive, got {bin_width_m}"
        )));
    }
    if max_delay_m <= 0.0 || !max_delay_m.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "max delay must be positive, got {max_delay_m}"
        )));
    }
    let bin_count = (max_delay_m / bin_width_m).ceil() as usize;
    let mut counts = alloc::vec![0usize; bin_count];
    let mut overflow = 0usize;
    for &d in delays {
        if d >= max_delay_m {
            overflow += 1;
        } else {
            let idx = ((d / bin_width_m) as usize).min(bin_count - 1);
            counts[idx] += 1;
        }
    }
    let total = delays.len();
    let norm = if total == 0 { 0.0 } else { 1.0 / (total as f64 * bin_width_m) };
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| HistogramBin {
            lower_m: i as f64 * bin_width_m,
            upper_m: (i + 1) as f64 * bin_width_m,
            density: c as f64 * norm,
        })
        .collect();
    Ok(DelayHistogram { bins, overflow, total })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::raytrace::ReflectionEvent;
    use crate::simulate::EpochObservation;
    use crate::vec3::Vec3;
    use crate::geometry::SurfaceKind;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn obs(rep: u32, epoch: f64, sat: u32, mode: ReceptionMode, delays: &[f64]) -> EpochObservation {
        EpochObservation {
            epoch_s: epoch,
            repetition: rep,
            sat_id: sat,
            mode,
            reflections: delays
                .iter()
                .map(|d| ReflectionEvent {
                    sat_id: sat,
                    epoch_s: epoch,
                    point: Vec3::ZERO,
                    delay_m: *d,
                    plane_index: 0,
                    surface_kind: SurfaceKind::BuildingWall,
                })
                .collect(),
            elevation_deg: 45.0,
        }
    }

    #[test]
    fn summary_matches_hand_tally() {
        // 3 epochs x known modes
        let stream = [
            obs(0, 0.0, 1, ReceptionMode::Splos, &[]),
            obs(0, 0.0, 2, ReceptionMode::Mp, &[10.0]),
            obs(0, 1.0, 1, ReceptionMode::Nlos, &[20.0, 30.0]),
            obs(0, 1.0, 2, ReceptionMode::Blocked, &[]),
            obs(0, 2.0, 1, ReceptionMode::Splos, &[]),
            obs(0, 2.0, 2, ReceptionMode::Blocked, &[]),
        ];
        let s = summarize_environment(&stream, 25.0, 5.0).unwrap();
        assert_eq!(s.mode_fractions, [2.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0]);
        // received per epoch: 2, 1, 1
        assert_relative_eq!(s.mean_received_ns, 4.0 / 3.0);
        assert_eq!(s.pooled_delays_m, alloc::vec![10.0, 20.0, 30.0]);
        assert_eq!(s.median_delay_m, Some(20.0));
        assert_relative_eq!(s.reflections_per_epoch, 1.0);
        // too few delays for a gamma fit
        assert_eq!(s.gamma_shape, None);
        assert_relative_eq!(s.mu_h_m, 25.505348197460624, epsilon = 1e-9);
    }

    #[test]
    fn summary_of_all_blocked_stream() {
        let stream = [
            obs(0, 0.0, 1, ReceptionMode::Blocked, &[]),
            obs(0, 1.0, 1, ReceptionMode::Blocked, &[]),
        ];
        let s = summarize_environment(&stream, 25.0, 5.0).unwrap();
        assert_eq!(s.mean_received_ns, 0.0);
        assert_eq!(s.mode_fractions, [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(s.median_delay_m, None);
        assert_eq!(s.gamma_shape, None);
        assert!(s.pooled_delays_m.is_empty());
    }

    #[test]
    fn summary_rejects_empty_stream() {
        assert!(matches!(
            summarize_environment(&[], 25.0, 5.0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn median_rules() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0]), Some(3.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[5.0, 1.0, 9.0]), Some(5.0));
    }

    #[test]
    fn gamma_fit_recovers_synthetic_parameters() {
        let mut rng = crate::simulate::seeded_rng(21);
        let gamma = rand_distr::Gamma::new(3.0, 1.0).unwrap();
        let samples: Vec<f64> = (0..100_000).map(|_| rng.sample(gamma)).collect();
        let (shape, scale) = fit_gamma(&samples).unwrap();
        assert!((shape - 3.0).abs() / 3.0 < 0.05, "shape {shape}");
        assert!((scale - 1.0).abs() < 0.05, "scale {scale}");
    }

    #[test]
    fn gamma_fit_exponential_is_shape_one() {
        let mut rng = crate::simulate::seeded_rng(22);
        let exp = rand_distr::Exp::new(0.5).unwrap(); // mean 2
        let samples: Vec<f64> = (0..100_000).map(|_| rng.sample(exp)).collect();
        let (shape, scale) = fit_gamma(&samples).unwrap();
        assert!((shape - 1.0).abs() < 0.05, "shape {shape}");
        assert!((scale - 2.0).abs() / 2.0 < 0.05, "scale {scale}");
    }

    #[test]
    fn gamma_fit_error_paths() {
        let few = alloc::vec![1.0; 29];
        assert!(matches!(fit_gamma(&few), Err(Error::InsufficientData { needed: 30, got: 29 })));

        let identical = alloc::vec![2.5; 100];
        assert!(matches!(fit_gamma(&identical), Err(Error::DegenerateDistribution)));

        let mut with_zero = alloc::vec![1.0; 40];
        with_zero[7] = 0.0;
        assert!(matches!(fit_gamma(&with_zero), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn quadratic_fit_exact_cases() {
        let square: Vec<(f64, f64)> = [1.0, 2.0, 3.0, 4.0].iter().map(|&x| (x, x * x)).collect();
        let m = fit_quadratic(&square).unwrap();
        assert_relative_eq!(m.c2, 1.0, epsilon = 1e-9);
        assert_relative_eq!(m.c1, 0.0, epsilon = 1e-9);
        assert_relative_eq!(m.c0, 0.0, epsilon = 1e-9);
        assert!(m.rms_error_m < 1e-9);

        let line: Vec<(f64, f64)> =
            [0.0, 1.0, 2.0, 5.0].iter().map(|&x| (x, 2.0 * x + 1.0)).collect();
        let m = fit_quadratic(&line).unwrap();
        assert_relative_eq!(m.c2, 0.0, epsilon = 1e-9);
        assert_relative_eq!(m.c1, 2.0, epsilon = 1e-9);
        assert_relative_eq!(m.c0, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn quadratic_fit_rank_and_count_errors() {
        assert!(matches!(
            fit_quadratic(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(Error::InsufficientData { .. })
        ));
        // three points, two distinct abscissae
        assert!(matches!(
            fit_quadratic(&[(1.0, 1.0), (1.0, 2.0), (2.0, 2.0)]),
            Err(Error::SingularFit)
        ));
    }

    #[test]
    fn quadratic_residuals_are_orthogonal_to_basis() {
        let mut rng = crate::simulate::seeded_rng(23);
        let points: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = i as f64 / 5.0;
                (x, 0.5 * x * x - 2.0 * x + 3.0 + rng.gen_range(-1.0..1.0))
            })
            .collect();
        let m = fit_quadratic(&points).unwrap();
        for power in 0..3u32 {
            let dot: f64 = points
                .iter()
                .map(|&(x, y)| {
                    let res = y - (m.c2 * x * x + m.c1 * x + m.c0);
                    res * x.powi(power as i32)
                })
                .sum();
            let col_norm: f64 =
                points.iter().map(|&(x, _)| x.powi(2 * power as i32)).sum::<f64>().sqrt();
            let res_norm: f64 = points
                .iter()
                .map(|&(x, y)| {
                    let r = y - (m.c2 * x * x + m.c1 * x + m.c0);
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            assert!(
                dot.abs() <= 1e-6 * col_norm * res_norm.max(1.0),
                "residuals not orthogonal to x^{power}: {dot}"
            );
        }
    }

    #[test]
    fn model_evaluation_and_clamp() {
        let reference = QuadraticModel {
            c2: -0.23,
            c1: 5.08,
            c0: -4.08,
            rms_error_m: 0.33,
            training_points: Vec::new(),
        };
        assert_relative_eq!(estimate_median_delay(&reference, 5.0), 15.57, epsilon = 1e-12);
        assert_relative_eq!(estimate_median_delay(&reference, 8.0), 21.84, epsilon = 1e-12);
        // raw value at zero is the negative constant term; clamped
        assert_eq!(estimate_median_delay(&reference, 0.0), 0.0);
    }

    #[test]
    fn refit_reproduces_stored_rms() {
        let points = alloc::vec![(4.0, 14.0), (5.0, 15.4), (7.0, 20.0), (9.0, 22.0), (11.0, 23.5)];
        let m = fit_quadratic(&points).unwrap();
        let predicted: Vec<f64> =
            points.iter().map(|&(x, _)| estimate_median_delay(&m, x)).collect();
        let actual: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
        assert_eq!(rms_error(&predicted, &actual).unwrap(), m.rms_error_m);
    }

    #[test]
    fn rms_error_cases() {
        assert_eq!(rms_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_relative_eq!(rms_error(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_relative_eq!(
            rms_error(&[1.0, 2.0, 3.0], &[2.0, 4.0, 3.0]).unwrap(),
            (5.0f64 / 3.0).sqrt(),
            epsilon = 1e-12
        );
        assert!(rms_error(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rms_error(&[], &[]).is_err());
    }

    #[test]
    fn histogram_single_sample_and_empty() {
        let h = histogram_delays(&[], 10.0, 100.0).unwrap();
        assert_eq!(h.bins.len(), 10);
        assert!(h.bins.iter().all(|b| b.density == 0.0));
        assert_eq!(h.overflow, 0);

        let h = histogram_delays(&[50.0], 10.0, 100.0).unwrap();
        let idx = 5;
        assert_relative_eq!(h.bins[idx].density, 0.1);
        assert_eq!(h.bins[idx].lower_m, 50.0);
        for (i, b) in h.bins.iter().enumerate() {
            if i != idx {
                assert_eq!(b.density, 0.0);
            }
        }
    }

    #[test]
    fn histogram_overflow_and_mass() {
        let delays = [5.0, 15.0, 25.0, 120.0, 350.0];
        let h = histogram_delays(&delays, 10.0, 100.0).unwrap();
        assert_eq!(h.overflow, 2);
        assert_eq!(h.total, 5);
        let area: f64 = h.bins.iter().map(|b| b.density * 10.0).sum();
        assert_relative_eq!(area, 3.0 / 5.0, epsilon = 1e-12);
    }

    #[test]
    fn histogram_uniform_is_flat_within_multinomial_bounds() {
        let mut rng = crate::simulate::seeded_rng(24);
        let n = 100_000usize;
        let delays: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
        let h = histogram_delays(&delays, 10.0, 100.0).unwrap();
        // each bin is Binomial(n, 0.1): 3 sigma on the density
        let p = 0.1;
        let sigma = (p * (1.0 - p) / n as f64).sqrt() / 10.0;
        for b in &h.bins {
            assert!((b.density - 0.01).abs() < 3.0 * sigma, "bin {b:?}");
        }
    }

    #[test]
    fn histogram_rejects_bad_widths() {
        assert!(histogram_delays(&[1.0], 0.0, 10.0).is_err());
        assert!(histogram_delays(&[1.0], 1.0, 0.0).is_err());
    }
}
