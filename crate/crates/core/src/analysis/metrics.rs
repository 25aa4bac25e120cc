use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::fwm::GainProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricOptions {
    /// Moving-average window, Hz.
    pub smoothing_window_hz: f64,
    /// Width excised around every stopband dip. `None` uses the detected
    /// dip width plus `dip_guard_hz`.
    pub dip_exclusion_width_hz: Option<f64>,
    pub dip_guard_hz: f64,
    /// Half-width of the ripple window around the peak, Hz.
    pub ripple_half_window_hz: f64,
    /// Drop from the peak defining the bandwidth, dB.
    pub bandwidth_drop_db: f64,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            smoothing_window_hz: 100e6,
            dip_exclusion_width_hz: None,
            dip_guard_hz: 100e6,
            ripple_half_window_hz: 1e9,
            bandwidth_drop_db: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainMetrics {
    pub peak_gain_db: f64,
    pub peak_frequency_hz: f64,
    pub double_sided_bw_3db_hz: f64,
    /// Half peak-to-peak of raw minus smoothed gain near the peak.
    pub ripple_db: f64,
    pub dip_frequencies_hz: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Smoothed gain and the excision mask used by [`gain_metrics`].
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedProfile {
    pub smoothed_db: Vec<f64>,
    pub excluded: Vec<bool>,
    pub dips: Vec<Dip>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    /// Lowest raw gain inside the stopband run.
    pub frequency: f64,
    pub f_low: f64,
    pub f_high: f64,
}

fn validate(freqs: &[f64], gain_db: &[f64], in_stopband: &[bool]) -> Result<f64, AnalysisError> {
    if freqs.len() < 2 || gain_db.len() != freqs.len() || in_stopband.len() != freqs.len() {
        return Err(AnalysisError::InvalidProfile(format!(
            "need matching frequency, gain and stopband columns with at least 2 points (got {}, {}, {})",
            freqs.len(),
            gain_db.len(),
            in_stopband.len()
        )));
    }
    if gain_db.iter().any(|g| !g.is_finite()) {
        return Err(AnalysisError::InvalidProfile(
            "non-finite gain value".into(),
        ));
    }
    let h = (freqs[freqs.len() - 1] - freqs[0]) / (freqs.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(AnalysisError::InvalidProfile(
            "frequencies must be increasing".into(),
        ));
    }
    Ok(h)
}

/// Width in grid steps, snapped so that ulp-level changes in the step do not
/// move a window edge across a rounding boundary.
fn steps(width_hz: f64, h: f64) -> f64 {
    (width_hz / h * 1e6).round() / 1e6
}

/// Identifies dips, excises them and smooths the rest. Windows are counted
/// in grid points, so the result depends only on the profile's shape.
pub fn smooth_profile(
    freqs: &[f64],
    gain_db: &[f64],
    in_stopband: &[bool],
    opts: &MetricOptions,
) -> Result<SmoothedProfile, AnalysisError> {
    let h = validate(freqs, gain_db, in_stopband)?;
    let n = freqs.len();

    let mut dips = Vec::new();
    let mut excluded = vec![false; n];
    let mut i = 0;
    while i < n {
        if !in_stopband[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && in_stopband[i] {
            i += 1;
        }
        let end = i - 1;
        let lowest = (start..=end)
            .min_by(|&a, &b| gain_db[a].total_cmp(&gain_db[b]))
            .expect("non-empty run");
        dips.push(Dip {
            frequency: freqs[lowest],
            f_low: freqs[start],
            f_high: freqs[end],
        });

        let run_points = (end - start + 1) as f64;
        let width_points = match opts.dip_exclusion_width_hz {
            Some(w) => steps(w, h),
            None => run_points + steps(opts.dip_guard_hz, h),
        };
        let centre = (start + end) as f64 / 2.0;
        let lo = (centre - width_points / 2.0).ceil().max(0.0) as usize;
        let hi = ((centre + width_points / 2.0).floor() as usize).min(n - 1);
        for e in excluded.iter_mut().take(hi + 1).skip(lo) {
            *e = true;
        }
        for e in excluded.iter_mut().take(end + 1).skip(start) {
            *e = true;
        }
    }

    let half = (steps(opts.smoothing_window_hz, h) / 2.0).round() as usize;
    let smoothed_db = (0..n)
        .map(|i| {
            if excluded[i] {
                return f64::NAN;
            }
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let (sum, count) = (lo..=hi)
                .filter(|&j| !excluded[j])
                .fold((0.0, 0usize), |(s, c), j| (s + gain_db[j], c + 1));
            sum / count as f64
        })
        .collect();
    Ok(SmoothedProfile {
        smoothed_db,
        excluded,
        dips,
    })
}

/// Metrics of sampled gain data on a uniform grid.
pub fn metrics_from_samples(
    freqs: &[f64],
    gain_db: &[f64],
    in_stopband: &[bool],
    opts: &MetricOptions,
) -> Result<GainMetrics, AnalysisError> {
    let sp = smooth_profile(freqs, gain_db, in_stopband, opts)?;
    let n = freqs.len();
    let h = (freqs[n - 1] - freqs[0]) / (n - 1) as f64;
    let kept: Vec<usize> = (0..n).filter(|&i| !sp.excluded[i]).collect();
    if kept.is_empty() {
        return Err(AnalysisError::InvalidProfile(
            "every point lies inside an excised dip".into(),
        ));
    }
    let peak_idx = *kept
        .iter()
        .max_by(|&&a, &&b| {
            sp.smoothed_db[a]
                .total_cmp(&sp.smoothed_db[b])
                .then(b.cmp(&a))
        })
        .expect("non-empty");
    let peak = sp.smoothed_db[peak_idx];
    let mut warnings = Vec::new();

    let bandwidth = if peak < opts.bandwidth_drop_db {
        warnings.push(format!(
            "peak gain {peak:.3} dB is below {} dB; bandwidth set to 0",
            opts.bandwidth_drop_db
        ));
        0.0
    } else {
        let threshold = peak - opts.bandwidth_drop_db;
        kept.iter()
            .filter(|&&i| sp.smoothed_db[i] >= threshold)
            .map(|&i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
            .sum()
    };

    let ripple_half = steps(opts.ripple_half_window_hz, h).round() as usize;
    let lo = peak_idx.saturating_sub(ripple_half);
    let hi = (peak_idx + ripple_half).min(n - 1);
    let (rmin, rmax) = (lo..=hi)
        .filter(|&i| !sp.excluded[i])
        .map(|i| gain_db[i] - sp.smoothed_db[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r), b.max(r))
        });

    Ok(GainMetrics {
        peak_gain_db: peak,
        peak_frequency_hz: freqs[peak_idx],
        double_sided_bw_3db_hz: bandwidth,
        ripple_db: ((rmax - rmin) / 2.0).max(0.0),
        dip_frequencies_hz: sp.dips.iter().map(|d| d.frequency).collect(),
        warnings,
    })
}

pub fn gain_metrics(
    profile: &GainProfile,
    opts: &MetricOptions,
) -> Result<GainMetrics, AnalysisError> {
    metrics_from_samples(
        &profile.frequencies(),
        &profile.gain_db(),
        &profile.in_stopband(),
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn flat_profile_bandwidth_is_its_span() {
        let f = grid(5e9, 8e9, 301);
        let g = vec![15.0; f.len()];
        let m =
            metrics_from_samples(&f, &g, &vec![false; f.len()], &MetricOptions::default()).unwrap();
        assert!((m.double_sided_bw_3db_hz - 3e9).abs() < 1e-3);
        assert_eq!(m.ripple_db, 0.0);
        assert_eq!(m.peak_gain_db, 15.0);
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn dips_are_excised_and_reported() {
        let f = grid(4e9, 8e9, 401);
        let mut g = vec![15.0; f.len()];
        let mut sb = vec![false; f.len()];
        for i in 100..110 {
            g[i] = -20.0;
            sb[i] = true;
        }
        let m = metrics_from_samples(&f, &g, &sb, &MetricOptions::default()).unwrap();
        assert_eq!(m.dip_frequencies_hz, vec![f[100]]);
        assert_eq!(m.peak_gain_db, 15.0);
        // 10 points of dip plus a 100 MHz guard (10 points) removed
        assert!(
            (m.double_sided_bw_3db_hz - (4e9 - 20.0 * 1e7)).abs() < 1.0,
            "{}",
            m.double_sided_bw_3db_hz
        );
    }

    #[test]
    fn low_profile_warns() {
        let f = grid(4e9, 8e9, 101);
        let g = vec![1.0; f.len()];
        let m =
            metrics_from_samples(&f, &g, &vec![false; f.len()], &MetricOptions::default()).unwrap();
        assert_eq!(m.double_sided_bw_3db_hz, 0.0);
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn ripple_is_half_peak_to_peak_of_residual() {
        let f = grid(4e9, 8e9, 4001);
        // 0.5 dB ripple with an 8 MHz period averages out in the 100 MHz window
        let g: Vec<f64> = f
            .iter()
            .map(|x| 15.0 + 0.5 * (2.0 * std::f64::consts::PI * (x - 4e9) / 8e6).sin())
            .collect();
        let m =
            metrics_from_samples(&f, &g, &vec![false; f.len()], &MetricOptions::default()).unwrap();
        assert!((m.ripple_db - 0.5).abs() < 0.02, "{}", m.ripple_db);
    }

    #[test]
    fn rejects_mismatched_columns() {
        assert!(metrics_from_samples(
            &[1.0, 2.0],
            &[0.0],
            &[false, false],
            &MetricOptions::default()
        )
        .is_err());
    }
}
