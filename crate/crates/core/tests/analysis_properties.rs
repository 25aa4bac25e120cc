use ki_twpa::analysis::{
    calibrate_istar, cpw_reference, matched_pump_power, metrics_from_samples, sweep,
    CalibrationSettings, Design, MetricOptions, PeakGainFunction, Pipeline, SweepAxis,
    SweepParameter,
};
use ki_twpa::circuit::FishboneSpec;
use ki_twpa::fwm::{GainOptions, Pump};
use ki_twpa::linear::{FrequencyGrid, LinearOptions};
use proptest::prelude::*;

fn small_pipeline() -> Pipeline {
    Pipeline {
        design: Design::Fishbone(FishboneSpec::nominal()),
        linear: LinearOptions::default(),
        pump: Pump {
            frequency: 6.22e9,
            power: 1e-4,
        },
        signal_grid: FrequencyGrid::new(2.22e9, 10.22e9, 200).unwrap(),
        gain: GainOptions::default(),
        metrics: MetricOptions::default(),
    }
}

fn profile() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (
        200usize..600,
        3.0..20.0f64,
        0.05..0.4f64,
        0.0..1.5f64,
        0usize..4,
    )
        .prop_flat_map(|(n, peak, width, ripple, dips)| {
            prop::collection::vec((0.05..0.95f64, 1usize..8), dips).prop_map(move |runs| {
                let gain: Vec<f64> = (0..n)
                    .map(|i| {
                        let x = i as f64 / (n - 1) as f64;
                        peak * (-((x - 0.5) / width).powi(2)).exp() + ripple * (37.0 * x).sin()
                    })
                    .collect();
                let mut flags = vec![false; n];
                for (at, len) in &runs {
                    let start = (at * n as f64) as usize;
                    for f in flags.iter_mut().skip(start).take(*len) {
                        *f = true;
                    }
                }
                (gain, flags)
            })
        })
}

proptest! {
    #[test]
    fn metrics_are_invariant_under_frequency_shift((gain, flags) in profile(), shift in -1.5e9..4e9f64) {
        let n = gain.len();
        let step = 8e9 / (n - 1) as f64;
        let base: Vec<f64> = (0..n).map(|i| 2e9 + step * i as f64).collect();
        let moved: Vec<f64> = base.iter().map(|f| f + shift).collect();
        let opts = MetricOptions::default();
        let a = metrics_from_samples(&base, &gain, &flags, &opts);
        let b = metrics_from_samples(&moved, &gain, &flags, &opts);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.peak_gain_db, b.peak_gain_db);
                prop_assert_eq!(a.ripple_db, b.ripple_db);
                prop_assert!((a.double_sided_bw_3db_hz - b.double_sided_bw_3db_hz).abs() <= 1e-6 * a.double_sided_bw_3db_hz.max(1.0));
                prop_assert!((a.peak_frequency_hz + shift - b.peak_frequency_hz).abs() < 1.0);
                prop_assert_eq!(a.dip_frequencies_hz.len(), b.dip_frequencies_hz.len());
                for (x, y) in a.dip_frequencies_hz.iter().zip(&b.dip_frequencies_hz) {
                    prop_assert!((x + shift - y).abs() < 1.0);
                }
                prop_assert_eq!(a.warnings.len(), b.warnings.len());
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one side failed: {:?} / {:?}", a.err(), b.err()),
        }
    }
}

#[test]
fn single_point_sweep_equals_direct_run() {
    let base = small_pipeline();
    let axes = [SweepAxis {
        parameter: SweepParameter::PumpPower,
        values: vec![80e-6],
    }];
    let result = sweep(&base, &axes).unwrap();
    assert_eq!(result.points.len(), 1);
    let direct = Pipeline {
        pump: Pump {
            power: 80e-6,
            ..base.pump
        },
        ..base.clone()
    }
    .run()
    .unwrap()
    .1;
    assert_eq!(result.points[0].outcome.as_ref().unwrap(), &direct);
    assert_eq!(result.points[0].coordinates, vec![80e-6]);
}

#[test]
fn failed_sweep_points_are_reported_not_fatal() {
    let base = small_pipeline();
    let axes = [SweepAxis {
        parameter: SweepParameter::PumpFrequency,
        values: vec![6.22e9, 7.97e9],
    }];
    let result = sweep(&base, &axes).unwrap();
    assert!(result.points[0].outcome.is_ok());
    assert!(result.points[1]
        .outcome
        .as_ref()
        .unwrap_err()
        .contains("stopband"));
    assert_eq!(result.failures(), 1);
}

#[test]
fn calibration_is_deterministic() {
    let p = small_pipeline();
    let settings = CalibrationSettings {
        target_peak_db: 12.0,
        ..CalibrationSettings::default()
    };
    let a = calibrate_istar(&p, &settings).unwrap();
    let b = calibrate_istar(&p, &settings).unwrap();
    assert_eq!(a.i_star.to_bits(), b.i_star.to_bits());
    assert_eq!(a, b);
    assert!(a.residual_db.abs() <= settings.tolerance_db);
}

#[test]
fn peak_gain_falls_as_i_star_grows() {
    let p = small_pipeline();
    let f = PeakGainFunction::new(&p).unwrap();
    let peaks: Vec<f64> = (0..12)
        .map(|j| f.peak_db(5e-3 * 8f64.powf(j as f64 / 11.0)).unwrap())
        .collect();
    for w in peaks.windows(2) {
        assert!(w[1] < w[0], "{peaks:?}");
    }
}

#[test]
fn matched_pump_power_scales_with_impedance_over_length() {
    // gain on a dispersionless line depends on gamma*P*L alone, and gamma*L
    // goes as wavelengths / Z0
    let grid = FrequencyGrid::new(3e9, 9e9, 40).unwrap();
    let power = |z0: f64, wavelengths: f64| {
        let line = cpw_reference(z0, wavelengths, 6e9, 4000);
        matched_pump_power(
            &line,
            0.01,
            6e9,
            &grid,
            &GainOptions::default(),
            &MetricOptions::default(),
            15.0,
            (1e-7, 1e-2),
        )
        .unwrap()
    };
    let ratio = power(200.0, 400.0) / power(50.0, 140.0);
    assert!((ratio - 1.4).abs() < 0.014, "{ratio}");
}
