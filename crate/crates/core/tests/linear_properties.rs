use std::f64::consts::PI;

use ki_twpa::circuit::{
    cutoff_frequency, expand_fishbone, expand_leaf, FishboneSpec, LeafSpec, NonlinearInductorSpec,
    UnitCellSpec,
};
use ki_twpa::linear::{
    element_matrix, find_stopbands, network_dispersion, network_matrix, network_s_parameters,
    FrequencyGrid, LinearOptions,
};
use proptest::prelude::*;

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

fn uniform(cells: usize) -> FishboneSpec {
    FishboneSpec {
        cells_per_period: cells,
        loaded_cells: 0,
        loaded_cells_every_third: 0,
        num_periods: 1,
        ..FishboneSpec::nominal()
    }
}

proptest! {
    #[test]
    fn determinant_is_one_for_elements_and_cascades(f in 0.05e9..40e9f64, periods in 1usize..30, blocks in 1usize..4, tand in 0.0..1e-3f64) {
        let opts = LinearOptions { loss_tangent: tand, ..LinearOptions::default() };
        let fb = expand_fishbone(&FishboneSpec { num_periods: periods, ..FishboneSpec::nominal() }).unwrap();
        let lf = expand_leaf(&LeafSpec { num_blocks: blocks, ..LeafSpec::nominal() }).unwrap();
        for e in fb.elements().iter().chain(lf.elements()).take(400) {
            let d = element_matrix(e, f, &opts).det();
            prop_assert!((d - 1.0).norm() < 1e-9, "element det {d}");
        }
        for net in [&fb, &lf] {
            // stopband cascades grow without bound, so compare at the scale of ad and bc
            let m = network_matrix(net, f, &opts);
            let scale = (m.a * m.d).norm().max((m.b * m.c).norm()).max(1.0);
            prop_assert!((m.det() - 1.0).norm() < 1e-9 * scale, "cascade det {} at scale {scale:e}", m.det());
        }
    }
}

#[test]
fn lossless_devices_are_unitary_on_every_grid_point() {
    let grid = FrequencyGrid::new(0.1e9, 30e9, 3001).unwrap();
    let opts = LinearOptions::default();
    for net in [
        expand_fishbone(&FishboneSpec::nominal()).unwrap(),
        expand_leaf(&LeafSpec::nominal()).unwrap(),
    ] {
        let set = network_s_parameters(&net, &grid, 50.0, &opts).unwrap();
        for (f, p) in grid.frequencies().zip(&set.points) {
            let u = p.s11.norm_sqr() + p.s21.norm_sqr();
            assert!((u - 1.0).abs() < 1e-8, "{f}: {u}");
        }
    }
}

#[test]
fn bloch_phase_is_monotone_within_passbands() {
    let net = expand_fishbone(&FishboneSpec {
        num_periods: 3,
        ..FishboneSpec::nominal()
    })
    .unwrap();
    let curve = network_dispersion(
        &net,
        &FrequencyGrid::new(0.1e9, 30e9, 10_001).unwrap(),
        &LinearOptions::default(),
    )
    .unwrap();
    for i in 1..curve.grid.points {
        if !curve.in_stopband[i] && !curve.in_stopband[i - 1] {
            assert!(
                curve.bloch_phase_per_period[i] >= curve.bloch_phase_per_period[i - 1],
                "at {}",
                curve.grid.frequency(i)
            );
        }
    }
}

#[test]
fn cascade_phase_matches_bloch_phase_on_matched_ladders() {
    let opts = LinearOptions::default();
    let grid = FrequencyGrid::new(0.1e9, 20e9, 2001).unwrap();
    for cells in [300, 999] {
        let net = expand_fishbone(&FishboneSpec {
            num_periods: cells,
            ..uniform(1)
        })
        .unwrap();
        let curve = network_dispersion(&net, &grid, &opts).unwrap();
        assert!(find_stopbands(&curve, 0.0).bands.is_empty());
        let set = network_s_parameters(&net, &grid, 50.0, &opts).unwrap();
        let repeats = net.total_cells() as f64 / curve.cells_per_period as f64;
        assert_eq!(repeats.fract(), 0.0);
        for (i, f) in grid.frequencies().enumerate() {
            let err = wrap(set.points[i].s21.arg() + repeats * curve.bloch_phase_per_period[i]);
            assert!(err.abs() < 1e-3, "{cells} cells, {f}: {err}");
        }
    }
}

#[test]
fn low_frequency_phase_and_uniform_band_edge() {
    let spec = uniform(1);
    let fc = cutoff_frequency(&spec.base_cell);
    let net = expand_fishbone(&spec).unwrap();
    let grid = FrequencyGrid::new(1e9, 1.2 * fc, 20_001).unwrap();
    let curve = network_dispersion(&net, &grid, &LinearOptions::default()).unwrap();
    let lc = (spec.base_cell.inductor.l0 * spec.base_cell.shunt_capacitance).sqrt();
    for (i, f) in grid
        .frequencies()
        .enumerate()
        .filter(|&(_, f)| f < fc / 20.0)
    {
        let expected = 2.0 * PI * f * lc;
        assert!((curve.bloch_phase_per_period[i] - expected).abs() < 0.01 * expected);
    }
    let edge = grid.frequency(
        curve
            .in_stopband
            .iter()
            .position(|&s| s)
            .expect("cutoff inside grid"),
    );
    assert!((edge - fc).abs() <= grid.step(), "edge {edge} vs {fc}");
}

#[test]
fn band_edge_tracks_cell_values() {
    for (l0, c) in [(50e-12, 20e-15), (290e-12, 116e-15), (1e-9, 1e-13)] {
        let cell = UnitCellSpec {
            inductor: NonlinearInductorSpec { l0, i_star: 0.01 },
            shunt_capacitance: c,
        };
        let spec = FishboneSpec {
            base_cell: cell,
            ..uniform(1)
        };
        let fc = 1.0 / (PI * (l0 * c).sqrt());
        let grid = FrequencyGrid::new(0.5 * fc, 1.5 * fc, 4000).unwrap();
        let curve = network_dispersion(
            &expand_fishbone(&spec).unwrap(),
            &grid,
            &LinearOptions::default(),
        )
        .unwrap();
        let edge = grid.frequency(curve.in_stopband.iter().position(|&s| s).unwrap());
        assert!((edge - fc).abs() <= grid.step(), "edge {edge} vs {fc}");
    }
}

#[test]
fn full_length_line_is_about_seventy_five_wavelengths() {
    let spec = FishboneSpec::nominal();
    let net = expand_fishbone(&spec).unwrap();
    let grid = FrequencyGrid::new(5.9e9, 6.1e9, 3).unwrap();
    let curve = network_dispersion(&net, &grid, &LinearOptions::default()).unwrap();
    let per_cell = curve.bloch_phase_per_period[1] / curve.cells_per_period as f64;
    let wavelengths = per_cell * net.total_cells() as f64 / (2.0 * PI);
    assert!((70.0..=80.0).contains(&wavelengths), "{wavelengths}");
    assert!((spec.physical_length() - 0.1).abs() < 1e-3);
}

#[test]
fn fishbone_low_frequency_phase_uses_total_period_inductance_and_capacitance() {
    let spec = FishboneSpec::nominal();
    let grid = FrequencyGrid::new(0.5e9, 1.5e9, 3).unwrap();
    let curve = network_dispersion(
        &expand_fishbone(&spec).unwrap(),
        &grid,
        &LinearOptions::default(),
    )
    .unwrap();
    let w_lc =
        2.0 * PI * 1e9 * (spec.base_cell.inductor.l0 * spec.base_cell.shunt_capacitance).sqrt();
    // long-wavelength limit sees the period's total L and C: 66 L, 58 C + 8 C/5
    let expected = w_lc * (66.0f64 * (58.0 + 8.0 / 5.0)).sqrt();
    let phase = curve.bloch_phase_per_period[1];
    assert!(
        (phase - expected).abs() < 1e-3 * expected,
        "{phase} vs {expected}"
    );
    assert!((phase - 66.0 * w_lc).abs() > 0.01 * 66.0 * w_lc);
}
