use std::fs;
use std::path::{Path, PathBuf};

use ki_twpa::circuit::{expand_leaf, LeafSpec};
use ki_twpa::io::{
    parse_config, parse_touchstone, run, sha256_hex, write_touchstone, RunConfig, RunError,
    RunOverrides, Subcommand, MANIFEST_NAME,
};
use ki_twpa::linear::{network_s_parameters, FrequencyGrid, LinearOptions};

fn preset_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn preset_text(name: &str) -> String {
    fs::read_to_string(preset_dir().join(name)).unwrap()
}

fn config(text: &str) -> RunConfig {
    parse_config(text, Path::new("test.cfg"), &preset_dir()).unwrap()
}

fn into(dir: &Path) -> RunOverrides {
    RunOverrides {
        output_dir: Some(dir.to_path_buf()),
        ..RunOverrides::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn touchstone_round_trip_keeps_every_value() {
    let net = expand_leaf(&LeafSpec::nominal()).unwrap();
    let opts = LinearOptions {
        loss_tangent: 2e-4,
        ..LinearOptions::default()
    };
    let set = network_s_parameters(
        &net,
        &FrequencyGrid::new(0.1e9, 30e9, 501).unwrap(),
        50.0,
        &opts,
    )
    .unwrap();
    let back = parse_touchstone(&write_touchstone(&set)).unwrap();
    assert_eq!(back.reference_impedance, 50.0);
    for ((f, p), (g, q)) in set
        .grid
        .frequencies()
        .zip(&set.points)
        .zip(back.frequencies.iter().zip(&back.points))
    {
        assert!(rel(f, *g) <= 1e-12);
        for (x, y) in [
            (p.s11, q.s11),
            (p.s21, q.s21),
            (p.s12, q.s12),
            (p.s22, q.s22),
        ] {
            assert!(
                rel(x.re, y.re) <= 1e-12 && rel(x.im, y.im) <= 1e-12,
                "{f}: {x} vs {y}"
            );
        }
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = config(&preset_text("fishbone-paper.cfg"));
    for sub in [
        Subcommand::Design,
        Subcommand::Dispersion,
        Subcommand::Linear,
        Subcommand::Gain,
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ma = run(sub, &cfg, &into(a.path())).unwrap();
        let mb = run(sub, &cfg, &into(b.path())).unwrap();
        assert_eq!(ma.files, mb.files);
        assert_eq!(ma.config_digest, mb.config_digest);
        for f in &ma.files {
            assert_eq!(
                fs::read(a.path().join(&f.path)).unwrap(),
                fs::read(b.path().join(&f.path)).unwrap(),
                "{}",
                f.path
            );
        }
    }
}

#[test]
fn manifest_digests_match_written_files() {
    let cfg = config(&preset_text("fishbone-paper.cfg"));
    let dir = tempfile::tempdir().unwrap();
    let manifest = run(Subcommand::Gain, &cfg, &into(dir.path())).unwrap();
    assert_eq!(manifest.subcommand, Subcommand::Gain);
    assert!(!manifest.files.is_empty());
    for f in &manifest.files {
        let bytes = fs::read(dir.path().join(&f.path)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256);
        assert_eq!(bytes.len(), f.bytes);
    }
    let on_disk: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join(MANIFEST_NAME)).unwrap()).unwrap();
    assert_eq!(on_disk["config_digest"], manifest.config_digest);
}

#[test]
fn misspelled_key_is_rejected_before_any_output() {
    let text = preset_text("fishbone-paper.cfg").replace("num_periods", "num_period");
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.cfg");
    fs::write(&cfg_path, &text).unwrap();
    let err = ki_twpa::io::load_config(&cfg_path).unwrap_err();
    assert!(err.to_string().contains("bad.cfg"), "{err}");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn mismatched_subcommand_is_rejected_before_any_output() {
    let cfg = config(&preset_text("fishbone-paper.cfg"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let err = run(Subcommand::Harmonics, &cfg, &into(&out)).unwrap_err();
    assert!(matches!(err, RunError::Mismatch { .. }), "{err}");
    assert!(!out.exists());
}

#[test]
fn zero_pump_gain_table_is_all_zero() {
    let text = preset_text("fishbone-paper.cfg")
        .replace("power = 100e-6", "power = 0.0")
        .replace(
            "stop = 10.22e9\npoints = 2000",
            "stop = 7.6e9\npoints = 200",
        );
    let cfg = config(&text);
    let dir = tempfile::tempdir().unwrap();
    run(Subcommand::Gain, &cfg, &into(dir.path())).unwrap();
    let csv = fs::read_to_string(dir.path().join("gain.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').nth(1), Some("gain_db"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 200);
    for row in rows {
        assert_eq!(row.split(',').nth(1), Some("0.00000000000e0"), "{row}");
    }
}
