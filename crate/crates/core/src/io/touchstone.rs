use std::fmt::Write as _;

use num_complex::Complex64;

use super::{parse_f64, FormatError};
use crate::linear::{SParameterSet, SPoint};

/// Two-port data read back from a Touchstone file.
#[derive(Debug, Clone, PartialEq)]
pub struct TouchstoneData {
    pub reference_impedance: f64,
    pub frequencies: Vec<f64>,
    pub points: Vec<SPoint>,
}

/// Version 1 `.s2p` text in real/imaginary form, Hz.
pub fn write_touchstone(set: &SParameterSet) -> String {
    let mut s = String::with_capacity(set.points.len() * 200);
    let _ = writeln!(s, "! ki-twpa S-parameters");
    let _ = writeln!(s, "# HZ S RI R {}", set.reference_impedance);
    for (f, p) in set.frequencies().zip(&set.points) {
        let _ = write!(s, "{f:e}");
        for z in [p.s11, p.s21, p.s12, p.s22] {
            let _ = write!(s, " {:e} {:e}", z.re, z.im);
        }
        s.push('\n');
    }
    s
}

enum Layout {
    Ri,
    Ma,
    Db,
}

fn unit_scale(word: &str) -> Option<f64> {
    Some(match word {
        "HZ" => 1.0,
        "KHZ" => 1e3,
        "MHZ" => 1e6,
        "GHZ" => 1e9,
        _ => return None,
    })
}

/// Reads two-port Touchstone v1 data in any unit and RI, MA or DB form.
pub fn parse_touchstone(text: &str) -> Result<TouchstoneData, FormatError> {
    let mut scale = 1e9;
    let mut layout = Layout::Ma;
    let mut z_ref = 50.0;
    let mut seen_options = false;
    let mut frequencies = Vec::new();
    let mut points = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(opts) = line.strip_prefix('#') {
            if seen_options {
                return Err(FormatError::new(n, "second option line"));
            }
            seen_options = true;
            let words: Vec<String> = opts
                .split_whitespace()
                .map(str::to_ascii_uppercase)
                .collect();
            let mut k = 0;
            while k < words.len() {
                let w = words[k].as_str();
                match w {
                    "S" => {}
                    "RI" => layout = Layout::Ri,
                    "MA" => layout = Layout::Ma,
                    "DB" => layout = Layout::Db,
                    "R" => {
                        k += 1;
                        let v = words
                            .get(k)
                            .ok_or_else(|| FormatError::new(n, "`R` without a value"))?;
                        z_ref = parse_f64(v, n, "reference impedance")?;
                    }
                    _ => match unit_scale(w) {
                        Some(s) => scale = s,
                        None => {
                            return Err(FormatError::new(n, format!("unsupported option `{w}`")))
                        }
                    },
                }
                k += 1;
            }
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|t| parse_f64(t, n, "value"))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != 9 {
            return Err(FormatError::new(
                n,
                format!(
                    "expected 9 values for a two-port point, found {}",
                    values.len()
                ),
            ));
        }
        let pair = |a: f64, b: f64| match layout {
            Layout::Ri => Complex64::new(a, b),
            Layout::Ma => Complex64::from_polar(a, b.to_radians()),
            Layout::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        };
        let f = values[0] * scale;
        if frequencies.last().is_some_and(|&last| f <= last) {
            return Err(FormatError::new(n, "frequencies must increase"));
        }
        frequencies.push(f);
        points.push(SPoint {
            s11: pair(values[1], values[2]),
            s21: pair(values[3], values[4]),
            s12: pair(values[5], values[6]),
            s22: pair(values[7], values[8]),
        });
    }
    if !seen_options {
        return Err(FormatError::new(0, "missing option line"));
    }
    Ok(TouchstoneData {
        reference_impedance: z_ref,
        frequencies,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{expand_fishbone, FishboneSpec};
    use crate::linear::{network_s_parameters, FrequencyGrid, LinearOptions};

    #[test]
    fn round_trip_is_exact() {
        let net = expand_fishbone(&FishboneSpec {
            num_periods: 3,
            ..FishboneSpec::nominal()
        })
        .unwrap();
        let grid = FrequencyGrid::new(1e9, 20e9, 57).unwrap();
        let set = network_s_parameters(&net, &grid, 50.0, &LinearOptions::default()).unwrap();
        let text = write_touchstone(&set);
        assert!(text.lines().nth(1) == Some("# HZ S RI R 50"));
        let back = parse_touchstone(&text).unwrap();
        assert_eq!(back.reference_impedance, 50.0);
        assert_eq!(back.points, set.points);
        assert_eq!(back.frequencies, set.frequencies().collect::<Vec<_>>());
    }

    #[test]
    fn reads_ghz_magnitude_angle() {
        let d = parse_touchstone("# GHz S MA R 50\n1.5 0 0 1 90 1 90 0 0 ! comment\n").unwrap();
        assert_eq!(d.frequencies, vec![1.5e9]);
        assert!((d.points[0].s21 - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_short_rows() {
        let e = parse_touchstone("# HZ S RI R 50\n1e9 0 0 1 0\n").unwrap_err();
        assert_eq!(e.line, 2);
    }
}
