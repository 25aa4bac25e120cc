use std::fmt::Write as _;

use super::{parse_f64, FormatError};
use crate::circuit::{Element, LadderNetwork};

pub const NETLIST_HEADER: &str = "# ki-twpa netlist v1";

/// One element per line. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_netlist(network: &LadderNetwork) -> String {
    let mut s = String::with_capacity(network.elements().len() * 32);
    s.push_str(NETLIST_HEADER);
    s.push('\n');
    if let Some(p) = network.period_cells() {
        let _ = writeln!(s, "# period {p}");
    }
    for e in network.elements() {
        let _ = match *e {
            Element::SeriesInductor { l0, i_star } => writeln!(s, "L {l0:e} {i_star:e}"),
            Element::ShuntCapacitor { c } => writeln!(s, "C {c:e}"),
            Element::ShuntResonator {
                resonant_frequency,
                q,
                multiplicity,
            } => {
                writeln!(s, "RES {resonant_frequency:e} {q:e} {multiplicity}")
            }
        };
    }
    s
}

/// Inverse of [`write_netlist`]. Blank lines and `#` comments after the
/// header are ignored, except `# period <n>`.
pub fn parse_netlist(text: &str) -> Result<LadderNetwork, FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, h)) if h == NETLIST_HEADER => {}
        _ => {
            return Err(FormatError::new(
                1,
                format!("expected header `{NETLIST_HEADER}`"),
            ))
        }
    }
    let mut elements = Vec::new();
    let mut period = None;
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("period") {
                let v = words
                    .next()
                    .ok_or_else(|| FormatError::new(n, "period line without a value"))?;
                let p: usize = v
                    .parse()
                    .map_err(|_| FormatError::new(n, format!("invalid period `{v}`")))?;
                if period.replace(p).is_some() {
                    return Err(FormatError::new(n, "period given twice"));
                }
            }
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let expect = |k: usize| {
            if tokens.len() == k + 1 {
                Ok(())
            } else {
                Err(FormatError::new(
                    n,
                    format!(
                        "`{}` takes {k} value(s), found {}",
                        tokens[0],
                        tokens.len() - 1
                    ),
                ))
            }
        };
        let e = match tokens[0] {
            "L" => {
                expect(2)?;
                Element::SeriesInductor {
                    l0: parse_f64(tokens[1], n, "inductance")?,
                    i_star: parse_f64(tokens[2], n, "i_star")?,
                }
            }
            "C" => {
                expect(1)?;
                Element::ShuntCapacitor {
                    c: parse_f64(tokens[1], n, "capacitance")?,
                }
            }
            "RES" => {
                expect(3)?;
                Element::ShuntResonator {
                    resonant_frequency: parse_f64(tokens[1], n, "resonant frequency")?,
                    q: parse_f64(tokens[2], n, "q")?,
                    multiplicity: tokens[3].parse().map_err(|_| {
                        FormatError::new(n, format!("invalid multiplicity `{}`", tokens[3]))
                    })?,
                }
            }
            other => return Err(FormatError::new(n, format!("unknown element `{other}`"))),
        };
        elements.push(e);
    }
    LadderNetwork::new(elements, period).map_err(|e| FormatError::new(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{expand_leaf, LeafSpec};

    #[test]
    fn leaf_round_trip_is_exact() {
        let net = expand_leaf(&LeafSpec {
            num_blocks: 2,
            ..LeafSpec::nominal()
        })
        .unwrap();
        let text = write_netlist(&net);
        assert!(text.starts_with(NETLIST_HEADER));
        assert_eq!(parse_netlist(&text).unwrap(), net);
    }

    #[test]
    fn reports_line_of_bad_element() {
        let err = parse_netlist("# ki-twpa netlist v1\nL 5e-11 0.01\nC 2e-14\nX 1\n").unwrap_err();
        assert_eq!(err.line, 4);
        let err = parse_netlist("# ki-twpa netlist v1\nL 5e-11\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_netlist("L 5e-11 0.01\nC 2e-14\n").is_err());
    }

    #[test]
    fn structural_errors_surface() {
        assert!(parse_netlist("# ki-twpa netlist v1\nC 2e-14\n").is_err());
        let ok =
            parse_netlist("# ki-twpa netlist v1\n# period 1\n\nL 5e-11 0.01\nC 2e-14\n").unwrap();
        assert_eq!(ok.period_cells(), Some(1));
    }
}
