//! Text form of shift measures.
//!
//! * `bernoulli:p0,p1,...`: i.i.d. symbols with the given probabilities;
//!   a single value `p` means `1-p, p` on two symbols.
//! * `markov:r0c0,r0c1;r1c0,r1c1`: transition matrix rows separated by `;`,
//!   started from its stationary law.

use scrambler_core::ShiftMeasure;

use crate::error::{CliError, Result};

fn parse_number(token: &str) -> Result<f64> {
    let t = token.trim();
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::Parse(format!("invalid probability {t:?} in measure spec"))),
    }
}

fn parse_row(row: &str) -> Result<Vec<f64>> {
    if row.trim().is_empty() {
        return Err(CliError::Parse("empty row in measure spec".into()));
    }
    row.split(',').map(parse_number).collect()
}

pub fn parse_measure(spec: &str) -> Result<ShiftMeasure> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Parse(format!("measure spec {spec:?} lacks a kind prefix (bernoulli: or markov:)")))?;
    match kind.trim() {
        "bernoulli" => {
            let mut probs = parse_row(body)?;
            if probs.len() == 1 {
                let p = probs[0];
                probs = vec![1.0 - p, p];
            }
            Ok(ShiftMeasure::bernoulli(probs)?)
        }
        "markov" => {
            let rows = body.split(';').map(parse_row).collect::<Result<Vec<_>>>()?;
            Ok(ShiftMeasure::markov(rows)?)
        }
        other => Err(CliError::Parse(format!("unknown measure kind {other:?}"))),
    }
}

/// Canonical spec string; parsing it gives back the same measure.
pub fn format_measure(m: &ShiftMeasure) -> String {
    let row = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
    match m {
        ShiftMeasure::Bernoulli(p) => format!("bernoulli:{}", row(p.entries())),
        ShiftMeasure::Markov { transition, .. } => {
            let rows: Vec<String> = transition.iter().map(|r| row(r.entries())).collect();
            format!("markov:{}", rows.join(";"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let m = parse_measure("bernoulli:0.5,0.5").unwrap();
        assert_eq!(m.entropy_rate(), 1.0);
        let m = parse_measure("bernoulli:0.3").unwrap();
        assert_eq!(m.initial().entries(), &[0.7, 0.3]);
        let m = parse_measure("markov:0.9,0.1;0.5,0.5").unwrap();
        assert!((m.entropy_rate() - 0.557496).abs() < 1e-6);
    }

    #[test]
    fn names_bad_token() {
        let e = parse_measure("bernoulli:0.5,abc").unwrap_err();
        assert!(e.to_string().contains("\"abc\""), "{e}");
        assert!(parse_measure("poisson:1").is_err());
        assert!(parse_measure("0.5,0.5").is_err());
        assert!(parse_measure("markov:0.9,0.1;").is_err());
    }

    #[test]
    fn round_trips() {
        for s in ["bernoulli:0.25,0.75", "markov:0.9,0.1;0.5,0.5", "bernoulli:0.1,0.2,0.7"] {
            let m = parse_measure(s).unwrap();
            assert_eq!(format_measure(&m), s);
            assert_eq!(parse_measure(&format_measure(&m)).unwrap(), m);
        }
    }
}
