//! Locale-independent number formatting for CSV interchange.
//!
//! Numbers are written with 17 significant digits (the `%.17g` convention),
//! which round-trips every `f64` and makes byte-level determinism checks
//! meaningful.

use crate::error::{Error, Result};
use crate::types::ProbVector;

/// Formats `x` with 17 significant digits, trailing zeros trimmed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    } else {
        format!("{}e{}{:02}", trim_fraction(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes a probability vector as one comma-separated CSV row.
pub fn prob_vector_to_csv(q: &ProbVector) -> String {
    q.as_slice()
        .iter()
        .map(|&v| format_number(v))
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a CSV row written by [`prob_vector_to_csv`].
pub fn prob_vector_from_csv(row: &str) -> Result<ProbVector> {
    let values = row
        .trim_end_matches(['\r', '\n'])
        .split(',')
        .enumerate()
        .map(|(index, field)| {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::NonFiniteEntry { index })
        })
        .collect::<Result<Vec<_>>>()?;
    ProbVector::new(values)
}
