//! Plain-text state files.
//!
//! ```text
//! # trine states
//! 2
//! 1 0   0 0
//! 0.5 0   0.8660254037844386 0
//! ```
//!
//! The first record is the dimension. Every following record is one state as
//! interleaved real/imaginary pairs. `#` starts a comment; blank lines are
//! skipped. States are normalized on load.

use std::path::Path;

use num_complex::Complex64;
use pqcm_core::Ket;

use crate::error::CliError;

/// Builds a normalized ket from interleaved `re, im` values.
pub fn ket_from_interleaved(values: &[f64]) -> Result<Ket, String> {
    if values.is_empty() || !values.len().is_multiple_of(2) {
        return Err(format!(
            "expected an even, nonzero count of numbers, found {}",
            values.len()
        ));
    }
    let amps = values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
    Ket::normalized(amps).map_err(|e| e.to_string())
}

pub fn parse_states(text: &str, source: &str) -> Result<Vec<Ket>, CliError> {
    let err = |line: usize, msg: String| CliError::Parse(format!("{source}:{line}: {msg}"));
    let mut dim = None;
    let mut states = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some(d) = dim else {
            let d: usize = body
                .parse()
                .map_err(|_| err(line_no, format!("expected the dimension, found '{body}'")))?;
            if d == 0 {
                return Err(err(line_no, "dimension must be positive".into()));
            }
            dim = Some(d);
            continue;
        };
        let values = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| err(line_no, format!("'{t}' is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != 2 * d {
            return Err(err(
                line_no,
                format!("expected {} numbers for dimension {d}, found {}", 2 * d, values.len()),
            ));
        }
        states.push(ket_from_interleaved(&values).map_err(|m| err(line_no, m))?);
    }
    if dim.is_none() {
        return Err(CliError::Parse(format!("{source}: missing dimension line")));
    }
    if states.is_empty() {
        return Err(CliError::Parse(format!("{source}: no states listed")));
    }
    Ok(states)
}

pub fn read_states(path: &Path) -> Result<Vec<Ket>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_states(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes() {
        let text = "# two states\n2\n\n1 0 0 0  # |0>\n3, 0, 0, 4\n";
        let states = parse_states(text, "t").unwrap();
        assert_eq!(states.len(), 2);
        assert!((states[1].amplitudes()[1].im - 0.8).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("2\n1 0 0\n", "t:2: expected 4 numbers"),
            ("# c\nx\n", "t:2: expected the dimension"),
            ("2\n1 0 0 0\n1 zero 0 0\n", "t:3: 'zero' is not a number"),
            ("2\n0 0 0 0\n", "t:2:"),
            ("# only comments\n", "missing dimension"),
            ("3\n", "no states"),
        ];
        for (text, want) in cases {
            let msg = parse_states(text, "t").unwrap_err().to_string();
            assert!(msg.contains(want), "{text:?}: {msg}");
        }
    }
}
