//! Plain-text image formats, PGM import and synthetic test data.

pub mod pgm;
pub mod phase;
pub mod spd_field;
pub mod synth;

use serde::{Deserialize, Serialize};

pub use pgm::{load_pgm_phase, save_pgm_phase};
pub use phase::{format_phase, load_phase, parse_phase, save_phase, PhaseImage};
pub use spd_field::{format_spd, load_spd, parse_spd, save_spd, SpdField};
pub use synth::{synth_phase, synth_spd, two_region_edge_means, PhasePattern, SpdPattern};

#[derive(Debug, thiserror::Error)]
pub enum ImagingError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: phase {value} outside (-pi, pi]")]
    Range { line: usize, value: f64 },
    #[error("atom ({row}, {col}) is not SPD (smallest eigenvalue {min_eigenvalue:e})")]
    NotSpd {
        row: usize,
        col: usize,
        min_eigenvalue: f64,
    },
    #[error("image error: {0}")]
    Image(String),
}

/// Seeded noise level. Phase images get wrapped Gaussian noise, SPD fields
/// Gaussian noise in the sparse tangent basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Self {
        NoiseSpec { sigma, seed }
    }

    pub fn none() -> Self {
        NoiseSpec { sigma: 0.0, seed: 0 }
    }
}

/// Whitespace-separated tokens with their 1-based line numbers.
pub(crate) struct Tokens<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: Option<(usize, std::str::SplitWhitespace<'a>)>,
    offset: usize,
    pub(crate) last_line: usize,
}

impl<'a> Tokens<'a> {
    /// `offset` lines precede `text` in the file.
    pub(crate) fn new(text: &'a str, offset: usize) -> Self {
        Tokens {
            lines: text.lines().enumerate(),
            current: None,
            offset,
            last_line: offset,
        }
    }

    pub(crate) fn next_token(&mut self) -> Option<(usize, &'a str)> {
        loop {
            if let Some((n, words)) = &mut self.current {
                if let Some(w) = words.next() {
                    return Some((*n, w));
                }
            }
            let (i, line) = self.lines.next()?;
            self.last_line = self.offset + i + 1;
            self.current = Some((self.last_line, line.split_whitespace()));
        }
    }

    /// Next token as a finite real.
    pub(crate) fn real(&mut self) -> Result<(usize, f64), ImagingError> {
        let (line, tok) = self.next_token().ok_or(ImagingError::Parse {
            line: self.last_line + 1,
            message: "unexpected end of file".into(),
        })?;
        let v: f64 = tok.parse().map_err(|_| ImagingError::Parse {
            line,
            message: format!("not a number: {tok:?}"),
        })?;
        if !v.is_finite() {
            return Err(ImagingError::Parse {
                line,
                message: format!("non-finite value {tok:?}"),
            });
        }
        Ok((line, v))
    }

    /// Fails if anything but whitespace remains.
    pub(crate) fn expect_end(&mut self) -> Result<(), ImagingError> {
        match self.next_token() {
            None => Ok(()),
            Some((line, tok)) => Err(ImagingError::Parse {
                line,
                message: format!("trailing data {tok:?}"),
            }),
        }
    }
}

/// Parses a `MAGIC rows cols` header line.
pub(crate) fn parse_header(text: &str, magic: &str) -> Result<(usize, usize, usize), ImagingError> {
    let first = text.lines().next().unwrap_or("");
    let bad = |message: String| ImagingError::Parse { line: 1, message };
    let words: Vec<&str> = first.split_whitespace().collect();
    if words.len() != 3 || words[0] != magic {
        return Err(bad(format!("expected header `{magic} rows cols`, got {first:?}")));
    }
    let dim = |w: &str| -> Result<usize, ImagingError> {
        match w.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(bad(format!("invalid dimension {w:?}"))),
        }
    };
    // byte offset of the body
    let body = first.len() + usize::from(text.len() > first.len());
    Ok((dim(words[1])?, dim(words[2])?, body))
}
