//! `P_PHASE rows cols` followed by row-major radians in `(−π, π]`.

use std::fmt::Write as _;
use std::path::Path;

use super::{parse_header, ImagingError, Tokens};
use crate::manifolds::{PhaseAtom, ProductPoint};

pub type PhaseImage = ProductPoint<PhaseAtom>;

pub const PHASE_MAGIC: &str = "P_PHASE";

/// Out-of-range values are rejected, never wrapped.
pub fn parse_phase(text: &str) -> Result<PhaseImage, ImagingError> {
    let (rows, cols, body) = parse_header(text, PHASE_MAGIC)?;
    let mut tokens = Tokens::new(&text[body..], 1);
    let mut atoms = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let (line, v) = tokens.real()?;
        let atom = PhaseAtom::new(v).map_err(|_| ImagingError::Range { line, value: v })?;
        atoms.push(atom);
    }
    tokens.expect_end()?;
    Ok(ProductPoint::new(rows, cols, atoms).expect("length checked"))
}

/// One image row per line, shortest round-trip float formatting.
pub fn format_phase(img: &PhaseImage) -> String {
    let mut out = format!("{PHASE_MAGIC} {} {}\n", img.rows, img.cols);
    for row in img.atoms.chunks(img.cols) {
        for (k, a) in row.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{:?}", a.0).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn load_phase(path: impl AsRef<Path>) -> Result<PhaseImage, ImagingError> {
    parse_phase(&std::fs::read_to_string(path)?)
}

pub fn save_phase(path: impl AsRef<Path>, img: &PhaseImage) -> Result<(), ImagingError> {
    Ok(std::fs::write(path, format_phase(img))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_atom() {
        let img = parse_phase("P_PHASE 1 1\n0\n").unwrap();
        assert_eq!(img.atoms, vec![PhaseAtom(0.0)]);
    }

    #[test]
    fn out_of_range_is_rejected_with_line() {
        match parse_phase("P_PHASE 1 2\n0.5\n4.0\n") {
            Err(ImagingError::Range { line: 3, value }) => assert_eq!(value, 4.0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_phase(&format!("P_PHASE 1 1\n{:?}\n", -PI)),
            Err(ImagingError::Range { .. })
        ));
        assert!(parse_phase(&format!("P_PHASE 1 1\n{:?}\n", PI)).is_ok());
    }

    #[test]
    fn malformed_input() {
        for (text, line) in [
            ("P_PHASE 2 1\n0.1\n", 3),
            ("P_PHASE 1 1\nnan\n", 2),
            ("P_PHASE 1 1\n0.1 x\n", 2),
            ("P_SPD3 1 1\n0.1\n", 1),
            ("P_PHASE 0 1\n", 1),
            ("P_PHASE 1 1\n0.1\n\n0.2\n", 4),
        ] {
            match parse_phase(text) {
                Err(ImagingError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
