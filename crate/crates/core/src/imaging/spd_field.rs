//! `P_SPD3 rows cols` followed by one atom per line:
//! `a11 a12 a13 a22 a23 a33`, row-major.

use std::fmt::Write as _;
use std::path::Path;

use super::{parse_header, ImagingError, Tokens};
use crate::manifolds::spd::SPD_FLOOR;
use crate::manifolds::{ProductPoint, SpdAtom};

pub type SpdField = ProductPoint<SpdAtom>;

pub const SPD_MAGIC: &str = "P_SPD3";

/// Every atom is checked against the eigenvalue floor.
pub fn parse_spd(text: &str) -> Result<SpdField, ImagingError> {
    let (rows, cols, body) = parse_header(text, SPD_MAGIC)?;
    let mut tokens = Tokens::new(&text[body..], 1);
    let mut atoms = Vec::with_capacity(rows * cols);
    for k in 0..rows * cols {
        let mut a = [0.0; 6];
        for x in &mut a {
            *x = tokens.real()?.1;
        }
        let atom = SpdAtom::new_unchecked(a);
        let min_eigenvalue = atom.min_eigenvalue();
        if !(min_eigenvalue > SPD_FLOOR) {
            return Err(ImagingError::NotSpd {
                row: k / cols,
                col: k % cols,
                min_eigenvalue,
            });
        }
        atoms.push(atom);
    }
    tokens.expect_end()?;
    Ok(ProductPoint::new(rows, cols, atoms).expect("length checked"))
}

pub fn format_spd(field: &SpdField) -> String {
    let mut out = format!("{SPD_MAGIC} {} {}\n", field.rows, field.cols);
    for atom in &field.atoms {
        let c = atom.components();
        writeln!(out, "{:?} {:?} {:?} {:?} {:?} {:?}", c[0], c[1], c[2], c[3], c[4], c[5]).unwrap();
    }
    out
}

pub fn load_spd(path: impl AsRef<Path>) -> Result<SpdField, ImagingError> {
    parse_spd(&std::fs::read_to_string(path)?)
}

pub fn save_spd(path: impl AsRef<Path>, field: &SpdField) -> Result<(), ImagingError> {
    Ok(std::fs::write(path, format_spd(field))?)
}
