//! 8-bit grayscale PGM (P5) import and export of phase images.
//!
//! Gray level `g ∈ 0..=255` maps linearly to `−π + 2π (g + 1)/256`, so 255 is
//! `π` and every level lands in `(−π, π]`.

use std::f64::consts::PI;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, GrayImage, ImageEncoder, Luma};

use super::{ImagingError, PhaseImage};
use crate::manifolds::{PhaseAtom, ProductPoint};

pub fn gray_to_phase(g: u8) -> f64 {
    -PI + 2.0 * PI * (g as f64 + 1.0) / 256.0
}

/// Nearest gray level of a phase value.
pub fn phase_to_gray(phi: f64) -> u8 {
    let g = (phi + PI) * 256.0 / (2.0 * PI) - 1.0;
    g.round().clamp(0.0, 255.0) as u8
}

pub fn load_pgm_phase(path: impl AsRef<Path>) -> Result<PhaseImage, ImagingError> {
    let img = image::open(path).map_err(|e| ImagingError::Image(e.to_string()))?;
    let gray = img.to_luma8();
    let (w, h) = gray.dimensions();
    if w == 0 || h == 0 {
        return Err(ImagingError::Image("empty image".into()));
    }
    Ok(ProductPoint::from_fn(h as usize, w as usize, |i, j| {
        PhaseAtom(gray_to_phase(gray.get_pixel(j as u32, i as u32)[0]))
    }))
}

pub fn save_pgm_phase(path: impl AsRef<Path>, img: &PhaseImage) -> Result<(), ImagingError> {
    let gray = GrayImage::from_fn(img.cols as u32, img.rows as u32, |x, y| {
        Luma([phase_to_gray(img.get(y as usize, x as usize).0)])
    });
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    PnmEncoder::new(file)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(gray.as_raw(), gray.width(), gray.height(), ExtendedColorType::L8)
        .map_err(|e| ImagingError::Image(e.to_string()))
}
