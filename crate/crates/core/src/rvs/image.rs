//! Grayscale export: time runs left to right, frequency bottom to top.

use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat};

use super::Rvs;
use crate::error::{Error, IoError, Result};

/// `round(255 * m)` with halves rounded up.
#[inline]
pub fn gray_level(m: f64) -> u8 {
    (255.0 * m.clamp(0.0, 1.0) + 0.5).floor() as u8
}

/// Row-major pixels, row 0 holding the highest frequency.
fn raster(rvs: &Rvs) -> Result<(u32, u32, Vec<u8>)> {
    let (w, h) = (rvs.n_times(), rvs.n_freqs());
    if w == 0 || h == 0 || rvs.columns.len() != w {
        return Err(Error::EmptyMatrix);
    }
    let mut px = Vec::with_capacity(w * h);
    for row in 0..h {
        let f = h - 1 - row;
        px.extend(rvs.columns.iter().map(|c| gray_level(c[f])));
    }
    Ok((w as u32, h as u32, px))
}

/// Binary PGM (P5, maxval 255).
pub fn rvs_to_pgm(rvs: &Rvs) -> Result<Vec<u8>> {
    let (w, h, px) = raster(rvs)?;
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(px);
    Ok(out)
}

/// 8-bit grayscale PNG with the same pixels as [`rvs_to_pgm`].
pub fn rvs_to_png(rvs: &Rvs) -> Result<Vec<u8>> {
    let (w, h, px) = raster(rvs)?;
    let img: GrayImage = GrayImage::from_raw(w, h, px).ok_or(Error::EmptyMatrix)?;
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Io(IoError(e.to_string())))?;
    Ok(out.into_inner())
}

pub fn write_pgm(path: impl AsRef<Path>, rvs: &Rvs) -> Result<()> {
    std::fs::write(path, rvs_to_pgm(rvs)?)?;
    Ok(())
}

pub fn write_png(path: impl AsRef<Path>, rvs: &Rvs) -> Result<()> {
    std::fs::write(path, rvs_to_png(rvs)?)?;
    Ok(())
}
