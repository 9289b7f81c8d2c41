//! Grayscale raster and raw float IO.
//!
//! The first field index maps to image rows. Rasters are normalized to
//! `[0, 1]` on load; on save values are clamped to `[0, 1]` and quantized.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};

pub use image::ImageError;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

/// Reads an 8- or 16-bit grayscale PNG or PGM. Color images are rejected.
pub fn read_image(path: impl AsRef<Path>) -> Result<ScalarField> {
    let img = image::ImageReader::open(path.as_ref())?
        .with_guessed_format()?
        .decode()?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        other => {
            return Err(Error::UnsupportedImage(format!(
                "{}: expected single-channel grayscale, found {:?}",
                path.as_ref().display(),
                other.color()
            )))
        }
    };
    ScalarField::from_vec(GridSpec::unit(h, w)?, values)
}

fn quantize(v: f64, max: f64) -> f64 {
    (v.clamp(0.0, 1.0) * max).round()
}

/// Writes a 16-bit grayscale PNG.
pub fn write_png16(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let (m, n) = field.spec().shape();
    let data: Vec<u16> = field.values().iter().map(|&v| quantize(v, 65535.0) as u16).collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(n as u32, m as u32, data).expect("buffer matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)?;
    Ok(())
}

/// Writes an 8-bit grayscale PNG or PGM, chosen by extension.
pub fn write_image8(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let (m, n) = field.spec().shape();
    let data: Vec<u8> = field.values().iter().map(|&v| quantize(v, 255.0) as u8).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(n as u32, m as u32, data).expect("buffer matches dimensions");
    buf.save(path)?;
    Ok(())
}

/// Raw dump: rows and cols as little-endian `u32`, then row-major
/// little-endian `f64` values. The mesh size is not stored.
pub fn write_raw(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let (m, n) = field.spec().shape();
    out.write_all(&(m as u32).to_le_bytes())?;
    out.write_all(&(n as u32).to_le_bytes())?;
    for v in field.values().iter() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a raw dump written by [`write_raw`] onto a grid with spacing `h`.
pub fn read_raw(path: impl AsRef<Path>, h: f64) -> Result<ScalarField> {
    let mut input = BufReader::new(File::open(path)?);
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let m = u32::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    let spec = GridSpec::new(m, n, h)?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != spec.len() * 8 {
        return Err(Error::UnsupportedImage(format!(
            "raw dump for {m}x{n} needs {} value bytes, found {}",
            spec.len() * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    ScalarField::from_vec(spec, values)
}
