//! Grayscale image I/O: binary PGM (P5) and PNG. Color PNGs are reduced
//! with BT.601 luma weights; saving clamps to [0, 255] and rounds
//! half-to-even.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::postprocess::EdgeMap;
use std::fs;
use std::path::Path;

fn img_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Image {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Load a grayscale image (PGM P5 or PNG, chosen by file extension) as a
/// `ScalarField` with unit spacing and values in `[0, 255]`.
pub fn load_image(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    match extension(path) {
        Some("pgm") => load_pgm(path),
        Some("png") => load_png(path),
        _ => Err(img_err(path, "unsupported format (expected .pgm or .png)")),
    }
}

/// Save a field as a grayscale image (PGM P5 or PNG, chosen by file
/// extension). Values are clamped to [0, 255] and rounded half-to-even.
pub fn save_image(path: impl AsRef<Path>, img: &ScalarField) -> Result<()> {
    let path = path.as_ref();
    let bytes: Vec<u8> = img
        .data
        .iter()
        .map(|&v| v.clamp(0.0, 255.0).round_ties_even() as u8)
        .collect();
    save_gray(path, img.height, img.width, &bytes)
}

/// Save an edge map as a 0/255 image.
pub fn save_edge_map(path: impl AsRef<Path>, em: &EdgeMap) -> Result<()> {
    let path = path.as_ref();
    let bytes: Vec<u8> = em.data.iter().map(|&v| if v != 0 { 255 } else { 0 }).collect();
    save_gray(path, em.height, em.width, &bytes)
}

fn extension(path: &Path) -> Option<&str> {
    path.extension().and_then(|e| e.to_str())
}

fn save_gray(path: &Path, height: usize, width: usize, bytes: &[u8]) -> Result<()> {
    match extension(path) {
        Some("pgm") => {
            let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
            out.extend_from_slice(bytes);
            fs::write(path, out).map_err(|e| img_err(path, e.to_string()))
        }
        Some("png") => {
            image::GrayImage::from_raw(width as u32, height as u32, bytes.to_vec())
                .expect("buffer sized from field dimensions")
                .save(path)
                .map_err(|e| img_err(path, e.to_string()))
        }
        _ => Err(img_err(path, "unsupported format (expected .pgm or .png)")),
    }
}

fn load_png(path: &Path) -> Result<ScalarField> {
    let dyn_img = image::open(path).map_err(|e| img_err(path, e.to_string()))?;
    let (w, h) = (dyn_img.width() as usize, dyn_img.height() as usize);
    if w == 0 || h == 0 {
        return Err(img_err(path, "empty image"));
    }
    let data: Vec<f64> = match dyn_img {
        image::DynamicImage::ImageLuma8(g) => {
            g.into_raw().into_iter().map(f64::from).collect()
        }
        other => other
            .into_rgb8()
            .pixels()
            .map(|p| {
                0.299 * f64::from(p.0[0]) + 0.587 * f64::from(p.0[1]) + 0.114 * f64::from(p.0[2])
            })
            .collect(),
    };
    Ok(ScalarField::new(h, w, 1.0, data))
}

fn load_pgm(path: &Path) -> Result<ScalarField> {
    let bytes = fs::read(path).map_err(|e| img_err(path, e.to_string()))?;
    parse_pgm(&bytes).map_err(|reason| img_err(path, reason))
}

/// Parse a binary PGM. Header tokens may be separated by arbitrary
/// whitespace and `#` comments; exactly one whitespace byte follows the
/// maxval before the raster.
fn parse_pgm(bytes: &[u8]) -> std::result::Result<ScalarField, String> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    let mut pos = 2;
    let mut next_token = |bytes: &[u8]| -> std::result::Result<u64, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err("truncated PGM header".into());
        }
        std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| "bad header value".to_string())
    };
    let width = next_token(bytes)? as usize;
    let height = next_token(bytes)? as usize;
    let maxval = next_token(bytes)?;
    if width == 0 || height == 0 {
        return Err("empty image".into());
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval} (need 1..=255)"));
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing whitespace after maxval".into());
    }
    pos += 1;
    let raster = &bytes[pos..];
    if raster.len() != width * height {
        return Err(format!(
            "raster has {} bytes, expected {}",
            raster.len(),
            width * height
        ));
    }
    Ok(ScalarField::new(
        height,
        width,
        1.0,
        raster.iter().map(|&b| f64::from(b)).collect(),
    ))
}
