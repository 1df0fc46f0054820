//! Image encodings used on disk: 8/16-bit PNG for quantized passes and
//! portable float maps (PFM) for linear HDR data. Integer rasters round-trip
//! exactly; PFM round-trips f32 bit patterns exactly.

use crate::img::{Gray16, Gray8, GrayF, Raster, Rgb8, RgbF};
use image::{ImageBuffer, ImageFormat, Luma, Rgb};
use std::io::Cursor;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("non-finite value at pixel ({0}, {1})")]
    NonFinite(u32, u32),
    #[error("png encode failed: {0}")]
    Encode(String),
    #[error("png decode failed: {0}")]
    Decode(String),
    #[error("unexpected image format: {0}")]
    WrongFormat(String),
    #[error("malformed pfm: {0}")]
    Pfm(String),
}

// --- PNG -------------------------------------------------------------

pub fn encode_png16(raster: &Gray16) -> Result<Vec<u8>, CodecError> {
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(raster.width(), raster.height(), raster.data().to_vec())
            .expect("raster dimensions consistent");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).map_err(|e| CodecError::Encode(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn decode_png16(bytes: &[u8]) -> Result<Gray16, CodecError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| CodecError::Decode(e.to_string()))?;
    match img {
        image::DynamicImage::ImageLuma16(b) => {
            let (w, h) = (b.width(), b.height());
            Ok(Raster::from_vec(w, h, b.into_raw()))
        }
        other => Err(CodecError::WrongFormat(format!("expected 16-bit gray, got {other:?}"))),
    }
}

pub fn encode_png8_gray(raster: &Gray8) -> Result<Vec<u8>, CodecError> {
    let img: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(raster.width(), raster.height(), raster.data().to_vec())
            .expect("raster dimensions consistent");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).map_err(|e| CodecError::Encode(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn decode_png8_gray(bytes: &[u8]) -> Result<Gray8, CodecError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| CodecError::Decode(e.to_string()))?;
    match img {
        image::DynamicImage::ImageLuma8(b) => {
            let (w, h) = (b.width(), b.height());
            Ok(Raster::from_vec(w, h, b.into_raw()))
        }
        other => Err(CodecError::WrongFormat(format!("expected 8-bit gray, got {other:?}"))),
    }
}

pub fn encode_png8_rgb(raster: &Rgb8) -> Result<Vec<u8>, CodecError> {
    let flat: Vec<u8> = raster.data().iter().flatten().copied().collect();
    let img: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(raster.width(), raster.height(), flat)
            .expect("raster dimensions consistent");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).map_err(|e| CodecError::Encode(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn decode_png8_rgb(bytes: &[u8]) -> Result<Rgb8, CodecError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| CodecError::Decode(e.to_string()))?;
    match img {
        image::DynamicImage::ImageRgb8(b) => {
            let (w, h) = (b.width(), b.height());
            let data: Vec<[u8; 3]> = b.into_raw().chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            Ok(Raster::from_vec(w, h, data))
        }
        other => Err(CodecError::WrongFormat(format!("expected 8-bit rgb, got {other:?}"))),
    }
}

// --- Quantization ------------------------------------------------------

/// Map a [0, 1] float raster to 16-bit: `round(65535 * clamp(v, 0, 1))`.
/// Rejects non-finite values instead of folding them into the range.
pub fn quantize_unit_u16(raster: &GrayF) -> Result<Gray16, CodecError> {
    let mut out = Raster::filled(raster.width(), raster.height(), 0u16);
    for (x, y, v) in raster.pixels() {
        if !v.is_finite() {
            return Err(CodecError::NonFinite(x, y));
        }
        out.set(x, y, (v.clamp(0.0, 1.0) * 65535.0).round() as u16);
    }
    Ok(out)
}

/// Map a [0, 1] float RGB raster to 8-bit: `round(255 * clamp(v, 0, 1))`.
pub fn quantize_unit_rgb8(raster: &RgbF) -> Result<Rgb8, CodecError> {
    let mut out = Raster::filled(raster.width(), raster.height(), [0u8; 3]);
    for (x, y, v) in raster.pixels() {
        let mut q = [0u8; 3];
        for c in 0..3 {
            if !v[c].is_finite() {
                return Err(CodecError::NonFinite(x, y));
            }
            q[c] = (v[c].clamp(0.0, 1.0) * 255.0).round() as u8;
        }
        out.set(x, y, q);
    }
    Ok(out)
}

// --- PFM ---------------------------------------------------------------

fn pfm_header(magic: &str, width: u32, height: u32) -> Vec<u8> {
    // Negative scale marks little-endian payload; rows run bottom to top.
    format!("{magic}\n{width} {height}\n-1.0\n").into_bytes()
}

pub fn encode_pfm_rgb(raster: &RgbF) -> Vec<u8> {
    let (w, h) = (raster.width(), raster.height());
    let mut out = pfm_header("PF", w, h);
    for y in (0..h).rev() {
        for x in 0..w {
            for c in raster.get(x, y) {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    out
}

pub fn encode_pfm_gray(raster: &GrayF) -> Vec<u8> {
    let (w, h) = (raster.width(), raster.height());
    let mut out = pfm_header("Pf", w, h);
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend_from_slice(&raster.get(x, y).to_le_bytes());
        }
    }
    out
}

struct PfmHeader {
    color: bool,
    width: u32,
    height: u32,
    little_endian: bool,
    data_offset: usize,
}

fn parse_pfm_header(bytes: &[u8]) -> Result<PfmHeader, CodecError> {
    // Three whitespace-terminated tokens: magic, "w h", scale.
    let mut pos = 0usize;
    let mut next_line = || -> Result<String, CodecError> {
        let start = pos;
        while pos < bytes.len() && bytes[pos] != b'\n' {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(CodecError::Pfm("truncated header".into()));
        }
        let line = String::from_utf8(bytes[start..pos].to_vec())
            .map_err(|_| CodecError::Pfm("non-utf8 header".into()))?;
        pos += 1;
        Ok(line.trim().to_string())
    };

    let magic = next_line()?;
    let color = match magic.as_str() {
        "PF" => true,
        "Pf" => false,
        other => return Err(CodecError::Pfm(format!("bad magic '{other}'"))),
    };
    let dims = next_line()?;
    let mut it = dims.split_whitespace();
    let width: u32 = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CodecError::Pfm("bad width".into()))?;
    let height: u32 = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CodecError::Pfm("bad height".into()))?;
    let scale: f32 = next_line()?
        .parse()
        .map_err(|_| CodecError::Pfm("bad scale".into()))?;
    if scale == 0.0 {
        return Err(CodecError::Pfm("zero scale".into()));
    }
    Ok(PfmHeader { color, width, height, little_endian: scale < 0.0, data_offset: pos })
}

fn read_f32(bytes: &[u8], le: bool) -> f32 {
    let arr = [bytes[0], bytes[1], bytes[2], bytes[3]];
    if le {
        f32::from_le_bytes(arr)
    } else {
        f32::from_be_bytes(arr)
    }
}

pub fn decode_pfm_rgb(bytes: &[u8]) -> Result<RgbF, CodecError> {
    let h = parse_pfm_header(bytes)?;
    if !h.color {
        return Err(CodecError::WrongFormat("grayscale pfm where color expected".into()));
    }
    let count = (h.width as usize) * (h.height as usize);
    let need = h.data_offset + count * 12;
    if bytes.len() < need {
        return Err(CodecError::Pfm("truncated payload".into()));
    }
    let mut raster = Raster::filled(h.width, h.height, [0f32; 3]);
    let mut off = h.data_offset;
    for y in (0..h.height).rev() {
        for x in 0..h.width {
            let texel = [
                read_f32(&bytes[off..], h.little_endian),
                read_f32(&bytes[off + 4..], h.little_endian),
                read_f32(&bytes[off + 8..], h.little_endian),
            ];
            raster.set(x, y, texel);
            off += 12;
        }
    }
    Ok(raster)
}

pub fn decode_pfm_gray(bytes: &[u8]) -> Result<GrayF, CodecError> {
    let h = parse_pfm_header(bytes)?;
    if h.color {
        return Err(CodecError::WrongFormat("color pfm where grayscale expected".into()));
    }
    let count = (h.width as usize) * (h.height as usize);
    let need = h.data_offset + count * 4;
    if bytes.len() < need {
        return Err(CodecError::Pfm("truncated payload".into()));
    }
    let mut raster = Raster::filled(h.width, h.height, 0f32);
    let mut off = h.data_offset;
    for y in (0..h.height).rev() {
        for x in 0..h.width {
            raster.set(x, y, read_f32(&bytes[off..], h.little_endian));
            off += 4;
        }
    }
    Ok(raster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn png16_single_pixel_extremes() {
        for v in [0u16, 1, 32768, 65535] {
            let r = Raster::from_vec(1, 1, vec![v]);
            let decoded = decode_png16(&encode_png16(&r).unwrap()).unwrap();
            assert_eq!(decoded.get(0, 0), v);
        }
    }

    #[test]
    fn png16_random_round_trip() {
        let mut s = RngStream::new(5, "png16", 0);
        let data: Vec<u16> = (0..64 * 64).map(|_| s.next_u64() as u16).collect();
        let r = Raster::from_vec(64, 64, data);
        assert_eq!(decode_png16(&encode_png16(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn png8_rgb_round_trip() {
        let mut s = RngStream::new(6, "png8", 0);
        let data: Vec<[u8; 3]> = (0..32 * 16)
            .map(|_| {
                let v = s.next_u64();
                [v as u8, (v >> 8) as u8, (v >> 16) as u8]
            })
            .collect();
        let r = Raster::from_vec(32, 16, data);
        assert_eq!(decode_png8_rgb(&encode_png8_rgb(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn pfm_rgb_round_trip_bit_exact() {
        let mut s = RngStream::new(7, "pfm", 0);
        let data: Vec<[f32; 3]> = (0..48 * 20)
            .map(|_| {
                [
                    s.next_f64() as f32 * 100.0,
                    -(s.next_f64() as f32),
                    (s.next_f64() as f32) * 1e-20,
                ]
            })
            .collect();
        let r = Raster::from_vec(48, 20, data);
        let decoded = decode_pfm_rgb(&encode_pfm_rgb(&r)).unwrap();
        for (a, b) in r.data().iter().zip(decoded.data()) {
            for c in 0..3 {
                assert_eq!(a[c].to_bits(), b[c].to_bits());
            }
        }
    }

    #[test]
    fn pfm_gray_round_trip() {
        let data: Vec<f32> = vec![0.0, 1.5, -2.25, f32::INFINITY, 1e-38];
        let r = Raster::from_vec(5, 1, data);
        let decoded = decode_pfm_gray(&encode_pfm_gray(&r)).unwrap();
        for (a, b) in r.data().iter().zip(decoded.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn quantize_rejects_nan() {
        let r = Raster::from_vec(2, 1, vec![0.5f32, f32::NAN]);
        assert!(matches!(quantize_unit_u16(&r), Err(CodecError::NonFinite(1, 0))));
    }

    #[test]
    fn quantize_endpoints() {
        let r = Raster::from_vec(3, 1, vec![0.0f32, 1.0, 2.0]);
        let q = quantize_unit_u16(&r).unwrap();
        assert_eq!(q.data(), &[0, 65535, 65535]);
    }

    #[test]
    fn decode_rejects_wrong_variant() {
        let gray = Raster::from_vec(2, 2, vec![0.0f32; 4]);
        assert!(decode_pfm_rgb(&encode_pfm_gray(&gray)).is_err());
    }
}
