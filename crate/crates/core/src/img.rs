//! Raster containers shared by the renderer, ground-truth passes, and the
//! dataset codecs. Rasters are row-major with pixel (0, 0) at the top left.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("raster dimensions {0}x{1} do not match {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("non-finite value at pixel ({0}, {1})")]
    NonFinite(u32, u32),
    #[error("value {0} at pixel ({1}, {2}) exceeds encodable range")]
    OutOfRange(u64, u32, u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: u32,
    height: u32,
    data: Vec<T>,
}

impl<T: Copy> Raster<T> {
    pub fn filled(width: u32, height: u32, value: T) -> Raster<T> {
        Raster { width, height, data: vec![value; (width as usize) * (height as usize)] }
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<T>) -> Raster<T> {
        assert_eq!(data.len(), (width as usize) * (height as usize));
        Raster { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> T {
        self.data[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: T) {
        self.data[(y * self.width + x) as usize] = v;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn same_shape<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// (x, y, value) iterator in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32, T)> + '_ {
        let w = self.width;
        self.data.iter().enumerate().map(move |(i, &v)| (i as u32 % w, i as u32 / w, v))
    }
}

pub type GrayF = Raster<f32>;
pub type Gray8 = Raster<u8>;
pub type Gray16 = Raster<u16>;
pub type Rgb8 = Raster<[u8; 3]>;
pub type RgbF = Raster<[f32; 3]>;

/// Rec. 709 luminance of a linear RGB texel.
pub fn luminance(rgb: [f32; 3]) -> f64 {
    0.2126 * rgb[0] as f64 + 0.7152 * rgb[1] as f64 + 0.0722 * rgb[2] as f64
}

/// Linear HDR radiance, tagged with enough provenance to pair caustics
/// on/off renders of the same frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RadianceImage {
    pub raster: RgbF,
    /// Hash of (scene, camera, settings) with the caustics toggle masked
    /// out; equal keys mean the images form a valid on/off pair.
    pub pair_key: String,
    pub caustics_enabled: bool,
}

impl RadianceImage {
    pub fn width(&self) -> u32 {
        self.raster.width()
    }

    pub fn height(&self) -> u32 {
        self.raster.height()
    }

    pub fn validate_finite(&self) -> Result<(), RasterError> {
        for (x, y, t) in self.raster.pixels() {
            if !(t[0].is_finite() && t[1].is_finite() && t[2].is_finite())
                || t[0] < 0.0
                || t[1] < 0.0
                || t[2] < 0.0
            {
                return Err(RasterError::NonFinite(x, y));
            }
        }
        Ok(())
    }
}

/// Per-pixel first-hit record for the center ray of each pixel, aligned
/// with the rendered radiance.
#[derive(Debug, Clone, PartialEq)]
pub struct GBuffer {
    /// 0 means no hit (environment).
    pub object_id: Raster<u32>,
    /// Distance along the camera forward axis (planar depth), meters.
    /// Misses carry +infinity.
    pub depth_m: Raster<f32>,
    pub world_normal: RgbF,
    pub world_position: RgbF,
    pub is_transparent_hit: Raster<bool>,
}

impl GBuffer {
    pub fn width(&self) -> u32 {
        self.object_id.width()
    }

    pub fn height(&self) -> u32 {
        self.object_id.height()
    }
}

/// One frame's worth of pixel-aligned annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationFrame {
    pub rgb: Rgb8,
    pub depth_norm: GrayF,
    pub normals_world: RgbF,
    pub normals_camera: RgbF,
    pub mask: Gray16,
    pub outline: Gray8,
    pub boundaries: Raster<BoundaryLabel>,
    pub caustics: Raster<CausticLabel>,
    pub meta: FrameMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    #[serde(with = "crate::scene::u64_string")]
    pub scene_seed: u64,
    pub camera_index: usize,
    /// Center and direction of each enabled light at capture time.
    pub light_poses: Vec<([f64; 3], [f64; 3])>,
    pub settings_hash: String,
    pub depth_range_m: f64,
}

/// Boundary classification; the discriminant doubles as the 8-bit file
/// encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum BoundaryLabel {
    None = 0,
    Contact = 128,
    Occlusion = 255,
}

/// Caustics classification; the discriminant doubles as the 8-bit file
/// encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum CausticLabel {
    None = 0,
    Local = 128,
    NonLocal = 255,
}

impl BoundaryLabel {
    pub fn from_u8(v: u8) -> Option<BoundaryLabel> {
        match v {
            0 => Some(BoundaryLabel::None),
            128 => Some(BoundaryLabel::Contact),
            255 => Some(BoundaryLabel::Occlusion),
            _ => None,
        }
    }
}

impl CausticLabel {
    pub fn from_u8(v: u8) -> Option<CausticLabel> {
        match v {
            0 => Some(CausticLabel::None),
            128 => Some(CausticLabel::Local),
            255 => Some(CausticLabel::NonLocal),
            _ => None,
        }
    }
}

impl AnnotationFrame {
    /// All rasters must share one resolution.
    pub fn validate_dimensions(&self) -> Result<(), RasterError> {
        let (w, h) = (self.rgb.width(), self.rgb.height());
        let ok = self.depth_norm.width() == w
            && self.depth_norm.height() == h
            && self.normals_world.same_shape(&self.rgb)
            && self.normals_camera.same_shape(&self.rgb)
            && self.mask.same_shape(&self.rgb)
            && self.outline.same_shape(&self.rgb)
            && self.boundaries.same_shape(&self.rgb)
            && self.caustics.same_shape(&self.rgb);
        if ok {
            Ok(())
        } else {
            Err(RasterError::DimensionMismatch(w, h, self.depth_norm.width(), self.depth_norm.height()))
        }
    }
}
