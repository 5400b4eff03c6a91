//! Patch geometry around spot centers and background filtering.
//!
//! A pixel counts as background when all three channels exceed the white
//! threshold; a spot is dropped when the background fraction of its patch
//! exceeds `max_background`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::BufReader;
use std::path::Path;

use log::warn;

use crate::dataset::io::{fmt_num, write_all};
use crate::dataset::SpotTable;
use crate::error::{Error, Result};

pub const DEFAULT_PATCH_SIZE: u32 = 224;
pub const DEFAULT_WHITE_THRESHOLD: u8 = 220;
pub const DEFAULT_MAX_BACKGROUND: f64 = 0.8;

/// Square crop window, top-left corner plus side length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchBBox {
    pub x0: u32,
    pub y0: u32,
    pub size: u32,
}

/// RGB pixels of one patch in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchRaster {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[u8; 3]>,
}

impl PatchRaster {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}x{height} raster",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![rgb; width as usize * height as usize],
        }
    }
}

/// Crop window of side `size` centered on a spot, shifted inward where it
/// would leave the image.
pub fn patch_bbox(center_x: f64, center_y: f64, size: u32, image_w: u32, image_h: u32) -> Result<PatchBBox> {
    if size == 0 || size > image_w || size > image_h {
        return Err(Error::invalid(format!(
            "a {size}px patch does not fit in a {image_w}x{image_h} image"
        )));
    }
    let inside = |c: f64, extent: u32| c.is_finite() && c >= 0.0 && c < extent as f64;
    if !inside(center_x, image_w) || !inside(center_y, image_h) {
        return Err(Error::invalid(format!(
            "spot center ({center_x}, {center_y}) lies outside the {image_w}x{image_h} image"
        )));
    }
    let corner = |c: f64, extent: u32| -> u32 {
        let start = c.round() as i64 - (size / 2) as i64;
        start.clamp(0, (extent - size) as i64) as u32
    };
    Ok(PatchBBox {
        x0: corner(center_x, image_w),
        y0: corner(center_y, image_h),
        size,
    })
}

/// Fraction of pixels whose every channel exceeds `white_threshold`.
pub fn background_fraction(patch: &PatchRaster, white_threshold: u8) -> f64 {
    if patch.pixels.is_empty() {
        return 0.0;
    }
    let background = patch
        .pixels
        .iter()
        .filter(|p| p.iter().all(|&c| c > white_threshold))
        .count();
    background as f64 / patch.pixels.len() as f64
}

/// Keeps spots whose background fraction is at most `max_background`,
/// preserving order.
pub fn filter_spots(spots: &SpotTable, fractions: &HashMap<String, f64>, max_background: f64) -> Result<SpotTable> {
    let mut keep = Vec::with_capacity(spots.len());
    for (i, id) in spots.spot_ids().iter().enumerate() {
        let f = fractions
            .get(id)
            .ok_or_else(|| Error::invalid(format!("no background fraction for spot {id:?}")))?;
        if *f <= max_background {
            keep.push(i);
        }
    }
    if keep.is_empty() {
        warn!("background filter removed all {} spots", spots.len());
    }
    Ok(spots.subset(&keep))
}

/// Decodes an 8-bit PNG into RGB, dropping alpha and expanding gray.
pub fn read_png(path: impl AsRef<Path>) -> Result<PatchRaster> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Image(format!("{}: image too large", path.display())))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(Error::Image(format!("{}: unexpanded palette image", path.display())))
        }
    };
    let mut pixels = Vec::with_capacity(info.width as usize * info.height as usize);
    for row in buf[..info.buffer_size()].chunks(info.line_size) {
        for px in row[..info.width as usize * channels].chunks(channels) {
            pixels.push(match channels {
                1 | 2 => [px[0]; 3],
                _ => [px[0], px[1], px[2]],
            });
        }
    }
    PatchRaster::new(info.width, info.height, pixels)
}

pub fn write_png(patch: &PatchRaster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(std::io::BufWriter::new(file), patch.width, patch.height);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let image_err = |e: png::EncodingError| Error::Image(format!("{}: {e}", path.display()));
    let mut writer = encoder.write_header().map_err(image_err)?;
    let data: Vec<u8> = patch.pixels.iter().flatten().copied().collect();
    writer.write_image_data(&data).map_err(image_err)?;
    writer.finish().map_err(image_err)
}

/// Background fraction of every `<spot_id>.png` in `dir`, keyed by spot id.
pub fn fractions_from_dir(dir: impl AsRef<Path>, white_threshold: u8) -> Result<BTreeMap<String, f64>> {
    let dir = dir.as_ref();
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !is_png {
            continue;
        }
        let Some(id) = path.file_stem().map(|s| s.to_string_lossy().into_owned()) else {
            continue;
        };
        let raster = read_png(&path)?;
        out.insert(id, background_fraction(&raster, white_threshold));
    }
    Ok(out)
}

/// Writes `spot_id,background_fraction`.
pub fn write_fractions(fractions: &BTreeMap<String, f64>, path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("spot_id,background_fraction\n");
    for (id, f) in fractions {
        text.push_str(&format!("{id},{}\n", fmt_num(*f)));
    }
    write_all(path.as_ref(), &text)
}

pub fn load_fractions(path: impl AsRef<Path>) -> Result<HashMap<String, f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let schema = |line: usize, message: String| Error::Schema {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == "spot_id,background_fraction" => {}
        _ => return Err(schema(1, "expected header \"spot_id,background_fraction\"".into())),
    }
    let mut out = HashMap::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (id, value) = line
            .split_once(',')
            .ok_or_else(|| schema(i + 1, "expected 2 fields".into()))?;
        let f = value
            .parse::<f64>()
            .ok()
            .filter(|v| (0.0..=1.0).contains(v))
            .ok_or_else(|| schema(i + 1, format!("bad fraction {value:?}")))?;
        if out.insert(id.to_string(), f).is_some() {
            return Err(schema(i + 1, format!("duplicate spot_id {id:?}")));
        }
    }
    Ok(out)
}
