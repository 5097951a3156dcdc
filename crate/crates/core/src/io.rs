//! Binary PGM images and masks, and the JSON study manifest.
//!
//! Images are written as `P5` with maxval 65535 (big-endian samples); 8-bit
//! files are accepted on read and widened without rescaling. Masks are `P5`
//! with maxval 255, 0 for background and 255 for foreground.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BinaryMask, Image2D, PerfusionStudy, SliceSeries};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Decoded `P5` raster before conversion to an image or mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

pub fn encode_pgm(width: usize, height: usize, maxval: u16, samples: &[u16]) -> Vec<u8> {
    let header = format!("P5\n{width} {height}\n{maxval}\n");
    let wide = maxval > 255;
    let mut out = Vec::with_capacity(header.len() + samples.len() * if wide { 2 } else { 1 });
    out.extend_from_slice(header.as_bytes());
    if wide {
        for s in samples {
            out.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        out.extend(samples.iter().map(|&s| s as u8));
    }
    out
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("missing {what} in header"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("{what} out of range"))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Pgm, String> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err("not a binary PGM (P5) file".into());
    }
    let mut r = HeaderReader { bytes, pos: 2 };
    let width = r.number("width")?;
    let height = r.number("height")?;
    let maxval = r.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(format!("empty raster {width}x{height}"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(r.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("missing whitespace after maxval".into());
    }
    let data = &bytes[r.pos + 1..];
    let n = width
        .checked_mul(height)
        .ok_or_else(|| "raster size overflows".to_string())?;
    let bytes_per_sample = if maxval > 255 { 2 } else { 1 };
    if data.len() != n * bytes_per_sample {
        return Err(format!(
            "expected {} raster bytes, found {}",
            n * bytes_per_sample,
            data.len()
        ));
    }
    let samples: Vec<u16> = if bytes_per_sample == 2 {
        data.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        data.iter().map(|&b| u16::from(b)).collect()
    };
    if let Some(s) = samples.iter().find(|&&s| usize::from(s) > maxval) {
        return Err(format!("sample {s} exceeds maxval {maxval}"));
    }
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}

fn read_pgm(path: &Path) -> Result<Pgm> {
    let bytes = fs::read(path).map_err(|e| Error::decode(path, e.to_string()))?;
    decode_pgm(&bytes).map_err(|reason| Error::decode(path, reason))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_image(img: &Image2D) -> Vec<u8> {
    encode_pgm(img.width(), img.height(), 65535, img.pixels())
}

pub fn save_image(img: &Image2D, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_image(img))
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image2D> {
    let path = path.as_ref();
    let pgm = read_pgm(path)?;
    Image2D::new(pgm.width, pgm.height, pgm.samples).map_err(|e| Error::decode(path, e.to_string()))
}

pub fn encode_mask(mask: &BinaryMask) -> Vec<u8> {
    let samples: Vec<u16> = mask.bits().iter().map(|&b| u16::from(b) * 255).collect();
    encode_pgm(mask.width(), mask.height(), 255, &samples)
}

pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_mask(mask))
}

/// Reads a maxval-255 PGM; samples above 127 become foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let pgm = read_pgm(path)?;
    if pgm.maxval != 255 {
        return Err(Error::decode(
            path,
            format!("mask maxval must be 255, found {}", pgm.maxval),
        ));
    }
    let bits = pgm.samples.iter().map(|&s| u8::from(s > 127)).collect();
    BinaryMask::new(pgm.width, pgm.height, bits).map_err(|e| Error::decode(path, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestSlice {
    pub slice_index: usize,
    /// Image paths in acquisition order, relative to the manifest directory
    /// unless absolute.
    pub timepoints: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyManifest {
    pub version: u32,
    pub width: usize,
    pub height: usize,
    pub bit_depth: u32,
    pub slices: Vec<ManifestSlice>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl StudyManifest {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.version != MANIFEST_VERSION {
            return Err(format!("unsupported manifest version {}", self.version));
        }
        if self.width < 2 || self.height < 2 {
            return Err(format!("image size {}x{} below 2x2", self.width, self.height));
        }
        if !(1..=16).contains(&self.bit_depth) {
            return Err(format!("bit_depth {} outside 1..=16", self.bit_depth));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Relative image path used for `slice`/`timepoint` in saved studies.
pub fn image_rel_path(slice_index: usize, timepoint: usize) -> PathBuf {
    PathBuf::from("images").join(format!("slice{slice_index}_t{timepoint}.pgm"))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<StudyManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: StudyManifest = serde_json::from_str(&text).map_err(|e| Error::ManifestParse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    manifest.validate().map_err(|reason| Error::ManifestParse {
        path: path.to_path_buf(),
        reason,
    })?;
    Ok(manifest)
}

pub fn load_study(manifest_path: impl AsRef<Path>) -> Result<PerfusionStudy> {
    let manifest_path = manifest_path.as_ref();
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    if let Some(first) = manifest.slices.first() {
        let t = first.timepoints.len();
        if let Some(s) = manifest.slices.iter().find(|s| s.timepoints.len() != t || t == 0) {
            return Err(Error::InconsistentStudy(format!(
                "slice {} lists {} time-points, slice {} lists {t}",
                s.slice_index,
                s.timepoints.len(),
                first.slice_index
            )));
        }
    }

    let mut slices = Vec::with_capacity(manifest.slices.len());
    for entry in &manifest.slices {
        let mut images = Vec::with_capacity(entry.timepoints.len());
        for rel in &entry.timepoints {
            let path = base.join(rel);
            let img = load_image(&path)?;
            if img.dims() != (manifest.width, manifest.height) {
                return Err(Error::decode(
                    &path,
                    format!(
                        "image is {}x{}, manifest declares {}x{}",
                        img.width(),
                        img.height(),
                        manifest.width,
                        manifest.height
                    ),
                ));
            }
            images.push(img);
        }
        slices.push(SliceSeries::new(entry.slice_index, images)?);
    }
    PerfusionStudy::new(slices, manifest.metadata)
}

/// Writes every image under `dir/images/` plus `dir/manifest.json`, and
/// returns the manifest path.
pub fn save_study(study: &PerfusionStudy, dir: impl AsRef<Path>, bit_depth: u32) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let (width, height) = study.dims().unwrap_or((2, 2));
    let images_dir = dir.join("images");
    fs::create_dir_all(&images_dir).map_err(|e| Error::io(&images_dir, e))?;

    let mut slices = Vec::with_capacity(study.slices().len());
    for series in study.slices() {
        let mut timepoints = Vec::with_capacity(series.len());
        for (t, img) in series.images().iter().enumerate() {
            let rel = image_rel_path(series.slice_index(), t);
            save_image(img, dir.join(&rel))?;
            timepoints.push(rel);
        }
        slices.push(ManifestSlice {
            slice_index: series.slice_index(),
            timepoints,
        });
    }

    let manifest = StudyManifest {
        version: MANIFEST_VERSION,
        width,
        height,
        bit_depth,
        slices,
        metadata: study.metadata.clone(),
    };
    let path = dir.join(MANIFEST_FILE);
    write_bytes(&path, manifest.to_json().as_bytes())?;
    Ok(path)
}
