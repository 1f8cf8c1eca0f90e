//! Float image buffers and bit-exact file I/O.
//!
//! Everything is linear light; no gamma is applied anywhere. Two on-disk
//! formats are supported:
//!
//! * `.ppm` — binary P6 with maxval 65535 (big-endian samples), for human
//!   inspection. Values are clamped to [0, 1] and quantized, so it is lossy.
//! * `.difx.f32` — raw little-endian `f32` planar RGB behind a 16-byte
//!   header. Lossless; pipeline intermediates (especially signed difference
//!   images) always travel in this format.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{DifxError, Result};

/// Magic bytes of the raw float format.
pub const RAWF32_MAGIC: [u8; 4] = *b"DIFX";
/// Current raw float format version.
pub const RAWF32_VERSION: u32 = 1;

/// Linear-light RGB raster with `f32` samples. Difference images may hold
/// negative values; file readers reject non-finite payloads.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageF {
    width_px: usize,
    height_px: usize,
    pixels: Vec<[f32; 3]>,
}

impl ImageF {
    /// All-black image.
    pub fn new(width_px: usize, height_px: usize) -> Self {
        assert!(width_px > 0 && height_px > 0, "image dimensions must be positive");
        Self {
            width_px,
            height_px,
            pixels: vec![[0.0; 3]; width_px * height_px],
        }
    }

    pub fn from_pixels(width_px: usize, height_px: usize, pixels: Vec<[f32; 3]>) -> Self {
        assert_eq!(pixels.len(), width_px * height_px, "pixel count mismatch");
        Self {
            width_px,
            height_px,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width_px
    }

    pub fn height(&self) -> usize {
        self.height_px
    }

    pub fn pixels(&self) -> &[[f32; 3]] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [[f32; 3]] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [f32; 3] {
        self.pixels[y * self.width_px + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: [f32; 3]) {
        self.pixels[y * self.width_px + x] = value;
    }

    pub fn same_dims(&self, other: &ImageF) -> bool {
        self.width_px == other.width_px && self.height_px == other.height_px
    }
}

/// Single-channel float raster, same shape rules as [`ImageF`].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImageF {
    width_px: usize,
    height_px: usize,
    pixels: Vec<f32>,
}

impl GrayImageF {
    pub fn new(width_px: usize, height_px: usize) -> Self {
        assert!(width_px > 0 && height_px > 0, "image dimensions must be positive");
        Self {
            width_px,
            height_px,
            pixels: vec![0.0; width_px * height_px],
        }
    }

    pub fn from_pixels(width_px: usize, height_px: usize, pixels: Vec<f32>) -> Self {
        assert_eq!(pixels.len(), width_px * height_px, "pixel count mismatch");
        Self {
            width_px,
            height_px,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width_px
    }

    pub fn height(&self) -> usize {
        self.height_px
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f32] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.pixels[y * self.width_px + x]
    }
}

/// One bit per pixel; the thresholded scene difference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width_px: usize,
    height_px: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width_px: usize, height_px: usize) -> Self {
        assert!(width_px > 0 && height_px > 0, "mask dimensions must be positive");
        Self {
            width_px,
            height_px,
            bits: vec![false; width_px * height_px],
        }
    }

    pub fn from_bits(width_px: usize, height_px: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width_px * height_px, "bit count mismatch");
        Self {
            width_px,
            height_px,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width_px
    }

    pub fn height(&self) -> usize {
        self.height_px
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width_px + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width_px + x] = v;
    }

    /// Number of set pixels.
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Iterator over the (x, y) coordinates of set pixels, row-major order.
    pub fn set_coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width_px;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }
}

fn quantize16(v: f32) -> u16 {
    let clamped = v.clamp(0.0, 1.0) as f64;
    (clamped * 65535.0 + 0.5).floor() as u16
}

/// Writes binary PPM (`P6`, maxval 65535, big-endian). Values are clamped to
/// [0, 1] and quantized round-half-up.
pub fn write_ppm16(img: &ImageF, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P6\n{} {}\n65535\n", img.width(), img.height())?;
    let mut buf = Vec::with_capacity(img.pixels.len() * 6);
    for px in &img.pixels {
        for &c in px {
            buf.extend_from_slice(&quantize16(c).to_be_bytes());
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

fn read_pnm_token(r: &mut impl Read) -> Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    // Skip whitespace and '#' comments.
    loop {
        r.read_exact(&mut byte)?;
        match byte[0] {
            b' ' | b'\t' | b'\r' | b'\n' => continue,
            b'#' => {
                while byte[0] != b'\n' {
                    r.read_exact(&mut byte)?;
                }
            }
            _ => break,
        }
    }
    loop {
        tok.push(byte[0] as char);
        match r.read_exact(&mut byte) {
            Ok(()) => {}
            Err(e) => return Err(e.into()),
        }
        if byte[0].is_ascii_whitespace() {
            break;
        }
    }
    Ok(tok)
}

/// Reads a `P6`/65535 PPM written by [`write_ppm16`]; samples map back to
/// `sample / 65535`.
pub fn read_ppm16(path: &Path) -> Result<ImageF> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 2];
    r.read_exact(&mut magic)?;
    if &magic != b"P6" {
        return Err(DifxError::Format(format!(
            "{}: not a binary PPM (magic {:?})",
            path.display(),
            magic
        )));
    }
    let width: usize = read_pnm_token(&mut r)?
        .parse()
        .map_err(|_| DifxError::Format("bad PPM width".into()))?;
    let height: usize = read_pnm_token(&mut r)?
        .parse()
        .map_err(|_| DifxError::Format("bad PPM height".into()))?;
    let maxval: u32 = read_pnm_token(&mut r)?
        .parse()
        .map_err(|_| DifxError::Format("bad PPM maxval".into()))?;
    if maxval != 65535 {
        return Err(DifxError::Format(format!(
            "unsupported PPM maxval {maxval}, expected 65535"
        )));
    }
    if width == 0 || height == 0 {
        return Err(DifxError::Format("zero PPM dimensions".into()));
    }
    let mut raw = vec![0u8; width * height * 6];
    r.read_exact(&mut raw)
        .map_err(|_| DifxError::Format("truncated PPM payload".into()))?;
    let pixels = raw
        .chunks_exact(6)
        .map(|c| {
            let s = |i: usize| u16::from_be_bytes([c[i], c[i + 1]]) as f32 / 65535.0;
            [s(0), s(2), s(4)]
        })
        .collect();
    Ok(ImageF::from_pixels(width, height, pixels))
}

/// Writes the lossless raw float format: 16-byte header (magic `DIFX`,
/// version, width, height — all little-endian u32) followed by planar RGB
/// `f32` samples.
pub fn write_rawf32(img: &ImageF, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&RAWF32_MAGIC)?;
    w.write_all(&RAWF32_VERSION.to_le_bytes())?;
    w.write_all(&(img.width() as u32).to_le_bytes())?;
    w.write_all(&(img.height() as u32).to_le_bytes())?;
    let n = img.pixels.len();
    let mut plane = Vec::with_capacity(n * 4);
    for channel in 0..3 {
        plane.clear();
        for px in &img.pixels {
            plane.extend_from_slice(&px[channel].to_le_bytes());
        }
        w.write_all(&plane)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the raw float format back; exact inverse of [`write_rawf32`].
pub fn read_rawf32(path: &Path) -> Result<ImageF> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|_| DifxError::Format(format!("{}: truncated header", path.display())))?;
    if header[..4] != RAWF32_MAGIC {
        return Err(DifxError::Format(format!(
            "{}: bad magic {:?}",
            path.display(),
            &header[..4]
        )));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != RAWF32_VERSION {
        return Err(DifxError::Format(format!(
            "unsupported rawf32 version {version}"
        )));
    }
    let width = word(8) as usize;
    let height = word(12) as usize;
    if width == 0 || height == 0 {
        return Err(DifxError::Format("zero rawf32 dimensions".into()));
    }
    let n = width * height;
    let mut payload = vec![0u8; n * 12];
    r.read_exact(&mut payload)
        .map_err(|_| DifxError::Format("truncated rawf32 payload".into()))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(DifxError::Format("trailing bytes after rawf32 payload".into()));
    }
    let mut pixels = vec![[0.0f32; 3]; n];
    for channel in 0..3 {
        let plane = &payload[channel * n * 4..(channel + 1) * n * 4];
        for (px, bytes) in pixels.iter_mut().zip(plane.chunks_exact(4)) {
            px[channel] = f32::from_le_bytes(bytes.try_into().unwrap());
        }
    }
    if pixels.iter().flatten().any(|v| !v.is_finite()) {
        return Err(DifxError::Format("non-finite sample in rawf32 payload".into()));
    }
    Ok(ImageF::from_pixels(width, height, pixels))
}

/// Reads an image by sniffing the magic bytes: raw float (`DIFX`) or
/// 16-bit PPM (`P6`).
pub fn read_image(path: &Path) -> Result<ImageF> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 4];
    let n = file.read(&mut magic)?;
    drop(file);
    if n >= 4 && magic == RAWF32_MAGIC {
        read_rawf32(path)
    } else if n >= 2 && &magic[..2] == b"P6" {
        read_ppm16(path)
    } else {
        Err(DifxError::Format(format!(
            "{}: neither rawf32 nor 16-bit PPM",
            path.display()
        )))
    }
}

/// Writes a binary PBM (`P4`): one bit per pixel, MSB first, rows padded to
/// whole bytes. Set mask bits export as black (PBM value 1).
pub fn write_pbm(mask: &BinaryMask, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P4\n{} {}\n", mask.width(), mask.height())?;
    let row_bytes = mask.width().div_ceil(8);
    let mut buf = vec![0u8; row_bytes];
    for y in 0..mask.height() {
        buf.iter_mut().for_each(|b| *b = 0);
        for x in 0..mask.width() {
            if mask.get(x, y) {
                buf[x / 8] |= 0x80 >> (x % 8);
            }
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a binary PBM written by [`write_pbm`].
pub fn read_pbm(path: &Path) -> Result<BinaryMask> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 2];
    r.read_exact(&mut magic)?;
    if &magic != b"P4" {
        return Err(DifxError::Format(format!("not a binary PBM (magic {magic:?})")));
    }
    let width: usize = read_pnm_token(&mut r)?
        .parse()
        .map_err(|_| DifxError::Format("bad PBM width".into()))?;
    let height: usize = read_pnm_token(&mut r)?
        .parse()
        .map_err(|_| DifxError::Format("bad PBM height".into()))?;
    if width == 0 || height == 0 {
        return Err(DifxError::Format("zero PBM dimensions".into()));
    }
    let row_bytes = width.div_ceil(8);
    let mut raw = vec![0u8; row_bytes * height];
    r.read_exact(&mut raw)
        .map_err(|_| DifxError::Format("truncated PBM payload".into()))?;
    let mut mask = BinaryMask::new(width, height);
    for y in 0..height {
        let row = &raw[y * row_bytes..];
        for x in 0..width {
            mask.set(x, y, row[x / 8] & (0x80 >> (x % 8)) != 0);
        }
    }
    Ok(mask)
}
