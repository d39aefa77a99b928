//! Little-endian binary container shared by range images, label maps and
//! probability maps.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "BAGS"
//! 4       4     version (u32, currently 1)
//! 8       4     width (u32)
//! 12      4     height (u32)
//! 16      4     channel descriptor: "RNGE" | "LABL" | "PROB"
//! 20      ..    descriptor header, then row-major payload
//! ```
//!
//! | descriptor | header                                             | payload                          |
//! |------------|----------------------------------------------------|----------------------------------|
//! | `RNGE`     | fx fy cx cy (f64), camera→world `[R\|t]` 3×4 row-major (12 × f64) | w·h × f32 depth (m) |
//! | `LABL`     | none                                               | w·h × u8 class, then w·h × u32 instance |
//! | `PROB`     | K (u32), scheme code (u8), multinomial flag (u8), 2 reserved bytes | K planes of w·h × f32 |
//!
//! Class codes are those of [`SemanticClass::code`].

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion, Vector3};
use thiserror::Error;

use super::{Intrinsics, LabelMap, RangeImage, SemanticClass};

pub const MAGIC: &[u8; 4] = b"BAGS";
pub const VERSION: u32 = 1;
pub const RANGE_DESCRIPTOR: &[u8; 4] = b"RNGE";
pub const LABEL_DESCRIPTOR: &[u8; 4] = b"LABL";
pub const PROB_DESCRIPTOR: &[u8; 4] = b"PROB";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a BAGS container (bad magic)")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),
    #[error("expected a `{expected}` container, found `{found}`")]
    WrongDescriptor { expected: String, found: String },
    #[error("invalid content: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerHeader {
    pub width: usize,
    pub height: usize,
    pub descriptor: [u8; 4],
}

pub fn write_header<W: Write>(w: &mut W, width: usize, height: usize, descriptor: &[u8; 4]) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(width as u32).to_le_bytes())?;
    w.write_all(&(height as u32).to_le_bytes())?;
    w.write_all(descriptor)
}

pub fn read_header<R: Read>(r: &mut R) -> Result<ContainerHeader, FormatError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let width = read_u32(r)? as usize;
    let height = read_u32(r)? as usize;
    let mut descriptor = [0u8; 4];
    r.read_exact(&mut descriptor)?;
    Ok(ContainerHeader { width, height, descriptor })
}

pub fn expect_descriptor(h: &ContainerHeader, expected: &[u8; 4]) -> Result<(), FormatError> {
    if &h.descriptor != expected {
        return Err(FormatError::WrongDescriptor {
            expected: String::from_utf8_lossy(expected).into_owned(),
            found: String::from_utf8_lossy(&h.descriptor).into_owned(),
        });
    }
    Ok(())
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub(crate) fn write_f32s<W: Write>(w: &mut W, values: &[f32]) -> io::Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 4);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

pub(crate) fn read_f32s<R: Read>(r: &mut R, n: usize) -> io::Result<Vec<f32>> {
    let mut buf = vec![0u8; n * 4];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

pub fn write_range_image<W: Write>(w: &mut W, img: &RangeImage) -> io::Result<()> {
    write_header(w, img.width, img.height, RANGE_DESCRIPTOR)?;
    let k = &img.intrinsics;
    for v in [k.fx, k.fy, k.cx, k.cy] {
        w.write_all(&v.to_le_bytes())?;
    }
    let r = img.camera_pose.rotation.to_rotation_matrix();
    let t = img.camera_pose.translation.vector;
    for row in 0..3 {
        for col in 0..3 {
            w.write_all(&r[(row, col)].to_le_bytes())?;
        }
        w.write_all(&t[row].to_le_bytes())?;
    }
    write_f32s(w, &img.depth)
}

pub fn read_range_image<R: Read>(r: &mut R) -> Result<RangeImage, FormatError> {
    let h = read_header(r)?;
    expect_descriptor(&h, RANGE_DESCRIPTOR)?;
    let intrinsics = Intrinsics { fx: read_f64(r)?, fy: read_f64(r)?, cx: read_f64(r)?, cy: read_f64(r)? };
    let mut m = Matrix3::zeros();
    let mut t = Vector3::zeros();
    for row in 0..3 {
        for col in 0..3 {
            m[(row, col)] = read_f64(r)?;
        }
        t[row] = read_f64(r)?;
    }
    let rotation = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m));
    let depth = read_f32s(r, h.width * h.height)?;
    if depth.iter().any(|d| !(*d >= 0.0)) {
        return Err(FormatError::Invalid("negative or NaN depth".into()));
    }
    Ok(RangeImage {
        width: h.width,
        height: h.height,
        depth,
        intrinsics,
        camera_pose: Isometry3::from_parts(Translation3::from(t), rotation),
    })
}

pub fn write_label_map<W: Write>(w: &mut W, labels: &LabelMap) -> io::Result<()> {
    write_header(w, labels.width, labels.height, LABEL_DESCRIPTOR)?;
    let codes: Vec<u8> = labels.class.iter().map(|c| c.code()).collect();
    w.write_all(&codes)?;
    let mut buf = Vec::with_capacity(labels.instance.len() * 4);
    for id in &labels.instance {
        buf.extend_from_slice(&id.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_label_map<R: Read>(r: &mut R) -> Result<LabelMap, FormatError> {
    let h = read_header(r)?;
    expect_descriptor(&h, LABEL_DESCRIPTOR)?;
    let n = h.width * h.height;
    let mut codes = vec![0u8; n];
    r.read_exact(&mut codes)?;
    let class = codes
        .iter()
        .map(|&c| SemanticClass::from_code(c).ok_or_else(|| FormatError::Invalid(format!("unknown class code {c}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut buf = vec![0u8; n * 4];
    r.read_exact(&mut buf)?;
    let instance = buf.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok(LabelMap { width: h.width, height: h.height, class, instance })
}

pub fn save_range_image(path: &Path, img: &RangeImage) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_range_image(&mut w, img)?;
    w.flush()
}

pub fn load_range_image(path: &Path) -> Result<RangeImage, FormatError> {
    read_range_image(&mut BufReader::new(File::open(path)?))
}

pub fn save_label_map(path: &Path, labels: &LabelMap) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_label_map(&mut w, labels)?;
    w.flush()
}

pub fn load_label_map(path: &Path) -> Result<LabelMap, FormatError> {
    read_label_map(&mut BufReader::new(File::open(path)?))
}
