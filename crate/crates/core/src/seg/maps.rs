use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::range_image::io::{expect_descriptor, read_f32s, read_header, read_u32, write_f32s, write_header, FormatError, PROB_DESCRIPTOR};
use crate::range_image::{BagsCell, BagsLabelMap, LabelScheme};

/// Per-class probability images `Y_k`, one plane of `width × height` per
/// label of the scheme. A pixel whose entries are all zero is unobserved.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMaps {
    pub scheme: LabelScheme,
    pub width: usize,
    pub height: usize,
    /// When set, the entries of every observed pixel sum to one.
    pub multinomial: bool,
    pub planes: Vec<Vec<f32>>,
}

impl ProbabilityMaps {
    pub fn zeros(scheme: LabelScheme, width: usize, height: usize, multinomial: bool) -> Self {
        Self { scheme, width, height, multinomial, planes: vec![vec![0.0; width * height]; scheme.num_classes()] }
    }

    /// Exact one-hot encoding; ignore pixels get the uniform distribution.
    pub fn one_hot(gt: &BagsLabelMap) -> Self {
        let k = gt.scheme.num_classes();
        let mut maps = Self::zeros(gt.scheme, gt.width, gt.height, true);
        for (i, cell) in gt.cells.iter().enumerate() {
            match cell {
                BagsCell::Invalid => {}
                BagsCell::Ignore => maps.planes.iter_mut().for_each(|p| p[i] = 1.0 / k as f32),
                BagsCell::Label(l) => maps.planes[*l as usize][i] = 1.0,
            }
        }
        maps
    }

    pub fn num_classes(&self) -> usize {
        self.planes.len()
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel(&self, i: usize) -> impl Iterator<Item = f32> + '_ {
        self.planes.iter().map(move |p| p[i])
    }

    pub fn is_observed(&self, i: usize) -> bool {
        self.pixel(i).any(|y| y > 0.0)
    }

    /// Shape and range checks, plus the unit-sum rule in multinomial mode.
    pub fn validate(&self) -> Result<(), String> {
        if self.planes.len() != self.scheme.num_classes() {
            return Err(format!("{} planes for scheme {} with {} classes", self.planes.len(), self.scheme, self.scheme.num_classes()));
        }
        if self.planes.iter().any(|p| p.len() != self.len()) {
            return Err("plane size does not match width × height".into());
        }
        for i in 0..self.len() {
            let mut sum = 0.0f64;
            for y in self.pixel(i) {
                if !(0.0..=1.0).contains(&y) {
                    return Err(format!("pixel {i}: probability {y} outside [0, 1]"));
                }
                sum += y as f64;
            }
            if self.multinomial && sum > 0.0 && (sum - 1.0).abs() > 1e-6 {
                return Err(format!("pixel {i}: probabilities sum to {sum}"));
            }
        }
        Ok(())
    }
}

/// Arg-max split of the pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub scheme: LabelScheme,
    pub width: usize,
    pub height: usize,
    /// Winning label index per pixel; `None` where unobserved.
    pub assignment: Vec<Option<u8>>,
    /// Pixel indices `M_k` per label, ascending.
    pub sets: Vec<Vec<u32>>,
}

/// Assigns each observed pixel to its most probable label. Ties go to the
/// lowest label index.
pub fn argmax_segmentation(maps: &ProbabilityMaps) -> Segmentation {
    let mut sets = vec![Vec::new(); maps.num_classes()];
    let assignment = (0..maps.len())
        .map(|i| {
            let mut best: Option<(usize, f32)> = None;
            for (k, y) in maps.pixel(i).enumerate() {
                if y > 0.0 && best.is_none_or(|(_, b)| y > b) {
                    best = Some((k, y));
                }
            }
            best.map(|(k, _)| {
                sets[k].push(i as u32);
                k as u8
            })
        })
        .collect();
    Segmentation { scheme: maps.scheme, width: maps.width, height: maps.height, assignment, sets }
}

pub fn write_probability_maps<W: Write>(w: &mut W, maps: &ProbabilityMaps) -> io::Result<()> {
    write_header(w, maps.width, maps.height, PROB_DESCRIPTOR)?;
    w.write_all(&(maps.num_classes() as u32).to_le_bytes())?;
    w.write_all(&[maps.scheme.code(), maps.multinomial as u8, 0, 0])?;
    for p in &maps.planes {
        write_f32s(w, p)?;
    }
    Ok(())
}

pub fn read_probability_maps<R: Read>(r: &mut R) -> Result<ProbabilityMaps, FormatError> {
    let h = read_header(r)?;
    expect_descriptor(&h, PROB_DESCRIPTOR)?;
    let k = read_u32(r)? as usize;
    let mut flags = [0u8; 4];
    r.read_exact(&mut flags)?;
    let scheme = LabelScheme::from_code(flags[0])
        .ok_or_else(|| FormatError::Invalid(format!("unknown label scheme code {}", flags[0])))?;
    if k != scheme.num_classes() {
        return Err(FormatError::Invalid(format!("{k} planes do not match scheme {scheme}")));
    }
    let n = h.width * h.height;
    let planes = (0..k).map(|_| read_f32s(r, n)).collect::<io::Result<Vec<_>>>()?;
    let maps = ProbabilityMaps { scheme, width: h.width, height: h.height, multinomial: flags[1] != 0, planes };
    maps.validate().map_err(FormatError::Invalid)?;
    Ok(maps)
}

pub fn save_probability_maps(path: &Path, maps: &ProbabilityMaps) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_probability_maps(&mut w, maps)?;
    w.flush()
}

pub fn load_probability_maps(path: &Path) -> Result<ProbabilityMaps, FormatError> {
    read_probability_maps(&mut BufReader::new(File::open(path)?))
}
