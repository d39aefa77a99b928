use std::fmt;
use std::str::FromStr;

use crate::geom::PrimitiveClass;

/// Ground-truth class of a scanned pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemanticClass {
    Invalid,
    Primitive(PrimitiveClass),
    /// Freeform surface not explained by the primitive library.
    Other,
}

impl SemanticClass {
    /// Byte code used by the label container: 0 invalid, 1..=4 plane,
    /// sphere, cylinder, cone, 5 other.
    pub fn code(self) -> u8 {
        match self {
            SemanticClass::Invalid => 0,
            SemanticClass::Primitive(c) => 1 + c.index() as u8,
            SemanticClass::Other => 5,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(SemanticClass::Invalid),
            1..=4 => PrimitiveClass::from_index(code as usize - 1).map(SemanticClass::Primitive),
            5 => Some(SemanticClass::Other),
            _ => None,
        }
    }

    pub fn primitive(self) -> Option<PrimitiveClass> {
        match self {
            SemanticClass::Primitive(c) => Some(c),
            _ => None,
        }
    }
}

/// Per-pixel ground-truth class and instance id (0 = none).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub class: Vec<SemanticClass>,
    pub instance: Vec<u32>,
}

impl LabelMap {
    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            class: vec![SemanticClass::Invalid; width * height],
            instance: vec![0; width * height],
        }
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    /// Pixel indices of every instance id, in ascending pixel order.
    pub fn instance_pixels(&self) -> std::collections::BTreeMap<u32, Vec<u32>> {
        let mut out: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
        for (i, &id) in self.instance.iter().enumerate() {
            if id > 0 {
                out.entry(id).or_default().push(i as u32);
            }
        }
        out
    }

    /// Checks `class = Invalid ⇔ instance = 0`.
    pub fn is_consistent(&self) -> bool {
        self.class
            .iter()
            .zip(&self.instance)
            .all(|(c, &id)| (*c == SemanticClass::Invalid) == (id == 0))
    }
}

/// Label alphabet entry of a boundary-aware segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BagsLabel {
    Primitive(PrimitiveClass),
    Boundary,
    Other,
}

impl BagsLabel {
    pub fn name(self) -> &'static str {
        match self {
            BagsLabel::Primitive(c) => c.short(),
            BagsLabel::Boundary => "BND",
            BagsLabel::Other => "OTH",
        }
    }
}

/// Which optional classes join the four primitive classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelScheme {
    /// Four primitive classes; freeform pixels ignored.
    K4,
    /// Primitives plus instance-aware boundary.
    K5Boundary,
    /// Primitives plus the freeform background class.
    K5Other,
    /// Primitives, boundary and background.
    K6,
}

impl LabelScheme {
    pub const ALL: [LabelScheme; 4] =
        [LabelScheme::K4, LabelScheme::K5Boundary, LabelScheme::K5Other, LabelScheme::K6];

    pub fn has_boundary(self) -> bool {
        matches!(self, LabelScheme::K5Boundary | LabelScheme::K6)
    }

    pub fn has_other(self) -> bool {
        matches!(self, LabelScheme::K5Other | LabelScheme::K6)
    }

    /// Label alphabet in channel order: primitives first, then boundary,
    /// then other.
    pub fn labels(self) -> Vec<BagsLabel> {
        let mut v: Vec<BagsLabel> = PrimitiveClass::ALL.iter().map(|&c| BagsLabel::Primitive(c)).collect();
        if self.has_boundary() {
            v.push(BagsLabel::Boundary);
        }
        if self.has_other() {
            v.push(BagsLabel::Other);
        }
        v
    }

    pub fn num_classes(self) -> usize {
        4 + self.has_boundary() as usize + self.has_other() as usize
    }

    pub fn index_of(self, label: BagsLabel) -> Option<usize> {
        self.labels().iter().position(|&l| l == label)
    }

    pub fn code(self) -> u8 {
        match self {
            LabelScheme::K4 => 4,
            LabelScheme::K5Boundary => 51,
            LabelScheme::K5Other => 52,
            LabelScheme::K6 => 6,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.code() == c)
    }

    pub fn name(self) -> &'static str {
        match self {
            LabelScheme::K4 => "k4",
            LabelScheme::K5Boundary => "k5b",
            LabelScheme::K5Other => "k5o",
            LabelScheme::K6 => "k6",
        }
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LabelScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown label scheme `{s}` (expected k4, k5b, k5o or k6)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BagsCell {
    /// No observation at this pixel.
    Invalid,
    /// Observed, but its class is not part of the scheme.
    Ignore,
    /// Index into [`LabelScheme::labels`].
    Label(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagsLabelMap {
    pub scheme: LabelScheme,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<BagsCell>,
}

impl BagsLabelMap {
    /// Pixel count per label index plus the ignore count.
    pub fn histogram(&self) -> (Vec<usize>, usize) {
        let mut counts = vec![0; self.scheme.num_classes()];
        let mut ignore = 0;
        for c in &self.cells {
            match c {
                BagsCell::Label(k) => counts[*k as usize] += 1,
                BagsCell::Ignore => ignore += 1,
                BagsCell::Invalid => {}
            }
        }
        (counts, ignore)
    }
}

/// Applies a label scheme to ground truth. Precedence is boundary, then
/// other, then the primitive class; classes outside the scheme are ignored.
pub fn make_bags_labels(labels: &LabelMap, boundary: &[bool], scheme: LabelScheme) -> BagsLabelMap {
    assert_eq!(labels.len(), boundary.len(), "boundary mask size mismatch");
    let idx = |l: BagsLabel| BagsCell::Label(scheme.index_of(l).expect("label in scheme") as u8);
    let cells = labels
        .class
        .iter()
        .zip(boundary)
        .map(|(&class, &b)| match class {
            SemanticClass::Invalid => BagsCell::Invalid,
            _ if b && scheme.has_boundary() => idx(BagsLabel::Boundary),
            SemanticClass::Other if scheme.has_other() => idx(BagsLabel::Other),
            SemanticClass::Other => BagsCell::Ignore,
            SemanticClass::Primitive(c) => idx(BagsLabel::Primitive(c)),
        })
        .collect();
    BagsLabelMap { scheme, width: labels.width, height: labels.height, cells }
}
