use crate::range_image::{NormalMap, RangeImage};
use crate::Vec3;

/// Image provenance of every point, for 8-connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid {
    pub width: usize,
    pub height: usize,
    /// Pixel index of each point.
    pub pixel: Vec<u32>,
}

/// Points with unit normals, optionally tied to the pixels they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub grid: Option<PixelGrid>,
    /// Diameter of the whole scene this set was cut from; the sampling
    /// radius scales with it. `None` uses the set's own diameter.
    pub scene_diameter: Option<f64>,
}

impl PointSet {
    /// A free-floating set.
    ///
    /// # Panics
    /// When the two vectors differ in length.
    pub fn new(points: Vec<Vec3>, normals: Vec<Vec3>) -> Self {
        assert_eq!(points.len(), normals.len(), "one normal per point");
        Self { points, normals, grid: None, scene_diameter: None }
    }

    /// World-frame points and normals of the selected pixels that have both a
    /// depth and a normal. `pixels = None` takes the whole image.
    pub fn from_scan(img: &RangeImage, normals: &NormalMap, pixels: Option<&[u32]>) -> Self {
        let rot = img.camera_pose.rotation;
        let mut out = Self {
            points: Vec::new(),
            normals: Vec::new(),
            grid: Some(PixelGrid { width: img.width, height: img.height, pixel: Vec::new() }),
            scene_diameter: Some(scan_diameter(img)),
        };
        let mut take = |i: usize| {
            if let (Some(p), Some(n)) = (img.world_point(i), normals.normals[i]) {
                out.points.push(p);
                out.normals.push(rot * n);
                out.grid.as_mut().expect("grid").pixel.push(i as u32);
            }
        };
        match pixels {
            Some(sel) => sel.iter().for_each(|&i| take(i as usize)),
            None => (0..img.len()).for_each(&mut take),
        }
        out
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pixel of point `i`, when known.
    pub fn pixel_of(&self, i: usize) -> Option<u32> {
        self.grid.as_ref().map(|g| g.pixel[i])
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn diameter(&self) -> f64 {
        bbox_diagonal(self.points.iter())
    }

    /// Length the sampling radius is a fraction of.
    pub fn reference_diameter(&self) -> f64 {
        self.scene_diameter.unwrap_or_else(|| self.diameter())
    }
}

/// Bounding-box diagonal of every valid world point of a scan.
pub fn scan_diameter(img: &RangeImage) -> f64 {
    let pts: Vec<Vec3> = (0..img.len()).filter_map(|i| img.world_point(i)).collect();
    bbox_diagonal(pts.iter())
}

fn bbox_diagonal<'a>(mut it: impl Iterator<Item = &'a Vec3>) -> f64 {
    let Some(first) = it.next() else { return 0.0 };
    let (lo, hi) = it.fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    (hi - lo).norm()
}
