//! Scene description and its text format.
//!
//! ```text
//! # comment
//! room <min_x> <min_y> <min_z> <max_x> <max_y> <max_z>
//! table <id>
//! plane    <id> <nx> <ny> <nz> <d> rect <cx> <cy> <cz> <ux> <uy> <uz> <half_u> <half_v>
//! plane    <id> <nx> <ny> <nz> <d> disk <cx> <cy> <cz> <radius>
//! sphere   <id> <cx> <cy> <cz> <r> full
//! cylinder <id> <px> <py> <pz> <dx> <dy> <dz> <r> span <t_min> <t_max>
//! cone     <id> <ax> <ay> <az> <dx> <dy> <dz> <half_angle> span <h_min> <h_max>
//! other    <id> patch <ox> <oy> <oz> <ux> <uy> <uz> <vx> <vy> <vz> <size_u> <size_v> <h00> <h01> … <h33>
//! ```
//!
//! One instance per line. Numbers are written in shortest round-trip form,
//! so `parse(format(s)) == s` bit for bit. Angles are radians.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geom::{Cone, Cylinder, Plane, Sphere};
use crate::range_image::SemanticClass;
use crate::Vec3;

use super::patch::BezierPatch;
use super::shapes::{Aabb, Shape};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// Unique, contiguous from 1 in list order.
    pub id: u32,
    pub shape: Shape,
}

impl Instance {
    pub fn class(&self) -> SemanticClass {
        self.shape.semantic_class()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDescription {
    pub room: Option<Aabb>,
    pub instances: Vec<Instance>,
    /// Id of the table-top plane instance.
    pub table: Option<u32>,
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct SceneParseError {
    pub line: usize,
    pub message: String,
}

impl SceneDescription {
    pub fn empty() -> Self {
        Self { room: None, instances: Vec::new(), table: None }
    }

    /// Appends a shape with the next free id and returns that id.
    pub fn push(&mut self, shape: Shape) -> u32 {
        let id = self.instances.len() as u32 + 1;
        self.instances.push(Instance { id, shape });
        id
    }

    pub fn instance(&self, id: u32) -> Option<&Instance> {
        id.checked_sub(1).and_then(|i| self.instances.get(i as usize)).filter(|inst| inst.id == id)
    }

    pub fn table_center(&self) -> Option<Vec3> {
        match &self.instance(self.table?)?.shape {
            Shape::Rect { center, .. } | Shape::Disk { center, .. } => Some(*center),
            _ => None,
        }
    }

    pub fn ids_are_contiguous(&self) -> bool {
        self.instances.iter().enumerate().all(|(i, inst)| inst.id == i as u32 + 1)
    }

    /// Every instance's bounded extent lies inside the room (with `tol`).
    pub fn fits_in_room(&self, tol: f64) -> bool {
        match &self.room {
            None => true,
            Some(room) => self.instances.iter().all(|i| room.contains_box(&i.shape.aabb(), tol)),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# primfit scene v1\n");
        if let Some(r) = &self.room {
            let _ = writeln!(s, "room {:?} {:?} {:?} {:?} {:?} {:?}", r.min.x, r.min.y, r.min.z, r.max.x, r.max.y, r.max.z);
        }
        if let Some(t) = self.table {
            let _ = writeln!(s, "table {t}");
        }
        for inst in &self.instances {
            let id = inst.id;
            let line = match &inst.shape {
                Shape::Rect { plane, center, u_axis, half_u, half_v } => format!(
                    "plane {id} {} rect {} {} {:?} {:?}",
                    plane_fields(plane),
                    vec(center),
                    vec(u_axis),
                    half_u,
                    half_v
                ),
                Shape::Disk { plane, center, radius } => {
                    format!("plane {id} {} disk {} {:?}", plane_fields(plane), vec(center), radius)
                }
                Shape::Sphere(sp) => format!("sphere {id} {} {:?} full", vec(&sp.center), sp.radius),
                Shape::Cylinder { model, t_min, t_max } => format!(
                    "cylinder {id} {} {} {:?} span {:?} {:?}",
                    vec(&model.axis_point),
                    vec(&model.axis_dir),
                    model.radius,
                    t_min,
                    t_max
                ),
                Shape::Cone { model, h_min, h_max } => format!(
                    "cone {id} {} {} {:?} span {:?} {:?}",
                    vec(&model.apex),
                    vec(&model.axis_dir),
                    model.half_angle,
                    h_min,
                    h_max
                ),
                Shape::Patch(p) => {
                    let mut l = format!(
                        "other {id} patch {} {} {} {:?} {:?}",
                        vec(&p.origin),
                        vec(&p.u_axis),
                        vec(&p.v_axis),
                        p.size_u,
                        p.size_v
                    );
                    for h in p.heights.iter().flatten() {
                        let _ = write!(l, " {h:?}");
                    }
                    l
                }
            };
            s.push_str(&line);
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, SceneParseError> {
        let mut scene = Self::empty();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |message: String| SceneParseError { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let mut tok = Tokens { it: raw.split_whitespace(), line };
            let kind = tok.word()?;
            match kind {
                "room" => {
                    let min = tok.vec()?;
                    let max = tok.vec()?;
                    scene.room = Some(Aabb { min, max });
                }
                "table" => scene.table = Some(tok.id()?),
                "plane" | "sphere" | "cylinder" | "cone" | "other" => {
                    let id = tok.id()?;
                    if id as usize != scene.instances.len() + 1 {
                        return Err(err(format!("instance id {id} is not the next contiguous id")));
                    }
                    let shape = parse_shape(kind, &mut tok)?;
                    scene.instances.push(Instance { id, shape });
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
            tok.finish()?;
        }
        if let Some(t) = scene.table {
            if scene.instance(t).is_none() {
                return Err(SceneParseError { line: 0, message: format!("table id {t} does not name an instance") });
            }
        }
        Ok(scene)
    }
}

fn vec(v: &Vec3) -> String {
    format!("{:?} {:?} {:?}", v.x, v.y, v.z)
}

fn plane_fields(p: &Plane) -> String {
    format!("{} {:?}", vec(&p.normal), p.offset)
}

struct Tokens<'a> {
    it: std::str::SplitWhitespace<'a>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn err(&self, message: String) -> SceneParseError {
        SceneParseError { line: self.line, message }
    }

    fn word(&mut self) -> Result<&'a str, SceneParseError> {
        self.it.next().ok_or_else(|| self.err("unexpected end of line".into()))
    }

    fn keyword(&mut self, expected: &str) -> Result<(), SceneParseError> {
        let w = self.word()?;
        if w != expected {
            return Err(self.err(format!("expected `{expected}`, found `{w}`")));
        }
        Ok(())
    }

    fn id(&mut self) -> Result<u32, SceneParseError> {
        let w = self.word()?;
        w.parse().map_err(|_| self.err(format!("bad id `{w}`")))
    }

    fn num(&mut self) -> Result<f64, SceneParseError> {
        let w = self.word()?;
        match w.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(self.err(format!("bad number `{w}`"))),
        }
    }

    fn positive(&mut self) -> Result<f64, SceneParseError> {
        let x = self.num()?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(self.err(format!("expected a positive number, found {x}")))
        }
    }

    fn vec(&mut self) -> Result<Vec3, SceneParseError> {
        Ok(Vec3::new(self.num()?, self.num()?, self.num()?))
    }

    fn unit(&mut self) -> Result<Vec3, SceneParseError> {
        let v = self.vec()?;
        if (v.norm() - 1.0).abs() > 1e-9 {
            return Err(self.err("direction is not unit length".into()));
        }
        Ok(v)
    }

    fn finish(&mut self) -> Result<(), SceneParseError> {
        match self.it.next() {
            None => Ok(()),
            Some(w) => Err(self.err(format!("trailing token `{w}`"))),
        }
    }
}

fn parse_shape(kind: &str, tok: &mut Tokens<'_>) -> Result<Shape, SceneParseError> {
    Ok(match kind {
        "plane" => {
            let plane = Plane { normal: tok.unit()?, offset: tok.num()? };
            match tok.word()? {
                "rect" => Shape::Rect {
                    plane,
                    center: tok.vec()?,
                    u_axis: tok.unit()?,
                    half_u: tok.positive()?,
                    half_v: tok.positive()?,
                },
                "disk" => Shape::Disk { plane, center: tok.vec()?, radius: tok.positive()? },
                w => return Err(tok.err(format!("unknown plane extent `{w}`"))),
            }
        }
        "sphere" => {
            let s = Shape::Sphere(Sphere { center: tok.vec()?, radius: tok.positive()? });
            tok.keyword("full")?;
            s
        }
        "cylinder" => {
            let model = Cylinder { axis_point: tok.vec()?, axis_dir: tok.unit()?, radius: tok.positive()? };
            tok.keyword("span")?;
            let (t_min, t_max) = (tok.num()?, tok.num()?);
            if !(t_min < t_max) {
                return Err(tok.err("empty cylinder span".into()));
            }
            Shape::Cylinder { model, t_min, t_max }
        }
        "cone" => {
            let model = Cone { apex: tok.vec()?, axis_dir: tok.unit()?, half_angle: tok.positive()? };
            if model.half_angle >= std::f64::consts::FRAC_PI_2 {
                return Err(tok.err("cone half angle must be below pi/2".into()));
            }
            tok.keyword("span")?;
            let (h_min, h_max) = (tok.num()?, tok.num()?);
            if !(h_min >= 0.0 && h_min < h_max) {
                return Err(tok.err("cone span must satisfy 0 <= h_min < h_max".into()));
            }
            Shape::Cone { model, h_min, h_max }
        }
        "other" => {
            tok.keyword("patch")?;
            let origin = tok.vec()?;
            let u_axis = tok.unit()?;
            let v_axis = tok.unit()?;
            let (size_u, size_v) = (tok.positive()?, tok.positive()?);
            let mut heights = [[0.0; 4]; 4];
            for h in heights.iter_mut().flatten() {
                *h = tok.num()?;
            }
            Shape::Patch(BezierPatch { origin, u_axis, v_axis, size_u, size_v, heights })
        }
        _ => unreachable!(),
    })
}
