//! Text format for the detections of one scan.
//!
//! ```text
//! # primfit detections v1
//! <class> <params...> | <start>-<end> <start>-<end> ...
//! ```
//!
//! Parameters follow `PrimitiveModel::params`; the inliers are pixel
//! indices written as inclusive runs.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use primfit::geom::{PrimitiveClass, PrimitiveModel};
use primfit::ransac::Candidate;

const HEADER: &str = "# primfit detections v1";

pub fn to_text(cands: &[Candidate]) -> String {
    let mut s = String::from(HEADER);
    s.push('\n');
    for c in cands {
        s.push_str(c.model.class().short());
        for p in c.model.params() {
            let _ = write!(s, " {p:?}");
        }
        s.push_str(" |");
        for (a, b) in runs(&c.inliers) {
            let _ = write!(s, " {a}-{b}");
        }
        s.push('\n');
    }
    s
}

fn runs(sorted: &[u32]) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for &i in sorted {
        match out.last_mut() {
            Some((_, b)) if *b + 1 == i => *b = i,
            _ => out.push((i, i)),
        }
    }
    out
}

pub fn from_text(text: &str) -> Result<Vec<Candidate>> {
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, l)| l.trim()) != Some(HEADER) {
        bail!("line 1: missing `{HEADER}` header");
    }
    let mut out = Vec::new();
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = || -> Result<Candidate> {
            let (head, tail) = line.split_once('|').ok_or_else(|| anyhow!("missing `|`"))?;
            let mut f = head.split_whitespace();
            let name = f.next().ok_or_else(|| anyhow!("missing class"))?;
            let class = PrimitiveClass::ALL
                .into_iter()
                .find(|c| c.short() == name)
                .ok_or_else(|| anyhow!("unknown class `{name}`"))?;
            let params = f.map(str::parse::<f64>).collect::<Result<Vec<_>, _>>()?;
            let model = PrimitiveModel::from_params(class, &params)?;
            let mut inliers = Vec::new();
            for r in tail.split_whitespace() {
                let (a, b) = r.split_once('-').ok_or_else(|| anyhow!("bad run `{r}`"))?;
                let (a, b): (u32, u32) = (a.parse()?, b.parse()?);
                if b < a || inliers.last().is_some_and(|&l| l >= a) {
                    bail!("runs must ascend");
                }
                inliers.extend(a..=b);
            }
            Ok(Candidate { model, score: inliers.len(), inliers })
        };
        out.push(parse().map_err(|e| anyhow!("line {}: {e}", n + 1))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use primfit::geom::{Cone, Sphere};
    use primfit::Vec3;

    use super::*;

    #[test]
    fn round_trip() {
        let cands = vec![
            Candidate {
                model: Sphere::new(Vec3::new(0.1, -2.0, 1.0 / 3.0), 0.25).unwrap().into(),
                score: 5,
                inliers: vec![3, 4, 5, 9, 200],
            },
            Candidate {
                model: Cone::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.3, 0.1, -1.0), 0.4).unwrap().into(),
                score: 0,
                inliers: vec![],
            },
        ];
        let text = to_text(&cands);
        assert!(text.contains("3-5 9-9 200-200"));
        assert_eq!(from_text(&text).unwrap(), cands);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = from_text("# primfit detections v1\nSPH 0 0 0 1 | 1-2\nxyz 1 |\n").unwrap_err();
        assert!(err.to_string().starts_with("line 3"), "{err}");
    }
}
