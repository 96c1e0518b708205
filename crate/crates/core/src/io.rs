//! Text formats for point sets and strip witnesses.
//!
//! A point set is a CSV file with one `x,y` row per point, each field either
//! `num/den` or a decimal literal, after an optional header
//! `# role=OnLine|OnStrip|Free u=<rational>`. Written files always use
//! `num/den` (or plain integers), so reading them back is exact.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::float::FloatPoint;
use crate::geometry::{squared_distance, Point, PointSet, Role, StripWitness};
use crate::rat::{parse_rat, Rat};

pub fn write_point_set(ps: &PointSet) -> String {
    let mut out = format!("# role={} u={}\n", ps.role().as_str(), ps.spacing_u());
    for p in ps.iter() {
        let _ = writeln!(out, "{},{}", p.x, p.y);
    }
    out
}

/// Floating point sets are written with the shortest decimal that reads
/// back as the same `f64`.
pub fn write_float_points(pts: &[FloatPoint]) -> String {
    let mut out = String::from("# role=Free u=0\n");
    for p in pts {
        let _ = writeln!(out, "{},{}", p.x, p.y);
    }
    out
}

fn fields(line: &str, lineno: usize, want: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split(',').map(str::trim).collect();
    if f.len() != want {
        return Err(Error::Parse { line: lineno, msg: format!("expected {want} fields, found {}", f.len()) });
    }
    Ok(f)
}

fn field_rat(s: &str, lineno: usize) -> Result<Rat> {
    parse_rat(s).map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })
}

/// Parse a point set; without a header the set is `Free` with `u = 0`.
pub fn parse_point_set(text: &str) -> Result<PointSet> {
    let mut role = Role::Free;
    let mut u = Rat::from_integer(0.into());
    let mut pts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if pts.is_empty() {
                for tok in rest.split_whitespace() {
                    match tok.split_once('=') {
                        Some(("role", v)) => {
                            role = v.parse().map_err(|e: Error| Error::Parse { line: lineno, msg: e.to_string() })?
                        }
                        Some(("u", v)) => u = field_rat(v, lineno)?,
                        _ => {}
                    }
                }
            }
            continue;
        }
        let f = fields(line, lineno, 2)?;
        pts.push(Point::new(field_rat(f[0], lineno)?, field_rat(f[1], lineno)?));
    }
    PointSet::new(pts, role, u)
}

pub fn write_witnesses(wits: &[StripWitness]) -> String {
    let mut out = String::from("# px,py,pstar_x,pstar_y\n");
    for w in wits {
        let _ = writeln!(out, "{},{},{},{}", w.p.x, w.p.y, w.p_star.x, w.p_star.y);
    }
    out
}

pub fn parse_witnesses(text: &str) -> Result<Vec<StripWitness>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f = fields(line, i + 1, 4)?;
        let r = |k: usize| field_rat(f[k], i + 1);
        let p = Point::new(r(0)?, r(1)?);
        let p_star = Point::new(r(2)?, r(3)?);
        let dist_sq = squared_distance(&p, &p_star);
        out.push(StripWitness { p, p_star, dist_sq });
    }
    Ok(out)
}
