//! Floating-point backend for constructions with irrational coordinates.
//!
//! Squared distances are sorted and split wherever two consecutive values
//! differ by more than `tau` relative; each run is one distance class.

use serde::Serialize;

/// Default relative grouping tolerance.
pub const TAU: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FloatPoint {
    pub x: f64,
    pub y: f64,
}

impl FloatPoint {
    pub fn new(x: f64, y: f64) -> Self {
        FloatPoint { x, y }
    }

    pub fn squared_distance(&self, other: &FloatPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// One class of nearly equal squared distances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloatClass {
    /// Smallest and largest member.
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloatProfile {
    pub classes: Vec<FloatClass>,
    pub m: usize,
    pub n: usize,
}

impl FloatProfile {
    pub fn num_distances(&self) -> usize {
        self.classes.len()
    }

    pub fn energy(&self) -> u128 {
        self.classes.iter().map(|c| (c.count as u128).pow(2)).sum()
    }
}

pub fn float_profile(p1: &[FloatPoint], p2: &[FloatPoint], tau: f64) -> FloatProfile {
    let mut d: Vec<f64> = p1
        .iter()
        .flat_map(|a| p2.iter().map(move |p| a.squared_distance(p)))
        .collect();
    d.sort_by(f64::total_cmp);
    let mut classes: Vec<FloatClass> = Vec::new();
    for v in d {
        match classes.last_mut() {
            Some(c) if v - c.hi <= tau * v.abs().max(c.hi.abs()) => {
                c.hi = v;
                c.count += 1;
            }
            _ => classes.push(FloatClass { lo: v, hi: v, count: 1 }),
        }
    }
    FloatProfile { classes, m: p1.len(), n: p2.len() }
}
