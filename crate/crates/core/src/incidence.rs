//! Proximity energy as a point-curve incidence count.
//!
//! A quadruple `(a, b, p, q)` with `a, b` on the x-axis has `|ap| = |bq|`
//! exactly when the point `(a_x, b_x)` lies on the curve
//! `(x - p_x)^2 + p_y^2 = (y - q_x)^2 + q_y^2`. Taking points from the close
//! pairs of `P1` and curves from the close pairs of `P2` with
//! `p_y != +-q_y` (the other pairs give reducible curves), the incidences
//! plus the quadruples with `p_y = +-q_y` are exactly `E_t`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{rank_indices, PointSet};
use crate::rat::{self, Rat};
use crate::scaled::{self, with_scaled, Exact, ScaledSets};
use crate::stats::{rank_limits, DistanceTable};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IncidencePoint {
    pub u: Rat,
    pub v: Rat,
    /// Indices of `(a, b)` in `P1`.
    pub source: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IncidenceCurve {
    pub px: Rat,
    pub py: Rat,
    pub qx: Rat,
    pub qy: Rat,
    /// Indices of `(p, q)` in `P2`.
    pub source: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct IncidenceSystem {
    pub t: Rat,
    pub m: usize,
    pub n: usize,
    pub points: Vec<IncidencePoint>,
    pub curves: Vec<IncidenceCurve>,
    pub incidences: u128,
    pub degenerate_quadruples: u128,
}

/// `(u - p_x)^2 + p_y^2 = (v - q_x)^2 + q_y^2`, exactly.
pub fn on_curve(pt: &IncidencePoint, c: &IncidenceCurve) -> bool {
    let l = (&pt.u - &c.px) * (&pt.u - &c.px) + &c.py * &c.py;
    let r = (&pt.v - &c.qx) * (&pt.v - &c.qx) + &c.qy * &c.qy;
    l == r
}

fn close_pairs(ranks: &[usize], limit: u64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..ranks.len() {
        for j in 0..ranks.len() {
            if (ranks[i].abs_diff(ranks[j]) as u64) <= limit {
                out.push((i, j));
            }
        }
    }
    out
}

/// Build the points, curves and counts for parameter `t`.
pub fn build_system(p1: &PointSet, p2: &PointSet, t: &Rat) -> Result<IncidenceSystem> {
    let (m, n) = (p1.len(), p2.len());
    let one = rat::int(1);
    if t * rat::int(m as i64) < one || t * rat::int(n as i64) < one || *t > one {
        return Err(Error::Precondition(format!("need t m >= 1, t n >= 1 and t <= 1 (t = {t}, m = {m}, n = {n})")));
    }
    if !p1.lies_on_x_axis() {
        return Err(Error::Precondition("P1 must lie on the x-axis".into()));
    }
    let mut xs: Vec<&Rat> = p1.iter().map(|a| &a.x).collect();
    xs.sort();
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Precondition("P1 has repeated points".into()));
    }

    let (l1, l2) = rank_limits(t, m, n);
    let r1 = rank_indices(p1);
    let r2 = rank_indices(p2);
    let points: Vec<IncidencePoint> = close_pairs(r1.x_ranks(), l1)
        .into_iter()
        .map(|(a, b)| IncidencePoint { u: p1[a].x.clone(), v: p1[b].x.clone(), source: (a, b) })
        .collect();
    let curves: Vec<IncidenceCurve> = close_pairs(r2.y_ranks(), l2)
        .into_iter()
        .filter(|&(p, q)| p2[p].y.abs() != p2[q].y.abs())
        .map(|(p, q)| IncidenceCurve {
            px: p2[p].x.clone(),
            py: p2[p].y.clone(),
            qx: p2[q].x.clone(),
            qy: p2[q].y.clone(),
            source: (p, q),
        })
        .collect();

    let incidences = with_scaled!(scaled::scale(&[p1.points(), p2.points()]), s => count_incidences(&s, &points, &curves));

    let table = DistanceTable::new(p1, p2);
    let degenerate_quadruples = (0..table.num_distances())
        .into_par_iter()
        .map(|g| table.proximity_energy_at(g, t).1)
        .sum();

    Ok(IncidenceSystem { t: t.clone(), m, n, points, curves, incidences, degenerate_quadruples })
}

/// For each curve and each distinct `u`, solve for `v` and look the result up
/// among the points.
fn count_incidences<T: Exact>(s: &ScaledSets<T>, points: &[IncidencePoint], curves: &[IncidenceCurve]) -> u128 {
    let (a_pts, p_pts) = (&s.sets[0], &s.sets[1]);
    let mut rows: HashMap<usize, HashSet<&T>> = HashMap::new();
    for pt in points {
        rows.entry(pt.source.0).or_default().insert(&a_pts[pt.source.1].0);
    }
    let rows: Vec<(&T, HashSet<&T>)> = rows.into_iter().map(|(a, set)| (&a_pts[a].0, set)).collect();

    curves
        .par_iter()
        .map(|c| {
            let (px, py) = &p_pts[c.source.0];
            let (qx, qy) = &p_pts[c.source.1];
            let shift = py.clone() * py.clone() - qy.clone() * qy.clone();
            let mut hits = 0u128;
            for (u, vs) in &rows {
                let du = (*u).clone() - px.clone();
                let rhs = du.clone() * du + shift.clone();
                if rhs.is_negative() {
                    continue;
                }
                let r = rhs.sqrt();
                if r.clone() * r.clone() != rhs {
                    continue;
                }
                let plus = qx.clone() + r.clone();
                hits += vs.contains(&plus) as u128;
                if !r.is_zero() {
                    let minus = qx.clone() - r;
                    hits += vs.contains(&minus) as u128;
                }
            }
            hits
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveCollision {
    pub first: (usize, usize),
    pub second: (usize, usize),
}

/// Check that no two curves share the coefficients
/// `(-2 p_x, 2 q_x, p_x^2 + p_y^2 - q_x^2 - q_y^2)`.
pub fn check_curve_distinctness(curves: &[IncidenceCurve]) -> std::result::Result<(), CurveCollision> {
    let mut seen: HashMap<(Rat, Rat, Rat), (usize, usize)> = HashMap::new();
    for c in curves {
        let key = (
            -rat::int(2) * &c.px,
            rat::int(2) * &c.qx,
            &c.px * &c.px + &c.py * &c.py - &c.qx * &c.qx - &c.qy * &c.qy,
        );
        if let Some(&first) = seen.get(&key) {
            if first != c.source {
                return Err(CurveCollision { first, second: c.source });
            }
        } else {
            seen.insert(key, c.source);
        }
    }
    Ok(())
}

/// `t^(15/11) m^(12/11) n^(18/11 + eta) + t^(4/3) m^(4/3) n^(4/3) + t m^2 + t n^2`,
/// with every hidden constant set to 1.
pub fn sz_bound(t: f64, m: f64, n: f64, eta: f64) -> f64 {
    t.powf(15.0 / 11.0) * m.powf(12.0 / 11.0) * n.powf(18.0 / 11.0 + eta)
        + t.powf(4.0 / 3.0) * m.powf(4.0 / 3.0) * n.powf(4.0 / 3.0)
        + t * m * m
        + t * n * n
}

impl IncidenceSystem {
    /// `3 t m^2`.
    pub fn points_bound(&self) -> Rat {
        rat::int(3) * &self.t * rat::int((self.m * self.m) as i64)
    }

    /// `3 t n^2`.
    pub fn curves_bound(&self) -> Rat {
        rat::int(3) * &self.t * rat::int((self.n * self.n) as i64)
    }

    pub fn total(&self) -> u128 {
        self.incidences + self.degenerate_quadruples
    }

    /// Curves section then points section, coordinates as exact rationals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# curves: px,py,qx,qy\n");
        for c in &self.curves {
            let _ = writeln!(out, "{},{},{},{}", c.px, c.py, c.qx, c.qy);
        }
        out.push_str("# points: u,v\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.u, p.v);
        }
        out
    }

    pub fn report(&self, proximity_energy: u128, eta: f64) -> IncidenceReport {
        let t = rat::to_f64(&self.t);
        let (m, n) = (self.m as f64, self.n as f64);
        IncidenceReport {
            t: self.t.clone(),
            m: self.m,
            n: self.n,
            points: self.points.len(),
            curves: self.curves.len(),
            incidences: self.incidences,
            degenerate_quadruples: self.degenerate_quadruples,
            proximity_energy,
            reconciled: self.total() == proximity_energy,
            points_bound: rat::to_f64(&self.points_bound()),
            curves_bound: rat::to_f64(&self.curves_bound()),
            degenerate_bound: 4 * (self.m * self.n) as u128,
            eta,
            sz_bound: sz_bound(t, m, n, eta),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IncidenceReport {
    #[serde(with = "rat::serde_rat")]
    pub t: Rat,
    pub m: usize,
    pub n: usize,
    pub points: usize,
    pub curves: usize,
    pub incidences: u128,
    pub degenerate_quadruples: u128,
    pub proximity_energy: u128,
    pub reconciled: bool,
    pub points_bound: f64,
    pub curves_bound: f64,
    pub degenerate_bound: u128,
    pub eta: f64,
    pub sz_bound: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Role};
    use crate::rat::{int, rat};
    use crate::stats::proximity_energy;

    fn curve(p: (i64, i64), q: (i64, i64)) -> IncidenceCurve {
        IncidenceCurve { px: int(p.0), py: int(p.1), qx: int(q.0), qy: int(q.1), source: (0, 1) }
    }

    fn ipt(u: i64, v: i64) -> IncidencePoint {
        IncidencePoint { u: int(u), v: int(v), source: (0, 0) }
    }

    #[test]
    fn on_curve_examples() {
        let c = curve((0, 3), (0, 4));
        assert!(on_curve(&ipt(4, 3), &c));
        assert!(!on_curve(&ipt(0, 0), &c));
    }

    #[test]
    fn reflection_example() {
        let p1 = PointSet::on_line([int(4), int(3)]).unwrap();
        let p2 = PointSet::free(vec![Point::from_ints(0, 3), Point::from_ints(0, 4)]).unwrap();
        let sys = build_system(&p1, &p2, &int(1)).unwrap();
        assert_eq!(sys.curves.len(), 2);
        assert!(sys.points.iter().any(|p| p.u == int(4) && p.v == int(3)));
        let e = proximity_energy(&p1, &p2, &int(1)).unwrap();
        assert_eq!(sys.total(), e.energy);
        // |(4,0)(0,3)| = |(3,0)(0,4)| = 5 and the reverse: two incidences.
        assert_eq!(sys.incidences, 2);
    }

    #[test]
    fn reconciles_on_a_lattice() {
        let p1 = PointSet::on_line((1..=6).map(int)).unwrap();
        let pts = (1..=6).map(|i| Point::from_ints(i, i)).collect();
        let p2 = PointSet::new(pts, Role::OnStrip, int(1)).unwrap();
        for t in [rat(1, 6), rat(1, 3), rat(1, 2), int(1)] {
            let sys = build_system(&p1, &p2, &t).unwrap();
            let e = proximity_energy(&p1, &p2, &t).unwrap();
            assert_eq!(sys.total(), e.energy, "t = {t}");
            // Distinct |y| values: only p = q is degenerate.
            assert_eq!(sys.degenerate_quadruples, e.degenerate_count);
            assert!(rat::int(sys.points.len() as i64) <= sys.points_bound());
            assert!(rat::int(sys.curves.len() as i64) <= sys.curves_bound());
            assert!(check_curve_distinctness(&sys.curves).is_ok());
        }
    }

    #[test]
    fn rejects_small_t() {
        let p1 = PointSet::on_line([int(1), int(2)]).unwrap();
        let p2 = PointSet::free(vec![Point::from_ints(0, 1)]).unwrap();
        assert!(matches!(build_system(&p1, &p2, &rat(1, 2)), Err(Error::Precondition(_))));
    }

    #[test]
    fn swapped_sources_are_distinct() {
        let a = IncidenceCurve { source: (0, 1), ..curve((0, 3), (5, 4)) };
        let b = IncidenceCurve { source: (1, 0), ..curve((5, 4), (0, 3)) };
        assert!(check_curve_distinctness(&[a.clone(), b]).is_ok());
        let c = IncidenceCurve { source: (2, 3), ..a.clone() };
        assert!(check_curve_distinctness(&[a, c]).is_err());
    }

    #[test]
    fn sz_examples() {
        assert!((sz_bound(1.0, 1.0, 1.0, 0.1) - 4.0).abs() < 1e-12);
        // With m = n and t = 1 the first term dominates for large n.
        let n: f64 = 1e16;
        let first = n.powf(30.0 / 11.0 + 0.1);
        assert!(sz_bound(1.0, n, n, 0.1) / first < 1.01);
    }
}
