//! Exact planar primitives: points, validated point sets, spacing checks,
//! rank indices and strip membership.

use std::collections::HashMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::curve::CurveModel;
use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use crate::scaled::{self, with_scaled, Exact};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    #[serde(with = "rat::serde_rat")]
    pub x: Rat,
    #[serde(with = "rat::serde_rat")]
    pub y: Rat,
}

impl Point {
    pub fn new(x: Rat, y: Rat) -> Self {
        Point { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point::new(rat::int(x), rat::int(y))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (rat::to_f64(&self.x), rat::to_f64(&self.y))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// `|ap|^2`, exact.
pub fn squared_distance(a: &Point, p: &Point) -> Rat {
    let dx = &a.x - &p.x;
    let dy = &a.y - &p.y;
    &dx * &dx + &dy * &dy
}

/// What a point set is declared to be.
///
/// `Free` carries no geometric constraint; it exists for inputs such as the
/// orthogonal-axes construction whose points share an x-coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Every point lies on the x-axis.
    OnLine,
    /// Points lie in a strip around a curve `x = f(y)`; x-coordinates are
    /// pairwise distinct.
    OnStrip,
    Free,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::OnLine => "OnLine",
            Role::OnStrip => "OnStrip",
            Role::Free => "Free",
        }
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "OnLine" => Ok(Role::OnLine),
            "OnStrip" => Ok(Role::OnStrip),
            "Free" => Ok(Role::Free),
            other => Err(Error::InvalidPointSet(format!("unknown role `{other}`"))),
        }
    }
}

/// A validated, ordered set of points.
///
/// Construction rejects empty sets, duplicate points, `OnLine` sets with a
/// point off the x-axis, `OnStrip` sets with repeated x-coordinates, and sets
/// that are not `spacing_u`-spaced when `spacing_u > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<Point>,
    role: Role,
    spacing_u: Rat,
}

impl PointSet {
    pub fn new(points: Vec<Point>, role: Role, spacing_u: Rat) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidPointSet("empty point set".into()));
        }
        if spacing_u.is_negative() {
            return Err(Error::InvalidPointSet(format!("negative spacing {spacing_u}")));
        }

        let mut sorted: Vec<&Point> = points.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidPointSet(format!("duplicate point {}", w[0])));
        }
        match role {
            Role::OnLine => {
                if let Some(p) = points.iter().find(|p| !p.y.is_zero()) {
                    return Err(Error::InvalidPointSet(format!("{p} is not on the x-axis")));
                }
            }
            Role::OnStrip => {
                let mut xs: Vec<&Rat> = points.iter().map(|p| &p.x).collect();
                xs.sort();
                if let Some(w) = xs.windows(2).find(|w| w[0] == w[1]) {
                    return Err(Error::InvalidPointSet(format!(
                        "two strip points share x = {}",
                        w[0]
                    )));
                }
            }
            Role::Free => {}
        }

        let set = PointSet { points, role, spacing_u };
        if set.spacing_u.is_positive() {
            if let Err(v) = check_u_spaced(&set, &set.spacing_u) {
                return Err(Error::InvalidPointSet(format!(
                    "not {}-spaced: {} and {} are at squared distance {}",
                    set.spacing_u,
                    v.a,
                    v.b,
                    squared_distance(&v.a, &v.b)
                )));
            }
        }
        Ok(set)
    }

    /// Points `(x, 0)` for the given abscissae, with no declared spacing.
    pub fn on_line(xs: impl IntoIterator<Item = Rat>) -> Result<Self> {
        let pts = xs.into_iter().map(|x| Point::new(x, Rat::zero())).collect();
        PointSet::new(pts, Role::OnLine, Rat::zero())
    }

    pub fn free(points: Vec<Point>) -> Result<Self> {
        PointSet::new(points, Role::Free, Rat::zero())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn spacing_u(&self) -> &Rat {
        &self.spacing_u
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    /// True if every point has `y = 0`, whatever the declared role.
    pub fn lies_on_x_axis(&self) -> bool {
        self.points.iter().all(|p| p.y.is_zero())
    }
}

impl std::ops::Index<usize> for PointSet {
    type Output = Point;

    fn index(&self, i: usize) -> &Point {
        &self.points[i]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpacingViolation {
    pub i: usize,
    pub j: usize,
    pub a: Point,
    pub b: Point,
}

/// Passes iff every pair of distinct points is at distance at least `u`.
///
/// On failure returns the violating pair `(i, j)`, `i < j`, that comes first in
/// lexicographic index order.
pub fn check_u_spaced(ps: &PointSet, u: &Rat) -> std::result::Result<(), SpacingViolation> {
    // The spacing is appended as an extra "point" so its denominator joins the
    // common scale.
    let probe = [Point::new(u.clone(), Rat::zero())];
    let found = with_scaled!(scaled::scale(&[ps.points(), &probe]), s => first_violation(&s.sets[0], &s.sets[1][0].0));
    match found {
        None => Ok(()),
        Some((i, j)) => Err(SpacingViolation {
            i,
            j,
            a: ps[i].clone(),
            b: ps[j].clone(),
        }),
    }
}

fn first_violation<T: Exact>(pts: &[(T, T)], u: &T) -> Option<(usize, usize)> {
    let u2 = u.clone() * u.clone();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| pts[i].0.cmp(&pts[j].0));
    let mut best: Option<(usize, usize)> = None;
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if pts[j].0.clone() - pts[i].0.clone() >= *u {
                break;
            }
            if scaled::sq_dist(&pts[i], &pts[j]) < u2 {
                let pair = (i.min(j), i.max(j));
                if best.is_none_or(|b| pair < b) {
                    best = Some(pair);
                }
            }
        }
    }
    best
}

/// The x-rank `i_1` and y-rank `i_2` of every point, both 1-based.
///
/// `by_x` sorts by `(x, y, input position)` and `by_y` by `(y, x, input
/// position)`; both are bijections onto `1..=len`.
#[derive(Clone, Debug)]
pub struct RankIndex {
    by_x: Vec<usize>,
    by_y: Vec<usize>,
    position: HashMap<Point, usize>,
}

impl RankIndex {
    /// Rank of the point at input position `i` in x-order.
    pub fn x_rank(&self, i: usize) -> usize {
        self.by_x[i]
    }

    pub fn y_rank(&self, i: usize) -> usize {
        self.by_y[i]
    }

    pub fn x_rank_of(&self, p: &Point) -> Option<usize> {
        self.position.get(p).map(|&i| self.by_x[i])
    }

    pub fn y_rank_of(&self, p: &Point) -> Option<usize> {
        self.position.get(p).map(|&i| self.by_y[i])
    }

    pub fn x_ranks(&self) -> &[usize] {
        &self.by_x
    }

    pub fn y_ranks(&self) -> &[usize] {
        &self.by_y
    }
}

pub fn rank_indices(ps: &PointSet) -> RankIndex {
    let pts = ps.points();
    let ranks = |by_y: bool| {
        let key = |i: usize| if by_y { (&pts[i].y, &pts[i].x) } else { (&pts[i].x, &pts[i].y) };
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by(|&i, &j| key(i).cmp(&key(j)).then(i.cmp(&j)));
        let mut rank = vec![0; pts.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r + 1;
        }
        rank
    };
    RankIndex {
        by_x: ranks(false),
        by_y: ranks(true),
        position: pts.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect(),
    }
}

/// A point on the curve `x = f(y)` within distance `w` of a strip point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripWitness {
    pub p: Point,
    pub p_star: Point,
    #[serde(with = "rat::serde_rat")]
    pub dist_sq: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StripMembership {
    Member(StripWitness),
    /// No grid point of the curve came within `w`. This is a one-sided
    /// answer: a finer grid might still find a witness.
    NonMember,
}

/// Search the curve for a point within `w` of `p`.
///
/// Candidate heights are `p.y + i * grid_step` for `|i * grid_step| <= w`, which
/// is enough because `|pp*| <= w` forces `|p_y - p*_y| <= w`. The closest
/// candidate is returned when it is within `w`.
pub fn strip_membership(p: &Point, curve: &CurveModel, w: &Rat, grid_step: &Rat) -> Result<StripMembership> {
    if !grid_step.is_positive() {
        return Err(Error::Precondition("grid_step must be positive".into()));
    }
    let k = rat::floor(&(w / grid_step));
    let k: i64 = num_traits::ToPrimitive::to_i64(&k)
        .ok_or_else(|| Error::Precondition("w / grid_step is too large".into()))?;
    let w2 = w * w;
    let mut best: Option<(Rat, Point)> = None;
    for i in -k..=k {
        let y = &p.y + grid_step * rat::int(i);
        let x = curve.eval_exact_or_snapped(&y);
        let cand = Point::new(x, y);
        let d = squared_distance(p, &cand);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, cand));
        }
    }
    Ok(match best {
        Some((d, p_star)) if d <= w2 => StripMembership::Member(StripWitness {
            p: p.clone(),
            p_star,
            dist_sq: d,
        }),
        _ => StripMembership::NonMember,
    })
}
