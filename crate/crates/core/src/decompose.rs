//! Monotone decomposition of the pairs at one distance.
//!
//! Fix a squared distance `delta^2` and let `R` be the pairs `(a, p)` of
//! `P1 x P2` at that distance, with `P1` on the x-axis. Each pair has `a`
//! either right of `p` (the plus side, `a_x = p_x + sqrt(delta^2 - p_y^2)`) or
//! left of it (the minus side). On the larger side every pair is
//!
//! * **short** if `|p_y| <= w`,
//! * **steep** if not short and `p_y^2 >= 16 s^2 (delta^2 - p_y^2)`,
//! * **shallow** otherwise.
//!
//! Under the strip hypotheses there is at most one short pair, the steep
//! pairs with `p_y > 0` (and those with `p_y < 0`) are monotone in both `p_y`
//! and `a_x`, and the shallow pairs whose witnesses `p*` fall in one
//! monotone piece of the arc function are monotone as well. Every list built
//! here is re-checked before it is returned, so a hypothesis violation in
//! the input surfaces as [`Error::MonotonicityViolation`].

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{certify_niceness_f64, eval_phi, eval_psi, Arc, CurveModel, NicenessCertificate};
use crate::error::{Error, Result};
pub use crate::geometry::StripWitness;
use crate::geometry::{squared_distance, Point, PointSet};
use crate::rat::{self, Rat};
use crate::stats::DistanceTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    /// `a_x >= p_x`.
    Plus,
    /// `a_x < p_x`.
    Minus,
}

impl Side {
    fn arc(self) -> Arc {
        match self {
            Side::Plus => Arc::Phi,
            Side::Minus => Arc::Psi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    pub a_idx: usize,
    pub p_idx: usize,
    pub a: Point,
    pub p: Point,
    pub side: Side,
}

impl Pair {
    fn new(p1: &PointSet, p2: &PointSet, a_idx: usize, p_idx: usize) -> Self {
        let a = p1[a_idx].clone();
        let p = p2[p_idx].clone();
        // A vertical pair (a_x = p_x, |p_y| = delta) is on both sides; it is
        // kept on the plus side only.
        let side = if a.x >= p.x { Side::Plus } else { Side::Minus };
        Pair { a_idx, p_idx, a, p, side }
    }
}

/// The pairs at squared distance `delta_sq`, split by side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaPairs {
    pub delta_sq: Rat,
    pub plus: Vec<Pair>,
    pub minus: Vec<Pair>,
}

impl DeltaPairs {
    pub fn len(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The side the decomposition works on: the larger one, plus on ties.
    pub fn larger_side(&self) -> (Side, &[Pair]) {
        if self.plus.len() >= self.minus.len() {
            (Side::Plus, &self.plus)
        } else {
            (Side::Minus, &self.minus)
        }
    }

    /// Pairs of the `g`-th group of a distance table.
    pub fn from_table(table: &DistanceTable<'_>, g: usize) -> Result<Self> {
        require_axis(table.p1())?;
        let (plus, minus) = table
            .group(g)
            .iter()
            .map(|&(a, p)| Pair::new(table.p1(), table.p2(), a as usize, p as usize))
            .partition(|pr| pr.side == Side::Plus);
        Ok(DeltaPairs { delta_sq: table.keys()[g].clone(), plus, minus })
    }
}

fn require_axis(p1: &PointSet) -> Result<()> {
    if !p1.lies_on_x_axis() {
        return Err(Error::Precondition("P1 must lie on the x-axis".into()));
    }
    Ok(())
}

/// All pairs at squared distance `delta_sq`; both lists are empty when the
/// distance is not realized.
pub fn delta_pairs(p1: &PointSet, p2: &PointSet, delta_sq: &Rat) -> Result<DeltaPairs> {
    require_axis(p1)?;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for a in 0..p1.len() {
        for p in 0..p2.len() {
            if squared_distance(&p1[a], &p2[p]) == *delta_sq {
                let pair = Pair::new(p1, p2, a, p);
                match pair.side {
                    Side::Plus => plus.push(pair),
                    Side::Minus => minus.push(pair),
                }
            }
        }
    }
    Ok(DeltaPairs { delta_sq: delta_sq.clone(), plus, minus })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PairClass {
    Short,
    Steep,
    Shallow,
}

/// Classify `(a, p)` at squared distance `delta_sq`, exactly.
pub fn classify_pair(a: &Point, p: &Point, delta_sq: &Rat, w: &Rat, s: &Rat) -> Result<PairClass> {
    if !a.y.is_zero() {
        return Err(Error::Precondition(format!("{a} is not on the x-axis")));
    }
    if squared_distance(a, p) != *delta_sq {
        return Err(Error::Precondition(format!(
            "|ap|^2 = {} but delta^2 = {delta_sq}",
            squared_distance(a, p)
        )));
    }
    let py2 = &p.y * &p.y;
    if py2 <= w * w {
        return Ok(PairClass::Short);
    }
    let rhs = rat::int(16) * s * s * (delta_sq - &py2);
    Ok(if py2 >= rhs { PairClass::Steep } else { PairClass::Shallow })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum YSpacingBound {
    /// `|p_y - q_y| >= 16 w`
    VerticalGap,
    /// `|p_x - q_x| <= 2 s |p_y - q_y|`
    Slope,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YSpacingViolation {
    pub p: Point,
    pub q: Point,
    pub bound: YSpacingBound,
}

/// Check that every two strip points have `|p_y - q_y| >= 16w` and
/// `|p_x - q_x| <= 2s |p_y - q_y|`.
///
/// Both bounds only need checking between neighbours in y-order: the gap is
/// smallest there, and the slope between any two points is a weighted mean of
/// the slopes between the neighbours in between. A violation names the
/// lowest offending neighbours.
pub fn verify_y_spacing(p2: &PointSet, w: &Rat, s: &Rat) -> std::result::Result<(), YSpacingViolation> {
    let mut sorted: Vec<&Point> = p2.iter().collect();
    sorted.sort_by(|a, b| a.y.cmp(&b.y).then(a.x.cmp(&b.x)));
    let gap_min = rat::int(16) * w;
    let two_s = rat::int(2) * s;
    for win in sorted.windows(2) {
        let (p, q) = (win[0], win[1]);
        let dy = &q.y - &p.y;
        let bound = if dy < gap_min {
            Some(YSpacingBound::VerticalGap)
        } else if (&q.x - &p.x).abs() > &two_s * &dy {
            Some(YSpacingBound::Slope)
        } else {
            None
        };
        if let Some(bound) = bound {
            return Err(YSpacingViolation { p: p.clone(), q: q.clone(), bound });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Provenance {
    ShortSingleton,
    SteepPositive,
    SteepNegative,
    /// Shallow pairs whose witness height lies in the given piece of the arc
    /// partition.
    ShallowInterval(usize),
}

impl Provenance {
    pub fn tag(&self) -> String {
        match self {
            Provenance::ShortSingleton => "short".into(),
            Provenance::SteepPositive => "steep+".into(),
            Provenance::SteepNegative => "steep-".into(),
            Provenance::ShallowInterval(i) => format!("shallow[{i}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneList {
    pub provenance: Provenance,
    /// Sorted by increasing `p_y`.
    pub pairs: Vec<Pair>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub short: usize,
    pub steep: usize,
    pub shallow: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneCover {
    pub delta_sq: Rat,
    pub side: Side,
    pub counts: ClassCounts,
    /// Number of pieces of the arc partition used for the shallow pairs.
    pub k: usize,
    pub lists: Vec<MonotoneList>,
    pub covered: usize,
    /// `|R_delta|`, both sides.
    pub total: usize,
}

impl MonotoneCover {
    pub fn max_list_len(&self) -> usize {
        self.lists.iter().map(|l| l.pairs.len()).max().unwrap_or(0)
    }

    pub fn longest(&self) -> Option<&MonotoneList> {
        self.lists.iter().max_by_key(|l| (l.pairs.len(), std::cmp::Reverse(l.provenance)))
    }

    /// `max list length >= |R_delta| / max(12, 6k)`.
    pub fn meets_fraction_bound(&self, k: usize) -> bool {
        self.max_list_len() * 12.max(6 * k) >= self.total
    }
}

fn witness_for<'w>(witnesses: &'w [StripWitness], pair: &Pair) -> Result<&'w StripWitness> {
    let w = witnesses
        .get(pair.p_idx)
        .ok_or_else(|| Error::Precondition(format!("no witness for strip point #{}", pair.p_idx)))?;
    if w.p != pair.p {
        return Err(Error::Precondition(format!(
            "witness #{} belongs to {} not {}",
            pair.p_idx, w.p, pair.p
        )));
    }
    Ok(w)
}

/// Split the larger side of `dp` into lists monotone in both `p_y` and `a_x`.
///
/// `witnesses[i]` must be the witness of the `i`-th strip point and `cert` a
/// niceness certificate for `delta = sqrt(dp.delta_sq)`.
pub fn extract_monotone_cover(
    dp: &DeltaPairs,
    witnesses: &[StripWitness],
    cert: &NicenessCertificate,
    w: &Rat,
    s: &Rat,
) -> Result<MonotoneCover> {
    let delta = rat::to_f64(&dp.delta_sq).sqrt();
    if (cert.delta - delta).abs() > 1e-9 * delta.max(1.0) {
        return Err(Error::Precondition(format!(
            "certificate is for delta = {}, pairs are at delta = {delta}",
            cert.delta
        )));
    }
    let (side, pairs) = dp.larger_side();
    let arc = side.arc();

    let mut counts = ClassCounts::default();
    let mut short = Vec::new();
    let mut steep_pos = Vec::new();
    let mut steep_neg = Vec::new();
    let mut shallow: BTreeMap<usize, Vec<Pair>> = BTreeMap::new();
    for pair in pairs {
        match classify_pair(&pair.a, &pair.p, &dp.delta_sq, w, s)? {
            PairClass::Short => {
                counts.short += 1;
                short.push(pair.clone());
            }
            PairClass::Steep => {
                counts.steep += 1;
                if pair.p.y.is_positive() {
                    steep_pos.push(pair.clone());
                } else {
                    steep_neg.push(pair.clone());
                }
            }
            PairClass::Shallow => {
                counts.shallow += 1;
                let wit = witness_for(witnesses, pair)?;
                let piece = cert.piece(arc, rat::to_f64(&wit.p_star.y));
                shallow.entry(piece).or_default().push(pair.clone());
            }
        }
    }

    let mut lists: Vec<MonotoneList> = short
        .into_iter()
        .map(|p| MonotoneList { provenance: Provenance::ShortSingleton, pairs: vec![p] })
        .collect();
    for (provenance, mut v) in [(Provenance::SteepPositive, steep_pos), (Provenance::SteepNegative, steep_neg)]
        .into_iter()
        .chain(shallow.into_iter().map(|(i, v)| (Provenance::ShallowInterval(i), v)))
    {
        if v.is_empty() {
            continue;
        }
        v.sort_by(|x, y| x.p.y.cmp(&y.p.y));
        lists.push(MonotoneList { provenance, pairs: v });
    }

    for (li, list) in lists.iter().enumerate() {
        check_monotone(list).map_err(|(index, detail)| Error::MonotonicityViolation {
            delta_sq: dp.delta_sq.to_string(),
            list: li,
            tag: list.provenance.tag(),
            index,
            detail,
        })?;
    }

    let covered = lists.iter().map(|l| l.pairs.len()).sum();
    Ok(MonotoneCover {
        delta_sq: dp.delta_sq.clone(),
        side,
        counts,
        k: cert.partition(arc).len(),
        lists,
        covered,
        total: dp.len(),
    })
}

/// Strictly increasing `p_y`, weakly monotone `a_x`, along consecutive entries.
fn check_monotone(list: &MonotoneList) -> std::result::Result<(), (usize, String)> {
    let mut dir = 0i8;
    for (i, w) in list.pairs.windows(2).enumerate() {
        if w[1].p.y <= w[0].p.y {
            return Err((i + 1, format!("p_y does not increase: {} then {}", w[0].p.y, w[1].p.y)));
        }
        let step = match w[1].a.x.cmp(&w[0].a.x) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        };
        if step != 0 {
            if dir != 0 && step != dir {
                return Err((i + 1, format!("a_x reverses direction at {}", w[1].a.x)));
            }
            dir = step;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SteepOrderFailure {
    /// The list does not satisfy the preconditions (same sign of `p_y`,
    /// one side, strictly increasing `|p_y|`).
    Precondition(String),
    /// `a_x` fails to move strictly in the expected direction between
    /// entries `index - 1` and `index`.
    Counterexample { index: usize },
}

/// For steep pairs on one side whose `p_y` share a sign, sorted by increasing
/// `|p_y|`: on the plus side `a_x` must strictly decrease, on the minus side
/// strictly increase.
pub fn verify_steep_order(list: &[Pair]) -> std::result::Result<(), SteepOrderFailure> {
    let Some(first) = list.first() else {
        return Ok(());
    };
    let sign = first.p.y.signum();
    if sign.is_zero() {
        return Err(SteepOrderFailure::Precondition("p_y = 0 is never steep".into()));
    }
    for (i, pr) in list.iter().enumerate() {
        if pr.p.y.signum() != sign || pr.side != first.side {
            return Err(SteepOrderFailure::Precondition(format!("entry {i} has a different sign or side")));
        }
        if i > 0 && pr.p.y.abs() <= list[i - 1].p.y.abs() {
            return Err(SteepOrderFailure::Precondition(format!("|p_y| does not increase at entry {i}")));
        }
    }
    for i in 1..list.len() {
        let ok = match first.side {
            Side::Plus => list[i].a.x < list[i - 1].a.x,
            Side::Minus => list[i].a.x > list[i - 1].a.x,
        };
        if !ok {
            return Err(SteepOrderFailure::Counterexample { index: i });
        }
    }
    Ok(())
}

/// `13 w s - |a_x - phi_delta(p*_y)|` (with `psi_delta` on the minus side).
///
/// The witness height is clamped into `[-delta, delta]`; the bound holds for
/// the clamped value as well.
pub fn verify_shallow_wiggle(
    pair: &Pair,
    witness: &StripWitness,
    curve: &CurveModel,
    delta: f64,
    w: &Rat,
    s: &Rat,
) -> Result<f64> {
    let y = rat::to_f64(&witness.p_star.y).clamp(-delta, delta);
    let arc_x = match pair.side {
        Side::Plus => eval_phi(curve, delta, y)?,
        Side::Minus => eval_psi(curve, delta, y)?,
    };
    let budget = 13.0 * rat::to_f64(w) * rat::to_f64(s);
    Ok(budget - (rat::to_f64(&pair.a.x) - arc_x).abs())
}

/// Everything [`decompose_all`] needs besides the point sets.
#[derive(Clone, Debug)]
pub struct DecomposeContext<'c> {
    pub curve: &'c CurveModel,
    pub witnesses: &'c [StripWitness],
    pub w: Rat,
    pub s: Rat,
    /// Grid samples per niceness certificate.
    pub niceness_samples: usize,
}

/// Decompose one group of the table. A niceness certificate is only computed
/// when at least two shallow pairs need bucketing.
pub fn decompose_group(table: &DistanceTable<'_>, g: usize, ctx: &DecomposeContext<'_>) -> Result<MonotoneCover> {
    let dp = DeltaPairs::from_table(table, g)?;
    let delta = rat::to_f64(&dp.delta_sq).sqrt();
    let (_, side_pairs) = dp.larger_side();
    let mut shallow = 0;
    for pr in side_pairs {
        if classify_pair(&pr.a, &pr.p, &dp.delta_sq, &ctx.w, &ctx.s)? == PairClass::Shallow {
            shallow += 1;
        }
    }
    let cert = if shallow >= 2 {
        certify_niceness_f64(ctx.curve, delta, 2.0 * delta / ctx.niceness_samples.max(1) as f64)?
    } else {
        NicenessCertificate::trivial(delta)
    };
    extract_monotone_cover(&dp, ctx.witnesses, &cert, &ctx.w, &ctx.s)
}

/// Decompose every realized distance, in parallel, in key order.
pub fn decompose_all(table: &DistanceTable<'_>, ctx: &DecomposeContext<'_>) -> Result<Vec<MonotoneCover>> {
    (0..table.num_distances())
        .into_par_iter()
        .map(|g| decompose_group(table, g, ctx))
        .collect()
}

/// Per-distance summary emitted by the `decompose` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    #[serde(with = "rat::serde_rat")]
    pub delta_sq: Rat,
    pub side: Side,
    pub total: usize,
    pub counts: ClassCounts,
    pub k: usize,
    pub lists: Vec<ListSummary>,
    pub max_list: usize,
    pub cover_fraction: f64,
    pub fraction_bound_met: bool,
    pub monotone: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ListSummary {
    pub tag: String,
    pub len: usize,
}

impl From<&MonotoneCover> for DecompositionReport {
    fn from(c: &MonotoneCover) -> Self {
        DecompositionReport {
            delta_sq: c.delta_sq.clone(),
            side: c.side,
            total: c.total,
            counts: c.counts,
            k: c.k,
            lists: c
                .lists
                .iter()
                .map(|l| ListSummary { tag: l.provenance.tag(), len: l.pairs.len() })
                .collect(),
            max_list: c.max_list_len(),
            cover_fraction: c.max_list_len() as f64 / c.total as f64,
            fraction_bound_met: c.meets_fraction_bound(c.k),
            monotone: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::certify_niceness_f64;
    use crate::geometry::Role;
    use crate::rat::{int, rat};

    fn pt(x: i64, y: i64) -> Point {
        Point::from_ints(x, y)
    }

    #[test]
    fn plus_and_minus_split() {
        let p1 = PointSet::on_line([int(4), int(-4)]).unwrap();
        let p2 = PointSet::free(vec![pt(0, 3)]).unwrap();
        let dp = delta_pairs(&p1, &p2, &int(25)).unwrap();
        assert_eq!(dp.plus.len(), 1);
        assert_eq!(dp.plus[0].a, pt(4, 0));
        assert_eq!(dp.minus.len(), 1);
        assert_eq!(dp.minus[0].a, pt(-4, 0));
    }

    #[test]
    fn vertical_pair_goes_to_plus() {
        let p1 = PointSet::on_line([int(0)]).unwrap();
        let p2 = PointSet::free(vec![pt(0, 5)]).unwrap();
        let dp = delta_pairs(&p1, &p2, &int(25)).unwrap();
        assert_eq!((dp.plus.len(), dp.minus.len()), (1, 0));
    }

    #[test]
    fn unrealized_distance_is_empty() {
        let p1 = PointSet::on_line([int(0)]).unwrap();
        let p2 = PointSet::free(vec![pt(0, 5)]).unwrap();
        assert!(delta_pairs(&p1, &p2, &int(24)).unwrap().is_empty());
    }

    #[test]
    fn classification_examples() {
        let (w, s) = (int(1), int(1));
        let p = Point::new(int(0), rat(1, 2));
        let a = Point::new(int(0), int(0));
        assert_eq!(classify_pair(&a, &p, &rat(1, 4), &w, &s).unwrap(), PairClass::Short);

        // 7-24-25 scaled by 1/5: p_y^2 = 23.04 < 16 * 1.96.
        let p = Point::new(int(0), rat(24, 5));
        let a = Point::new(rat(7, 5), int(0));
        assert_eq!(classify_pair(&a, &p, &int(25), &w, &s).unwrap(), PairClass::Shallow);

        // delta^2 = 1 + 24.01 and p_y^2 = 24.01 >= 16 * 1.
        let p = Point::new(int(0), rat(49, 10));
        let a = Point::new(int(1), int(0));
        assert_eq!(classify_pair(&a, &p, &rat(2501, 100), &w, &s).unwrap(), PairClass::Steep);
    }

    #[test]
    fn classification_rejects_wrong_distance() {
        let r = classify_pair(&pt(0, 0), &pt(3, 4), &int(24), &int(1), &int(1));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn y_spacing_examples() {
        let ok = PointSet::new(vec![pt(0, 0), pt(1, 100)], Role::OnStrip, int(0)).unwrap();
        assert!(verify_y_spacing(&ok, &int(1), &int(1)).is_ok());

        let close = PointSet::new(vec![pt(0, 0), pt(1, 10)], Role::OnStrip, int(0)).unwrap();
        let v = verify_y_spacing(&close, &int(1), &int(1)).unwrap_err();
        assert_eq!(v.bound, YSpacingBound::VerticalGap);

        let slanted = PointSet::new(vec![pt(0, 0), pt(50, 20)], Role::OnStrip, int(0)).unwrap();
        let v = verify_y_spacing(&slanted, &int(1), &int(1)).unwrap_err();
        assert_eq!(v.bound, YSpacingBound::Slope);
    }

    fn steep_pair(px: Rat, py: Rat, ax: Rat, side: Side) -> Pair {
        Pair { a_idx: 0, p_idx: 0, a: Point::new(ax, int(0)), p: Point::new(px, py), side }
    }

    #[test]
    fn steep_order_on_rational_circle_points() {
        // Rational points of the radius-5 circle near its top:
        // t = 9/10 gives (95/181, 900/181), t = 19/20 gives (195/761, 3800/761).
        let l = vec![
            steep_pair(int(0), rat(900, 181), rat(95, 181), Side::Plus),
            steep_pair(int(0), rat(3800, 761), rat(195, 761), Side::Plus),
        ];
        assert_eq!(verify_steep_order(&l), Ok(()));
        assert_eq!(verify_steep_order(&l[..1]), Ok(()));
        let dup = vec![l[0].clone(), l[0].clone()];
        assert!(matches!(verify_steep_order(&dup), Err(SteepOrderFailure::Precondition(_))));
        let swapped_a = vec![
            steep_pair(int(0), rat(900, 181), rat(95, 181), Side::Plus),
            steep_pair(int(0), rat(3800, 761), int(1), Side::Plus),
        ];
        assert_eq!(verify_steep_order(&swapped_a), Err(SteepOrderFailure::Counterexample { index: 1 }));
    }

    #[test]
    fn wiggle_examples() {
        let curve = CurveModel::linear(int(0), int(1)).unwrap();
        let (w, s) = (int(1), int(1));
        // p on the curve: a_x = phi(p_y) exactly.
        let pair = steep_pair(int(0), rat(24, 5), rat(7, 5), Side::Plus);
        let wit = StripWitness { p: pair.p.clone(), p_star: pair.p.clone(), dist_sq: int(0) };
        let m = verify_shallow_wiggle(&pair, &wit, &curve, 5.0, &w, &s).unwrap();
        assert!((m - 13.0).abs() < 1e-12);

        // p shifted right by w from p*: the arc point moves by exactly w.
        let pair = steep_pair(int(1), rat(24, 5), rat(12, 5), Side::Plus);
        let wit = StripWitness {
            p: pair.p.clone(),
            p_star: Point::new(int(0), rat(24, 5)),
            dist_sq: int(1),
        };
        let m = verify_shallow_wiggle(&pair, &wit, &curve, 5.0, &w, &s).unwrap();
        assert!((m - 12.0).abs() < 1e-12);
    }

    #[test]
    fn steep_list_is_one_monotone_list() {
        // All pairs steep with p_y > 0 on the plus side.
        let p1 = PointSet::on_line([rat(95, 181), rat(195, 761)]).unwrap();
        let p2 = PointSet::free(vec![Point::new(int(0), rat(900, 181)), Point::new(int(0), rat(3800, 761))]).unwrap();
        let dp = delta_pairs(&p1, &p2, &int(25)).unwrap();
        let wits: Vec<StripWitness> = p2
            .iter()
            .map(|p| StripWitness { p: p.clone(), p_star: p.clone(), dist_sq: int(0) })
            .collect();
        let curve = CurveModel::linear(int(0), int(1)).unwrap();
        let cert = certify_niceness_f64(&curve, 5.0, 0.01).unwrap();
        let cover = extract_monotone_cover(&dp, &wits, &cert, &int(1), &int(1)).unwrap();
        assert_eq!(cover.lists.len(), 1);
        assert_eq!(cover.lists[0].provenance, Provenance::SteepPositive);
        assert_eq!(cover.max_list_len(), 2);
        assert!(cover.lists[0].pairs[1].a.x < cover.lists[0].pairs[0].a.x);
    }

    #[test]
    fn lone_short_pair() {
        let p1 = PointSet::on_line([int(5)]).unwrap();
        let p2 = PointSet::free(vec![Point::new(int(0), int(0))]).unwrap();
        let dp = delta_pairs(&p1, &p2, &int(25)).unwrap();
        let wits = vec![StripWitness { p: p2[0].clone(), p_star: p2[0].clone(), dist_sq: int(0) }];
        let cert = NicenessCertificate::trivial(5.0);
        let cover = extract_monotone_cover(&dp, &wits, &cert, &int(1), &int(1)).unwrap();
        assert_eq!(cover.counts, ClassCounts { short: 1, steep: 0, shallow: 0 });
        assert_eq!((cover.covered, cover.total), (1, 1));
    }

    #[test]
    fn non_monotone_input_is_reported() {
        // Two shallow pairs whose witnesses share a piece but whose a_x order
        // disagrees with the arc: the witnesses are deliberately wrong.
        let p1 = PointSet::on_line([int(4), int(1), int(-6)]).unwrap();
        let p2 = PointSet::free(vec![pt(0, 3), pt(-2, 4), pt(-10, -3)]).unwrap();
        let dp = delta_pairs(&p1, &p2, &int(25)).unwrap();
        assert_eq!((dp.plus.len(), dp.minus.len()), (3, 0));
        let wits: Vec<StripWitness> = p2
            .iter()
            .map(|p| StripWitness { p: p.clone(), p_star: p.clone(), dist_sq: int(0) })
            .collect();
        let cert = NicenessCertificate::trivial(5.0);
        let err = extract_monotone_cover(&dp, &wits, &cert, &rat(1, 10), &int(1)).unwrap_err();
        assert!(matches!(err, Error::MonotonicityViolation { .. }));
    }
}
