//! Distance sets, equal-distance multiplicities, distance energy and the
//! proximity-restricted energy.
//!
//! Everything is driven by a [`DistanceTable`]: all `m * n` pairs grouped by
//! exact squared distance. The table answers `|Delta|`, `E = sum r^2` and
//! `E_t` without ever enumerating quadruples.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{rank_indices, squared_distance, PointSet};
use crate::rat::{self, Rat};
use crate::scaled::{self, with_scaled, Exact};

/// Multiplicity `r_delta` of every realized squared distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceProfile {
    pub entries: BTreeMap<Rat, u64>,
    pub m: usize,
    pub n: usize,
}

impl DistanceProfile {
    pub fn num_distances(&self) -> usize {
        self.entries.len()
    }

    pub fn energy(&self) -> u128 {
        self.entries.values().map(|&r| (r as u128) * (r as u128)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnergyReport {
    pub energy: u128,
    #[serde(with = "rat::serde_rat_opt")]
    pub t: Option<Rat>,
    /// Counted quadruples whose strip points satisfy `p_y = +-q_y`.
    pub degenerate_count: u128,
}

/// Index pair `(a, p)` into `P1 x P2`.
pub type PairIdx = (u32, u32);

/// Every pair of `P1 x P2`, grouped by squared distance in increasing order.
#[derive(Clone, Debug)]
pub struct DistanceTable<'a> {
    p1: &'a PointSet,
    p2: &'a PointSet,
    keys: Vec<Rat>,
    offsets: Vec<usize>,
    pairs: Vec<PairIdx>,
    x_rank1: Vec<u32>,
    y_rank2: Vec<u32>,
    // Points of P2 with equal |y| share a class.
    abs_y_class: Vec<u32>,
}

impl<'a> DistanceTable<'a> {
    pub fn new(p1: &'a PointSet, p2: &'a PointSet) -> Self {
        let (keys, offsets, pairs) =
            with_scaled!(scaled::scale(&[p1.points(), p2.points()]), s => group_pairs(&s));

        let r1 = rank_indices(p1);
        let r2 = rank_indices(p2);
        let mut by_abs: Vec<usize> = (0..p2.len()).collect();
        by_abs.sort_by(|&i, &j| p2[i].y.abs().cmp(&p2[j].y.abs()));
        let mut abs_y_class = vec![0u32; p2.len()];
        let mut class = 0u32;
        for w in 0..by_abs.len() {
            if w > 0 && p2[by_abs[w]].y.abs() != p2[by_abs[w - 1]].y.abs() {
                class += 1;
            }
            abs_y_class[by_abs[w]] = class;
        }

        DistanceTable {
            p1,
            p2,
            keys,
            offsets,
            pairs,
            x_rank1: r1.x_ranks().iter().map(|&r| r as u32).collect(),
            y_rank2: r2.y_ranks().iter().map(|&r| r as u32).collect(),
            abs_y_class,
        }
    }

    pub fn p1(&self) -> &'a PointSet {
        self.p1
    }

    pub fn p2(&self) -> &'a PointSet {
        self.p2
    }

    /// `|Delta(P1, P2)|`.
    pub fn num_distances(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[Rat] {
        &self.keys
    }

    /// The pairs at the `g`-th smallest squared distance.
    pub fn group(&self, g: usize) -> &[PairIdx] {
        &self.pairs[self.offsets[g]..self.offsets[g + 1]]
    }

    pub fn group_of(&self, delta_sq: &Rat) -> Option<usize> {
        self.keys.binary_search(delta_sq).ok()
    }

    pub fn groups(&self) -> impl Iterator<Item = (&Rat, &[PairIdx])> {
        (0..self.keys.len()).map(move |g| (&self.keys[g], self.group(g)))
    }

    /// `i_1(a)` for the point of `P1` at position `a`.
    pub fn x_rank(&self, a: usize) -> usize {
        self.x_rank1[a] as usize
    }

    /// `i_2(p)` for the point of `P2` at position `p`.
    pub fn y_rank(&self, p: usize) -> usize {
        self.y_rank2[p] as usize
    }

    pub fn profile(&self) -> DistanceProfile {
        DistanceProfile {
            entries: (0..self.keys.len())
                .map(|g| (self.keys[g].clone(), self.group(g).len() as u64))
                .collect(),
            m: self.p1.len(),
            n: self.p2.len(),
        }
    }

    pub fn energy(&self) -> u128 {
        (0..self.keys.len())
            .map(|g| {
                let r = self.group(g).len() as u128;
                r * r
            })
            .sum()
    }

    /// `E_t` restricted to the `g`-th distance, with its degenerate part.
    pub fn proximity_energy_at(&self, g: usize, t: &Rat) -> (u128, u128) {
        let (l1, l2) = rank_limits(t, self.p1.len(), self.p2.len());
        self.close_counts(self.group(g), l1, l2)
    }

    /// `E_t`: ordered quadruples `(a, b, p, q)` with `|ap| = |bq|`,
    /// `|i_1(a) - i_1(b)| <= t m` and `|i_2(p) - i_2(q)| <= t n`.
    pub fn proximity_energy(&self, t: &Rat) -> Result<EnergyReport> {
        check_t(t)?;
        let (l1, l2) = rank_limits(t, self.p1.len(), self.p2.len());
        let (energy, degenerate_count) = (0..self.keys.len())
            .into_par_iter()
            .map(|g| self.close_counts(self.group(g), l1, l2))
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        Ok(EnergyReport { energy, t: Some(t.clone()), degenerate_count })
    }

    fn close_counts(&self, group: &[PairIdx], l1: u64, l2: u64) -> (u128, u128) {
        let items: Vec<(u32, u32, u32)> = group
            .iter()
            .map(|&(a, p)| (self.x_rank1[a as usize], self.y_rank2[p as usize], self.abs_y_class[p as usize]))
            .collect();
        let close = |x: &(u32, u32, u32), y: &(u32, u32, u32)| {
            (x.0.abs_diff(y.0) as u64) <= l1 && (x.1.abs_diff(y.1) as u64) <= l2
        };

        let total = if items.len() <= 48 {
            let mut c = 0u128;
            for x in &items {
                for y in &items {
                    c += close(x, y) as u128;
                }
            }
            c
        } else {
            count_close_pairs(&items, l1, l2)
        };

        // Degenerate quadruples live inside a single |p_y| class.
        let mut by_class = items.clone();
        by_class.sort_by_key(|x| x.2);
        let mut degenerate = 0u128;
        for chunk in by_class.chunk_by(|x, y| x.2 == y.2) {
            for x in chunk {
                for y in chunk {
                    degenerate += close(x, y) as u128;
                }
            }
        }
        (total, degenerate)
    }
}

fn group_pairs<T: Exact>(s: &scaled::ScaledSets<T>) -> (Vec<Rat>, Vec<usize>, Vec<PairIdx>) {
    let (a_pts, p_pts) = (&s.sets[0], &s.sets[1]);
    let mut all: Vec<(T, u32, u32)> = (0..a_pts.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            p_pts
                .iter()
                .enumerate()
                .map(move |(p, pp)| (scaled::sq_dist(&a_pts[a], pp), a as u32, p as u32))
        })
        .collect();
    all.par_sort_unstable();

    let mut keys = Vec::new();
    let mut offsets = Vec::new();
    for (i, item) in all.iter().enumerate() {
        if i == 0 || item.0 != all[i - 1].0 {
            keys.push(s.unscale_sq(&item.0));
            offsets.push(i);
        }
    }
    offsets.push(all.len());
    let pairs = all.into_iter().map(|(_, a, p)| (a, p)).collect();
    (keys, offsets, pairs)
}

/// Ordered pairs `(x, y)` of items with rank gaps within `(l1, l2)`, by a
/// sliding window over the first rank and a Fenwick tree over the second.
fn count_close_pairs(items: &[(u32, u32, u32)], l1: u64, l2: u64) -> u128 {
    let mut sorted: Vec<(u32, u32)> = items.iter().map(|x| (x.0, x.1)).collect();
    sorted.sort_unstable();
    let mut ys: Vec<u32> = sorted.iter().map(|x| x.1).collect();
    ys.sort_unstable();
    ys.dedup();
    let slot = |y: u32| ys.binary_search(&y).unwrap();

    let mut tree = Fenwick::new(ys.len());
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut total = 0u128;
    for &(x, y) in &sorted {
        while hi < sorted.len() && (sorted[hi].0 as u64) <= x as u64 + l1 {
            tree.add(slot(sorted[hi].1), 1);
            hi += 1;
        }
        while (sorted[lo].0 as u64) + l1 < x as u64 {
            tree.add(slot(sorted[lo].1), -1);
            lo += 1;
        }
        let y_lo = (y as u64).saturating_sub(l2);
        let y_hi = y as u64 + l2;
        let from = ys.partition_point(|&v| (v as u64) < y_lo);
        let to = ys.partition_point(|&v| (v as u64) <= y_hi);
        total += (tree.prefix(to) - tree.prefix(from)) as u128;
    }
    total
}

struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn add(&mut self, i: usize, v: i64) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of the first `i` slots.
    fn prefix(&self, mut i: usize) -> i64 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

fn check_t(t: &Rat) -> Result<()> {
    if t.is_negative() || *t > rat::int(1) {
        return Err(Error::Precondition(format!("t = {t} is outside [0, 1]")));
    }
    Ok(())
}

/// `(floor(t m), floor(t n))`: the largest rank gaps that are still t-close.
pub fn rank_limits(t: &Rat, m: usize, n: usize) -> (u64, u64) {
    let lim = |size: usize| {
        rat::floor(&(t * rat::int(size as i64)))
            .to_u64()
            .unwrap_or(0)
    };
    (lim(m), lim(n))
}

pub fn distance_profile(p1: &PointSet, p2: &PointSet) -> DistanceProfile {
    DistanceTable::new(p1, p2).profile()
}

/// `E(P1, P2) = sum_delta r_delta^2`.
pub fn energy(p1: &PointSet, p2: &PointSet) -> EnergyReport {
    let table = DistanceTable::new(p1, p2);
    let all = table
        .proximity_energy(&rat::int(1))
        .expect("t = 1 is valid");
    EnergyReport { energy: table.energy(), t: None, degenerate_count: all.degenerate_count }
}

pub fn proximity_energy(p1: &PointSet, p2: &PointSet, t: &Rat) -> Result<EnergyReport> {
    check_t(t)?;
    DistanceTable::new(p1, p2).proximity_energy(t)
}

/// `m^2 n^2 / |Delta|`, the floor that `E` can never go below.
pub fn cauchy_schwarz_floor(profile: &DistanceProfile) -> Result<Rat> {
    if profile.entries.is_empty() {
        return Err(Error::Precondition("empty distance profile".into()));
    }
    let mn = BigInt::from(profile.m) * BigInt::from(profile.n);
    Ok(Rat::new(&mn * &mn, BigInt::from(profile.entries.len())))
}

/// Largest `m * n` for which [`direct_quadruple_count`] is used as a self-check.
pub const SELF_CHECK_LIMIT: usize = 2000;

/// Count qualifying quadruples one by one. Quadratic in `m n`; only meant as
/// a cross-check of the grouped computation on small inputs.
pub fn direct_quadruple_count(p1: &PointSet, p2: &PointSet, t: Option<&Rat>) -> u128 {
    let (m, n) = (p1.len(), p2.len());
    let r1 = rank_indices(p1);
    let r2 = rank_indices(p2);
    let (l1, l2) = match t {
        Some(t) => rank_limits(t, m, n),
        None => (u64::MAX, u64::MAX),
    };
    let d: Vec<Rat> = (0..m)
        .flat_map(|a| (0..n).map(move |p| (a, p)))
        .map(|(a, p)| squared_distance(&p1[a], &p2[p]))
        .collect();
    let mut count = 0u128;
    for a in 0..m {
        for b in 0..m {
            if (r1.x_rank(a).abs_diff(r1.x_rank(b)) as u64) > l1 {
                continue;
            }
            for p in 0..n {
                for q in 0..n {
                    if (r2.y_rank(p).abs_diff(r2.y_rank(q)) as u64) <= l2 && d[a * n + p] == d[b * n + q] {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Grouped `E` and `E_1`, checked against [`direct_quadruple_count`] when
/// `m n <= SELF_CHECK_LIMIT`.
pub fn energy_self_checked(p1: &PointSet, p2: &PointSet) -> Result<EnergyReport> {
    let report = energy(p1, p2);
    if p1.len() * p2.len() <= SELF_CHECK_LIMIT {
        let direct = direct_quadruple_count(p1, p2, None);
        if direct != report.energy {
            return Err(Error::Assertion(format!(
                "grouped energy {} differs from direct enumeration {direct}",
                report.energy
            )));
        }
    }
    Ok(report)
}

/// The report JSON emitted by the `energy` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyJson {
    pub m: usize,
    pub n: usize,
    pub num_distances: usize,
    pub energy: u128,
    #[serde(with = "rat::serde_rat_opt")]
    pub t: Option<Rat>,
    pub proximity_energy: Option<u128>,
    pub degenerate: Option<u128>,
}

impl EnergyJson {
    pub fn build(table: &DistanceTable<'_>, t: Option<&Rat>) -> Result<Self> {
        let prox = t.map(|t| table.proximity_energy(t)).transpose()?;
        Ok(EnergyJson {
            m: table.p1().len(),
            n: table.p2().len(),
            num_distances: table.num_distances(),
            energy: table.energy(),
            t: t.cloned(),
            proximity_energy: prox.as_ref().map(|r| r.energy),
            degenerate: prox.as_ref().map(|r| r.degenerate_count),
        })
    }
}
