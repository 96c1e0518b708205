//! Instance builders: the classical constructions and a seeded sampler for
//! point sets in a strip around a curve.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::curve::{certify_lipschitz, CurveKind, CurveModel, LipschitzReport};
use crate::error::{Error, Result};
use crate::float::FloatPoint;
use crate::geometry::{squared_distance, Point, PointSet, Role, StripWitness};
use crate::rat::{self, int, Rat};
use crate::rng::SplitMix64;

/// `{(i * spacing, y) : i = 1..=n}`. On the x-axis the set is `OnLine`,
/// elsewhere `Free`.
pub fn equally_spaced_line(n: usize, spacing: &Rat, y: &Rat) -> Result<PointSet> {
    if n == 0 || !spacing.is_positive() {
        return Err(Error::Precondition("need n >= 1 and spacing > 0".into()));
    }
    let pts = (1..=n).map(|i| Point::new(spacing * int(i as i64), y.clone())).collect();
    let role = if y.is_zero() { Role::OnLine } else { Role::Free };
    PointSet::new(pts, role, spacing.clone())
}

/// `{(sqrt i, 0)}` and `{(0, sqrt i)}` for `i = 1..=n`, in floating point.
pub fn sqrt_axes(n: usize) -> (Vec<FloatPoint>, Vec<FloatPoint>) {
    let r = |i: usize| (i as f64).sqrt();
    (
        (1..=n).map(|i| FloatPoint::new(r(i), 0.0)).collect(),
        (1..=n).map(|i| FloatPoint::new(0.0, r(i))).collect(),
    )
}

/// `{(i, 0)}` and `{(i, i)}` for `i = 1..=n`.
pub fn diagonal_lattice(n: usize) -> Result<(PointSet, PointSet)> {
    scaled_diagonal(n, n, &int(1))
}

/// `{(i, 0) : i = 1..=m}` and `{(j, j) : j = 1..=n}`.
pub fn diagonal_lattice_mn(m: usize, n: usize) -> Result<(PointSet, PointSet)> {
    scaled_diagonal(m, n, &int(1))
}

fn scaled_diagonal(m: usize, n: usize, scale: &Rat) -> Result<(PointSet, PointSet)> {
    if m == 0 || n == 0 {
        return Err(Error::Precondition("need m, n >= 1".into()));
    }
    let c = |i: usize| scale * int(i as i64);
    let p1 = PointSet::new((1..=m).map(|i| Point::new(c(i), int(0))).collect(), Role::OnLine, scale.clone())?;
    let p2 = PointSet::new((1..=n).map(|i| Point::new(c(i), c(i))).collect(), Role::OnStrip, scale.clone())?;
    Ok((p1, p2))
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub curve: CurveModel,
    pub w: Rat,
    /// Points are kept `u_factor * w * s` apart.
    pub u_factor: Rat,
    pub n: usize,
    pub y_range: (Rat, Rat),
    pub seed: u64,
    pub max_rejections: u64,
    /// Offsets (and heights) are multiples of `2^-snap_bits`; 0 gives
    /// integer offsets.
    pub snap_bits: u32,
}

impl SamplerConfig {
    /// Defaults: `u_factor = 32`, heights in `[-n*u, n*u]`, 10 000
    /// rejections, 20 snap bits.
    pub fn new(curve: CurveModel, w: Rat, n: usize, seed: u64) -> Self {
        let u_factor = int(32);
        let half = &u_factor * &w * curve.lipschitz() * int(n as i64);
        SamplerConfig {
            curve,
            w,
            u_factor,
            n,
            y_range: (-half.clone(), half),
            seed,
            max_rejections: 10_000,
            snap_bits: 20,
        }
    }

    pub fn spacing(&self) -> Rat {
        &self.u_factor * &self.w * self.curve.lipschitz()
    }
}

fn grid_unit(bits: u32) -> Rat {
    Rat::new(BigInt::from(1), BigInt::from(1) << bits)
}

/// Multiples of `h` in `[lo, hi]`, as `(first, count)`; `count = 0` when none.
fn grid_span(lo: &Rat, hi: &Rat, h: &Rat) -> (BigInt, u64) {
    let first = rat::ceil(&(lo / h));
    let last = rat::floor(&(hi / h));
    let count = if last < first { 0 } else { (&last - &first + BigInt::from(1)).to_u64().unwrap_or(u64::MAX) };
    (first, count)
}

fn uniform_grid(rng: &mut SplitMix64, first: &BigInt, count: u64, h: &Rat) -> Rat {
    Rat::from_integer(first + rng.next_below(count)) * h
}

/// A point within `w` of the origin, on the `h` grid.
fn disk_offset(rng: &mut SplitMix64, w: &Rat, h: &Rat) -> (Rat, Rat) {
    let wf = rat::to_f64(w);
    let w2 = w * w;
    loop {
        let (a, b) = (2.0 * rng.next_f64() - 1.0, 2.0 * rng.next_f64() - 1.0);
        if a * a + b * b > 1.0 {
            continue;
        }
        let snap = |v: f64| Rat::from_integer(rat::floor(&(rat::snap_f64(v * wf, 60) / h + rat::rat(1, 2)))) * h;
        let (dx, dy) = (snap(a), snap(b));
        if &dx * &dx + &dy * &dy <= w2 {
            return (dx, dy);
        }
    }
}

/// Seeded sampler for a `u`-spaced set with distinct x-coordinates in the
/// width-`w` strip around the curve, where `u = u_factor * w * s`.
///
/// Heights `y*` are drawn in increasing order, each at least `u + 2ws` above
/// the previous one and low enough that the remaining draws still fit, so
/// the spacing holds by construction whenever the range allows it. The
/// point is `(f(y*), y*)` moved by a random offset of length at most `w`;
/// it is accepted when it keeps the set `u`-spaced with distinct x. After
/// `max_rejections` consecutive rejections the sampler gives up.
pub fn strip_sampler(cfg: &SamplerConfig) -> Result<(PointSet, Vec<StripWitness>)> {
    if cfg.n == 0 || !cfg.w.is_positive() || cfg.y_range.0 > cfg.y_range.1 {
        return Err(Error::Precondition("need n >= 1, w > 0 and y_lo <= y_hi".into()));
    }
    let mut rng = SplitMix64::new(cfg.seed);
    let h = grid_unit(cfg.snap_bits);
    let u = cfg.spacing();
    let u2 = &u * &u;
    let gap = &u + int(2) * &cfg.w * cfg.curve.lipschitz();
    let (y_lo, y_hi) = &cfg.y_range;
    let structural = y_hi - y_lo >= &gap * int(cfg.n as i64 - 1);

    let mut pts: Vec<Point> = Vec::with_capacity(cfg.n);
    let mut wits = Vec::with_capacity(cfg.n);
    let mut floor_y = y_lo.clone();
    let mut rejections = 0u64;
    while pts.len() < cfg.n {
        let (lo, hi) = if structural {
            let left = int((cfg.n - pts.len()) as i64 - 1);
            (floor_y.clone(), y_hi - &gap * left)
        } else {
            (y_lo.clone(), y_hi.clone())
        };
        let (first, count) = grid_span(&lo, &hi, &h);
        if count == 0 {
            return Err(Error::SamplerExhausted { rejections, placed: pts.len(), requested: cfg.n });
        }
        let y_star = uniform_grid(&mut rng, &first, count, &h);
        let p_star = Point::new(cfg.curve.eval_exact_or_snapped(&y_star), y_star);
        let (dx, dy) = disk_offset(&mut rng, &cfg.w, &h);
        let p = Point::new(&p_star.x + dx, &p_star.y + dy);

        let ok = pts.iter().all(|q| q.x != p.x && squared_distance(q, &p) >= u2);
        if !ok {
            rejections += 1;
            if rejections >= cfg.max_rejections {
                return Err(Error::SamplerExhausted { rejections, placed: pts.len(), requested: cfg.n });
            }
            continue;
        }
        rejections = 0;
        if structural {
            floor_y = &p_star.y + &gap;
        }
        let dist_sq = squared_distance(&p, &p_star);
        wits.push(StripWitness { p: p.clone(), p_star, dist_sq });
        pts.push(p);
    }
    Ok((PointSet::new(pts, Role::OnStrip, u)?, wits))
}

/// `m` equally spaced x-axis points spread over the x-extent of `p2`.
///
/// The first point sits at the smallest x of `p2` and the step is the larger
/// of `spacing` and `ceil(extent / (m - 1))`; a single point goes to the
/// middle of the extent.
pub fn line_points_for_strip(p2: &PointSet, m: usize, spacing: &Rat) -> Result<PointSet> {
    if m == 0 || !spacing.is_positive() || p2.is_empty() {
        return Err(Error::Precondition("need m >= 1, spacing > 0 and a nonempty strip set".into()));
    }
    let lo = p2.iter().map(|p| &p.x).min().unwrap();
    let hi = p2.iter().map(|p| &p.x).max().unwrap();
    if m == 1 {
        return PointSet::new(vec![Point::new((lo + hi) / int(2), int(0))], Role::OnLine, spacing.clone());
    }
    let even = Rat::from_integer(rat::ceil(&((hi - lo) / int(m as i64 - 1))));
    let step = if even > *spacing { even } else { spacing.clone() };
    PointSet::on_line((0..m).map(|i| lo + &step * int(i as i64)))
        .and_then(|ps| PointSet::new(ps.points().to_vec(), Role::OnLine, spacing.clone()))
}

/// Everything a strip experiment needs.
#[derive(Clone, Debug)]
pub struct StripInstance {
    pub p1: PointSet,
    pub p2: PointSet,
    /// `witnesses[i]` belongs to `p2[i]`.
    pub witnesses: Vec<StripWitness>,
    pub curve: CurveModel,
    pub w: Rat,
    pub s: Rat,
}

/// Sample `n` strip points, then put `m` line points under them.
pub fn strip_instance(cfg: &SamplerConfig, m: usize) -> Result<StripInstance> {
    let (p2, witnesses) = strip_sampler(cfg)?;
    let p1 = line_points_for_strip(&p2, m, &cfg.spacing())?;
    Ok(StripInstance {
        p1,
        p2,
        witnesses,
        curve: cfg.curve.clone(),
        w: cfg.w.clone(),
        s: cfg.curve.lipschitz().clone(),
    })
}

/// The diagonal lattice scaled by 32, viewed as a width-1 strip around
/// `x = y`: every strip point is its own witness.
pub fn diagonal_strip_instance(n: usize) -> Result<StripInstance> {
    let (p1, p2) = scaled_diagonal(n, n, &int(32))?;
    let witnesses = p2
        .iter()
        .map(|p| StripWitness { p: p.clone(), p_star: p.clone(), dist_sq: int(0) })
        .collect();
    Ok(StripInstance {
        p1,
        p2,
        witnesses,
        curve: CurveModel::linear(int(1), int(1))?,
        w: int(1),
        s: int(1),
    })
}

/// Primes `p = 1 (mod 4)` with `p = a^2 + b^2`; their product is the radius
/// of [`circle_strip_instance`].
const GAUSSIAN_PRIMES: [(i128, i128); 7] = [(1, 2), (2, 3), (1, 4), (2, 5), (1, 6), (4, 5), (2, 7)];

/// All integer points `(d, y)` with `d^2 + y^2 = R^2`, where `R` is the product
/// of the primes above.
fn circle_lattice_points() -> (i128, Vec<(i128, i128)>) {
    let radius: i128 = GAUSSIAN_PRIMES.iter().map(|(a, b)| a * a + b * b).product();
    let mul = |(a, b): (i128, i128), (c, d): (i128, i128)| (a * c - b * d, a * d + b * c);
    let mut acc = vec![(1i128, 0i128)];
    for &(a, b) in &GAUSSIAN_PRIMES {
        // R^2 contains p^2 = (a + bi)^2 (a - bi)^2: pick k factors of a + bi.
        let options = [mul((a, b), (a, b)), mul((a, b), (a, -b)), mul((a, -b), (a, -b))];
        acc = acc.iter().flat_map(|&z| options.iter().map(move |&o| mul(z, o))).collect();
    }
    let mut pts: Vec<(i128, i128)> = acc
        .into_iter()
        .flat_map(|(d, y)| [(d, y), (-y, d), (-d, -y), (y, -d)])
        .collect();
    pts.sort_unstable();
    pts.dedup();
    (radius, pts)
}

/// `n` strip points that all have a partner on the line at one common
/// distance `R`.
///
/// The strip points lie exactly on `x = y / 2` (so `w = 1`, `s = 1` and each
/// point is its own witness), at heights `y` of integer points `(d, y)` of the
/// circle of radius `R` with `d > 0` and `-0.6 R <= y <= 0.3 R`, chosen at
/// random subject to a vertical gap of at least 200. The line points are
/// `y / 2 + d`, so every `(a_j, p_j)` is at distance `R` and the pairs form one
/// monotone run along the rising part of `phi_R`.
pub fn circle_strip_instance(n: usize, seed: u64) -> Result<StripInstance> {
    let (radius, pts) = circle_lattice_points();
    let mut cands: Vec<(i128, i128)> = pts
        .into_iter()
        .filter(|&(d, y)| d > 0 && 10 * y >= -6 * radius && 10 * y <= 3 * radius && y % 2 == 0)
        .collect();
    let mut rng = SplitMix64::new(seed);
    // Fisher-Yates, then keep the first candidates that respect the gap.
    for i in (1..cands.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        cands.swap(i, j);
    }
    let mut chosen: Vec<(i128, i128)> = Vec::with_capacity(n);
    for c in cands {
        if chosen.len() == n {
            break;
        }
        if chosen.iter().all(|q| (q.1 - c.1).abs() >= 200) {
            chosen.push(c);
        }
    }
    if chosen.len() < n {
        return Err(Error::SamplerExhausted { rejections: 0, placed: chosen.len(), requested: n });
    }
    chosen.sort_by_key(|c| c.1);
    let big = |v: i128| Rat::from_integer(BigInt::from(v));
    let p2: Vec<Point> = chosen.iter().map(|&(_, y)| Point::new(big(y / 2), big(y))).collect();
    let p1: Vec<Point> = chosen.iter().map(|&(d, y)| Point::new(big(y / 2 + d), int(0))).collect();
    let p2 = PointSet::new(p2, Role::OnStrip, int(32))?;
    let p1 = PointSet::new(p1, Role::OnLine, int(32))?;
    let witnesses = p2
        .iter()
        .map(|p| StripWitness { p: p.clone(), p_star: p.clone(), dist_sq: int(0) })
        .collect();
    Ok(StripInstance {
        p1,
        p2,
        witnesses,
        curve: CurveModel::linear(rat::rat(1, 2), int(1))?,
        w: int(1),
        s: int(1),
    })
}

/// The branch `x = (y^2 - 1)^(1/3)` of `y^2 = x^3 + 1` on `y >= 2`, tabulated
/// on `samples` equal steps up to `y_hi`, with values snapped to `2^-20`.
/// The declared Lipschitz constant is the certified grid maximum rounded up
/// (at least 1).
pub fn elliptic_branch(y_hi: &Rat, samples: usize) -> Result<(CurveModel, LipschitzReport)> {
    let y_lo = int(2);
    if *y_hi <= y_lo || samples < 1 {
        return Err(Error::Precondition("need y_hi > 2 and at least one step".into()));
    }
    let step = (y_hi - &y_lo) / int(samples as i64);
    let table: Vec<(Rat, Rat)> = (0..=samples)
        .map(|i| {
            let y = &y_lo + &step * int(i as i64);
            let yf = rat::to_f64(&y);
            (y, rat::snap_f64((yf * yf - 1.0).cbrt(), 20))
        })
        .collect();
    let probe = CurveModel::new(CurveKind::Tabulated { samples: table.clone() }, int(1))?;
    let report = certify_lipschitz(&probe, &y_lo, y_hi, &step)?;
    let s = (report.max_slope_observed.ceil() as i64).max(1);
    let curve = CurveModel::new(CurveKind::Tabulated { samples: table }, int(s))?;
    let report = certify_lipschitz(&curve, &y_lo, y_hi, &step)?;
    Ok((curve, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticDemo {
    #[serde(skip)]
    pub instance: StripInstance,
    pub lipschitz: LipschitzReport,
}

/// `n` strip points around the elliptic branch above `y = 2`, and `n` line
/// points under them.
pub fn elliptic_strip_demo(n: usize, w: &Rat, seed: u64) -> Result<EllipticDemo> {
    if n == 0 {
        return Err(Error::Precondition("need n >= 1".into()));
    }
    // The branch has slope below 1 on y >= 2, so s = 1 and the sampler needs
    // heights up to 2 + (n - 1) * 34w; leave room for twice that.
    let y_hi = int(2) + int(2 * 34 * n as i64) * w + int(1);
    let (curve, lipschitz) = elliptic_branch(&y_hi, 4096)?;
    let mut cfg = SamplerConfig::new(curve, w.clone(), n, seed);
    cfg.y_range = (int(2) + w, y_hi - w);
    let instance = strip_instance(&cfg, n)?;
    Ok(EllipticDemo { instance, lipschitz })
}
