//! Curves `x = f(y)`, the arc functions `phi_delta` / `psi_delta`, and grid
//! certificates for Lipschitz and niceness.
//!
//! For a fixed `delta`, the points of the x-axis at distance `delta` from a
//! curve point `(f(y), y)` are `phi_delta(y) = f(y) + sqrt(delta^2 - y^2)` and
//! `psi_delta(y) = f(y) - sqrt(delta^2 - y^2)`. A curve is `k`-nice when for
//! every `delta` both functions split `[-delta, delta]` into at most `k`
//! monotone pieces. Here the split is computed on a sample grid: the greedy
//! partition into maximal monotone runs is the smallest partition the grid
//! supports.

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// Reversals of at most this size (absolute) do not break a monotone run.
pub const MONOTONE_TOLERANCE: f64 = 1e-12;

/// Denominator exponent used when a floating curve value has to become a
/// coordinate.
pub const SNAP_BITS: u32 = 20;

#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind {
    /// `f(y) = slope * y`.
    Linear { slope: Rat },
    /// The real roots in `x` of `sum c_ij x^i y^j = 0`, numbered from the
    /// smallest; `branch` picks one.
    PolynomialImplicit { coeffs: Vec<(u32, u32, Rat)>, branch: usize },
    /// Piecewise-linear through `(y, x)` samples sorted by `y`, constant
    /// beyond the first and last sample.
    Tabulated { samples: Vec<(Rat, Rat)> },
}

#[derive(Clone, Debug)]
pub struct CurveModel {
    kind: CurveKind,
    s: Rat,
    // f64 images of the tabulated samples / polynomial coefficients.
    table_f64: Vec<(f64, f64)>,
    coeffs_f64: Vec<(u32, u32, f64)>,
}

impl PartialEq for CurveModel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.s == other.s
    }
}

impl CurveModel {
    /// `s` is the declared Lipschitz constant and must be at least 1.
    pub fn new(kind: CurveKind, s: Rat) -> Result<Self> {
        if s < rat::int(1) {
            return Err(Error::InvalidCurve(format!("Lipschitz constant {s} is below 1")));
        }
        let mut table_f64 = Vec::new();
        let mut coeffs_f64 = Vec::new();
        match &kind {
            CurveKind::Linear { .. } => {}
            CurveKind::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::InvalidCurve("a tabulated curve needs two samples".into()));
                }
                if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::InvalidCurve("tabulated y values must increase strictly".into()));
                }
                table_f64 = samples.iter().map(|(y, x)| (rat::to_f64(y), rat::to_f64(x))).collect();
            }
            CurveKind::PolynomialImplicit { coeffs, .. } => {
                if !coeffs.iter().any(|(i, _, c)| *i > 0 && !c.is_zero()) {
                    return Err(Error::InvalidCurve("polynomial does not involve x".into()));
                }
                coeffs_f64 = coeffs.iter().map(|(i, j, c)| (*i, *j, rat::to_f64(c))).collect();
            }
        }
        Ok(CurveModel { kind, s, table_f64, coeffs_f64 })
    }

    pub fn linear(slope: Rat, s: Rat) -> Result<Self> {
        CurveModel::new(CurveKind::Linear { slope }, s)
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn lipschitz(&self) -> &Rat {
        &self.s
    }

    /// `f(y)` exactly, for curves whose values at rational heights are rational.
    pub fn eval_exact(&self, y: &Rat) -> Option<Rat> {
        match &self.kind {
            CurveKind::Linear { slope } => Some(slope * y),
            CurveKind::Tabulated { samples } => Some(interpolate(samples, y)),
            CurveKind::PolynomialImplicit { .. } => None,
        }
    }

    /// `f(y)` exactly when possible, otherwise the float value snapped to a
    /// multiple of `2^-20`.
    pub fn eval_exact_or_snapped(&self, y: &Rat) -> Rat {
        self.eval_exact(y)
            .unwrap_or_else(|| rat::snap_f64(self.eval(rat::to_f64(y)), SNAP_BITS))
    }

    /// `f(y)` in floating point. `NaN` if a polynomial branch does not exist
    /// at this height.
    pub fn eval(&self, y: f64) -> f64 {
        match &self.kind {
            CurveKind::Linear { slope } => rat::to_f64(slope) * y,
            CurveKind::Tabulated { .. } => {
                let t = &self.table_f64;
                if y <= t[0].0 {
                    return t[0].1;
                }
                if y >= t[t.len() - 1].0 {
                    return t[t.len() - 1].1;
                }
                let i = t.partition_point(|s| s.0 <= y) - 1;
                let (y0, x0) = t[i];
                let (y1, x1) = t[i + 1];
                x0 + (x1 - x0) * (y - y0) / (y1 - y0)
            }
            CurveKind::PolynomialImplicit { branch, .. } => {
                let deg = self.coeffs_f64.iter().map(|c| c.0).max().unwrap_or(0) as usize;
                let mut poly = vec![0.0; deg + 1];
                for &(i, j, c) in &self.coeffs_f64 {
                    poly[i as usize] += c * y.powi(j as i32);
                }
                real_roots(&poly).get(*branch).copied().unwrap_or(f64::NAN)
            }
        }
    }

    pub fn to_spec(&self) -> CurveSpec {
        let fmt = rat::format_rat;
        let kind = match &self.kind {
            CurveKind::Linear { slope } => CurveSpecKind::Linear { slope: fmt(slope) },
            CurveKind::PolynomialImplicit { coeffs, branch } => CurveSpecKind::PolyImplicit {
                coeffs: coeffs.iter().map(|(i, j, c)| (*i, *j, fmt(c))).collect(),
                branch: *branch,
            },
            CurveKind::Tabulated { samples } => CurveSpecKind::Tabulated {
                samples: samples.iter().map(|(y, x)| (fmt(y), fmt(x))).collect(),
            },
        };
        CurveSpec { kind, s: Some(fmt(&self.s)) }
    }

    pub fn from_spec(spec: &CurveSpec) -> Result<Self> {
        let p = rat::parse_rat;
        let kind = match &spec.kind {
            CurveSpecKind::Linear { slope } => CurveKind::Linear { slope: p(slope)? },
            CurveSpecKind::PolyImplicit { coeffs, branch } => CurveKind::PolynomialImplicit {
                coeffs: coeffs
                    .iter()
                    .map(|(i, j, c)| Ok((*i, *j, p(c)?)))
                    .collect::<Result<_>>()?,
                branch: *branch,
            },
            CurveSpecKind::Tabulated { samples } => CurveKind::Tabulated {
                samples: samples
                    .iter()
                    .map(|(y, x)| Ok((p(y)?, p(x)?)))
                    .collect::<Result<_>>()?,
            },
        };
        let s = match &spec.s {
            Some(s) => p(s)?,
            None => rat::int(1),
        };
        CurveModel::new(kind, s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CurveSpec = serde_json::from_str(text)?;
        CurveModel::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("curve spec serializes")
    }
}

fn interpolate(samples: &[(Rat, Rat)], y: &Rat) -> Rat {
    let first = &samples[0];
    let last = &samples[samples.len() - 1];
    if *y <= first.0 {
        return first.1.clone();
    }
    if *y >= last.0 {
        return last.1.clone();
    }
    let i = samples.partition_point(|s| s.0 <= *y) - 1;
    let (y0, x0) = &samples[i];
    let (y1, x1) = &samples[i + 1];
    x0 + (x1 - x0) * (y - y0) / (y1 - y0)
}

/// JSON form of a curve: `{"kind":"linear","slope":"1/2"}`,
/// `{"kind":"poly_implicit","coeffs":[[i,j,"c"],...],"branch":0}` or
/// `{"kind":"tabulated","samples":[["y","x"],...]}`, each with an optional
/// `"s"` (declared Lipschitz constant, default 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    #[serde(flatten)]
    pub kind: CurveSpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpecKind {
    Linear {
        slope: String,
    },
    PolyImplicit {
        coeffs: Vec<(u32, u32, String)>,
        #[serde(default)]
        branch: usize,
    },
    Tabulated {
        samples: Vec<(String, String)>,
    },
}

/// Real roots of `sum poly[i] x^i`, ascending.
///
/// Roots of the derivative cut the real line into monotone pieces; each piece
/// holds at most one root, found by bisection.
pub(crate) fn real_roots(poly: &[f64]) -> Vec<f64> {
    let mut p = poly.to_vec();
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    while p.len() > 1 && p[p.len() - 1].abs() <= 1e-14 * scale {
        p.pop();
    }
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-p[0] / p[1]];
    }
    let lead = p[deg];
    let bound = 1.0 + p[..deg].iter().fold(0.0f64, |m, c| m.max((c / lead).abs()));
    let eval = |x: f64| p.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let deriv: Vec<f64> = (1..=deg).map(|i| p[i] * i as f64).collect();

    let mut cuts = vec![-bound];
    cuts.extend(real_roots(&deriv).into_iter().filter(|c| c.abs() < bound));
    cuts.push(bound);

    let tol = 1e-12 * scale.max(1.0);
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&l| (r - l).abs() > 1e-9 * (1.0 + r.abs())) {
            roots.push(r);
        }
    };
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (eval(lo), eval(hi));
        if flo.abs() <= tol {
            push(lo, &mut roots);
            continue;
        }
        if flo.signum() == fhi.signum() && fhi.abs() > tol {
            continue;
        }
        if fhi.abs() <= tol {
            continue; // picked up as the left end of the next piece
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if eval(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        push(0.5 * (lo + hi), &mut roots);
    }
    if let Some(&last) = cuts.last() {
        if eval(last).abs() <= tol {
            push(last, &mut roots);
        }
    }
    roots
}

fn check_domain(delta: f64, y: f64) -> Result<()> {
    if y.abs() > delta || !(delta > 0.0) {
        return Err(Error::Domain { y, delta });
    }
    Ok(())
}

/// `phi_delta(y) = f(y) + sqrt(delta^2 - y^2)`.
pub fn eval_phi(curve: &CurveModel, delta: f64, y: f64) -> Result<f64> {
    check_domain(delta, y)?;
    Ok(curve.eval(y) + (delta * delta - y * y).max(0.0).sqrt())
}

/// `psi_delta(y) = f(y) - sqrt(delta^2 - y^2)`.
pub fn eval_psi(curve: &CurveModel, delta: f64, y: f64) -> Result<f64> {
    check_domain(delta, y)?;
    Ok(curve.eval(y) - (delta * delta - y * y).max(0.0).sqrt())
}

/// `[lo, hi)`, except that the last interval of a partition also contains its
/// right end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NicenessCertificate {
    pub delta: f64,
    pub grid_step: f64,
    pub phi_partition: Vec<Interval>,
    pub psi_partition: Vec<Interval>,
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arc {
    Phi,
    Psi,
}

impl NicenessCertificate {
    /// A certificate with one piece per arc, usable when at most one value
    /// will ever be looked up.
    pub fn trivial(delta: f64) -> Self {
        let whole = vec![Interval { lo: -delta, hi: delta }];
        NicenessCertificate {
            delta,
            grid_step: 2.0 * delta,
            phi_partition: whole.clone(),
            psi_partition: whole,
            k: 1,
        }
    }

    pub fn partition(&self, arc: Arc) -> &[Interval] {
        match arc {
            Arc::Phi => &self.phi_partition,
            Arc::Psi => &self.psi_partition,
        }
    }

    /// Index of the piece containing `y`, after clamping `y` into
    /// `[-delta, delta]`.
    pub fn piece(&self, arc: Arc, y: f64) -> usize {
        let parts = self.partition(arc);
        let y = y.clamp(-self.delta, self.delta);
        parts.partition_point(|iv| iv.hi <= y).min(parts.len() - 1)
    }
}

fn grid(delta: f64, grid_step: f64) -> Vec<f64> {
    let n = ((2.0 * delta) / grid_step).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| if i == n { delta } else { (-delta + i as f64 * grid_step).clamp(-delta, delta) })
        .collect()
}

/// Greedy maximal weakly-monotone runs of `values` sampled at `ys`.
fn monotone_runs(ys: &[f64], values: &[f64]) -> Vec<Interval> {
    let mut starts = vec![0usize];
    let mut dir = 0i8;
    for i in 1..values.len() {
        let d = values[i] - values[i - 1];
        if d.abs() <= MONOTONE_TOLERANCE {
            continue;
        }
        let sign = if d > 0.0 { 1 } else { -1 };
        if dir == 0 {
            dir = sign;
        } else if sign != dir {
            // The turning sample ends one run and starts the next.
            starts.push(i - 1);
            dir = sign;
        }
    }
    let last = ys.len() - 1;
    starts
        .iter()
        .enumerate()
        .map(|(k, &s)| Interval {
            lo: ys[s],
            hi: starts.get(k + 1).map_or(ys[last], |&e| ys[e]),
        })
        .collect()
}

/// Partition `[-delta, delta]` into maximal monotone runs of `phi_delta` and
/// `psi_delta` on the grid `-delta, -delta + grid_step, ..., delta`.
pub fn certify_niceness_f64(curve: &CurveModel, delta: f64, grid_step: f64) -> Result<NicenessCertificate> {
    if !(delta > 0.0) || !(grid_step > 0.0) {
        return Err(Error::Precondition("delta and grid_step must be positive".into()));
    }
    let ys = grid(delta, grid_step);
    let root: Vec<f64> = ys.iter().map(|y| (delta * delta - y * y).max(0.0).sqrt()).collect();
    let fs: Vec<f64> = ys.iter().map(|&y| curve.eval(y)).collect();
    let phi: Vec<f64> = fs.iter().zip(&root).map(|(f, r)| f + r).collect();
    let psi: Vec<f64> = fs.iter().zip(&root).map(|(f, r)| f - r).collect();
    let phi_partition = monotone_runs(&ys, &phi);
    let psi_partition = monotone_runs(&ys, &psi);
    let k = phi_partition.len().max(psi_partition.len());
    Ok(NicenessCertificate { delta, grid_step, phi_partition, psi_partition, k })
}

pub fn certify_niceness(curve: &CurveModel, delta: &Rat, grid_step: &Rat) -> Result<NicenessCertificate> {
    if !delta.is_positive() || !grid_step.is_positive() {
        return Err(Error::Precondition("delta and grid_step must be positive".into()));
    }
    certify_niceness_f64(curve, rat::to_f64(delta), rat::to_f64(grid_step))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub interval: (f64, f64),
    pub max_slope_observed: f64,
    pub pass: bool,
}

/// Largest slope between adjacent grid samples of `f` on `[y_lo, y_hi]`,
/// compared exactly against the declared constant whenever `f` is exact.
pub fn certify_lipschitz(curve: &CurveModel, y_lo: &Rat, y_hi: &Rat, grid_step: &Rat) -> Result<LipschitzReport> {
    if y_lo >= y_hi || !grid_step.is_positive() {
        return Err(Error::Precondition("need y_lo < y_hi and grid_step > 0".into()));
    }
    let mut ys = Vec::new();
    let mut y = y_lo.clone();
    while y < *y_hi {
        ys.push(y.clone());
        y += grid_step;
    }
    ys.push(y_hi.clone());

    let exact: Option<Vec<Rat>> = ys.iter().map(|y| curve.eval_exact(y)).collect();
    let (max_slope, pass) = match exact {
        Some(xs) => {
            let max = ys
                .windows(2)
                .zip(xs.windows(2))
                .map(|(y, x)| ((&x[1] - &x[0]) / (&y[1] - &y[0])).abs())
                .max()
                .unwrap_or_else(Rat::zero);
            let pass = max <= *curve.lipschitz();
            (max.to_f64().unwrap_or(f64::INFINITY), pass)
        }
        None => {
            let yf: Vec<f64> = ys.iter().map(rat::to_f64).collect();
            let xf: Vec<f64> = yf.iter().map(|&y| curve.eval(y)).collect();
            let max = yf
                .windows(2)
                .zip(xf.windows(2))
                .map(|(y, x)| ((x[1] - x[0]) / (y[1] - y[0])).abs())
                .fold(0.0f64, f64::max);
            (max, max <= rat::to_f64(curve.lipschitz()))
        }
    };
    Ok(LipschitzReport {
        interval: (rat::to_f64(y_lo), rat::to_f64(y_hi)),
        max_slope_observed: max_slope,
        pass,
    })
}
