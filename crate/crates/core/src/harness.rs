//! Experiment runner: builds instances, runs the validators, evaluates the
//! bound formulas and writes deterministic CSV / JSON / SVG reports.
//!
//! All implicit constants in the asymptotic bounds are taken to be 1. The
//! bounds are only reported as ratios; assertions are reserved for exact
//! identities and finite inequalities.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::curve::{CurveModel, CurveSpec, CurveSpecKind};
use crate::decompose::{
    decompose_all, verify_shallow_wiggle, verify_steep_order, verify_y_spacing, DecomposeContext, MonotoneCover,
    Provenance,
};
use crate::error::{Error, Result};
use crate::float::{float_profile, FloatPoint, TAU};
use crate::generators::{
    diagonal_lattice_mn, elliptic_strip_demo, equally_spaced_line, sqrt_axes, strip_instance, SamplerConfig,
    StripInstance,
};
use crate::geometry::PointSet;
use crate::incidence::build_system;
use crate::rat::{self, int, Rat};
use crate::stats::{rank_limits, DistanceTable};

pub const DEFAULT_EPSILON: f64 = 0.1;

/// `min{m^(14/15) n^(8/15 - eps), m^(3/4) n^(3/4), m^2, n^2}`.
pub fn delta_floor(m: f64, n: f64, epsilon: f64) -> f64 {
    let a = m.powf(14.0 / 15.0) * n.powf(8.0 / 15.0 - epsilon);
    let b = m.powf(0.75) * n.powf(0.75);
    a.min(b).min(m * m).min(n * n)
}

/// `m^(16/15) n^(22/15 + eps) + m^(5/4) n^(5/4) + n^2 + m^2`.
pub fn final_energy_bound(m: f64, n: f64, epsilon: f64) -> f64 {
    m.powf(16.0 / 15.0) * n.powf(22.0 / 15.0 + epsilon) + m.powf(1.25) * n.powf(1.25) + n * n + m * m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TBranch {
    /// `t = 8mn / (cE)`.
    Energy,
    /// `t = 1/m`.
    InverseM,
    /// `8mn / (cE) > 1`, so `E = O(mn)` and there is nothing to localize.
    Clamped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TSelection {
    #[serde(with = "rat::serde_rat")]
    pub t: Rat,
    pub branch: TBranch,
    pub note: &'static str,
}

/// `t = max{8mn / (cE), 1/m}`, clamped to 1.
///
/// Whenever `E <= 2mn^2` the result has `t n >= 1`; this is checked and a
/// failure is an assertion error.
pub fn t_selector(m: usize, n: usize, energy: u128, c: f64) -> Result<TSelection> {
    if energy == 0 || m == 0 || n == 0 {
        return Err(Error::Precondition("need E >= 1 and m, n >= 1".into()));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Precondition(format!("c = {c} is outside (0, 1]")));
    }
    let c = Rat::from_float(c).expect("finite");
    let (mr, nr) = (int(m as i64), int(n as i64));
    let e = Rat::from_integer(energy.into());
    let by_energy = int(8) * &mr * &nr / (c * e);
    let inv_m = int(1) / &mr;
    let (t, branch, note) = if by_energy > int(1) {
        (int(1), TBranch::Clamped, "t > 1 regime: E = O(mn)")
    } else if by_energy >= inv_m {
        (by_energy, TBranch::Energy, "t = 8mn/(cE)")
    } else {
        (inv_m, TBranch::InverseM, "t = 1/m")
    };
    if energy <= 2 * (m as u128) * (n as u128) * (n as u128) && &t * &nr < int(1) {
        return Err(Error::Assertion(
            json!({"check": "t_selector", "m": m, "n": n, "energy": energy.to_string(), "t": t.to_string()})
                .to_string(),
        ));
    }
    Ok(TSelection { t, branch, note })
}

/// Counting from the proof that `E_t` is large: along a list monotone in
/// both coordinates, with `s = ceil(t l / 8) - 1`, count the `j` for which
/// both `(a_j, a_{j+s})` and `(p_j, p_{j+s})` are t-close. Each such `j`
/// yields `s + 1` distinct close quadruples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ListWitness {
    pub ell: usize,
    pub s: usize,
    pub good: usize,
    pub witness: u128,
}

/// `ranks[j] = (i_1(a_j), i_2(p_j))` along the list. `None` when
/// `l < 8 / t`, where `s` would be negative.
pub fn list_witness(ranks: &[(usize, usize)], t: &Rat, m: usize, n: usize) -> Option<ListWitness> {
    let ell = ranks.len();
    let tl = t * int(ell as i64);
    if tl < int(8) {
        return None;
    }
    let s = (rat::ceil(&(tl / int(8))) - num_bigint::BigInt::from(1)).to_usize().expect("small");
    let (l1, l2) = rank_limits(t, m, n);
    let good = (0..ell - s)
        .filter(|&j| {
            let (a0, p0) = ranks[j];
            let (a1, p1) = ranks[j + s];
            (a0.abs_diff(a1) as u64) <= l1 && (p0.abs_diff(p1) as u64) <= l2
        })
        .count();
    Some(ListWitness { ell, s, good, witness: good as u128 * (s as u128 + 1) })
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessRow {
    #[serde(with = "rat::serde_rat")]
    pub delta_sq: Rat,
    pub ell: usize,
    pub witness: Option<ListWitness>,
    /// Close quadruples at this distance.
    pub proximity_energy: u128,
    pub status: &'static str,
}

/// Apply [`list_witness`] to the longest list of every cover and check
/// `16 * witness >= t l^2` and `witness <= E_t` at that distance.
pub fn run_proximity_witness(table: &DistanceTable<'_>, covers: &[MonotoneCover], t: &Rat) -> Result<Vec<WitnessRow>> {
    let (m, n) = (table.p1().len(), table.p2().len());
    covers
        .par_iter()
        .enumerate()
        .map(|(g, cover)| {
            let (et, _) = table.proximity_energy_at(g, t);
            let Some(list) = cover.longest() else {
                return Ok(WitnessRow {
                    delta_sq: cover.delta_sq.clone(),
                    ell: 0,
                    witness: None,
                    proximity_energy: et,
                    status: "proof regime not entered",
                });
            };
            let ranks: Vec<(usize, usize)> =
                list.pairs.iter().map(|p| (table.x_rank(p.a_idx), table.y_rank(p.p_idx))).collect();
            let ell = ranks.len();
            let Some(w) = list_witness(&ranks, t, m, n) else {
                return Ok(WitnessRow {
                    delta_sq: cover.delta_sq.clone(),
                    ell,
                    witness: None,
                    proximity_energy: et,
                    status: "proof regime not entered",
                });
            };
            let lhs = Rat::from_integer((16 * w.witness).into());
            let rhs = t * int((ell * ell) as i64);
            if lhs < rhs || w.witness > et {
                return Err(Error::Assertion(
                    json!({
                        "check": "proximity_witness",
                        "delta_sq": cover.delta_sq.to_string(),
                        "t": t.to_string(),
                        "list": list.provenance.tag(),
                        "ell": ell,
                        "s": w.s,
                        "good": w.good,
                        "witness": w.witness.to_string(),
                        "proximity_energy_at_delta": et.to_string(),
                    })
                    .to_string(),
                ));
            }
            Ok(WitnessRow {
                delta_sq: cover.delta_sq.clone(),
                ell,
                witness: Some(w),
                proximity_energy: et,
                status: "checked",
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares line through `(ln n, ln value)`.
pub fn exponent_fit(series: &[(f64, f64)]) -> Result<ExponentFit> {
    if series.len() < 3 {
        return Err(Error::Precondition("need at least three points".into()));
    }
    if series.iter().any(|&(n, v)| !(n > 0.0 && v > 0.0)) {
        return Err(Error::Precondition("all sizes and values must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(n, v)| (n.ln(), v.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("all sizes are equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ExponentFit { slope, intercept: my - slope * mx, r2 })
}

/// Log-log scatter plot with the fitted line.
pub fn svg_loglog(title: &str, series: &[(f64, f64)], fit: Option<&ExponentFit>) -> String {
    let (w, h, pad) = (480.0, 360.0, 48.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(out, r#"<text x="{pad}" y="24" font-family="sans-serif" font-size="14">{title}</text>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    if !pts.is_empty() {
        let (x0, x1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
        let (y0, y1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
        let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * pad);
        for &(x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
        }
        if let Some(f) = fit {
            let (ya, yb) = (f.intercept + f.slope * x0, f.intercept + f.slope * x1);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick"/>"#,
                sx(x0),
                sy(ya),
                sx(x1),
                sy(yb)
            );
            let _ = writeln!(
                out,
                r#"<text x="{pad}" y="{}" font-family="sans-serif" font-size="12">slope {:.4}, r2 {:.4}</text>"#,
                h - 12.0,
                f.slope,
                f.r2
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Line,
    Sqrt,
    Diagonal,
    Strip,
    Elliptic,
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown construction `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    CauchySchwarz,
    EnergyCeiling,
    YSpacing,
    MonotoneCover,
    SteepOrder,
    ShallowWiggle,
    ProximityWitness,
    Incidence,
    TMonotone,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::CauchySchwarz,
        Check::EnergyCeiling,
        Check::YSpacing,
        Check::MonotoneCover,
        Check::SteepOrder,
        Check::ShallowWiggle,
        Check::ProximityWitness,
        Check::Incidence,
        Check::TMonotone,
    ];
}

/// Parameters of one generated instance.
#[derive(Clone, Debug)]
pub struct InstanceParams {
    pub construction: Construction,
    pub m: usize,
    pub n: usize,
    pub w: Rat,
    pub curve: CurveModel,
    pub snap_bits: u32,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub enum Instance {
    /// Strip points with witnesses; every validator applies.
    Strip(StripInstance),
    /// Exact sets without strip data.
    Plain { p1: PointSet, p2: PointSet },
    Float { p1: Vec<FloatPoint>, p2: Vec<FloatPoint> },
}

/// * `line`: `m` points `(i, 0)` and `n` points `(j, 1)`;
/// * `sqrt`: `(sqrt i, 0)` and `(0, sqrt j)`, both of size `n`;
/// * `diagonal`: `(i, 0)` for `i <= m` and `(j, j)` for `j <= n`;
/// * `strip`: `n` sampled strip points around the curve and `m` line points;
/// * `elliptic`: the same around the elliptic branch, with `m = n`.
pub fn build_instance(p: &InstanceParams) -> Result<Instance> {
    match p.construction {
        Construction::Line => Ok(Instance::Plain {
            p1: equally_spaced_line(p.m, &int(1), &int(0))?,
            p2: equally_spaced_line(p.n, &int(1), &int(1))?,
        }),
        Construction::Sqrt => {
            let (p1, p2) = sqrt_axes(p.n);
            Ok(Instance::Float { p1, p2 })
        }
        Construction::Diagonal => {
            let (p1, p2) = diagonal_lattice_mn(p.m, p.n)?;
            Ok(Instance::Plain { p1, p2 })
        }
        Construction::Strip => {
            let mut cfg = SamplerConfig::new(p.curve.clone(), p.w.clone(), p.n, p.seed);
            cfg.snap_bits = p.snap_bits;
            Ok(Instance::Strip(strip_instance(&cfg, p.m)?))
        }
        Construction::Elliptic => Ok(Instance::Strip(elliptic_strip_demo(p.n, &p.w, p.seed)?.instance)),
    }
}

fn default_curve() -> CurveSpec {
    CurveSpec { kind: CurveSpecKind::Linear { slope: "1/2".into() }, s: Some("1".into()) }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub construction: Construction,
    pub curve: CurveSpec,
    #[serde(with = "rat::serde_rat")]
    pub w: Rat,
    pub snap_bits: u32,
    /// `(m, n)` pairs.
    pub sizes: Vec<(usize, usize)>,
    pub seeds: Vec<u64>,
    #[serde(with = "rat::serde_rat_vec")]
    pub t_grid: Vec<Rat>,
    pub epsilon: f64,
    /// Defaults to `epsilon / 2`.
    pub eta: Option<f64>,
    /// `c` for the t-selector.
    pub c_probe: f64,
    pub niceness_samples: usize,
    pub checks: BTreeSet<Check>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            construction: Construction::Strip,
            curve: default_curve(),
            w: int(1),
            snap_bits: 20,
            sizes: vec![(16, 16), (32, 32), (64, 64)],
            seeds: vec![1],
            t_grid: vec![rat::rat(1, 8), rat::rat(1, 4), rat::rat(1, 2), int(1)],
            epsilon: DEFAULT_EPSILON,
            eta: None,
            c_probe: 1.0,
            niceness_samples: 4096,
            checks: Check::ALL.into_iter().collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || self.eta.is_some_and(|e| !(e > 0.0)) {
            return Err(Error::Config("epsilon and eta must be positive".into()));
        }
        if self.sizes.iter().any(|&(m, n)| m == 0 || n == 0) {
            return Err(Error::Config("sizes must be positive".into()));
        }
        if self.t_grid.iter().any(|t| t.is_negative_or_above_one()) {
            return Err(Error::Config("t values must lie in [0, 1]".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("need at least one seed".into()));
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(self.epsilon / 2.0)
    }

    fn has(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }
}

trait UnitInterval {
    fn is_negative_or_above_one(&self) -> bool;
}

impl UnitInterval for Rat {
    fn is_negative_or_above_one(&self) -> bool {
        *self < Rat::zero() || *self > int(1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub delta_count: usize,
    pub energy: u128,
    /// `m^2 n^2 / |Delta|`; exact for exact instances.
    pub cs_floor: String,
    pub delta_floor: f64,
    /// `|Delta| / delta_floor`.
    pub ratio: f64,
    pub final_energy_bound: f64,
    pub energy_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TRow {
    #[serde(with = "rat::serde_rat")]
    pub t: Rat,
    pub proximity_energy: u128,
    pub degenerate: u128,
    pub incidences: Option<u128>,
    pub points: Option<usize>,
    pub curves: Option<usize>,
    pub sz_bound: f64,
    pub witness_checked: usize,
    pub witness_skipped: usize,
    /// `E_t / (t E)`.
    pub c_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub construction: Construction,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub bounds: BoundReport,
    pub t_selection: Option<TSelection>,
    pub t_rows: Vec<TRow>,
    pub skipped: Vec<String>,
    pub checks_run: Vec<Check>,
}

fn assertion(check: &str, detail: serde_json::Value) -> Error {
    let mut v = json!({ "check": check });
    if let (Some(o), serde_json::Value::Object(d)) = (v.as_object_mut(), detail) {
        o.extend(d);
    }
    Error::Assertion(v.to_string())
}

/// Run every configured check on one instance.
pub fn run_instance(cfg: &ExperimentConfig, params: &InstanceParams) -> Result<RunReport> {
    let (m, n) = (params.m, params.n);
    let mut skipped = Vec::new();
    let mut checks_run = BTreeSet::new();
    let inst = build_instance(params)?;
    let (p1, p2, strip) = match &inst {
        Instance::Float { p1, p2 } => {
            let prof = float_profile(p1, p2, TAU);
            let (mf, nf) = (p1.len() as f64, p2.len() as f64);
            let d = prof.num_distances();
            let e = prof.energy();
            let tf = delta_floor(mf, nf, cfg.epsilon);
            let fb = final_energy_bound(mf, nf, cfg.epsilon);
            return Ok(RunReport {
                construction: params.construction,
                m: p1.len(),
                n: p2.len(),
                seed: params.seed,
                bounds: BoundReport {
                    delta_count: d,
                    energy: e,
                    cs_floor: format!("{}", mf * mf * nf * nf / d as f64),
                    delta_floor: tf,
                    ratio: d as f64 / tf,
                    final_energy_bound: fb,
                    energy_ratio: e as f64 / fb,
                },
                t_selection: None,
                t_rows: Vec::new(),
                skipped: vec!["floating instance: only distance counts are reported".into()],
                checks_run: Vec::new(),
            });
        }
        Instance::Plain { p1, p2 } => (p1, p2, None),
        Instance::Strip(s) => (&s.p1, &s.p2, Some(s)),
    };
    let (m, n) = if matches!(params.construction, Construction::Elliptic) { (p1.len(), p2.len()) } else { (m, n) };

    let table = DistanceTable::new(p1, p2);
    let delta_count = table.num_distances();
    let energy = table.energy();
    let mn = (m * n) as u128;
    let cs_floor = Rat::from_integer((mn * mn).into()) / int(delta_count as i64);
    if cfg.has(Check::CauchySchwarz) {
        checks_run.insert(Check::CauchySchwarz);
        if Rat::from_integer(energy.into()) < cs_floor {
            return Err(assertion("cauchy_schwarz", json!({"energy": energy.to_string(), "floor": cs_floor.to_string()})));
        }
    }
    if cfg.has(Check::EnergyCeiling) && p1.lies_on_x_axis() {
        checks_run.insert(Check::EnergyCeiling);
        if energy > 2 * mn * n as u128 {
            return Err(assertion("energy_ceiling", json!({"energy": energy.to_string(), "m": m, "n": n})));
        }
    }
    let (mf, nf) = (m as f64, n as f64);
    let tf = delta_floor(mf, nf, cfg.epsilon);
    let fb = final_energy_bound(mf, nf, cfg.epsilon);
    let bounds = BoundReport {
        delta_count,
        energy,
        cs_floor: cs_floor.to_string(),
        delta_floor: tf,
        ratio: delta_count as f64 / tf,
        final_energy_bound: fb,
        energy_ratio: energy as f64 / fb,
    };
    let t_selection = Some(t_selector(m, n, energy, cfg.c_probe)?);

    let mut covers = None;
    if let Some(s) = strip {
        if cfg.has(Check::YSpacing) {
            checks_run.insert(Check::YSpacing);
            if let Err(v) = verify_y_spacing(&s.p2, &s.w, &s.s) {
                return Err(Error::Precondition(format!(
                    "strip points {} and {} violate the {:?} bound",
                    v.p, v.q, v.bound
                )));
            }
        }
        let wants_cover = [Check::MonotoneCover, Check::SteepOrder, Check::ShallowWiggle, Check::ProximityWitness]
            .iter()
            .any(|&c| cfg.has(c));
        if wants_cover {
            let ctx = DecomposeContext {
                curve: &s.curve,
                witnesses: &s.witnesses,
                w: s.w.clone(),
                s: s.s.clone(),
                niceness_samples: cfg.niceness_samples,
            };
            let cs = decompose_all(&table, &ctx)?;
            if cfg.has(Check::MonotoneCover) {
                checks_run.insert(Check::MonotoneCover);
                for c in &cs {
                    if c.counts.short > 1 || !c.meets_fraction_bound(c.k) {
                        return Err(assertion(
                            "monotone_cover",
                            json!({"delta_sq": c.delta_sq.to_string(), "short": c.counts.short,
                                   "max_list": c.max_list_len(), "total": c.total, "k": c.k}),
                        ));
                    }
                }
            }
            if cfg.has(Check::SteepOrder) {
                checks_run.insert(Check::SteepOrder);
                check_steep_lists(&cs)?;
            }
            if cfg.has(Check::ShallowWiggle) {
                checks_run.insert(Check::ShallowWiggle);
                check_shallow_lists(&cs, s)?;
            }
            covers = Some(cs);
        }
    } else {
        skipped.push("no strip data: strip validators skipped".into());
    }

    let mut t_rows = Vec::new();
    if cfg.has(Check::TMonotone) {
        checks_run.insert(Check::TMonotone);
        let e0 = table.proximity_energy(&Rat::zero())?.energy;
        let e1 = table.proximity_energy(&int(1))?.energy;
        if e0 != mn || e1 != energy {
            return Err(assertion(
                "t_endpoints",
                json!({"e0": e0.to_string(), "mn": mn.to_string(), "e1": e1.to_string(), "energy": energy.to_string()}),
            ));
        }
    }
    let mut grid = cfg.t_grid.clone();
    grid.sort();
    grid.dedup();
    let mut last: Option<(Rat, u128)> = None;
    for t in &grid {
        if t * int(m as i64) < int(1) || t * int(n as i64) < int(1) {
            skipped.push(format!("t = {t}: t m < 1 or t n < 1 at (m, n) = ({m}, {n})"));
            continue;
        }
        let rep = table.proximity_energy(t)?;
        if cfg.has(Check::TMonotone) {
            if let Some((lt, le)) = &last {
                if rep.energy < *le {
                    return Err(assertion(
                        "t_monotone",
                        json!({"t_prev": lt.to_string(), "e_prev": le.to_string(),
                               "t": t.to_string(), "e": rep.energy.to_string()}),
                    ));
                }
            }
        }
        last = Some((t.clone(), rep.energy));

        let (mut incidences, mut points, mut curves) = (None, None, None);
        if cfg.has(Check::Incidence) && p1.lies_on_x_axis() {
            checks_run.insert(Check::Incidence);
            let sys = build_system(p1, p2, t)?;
            let bad_sizes = int(sys.points.len() as i64) > sys.points_bound()
                || int(sys.curves.len() as i64) > sys.curves_bound();
            let bad_degenerate = strip.is_some() && sys.degenerate_quadruples > 4 * mn;
            if sys.total() != rep.energy || sys.degenerate_quadruples != rep.degenerate_count || bad_sizes || bad_degenerate {
                return Err(assertion(
                    "incidence",
                    json!({"t": t.to_string(), "incidences": sys.incidences.to_string(),
                           "degenerate": sys.degenerate_quadruples.to_string(),
                           "proximity_energy": rep.energy.to_string(),
                           "points": sys.points.len(), "curves": sys.curves.len()}),
                ));
            }
            incidences = Some(sys.incidences);
            points = Some(sys.points.len());
            curves = Some(sys.curves.len());
        }

        let (mut checked, mut skipped_w) = (0, 0);
        if let (Some(cs), true) = (&covers, cfg.has(Check::ProximityWitness)) {
            checks_run.insert(Check::ProximityWitness);
            for row in run_proximity_witness(&table, cs, t)? {
                if row.witness.is_some() {
                    checked += 1;
                } else {
                    skipped_w += 1;
                }
            }
        }
        let tf = rat::to_f64(t);
        t_rows.push(TRow {
            t: t.clone(),
            proximity_energy: rep.energy,
            degenerate: rep.degenerate_count,
            incidences,
            points,
            curves,
            sz_bound: crate::incidence::sz_bound(tf, mf, nf, cfg.eta()),
            witness_checked: checked,
            witness_skipped: skipped_w,
            c_ratio: rep.energy as f64 / (tf * energy as f64),
        });
    }

    Ok(RunReport {
        construction: params.construction,
        m,
        n,
        seed: params.seed,
        bounds,
        t_selection,
        t_rows,
        skipped,
        checks_run: checks_run.into_iter().collect(),
    })
}

fn check_steep_lists(covers: &[MonotoneCover]) -> Result<()> {
    for c in covers {
        for l in &c.lists {
            let mut pairs = l.pairs.clone();
            match l.provenance {
                Provenance::SteepPositive => {}
                Provenance::SteepNegative => pairs.reverse(),
                _ => continue,
            }
            if let Err(f) = verify_steep_order(&pairs) {
                return Err(assertion(
                    "steep_order",
                    json!({"delta_sq": c.delta_sq.to_string(), "list": l.provenance.tag(), "failure": format!("{f:?}")}),
                ));
            }
        }
    }
    Ok(())
}

/// Absolute slack allowed on the `13 w s` comparison.
pub const WIGGLE_TOLERANCE: f64 = 1e-8;

fn check_shallow_lists(covers: &[MonotoneCover], s: &StripInstance) -> Result<()> {
    for c in covers {
        let delta = rat::to_f64(&c.delta_sq).sqrt();
        for l in &c.lists {
            if !matches!(l.provenance, Provenance::ShallowInterval(_)) {
                continue;
            }
            for pair in &l.pairs {
                let margin = verify_shallow_wiggle(pair, &s.witnesses[pair.p_idx], &s.curve, delta, &s.w, &s.s)?;
                if margin < -WIGGLE_TOLERANCE {
                    return Err(assertion(
                        "shallow_wiggle",
                        json!({"delta_sq": c.delta_sq.to_string(), "a": pair.a.to_string(),
                               "p": pair.p.to_string(), "margin": margin}),
                    ));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub eta: f64,
    pub runs: Vec<RunReport>,
    /// `|Delta|` against `n`.
    pub delta_fit: Option<ExponentFit>,
    /// `E` against `n`.
    pub energy_fit: Option<ExponentFit>,
    /// Smallest `E_t / (t E)` seen over all runs and t values.
    pub c_infimum: Option<f64>,
}

/// Run every (size, seed) pair, in parallel, and assemble the report in
/// configuration order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let curve = CurveModel::from_spec(&cfg.curve)?;
    let jobs: Vec<InstanceParams> = cfg
        .sizes
        .iter()
        .flat_map(|&(m, n)| {
            let curve = curve.clone();
            cfg.seeds.iter().map(move |&seed| InstanceParams {
                construction: cfg.construction,
                m,
                n,
                w: cfg.w.clone(),
                curve: curve.clone(),
                snap_bits: cfg.snap_bits,
                seed,
            })
        })
        .collect();
    let runs: Vec<RunReport> = jobs.par_iter().map(|p| run_instance(cfg, p)).collect::<Result<_>>()?;

    let series = |f: &dyn Fn(&RunReport) -> f64| -> Vec<(f64, f64)> { runs.iter().map(|r| (r.n as f64, f(r))).collect() };
    let delta_fit = exponent_fit(&series(&|r| r.bounds.delta_count as f64)).ok();
    let energy_fit = exponent_fit(&series(&|r| r.bounds.energy as f64)).ok();
    let c_infimum = runs
        .iter()
        .flat_map(|r| r.t_rows.iter())
        .filter(|row| !row.t.is_zero())
        .map(|row| row.c_ratio)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    Ok(ExperimentReport { config: cfg.clone(), eta: cfg.eta(), runs, delta_fit, energy_fit, c_infimum })
}

impl ExperimentReport {
    pub fn runs_csv(&self) -> String {
        let mut out = String::from(
            "construction,m,n,seed,delta_count,energy,cs_floor,delta_floor,ratio,final_energy_bound,energy_ratio,t_selected,t_branch\n",
        );
        for r in &self.runs {
            let b = &r.bounds;
            let (t, branch) = match &r.t_selection {
                Some(s) => (s.t.to_string(), format!("{:?}", s.branch)),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{:?},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.construction,
                r.m,
                r.n,
                r.seed,
                b.delta_count,
                b.energy,
                b.cs_floor,
                b.delta_floor,
                b.ratio,
                b.final_energy_bound,
                b.energy_ratio,
                t,
                branch
            );
        }
        out
    }

    pub fn t_sweep_csv(&self) -> String {
        let mut out = String::from(
            "m,n,seed,t,proximity_energy,degenerate,incidences,points,curves,sz_bound,witness_checked,witness_skipped,c_ratio\n",
        );
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.runs {
            for row in &r.t_rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.m,
                    r.n,
                    r.seed,
                    row.t,
                    row.proximity_energy,
                    row.degenerate,
                    opt(row.incidences.map(|v| v.to_string())),
                    opt(row.points.map(|v| v.to_string())),
                    opt(row.curves.map(|v| v.to_string())),
                    row.sz_bound,
                    row.witness_checked,
                    row.witness_skipped,
                    row.c_ratio
                );
            }
        }
        out
    }

    /// Write `runs.csv`, `t_sweep.csv`, `summary.json` and `delta_fit.svg`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("runs.csv"), self.runs_csv())?;
        std::fs::write(dir.join("t_sweep.csv"), self.t_sweep_csv())?;
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(self)? + "\n")?;
        let series: Vec<(f64, f64)> = self.runs.iter().map(|r| (r.n as f64, r.bounds.delta_count as f64)).collect();
        std::fs::write(
            dir.join("delta_fit.svg"),
            svg_loglog("distinct distances against n", &series, self.delta_fit.as_ref()),
        )?;
        Ok(())
    }
}
