//! Acceptance suite. Each criterion returns `Ok(summary)` or `Err(reason)`;
//! the single test prints one line per criterion and fails if any failed.

use std::collections::{BTreeSet, HashMap};
use std::panic::catch_unwind;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use strip_distances::curve::{certify_niceness, eval_phi, eval_psi, CurveModel};
use strip_distances::decompose::{
    decompose_all, verify_shallow_wiggle, verify_steep_order, verify_y_spacing, DecomposeContext, MonotoneCover,
    Pair, Provenance, YSpacingBound,
};
use strip_distances::float::{float_profile, TAU};
use strip_distances::generators::{
    circle_strip_instance, diagonal_lattice, diagonal_strip_instance, equally_spaced_line, sqrt_axes, strip_instance,
    strip_sampler, SamplerConfig, StripInstance,
};
use strip_distances::geometry::{rank_indices, squared_distance, Point, PointSet, Role};
use strip_distances::harness::{run_experiment, run_proximity_witness, ExperimentConfig};
use strip_distances::incidence::build_system;
use strip_distances::io::write_point_set;
use strip_distances::rat::{int, rat, to_f64, Rat};
use strip_distances::stats::{rank_limits, DistanceTable};

type Outcome = Result<String, String>;

// ---------------------------------------------------------------- oracles

/// Squared distance -> multiplicity, by a plain hash map.
fn oracle_profile(p1: &PointSet, p2: &PointSet) -> HashMap<Rat, u128> {
    let mut h = HashMap::new();
    for a in p1.iter() {
        for p in p2.iter() {
            *h.entry(squared_distance(a, p)).or_insert(0) += 1;
        }
    }
    h
}

fn oracle_energy(p1: &PointSet, p2: &PointSet) -> u128 {
    oracle_profile(p1, p2).values().map(|r| r * r).sum()
}

/// `E_t` by enumerating pairs of pairs at each distance.
fn oracle_proximity_energy(p1: &PointSet, p2: &PointSet, t: &Rat) -> u128 {
    let (r1, r2) = (rank_indices(p1), rank_indices(p2));
    let (l1, l2) = rank_limits(t, p1.len(), p2.len());
    let mut groups: HashMap<Rat, Vec<(usize, usize)>> = HashMap::new();
    for a in 0..p1.len() {
        for p in 0..p2.len() {
            groups.entry(squared_distance(&p1[a], &p2[p])).or_default().push((r1.x_rank(a), r2.y_rank(p)));
        }
    }
    let mut total = 0;
    for g in groups.values() {
        for x in g {
            for y in g {
                if (x.0.abs_diff(y.0) as u64) <= l1 && (x.1.abs_diff(y.1) as u64) <= l2 {
                    total += 1;
                }
            }
        }
    }
    total
}

/// Every pair of entries ordered the same way in `p_y` (strictly) and, across
/// the whole list, in one direction in `a_x`.
fn pairwise_monotone(list: &[Pair]) -> bool {
    let (mut up, mut down) = (false, false);
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            if list[j].p.y <= list[i].p.y {
                return false;
            }
            up |= list[j].a.x > list[i].a.x;
            down |= list[j].a.x < list[i].a.x;
        }
    }
    !(up && down)
}

// -------------------------------------------------------------- instances

fn sampler_config(c: usize, seed: u64) -> (SamplerConfig, usize) {
    let slopes: [(i64, i64); 4] = [(1, 2), (1, 1), (2, 1), (-1, 1)];
    let (num, den) = slopes[c % 4];
    let s = int((num.abs() + den - 1) / den).max(int(1));
    let curve = CurveModel::linear(rat(num, den), s).unwrap();
    let w = if c.is_multiple_of(5) { rat(1, 2) } else { int(1) };
    let n = 5 + (c * 37) % 196;
    let m = 5 + (c * 53) % 196;
    let mut cfg = SamplerConfig::new(curve, w, n, seed);
    cfg.snap_bits = if c.is_multiple_of(3) { 0 } else { 20 };
    (cfg, m)
}

fn sampler_instance(c: usize, seed: u64) -> StripInstance {
    let (cfg, m) = sampler_config(c, seed);
    strip_instance(&cfg, m).unwrap_or_else(|e| panic!("config {c} seed {seed}: {e}"))
}

/// The 200 instances of the energy checks: 40 configurations x 5 seeds.
fn energy_instances() -> Vec<StripInstance> {
    (0..40).flat_map(|c| (0..5).map(move |s| sampler_instance(c, 100 + s))).collect()
}

/// Instances for the decomposition checks, all with `m, n <= 300`.
fn cover_instances() -> Vec<(String, StripInstance)> {
    let mut out = Vec::new();
    for (i, n) in [40, 120, 300, 300].into_iter().enumerate() {
        for c in 0..4 {
            let (mut cfg, _) = sampler_config(c + 4 * i, 7 + i as u64);
            cfg.n = n;
            let half = &cfg.u_factor * &cfg.w * cfg.curve.lipschitz() * int(n as i64);
            cfg.y_range = (-half.clone(), half);
            out.push((format!("sampler c={} n={n}", c + 4 * i), strip_instance(&cfg, n).unwrap()));
        }
    }
    for n in [16, 64, 150, 300] {
        out.push((format!("diagonal n={n}"), diagonal_strip_instance(n).unwrap()));
    }
    for (i, n) in [50, 150, 300].into_iter().enumerate() {
        out.push((format!("circle n={n}"), circle_strip_instance(n, i as u64).unwrap()));
    }
    out
}

fn covers_of(inst: &StripInstance, table: &DistanceTable<'_>) -> Result<Vec<MonotoneCover>, String> {
    let ctx = DecomposeContext {
        curve: &inst.curve,
        witnesses: &inst.witnesses,
        w: inst.w.clone(),
        s: inst.s.clone(),
        niceness_samples: 4096,
    };
    decompose_all(table, &ctx).map_err(|e| e.to_string())
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let el = start.elapsed();
    if el > limit {
        return Err(format!("took {el:.1?}, limit {limit:?}"));
    }
    Ok(())
}

// -------------------------------------------------------------- criteria

fn c1_cauchy_schwarz() -> Outcome {
    let start = Instant::now();
    let insts = energy_instances();
    for (i, inst) in insts.iter().enumerate() {
        let table = DistanceTable::new(&inst.p1, &inst.p2);
        let (m, n) = (inst.p1.len() as i64, inst.p2.len() as i64);
        let e = table.energy();
        if e != oracle_energy(&inst.p1, &inst.p2) {
            return Err(format!("instance {i}: energy disagrees with the oracle"));
        }
        // E |Delta| >= m^2 n^2, in integers.
        if e * (table.num_distances() as u128) < (m * m * n * n) as u128 {
            return Err(format!("instance {i}: E = {e} below m^2 n^2 / |Delta|"));
        }
    }
    let p1 = PointSet::on_line([int(3)]).unwrap();
    let p2 = PointSet::free(vec![Point::from_ints(0, 4)]).unwrap();
    let t = DistanceTable::new(&p1, &p2);
    if t.energy() * t.num_distances() as u128 != 1 {
        return Err("single pair: equality fails".into());
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("{} instances, equality on the single pair, {:.1?}", insts.len(), start.elapsed()))
}

fn c2_energy_ceiling() -> Outcome {
    let mut sets: Vec<(PointSet, PointSet)> =
        energy_instances().into_iter().map(|i| (i.p1, i.p2)).collect();
    for (_, i) in cover_instances() {
        sets.push((i.p1, i.p2));
    }
    for n in [1, 2, 5, 40] {
        sets.push(diagonal_lattice(n).unwrap());
        sets.push((equally_spaced_line(n, &int(1), &int(0)).unwrap(), equally_spaced_line(n, &int(1), &int(1)).unwrap()));
    }
    for (k, (p1, p2)) in sets.iter().enumerate() {
        assert!(p1.lies_on_x_axis());
        let (m, n) = (p1.len() as u128, p2.len() as u128);
        let e = DistanceTable::new(p1, p2).energy();
        if e > 2 * m * n * n {
            return Err(format!("instance {k}: E = {e} > 2 m n^2"));
        }
    }
    Ok(format!("{} instances", sets.len()))
}

fn c3_y_spacing() -> Outcome {
    let mut checked = 0;
    for seed in 0..120u64 {
        let (cfg, _) = sampler_config(seed as usize % 40, seed);
        let (p2, _) = strip_sampler(&cfg).map_err(|e| e.to_string())?;
        if let Err(v) = verify_y_spacing(&p2, &cfg.w, cfg.curve.lipschitz()) {
            return Err(format!("seed {seed}: {v:?}"));
        }
        checked += 1;
    }
    // Under-spaced input: rejected by the spacing check and by validation.
    let close = PointSet::new(vec![Point::from_ints(0, 0), Point::from_ints(1, 10)], Role::OnStrip, int(0)).unwrap();
    match verify_y_spacing(&close, &int(1), &int(1)) {
        Err(v) if v.bound == YSpacingBound::VerticalGap => {}
        other => return Err(format!("counter-input accepted: {other:?}")),
    }
    if PointSet::new(vec![Point::from_ints(0, 0), Point::from_ints(1, 10)], Role::OnStrip, int(32)).is_ok() {
        return Err("under-spaced set passed validation".into());
    }
    Ok(format!("{checked} seeds, counter-input rejected"))
}

fn c4_c5_covers() -> (Outcome, Outcome) {
    let start = Instant::now();
    let (mut deltas, mut lists, mut steep, mut shallow, mut longest) = (0usize, 0usize, 0usize, 0usize, 0usize);
    let mut min_margin = f64::INFINITY;
    let mut err4 = None;
    let mut err5 = None;
    'outer: for (name, inst) in cover_instances() {
        let table = DistanceTable::new(&inst.p1, &inst.p2);
        let covers = match covers_of(&inst, &table) {
            Ok(c) => c,
            Err(e) => {
                err4 = Some(format!("{name}: {e}"));
                break;
            }
        };
        for c in &covers {
            deltas += 1;
            let side_total = c.lists.iter().map(|l| l.pairs.len()).sum::<usize>();
            let mut seen = BTreeSet::new();
            for l in &c.lists {
                lists += 1;
                if !pairwise_monotone(&l.pairs) {
                    err4 = Some(format!("{name}: delta^2 = {}: list {} not monotone", c.delta_sq, l.provenance.tag()));
                    break 'outer;
                }
                for p in &l.pairs {
                    seen.insert((p.a_idx, p.p_idx));
                }
            }
            if seen.len() != side_total || c.covered != side_total {
                err4 = Some(format!("{name}: delta^2 = {}: lists overlap", c.delta_sq));
                break 'outer;
            }
            if c.counts.short > 1 {
                err4 = Some(format!("{name}: delta^2 = {}: {} short pairs", c.delta_sq, c.counts.short));
                break 'outer;
            }
            if c.max_list_len() * 12.max(6 * c.k) < c.total {
                err4 = Some(format!(
                    "{name}: delta^2 = {}: longest list {} of {} (k = {})",
                    c.delta_sq,
                    c.max_list_len(),
                    c.total,
                    c.k
                ));
                break 'outer;
            }
            longest = longest.max(c.max_list_len());

            let delta = to_f64(&c.delta_sq).sqrt();
            for l in &c.lists {
                match l.provenance {
                    Provenance::SteepPositive | Provenance::SteepNegative => {
                        let mut v = l.pairs.clone();
                        if l.provenance == Provenance::SteepNegative {
                            v.reverse();
                        }
                        steep += 1;
                        if let Err(f) = verify_steep_order(&v) {
                            err5.get_or_insert(format!("{name}: steep list at {}: {f:?}", c.delta_sq));
                        }
                    }
                    Provenance::ShallowInterval(_) => {
                        for p in &l.pairs {
                            shallow += 1;
                            let m = verify_shallow_wiggle(p, &inst.witnesses[p.p_idx], &inst.curve, delta, &inst.w, &inst.s)
                                .unwrap();
                            min_margin = min_margin.min(m);
                            if m < -1e-8 {
                                err5.get_or_insert(format!("{name}: shallow pair at {} has margin {m}", c.delta_sq));
                            }
                        }
                    }
                    Provenance::ShortSingleton => {}
                }
            }
        }
    }
    let r4 = match err4 {
        Some(e) => Err(e),
        None => within(Duration::from_secs(300), start).map(|_| {
            format!("{deltas} distances, {lists} lists, longest {longest}, {:.1?}", start.elapsed())
        }),
    };
    let r5 = match err5 {
        Some(e) => Err(e),
        None => Ok(format!("{steep} steep lists, {shallow} shallow pairs, min margin {min_margin:.3}")),
    };
    (r4, r5)
}

fn c6_proximity_witness() -> Outcome {
    let ts = [rat(1, 4), rat(1, 8), rat(1, 16)];
    let (mut checked, mut instances) = (0usize, 0usize);
    let mut per_t = [0usize; 3];
    for i in 0..50u64 {
        let n = 130 + (i as usize * 17) % 171;
        let inst = circle_strip_instance(n, 1000 + i).map_err(|e| e.to_string())?;
        let table = DistanceTable::new(&inst.p1, &inst.p2);
        let covers = covers_of(&inst, &table)?;
        instances += 1;
        for (k, t) in ts.iter().enumerate() {
            let rows = run_proximity_witness(&table, &covers, t).map_err(|e| format!("instance {i}: {e}"))?;
            for row in rows.iter().filter(|r| r.witness.is_some()) {
                let ell = row.ell as u128;
                // Independent check of the bound itself: all close quadruples
                // at this distance, counted directly.
                let g = table.group_of(&row.delta_sq).unwrap();
                let pairs = table.group(g);
                let (l1, l2) = rank_limits(t, inst.p1.len(), inst.p2.len());
                let mut direct = 0u128;
                for &(a, p) in pairs {
                    for &(b, q) in pairs {
                        let close = (table.x_rank(a as usize).abs_diff(table.x_rank(b as usize)) as u64) <= l1
                            && (table.y_rank(p as usize).abs_diff(table.y_rank(q as usize)) as u64) <= l2;
                        direct += close as u128;
                    }
                }
                // 16 * count >= t l^2, with t = 1 / d.
                let d: u128 = [4, 8, 16][k];
                if 16 * direct * d < ell * ell || 16 * row.witness.as_ref().unwrap().witness * d < ell * ell {
                    return Err(format!("instance {i}, t = {t}: l = {ell}, E_t(delta) = {direct}"));
                }
                checked += 1;
                per_t[k] += 1;
            }
        }
    }
    if per_t.contains(&0) {
        return Err(format!("regime never entered for some t: {per_t:?}"));
    }
    Ok(format!("{instances} instances, {checked} (distance, t) checks, per t {per_t:?}"))
}

fn c7_incidence() -> Outcome {
    let mut insts: Vec<(String, PointSet, PointSet, bool)> = Vec::new();
    for c in 0..12 {
        let (mut cfg, _) = sampler_config(c, 55);
        cfg.n = 10 + 4 * c;
        let half = &cfg.u_factor * &cfg.w * cfg.curve.lipschitz() * int(cfg.n as i64);
        cfg.y_range = (-half.clone(), half);
        let i = strip_instance(&cfg, 8 + 3 * c).unwrap();
        insts.push((format!("sampler {c}"), i.p1, i.p2, true));
    }
    for n in [8, 24, 48] {
        let i = diagonal_strip_instance(n).unwrap();
        insts.push((format!("diagonal {n}"), i.p1, i.p2, true));
        let i = circle_strip_instance(n, n as u64).unwrap();
        insts.push((format!("circle {n}"), i.p1, i.p2, true));
    }
    let (p1, p2) = diagonal_lattice(30).unwrap();
    insts.push(("lattice 30".into(), p1, p2, false));
    let ts = [rat(1, 8), rat(1, 4), rat(1, 2), int(1)];
    let mut pairs = 0;
    for (name, p1, p2, strip) in &insts {
        let (m, n) = (p1.len(), p2.len());
        for t in &ts {
            if t * int(m as i64) < int(1) || t * int(n as i64) < int(1) {
                continue;
            }
            let sys = build_system(p1, p2, t).map_err(|e| format!("{name}: {e}"))?;
            let et = DistanceTable::new(p1, p2).proximity_energy(t).unwrap().energy;
            let oracle = oracle_proximity_energy(p1, p2, t);
            if et != oracle || sys.incidences + sys.degenerate_quadruples != oracle {
                return Err(format!(
                    "{name}, t = {t}: I = {} + D = {} vs E_t = {oracle}",
                    sys.incidences, sys.degenerate_quadruples
                ));
            }
            if *strip && sys.degenerate_quadruples > 4 * (m * n) as u128 {
                return Err(format!("{name}, t = {t}: {} degenerate quadruples", sys.degenerate_quadruples));
            }
            // |Pi| <= 3 t m^2 and |Gamma| <= 3 t n^2.
            if int(sys.points.len() as i64) > int(3) * t * int((m * m) as i64)
                || int(sys.curves.len() as i64) > int(3) * t * int((n * n) as i64)
            {
                return Err(format!("{name}, t = {t}: |Pi| = {}, |Gamma| = {}", sys.points.len(), sys.curves.len()));
            }
            pairs += 1;
        }
    }
    Ok(format!("{} instances, {pairs} (instance, t) pairs", insts.len()))
}

fn c8_constructions() -> Outcome {
    let start = Instant::now();
    for n in [1usize, 2, 3, 10, 100, 512, 1024] {
        let a = equally_spaced_line(n, &int(1), &int(0)).unwrap();
        let b = equally_spaced_line(n, &int(1), &int(1)).unwrap();
        let got = DistanceTable::new(&a, &b).num_distances();
        // (i - j)^2 + 1 over i, j in [n].
        let oracle: BTreeSet<i64> = (1..=n as i64).flat_map(|i| (1..=n as i64).map(move |j| (i - j) * (i - j) + 1)).collect();
        if got != oracle.len() || got > 2 * n - 1 {
            return Err(format!("parallel lines n = {n}: |Delta| = {got}, oracle {}", oracle.len()));
        }
    }
    for n in [1usize, 2, 3, 50, 200, 500] {
        let (a, b) = sqrt_axes(n);
        let got = float_profile(&a, &b, TAU).num_distances();
        if got != 2 * n - 1 {
            return Err(format!("sqrt axes n = {n}: |Delta| = {got}"));
        }
    }
    // |Delta| of the diagonal lattice, from a separate brute-force count.
    let expected = [(64usize, 1596usize), (128, 5876), (256, 21935), (512, 82628)];
    let mut ratios = Vec::new();
    for (n, want) in expected {
        let (a, b) = diagonal_lattice(n).unwrap();
        let got = DistanceTable::new(&a, &b).num_distances();
        if got != want {
            return Err(format!("diagonal n = {n}: |Delta| = {got}, expected {want}"));
        }
        ratios.push(got as f64 * (n as f64).ln().sqrt() / (n * n) as f64);
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(l, h), &r| (l.min(r), h.max(r)));
    if (hi - lo) / lo >= 0.25 {
        return Err(format!("diagonal ratios vary too much: {ratios:?}"));
    }
    within(Duration::from_secs(600), start)?;
    Ok(format!("diagonal ratios {:.4}..{:.4}, {:.1?}", lo, hi, start.elapsed()))
}

fn c9_niceness() -> Outcome {
    let mut worst = 0f64;
    for s in [1i64, 2, 5] {
        let curve = CurveModel::linear(int(s), int(s)).unwrap();
        for delta in [1i64, 10] {
            let step = rat(2 * delta, 10_000);
            let cert = certify_niceness(&curve, &int(delta), &step).map_err(|e| e.to_string())?;
            if cert.k != 2 {
                return Err(format!("s = {s}, delta = {delta}: k = {}", cert.k));
            }
            let d = delta as f64;
            for i in 0..=10_000 {
                let y = (-d + i as f64 * 2.0 * d / 10_000.0).clamp(-d, d);
                let fy = curve.eval(y);
                for x in [eval_phi(&curve, d, y).unwrap(), eval_psi(&curve, d, y).unwrap()] {
                    // (x, 0) is at distance delta from (f(y), y).
                    worst = worst.max(((x - fy).powi(2) + y * y - d * d).abs());
                }
            }
        }
    }
    if worst >= 1e-8 {
        return Err(format!("graph identity residual {worst:e}"));
    }
    Ok(format!("k = 2 in all six cases, residual {worst:.1e}"))
}

fn c10_t_monotone() -> Outcome {
    let grid = [int(0), rat(1, 16), rat(1, 8), rat(1, 4), rat(1, 2), rat(3, 4), int(1)];
    let mut insts: Vec<(PointSet, PointSet)> = energy_instances().into_iter().map(|i| (i.p1, i.p2)).collect();
    insts.push(diagonal_lattice(40).unwrap());
    let c = circle_strip_instance(60, 9).unwrap();
    insts.push((c.p1, c.p2));
    let mut oracle_checked = 0;
    for (k, (p1, p2)) in insts.iter().enumerate() {
        let table = DistanceTable::new(p1, p2);
        let mn = (p1.len() * p2.len()) as u128;
        let vals: Vec<u128> = grid.iter().map(|t| table.proximity_energy(t).unwrap().energy).collect();
        if vals[0] != mn || vals[grid.len() - 1] != table.energy() {
            return Err(format!("instance {k}: E_0 = {}, E_1 = {}", vals[0], vals[grid.len() - 1]));
        }
        if vals.windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("instance {k}: E_t not monotone: {vals:?}"));
        }
        if mn <= 3000 {
            for (t, v) in grid.iter().zip(&vals) {
                if oracle_proximity_energy(p1, p2, t) != *v {
                    return Err(format!("instance {k}: E_t at t = {t} disagrees with the oracle"));
                }
            }
            oracle_checked += 1;
        }
    }
    Ok(format!("{} instances, {oracle_checked} also checked by enumeration", insts.len()))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("strip-distances-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

/// Every file under `dir`, keyed by relative path.
fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut v = Vec::new();
    walk(dir, dir, &mut v);
    v.sort();
    v
}

fn c11_determinism() -> Outcome {
    // Library level.
    let cfg = ExperimentConfig {
        sizes: vec![(10, 10), (16, 20), (24, 24)],
        seeds: vec![3, 4],
        snap_bits: 0,
        ..ExperimentConfig::default()
    };
    let (d1, d2) = (scratch("lib1"), scratch("lib2"));
    run_experiment(&cfg).map_err(|e| e.to_string())?.write(&d1).map_err(|e| e.to_string())?;
    run_experiment(&cfg).map_err(|e| e.to_string())?.write(&d2).map_err(|e| e.to_string())?;
    if read_dir_sorted(&d1) != read_dir_sorted(&d2) {
        return Err("experiment reports differ between runs".into());
    }
    let (sc, _) = sampler_config(5, 17);
    let a = write_point_set(&strip_sampler(&sc).unwrap().0);
    let b = write_point_set(&strip_sampler(&sc).unwrap().0);
    if a != b {
        return Err("sampler output differs between runs".into());
    }

    // Command line: generate and experiment, twice each, with different
    // thread counts.
    let bin = env!("CARGO_BIN_EXE_strip-distances");
    let cfg_path = scratch("cfg").join("config.json");
    std::fs::write(
        &cfg_path,
        r#"{"construction": "strip", "sizes": [[12, 12], [20, 20]], "seeds": [5], "t_grid": ["1/4", "1/2", "1"]}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for (run, threads) in [(1, "1"), (2, "4")] {
        let dir = scratch(&format!("cli{run}"));
        for c in ["strip", "elliptic", "diagonal", "line", "sqrt"] {
            let st = Command::new(bin)
                .args(["--threads", threads, "--seed", "9", "generate", "--construction", c, "--n", "12", "--m", "9"])
                .arg("--out")
                .arg(dir.join(format!("{c}.csv")))
                .status()
                .unwrap();
            if !st.success() {
                return Err(format!("generate {c} exited with {st}"));
            }
        }
        let st = Command::new(bin)
            .args(["--threads", threads, "--config"])
            .arg(&cfg_path)
            .arg("--out-dir")
            .arg(dir.join("exp"))
            .arg("experiment")
            .status()
            .unwrap();
        if !st.success() {
            return Err(format!("experiment exited with {st}"));
        }
        outputs.push(read_dir_sorted(&dir));
    }
    if outputs[0] != outputs[1] {
        return Err("CLI outputs differ between runs".into());
    }
    Ok(format!("{} files identical across runs", outputs[0].len()))
}

fn guarded(f: impl FnOnce() -> Outcome + std::panic::UnwindSafe) -> Outcome {
    catch_unwind(f).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    })
}

#[test]
fn acceptance() {
    let (c4, c5) = catch_unwind(c4_c5_covers).unwrap_or_else(|_| (Err("panicked".into()), Err("panicked".into())));
    let results: Vec<(&str, Outcome)> = vec![
        ("1 Cauchy-Schwarz floor", guarded(c1_cauchy_schwarz)),
        ("2 energy ceiling", guarded(c2_energy_ceiling)),
        ("3 y-spacing of strip points", guarded(c3_y_spacing)),
        ("4 monotone cover", c4),
        ("5 steep order and shallow wiggle", c5),
        ("6 proximity witness", guarded(c6_proximity_witness)),
        ("7 incidence reconciliation", guarded(c7_incidence)),
        ("8 constructions", guarded(c8_constructions)),
        ("9 niceness of lines", guarded(c9_niceness)),
        ("10 E_t endpoints and monotonicity", guarded(c10_t_monotone)),
        ("11 determinism", guarded(c11_determinism)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("[PASS] {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {name}: {msg}");
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
