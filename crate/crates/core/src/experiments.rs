//! Monte Carlo experiments on walks and spanning forests, with tabular output.
//!
//! Sample `i` of an experiment seeded with `seed` draws all of its randomness
//! from `sub_seed(seed, i)`, and samples are combined in index order, so every
//! result is reproducible bit for bit from the configuration alone.
//!
//! Estimators sharing a definition share their streams as well: the pair
//! `{0, z}` in [`spread_bound_experiment`], the connectivity of [`connectivity_experiment`]
//! and the `m = 0` case of [`separation_experiment`] see the same Wilson walks
//! and agree sample by sample.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path as FsPath;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{domain, Error, Result};
use crate::finite_box::FiniteBox;
use crate::lattice::{eta, spread, LatticeParams, Vertex};
use crate::loop_erase::loop_erase_slice;
use crate::rng::{sub_seed, vertex_stream, walker_stream};
use crate::stats::MeanVar;
use crate::walk::{drift_tail_bound, WalkerState};
use crate::wilson::{
    component_of, cutset_crossings, grow_from, ust_finite, wsf_rooted_at_infinity, Components, Forest, TreeRoot,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!("unknown format {other:?}, expected csv or json"))),
        }
    }
}

/// Settings shared by all experiments; see `docs/config.md` for the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: LatticeParams,
    pub seed: u64,
    pub samples: u64,
    /// Step budget of every walk.
    pub horizon: u64,
    /// Window for forest-based experiments.
    #[serde(rename = "box")]
    pub region: FiniteBox,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    pub format: OutputFormat,
    /// Scale multiplier of the crossing regions.
    pub k0: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: LatticeParams { d: 3, lambda: std::f64::consts::LN_2, lazy: false },
            seed: 0,
            samples: 10_000,
            horizon: 100_000,
            region: FiniteBox { n_min: -64, n_max: 128, x_radius: 64, wired: false, x_center: Vec::new() },
            output_path: None,
            format: OutputFormat::Csv,
            k0: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.region.validate()?;
        if self.samples < 1 {
            return domain("samples must be at least 1");
        }
        if self.horizon < 1 {
            return domain("horizon must be at least 1");
        }
        if self.k0 < 1 {
            return domain("k0 must be at least 1");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn check_dim(&self, vs: &[&Vertex]) -> Result<()> {
        match vs.iter().find(|v| v.dim() != self.params.d) {
            Some(v) => domain(format!("vertex {v} does not have dimension {}", self.params.d)),
            None => Ok(()),
        }
    }

    fn sample_seed(&self, i: u64) -> u64 {
        sub_seed(self.seed, i)
    }
}

/// One estimate with its standard error and free-form metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub label: String,
    pub value: f64,
    pub std_error: f64,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

impl EstimateRow {
    fn new(label: impl Into<String>, stats: &MeanVar) -> Self {
        EstimateRow { label: label.into(), value: stats.mean, std_error: stats.std_error(), meta: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.meta.insert(key.to_string(), value);
        self
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(Value::as_f64)
    }

    pub fn meta_bool(&self, key: &str) -> Option<bool> {
        self.meta.get(key).and_then(Value::as_bool)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn meta_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// CSV with columns `label,value,std_error` followed by the union of the
/// metadata keys in sorted order; missing entries are left empty.
pub fn rows_to_csv(rows: &[EstimateRow]) -> String {
    let keys: std::collections::BTreeSet<&String> = rows.iter().flat_map(|r| r.meta.keys()).collect();
    let mut out = String::from("label,value,std_error");
    for k in &keys {
        out.push(',');
        out.push_str(&csv_field(k));
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{:.17e},{:.17e}", csv_field(&r.label), r.value, r.std_error);
        for k in &keys {
            out.push(',');
            out.push_str(&csv_field(&r.meta.get(*k).map(meta_text).unwrap_or_default()));
        }
        out.push('\n');
    }
    out
}

/// A JSON array of rows.
pub fn rows_to_json(rows: &[EstimateRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

pub fn format_rows(rows: &[EstimateRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => Ok(rows_to_csv(rows)),
        OutputFormat::Json => rows_to_json(rows),
    }
}

/// Writes rows to the configured output path, or returns them as text when
/// no path is set.
pub fn emit_rows(config: &ExperimentConfig, rows: &[EstimateRow]) -> Result<Option<String>> {
    let text = format_rows(rows, config.format)?;
    match &config.output_path {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn base_meta(row: EstimateRow, config: &ExperimentConfig) -> EstimateRow {
    row.with("d", json!(config.params.d))
        .with("lambda", json!(config.params.lambda))
        .with("samples", json!(config.samples))
        .with("horizon", json!(config.horizon))
        .with("seed", json!(config.seed))
}

fn walk_positions(params: &LatticeParams, start: &Vertex, steps: u64, stream: crate::rng::Stream) -> Vec<Vertex> {
    let mut w = WalkerState::new(params, start.clone(), stream);
    let mut out = Vec::with_capacity(steps.min(1 << 20) as usize + 1);
    out.push(start.clone());
    while w.steps_taken < steps {
        w.step();
        out.push(w.position.clone());
    }
    out
}

/// Number of pairs `(p, q)` with `a[p] = b[q]`.
fn intersection_pairs(a: &[Vertex], b: &[Vertex]) -> u64 {
    let mut counts: FxHashMap<&Vertex, u64> = FxHashMap::default();
    for v in a {
        *counts.entry(v).or_default() += 1;
    }
    b.iter().map(|v| counts.get(v).copied().unwrap_or(0)).sum()
}

/// Outcome of one run of two independent walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntersectionTrial {
    /// Least `t` such that the paths up to time `t` share a vertex.
    pub first: Option<u64>,
    /// Pairs of times `(p, q)`, both at most the horizon, with `S_p = S'_q`;
    /// only counted when requested.
    pub pairs: Option<u64>,
}

/// Runs `samples` pairs of independent walks from `a` and `b` for `horizon`
/// steps each. Trial `i` uses `walker_stream(sub_seed(seed, 0), i)` and
/// `walker_stream(sub_seed(seed, 1), i)`. Without `count_pairs` a trial stops
/// as soon as the paths meet, so the first meeting time is available for every
/// horizon up to the one given at the cost of the shortest run.
pub fn intersection_trials(
    params: &LatticeParams,
    a: &Vertex,
    b: &Vertex,
    horizon: u64,
    samples: u64,
    seed: u64,
    count_pairs: bool,
) -> Vec<IntersectionTrial> {
    let (seed_a, seed_b) = (sub_seed(seed, 0), sub_seed(seed, 1));
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut wa = WalkerState::new(params, a.clone(), walker_stream(seed_a, i));
            let mut wb = WalkerState::new(params, b.clone(), walker_stream(seed_b, i));
            let mut seen_a: FxHashMap<Vertex, u64> = FxHashMap::default();
            let mut seen_b: FxHashMap<Vertex, u64> = FxHashMap::default();
            let mut first = None;
            let mut pairs = 0u64;
            let mut t = 0;
            loop {
                // S_t against S'_0..S'_{t-1}, then S'_t against S_0..S_t
                let from_b = seen_b.get(&wa.position).copied().unwrap_or(0);
                *seen_a.entry(wa.position.clone()).or_default() += 1;
                let from_a = seen_a.get(&wb.position).copied().unwrap_or(0);
                *seen_b.entry(wb.position.clone()).or_default() += 1;
                pairs += from_a + from_b;
                if first.is_none() && from_a + from_b > 0 {
                    first = Some(t);
                    if !count_pairs {
                        break;
                    }
                }
                if t == horizon {
                    break;
                }
                wa.step();
                wb.step();
                t += 1;
            }
            IntersectionTrial { first, pairs: count_pairs.then_some(pairs) }
        })
        .collect()
}

/// Probability that the paths of independent walks from `start_a` and
/// `start_b` share a vertex within the horizon, with the mean number of
/// intersection pairs `K` in the metadata.
pub fn intersections_experiment(config: &ExperimentConfig, start_a: &Vertex, start_b: &Vertex) -> Result<EstimateRow> {
    config.validate()?;
    config.check_dim(&[start_a, start_b])?;
    let trials =
        intersection_trials(&config.params, start_a, start_b, config.horizon, config.samples, config.seed, true);
    let hit: MeanVar = trials.iter().map(|t| if t.first.is_some() { 1.0 } else { 0.0 }).collect();
    let k: MeanVar = trials.iter().map(|t| t.pairs.unwrap_or(0) as f64).collect();
    Ok(base_meta(EstimateRow::new("intersection", &hit), config)
        .with("start_a", json!(start_a.to_string()))
        .with("start_b", json!(start_b.to_string()))
        .with("mean_pairs", json!(k.mean))
        .with("mean_pairs_se", json!(k.std_error())))
}

/// One sample of the first two Wilson branches from `0` and `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectivitySample {
    pub connected: bool,
    /// Intersection pairs of the two full walks.
    pub pairs: u64,
}

/// Sample `seed`: the walk from `0` and the walk from `z`, each driven by
/// `vertex_stream(seed, start)` for `horizon` steps exactly as in
/// [`grow_from`]. `z` joins the component of `0` when its walk meets the
/// loop-erasure of the first.
pub fn connectivity_sample(params: &LatticeParams, z: &Vertex, horizon: u64, seed: u64) -> ConnectivitySample {
    let origin = Vertex::origin(params.d);
    let walk0 = walk_positions(params, &origin, horizon, vertex_stream(seed, &origin));
    let walkz = walk_positions(params, z, horizon, vertex_stream(seed, z));
    let branch: FxHashSet<Vertex> = loop_erase_slice(&walk0).into_iter().collect();
    let connected = walkz.iter().any(|v| branch.contains(v));
    ConnectivitySample { connected, pairs: intersection_pairs(&walk0, &walkz) }
}

/// Probability that `0` and `z` lie in one tree of the forest, from the first
/// two Wilson branches.
///
/// The metadata carries `eta(z)` and the statistics of the intersection count
/// `K` of the two walks, together with the second-moment inequality
/// `P(K > 0) >= E[K]^2 / (4 E[K^2])` evaluated on the sample.
pub fn connectivity_experiment(config: &ExperimentConfig, z: &Vertex) -> Result<EstimateRow> {
    config.validate()?;
    config.check_dim(&[z])?;
    if config.params.d < 3 {
        return domain("connectivity needs d >= 3; in lower dimensions the forest is a single tree");
    }
    let samples: Vec<ConnectivitySample> = (0..config.samples)
        .into_par_iter()
        .map(|i| connectivity_sample(&config.params, z, config.horizon, config.sample_seed(i)))
        .collect();
    let conn: MeanVar = samples.iter().map(|s| f64::from(u8::from(s.connected))).collect();
    let k: MeanVar = samples.iter().map(|s| s.pairs as f64).collect();
    let k2: MeanVar = samples.iter().map(|s| (s.pairs as f64).powi(2)).collect();
    let positive: MeanVar = samples.iter().map(|s| f64::from(u8::from(s.pairs > 0))).collect();
    let bound = if k2.mean > 0.0 { k.mean * k.mean / (4.0 * k2.mean) } else { 0.0 };
    Ok(base_meta(EstimateRow::new("connectivity", &conn), config)
        .with("z", json!(z.to_string()))
        .with("eta", json!(eta(z)))
        .with("mean_k", json!(k.mean))
        .with("mean_k2", json!(k2.mean))
        .with("p_k_positive", json!(positive.mean))
        .with("second_moment_bound", json!(bound))
        .with("second_moment_holds", json!(positive.mean >= bound)))
}

/// Probability that all of `w` lie in one tree, from Wilson's algorithm
/// started at the vertices of `w` in order.
///
/// The same samples give every pairwise probability, from which the constant
/// `C = max_pairs P(w ~ w') spread(w, w')^(d-2)` is fitted; the metadata
/// reports `C spread(W)^-(d-2)` and whether the estimate lies below it.
pub fn spread_bound_experiment(config: &ExperimentConfig, w: &[Vertex]) -> Result<EstimateRow> {
    config.validate()?;
    if config.params.d < 3 {
        return domain("the spread bound needs d >= 3");
    }
    if w.is_empty() || w.len() > 5 {
        return domain(format!("the vertex set must have 1 to 5 elements, got {}", w.len()));
    }
    config.check_dim(&w.iter().collect::<Vec<_>>())?;
    let mut distinct = w.to_vec();
    distinct.sort();
    distinct.dedup();
    let pairs: Vec<(usize, usize)> =
        (0..w.len()).flat_map(|i| (i + 1..w.len()).map(move |j| (i, j))).filter(|&(i, j)| w[i] != w[j]).collect();
    let outcomes: Vec<(bool, Vec<bool>)> = (0..config.samples)
        .into_par_iter()
        .map(|i| -> Result<(bool, Vec<bool>)> {
            let mut forest = Forest::default();
            grow_from(&config.params, &mut forest, w, config.horizon, config.sample_seed(i));
            let labels: Vec<_> = w.iter().map(|v| component_of(&forest, v)).collect::<Result<_>>()?;
            let all = labels.iter().all(|l| *l == labels[0]);
            Ok((all, pairs.iter().map(|&(a, b)| labels[a] == labels[b]).collect()))
        })
        .collect::<Result<_>>()?;
    let all: MeanVar = outcomes.iter().map(|o| f64::from(u8::from(o.0))).collect();
    let exponent = config.params.d as f64 - 2.0;
    let mut constant: f64 = 1.0;
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let p: f64 = outcomes.iter().filter(|o| o.1[k]).count() as f64 / config.samples as f64;
        let s = spread(&[w[a].clone(), w[b].clone()])?.product;
        constant = if k == 0 { p * s.powf(exponent) } else { constant.max(p * s.powf(exponent)) };
    }
    let s = spread(&distinct)?.product;
    let bound = constant * s.powf(-exponent);
    Ok(base_meta(EstimateRow::new("spread", &all), config)
        .with("set", json!(w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")))
        .with("spread", json!(s))
        .with("constant", json!(constant))
        .with("bound", json!(bound))
        .with("within_bound", json!(all.mean <= bound + 3.0 * all.std_error())))
}

/// Probability that `z2` is reached from `z` by alternating `m + 1`
/// independent forests: `Q_0` is the tree of `z` in the first forest, and
/// `Q_j` collects the trees of the `j`-th forest that meet `Q_(j-1)`.
///
/// Each forest is Wilson's algorithm rooted at infinity on the configured box,
/// started at `z` and `z2` and then the box vertices, with truncated branches
/// ending at the root. Trees are only known through the vertices the
/// algorithm touched, and truncation splits trees, so the estimate is a lower
/// bound for `P(D(z, z2) <= m)` up to sampling error.
pub fn separation_experiment(config: &ExperimentConfig, z: &Vertex, z2: &Vertex, m: u32) -> Result<EstimateRow> {
    config.validate()?;
    config.check_dim(&[z, z2])?;
    if config.params.d < 3 {
        return domain("separation needs d >= 3");
    }
    let ordering = [z.clone(), z2.clone()];
    let reached: Vec<bool> = (0..config.samples)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let base = config.sample_seed(i);
            let mut current: FxHashSet<Vertex> = FxHashSet::default();
            current.insert(z.clone());
            for j in 0..=m {
                let seed = if j == 0 { base } else { sub_seed(base, u64::from(j)) };
                let forest = wsf_rooted_at_infinity(&config.params, &config.region, &ordering, config.horizon, seed)?;
                let comps = Components::new(&forest);
                let hit: FxHashSet<_> = current.iter().filter_map(|v| comps.get(v)).collect();
                current =
                    forest.parent.keys().filter(|v| comps.get(v).is_some_and(|c| hit.contains(c))).cloned().collect();
                if current.contains(z2) {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<_>>()?;
    let stats: MeanVar = reached.iter().map(|&r| f64::from(u8::from(r))).collect();
    Ok(base_meta(EstimateRow::new("separation", &stats), config)
        .with("z", json!(z.to_string()))
        .with("z2", json!(z2.to_string()))
        .with("m", json!(m))
        .with("predicted_max", json!((config.params.d as i64 - 2 + 3) / 4)))
}

/// Walk from `start` until it leaves `U_pmax` or exhausts the horizon.
fn crossing_walk(
    params: &LatticeParams,
    start: &Vertex,
    regions: &CrossingRegions,
    pmax: u32,
    horizon: u64,
    stream: crate::rng::Stream,
) -> Vec<Vertex> {
    let mut w = WalkerState::new(params, start.clone(), stream);
    let mut out = vec![start.clone()];
    while regions.in_u(pmax, &w.position) && w.steps_taken < horizon {
        w.step();
        out.push(w.position.clone());
    }
    out
}

/// The regions of the crossing test in `d = 2`: testing regions
/// `D_q = {9^q < n <= 2 9^q, |x| <= 3^q}` and separating cylinders
/// `U_p = {|n| <= 4 9^(p k0), |x| <= 3^((p+1) k0)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingRegions {
    pub k0: u32,
}

impl CrossingRegions {
    pub fn in_u(&self, p: u32, v: &Vertex) -> bool {
        if p == 0 {
            return v.is_origin();
        }
        let n_lim = 4 * 9i64.pow(p * self.k0);
        let x_lim = 3i64.pow((p + 1) * self.k0);
        v.n.abs() <= n_lim && v.x_norm_sq() <= x_lim * x_lim
    }

    pub fn in_d(&self, p: u32, v: &Vertex) -> bool {
        let q = p * self.k0;
        let scale = 9i64.pow(q);
        v.n > scale && v.n <= 2 * scale && v.x_norm_sq() <= scale
    }

    /// Exit times `T_1 <= T_2 <= ...` of `U_1, U_2, ...` along `path`, with
    /// `T_0 = 0`; `None` where the path ends inside.
    fn exit_times(&self, path: &[Vertex], pmax: u32) -> Vec<Option<usize>> {
        let mut out = vec![Some(0)];
        let mut from = 0;
        for p in 1..=pmax {
            let t = (from..path.len()).find(|&t| !self.in_u(p, &path[t]));
            out.push(t);
            match t {
                Some(t) => from = t,
                None => from = path.len(),
            }
        }
        out
    }
}

/// Crossings of two independent walks in `d = 2`, started at `0` and
/// `(0, e_1)`.
///
/// For each `p`, `M_p` counts the pairs of times in the `p`-th sections (from
/// leaving `U_(p-1)` to leaving `U_p`, with the first section starting at
/// time zero) at which the walks occupy the same vertex of `D_(p k0)`. The row
/// for `p` estimates `P(M_p > 0)`; sections cut short by the horizon count as
/// they are and are reported in `truncated`.
pub fn crossings_experiment(config: &ExperimentConfig, p_range: &[u32]) -> Result<Vec<EstimateRow>> {
    config.validate()?;
    if config.params.d != 2 {
        return domain("the crossing experiment is defined for d = 2");
    }
    if p_range.is_empty() || p_range.contains(&0) {
        return domain("section indices must be positive");
    }
    let regions = CrossingRegions { k0: config.k0 };
    let pmax = *p_range.iter().max().expect("nonempty");
    if 4.0 * 9f64.powi((pmax * config.k0) as i32) > 1e15 {
        return domain("regions too large");
    }
    let a = Vertex::origin(2);
    let b = Vertex::new(0, &[1, 0]);
    let per_sample: Vec<Vec<(u64, bool)>> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let seed = config.sample_seed(i);
            let pa = crossing_walk(&config.params, &a, &regions, pmax, config.horizon, walker_stream(seed, 0));
            let pb = crossing_walk(&config.params, &b, &regions, pmax, config.horizon, walker_stream(seed, 1));
            let (ta, tb) = (regions.exit_times(&pa, pmax), regions.exit_times(&pb, pmax));
            let section = |path: &'_ [Vertex], t: &[Option<usize>], p: u32| -> (usize, usize, bool) {
                let start = t[p as usize - 1].unwrap_or(path.len());
                match t[p as usize] {
                    Some(end) => (start, end + 1, false),
                    None => (start, path.len(), true),
                }
            };
            p_range
                .iter()
                .map(|&p| {
                    let (s0, s1, cut_a) = section(&pa, &ta, p);
                    let (r0, r1, cut_b) = section(&pb, &tb, p);
                    let inside: Vec<Vertex> =
                        pa[s0.min(s1)..s1].iter().filter(|v| regions.in_d(p, v)).cloned().collect();
                    let others: Vec<Vertex> =
                        pb[r0.min(r1)..r1].iter().filter(|v| regions.in_d(p, v)).cloned().collect();
                    (intersection_pairs(&inside, &others), cut_a || cut_b)
                })
                .collect()
        })
        .collect();
    let rows = p_range
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let hit: MeanVar = per_sample.iter().map(|s| f64::from(u8::from(s[k].0 > 0))).collect();
            let mean: MeanVar = per_sample.iter().map(|s| s[k].0 as f64).collect();
            let truncated = per_sample.iter().filter(|s| s[k].1).count();
            base_meta(EstimateRow::new(format!("crossing_p{p}"), &hit), config)
                .with("p", json!(p))
                .with("k0", json!(config.k0))
                .with("mean_crossings", json!(mean.mean))
                .with("truncated", json!(truncated))
        })
        .collect();
    Ok(rows)
}

/// Fraction of wired-box spanning trees in which the tree around the origin
/// crosses the cutset `K_p` along at least two disjoint paths, one row per
/// `p`. The box must contain the origin and is always wired. A `p` whose
/// cylinder does not fit in the box gives a row with `skipped = true`.
pub fn one_end_diagnostic(config: &ExperimentConfig, p_range: &[i64]) -> Result<Vec<EstimateRow>> {
    config.validate()?;
    if p_range.iter().any(|&p| p < 1) {
        return domain("cutset indices must be positive");
    }
    let region = FiniteBox { wired: true, ..config.region.clone() };
    let origin = Vertex::origin(config.params.d);
    if !region.contains(&origin) {
        return domain("the box must contain the origin");
    }
    let fits = |p: i64| {
        let center_ok = region.x_center.iter().all(|&c| c.abs() + p < region.x_radius);
        region.n_min <= -p && region.n_max >= p && center_ok
    };
    let active: Vec<i64> = p_range.iter().copied().filter(|&p| fits(p)).collect();
    let counts: Vec<Vec<usize>> = if active.is_empty() {
        Vec::new()
    } else {
        (0..config.samples)
            .into_par_iter()
            .map(|i| -> Result<Vec<usize>> {
                let forest = ust_finite(
                    &config.params,
                    &region,
                    &TreeRoot::Wired,
                    std::slice::from_ref(&origin),
                    config.sample_seed(i),
                )?;
                active.iter().map(|&p| cutset_crossings(&forest, &origin, p)).collect()
            })
            .collect::<Result<_>>()?
    };
    let rows = p_range
        .iter()
        .map(|&p| {
            let label = format!("one_end_p{p}");
            let row = match active.iter().position(|&q| q == p) {
                Some(k) => {
                    let stats: MeanVar = counts.iter().map(|c| f64::from(u8::from(c[k] >= 2))).collect();
                    EstimateRow::new(label, &stats).with("skipped", json!(false))
                }
                None => EstimateRow { label, value: 0.0, std_error: 0.0, meta: BTreeMap::new() }
                    .with("skipped", json!(true)),
            };
            base_meta(row, config)
                .with("p", json!(p))
                .with("truncation_bound", json!(drift_tail_bound(&config.params, region.n_max.saturating_sub(p))))
        })
        .collect();
    Ok(rows)
}
