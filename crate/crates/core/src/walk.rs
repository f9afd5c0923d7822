//! Samplers for the network random walk: discrete (optionally lazy),
//! coupled pairs of lazy walks, and the continuous-time walk subordinated to
//! a unit-rate Poisson clock. Also the one-dimensional quantities of the
//! drifted coordinate (escape probability, splitting levels, tail bounds).

use std::collections::BTreeSet;

use rand::Rng;
use smallvec::SmallVec;

use crate::error::{domain, Result};
use crate::lattice::{step_distribution, LatticeParams, Step, Vertex};
use crate::rng::Stream;

/// Inverse-CDF sampler over the moves of one kernel.
#[derive(Debug, Clone)]
pub struct StepSampler {
    cumulative: SmallVec<[f64; 12]>,
    steps: SmallVec<[Step; 12]>,
}

impl StepSampler {
    pub fn new(params: &LatticeParams) -> Self {
        let dist = step_distribution(params);
        let mut steps: SmallVec<[Step; 12]> = Step::all(params.d).collect();
        if params.lazy {
            steps.push(Step::Stay);
        }
        let mut acc = 0.0;
        let mut cumulative: SmallVec<[f64; 12]> = steps
            .iter()
            .map(|&s| {
                acc += dist.prob(s);
                acc
            })
            .collect();
        // guard against rounding in the last bucket
        *cumulative.last_mut().expect("at least two moves") = f64::INFINITY;
        StepSampler { cumulative, steps }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Step {
        let u: f64 = rng.gen();
        let i = self.cumulative.iter().position(|&c| u < c).unwrap_or(self.steps.len() - 1);
        self.steps[i]
    }
}

/// A single walker: its position, the number of steps taken and its stream.
#[derive(Debug, Clone)]
pub struct WalkerState {
    pub position: Vertex,
    pub steps_taken: u64,
    pub rng: Stream,
    sampler: StepSampler,
}

impl WalkerState {
    pub fn new(params: &LatticeParams, start: Vertex, rng: Stream) -> Self {
        WalkerState { position: start, steps_taken: 0, rng, sampler: StepSampler::new(params) }
    }

    #[inline]
    pub fn step(&mut self) -> Step {
        let s = self.sampler.sample(&mut self.rng);
        s.apply_in_place(&mut self.position);
        self.steps_taken += 1;
        s
    }
}

/// A finite walk trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Path {
    pub vertices: Vec<Vertex>,
}

impl Path {
    pub fn new(vertices: Vec<Vertex>) -> Self {
        Path { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Option<&Vertex> {
        self.vertices.first()
    }

    pub fn last(&self) -> Option<&Vertex> {
        self.vertices.last()
    }

    /// Consecutive vertices are neighbours, or equal when `allow_stay`.
    pub fn is_nearest_neighbor(&self, allow_stay: bool) -> bool {
        self.vertices.windows(2).all(|w| w[0].is_neighbor(&w[1]) || (allow_stay && w[0] == w[1]))
    }

    /// The drifted coordinates along the path.
    pub fn levels(&self) -> impl Iterator<Item = i64> + '_ {
        self.vertices.iter().map(|v| v.n)
    }
}

impl From<Vec<Vertex>> for Path {
    fn from(vertices: Vec<Vertex>) -> Self {
        Path { vertices }
    }
}

/// A sampled path and whether it ended because the stopping rule fired.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub path: Path,
    pub stopped: bool,
}

/// Runs the walk from `start` until `stop` holds (checked before every step,
/// including the first) or `max_steps` steps have been taken.
pub fn sample_path<F>(params: &LatticeParams, start: &Vertex, mut stop: F, max_steps: u64, stream: Stream) -> PathSample
where
    F: FnMut(&WalkerState) -> bool,
{
    let mut walker = WalkerState::new(params, start.clone(), stream);
    let mut vertices = vec![start.clone()];
    loop {
        if stop(&walker) {
            return PathSample { path: Path::new(vertices), stopped: true };
        }
        if walker.steps_taken >= max_steps {
            return PathSample { path: Path::new(vertices), stopped: false };
        }
        walker.step();
        vertices.push(walker.position.clone());
    }
}

/// First index `m <= max_steps` with `target(S_m)`, if any.
pub fn hitting_time_set<F>(
    params: &LatticeParams,
    start: &Vertex,
    mut target: F,
    max_steps: u64,
    stream: Stream,
) -> Option<u64>
where
    F: FnMut(&Vertex) -> bool,
{
    let mut walker = WalkerState::new(params, start.clone(), stream);
    loop {
        if target(&walker.position) {
            return Some(walker.steps_taken);
        }
        if walker.steps_taken >= max_steps {
            return None;
        }
        walker.step();
    }
}

/// Probability that the drifted coordinate occupies its starting level at
/// exactly one time, `p - q` with `p`, `q` the up and down probabilities.
pub fn return_never_probability(params: &LatticeParams) -> f64 {
    let s = step_distribution(params);
    s.prob_up - s.prob_down
}

/// `(q / p)^k = exp(-lambda k)`: probability that the drifted coordinate ever
/// goes `k` levels below its current value.
pub fn drift_tail_bound(params: &LatticeParams, k: i64) -> f64 {
    if k <= 0 {
        1.0
    } else {
        (-params.lambda * k as f64).exp()
    }
}

/// Expected number of times the drifted coordinate sits on any given level it reaches,
/// `1 / (p - q)`.
pub fn expected_level_occupation(params: &LatticeParams) -> f64 {
    1.0 / return_never_probability(params)
}

/// Levels in `[lo, hi]` occupied by exactly one index of the path.
pub fn splitting_levels(path: &Path, lo: i64, hi: i64) -> Result<BTreeSet<i64>> {
    if lo > hi {
        return domain(format!("empty level range [{lo}, {hi}]"));
    }
    let width = (hi - lo + 1) as usize;
    let mut counts = vec![0u32; width];
    for n in path.levels() {
        if (lo..=hi).contains(&n) {
            let c = &mut counts[(n - lo) as usize];
            *c = c.saturating_add(1);
        }
    }
    Ok(counts.iter().enumerate().filter(|(_, &c)| c == 1).map(|(i, _)| lo + i as i64).collect())
}

/// Continuous-time walk: jump times of a unit-rate Poisson clock and the
/// positions after each jump.
#[derive(Debug, Clone, PartialEq)]
pub struct CtWalkSample {
    pub start: Vertex,
    pub jump_times: Vec<f64>,
    pub positions: Vec<Vertex>,
}

impl CtWalkSample {
    /// Position at time `t` (right-continuous).
    pub fn position_at(&self, t: f64) -> &Vertex {
        let k = self.jump_times.partition_point(|&s| s <= t);
        if k == 0 {
            &self.start
        } else {
            &self.positions[k - 1]
        }
    }

    /// First time the drifted coordinate equals `level`.
    pub fn first_time_at_level(&self, level: i64) -> Option<f64> {
        if self.start.n == level {
            return Some(0.0);
        }
        self.positions.iter().position(|v| v.n == level).map(|k| self.jump_times[k])
    }
}

pub fn sample_ct_walk(params: &LatticeParams, start: &Vertex, t_max: f64, stream: Stream) -> Result<CtWalkSample> {
    if !(t_max > 0.0) {
        return domain(format!("time horizon must be positive, got {t_max}"));
    }
    let mut walker = WalkerState::new(params, start.clone(), stream);
    let mut t = 0.0;
    let mut jump_times = Vec::new();
    let mut positions = Vec::new();
    loop {
        let u: f64 = walker.rng.gen();
        t += -(1.0 - u).ln();
        if t > t_max {
            break;
        }
        walker.step();
        jump_times.push(t);
        positions.push(walker.position.clone());
    }
    Ok(CtWalkSample { start: start.clone(), jump_times, positions })
}

/// First passage time of the continuous-time walk from `start.n` to `start.n + offset`,
/// sampled without storing the trajectory. `None` if not reached by `t_max`.
pub fn ct_first_passage_time(params: &LatticeParams, offset: i64, t_max: f64, stream: Stream) -> Option<f64> {
    let mut walker = WalkerState::new(params, Vertex::origin(params.d), stream);
    let mut t = 0.0;
    while walker.position.n != offset {
        let u: f64 = walker.rng.gen();
        t += -(1.0 - u).ln();
        if t > t_max {
            return None;
        }
        walker.step();
    }
    Some(t)
}

/// Coordinate decomposition of the lazy kernel: pick a coordinate `i` with
/// probability `selector[i]`, then move it by `-1`, `0`, `+1` with
/// probabilities `moves[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LazyDecomposition {
    pub selector: Vec<f64>,
    pub moves: Vec<[f64; 3]>,
}

impl LazyDecomposition {
    pub fn new(params: &LatticeParams) -> Self {
        let z = params.normalizer();
        let e = params.lambda.exp();
        let d = params.d as f64;
        let hold = 1.0 / (2.0 * (d + 1.0));
        let mut selector = Vec::with_capacity(params.d + 1);
        let mut moves = Vec::with_capacity(params.d + 1);
        let phi0 = (1.0 + e) / (2.0 * z) + hold;
        selector.push(phi0);
        moves.push([1.0 / (2.0 * z * phi0), hold / phi0, e / (2.0 * z * phi0)]);
        for _ in 0..params.d {
            let phi = 1.0 / z + hold;
            let side = 1.0 / (2.0 * z * phi);
            selector.push(phi);
            moves.push([side, hold / phi, side]);
        }
        LazyDecomposition { selector, moves }
    }

    fn pick<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    fn coordinate<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        Self::pick(&self.selector, rng)
    }

    fn displacement<R: Rng + ?Sized>(&self, coordinate: usize, rng: &mut R) -> i64 {
        Self::pick(&self.moves[coordinate], rng) as i64 - 1
    }
}

/// Two lazy walks built from one coordinate selector per step.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPaths {
    pub first: Path,
    pub second: Path,
    /// First index at which the two walks coincide.
    pub coupling_time: Option<usize>,
}

/// Couples two lazy walks coordinate by coordinate.
///
/// Both walkers share the selected coordinate at each step. The lowest-index
/// coordinate on which they still differ is the active one: when it is
/// selected, the two displacements are drawn independently; any other
/// selected coordinate moves both walkers identically. Once all coordinates
/// agree the walks coincide forever.
pub fn sample_coupled_pair(
    params: &LatticeParams,
    start_a: &Vertex,
    start_b: &Vertex,
    max_steps: u64,
    mut stream: Stream,
) -> Result<CoupledPaths> {
    if !params.lazy {
        return domain("the coordinate coupling needs the lazy kernel");
    }
    if start_a.dim() != params.d || start_b.dim() != params.d {
        return domain("start vertices do not match the lattice dimension");
    }
    let law = LazyDecomposition::new(params);
    let mut a = start_a.clone();
    let mut b = start_b.clone();
    let mut first = vec![a.clone()];
    let mut second = vec![b.clone()];
    let mut coupling_time = (a == b).then_some(0);
    for step in 1..=max_steps as usize {
        let i = law.coordinate(&mut stream);
        let active = (0..=params.d).find(|&j| a.coord(j) != b.coord(j));
        let da = law.displacement(i, &mut stream);
        let db = if active == Some(i) { law.displacement(i, &mut stream) } else { da };
        *a.coord_mut(i) += da;
        *b.coord_mut(i) += db;
        first.push(a.clone());
        second.push(b.clone());
        if coupling_time.is_none() && a == b {
            coupling_time = Some(step);
        }
    }
    Ok(CoupledPaths { first: Path::new(first), second: Path::new(second), coupling_time })
}

/// Coupling time only, without storing the paths.
pub fn coupling_time(
    params: &LatticeParams,
    start_a: &Vertex,
    start_b: &Vertex,
    max_steps: u64,
    mut stream: Stream,
) -> Result<Option<u64>> {
    if !params.lazy {
        return domain("the coordinate coupling needs the lazy kernel");
    }
    let law = LazyDecomposition::new(params);
    let mut a = start_a.clone();
    let mut b = start_b.clone();
    for step in 0..=max_steps {
        let Some(active) = (0..=params.d).find(|&j| a.coord(j) != b.coord(j)) else {
            return Ok(Some(step));
        };
        if step == max_steps {
            break;
        }
        let i = law.coordinate(&mut stream);
        let da = law.displacement(i, &mut stream);
        let db = if active == i { law.displacement(i, &mut stream) } else { da };
        *a.coord_mut(i) += da;
        *b.coord_mut(i) += db;
    }
    Ok(None)
}
