//! The drifted lattice network: vertices of `Z x Z^d`, edge conductances
//! `exp(lambda * max(n, n'))`, the induced step law and its moments, the
//! characteristic function of a step, the `eta` metric and the spread of a
//! finite vertex set.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{domain, Error, Result};

/// Dimension and drift of the network, plus whether walks use the ½-lazy kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub d: usize,
    pub lambda: f64,
    #[serde(default)]
    pub lazy: bool,
}

impl LatticeParams {
    pub fn new(d: usize, lambda: f64) -> Result<Self> {
        Self::with_lazy(d, lambda, false)
    }

    pub fn with_lazy(d: usize, lambda: f64, lazy: bool) -> Result<Self> {
        let params = LatticeParams { d, lambda, lazy };
        params.validate()?;
        Ok(params)
    }

    pub fn lazy(self) -> Self {
        LatticeParams { lazy: true, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return domain(format!("dimension must be at least 1, got {}", self.d));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return domain(format!("drift must be positive and finite, got {}", self.lambda));
        }
        Ok(())
    }

    /// `2d + 1 + e^lambda`, the conductance of a vertex on level zero.
    pub fn normalizer(&self) -> f64 {
        2.0 * self.d as f64 + 1.0 + self.lambda.exp()
    }

    pub fn origin(&self) -> Vertex {
        Vertex::origin(self.d)
    }
}

/// A point `(n, x)` of `Z x Z^d`; `n` is the drifted coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub n: i64,
    pub x: SmallVec<[i64; 4]>,
}

impl Vertex {
    pub fn new(n: i64, x: &[i64]) -> Self {
        Vertex { n, x: SmallVec::from_slice(x) }
    }

    pub fn origin(d: usize) -> Self {
        Vertex { n: 0, x: SmallVec::from_elem(0, d) }
    }

    /// The vertex `(n, 0, ..., 0)`.
    pub fn on_axis(n: i64, d: usize) -> Self {
        Vertex { n, x: SmallVec::from_elem(0, d) }
    }

    /// The vertex `(n, x)` with `x = r * e_1`.
    pub fn transverse(n: i64, r: i64, d: usize) -> Self {
        let mut v = Vertex::on_axis(n, d);
        v.x[0] = r;
        v
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_origin(&self) -> bool {
        self.n == 0 && self.x.iter().all(|&c| c == 0)
    }

    /// Euclidean norm of the transverse part.
    pub fn x_norm(&self) -> f64 {
        (self.x_norm_sq() as f64).sqrt()
    }

    pub fn x_norm_sq(&self) -> i64 {
        self.x.iter().map(|c| c * c).sum()
    }

    pub fn x_norm_inf(&self) -> i64 {
        self.x.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Euclidean norm of `(n, x)`.
    pub fn norm(&self) -> f64 {
        ((self.n * self.n + self.x_norm_sq()) as f64).sqrt()
    }

    pub fn l1_norm(&self) -> i64 {
        self.n.abs() + self.x.iter().map(|c| c.abs()).sum::<i64>()
    }

    /// Coordinate `i` with index 0 the drifted one.
    pub fn coord(&self, i: usize) -> i64 {
        if i == 0 {
            self.n
        } else {
            self.x[i - 1]
        }
    }

    pub fn coord_mut(&mut self, i: usize) -> &mut i64 {
        if i == 0 {
            &mut self.n
        } else {
            &mut self.x[i - 1]
        }
    }

    /// True when the two vertices differ by one unit in exactly one coordinate.
    pub fn is_neighbor(&self, other: &Vertex) -> bool {
        self.dim() == other.dim() && (self - other).l1_norm() == 1
    }

    /// The `2d + 2` nearest neighbours: `n + 1`, `n - 1`, then `+e_i`, `-e_i` for each transverse axis.
    pub fn neighbors(&self) -> impl Iterator<Item = Vertex> + '_ {
        Step::all(self.dim()).map(move |s| s.apply(self))
    }

    /// Space separated coordinates, `n x1 ... xd`.
    pub fn to_words(&self) -> String {
        let mut s = self.n.to_string();
        for c in &self.x {
            s.push(' ');
            s.push_str(&c.to_string());
        }
        s
    }

    /// Parses coordinates separated by commas and/or whitespace.
    pub fn parse_coords(s: &str) -> Result<Vertex> {
        let coords: Vec<i64> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("bad coordinate {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        match coords.split_first() {
            Some((&n, x)) if !x.is_empty() => Ok(Vertex::new(n, x)),
            _ => Err(Error::Parse(format!("vertex needs at least two coordinates: {s:?}"))),
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.n)?;
        for c in &self.x {
            write!(f, ",{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Vertex> {
        Vertex::parse_coords(s.trim().trim_start_matches('(').trim_end_matches(')'))
    }
}

impl<'a> Add<&'a Vertex> for &'a Vertex {
    type Output = Vertex;
    fn add(self, rhs: &Vertex) -> Vertex {
        Vertex { n: self.n + rhs.n, x: self.x.iter().zip(&rhs.x).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a Vertex> for &'a Vertex {
    type Output = Vertex;
    fn sub(self, rhs: &Vertex) -> Vertex {
        Vertex { n: self.n - rhs.n, x: self.x.iter().zip(&rhs.x).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Vertex {
    type Output = Vertex;
    fn neg(self) -> Vertex {
        Vertex { n: -self.n, x: self.x.iter().map(|c| -c).collect() }
    }
}

/// One move of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Up,
    Down,
    /// `+e_axis` (`positive`) or `-e_axis` on transverse axis `axis` (0-based).
    Transverse {
        axis: usize,
        positive: bool,
    },
    Stay,
}

impl Step {
    /// The `2d + 2` unit moves in canonical order.
    pub fn all(d: usize) -> impl Iterator<Item = Step> {
        [Step::Up, Step::Down]
            .into_iter()
            .chain((0..d).flat_map(|axis| [true, false].map(|positive| Step::Transverse { axis, positive })))
    }

    /// Position of the move in [`Step::all`] order; `Stay` comes last.
    pub fn index(&self, d: usize) -> usize {
        match *self {
            Step::Up => 0,
            Step::Down => 1,
            Step::Transverse { axis, positive } => 2 + 2 * axis + usize::from(!positive),
            Step::Stay => 2 * d + 2,
        }
    }

    pub fn apply_in_place(&self, v: &mut Vertex) {
        match *self {
            Step::Up => v.n += 1,
            Step::Down => v.n -= 1,
            Step::Transverse { axis, positive } => v.x[axis] += if positive { 1 } else { -1 },
            Step::Stay => {}
        }
    }

    pub fn apply(&self, v: &Vertex) -> Vertex {
        let mut w = v.clone();
        self.apply_in_place(&mut w);
        w
    }

    /// The step taking `from` to `to`, if they are neighbours or equal.
    pub fn between(from: &Vertex, to: &Vertex) -> Option<Step> {
        let diff = to - from;
        match diff.l1_norm() {
            0 => Some(Step::Stay),
            1 if diff.n == 1 => Some(Step::Up),
            1 if diff.n == -1 => Some(Step::Down),
            1 => diff.x.iter().position(|&c| c != 0).map(|axis| Step::Transverse { axis, positive: diff.x[axis] > 0 }),
            _ => None,
        }
    }
}

/// Conductance `exp(lambda * max(u.n, v.n))` of the edge `{u, v}`.
pub fn conductance(params: &LatticeParams, u: &Vertex, v: &Vertex) -> Result<f64> {
    if !u.is_neighbor(v) {
        return domain(format!("{u} and {v} are not nearest neighbours"));
    }
    Ok((params.lambda * u.n.max(v.n) as f64).exp())
}

/// Sum of the incident conductances, `exp(lambda n) (2d + 1 + e^lambda)`.
pub fn vertex_conductance(params: &LatticeParams, v: &Vertex) -> f64 {
    (params.lambda * v.n as f64).exp() * params.normalizer()
}

/// Law of a single step of the network random walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDistribution {
    pub prob_up: f64,
    pub prob_down: f64,
    /// Probability of each of the `2d` transverse unit moves.
    pub prob_transverse: f64,
    pub prob_stay: f64,
    pub d: usize,
}

impl StepDistribution {
    pub fn prob(&self, step: Step) -> f64 {
        match step {
            Step::Up => self.prob_up,
            Step::Down => self.prob_down,
            Step::Transverse { .. } => self.prob_transverse,
            Step::Stay => self.prob_stay,
        }
    }

    /// Probabilities in [`Step::index`] order, including the lazy hold.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut p: Vec<f64> = Step::all(self.d).map(|s| self.prob(s)).collect();
        p.push(self.prob_stay);
        p
    }

    pub fn total(&self) -> f64 {
        self.prob_up + self.prob_down + 2.0 * self.d as f64 * self.prob_transverse + self.prob_stay
    }
}

pub fn step_distribution(params: &LatticeParams) -> StepDistribution {
    let z = params.normalizer();
    let scale = if params.lazy { 0.5 } else { 1.0 };
    StepDistribution {
        prob_up: scale * params.lambda.exp() / z,
        prob_down: scale / z,
        prob_transverse: scale / z,
        prob_stay: if params.lazy { 0.5 } else { 0.0 },
        d: params.d,
    }
}

/// Mean drift and second moments of a (non-lazy) step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub a: f64,
    pub sigma0_sq: f64,
    pub sigma_sq: f64,
}

pub fn moments(params: &LatticeParams) -> Moments {
    let z = params.normalizer();
    let e = params.lambda.exp();
    Moments { a: (e - 1.0) / z, sigma0_sq: (e + 1.0) / z, sigma_sq: 2.0 / z }
}

/// Characteristic function of one step at frequency `h = (h_0, ..., h_d)`.
///
/// For the lazy kernel this is `(1 + phi(h)) / 2`.
pub fn fourier_transform(params: &LatticeParams, h: &[f64]) -> Result<Complex64> {
    if h.len() != params.d + 1 {
        return domain(format!("frequency has {} components, expected {}", h.len(), params.d + 1));
    }
    if let Some(bad) = h.iter().find(|v| !(v.abs() <= std::f64::consts::PI)) {
        return domain(format!("frequency component {bad} outside [-pi, pi]"));
    }
    Ok(characteristic(params, h))
}

/// Unchecked version of [`fourier_transform`] for quadrature loops.
pub(crate) fn characteristic(params: &LatticeParams, h: &[f64]) -> Complex64 {
    let z = params.normalizer();
    let e = params.lambda.exp();
    let drift = (Complex64::from_polar(e, h[0]) + Complex64::from_polar(1.0, -h[0])) / z;
    let transverse: f64 = h[1..].iter().map(|t| t.cos()).sum::<f64>() * 2.0 / z;
    let phi = drift + transverse;
    if params.lazy {
        (phi + 1.0) * 0.5
    } else {
        phi
    }
}

/// `max(|n|^(1/2), |x|)` with the Euclidean norm on the transverse part.
pub fn eta(z: &Vertex) -> f64 {
    (z.n.abs() as f64).sqrt().max(z.x_norm())
}

/// Spread of a single vertex, `max(1, eta(z))`.
pub fn spread_point(z: &Vertex) -> f64 {
    eta(z).max(1.0)
}

/// A minimum-product spanning tree of a vertex set under `max(1, eta(z - z'))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadTree {
    /// The set, in lexicographic order.
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(Vertex, Vertex)>,
    pub product: f64,
}

/// Spread of a finite set: the minimum over spanning trees of the product of edge spreads.
///
/// Kruskal on the complete graph; edges sort by weight, then by the
/// lexicographic positions of their endpoints, so the tree is deterministic.
pub fn spread(vertices: &[Vertex]) -> Result<SpreadTree> {
    let mut set: Vec<Vertex> = vertices.to_vec();
    set.sort();
    set.dedup();
    if set.is_empty() {
        return domain("spread of an empty set");
    }
    if let Some(v) = set.iter().find(|v| v.dim() != set[0].dim()) {
        return domain(format!("vertex {v} has a different dimension"));
    }
    let mut candidates = Vec::with_capacity(set.len() * (set.len() - 1) / 2);
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            candidates.push((spread_point(&(&set[i] - &set[j])), i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut uf = UnionFind::<usize>::new(set.len());
    let mut edges = Vec::with_capacity(set.len().saturating_sub(1));
    let mut product = 1.0;
    for (w, i, j) in candidates {
        if uf.union(i, j) {
            edges.push((set[i].clone(), set[j].clone()));
            product *= w;
        }
    }
    Ok(SpreadTree { vertices: set, edges, product })
}
