//! Electrical calculus on finite networks.
//!
//! Conventions, fixed throughout:
//!
//! * an edge `e = (u, v)` is stored once and oriented from `u` to `v`; a flow
//!   assigns `theta(e)` to that orientation and `-theta(e)` to the reverse;
//! * `grad f (u -> v) = c(e) (f(u) - f(v))`, current flowing down the potential;
//! * `div theta (x)` is the net outflow at `x`, so that
//!   `div grad f = mu * (f - P f)` with `mu(x)` the total conductance at `x`;
//! * the Dirichlet energy counts every edge once: `sum_e c(e) (f(u) - f(v))^2`;
//! * flow inner products are weighted by resistance, vertex inner products by
//!   `mu`, so Gauss-Green reads `<grad f, grad phi>_r = <f - P f, phi>_mu`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::finite_box::{FiniteBox, Slot};
use crate::lattice::{step_distribution, LatticeParams, Step, Vertex};
use crate::solver::{solve_pcg, CsrMatrix};

/// Relative residual for potential solves.
const POTENTIAL_TOLERANCE: f64 = 1e-13;

/// Label of the wired vertex in edge-list files.
pub const WIRED_LABEL: &str = "WIRED";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub conductance: f64,
}

impl Edge {
    pub fn resistance(&self) -> f64 {
        1.0 / self.conductance
    }
}

/// A connected network on vertices `0..size`, possibly with parallel edges.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteNetwork {
    pub size: usize,
    pub edges: Vec<Edge>,
    /// Vertex standing for a wired boundary, if any.
    pub wired: Option<usize>,
    incident: Vec<Vec<usize>>,
}

impl FiniteNetwork {
    pub fn new(size: usize, edges: Vec<(usize, usize, f64)>, wired: Option<usize>) -> Result<Self> {
        let edges: Vec<Edge> = edges.into_iter().map(|(u, v, conductance)| Edge { u, v, conductance }).collect();
        for e in &edges {
            if e.u >= size || e.v >= size {
                return domain(format!("edge ({}, {}) leaves the {size} vertices", e.u, e.v));
            }
            if e.u == e.v {
                return domain(format!("self-loop at {}", e.u));
            }
            if !(e.conductance > 0.0 && e.conductance.is_finite()) {
                return domain(format!("conductance {} on ({}, {}) is not positive", e.conductance, e.u, e.v));
            }
        }
        if wired.is_some_and(|w| w >= size) {
            return domain("wired vertex out of range");
        }
        let mut incident = vec![Vec::new(); size];
        for (i, e) in edges.iter().enumerate() {
            incident[e.u].push(i);
            incident[e.v].push(i);
        }
        let net = FiniteNetwork { size, edges, wired, incident };
        if size == 0 || net.reachable(0, None).iter().any(|r| !r) {
            return domain("network is empty or disconnected");
        }
        Ok(net)
    }

    /// The box as a network: interior edges once each, and every edge leaving
    /// the box attached to an extra wired vertex (index `len`) when the box is
    /// wired, or dropped when it is not.
    pub fn from_box(params: &LatticeParams, region: &FiniteBox) -> Result<Self> {
        params.validate()?;
        region.validate()?;
        let len = region.len(params.d);
        let mut edges = Vec::new();
        let mut to_wire = vec![0.0; len];
        for i in 0..len {
            for (slot, c) in region.neighbors(params, i) {
                match slot {
                    Slot::Inside(j) if j > i => edges.push((i, j, c)),
                    Slot::Inside(_) => {}
                    Slot::Outside => to_wire[i] += c,
                }
            }
        }
        let wired = region.wired.then_some(len);
        if region.wired {
            edges.extend(to_wire.iter().enumerate().filter(|(_, &c)| c > 0.0).map(|(i, &c)| (i, len, c)));
        }
        FiniteNetwork::new(len + usize::from(region.wired), edges, wired)
    }

    pub fn incident(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.incident[x].iter().map(move |&i| {
            let e = &self.edges[i];
            (if e.u == x { e.v } else { e.u }, e.conductance)
        })
    }

    /// Total conductance at `x`.
    pub fn mu(&self, x: usize) -> f64 {
        self.incident(x).map(|(_, c)| c).sum()
    }

    /// Vertices reachable from `from` without passing through `blocked`.
    fn reachable(&self, from: usize, blocked: Option<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.size];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if Some(x) == blocked && x != from {
                continue;
            }
            for (y, _) in self.incident(x) {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// The network with edge `index` removed; errors if that disconnects it.
    pub fn without_edge(&self, index: usize) -> Result<Self> {
        let edges = self.edges.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, e)| (e.u, e.v, e.conductance));
        FiniteNetwork::new(self.size, edges.collect(), self.wired)
    }

    fn label(&self, x: usize) -> String {
        if Some(x) == self.wired {
            WIRED_LABEL.to_string()
        } else {
            x.to_string()
        }
    }

    /// Edge list with header `u_id,v_id,conductance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u_id,v_id,conductance\n");
        for e in &self.edges {
            let _ = writeln!(out, "{},{},{:.17e}", self.label(e.u), self.label(e.v), e.conductance);
        }
        out
    }

    /// Parses [`FiniteNetwork::to_csv`] output. Vertex ids are nonnegative
    /// integers; the label `WIRED` is the wired vertex and is given the next
    /// free index.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        let mut has_wired = false;
        let mut max_id = None::<usize>;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("u_id")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields", lineno + 1)));
            }
            let mut id = |s: &str| -> Result<Option<usize>> {
                if s == WIRED_LABEL {
                    has_wired = true;
                    return Ok(None);
                }
                let v: usize =
                    s.parse().map_err(|_| Error::Parse(format!("line {}: bad vertex id {s:?}", lineno + 1)))?;
                max_id = Some(max_id.map_or(v, |m: usize| m.max(v)));
                Ok(Some(v))
            };
            let u = id(fields[0])?;
            let v = id(fields[1])?;
            let c: f64 =
                fields[2].parse().map_err(|_| Error::Parse(format!("line {}: bad conductance", lineno + 1)))?;
            raw.push((u, v, c));
        }
        let base = max_id.map_or(0, |m| m + 1);
        let wired = has_wired.then_some(base);
        let edges = raw.into_iter().map(|(u, v, c)| (u.unwrap_or(base), v.unwrap_or(base), c)).collect();
        FiniteNetwork::new(base + usize::from(has_wired), edges, wired)
    }
}

/// A real function on the network vertices, indexed by vertex id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexFunction {
    pub values: Vec<f64>,
}

/// A flow, one value per stored edge in its stored orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlow {
    pub values: Vec<f64>,
}

impl EdgeFlow {
    pub fn zero(net: &FiniteNetwork) -> Self {
        EdgeFlow { values: vec![0.0; net.edges.len()] }
    }

    /// Flow from `x` to `y` summed over parallel edges; antisymmetric by
    /// construction.
    pub fn between(&self, net: &FiniteNetwork, x: usize, y: usize) -> f64 {
        net.incident[x]
            .iter()
            .filter_map(|&i| {
                let e = &net.edges[i];
                if e.u == x && e.v == y {
                    Some(self.values[i])
                } else if e.v == x && e.u == y {
                    Some(-self.values[i])
                } else {
                    None
                }
            })
            .sum()
    }
}

fn check_function(net: &FiniteNetwork, f: &VertexFunction) -> Result<()> {
    if f.values.len() != net.size {
        return domain(format!("function has {} values for {} vertices", f.values.len(), net.size));
    }
    Ok(())
}

fn check_flow(net: &FiniteNetwork, theta: &EdgeFlow) -> Result<()> {
    if theta.values.len() != net.edges.len() {
        return domain(format!("flow has {} values for {} edges", theta.values.len(), net.edges.len()));
    }
    Ok(())
}

pub fn gradient(net: &FiniteNetwork, f: &VertexFunction) -> Result<EdgeFlow> {
    check_function(net, f)?;
    Ok(EdgeFlow { values: net.edges.iter().map(|e| e.conductance * (f.values[e.u] - f.values[e.v])).collect() })
}

/// Net outflow at every vertex.
pub fn divergence(net: &FiniteNetwork, theta: &EdgeFlow) -> Result<VertexFunction> {
    check_flow(net, theta)?;
    let mut out = vec![0.0; net.size];
    for (e, t) in net.edges.iter().zip(&theta.values) {
        out[e.u] += t;
        out[e.v] -= t;
    }
    Ok(VertexFunction { values: out })
}

/// `P f (x) = sum_y p(x, y) f(y)`.
pub fn transition(net: &FiniteNetwork, f: &VertexFunction) -> Result<VertexFunction> {
    check_function(net, f)?;
    let values =
        (0..net.size).map(|x| net.incident(x).map(|(y, c)| c * f.values[y]).sum::<f64>() / net.mu(x)).collect();
    Ok(VertexFunction { values })
}

pub fn dirichlet_energy(net: &FiniteNetwork, f: &VertexFunction) -> Result<f64> {
    check_function(net, f)?;
    Ok(net.edges.iter().map(|e| e.conductance * (f.values[e.u] - f.values[e.v]).powi(2)).sum())
}

/// `sum_e r(e) theta(e)^2`.
pub fn flow_energy(net: &FiniteNetwork, theta: &EdgeFlow) -> Result<f64> {
    check_flow(net, theta)?;
    Ok(net.edges.iter().zip(&theta.values).map(|(e, t)| e.resistance() * t * t).sum())
}

/// `|f(at) - P f(at)| <= tol`.
pub fn is_harmonic(net: &FiniteNetwork, f: &VertexFunction, at: usize, tol: f64) -> Result<bool> {
    check_function(net, f)?;
    if at >= net.size {
        return domain(format!("vertex {at} not in the network"));
    }
    let mean = net.incident(at).map(|(y, c)| c * f.values[y]).sum::<f64>() / net.mu(at);
    Ok((f.values[at] - mean).abs() <= tol)
}

/// Mean-value check for a function on the lattice at `at`, relative to the
/// size of `f(at)`: `|f(at) - P f(at)| <= tol * max(1, |f(at)|)`. The scale
/// matters for functions such as `exp(-lambda n)`, whose values span many
/// orders of magnitude. `f` returning `None` on a neighbour is a domain error.
pub fn is_harmonic_on_lattice<F>(params: &LatticeParams, f: F, at: &Vertex, tol: f64) -> Result<bool>
where
    F: Fn(&Vertex) -> Option<f64>,
{
    params.validate()?;
    if at.dim() != params.d {
        return domain("vertex dimension does not match the lattice");
    }
    let value = |v: &Vertex| f(v).ok_or_else(|| Error::Domain(format!("no value at {v}")));
    let here = value(at)?;
    let s = step_distribution(params);
    let mut mean = s.prob_stay * here;
    for step in Step::all(params.d) {
        mean += s.prob(step) * value(&step.apply(at))?;
    }
    Ok((here - mean).abs() <= tol * here.abs().max(1.0))
}

/// The second terminal of an effective-conductance computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sink {
    Vertex(usize),
    /// The network's wired vertex.
    Wired,
}

/// Unit potential `v` with `v(source) = 1`, `v(sink) = 0`, harmonic elsewhere.
/// Vertices cut off from both terminals keep the value 0.
pub fn unit_potential(net: &FiniteNetwork, source: usize, sink: Sink) -> Result<VertexFunction> {
    let sink = match sink {
        Sink::Vertex(s) => s,
        Sink::Wired => match net.wired {
            Some(w) => w,
            None => return domain("the network has no wired vertex"),
        },
    };
    if source >= net.size || sink >= net.size {
        return domain("terminal not in the network");
    }
    if source == sink {
        return domain("source and sink coincide");
    }
    // unknowns: vertices reachable from the source before the sink
    let live = net.reachable(source, Some(sink));
    if !live[sink] {
        return domain(format!("{source} and {sink} are not connected"));
    }
    let mut slot = vec![usize::MAX; net.size];
    let mut unknowns = Vec::new();
    for x in 0..net.size {
        if live[x] && x != source && x != sink {
            slot[x] = unknowns.len();
            unknowns.push(x);
        }
    }
    let mut values = vec![0.0; net.size];
    values[source] = 1.0;
    if !unknowns.is_empty() {
        // symmetric scaling by mu^-1/2 gives a unit diagonal
        let scale: Vec<f64> = unknowns.iter().map(|&x| net.mu(x).sqrt()).collect();
        let mut triplets = Vec::new();
        let mut rhs = vec![0.0; unknowns.len()];
        for (i, &x) in unknowns.iter().enumerate() {
            triplets.push((i, i, 1.0));
            for (y, c) in net.incident(x) {
                if y == source {
                    rhs[i] += c / scale[i];
                } else if slot[y] != usize::MAX {
                    triplets.push((i, slot[y], -c / (scale[i] * scale[slot[y]])));
                }
            }
        }
        let a = CsrMatrix::from_triplets(unknowns.len(), triplets);
        let sol = solve_pcg(&a, &rhs, POTENTIAL_TOLERANCE, 20 * unknowns.len() + 1000)?;
        for (i, &x) in unknowns.iter().enumerate() {
            values[x] = sol.x[i] / scale[i];
        }
    }
    Ok(VertexFunction { values })
}

/// Current leaving `source` under the unit potential.
pub fn effective_conductance(net: &FiniteNetwork, source: usize, sink: Sink) -> Result<f64> {
    let v = unit_potential(net, source, sink)?;
    Ok(net.incident(source).map(|(y, c)| c * (1.0 - v.values[y])).sum())
}

pub fn effective_resistance(net: &FiniteNetwork, source: usize, sink: Sink) -> Result<f64> {
    Ok(1.0 / effective_conductance(net, source, sink)?)
}

/// The current flow from `source` to `sink` of strength one; by Thompson's
/// principle it has the least energy among unit flows.
pub fn unit_current_flow(net: &FiniteNetwork, source: usize, sink: Sink) -> Result<EdgeFlow> {
    let v = unit_potential(net, source, sink)?;
    let current: f64 = net.incident(source).map(|(y, c)| c * (1.0 - v.values[y])).sum();
    let mut flow = gradient(net, &v)?;
    for t in &mut flow.values {
        *t /= current;
    }
    Ok(flow)
}

/// Both sides of Gauss-Green, `(<grad f, grad phi>_r, <f - P f, phi>_mu)`.
pub fn gauss_green_sides(net: &FiniteNetwork, f: &VertexFunction, phi: &VertexFunction) -> Result<(f64, f64)> {
    let gf = gradient(net, f)?;
    let gphi = gradient(net, phi)?;
    let lhs = net.edges.iter().enumerate().map(|(i, e)| e.resistance() * gf.values[i] * gphi.values[i]).sum();
    let pf = transition(net, f)?;
    let rhs = (0..net.size).map(|x| net.mu(x) * (f.values[x] - pf.values[x]) * phi.values[x]).sum();
    Ok((lhs, rhs))
}

/// Whether the two sides of Gauss-Green agree to `tol`, relative to their
/// magnitude when that exceeds one.
pub fn gauss_green_check(net: &FiniteNetwork, f: &VertexFunction, phi: &VertexFunction, tol: f64) -> Result<bool> {
    let (lhs, rhs) = gauss_green_sides(net, f, phi)?;
    Ok((lhs - rhs).abs() <= tol * lhs.abs().max(rhs.abs()).max(1.0))
}
