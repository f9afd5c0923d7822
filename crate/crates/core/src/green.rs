//! Green's function of the network walk.
//!
//! * [`green_exact`]: the Green's function restricted to a finite box, from a
//!   sparse linear solve.
//! * [`green_mc`], [`green_via_hitting`]: Monte Carlo estimates.
//! * [`LatticeGreen`]: the Green's function of the whole lattice as a series
//!   over the number of transverse steps, evaluated to near machine precision.
//! * [`envelope_upper`], [`envelope_lower`], [`fit_envelope_constants`]: the
//!   two-regime decay envelopes.
//! * [`bubble_integral`]: the Fourier integral of `|1 - phi(h)|^-2`, which by
//!   Parseval equals the sum of `G(0, z)^2` over the lattice.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::finite_box::{FiniteBox, Slot};
use crate::lattice::{step_distribution, vertex_conductance, LatticeParams, Vertex};
use crate::rng::{sub_seed, walker_stream};
use crate::solver::{solve_pcg, CsrMatrix};
use crate::stats::{linear_fit, MeanVar};
use crate::walk::{drift_tail_bound, expected_level_occupation, WalkerState};

/// Relative residual at which box solves stop.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// Estimators stop a walk once the expected number of further visits to the
/// target is provably below this.
pub const TAIL_CUTOFF: f64 = 1e-13;

/// One row `y -> G_B(source, y)` of the Green's function restricted to a box.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenTable {
    pub region: FiniteBox,
    pub params: LatticeParams,
    pub source: Vertex,
    /// Indexed like the box vertices.
    pub values: Vec<f64>,
    pub solver_residual: f64,
    pub iterations: usize,
}

impl GreenTable {
    /// `G_B(source, y)`, zero outside the box.
    pub fn get(&self, y: &Vertex) -> f64 {
        self.region.index(y).map_or(0.0, |i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &g)| (self.region.vertex(i, self.params.d), g))
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum()
    }

    /// CSV with header `n,x1,..,xd,value`, rows in lexicographic order.
    pub fn to_csv(&self) -> String {
        let d = self.params.d;
        let mut out = String::from("n");
        for i in 1..=d {
            let _ = write!(out, ",x{i}");
        }
        out.push_str(",value\n");
        for (v, g) in self.iter() {
            let _ = write!(out, "{}", v.n);
            for c in &v.x {
                let _ = write!(out, ",{c}");
            }
            let _ = writeln!(out, ",{g:.17e}");
        }
        out
    }
}

/// Solves for `G_B(source, .)` with the walk absorbed on leaving the box.
///
/// With `L = M - A` the Dirichlet Laplacian (vertex conductances on the
/// diagonal, interior conductances off it), `G_B = L^-1 M`. The system is
/// solved in the symmetric scaling `M^-1/2 L M^-1/2`, which has unit
/// diagonal and translation-invariant entries.
pub fn green_exact(params: &LatticeParams, region: &FiniteBox, source: &Vertex) -> Result<GreenTable> {
    params.validate()?;
    region.validate()?;
    if source.dim() != params.d {
        return domain("source dimension does not match the lattice");
    }
    let Some(s) = region.index(source) else {
        return domain(format!("source {source} is not in the box"));
    };
    let len = region.len(params.d);
    let mu: Vec<f64> = (0..len).map(|i| vertex_conductance(params, &region.vertex(i, params.d))).collect();
    let sqrt_mu: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let mut triplets = Vec::with_capacity(len * (2 * params.d + 3));
    for i in 0..len {
        triplets.push((i, i, 1.0));
        for (slot, c) in region.neighbors(params, i) {
            if let Slot::Inside(j) = slot {
                triplets.push((i, j, -c / (sqrt_mu[i] * sqrt_mu[j])));
            }
        }
    }
    let a = CsrMatrix::from_triplets(len, triplets);
    let mut b = vec![0.0; len];
    b[s] = 1.0 / sqrt_mu[s];
    let sol = solve_pcg(&a, &b, SOLVER_TOLERANCE, 50 * len + 1000)?;
    let values = sol.x.iter().zip(&sqrt_mu).map(|(w, r)| (w * r).max(0.0)).collect();
    Ok(GreenTable {
        region: region.clone(),
        params: *params,
        source: source.clone(),
        values,
        solver_residual: sol.residual,
        iterations: sol.iterations,
    })
}

/// Monte Carlo estimate with its standard error and a bound on the bias from
/// stopping walks early.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    /// Bound on the expected visits missed because walks were stopped.
    pub truncation_bound: f64,
}

/// Expected visits to `target` still to come from `position`: the walk must
/// first return to the target level, after which each visit to the target is a
/// visit to its level.
fn remaining_visit_bound(params: &LatticeParams, position: &Vertex, target: &Vertex) -> f64 {
    drift_tail_bound(params, position.n - target.n) * expected_level_occupation(params)
}

/// `E[#{m : S_m = target}]` for walks from `source`.
pub fn green_mc(
    params: &LatticeParams,
    source: &Vertex,
    target: &Vertex,
    horizon: u64,
    samples: u64,
    seed: u64,
) -> Result<GreenEstimate> {
    green_mc_in(params, source, target, horizon, samples, seed, None)
}

/// As [`green_mc`]; with `region`, visits only count before the walk first
/// leaves it, which estimates the restricted Green's function.
///
/// Walk `i` uses `walker_stream(seed, i)`. A walk stops at the horizon, on
/// leaving the region, or once the expected number of further visits, bounded
/// by `exp(-lambda (n - n_target)) / (p - q)`, drops below
/// [`TAIL_CUTOFF`]; the mean of that bound over walks stopped for the first or
/// last reason is reported as `truncation_bound`.
pub fn green_mc_in(
    params: &LatticeParams,
    source: &Vertex,
    target: &Vertex,
    horizon: u64,
    samples: u64,
    seed: u64,
    region: Option<&FiniteBox>,
) -> Result<GreenEstimate> {
    params.validate()?;
    if samples == 0 {
        return domain("at least one sample is needed");
    }
    if source.dim() != params.d || target.dim() != params.d {
        return domain("vertex dimension does not match the lattice");
    }
    let distance = (target - source).l1_norm() as u64;
    if distance > horizon || region.is_some_and(|r| !r.contains(source) || !r.contains(target)) {
        return Ok(GreenEstimate {
            value: 0.0,
            std_error: 0.0,
            samples,
            truncation_bound: if region.is_some() { 0.0 } else { remaining_visit_bound(params, source, target) },
        });
    }
    let runs: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut w = WalkerState::new(params, source.clone(), walker_stream(seed, i));
            let mut visits = 0u64;
            loop {
                if let Some(r) = region {
                    if !r.contains(&w.position) {
                        return (visits as f64, 0.0);
                    }
                }
                if w.position == *target {
                    visits += 1;
                }
                let tail = remaining_visit_bound(params, &w.position, target);
                if tail < TAIL_CUTOFF || w.steps_taken >= horizon {
                    return (visits as f64, tail);
                }
                w.step();
            }
        })
        .collect();
    let stats: MeanVar = runs.iter().map(|r| r.0).collect();
    let tail: f64 = runs.iter().map(|r| r.1).sum::<f64>() / samples as f64;
    Ok(GreenEstimate { value: stats.mean, std_error: stats.std_error(), samples, truncation_bound: tail })
}

/// `G(o, o) * P(tau_target < infinity)` from two independent passes of
/// `samples` walks each (seeds `sub_seed(seed, 0)` and `sub_seed(seed, 1)`).
/// The standard error combines both by the delta method.
pub fn green_via_hitting(
    params: &LatticeParams,
    source: &Vertex,
    target: &Vertex,
    horizon: u64,
    samples: u64,
    seed: u64,
) -> Result<GreenEstimate> {
    let diag = green_mc(params, source, source, horizon, samples, sub_seed(seed, 0))?;
    if source == target {
        return Ok(diag);
    }
    let hit_seed = sub_seed(seed, 1);
    let runs: Vec<(bool, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut w = WalkerState::new(params, source.clone(), walker_stream(hit_seed, i));
            loop {
                if w.position == *target {
                    return (true, 0.0);
                }
                let tail = drift_tail_bound(params, w.position.n - target.n);
                if tail < TAIL_CUTOFF || w.steps_taken >= horizon {
                    return (false, tail);
                }
                w.step();
            }
        })
        .collect();
    let hits: MeanVar = runs.iter().map(|r| if r.0 { 1.0 } else { 0.0 }).collect();
    let miss_tail: f64 = runs.iter().map(|r| r.1).sum::<f64>() / samples as f64;
    let value = diag.value * hits.mean;
    let std_error = ((hits.mean * diag.std_error).powi(2) + (diag.value * hits.std_error()).powi(2)).sqrt();
    let truncation_bound = diag.truncation_bound * hits.mean + diag.value * miss_tail;
    Ok(GreenEstimate { value, std_error, samples, truncation_bound })
}

/// Constants of the decay envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// Which form of the envelope applies at `z = (n, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `|x| <= n`: `exp(-c |x|^2 / n) |z|^(-d/2)`.
    Gaussian,
    /// `|x| > n`: `exp(-c |z|)`.
    Exponential,
}

/// Regime of `z`; the boundary `|x| = n` belongs to the Gaussian form.
pub fn regime(z: &Vertex) -> Regime {
    if z.x_norm() <= z.n as f64 {
        Regime::Gaussian
    } else {
        Regime::Exponential
    }
}

/// The regime-dependent variable `u` and the prefactor exponent: the
/// envelope is `c * exp(-c' u) * |z|^(-power)`.
fn envelope_shape(d: usize, z: &Vertex) -> (f64, f64) {
    match regime(z) {
        Regime::Gaussian => (z.x_norm_sq() as f64 / z.n as f64, d as f64 / 2.0),
        Regime::Exponential => (z.norm(), 0.0),
    }
}

fn envelope(params: &LatticeParams, z: &Vertex, c: f64, rate: f64) -> Result<f64> {
    if z.is_origin() {
        return domain("the envelopes are not defined at the origin");
    }
    if z.dim() != params.d {
        return domain("vertex dimension does not match the lattice");
    }
    let (u, power) = envelope_shape(params.d, z);
    Ok(c * (-rate * u).exp() * z.norm().powf(-power))
}

pub fn envelope_upper(params: &LatticeParams, z: &Vertex, consts: &EnvelopeConstants) -> Result<f64> {
    envelope(params, z, consts.c1, consts.c2)
}

pub fn envelope_lower(params: &LatticeParams, z: &Vertex, consts: &EnvelopeConstants) -> Result<f64> {
    envelope(params, z, consts.c3, consts.c4)
}

/// Result of [`fit_envelope_constants`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFit {
    pub constants: EnvelopeConstants,
    /// Fitted common rate (`c2 = c4`) and log-prefactor before widening.
    pub rate: f64,
    pub log_prefactor: f64,
    /// Grid points outside `[lower, upper]`.
    pub failures: Vec<Vertex>,
}

/// Least-squares fit of `log G = log c - c' u - power * log |z|` over a grid
/// covering both regimes, with one rate shared by the two regimes as in the
/// envelopes. `c1` and `c3` are then widened to the extreme residuals, so
/// every grid point lies between the envelopes unless the fitted rate is not
/// positive, in which case the rate is clamped to zero and violations are
/// listed in `failures`.
pub fn fit_envelope_constants(params: &LatticeParams, grid: &[(Vertex, f64)]) -> Result<EnvelopeFit> {
    let mut us = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    let (mut gaussian, mut exponential) = (0, 0);
    for (z, g) in grid {
        if z.is_origin() || !(*g > 0.0) {
            return domain(format!("grid point {z} has no positive value off the origin"));
        }
        match regime(z) {
            Regime::Gaussian => gaussian += 1,
            Regime::Exponential => exponential += 1,
        }
        let (u, power) = envelope_shape(params.d, z);
        us.push(u);
        ys.push(g.ln() + power * z.norm().ln());
    }
    if gaussian == 0 || exponential == 0 {
        return domain("the grid must contain points of both regimes");
    }
    let Some(fit) = linear_fit(&us, &ys) else {
        return domain("degenerate grid: all regime variables coincide");
    };
    let rate = (-fit.slope).max(0.0);
    let residuals: Vec<f64> = us.iter().zip(&ys).map(|(u, y)| y - (fit.intercept - rate * u)).collect();
    let hi = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let constants =
        EnvelopeConstants { c1: (fit.intercept + hi).exp(), c2: rate, c3: (fit.intercept + lo).exp(), c4: rate };
    let failures = grid
        .iter()
        .filter(|(z, g)| {
            let up = envelope_upper(params, z, &constants).unwrap_or(f64::INFINITY);
            let low = envelope_lower(params, z, &constants).unwrap_or(0.0);
            *g > up * (1.0 + 1e-12) || *g < low * (1.0 - 1e-12)
        })
        .map(|(z, _)| z.clone())
        .collect();
    Ok(EnvelopeFit { constants, rate, log_prefactor: fit.intercept, failures })
}

/// Midpoint nodes and weights on `[-pi, pi]`, graded towards zero by the
/// substitution `h = pi * sign(t) |t|^3`. The integrand `|1 - phi|^-2` has
/// its only singularity at `h = 0`; the grading keeps the midpoint rule
/// converging at the rate of a smooth integrand.
fn graded_axis(mesh: usize) -> Vec<(f64, f64)> {
    (0..mesh)
        .map(|k| {
            let t = -1.0 + (2 * k + 1) as f64 / mesh as f64;
            let h = PI * t.signum() * t.abs().powi(3);
            let w = 3.0 * PI * t * t * 2.0 / mesh as f64;
            (h, w)
        })
        .collect()
}

/// `(2 pi)^-(d+1)` times the integral of `|1 - phi(h)|^-2` over
/// `[-pi, pi]^(d+1)`, omitting the Euclidean ball of radius `epsilon` around
/// zero. Uses a product midpoint rule with `mesh` graded nodes per axis.
pub fn bubble_integral(params: &LatticeParams, mesh: usize, epsilon: f64) -> Result<f64> {
    params.validate()?;
    if mesh < 8 {
        return domain(format!("mesh must be at least 8, got {mesh}"));
    }
    if !(epsilon >= 0.0) {
        return domain(format!("cutoff must be nonnegative, got {epsilon}"));
    }
    let d = params.d;
    let z = params.normalizer();
    let e = params.lambda.exp();
    let axis = graded_axis(mesh);
    // transverse cells: (2 sum cos / Z, |h|^2, weight)
    let mut cells: Vec<(f64, f64, f64)> = vec![(0.0, 0.0, 1.0)];
    for _ in 0..d {
        cells = cells
            .iter()
            .flat_map(|&(s, r2, w)| axis.iter().map(move |&(h, wh)| (s + 2.0 * h.cos() / z, r2 + h * h, w * wh)))
            .collect();
    }
    let eps2 = epsilon * epsilon;
    let per_h0: Vec<f64> = axis
        .par_iter()
        .map(|&(h0, w0)| {
            let re0 = 1.0 - (e + 1.0) * h0.cos() / z;
            let im2 = ((e - 1.0) * h0.sin() / z).powi(2);
            let mut acc = 0.0;
            for &(s, r2, w) in &cells {
                if eps2 > 0.0 && h0 * h0 + r2 < eps2 {
                    continue;
                }
                let re = re0 - s;
                acc += w / (re * re + im2);
            }
            acc * w0
        })
        .collect();
    let mut total: f64 = per_h0.iter().sum();
    if params.lazy {
        total *= 4.0;
    }
    Ok(total / (2.0 * PI).powi(d as i32 + 1))
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    t.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        t.push(acc);
    }
    t
}

/// `P(X_k = x)` for `k = 0..=kmax`, where `X` is the simple random walk on
/// `Z^d` whose steps pick a coordinate uniformly and move it by `±1`.
///
/// Coordinates are added one at a time: with `j` coordinates, each step falls
/// on the newest one with probability `1/j`, so the law is a binomial mixture
/// of one-dimensional return probabilities. Binomial weights are restricted to
/// twelve standard deviations around their mean.
pub fn transverse_kernel(d: usize, x: &[i64], kmax: usize) -> Vec<f64> {
    assert_eq!(x.len(), d);
    let lf = ln_factorials(kmax);
    let one_dim = |target: i64| -> Vec<f64> {
        let t = target.unsigned_abs() as usize;
        (0..=kmax)
            .map(|m| {
                if m < t || (m - t) % 2 == 1 {
                    0.0
                } else {
                    let up = (m + t) / 2;
                    (lf[m] - lf[up] - lf[m - up] - m as f64 * std::f64::consts::LN_2).exp()
                }
            })
            .collect()
    };
    let mut q = one_dim(x[0]);
    for (j, &xj) in x.iter().enumerate().skip(1) {
        let j = (j + 1) as f64;
        let qj = one_dim(xj);
        let (lp, lq) = ((1.0 / j).ln(), ((j - 1.0) / j).ln());
        let mut next = vec![0.0; kmax + 1];
        for (k, slot) in next.iter_mut().enumerate() {
            let mean = k as f64 / j;
            let width = 12.0 * (k as f64 * (j - 1.0) / (j * j)).sqrt() + 12.0;
            let m_lo = (mean - width).floor().max(0.0) as usize;
            let m_hi = ((mean + width).ceil() as usize).min(k);
            let mut acc = 0.0;
            for m in m_lo..=m_hi {
                let a = qj[m];
                let b = q[k - m];
                if a == 0.0 || b == 0.0 {
                    continue;
                }
                acc += (lf[k] - lf[m] - lf[k - m] + m as f64 * lp + (k - m) as f64 * lq).exp() * a * b;
            }
            *slot = acc;
        }
        q = next;
    }
    q
}

/// Green's function of the whole lattice from a series in the number of
/// transverse steps.
///
/// Splitting each step into a drift move (up `e^lambda p`, down `p`) or a
/// transverse move (total `2dp`), `G(0, (n, x)) = sum_k F(n, k) Q_k(x)`, where
/// `Q_k` is the transverse kernel and `F(., k)` is the expected time spent on
/// each level while exactly `k` transverse moves have been made. `F(., 0) = g`,
/// the Green's function of the one-dimensional walk killed at rate `2dp`,
/// which is geometric on both sides of zero, and
/// `F(., k + 1) = 2dp (g * F(., k))`. Levels are kept on a window wide enough
/// that the discarded mass is below `1e-18` relative.
#[derive(Debug, Clone)]
pub struct LatticeGreen {
    pub params: LatticeParams,
    n_lo: i64,
    /// Highest level at which values are reported.
    pub n_max: i64,
    levels: usize,
    /// `f[k][n - n_lo]`.
    f: Vec<Vec<f64>>,
    return_kernel: Vec<f64>,
}

impl LatticeGreen {
    pub fn new(params: &LatticeParams, n_max: i64) -> Result<Self> {
        params.validate()?;
        if n_max < 0 {
            return domain("the level range must include level 0");
        }
        let base = LatticeParams { lazy: false, ..*params };
        let s = step_distribution(&base);
        let (alpha, beta) = (s.prob_up, s.prob_down);
        let gamma = 2.0 * params.d as f64 * s.prob_transverse;
        let disc = 1.0 - 4.0 * alpha * beta;
        let root = disc.sqrt();
        let u = (1.0 - root) / (2.0 * beta);
        let v = (1.0 - root) / (2.0 * alpha);
        let reach = |r: f64| ((1e-18f64).ln() / r.ln()).ceil() as i64 + 1;
        let (j_up, j_down) = (reach(u), reach(v));
        let kernel: Vec<f64> =
            (-j_down..=j_up).map(|j| if j >= 0 { u.powi(j as i32) } else { v.powi((-j) as i32) } / root).collect();
        // across many transverse moves the walk descends m levels with
        // probability exp(-lambda m), which sets the margins of the window
        let margin = ((1e-18f64).ln() / -params.lambda).ceil() as i64 + 1;
        let n_lo = -margin;
        let n_hi = n_max + margin;
        let levels = (n_hi - n_lo + 1) as usize;
        let conv = |src: &[f64], scale: f64| -> Vec<f64> {
            let mut out = vec![0.0; levels];
            for (i, &fv) in src.iter().enumerate() {
                if fv == 0.0 {
                    continue;
                }
                for (k, &gk) in kernel.iter().enumerate() {
                    let target = i as i64 + k as i64 - j_down;
                    if (0..levels as i64).contains(&target) {
                        out[target as usize] += scale * gk * fv;
                    }
                }
            }
            out
        };
        let mut delta = vec![0.0; levels];
        delta[(-n_lo) as usize] = 1.0;
        let mut f = vec![conv(&delta, 1.0)];
        let report = (n_max - n_lo) as usize;
        let min_k = (4.0 * gamma / (alpha - beta) * n_max as f64) as usize + 64;
        let mut peak: f64 = 0.0;
        loop {
            let next = conv(f.last().expect("nonempty"), gamma);
            let top = next[..=report].iter().copied().fold(0.0, f64::max);
            peak = peak.max(top);
            f.push(next);
            if f.len() > min_k && top < 1e-18 * peak {
                break;
            }
        }
        let return_kernel = transverse_kernel(params.d, &vec![0; params.d], 2 * f.len());
        Ok(LatticeGreen { params: *params, n_lo, n_max, levels, f, return_kernel })
    }

    /// Number of transverse-step terms kept.
    pub fn terms(&self) -> usize {
        self.f.len()
    }

    fn lazy_factor(&self) -> f64 {
        if self.params.lazy {
            2.0
        } else {
            1.0
        }
    }

    fn column(&self, n: i64) -> Option<usize> {
        (n >= self.n_lo && n <= self.n_max).then(|| (n - self.n_lo) as usize)
    }

    /// `G(0, z)`; levels outside the window are a domain error.
    pub fn value(&self, z: &Vertex) -> Result<f64> {
        if z.dim() != self.params.d {
            return domain("vertex dimension does not match the lattice");
        }
        let Some(c) = self.column(z.n) else {
            return domain(format!("level {} outside [{}, {}]", z.n, self.n_lo, self.n_max));
        };
        let q = if z.x.iter().all(|&c| c == 0) {
            self.return_kernel[..self.f.len()].to_vec()
        } else {
            transverse_kernel(self.params.d, &z.x, self.f.len())
        };
        let g: f64 = self.f.iter().zip(&q).map(|(fk, qk)| fk[c] * qk).sum();
        Ok(g * self.lazy_factor())
    }

    /// `sum_x G(0, (n, x))^2 = sum_{k, k'} F(n, k) F(n, k') Q_{k + k'}(0)`.
    pub fn level_sum_of_squares(&self, n: i64) -> Result<f64> {
        let Some(c) = self.column(n) else {
            return domain(format!("level {n} outside [{}, {}]", self.n_lo, self.n_max));
        };
        let col: Vec<f64> = self.f.iter().map(|fk| fk[c]).collect();
        let top = col.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return Ok(0.0);
        }
        let keep = |v: &f64| *v > 1e-14 * top;
        let a = col.iter().position(keep).expect("positive entry");
        let b = col.iter().rposition(keep).expect("positive entry");
        let q = &self.return_kernel;
        let mut total = 0.0;
        for k in a..=b {
            let mut row = 0.0;
            // Q_m(0) vanishes for odd m
            let start = if (k + a) % 2 == 0 { a } else { a + 1 };
            for k2 in (start..=b).step_by(2) {
                row += col[k2] * q[k + k2];
            }
            total += col[k] * row;
        }
        Ok(total * self.lazy_factor().powi(2))
    }

    /// Sum of `G(0, z)^2` over all levels from the bottom of the window up to `n_max`.
    pub fn sum_of_squares(&self) -> f64 {
        let levels: Vec<i64> = (self.n_lo..=self.n_max).collect();
        let parts: Vec<f64> =
            levels.par_iter().map(|&n| self.level_sum_of_squares(n).expect("level in window")).collect();
        parts.iter().sum()
    }

    #[doc(hidden)]
    pub fn window(&self) -> (i64, usize) {
        (self.n_lo, self.levels)
    }
}
