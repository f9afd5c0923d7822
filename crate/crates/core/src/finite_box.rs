//! Finite boxes `[n_min, n_max] x {x : |x - c|_inf <= r}` of the lattice,
//! with a dense lexicographic indexing of their vertices.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{domain, Result};
use crate::lattice::{LatticeParams, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteBox {
    pub n_min: i64,
    pub n_max: i64,
    pub x_radius: i64,
    /// Boundary wired into a single root vertex.
    #[serde(default)]
    pub wired: bool,
    /// Transverse centre; empty means the origin.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x_center: Vec<i64>,
}

/// A box neighbour: either an interior index or the outside (absorbing or wired).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Inside(usize),
    Outside,
}

impl FiniteBox {
    pub fn new(n_min: i64, n_max: i64, x_radius: i64, wired: bool) -> Result<Self> {
        let b = FiniteBox { n_min, n_max, x_radius, wired, x_center: Vec::new() };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min > self.n_max {
            return domain(format!("empty level range [{}, {}]", self.n_min, self.n_max));
        }
        if self.x_radius < 0 {
            return domain(format!("negative transverse radius {}", self.x_radius));
        }
        Ok(())
    }

    /// The same box shifted by `-z`, so that `z` moves to the origin.
    pub fn translated(&self, z: &Vertex) -> FiniteBox {
        let d = z.dim();
        let x_center = (0..d).map(|i| self.center(i) - z.x[i]).collect();
        FiniteBox { n_min: self.n_min - z.n, n_max: self.n_max - z.n, x_center, ..self.clone() }
    }

    fn center(&self, axis: usize) -> i64 {
        self.x_center.get(axis).copied().unwrap_or(0)
    }

    pub fn levels(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn side(&self) -> usize {
        (2 * self.x_radius + 1) as usize
    }

    pub fn len(&self, d: usize) -> usize {
        self.levels() * self.side().pow(d as u32)
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        (self.n_min..=self.n_max).contains(&v.n)
            && v.x.iter().enumerate().all(|(i, &c)| (c - self.center(i)).abs() <= self.x_radius)
    }

    /// Lexicographic position of `v` among the box vertices.
    pub fn index(&self, v: &Vertex) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let side = self.side();
        let mut idx = (v.n - self.n_min) as usize;
        for (i, &c) in v.x.iter().enumerate() {
            idx = idx * side + (c - self.center(i) + self.x_radius) as usize;
        }
        Some(idx)
    }

    pub fn vertex(&self, mut idx: usize, d: usize) -> Vertex {
        let side = self.side();
        let mut x: SmallVec<[i64; 4]> = SmallVec::from_elem(0, d);
        for i in (0..d).rev() {
            x[i] = (idx % side) as i64 - self.x_radius + self.center(i);
            idx /= side;
        }
        Vertex { n: self.n_min + idx as i64, x }
    }

    /// All vertices in lexicographic order.
    pub fn vertices(&self, d: usize) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.len(d)).map(move |i| self.vertex(i, d))
    }

    /// Neighbours of box vertex `idx` with edge conductances; neighbours
    /// outside the box are reported as [`Slot::Outside`], one entry per edge.
    pub fn neighbors(&self, params: &LatticeParams, idx: usize) -> SmallVec<[(Slot, f64); 10]> {
        let v = self.vertex(idx, params.d);
        v.neighbors()
            .map(|w| {
                let c = (params.lambda * v.n.max(w.n) as f64).exp();
                (self.index(&w).map_or(Slot::Outside, Slot::Inside), c)
            })
            .collect()
    }
}
