//! Wilson's algorithm.
//!
//! Two constructions are provided:
//!
//! * [`ust_finite`]: the weighted uniform spanning tree of a finite box, with
//!   either a wired boundary or a free boundary and a root vertex. Randomness
//!   comes from per-vertex stacks, so for a fixed seed the tree does not
//!   depend on the order in which vertices are searched.
//! * [`wsf_rooted_at_infinity`]: the forest grown from the vertices of an
//!   observation window by walks on the whole lattice, each stopped when it
//!   meets the forest built so far. Walks that run out of steps are attached
//!   to the root and flagged as truncated.
//!
//! A forest is stored as a parent map; [`Parent::Root`] marks either the
//! wired boundary, the root vertex of a free box, or a truncated branch.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use smallvec::SmallVec;

use crate::error::{domain, Error, Result};
use crate::finite_box::{FiniteBox, Slot};
use crate::lattice::{LatticeParams, Vertex};
use crate::loop_erase::loop_erase_slice;
use crate::rng::{vertex_stream, Stream};
use crate::walk::{Path, WalkerState};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parent {
    Root,
    Vertex(Vertex),
}

/// Root of a finite spanning tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeRoot {
    Wired,
    At(Vertex),
}

/// One loop-erased branch. `path` runs from the searched vertex to the vertex
/// where the branch joined the forest; when it ended at the root instead,
/// the last vertex of `path` is the one attached to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub path: Path,
    pub to_root: bool,
    /// The walk exhausted its step budget before meeting the forest.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Forest {
    pub parent: FxHashMap<Vertex, Parent>,
    /// The search order actually used.
    pub order: Vec<Vertex>,
    pub branches: Vec<Branch>,
}

impl Forest {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.parent.contains_key(v)
    }

    pub fn parent_of(&self, v: &Vertex) -> Option<&Parent> {
        self.parent.get(v)
    }

    /// Parent edges sorted by child.
    pub fn sorted_edges(&self) -> Vec<(&Vertex, &Parent)> {
        let mut e: Vec<_> = self.parent.iter().collect();
        e.sort();
        e
    }

    pub fn truncated_branches(&self) -> usize {
        self.branches.iter().filter(|b| b.truncated).count()
    }

    /// Line-oriented text form, one `n x1 .. xd -> n' x1' .. xd'` (or
    /// `-> ROOT`) line per vertex in lexicographic order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, p) in self.sorted_edges() {
            let target = match p {
                Parent::Root => "ROOT".to_string(),
                Parent::Vertex(w) => w.to_words(),
            };
            let _ = writeln!(out, "{} -> {}", v.to_words(), target);
        }
        out
    }

    /// Parses [`Forest::to_text`] output; branches and order are not stored
    /// in the text form and come back empty.
    pub fn from_text(text: &str) -> Result<Forest> {
        let mut parent = FxHashMap::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) =
                line.split_once("->").ok_or_else(|| Error::Parse(format!("line {}: missing '->'", lineno + 1)))?;
            let child = Vertex::parse_coords(lhs)?;
            let p = match rhs.trim() {
                "ROOT" => Parent::Root,
                s => Parent::Vertex(Vertex::parse_coords(s)?),
            };
            if parent.insert(child, p).is_some() {
                return Err(Error::Parse(format!("line {}: vertex listed twice", lineno + 1)));
            }
        }
        Ok(Forest { parent, ..Forest::default() })
    }

    /// Parent pointers are acyclic, every parent is a forest vertex or the
    /// root, and vertex parents are lattice neighbours.
    pub fn validate(&self) -> Result<()> {
        for (v, p) in &self.parent {
            if let Parent::Vertex(w) = p {
                if !self.parent.contains_key(w) {
                    return domain(format!("parent {w} of {v} is not in the forest"));
                }
                if !v.is_neighbor(w) {
                    return domain(format!("parent {w} of {v} is not a neighbour"));
                }
            }
        }
        let c = Components::new(self);
        if c.ids.len() != self.parent.len() {
            return domain("parent pointers contain a cycle");
        }
        Ok(())
    }
}

/// Identifier of a component: its unique vertex whose parent is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentId(pub Vertex);

/// Component labels for every forest vertex. The root does not merge
/// components: two vertices share a label exactly when their parent chains
/// end at the same root-attached vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    ids: FxHashMap<Vertex, ComponentId>,
}

impl Components {
    pub fn new(forest: &Forest) -> Self {
        let mut ids: FxHashMap<Vertex, ComponentId> = FxHashMap::default();
        let mut chain: Vec<&Vertex> = Vec::new();
        let mut on_chain: FxHashSet<&Vertex> = FxHashSet::default();
        for start in forest.parent.keys() {
            if ids.contains_key(start) {
                continue;
            }
            chain.clear();
            on_chain.clear();
            let mut v = start;
            let label = loop {
                if let Some(id) = ids.get(v) {
                    break Some(id.clone());
                }
                if !on_chain.insert(v) {
                    break None; // cycle: leave unlabelled
                }
                chain.push(v);
                match forest.parent.get(v) {
                    Some(Parent::Vertex(w)) if forest.parent.contains_key(w) => v = w,
                    Some(Parent::Root) => break Some(ComponentId(v.clone())),
                    _ => break None,
                }
            };
            if let Some(label) = label {
                for u in &chain {
                    ids.insert((*u).clone(), label.clone());
                }
            }
        }
        Components { ids }
    }

    pub fn get(&self, v: &Vertex) -> Option<&ComponentId> {
        self.ids.get(v)
    }

    pub fn count(&self) -> usize {
        self.ids.values().collect::<FxHashSet<_>>().len()
    }

    /// Vertices grouped by component, each group sorted.
    pub fn groups(&self) -> BTreeMap<ComponentId, Vec<Vertex>> {
        let mut g: BTreeMap<ComponentId, Vec<Vertex>> = BTreeMap::new();
        for (v, id) in &self.ids {
            g.entry(id.clone()).or_default().push(v.clone());
        }
        for members in g.values_mut() {
            members.sort();
        }
        g
    }
}

pub fn component_of(forest: &Forest, z: &Vertex) -> Result<ComponentId> {
    if !forest.contains(z) {
        return domain(format!("{z} is not in the forest"));
    }
    let mut v = z;
    for _ in 0..=forest.len() {
        match forest.parent.get(v) {
            Some(Parent::Root) => return Ok(ComponentId(v.clone())),
            Some(Parent::Vertex(w)) => v = w,
            None => return domain(format!("parent chain of {z} leaves the forest at {v}")),
        }
    }
    domain(format!("parent chain of {z} is cyclic"))
}

/// A finite box as an indexed network for Wilson's algorithm. Index
/// `root` is the wired super-vertex (`len`) or the root vertex of a free box.
/// Edges to the outside of a wired box are merged into one edge to the
/// super-vertex with the summed conductance; a free box drops them.
#[derive(Debug, Clone)]
pub struct BoxNetwork {
    pub region: FiniteBox,
    pub d: usize,
    pub root: usize,
    /// Whether `root` is the wired super-vertex.
    pub root_is_wired: bool,
    /// Per vertex: neighbour index and merged conductance.
    pub adjacency: Vec<SmallVec<[(usize, f64); 10]>>,
    cumulative: Vec<SmallVec<[f64; 10]>>,
}

impl BoxNetwork {
    pub fn new(params: &LatticeParams, region: &FiniteBox, root: &TreeRoot) -> Result<Self> {
        params.validate()?;
        region.validate()?;
        let d = params.d;
        let len = region.len(d);
        let (root_idx, wired_sink) = match root {
            TreeRoot::Wired if region.wired => (len, true),
            TreeRoot::Wired => return domain("a wired root needs a wired box"),
            TreeRoot::At(v) => match region.index(v) {
                Some(i) => (i, region.wired),
                None => return domain(format!("root {v} lies outside the box")),
            },
        };
        let outside = if wired_sink { Some(len) } else { None };
        let mut adjacency = Vec::with_capacity(len);
        let mut cumulative = Vec::with_capacity(len);
        for i in 0..len {
            let mut merged: SmallVec<[(usize, f64); 10]> = SmallVec::new();
            for (slot, c) in region.neighbors(params, i) {
                let target = match slot {
                    Slot::Inside(j) => Some(j),
                    Slot::Outside => outside,
                };
                // a root vertex in a wired box is glued to the boundary
                let target = target.map(|t| if t == len && root_idx != len { root_idx } else { t });
                if let Some(t) = target {
                    match merged.iter_mut().find(|(u, _)| *u == t) {
                        Some(entry) => entry.1 += c,
                        None => merged.push((t, c)),
                    }
                }
            }
            let total: f64 = merged.iter().map(|(_, c)| c).sum();
            let mut acc = 0.0;
            let mut cum: SmallVec<[f64; 10]> = merged
                .iter()
                .map(|(_, c)| {
                    acc += c / total;
                    acc
                })
                .collect();
            if let Some(last) = cum.last_mut() {
                *last = f64::INFINITY;
            }
            adjacency.push(merged);
            cumulative.push(cum);
        }
        Ok(BoxNetwork {
            region: region.clone(),
            d,
            root: root_idx,
            root_is_wired: root_idx == len,
            adjacency,
            cumulative,
        })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Vertex {
        self.region.vertex(i, self.d)
    }

    /// One stack entry at vertex `i`: a neighbour drawn with probability
    /// proportional to conductance.
    fn draw<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let k = self.cumulative[i].iter().position(|&c| u < c).unwrap_or(0);
        self.adjacency[i][k].0
    }

    fn parent_entry(&self, j: usize) -> Parent {
        if j == self.root && self.root_is_wired {
            Parent::Root
        } else {
            Parent::Vertex(self.vertex(j))
        }
    }
}

/// Pops per vertex in one run of Wilson's algorithm with stacks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StackDiagram {
    pub seed: u64,
    pub pops: BTreeMap<Vertex, u64>,
}

/// The first `k` entries of the stack at `v`; `None` stands for the wired root.
pub fn stack_entries(net: &BoxNetwork, v: &Vertex, k: usize, seed: u64) -> Result<Vec<Option<Vertex>>> {
    let Some(i) = net.region.index(v) else {
        return domain(format!("{v} lies outside the box"));
    };
    let mut rng = vertex_stream(seed, v);
    Ok((0..k)
        .map(|_| {
            let j = net.draw(i, &mut rng);
            (!(j == net.root && net.root_is_wired)).then(|| net.vertex(j))
        })
        .collect())
}

fn search_order(net: &BoxNetwork, ordering: &[Vertex]) -> Result<Vec<usize>> {
    let mut seen = vec![false; net.len()];
    let mut order = Vec::with_capacity(net.len());
    for v in ordering {
        let Some(i) = net.region.index(v) else {
            return domain(format!("ordering vertex {v} lies outside the box"));
        };
        if !seen[i] {
            seen[i] = true;
            order.push(i);
        }
    }
    order.extend((0..net.len()).filter(|&i| !seen[i]));
    Ok(order)
}

/// Uniform spanning tree of a box with conductance weights, via Wilson's
/// algorithm with stacks. Vertices missing from `ordering` are searched
/// afterwards in lexicographic order.
pub fn ust_finite(
    params: &LatticeParams,
    region: &FiniteBox,
    root: &TreeRoot,
    ordering: &[Vertex],
    seed: u64,
) -> Result<Forest> {
    Ok(ust_finite_with_stacks(params, region, root, ordering, seed)?.0)
}

pub fn ust_finite_with_stacks(
    params: &LatticeParams,
    region: &FiniteBox,
    root: &TreeRoot,
    ordering: &[Vertex],
    seed: u64,
) -> Result<(Forest, StackDiagram)> {
    let net = BoxNetwork::new(params, region, root)?;
    let order = search_order(&net, ordering)?;
    let (forest, pops) = wilson_on_network(&net, &order, seed);
    let pops = pops.into_iter().enumerate().filter(|&(_, c)| c > 0).map(|(i, c)| (net.vertex(i), c)).collect();
    Ok((forest, StackDiagram { seed, pops }))
}

/// Core of the finite algorithm on an indexed network.
pub fn wilson_on_network(net: &BoxNetwork, order: &[usize], seed: u64) -> (Forest, Vec<u64>) {
    let n = net.len();
    let mut in_tree = vec![false; n + 1];
    in_tree[net.root] = true;
    let mut next = vec![usize::MAX; n + 1];
    let mut stacks: Vec<Option<Stream>> = vec![None; n];
    let mut pops = vec![0u64; n];
    let mut forest = Forest::default();
    if !net.root_is_wired {
        forest.parent.insert(net.vertex(net.root), Parent::Root);
    }
    for &start in order {
        if in_tree[start] {
            continue;
        }
        let mut x = start;
        while !in_tree[x] {
            let rng = stacks[x].get_or_insert_with(|| vertex_stream(seed, &net.vertex(x)));
            next[x] = net.draw(x, rng);
            pops[x] += 1;
            x = next[x];
        }
        let mut path = Vec::new();
        x = start;
        while !in_tree[x] {
            in_tree[x] = true;
            let v = net.vertex(x);
            forest.parent.insert(v.clone(), net.parent_entry(next[x]));
            path.push(v);
            x = next[x];
        }
        let to_root = x == net.root;
        if !(to_root && net.root_is_wired) {
            path.push(net.vertex(x));
        }
        forest.branches.push(Branch { path: Path::new(path), to_root, truncated: false });
    }
    forest.order = order.iter().map(|&i| net.vertex(i)).collect();
    (forest, pops)
}

/// Wilson's algorithm rooted at infinity, started from the vertices of
/// `region` (in `ordering`, then the remaining window vertices
/// lexicographically). The walk from vertex `v` uses `vertex_stream(seed, v)`
/// and runs on the whole lattice for at most `horizon` steps.
pub fn wsf_rooted_at_infinity(
    params: &LatticeParams,
    region: &FiniteBox,
    ordering: &[Vertex],
    horizon: u64,
    seed: u64,
) -> Result<Forest> {
    if horizon == 0 {
        return domain("horizon must be positive");
    }
    params.validate()?;
    region.validate()?;
    let mut starts: Vec<Vertex> = Vec::new();
    let mut seen: FxHashSet<Vertex> = FxHashSet::default();
    for v in ordering.iter().cloned().chain(region.vertices(params.d)) {
        if v.dim() != params.d {
            return domain(format!("ordering vertex {v} has the wrong dimension"));
        }
        if seen.insert(v.clone()) {
            starts.push(v);
        }
    }
    let mut forest = Forest::default();
    grow_from(params, &mut forest, &starts, horizon, seed);
    Ok(forest)
}

/// Adds the branches of `starts` (in order) to `forest`.
pub fn grow_from(params: &LatticeParams, forest: &mut Forest, starts: &[Vertex], horizon: u64, seed: u64) {
    let mut walk: Vec<Vertex> = Vec::new();
    for start in starts {
        forest.order.push(start.clone());
        if forest.contains(start) {
            continue;
        }
        walk.clear();
        let mut walker = WalkerState::new(params, start.clone(), vertex_stream(seed, start));
        walk.push(start.clone());
        let mut hit = false;
        while walker.steps_taken < horizon {
            walker.step();
            walk.push(walker.position.clone());
            if forest.contains(&walker.position) {
                hit = true;
                break;
            }
        }
        let erased = loop_erase_slice(&walk);
        for w in erased.windows(2) {
            forest.parent.insert(w[0].clone(), Parent::Vertex(w[1].clone()));
        }
        if !hit {
            forest.parent.insert(erased.last().expect("nonempty").clone(), Parent::Root);
        }
        forest.branches.push(Branch { path: Path::new(erased), to_root: !hit, truncated: !hit });
    }
}

/// Whether `v - z` lies strictly inside the cylinder `|n| < p, |x| < p`.
fn in_cylinder_interior(v: &Vertex, z: &Vertex, p: i64) -> bool {
    let dn = (v.n - z.n).abs();
    let dx2: i64 = v.x.iter().zip(&z.x).map(|(a, b)| (a - b) * (a - b)).sum();
    dn < p && dx2 < p * p
}

/// Whether `v - z` lies in `K_p = A_p ∪ B_p ∪ C_p` with
/// `A_p = [-p, p] x {p <= |x| <= p + 1}` and `B_p, C_p = {±p} x {|x| <= p}`.
pub fn in_cutset(v: &Vertex, z: &Vertex, p: i64) -> bool {
    let dn = (v.n - z.n).abs();
    let dx2: i64 = v.x.iter().zip(&z.x).map(|(a, b)| (a - b) * (a - b)).sum();
    let side = dn <= p && dx2 >= p * p && dx2 <= (p + 1) * (p + 1);
    let base = dn == p && dx2 <= p * p;
    side || base
}

/// Vertices of the closed cylinder (interior and cutset) around `z`.
pub fn closed_cylinder(z: &Vertex, p: i64) -> Vec<Vertex> {
    let d = z.dim();
    let r = p + 1;
    let mut out = Vec::new();
    let side = (2 * r + 1) as usize;
    let cells = side.pow(d as u32);
    for dn in -p..=p {
        for cell in 0..cells {
            let mut c = cell;
            let mut x: SmallVec<[i64; 4]> = SmallVec::from_elem(0, d);
            for i in (0..d).rev() {
                x[i] = z.x[i] + (c % side) as i64 - r;
                c /= side;
            }
            let v = Vertex { n: z.n + dn, x };
            if in_cylinder_interior(&v, z, p) || in_cutset(&v, z, p) {
                out.push(v);
            }
        }
    }
    out
}

/// Number of disjoint forest paths leaving `z` that cross the cutset `K_p`
/// around `z` and continue beyond it.
///
/// Starting from `z`, the tree is explored through the open cylinder. Each
/// tree edge from an interior vertex into `K_p` is a first crossing; it counts
/// when the part of the tree behind it reaches a vertex outside the closed
/// cylinder, or a vertex of `K_p` or beyond whose parent is the root. Distinct
/// first crossings have disjoint continuations, so the count is the number of
/// candidate ends of the component of `z` seen at scale `p`.
pub fn cutset_crossings(forest: &Forest, z: &Vertex, p: i64) -> Result<usize> {
    if p < 1 {
        return domain(format!("cutset index must be positive, got {p}"));
    }
    if let Some(missing) = closed_cylinder(z, p).into_iter().find(|v| !forest.contains(v)) {
        return domain(format!("forest does not cover the cylinder of radius {p} around {z}: {missing} missing"));
    }
    let mut children: FxHashMap<&Vertex, SmallVec<[&Vertex; 4]>> = FxHashMap::default();
    for (v, par) in &forest.parent {
        if let Parent::Vertex(w) = par {
            children.entry(w).or_default().push(v);
        }
    }
    let tree_neighbors = |v: &Vertex| -> SmallVec<[&Vertex; 6]> {
        let (key, par) = forest.parent.get_key_value(v).expect("forest vertex");
        let mut out: SmallVec<[&Vertex; 6]> = SmallVec::new();
        if let Parent::Vertex(w) = par {
            out.push(w);
        }
        if let Some(cs) = children.get(key) {
            out.extend(cs.iter().copied());
        }
        out
    };
    let escapes = |entry: &Vertex, from: &Vertex| -> bool {
        let mut stack = vec![(entry, from)];
        while let Some((v, prev)) = stack.pop() {
            let inside = in_cylinder_interior(v, z, p);
            let in_k = in_cutset(v, z, p);
            if !inside && !in_k {
                return true;
            }
            if !inside && forest.parent.get(v) == Some(&Parent::Root) {
                return true;
            }
            for w in tree_neighbors(v) {
                if w != prev {
                    stack.push((w, v));
                }
            }
        }
        false
    };
    let mut visited: FxHashSet<&Vertex> = FxHashSet::default();
    let (z_key, _) = forest.parent.get_key_value(z).expect("checked above");
    let mut queue = vec![z_key];
    visited.insert(z_key);
    let mut crossings = 0;
    while let Some(u) = queue.pop() {
        for w in tree_neighbors(u) {
            if visited.contains(w) {
                continue;
            }
            if in_cylinder_interior(w, z, p) {
                visited.insert(w);
                queue.push(w);
            } else if escapes(w, u) {
                crossings += 1;
            }
        }
    }
    Ok(crossings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Vertex;

    fn params(d: usize) -> LatticeParams {
        LatticeParams::new(d, std::f64::consts::LN_2).unwrap()
    }

    fn v1(n: i64, x: i64) -> Vertex {
        Vertex::new(n, &[x])
    }

    #[test]
    fn single_vertex_box_gives_forced_tree() {
        let b = FiniteBox::new(0, 0, 0, true).unwrap();
        let f = ust_finite(&params(1), &b, &TreeRoot::Wired, &[], 5).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.parent_of(&v1(0, 0)), Some(&Parent::Root));
        assert_eq!(f.branches.len(), 1);
        assert!(f.branches[0].to_root);
    }

    #[test]
    fn tree_is_spanning_and_acyclic() {
        let b = FiniteBox::new(-2, 3, 2, true).unwrap();
        let f = ust_finite(&params(2), &b, &TreeRoot::Wired, &[], 17).unwrap();
        assert_eq!(f.len(), b.len(2));
        f.validate().unwrap();
        let edges: usize = f.branches.iter().map(|br| br.path.len() - usize::from(!br.to_root)).sum();
        assert_eq!(edges, f.len());
    }

    #[test]
    fn free_box_with_root_vertex() {
        let b = FiniteBox::new(0, 3, 1, false).unwrap();
        let root = v1(1, 0);
        let f = ust_finite(&params(1), &b, &TreeRoot::At(root.clone()), &[], 3).unwrap();
        f.validate().unwrap();
        assert_eq!(f.len(), b.len(1));
        let c = Components::new(&f);
        assert_eq!(c.count(), 1);
        assert_eq!(c.get(&v1(3, -1)), Some(&ComponentId(root)));
        assert!(ust_finite(&params(1), &b, &TreeRoot::Wired, &[], 3).is_err());
        assert!(ust_finite(&params(1), &b, &TreeRoot::At(v1(9, 0)), &[], 3).is_err());
    }

    #[test]
    fn ordering_does_not_change_the_tree() {
        let b = FiniteBox::new(0, 3, 1, true).unwrap();
        let p = params(1);
        let mut order: Vec<Vertex> = b.vertices(1).collect();
        let (a, sa) = ust_finite_with_stacks(&p, &b, &TreeRoot::Wired, &order, 99).unwrap();
        order.reverse();
        let (c, sc) = ust_finite_with_stacks(&p, &b, &TreeRoot::Wired, &order, 99).unwrap();
        assert_eq!(a.to_text(), c.to_text());
        assert_eq!(sa, sc);
        assert_ne!(a.order, c.order);
    }

    #[test]
    fn stack_entries_replay() {
        let b = FiniteBox::new(0, 2, 1, true).unwrap();
        let net = BoxNetwork::new(&params(1), &b, &TreeRoot::Wired).unwrap();
        let v = v1(1, 0);
        let first = stack_entries(&net, &v, 20, 4).unwrap();
        assert_eq!(first, stack_entries(&net, &v, 20, 4).unwrap());
        assert!(first.iter().flatten().all(|w| w.is_neighbor(&v)));
    }

    #[test]
    fn text_round_trip() {
        let b = FiniteBox::new(-1, 1, 1, true).unwrap();
        let f = ust_finite(&params(2), &b, &TreeRoot::Wired, &[], 8).unwrap();
        let text = f.to_text();
        assert!(text.lines().all(|l| l.contains(" -> ")));
        let back = Forest::from_text(&text).unwrap();
        assert_eq!(back.parent, f.parent);
        assert_eq!(back.to_text(), text);
        assert!(Forest::from_text("0 0 ROOT").is_err());
    }

    #[test]
    fn first_branch_is_loop_erased_walk() {
        let p = params(2);
        let region = FiniteBox::new(0, 1, 1, false).unwrap();
        let start = Vertex::new(0, &[-1, -1]);
        let f = wsf_rooted_at_infinity(&p, &region, &[], 400, 21).unwrap();
        let s = crate::walk::sample_path(&p, &start, |_| false, 400, vertex_stream(21, &start));
        assert_eq!(f.branches[0].path.vertices, loop_erase_slice(&s.path.vertices));
        assert!(f.branches[0].truncated);
    }

    #[test]
    fn shared_prefix_orderings_share_first_branches() {
        let p = params(1);
        let region = FiniteBox::new(0, 3, 2, false).unwrap();
        let all: Vec<Vertex> = region.vertices(1).collect();
        let mut rev = all.clone();
        rev[3..].reverse();
        let a = wsf_rooted_at_infinity(&p, &region, &all, 2_000, 3).unwrap();
        let b = wsf_rooted_at_infinity(&p, &region, &rev, 2_000, 3).unwrap();
        let mut prefix = Forest::default();
        grow_from(&p, &mut prefix, &all[..3], 2_000, 3);
        let m = prefix.branches.len();
        assert!(m >= 1);
        assert_eq!(a.branches[..m], prefix.branches[..]);
        assert_eq!(b.branches[..m], prefix.branches[..]);
        assert_ne!(a.branches, b.branches);
    }

    #[test]
    fn components_match_dfs_closure() {
        let p = params(3);
        let region = FiniteBox::new(0, 2, 1, false).unwrap();
        let f = wsf_rooted_at_infinity(&p, &region, &[], 300, 12).unwrap();
        let c = Components::new(&f);
        // undirected closure by DFS over parent edges
        let mut adj: FxHashMap<&Vertex, Vec<&Vertex>> = FxHashMap::default();
        for (v, par) in &f.parent {
            if let Parent::Vertex(w) = par {
                adj.entry(v).or_default().push(w);
                adj.entry(w).or_default().push(v);
            }
        }
        let mut label: FxHashMap<&Vertex, usize> = FxHashMap::default();
        for (k, v) in f.parent.keys().enumerate() {
            if label.contains_key(v) {
                continue;
            }
            let mut stack = vec![v];
            label.insert(v, k);
            while let Some(u) = stack.pop() {
                for w in adj.get(u).into_iter().flatten() {
                    if label.insert(w, k).is_none() {
                        stack.push(w);
                    }
                }
            }
        }
        for a in f.parent.keys() {
            for b in f.parent.keys().take(40) {
                assert_eq!(c.get(a) == c.get(b), label[a] == label[b]);
            }
            assert_eq!(component_of(&f, a).unwrap(), c.get(a).unwrap().clone());
        }
        assert!(component_of(&f, &Vertex::new(100, &[0, 0, 0])).is_err());
    }

    fn ray_forest(z: &Vertex, dirs: &[(i64, i64)], len: i64, fill_p: i64) -> Forest {
        // rays from z; every other cylinder vertex is its own root
        let mut f = Forest::default();
        f.parent.insert(z.clone(), Parent::Root);
        for &(dn, dx) in dirs {
            let mut prev = z.clone();
            for k in 1..=len {
                let v = Vertex::new(z.n + k * dn, &[z.x[0] + k * dx]);
                f.parent.insert(v.clone(), Parent::Vertex(prev.clone()));
                prev = v;
            }
        }
        for v in closed_cylinder(z, fill_p) {
            f.parent.entry(v).or_insert(Parent::Root);
        }
        f
    }

    #[test]
    fn crossing_examples() {
        let z = v1(0, 0);
        let one = ray_forest(&z, &[(1, 0)], 10, 3);
        assert_eq!(cutset_crossings(&one, &z, 3).unwrap(), 1);
        let two = ray_forest(&z, &[(1, 0), (-1, 0)], 10, 3);
        assert_eq!(cutset_crossings(&two, &z, 3).unwrap(), 2);
        let short = ray_forest(&z, &[(1, 0)], 2, 3);
        assert_eq!(cutset_crossings(&short, &z, 3).unwrap(), 0);
        assert!(cutset_crossings(&one, &z, 5).is_err());
        assert!(cutset_crossings(&one, &z, 0).is_err());
    }

    #[test]
    fn cutset_separates_interior_from_outside() {
        let z = Vertex::new(1, &[2, -1]);
        let p = 3;
        for v in closed_cylinder(&z, p) {
            if in_cylinder_interior(&v, &z, p) {
                assert!(!in_cutset(&v, &z, p));
                for w in v.neighbors() {
                    assert!(in_cylinder_interior(&w, &z, p) || in_cutset(&w, &z, p));
                }
            }
        }
    }
}
