//! Chronological loop-erasure.

use std::hash::Hash;

use rustc_hash::FxHashMap;

use crate::error::{domain, Result};
use crate::walk::Path;

/// Loop-erasure of a sequence in one pass.
///
/// Keeps the erased prefix together with a map from each of its entries to
/// its position; a revisit truncates the prefix back to the earlier
/// occurrence.
pub fn loop_erase_slice<T: Eq + Hash + Clone>(items: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len().min(1 << 16));
    let mut pos: FxHashMap<T, usize> = FxHashMap::default();
    for v in items {
        if let Some(&i) = pos.get(v) {
            for w in out.drain(i + 1..) {
                pos.remove(&w);
            }
        } else {
            pos.insert(v.clone(), out.len());
            out.push(v.clone());
        }
    }
    out
}

pub fn loop_erase(path: &Path) -> Result<Path> {
    if path.is_empty() {
        return domain("loop-erasure of an empty path");
    }
    Ok(Path::new(loop_erase_slice(&path.vertices)))
}

/// Checks that loop-erasure factorises at a splitting level: if `level` is
/// occupied by exactly one index `m`, then `LE(path)` is `LE(path[..=m])`
/// followed by `LE(path[m..])` without its first vertex. Vacuously true when
/// `level` is not a splitting level.
pub fn juxtapose_check(path: &Path, level: i64) -> bool {
    let mut hits = path.vertices.iter().enumerate().filter(|(_, v)| v.n == level);
    let m = match (hits.next(), hits.next()) {
        (Some((m, _)), None) => m,
        _ => return true,
    };
    let whole = loop_erase_slice(&path.vertices);
    let mut joined = loop_erase_slice(&path.vertices[..=m]);
    joined.extend(loop_erase_slice(&path.vertices[m..]).into_iter().skip(1));
    whole == joined
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lattice::{LatticeParams, Vertex};
    use crate::rng::walker_stream;
    use crate::walk::sample_path;

    /// The iterative excision procedure transcribed literally: find the
    /// first index whose entry occurs again, cut everything after it up to
    /// its last occurrence, repeat until no entry repeats.
    pub(crate) fn loop_erase_literal<T: Eq + Clone>(items: &[T]) -> Vec<T> {
        let mut gamma = items.to_vec();
        loop {
            let first = (0..gamma.len()).find(|&j| gamma[j + 1..].contains(&gamma[j]));
            let Some(tau) = first else { return gamma };
            let sigma = gamma.iter().rposition(|u| *u == gamma[tau]).expect("repeated entry");
            gamma.drain(tau + 1..=sigma);
        }
    }

    fn v(n: i64, x: i64) -> Vertex {
        Vertex::new(n, &[x])
    }

    #[test]
    fn examples() {
        let single = Path::new(vec![v(0, 0)]);
        assert_eq!(loop_erase(&single).unwrap(), single);
        let cycle = Path::new(vec![v(0, 0), v(1, 0), v(0, 0), v(0, 1)]);
        assert_eq!(loop_erase(&cycle).unwrap().vertices, vec![v(0, 0), v(0, 1)]);
        assert_eq!(loop_erase_slice(&[0, 1, 2, 1, 3]), vec![0, 1, 3]);
        assert!(loop_erase(&Path::default()).is_err());
    }

    #[test]
    fn nested_and_repeated_loops() {
        let seq = [0, 1, 2, 3, 1, 4, 0, 5, 5, 6, 2, 6, 7];
        assert_eq!(loop_erase_slice(&seq), loop_erase_literal(&seq));
        assert_eq!(loop_erase_slice(&seq), vec![0, 5, 6, 7]);
    }

    #[test]
    fn matches_literal_procedure_on_sampled_paths() {
        let p = LatticeParams::new(1, 0.3).unwrap();
        for i in 0..300 {
            let s = sample_path(&p, &Vertex::origin(1), |_| false, 200, walker_stream(31, i));
            assert_eq!(loop_erase_slice(&s.path.vertices), loop_erase_literal(&s.path.vertices));
        }
    }

    #[test]
    fn juxtaposition_examples() {
        let monotone = Path::new((0..6).map(|n| v(n, 0)).collect());
        assert!((0..6).all(|h| juxtapose_check(&monotone, h)));
        let twice = Path::new(vec![v(0, 0), v(1, 0), v(0, 0), v(1, 0)]);
        assert!(juxtapose_check(&twice, 0));
    }

    #[test]
    fn juxtaposition_holds_when_the_level_separates() {
        // stopped on reaching level 40, so every splitting level in [1, 30]
        // has the start below it and the end above it
        let p = LatticeParams::new(2, 0.7).unwrap();
        let mut checked = 0;
        for i in 0..500 {
            let s = sample_path(&p, &Vertex::origin(2), |w| w.position.n == 40, 100_000, walker_stream(32, i));
            assert!(s.stopped);
            for h in crate::walk::splitting_levels(&s.path, 1, 30).unwrap() {
                assert!(juxtapose_check(&s.path, h));
                checked += 1;
            }
        }
        assert!(checked > 500);
    }

    #[test]
    fn juxtaposition_can_fail_when_the_path_turns_back() {
        // level 1 is visited once, but the path returns below it and
        // revisits (0,0), whose loop straddles the junction
        let path = Path::new(vec![v(0, 0), v(1, 0), v(0, 0)]);
        assert_eq!(crate::walk::splitting_levels(&path, 1, 1).unwrap().len(), 1);
        assert!(!juxtapose_check(&path, 1));
    }
}
