//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so that each result line is printed as
//! soon as it is known. The process fails if any criterion fails, except
//! those listed in `KNOWN_FAILURES`, whose lines still read FAIL.
//!
//! `cargo test --release -p drift-usf-core --test acceptance -- 3 7` runs a
//! subset.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use drift_usf::electrical::{
    effective_conductance, flow_energy, gauss_green_sides, is_harmonic_on_lattice, unit_current_flow, Sink,
    VertexFunction,
};
use drift_usf::experiments::{connectivity_experiment, intersection_trials, EstimateRow, ExperimentConfig};
use drift_usf::green::{bubble_integral, green_exact, green_mc_in, LatticeGreen};
use drift_usf::lattice::{moments, step_distribution};
use drift_usf::loop_erase::loop_erase_slice;
use drift_usf::rng::{sub_seed, walker_stream};
use drift_usf::stats::{chi_square_test, linear_fit, log_log_fit, MeanVar};
use drift_usf::walk::{ct_first_passage_time, sample_path, StepSampler};
use drift_usf::wilson::ust_finite;
use drift_usf::{FiniteBox, LatticeParams, TreeRoot, Vertex};
use rand::seq::SliceRandom;
use rand::Rng;

/// Criteria that cannot be met as stated; they are run and reported but do
/// not fail the process. Criterion 8 asks for a tenfold increase of the
/// two-dimensional cutoff integral between cutoffs 0.1 and 0.001, but that
/// integral grows only like `log(1 / epsilon)`, about threefold over that
/// range.
const KNOWN_FAILURES: &[u32] = &[8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ln2(d: usize) -> LatticeParams {
    LatticeParams::new(d, LN_2).unwrap()
}

fn kernel_frequencies() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for d in 1..=3 {
        let params = ln2(d);
        let sampler = StepSampler::new(&params);
        let probs = step_distribution(&params).probabilities();
        let mut counts = vec![0u64; probs.len()];
        let mut rng = walker_stream(1, d as u64);
        for _ in 0..1_000_000 {
            counts[sampler.sample(&mut rng).index(d)] += 1;
        }
        let (_, p) = chi_square_test(&counts, &probs);
        pass &= p > 0.001;
        details.push(format!("d={d} p={p:.3}"));
    }
    outcome(pass, details.join(", "))
}

fn harmonic_exponential() -> Outcome {
    let mut rng = walker_stream(2, 0);
    let mut worst: f64 = 0.0;
    let mut all = true;
    for _ in 0..1000 {
        let d = rng.gen_range(1..=4);
        let params = LatticeParams::with_lazy(d, rng.gen_range(0.05..3.0), rng.gen_bool(0.5)).unwrap();
        let x: Vec<i64> = (0..d).map(|_| rng.gen_range(-100..=100)).collect();
        let z = Vertex::new(rng.gen_range(-200..=200), &x);
        let h = |v: &Vertex| Some((-params.lambda * v.n as f64).exp());
        all &= is_harmonic_on_lattice(&params, h, &z, 1e-12).unwrap();
        let s = step_distribution(&params);
        let mean: f64 = s.prob_stay * 1.0
            + s.prob_up * (-params.lambda).exp()
            + s.prob_down * params.lambda.exp()
            + 2.0 * d as f64 * s.prob_transverse;
        worst = worst.max((mean - 1.0).abs());
    }
    outcome(all, format!("1000 vertices, worst relative defect {worst:.1e}"))
}

fn stack_invariance() -> Outcome {
    let params = ln2(1);
    let region = FiniteBox::new(0, 3, 2, true).unwrap();
    let vertices: Vec<Vertex> = region.vertices(1).collect();
    let mut rng = walker_stream(3, 0);
    let mut same = 0;
    for _ in 0..50 {
        let seed: u64 = rng.gen();
        let mut a = vertices.clone();
        let mut b = vertices.clone();
        a.shuffle(&mut rng);
        b.shuffle(&mut rng);
        let ta = ust_finite(&params, &region, &TreeRoot::Wired, &a, seed).unwrap();
        let tb = ust_finite(&params, &region, &TreeRoot::Wired, &b, seed).unwrap();
        if ta.to_text() == tb.to_text() {
            same += 1;
        }
    }
    outcome(same == 50, format!("{same}/50 ordering pairs give identical trees (wired box n in [0,3], |x| <= 2)"))
}

fn ust_law() -> Outcome {
    let params = ln2(1);
    let boxes = [
        FiniteBox::new(0, 1, 0, true).unwrap(),
        FiniteBox::new(0, 2, 0, true).unwrap(),
        FiniteBox::new(0, 0, 1, true).unwrap(),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (k, region) in boxes.iter().enumerate() {
        let trees = common::enumerate_trees(&params, region);
        let total: f64 = trees.values().sum();
        let keys: Vec<_> = trees.keys().cloned().collect();
        let probs: Vec<f64> = keys.iter().map(|t| trees[t] / total).collect();
        let mut counts: BTreeMap<_, u64> = BTreeMap::new();
        for i in 0..100_000 {
            let f = ust_finite(&params, region, &TreeRoot::Wired, &[], sub_seed(40 + k as u64, i)).unwrap();
            let mut key: Vec<_> = f.parent.into_iter().collect();
            key.sort();
            *counts.entry(key).or_default() += 1;
        }
        let unknown = counts.keys().filter(|t| !trees.contains_key(*t)).count();
        let observed: Vec<u64> = keys.iter().map(|t| counts.get(t).copied().unwrap_or(0)).collect();
        let (_, p) = chi_square_test(&observed, &probs);
        pass &= unknown == 0 && p > 0.001;
        details.push(format!("{} trees p={p:.3}", trees.len()));
    }
    outcome(pass, details.join(", "))
}

fn green_cross_validation() -> Outcome {
    let params = ln2(3);
    let region = FiniteBox::new(-8, 24, 4, false).unwrap();
    let origin = Vertex::origin(3);
    let exact = green_exact(&params, &region, &origin).unwrap();
    let mut targets = Vec::new();
    for n in [-1, 0, 2, 5, 10] {
        for x in [[0, 0, 0], [1, 0, 0], [1, 1, 0], [2, -1, 1]] {
            targets.push(Vertex::new(n, &x));
        }
    }
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for (i, t) in targets.iter().enumerate() {
        let e = green_mc_in(&params, &origin, t, 10_000_000, 40_000, sub_seed(5, i as u64), Some(&region)).unwrap();
        let z = (e.value - exact.get(t)).abs() / e.std_error.max(1e-300);
        worst = worst.max(z);
        if z <= 3.0 {
            within += 1;
        }
    }
    outcome(within >= 19, format!("{within}/20 within 3 sigma, largest deviation {worst:.2} sigma, box 33 x 9^3"))
}

fn reversibility() -> Outcome {
    let params = ln2(3);
    let region = FiniteBox::new(-8, 24, 4, false).unwrap();
    let origin = Vertex::origin(3);
    let forward = green_exact(&params, &region, &origin).unwrap();
    let mut rng = walker_stream(6, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x: Vec<i64> = (0..3).map(|_| rng.gen_range(-2..=2)).collect();
        let z = Vertex::new(rng.gen_range(-3..=8), &x);
        let back = green_exact(&params, &region.translated(&z), &origin).unwrap();
        let lhs = forward.get(&z);
        let rhs = (params.lambda * z.n as f64).exp() * back.get(&-&z);
        worst = worst.max((lhs - rhs).abs() / lhs.abs());
    }
    outcome(worst <= 1e-8, format!("20 vertices, largest relative gap {worst:.1e}"))
}

fn axis_decay() -> Outcome {
    let params = ln2(3);
    let series = LatticeGreen::new(&params, 64).unwrap();
    let ns = [8.0, 16.0, 32.0, 64.0];
    let gs: Vec<f64> = ns.iter().map(|&n| series.value(&Vertex::on_axis(n as i64, 3)).unwrap()).collect();
    let fit = log_log_fit(&ns, &gs).unwrap();
    outcome((fit.slope + 1.5).abs() <= 0.15, format!("slope {:.3} (whole-lattice series)", fit.slope))
}

fn bubble_condition() -> Outcome {
    let p3 = ln2(3);
    let coarse = bubble_integral(&p3, 32, 0.0).unwrap();
    let fine = bubble_integral(&p3, 64, 0.0).unwrap();
    let change = (fine - coarse).abs() / fine;
    let squares = LatticeGreen::new(&p3, 300).unwrap().sum_of_squares();
    let gap = (fine - squares).abs() / squares;
    let p2 = ln2(2);
    let wide = bubble_integral(&p2, 128, 0.1).unwrap();
    let narrow = bubble_integral(&p2, 128, 0.001).unwrap();
    let ratio = narrow / wide;
    let stable = change < 0.02;
    let close = gap < 0.10;
    let grows = ratio >= 10.0;
    outcome(
        stable && close && grows,
        format!(
            "d=3 mesh 32->64 change {:.2}% [{}], integral {fine:.4} vs sum of G^2 {squares:.4} ({:.1}%) [{}], d=2 cutoff ratio {ratio:.2} [{}]",
            100.0 * change,
            if stable { "ok" } else { "fail" },
            100.0 * gap,
            if close { "ok" } else { "fail" },
            if grows { "ok" } else { "fail" }
        ),
    )
}

fn intersection_dichotomy() -> Outcome {
    let p1 = ln2(1);
    let one = intersection_trials(&p1, &Vertex::new(0, &[0]), &Vertex::new(0, &[2]), 1_000_000, 1000, 91, false);
    let horizons = [10u64, 100, 1_000, 10_000, 100_000, 1_000_000];
    let frac = |trials: &[drift_usf::experiments::IntersectionTrial], h: u64| {
        trials.iter().filter(|t| t.first.is_some_and(|f| f <= h)).count() as f64 / trials.len() as f64
    };
    let curve: Vec<f64> = horizons.iter().map(|&h| frac(&one, h)).collect();
    let monotone = curve.windows(2).all(|w| w[0] <= w[1]);
    let high = *curve.last().unwrap() >= 0.99;
    let p3 = ln2(3);
    let three = intersection_trials(&p3, &Vertex::origin(3), &Vertex::new(0, &[1, 0, 0]), 200_000, 1000, 93, false);
    let (a, b) = (frac(&three, 100_000), frac(&three, 200_000));
    let stable = (b - a).abs() / b < 0.02 && b < 0.9;
    outcome(
        monotone && high && stable,
        format!("d=1 curve {:?}, d=3 {a:.3} -> {b:.3}", curve.iter().map(|c| format!("{c:.3}")).collect::<Vec<_>>()),
    )
}

fn connectivity_rows() -> Vec<EstimateRow> {
    [2i64, 4, 8, 16]
        .iter()
        .map(|&eta| {
            let config = ExperimentConfig {
                params: ln2(3),
                samples: 10_000,
                horizon: 50 * (eta * eta) as u64,
                seed: 100 + eta as u64,
                ..ExperimentConfig::default()
            };
            connectivity_experiment(&config, &Vertex::new(0, &[eta, 0, 0])).unwrap()
        })
        .collect()
}

fn connectivity_decay(rows: &[EstimateRow]) -> Outcome {
    let xs: Vec<f64> = rows.iter().map(|r| r.meta_f64("eta").unwrap().ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value.ln()).collect();
    let fit = linear_fit(&xs, &ys).unwrap();
    outcome(
        (fit.slope + 1.0).abs() <= 0.25,
        format!(
            "slope {:.3}, estimates {:?} (horizon 50 eta^2)",
            fit.slope,
            rows.iter().map(|r| format!("{:.4}", r.value)).collect::<Vec<_>>()
        ),
    )
}

fn second_moment(rows: &[EstimateRow]) -> Outcome {
    let holds = rows.iter().all(|r| r.meta_bool("second_moment_holds") == Some(true));
    let detail = rows
        .iter()
        .map(|r| {
            format!("{:.3}>={:.3}", r.meta_f64("p_k_positive").unwrap(), r.meta_f64("second_moment_bound").unwrap())
        })
        .collect::<Vec<_>>()
        .join(", ");
    outcome(holds, detail)
}

fn electrical_duality() -> Outcome {
    let mut rng = walker_stream(12, 0);
    let mut worst: f64 = 0.0;
    let mut rayleigh_ok = true;
    let mut deletions = 0;
    for _ in 0..20 {
        let size = rng.gen_range(4..=14);
        let extra = rng.gen_range(0..=2 * size);
        let net = common::random_network(&mut rng, size, extra);
        let s = rng.gen_range(0..size);
        let t = (s + rng.gen_range(1..size)) % size;
        let c = effective_conductance(&net, s, Sink::Vertex(t)).unwrap();
        let energy = flow_energy(&net, &unit_current_flow(&net, s, Sink::Vertex(t)).unwrap()).unwrap();
        worst = worst.max((c * energy - 1.0).abs());
        for e in 0..net.edges.len() {
            if let Ok(smaller) = net.without_edge(e) {
                deletions += 1;
                let c2 = effective_conductance(&smaller, s, Sink::Vertex(t)).unwrap();
                rayleigh_ok &= c2 <= c * (1.0 + 1e-10);
            }
        }
    }
    outcome(
        worst <= 1e-8 && rayleigh_ok,
        format!("largest |C R - 1| {worst:.1e}, Rayleigh held on {deletions} deletions: {rayleigh_ok}"),
    )
}

fn gauss_green() -> Outcome {
    let mut rng = walker_stream(13, 0);
    let mut agree = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let extra = rng.gen_range(0..=20);
        let net = common::random_network(&mut rng, 10, extra);
        let f = VertexFunction { values: common::random_values(&mut rng, 10) };
        let phi = VertexFunction { values: common::random_values(&mut rng, 10) };
        let (lhs, rhs) = gauss_green_sides(&net, &f, &phi).unwrap();
        let gap = (lhs - rhs).abs();
        worst = worst.max(gap);
        if gap <= 1e-10 {
            agree += 1;
        }
    }
    outcome(agree == 1000, format!("{agree}/1000 pairs agree, largest gap {worst:.1e}"))
}

fn first_passage_mean() -> Outcome {
    let params = ln2(1);
    let target = 1.0 / moments(&params).a;
    let stats: MeanVar = (0..10_000u64)
        .map(|i| ct_first_passage_time(&params, 1, 1e9, walker_stream(14, i)).expect("reached"))
        .collect();
    let z = (stats.mean - target).abs() / stats.std_error();
    outcome(z <= 3.0, format!("mean {:.4} +- {:.4}, 1/a = {target:.4}", stats.mean, stats.std_error()))
}

fn loop_erasure_oracle() -> Outcome {
    let mut equal = 0;
    for i in 0..10_000u64 {
        let d = 1 + (i % 3) as usize;
        let params = LatticeParams::new(d, 0.2 + 0.1 * (i % 7) as f64).unwrap();
        let s = sample_path(&params, &Vertex::origin(d), |_| false, 999, walker_stream(15, i));
        let v = &s.path.vertices;
        if loop_erase_slice(v) == common::loop_erase_literal_fast(v) {
            equal += 1;
        }
    }
    outcome(equal == 10_000, format!("{equal}/10000 paths of length 1000"))
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected = |k: u32| wanted.is_empty() || wanted.contains(&k);
    let mut unexpected = Vec::new();
    let mut report = |k: u32, name: &str, limit: Option<u64>, run: &mut dyn FnMut() -> Outcome| {
        if !selected(k) {
            return;
        }
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if let Some(secs) = limit {
            if elapsed > Duration::from_secs(secs) {
                out.pass = false;
                out.detail.push_str(&format!("; over the {secs} s budget"));
            }
        }
        let known = !out.pass && KNOWN_FAILURES.contains(&k);
        println!(
            "criterion {k:>2} {name}: {} ({}; {:.1} s){}",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            if known { " [known failure]" } else { "" }
        );
        if !out.pass && !known {
            unexpected.push(k);
        }
    };
    report(1, "kernel frequencies", Some(10), &mut kernel_frequencies);
    report(2, "harmonic exponential", None, &mut harmonic_exponential);
    report(3, "Wilson stack invariance", None, &mut stack_invariance);
    report(4, "spanning tree law", Some(60), &mut ust_law);
    report(5, "Green cross-validation", Some(300), &mut green_cross_validation);
    report(6, "reversibility", None, &mut reversibility);
    report(7, "axis decay exponent", Some(60), &mut axis_decay);
    report(8, "bubble condition", Some(120), &mut bubble_condition);
    report(9, "intersection dichotomy", Some(300), &mut intersection_dichotomy);
    let mut rows: Option<Vec<EstimateRow>> = None;
    if selected(10) || selected(11) {
        let start = Instant::now();
        rows = Some(connectivity_rows());
        let secs = start.elapsed().as_secs_f64();
        report(10, "connectivity decay", None, &mut || {
            let mut o = connectivity_decay(rows.as_ref().unwrap());
            if secs > 900.0 {
                o.pass = false;
            }
            o.detail.push_str(&format!("; sampling {secs:.1} s"));
            o
        });
    }
    report(11, "second-moment bound", None, &mut || second_moment(rows.as_ref().unwrap()));
    report(12, "electrical duality", None, &mut electrical_duality);
    report(13, "Gauss-Green", None, &mut gauss_green);
    report(14, "first passage mean", Some(60), &mut first_passage_mean);
    report(15, "loop-erasure oracle", None, &mut loop_erasure_oracle);
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
