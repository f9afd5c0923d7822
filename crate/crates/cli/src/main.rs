//! Command line front end: one experiment or sampler per invocation.
//!
//! Flags override the values of `--config`, which override the defaults.
//! `DRIFT_USF_THREADS` sets the size of the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drift_usf::experiments::{
    connectivity_experiment, crossings_experiment, emit_rows, intersections_experiment, one_end_diagnostic,
    separation_experiment, spread_bound_experiment,
};
use drift_usf::green::{bubble_integral, green_exact, green_mc_in};
use drift_usf::wilson::{ust_finite, wsf_rooted_at_infinity};
use drift_usf::{Error, EstimateRow, ExperimentConfig, OutputFormat, Result, TreeRoot, Vertex};
use serde_json::json;

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON configuration file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Transverse dimension d.
    #[arg(long = "dim", global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Use the lazy walk (holds with probability 1/2).
    #[arg(long, global = true)]
    lazy: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Step budget of every walk.
    #[arg(long, global = true)]
    horizon: Option<u64>,
    #[arg(long = "box-nmin", global = true, allow_hyphen_values = true)]
    box_nmin: Option<i64>,
    #[arg(long = "box-nmax", global = true, allow_hyphen_values = true)]
    box_nmax: Option<i64>,
    #[arg(long = "box-xradius", global = true)]
    box_xradius: Option<i64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Green's function of a box by a linear solve.
    GreenExact {
        #[arg(long, allow_hyphen_values = true)]
        source: Option<Vertex>,
    },
    /// Monte Carlo estimate of G(source, target).
    GreenMc {
        #[arg(long, allow_hyphen_values = true)]
        source: Option<Vertex>,
        #[arg(long, allow_hyphen_values = true)]
        target: Vertex,
        /// Count visits only before the walk leaves the box.
        #[arg(long)]
        in_box: bool,
    },
    /// Fourier integral of |1 - phi|^-2, i.e. the sum of squared Green values.
    Bubble {
        #[arg(long, default_value_t = 64)]
        mesh: usize,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Spanning tree of the box (wired unless --root is given).
    Ust {
        #[arg(long, allow_hyphen_values = true)]
        root: Option<Vertex>,
    },
    /// Wilson's algorithm rooted at infinity, started from the box.
    Wsf,
    /// Whether two independent walks share a vertex within the horizon.
    Intersections {
        #[arg(long, allow_hyphen_values = true)]
        start_a: Option<Vertex>,
        #[arg(long, allow_hyphen_values = true)]
        start_b: Vertex,
    },
    /// Probability that 0 and z lie in the same tree (d >= 3).
    Connectivity {
        #[arg(long, allow_hyphen_values = true)]
        z: Vertex,
    },
    /// Crossing probabilities of two walks in the testing regions (d = 2).
    Crossings {
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
        p: Vec<u32>,
        #[arg(long)]
        k0: Option<u32>,
    },
    /// Probability that all of the given vertices share a tree.
    Spread {
        #[arg(long = "w", required = true, allow_hyphen_values = true)]
        w: Vec<Vertex>,
    },
    /// Reachability from z to z2 through m + 1 independent forests.
    Separation {
        #[arg(long, allow_hyphen_values = true)]
        z: Vertex,
        #[arg(long, allow_hyphen_values = true)]
        z2: Vertex,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Fraction of wired trees with two disjoint crossings of the cutset K_p.
    OneEnd {
        #[arg(long, value_delimiter = ',', default_values_t = [1i64, 2, 4])]
        p: Vec<i64>,
    },
}

#[derive(Parser)]
#[command(name = "drift-usf", version, about = "Random walks and spanning forests on the drifted lattice")]
struct Invocation {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

fn config_from(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = common.dim {
        config.params.d = d;
    }
    if let Some(lambda) = common.lambda {
        config.params.lambda = lambda;
    }
    config.params.lazy |= common.lazy;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(samples) = common.samples {
        config.samples = samples;
    }
    if let Some(horizon) = common.horizon {
        config.horizon = horizon;
    }
    if let Some(n) = common.box_nmin {
        config.region.n_min = n;
    }
    if let Some(n) = common.box_nmax {
        config.region.n_max = n;
    }
    if let Some(r) = common.box_xradius {
        config.region.x_radius = r;
    }
    if common.out.is_some() {
        config.output_path = common.out.clone();
    }
    if let Some(f) = common.format {
        config.format = f;
    }
    config.validate()?;
    Ok(config)
}

fn check_dim(config: &ExperimentConfig, v: &Vertex) -> Result<()> {
    if v.dim() != config.params.d {
        return Err(Error::Domain(format!("vertex {v} does not have dimension {}", config.params.d)));
    }
    Ok(())
}

fn write_text(config: &ExperimentConfig, text: String) -> Result<()> {
    match &config.output_path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_rows(config: &ExperimentConfig, rows: &[EstimateRow]) -> Result<()> {
    if let Some(text) = emit_rows(config, rows)? {
        print!("{text}");
        if !text.ends_with('\n') {
            println!();
        }
    }
    Ok(())
}

fn run(command: Command, config: ExperimentConfig) -> Result<()> {
    let d = config.params.d;
    let origin = Vertex::origin(d);
    match command {
        Command::GreenExact { source } => {
            let source = source.unwrap_or(origin);
            check_dim(&config, &source)?;
            let region = drift_usf::FiniteBox { wired: false, ..config.region.clone() };
            let table = green_exact(&config.params, &region, &source)?;
            let text = match config.format {
                OutputFormat::Csv => table.to_csv(),
                OutputFormat::Json => {
                    let values: Vec<_> =
                        table.iter().map(|(v, g)| json!({ "n": v.n, "x": v.x.to_vec(), "value": g })).collect();
                    let doc = json!({
                        "source": source.to_words(),
                        "iterations": table.iterations,
                        "solver_residual": table.solver_residual,
                        "values": values,
                    });
                    serde_json::to_string_pretty(&doc)? + "\n"
                }
            };
            write_text(&config, text)
        }
        Command::GreenMc { source, target, in_box } => {
            let source = source.unwrap_or(origin);
            check_dim(&config, &source)?;
            check_dim(&config, &target)?;
            let region = in_box.then_some(&config.region);
            let e = green_mc_in(&config.params, &source, &target, config.horizon, config.samples, config.seed, region)?;
            let row = EstimateRow {
                label: "green_mc".into(),
                value: e.value,
                std_error: e.std_error,
                meta: Default::default(),
            }
            .with("source", json!(source.to_words()))
            .with("target", json!(target.to_words()))
            .with("samples", json!(e.samples))
            .with("horizon", json!(config.horizon))
            .with("in_box", json!(in_box))
            .with("truncation_bound", json!(e.truncation_bound));
            write_rows(&config, &[row])
        }
        Command::Bubble { mesh, epsilon } => {
            let value = bubble_integral(&config.params, mesh, epsilon)?;
            let row = EstimateRow { label: "bubble".into(), value, std_error: 0.0, meta: Default::default() }
                .with("d", json!(d))
                .with("lambda", json!(config.params.lambda))
                .with("mesh", json!(mesh))
                .with("epsilon", json!(epsilon));
            write_rows(&config, &[row])
        }
        Command::Ust { root } => {
            let region = drift_usf::FiniteBox { wired: root.is_none(), ..config.region.clone() };
            let root = match root {
                Some(v) => {
                    check_dim(&config, &v)?;
                    TreeRoot::At(v)
                }
                None => TreeRoot::Wired,
            };
            let forest = ust_finite(&config.params, &region, &root, &[], config.seed)?;
            write_text(&config, forest.to_text())
        }
        Command::Wsf => {
            let forest = wsf_rooted_at_infinity(&config.params, &config.region, &[], config.horizon, config.seed)?;
            write_text(&config, forest.to_text())
        }
        Command::Intersections { start_a, start_b } => {
            let row = intersections_experiment(&config, &start_a.unwrap_or(origin), &start_b)?;
            write_rows(&config, &[row])
        }
        Command::Connectivity { z } => write_rows(&config, &[connectivity_experiment(&config, &z)?]),
        Command::Crossings { p, k0 } => {
            let mut config = config;
            if let Some(k0) = k0 {
                config.k0 = k0;
                config.validate()?;
            }
            let rows = crossings_experiment(&config, &p)?;
            write_rows(&config, &rows)
        }
        Command::Spread { w } => write_rows(&config, &[spread_bound_experiment(&config, &w)?]),
        Command::Separation { z, z2, m } => write_rows(&config, &[separation_experiment(&config, &z, &z2, m)?]),
        Command::OneEnd { p } => write_rows(&config, &one_end_diagnostic(&config, &p)?),
    }
}

fn init_threads() -> Result<()> {
    if let Ok(value) = std::env::var("DRIFT_USF_THREADS") {
        let threads: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("DRIFT_USF_THREADS must be a positive integer, got {value:?}")))?;
        if threads == 0 {
            return Err(Error::Parse("DRIFT_USF_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Domain(e.to_string()))?;
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::Parse(_) | Error::Json(_) => 2,
        Error::Solver { .. } => 3,
        Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Invocation::parse();
    let result = init_threads().and_then(|_| config_from(&cli.common)).and_then(|config| run(cli.command, config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("drift-usf: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
