//! Command-line front end. Each step reads and writes the same session JSON
//! the server persists, so both routes produce identical documents.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use distmodes::clustering::Linkage;
use distmodes::dataset::{
    generate_atom, generate_golfball, generate_two_gaussians, load_csv, load_labels, write_csv, ColumnRef,
    CoordinateSystem, DataMatrix,
};
use distmodes::density::DipNullCache;
use distmodes::distances::MetricId;
use distmodes::gmm::{bayes_boundaries, GmmModel, GmmParams};
use distmodes::pipeline::{
    from_json, metric_distances, prepare_for_metric, run_table1, to_json, PartitionMethod, PartitionSpec,
    SessionState, Table1Config,
};

#[derive(Parser)]
#[command(name = "distmodes", version, about = "Distance-distribution checks for clusterings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Column holding class labels, excluded from the features. A column
    /// named `label` is used when present.
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, value_enum, default_value_t = Coords::Cartesian)]
    coordinates: Coords,
}

#[derive(Clone, Copy, ValueEnum)]
enum Coords {
    Cartesian,
    Spherical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    TwoGaussians,
    Atom,
    Golfball,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV, with a `label` column when the
    /// generator has classes.
    Generate {
        #[arg(value_enum)]
        kind: Generator,
        /// Points per cluster for two-gaussians, total points otherwise.
        #[arg(long, default_value_t = 250)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        shift: f64,
        #[arg(long, default_value_t = 0.1)]
        sd: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Write the distance feature (upper triangle, row order) for one metric.
    Distances {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        metric: MetricId,
        #[command(flatten)]
        common: Common,
    },
    /// Test each metric's distances for multimodality.
    Scan {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated metric names.
        #[arg(long, value_delimiter = ',', default_value = "euclidean,manhattan,chebyshev,canberra,cosine,chord")]
        metrics: Vec<MetricId>,
        #[arg(long)]
        n_boot: Option<usize>,
        #[arg(long, default_value = "session.json")]
        session: PathBuf,
        /// Choose a metric for later steps; without a value the best-ranked
        /// multimodal metric is taken.
        #[arg(long, num_args = 0..=1, default_missing_value = "auto")]
        choose: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the Gaussian mixture to the chosen metric's distances.
    Fit {
        #[arg(long, default_value = "session.json")]
        session: PathBuf,
        #[arg(long, default_value_t = 2)]
        components: usize,
        /// Switch to this metric first.
        #[arg(long)]
        metric: Option<MetricId>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Bayes boundaries of a mixture given as JSON `{weights, means, sds}`.
    /// With `--session` the parameters replace the session's model.
    Boundaries {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        session: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check clusterings against the session's boundary.
    Evaluate {
        #[arg(long, default_value = "session.json")]
        session: PathBuf,
        /// Label file, one label per line.
        #[arg(long)]
        labels: Vec<PathBuf>,
        /// Hierarchical clustering as `linkage:k`, e.g. `ward:2`.
        #[arg(long)]
        hierarchical: Vec<String>,
        /// k-means with this many clusters, seeded with `--seed`.
        #[arg(long)]
        kmeans: Vec<usize>,
        /// JSON file `{"partitions": [...]}` as accepted by the server.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Shift sweep over two Gaussian clusters.
    Table1 {
        /// Number of seeds, run as 0..seeds.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3")]
        shifts: Vec<f64>,
        #[arg(long, default_value_t = 250)]
        n_per_cluster: usize,
        #[arg(long)]
        n_boot: Option<usize>,
        /// Emit JSON instead of the text table.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Directory for session files.
        #[arg(long, default_value = "sessions")]
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_data(args: &DataArgs) -> anyhow::Result<(String, DataMatrix<f64>)> {
    let label = match &args.label_column {
        Some(c) => Some(c.parse::<ColumnRef>()?),
        None => has_label_header(&args.data)?.then(|| ColumnRef::Name("label".into())),
    };
    let (m, _) = load_csv::<f64>(&args.data, true, label.as_ref())?;
    let m = match args.coordinates {
        Coords::Cartesian => m,
        Coords::Spherical => DataMatrix::new(
            m.rows(),
            m.cols(),
            m.values().to_vec(),
            m.feature_names().to_vec(),
            CoordinateSystem::Spherical,
        )?,
    };
    let name = args
        .data
        .file_stem()
        .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
    Ok((name, m))
}

fn has_label_header(path: &Path) -> anyhow::Result<bool> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let first = text.lines().next().unwrap_or_default();
    Ok(first.split(',').any(|c| c.trim().trim_matches('"') == "label"))
}

fn session_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "session".into())
}

fn load_session(path: &Path) -> anyhow::Result<SessionState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading session {}", path.display()))?;
    Ok(from_json(&text)?)
}

fn save_session(path: &Path, s: &SessionState) -> anyhow::Result<()> {
    fs::write(path, to_json(s)?).with_context(|| format!("writing session {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cache = DipNullCache::new();
    match cli.command {
        Command::Generate { kind, n, shift, sd, common } => {
            let (m, labels) = match kind {
                Generator::TwoGaussians => {
                    let (m, l) = generate_two_gaussians::<f64>(n, shift, sd, common.seed)?;
                    (m, Some(l))
                }
                Generator::Atom => {
                    let (m, l) = generate_atom::<f64>(n, common.seed)?;
                    (m, Some(l))
                }
                Generator::Golfball => (generate_golfball::<f64>(n, common.seed)?, None),
            };
            let mut buf = Vec::new();
            write_csv(&mut buf, &m, labels.as_ref())?;
            emit(&common.out, &String::from_utf8(buf)?)
        }
        Command::Distances { data, metric, common } => {
            let (_, m) = load_data(&data)?;
            let (_, df) = metric_distances(&m, metric)?;
            let mut text = format!("{metric}\n");
            for v in df.values() {
                text.push_str(&v.to_string());
                text.push('\n');
            }
            emit(&common.out, &text)
        }
        Command::Scan { data, metrics, n_boot, session, choose, common } => {
            let (name, m) = load_data(&data)?;
            for metric in &metrics {
                // fail early on data the metric cannot use
                if *metric == MetricId::SphericalRadius {
                    prepare_for_metric(&m, *metric)?;
                }
            }
            let mut s = if session.exists() {
                load_session(&session)?
            } else {
                SessionState::new(session_id(&session))
            };
            s.set_data(name, m);
            if let Some(n) = n_boot {
                s.config.plot.n_boot = n;
            }
            s.config.plot.seed = common.seed;
            let scan = s.run_scan(&metrics, &cache)?.clone();
            if let Some(choice) = choose {
                let metric = if choice == "auto" {
                    match scan.candidates().first() {
                        Some(c) => *c,
                        None => bail!("no metric has multimodal distances; choose one explicitly"),
                    }
                } else {
                    choice.parse()?
                };
                s.choose_metric(metric)?;
                eprintln!("chose {metric}");
            }
            save_session(&session, &s)?;
            emit(&common.out, &to_json(&scan)?)
        }
        Command::Fit { session, components, metric, restarts, max_iter, common } => {
            let mut s = load_session(&session)?;
            if let Some(metric) = metric {
                if s.metric != Some(metric) {
                    s.choose_metric(metric)?;
                }
            }
            if let Some(r) = restarts {
                s.config.em.restarts = r;
            }
            if let Some(m) = max_iter {
                s.config.em.max_iter = m;
            }
            s.config.em.seed = common.seed;
            let state = s.run_model(components, &cache)?.clone();
            save_session(&session, &s)?;
            emit(&common.out, &to_json(&state)?)
        }
        Command::Boundaries { params, session, common } => {
            let text = fs::read_to_string(&params).with_context(|| format!("reading {}", params.display()))?;
            let params: GmmParams<f64> = serde_json::from_str(&text)?;
            match session {
                Some(path) => {
                    let mut s = load_session(&path)?;
                    let state = s.set_model_params(params, &cache)?.clone();
                    save_session(&path, &s)?;
                    emit(&common.out, &to_json(&state)?)
                }
                None => {
                    let model = GmmModel::try_from(params)?;
                    emit(&common.out, &to_json(&bayes_boundaries(&model)?)?)
                }
            }
        }
        Command::Evaluate { session, labels, hierarchical, kmeans, spec, common } => {
            let mut s = load_session(&session)?;
            let mut specs: Vec<PartitionSpec> = Vec::new();
            if let Some(path) = spec {
                #[derive(serde::Deserialize)]
                struct SpecFile {
                    partitions: Vec<PartitionSpec>,
                }
                let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                specs.extend(serde_json::from_str::<SpecFile>(&text)?.partitions);
            }
            for path in labels {
                let l = load_labels(&path)?;
                specs.push(PartitionSpec {
                    name: path.file_stem().map(|s| s.to_string_lossy().into_owned()),
                    method: PartitionMethod::Labels {
                        labels: l.labels().iter().map(|&v| v as i64).collect(),
                    },
                });
            }
            for h in hierarchical {
                let (linkage, k) = h
                    .split_once(':')
                    .with_context(|| format!("expected linkage:k, got {h:?}"))?;
                let linkage: Linkage = serde_json::from_value(serde_json::Value::String(linkage.to_lowercase()))
                    .with_context(|| format!("unknown linkage {linkage:?}"))?;
                specs.push(PartitionSpec {
                    name: None,
                    method: PartitionMethod::Hierarchical { linkage, k: k.parse()? },
                });
            }
            for k in kmeans {
                specs.push(PartitionSpec {
                    name: None,
                    method: PartitionMethod::Kmeans { k, seed: common.seed, restarts: 10 },
                });
            }
            if specs.is_empty() {
                bail!("nothing to evaluate; pass --labels, --hierarchical, --kmeans or --spec");
            }
            let partitions = s.build_partitions(&specs)?;
            s.run_evaluate(partitions, &cache)?;
            let report = s.evaluation_report().expect("evaluation just ran");
            save_session(&session, &s)?;
            emit(&common.out, &to_json(&report)?)
        }
        Command::Table1 { seeds, shifts, n_per_cluster, n_boot, json, common } => {
            let mut config = Table1Config {
                seeds: (0..seeds).collect(),
                shifts,
                n_per_cluster,
                dip_seed: common.seed,
                ..Table1Config::default()
            };
            if let Some(n) = n_boot {
                config.n_boot = n;
            }
            let report = run_table1(&config, &cache)?;
            let text = if json { to_json(&report)? } else { report.render() };
            emit(&common.out, &text)
        }
        Command::Serve { addr, dir, .. } => {
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            eprintln!("listening on http://{addr}, sessions in {}", dir.display());
            rt.block_on(distmodes_server::serve(addr, dir))?;
            Ok(())
        }
    }
}
