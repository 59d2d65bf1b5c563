//! `distgeom`: seeded command-line experiments over the distgeom toolkit.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distgeom::ann::{cumulative_loss, evaluate_experiment, fit, Network, TrainConfig};
use distgeom::cluster::{greedy_modularity, kmeans, spectral_bisect, Clustering};
use distgeom::conic::{
    admm_sdp_solve, ddp_dual, ddp_primal, dgp_sdp, solve_ddp, AdmmSettings, LpStatus, SdpObjective,
};
use distgeom::dimred::{
    apply_rp, barvinok_realize, identity_stats, make_rp, norm_preservation_stat, JllConfig,
};
use distgeom::embed_exact::{
    classic_mds, frechet_embed, isomap, linf_dist, pca_reduce, pca_residual_dimension,
};
use distgeom::graphs::partial_from_graph;
use distgeom::instability::{
    run_instability, write_instability_csv, Distribution, InstabilityConfig,
};
use distgeom::linalg::realization_from_gram;
use distgeom::realize_opt::{max_violation, solve_quartic, DescentConfig};
use distgeom::textgraph::{
    build_training_set, clean_and_split, prepare_grid, sentence_set, Method, PipelineConfig,
    Reduction, Sigma, TrainingSet, Truth, DEFAULT_ORDER,
};
use distgeom::{Error, Matrix};
use serde::Serialize;

use output::{emit, json_bytes, matrix_bytes, read_graph, read_matrix, read_text};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{op}: {source}")]
    Core {
        op: &'static str,
        #[source]
        source: Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn core(op: &'static str, source: Error) -> Self {
        CliError::Core { op, source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core { source, .. } if source.is_numerical() => 3,
            _ => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

trait Context<T> {
    fn during(self, op: &'static str) -> CliResult<T>;
}

impl<T> Context<T> for distgeom::Result<T> {
    fn during(self, op: &'static str) -> CliResult<T> {
        self.map_err(|e| CliError::core(op, e))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "distgeom",
    version,
    about = "Graph realization, dimensionality reduction and clustering experiments"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every random choice; required wherever randomness is used.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Suppress the summary line on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for independent trials and instances.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print the formulation behind the selected method and exit.
    #[arg(long, global = true)]
    describe: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RealizeMethod {
    Uie,
    Mds,
    Pca,
    Isomap,
    Qrt,
    Sdp,
    DdpPrimal,
    DdpDual,
    Barvinok,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReduceMethod {
    Pca,
    Rp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ClusterMethod {
    Kmeans,
    Spectral,
    Modularity,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Realize a weighted graph (edge list, graph JSON, or point CSV).
    Realize {
        #[arg(long, value_enum)]
        method: RealizeMethod,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce the rows of a matrix CSV by PCA or random projection.
    Reduce {
        #[arg(long, value_enum)]
        method: ReduceMethod,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        /// Distortion used to size a projection when --dim is absent.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        /// Spectrum share kept by PCA when --dim is absent.
        #[arg(long, default_value_t = 0.999)]
        fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster matrix rows (k-means) or graph vertices.
    Cluster {
        #[arg(long, value_enum)]
        method: ClusterMethod,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 300)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nearest/farthest distance ratio study over growing dimension.
    Instability {
        #[arg(long, value_delimiter = ',', default_values_t = [10, 100, 1000, 10000])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Distributions to run; all three by default.
        #[arg(long, value_delimiter = ',')]
        distribution: Vec<String>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random projection statistics: norm preservation and identity approximation.
    RpStats {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Dimensions for the identity approximation table.
        #[arg(long, value_delimiter = ',', default_values_t = [1000, 2000])]
        identity_n: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Text to sentence vectors to network loss table.
    Nlp {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "small")]
        sigma: String,
        /// Sentence vector methods (comma separated); all by default.
        #[arg(long, value_delimiter = ',')]
        mu: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        rho: Vec<String>,
        /// Keep only loss rows of one ground-truth type.
        #[arg(long)]
        truth: Option<String>,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        #[arg(long)]
        max_epochs: Option<usize>,
        /// Also write every training set (X, Y, provenance) into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a network on a training set.
    AnnTrain {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = distgeom::ann::DEFAULT_HIDDEN)]
        hidden: usize,
        #[arg(long)]
        max_epochs: Option<usize>,
        /// Network parameters (JSON).
        #[arg(long)]
        net: PathBuf,
        /// Training report; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a trained network on a training set.
    AnnEval {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Realize { .. } => "realize",
            Command::Reduce { .. } => "reduce",
            Command::Cluster { .. } => "cluster",
            Command::Instability { .. } => "instability",
            Command::RpStats { .. } => "rp-stats",
            Command::Nlp { .. } => "nlp",
            Command::AnnTrain { .. } => "ann-train",
            Command::AnnEval { .. } => "ann-eval",
        }
    }
}

fn describe(cmd: &Command) -> String {
    let text = match cmd {
        Command::Realize { method, .. } => match method {
            RealizeMethod::Uie => "Frechet embedding: vertex v maps to column v of the shortest-path distance matrix; exact in the l-infinity norm.",
            RealizeMethod::Mds => "Classic multidimensional scaling: G = -1/2 J D^2 J, factor the K largest eigenpairs.",
            RealizeMethod::Pca => "PCA as MDS on the data Gram matrix X X^T of the Frechet vectors (or of the input points).",
            RealizeMethod::Isomap => "Isomap: epsilon-neighbourhood graph, shortest-path completion, then classic MDS.",
            RealizeMethod::Qrt => "Unconstrained quartic: min sum_uv (||x_u - x_v||^2 - d_uv^2)^2 by gradient descent with restarts.",
            RealizeMethod::Sdp => "SDP relaxation: min tr(X) s.t. X_uu + X_vv - 2 X_uv = d_uv^2, X PSD; rank-K factor of X.",
            RealizeMethod::DdpPrimal => "Inner approximation: the SDP with X restricted to diagonally dominant matrices, solved as an LP.",
            RealizeMethod::DdpDual => "Outer approximation: the dual cone of diagonally dominant matrices, solved as an LP.",
            RealizeMethod::Barvinok => "SDP solution X = Y Y^T, sample x = Y z with z Gaussian (K columns), refine with the quartic.",
        },
        Command::Reduce { method, .. } => match method {
            ReduceMethod::Pca => "PCA without centring: top eigenvectors of X X^T scaled by sqrt of their eigenvalues.",
            ReduceMethod::Rp => "Random projection: T with i.i.d. N(0, 1/k) entries (sparsified by density), rows map to T x.",
        },
        Command::Cluster { method, .. } => match method {
            ClusterMethod::Kmeans => "Minimum sum-of-squares clustering by Lloyd iterations from farthest-point seeds.",
            ClusterMethod::Spectral => "Sign pattern of the Laplacian eigenvector of the second smallest eigenvalue.",
            ClusterMethod::Modularity => "Agglomerative merges of the pair with largest modularity gain.",
        },
        Command::Instability { .. } => "eps = D_max / D_min - 1 over distances ||Z - X_i||^p, median per dimension.",
        Command::RpStats { .. } => "Mean of ||T u||^2 / ||u||^2 and the spectral distance of T T^T / n from the identity.",
        Command::Nlp { .. } => "Sentences to graph-of-words, realized (inc/uie/qrt/sdp), reduced (pca/rp), clustered, then fitted by a network.",
        Command::AnnTrain { .. } => "One ReLU hidden layer, sigmoid output, squared error minimized by Adam minibatches.",
        Command::AnnEval { .. } => "Mean over pairs of |N(x) - y|.",
    };
    format!("{}: {text}\n", cmd.name())
}

fn require_seed(g: &Global, what: &str) -> CliResult<u64> {
    g.seed
        .ok_or_else(|| CliError::Usage(format!("{what} is randomized; pass --seed")))
}

fn say(g: &Global, msg: impl AsRef<str>) {
    if !g.quiet {
        eprintln!("{}", msg.as_ref());
    }
}

fn parse_list<T: std::str::FromStr<Err = Error> + Copy>(
    items: &[String],
    all: &[T],
) -> CliResult<Vec<T>> {
    if items.is_empty() {
        return Ok(all.to_vec());
    }
    items
        .iter()
        .map(|s| s.parse::<T>().map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

#[derive(Serialize)]
struct RealizeOutput<'a> {
    method: &'a str,
    k: usize,
    max_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    realization: Vec<Vec<f64>>,
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn realize(
    g: &Global,
    method: RealizeMethod,
    dim: Option<usize>,
    input: &Path,
    out: Option<&Path>,
) -> CliResult<()> {
    let seed = match method {
        RealizeMethod::Qrt | RealizeMethod::Barvinok => require_seed(g, "this method")?,
        _ => 0,
    };
    let graph = read_graph(input)?;
    let k = dim.unwrap_or(2);
    let mut objective = None;
    let x = match method {
        RealizeMethod::Uie => frechet_embed(&graph).during("frechet_embed")?,
        RealizeMethod::Mds => {
            classic_mds(&partial_from_graph(&graph), dim)
                .during("classic_mds")?
                .realization
        }
        RealizeMethod::Pca => {
            let f = frechet_embed(&graph).during("frechet_embed")?;
            pca_reduce(&f, k.min(f.rows().max(1))).during("pca_reduce")?
        }
        RealizeMethod::Isomap => {
            let f = frechet_embed(&graph).during("frechet_embed")?;
            isomap(&f, k).during("isomap")?
        }
        RealizeMethod::Qrt | RealizeMethod::Barvinok => {
            let cfg = DescentConfig::new(seed);
            let sol = if method == RealizeMethod::Qrt {
                solve_quartic(&graph, k, &cfg, None).during("solve_quartic")?
            } else {
                barvinok_realize(&graph, k, &cfg, &AdmmSettings::default())
                    .during("barvinok_realize")?
            };
            objective = Some(sol.report.final_objective);
            sol.realization
        }
        RealizeMethod::Sdp => {
            let p = dgp_sdp(&graph, SdpObjective::Trace).during("dgp_sdp")?;
            let r = admm_sdp_solve(&p, &AdmmSettings::default()).during("admm_sdp_solve")?;
            if !r.converged {
                say(
                    g,
                    format!(
                        "warning: ADMM stopped after {} iterations without converging",
                        r.iterations
                    ),
                );
            }
            objective = Some(r.objective);
            realization_from_gram(&r.x, Some(k)).during("realization_from_gram")?
        }
        RealizeMethod::DdpPrimal | RealizeMethod::DdpDual => {
            let lp = if method == RealizeMethod::DdpPrimal {
                ddp_primal(&graph)
            } else {
                ddp_dual(&graph)
            };
            let s = solve_ddp(graph.n(), &lp).during("solve_ddp")?;
            if s.status != LpStatus::Optimal {
                return Err(CliError::core(
                    "solve_ddp",
                    Error::InvalidParameter(
                        format!("linear program is {:?}", s.status).to_lowercase(),
                    ),
                ));
            }
            objective = Some(s.objective);
            realization_from_gram(&s.x, Some(k)).during("realization_from_gram")?
        }
    };
    let viol = if method == RealizeMethod::Uie {
        graph
            .edges()
            .iter()
            .map(|e| (linf_dist(x.row(e.u), x.row(e.v)) - e.w).abs())
            .fold(0.0, f64::max)
    } else {
        max_violation(&graph, &x)
    };
    say(
        g,
        format!(
            "realize: n = {}, K = {}, max violation {viol:.3e}",
            x.rows(),
            x.cols()
        ),
    );
    let bytes = match g.format {
        Format::Csv => matrix_bytes(&x),
        Format::Json => json_bytes(&RealizeOutput {
            method: method.to_possible_value().expect("named").get_name(),
            k: x.cols(),
            max_violation: viol,
            objective,
            realization: rows(&x),
        }),
    };
    emit(out, &bytes)
}

#[allow(clippy::too_many_arguments)]
fn reduce(
    g: &Global,
    method: ReduceMethod,
    input: &Path,
    dim: Option<usize>,
    eps: f64,
    density: f64,
    fraction: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let seed = match method {
        ReduceMethod::Rp => require_seed(g, "a random projection")?,
        ReduceMethod::Pca => 0,
    };
    let x = read_matrix(input)?;
    let y = match method {
        ReduceMethod::Pca => {
            let k = match dim {
                Some(k) => k,
                None => pca_residual_dimension(&x, fraction).during("pca_residual_dimension")?,
            };
            pca_reduce(&x, k).during("pca_reduce")?
        }
        ReduceMethod::Rp => {
            let k = match dim {
                Some(k) => k,
                None => JllConfig::new(eps)
                    .during("JllConfig")?
                    .target_dim(x.rows()),
            };
            let t = make_rp(x.cols(), k, density, seed).during("make_rp")?;
            apply_rp(&t, &x).during("apply_rp")?
        }
    };
    say(
        g,
        format!(
            "reduce: {} x {} -> {} x {}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        ),
    );
    let bytes = match g.format {
        Format::Csv => matrix_bytes(&y),
        Format::Json => json_bytes(&rows(&y)),
    };
    emit(out, &bytes)
}

fn clustering_bytes(g: &Global, c: &Clustering, extra: Option<serde_json::Value>) -> Vec<u8> {
    match g.format {
        Format::Csv => {
            let mut s = String::from("index,cluster\n");
            for (i, a) in c.assignment.iter().enumerate() {
                s.push_str(&format!("{i},{a}\n"));
            }
            s.into_bytes()
        }
        Format::Json => {
            let mut v = serde_json::to_value(c).expect("serializable");
            if let (Some(serde_json::Value::Object(extra)), serde_json::Value::Object(map)) =
                (extra, &mut v)
            {
                map.extend(extra);
            }
            json_bytes(&v)
        }
    }
}

fn cluster(
    g: &Global,
    method: ClusterMethod,
    input: &Path,
    k: usize,
    max_iter: usize,
    out: Option<&Path>,
) -> CliResult<()> {
    let seed = match method {
        ClusterMethod::Kmeans => require_seed(g, "k-means")?,
        _ => 0,
    };
    let (c, extra) = match method {
        ClusterMethod::Kmeans => {
            let r = kmeans(&read_matrix(input)?, k, seed, max_iter).during("kmeans")?;
            let extra = serde_json::json!({ "objective": r.objective, "history": r.history });
            (r.clustering, extra)
        }
        ClusterMethod::Spectral => {
            let b = spectral_bisect(&read_graph(input)?).during("spectral_bisect")?;
            (
                b.clustering,
                serde_json::json!({ "fiedler_value": b.fiedler_value }),
            )
        }
        ClusterMethod::Modularity => {
            let graph = read_graph(input)?;
            let c = greedy_modularity(&graph);
            let q = distgeom::cluster::modularity_value(&graph, &c).ok();
            (c, serde_json::json!({ "modularity": q }))
        }
    };
    say(g, format!("cluster: {} items in {} clusters", c.len(), c.k));
    emit(out, &clustering_bytes(g, &c, Some(extra)))
}

fn instability(
    g: &Global,
    dims: Vec<usize>,
    points: usize,
    trials: usize,
    distribution: &[String],
    p: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let seed = require_seed(g, "the instability study")?;
    let dists = parse_list(distribution, &Distribution::ALL)?;
    let mut all = Vec::new();
    for distribution in dists {
        let cfg = InstabilityConfig {
            dims: dims.clone(),
            points,
            trials,
            distribution,
            p,
            seed,
        };
        all.extend(run_instability(&cfg).during("run_instability")?);
    }
    let bytes = match g.format {
        Format::Json => json_bytes(&all),
        Format::Csv => {
            let mut buf = Vec::new();
            write_instability_csv(&all, &mut buf).during("write_instability_csv")?;
            buf
        }
    };
    say(g, format!("instability: {} rows", all.len()));
    emit(out, &bytes)
}

#[derive(Serialize)]
struct RpStats {
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
    mean_norm_ratio: f64,
    identity: Vec<distgeom::dimred::IdentityStats>,
}

fn rp_stats(
    g: &Global,
    n: usize,
    k: usize,
    samples: usize,
    identity_n: &[usize],
    eps: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let seed = require_seed(g, "rp-stats")?;
    let mean_norm_ratio =
        norm_preservation_stat(n, k, samples, seed).during("norm_preservation_stat")?;
    let identity = identity_n
        .iter()
        .map(|&m| identity_stats(m, eps, seed).during("identity_stats"))
        .collect::<CliResult<Vec<_>>>()?;
    let stats = RpStats {
        n,
        k,
        samples,
        seed,
        mean_norm_ratio,
        identity,
    };
    let bytes = match g.format {
        Format::Json => json_bytes(&stats),
        Format::Csv => {
            let mut s = String::from(
                "n,d,seed,norm_ttt_over_n,norm_ttt_over_d,norm_ttt_raw,diag_mean,offdiag_mean\n",
            );
            for r in &stats.identity {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.n,
                    r.d,
                    r.seed,
                    r.norm_ttt_over_n,
                    r.norm_ttt_over_d,
                    r.norm_ttt_raw,
                    r.diag_mean,
                    r.offdiag_mean
                ));
            }
            s.into_bytes()
        }
    };
    say(
        g,
        format!("rp-stats: mean ||Tu||^2/||u||^2 = {mean_norm_ratio:.5}"),
    );
    emit(out, &bytes)
}

#[allow(clippy::too_many_arguments)]
fn nlp(
    g: &Global,
    corpus: &Path,
    sigma: &str,
    mu: &[String],
    rho: &[String],
    truth: Option<&str>,
    order: usize,
    max_epochs: Option<usize>,
    export: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<()> {
    let seed = require_seed(g, "the nlp pipeline")?;
    let sigma: Sigma = sigma
        .parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let methods = parse_list(mu, Method::ALL)?;
    let reductions = parse_list(rho, Reduction::ALL)?;
    let truth: Option<Truth> = truth
        .map(|t| t.parse().map_err(|e: Error| CliError::Usage(e.to_string())))
        .transpose()?;
    let text = read_text(corpus)?;
    let corpus = clean_and_split(&text, order).during("clean_and_split")?;
    let set = sentence_set(&corpus, sigma).during("sentence_set")?;
    let cfg = PipelineConfig::new(seed);
    say(
        g,
        format!("nlp: {} sentences in the {sigma} set", set.corpus.len()),
    );

    if let Some(dir) = export {
        std::fs::create_dir_all(dir)?;
        for &m in &methods {
            for &r in &reductions {
                for t in [Truth::Kmeans, Truth::SentenceGraph] {
                    let ts =
                        build_training_set(&set, m, r, t, &cfg).during("build_training_set")?;
                    write_training_set(dir, &format!("{sigma}_{m}_{r}_{t}"), &ts)?;
                }
            }
        }
    }

    let grid = prepare_grid(&set, &methods, &reductions, &cfg).during("prepare_grid")?;
    let mut tcfg = TrainConfig::new(seed);
    if let Some(e) = max_epochs {
        tcfg.max_epochs = e;
    }
    let mut table = evaluate_experiment(&grid, &tcfg).during("evaluate_experiment")?;
    if let Some(t) = truth {
        table.cells.retain(|c| c.truth == t);
    }
    if let Some(f) = table.diagonal_win_fraction() {
        say(
            g,
            format!(
                "nlp: diagonal k-means cells beat the off-diagonal mean in {:.0}% of rows",
                100.0 * f
            ),
        );
    }
    let bytes = match g.format {
        Format::Json => json_bytes(&table),
        Format::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf).during("write_csv")?;
            buf
        }
    };
    emit(out, &bytes)
}

fn write_training_set(dir: &Path, stem: &str, ts: &TrainingSet) -> CliResult<()> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    ts.write_x(&mut x).during("write_x")?;
    ts.write_y(&mut y).during("write_y")?;
    emit(Some(&dir.join(format!("{stem}.x.csv"))), &x)?;
    emit(Some(&dir.join(format!("{stem}.y.csv"))), &y)?;
    emit(
        Some(&dir.join(format!("{stem}.json"))),
        ts.provenance_json().as_bytes(),
    )
}

fn read_pairs(x: &Path, y: &Path) -> CliResult<(Matrix, Vec<f64>)> {
    let xm = read_matrix(x)?;
    let ym = read_matrix(y)?;
    if ym.cols() != 1 {
        return Err(CliError::Input(format!(
            "{}: expected one column, found {}",
            y.display(),
            ym.cols()
        )));
    }
    Ok((xm, ym.into_data()))
}

fn ann_train(
    g: &Global,
    x: &Path,
    y: &Path,
    hidden: usize,
    max_epochs: Option<usize>,
    net: &Path,
    out: Option<&Path>,
) -> CliResult<()> {
    let seed = require_seed(g, "training")?;
    let (xm, yv) = read_pairs(x, y)?;
    let mut cfg = TrainConfig::new(seed);
    cfg.hidden = hidden;
    if let Some(e) = max_epochs {
        cfg.max_epochs = e;
    }
    let (network, report) = fit(&xm, &yv, &cfg).during("train")?;
    emit(Some(net), network.to_json().as_bytes())?;
    say(
        g,
        format!(
            "ann-train: {} epochs, test loss {:.4}",
            report.epochs, report.test_loss
        ),
    );
    let bytes = match g.format {
        Format::Json => json_bytes(&report),
        Format::Csv => {
            let mut s = String::from("epoch,train_loss,validation_loss\n");
            for (e, (t, v)) in report
                .train_losses
                .iter()
                .zip(&report.validation_losses)
                .enumerate()
            {
                s.push_str(&format!("{},{t},{v}\n", e + 1));
            }
            s.into_bytes()
        }
    };
    emit(out, &bytes)
}

fn ann_eval(g: &Global, net: &Path, x: &Path, y: &Path, out: Option<&Path>) -> CliResult<()> {
    let network = Network::from_json(&read_text(net)?).during("reading network")?;
    let (xm, yv) = read_pairs(x, y)?;
    let predictions = network.predict(&xm).during("forward")?;
    let all: Vec<usize> = (0..yv.len()).collect();
    let loss = cumulative_loss(&network, &xm, &yv, &all).during("cumulative_loss")?;
    say(
        g,
        format!(
            "ann-eval: cumulative loss {loss:.6} over {} pairs",
            yv.len()
        ),
    );
    let bytes = match g.format {
        Format::Json => json_bytes(
            &serde_json::json!({ "pairs": yv.len(), "cumulative_loss": loss, "predictions": predictions }),
        ),
        Format::Csv => {
            let mut s = String::from("index,target,prediction\n");
            for (i, (t, p)) in yv.iter().zip(&predictions).enumerate() {
                s.push_str(&format!("{i},{t},{p}\n"));
            }
            s.into_bytes()
        }
    };
    emit(out, &bytes)
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    if g.describe {
        print!("{}", describe(&cli.command));
        return Ok(());
    }
    if let Some(n) = g.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    match &cli.command {
        Command::Realize {
            method,
            dim,
            input,
            out,
        } => realize(g, *method, *dim, input, out.as_deref()),
        Command::Reduce {
            method,
            input,
            dim,
            eps,
            density,
            fraction,
            out,
        } => reduce(
            g,
            *method,
            input,
            *dim,
            *eps,
            *density,
            *fraction,
            out.as_deref(),
        ),
        Command::Cluster {
            method,
            input,
            k,
            max_iter,
            out,
        } => cluster(g, *method, input, *k, *max_iter, out.as_deref()),
        Command::Instability {
            dims,
            points,
            trials,
            distribution,
            p,
            out,
        } => instability(
            g,
            dims.clone(),
            *points,
            *trials,
            distribution,
            *p,
            out.as_deref(),
        ),
        Command::RpStats {
            n,
            k,
            samples,
            identity_n,
            eps,
            out,
        } => rp_stats(g, *n, *k, *samples, identity_n, *eps, out.as_deref()),
        Command::Nlp {
            corpus,
            sigma,
            mu,
            rho,
            truth,
            order,
            max_epochs,
            export,
            out,
        } => nlp(
            g,
            corpus,
            sigma,
            mu,
            rho,
            truth.as_deref(),
            *order,
            *max_epochs,
            export.as_deref(),
            out.as_deref(),
        ),
        Command::AnnTrain {
            x,
            y,
            hidden,
            max_epochs,
            net,
            out,
        } => ann_train(g, x, y, *hidden, *max_epochs, net, out.as_deref()),
        Command::AnnEval { net, x, y, out } => ann_eval(g, net, x, y, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("distgeom {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
        assert_eq!(CliError::core("op", Error::Disconnected).exit_code(), 2);
        assert_eq!(CliError::core("op", Error::NotPsd(-1.0)).exit_code(), 3);
        assert_eq!(
            CliError::core("op", Error::NoConvergence { sweeps: 100 }).exit_code(),
            3
        );
        assert_eq!(
            CliError::core("op", Error::Diverged { epoch: 2 }).exit_code(),
            3
        );
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
