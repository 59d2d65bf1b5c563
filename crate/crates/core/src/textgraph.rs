//! Text to graphs to vectors: sentence cleaning, n-grams, graph-of-words,
//! the sentence graph and training-set assembly.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{greedy_modularity, kmeans, Clustering};
use crate::conic::{admm_sdp_solve, dgp_sdp, AdmmSettings, SdpObjective};
use crate::dimred::{apply_rp, make_rp, JllConfig, DEFAULT_JLL_CONSTANT};
use crate::embed_exact::{frechet_embed, pca_reduce, pca_residual_dimension};
use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;
use crate::linalg::{read_matrix_csv, realization_from_gram, write_matrix_csv, Matrix};
use crate::realize_opt::{solve_quartic, DescentConfig};
use crate::rng::SeededRng;

/// Built-in stopword list, one word per line; `#` starts a comment.
pub const STOPWORDS: &str = include_str!("stopwords.txt");

pub const DEFAULT_ORDER: usize = 3;

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Sentences as word-id sequences over a dense vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub sentences: Vec<Vec<usize>>,
    pub vocabulary: Vec<String>,
    pub ngram_order: usize,
}

impl Corpus {
    fn from_word_lists(lists: Vec<Vec<String>>, order: usize) -> Result<Self> {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut vocabulary = Vec::new();
        let mut sentences = Vec::new();
        for words in lists.into_iter().filter(|w| w.len() >= order) {
            sentences.push(
                words
                    .into_iter()
                    .map(|w| {
                        *ids.entry(w.clone()).or_insert_with(|| {
                            vocabulary.push(w);
                            vocabulary.len() - 1
                        })
                    })
                    .collect(),
            );
        }
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self {
            sentences,
            vocabulary,
            ngram_order: order,
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn words(&self, i: usize) -> Vec<&str> {
        self.sentences[i]
            .iter()
            .map(|&w| self.vocabulary[w].as_str())
            .collect()
    }

    /// Sub-corpus of the given sentences, with the vocabulary re-densified.
    pub fn select(&self, keep: &[usize]) -> Result<Corpus> {
        let lists = keep
            .iter()
            .map(|&i| self.words(i).into_iter().map(String::from).collect())
            .collect();
        Corpus::from_word_lists(lists, self.ngram_order)
    }
}

/// Lowercased maximal `[a-z']+` runs with outer apostrophes trimmed.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .to_lowercase()
        .split(|c: char| !(c.is_ascii_lowercase() || c == '\''))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

/// Splits on `.?!;`, tokenizes, drops stopwords and one-letter tokens, and
/// keeps sentences with at least `order` words.
pub fn clean_and_split(text: &str, order: usize) -> Result<Corpus> {
    if order == 0 {
        return Err(Error::InvalidParameter("n-gram order must be >= 1".into()));
    }
    let stop = stopwords();
    let lists = text
        .split(['.', '?', '!', ';'])
        .map(|s| {
            tokenize(s)
                .into_iter()
                .filter(|t| t.len() >= 2 && !stop.contains(t.as_str()))
                .collect()
        })
        .collect();
    Corpus::from_word_lists(lists, order)
}

/// Distinct n-grams of the corpus in order of first appearance, keeping
/// those found in at least `min_sentences` sentences.
pub fn ngram_dictionary(corpus: &Corpus, min_sentences: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<&[usize]> = Vec::new();
    let mut count: HashMap<&[usize], usize> = HashMap::new();
    for s in &corpus.sentences {
        let distinct: HashSet<&[usize]> = s.windows(corpus.ngram_order).collect();
        for g in s.windows(corpus.ngram_order) {
            if !count.contains_key(g) {
                order.push(g);
                count.insert(g, 0);
            }
        }
        for g in distinct {
            *count.get_mut(g).expect("inserted above") += 1;
        }
    }
    order
        .into_iter()
        .filter(|g| count[g] >= min_sentences)
        .map(<[usize]>::to_vec)
        .collect()
}

/// 0/1 rows: entry `(i, j)` is 1 iff sentence i contains n-gram j.
pub fn incidence_vectors(corpus: &Corpus, dictionary: &[Vec<usize>]) -> Matrix {
    let index: HashMap<&[usize], usize> = dictionary
        .iter()
        .enumerate()
        .map(|(j, g)| (g.as_slice(), j))
        .collect();
    let mut m = Matrix::zeros(corpus.len(), dictionary.len());
    for (i, s) in corpus.sentences.iter().enumerate() {
        for g in s.windows(corpus.ngram_order) {
            if let Some(&j) = index.get(g) {
                m[(i, j)] = 1.0;
            }
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphIncidence {
    /// Row u holds `w_uv` at column v for each neighbour v.
    pub vertex_rows: Matrix,
    /// Weight of `{i, j}`, `i < j`, in lexicographic pair order.
    pub edge_vector: Vec<f64>,
}

pub fn graph_incidence_vectors(g: &WeightedGraph) -> GraphIncidence {
    let n = g.n();
    let mut vertex_rows = Matrix::zeros(n, n);
    let mut edge_vector = vec![0.0; n * n.saturating_sub(1) / 2];
    for e in g.edges() {
        vertex_rows[(e.u, e.v)] = e.w;
        vertex_rows[(e.v, e.u)] = e.w;
        edge_vector[e.u * n - e.u * (e.u + 1) / 2 + (e.v - e.u - 1)] = e.w;
    }
    GraphIncidence {
        vertex_rows,
        edge_vector,
    }
}

/// Graph-of-words of order `order`: one vertex per distinct word (first
/// appearance order) and `w_uv` = number of n-grams containing both.
pub fn graph_of_words<T: Eq + Hash + Clone>(
    sentence: &[T],
    order: usize,
) -> Result<(WeightedGraph, Vec<T>)> {
    if order == 0 || sentence.len() < order {
        return Err(Error::TooShort {
            len: sentence.len(),
            order,
        });
    }
    let mut ids: HashMap<&T, usize> = HashMap::new();
    let mut words = Vec::new();
    for w in sentence {
        ids.entry(w).or_insert_with(|| {
            words.push(w.clone());
            words.len() - 1
        });
    }
    let mut weight: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for gram in sentence.windows(order) {
        let mut v: Vec<usize> = gram.iter().map(|w| ids[w]).collect();
        v.sort_unstable();
        v.dedup();
        for a in 0..v.len() {
            for b in (a + 1)..v.len() {
                *weight.entry((v[a], v[b])).or_insert(0.0) += 1.0;
            }
        }
    }
    let g = WeightedGraph::new(words.len(), weight.into_iter().map(|((u, v), w)| (u, v, w)))?;
    Ok((g, words))
}

/// Whole-text graph-of-words projected on sentences: `{s, t}` gets
/// `sum c_uv` over word edges `{u, v}` with u in s and v in t (or the
/// reverse). Pairs `s = t` are skipped.
pub fn sentence_graph(corpus: &Corpus) -> Result<WeightedGraph> {
    let order = corpus.ngram_order;
    let mut word_edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for s in &corpus.sentences {
        let (g, words) = graph_of_words(s, order)?;
        for e in g.edges() {
            let (a, b) = (words[e.u], words[e.v]);
            *word_edges.entry((a.min(b), a.max(b))).or_insert(0.0) += e.w;
        }
    }
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); corpus.vocabulary.len()];
    for (i, s) in corpus.sentences.iter().enumerate() {
        let mut seen = HashSet::new();
        for &w in s {
            if seen.insert(w) {
                holders[w].push(i);
            }
        }
    }
    let mut weight: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(u, v), &c) in &word_edges {
        let mut pairs = HashSet::new();
        for &s in &holders[u] {
            for &t in &holders[v] {
                if s != t {
                    pairs.insert((s.min(t), s.max(t)));
                }
            }
        }
        for p in pairs {
            *weight.entry(p).or_insert(0.0) += c;
        }
    }
    WeightedGraph::new(
        corpus.len(),
        weight.into_iter().map(|((s, t), w)| (s, t, w)),
    )
}

/// Column-major flattening of each realization, zero-padded to the longest.
pub fn stack_and_pad(realizations: &[Matrix]) -> Result<Matrix> {
    let Some(first) = realizations.first() else {
        return Ok(Matrix::zeros(0, 0));
    };
    let k = first.cols();
    if let Some(r) = realizations.iter().find(|r| r.cols() != k) {
        return Err(Error::MixedK(k, r.cols()));
    }
    let width = realizations.iter().map(|r| r.rows() * k).max().unwrap_or(0);
    let mut out = Matrix::zeros(realizations.len(), width);
    for (i, r) in realizations.iter().enumerate() {
        let row = out.row_mut(i);
        for c in 0..k {
            for p in 0..r.rows() {
                row[c * r.rows() + p] = r[(p, c)];
            }
        }
    }
    Ok(out)
}

/// Label `j` in `1..=h` goes to `(j - 1) / (h - 1)`.
pub fn encode_labels(labels: &[usize], h: usize) -> Result<Vec<f64>> {
    labels
        .iter()
        .map(|&j| {
            if h < 2 || j == 0 || j > h {
                Err(Error::BadLabelRange { label: j, h })
            } else {
                Ok((j - 1) as f64 / (h - 1) as f64)
            }
        })
        .collect()
}

/// Encodes cluster ids with `h = max(k, 2)`.
pub fn encode_clustering(c: &Clustering) -> Vec<f64> {
    let labels: Vec<usize> = c.assignment.iter().map(|a| a + 1).collect();
    encode_labels(&labels, c.k.max(2)).expect("cluster ids lie in 0..k")
}

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| Error::InvalidParameter(format!(
                        "unknown {} '{s}'", stringify!($name).to_lowercase()
                    )))
            }
        }
    };
}

named_enum!(
    /// Sentence set: all sentences, or those sharing an n-gram with another.
    Sigma { Small => "small", Large => "large" }
);
named_enum!(
    /// Sentence-to-vector method.
    Method { Inc => "inc", Uie => "uie", Qrt => "qrt", Sdp => "sdp" }
);
named_enum!(Reduction { Pca => "pca", Rp => "rp" });
named_enum!(Truth { Kmeans => "kmeans", SentenceGraph => "graph" });

/// A sentence set with the n-gram dictionary used by incidence vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceSet {
    pub sigma: Sigma,
    pub corpus: Corpus,
    pub dictionary: Vec<Vec<usize>>,
}

/// The small set keeps sentences with an n-gram found in at least two
/// sentences, and only those n-grams.
pub fn sentence_set(corpus: &Corpus, sigma: Sigma) -> Result<SentenceSet> {
    match sigma {
        Sigma::Large => Ok(SentenceSet {
            sigma,
            dictionary: ngram_dictionary(corpus, 1),
            corpus: corpus.clone(),
        }),
        Sigma::Small => {
            let shared: HashSet<Vec<usize>> = ngram_dictionary(corpus, 2).into_iter().collect();
            let keep: Vec<usize> = (0..corpus.len())
                .filter(|&i| {
                    corpus.sentences[i]
                        .windows(corpus.ngram_order)
                        .any(|g| shared.contains(g))
                })
                .collect();
            if keep.is_empty() {
                return Err(Error::EmptyCorpus);
            }
            let sub = corpus.select(&keep)?;
            Ok(SentenceSet {
                sigma,
                dictionary: ngram_dictionary(&sub, 2),
                corpus: sub,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Per-sentence realization dimension.
    pub dim: usize,
    /// Cluster count for k-means ground truths.
    pub kmeans_k: usize,
    pub kmeans_max_iter: usize,
    /// Distortion for the projection target dimension.
    pub epsilon: f64,
    pub jll_constant: f64,
    /// Spectrum share kept by PCA.
    pub pca_fraction: f64,
    pub descent: DescentConfig,
    pub admm: AdmmSettings,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(seed: u64) -> Self {
        let mut descent = DescentConfig::new(seed);
        descent.restarts = 2;
        descent.max_iterations = 2000;
        descent.gradient_tolerance = 1e-7;
        Self {
            dim: 10,
            kmeans_k: 4,
            kmeans_max_iter: 300,
            epsilon: 0.15,
            jll_constant: DEFAULT_JLL_CONSTANT,
            pca_fraction: 0.999,
            descent,
            admm: AdmmSettings {
                tol: 1e-5,
                max_iter: 5000,
                rho: 1.0,
            },
            seed,
        }
    }
}

fn pad_cols(x: &Matrix, k: usize) -> Matrix {
    Matrix::from_fn(
        x.rows(),
        k,
        |i, j| if j < x.cols() { x[(i, j)] } else { 0.0 },
    )
}

/// Realizes the graph-of-words of one sentence in `cfg.dim` dimensions.
/// `uie` is reduced to the target dimension by PCA when it has more
/// columns, and zero-padded otherwise.
pub fn realize_sentence(
    words: &[usize],
    order: usize,
    mu: Method,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<Matrix> {
    let (g, _) = graph_of_words(words, order)?;
    let k = cfg.dim;
    match mu {
        Method::Inc => Err(Error::InvalidParameter(
            "incidence vectors are not per-sentence realizations".into(),
        )),
        Method::Uie => {
            let x = frechet_embed(&g)?;
            if x.cols() > k {
                pca_reduce(&x, k)
            } else {
                Ok(pad_cols(&x, k))
            }
        }
        Method::Qrt => {
            let mut d = cfg.descent.clone();
            d.seed = seed;
            Ok(solve_quartic(&g, k, &d, None)?.realization)
        }
        Method::Sdp => {
            let p = dgp_sdp(&g, SdpObjective::Trace)?;
            let x = admm_sdp_solve(&p, &cfg.admm)?.x;
            realization_from_gram(&x, Some(k))
        }
    }
}

/// Unreduced input matrix: incidence rows for `inc`, stacked realizations
/// otherwise.
pub fn input_matrix(set: &SentenceSet, mu: Method, cfg: &PipelineConfig) -> Result<Matrix> {
    let c = &set.corpus;
    if mu == Method::Inc {
        return Ok(incidence_vectors(c, &set.dictionary));
    }
    let seeds: Vec<u64> = (0..c.len())
        .map(|i| SeededRng::substream(cfg.seed, i as u64).next_u64())
        .collect();
    let reals: Vec<Matrix> = (0..c.len())
        .into_par_iter()
        .map(|i| realize_sentence(&c.sentences[i], c.ngram_order, mu, cfg, seeds[i]))
        .collect::<Result<_>>()?;
    stack_and_pad(&reals)
}

/// PCA to the smallest dimension keeping `pca_fraction` of the spectrum,
/// or a dense projection to `ceil(C ln(s) / eps^2)` dimensions.
pub fn reduce(x: &Matrix, rho: Reduction, cfg: &PipelineConfig) -> Result<Matrix> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::EmptyInput);
    }
    match rho {
        Reduction::Pca => {
            let k = pca_residual_dimension(x, cfg.pca_fraction)?;
            pca_reduce(x, k.min(x.rows().min(x.cols())))
        }
        Reduction::Rp => {
            let k = JllConfig::with_constant(cfg.epsilon, cfg.jll_constant)?.target_dim(x.rows());
            let t = make_rp(
                x.cols(),
                k,
                1.0,
                SeededRng::substream(cfg.seed, u64::MAX).next_u64(),
            )?;
            apply_rp(&t, x)
        }
    }
}

pub fn kmeans_truth(x: &Matrix, cfg: &PipelineConfig) -> Result<Clustering> {
    let k = cfg.kmeans_k.min(x.rows());
    Ok(kmeans(x, k, cfg.seed, cfg.kmeans_max_iter)?.clustering)
}

pub fn graph_truth(set: &SentenceSet) -> Result<Clustering> {
    Ok(greedy_modularity(&sentence_graph(&set.corpus)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub sigma: Sigma,
    pub mu: Method,
    pub rho: Reduction,
    pub truth: Truth,
    /// Cluster count of the ground truth.
    pub clusters: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub provenance: Provenance,
}

impl TrainingSet {
    pub fn new(x: Matrix, y: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                found: y.len(),
            });
        }
        if let Some(v) = y.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "output {v} outside [0, 1]"
            )));
        }
        Ok(Self { x, y, provenance })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn write_x<W: Write>(&self, w: W) -> Result<()> {
        write_matrix_csv(&self.x, w)
    }

    pub fn write_y<W: Write>(&self, w: W) -> Result<()> {
        let col = Matrix::new(self.y.len(), 1, self.y.clone())?;
        write_matrix_csv(&col, w)
    }

    pub fn provenance_json(&self) -> String {
        serde_json::to_string_pretty(&self.provenance).expect("serializable")
    }

    /// Reads `X` CSV, single-column `Y` CSV and the provenance JSON.
    pub fn parse(x_csv: &str, y_csv: &str, provenance_json: &str) -> Result<Self> {
        let x = read_matrix_csv(x_csv.as_bytes())?;
        let y = read_matrix_csv(y_csv.as_bytes())?;
        if y.cols() != 1 && y.rows() > 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: y.cols(),
            });
        }
        let provenance = serde_json::from_str(provenance_json)?;
        TrainingSet::new(x, y.into_data(), provenance)
    }

    /// Reads `<stem>.x.csv`, `<stem>.y.csv` and `<stem>.json` from `dir`.
    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let read = |ext: &str| std::fs::read_to_string(dir.join(format!("{stem}.{ext}")));
        TrainingSet::parse(&read("x.csv")?, &read("y.csv")?, &read("json")?)
    }
}

/// One training set: input `X(sigma, mu, rho)` and a ground truth computed
/// either by k-means on that input or from the sentence graph.
pub fn build_training_set(
    set: &SentenceSet,
    mu: Method,
    rho: Reduction,
    truth: Truth,
    cfg: &PipelineConfig,
) -> Result<TrainingSet> {
    let x = reduce(&input_matrix(set, mu, cfg)?, rho, cfg)?;
    let c = match truth {
        Truth::Kmeans => kmeans_truth(&x, cfg)?,
        Truth::SentenceGraph => graph_truth(set)?,
    };
    let provenance = Provenance {
        sigma: set.sigma,
        mu,
        rho,
        truth,
        clusters: c.k,
        seed: cfg.seed,
    };
    TrainingSet::new(x, encode_clustering(&c), provenance)
}

/// All inputs of a `(mu, rho)` grid with their k-means outputs, plus the
/// sentence-graph output shared by every input.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentGrid {
    pub sigma: Sigma,
    pub seed: u64,
    pub cells: Vec<GridCell>,
    pub graph_truth: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub mu: Method,
    pub rho: Reduction,
    pub x: Matrix,
    pub kmeans_truth: Vec<f64>,
}

pub fn prepare_grid(
    set: &SentenceSet,
    methods: &[Method],
    reductions: &[Reduction],
    cfg: &PipelineConfig,
) -> Result<ExperimentGrid> {
    let mut cells = Vec::new();
    for &mu in methods {
        let raw = input_matrix(set, mu, cfg)?;
        for &rho in reductions {
            let x = reduce(&raw, rho, cfg)?;
            let kmeans_truth = encode_clustering(&kmeans_truth(&x, cfg)?);
            cells.push(GridCell {
                mu,
                rho,
                x,
                kmeans_truth,
            });
        }
    }
    Ok(ExperimentGrid {
        sigma: set.sigma,
        seed: cfg.seed,
        cells,
        graph_truth: encode_clustering(&graph_truth(set)?),
    })
}
