//! One-hidden-layer feedforward network: ReLU hidden units, sigmoid output,
//! minibatch backpropagation with Adam updates.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::SeededRng;
use crate::textgraph::{ExperimentGrid, Method, Reduction, Sigma, TrainingSet, Truth};

pub const DEFAULT_HIDDEN: usize = 20;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    inputs: usize,
    hidden: usize,
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

/// Parameters of an `inputs -> hidden -> 1` network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork", into = "RawNetwork")]
pub struct Network {
    inputs: usize,
    hidden: usize,
    /// Row j holds the weights of the arcs into hidden unit j.
    w1: Matrix,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl TryFrom<RawNetwork> for Network {
    type Error = Error;
    fn try_from(r: RawNetwork) -> Result<Self> {
        if r.inputs == 0 || r.hidden == 0 {
            return Err(Error::InvalidParameter("layer widths must be >= 1".into()));
        }
        if r.w1.len() != r.hidden || r.b1.len() != r.hidden || r.w2.len() != r.hidden {
            return Err(Error::DimensionMismatch {
                expected: r.hidden,
                found: r.w1.len().min(r.b1.len()).min(r.w2.len()),
            });
        }
        if let Some(row) = r.w1.iter().find(|row| row.len() != r.inputs) {
            return Err(Error::DimensionMismatch {
                expected: r.inputs,
                found: row.len(),
            });
        }
        let net = Network {
            inputs: r.inputs,
            hidden: r.hidden,
            w1: Matrix::from_rows(&r.w1)?,
            b1: r.b1,
            w2: r.w2,
            b2: r.b2,
        };
        if !net.params().iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidParameter(
                "network parameters must be finite".into(),
            ));
        }
        Ok(net)
    }
}

impl From<Network> for RawNetwork {
    fn from(n: Network) -> Self {
        RawNetwork {
            inputs: n.inputs,
            hidden: n.hidden,
            w1: (0..n.hidden).map(|j| n.w1.row(j).to_vec()).collect(),
            b1: n.b1,
            w2: n.w2,
            b2: n.b2,
        }
    }
}

impl Network {
    /// All parameters zero; the output is 0.5 everywhere.
    pub fn zeros(inputs: usize, hidden: usize) -> Result<Self> {
        if inputs == 0 || hidden == 0 {
            return Err(Error::InvalidParameter("layer widths must be >= 1".into()));
        }
        Ok(Self {
            inputs,
            hidden,
            w1: Matrix::zeros(hidden, inputs),
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        })
    }

    /// He-uniform hidden weights, Glorot-uniform output weights, zero biases.
    pub fn new(inputs: usize, hidden: usize, seed: u64) -> Result<Self> {
        let mut net = Network::zeros(inputs, hidden)?;
        let mut rng = SeededRng::new(seed);
        let a1 = (6.0 / inputs as f64).sqrt();
        let a2 = (6.0 / (hidden + 1) as f64).sqrt();
        net.w1 = Matrix::from_fn(hidden, inputs, |_, _| rng.uniform_in(-a1, a1));
        net.w2 = (0..hidden).map(|_| rng.uniform_in(-a2, a2)).collect();
        Ok(net)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn num_params(&self) -> usize {
        self.hidden * (self.inputs + 2) + 1
    }

    /// Flattened as hidden weights (row-major), hidden biases, output
    /// weights, output bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        p.extend_from_slice(self.w1.data());
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: p.len(),
            });
        }
        let (h, n) = (self.hidden, self.inputs);
        self.w1 = Matrix::new(h, n, p[..h * n].to_vec())?;
        self.b1 = p[h * n..h * n + h].to_vec();
        self.w2 = p[h * n + h..h * n + 2 * h].to_vec();
        self.b2 = p[h * n + 2 * h];
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs {
            return Err(Error::DimensionMismatch {
                expected: self.inputs,
                found: x.len(),
            });
        }
        Ok(())
    }

    fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|j| {
                self.b1[j]
                    + self
                        .w1
                        .row(j)
                        .iter()
                        .zip(x)
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
            })
            .collect()
    }

    /// Hidden activations of one input.
    pub fn hidden_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.hidden_pre(x).into_iter().map(|z| z.max(0.0)).collect())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        let h = self.hidden_values(x)?;
        Ok(sigmoid(
            self.b2 + h.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>(),
        ))
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        (0..x.rows()).map(|i| self.forward(x.row(i))).collect()
    }

    /// Mean of `(N(x_i) - y_i)^2` over `rows` and its gradient in
    /// [`Network::params`] order.
    pub fn squared_error_gradient(
        &self,
        x: &Matrix,
        y: &[f64],
        rows: &[usize],
    ) -> Result<(f64, Vec<f64>)> {
        check_pairs(x, y)?;
        let (h, n) = (self.hidden, self.inputs);
        let mut g = vec![0.0; self.num_params()];
        if rows.is_empty() {
            return Ok((0.0, g));
        }
        let scale = 1.0 / rows.len() as f64;
        let mut obj = 0.0;
        for &i in rows {
            let xi = x.row(i);
            self.check_input(xi)?;
            let z1 = self.hidden_pre(xi);
            let a: Vec<f64> = z1.iter().map(|z| z.max(0.0)).collect();
            let out = sigmoid(self.b2 + a.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>());
            let r = out - y[i];
            obj += r * r * scale;
            let d2 = 2.0 * r * out * (1.0 - out) * scale;
            for j in 0..h {
                g[h * n + h + j] += d2 * a[j];
                if z1[j] > 0.0 {
                    let d1 = d2 * self.w2[j];
                    for (gk, xk) in g[j * n..(j + 1) * n].iter_mut().zip(xi) {
                        *gk += d1 * xk;
                    }
                    g[h * n + j] += d1;
                }
            }
            g[h * n + 2 * h] += d2;
        }
        Ok((obj, g))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_pairs(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: y.len(),
        });
    }
    Ok(())
}

/// `||y - z||_2`.
pub fn loss(y: &[f64], z: &[f64]) -> f64 {
    y.iter()
        .zip(z)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Mean per-pair loss of the network over the given rows; 0 when empty.
pub fn cumulative_loss(net: &Network, x: &Matrix, y: &[f64], rows: &[usize]) -> Result<f64> {
    check_pairs(x, y)?;
    if rows.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &i in rows {
        total += loss(&[net.forward(x.row(i))?], &[y[i]]);
    }
    Ok(total / rows.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            hidden: DEFAULT_HIDDEN,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch: 32,
            max_epochs: 1000,
            patience: 50,
            train_fraction: 0.35,
            validation_fraction: 0.35,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let fractions_ok = self.train_fraction > 0.0
            && self.validation_fraction >= 0.0
            && self.train_fraction + self.validation_fraction <= 1.0;
        if !fractions_ok {
            return Err(Error::InvalidParameter(
                "split fractions must be positive and sum to <= 1".into(),
            ));
        }
        if self.batch == 0 || self.hidden == 0 {
            return Err(Error::InvalidParameter(
                "batch size and hidden width must be >= 1".into(),
            ));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidParameter("learning rate must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    pub epochs: usize,
    /// Epoch (1-based) whose parameters were kept.
    pub best_epoch: usize,
    /// Cumulative loss on the training part after each epoch.
    pub train_losses: Vec<f64>,
    pub validation_losses: Vec<f64>,
    pub test_loss: f64,
    /// Sizes of the training, validation and test parts.
    pub split: [usize; 3],
}

/// Seeded shuffle, then training / validation / test parts. The training
/// part is never empty.
pub fn split_indices(s: usize, cfg: &TrainConfig, rng: &mut SeededRng) -> [Vec<usize>; 3] {
    let mut idx: Vec<usize> = (0..s).collect();
    rng.shuffle(&mut idx);
    let a = ((cfg.train_fraction * s as f64).round() as usize).clamp(1.min(s), s);
    let b = ((cfg.validation_fraction * s as f64).round() as usize).min(s - a);
    let test = idx.split_off(a + b);
    let val = idx.split_off(a);
    [idx, val, test]
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn step(&mut self, p: &mut [f64], g: &[f64], cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for k in 0..p.len() {
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * g[k];
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
            p[k] -= cfg.learning_rate * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + cfg.adam_eps);
        }
    }
}

/// Trains `net` in place and leaves it at the parameters with the lowest
/// validation loss. With no validation rows the training loss is
/// monitored, and with no test rows the test loss is measured on the
/// validation part (or the training part).
pub fn train(net: &mut Network, x: &Matrix, y: &[f64], cfg: &TrainConfig) -> Result<TrainReport> {
    check_pairs(x, y)?;
    cfg.validate()?;
    if y.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if x.cols() != net.inputs {
        return Err(Error::DimensionMismatch {
            expected: net.inputs,
            found: x.cols(),
        });
    }
    let mut rng = SeededRng::substream(cfg.seed, 1);
    let [mut tr, va, te] = split_indices(y.len(), cfg, &mut rng);
    let monitor = if va.is_empty() {
        tr.clone()
    } else {
        va.clone()
    };
    let test = if !te.is_empty() {
        te.clone()
    } else {
        monitor.clone()
    };

    let mut params = net.params();
    let mut adam = Adam {
        m: vec![0.0; params.len()],
        v: vec![0.0; params.len()],
        t: 0,
    };
    let mut best = (cumulative_loss(net, x, y, &monitor)?, params.clone(), 0);
    let mut train_losses = Vec::new();
    let mut validation_losses = Vec::new();
    let mut epoch = 0;
    while epoch < cfg.max_epochs && epoch - best.2 < cfg.patience.max(1) {
        epoch += 1;
        rng.shuffle(&mut tr);
        for batch in tr.chunks(cfg.batch) {
            let (_, g) = net.squared_error_gradient(x, y, batch)?;
            adam.step(&mut params, &g, cfg);
            if !params.iter().all(|p| p.is_finite()) {
                return Err(Error::Diverged { epoch });
            }
            net.set_params(&params)?;
        }
        train_losses.push(cumulative_loss(net, x, y, &tr)?);
        let v = cumulative_loss(net, x, y, &monitor)?;
        validation_losses.push(v);
        if v < best.0 {
            best = (v, params.clone(), epoch);
        }
    }
    net.set_params(&best.1)?;
    Ok(TrainReport {
        seed: cfg.seed,
        epochs: epoch,
        best_epoch: best.2,
        train_losses,
        validation_losses,
        test_loss: cumulative_loss(net, x, y, &test)?,
        split: [tr.len(), va.len(), te.len()],
    })
}

/// Fresh network seeded from `cfg.seed`, then [`train`].
pub fn fit(x: &Matrix, y: &[f64], cfg: &TrainConfig) -> Result<(Network, TrainReport)> {
    if y.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let init = SeededRng::substream(cfg.seed, 0).next_u64();
    let mut net = Network::new(x.cols(), cfg.hidden, init)?;
    let report = train(&mut net, x, y, cfg)?;
    Ok((net, report))
}

pub fn fit_training_set(ts: &TrainingSet, cfg: &TrainConfig) -> Result<(Network, TrainReport)> {
    fit(&ts.x, &ts.y, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossCell {
    pub input_mu: Method,
    pub input_rho: Reduction,
    pub truth: Truth,
    /// Set for k-means outputs only.
    pub output_mu: Option<Method>,
    pub output_rho: Option<Reduction>,
    pub loss: f64,
    /// Same method on both sides of a k-means pairing.
    pub diagonal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    pub sigma: Sigma,
    pub seed: u64,
    pub cells: Vec<LossCell>,
}

impl LossTable {
    /// Input rows in grid order.
    pub fn inputs(&self) -> Vec<(Method, Reduction)> {
        let mut out: Vec<(Method, Reduction)> = Vec::new();
        for c in &self.cells {
            if !out.contains(&(c.input_mu, c.input_rho)) {
                out.push((c.input_mu, c.input_rho));
            }
        }
        out
    }

    /// Sum of k-means losses with `output_mu != input_mu` for one input.
    pub fn off_diagonal_sum(&self, mu: Method, rho: Reduction) -> f64 {
        self.cells
            .iter()
            .filter(|c| {
                c.input_mu == mu && c.input_rho == rho && c.truth == Truth::Kmeans && !c.diagonal
            })
            .map(|c| c.loss)
            .sum()
    }

    /// Fraction of input rows whose mean diagonal k-means loss is at most
    /// the mean off-diagonal k-means loss. Rows lacking either kind are
    /// skipped; `None` if none remain.
    pub fn diagonal_win_fraction(&self) -> Option<f64> {
        let mut rows = 0;
        let mut wins = 0;
        for (mu, rho) in self.inputs() {
            let row: Vec<&LossCell> = self
                .cells
                .iter()
                .filter(|c| c.input_mu == mu && c.input_rho == rho && c.truth == Truth::Kmeans)
                .collect();
            let mean = |diag: bool| {
                let v: Vec<f64> = row
                    .iter()
                    .filter(|c| c.diagonal == diag)
                    .map(|c| c.loss)
                    .collect();
                (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
            };
            if let (Some(d), Some(o)) = (mean(true), mean(false)) {
                rows += 1;
                if d <= o {
                    wins += 1;
                }
            }
        }
        (rows > 0).then(|| wins as f64 / rows as f64)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.into());
        out.write_record([
            "sigma",
            "input_mu",
            "input_rho",
            "truth",
            "output_mu",
            "output_rho",
            "loss",
            "diagonal",
        ])
        .map_err(io)?;
        for c in &self.cells {
            out.write_record([
                self.sigma.to_string(),
                c.input_mu.to_string(),
                c.input_rho.to_string(),
                c.truth.to_string(),
                c.output_mu.map(|m| m.to_string()).unwrap_or_default(),
                c.output_rho.map(|r| r.to_string()).unwrap_or_default(),
                c.loss.to_string(),
                c.diagonal.to_string(),
            ])
            .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Trains one network per (input, output) pairing of the grid: every input
/// against every k-means output and against the sentence-graph output.
/// Pairings run in parallel, each on its own seed.
pub fn evaluate_experiment(grid: &ExperimentGrid, cfg: &TrainConfig) -> Result<LossTable> {
    let mut jobs: Vec<(usize, Option<usize>)> = Vec::new();
    for i in 0..grid.cells.len() {
        jobs.extend((0..grid.cells.len()).map(|j| (i, Some(j))));
        jobs.push((i, None));
    }
    let cells = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(i, out))| {
            let input = &grid.cells[i];
            let y = match out {
                Some(j) => &grid.cells[j].kmeans_truth,
                None => &grid.graph_truth,
            };
            let mut c = cfg.clone();
            c.seed = SeededRng::substream(cfg.seed, k as u64).next_u64();
            let (_, report) = fit(&input.x, y, &c)?;
            let output = out.map(|j| &grid.cells[j]);
            Ok(LossCell {
                input_mu: input.mu,
                input_rho: input.rho,
                truth: if out.is_some() {
                    Truth::Kmeans
                } else {
                    Truth::SentenceGraph
                },
                output_mu: output.map(|o| o.mu),
                output_rho: output.map(|o| o.rho),
                loss: report.test_loss,
                diagonal: output.is_some_and(|o| o.mu == input.mu),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LossTable {
        sigma: grid.sigma,
        seed: cfg.seed,
        cells,
    })
}
