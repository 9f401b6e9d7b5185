//! Fully connected feedforward network trained with minibatch Adam.
//!
//! Hidden layers use `tanh`, the output layer is linear. Inputs and targets are
//! min-max scaled to `[-1, 1]` with statistics fitted on the training split;
//! the loss and its gradients live in that normalized space.
//!
//! Parameters are stored in one flat vector, layer by layer, each layer as a
//! row-major `(fan_out, fan_in)` weight block followed by its biases. Gradients
//! use the same layout, which keeps the optimizer and the finite-difference
//! checks trivial.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evaluation::normalized_rmse;
use crate::rng::{stream, SeededStream};
use crate::synthgen::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Tanh => f.write_str("tanh"),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::parse(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
    pub init_seed: u64,
}

impl NetworkSpec {
    pub fn new(input_dim: usize, hidden: Vec<usize>, output_dim: usize, init_seed: u64) -> Result<Self> {
        let spec = NetworkSpec {
            input_dim,
            hidden,
            output_dim,
            activation: Activation::Tanh,
            init_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_widths().contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "layer widths must be at least 1, got {:?}",
                self.layer_widths()
            )));
        }
        Ok(())
    }

    /// Parses a hidden-layer list such as `"9, 15, 9"`. An empty or blank
    /// string means no hidden layer.
    pub fn parse_hidden(s: &str) -> Result<Vec<usize>> {
        if s.trim().is_empty() {
            return Ok(Vec::new());
        }
        s.split(',')
            .map(|tok| {
                let tok = tok.trim();
                match tok.parse::<usize>() {
                    Ok(0) => Err(Error::InvalidArgument(format!(
                        "hidden layer width must be at least 1 in `{s}`"
                    ))),
                    Ok(w) => Ok(w),
                    Err(_) => Err(Error::parse(format!(
                        "bad hidden layer width `{tok}` in `{s}`"
                    ))),
                }
            })
            .collect()
    }

    /// Hidden widths joined by commas, e.g. `9,15,9`.
    pub fn hidden_string(&self) -> String {
        self.hidden
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// `[input, hidden.., output]`.
    pub fn layer_widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden.len() + 2);
        w.push(self.input_dim);
        w.extend_from_slice(&self.hidden);
        w.push(self.output_dim);
        w
    }

    pub fn param_count(&self) -> usize {
        self.layer_widths()
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-[{}]-{}", self.input_dim, self.hidden_string(), self.output_dim)
    }
}

/// Per-column min-max scaling onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Normalizer {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::dim("normalizer columns", min.len(), max.len()));
        }
        for (i, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite(format!("normalizer column {i}")));
            }
            if lo >= hi {
                return Err(Error::InvalidArgument(format!(
                    "normalizer column {i} needs max > min, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Normalizer { min, max })
    }

    /// Fits column extremes of a row-major matrix. A constant column `c`
    /// gets the interval `c ± max(|c|, 1)`.
    pub fn fit(rows: &[f64], dim: usize) -> Result<Self> {
        if dim == 0 || rows.is_empty() || !rows.len().is_multiple_of(dim) {
            return Err(Error::Empty("cannot fit normalization on no rows".into()));
        }
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for row in rows.chunks(dim) {
            for j in 0..dim {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        for j in 0..dim {
            if min[j] == max[j] {
                let c = min[j];
                let half = c.abs().max(1.0);
                min[j] = c - half;
                max[j] = c + half;
            }
        }
        Normalizer::new(min, max)
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn normalize_into(&self, x: &[f64], out: &mut [f64]) {
        for j in 0..self.min.len() {
            out[j] = 2.0 * (x[j] - self.min[j]) / (self.max[j] - self.min[j]) - 1.0;
        }
    }

    pub fn denormalize_into(&self, y: &[f64], out: &mut [f64]) {
        for j in 0..self.min.len() {
            out[j] = self.min[j] + (y[j] + 1.0) * (self.max[j] - self.min[j]) / 2.0;
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.normalize_into(x, &mut out);
        out
    }

    pub fn denormalize(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        self.denormalize_into(y, &mut out);
        out
    }

    /// Normalizes every row of a row-major matrix.
    pub fn normalize_rows(&self, rows: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; rows.len()];
        for (src, dst) in rows.chunks(d).zip(out.chunks_mut(d)) {
            self.normalize_into(src, dst);
        }
        out
    }
}

/// Seeds and dataset fingerprint of a training run, stored with the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingProvenance {
    pub shuffle_seed: u64,
    pub dataset_digest: String,
    pub config: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerLayout {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    biases: usize,
}

fn layout_for(spec: &NetworkSpec) -> Vec<LayerLayout> {
    let mut offset = 0;
    spec.layer_widths()
        .windows(2)
        .map(|w| {
            let l = LayerLayout {
                fan_in: w[0],
                fan_out: w[1],
                weights: offset,
                biases: offset + w[0] * w[1],
            };
            offset += w[0] * w[1] + w[1];
            l
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    params: Vec<f64>,
    layout: Vec<LayerLayout>,
    input_norm: Option<Normalizer>,
    output_norm: Option<Normalizer>,
    pub provenance: Option<TrainingProvenance>,
}

/// Glorot-uniform weights, zero biases, no normalization statistics yet.
pub fn init_network(spec: &NetworkSpec) -> Result<Network> {
    spec.validate()?;
    let layout = layout_for(spec);
    let mut params = vec![0.0; spec.param_count()];
    let mut rng = SeededStream::new(spec.init_seed, stream::INIT);
    for l in &layout {
        let bound = (6.0 / (l.fan_in + l.fan_out) as f64).sqrt();
        for w in &mut params[l.weights..l.biases] {
            *w = rng.uniform(-bound, bound);
        }
    }
    Ok(Network {
        spec: spec.clone(),
        params,
        layout,
        input_norm: None,
        output_norm: None,
        provenance: None,
    })
}

/// Per-sample activations reused across forward/backward passes.
#[derive(Debug, Clone)]
pub struct Scratch {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Scratch {
    pub fn new(spec: &NetworkSpec) -> Self {
        let widths = spec.layer_widths();
        let widest = widths.iter().copied().max().unwrap_or(1);
        Scratch {
            acts: widths.iter().map(|&w| vec![0.0; w]).collect(),
            delta: vec![0.0; widest],
            delta_prev: vec![0.0; widest],
        }
    }
}

impl Network {
    /// Builds a network from explicit `(weights, biases)` per layer, weights
    /// row-major `(fan_out, fan_in)`.
    pub fn from_parts(
        spec: NetworkSpec,
        layers: Vec<(Vec<f64>, Vec<f64>)>,
        input_norm: Option<Normalizer>,
        output_norm: Option<Normalizer>,
    ) -> Result<Self> {
        spec.validate()?;
        let layout = layout_for(&spec);
        if layers.len() != layout.len() {
            return Err(Error::dim("layer count", layout.len(), layers.len()));
        }
        let mut params = Vec::with_capacity(spec.param_count());
        for (i, ((w, b), l)) in layers.into_iter().zip(&layout).enumerate() {
            if w.len() != l.fan_in * l.fan_out {
                return Err(Error::dim(format!("layer {i} weights"), l.fan_in * l.fan_out, w.len()));
            }
            if b.len() != l.fan_out {
                return Err(Error::dim(format!("layer {i} biases"), l.fan_out, b.len()));
            }
            params.extend(w);
            params.extend(b);
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameters".into()));
        }
        for (norm, dim, what) in [
            (&input_norm, spec.input_dim, "input normalizer"),
            (&output_norm, spec.output_dim, "output normalizer"),
        ] {
            if let Some(n) = norm {
                if n.dim() != dim {
                    return Err(Error::dim(what, dim, n.dim()));
                }
            }
        }
        Ok(Network {
            spec,
            params,
            layout,
            input_norm,
            output_norm,
            provenance: None,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_layers(&self) -> usize {
        self.layout.len()
    }

    pub fn layer_weights(&self, layer: usize) -> &[f64] {
        let l = self.layout[layer];
        &self.params[l.weights..l.biases]
    }

    pub fn layer_biases(&self, layer: usize) -> &[f64] {
        let l = self.layout[layer];
        &self.params[l.biases..l.biases + l.fan_out]
    }

    pub fn layer_shape(&self, layer: usize) -> (usize, usize) {
        let l = self.layout[layer];
        (l.fan_out, l.fan_in)
    }

    pub fn input_norm(&self) -> Option<&Normalizer> {
        self.input_norm.as_ref()
    }

    pub fn output_norm(&self) -> Option<&Normalizer> {
        self.output_norm.as_ref()
    }

    pub fn set_normalization(&mut self, input: Normalizer, output: Normalizer) -> Result<()> {
        if input.dim() != self.spec.input_dim {
            return Err(Error::dim("input normalizer", self.spec.input_dim, input.dim()));
        }
        if output.dim() != self.spec.output_dim {
            return Err(Error::dim("output normalizer", self.spec.output_dim, output.dim()));
        }
        self.input_norm = Some(input);
        self.output_norm = Some(output);
        Ok(())
    }

    pub fn is_trained(&self) -> bool {
        self.input_norm.is_some() && self.output_norm.is_some()
    }

    fn norms(&self) -> Result<(&Normalizer, &Normalizer)> {
        match (&self.input_norm, &self.output_norm) {
            (Some(i), Some(o)) => Ok((i, o)),
            _ => Err(Error::Untrained),
        }
    }

    /// Forward pass in normalized space; result left in the last activation.
    fn forward_scratch<'s>(&self, x: &[f64], s: &'s mut Scratch) -> &'s [f64] {
        s.acts[0].copy_from_slice(x);
        let last = self.layout.len() - 1;
        for (k, l) in self.layout.iter().enumerate() {
            let (prev, rest) = s.acts.split_at_mut(k + 1);
            let input = &prev[k];
            let out = &mut rest[0];
            let w = &self.params[l.weights..l.biases];
            let b = &self.params[l.biases..l.biases + l.fan_out];
            for (o, (row, bias)) in out.iter_mut().zip(w.chunks_exact(l.fan_in).zip(b)) {
                let z = row.iter().zip(input.iter()).fold(*bias, |acc, (wi, xi)| acc + wi * xi);
                *o = if k == last { z } else { z.tanh() };
            }
        }
        &s.acts[last + 1]
    }

    /// Network map on already-normalized inputs, returning normalized outputs.
    pub fn forward_normalized(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.spec.input_dim {
            return Err(Error::dim("network input", self.spec.input_dim, x.len()));
        }
        let mut s = Scratch::new(&self.spec);
        Ok(self.forward_scratch(x, &mut s).to_vec())
    }

    /// Physical-units prediction for one input row.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.spec.input_dim {
            return Err(Error::dim("network input", self.spec.input_dim, x.len()));
        }
        let mut s = Scratch::new(&self.spec);
        let mut out = vec![0.0; self.spec.output_dim];
        self.forward_into(x, &mut s, &mut out)?;
        Ok(out)
    }

    fn forward_into(&self, x: &[f64], s: &mut Scratch, out: &mut [f64]) -> Result<()> {
        let (inorm, onorm) = self.norms()?;
        let mut xn = vec![0.0; x.len()];
        inorm.normalize_into(x, &mut xn);
        let y = self.forward_scratch(&xn, s);
        onorm.denormalize_into(y, out);
        Ok(())
    }

    /// Row-wise prediction of a row-major input matrix.
    pub fn predict_batch(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let d = self.spec.input_dim;
        if !inputs.len().is_multiple_of(d) {
            return Err(Error::dim("batch input columns", d, inputs.len() % d));
        }
        let (inorm, onorm) = self.norms()?;
        let k = self.spec.output_dim;
        let rows = inputs.len() / d;
        let mut out = vec![0.0; rows * k];
        let mut s = Scratch::new(&self.spec);
        let mut xn = vec![0.0; d];
        for (x, y) in inputs.chunks_exact(d).zip(out.chunks_exact_mut(k)) {
            inorm.normalize_into(x, &mut xn);
            let yn = self.forward_scratch(&xn, &mut s);
            onorm.denormalize_into(yn, y);
        }
        Ok(out)
    }

    /// Predictions for every row of a dataset, checked against its columns.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.input_dim() != self.spec.input_dim {
            return Err(Error::dim("dataset input columns", self.spec.input_dim, data.input_dim()));
        }
        self.predict_batch(data.inputs())
    }

    /// Adds `scale · ∂loss/∂θ` for one normalized sample into `grad` and
    /// returns that sample's loss.
    fn accumulate(&self, x: &[f64], t: &[f64], scale: f64, s: &mut Scratch, grad: &mut [f64]) -> f64 {
        self.forward_scratch(x, s);
        let n_layers = self.layout.len();
        let k = self.spec.output_dim;
        let out = &s.acts[n_layers];
        let mut loss = 0.0;
        for j in 0..k {
            let e = out[j] - t[j];
            loss += e * e;
            s.delta[j] = 2.0 * e / k as f64 * scale;
        }
        loss /= k as f64;

        for (idx, l) in self.layout.iter().enumerate().rev() {
            let input = &s.acts[idx];
            let delta = &s.delta[..l.fan_out];
            let gw = &mut grad[l.weights..l.biases];
            for (row, &d) in gw.chunks_exact_mut(l.fan_in).zip(delta) {
                for (g, &a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            for (g, &d) in grad[l.biases..l.biases + l.fan_out].iter_mut().zip(delta) {
                *g += d;
            }
            if idx > 0 {
                let w = &self.params[l.weights..l.biases];
                let prev = &mut s.delta_prev[..l.fan_in];
                prev.iter_mut().for_each(|p| *p = 0.0);
                for (row, &d) in w.chunks_exact(l.fan_in).zip(delta) {
                    for (p, &wi) in prev.iter_mut().zip(row) {
                        *p += wi * d;
                    }
                }
                for (p, &a) in prev.iter_mut().zip(input) {
                    *p *= 1.0 - a * a;
                }
                std::mem::swap(&mut s.delta, &mut s.delta_prev);
            }
        }
        loss
    }

    /// Exact gradients of the batch-mean [`loss_mse`] with respect to every
    /// parameter, on normalized row-major `inputs`/`targets`.
    pub fn gradients(&self, inputs: &[f64], targets: &[f64]) -> Result<Gradients> {
        let (d, k) = (self.spec.input_dim, self.spec.output_dim);
        if inputs.is_empty() {
            return Err(Error::Empty("gradient batch".into()));
        }
        if !inputs.len().is_multiple_of(d) {
            return Err(Error::dim("batch input columns", d, inputs.len() % d));
        }
        let rows = inputs.len() / d;
        if targets.len() != rows * k {
            return Err(Error::dim("batch targets", rows * k, targets.len()));
        }
        let mut s = Scratch::new(&self.spec);
        let mut grad = vec![0.0; self.params.len()];
        let scale = 1.0 / rows as f64;
        let mut loss = 0.0;
        for (x, t) in inputs.chunks_exact(d).zip(targets.chunks_exact(k)) {
            loss += self.accumulate(x, t, scale, &mut s, &mut grad);
        }
        Ok(Gradients {
            loss: loss * scale,
            values: grad,
        })
    }

    /// Batch-mean normalized-space loss, without gradients.
    pub fn batch_loss(&self, inputs: &[f64], targets: &[f64]) -> Result<f64> {
        let (d, k) = (self.spec.input_dim, self.spec.output_dim);
        if !inputs.len().is_multiple_of(d) || targets.len() != inputs.len() / d * k {
            return Err(Error::dim("batch targets", inputs.len() / d * k, targets.len()));
        }
        if inputs.is_empty() {
            return Err(Error::Empty("loss batch".into()));
        }
        let mut s = Scratch::new(&self.spec);
        let mut total = 0.0;
        for (x, t) in inputs.chunks_exact(d).zip(targets.chunks_exact(k)) {
            total += loss_mse(self.forward_scratch(x, &mut s), t)?;
        }
        Ok(total / (inputs.len() / d) as f64)
    }
}

/// Gradient set laid out like [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub values: Vec<f64>,
}

/// Mean squared componentwise difference.
pub fn loss_mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::dim("loss operands", target.len(), pred.len()));
    }
    if pred.is_empty() {
        return Err(Error::Empty("loss operands".into()));
    }
    let sum: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub val_fraction: f64,
    pub patience: usize,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            batch_size: 128,
            learning_rate: 1e-3,
            optimizer: Optimizer::default(),
            val_fraction: 0.1,
            patience: 20,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return bad(format!("val_fraction must lie in (0, 1), got {}", self.val_fraction));
        }
        if self.patience == 0 {
            return bad("patience must be at least 1".into());
        }
        let Optimizer::Adam { beta1, beta2, eps } = self.optimizer;
        if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0) {
            return bad(format!("invalid Adam parameters ({beta1}, {beta2}, {eps})"));
        }
        Ok(())
    }

    /// Single-line `key=value;...` rendering stored in model provenance.
    pub fn summary(&self) -> String {
        let Optimizer::Adam { beta1, beta2, eps } = self.optimizer;
        format!(
            "epochs={};batch_size={};learning_rate={:?};adam={:?}/{:?}/{:?};val_fraction={:?};patience={};shuffle_seed={}",
            self.epochs,
            self.batch_size,
            self.learning_rate,
            beta1,
            beta2,
            eps,
            self.val_fraction,
            self.patience,
            self.shuffle_seed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training loss per epoch; entry `e-1` belongs to epoch `e`.
    pub train_loss: Vec<f64>,
    /// Validation loss; entry 0 is the initial network, entry `e` epoch `e`.
    pub val_loss: Vec<f64>,
    /// Epoch whose parameters were kept (0 means the initial parameters).
    pub best_epoch: usize,
    pub stopped_early: bool,
    /// Normalized RMSE per target on the validation split, physical units.
    pub val_epsilon: Vec<f64>,
    pub train_rows: usize,
    pub val_rows: usize,
}

impl TrainReport {
    pub fn best_val_loss(&self) -> f64 {
        self.val_loss[self.best_epoch]
    }

    pub fn epochs_run(&self) -> usize {
        self.train_loss.len()
    }

    /// `epoch,train_loss,val_loss`; epoch 0 has no training loss.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for (e, v) in self.val_loss.iter().enumerate() {
            let t = if e == 0 {
                String::new()
            } else {
                format!("{:?}", self.train_loss[e - 1])
            };
            out.push_str(&format!("{e},{t},{v:?}\n"));
        }
        out
    }
}

/// Deterministic train/validation split: row indices `(train, validation)`.
pub fn split_indices(n: usize, val_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_val = ((n as f64 * val_fraction).round() as usize).max(1);
    if n_val >= n {
        return Err(Error::InvalidArgument(format!(
            "{n} rows cannot be split into non-empty train and validation sets"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    SeededStream::new(seed, stream::SPLIT).shuffle(&mut idx);
    let val = idx.split_off(n - n_val);
    Ok((idx, val))
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    beta1: f64,
    beta2: f64,
    eps: f64,
    lr: f64,
}

impl Adam {
    fn new(n: usize, cfg: &TrainConfig) -> Self {
        let Optimizer::Adam { beta1, beta2, eps } = cfg.optimizer;
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1,
            beta2,
            eps,
            lr: cfg.learning_rate,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Trains `net` on `data` and returns the best-validation network.
///
/// Normalization is fitted on the training split only. Training stops after
/// `cfg.epochs` or after `cfg.patience` epochs without a validation
/// improvement, whichever comes first. A non-finite loss aborts with
/// [`Error::Diverged`].
pub fn train(net: &Network, data: &Dataset, cfg: &TrainConfig) -> Result<(Network, TrainReport)> {
    cfg.validate()?;
    let spec = net.spec().clone();
    if data.is_empty() {
        return Err(Error::Empty("training dataset".into()));
    }
    if data.input_dim() != spec.input_dim {
        return Err(Error::dim("training inputs", spec.input_dim, data.input_dim()));
    }
    if data.target_dim() != spec.output_dim {
        return Err(Error::dim("training targets", spec.output_dim, data.target_dim()));
    }
    let (train_idx, val_idx) = split_indices(data.len(), cfg.val_fraction, cfg.shuffle_seed)?;
    let train_set = data.select(&train_idx);
    let val_set = data.select(&val_idx);

    let input_norm = Normalizer::fit(train_set.inputs(), spec.input_dim)?;
    let output_norm = Normalizer::fit(train_set.targets(), spec.output_dim)?;
    let xs = input_norm.normalize_rows(train_set.inputs());
    let ys = output_norm.normalize_rows(train_set.targets());
    let val_xs = input_norm.normalize_rows(val_set.inputs());
    let val_ys = output_norm.normalize_rows(val_set.targets());

    let mut current = net.clone();
    current.set_normalization(input_norm, output_norm)?;
    current.provenance = Some(TrainingProvenance {
        shuffle_seed: cfg.shuffle_seed,
        dataset_digest: crate::persistence::dataset_digest(data),
        config: cfg.summary(),
    });

    let (d, k) = (spec.input_dim, spec.output_dim);
    let n_train = train_set.len();
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut shuffler = SeededStream::new(cfg.shuffle_seed, stream::SHUFFLE);
    let mut adam = Adam::new(current.params.len(), cfg);
    let mut scratch = Scratch::new(&spec);
    let mut grad = vec![0.0; current.params.len()];

    let initial = current.batch_loss(&val_xs, &val_ys)?;
    if !initial.is_finite() {
        return Err(Error::Diverged { epoch: 0, loss: initial });
    }
    let mut report = TrainReport {
        train_loss: Vec::new(),
        val_loss: vec![initial],
        best_epoch: 0,
        stopped_early: false,
        val_epsilon: Vec::new(),
        train_rows: n_train,
        val_rows: val_set.len(),
    };
    let mut best_params = current.params.clone();
    let mut best_loss = initial;
    let mut stale = 0;

    for epoch in 1..=cfg.epochs {
        shuffler.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &r in batch {
                let x = &xs[r * d..(r + 1) * d];
                let t = &ys[r * k..(r + 1) * k];
                epoch_loss += current.accumulate(x, t, scale, &mut scratch, &mut grad);
            }
            adam.step(&mut current.params, &grad);
        }
        let train_loss = epoch_loss / n_train as f64;
        let val_loss = current.batch_loss(&val_xs, &val_ys)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            let loss = if train_loss.is_finite() { val_loss } else { train_loss };
            return Err(Error::Diverged { epoch, loss });
        }
        report.train_loss.push(train_loss);
        report.val_loss.push(val_loss);
        if val_loss < best_loss {
            best_loss = val_loss;
            best_params.copy_from_slice(&current.params);
            report.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                report.stopped_early = epoch < cfg.epochs;
                break;
            }
        }
    }

    current.params = best_params;
    let pred = current.predict_dataset(&val_set)?;
    report.val_epsilon = (0..k)
        .map(|j| {
            let p: Vec<f64> = pred.chunks_exact(k).map(|r| r[j]).collect();
            normalized_rmse(&p, &val_set.target_column(j))
        })
        .collect::<Result<_>>()?;
    Ok((current, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::Provenance;

    fn tiny_trained(hidden: Vec<usize>, seed: u64) -> Network {
        let spec = NetworkSpec::new(2, hidden, 2, seed).unwrap();
        let mut net = init_network(&spec).unwrap();
        net.set_normalization(
            Normalizer::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap(),
            Normalizer::new(vec![10.0, 0.0], vec![20.0, 4.0]).unwrap(),
        )
        .unwrap();
        net
    }

    #[test]
    fn parse_hidden_lists() {
        assert_eq!(NetworkSpec::parse_hidden("9, 15, 9").unwrap(), vec![9, 15, 9]);
        assert_eq!(
            NetworkSpec::parse_hidden("7, 15, 21, 15, 7").unwrap(),
            vec![7, 15, 21, 15, 7]
        );
        assert_eq!(NetworkSpec::parse_hidden("5").unwrap(), vec![5]);
        assert_eq!(NetworkSpec::parse_hidden("").unwrap(), Vec::<usize>::new());
        assert!(NetworkSpec::parse_hidden("9,,9").is_err());
        assert!(NetworkSpec::parse_hidden("9,0,9").is_err());
        assert!(NetworkSpec::parse_hidden("a").is_err());
    }

    #[test]
    fn parameter_count_and_layout() {
        let spec = NetworkSpec::new(3, vec![9, 15, 9], 1, 0).unwrap();
        assert_eq!(spec.param_count(), 340);
        let net = init_network(&spec).unwrap();
        assert_eq!(net.params().len(), 340);
        assert_eq!(net.num_layers(), 4);
        assert_eq!(net.layer_shape(1), (15, 9));
        assert!(net.layer_biases(2).iter().all(|&b| b == 0.0));
        let bound = (6.0f64 / 24.0).sqrt();
        assert!(net.layer_weights(1).iter().all(|w| w.abs() <= bound));
        assert!(NetworkSpec::new(3, vec![4, 0], 1, 0).is_err());
        assert!(NetworkSpec::new(0, vec![], 1, 0).is_err());
    }

    #[test]
    fn init_is_deterministic() {
        let spec = NetworkSpec::new(3, vec![5, 7, 5], 1, 42).unwrap();
        assert_eq!(init_network(&spec).unwrap(), init_network(&spec).unwrap());
        let other = NetworkSpec { init_seed: 43, ..spec.clone() };
        assert_ne!(init_network(&other).unwrap().params(), init_network(&spec).unwrap().params());
    }

    #[test]
    fn no_hidden_layer_is_affine() {
        let spec = NetworkSpec::new(2, vec![], 1, 0).unwrap();
        let net = Network::from_parts(spec, vec![(vec![1.0, 1.0], vec![0.0])], None, None).unwrap();
        assert_eq!(net.forward_normalized(&[0.25, 0.5]).unwrap(), vec![0.75]);
        assert_eq!(net.forward_normalized(&[-1.0, 0.5]).unwrap(), vec![-0.5]);
    }

    #[test]
    fn zero_weights_give_range_midpoint() {
        let mut net = tiny_trained(vec![3], 1);
        net.params_mut().iter_mut().for_each(|p| *p = 0.0);
        assert_eq!(net.forward(&[0.3, 0.2]).unwrap(), vec![15.0, 2.0]);
    }

    #[test]
    fn forward_errors() {
        let net = init_network(&NetworkSpec::new(2, vec![3], 1, 0).unwrap()).unwrap();
        assert!(matches!(net.forward(&[0.0, 0.0]), Err(Error::Untrained)));
        let net = tiny_trained(vec![3], 0);
        assert!(matches!(net.forward(&[0.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn predict_batch_contract() {
        let net = tiny_trained(vec![4], 3);
        assert!(net.predict_batch(&[]).unwrap().is_empty());
        let row = [0.4, -0.3];
        assert_eq!(net.predict_batch(&row).unwrap(), net.forward(&row).unwrap());
        let dup: Vec<f64> = row.iter().copied().cycle().take(10).collect();
        let out = net.predict_batch(&dup).unwrap();
        assert!(out.chunks(2).all(|r| r == &out[..2]));
        assert!(net.predict_batch(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn loss_examples() {
        assert_eq!(loss_mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(loss_mse(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(loss_mse(&[0.0, 0.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert!(loss_mse(&[0.0], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn zero_error_batch_has_zero_gradient() {
        let net = tiny_trained(vec![3, 2], 5);
        let xs = [0.1, 0.2, -0.5, 0.7];
        let ys: Vec<f64> = xs
            .chunks(2)
            .flat_map(|x| net.forward_normalized(x).unwrap())
            .collect();
        let g = net.gradients(&xs, &ys).unwrap();
        assert_eq!(g.loss, 0.0);
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_net_gradient_closed_form() {
        let spec = NetworkSpec::new(3, vec![], 1, 0).unwrap();
        let w = vec![0.5, -0.25, 2.0];
        let net = Network::from_parts(spec, vec![(w.clone(), vec![0.1])], None, None).unwrap();
        let x = [0.3, -0.6, 0.2];
        let t = [0.7];
        let pred = 0.1 + w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        let g = net.gradients(&x, &t).unwrap();
        for j in 0..3 {
            assert!((g.values[j] - 2.0 * (pred - t[0]) * x[j]).abs() < 1e-15);
        }
        assert!((g.values[3] - 2.0 * (pred - t[0])).abs() < 1e-15);
    }

    #[test]
    fn gradient_errors() {
        let net = tiny_trained(vec![2], 0);
        assert!(net.gradients(&[], &[]).is_err());
        assert!(net.gradients(&[0.0, 0.0], &[0.0]).is_err());
        assert!(net.gradients(&[0.0, 0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn normalizer_round_trip_and_constants() {
        let n = Normalizer::fit(&[1.0, 5.0, 3.0, 5.0, 2.0, 5.0], 2).unwrap();
        assert_eq!(n.min(), &[1.0, 0.0]);
        assert_eq!(n.max(), &[3.0, 10.0]);
        assert_eq!(n.normalize(&[1.0, 5.0]), vec![-1.0, 0.0]);
        let x = [2.345, 7.5];
        let back = n.denormalize(&n.normalize(&x));
        assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
        assert!(Normalizer::new(vec![1.0], vec![1.0]).is_err());
        assert!(Normalizer::fit(&[], 2).is_err());
    }

    #[test]
    fn split_is_disjoint_and_complete() {
        let (tr, va) = split_indices(1000, 0.1, 3).unwrap();
        assert_eq!(va.len(), 100);
        let mut all: Vec<usize> = tr.iter().chain(&va).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        assert!(split_indices(1, 0.5, 0).is_err());
    }

    #[test]
    fn train_config_validation() {
        let ok = TrainConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            TrainConfig { val_fraction: 0.0, ..ok.clone() },
            TrainConfig { val_fraction: 1.0, ..ok.clone() },
            TrainConfig { batch_size: 0, ..ok.clone() },
            TrainConfig { patience: 0, ..ok.clone() },
            TrainConfig { learning_rate: -1.0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn train_rejects_bad_data() {
        let net = init_network(&NetworkSpec::new(2, vec![3], 1, 0).unwrap()).unwrap();
        let empty = Dataset::new(&["a", "b"], &["y"], Provenance::ExternalCsv);
        assert!(matches!(train(&net, &empty, &TrainConfig::default()), Err(Error::Empty(_))));
        let mut wide = Dataset::new(&["a", "b", "c"], &["y"], Provenance::ExternalCsv);
        wide.push_row(&[1.0, 2.0, 3.0], &[1.0]).unwrap();
        assert!(matches!(
            train(&net, &wide, &TrainConfig::default()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn huge_learning_rate_reports_divergence() {
        let net = init_network(&NetworkSpec::new(1, vec![], 1, 0).unwrap()).unwrap();
        let mut ds = Dataset::new(&["x"], &["y"], Provenance::ExternalCsv);
        for i in 0..64 {
            let x = i as f64 / 64.0;
            ds.push_row(&[x], &[3.0 * x]).unwrap();
        }
        let cfg = TrainConfig {
            learning_rate: 1e308,
            epochs: 5,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&net, &ds, &cfg), Err(Error::Diverged { .. })));
    }
}
