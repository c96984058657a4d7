//! The detector: one LSTM step over the 16 metrics followed by a ReLU dense
//! stack and a two-way softmax.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dense::{relu_backward, Activation, DenseLayerParams};
use super::loss::cross_entropy_logit_grad;
use super::lstm::{lstm_backward, lstm_forward, LstmCache, LstmCellParams};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::{all_finite, Scalar};

pub const INPUT_DIM: usize = 16;
pub const HIDDEN_DIM: usize = 16;
pub const DENSE_UNITS: [usize; 4] = [72, 50, 36, 28];
pub const NUM_CLASSES: usize = 2;

/// Layer widths. [`Architecture::default`] is the detector architecture; other
/// shapes exist so tests can exercise the same code on tiny networks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub dense_units: Vec<usize>,
    pub num_classes: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            input_dim: INPUT_DIM,
            hidden_dim: HIDDEN_DIM,
            dense_units: DENSE_UNITS.to_vec(),
            num_classes: NUM_CLASSES,
        }
    }
}

impl Architecture {
    /// Number of scalars in a flattened parameter vector.
    pub fn param_count(&self) -> usize {
        let gate = self.hidden_dim * (self.hidden_dim + self.input_dim) + self.hidden_dim;
        let mut total = 4 * gate;
        let mut prev = self.hidden_dim;
        for &units in self
            .dense_units
            .iter()
            .chain(std::iter::once(&self.num_classes))
        {
            total += units * prev + units;
            prev = units;
        }
        total
    }
}

/// Flat parameter vector in canonical layout: LSTM gates f, i, o, c (each
/// weights then bias), then dense layers in depth order, then the output
/// layer. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector<S>(pub Vec<S>);

impl<S: Scalar> ParamVector<S> {
    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![S::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }

    pub fn cast<T: Scalar>(&self) -> ParamVector<T> {
        ParamVector(self.0.iter().map(|v| T::of(v.to_f64_lossy())).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<S> {
    pub lstm: LstmCellParams<S>,
    pub dense: Vec<DenseLayerParams<S>>,
    pub output: DenseLayerParams<S>,
}

/// Forward intermediates needed by [`ModelParams::backward`].
#[derive(Debug, Clone)]
pub struct ModelCache<S> {
    pub lstm: LstmCache<S>,
    /// Input to each dense layer (index 0 is the LSTM output `h`).
    pub dense_inputs: Vec<Vec<S>>,
    pub dense_pre: Vec<Vec<S>>,
    /// Input to the output layer.
    pub output_input: Vec<S>,
    pub probs: Vec<S>,
}

impl<S: Scalar> ModelParams<S> {
    pub fn zeros(arch: &Architecture) -> Self {
        let mut prev = arch.hidden_dim;
        let dense = arch
            .dense_units
            .iter()
            .map(|&units| {
                let layer = DenseLayerParams::zeros(prev, units, Activation::Relu);
                prev = units;
                layer
            })
            .collect();
        ModelParams {
            lstm: LstmCellParams::zeros(arch.input_dim, arch.hidden_dim),
            dense,
            output: DenseLayerParams::zeros(prev, arch.num_classes, Activation::Softmax),
        }
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            input_dim: self.lstm.input_dim(),
            hidden_dim: self.lstm.hidden_dim(),
            dense_units: self.dense.iter().map(|d| d.out_dim()).collect(),
            num_classes: self.output.out_dim(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.tensors().map(Tensor::len).sum()
    }

    /// Checks that layer dimensions chain from the LSTM to the output.
    pub fn validate(&self) -> Result<()> {
        self.lstm.validate()?;
        let mut prev = self.lstm.hidden_dim();
        for layer in self.dense.iter().chain(std::iter::once(&self.output)) {
            layer.validate()?;
            if layer.in_dim() != prev {
                return Err(Error::structural(format!(
                    "layer expects {} inputs but previous layer emits {}",
                    layer.in_dim(),
                    prev
                )));
            }
            prev = layer.out_dim();
        }
        if self.output.activation != Activation::Softmax {
            return Err(Error::structural("output layer must be softmax"));
        }
        Ok(())
    }

    /// All parameter tensors in canonical order.
    fn tensors(&self) -> impl Iterator<Item = &Tensor<S>> {
        self.lstm
            .gates()
            .into_iter()
            .flat_map(|(w, b)| [w, b])
            .chain(
                self.dense
                    .iter()
                    .chain(std::iter::once(&self.output))
                    .flat_map(|l| [&l.weights, &l.bias]),
            )
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor<S>> {
        let mut out: Vec<&mut Tensor<S>> = Vec::with_capacity(8 + 2 * (self.dense.len() + 1));
        for (w, b) in self.lstm.gates_mut() {
            out.push(w);
            out.push(b);
        }
        for layer in self
            .dense
            .iter_mut()
            .chain(std::iter::once(&mut self.output))
        {
            out.push(&mut layer.weights);
            out.push(&mut layer.bias);
        }
        out
    }

    pub fn flatten(&self) -> ParamVector<S> {
        let mut flat = Vec::with_capacity(self.param_count());
        for t in self.tensors() {
            flat.extend_from_slice(t.values());
        }
        ParamVector(flat)
    }

    /// Inverse of [`flatten`](Self::flatten) for the given architecture.
    pub fn unflatten(arch: &Architecture, v: &ParamVector<S>) -> Result<Self> {
        let mut params = Self::zeros(arch);
        params.load_flat(v.as_slice())?;
        Ok(params)
    }

    /// Overwrites every parameter from a flat slice in canonical layout.
    pub fn load_flat(&mut self, flat: &[S]) -> Result<()> {
        let expected = self.param_count();
        if flat.len() != expected {
            return Err(Error::structural(format!(
                "parameter vector has {} values, architecture needs {}",
                flat.len(),
                expected
            )));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.values_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// Glorot-uniform weights (bound `√(6/(fan_in+fan_out))` per matrix), zero
    /// biases. Matrices are filled in canonical order from one ChaCha8 stream.
    pub fn init(arch: &Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Self::zeros(arch);
        for t in params.tensors_mut() {
            if t.shape().len() != 2 {
                continue;
            }
            let fan_out = t.rows() as f64;
            let fan_in = t.cols() as f64;
            let limit = (6.0 / (fan_in + fan_out)).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite glorot bound");
            for v in t.values_mut() {
                *v = S::of(dist.sample(&mut rng));
            }
        }
        params
    }

    /// Probability vector for one feature vector, treated as a single timestep
    /// with zero initial hidden and cell state.
    pub fn forward(&self, x: &[S]) -> Result<(Vec<S>, ModelCache<S>)> {
        let hidden = self.lstm.hidden_dim();
        if x.len() != self.lstm.input_dim() {
            return Err(Error::structural(format!(
                "expected {} features, got {}",
                self.lstm.input_dim(),
                x.len()
            )));
        }
        let zeros = vec![S::zero(); hidden];
        let (h, _c, lstm_cache) = lstm_forward(x, &zeros, &zeros, &self.lstm)?;

        let mut dense_inputs = Vec::with_capacity(self.dense.len());
        let mut dense_pre = Vec::with_capacity(self.dense.len());
        let mut a = h;
        for layer in &self.dense {
            let z = layer.pre_activation(&a);
            let next = layer.activate(&z);
            dense_inputs.push(a);
            dense_pre.push(z);
            a = next;
        }
        let logits = self.output.pre_activation(&a);
        let probs = self.output.activate(&logits);
        if !all_finite(&probs) {
            return Err(Error::numeric("non-finite model output"));
        }
        let cache = ModelCache {
            lstm: lstm_cache,
            dense_inputs,
            dense_pre,
            output_input: a,
            probs: probs.clone(),
        };
        Ok((probs, cache))
    }

    /// Accumulates the cross-entropy gradient of one sample into `grads`,
    /// scaled by `scale`.
    fn backward_one(
        &self,
        cache: &ModelCache<S>,
        label: usize,
        scale: S,
        grads: &mut ModelParams<S>,
    ) {
        let dz_out: Vec<S> = cross_entropy_logit_grad(&cache.probs, label)
            .into_iter()
            .map(|g| g * scale)
            .collect();
        let mut da = self
            .output
            .backward_pre(&cache.output_input, &dz_out, &mut grads.output);
        for (k, layer) in self.dense.iter().enumerate().rev() {
            let dz = relu_backward(&cache.dense_pre[k], &da);
            da = layer.backward_pre(&cache.dense_inputs[k], &dz, &mut grads.dense[k]);
        }
        let zeros = vec![S::zero(); self.lstm.hidden_dim()];
        lstm_backward(&cache.lstm, &self.lstm, &da, &zeros, &mut grads.lstm);
    }

    /// Gradient of the mean batch cross-entropy in canonical layout.
    pub fn backward<'a>(
        &self,
        batch: impl IntoIterator<Item = (&'a [S], usize)>,
    ) -> Result<ParamVector<S>> {
        let (grad, _) = self.loss_and_gradient(batch)?;
        Ok(grad)
    }

    /// Mean batch loss and its gradient from a single forward sweep.
    pub fn loss_and_gradient<'a>(
        &self,
        batch: impl IntoIterator<Item = (&'a [S], usize)>,
    ) -> Result<(ParamVector<S>, S)> {
        let mut caches = Vec::new();
        for (x, label) in batch {
            if label >= self.output.out_dim() {
                return Err(Error::structural(format!("label {label} outside {{0, 1}}")));
            }
            let (_, cache) = self.forward(x)?;
            caches.push((cache, label));
        }
        if caches.is_empty() {
            return Err(Error::structural("backward over an empty batch"));
        }
        let scale = S::one() / S::of(caches.len() as f64);
        let mut grads = ModelParams::zeros(&self.architecture());
        let mut loss = S::zero();
        for (cache, label) in &caches {
            loss += super::loss::cross_entropy(&cache.probs, *label)?;
            self.backward_one(cache, *label, scale, &mut grads);
        }
        let flat = grads.flatten();
        if !all_finite(flat.as_slice()) {
            return Err(Error::numeric("non-finite gradient"));
        }
        Ok((flat, loss * scale))
    }

    /// Predicted probability of the positive class.
    pub fn predict_proba(&self, x: &[S]) -> Result<S> {
        Ok(self.forward(x)?.0[1])
    }

    pub fn cast<T: Scalar>(&self) -> ModelParams<T> {
        ModelParams::unflatten(&self.architecture(), &self.flatten().cast())
            .expect("same architecture")
    }
}

/// Argmax over class probabilities; ties resolve to the lowest index (class 0).
pub fn argmax<S: Scalar>(probs: &[S]) -> usize {
    let mut best = 0;
    for (k, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = k;
        }
    }
    best
}
