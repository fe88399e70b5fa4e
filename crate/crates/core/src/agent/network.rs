//! Fully connected Q-value network: rectifier hidden layers, linear output.
//!
//! Weights are stored input-major (`w[i * outputs + o]`) so the inner loops
//! of the batched passes run over contiguous outputs. Everything is `f64` and
//! plain loops; no fused multiply-add, so results are bit-reproducible across
//! hosts.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs).map(|_| rng.gen_range(-limit..=limit)).collect();
        Self {
            inputs,
            outputs,
            weights,
            bias: vec![0.0; outputs],
        }
    }

    #[inline]
    pub fn weight(&self, input: usize, output: usize) -> f64 {
        self.weights[input * self.outputs + output]
    }

    #[inline]
    pub fn weight_mut(&mut self, input: usize, output: usize) -> &mut f64 {
        &mut self.weights[input * self.outputs + output]
    }

    fn forward_into(&self, x: &[f64], batch: usize, out: &mut Vec<f64>, relu: bool) {
        let (ni, no) = (self.inputs, self.outputs);
        out.clear();
        out.resize(batch * no, 0.0);
        for b in 0..batch {
            let row = &mut out[b * no..(b + 1) * no];
            row.copy_from_slice(&self.bias);
            for (i, &xi) in x[b * ni..(b + 1) * ni].iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let w = &self.weights[i * no..(i + 1) * no];
                for (r, &wv) in row.iter_mut().zip(w) {
                    *r += xi * wv;
                }
            }
            if relu {
                for r in row.iter_mut() {
                    if *r < 0.0 {
                        *r = 0.0;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<Dense>,
}

impl Gradient {
    /// Flattened in the same order as [`QNetwork::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layers: Vec<Dense>,
}

impl QNetwork {
    /// `sizes` = `[input, hidden.., output]`.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(Self {
            layers: sizes.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect(),
        })
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(Self {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.inputs == 0 || l.outputs == 0 {
                return Err(Error::Shape(format!("layer {k} has a zero dimension")));
            }
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::Shape(format!("layer {k} buffers do not match {}x{}", l.inputs, l.outputs)));
            }
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::Shape(format!(
                    "layer {k} emits {} values but layer {} takes {}",
                    pair[0].outputs,
                    k + 1,
                    pair[1].inputs
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "state has {} entries, network expects {}",
                state.len(),
                self.input_dim()
            )));
        }
        Ok(self.forward_batch(state, 1))
    }

    /// Outputs for `batch` row-major inputs.
    pub fn forward_batch(&self, x: &[f64], batch: usize) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.forward_into(&cur, batch, &mut next, k != last);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Forward pass that keeps every layer's input for backpropagation.
    /// `acts[0]` is the input, `acts[k + 1]` the (post-activation) output of
    /// layer `k`.
    pub(crate) fn forward_trace(&self, x: &[f64], batch: usize) -> Vec<Vec<f64>> {
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.forward_into(&acts[k], batch, &mut out, k != last);
            acts.push(out);
        }
        acts
    }

    /// Backpropagates `d_out` (gradient of the loss w.r.t. the network
    /// outputs, `batch x output_dim`) through activations recorded by
    /// [`QNetwork::forward_trace`].
    pub(crate) fn backward(&self, acts: &[Vec<f64>], mut d_out: Vec<f64>, batch: usize) -> Gradient {
        let mut grads: Vec<Dense> = self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let (ni, no) = (layer.inputs, layer.outputs);
            let input = &acts[k];
            let g = &mut grads[k];
            for b in 0..batch {
                let dy = &d_out[b * no..(b + 1) * no];
                for (gb, &d) in g.bias.iter_mut().zip(dy) {
                    *gb += d;
                }
                for (i, &xi) in input[b * ni..(b + 1) * ni].iter().enumerate() {
                    if xi == 0.0 {
                        continue;
                    }
                    for (gw, &d) in g.weights[i * no..(i + 1) * no].iter_mut().zip(dy) {
                        *gw += xi * d;
                    }
                }
            }
            if k == 0 {
                break;
            }
            // Gradient w.r.t. this layer's input, masked by the rectifier of
            // the layer below (its output is zero exactly where inactive).
            // Output-major weights keep the inner loop contiguous.
            let mut wt = vec![0.0; ni * no];
            for i in 0..ni {
                for j in 0..no {
                    wt[j * ni + i] = layer.weights[i * no + j];
                }
            }
            let mut d_in = vec![0.0; batch * ni];
            for b in 0..batch {
                let dst = &mut d_in[b * ni..(b + 1) * ni];
                for (j, &d) in d_out[b * no..(b + 1) * no].iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (r, &wv) in dst.iter_mut().zip(&wt[j * ni..(j + 1) * ni]) {
                        *r += wv * d;
                    }
                }
                for (r, &x) in dst.iter_mut().zip(&input[b * ni..(b + 1) * ni]) {
                    if x <= 0.0 {
                        *r = 0.0;
                    }
                }
            }
            d_out = d_in;
        }
        Gradient { layers: grads }
    }

    /// One plain gradient-descent step.
    pub fn apply_gradient(&mut self, grad: &Gradient, lr: f64) -> Result<()> {
        if grad.layers.len() != self.layers.len() {
            return Err(Error::Shape("gradient layer count mismatch".into()));
        }
        for (l, g) in self.layers.iter_mut().zip(&grad.layers) {
            if l.weights.len() != g.weights.len() || l.bias.len() != g.bias.len() {
                return Err(Error::Shape("gradient shape mismatch".into()));
            }
            for (w, &d) in l.weights.iter_mut().zip(&g.weights) {
                *w -= lr * d;
            }
            for (b, &d) in l.bias.iter_mut().zip(&g.bias) {
                *b -= lr * d;
            }
        }
        Ok(())
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_parameters() {
            return Err(Error::Shape(format!(
                "{} parameters given, network has {}",
                params.len(),
                self.num_parameters()
            )));
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *w = it.next().expect("length checked");
            }
        }
        Ok(())
    }

    /// Overwrites this network's parameters with `source`'s.
    pub fn copy_from(&mut self, source: &QNetwork) -> Result<()> {
        if self.sizes() != source.sizes() {
            return Err(Error::Shape(format!(
                "cannot copy {:?} into {:?}",
                source.sizes(),
                self.sizes()
            )));
        }
        self.layers.clone_from(&source.layers);
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::Shape(format!("bad layer sizes {sizes:?}")));
    }
    Ok(())
}
