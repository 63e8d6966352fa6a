//! Stacked, optionally bidirectional recurrent layers with a sigmoid head,
//! stored as one flat parameter vector.
//!
//! Parameter order: for each layer, for each direction (forward first), a
//! `[W | U | b]` block; then the head weights `w` (`output_dim`) and bias.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cell::{self, CellGrads, CellWeights, StepCache};
use super::spec::{ModelSpec, Readout};
use super::tensor::{sigmoid, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    spec: ModelSpec,
    input_dim: usize,
    /// Start of each `[W | U | b]` block, indexed `layer * directions + dir`.
    offsets: Vec<usize>,
    pub params: Vec<f64>,
}

impl Network {
    /// Parameters drawn uniformly from `±1/sqrt(hidden)`.
    pub fn new(spec: ModelSpec, input_dim: usize, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(spec, input_dim)?;
        let bound = 1.0 / (net.spec.hidden as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in net.params.iter_mut() {
            *p = dist.sample(&mut rng);
        }
        Ok(net)
    }

    pub fn zeros(spec: ModelSpec, input_dim: usize) -> Result<Self> {
        spec.validate()?;
        if input_dim == 0 {
            return Err(Error::InvalidSpec("input width must be at least 1".into()));
        }
        let mut offsets = Vec::new();
        let mut at = 0;
        for layer in 0..spec.layers {
            let len = CellWeights::block_len(
                spec.cell,
                spec.hidden,
                spec.layer_input_dim(layer, input_dim),
            );
            for _ in 0..spec.directions() {
                offsets.push(at);
                at += len;
            }
        }
        debug_assert_eq!(at + spec.output_dim() + 1, spec.parameter_count(input_dim));
        let params = vec![0.0; spec.parameter_count(input_dim)];
        Ok(Network {
            spec,
            input_dim,
            offsets,
            params,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn block(&self, layer: usize, dir: usize) -> (usize, usize) {
        let start = self.offsets[layer * self.spec.directions() + dir];
        let input = self.spec.layer_input_dim(layer, self.input_dim);
        (
            start,
            start + CellWeights::block_len(self.spec.cell, self.spec.hidden, input),
        )
    }

    fn weights(&self, layer: usize, dir: usize) -> CellWeights<'_> {
        let (s, e) = self.block(layer, dir);
        let input = self.spec.layer_input_dim(layer, self.input_dim);
        CellWeights::from_block(self.spec.cell, self.spec.hidden, input, &self.params[s..e])
    }

    /// Offset of the head weights; the bias is the last parameter.
    pub fn head_offset(&self) -> usize {
        self.params.len() - self.spec.output_dim() - 1
    }

    /// Human-readable name of parameter `index`, e.g. `layer1.bwd.U[7]`.
    pub fn parameter_name(&self, index: usize) -> String {
        for (name, start, len) in self.tensor_ranges() {
            if (start..start + len).contains(&index) {
                return format!("{name}[{}]", index - start);
            }
        }
        format!("?[{index}]")
    }

    /// `(name, offset, length)` of every tensor in parameter order.
    fn tensor_ranges(&self) -> Vec<(String, usize, usize)> {
        let gh = self.spec.cell.gates() * self.spec.hidden;
        let mut out = Vec::new();
        for layer in 0..self.spec.layers {
            let input = self.spec.layer_input_dim(layer, self.input_dim);
            for dir in 0..self.spec.directions() {
                let (s, _) = self.block(layer, dir);
                let d = ["fwd", "bwd"][dir];
                out.push((format!("layer{layer}.{d}.W"), s, gh * input));
                out.push((
                    format!("layer{layer}.{d}.U"),
                    s + gh * input,
                    gh * self.spec.hidden,
                ));
                out.push((
                    format!("layer{layer}.{d}.b"),
                    s + gh * (input + self.spec.hidden),
                    gh,
                ));
            }
        }
        let head = self.head_offset();
        out.push(("head.w".into(), head, self.spec.output_dim()));
        out.push(("head.b".into(), head + self.spec.output_dim(), 1));
        out
    }

    fn tensor_shape(&self, name: &str, len: usize) -> Vec<usize> {
        let gh = self.spec.cell.gates() * self.spec.hidden;
        if name.ends_with(".W") || name.ends_with(".U") {
            vec![gh, len / gh]
        } else {
            vec![len]
        }
    }

    /// Named parameter tensors in parameter order.
    pub fn tensors(&self) -> Vec<(String, Tensor)> {
        self.tensor_ranges()
            .into_iter()
            .map(|(name, s, len)| {
                let shape = self.tensor_shape(&name, len);
                let t = Tensor {
                    shape,
                    values: self.params[s..s + len].to_vec(),
                };
                (name, t)
            })
            .collect()
    }

    /// Inverse of [`Self::tensors`]; names and shapes must match exactly.
    pub fn from_tensors(
        spec: ModelSpec,
        input_dim: usize,
        tensors: &[(String, Tensor)],
    ) -> Result<Self> {
        let mut net = Self::zeros(spec, input_dim)?;
        let ranges = net.tensor_ranges();
        if ranges.len() != tensors.len() {
            return Err(Error::ModelFormat(format!(
                "expected {} parameter tensors, found {}",
                ranges.len(),
                tensors.len()
            )));
        }
        for ((name, s, len), (got_name, t)) in ranges.into_iter().zip(tensors) {
            let shape = net.tensor_shape(&name, len);
            if &name != got_name || t.shape != shape || t.values.len() != len {
                return Err(Error::ModelFormat(format!(
                    "tensor {got_name} {:?} does not fit {name} {shape:?}",
                    t.shape
                )));
            }
            net.params[s..s + len].copy_from_slice(&t.values);
        }
        Ok(net)
    }

    /// Probability for one sequence of input vectors.
    pub fn probability(&self, xs: &[&[f64]]) -> f64 {
        self.forward_seq(xs, None).prob
    }

    /// Pre-sigmoid output for one sequence of input vectors.
    pub fn logit(&self, xs: &[&[f64]]) -> f64 {
        self.forward_seq(xs, None).logit
    }

    pub(crate) fn forward_seq(
        &self,
        xs: &[&[f64]],
        mut dropout: Option<&mut ChaCha8Rng>,
    ) -> SeqCache {
        let spec = &self.spec;
        let (h, dirs, len) = (spec.hidden, spec.directions(), xs.len());
        let mut inputs: Vec<Vec<Vec<f64>>> = Vec::with_capacity(spec.layers);
        let mut masks = Vec::with_capacity(spec.layers);
        let mut steps = Vec::with_capacity(spec.layers);
        let mut current: Vec<Vec<f64>> = xs.iter().map(|x| x.to_vec()).collect();
        masks.push(None);
        for layer in 0..spec.layers {
            let mut out = vec![vec![0.0; h * dirs]; len];
            let mut layer_steps = Vec::with_capacity(dirs);
            for dir in 0..dirs {
                let wt = self.weights(layer, dir);
                let mut state = cell::CellState::zeros(spec.cell, h);
                let mut dir_steps: Vec<StepCache> = Vec::with_capacity(len);
                for k in 0..len {
                    let t = position(dir, k, len);
                    let c = cell::forward(&wt, &current[t], &state.h, &state.c);
                    out[t][dir * h..(dir + 1) * h].copy_from_slice(&c.h);
                    state.h.clone_from(&c.h);
                    state.c.clone_from(&c.c);
                    dir_steps.push(c);
                }
                layer_steps.push(dir_steps);
            }
            steps.push(layer_steps);
            inputs.push(std::mem::replace(&mut current, out));
            if layer + 1 < spec.layers {
                let mask = match dropout.as_deref_mut() {
                    Some(rng) if spec.dropout > 0.0 => {
                        let keep = 1.0 / (1.0 - spec.dropout);
                        let m: Vec<Vec<f64>> = current
                            .iter()
                            .map(|row| {
                                row.iter()
                                    .map(|_| {
                                        if rng.gen::<f64>() < spec.dropout {
                                            0.0
                                        } else {
                                            keep
                                        }
                                    })
                                    .collect()
                            })
                            .collect();
                        for (row, mrow) in current.iter_mut().zip(&m) {
                            for (v, s) in row.iter_mut().zip(mrow) {
                                *v *= s;
                            }
                        }
                        Some(m)
                    }
                    _ => None,
                };
                masks.push(mask);
            }
        }
        let top = current;
        let mut readout = vec![0.0; h * dirs];
        if len > 0 {
            match spec.readout {
                Readout::LastHidden => {
                    for dir in 0..dirs {
                        let last = &steps[spec.layers - 1][dir][len - 1].h;
                        readout[dir * h..(dir + 1) * h].copy_from_slice(last);
                    }
                }
                Readout::MeanPool => {
                    for row in &top {
                        for (r, v) in readout.iter_mut().zip(row) {
                            *r += v;
                        }
                    }
                    for r in readout.iter_mut() {
                        *r /= len as f64;
                    }
                }
            }
        }
        let head = self.head_offset();
        let w = &self.params[head..head + readout.len()];
        let logit = self.params[self.params.len() - 1]
            + w.iter().zip(&readout).map(|(a, b)| a * b).sum::<f64>();
        SeqCache {
            inputs,
            masks,
            steps,
            readout,
            logit,
            prob: sigmoid(logit),
        }
    }

    /// Adds `∂loss/∂params` to `grad` given `∂loss/∂logit` and returns
    /// `∂loss/∂x_t` for every input vector.
    pub(crate) fn backward_seq(
        &self,
        cache: &SeqCache,
        dlogit: f64,
        grad: &mut [f64],
    ) -> Vec<Vec<f64>> {
        let spec = &self.spec;
        let (h, dirs) = (spec.hidden, spec.directions());
        let len = cache.inputs[0].len();
        let head = self.head_offset();
        let n_params = self.params.len();
        for (g, r) in grad[head..n_params - 1].iter_mut().zip(&cache.readout) {
            *g += dlogit * r;
        }
        grad[n_params - 1] += dlogit;
        let dread: Vec<f64> = self.params[head..n_params - 1]
            .iter()
            .map(|w| dlogit * w)
            .collect();
        let mut d_out = vec![vec![0.0; h * dirs]; len];
        if len > 0 {
            match spec.readout {
                Readout::LastHidden => {
                    for dir in 0..dirs {
                        let t = position(dir, len - 1, len);
                        d_out[t][dir * h..(dir + 1) * h]
                            .copy_from_slice(&dread[dir * h..(dir + 1) * h]);
                    }
                }
                Readout::MeanPool => {
                    let scale = 1.0 / len as f64;
                    for row in d_out.iter_mut() {
                        for (d, r) in row.iter_mut().zip(&dread) {
                            *d = r * scale;
                        }
                    }
                }
            }
        }
        let zeros = vec![0.0; h];
        for layer in (0..spec.layers).rev() {
            let xs = &cache.inputs[layer];
            let input = spec.layer_input_dim(layer, self.input_dim);
            let mut d_in = vec![vec![0.0; input]; len];
            for dir in 0..dirs {
                let wt = self.weights(layer, dir);
                let (s, e) = self.block(layer, dir);
                let mut grads = CellGrads::from_block(spec.cell, h, input, &mut grad[s..e]);
                let steps = &cache.steps[layer][dir];
                let mut dh_next = vec![0.0; h];
                let mut dc_next = vec![0.0; h];
                for k in (0..len).rev() {
                    let t = position(dir, k, len);
                    let dh: Vec<f64> = d_out[t][dir * h..(dir + 1) * h]
                        .iter()
                        .zip(&dh_next)
                        .map(|(a, b)| a + b)
                        .collect();
                    let (h_prev, c_prev) = if k > 0 {
                        (&steps[k - 1].h, &steps[k - 1].c)
                    } else {
                        (&zeros, &zeros)
                    };
                    let c_prev: &[f64] = if steps[k].c.is_empty() { &[] } else { c_prev };
                    let out = cell::backward(
                        &wt, &mut grads, &xs[t], h_prev, c_prev, &steps[k], &dh, &dc_next,
                    );
                    for (a, b) in d_in[t].iter_mut().zip(&out.x) {
                        *a += b;
                    }
                    dh_next = out.h_prev;
                    dc_next = out.c_prev;
                }
            }
            if let Some(mask) = &cache.masks[layer] {
                for (row, mrow) in d_in.iter_mut().zip(mask) {
                    for (d, m) in row.iter_mut().zip(mrow) {
                        *d *= m;
                    }
                }
            }
            d_out = d_in;
        }
        d_out
    }
}

/// Sequence position visited at step `k` of direction `dir`.
fn position(dir: usize, k: usize, len: usize) -> usize {
    if dir == 0 {
        k
    } else {
        len - 1 - k
    }
}

pub(crate) struct SeqCache {
    /// Input vectors of each layer (after dropout for upper layers).
    inputs: Vec<Vec<Vec<f64>>>,
    /// Dropout scale applied to each layer's input; never set for layer 0.
    masks: Vec<Option<Vec<Vec<f64>>>>,
    /// `[layer][dir][step]` in processing order.
    steps: Vec<Vec<Vec<StepCache>>>,
    readout: Vec<f64>,
    pub logit: f64,
    pub prob: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::spec::{all_specs, CellKind};

    fn seq(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..len)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    fn refs(v: &[Vec<f64>]) -> Vec<&[f64]> {
        v.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn parameter_count_matches_layout() {
        for spec in all_specs(3) {
            let net = Network::new(spec.clone(), 4, 1).unwrap();
            assert_eq!(net.params.len(), spec.parameter_count(4));
            let total: usize = net.tensors().iter().map(|(_, t)| t.len()).sum();
            assert_eq!(total, net.params.len());
        }
    }

    #[test]
    fn hand_computed_rnn() {
        // hidden 2, input 1, len 2, zero recurrent weights except U = I.
        let spec = ModelSpec::new(CellKind::Rnn, false, 1).with_hidden(2);
        let mut net = Network::zeros(spec, 1).unwrap();
        // W = [0.5, -1.0], U = I, b = [0.1, 0.0], head w = [1, 2], head b = -0.5
        net.params
            .copy_from_slice(&[0.5, -1.0, 1.0, 0.0, 0.0, 1.0, 0.1, 0.0, 1.0, 2.0, -0.5]);
        let x = [vec![1.0], vec![2.0]];
        let h1 = [(0.5f64 + 0.1).tanh(), (-1.0f64).tanh()];
        let h2 = [(1.0 + h1[0] + 0.1).tanh(), (-2.0 + h1[1]).tanh()];
        let p = 1.0 / (1.0 + (-(h2[0] + 2.0 * h2[1] - 0.5)).exp());
        assert!((net.probability(&refs(&x)) - p).abs() < 1e-15);
    }

    #[test]
    fn empty_sequence_reads_bias() {
        for spec in all_specs(3) {
            let net = Network::new(spec, 2, 9).unwrap();
            let b = *net.params.last().unwrap();
            assert_eq!(net.probability(&[]), sigmoid(b));
        }
    }

    #[test]
    fn tensors_round_trip() {
        let spec = ModelSpec::new(CellKind::Gru, true, 2).with_hidden(3);
        let net = Network::new(spec.clone(), 4, 3).unwrap();
        let back = Network::from_tensors(spec.clone(), 4, &net.tensors()).unwrap();
        assert_eq!(back, net);
        assert!(Network::from_tensors(spec, 5, &net.tensors()).is_err());
        assert_eq!(net.parameter_name(0), "layer0.fwd.W[0]");
        assert_eq!(net.parameter_name(net.params.len() - 1), "head.b[0]");
    }

    #[test]
    fn backward_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in all_specs(3) {
            for readout in [Readout::LastHidden, Readout::MeanPool] {
                let spec = spec.clone().with_readout(readout);
                let net = Network::new(spec.clone(), 2, rng.gen()).unwrap();
                let xs = seq(&mut rng, 4, 2);
                let cache = net.forward_seq(&refs(&xs), None);
                let mut grad = vec![0.0; net.params.len()];
                let dx = net.backward_seq(&cache, 1.0, &mut grad);
                let logit = |n: &Network, xs: &[Vec<f64>]| {
                    let p = n.probability(&refs(xs));
                    (p / (1.0 - p)).ln()
                };
                let eps = 1e-6;
                for (i, &g) in grad.iter().enumerate() {
                    let mut a = net.clone();
                    a.params[i] += eps;
                    let mut b = net.clone();
                    b.params[i] -= eps;
                    let n = (logit(&a, &xs) - logit(&b, &xs)) / (2.0 * eps);
                    assert!(
                        (n - g).abs() < 1e-6,
                        "{spec} {readout:?} {}",
                        net.parameter_name(i)
                    );
                }
                for t in 0..xs.len() {
                    for j in 0..2 {
                        let mut a = xs.clone();
                        a[t][j] += eps;
                        let mut b = xs.clone();
                        b[t][j] -= eps;
                        let n = (logit(&net, &a) - logit(&net, &b)) / (2.0 * eps);
                        assert!((n - dx[t][j]).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn dropout_only_when_enabled() {
        let spec = ModelSpec::new(CellKind::Lstm, true, 3)
            .with_hidden(4)
            .with_dropout(0.5);
        let net = Network::new(spec, 3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xs = seq(&mut rng, 5, 3);
        let plain = net.probability(&refs(&xs));
        let mut drng = ChaCha8Rng::seed_from_u64(1);
        let dropped = net.forward_seq(&refs(&xs), Some(&mut drng)).prob;
        assert_ne!(plain, dropped);
        assert_eq!(net.forward_seq(&refs(&xs), None).prob, plain);
    }
}
