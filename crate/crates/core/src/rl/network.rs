//! Fully connected value network with manual backpropagation.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::seed;

/// Rectifier MLP; identity on the output layer. Parameters live in one flat
/// vector, layer by layer, weights (row-major `out × in`) before biases.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNetwork {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

impl ValueNetwork {
    /// He-uniform weights, zero biases. The output layer is drawn at 1% of
    /// that scale so untrained values sit near zero.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid(format!("bad layer sizes {sizes:?}")));
        }
        let mut rng = seed::rng(seed);
        let mut params = Vec::with_capacity(Self::count(sizes));
        let last = sizes.len() - 2;
        for (l, w) in sizes.windows(2).enumerate() {
            let (inp, out) = (w[0], w[1]);
            let scale = if l == last { 1e-2 } else { 1.0 };
            let bound = scale * (6.0 / inp as f64).sqrt();
            params.extend((0..inp * out).map(|_| rng.gen_range(-bound..bound)));
            params.extend(std::iter::repeat_n(0.0, out));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        let mut n = Self::new(sizes, 0)?;
        n.params.iter_mut().for_each(|p| *p = 0.0);
        Ok(n)
    }

    fn count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_width(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn copy_from(&mut self, other: &Self) {
        self.params.copy_from_slice(&other.params);
    }

    /// Layer `l` weights and biases.
    fn layer(&self, l: usize) -> (usize, usize, usize) {
        let off: usize = self.sizes.windows(2).take(l).map(|w| w[0] * w[1] + w[1]).sum();
        (off, self.sizes[l], self.sizes[l + 1])
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.input_width(),
                actual: input.len(),
            });
        }
        Ok(())
    }

    /// Activations of every layer, input first.
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(input.to_vec());
        for l in 0..layers {
            let (off, inp, out) = self.layer(l);
            let w = &self.params[off..off + inp * out];
            let b = &self.params[off + inp * out..off + inp * out + out];
            let x = acts.last().expect("input pushed");
            let mut y: Vec<f64> = (0..out)
                .map(|o| b[o] + w[o * inp..(o + 1) * inp].iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            if l + 1 < layers {
                y.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(y);
        }
        acts
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        Ok(self.activations(input).pop().expect("output layer"))
    }

    /// Add `∂L/∂θ` into `grad` given `∂L/∂output` for one input.
    /// Returns the output used.
    pub fn backward(&self, input: &[f64], out_grad: impl Fn(&[f64]) -> Vec<f64>, grad: &mut [f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        debug_assert_eq!(grad.len(), self.params.len());
        let acts = self.activations(input);
        let layers = self.sizes.len() - 1;
        let output = acts[layers].clone();
        let mut delta = out_grad(&output);
        for l in (0..layers).rev() {
            let (off, inp, out) = self.layer(l);
            let x = &acts[l];
            for o in 0..out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off + o * inp..off + (o + 1) * inp];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += d * xi;
                }
                grad[off + inp * out + o] += d;
            }
            if l > 0 {
                let w = &self.params[off..off + inp * out];
                let mut prev = vec![0.0; inp];
                for o in 0..out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    for (p, wi) in prev.iter_mut().zip(&w[o * inp..(o + 1) * inp]) {
                        *p += d * wi;
                    }
                }
                for (p, a) in prev.iter_mut().zip(x) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        Ok(output)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Update rule with its running state.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, num_params: usize) -> Self {
        let state = if matches!(kind, OptimizerKind::Adam { .. }) { num_params } else { 0 };
        Self {
            kind,
            m: vec![0.0; state],
            v: vec![0.0; state],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                self.t += 1;
                let c1 = 1.0 - beta1.powi(self.t);
                let c2 = 1.0 - beta2.powi(self.t);
                for i in 0..params.len() {
                    self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * grad[i];
                    self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * grad[i] * grad[i];
                    params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + eps);
                }
            }
        }
    }
}
