//! Angle fitting for synthesis templates.
//!
//! The objective is the squared distance `1 − |Tr(U†V(θ))|²/d²`, which has
//! the same minimizers as [`hs_distance`](super::hs_distance) but stays smooth
//! at zero. Gradients come from prefix/suffix products of the embedded gates.

use std::f64::consts::TAU;

use rand::Rng as _;

use super::template::SynthesisTemplate;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::quantum::{ComplexMatrix, UnitaryMatrix, C64};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Descent {
    /// Steepest descent with step halving on non-improvement.
    Gradient,
    /// Quasi-Newton BFGS with backtracking; same gradient information.
    Bfgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iters: usize,
    pub initial_step: f64,
    pub step_decay: f64,
    pub method: Descent,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            max_iters: 500,
            initial_step: 0.1,
            step_decay: 0.5,
            method: Descent::Bfgs,
        }
    }
}

/// Infidelity objective for one template against one target.
pub(crate) struct Objective<'a> {
    template: &'a SynthesisTemplate,
    target_adj: ComplexMatrix,
    dim: usize,
}

impl<'a> Objective<'a> {
    pub fn new(template: &'a SynthesisTemplate, target: &UnitaryMatrix) -> Result<Self> {
        if template.num_qubits() != target.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: target.num_qubits(),
                actual: template.num_qubits(),
            });
        }
        Ok(Self {
            template,
            target_adj: target.matrix().adjoint(),
            dim: target.dim(),
        })
    }

    fn embedded_gates(&self, circuit: &Circuit) -> Vec<ComplexMatrix> {
        circuit
            .gates()
            .iter()
            .map(|g| embed(self.template.num_qubits(), &g.qubits, &g.kind.matrix(&g.params)))
            .collect()
    }

    #[cfg(test)]
    pub fn value(&self, params: &[f64]) -> Result<f64> {
        let circuit = self.template.build(params)?;
        let mut v = ComplexMatrix::identity(self.dim);
        for e in self.embedded_gates(&circuit) {
            v = e.matmul(&v)?;
        }
        let t = self.target_adj.matmul(&v)?.trace();
        self.infidelity(t)
    }

    fn infidelity(&self, t: C64) -> Result<f64> {
        let d2 = (self.dim * self.dim) as f64;
        let f = 1.0 - t.norm_sqr() / d2;
        if !f.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(f.max(0.0))
    }

    pub fn value_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let circuit = self.template.build(params)?;
        let gates = self.embedded_gates(&circuit);
        let m = gates.len();
        // prefix[k] = G_k ⋯ G_1, prefix[0] = I
        let mut prefix = Vec::with_capacity(m + 1);
        prefix.push(ComplexMatrix::identity(self.dim));
        for e in &gates {
            let next = e.matmul(prefix.last().expect("non-empty"))?;
            prefix.push(next);
        }
        let t = self.target_adj.matmul(&prefix[m])?.trace();
        let value = self.infidelity(t)?;

        let d2 = (self.dim * self.dim) as f64;
        let mut grad = vec![0.0; params.len()];
        let mut suffix = self.target_adj.clone(); // U† G_m ⋯ G_{k+1}
        let mut param_cursor = params.len();
        for (k, g) in circuit.gates().iter().enumerate().rev() {
            let np = g.kind.num_params();
            param_cursor -= np;
            if np > 0 {
                let around = prefix[k].matmul(&suffix)?;
                for j in 0..np {
                    let dg = embed(self.template.num_qubits(), &g.qubits, &g.kind.matrix_derivative(&g.params, j));
                    let dt: C64 = trace_of_product(&around, &dg);
                    grad[param_cursor + j] = -2.0 * (t.conj() * dt).re / d2;
                }
            }
            suffix = suffix.matmul(&gates[k])?;
        }
        debug_assert_eq!(param_cursor, 0);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok((value, grad))
    }
}

fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

fn embed(n: usize, targets: &[usize], g: &ComplexMatrix) -> ComplexMatrix {
    let mut u = UnitaryMatrix::identity(n);
    u.apply_gate_left(targets, g);
    u.into_matrix()
}

/// Result of fitting one start.
#[derive(Debug, Clone)]
pub(crate) struct Fit {
    pub params: Vec<f64>,
    pub infidelity: f64,
}

pub(crate) fn minimize(objective: &Objective<'_>, start: Vec<f64>, cfg: &OptimizerConfig, target: f64) -> Result<Fit> {
    match cfg.method {
        Descent::Gradient => gradient_descent(objective, start, cfg, target),
        Descent::Bfgs => bfgs(objective, start, cfg, target),
    }
}

fn gradient_descent(objective: &Objective<'_>, mut x: Vec<f64>, cfg: &OptimizerConfig, target: f64) -> Result<Fit> {
    let (mut f, mut g) = objective.value_and_gradient(&x)?;
    let mut step = cfg.initial_step;
    for _ in 0..cfg.max_iters {
        if f < target || step < 1e-14 {
            break;
        }
        let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
        let (ft, gt) = objective.value_and_gradient(&trial)?;
        if ft < f {
            x = trial;
            f = ft;
            g = gt;
        } else {
            step *= cfg.step_decay;
        }
    }
    Ok(Fit { params: x, infidelity: f })
}

fn bfgs(objective: &Objective<'_>, mut x: Vec<f64>, cfg: &OptimizerConfig, target: f64) -> Result<Fit> {
    let n = x.len();
    let identity = |h: &mut Vec<f64>| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = 1.0;
        }
    };
    let mut h = vec![0.0; n * n];
    identity(&mut h);
    let (mut f, mut g) = objective.value_and_gradient(&x)?;
    let mut first = true;
    for _ in 0..cfg.max_iters {
        if f < target {
            break;
        }
        let mut dir: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>()).collect();
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope >= 0.0 {
            identity(&mut h);
            dir = g.iter().map(|gi| -gi).collect();
            slope = -g.iter().map(|gi| gi * gi).sum::<f64>();
        }
        if slope.abs() < 1e-300 {
            break;
        }
        let mut step = if first { cfg.initial_step } else { 1.0 };
        first = false;
        let mut accepted = None;
        while step > 1e-12 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = objective.value_and_gradient(&trial)?;
            if ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= cfg.step_decay;
        }
        let Some((xn, fnew, gn)) = accepted else {
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        let progress = f - fnew;
        x = xn;
        f = fnew;
        g = gn;
        if progress < 1e-16 * f.max(1e-300) {
            break;
        }
    }
    Ok(Fit { params: x, infidelity: f })
}

pub(crate) fn random_start(num_params: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed);
    (0..num_params).map(|_| rng.gen_range(0.0..TAU)).collect()
}
