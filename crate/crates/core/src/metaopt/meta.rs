//! Meta-training of the LSTM optimizer on random quadratics, and applying
//! a trained optimizer to arbitrary objectives.

use rand::Rng;
use rand_distr::StandardNormal;

use super::adam::Adam;
use super::lstm::{LstmOptimizerParams, LstmState, PARAM_COUNT};
use crate::error::{Error, Result};

/// `f(β) = ‖Wβ − q‖²` with standard normal `W` and `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTask {
    /// Row-major `L × L`.
    pub w: Vec<f64>,
    pub q: Vec<f64>,
}

impl QuadraticTask {
    pub fn random<R: Rng + ?Sized>(dims: usize, rng: &mut R) -> Self {
        Self {
            w: (0..dims * dims).map(|_| rng.sample(StandardNormal)).collect(),
            q: (0..dims).map(|_| rng.sample(StandardNormal)).collect(),
        }
    }

    pub fn dims(&self) -> usize {
        self.q.len()
    }

    fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let n = self.dims();
        (0..n)
            .map(|i| (0..n).map(|j| self.w[i * n + j] * beta[j]).sum::<f64>() - self.q[i])
            .collect()
    }

    pub fn value(&self, beta: &[f64]) -> f64 {
        self.residual(beta).iter().map(|r| r * r).sum()
    }
}

/// Exact gradient `2Wᵀ(Wβ − q)`.
pub fn quad_grad(task: &QuadraticTask, beta: &[f64]) -> Vec<f64> {
    let n = task.dims();
    let r = task.residual(beta);
    (0..n)
        .map(|j| 2.0 * (0..n).map(|i| task.w[i * n + j] * r[i]).sum::<f64>())
        .collect()
}

/// Loss of Θ over `tasks` after `steps` optimizer steps from `β = 1`, and
/// its gradient with the optimizee gradients held constant.
pub fn meta_loss_and_grad(
    theta: &LstmOptimizerParams,
    tasks: &[QuadraticTask],
    steps: usize,
) -> Result<(f64, Vec<f64>)> {
    if tasks.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dims = tasks[0].dims();
    let scale = 1.0 / (tasks.len() * dims) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; PARAM_COUNT];
    for task in tasks {
        let mut beta = vec![1.0; dims];
        let mut states = vec![LstmState::default(); dims];
        let mut caches = vec![Vec::with_capacity(steps); dims];
        for _ in 0..steps {
            let g = quad_grad(task, &beta);
            for l in 0..dims {
                let (step, cache) = theta.step_cached(g[l], &mut states[l]);
                beta[l] += step;
                caches[l].push(cache);
            }
        }
        loss += scale * task.value(&beta);
        let upstream = quad_grad(task, &beta);
        for l in 0..dims {
            theta.backward_chain(&caches[l], scale * upstream[l], &mut grad);
        }
    }
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("meta-training loss"));
    }
    Ok((loss, grad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaTrainConfig {
    pub epochs: usize,
    /// Tasks per epoch, J.
    pub tasks: usize,
    /// Unrolled optimizer steps, T.
    pub steps: usize,
    /// Optimizee dimension, L.
    pub dims: usize,
    pub lr: f64,
}

impl Default for MetaTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            tasks: 20,
            steps: 20,
            dims: 5,
            lr: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetaTrainReport {
    pub theta: LstmOptimizerParams,
    /// Training loss of each epoch, before its update.
    pub curve: Vec<f64>,
}

/// Meta-trains Θ from a random initialisation: each epoch draws fresh
/// tasks, unrolls the optimizer and applies a single Adam update.
pub fn meta_train<R: Rng + ?Sized>(config: &MetaTrainConfig, rng: &mut R) -> Result<MetaTrainReport> {
    let theta = LstmOptimizerParams::random(rng);
    meta_train_from(theta, config, rng)
}

pub fn meta_train_from<R: Rng + ?Sized>(
    mut theta: LstmOptimizerParams,
    config: &MetaTrainConfig,
    rng: &mut R,
) -> Result<MetaTrainReport> {
    if config.tasks == 0 || config.dims == 0 {
        return Err(Error::Config("meta-training needs at least one task and one dimension".into()));
    }
    let mut adam = Adam::new(PARAM_COUNT, config.lr);
    let mut curve = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let tasks: Vec<_> = (0..config.tasks).map(|_| QuadraticTask::random(config.dims, rng)).collect();
        let (loss, grad) = meta_loss_and_grad(&theta, &tasks, config.steps)?;
        curve.push(loss);
        adam.step(theta.as_mut_slice(), &grad);
    }
    Ok(MetaTrainReport { theta, curve })
}

/// Optimizee iterates and the loss at each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub betas: Vec<Vec<f64>>,
    pub losses: Vec<f64>,
}

impl Trajectory {
    /// Iterate with the lowest loss.
    pub fn best(&self) -> (&[f64], f64) {
        let i = self
            .losses
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i);
        (&self.betas[i], self.losses[i])
    }

    pub fn last(&self) -> (&[f64], f64) {
        let i = self.betas.len() - 1;
        (&self.betas[i], self.losses[i])
    }
}

/// Runs `steps` coordinatewise LSTM updates on `objective`, which returns
/// the loss and gradient at a point. Stops early if the objective turns
/// non-finite; the trajectory then ends at the last finite iterate.
pub fn apply_optimizer<F>(
    theta: &LstmOptimizerParams,
    mut objective: F,
    beta_init: &[f64],
    steps: usize,
) -> Result<Trajectory>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut beta = beta_init.to_vec();
    let (loss, mut grad) = objective(&beta)?;
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("objective at the initial point"));
    }
    let mut traj = Trajectory {
        betas: vec![beta.clone()],
        losses: vec![loss],
    };
    let mut states = vec![LstmState::default(); beta.len()];
    for _ in 0..steps {
        for (l, b) in beta.iter_mut().enumerate() {
            let (g, _) = theta.step_cached(grad[l], &mut states[l]);
            *b += g;
        }
        let (loss, g) = objective(&beta)?;
        if !loss.is_finite() || g.iter().any(|v| !v.is_finite()) {
            break;
        }
        grad = g;
        traj.betas.push(beta.clone());
        traj.losses.push(loss);
    }
    Ok(traj)
}
