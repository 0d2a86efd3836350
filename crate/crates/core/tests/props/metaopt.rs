use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use unfoldrx::metaopt::{apply_optimizer, meta_loss_and_grad, quad_grad, LstmOptimizerParams, LstmState, QuadraticTask, PARAM_COUNT};

use super::{check, CASES};
use crate::common::{close, rng, trained_theta};

pub fn coordinate_permutation() {
    check("coordinate permutation", CASES, (any::<u64>(), 1usize..9, 1usize..20), |(seed, dims, steps)| {
        let mut r = rng(seed);
        let theta = LstmOptimizerParams::random(&mut r);
        let curv: Vec<f64> = (0..dims).map(|_| r.random_range(0.1..3.0)).collect();
        let target: Vec<f64> = (0..dims).map(|_| r.random_range(-2.0..2.0)).collect();
        let init: Vec<f64> = (0..dims).map(|_| r.random_range(-2.0..2.0)).collect();
        let mut perm: Vec<usize> = (0..dims).collect();
        perm.shuffle(&mut r);
        let run = |c: &[f64], t: &[f64], b0: &[f64]| {
            apply_optimizer(
                &theta,
                |b: &[f64]| {
                    let g = b.iter().zip(c).zip(t).map(|((b, c), t)| 2.0 * c * (b - t)).collect();
                    Ok((b.iter().zip(c).zip(t).map(|((b, c), t)| c * (b - t) * (b - t)).sum(), g))
                },
                b0,
                steps,
            )
            .unwrap()
        };
        let p = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        let a = run(&curv, &target, &init);
        let b = run(&p(&curv), &p(&target), &p(&init));
        prop_assert_eq!(a.betas.len(), b.betas.len());
        for (x, y) in a.betas.iter().zip(&b.betas) {
            prop_assert_eq!(p(x), y.clone());
        }
        Ok(())
    });
}

/// Meta-loss of Θ with the optimizee gradient inputs replaced by a fixed
/// recorded sequence.
fn frozen_loss(theta: &LstmOptimizerParams, tasks: &[QuadraticTask], inputs: &[Vec<Vec<f64>>]) -> f64 {
    let dims = tasks[0].dims();
    let mut total = 0.0;
    for (task, seq) in tasks.iter().zip(inputs) {
        let mut beta = vec![1.0; dims];
        let mut states = vec![LstmState::default(); dims];
        for g in seq {
            for l in 0..dims {
                beta[l] += theta.step_cached(g[l], &mut states[l]).0;
            }
        }
        total += task.value(&beta);
    }
    total / (tasks.len() * dims) as f64
}

fn recorded_inputs(theta: &LstmOptimizerParams, task: &QuadraticTask, steps: usize) -> Vec<Vec<f64>> {
    let dims = task.dims();
    let mut beta = vec![1.0; dims];
    let mut states = vec![LstmState::default(); dims];
    let mut seq = Vec::with_capacity(steps);
    for _ in 0..steps {
        let g = quad_grad(task, &beta);
        for l in 0..dims {
            beta[l] += theta.step_cached(g[l], &mut states[l]).0;
        }
        seq.push(g);
    }
    seq
}

pub fn dropped_gradient() {
    check("dropped gradient", CASES, (any::<u64>(), 1usize..4, 1usize..4, 1usize..6), |(seed, dims, j, steps)| {
        let mut r = rng(seed);
        let theta = LstmOptimizerParams::random(&mut r);
        let tasks: Vec<_> = (0..j).map(|_| QuadraticTask::random(dims, &mut r)).collect();
        let (_, grad) = meta_loss_and_grad(&theta, &tasks, steps).unwrap();
        let inputs: Vec<_> = tasks.iter().map(|t| recorded_inputs(&theta, t, steps)).collect();
        let h = 1e-6;
        for _ in 0..4 {
            let i = r.random_range(0..PARAM_COUNT);
            let mut plus = theta.clone();
            plus.as_mut_slice()[i] += h;
            let mut minus = theta.clone();
            minus.as_mut_slice()[i] -= h;
            let fd = (frozen_loss(&plus, &tasks, &inputs) - frozen_loss(&minus, &tasks, &inputs)) / (2.0 * h);
            prop_assert!((fd - grad[i]).abs() <= 1e-5 * (1.0 + fd.abs()), "param {i}: fd {fd} vs {}", grad[i]);
        }
        Ok(())
    });
}

pub fn identical_tasks() {
    check("identical tasks", CASES, (any::<u64>(), 1usize..7, 2usize..9, 1usize..12), |(seed, dims, j, steps)| {
        let mut r = rng(seed);
        let theta = LstmOptimizerParams::random(&mut r);
        let task = QuadraticTask::random(dims, &mut r);
        let (l1, g1) = meta_loss_and_grad(&theta, std::slice::from_ref(&task), steps).unwrap();
        let (lj, gj) = meta_loss_and_grad(&theta, &vec![task; j], steps).unwrap();
        prop_assert!(close(l1, lj, 1e-12), "{l1} vs {lj}");
        for (a, b) in g1.iter().zip(&gj) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
        Ok(())
    });
}

pub fn descent_on_sum_of_squares() {
    let theta = trained_theta();
    check("descent on sum of squares", CASES, (1usize..=10, 1usize..=40, 0.25f64..4.0), |(dims, steps, start)| {
        let init = vec![start; dims];
        let traj = apply_optimizer(theta, |b: &[f64]| Ok((b.iter().map(|v| v * v).sum(), b.iter().map(|v| 2.0 * v).collect())), &init, steps).unwrap();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (last, _) = traj.last();
        prop_assert!(norm(last) < norm(&init), "{:?}", last);
        Ok(())
    });
}
