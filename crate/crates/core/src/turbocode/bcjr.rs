use serde::{Deserialize, Serialize};

use super::trellis::Trellis;
use crate::error::{Error, Result};
use crate::logdomain::{clamp_llr, max_log, max_star};

/// Forward-backward metric combining rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapAlgorithm {
    /// max*(a, b) ≈ max(a, b)
    MaxLog,
    /// exact max*(a, b) = max(a, b) + ln(1 + e^{-|a-b|})
    LogMap,
}

impl MapAlgorithm {
    #[inline]
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            MapAlgorithm::MaxLog => max_log(a, b),
            MapAlgorithm::LogMap => max_star(a, b),
        }
    }
}

/// Soft outputs of one constituent decoder pass, one entry per trellis step.
#[derive(Debug, Clone, PartialEq)]
pub struct BcjrOutput {
    /// Posterior LLR of the input bit.
    pub posterior: Vec<f64>,
    /// `posterior - apriori - systematic`.
    pub extrinsic: Vec<f64>,
    /// Posterior LLR of the parity bit minus its channel LLR.
    pub parity_extrinsic: Vec<f64>,
}

const S: usize = Trellis::STATES;

/// Bits forced by the trellis (tail inputs, some parities) have infinite
/// log ratios; they are pinned to the LLR clamp.
fn saturate(l: f64) -> f64 {
    if l.is_finite() {
        l
    } else {
        clamp_llr(l)
    }
}

/// BCJR over a terminated trellis (start and end in state 0).
///
/// All three inputs cover every step including the tail; a-priori values for
/// tail steps are normally zero.
pub fn bcjr(
    sys: &[f64],
    par: &[f64],
    apriori: &[f64],
    trellis: &Trellis,
    algo: MapAlgorithm,
) -> Result<BcjrOutput> {
    let n = sys.len();
    for (what, len) in [("parity LLRs", par.len()), ("a-priori LLRs", apriori.len())] {
        if len != n {
            return Err(Error::Dimension {
                what,
                expected: n,
                got: len,
            });
        }
    }
    let ninf = f64::NEG_INFINITY;
    // gamma[k][s][u], half-LLR form: bit 0 contributes +L/2, bit 1 contributes -L/2
    let gamma: Vec<[[f64; 2]; S]> = (0..n)
        .map(|k| {
            let lu = 0.5 * (sys[k] + apriori[k]);
            let lp = 0.5 * par[k];
            let mut g = [[0.0; 2]; S];
            for (s, gs) in g.iter_mut().enumerate() {
                for u in 0..2u8 {
                    let su = if u == 0 { lu } else { -lu };
                    let sp = if trellis.parity(s, u) == 0 { lp } else { -lp };
                    gs[u as usize] = su + sp;
                }
            }
            g
        })
        .collect();

    let mut alpha = vec![[ninf; S]; n + 1];
    alpha[0][0] = 0.0;
    for k in 0..n {
        let mut next = [ninf; S];
        for s in 0..S {
            let a = alpha[k][s];
            if a == ninf {
                continue;
            }
            for u in 0..2u8 {
                let ns = trellis.next_state(s, u);
                next[ns] = algo.combine(next[ns], a + gamma[k][s][u as usize]);
            }
        }
        normalize(&mut next);
        alpha[k + 1] = next;
    }

    let mut beta = vec![[ninf; S]; n + 1];
    beta[n][0] = 0.0;
    for k in (0..n).rev() {
        let mut cur = [ninf; S];
        for (s, c) in cur.iter_mut().enumerate() {
            for u in 0..2u8 {
                let ns = trellis.next_state(s, u);
                *c = algo.combine(*c, beta[k + 1][ns] + gamma[k][s][u as usize]);
            }
        }
        normalize(&mut cur);
        beta[k] = cur;
    }

    let mut posterior = Vec::with_capacity(n);
    let mut extrinsic = Vec::with_capacity(n);
    let mut parity_extrinsic = Vec::with_capacity(n);
    for k in 0..n {
        let mut u_acc = [ninf; 2];
        let mut p_acc = [ninf; 2];
        for s in 0..S {
            for u in 0..2u8 {
                let m = alpha[k][s] + gamma[k][s][u as usize] + beta[k + 1][trellis.next_state(s, u)];
                let p = trellis.parity(s, u) as usize;
                u_acc[u as usize] = algo.combine(u_acc[u as usize], m);
                p_acc[p] = algo.combine(p_acc[p], m);
            }
        }
        let l = saturate(u_acc[0] - u_acc[1]);
        posterior.push(l);
        extrinsic.push(l - apriori[k] - sys[k]);
        parity_extrinsic.push(saturate(p_acc[0] - p_acc[1]) - par[k]);
    }
    Ok(BcjrOutput {
        posterior,
        extrinsic,
        parity_extrinsic,
    })
}

fn normalize(m: &mut [f64; S]) {
    let top = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top.is_finite() {
        m.iter_mut().for_each(|v| *v -= top);
    }
}
