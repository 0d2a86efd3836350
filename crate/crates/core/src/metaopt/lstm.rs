//! Two-layer coordinatewise LSTM that maps a scalar gradient to a scalar step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logdomain::sigmoid;

pub const HIDDEN: usize = 5;
pub const LAYERS: usize = 2;
pub const GATES: usize = 4 * HIDDEN;
pub const OUTPUT_SCALE: f64 = 0.1;
pub const GRAD_CLIP: f64 = 10.0;
pub const THETA_SCHEMA: u32 = 1;

const W_IH1: usize = 0;
const W_HH1: usize = W_IH1 + GATES;
const B1: usize = W_HH1 + GATES * HIDDEN;
const W_IH2: usize = B1 + GATES;
const W_HH2: usize = W_IH2 + GATES * HIDDEN;
const B2: usize = W_HH2 + GATES * HIDDEN;
const W_OUT: usize = B2 + GATES;
const B_OUT: usize = W_OUT + HIDDEN;

/// Number of trainable scalars in Θ.
pub const PARAM_COUNT: usize = B_OUT + 1;

/// All weights Θ, stored flat. Gate order within each layer is input,
/// forget, cell, output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmOptimizerParams {
    theta: Vec<f64>,
}

/// Per-coordinate recurrent state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LstmState {
    pub h: [[f64; HIDDEN]; LAYERS],
    pub c: [[f64; HIDDEN]; LAYERS],
}

#[derive(Debug, Clone, Copy)]
struct CellCache {
    h_prev: [f64; HIDDEN],
    c_prev: [f64; HIDDEN],
    gates: [f64; GATES],
    tanh_c: [f64; HIDDEN],
}

/// Forward quantities of one step, kept for backpropagation.
#[derive(Debug, Clone, Copy)]
pub struct StepCache {
    input: f64,
    cells: [CellCache; LAYERS],
    h_out: [f64; HIDDEN],
}

impl LstmOptimizerParams {
    pub fn from_flat(theta: Vec<f64>) -> Result<Self> {
        if theta.len() != PARAM_COUNT {
            return Err(Error::Dimension {
                what: "LSTM parameters",
                expected: PARAM_COUNT,
                got: theta.len(),
            });
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("LSTM parameters"));
        }
        Ok(Self { theta })
    }

    /// Uniform initialisation in `±1/√HIDDEN`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let k = 1.0 / (HIDDEN as f64).sqrt();
        Self {
            theta: (0..PARAM_COUNT).map(|_| rng.random_range(-k..k)).collect(),
        }
    }

    pub fn zeros() -> Self {
        Self {
            theta: vec![0.0; PARAM_COUNT],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn cell(&self, layer: usize) -> (usize, usize, usize, usize) {
        match layer {
            0 => (W_IH1, 1, W_HH1, B1),
            _ => (W_IH2, HIDDEN, W_HH2, B2),
        }
    }

    fn cell_forward(&self, layer: usize, input: &[f64], h: &[f64; HIDDEN], c: &[f64; HIDDEN]) -> CellCache {
        let (w_ih, n_in, w_hh, b) = self.cell(layer);
        let t = &self.theta;
        let mut z = [0.0; GATES];
        for (r, zr) in z.iter_mut().enumerate() {
            let mut s = t[b + r];
            for (k, &x) in input.iter().enumerate() {
                s += t[w_ih + r * n_in + k] * x;
            }
            for (k, &hk) in h.iter().enumerate() {
                s += t[w_hh + r * HIDDEN + k] * hk;
            }
            *zr = s;
        }
        let mut gates = [0.0; GATES];
        for r in 0..GATES {
            gates[r] = if (2 * HIDDEN..3 * HIDDEN).contains(&r) {
                z[r].tanh()
            } else {
                sigmoid(z[r])
            };
        }
        let mut tanh_c = [0.0; HIDDEN];
        for k in 0..HIDDEN {
            let cn = gates[HIDDEN + k] * c[k] + gates[k] * gates[2 * HIDDEN + k];
            tanh_c[k] = cn.tanh();
        }
        CellCache {
            h_prev: *h,
            c_prev: *c,
            gates,
            tanh_c,
        }
    }

    /// One optimizer step for one coordinate: returns the update `g` and
    /// the forward cache.
    pub fn step_cached(&self, grad: f64, state: &mut LstmState) -> (f64, StepCache) {
        let input = grad.clamp(-GRAD_CLIP, GRAD_CLIP);
        let mut cells = [CellCache {
            h_prev: [0.0; HIDDEN],
            c_prev: [0.0; HIDDEN],
            gates: [0.0; GATES],
            tanh_c: [0.0; HIDDEN],
        }; LAYERS];
        let mut x = [0.0; HIDDEN];
        for (layer, cell) in cells.iter_mut().enumerate() {
            let inp: &[f64] = if layer == 0 { std::slice::from_ref(&input) } else { &x };
            *cell = self.cell_forward(layer, inp, &state.h[layer], &state.c[layer]);
            for k in 0..HIDDEN {
                let g = &cell.gates;
                state.c[layer][k] = g[HIDDEN + k] * cell.c_prev[k] + g[k] * g[2 * HIDDEN + k];
                state.h[layer][k] = g[3 * HIDDEN + k] * cell.tanh_c[k];
            }
            x = state.h[layer];
        }
        let t = &self.theta;
        let out = t[B_OUT] + (0..HIDDEN).map(|k| t[W_OUT + k] * x[k]).sum::<f64>();
        (
            OUTPUT_SCALE * out,
            StepCache {
                input,
                cells,
                h_out: x,
            },
        )
    }

    /// Backpropagates a chain of steps in which every output `g_t` receives
    /// the same upstream derivative `upstream`. The gradient inputs are
    /// treated as constants. Accumulates into `grad`.
    pub fn backward_chain(&self, caches: &[StepCache], upstream: f64, grad: &mut [f64]) {
        let t = &self.theta;
        let mut dh_next = [[0.0; HIDDEN]; LAYERS];
        let mut dc_next = [[0.0; HIDDEN]; LAYERS];
        for cache in caches.iter().rev() {
            let dout = OUTPUT_SCALE * upstream;
            grad[B_OUT] += dout;
            let mut dh = [0.0; HIDDEN];
            for k in 0..HIDDEN {
                grad[W_OUT + k] += dout * cache.h_out[k];
                dh[k] = dout * t[W_OUT + k] + dh_next[LAYERS - 1][k];
            }
            for layer in (0..LAYERS).rev() {
                let cell = &cache.cells[layer];
                let g = &cell.gates;
                let (w_ih, n_in, w_hh, b) = self.cell(layer);
                let mut dz = [0.0; GATES];
                let mut dc_prev = [0.0; HIDDEN];
                for k in 0..HIDDEN {
                    let (i, f, gg, o) = (g[k], g[HIDDEN + k], g[2 * HIDDEN + k], g[3 * HIDDEN + k]);
                    let tc = cell.tanh_c[k];
                    let dc = dh[k] * o * (1.0 - tc * tc) + dc_next[layer][k];
                    dz[k] = dc * gg * i * (1.0 - i);
                    dz[HIDDEN + k] = dc * cell.c_prev[k] * f * (1.0 - f);
                    dz[2 * HIDDEN + k] = dc * i * (1.0 - gg * gg);
                    dz[3 * HIDDEN + k] = dh[k] * tc * o * (1.0 - o);
                    dc_prev[k] = dc * f;
                }
                let x_in = if layer == 0 {
                    let mut v = [0.0; HIDDEN];
                    v[0] = cache.input;
                    v
                } else {
                    self.layer_output(cache, layer - 1)
                };
                let mut dh_prev = [0.0; HIDDEN];
                let mut d_input = [0.0; HIDDEN];
                for r in 0..GATES {
                    grad[b + r] += dz[r];
                    for k in 0..n_in {
                        grad[w_ih + r * n_in + k] += dz[r] * x_in[k];
                        d_input[k] += t[w_ih + r * n_in + k] * dz[r];
                    }
                    for k in 0..HIDDEN {
                        grad[w_hh + r * HIDDEN + k] += dz[r] * cell.h_prev[k];
                        dh_prev[k] += t[w_hh + r * HIDDEN + k] * dz[r];
                    }
                }
                dh_next[layer] = dh_prev;
                dc_next[layer] = dc_prev;
                if layer > 0 {
                    for k in 0..HIDDEN {
                        dh[k] = d_input[k] + dh_next[layer - 1][k];
                    }
                }
            }
        }
    }

    /// Hidden output of `layer` at the step described by `cache`.
    fn layer_output(&self, cache: &StepCache, layer: usize) -> [f64; HIDDEN] {
        let cell = &cache.cells[layer];
        let mut h = [0.0; HIDDEN];
        for k in 0..HIDDEN {
            h[k] = cell.gates[3 * HIDDEN + k] * cell.tanh_c[k];
        }
        h
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ThetaDocument::from_params(self)).expect("Θ serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ThetaDocument = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        doc.into_params()
    }
}

/// `g` and the updated state for one coordinate.
pub fn lstm_step(theta: &LstmOptimizerParams, grad: f64, state: &LstmState) -> Result<(f64, LstmState)> {
    if !grad.is_finite() {
        return Err(Error::NonFinite("optimizee gradient"));
    }
    let mut next = *state;
    let (g, _) = theta.step_cached(grad, &mut next);
    Ok((g, next))
}

#[derive(Debug, Serialize, Deserialize)]
struct CellDocument {
    w_ih: Vec<Vec<f64>>,
    w_hh: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct HeadDocument {
    weight: Vec<f64>,
    bias: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ThetaDocument {
    schema: u32,
    layers: usize,
    hidden: usize,
    input: usize,
    output_scale: f64,
    cells: Vec<CellDocument>,
    head: HeadDocument,
}

fn rows(flat: &[f64], n_rows: usize, n_cols: usize) -> Vec<Vec<f64>> {
    (0..n_rows).map(|r| flat[r * n_cols..(r + 1) * n_cols].to_vec()).collect()
}

impl ThetaDocument {
    fn from_params(p: &LstmOptimizerParams) -> Self {
        let t = &p.theta;
        let cells = (0..LAYERS)
            .map(|layer| {
                let (w_ih, n_in, w_hh, b) = p.cell(layer);
                CellDocument {
                    w_ih: rows(&t[w_ih..], GATES, n_in),
                    w_hh: rows(&t[w_hh..], GATES, HIDDEN),
                    bias: t[b..b + GATES].to_vec(),
                }
            })
            .collect();
        Self {
            schema: THETA_SCHEMA,
            layers: LAYERS,
            hidden: HIDDEN,
            input: 1,
            output_scale: OUTPUT_SCALE,
            cells,
            head: HeadDocument {
                weight: t[W_OUT..W_OUT + HIDDEN].to_vec(),
                bias: t[B_OUT],
            },
        }
    }

    fn into_params(self) -> Result<LstmOptimizerParams> {
        let bad = |m: &str| Error::Schema(m.to_string());
        if self.schema != THETA_SCHEMA {
            return Err(bad(&format!("Θ schema {} (expected {THETA_SCHEMA})", self.schema)));
        }
        if self.layers != LAYERS || self.hidden != HIDDEN || self.input != 1 || self.cells.len() != LAYERS {
            return Err(bad("Θ shape header does not match a 2-layer, 5-unit, scalar-input LSTM"));
        }
        if self.output_scale != OUTPUT_SCALE {
            return Err(bad("unexpected output scale"));
        }
        let mut theta = Vec::with_capacity(PARAM_COUNT);
        for (layer, cell) in self.cells.into_iter().enumerate() {
            let n_in = if layer == 0 { 1 } else { HIDDEN };
            let ok = cell.w_ih.len() == GATES
                && cell.w_ih.iter().all(|r| r.len() == n_in)
                && cell.w_hh.len() == GATES
                && cell.w_hh.iter().all(|r| r.len() == HIDDEN)
                && cell.bias.len() == GATES;
            if !ok {
                return Err(bad(&format!("layer {} weight shapes", layer + 1)));
            }
            theta.extend(cell.w_ih.into_iter().flatten());
            theta.extend(cell.w_hh.into_iter().flatten());
            theta.extend(cell.bias);
        }
        if self.head.weight.len() != HIDDEN {
            return Err(bad("head weight shape"));
        }
        theta.extend(self.head.weight);
        theta.push(self.head.bias);
        LstmOptimizerParams::from_flat(theta).map_err(|e| Error::Schema(e.to_string()))
    }
}
