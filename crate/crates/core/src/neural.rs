//! Character embedding, layer-normalized LSTM cell and additive attention,
//! each with an analytic backward pass, plus a finite-difference checker.
//!
//! LN-LSTM step, gate order `i f o g`:
//!
//! ```text
//! a      = W·x + U·h₋ + b                    (4H)
//! z_k    = γ_k ⊙ LN(a_k) + β_k               (each H-block k separately)
//! i,f,o  = σ(z_0), σ(z_1), σ(z_2);  g = tanh(z_3)
//! c      = f ⊙ c₋ + i ⊙ g
//! h      = o ⊙ tanh(γ_c ⊙ LN(c) + β_c)
//! ```
//!
//! `LN(v) = (v − mean v) / max(std v, 1e-5)` with the population standard
//! deviation, so a constant block maps to zeros.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::charset::CHARSET_SIZE;

pub const EMBEDDING_DIM: usize = 256;
pub const LN_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),
    #[error("id {0} is outside the embedding table")]
    IndexOutOfRange(usize),
    #[error("attention memory is empty")]
    EmptyMemory,
    #[error("unknown operation {0:?}")]
    UnknownOp(String),
    #[error("finite-difference step {0} outside [1e-7, 1e-3]")]
    InvalidEps(f64),
}

fn check_finite<'a, I: IntoIterator<Item = &'a f64>>(values: I, what: &'static str) -> Result<(), NeuralError> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NeuralError::NonFiniteInput(what))
    }
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> Array2<f64> {
    let dist = Normal::new(0.0, std).expect("positive std");
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

fn normal_vector(rng: &mut ChaCha8Rng, len: usize, mean: f64, std: f64) -> Array1<f64> {
    let dist = Normal::new(mean, std).expect("positive std");
    Array1::from_shape_simple_fn(len, || dist.sample(rng))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    weights: Array2<f64>,
}

impl EmbeddingTable {
    pub fn new(weights: Array2<f64>) -> Result<Self, NeuralError> {
        if weights.dim() != (CHARSET_SIZE, EMBEDDING_DIM) {
            return Err(NeuralError::ShapeMismatch(format!(
                "embedding table is {:?}, expected ({CHARSET_SIZE}, {EMBEDDING_DIM})",
                weights.dim()
            )));
        }
        check_finite(weights.iter(), "embedding table")?;
        Ok(Self { weights })
    }

    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { weights: normal_matrix(&mut rng, CHARSET_SIZE, EMBEDDING_DIM, 0.3) }
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }
}

/// Row gather: output row `i` is table row `ids[i]`.
pub fn embed(ids: &[usize], table: &EmbeddingTable) -> Result<Array2<f64>, NeuralError> {
    let mut out = Array2::zeros((ids.len(), EMBEDDING_DIM));
    for (i, &id) in ids.iter().enumerate() {
        if id >= CHARSET_SIZE {
            return Err(NeuralError::IndexOutOfRange(id));
        }
        out.row_mut(i).assign(&table.weights.row(id));
    }
    Ok(out)
}

/// Gradient of the table given the gradient of the gathered rows.
pub fn embed_backward(ids: &[usize], grad_out: &Array2<f64>) -> Array2<f64> {
    let mut grad = Array2::zeros((CHARSET_SIZE, EMBEDDING_DIM));
    for (i, &id) in ids.iter().enumerate() {
        let mut row = grad.row_mut(id);
        row += &grad_out.row(i);
    }
    grad
}

/// Normalized vector and the divisor used.
pub fn layer_norm(v: ArrayView1<f64>) -> (Array1<f64>, f64) {
    if v.iter().all(|x| *x == v[0]) {
        return (Array1::zeros(v.len()), LN_EPSILON);
    }
    let n = v.len() as f64;
    let mean = v.sum() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sigma = var.sqrt().max(LN_EPSILON);
    (v.mapv(|x| (x - mean) / sigma), sigma)
}

fn layer_norm_backward(xhat: ArrayView1<f64>, sigma: f64, dxhat: ArrayView1<f64>) -> Array1<f64> {
    let n = xhat.len() as f64;
    let mean_d = dxhat.sum() / n;
    if sigma > LN_EPSILON {
        let mean_dx = dxhat.dot(&xhat) / n;
        (&dxhat - mean_d - &xhat * mean_dx) / sigma
    } else {
        (&dxhat - mean_d) / sigma
    }
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    a.view().insert_axis(Axis(1)).dot(&b.view().insert_axis(Axis(0)))
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LnLstmParams {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub gamma_c: Array1<f64>,
    pub beta_c: Array1<f64>,
}

impl LnLstmParams {
    /// Zero weights and biases, unit gains.
    pub fn new(input: usize, hidden: usize) -> Self {
        Self {
            w: Array2::zeros((4 * hidden, input)),
            u: Array2::zeros((4 * hidden, hidden)),
            b: Array1::zeros(4 * hidden),
            gamma: Array1::ones(4 * hidden),
            beta: Array1::zeros(4 * hidden),
            gamma_c: Array1::ones(hidden),
            beta_c: Array1::zeros(hidden),
        }
    }

    pub fn random(input: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            w: normal_matrix(rng, 4 * hidden, input, 0.5),
            u: normal_matrix(rng, 4 * hidden, hidden, 0.5),
            b: normal_vector(rng, 4 * hidden, 0.0, 0.1),
            gamma: normal_vector(rng, 4 * hidden, 1.0, 0.1),
            beta: normal_vector(rng, 4 * hidden, 0.0, 0.1),
            gamma_c: normal_vector(rng, hidden, 1.0, 0.1),
            beta_c: normal_vector(rng, hidden, 0.0, 0.1),
        }
    }

    pub fn input_size(&self) -> usize {
        self.w.ncols()
    }

    pub fn hidden_size(&self) -> usize {
        self.u.ncols()
    }

    fn validate(&self) -> Result<(), NeuralError> {
        let (h, d) = (self.hidden_size(), self.input_size());
        let ok = self.w.dim() == (4 * h, d)
            && self.u.dim() == (4 * h, h)
            && [self.b.len(), self.gamma.len(), self.beta.len()] == [4 * h; 3]
            && [self.gamma_c.len(), self.beta_c.len()] == [h; 2];
        if !ok {
            return Err(NeuralError::ShapeMismatch(format!("inconsistent LN-LSTM parameters for D={d}, H={h}")));
        }
        for (name, t) in [
            ("W", self.w.view().into_shape_with_order(self.w.len()).expect("contiguous")),
            ("U", self.u.view().into_shape_with_order(self.u.len()).expect("contiguous")),
        ] {
            check_finite(t.iter(), name)?;
        }
        for (name, v) in [
            ("b", &self.b),
            ("gamma", &self.gamma),
            ("beta", &self.beta),
            ("gamma_c", &self.gamma_c),
            ("beta_c", &self.beta_c),
        ] {
            check_finite(v.iter(), name)?;
        }
        Ok(())
    }
}

/// Intermediate values of one step, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    x: Array1<f64>,
    h_prev: Array1<f64>,
    c_prev: Array1<f64>,
    ahat: Array1<f64>,
    sigmas: [f64; 4],
    gates: Array1<f64>,
    chat: Array1<f64>,
    sigma_c: f64,
    tanh_out: Array1<f64>,
    pub h: Array1<f64>,
    pub c: Array1<f64>,
}

impl LstmCache {
    /// Activated gates `i f o g`, concatenated.
    pub fn gates(&self) -> &Array1<f64> {
        &self.gates
    }
}

pub fn ln_lstm_step(
    x: &Array1<f64>,
    h_prev: &Array1<f64>,
    c_prev: &Array1<f64>,
    params: &LnLstmParams,
) -> Result<(Array1<f64>, Array1<f64>), NeuralError> {
    let cache = ln_lstm_forward(x, h_prev, c_prev, params)?;
    Ok((cache.h, cache.c))
}

pub fn ln_lstm_forward(
    x: &Array1<f64>,
    h_prev: &Array1<f64>,
    c_prev: &Array1<f64>,
    params: &LnLstmParams,
) -> Result<LstmCache, NeuralError> {
    params.validate()?;
    let (d, h) = (params.input_size(), params.hidden_size());
    if x.len() != d || h_prev.len() != h || c_prev.len() != h {
        return Err(NeuralError::ShapeMismatch(format!(
            "inputs x={}, h={}, c={} for D={d}, H={h}",
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    check_finite(x.iter(), "x")?;
    check_finite(h_prev.iter(), "h_prev")?;
    check_finite(c_prev.iter(), "c_prev")?;

    let a = params.w.dot(x) + params.u.dot(h_prev) + &params.b;
    let mut ahat = Array1::zeros(4 * h);
    let mut sigmas = [0.0; 4];
    for (k, sigma) in sigmas.iter_mut().enumerate() {
        let (n, sd) = layer_norm(a.slice(s![k * h..(k + 1) * h]));
        ahat.slice_mut(s![k * h..(k + 1) * h]).assign(&n);
        *sigma = sd;
    }
    let z = &ahat * &params.gamma + &params.beta;
    let mut gates = z.clone();
    gates.slice_mut(s![..3 * h]).mapv_inplace(sigmoid);
    gates.slice_mut(s![3 * h..]).mapv_inplace(f64::tanh);
    let (i, f, g) = (gates.slice(s![..h]), gates.slice(s![h..2 * h]), gates.slice(s![3 * h..]));
    let o = gates.slice(s![2 * h..3 * h]);
    let c = &f * c_prev + &i * &g;
    let (chat, sigma_c) = layer_norm(c.view());
    let tanh_out = (&chat * &params.gamma_c + &params.beta_c).mapv(f64::tanh);
    let h_new = &o * &tanh_out;
    Ok(LstmCache {
        x: x.clone(),
        h_prev: h_prev.clone(),
        c_prev: c_prev.clone(),
        ahat,
        sigmas,
        gates,
        chat,
        sigma_c,
        tanh_out,
        h: h_new,
        c,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmGrads {
    pub params: LnLstmParams,
    pub x: Array1<f64>,
    pub h_prev: Array1<f64>,
    pub c_prev: Array1<f64>,
}

/// Gradients of a scalar loss given `∂L/∂h` and `∂L/∂c` of this step.
pub fn ln_lstm_backward(cache: &LstmCache, params: &LnLstmParams, dh: &Array1<f64>, dc: &Array1<f64>) -> LstmGrads {
    let h = params.hidden_size();
    let gates = &cache.gates;
    let (i, f, o, g) = (
        gates.slice(s![..h]),
        gates.slice(s![h..2 * h]),
        gates.slice(s![2 * h..3 * h]),
        gates.slice(s![3 * h..]),
    );

    let d_o = dh * &cache.tanh_out;
    let d_pre_c = dh * &o * &cache.tanh_out.mapv(|t| 1.0 - t * t);
    let d_gamma_c = &d_pre_c * &cache.chat;
    let d_beta_c = d_pre_c.clone();
    let d_chat = &d_pre_c * &params.gamma_c;
    let dc_total = dc + &layer_norm_backward(cache.chat.view(), cache.sigma_c, d_chat.view());

    let d_f = &dc_total * &cache.c_prev;
    let d_i = &dc_total * &g;
    let d_g = &dc_total * &i;
    let d_c_prev = &dc_total * &f;

    let mut dz = Array1::zeros(4 * h);
    dz.slice_mut(s![..h]).assign(&(&d_i * &i * &i.mapv(|v| 1.0 - v)));
    dz.slice_mut(s![h..2 * h]).assign(&(&d_f * &f * &f.mapv(|v| 1.0 - v)));
    dz.slice_mut(s![2 * h..3 * h]).assign(&(&d_o * &o * &o.mapv(|v| 1.0 - v)));
    dz.slice_mut(s![3 * h..]).assign(&(&d_g * &g.mapv(|v| 1.0 - v * v)));

    let d_gamma = &dz * &cache.ahat;
    let d_beta = dz.clone();
    let d_ahat = &dz * &params.gamma;
    let mut da = Array1::zeros(4 * h);
    for k in 0..4 {
        let r = s![k * h..(k + 1) * h];
        da.slice_mut(r)
            .assign(&layer_norm_backward(cache.ahat.slice(r), cache.sigmas[k], d_ahat.slice(r)));
    }

    LstmGrads {
        params: LnLstmParams {
            w: outer(&da, &cache.x),
            u: outer(&da, &cache.h_prev),
            b: da.clone(),
            gamma: d_gamma,
            beta: d_beta,
            gamma_c: d_gamma_c,
            beta_c: d_beta_c,
        },
        x: params.w.t().dot(&da),
        h_prev: params.u.t().dot(&da),
        c_prev: d_c_prev,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    /// A × Q
    pub query_proj: Array2<f64>,
    /// A × M
    pub memory_proj: Array2<f64>,
    /// A
    pub score: Array1<f64>,
}

impl AttentionParams {
    pub fn random(query: usize, memory: usize, attn: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            query_proj: normal_matrix(rng, attn, query, 0.5),
            memory_proj: normal_matrix(rng, attn, memory, 0.5),
            score: normal_vector(rng, attn, 0.0, 1.0),
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(e: &Array1<f64>) -> Array1<f64> {
    let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp = e.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

fn attention_check(query: &Array1<f64>, memory: &Array2<f64>, p: &AttentionParams) -> Result<(), NeuralError> {
    if memory.nrows() == 0 {
        return Err(NeuralError::EmptyMemory);
    }
    let a = p.score.len();
    if p.query_proj.dim() != (a, query.len()) || p.memory_proj.dim() != (a, memory.ncols()) {
        return Err(NeuralError::ShapeMismatch(format!(
            "query {} / memory {} against projections {:?} and {:?}",
            query.len(),
            memory.ncols(),
            p.query_proj.dim(),
            p.memory_proj.dim()
        )));
    }
    check_finite(query.iter(), "query")?;
    check_finite(memory.iter(), "memory")?;
    check_finite(p.query_proj.iter().chain(p.memory_proj.iter()).chain(p.score.iter()), "attention parameters")
}

/// Additive energies `v·tanh(Pq·q + Pm·m_t)` and their softmax.
pub fn attention_energies(
    query: &Array1<f64>,
    memory: &Array2<f64>,
    p: &AttentionParams,
) -> Result<(Array1<f64>, Array2<f64>), NeuralError> {
    attention_check(query, memory, p)?;
    let q = p.query_proj.dot(query);
    let hidden = (memory.dot(&p.memory_proj.t()) + &q).mapv(f64::tanh);
    Ok((hidden.dot(&p.score), hidden))
}

pub fn attention_weights(query: &Array1<f64>, memory: &Array2<f64>, p: &AttentionParams) -> Result<Array1<f64>, NeuralError> {
    Ok(softmax(&attention_energies(query, memory, p)?.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionGrads {
    pub params: AttentionParams,
    pub query: Array1<f64>,
    pub memory: Array2<f64>,
}

/// Gradients given `∂L/∂weights`.
pub fn attention_backward(
    query: &Array1<f64>,
    memory: &Array2<f64>,
    p: &AttentionParams,
    d_weights: &Array1<f64>,
) -> Result<AttentionGrads, NeuralError> {
    let (energies, hidden) = attention_energies(query, memory, p)?;
    let w = softmax(&energies);
    let de = &w * &(d_weights - w.dot(d_weights));
    let d_score = hidden.t().dot(&de);
    // T × A
    let ds = &hidden.mapv(|u| 1.0 - u * u) * &de.view().insert_axis(Axis(1)) * p.score.view().insert_axis(Axis(0));
    let ds_sum = ds.sum_axis(Axis(0));
    Ok(AttentionGrads {
        params: AttentionParams {
            query_proj: outer(&ds_sum, query),
            memory_proj: ds.t().dot(memory),
            score: d_score,
        },
        query: p.query_proj.t().dot(&ds_sum),
        memory: ds.dot(&p.memory_proj),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorCheck {
    pub name: String,
    pub len: usize,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub op: String,
    pub seed: u64,
    pub eps: f64,
    pub tensors: Vec<TensorCheck>,
    pub max_rel_err: f64,
}

/// Gradients below this magnitude are compared absolutely.
pub const REL_ERR_FLOOR: f64 = 1e-6;

pub const GRAD_CHECK_OPS: [&str; 3] = ["embed", "ln_lstm_step", "attention_weights"];

type Forward = Box<dyn Fn(&[Vec<f64>]) -> Vec<f64>>;

struct Problem {
    names: Vec<&'static str>,
    tensors: Vec<Vec<f64>>,
    forward: Forward,
    analytic: Vec<Vec<f64>>,
    upstream: Vec<f64>,
}

fn flat1(v: &Array1<f64>) -> Vec<f64> {
    v.to_vec()
}

fn flat2(m: &Array2<f64>) -> Vec<f64> {
    m.iter().copied().collect()
}

fn arr1(v: &[f64]) -> Array1<f64> {
    Array1::from_vec(v.to_vec())
}

fn arr2(v: &[f64], rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_vec((rows, cols), v.to_vec()).expect("length matches shape")
}

fn embed_problem(rng: &mut ChaCha8Rng) -> Problem {
    let table = EmbeddingTable::random(rand::Rng::random(rng));
    let ids: Vec<usize> = (0..12).map(|_| rand::Rng::random_range(rng, 0..CHARSET_SIZE)).collect();
    let upstream = flat2(&normal_matrix(rng, ids.len(), EMBEDDING_DIM, 1.0));
    let g = arr2(&upstream, ids.len(), EMBEDDING_DIM);
    let analytic = vec![flat2(&embed_backward(&ids, &g))];
    Problem {
        names: vec!["table"],
        tensors: vec![flat2(table.weights())],
        forward: Box::new(move |t| {
            ids.iter()
                .flat_map(|&id| t[0][id * EMBEDDING_DIM..(id + 1) * EMBEDDING_DIM].iter().copied())
                .collect()
        }),
        analytic,
        upstream,
    }
}

const LSTM_D: usize = 3;
const LSTM_H: usize = 4;

fn lstm_from(t: &[Vec<f64>]) -> (LnLstmParams, Array1<f64>, Array1<f64>, Array1<f64>) {
    let (d, h) = (LSTM_D, LSTM_H);
    let p = LnLstmParams {
        w: arr2(&t[0], 4 * h, d),
        u: arr2(&t[1], 4 * h, h),
        b: arr1(&t[2]),
        gamma: arr1(&t[3]),
        beta: arr1(&t[4]),
        gamma_c: arr1(&t[5]),
        beta_c: arr1(&t[6]),
    };
    (p, arr1(&t[7]), arr1(&t[8]), arr1(&t[9]))
}

fn lstm_problem(rng: &mut ChaCha8Rng) -> Problem {
    let (d, h) = (LSTM_D, LSTM_H);
    let p = LnLstmParams::random(d, h, rng);
    let x = normal_vector(rng, d, 0.0, 1.0);
    let h0 = normal_vector(rng, h, 0.0, 0.5);
    let c0 = normal_vector(rng, h, 0.0, 0.5);
    let dh = normal_vector(rng, h, 0.0, 1.0);
    let dc = normal_vector(rng, h, 0.0, 1.0);
    let cache = ln_lstm_forward(&x, &h0, &c0, &p).expect("consistent shapes");
    let g = ln_lstm_backward(&cache, &p, &dh, &dc);
    let tensors = vec![
        flat2(&p.w),
        flat2(&p.u),
        flat1(&p.b),
        flat1(&p.gamma),
        flat1(&p.beta),
        flat1(&p.gamma_c),
        flat1(&p.beta_c),
        flat1(&x),
        flat1(&h0),
        flat1(&c0),
    ];
    let analytic = vec![
        flat2(&g.params.w),
        flat2(&g.params.u),
        flat1(&g.params.b),
        flat1(&g.params.gamma),
        flat1(&g.params.beta),
        flat1(&g.params.gamma_c),
        flat1(&g.params.beta_c),
        flat1(&g.x),
        flat1(&g.h_prev),
        flat1(&g.c_prev),
    ];
    let mut upstream = flat1(&dh);
    upstream.extend(dc.iter());
    Problem {
        names: vec!["W", "U", "b", "gamma", "beta", "gamma_c", "beta_c", "x", "h_prev", "c_prev"],
        tensors,
        forward: Box::new(|t| {
            let (p, x, h0, c0) = lstm_from(t);
            let (h, c) = ln_lstm_step(&x, &h0, &c0, &p).expect("consistent shapes");
            let mut out = h.to_vec();
            out.extend(c.iter());
            out
        }),
        analytic,
        upstream,
    }
}

const ATT_Q: usize = 3;
const ATT_M: usize = 4;
const ATT_A: usize = 5;
const ATT_T: usize = 6;

fn attention_problem(rng: &mut ChaCha8Rng) -> Problem {
    let p = AttentionParams::random(ATT_Q, ATT_M, ATT_A, rng);
    let q = normal_vector(rng, ATT_Q, 0.0, 1.0);
    let m = normal_matrix(rng, ATT_T, ATT_M, 1.0);
    let g = normal_vector(rng, ATT_T, 0.0, 1.0);
    let grads = attention_backward(&q, &m, &p, &g).expect("consistent shapes");
    Problem {
        names: vec!["query_proj", "memory_proj", "score", "query", "memory"],
        tensors: vec![flat2(&p.query_proj), flat2(&p.memory_proj), flat1(&p.score), flat1(&q), flat2(&m)],
        forward: Box::new(|t| {
            let p = AttentionParams {
                query_proj: arr2(&t[0], ATT_A, ATT_Q),
                memory_proj: arr2(&t[1], ATT_A, ATT_M),
                score: arr1(&t[2]),
            };
            attention_weights(&arr1(&t[3]), &arr2(&t[4], ATT_T, ATT_M), &p)
                .expect("consistent shapes")
                .to_vec()
        }),
        analytic: vec![
            flat2(&grads.params.query_proj),
            flat2(&grads.params.memory_proj),
            flat1(&grads.params.score),
            flat1(&grads.query),
            flat2(&grads.memory),
        ],
        upstream: g.to_vec(),
    }
}

/// Central differences of `L = ⟨G, op(θ)⟩` for every tensor of `op`.
///
/// The numeric derivative is `Σ_j G_j·(out⁺_j − out⁻_j)/(θ⁺ − θ⁻)` with the
/// realized step in the denominator. Relative error is
/// `|a − n| / max(|a|, |n|, 1e-6)`.
pub fn grad_check(op: &str, seed: u64, eps: f64) -> Result<GradCheckReport, NeuralError> {
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(NeuralError::InvalidEps(eps));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut problem = match op {
        "embed" => embed_problem(&mut rng),
        "ln_lstm_step" => lstm_problem(&mut rng),
        "attention_weights" => attention_problem(&mut rng),
        other => return Err(NeuralError::UnknownOp(other.to_string())),
    };

    let mut tensors = Vec::new();
    for k in 0..problem.tensors.len() {
        let mut max_abs: f64 = 0.0;
        let mut max_rel: f64 = 0.0;
        for j in 0..problem.tensors[k].len() {
            let orig = problem.tensors[k][j];
            let plus = orig + eps;
            let minus = orig - eps;
            problem.tensors[k][j] = plus;
            let out_plus = (problem.forward)(&problem.tensors);
            problem.tensors[k][j] = minus;
            let out_minus = (problem.forward)(&problem.tensors);
            problem.tensors[k][j] = orig;
            let step = plus - minus;
            let numeric: f64 = problem
                .upstream
                .iter()
                .zip(out_plus.iter().zip(&out_minus))
                .fold(0.0, |acc, (g, (a, b))| acc + g * ((a - b) / step));
            let analytic = problem.analytic[k][j];
            let abs = (analytic - numeric).abs();
            max_abs = max_abs.max(abs);
            max_rel = max_rel.max(abs / analytic.abs().max(numeric.abs()).max(REL_ERR_FLOOR));
        }
        tensors.push(TensorCheck {
            name: problem.names[k].to_string(),
            len: problem.tensors[k].len(),
            max_abs_err: max_abs,
            max_rel_err: max_rel,
        });
    }
    let max_rel_err = tensors.iter().map(|t| t.max_rel_err).fold(0.0, f64::max);
    Ok(GradCheckReport { op: op.to_string(), seed, eps, tensors, max_rel_err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_fixed_point() {
        let p = LnLstmParams::new(3, 4);
        let (h, c) = ln_lstm_step(&Array1::zeros(3), &Array1::zeros(4), &Array1::zeros(4), &p).unwrap();
        assert!(h.iter().all(|v| *v == 0.0));
        assert!(c.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lstm_shape_and_finiteness_errors() {
        let p = LnLstmParams::new(3, 4);
        assert!(matches!(
            ln_lstm_step(&Array1::zeros(2), &Array1::zeros(4), &Array1::zeros(4), &p),
            Err(NeuralError::ShapeMismatch(_))
        ));
        assert!(matches!(
            ln_lstm_step(&array![0.0, f64::NAN, 0.0], &Array1::zeros(4), &Array1::zeros(4), &p),
            Err(NeuralError::NonFiniteInput("x"))
        ));
    }

    #[test]
    fn embed_gathers_rows() {
        let mut w = Array2::zeros((CHARSET_SIZE, EMBEDDING_DIM));
        w[[5, 5]] = 1.0;
        let table = EmbeddingTable::new(w).unwrap();
        let out = embed(&[5], &table).unwrap();
        assert_eq!(out.row(0).sum(), 1.0);
        assert_eq!(out[[0, 5]], 1.0);
        assert_eq!(embed(&[], &table).unwrap().dim(), (0, EMBEDDING_DIM));
        let r = EmbeddingTable::random(1);
        let two = embed(&[3, 3], &r).unwrap();
        assert_eq!(two.row(0), two.row(1));
        assert_eq!(embed(&[78], &r), Err(NeuralError::IndexOutOfRange(78)));
        assert!(EmbeddingTable::new(Array2::zeros((77, 256))).is_err());
    }

    #[test]
    fn attention_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = AttentionParams::random(3, 4, 5, &mut rng);
        let q = array![0.1, -0.2, 0.3];
        let same = Array2::from_shape_fn((4, 4), |(_, j)| j as f64 * 0.1);
        let w = attention_weights(&q, &same, &p).unwrap();
        for v in &w {
            assert!((v - 0.25).abs() < 1e-15);
        }
        let one = Array2::from_elem((1, 4), 0.7);
        assert_eq!(attention_weights(&q, &one, &p).unwrap(), array![1.0]);
        assert_eq!(
            attention_weights(&q, &Array2::zeros((0, 4)), &p),
            Err(NeuralError::EmptyMemory)
        );
    }

    #[test]
    fn softmax_shift_invariance() {
        let e = array![1.0, -2.0, 0.5, 3.0];
        let shifted = e.mapv(|v| v + 100.0);
        let (a, b) = (softmax(&e), softmax(&shifted));
        assert!((a.sum() - 1.0).abs() < 1e-12);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn grad_check_ops() {
        let embed = grad_check("embed", 0, 1e-5).unwrap();
        assert_eq!(embed.max_rel_err, 0.0);
        assert!(grad_check("ln_lstm_step", 0, 1e-5).unwrap().max_rel_err <= 1e-4);
        assert!(grad_check("attention_weights", 0, 1e-5).unwrap().max_rel_err <= 1e-4);
        assert_eq!(grad_check("gru", 0, 1e-5), Err(NeuralError::UnknownOp("gru".into())));
        assert_eq!(grad_check("embed", 0, 1e-2), Err(NeuralError::InvalidEps(1e-2)));
    }
}
