//! Single-layer pre-norm transformer encoder for modular addition.
//!
//! The input is the two-token sequence (a, b); the head classifies from the
//! last token's representation into p classes. Sub-layers follow the
//! pre-norm convention: x += Attn(LN(x)), then x += FF(LN(x)), with a final
//! LayerNorm before the classification head. The feed-forward uses the
//! tanh-approximation GELU.
//!
//! Flattening order (graph node i = parameter i), all matrices row-major
//! [out x in]:
//! ```text
//! tok_emb [p x d]      pos_emb [2 x d]
//! ln1_g [d]  ln1_b [d]
//! wq [d x d] bq [d]    wk [d x d] bk [d]    wv [d x d] bv [d]
//! wo [d x d] bo [d]
//! ln2_g [d]  ln2_b [d]
//! wf1 [ff x d] bf1 [ff]    wf2 [d x ff] bf2 [d]
//! lnf_g [d]  lnf_b [d]
//! wh [p x d] bh [p]
//! ```
//! Initialization: weights and embeddings ~ U(-b, b) with
//! b = INIT_SCALE/sqrt(fan_in) (fan_in = d for embeddings), biases zero,
//! LayerNorm gains one.

use super::{Architecture, Example, TrainError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ops::Range;

const LN_EPS: f64 = 1e-5;
const SEQ: usize = 2;

/// Uniform init bound multiplier: weights ~ U(+-INIT_SCALE/sqrt(fan_in)).
/// Large enough that training memorizes first and generalizes only under
/// weight decay (the delayed-generalization regime); at 1.0 the split is
/// learned directly and the train/test delay collapses.
const INIT_SCALE: f64 = 1.7;

#[derive(Debug, Clone)]
pub struct ModAddTransformer {
    p: usize,
    d: usize,
    heads: usize,
    ff: usize,
    init_scale: f64,
}

struct Layout {
    tok: Range<usize>,
    pos: Range<usize>,
    ln1_g: Range<usize>,
    ln1_b: Range<usize>,
    wq: Range<usize>,
    bq: Range<usize>,
    wk: Range<usize>,
    bk: Range<usize>,
    wv: Range<usize>,
    bv: Range<usize>,
    wo: Range<usize>,
    bo: Range<usize>,
    ln2_g: Range<usize>,
    ln2_b: Range<usize>,
    wf1: Range<usize>,
    bf1: Range<usize>,
    wf2: Range<usize>,
    bf2: Range<usize>,
    lnf_g: Range<usize>,
    lnf_b: Range<usize>,
    wh: Range<usize>,
    bh: Range<usize>,
    total: usize,
}

/// Per-example activations kept for the backward pass.
struct Workspace {
    x: [Vec<f64>; SEQ],
    xhat1: [Vec<f64>; SEQ],
    inv_std1: [f64; SEQ],
    h: [Vec<f64>; SEQ],
    q: [Vec<f64>; SEQ],
    k: [Vec<f64>; SEQ],
    v: [Vec<f64>; SEQ],
    att: Vec<[[f64; SEQ]; SEQ]>,
    ctx: [Vec<f64>; SEQ],
    y: [Vec<f64>; SEQ],
    yhat2: [Vec<f64>; SEQ],
    inv_std2: [f64; SEQ],
    m: [Vec<f64>; SEQ],
    u: [Vec<f64>; SEQ],
    a: [Vec<f64>; SEQ],
    z1: Vec<f64>,
    zhat: Vec<f64>,
    inv_stdf: f64,
    e: Vec<f64>,
    logits: Vec<f64>,
    probs: Vec<f64>,
    dlogits: Vec<f64>,
    // backward scratch
    dx: [Vec<f64>; SEQ],
    dh: [Vec<f64>; SEQ],
    dq: [Vec<f64>; SEQ],
    dk: [Vec<f64>; SEQ],
    dv: [Vec<f64>; SEQ],
    dctx: [Vec<f64>; SEQ],
    dy: [Vec<f64>; SEQ],
    dm: [Vec<f64>; SEQ],
    du: Vec<f64>,
    da: Vec<f64>,
    de: Vec<f64>,
    dvec: Vec<f64>,
}

impl Workspace {
    fn new(d: usize, ff: usize, p: usize, heads: usize) -> Self {
        let vd = || [vec![0.0; d], vec![0.0; d]];
        let vff = || [vec![0.0; ff], vec![0.0; ff]];
        Workspace {
            x: vd(),
            xhat1: vd(),
            inv_std1: [0.0; SEQ],
            h: vd(),
            q: vd(),
            k: vd(),
            v: vd(),
            att: vec![[[0.0; SEQ]; SEQ]; heads],
            ctx: vd(),
            y: vd(),
            yhat2: vd(),
            inv_std2: [0.0; SEQ],
            m: vd(),
            u: vff(),
            a: vff(),
            z1: vec![0.0; d],
            zhat: vec![0.0; d],
            inv_stdf: 0.0,
            e: vec![0.0; d],
            logits: vec![0.0; p],
            probs: vec![0.0; p],
            dlogits: vec![0.0; p],
            dx: vd(),
            dh: vd(),
            dq: vd(),
            dk: vd(),
            dv: vd(),
            dctx: vd(),
            dy: vd(),
            dm: vd(),
            du: vec![0.0; ff],
            da: vec![0.0; ff],
            de: vec![0.0; d],
            dvec: vec![0.0; d],
        }
    }
}

fn gelu(x: f64) -> f64 {
    const C0: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
    const C1: f64 = 0.044_715;
    0.5 * x * (1.0 + (C0 * (x + C1 * x * x * x)).tanh())
}

fn gelu_prime(x: f64) -> f64 {
    const C0: f64 = 0.797_884_560_802_865_4;
    const C1: f64 = 0.044_715;
    let t = (C0 * (x + C1 * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * C0 * (1.0 + 3.0 * C1 * x * x)
}

/// y = W x + b with W row-major [rows x cols].
fn matvec(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        let mut acc = b[r];
        for (wv, xv) in row.iter().zip(x.iter()) {
            acc += wv * xv;
        }
        *o = acc;
    }
}

/// Accumulate dW += dy x^T, db += dy, dx = W^T dy.
fn matvec_backward(
    w: &[f64],
    x: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    dx: &mut [f64],
) {
    let cols = x.len();
    for d in dx.iter_mut() {
        *d = 0.0;
    }
    for (r, &dyr) in dy.iter().enumerate() {
        db[r] += dyr;
        let row = &w[r * cols..(r + 1) * cols];
        let drow = &mut dw[r * cols..(r + 1) * cols];
        for c in 0..cols {
            drow[c] += dyr * x[c];
            dx[c] += dyr * row[c];
        }
    }
}

/// LayerNorm forward: xhat = (x - mean) * inv_std, out = g * xhat + b.
fn layer_norm(x: &[f64], g: &[f64], b: &[f64], xhat: &mut [f64], out: &mut [f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let inv_std = 1.0 / (var + LN_EPS).sqrt();
    for i in 0..x.len() {
        xhat[i] = (x[i] - mean) * inv_std;
        out[i] = g[i] * xhat[i] + b[i];
    }
    inv_std
}

/// LayerNorm backward. Adds into dg/db, writes dx (overwrites).
fn layer_norm_backward(
    dout: &[f64],
    xhat: &[f64],
    inv_std: f64,
    g: &[f64],
    dg: &mut [f64],
    db: &mut [f64],
    dx: &mut [f64],
) {
    let n = dout.len() as f64;
    let mut sum_dxhat = 0.0;
    let mut sum_dxhat_xhat = 0.0;
    for i in 0..dout.len() {
        let dxhat = dout[i] * g[i];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat[i];
        dg[i] += dout[i] * xhat[i];
        db[i] += dout[i];
    }
    let mean_dxhat = sum_dxhat / n;
    let mean_dxhat_xhat = sum_dxhat_xhat / n;
    for i in 0..dout.len() {
        let dxhat = dout[i] * g[i];
        dx[i] = inv_std * (dxhat - mean_dxhat - xhat[i] * mean_dxhat_xhat);
    }
}

impl ModAddTransformer {
    pub fn new(p: u32, d_model: usize, n_heads: usize, ff_multiplier: usize) -> Result<Self, TrainError> {
        if p < 2 {
            return Err(TrainError::InvalidModel(format!("modulus must be >= 2, got {p}")));
        }
        if n_heads == 0 || d_model == 0 || d_model % n_heads != 0 {
            return Err(TrainError::InvalidModel(format!(
                "d_model {d_model} must be a positive multiple of n_heads {n_heads}"
            )));
        }
        if ff_multiplier == 0 {
            return Err(TrainError::InvalidModel("ff_multiplier must be >= 1".into()));
        }
        Ok(ModAddTransformer {
            p: p as usize,
            d: d_model,
            heads: n_heads,
            ff: ff_multiplier * d_model,
            init_scale: INIT_SCALE,
        })
    }

    fn layout(&self) -> Layout {
        let (p, d, ff) = (self.p, self.d, self.ff);
        let mut at = 0usize;
        let mut seg = |len: usize| {
            let r = at..at + len;
            at += len;
            r
        };
        Layout {
            tok: seg(p * d),
            pos: seg(SEQ * d),
            ln1_g: seg(d),
            ln1_b: seg(d),
            wq: seg(d * d),
            bq: seg(d),
            wk: seg(d * d),
            bk: seg(d),
            wv: seg(d * d),
            bv: seg(d),
            wo: seg(d * d),
            bo: seg(d),
            ln2_g: seg(d),
            ln2_b: seg(d),
            wf1: seg(ff * d),
            bf1: seg(ff),
            wf2: seg(d * ff),
            bf2: seg(d),
            lnf_g: seg(d),
            lnf_b: seg(d),
            wh: seg(p * d),
            bh: seg(p),
            total: at,
        }
    }

    fn forward(&self, params: &[f64], ex: &Example, ws: &mut Workspace) {
        let l = self.layout();
        let (d, heads) = (self.d, self.heads);
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let tokens = [ex.a as usize, ex.b as usize];

        for s in 0..SEQ {
            let tok_row = &params[l.tok.clone()][tokens[s] * d..(tokens[s] + 1) * d];
            let pos_row = &params[l.pos.clone()][s * d..(s + 1) * d];
            for c in 0..d {
                ws.x[s][c] = tok_row[c] + pos_row[c];
            }
            ws.inv_std1[s] = layer_norm(
                &ws.x[s],
                &params[l.ln1_g.clone()],
                &params[l.ln1_b.clone()],
                &mut ws.xhat1[s],
                &mut ws.h[s],
            );
        }
        for s in 0..SEQ {
            matvec(&params[l.wq.clone()], &params[l.bq.clone()], &ws.h[s], &mut ws.q[s]);
            matvec(&params[l.wk.clone()], &params[l.bk.clone()], &ws.h[s], &mut ws.k[s]);
            matvec(&params[l.wv.clone()], &params[l.bv.clone()], &ws.h[s], &mut ws.v[s]);
        }
        for hd in 0..heads {
            let range = hd * dh..(hd + 1) * dh;
            let mut scores = [[0.0f64; SEQ]; SEQ];
            for s in 0..SEQ {
                for t in 0..SEQ {
                    let mut dot = 0.0;
                    for r in range.clone() {
                        dot += ws.q[s][r] * ws.k[t][r];
                    }
                    scores[s][t] = dot * scale;
                }
            }
            for s in 0..SEQ {
                let max = scores[s][0].max(scores[s][1]);
                let e0 = (scores[s][0] - max).exp();
                let e1 = (scores[s][1] - max).exp();
                let z = e0 + e1;
                ws.att[hd][s] = [e0 / z, e1 / z];
            }
            for s in 0..SEQ {
                for r in range.clone() {
                    ws.ctx[s][r] =
                        ws.att[hd][s][0] * ws.v[0][r] + ws.att[hd][s][1] * ws.v[1][r];
                }
            }
        }
        for s in 0..SEQ {
            // reuse dvec as the attention output before the residual add
            matvec(&params[l.wo.clone()], &params[l.bo.clone()], &ws.ctx[s], &mut ws.dvec);
            for c in 0..d {
                ws.y[s][c] = ws.x[s][c] + ws.dvec[c];
            }
        }
        // Only the last position feeds the head; its feed-forward is the
        // only one with a downstream consumer.
        let last = SEQ - 1;
        ws.inv_std2[last] = layer_norm(
            &ws.y[last],
            &params[l.ln2_g.clone()],
            &params[l.ln2_b.clone()],
            &mut ws.yhat2[last],
            &mut ws.m[last],
        );
        matvec(&params[l.wf1.clone()], &params[l.bf1.clone()], &ws.m[last], &mut ws.u[last]);
        for j in 0..self.ff {
            ws.a[last][j] = gelu(ws.u[last][j]);
        }
        matvec(&params[l.wf2.clone()], &params[l.bf2.clone()], &ws.a[last], &mut ws.dvec);
        for c in 0..d {
            ws.z1[c] = ws.y[last][c] + ws.dvec[c];
        }
        ws.inv_stdf = layer_norm(
            &ws.z1,
            &params[l.lnf_g.clone()],
            &params[l.lnf_b.clone()],
            &mut ws.zhat,
            &mut ws.e,
        );
        matvec(&params[l.wh.clone()], &params[l.bh.clone()], &ws.e, &mut ws.logits);

        let mut max = ws.logits[0];
        for &z in ws.logits.iter() {
            if z > max {
                max = z;
            }
        }
        let mut sum = 0.0;
        for (pr, &z) in ws.probs.iter_mut().zip(ws.logits.iter()) {
            *pr = (z - max).exp();
            sum += *pr;
        }
        for pr in ws.probs.iter_mut() {
            *pr /= sum;
        }
    }

    fn argmax_logits(ws: &Workspace) -> usize {
        let mut best = 0usize;
        let mut best_v = ws.logits[0];
        for (i, &z) in ws.logits.iter().enumerate() {
            if z > best_v {
                best_v = z;
                best = i;
            }
        }
        best
    }

    /// Backward for one example; forward must have run on `ws`.
    fn backward(&self, params: &[f64], ex: &Example, ws: &mut Workspace, grad: &mut [f64]) {
        let l = self.layout();
        let (d, heads, ff) = (self.d, self.heads, self.ff);
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let tokens = [ex.a as usize, ex.b as usize];
        let label = ex.label as usize;

        // softmax cross-entropy: dlogits = probs - onehot(label)
        ws.dlogits.copy_from_slice(&ws.probs);
        ws.dlogits[label] -= 1.0;

        {
            let (wh_g, bh_g) = {
                let (a, b) = grad[l.wh.start..l.bh.end].split_at_mut(l.wh.len());
                (a, b)
            };
            matvec_backward(&params[l.wh.clone()], &ws.e, &ws.dlogits, wh_g, bh_g, &mut ws.de);
        }

        // final LayerNorm -> dz1
        {
            let (g_slice, rest) = grad[l.lnf_g.start..l.lnf_b.end].split_at_mut(d);
            layer_norm_backward(
                &ws.de,
                &ws.zhat,
                ws.inv_stdf,
                &params[l.lnf_g.clone()],
                g_slice,
                rest,
                &mut ws.dvec,
            );
        }
        // dz for each position: only the last token feeds the head
        for s in 0..SEQ {
            for c in 0..d {
                ws.dy[s][c] = 0.0;
                ws.dx[s][c] = 0.0;
                ws.dq[s][c] = 0.0;
                ws.dk[s][c] = 0.0;
                ws.dv[s][c] = 0.0;
                ws.dctx[s][c] = 0.0;
                ws.dh[s][c] = 0.0;
            }
        }
        for c in 0..d {
            ws.dy[SEQ - 1][c] = ws.dvec[c];
        }

        // feed-forward sub-layer backward: only the last position has a
        // downstream consumer, so df = dz arrives solely there.
        let last = SEQ - 1;
        {
            let (wf2_g, bf2_g) = {
                let (a, b) = grad[l.wf2.start..l.bf2.end].split_at_mut(l.wf2.len());
                (a, b)
            };
            matvec_backward(&params[l.wf2.clone()], &ws.a[last], &ws.dy[last], wf2_g, bf2_g, &mut ws.da);
        }
        for j in 0..ff {
            ws.du[j] = ws.da[j] * gelu_prime(ws.u[last][j]);
        }
        {
            let (wf1_g, bf1_g) = {
                let (a, b) = grad[l.wf1.start..l.bf1.end].split_at_mut(l.wf1.len());
                (a, b)
            };
            matvec_backward(&params[l.wf1.clone()], &ws.m[last], &ws.du, wf1_g, bf1_g, &mut ws.dm[last]);
        }
        {
            let (g2_slice, b2_slice) = {
                let (a, b) = grad[l.ln2_g.start..l.ln2_b.end].split_at_mut(d);
                (a, b)
            };
            layer_norm_backward(
                &ws.dm[last],
                &ws.yhat2[last],
                ws.inv_std2[last],
                &params[l.ln2_g.clone()],
                g2_slice,
                b2_slice,
                &mut ws.dvec,
            );
        }
        for c in 0..d {
            ws.dy[last][c] += ws.dvec[c];
        }

        // attention sub-layer backward
        for s in 0..SEQ {
            // dao = dy (residual passthrough), dx += dy
            for c in 0..d {
                ws.dx[s][c] += ws.dy[s][c];
            }
            let (wo_g, bo_g) = {
                let (a, b) = grad[l.wo.start..l.bo.end].split_at_mut(l.wo.len());
                (a, b)
            };
            matvec_backward(&params[l.wo.clone()], &ws.ctx[s], &ws.dy[s], wo_g, bo_g, &mut ws.dctx[s]);
        }
        for hd in 0..heads {
            let range = hd * dh..(hd + 1) * dh;
            for s in 0..SEQ {
                let mut datt = [0.0f64; SEQ];
                for t in 0..SEQ {
                    let mut dot = 0.0;
                    for r in range.clone() {
                        dot += ws.dctx[s][r] * ws.v[t][r];
                    }
                    datt[t] = dot;
                    for r in range.clone() {
                        ws.dv[t][r] += ws.att[hd][s][t] * ws.dctx[s][r];
                    }
                }
                let a_row = ws.att[hd][s];
                let dot_adatt = a_row[0] * datt[0] + a_row[1] * datt[1];
                for t in 0..SEQ {
                    let dscore = a_row[t] * (datt[t] - dot_adatt) * scale;
                    for r in range.clone() {
                        ws.dq[s][r] += dscore * ws.k[t][r];
                        ws.dk[t][r] += dscore * ws.q[s][r];
                    }
                }
            }
        }
        for s in 0..SEQ {
            {
                let (wq_g, bq_g) = {
                    let (a, b) = grad[l.wq.start..l.bq.end].split_at_mut(l.wq.len());
                    (a, b)
                };
                matvec_backward(&params[l.wq.clone()], &ws.h[s], &ws.dq[s], wq_g, bq_g, &mut ws.dvec);
            }
            for c in 0..d {
                ws.dh[s][c] += ws.dvec[c];
            }
            {
                let (wk_g, bk_g) = {
                    let (a, b) = grad[l.wk.start..l.bk.end].split_at_mut(l.wk.len());
                    (a, b)
                };
                matvec_backward(&params[l.wk.clone()], &ws.h[s], &ws.dk[s], wk_g, bk_g, &mut ws.dvec);
            }
            for c in 0..d {
                ws.dh[s][c] += ws.dvec[c];
            }
            {
                let (wv_g, bv_g) = {
                    let (a, b) = grad[l.wv.start..l.bv.end].split_at_mut(l.wv.len());
                    (a, b)
                };
                matvec_backward(&params[l.wv.clone()], &ws.h[s], &ws.dv[s], wv_g, bv_g, &mut ws.dvec);
            }
            for c in 0..d {
                ws.dh[s][c] += ws.dvec[c];
            }

            {
                let (g1_slice, b1_slice) = {
                    let (a, b) = grad[l.ln1_g.start..l.ln1_b.end].split_at_mut(d);
                    (a, b)
                };
                layer_norm_backward(
                    &ws.dh[s],
                    &ws.xhat1[s],
                    ws.inv_std1[s],
                    &params[l.ln1_g.clone()],
                    g1_slice,
                    b1_slice,
                    &mut ws.dvec,
                );
            }
            for c in 0..d {
                ws.dx[s][c] += ws.dvec[c];
            }

            // embeddings
            let tok_g = &mut grad[l.tok.start + tokens[s] * d..l.tok.start + (tokens[s] + 1) * d];
            for c in 0..d {
                tok_g[c] += ws.dx[s][c];
            }
            let pos_g = &mut grad[l.pos.start + s * d..l.pos.start + (s + 1) * d];
            for c in 0..d {
                pos_g[c] += ws.dx[s][c];
            }
        }
    }
}

impl Architecture for ModAddTransformer {
    fn n_params(&self) -> usize {
        self.layout().total
    }

    fn init_params(&self, init_seed: u64) -> Vec<f32> {
        let l = self.layout();
        let d = self.d;
        let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
        let mut params = vec![0.0f32; l.total];
        let scale = self.init_scale;
        let mut fill = |range: Range<usize>, fan_in: usize, params: &mut Vec<f32>| {
            let bound = scale / (fan_in as f64).sqrt();
            for p in params[range].iter_mut() {
                *p = rng.gen_range(-bound..bound) as f32;
            }
        };
        fill(l.tok.clone(), d, &mut params);
        fill(l.pos.clone(), d, &mut params);
        for p in params[l.ln1_g.clone()].iter_mut() {
            *p = 1.0;
        }
        fill(l.wq.clone(), d, &mut params);
        fill(l.wk.clone(), d, &mut params);
        fill(l.wv.clone(), d, &mut params);
        fill(l.wo.clone(), d, &mut params);
        for p in params[l.ln2_g.clone()].iter_mut() {
            *p = 1.0;
        }
        fill(l.wf1.clone(), d, &mut params);
        fill(l.wf2.clone(), self.ff, &mut params);
        for p in params[l.lnf_g.clone()].iter_mut() {
            *p = 1.0;
        }
        fill(l.wh.clone(), d, &mut params);
        params
    }

    fn accumulate_loss_grad(
        &self,
        params: &[f64],
        examples: &[Example],
        grad_sum: &mut [f64],
    ) -> (f64, usize) {
        debug_assert_eq!(params.len(), self.n_params());
        let mut ws = Workspace::new(self.d, self.ff, self.p, self.heads);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for ex in examples {
            self.forward(params, ex, &mut ws);
            loss_sum += -ws.probs[ex.label as usize].ln();
            if Self::argmax_logits(&ws) == ex.label as usize {
                correct += 1;
            }
            self.backward(params, ex, &mut ws, grad_sum);
        }
        (loss_sum, correct)
    }

    fn evaluate(&self, params: &[f64], examples: &[Example]) -> (f64, usize) {
        let mut ws = Workspace::new(self.d, self.ff, self.p, self.heads);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for ex in examples {
            self.forward(params, ex, &mut ws);
            loss_sum += -ws.probs[ex.label as usize].ln();
            if Self::argmax_logits(&ws) == ex.label as usize {
                correct += 1;
            }
        }
        (loss_sum, correct)
    }
}
