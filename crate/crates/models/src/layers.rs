//! Building blocks shared by the detectors.

use std::rc::Rc;

use ndarray::Array2;
use rand::Rng as _;

use newsxai_core::rng::Rng;

use crate::autodiff::{Matrix, ParamId, ParamStore, Segments, Tape, Var};

fn xavier(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-a..a))
}

#[derive(Debug, Clone)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
}

impl Linear {
    pub fn new(store: &mut ParamStore, rng: &mut Rng, name: &str, input: usize, output: usize) -> Self {
        let w = store.add(format!("{name}.w"), xavier(rng, input, output));
        let b = store.add(format!("{name}.b"), Matrix::zeros((1, output)));
        Self { w, b }
    }

    pub fn forward(&self, t: &mut Tape, x: Var) -> Var {
        let w = t.param(self.w);
        let b = t.param(self.b);
        let h = t.matmul(x, w);
        t.add_row(h, b)
    }
}

/// Single-direction LSTM; gate order input, forget, cell, output.
#[derive(Debug, Clone)]
pub struct Lstm {
    pub wx: ParamId,
    pub wh: ParamId,
    pub b: ParamId,
    pub hidden: usize,
}

impl Lstm {
    pub fn new(store: &mut ParamStore, rng: &mut Rng, name: &str, input: usize, hidden: usize) -> Self {
        let wx = store.add(format!("{name}.wx"), xavier(rng, input, 4 * hidden));
        let wh = store.add(format!("{name}.wh"), xavier(rng, hidden, 4 * hidden));
        let mut bias = Matrix::zeros((1, 4 * hidden));
        bias.slice_mut(ndarray::s![.., hidden..2 * hidden]).fill(1.0);
        let b = store.add(format!("{name}.b"), bias);
        Self { wx, wh, b, hidden }
    }

    /// Runs over packed, time-major projected inputs. Sequences are sorted by
    /// decreasing length, so at step `t` the live rows are the first
    /// `active[t]`, stored from row `offsets[t]` of `xw`. Returns the hidden
    /// state per step, `active[t]` rows each.
    fn run(&self, t: &mut Tape, xw: Var, offsets: &[usize], active: &[usize], reverse: bool) -> Vec<Var> {
        let steps = active.len();
        let h_dim = self.hidden;
        let wh = t.param(self.wh);
        let b = t.param(self.b);
        let first = if reverse { active[steps - 1] } else { active[0] };
        let mut h = t.constant(Matrix::zeros((first, h_dim)));
        let mut c = t.constant(Matrix::zeros((first, h_dim)));
        let mut rows = first;
        let mut out = vec![h; steps];
        let order: Vec<usize> = if reverse {
            (0..steps).rev().collect()
        } else {
            (0..steps).collect()
        };
        for step in order {
            let n = active[step];
            if n < rows {
                h = t.slice_rows(h, 0, n);
                c = t.slice_rows(c, 0, n);
            } else if n > rows {
                let zh = t.constant(Matrix::zeros((n - rows, h_dim)));
                let zc = t.constant(Matrix::zeros((n - rows, h_dim)));
                h = t.vstack(&[h, zh]);
                c = t.vstack(&[c, zc]);
            }
            rows = n;
            let x = t.slice_rows(xw, offsets[step], offsets[step] + n);
            let hh = t.matmul(h, wh);
            let z = t.add(x, hh);
            let z = t.add_row(z, b);
            let zi = t.slice_cols(z, 0, h_dim);
            let zf = t.slice_cols(z, h_dim, 2 * h_dim);
            let zg = t.slice_cols(z, 2 * h_dim, 3 * h_dim);
            let zo = t.slice_cols(z, 3 * h_dim, 4 * h_dim);
            let i = t.sigmoid(zi);
            let f = t.sigmoid(zf);
            let g = t.tanh(zg);
            let o = t.sigmoid(zo);
            let fc = t.mul(f, c);
            let ig = t.mul(i, g);
            c = t.add(fc, ig);
            let tc = t.tanh(c);
            h = t.mul(o, tc);
            out[step] = h;
        }
        out
    }
}

/// Encoded sequences: one row per live token, grouped per sequence.
pub struct SeqOutput {
    pub states: Var,
    pub segments: Rc<Segments>,
}

#[derive(Debug, Clone)]
pub struct BiLstm {
    pub fwd: Lstm,
    pub bwd: Lstm,
}

impl BiLstm {
    pub fn new(store: &mut ParamStore, rng: &mut Rng, name: &str, input: usize, hidden: usize) -> Self {
        Self {
            fwd: Lstm::new(store, rng, &format!("{name}.fwd"), input, hidden),
            bwd: Lstm::new(store, rng, &format!("{name}.bwd"), input, hidden),
        }
    }

    pub fn output_dim(&self) -> usize {
        2 * self.fwd.hidden
    }

    /// Encodes token-id sequences looked up in `embedding`. Output rows are the
    /// concatenated forward/backward states, sequence-contiguous in input order.
    pub fn encode(&self, t: &mut Tape, embedding: Var, seqs: &[&[u32]]) -> SeqOutput {
        let segments = Rc::new(Segments::from_lengths(seqs.iter().map(|s| s.len())));
        let steps = seqs.iter().map(|s| s.len()).max().unwrap_or(0);
        if steps == 0 {
            let states = t.constant(Matrix::zeros((0, self.output_dim())));
            return SeqOutput { states, segments };
        }
        let mut sorted: Vec<usize> = (0..seqs.len()).collect();
        sorted.sort_by(|&a, &b| seqs[b].len().cmp(&seqs[a].len()).then(a.cmp(&b)));
        let mut rank = vec![0; seqs.len()];
        for (r, &i) in sorted.iter().enumerate() {
            rank[i] = r;
        }
        let mut ids = Vec::with_capacity(segments.rows());
        let mut offsets = Vec::with_capacity(steps);
        let mut active = Vec::with_capacity(steps);
        for step in 0..steps {
            offsets.push(ids.len());
            let live = sorted.iter().take_while(|&&i| seqs[i].len() > step).count();
            active.push(live);
            ids.extend(sorted[..live].iter().map(|&i| seqs[i][step] as usize));
        }
        let x = t.select_rows(embedding, ids);
        let wxf = t.param(self.fwd.wx);
        let wxb = t.param(self.bwd.wx);
        let xf = t.matmul(x, wxf);
        let xb = t.matmul(x, wxb);
        let hf = self.fwd.run(t, xf, &offsets, &active, false);
        let hb = self.bwd.run(t, xb, &offsets, &active, true);
        let f = t.vstack(&hf);
        let b = t.vstack(&hb);
        let both = t.hcat(&[f, b]);
        let mut order = Vec::with_capacity(segments.rows());
        for (i, s) in seqs.iter().enumerate() {
            for step in 0..s.len() {
                order.push(offsets[step] + rank[i]);
            }
        }
        let states = t.select_rows(both, order);
        SeqOutput { states, segments }
    }
}

/// Additive attention scorer: `v · tanh(W h + U q + b)`.
#[derive(Debug, Clone)]
pub struct AttentionScorer {
    pub proj: Linear,
    pub query: Option<ParamId>,
    pub v: ParamId,
}

impl AttentionScorer {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut Rng,
        name: &str,
        input: usize,
        query_dim: Option<usize>,
        attn: usize,
    ) -> Self {
        let proj = Linear::new(store, rng, &format!("{name}.proj"), input, attn);
        let query = query_dim.map(|q| store.add(format!("{name}.query"), xavier(rng, q, attn)));
        let v = store.add(format!("{name}.v"), xavier(rng, attn, 1));
        Self { proj, query, v }
    }

    /// Raw scores, one per row of `states`. `query_rows` must be row-aligned
    /// with `states` when the scorer is query-conditioned.
    pub fn scores(&self, t: &mut Tape, states: Var, query_rows: Option<Var>) -> Var {
        let mut h = self.proj.forward(t, states);
        if let (Some(u), Some(q)) = (self.query, query_rows) {
            let u = t.param(u);
            let qu = t.matmul(q, u);
            h = t.add(h, qu);
        }
        let a = t.tanh(h);
        let v = t.param(self.v);
        t.matmul(a, v)
    }
}

/// Inverted dropout; identity when `rng` is None.
pub fn dropout(t: &mut Tape, x: Var, p: f64, rng: Option<&mut Rng>) -> Var {
    match rng {
        Some(r) if p > 0.0 => {
            let keep = 1.0 - p;
            let dim = t.value(x).dim();
            let mask = Array2::from_shape_fn(dim, |_| if r.random_bool(keep) { 1.0 / keep } else { 0.0 });
            t.mul_const(x, mask)
        }
        _ => x,
    }
}

/// Zeroes whole rows with probability `p`, without rescaling; identity when
/// `rng` is None.
pub fn row_dropout(t: &mut Tape, x: Var, p: f64, rng: Option<&mut Rng>) -> Var {
    match rng {
        Some(r) if p > 0.0 => {
            let (rows, cols) = t.value(x).dim();
            let keep: Vec<f64> = (0..rows).map(|_| if r.random_bool(p) { 0.0 } else { 1.0 }).collect();
            let mask = Array2::from_shape_fn((rows, cols), |(i, _)| keep[i]);
            t.mul_const(x, mask)
        }
        _ => x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use newsxai_core::rng;

    #[test]
    fn padding_does_not_change_states() {
        let mut r = rng::seeded(1, "t");
        let mut store = ParamStore::default();
        let emb = store.add("emb", xavier(&mut r, 10, 4));
        let bi = BiLstm::new(&mut store, &mut r, "bi", 4, 3);
        let alone = {
            let mut t = Tape::new(&store);
            let e = t.param(emb);
            let out = bi.encode(&mut t, e, &[&[2, 3, 4]]);
            t.value(out.states).clone()
        };
        let batched = {
            let mut t = Tape::new(&store);
            let e = t.param(emb);
            let out = bi.encode(&mut t, e, &[&[5, 6, 7, 8, 9], &[2, 3, 4], &[]]);
            assert_eq!(out.segments.groups(), 3);
            let r = out.segments.range(1);
            t.value(out.states).slice(ndarray::s![r, ..]).to_owned()
        };
        for (a, b) in alone.iter().zip(batched.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
