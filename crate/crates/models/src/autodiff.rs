//! Reverse-mode automatic differentiation over dense `f64` matrices.
//!
//! A [`Tape`] records operations for one forward pass. Parameters live in a
//! [`ParamStore`] outside the tape and are read by reference, so building a
//! tape never copies weights. [`Tape::backward`] returns gradients keyed by
//! parameter.
//!
//! Variable-length structure (tokens in a headline, sentences in an article,
//! articles in a story) is expressed with [`Segments`]: consecutive row ranges
//! of a matrix, each forming one group for softmax and pooling.

use std::collections::BTreeMap;
use std::rc::Rc;

use ndarray::{concatenate, s, Array2, Axis};
use serde::{Deserialize, Serialize};

pub type Matrix = Array2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ParamId(pub usize);

/// Named, trainable matrices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Matrix>,
    /// Rows pinned to zero after every update (embedding padding rows).
    zero_rows: Vec<(ParamId, usize)>,
}

/// Serialized form of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: [usize; 2],
    pub data: Vec<f64>,
}

impl ParamStore {
    pub fn add(&mut self, name: impl Into<String>, value: Matrix) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    pub fn pin_zero_row(&mut self, id: ParamId, row: usize) {
        self.values[id.0].row_mut(row).fill(0.0);
        self.zero_rows.push((id, row));
    }

    pub fn get(&self, id: ParamId) -> &Matrix {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Matrix {
        &mut self.values[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }

    fn enforce_pins(&mut self) {
        for &(id, row) in &self.zero_rows {
            self.values[id.0].row_mut(row).fill(0.0);
        }
    }

    pub fn to_tensors(&self) -> Vec<NamedTensor> {
        self.names
            .iter()
            .zip(&self.values)
            .map(|(n, v)| NamedTensor {
                name: n.clone(),
                shape: [v.nrows(), v.ncols()],
                data: v.iter().copied().collect(),
            })
            .collect()
    }

    /// Overwrites values from tensors produced by [`ParamStore::to_tensors`]
    /// on a store with the same layout.
    pub fn load_tensors(&mut self, tensors: &[NamedTensor]) -> Result<(), String> {
        if tensors.len() != self.values.len() {
            return Err(format!(
                "expected {} tensors, found {}",
                self.values.len(),
                tensors.len()
            ));
        }
        for (i, t) in tensors.iter().enumerate() {
            if t.name != self.names[i] {
                return Err(format!("tensor {i}: expected {:?}, found {:?}", self.names[i], t.name));
            }
            let shape = (t.shape[0], t.shape[1]);
            if shape != self.values[i].dim() || t.data.len() != shape.0 * shape.1 {
                return Err(format!("tensor {:?}: shape mismatch", t.name));
            }
            self.values[i] = Array2::from_shape_vec(shape, t.data.clone()).map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    /// Hex SHA-256 over all parameter bytes in order.
    pub fn checksum(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for v in &self.values {
            for x in v.iter() {
                h.update(x.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Consecutive row groups: group `g` spans rows `offsets[g]..offsets[g + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segments {
    offsets: Vec<usize>,
}

impl Segments {
    pub fn from_lengths<I: IntoIterator<Item = usize>>(lengths: I) -> Self {
        let mut offsets = vec![0];
        for l in lengths {
            offsets.push(offsets.last().unwrap() + l);
        }
        Self { offsets }
    }

    pub fn groups(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn rows(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, g: usize) -> std::ops::Range<usize> {
        self.offsets[g]..self.offsets[g + 1]
    }

    /// Group index of every row.
    pub fn owners(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.rows());
        for g in 0..self.groups() {
            out.extend(std::iter::repeat_n(g, self.range(g).len()));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Const,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    MulConst(Var, Matrix),
    Sigmoid(Var),
    Tanh(Var),
    HCat(Vec<Var>),
    VStack(Vec<Var>),
    SliceCols(Var, usize, usize),
    SliceRows(Var, usize, usize),
    SelectRows(Var, Rc<Vec<usize>>),
    SegSoftmax(Var, Rc<Segments>),
    SegWeightedSum(Var, Var, Rc<Segments>),
    BceWithLogits(Var, Rc<Vec<f64>>),
}

struct Node {
    value: Option<Matrix>,
    op: Op,
}

/// Gradients of a scalar with respect to each parameter touched by the tape.
#[derive(Debug, Clone, Default)]
pub struct Gradients {
    pub by_param: BTreeMap<ParamId, Matrix>,
}

impl Gradients {
    pub fn get(&self, id: ParamId) -> Option<&Matrix> {
        self.by_param.get(&id)
    }

    pub fn global_norm(&self) -> f64 {
        self.by_param
            .values()
            .map(|g| g.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

pub struct Tape<'p> {
    store: &'p ParamStore,
    nodes: Vec<Node>,
    param_vars: BTreeMap<ParamId, Var>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl<'p> Tape<'p> {
    pub fn new(store: &'p ParamStore) -> Self {
        Self {
            store,
            nodes: Vec::new(),
            param_vars: BTreeMap::new(),
        }
    }

    pub fn value(&self, v: Var) -> &Matrix {
        let node = &self.nodes[v.0];
        match (&node.value, &node.op) {
            (Some(m), _) => m,
            (None, Op::Param(id)) => self.store.get(*id),
            _ => unreachable!("node without value"),
        }
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node {
            value: Some(value),
            op,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(&v) = self.param_vars.get(&id) {
            return v;
        }
        self.nodes.push(Node {
            value: None,
            op: Op::Param(id),
        });
        let v = Var(self.nodes.len() - 1);
        self.param_vars.insert(id, v);
        v
    }

    pub fn constant(&mut self, m: Matrix) -> Var {
        self.push(m, Op::Const)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add(a, b))
    }

    /// `a` (n x m) plus row vector `b` (1 x m) broadcast over rows.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::AddRow(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) * self.value(b);
        self.push(v, Op::Mul(a, b))
    }

    /// Elementwise product with a constant (masks, dropout).
    pub fn mul_const(&mut self, a: Var, c: Matrix) -> Var {
        let v = self.value(a) * &c;
        self.push(v, Op::MulConst(a, c))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(sigmoid);
        self.push(v, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(f64::tanh);
        self.push(v, Op::Tanh(a))
    }

    pub fn hcat(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|&p| self.value(p).view()).collect();
        let v = concatenate(Axis(1), &views).expect("hcat row counts match");
        self.push(v, Op::HCat(parts.to_vec()))
    }

    pub fn vstack(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|&p| self.value(p).view()).collect();
        let v = concatenate(Axis(0), &views).expect("vstack column counts match");
        self.push(v, Op::VStack(parts.to_vec()))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Var {
        let v = self.value(a).slice(s![.., start..end]).to_owned();
        self.push(v, Op::SliceCols(a, start, end))
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Var {
        let v = self.value(a).slice(s![start..end, ..]).to_owned();
        self.push(v, Op::SliceRows(a, start, end))
    }

    /// Gathers rows by index; doubles as embedding lookup.
    pub fn select_rows(&mut self, a: Var, idx: Vec<usize>) -> Var {
        let v = self.value(a).select(Axis(0), &idx);
        self.push(v, Op::SelectRows(a, Rc::new(idx)))
    }

    /// Softmax of an (n x 1) column within each segment.
    pub fn seg_softmax(&mut self, scores: Var, segs: &Rc<Segments>) -> Var {
        let x = self.value(scores);
        assert_eq!(x.ncols(), 1);
        let mut out = Matrix::zeros(x.dim());
        for g in 0..segs.groups() {
            let r = segs.range(g);
            if r.is_empty() {
                continue;
            }
            let max = r.clone().map(|i| x[[i, 0]]).fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for i in r.clone() {
                let e = (x[[i, 0]] - max).exp();
                out[[i, 0]] = e;
                z += e;
            }
            for i in r {
                out[[i, 0]] /= z;
            }
        }
        self.push(out, Op::SegSoftmax(scores, segs.clone()))
    }

    /// Per segment, the sum of value rows weighted by an (n x 1) weight column.
    /// Empty segments yield zero rows.
    pub fn seg_weighted_sum(&mut self, values: Var, weights: Var, segs: &Rc<Segments>) -> Var {
        let v = self.value(values);
        let w = self.value(weights);
        let mut out = Matrix::zeros((segs.groups(), v.ncols()));
        for g in 0..segs.groups() {
            let mut row = out.row_mut(g);
            for i in segs.range(g) {
                row.scaled_add(w[[i, 0]], &v.row(i));
            }
        }
        self.push(out, Op::SegWeightedSum(values, weights, segs.clone()))
    }

    /// Segment means (zero for empty segments).
    pub fn seg_mean(&mut self, values: Var, segs: &Rc<Segments>) -> Var {
        let mut w = Matrix::zeros((segs.rows(), 1));
        for g in 0..segs.groups() {
            let r = segs.range(g);
            let n = r.len() as f64;
            for i in r {
                w[[i, 0]] = 1.0 / n;
            }
        }
        let w = self.constant(w);
        self.seg_weighted_sum(values, w, segs)
    }

    /// Mean binary cross-entropy of (n x 1) logits against targets in [0, 1].
    pub fn bce_with_logits(&mut self, logits: Var, targets: Vec<f64>) -> Var {
        let z = self.value(logits);
        assert_eq!(z.nrows(), targets.len());
        let n = targets.len().max(1) as f64;
        let loss: f64 = z
            .column(0)
            .iter()
            .zip(&targets)
            .map(|(&z, &t)| z.max(0.0) - z * t + (-z.abs()).exp().ln_1p())
            .sum::<f64>()
            / n;
        self.push(Matrix::from_elem((1, 1), loss), Op::BceWithLogits(logits, Rc::new(targets)))
    }

    /// Gradients of the 1x1 node `loss` with respect to every parameter.
    pub fn backward(&self, loss: Var) -> Gradients {
        assert_eq!(self.value(loss).dim(), (1, 1), "backward needs a scalar");
        let mut grads: Vec<Option<Matrix>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Matrix::from_elem((1, 1), 1.0));
        let mut out = Gradients::default();

        fn acc(grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
            match &mut grads[v.0] {
                Some(existing) => *existing += &g,
                slot @ None => *slot = Some(g),
            }
        }

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Const => {}
                Op::Param(id) => {
                    out.by_param
                        .entry(*id)
                        .and_modify(|e| *e += &g)
                        .or_insert(g);
                }
                Op::MatMul(a, b) => {
                    let ga = g.dot(&self.value(*b).t());
                    let gb = self.value(*a).t().dot(&g);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g);
                }
                Op::AddRow(a, b) => {
                    let gb = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    acc(&mut grads, *a, g);
                    acc(&mut grads, *b, gb);
                }
                Op::Mul(a, b) => {
                    let ga = &g * self.value(*b);
                    let gb = &g * self.value(*a);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::MulConst(a, c) => acc(&mut grads, *a, &g * c),
                Op::Sigmoid(a) => {
                    let y = node.value.as_ref().unwrap();
                    acc(&mut grads, *a, &g * &y.mapv(|y| y * (1.0 - y)));
                }
                Op::Tanh(a) => {
                    let y = node.value.as_ref().unwrap();
                    acc(&mut grads, *a, &g * &y.mapv(|y| 1.0 - y * y));
                }
                Op::HCat(parts) => {
                    let mut start = 0;
                    for &p in parts {
                        let w = self.value(p).ncols();
                        acc(&mut grads, p, g.slice(s![.., start..start + w]).to_owned());
                        start += w;
                    }
                }
                Op::VStack(parts) => {
                    let mut start = 0;
                    for &p in parts {
                        let h = self.value(p).nrows();
                        acc(&mut grads, p, g.slice(s![start..start + h, ..]).to_owned());
                        start += h;
                    }
                }
                Op::SliceCols(a, start, end) => {
                    let mut ga = Matrix::zeros(self.value(*a).dim());
                    ga.slice_mut(s![.., *start..*end]).assign(&g);
                    acc(&mut grads, *a, ga);
                }
                Op::SliceRows(a, start, end) => {
                    let mut ga = Matrix::zeros(self.value(*a).dim());
                    ga.slice_mut(s![*start..*end, ..]).assign(&g);
                    acc(&mut grads, *a, ga);
                }
                Op::SelectRows(a, idx) => {
                    let mut ga = Matrix::zeros(self.value(*a).dim());
                    for (r, &src) in idx.iter().enumerate() {
                        let mut dst = ga.row_mut(src);
                        dst += &g.row(r);
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::SegSoftmax(a, segs) => {
                    let y = node.value.as_ref().unwrap();
                    let mut ga = Matrix::zeros(y.dim());
                    for grp in 0..segs.groups() {
                        let r = segs.range(grp);
                        let dot: f64 = r.clone().map(|j| g[[j, 0]] * y[[j, 0]]).sum();
                        for j in r {
                            ga[[j, 0]] = y[[j, 0]] * (g[[j, 0]] - dot);
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::SegWeightedSum(values, weights, segs) => {
                    let v = self.value(*values);
                    let w = self.value(*weights);
                    let mut gv = Matrix::zeros(v.dim());
                    let mut gw = Matrix::zeros(w.dim());
                    for grp in 0..segs.groups() {
                        let gr = g.row(grp);
                        for j in segs.range(grp) {
                            gv.row_mut(j).scaled_add(w[[j, 0]], &gr);
                            gw[[j, 0]] = v.row(j).dot(&gr);
                        }
                    }
                    acc(&mut grads, *values, gv);
                    acc(&mut grads, *weights, gw);
                }
                Op::BceWithLogits(a, targets) => {
                    let z = self.value(*a);
                    let n = targets.len().max(1) as f64;
                    let scale = g[[0, 0]] / n;
                    let mut ga = Matrix::zeros(z.dim());
                    for (r, &t) in targets.iter().enumerate() {
                        ga[[r, 0]] = (sigmoid(z[[r, 0]]) - t) * scale;
                    }
                    acc(&mut grads, *a, ga);
                }
            }
        }
        out
    }
}

pub fn sigmoid_scalar(x: f64) -> f64 {
    sigmoid(x)
}

/// Adam with global gradient-norm clipping.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub clip_norm: f64,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
    t: i32,
}

impl Adam {
    pub fn new(store: &ParamStore, learning_rate: f64) -> Self {
        let zeros: Vec<Matrix> = store.values.iter().map(|v| Matrix::zeros(v.dim())).collect();
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: 5.0,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn step(&mut self, store: &mut ParamStore, grads: &Gradients) {
        self.t += 1;
        let norm = grads.global_norm();
        let scale = if norm > self.clip_norm {
            self.clip_norm / norm
        } else {
            1.0
        };
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for (id, g) in &grads.by_param {
            let (b1, b2, eps, lr) = (self.beta1, self.beta2, self.epsilon, self.learning_rate);
            let m = &mut self.m[id.0];
            let v = &mut self.v[id.0];
            let p = &mut store.values[id.0];
            ndarray::Zip::from(p)
                .and(m)
                .and(v)
                .and(g)
                .for_each(|p, m, v, &g| {
                    let g = g * scale;
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + eps);
                });
        }
        store.enforce_pins();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    /// Central differences of `f` with respect to every entry of parameter `id`.
    fn numeric_grad(store: &mut ParamStore, id: ParamId, f: &dyn Fn(&ParamStore) -> f64) -> Matrix {
        let eps = 1e-6;
        let shape = store.get(id).dim();
        let mut out = Matrix::zeros(shape);
        for i in 0..shape.0 {
            for j in 0..shape.1 {
                let orig = store.get(id)[[i, j]];
                store.get_mut(id)[[i, j]] = orig + eps;
                let up = f(store);
                store.get_mut(id)[[i, j]] = orig - eps;
                let down = f(store);
                store.get_mut(id)[[i, j]] = orig;
                out[[i, j]] = (up - down) / (2.0 * eps);
            }
        }
        out
    }

    fn assert_close(a: &Matrix, b: &Matrix) {
        for (x, y) in a.iter().zip(b.iter()) {
            let denom = x.abs().max(y.abs()).max(1e-6);
            assert!((x - y).abs() / denom < 1e-5, "{x} vs {y}");
        }
    }

    #[test]
    fn every_op_matches_finite_differences() {
        let mut store = ParamStore::default();
        let w = store.add("w", array![[0.3, -0.2, 0.5], [0.1, 0.4, -0.6]]);
        let emb = store.add("emb", array![[0.0, 0.0], [0.2, -0.1], [0.7, 0.3], [-0.5, 0.9]]);
        let b = store.add("b", array![[0.05, -0.02, 0.01]]);
        let v = store.add("v", array![[0.4], [-0.3], [0.2], [0.6], [-0.1], [0.25]]);

        let f = |store: &ParamStore| -> (f64, Gradients) {
            let mut t = Tape::new(store);
            let e = t.param(emb);
            let x = t.select_rows(e, vec![1, 2, 3, 2, 1]);
            let wv = t.param(w);
            let h = t.matmul(x, wv);
            let bv = t.param(b);
            let h = t.add_row(h, bv);
            let a = t.tanh(h);
            let sg = t.sigmoid(h);
            let prod = t.mul(a, sg);
            let masked = t.mul_const(prod, Matrix::from_elem((5, 3), 0.5));
            let sum = t.add(masked, a);
            let cat = t.hcat(&[sum, sg]);
            let top = t.slice_rows(cat, 0, 2);
            let bottom = t.slice_rows(cat, 2, 5);
            let stacked = t.vstack(&[bottom, top]);
            let vv = t.param(v);
            let scores = t.matmul(stacked, vv);
            let segs = Rc::new(Segments::from_lengths([2, 0, 3]));
            let att = t.seg_softmax(scores, &segs);
            let pooled = t.seg_weighted_sum(stacked, att, &segs);
            let mean = t.seg_mean(stacked, &segs);
            let both = t.add(pooled, mean);
            let col = t.slice_cols(both, 1, 2);
            let loss = t.bce_with_logits(col, vec![1.0, 0.0, 0.3]);
            let l = t.value(loss)[[0, 0]];
            (l, t.backward(loss))
        };

        let (_, grads) = f(&store);
        for id in [w, emb, b, v] {
            let num = numeric_grad(&mut store, id, &|s| f(s).0);
            assert_close(grads.get(id).unwrap(), &num);
        }
    }

    #[test]
    fn softmax_segments_sum_to_one_and_empty_groups_are_zero() {
        let store = ParamStore::default();
        let mut t = Tape::new(&store);
        let x = t.constant(array![[1.0], [2.0], [3.0], [-1.0]]);
        let segs = Rc::new(Segments::from_lengths([1, 0, 3]));
        let a = t.seg_softmax(x, &segs);
        let y = t.value(a);
        assert_eq!(y[[0, 0]], 1.0);
        let s: f64 = (1..4).map(|i| y[[i, 0]]).sum();
        assert!((s - 1.0).abs() < 1e-12);
        let pooled = t.seg_weighted_sum(x, a, &segs);
        assert_eq!(t.value(pooled)[[1, 0]], 0.0);
    }

    #[test]
    fn adam_keeps_pinned_rows_zero() {
        let mut store = ParamStore::default();
        let e = store.add("e", array![[0.0, 0.0], [1.0, 1.0]]);
        store.pin_zero_row(e, 0);
        let mut opt = Adam::new(&store, 0.1);
        let mut g = Gradients::default();
        g.by_param.insert(e, array![[1.0, 1.0], [1.0, 1.0]]);
        opt.step(&mut store, &g);
        assert_eq!(store.get(e).row(0).to_vec(), vec![0.0, 0.0]);
        assert!(store.get(e)[[1, 0]] < 1.0);
    }
}
