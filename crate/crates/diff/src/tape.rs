//! Operation record and reverse-mode accumulation.

use std::sync::Arc;

use crate::error::DiffError;
use crate::tensor::{matmul_nt_into, matmul_tn_into, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Elementwise function paired with its derivative.
pub type ScalarFn = fn(f64) -> f64;

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddConst(Var),
    MulScalar(Var, Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    LeakyRelu(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Exp(Var),
    Log(Var),
    Gather(Var, Arc<[usize]>),
    RowDot(Var, Var),
    MulCol(Var, Var),
    SegmentSoftmax(Var, Arc<[usize]>),
    SegmentSum(Var, Arc<[usize]>),
    SegmentMean(Var, Arc<[usize]>, Arc<[f64]>),
    MeanRows(Var),
    SumAll(Var),
    Reshape(Var),
    Clamp(Var, Arc<[f64]>, Arc<[f64]>),
    Smooth3(Var),
    SoftmaxRows(Var),
    SliceRows(Var, usize),
    Pick(Var, usize),
    Map(Var, ScalarFn),
}

#[derive(Debug, Clone)]
struct Node {
    value: Arc<Tensor>,
    op: Op,
    needs_grad: bool,
}

/// Ordered record of a computation. Inputs always precede outputs, so
/// reverse traversal of the node list is a valid topological order.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one scalar with respect to recorded values.
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of `v`; `None` when `v` was recorded without `requires_grad`.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

fn shape_err(op: &'static str, a: &Tensor, b: &Tensor) -> DiffError {
    DiffError::Shape {
        op,
        lhs: a.shape().to_vec(),
        rhs: b.shape().to_vec(),
    }
}

fn contract(op: &'static str, message: impl Into<String>) -> DiffError {
    DiffError::Contract {
        op,
        message: message.into(),
    }
}

fn dims(op: &'static str, t: &Tensor) -> Result<(usize, usize), DiffError> {
    t.dims2()
        .ok_or_else(|| contract(op, format!("expected a 2-D tensor, got {:?}", t.shape())))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn check(&self, v: Var) -> Result<(), DiffError> {
        if v.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(DiffError::NotOnTape(v.0))
        }
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        self.nodes.push(Node {
            value: Arc::new(value),
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.leaf_shared(Arc::new(value), requires_grad)
    }

    /// Records a leaf without copying its data.
    pub fn leaf_shared(&mut self, value: Arc<Tensor>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            needs_grad: requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        self.check(b)?;
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push(out, Op::MatMul(a, b), &[a, b]))
    }

    fn zip_same(
        &mut self,
        op: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Tensor, DiffError> {
        self.check(a)?;
        self.check(b)?;
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err(op, ta, tb));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(ta.shape().to_vec(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let out = self.zip_same("add", a, b, |x, y| x + y)?;
        Ok(self.push(out, Op::Add(a, b), &[a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let out = self.zip_same("sub", a, b, |x, y| x - y)?;
        Ok(self.push(out, Op::Sub(a, b), &[a, b]))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let out = self.zip_same("mul", a, b, |x, y| x * y)?;
        Ok(self.push(out, Op::Mul(a, b), &[a, b]))
    }

    /// Adds a `(1, m)` row to every row of an `(n, m)` matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        self.check(row)?;
        let (ta, tr) = (self.value(a), self.value(row));
        let (n, m) = dims("add_row", ta)?;
        if tr.shape() != [1, m] {
            return Err(shape_err("add_row", ta, tr));
        }
        let mut out = ta.clone();
        for r in 0..n {
            for (o, b) in out.data_mut()[r * m..(r + 1) * m].iter_mut().zip(tr.data()) {
                *o += b;
            }
        }
        Ok(self.push(out, Op::AddRow(a, row), &[a, row]))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Result<Var, DiffError> {
        self.check(a)?;
        let out = self.value(a).map(|x| k * x);
        Ok(self.push(out, Op::Scale(a, k), &[a]))
    }

    pub fn add_const(&mut self, a: Var, k: f64) -> Result<Var, DiffError> {
        self.check(a)?;
        let out = self.value(a).map(|x| x + k);
        Ok(self.push(out, Op::AddConst(a), &[a]))
    }

    /// Multiplies every element of `a` by the single-element `s`.
    pub fn mul_scalar(&mut self, a: Var, s: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        self.check(s)?;
        let ts = self.value(s);
        if ts.numel() != 1 {
            return Err(shape_err("mul_scalar", self.value(a), ts));
        }
        let k = ts.item();
        let out = self.value(a).map(|x| k * x);
        Ok(self.push(out, Op::MulScalar(a, s), &[a, s]))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, DiffError> {
        if parts.is_empty() {
            return Err(contract("concat_cols", "no inputs"));
        }
        for &p in parts {
            self.check(p)?;
        }
        let n = dims("concat_cols", self.value(parts[0]))?.0;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (r, c) = dims("concat_cols", self.value(p))?;
            if r != n {
                return Err(shape_err("concat_cols", self.value(parts[0]), self.value(p)));
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(n * total);
        for r in 0..n {
            for &p in parts {
                data.extend_from_slice(self.value(p).row_slice(r));
            }
        }
        Ok(self.push(Tensor::matrix(n, total, data), Op::ConcatCols(parts.to_vec()), parts))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, DiffError> {
        if parts.is_empty() {
            return Err(contract("concat_rows", "no inputs"));
        }
        for &p in parts {
            self.check(p)?;
        }
        let m = dims("concat_rows", self.value(parts[0]))?.1;
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            let (r, c) = dims("concat_rows", self.value(p))?;
            if c != m {
                return Err(shape_err("concat_rows", self.value(parts[0]), self.value(p)));
            }
            rows += r;
            data.extend_from_slice(self.value(p).data());
        }
        Ok(self.push(Tensor::matrix(rows, m, data), Op::ConcatRows(parts.to_vec()), parts))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var, DiffError> {
        self.leaky_relu(a, 0.0)
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Result<Var, DiffError> {
        self.check(a)?;
        let out = self.value(a).map(|x| if x > 0.0 { x } else { slope * x });
        Ok(self.push(out, Op::LeakyRelu(a, slope), &[a]))
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        let out = self.value(a).map(sigmoid);
        Ok(self.push(out, Op::Sigmoid(a), &[a]))
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        let out = self.value(a).map(f64::tanh);
        Ok(self.push(out, Op::Tanh(a), &[a]))
    }

    pub fn exp(&mut self, a: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        let out = self.value(a).map(f64::exp);
        Ok(self.push(out, Op::Exp(a), &[a]))
    }

    pub fn log(&mut self, a: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        let out = self.value(a).map(f64::ln);
        Ok(self.push(out, Op::Log(a), &[a]))
    }

    /// Elementwise `f` with caller-supplied derivative `df`.
    pub fn map(&mut self, a: Var, f: ScalarFn, df: ScalarFn) -> Result<Var, DiffError> {
        self.check(a)?;
        let out = self.value(a).map(f);
        Ok(self.push(out, Op::Map(a, df), &[a]))
    }

    /// Row `r` of the output is row `idx[r]` of `a`. Embedding lookup and
    /// neighbor gathering both reduce to this.
    pub fn gather_rows(&mut self, a: Var, idx: Arc<[usize]>) -> Result<Var, DiffError> {
        self.check(a)?;
        let ta = self.value(a);
        let (n, m) = dims("gather_rows", ta)?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(contract("gather_rows", format!("row {bad} out of range for {n} rows")));
        }
        let mut data = Vec::with_capacity(idx.len() * m);
        for &i in idx.iter() {
            data.extend_from_slice(ta.row_slice(i));
        }
        let out = Tensor::matrix(idx.len(), m, data);
        Ok(self.push(out, Op::Gather(a, idx), &[a]))
    }

    /// Per-row dot product of two `(n, m)` matrices, giving `(n, 1)`.
    pub fn row_dot(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        self.check(b)?;
        let (ta, tb) = (self.value(a), self.value(b));
        let (n, _) = dims("row_dot", ta)?;
        if ta.shape() != tb.shape() {
            return Err(shape_err("row_dot", ta, tb));
        }
        let data = (0..n)
            .map(|r| ta.row_slice(r).iter().zip(tb.row_slice(r)).map(|(x, y)| x * y).sum())
            .collect();
        Ok(self.push(Tensor::column(data), Op::RowDot(a, b), &[a, b]))
    }

    /// Scales row `r` of `a: (n, m)` by `w[r]`, with `w: (n, 1)`.
    pub fn mul_col(&mut self, a: Var, w: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        self.check(w)?;
        let (ta, tw) = (self.value(a), self.value(w));
        let (n, m) = dims("mul_col", ta)?;
        if tw.shape() != [n, 1] {
            return Err(shape_err("mul_col", ta, tw));
        }
        let mut out = ta.clone();
        for r in 0..n {
            let k = tw.data()[r];
            out.data_mut()[r * m..(r + 1) * m].iter_mut().for_each(|x| *x *= k);
        }
        Ok(self.push(out, Op::MulCol(a, w), &[a, w]))
    }

    fn check_segments(op: &'static str, rows: usize, seg: &[usize], n_seg: usize) -> Result<(), DiffError> {
        if seg.len() != rows {
            return Err(contract(op, format!("{} segment ids for {rows} rows", seg.len())));
        }
        if let Some(&bad) = seg.iter().find(|&&s| s >= n_seg) {
            return Err(contract(op, format!("segment {bad} out of range for {n_seg} segments")));
        }
        Ok(())
    }

    /// Softmax of a score column `(e, 1)` taken independently within each
    /// segment; `seg[r]` names the segment of row `r`.
    pub fn segment_softmax(&mut self, scores: Var, seg: Arc<[usize]>, n_seg: usize) -> Result<Var, DiffError> {
        self.check(scores)?;
        let ts = self.value(scores);
        let (e, c) = dims("segment_softmax", ts)?;
        if c != 1 {
            return Err(contract("segment_softmax", format!("scores must be a column, got {:?}", ts.shape())));
        }
        Self::check_segments("segment_softmax", e, &seg, n_seg)?;
        let x = ts.data();
        let mut max = vec![f64::NEG_INFINITY; n_seg];
        for (r, &s) in seg.iter().enumerate() {
            max[s] = max[s].max(x[r]);
        }
        let mut out: Vec<f64> = seg.iter().enumerate().map(|(r, &s)| (x[r] - max[s]).exp()).collect();
        let mut denom = vec![0.0; n_seg];
        for (r, &s) in seg.iter().enumerate() {
            denom[s] += out[r];
        }
        for (r, &s) in seg.iter().enumerate() {
            out[r] /= denom[s];
        }
        Ok(self.push(Tensor::column(out), Op::SegmentSoftmax(scores, seg), &[scores]))
    }

    /// Sums rows of `a: (e, m)` into `n_seg` rows by segment id.
    pub fn segment_sum(&mut self, a: Var, seg: Arc<[usize]>, n_seg: usize) -> Result<Var, DiffError> {
        self.check(a)?;
        let ta = self.value(a);
        let (e, m) = dims("segment_sum", ta)?;
        Self::check_segments("segment_sum", e, &seg, n_seg)?;
        let mut out = vec![0.0; n_seg * m];
        for (r, &s) in seg.iter().enumerate() {
            for (o, x) in out[s * m..(s + 1) * m].iter_mut().zip(ta.row_slice(r)) {
                *o += x;
            }
        }
        Ok(self.push(Tensor::matrix(n_seg, m, out), Op::SegmentSum(a, seg), &[a]))
    }

    /// Mean of the rows in each segment; empty segments give zero rows.
    pub fn segment_mean(&mut self, a: Var, seg: Arc<[usize]>, n_seg: usize) -> Result<Var, DiffError> {
        self.check(a)?;
        let ta = self.value(a);
        let (e, m) = dims("segment_mean", ta)?;
        Self::check_segments("segment_mean", e, &seg, n_seg)?;
        let mut count = vec![0usize; n_seg];
        seg.iter().for_each(|&s| count[s] += 1);
        let inv: Arc<[f64]> = count.iter().map(|&c| if c == 0 { 0.0 } else { 1.0 / c as f64 }).collect();
        let mut out = vec![0.0; n_seg * m];
        for (r, &s) in seg.iter().enumerate() {
            for (o, x) in out[s * m..(s + 1) * m].iter_mut().zip(ta.row_slice(r)) {
                *o += x * inv[s];
            }
        }
        Ok(self.push(Tensor::matrix(n_seg, m, out), Op::SegmentMean(a, seg, inv), &[a]))
    }

    /// Column means, giving `(1, m)`.
    pub fn mean_rows(&mut self, a: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        let ta = self.value(a);
        let (n, m) = dims("mean_rows", ta)?;
        if n == 0 {
            return Err(contract("mean_rows", "no rows"));
        }
        let mut out = vec![0.0; m];
        for r in 0..n {
            for (o, x) in out.iter_mut().zip(ta.row_slice(r)) {
                *o += x;
            }
        }
        out.iter_mut().for_each(|x| *x /= n as f64);
        Ok(self.push(Tensor::row(out), Op::MeanRows(a), &[a]))
    }

    pub fn sum_all(&mut self, a: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        let s = self.value(a).sum();
        Ok(self.push(Tensor::scalar(s), Op::SumAll(a), &[a]))
    }

    pub fn reshape(&mut self, a: Var, shape: Vec<usize>) -> Result<Var, DiffError> {
        self.check(a)?;
        let out = self.value(a).clone().reshaped(shape)?;
        Ok(self.push(out, Op::Reshape(a), &[a]))
    }

    /// Row-major flatten to `(1, numel)`.
    pub fn flatten(&mut self, a: Var) -> Result<Var, DiffError> {
        let n = self.value(a).numel();
        self.reshape(a, vec![1, n])
    }

    /// Elementwise clamp to per-element bounds `lo[i] <= x[i] <= hi[i]`.
    pub fn clamp(&mut self, a: Var, lo: Arc<[f64]>, hi: Arc<[f64]>) -> Result<Var, DiffError> {
        self.check(a)?;
        let ta = self.value(a);
        if lo.len() != ta.numel() || hi.len() != ta.numel() {
            return Err(contract("clamp", format!("bounds of length {} for {} values", lo.len(), ta.numel())));
        }
        let data = ta
            .data()
            .iter()
            .zip(lo.iter().zip(hi.iter()))
            .map(|(&x, (&l, &h))| x.max(l).min(h))
            .collect();
        let out = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(out, Op::Clamp(a, lo, hi), &[a]))
    }

    /// Centered moving average of width 3 over the flattened values; the
    /// two end points average over their two available values.
    pub fn smooth3(&mut self, a: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        let ta = self.value(a);
        let x = ta.data();
        let n = x.len();
        let data = (0..n)
            .map(|i| {
                let (s, e) = (i.saturating_sub(1), (i + 2).min(n));
                x[s..e].iter().sum::<f64>() / (e - s) as f64
            })
            .collect();
        let out = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(out, Op::Smooth3(a), &[a]))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Result<Var, DiffError> {
        self.check(a)?;
        let ta = self.value(a);
        let (n, _) = dims("softmax_rows", ta)?;
        let mut out = ta.clone();
        for r in 0..n {
            let row = &mut out.data_mut()[r * ta.cols()..(r + 1) * ta.cols()];
            let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            row.iter_mut().for_each(|x| *x = (*x - mx).exp());
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
        Ok(self.push(out, Op::SoftmaxRows(a), &[a]))
    }

    /// Rows `start..end` of `a`.
    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Result<Var, DiffError> {
        self.check(a)?;
        let ta = self.value(a);
        let (n, m) = dims("slice_rows", ta)?;
        if start > end || end > n {
            return Err(contract("slice_rows", format!("range {start}..{end} for {n} rows")));
        }
        let out = Tensor::matrix(end - start, m, ta.data()[start * m..end * m].to_vec());
        Ok(self.push(out, Op::SliceRows(a, start), &[a]))
    }

    /// Single element at flat index `i`, as a `(1, 1)` tensor.
    pub fn pick(&mut self, a: Var, i: usize) -> Result<Var, DiffError> {
        self.check(a)?;
        let ta = self.value(a);
        let v = *ta
            .data()
            .get(i)
            .ok_or_else(|| contract("pick", format!("index {i} out of range for {} values", ta.numel())))?;
        Ok(self.push(Tensor::scalar(v), Op::Pick(a, i), &[a]))
    }

    /// Reverse accumulation from the scalar `loss`. Leaves recorded with
    /// `requires_grad` always receive a gradient, zero if unused.
    pub fn gradients(&self, loss: Var) -> Result<Gradients, DiffError> {
        self.check(loss)?;
        let lv = self.value(loss);
        if lv.numel() != 1 {
            return Err(DiffError::NonScalarLoss(lv.shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        if self.nodes[loss.0].needs_grad {
            grads[loss.0] = Some(Tensor::new(lv.shape().to_vec(), vec![1.0]).expect("scalar"));
        }
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.backward_node(i, &g, &mut grads);
            grads[i] = Some(g);
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if matches!(node.op, Op::Leaf) && node.needs_grad {
                if i >= grads.len() {
                    grads.resize(i + 1, None);
                }
                grads[i].get_or_insert_with(|| Tensor::zeros_like(&node.value));
            }
        }
        Ok(Gradients { grads })
    }

    /// As [`Tape::gradients`], consuming the tape.
    pub fn backward(self, loss: Var) -> Result<Gradients, DiffError> {
        self.gradients(loss)
    }

    fn backward_node(&self, i: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let nodes = &self.nodes;
        macro_rules! acc {
            ($v:expr, |$buf:ident| $body:block) => {
                if let Some($buf) = slot(nodes, grads, $v) {
                    $body
                }
            };
        }
        let gd = g.data();
        let out = &nodes[i].value;
        match &nodes[i].op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (&nodes[a.0].value, &nodes[b.0].value);
                let (n, k) = (ta.rows(), ta.cols());
                let m = tb.cols();
                acc!(*a, |buf| { matmul_nt_into(gd, tb.data(), buf, n, k, m) });
                acc!(*b, |buf| { matmul_tn_into(ta.data(), gd, buf, n, k, m) });
            }
            Op::Add(a, b) => {
                for v in [*a, *b] {
                    acc!(v, |buf| { buf.iter_mut().zip(gd).for_each(|(o, x)| *o += x) });
                }
            }
            Op::Sub(a, b) => {
                acc!(*a, |buf| { buf.iter_mut().zip(gd).for_each(|(o, x)| *o += x) });
                acc!(*b, |buf| { buf.iter_mut().zip(gd).for_each(|(o, x)| *o -= x) });
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (nodes[a.0].value.data(), nodes[b.0].value.data());
                acc!(*a, |buf| {
                    for ((o, x), y) in buf.iter_mut().zip(gd).zip(tb) {
                        *o += x * y;
                    }
                });
                acc!(*b, |buf| {
                    for ((o, x), y) in buf.iter_mut().zip(gd).zip(ta) {
                        *o += x * y;
                    }
                });
            }
            Op::AddRow(a, row) => {
                let m = out.cols();
                acc!(*a, |buf| { buf.iter_mut().zip(gd).for_each(|(o, x)| *o += x) });
                acc!(*row, |buf| {
                    for chunk in gd.chunks(m) {
                        buf.iter_mut().zip(chunk).for_each(|(o, x)| *o += x);
                    }
                });
            }
            Op::Scale(a, k) => {
                acc!(*a, |buf| { buf.iter_mut().zip(gd).for_each(|(o, x)| *o += k * x) });
            }
            Op::AddConst(a) => {
                acc!(*a, |buf| { buf.iter_mut().zip(gd).for_each(|(o, x)| *o += x) });
            }
            Op::MulScalar(a, s) => {
                let k = nodes[s.0].value.item();
                let ta = nodes[a.0].value.data();
                acc!(*a, |buf| { buf.iter_mut().zip(gd).for_each(|(o, x)| *o += k * x) });
                acc!(*s, |buf| { buf[0] += gd.iter().zip(ta).map(|(x, y)| x * y).sum::<f64>() });
            }
            Op::ConcatCols(parts) => {
                let (n, total) = (out.rows(), out.cols());
                let mut offset = 0;
                for &p in parts {
                    let w = nodes[p.0].value.cols();
                    acc!(p, |buf| {
                        for r in 0..n {
                            let src = &gd[r * total + offset..r * total + offset + w];
                            buf[r * w..(r + 1) * w].iter_mut().zip(src).for_each(|(o, x)| *o += x);
                        }
                    });
                    offset += w;
                }
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = nodes[p.0].value.numel();
                    acc!(p, |buf| {
                        buf.iter_mut().zip(&gd[offset..offset + len]).for_each(|(o, x)| *o += x)
                    });
                    offset += len;
                }
            }
            Op::LeakyRelu(a, slope) => {
                let x = nodes[a.0].value.data();
                acc!(*a, |buf| {
                    for ((o, gv), &xv) in buf.iter_mut().zip(gd).zip(x) {
                        *o += if xv > 0.0 { *gv } else { slope * gv };
                    }
                });
            }
            Op::Sigmoid(a) => {
                let y = out.data();
                acc!(*a, |buf| {
                    for ((o, gv), yv) in buf.iter_mut().zip(gd).zip(y) {
                        *o += gv * yv * (1.0 - yv);
                    }
                });
            }
            Op::Tanh(a) => {
                let y = out.data();
                acc!(*a, |buf| {
                    for ((o, gv), yv) in buf.iter_mut().zip(gd).zip(y) {
                        *o += gv * (1.0 - yv * yv);
                    }
                });
            }
            Op::Exp(a) => {
                let y = out.data();
                acc!(*a, |buf| {
                    for ((o, gv), yv) in buf.iter_mut().zip(gd).zip(y) {
                        *o += gv * yv;
                    }
                });
            }
            Op::Log(a) => {
                let x = nodes[a.0].value.data();
                acc!(*a, |buf| {
                    for ((o, gv), xv) in buf.iter_mut().zip(gd).zip(x) {
                        *o += gv / xv;
                    }
                });
            }
            Op::Map(a, df) => {
                let x = nodes[a.0].value.data();
                acc!(*a, |buf| {
                    for ((o, gv), &xv) in buf.iter_mut().zip(gd).zip(x) {
                        *o += gv * df(xv);
                    }
                });
            }
            Op::Gather(a, idx) => {
                let m = out.cols();
                acc!(*a, |buf| {
                    for (r, &src) in idx.iter().enumerate() {
                        buf[src * m..(src + 1) * m]
                            .iter_mut()
                            .zip(&gd[r * m..(r + 1) * m])
                            .for_each(|(o, x)| *o += x);
                    }
                });
            }
            Op::RowDot(a, b) => {
                let (ta, tb) = (&nodes[a.0].value, &nodes[b.0].value);
                let m = ta.cols();
                acc!(*a, |buf| {
                    for (r, &gv) in gd.iter().enumerate() {
                        buf[r * m..(r + 1) * m].iter_mut().zip(tb.row_slice(r)).for_each(|(o, y)| *o += gv * y);
                    }
                });
                acc!(*b, |buf| {
                    for (r, &gv) in gd.iter().enumerate() {
                        buf[r * m..(r + 1) * m].iter_mut().zip(ta.row_slice(r)).for_each(|(o, x)| *o += gv * x);
                    }
                });
            }
            Op::MulCol(a, w) => {
                let (ta, tw) = (&nodes[a.0].value, &nodes[w.0].value);
                let m = ta.cols();
                acc!(*a, |buf| {
                    for r in 0..ta.rows() {
                        let k = tw.data()[r];
                        buf[r * m..(r + 1) * m]
                            .iter_mut()
                            .zip(&gd[r * m..(r + 1) * m])
                            .for_each(|(o, x)| *o += k * x);
                    }
                });
                acc!(*w, |buf| {
                    for (r, o) in buf.iter_mut().enumerate() {
                        *o += gd[r * m..(r + 1) * m].iter().zip(ta.row_slice(r)).map(|(x, y)| x * y).sum::<f64>();
                    }
                });
            }
            Op::SegmentSoftmax(a, seg) => {
                let y = out.data();
                let n_seg = seg.iter().max().map_or(0, |&s| s + 1);
                let mut dot = vec![0.0; n_seg];
                for (r, &s) in seg.iter().enumerate() {
                    dot[s] += y[r] * gd[r];
                }
                acc!(*a, |buf| {
                    for (r, &s) in seg.iter().enumerate() {
                        buf[r] += y[r] * (gd[r] - dot[s]);
                    }
                });
            }
            Op::SegmentSum(a, seg) => {
                let m = out.cols();
                acc!(*a, |buf| {
                    for (r, &s) in seg.iter().enumerate() {
                        buf[r * m..(r + 1) * m]
                            .iter_mut()
                            .zip(&gd[s * m..(s + 1) * m])
                            .for_each(|(o, x)| *o += x);
                    }
                });
            }
            Op::SegmentMean(a, seg, inv) => {
                let m = out.cols();
                acc!(*a, |buf| {
                    for (r, &s) in seg.iter().enumerate() {
                        buf[r * m..(r + 1) * m]
                            .iter_mut()
                            .zip(&gd[s * m..(s + 1) * m])
                            .for_each(|(o, x)| *o += x * inv[s]);
                    }
                });
            }
            Op::MeanRows(a) => {
                let n = nodes[a.0].value.rows();
                let m = out.cols();
                acc!(*a, |buf| {
                    for chunk in buf.chunks_mut(m) {
                        chunk.iter_mut().zip(gd).for_each(|(o, x)| *o += x / n as f64);
                    }
                });
            }
            Op::SumAll(a) => {
                let gv = gd[0];
                acc!(*a, |buf| { buf.iter_mut().for_each(|o| *o += gv) });
            }
            Op::Reshape(a) => {
                acc!(*a, |buf| { buf.iter_mut().zip(gd).for_each(|(o, x)| *o += x) });
            }
            Op::Clamp(a, lo, hi) => {
                let x = nodes[a.0].value.data();
                acc!(*a, |buf| {
                    for (j, o) in buf.iter_mut().enumerate() {
                        if x[j] >= lo[j] && x[j] <= hi[j] {
                            *o += gd[j];
                        }
                    }
                });
            }
            Op::Smooth3(a) => {
                let n = gd.len();
                acc!(*a, |buf| {
                    for (i, &gv) in gd.iter().enumerate() {
                        let (s, e) = (i.saturating_sub(1), (i + 2).min(n));
                        let share = gv / (e - s) as f64;
                        buf[s..e].iter_mut().for_each(|o| *o += share);
                    }
                });
            }
            Op::SoftmaxRows(a) => {
                let m = out.cols();
                let y = out.data();
                acc!(*a, |buf| {
                    for r in 0..out.rows() {
                        let (yr, gr) = (&y[r * m..(r + 1) * m], &gd[r * m..(r + 1) * m]);
                        let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                        for c in 0..m {
                            buf[r * m + c] += yr[c] * (gr[c] - dot);
                        }
                    }
                });
            }
            Op::SliceRows(a, start) => {
                let m = out.cols();
                acc!(*a, |buf| {
                    buf[start * m..start * m + gd.len()].iter_mut().zip(gd).for_each(|(o, x)| *o += x)
                });
            }
            Op::Pick(a, j) => {
                acc!(*a, |buf| { buf[*j] += gd[0] });
            }
        }
    }
}

/// Accumulation buffer for input `v`, or None if it needs no gradient.
fn slot<'a>(nodes: &[Node], grads: &'a mut [Option<Tensor>], v: Var) -> Option<&'a mut [f64]> {
    if !nodes[v.0].needs_grad {
        return None;
    }
    let t = grads[v.0].get_or_insert_with(|| Tensor::zeros_like(&nodes[v.0].value));
    Some(t.data_mut())
}
