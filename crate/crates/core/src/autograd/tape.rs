use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::ops::{Add, Mul, Neg, Sub};

use super::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
enum Op {
    Leaf,
    MatMul { a: usize, b: usize, ta: bool, tb: bool },
    Transpose(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Neg(usize),
    Scale(usize, f64),
    AddScalar(usize, f64),
    Recip(usize),
    Relu(usize),
    Clamp(usize, f64, f64),
    Sigmoid(usize),
    Log(usize),
    Sqrt(usize),
    Exp(usize),
    Sum(usize),
    Broadcast(usize, usize, usize),
    SumRows(usize),
    BroadcastRows(usize, usize),
    SumCols(usize),
    BroadcastCols(usize, usize),
    /// Flat window `[start, start + rows*cols)` of the parent, reshaped.
    Slice { a: usize, start: usize, rows: usize, cols: usize },
    /// Parent placed at flat offset `start` of a zero `rows x cols` tensor.
    Embed { a: usize, start: usize, rows: usize, cols: usize },
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "input",
            Op::MatMul { .. } => "matmul",
            Op::Transpose(_) => "transpose",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Neg(_) => "neg",
            Op::Scale(..) => "scale",
            Op::AddScalar(..) => "add_scalar",
            Op::Recip(_) => "recip",
            Op::Relu(_) => "relu",
            Op::Clamp(..) => "clamp",
            Op::Sigmoid(_) => "sigmoid",
            Op::Log(_) => "log",
            Op::Sqrt(_) => "sqrt",
            Op::Exp(_) => "exp",
            Op::Sum(_) => "sum",
            Op::Broadcast(..) => "broadcast",
            Op::SumRows(_) => "sum_rows",
            Op::BroadcastRows(..) => "broadcast_rows",
            Op::SumCols(_) => "sum_cols",
            Op::BroadcastCols(..) => "broadcast_cols",
            Op::Slice { .. } => "slice",
            Op::Embed { .. } => "embed",
        }
    }

    fn parents(&self) -> [Option<usize>; 2] {
        match *self {
            Op::Leaf => [None, None],
            Op::MatMul { a, b, .. } | Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) => [Some(a), Some(b)],
            Op::Transpose(a)
            | Op::Neg(a)
            | Op::Scale(a, _)
            | Op::AddScalar(a, _)
            | Op::Recip(a)
            | Op::Relu(a)
            | Op::Clamp(a, ..)
            | Op::Sigmoid(a)
            | Op::Log(a)
            | Op::Sqrt(a)
            | Op::Exp(a)
            | Op::Sum(a)
            | Op::Broadcast(a, ..)
            | Op::SumRows(a)
            | Op::BroadcastRows(a, _)
            | Op::SumCols(a)
            | Op::BroadcastCols(a, _)
            | Op::Slice { a, .. }
            | Op::Embed { a, .. } => [Some(a), None],
        }
    }
}

fn eval(op: Op, v: &[Tensor]) -> Tensor {
    match op {
        Op::Leaf => unreachable!("leaves carry their own value"),
        Op::MatMul { a, b, ta, tb } => Tensor::matmul(&v[a], ta, &v[b], tb),
        Op::Transpose(a) => v[a].transpose(),
        Op::Add(a, b) => v[a].zip(&v[b], |x, y| x + y),
        Op::Sub(a, b) => v[a].zip(&v[b], |x, y| x - y),
        Op::Mul(a, b) => v[a].zip(&v[b], |x, y| x * y),
        Op::Neg(a) => v[a].map(|x| -x),
        Op::Scale(a, c) => v[a].map(|x| c * x),
        Op::AddScalar(a, c) => v[a].map(|x| x + c),
        Op::Recip(a) => v[a].map(|x| 1.0 / x),
        Op::Relu(a) => v[a].map(|x| if x > 0.0 { x } else { 0.0 }),
        Op::Clamp(a, lo, hi) => v[a].map(|x| x.clamp(lo, hi)),
        Op::Sigmoid(a) => v[a].map(sigmoid),
        Op::Log(a) => v[a].map(libm::log),
        Op::Sqrt(a) => v[a].map(libm::sqrt),
        Op::Exp(a) => v[a].map(libm::exp),
        Op::Sum(a) => Tensor::scalar(v[a].data.iter().sum()),
        Op::Broadcast(a, rows, cols) => Tensor::filled(rows, cols, v[a].item()),
        Op::SumRows(a) => v[a].sum_rows(),
        Op::BroadcastRows(a, rows) => v[a].broadcast_rows(rows),
        Op::SumCols(a) => v[a].sum_cols(),
        Op::BroadcastCols(a, cols) => v[a].broadcast_cols(cols),
        Op::Slice { a, start, rows, cols } => Tensor::new(rows, cols, v[a].data[start..start + rows * cols].to_vec()),
        Op::Embed { a, start, rows, cols } => {
            let mut t = Tensor::zeros(rows, cols);
            let src = &v[a].data;
            t.data[start..start + src.len()].copy_from_slice(src);
            t
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

#[derive(Default)]
struct Inner {
    ops: Vec<Op>,
    values: Vec<Tensor>,
    fault: Option<&'static str>,
}

/// Records tensor operations for reverse-mode differentiation.
///
/// Backward passes are themselves recorded on the tape, so gradients can be
/// differentiated again (Hessian-vector and Jacobian-vector products).
#[derive(Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

/// A handle to a node of a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
}

impl core::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let (r, c) = self.shape();
        write!(f, "Var#{}({r}x{c})", self.id)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn leaf(&self, value: Tensor) -> Var<'_> {
        let mut inner = self.inner.borrow_mut();
        if inner.fault.is_none() && !value.is_finite() {
            inner.fault = Some(Op::Leaf.name());
        }
        inner.ops.push(Op::Leaf);
        inner.values.push(value);
        Var { tape: self, id: inner.ops.len() - 1 }
    }

    pub fn scalar(&self, value: f64) -> Var<'_> {
        self.leaf(Tensor::scalar(value))
    }

    pub fn column(&self, values: &[f64]) -> Var<'_> {
        self.leaf(Tensor::column(values.to_vec()))
    }

    fn push(&self, op: Op) -> Var<'_> {
        let mut inner = self.inner.borrow_mut();
        let value = eval(op, &inner.values);
        if inner.fault.is_none() && !value.is_finite() {
            inner.fault = Some(op.name());
        }
        inner.ops.push(op);
        inner.values.push(value);
        Var { tape: self, id: inner.ops.len() - 1 }
    }

    /// Fails with the first primitive that produced a non-finite value.
    pub fn check(&self) -> Result<()> {
        match self.inner.borrow().fault {
            Some(op) => Err(Error::NonFinite { op }),
            None => Ok(()),
        }
    }

    /// Current length, for use with [`Tape::truncate`].
    pub fn mark(&self) -> usize {
        self.len()
    }

    /// Drops every node recorded after `mark`. Vars created after the mark
    /// must not be used again.
    pub fn truncate(&self, mark: usize) {
        let mut inner = self.inner.borrow_mut();
        inner.ops.truncate(mark);
        inner.values.truncate(mark);
    }

    /// Re-evaluates every recorded operation from the leaves.
    pub fn replay(&self) -> Vec<Tensor> {
        let inner = self.inner.borrow();
        let mut values: Vec<Tensor> = Vec::with_capacity(inner.ops.len());
        for (op, recorded) in inner.ops.iter().zip(&inner.values) {
            let v = match op {
                Op::Leaf => recorded.clone(),
                _ => eval(*op, &values),
            };
            values.push(v);
        }
        values
    }

    fn op(&self, id: usize) -> Op {
        self.inner.borrow().ops[id]
    }

    fn var(&self, id: usize) -> Var<'_> {
        Var { tape: self, id }
    }

    /// Gradients of the sum of `out`'s entries with respect to each of `wrt`.
    ///
    /// `wrt` may contain intermediate nodes. The returned vars live on this
    /// tape and can be differentiated again.
    pub fn grad<'t>(&'t self, out: Var<'t>, wrt: &[Var<'t>]) -> Result<Vec<Var<'t>>> {
        let n = out.id + 1;
        let mut target = vec![false; n];
        for w in wrt {
            assert!(core::ptr::eq(w.tape, self), "var from another tape");
            if w.id < n {
                target[w.id] = true;
            }
        }
        // A node is relevant if some wrt node lies upstream of it.
        let mut relevant = target.clone();
        {
            let inner = self.inner.borrow();
            for i in 0..n {
                if !relevant[i] {
                    relevant[i] = inner.ops[i].parents().iter().flatten().any(|&p| relevant[p]);
                }
            }
        }

        let mut grads: Vec<Option<Var<'t>>> = vec![None; n];
        if relevant[out.id] {
            let (r, c) = out.shape();
            grads[out.id] = Some(self.leaf(Tensor::filled(r, c, 1.0)));
        }
        for i in (0..n).rev() {
            if !relevant[i] {
                continue;
            }
            let Some(g) = grads[i] else { continue };
            let y = self.var(i);
            let mut send = |p: usize, contribution: &dyn Fn() -> Var<'t>| {
                if relevant[p] {
                    let c = contribution();
                    grads[p] = Some(match grads[p] {
                        Some(old) => old + c,
                        None => c,
                    });
                }
            };
            match self.op(i) {
                Op::Leaf => {}
                Op::MatMul { a, b, ta, tb } => {
                    let (va, vb) = (self.var(a), self.var(b));
                    send(a, &|| if ta { vb.matmul_t(tb, g, true) } else { g.matmul_t(false, vb, !tb) });
                    send(b, &|| if tb { g.matmul_t(true, va, ta) } else { va.matmul_t(!ta, g, false) });
                }
                Op::Transpose(a) => send(a, &|| g.t()),
                Op::Add(a, b) => {
                    send(a, &|| g);
                    send(b, &|| g);
                }
                Op::Sub(a, b) => {
                    send(a, &|| g);
                    send(b, &|| -g);
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.var(a), self.var(b));
                    send(a, &|| g * vb);
                    send(b, &|| g * va);
                }
                Op::Neg(a) => send(a, &|| -g),
                Op::Scale(a, c) => send(a, &|| g.scale(c)),
                Op::AddScalar(a, _) => send(a, &|| g),
                Op::Recip(a) => send(a, &|| -(g * y * y)),
                Op::Relu(a) => send(a, &|| g * self.mask(a, |x| x > 0.0)),
                Op::Clamp(a, lo, hi) => send(a, &|| g * self.mask(a, |x| lo <= x && x <= hi)),
                Op::Sigmoid(a) => send(a, &|| g * (y * (-y).add_scalar(1.0))),
                Op::Log(a) => send(a, &|| g * self.var(a).recip()),
                Op::Sqrt(a) => send(a, &|| (g * y.recip()).scale(0.5)),
                Op::Exp(a) => send(a, &|| g * y),
                Op::Sum(a) => {
                    let (r, c) = self.var(a).shape();
                    send(a, &|| g.broadcast(r, c));
                }
                Op::Broadcast(a, ..) => send(a, &|| g.sum()),
                Op::SumRows(a) => {
                    let r = self.var(a).shape().0;
                    send(a, &|| g.broadcast_rows(r));
                }
                Op::BroadcastRows(a, _) => send(a, &|| g.sum_rows()),
                Op::SumCols(a) => {
                    let c = self.var(a).shape().1;
                    send(a, &|| g.broadcast_cols(c));
                }
                Op::BroadcastCols(a, _) => send(a, &|| g.sum_cols()),
                Op::Slice { a, start, .. } => {
                    let (r, c) = self.var(a).shape();
                    send(a, &|| g.embed(start, r, c));
                }
                Op::Embed { a, start, .. } => {
                    let (r, c) = self.var(a).shape();
                    send(a, &|| g.slice(start, r, c));
                }
            }
        }
        self.check()?;
        Ok(wrt
            .iter()
            .map(|w| match grads.get(w.id).copied().flatten() {
                Some(g) => g,
                None => {
                    let (r, c) = w.shape();
                    self.leaf(Tensor::zeros(r, c))
                }
            })
            .collect())
    }

    fn mask(&self, id: usize, keep: impl Fn(f64) -> bool) -> Var<'_> {
        let m = self.inner.borrow().values[id].map(|x| if keep(x) { 1.0 } else { 0.0 });
        self.leaf(m)
    }
}

impl<'t> Var<'t> {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn value(&self) -> Tensor {
        self.tape.inner.borrow().values[self.id].clone()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.tape.inner.borrow().values[self.id].data.clone()
    }

    pub fn item(&self) -> f64 {
        self.tape.inner.borrow().values[self.id].item()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.tape.inner.borrow().values[self.id].shape()
    }

    pub fn len(&self) -> usize {
        let (r, c) = self.shape();
        r * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, op: Op) -> Var<'t> {
        self.tape.push(op)
    }

    fn same_tape(&self, other: &Var<'t>) {
        assert!(core::ptr::eq(self.tape, other.tape), "vars from different tapes");
    }

    pub fn matmul(self, other: Var<'t>) -> Var<'t> {
        self.matmul_t(false, other, false)
    }

    /// `op(self) · op(other)`, transposing each side when its flag is set.
    pub fn matmul_t(self, ta: bool, other: Var<'t>, tb: bool) -> Var<'t> {
        self.same_tape(&other);
        self.push(Op::MatMul { a: self.id, b: other.id, ta, tb })
    }

    pub fn t(self) -> Var<'t> {
        self.push(Op::Transpose(self.id))
    }

    pub fn scale(self, c: f64) -> Var<'t> {
        self.push(Op::Scale(self.id, c))
    }

    pub fn add_scalar(self, c: f64) -> Var<'t> {
        self.push(Op::AddScalar(self.id, c))
    }

    pub fn recip(self) -> Var<'t> {
        self.push(Op::Recip(self.id))
    }

    /// ReLU; the subgradient at exactly zero is zero.
    pub fn relu(self) -> Var<'t> {
        self.push(Op::Relu(self.id))
    }

    /// Elementwise clamp to `[lo, hi]`; the derivative is one on the closed interval.
    pub fn clamp(self, lo: f64, hi: f64) -> Var<'t> {
        self.push(Op::Clamp(self.id, lo, hi))
    }

    pub fn sigmoid(self) -> Var<'t> {
        self.push(Op::Sigmoid(self.id))
    }

    pub fn ln(self) -> Var<'t> {
        self.push(Op::Log(self.id))
    }

    pub fn sqrt(self) -> Var<'t> {
        self.push(Op::Sqrt(self.id))
    }

    pub fn exp(self) -> Var<'t> {
        self.push(Op::Exp(self.id))
    }

    pub fn square(self) -> Var<'t> {
        self * self
    }

    pub fn sum(self) -> Var<'t> {
        self.push(Op::Sum(self.id))
    }

    pub fn mean(self) -> Var<'t> {
        let n = self.len();
        self.sum().scale(1.0 / n as f64)
    }

    /// Inner product of two same-shaped vars, as a scalar.
    pub fn dot(self, other: Var<'t>) -> Var<'t> {
        (self * other).sum()
    }

    /// Repeats a `1x1` var into a `rows x cols` one.
    pub fn broadcast(self, rows: usize, cols: usize) -> Var<'t> {
        assert_eq!(self.shape(), (1, 1), "broadcast needs a scalar");
        self.push(Op::Broadcast(self.id, rows, cols))
    }

    pub fn sum_rows(self) -> Var<'t> {
        self.push(Op::SumRows(self.id))
    }

    pub fn broadcast_rows(self, rows: usize) -> Var<'t> {
        assert_eq!(self.shape().0, 1, "broadcast_rows needs a row vector");
        self.push(Op::BroadcastRows(self.id, rows))
    }

    pub fn sum_cols(self) -> Var<'t> {
        self.push(Op::SumCols(self.id))
    }

    pub fn broadcast_cols(self, cols: usize) -> Var<'t> {
        assert_eq!(self.shape().1, 1, "broadcast_cols needs a column vector");
        self.push(Op::BroadcastCols(self.id, cols))
    }

    /// Entries `start..start + rows*cols` of the row-major data, as `rows x cols`.
    pub fn slice(self, start: usize, rows: usize, cols: usize) -> Var<'t> {
        assert!(start + rows * cols <= self.len(), "slice out of range");
        self.push(Op::Slice { a: self.id, start, rows, cols })
    }

    /// Places this var's data at flat offset `start` of a zero `rows x cols` tensor.
    pub fn embed(self, start: usize, rows: usize, cols: usize) -> Var<'t> {
        assert!(start + self.len() <= rows * cols, "embed out of range");
        self.push(Op::Embed { a: self.id, start, rows, cols })
    }

    pub fn reshape(self, rows: usize, cols: usize) -> Var<'t> {
        assert_eq!(rows * cols, self.len(), "reshape changes the entry count");
        self.slice(0, rows, cols)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;

    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.same_tape(&rhs);
        assert_eq!(self.shape(), rhs.shape(), "add of mismatched shapes");
        self.push(Op::Add(self.id, rhs.id))
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;

    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.same_tape(&rhs);
        assert_eq!(self.shape(), rhs.shape(), "sub of mismatched shapes");
        self.push(Op::Sub(self.id, rhs.id))
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;

    /// Elementwise product.
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        self.same_tape(&rhs);
        assert_eq!(self.shape(), rhs.shape(), "mul of mismatched shapes");
        self.push(Op::Mul(self.id, rhs.id))
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;

    fn neg(self) -> Var<'t> {
        self.push(Op::Neg(self.id))
    }
}
