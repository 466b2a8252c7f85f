//! Dense 1-D/2-D real arithmetic in 64-bit precision, plus a central-difference
//! gradient checker. Row-major storage, no views or strides; shapes here are
//! small enough that clarity wins.

use crate::error::{Error, Result};

/// Row-major dense matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix {rows}x{cols} expects {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// out = self · v, without allocating. Callers guarantee shapes.
    pub(crate) fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(v) {
                acc += w * x;
            }
            *o = acc;
        }
    }

    /// out += selfᵀ · v (used to push gradients back through a weight matrix).
    pub(crate) fn matvec_t_acc(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, x) in v.iter().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * x;
            }
        }
    }

    /// self += a · bᵀ (outer-product gradient accumulation).
    pub(crate) fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        for (r, x) in a.iter().enumerate() {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (o, y) in row.iter_mut().zip(b) {
                *o += x * y;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Dense f64 vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    pub data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Standard matrix-vector product.
pub fn matvec(m: &Matrix, v: &Vector) -> Result<Vector> {
    if m.cols != v.len() {
        return Err(Error::Shape(format!(
            "matvec: {}x{} . {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    let mut out = Vector::zeros(m.rows);
    m.matvec_into(&v.data, &mut out.data);
    Ok(out)
}

/// Numerically stable softmax (max-subtraction before exponentiating).
pub fn softmax(v: &Vector) -> Result<Vector> {
    let out = softmax_slice(&v.data)?;
    Ok(Vector::new(out))
}

pub(crate) fn softmax_slice(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Shape("softmax of empty vector".into()));
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for x in &mut out {
        *x /= sum;
    }
    Ok(out)
}

/// log(Σ exp(v)) via the same max-subtraction trick; used by the stable
/// cross-entropy path.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn zip_check(a: &Vector, b: &Vector, op: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "{op}: length {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

pub fn add(a: &Vector, b: &Vector) -> Result<Vector> {
    zip_check(a, b, "add")?;
    Ok(Vector::new(
        a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect(),
    ))
}

pub fn sub(a: &Vector, b: &Vector) -> Result<Vector> {
    zip_check(a, b, "sub")?;
    Ok(Vector::new(
        a.data.iter().zip(&b.data).map(|(x, y)| x - y).collect(),
    ))
}

pub fn mul(a: &Vector, b: &Vector) -> Result<Vector> {
    zip_check(a, b, "mul")?;
    Ok(Vector::new(
        a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    ))
}

pub fn tanh(v: &Vector) -> Vector {
    Vector::new(v.data.iter().map(|x| x.tanh()).collect())
}

pub fn sigmoid(v: &Vector) -> Vector {
    Vector::new(v.data.iter().map(|x| sigmoid_scalar(*x)).collect())
}

#[inline]
pub(crate) fn sigmoid_scalar(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a finite-difference gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Flat index of the worst parameter.
    pub worst_index: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

/// Compare an analytic gradient against central differences of `loss_fn`.
///
/// `loss_fn` must be deterministic (disable dropout before checking). The
/// relative error per parameter is |a − n| / max(1e-8, |a| + |n|).
pub fn check_gradients<F>(
    mut loss_fn: F,
    params: &[f64],
    analytic: &[f64],
    epsilon: f64,
    tolerance: f64,
) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if epsilon <= 0.0 {
        return Err(Error::Config("gradient check epsilon must be > 0".into()));
    }
    if params.len() != analytic.len() {
        return Err(Error::Shape(format!(
            "gradient check: {} params vs {} gradient entries",
            params.len(),
            analytic.len()
        )));
    }
    let mut probe = params.to_vec();
    let mut max_rel = 0.0;
    let mut worst = 0;
    for i in 0..probe.len() {
        let orig = probe[i];
        probe[i] = orig + epsilon;
        let up = loss_fn(&probe)?;
        probe[i] = orig - epsilon;
        let down = loss_fn(&probe)?;
        probe[i] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite loss while probing parameter {i}"
            )));
        }
        let numeric = (up - down) / (2.0 * epsilon);
        let a = analytic[i];
        let rel = (a - numeric).abs() / f64::max(1e-8, a.abs() + numeric.abs());
        if rel > max_rel {
            max_rel = rel;
            worst = i;
        }
    }
    Ok(GradCheckReport {
        max_rel_error: max_rel,
        worst_index: worst,
        tolerance,
    })
}
