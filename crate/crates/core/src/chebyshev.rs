//! Tensor-product Chebyshev basis on `[-1, 1]^D`.
//!
//! Fields are sampled at the interior (Gauss) Chebyshev nodes and mapped to
//! *scaled* coefficients `ǎ_m = a_m / γ_m` by the orthonormal DCT-II, so that
//! the node-to-coefficient map `C` satisfies `C·Cᵀ = I`. Per axis,
//! `γ_0 = M^{-1/2}` and `γ_{m≥1} = (2/M)^{1/2}`.
//!
//! # Vector ordering
//!
//! Node and coefficient vectors are flattened with axis 1 varying fastest:
//! `n = n_1 + M_1·n_2 + M_1·M_2·n_3 + …`. Multi-axis operators are therefore
//! Kronecker products written with the highest axis outermost,
//! `I_{M_D} ⊗ … ⊗ X_{M_d} ⊗ … ⊗ I_{M_1}`. [`BasisSpec::flat_index`] is the
//! single place this convention is encoded.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, mat_vec};

/// Dimensions and per-axis resolutions of a tensor-product Chebyshev basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BasisWire", into = "BasisWire")]
pub struct BasisSpec {
    sizes: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct BasisWire {
    dims: usize,
    sizes: Vec<usize>,
}

impl TryFrom<BasisWire> for BasisSpec {
    type Error = Error;

    fn try_from(w: BasisWire) -> Result<Self> {
        if w.dims != w.sizes.len() {
            return Err(Error::InvalidParameter(format!(
                "basis dims = {} but {} sizes given",
                w.dims,
                w.sizes.len()
            )));
        }
        BasisSpec::new(w.sizes)
    }
}

impl From<BasisSpec> for BasisWire {
    fn from(b: BasisSpec) -> Self {
        BasisWire {
            dims: b.dims(),
            sizes: b.sizes,
        }
    }
}

impl BasisSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::EmptyBasis);
        }
        for &m in &sizes {
            check_resolution(m)?;
        }
        Ok(BasisSpec { sizes })
    }

    /// `dims` axes, each with resolution `m`.
    pub fn uniform(dims: usize, m: usize) -> Result<Self> {
        Self::new(vec![m; dims])
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `P = Π M_d`.
    pub fn total_size(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Flat position of a multi-index; axis 1 varies fastest.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dims());
        let mut flat = 0;
        let mut stride = 1;
        for (&n, &m) in multi.iter().zip(&self.sizes) {
            debug_assert!(n < m);
            flat += n * stride;
            stride *= m;
        }
        flat
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        self.sizes
            .iter()
            .map(|&m| {
                let n = flat % m;
                flat /= m;
                n
            })
            .collect()
    }

    /// Coordinates of node `flat` in `[-1, 1]^D`.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.sizes)
            .map(|(&n, &m)| node_value(n, m))
            .collect()
    }

    /// Scale factor `γ_m = Π_d γ_{m_d}` for coefficient `flat`.
    pub fn gamma(&self, flat: usize) -> f64 {
        self.multi_index(flat)
            .iter()
            .zip(&self.sizes)
            .map(|(&m, &size)| gamma_1d(m, size))
            .product()
    }

    /// Samples `f` at every node, in flat order.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> NodeVector {
        let values = (0..self.total_size()).map(|n| f(&self.node(n))).collect();
        NodeVector {
            basis: self.clone(),
            values,
        }
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        let expected = self.total_size();
        if len != expected {
            return Err(Error::ShapeMismatch { expected, found: len });
        }
        Ok(())
    }

    pub fn check_same(&self, other: &BasisSpec) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch {
                left: self.sizes.clone(),
                right: other.sizes.clone(),
            });
        }
        Ok(())
    }
}

/// Field samples `u(p_n)` at the nodes of a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeVector {
    pub basis: BasisSpec,
    pub values: Vec<f64>,
}

/// Scaled Chebyshev coefficients `ǎ_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    pub basis: BasisSpec,
    pub values: Vec<f64>,
}

impl NodeVector {
    pub fn new(basis: BasisSpec, values: Vec<f64>) -> Result<Self> {
        basis.check_len(values.len())?;
        Ok(NodeVector { basis, values })
    }
}

impl CoeffVector {
    pub fn new(basis: BasisSpec, values: Vec<f64>) -> Result<Self> {
        basis.check_len(values.len())?;
        Ok(CoeffVector { basis, values })
    }

    pub fn zeros(basis: &BasisSpec) -> Self {
        CoeffVector {
            values: vec![0.0; basis.total_size()],
            basis: basis.clone(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A `P×P` operator on flat vectors of a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperatorMatrix {
    pub basis: BasisSpec,
    pub entries: Mat<f64>,
}

impl LinearOperatorMatrix {
    pub fn new(basis: BasisSpec, entries: Mat<f64>) -> Result<Self> {
        let p = basis.total_size();
        if entries.nrows() != p {
            return Err(Error::ShapeMismatch {
                expected: p,
                found: entries.nrows(),
            });
        }
        if entries.ncols() != p {
            return Err(Error::ShapeMismatch {
                expected: p,
                found: entries.ncols(),
            });
        }
        Ok(LinearOperatorMatrix { basis, entries })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.entries, x)
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &LinearOperatorMatrix) -> Result<LinearOperatorMatrix> {
        self.basis.check_same(&rhs.basis)?;
        Ok(LinearOperatorMatrix {
            basis: self.basis.clone(),
            entries: &self.entries * &rhs.entries,
        })
    }
}

fn check_resolution(m: usize) -> Result<()> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::InvalidResolution(m));
    }
    Ok(())
}

fn node_value(n: usize, m: usize) -> f64 {
    ((2 * n + 1) as f64 * PI / (2 * m) as f64).cos()
}

fn gamma_1d(m: usize, size: usize) -> f64 {
    if m == 0 {
        (size as f64).sqrt().recip()
    } else {
        (2.0 / size as f64).sqrt()
    }
}

/// Interior Chebyshev nodes `p_n = cos((2n+1)π/(2M))`, strictly decreasing.
pub fn nodes_1d(m: usize) -> Result<Vec<f64>> {
    check_resolution(m)?;
    Ok((0..m).map(|n| node_value(n, m)).collect())
}

/// Orthonormal DCT-II matrix, `C[m][n] = γ_m cos(m(2n+1)π/(2M))`.
pub fn dct_matrix_1d(m: usize) -> Result<Mat<f64>> {
    check_resolution(m)?;
    Ok(Mat::from_fn(m, m, |k, n| {
        gamma_1d(k, m) * ((k * (2 * n + 1)) as f64 * PI / (2 * m) as f64).cos()
    }))
}

/// Full `P×P` transform `C = C_{M_D} ⊗ … ⊗ C_{M_1}`.
pub fn transform_matrix(basis: &BasisSpec) -> Mat<f64> {
    basis
        .sizes()
        .iter()
        .rev()
        .map(|&m| dct_matrix_1d(m).expect("basis sizes are validated"))
        .reduce(|acc, c| kron(&acc, &c))
        .expect("basis has at least one axis")
}

/// Applies a per-axis `M_d×M_d` matrix along `axis` of a flat vector.
fn apply_along_axis(basis: &BasisSpec, values: &[f64], axis: usize, mat: &Mat<f64>) -> Vec<f64> {
    let sizes = basis.sizes();
    let m = sizes[axis];
    let inner: usize = sizes[..axis].iter().product();
    let outer: usize = sizes[axis + 1..].iter().product();
    let mut out = vec![0.0; values.len()];
    let mut line = vec![0.0; m];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * m * inner + i;
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = values[base + k * inner];
            }
            for r in 0..m {
                let mut acc = 0.0;
                for (k, &v) in line.iter().enumerate() {
                    acc += mat[(r, k)] * v;
                }
                out[base + r * inner] = acc;
            }
        }
    }
    out
}

/// Node samples to scaled coefficients, `a = C·u`.
pub fn forward(u: &NodeVector) -> Result<CoeffVector> {
    u.basis.check_len(u.values.len())?;
    let mut values = u.values.clone();
    for (axis, &m) in u.basis.sizes().iter().enumerate() {
        values = apply_along_axis(&u.basis, &values, axis, &dct_matrix_1d(m)?);
    }
    Ok(CoeffVector {
        basis: u.basis.clone(),
        values,
    })
}

/// Scaled coefficients to node samples, `u = Cᵀ·a`.
pub fn inverse(a: &CoeffVector) -> Result<NodeVector> {
    a.basis.check_len(a.values.len())?;
    let mut values = a.values.clone();
    for (axis, &m) in a.basis.sizes().iter().enumerate() {
        let ct = dct_matrix_1d(m)?.transpose().to_owned();
        values = apply_along_axis(&a.basis, &values, axis, &ct);
    }
    Ok(NodeVector {
        basis: a.basis.clone(),
        values,
    })
}

/// `T_0(q), …, T_{n-1}(q)` by the three-term recurrence.
fn chebyshev_values(q: f64, n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n);
    for k in 0..n {
        t.push(match k {
            0 => 1.0,
            1 => q,
            _ => 2.0 * q * t[k - 1] - t[k - 2],
        });
    }
    t
}

/// Evaluates the expansion `Σ_m ǎ_m γ_m Π_d T_{m_d}(q_d)` at `q`.
pub fn eval_at(a: &CoeffVector, q: &[f64]) -> Result<f64> {
    let basis = &a.basis;
    basis.check_len(a.values.len())?;
    if q.len() != basis.dims() {
        return Err(Error::ShapeMismatch {
            expected: basis.dims(),
            found: q.len(),
        });
    }
    if q.iter().any(|x| !(-1.0..=1.0).contains(x)) {
        return Err(Error::OutsideDomain(q.to_vec()));
    }
    // per-axis γ_m T_m(q_d)
    let scaled: Vec<Vec<f64>> = q
        .iter()
        .zip(basis.sizes())
        .map(|(&x, &m)| {
            chebyshev_values(x, m)
                .into_iter()
                .enumerate()
                .map(|(k, t)| gamma_1d(k, m) * t)
                .collect()
        })
        .collect();
    let mut sum = 0.0;
    for (flat, &c) in a.values.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let w: f64 = basis
            .multi_index(flat)
            .iter()
            .enumerate()
            .map(|(d, &m)| scaled[d][m])
            .product();
        sum += c * w;
    }
    Ok(sum)
}

/// Classical derivative matrix on *unscaled* coefficients:
/// `D[m][n] = 2n / c_m` for `n > m`, `n - m` odd, with `c_0 = 2`, `c_{m≥1} = 1`.
pub fn chebyshev_derivative_matrix(m: usize) -> Result<Mat<f64>> {
    check_resolution(m)?;
    Ok(Mat::from_fn(m, m, |row, col| {
        if col > row && (col - row) % 2 == 1 {
            let c = if row == 0 { 2.0 } else { 1.0 };
            2.0 * col as f64 / c
        } else {
            0.0
        }
    }))
}

/// Derivative matrix on scaled coefficients, `D̃ = Γ⁻¹·D·Γ`.
pub fn diff_matrix_1d(m: usize) -> Result<Mat<f64>> {
    let d = chebyshev_derivative_matrix(m)?;
    Ok(Mat::from_fn(m, m, |row, col| {
        d[(row, col)] * gamma_1d(col, m) / gamma_1d(row, m)
    }))
}

/// `∂/∂q_axis` on scaled coefficient vectors; `axis` is zero-based.
pub fn diff_operator(basis: &BasisSpec, axis: usize) -> Result<LinearOperatorMatrix> {
    let dims = basis.dims();
    if axis >= dims {
        return Err(Error::AxisOutOfRange { axis, dims });
    }
    let mut entries: Option<Mat<f64>> = None;
    for d in (0..dims).rev() {
        let m = basis.sizes()[d];
        let factor = if d == axis {
            diff_matrix_1d(m)?
        } else {
            Mat::identity(m, m)
        };
        entries = Some(match entries {
            None => factor,
            Some(acc) => kron(&acc, &factor),
        });
    }
    LinearOperatorMatrix::new(basis.clone(), entries.expect("dims >= 1"))
}
